"""Catalog of Weibull tail-distributions with exact inverse-transform samplers.

Each model exposes its cumulative hazard ``H = -log(1 - F)`` and the
generalized inverse ``H^<-``; quantiles are ``F^<-(u) = H^<-(-log(1 - u))``.
Working with ``H`` directly keeps the deep upper tail accurate where
``1 - F`` underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.special import gammaln

from .errors import BadParam, DomainError, InversionFailed, UnknownModel
from .sample import SortedSample, ingest
from .special import _ppf_lower, log_gammaincc, norm_logpdf, norm_logsf

RNG_NAME = "numpy.Philox (counter-based), SeedSequence(entropy=seed, spawn_key=(replication,))"


class _NegInf:
    """Marker for rho = -infinity (Weibull row); deliberately not a float."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "RHO_NEG_INF"

    def __str__(self):
        return "-inf"

    def __reduce__(self):
        return (_NegInf, ())


RHO_NEG_INF = _NegInf()


def rho_to_json(rho):
    return "-inf" if rho is RHO_NEG_INF else rho


# --------------------------------------------------------------------------
# random numbers

def make_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """Philox generator for ``seed`` (and replication ``index``, if given)."""
    spawn_key = () if index is None else (int(index),)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


def open_uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    # (2m + 1) / 2^53 with m uniform on 52 bits: exact, strictly inside (0, 1)
    m = rng.integers(0, 1 << 52, size=size, dtype=np.int64)
    return np.ldexp((2 * m + 1).astype(np.float64), -53)


# --------------------------------------------------------------------------
# safeguarded Newton on H(x) = t

def _invert_hazard(H, hazard, t, lo, x0, max_iter=200):
    """Solve ``H(x) = t`` elementwise given ``H(lo) <= t`` and a guess ``x0``."""
    t = np.asarray(t, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), t.shape).copy()
    hi = np.maximum(np.asarray(x0, dtype=float), lo + 1.0)
    for _ in range(200):
        short = H(hi) < t
        if not short.any():
            break
        lo = np.where(short, hi, lo)
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise InversionFailed("could not bracket the root")
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    tol = 1e-14 * np.maximum(t, 1e-300)
    for _ in range(max_iter):
        f = H(x) - t
        done = (np.abs(f) <= tol) | (hi - lo <= 4e-16 * np.abs(hi))
        if done.all():
            return x
        lo = np.where(f < 0, x, lo)
        hi = np.where(f > 0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            step = x - f / hazard(x)
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        step = np.where(bad, 0.5 * (lo + hi), step)
        x = np.where(done, x, step)
    raise InversionFailed(f"H^<- did not converge in {max_iter} iterations")


# --------------------------------------------------------------------------
# models

@dataclass(frozen=True)
class TailModel:
    """Base class: subclasses provide ``H``, ``hazard``/``h_inverse`` and ``b``."""

    family: ClassVar[str] = ""
    param_names: ClassVar[tuple] = ()
    defaults: ClassVar[dict] = {}
    survival_formula: ClassVar[str] = ""
    theta_formula: ClassVar[str] = ""
    b_formula: ClassVar[str] = ""
    rho: ClassVar[object] = -1.0
    lower: ClassVar[float] = -math.inf

    @property
    def name(self) -> str:
        return self.family

    @property
    def params(self) -> dict:
        return {_DISPLAY.get(p, p): getattr(self, p) for p in self.param_names}

    @property
    def theta(self) -> float:
        raise NotImplementedError

    def spec_string(self) -> str:
        if not self.param_names:
            return self.family
        return self.family + ":" + ",".join(f"{k}={v!r}" for k, v in self.params.items())

    def cum_hazard(self, x):
        """``H(x) = -log(1 - F(x))``."""
        raise NotImplementedError

    def b(self, x):
        raise NotImplementedError

    def h_inverse(self, t):
        raise NotImplementedError

    def survival(self, x):
        return np.exp(-self.cum_hazard(x))

    def cdf(self, x):
        return -np.expm1(-self.cum_hazard(x))

    def quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        if np.any(~((u_arr > 0) & (u_arr < 1))):
            raise DomainError("quantile requires 0 < u < 1")
        out = self.h_inverse(-np.log1p(-u_arr))
        return float(out) if np.ndim(out) == 0 else out

    def describe(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "survival": self.survival_formula,
            "theta_formula": self.theta_formula,
            "theta": self.theta,
            "b_formula": self.b_formula,
            "rho": rho_to_json(self.rho),
        }


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise BadParam(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class Weibull(TailModel):
    alpha: float = 2.0
    lam: float = 1.0

    family: ClassVar[str] = "weibull"
    param_names: ClassVar[tuple] = ("alpha", "lam")
    survival_formula: ClassVar[str] = "exp(-(x/lambda)^alpha)"
    theta_formula: ClassVar[str] = "1/alpha"
    b_formula: ClassVar[str] = "0"
    rho: ClassVar[object] = RHO_NEG_INF
    lower: ClassVar[float] = 0.0

    def __post_init__(self):
        _positive("alpha", self.alpha)
        _positive("lambda", self.lam)

    @property
    def theta(self):
        return 1.0 / self.alpha

    def cum_hazard(self, x):
        x = np.asarray(x, dtype=float)
        return (np.maximum(x, 0.0) / self.lam) ** self.alpha

    def h_inverse(self, t):
        return self.lam * np.asarray(t, dtype=float) ** (1.0 / self.alpha)

    def b(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Gaussian(TailModel):
    mu: float = 0.0
    sigma2: float = 1.0

    family: ClassVar[str] = "gaussian"
    param_names: ClassVar[tuple] = ("mu", "sigma2")
    survival_formula: ClassVar[str] = "(2 pi sigma2)^(-1/2) int_x^inf exp(-(t-mu)^2/(2 sigma2)) dt"
    theta_formula: ClassVar[str] = "1/2"
    b_formula: ClassVar[str] = "(1/4) log(x)/x"

    def __post_init__(self):
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu)):
            raise BadParam(f"mu must be finite, got {self.mu!r}")
        _positive("sigma2", self.sigma2)

    @property
    def theta(self):
        return 0.5

    @property
    def _sd(self):
        return math.sqrt(self.sigma2)

    def cum_hazard(self, x):
        return -norm_logsf((np.asarray(x, dtype=float) - self.mu) / self._sd)

    def h_inverse(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        z = np.empty_like(flat)
        # lower half: u = 1 - exp(-t) is accurate through expm1
        low = flat <= math.log(2.0)
        if low.any():
            with np.errstate(divide="ignore"):
                z[low] = np.where(flat[low] > 0, _ppf_lower(np.maximum(-np.expm1(-flat[low]), 1e-320)), -np.inf)
        s = np.exp(-flat)
        mid = ~low & (s >= 1e-300)
        if mid.any():
            z[mid] = -_ppf_lower(s[mid])
        deep = ~low & ~mid
        if deep.any():
            z[deep] = _deep_gaussian_tail(flat[deep])
        out = (self.mu + self._sd * z).reshape(t.shape)
        return out

    def b(self, x):
        x = np.asarray(x, dtype=float)
        return 0.25 * np.log(x) / x


def _deep_gaussian_tail(t):
    # -log S(z) = t for t > ~690, where exp(-t) underflows; Newton on log S
    z = np.sqrt(2.0 * t - np.log(4.0 * math.pi * t))
    for _ in range(50):
        f = -norm_logsf(z) - t
        z_new = z - f / np.exp(norm_logpdf(z) - norm_logsf(z))
        if np.all(np.abs(z_new - z) <= 1e-15 * z):
            return z_new
        z = z_new
    raise InversionFailed("deep Gaussian tail inversion did not converge")


@dataclass(frozen=True)
class Gamma(TailModel):
    """Rate ``beta``, shape ``alpha``."""

    beta: float = 1.0
    alpha: float = 2.0

    family: ClassVar[str] = "gamma"
    param_names: ClassVar[tuple] = ("beta", "alpha")
    survival_formula: ClassVar[str] = "beta^alpha/Gamma(alpha) int_x^inf t^(alpha-1) exp(-beta t) dt"
    theta_formula: ClassVar[str] = "1"
    b_formula: ClassVar[str] = "(1-alpha) log(x)/x"
    lower: ClassVar[float] = 0.0

    def __post_init__(self):
        _positive("beta", self.beta)
        _positive("alpha", self.alpha)

    @property
    def theta(self):
        return 1.0

    def cum_hazard(self, x):
        x = np.asarray(x, dtype=float)
        out = -log_gammaincc(self.alpha, np.maximum(x, 0.0).ravel() * self.beta)
        return out.reshape(x.shape)

    def hazard(self, x):
        y = np.asarray(x, dtype=float) * self.beta
        with np.errstate(divide="ignore"):
            log_pdf = (self.alpha - 1.0) * np.log(y) - y - gammaln(self.alpha)
        return self.beta * np.exp(log_pdf + self.cum_hazard(x))

    def h_inverse(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        a = self.alpha
        small = (flat * math.exp(gammaln(a + 1.0))) ** (1.0 / a)
        large = flat + (a - 1.0) * np.log(np.maximum(flat, 1.0))
        y0 = np.where(flat < 1.0, small, np.maximum(large, 1e-300))
        x = _invert_hazard(self.cum_hazard, self.hazard, flat, 0.0, y0 / self.beta)
        return np.where(flat == 0, 0.0, x).reshape(t.shape)

    def b(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - self.alpha) * np.log(x) / x


@dataclass(frozen=True)
class Benktander2(TailModel):
    """Benktander type II on ``x >= 1``: ``1 - F = x^(tau-1) exp(-(alpha/tau)(x^tau - 1))``."""

    alpha: float = 1.0
    tau: float = 0.5

    family: ClassVar[str] = "benktander2"
    param_names: ClassVar[tuple] = ("alpha", "tau")
    survival_formula: ClassVar[str] = "x^(tau-1) exp(-(alpha/tau)(x^tau - 1)), x >= 1"
    theta_formula: ClassVar[str] = "1/tau"
    b_formula: ClassVar[str] = "((1-tau)/tau^2) log(x)/x"
    lower: ClassVar[float] = 1.0

    def __post_init__(self):
        _positive("alpha", self.alpha)
        _positive("tau", self.tau)
        if self.tau > 1:
            raise BadParam(f"benktander2 requires 0 < tau <= 1, got {self.tau!r}")

    @property
    def theta(self):
        return 1.0 / self.tau

    def _h_log(self, w):
        # H as a function of w = log x >= 0
        return (1.0 - self.tau) * w + (self.alpha / self.tau) * np.expm1(self.tau * w)

    def cum_hazard(self, x):
        return self._h_log(np.log(np.maximum(np.asarray(x, dtype=float), 1.0)))

    def h_inverse(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        # (alpha/tau)(x^tau - 1) <= H(x), so this guess never undershoots
        w0 = np.log1p(self.tau * flat / self.alpha) / self.tau
        dh = lambda w: (1.0 - self.tau) + self.alpha * np.exp(self.tau * w)
        w = _invert_hazard(self._h_log, dh, flat, 0.0, w0)
        return np.where(flat == 0, 1.0, np.exp(w)).reshape(t.shape)

    def b(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - self.tau) / self.tau ** 2 * np.log(x) / x


@dataclass(frozen=True)
class Logistic(TailModel):
    family: ClassVar[str] = "logistic"
    survival_formula: ClassVar[str] = "2/(1 + exp(x)), x >= 0"
    theta_formula: ClassVar[str] = "1"
    b_formula: ClassVar[str] = "-log(2)/x"
    lower: ClassVar[float] = 0.0

    @property
    def theta(self):
        return 1.0

    def cum_hazard(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        # log((1 + e^x)/2) = log1p(expm1(x)/2), exact near 0; logaddexp beyond
        with np.errstate(over="ignore"):
            near = np.log1p(0.5 * np.expm1(np.minimum(x, 30.0)))
        return np.where(x <= 30.0, near, np.logaddexp(0.0, x) - math.log(2.0))

    def h_inverse(self, t):
        # log(2 e^t - 1) = t + log(2 - e^-t)
        t = np.asarray(t, dtype=float)
        return t + np.log1p(-np.expm1(-t))

    def b(self, x):
        return -math.log(2.0) / np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Evd(TailModel):
    """Gumbel law ``F(x) = exp(-exp(mu - x))``."""

    mu: float = 0.0

    family: ClassVar[str] = "evd"
    param_names: ClassVar[tuple] = ("mu",)
    survival_formula: ClassVar[str] = "1 - exp(-exp(mu - x))"
    theta_formula: ClassVar[str] = "1"
    b_formula: ClassVar[str] = "-mu/x"

    def __post_init__(self):
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu)):
            raise BadParam(f"mu must be finite, got {self.mu!r}")

    @property
    def theta(self):
        return 1.0

    def cum_hazard(self, x):
        with np.errstate(over="ignore"):
            y = np.exp(self.mu - np.asarray(x, dtype=float))
        return -_log1mexp(y)

    def h_inverse(self, t):
        t = np.asarray(t, dtype=float)
        # x = mu - log(-log(1 - e^-t)); for large t that is mu + t - e^-t/2 + ...
        with np.errstate(divide="ignore"):
            v = np.where(t > 30.0, -t + 0.5 * np.exp(-t), np.log(-_log1mexp(np.minimum(t, 30.0))))
        return self.mu - v

    def b(self, x):
        return -self.mu / np.asarray(x, dtype=float)


def _log1mexp(y):
    # log(1 - e^-y) for y >= 0
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(y > math.log(2.0), np.log1p(-np.exp(-y)), np.log(-np.expm1(-y)))


FAMILIES = {cls.family: cls for cls in (Weibull, Gaussian, Gamma, Benktander2, Logistic, Evd)}
_ALIASES = {"lambda": "lam"}
_DISPLAY = {"lam": "lambda"}


def make_model(family: str, **params) -> TailModel:
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise UnknownModel(f"unknown model {family!r}; known: {', '.join(FAMILIES)}") from None
    kwargs = {}
    for key, value in params.items():
        key = _ALIASES.get(key, key)
        if key not in cls.param_names:
            raise BadParam(f"{family} has no parameter {key!r} (expected {', '.join(cls.param_names) or 'none'})")
        try:
            kwargs[key] = float(value)
        except (TypeError, ValueError):
            raise BadParam(f"parameter {key}={value!r} is not a number") from None
    return cls(**kwargs)


def parse_model(text: str) -> TailModel:
    """Parse ``"family[:key=value,...]"``, e.g. ``"weibull:alpha=2,lambda=1"``."""
    family, _, rest = text.strip().partition(":")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise BadParam(f"expected key=value, got {item!r}")
        params[key.strip()] = value.strip()
    return make_model(family.strip(), **params)


def catalog() -> list[TailModel]:
    return [cls() for cls in FAMILIES.values()]


def quantile(model: TailModel, u):
    return model.quantile(u)


def sample(model: TailModel, n: int, seed: int, index: int | None = None) -> SortedSample:
    """``n`` i.i.d. draws by inverse transform from a seeded Philox stream."""
    if n < 1:
        raise BadParam("n must be >= 1")
    s = open_uniforms(make_rng(seed, index), n)
    x = model.h_inverse(-np.log(s))
    return ingest(x)


def plugin_sample(theta: float, n: int) -> SortedSample:
    """Deterministic sample with ``X_{n-i+1,n} = (log(n/i))^theta`` (so ``X_{1,n} = 0``)."""
    i = np.arange(1, n + 1, dtype=float)
    return ingest(np.log1p((n - i) / i) ** theta)


def predicted_bias(model: TailModel, n: int) -> float:
    """``b(log n)``, the first-order bias of the estimators at sample size ``n``."""
    if n < 3:
        raise BadParam("predicted_bias needs n >= 3")
    return float(model.b(math.log(n)))

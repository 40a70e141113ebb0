"""Score functions W, their weight sequences and the functionals mu(W), sigma2(W).

    mu(W)     = int_0^1 W(x) log(1/x) dx
    sigma2(W) = int_0^1 int_0^1 W(x) W(y) (min(x, y) - x y) / (x y) dx dy

Both integrands may blow up at x -> 0 (|W| <= M x^-q with q < 1/2), so the
quadrature runs Gauss-Legendre on the dyadic panels [2^-(j+1), 2^-j] and
walks toward 0 until the panel contributions die out. For sigma2 the kink
along the diagonal is removed by splitting the square into two triangles;
by symmetry

    sigma2(W) = 2 int_0^1 W(x) (1 - x) / x * G(x) dx,   G(x) = int_0^x W(y) dy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadEpsilon, BadParam, IntegralDiverged, UnknownScore
from .sample import check_k

_GL_ORDER = 24
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
_MAX_PANELS = 1000  # keeps every node a normal double
_MIN_PANELS = 12
_BLOCK = 16


@dataclass(frozen=True)
class ScoreFunction:
    """A score function ``W`` on (0, 1) with its (A.4)-type envelope.

    ``M``, ``q`` and ``p`` are the claimed constants in
    ``|W| <= M x^-q`` and ``|W'| <= M x^-(p+q)``.
    """

    name: str
    w: Callable
    w_deriv: Optional[Callable] = None
    M: float = 1.0
    q: float = 0.0
    p: float = 0.0
    analytic_mu: Optional[float] = None
    analytic_sigma2: Optional[float] = None

    def __post_init__(self):
        if not self.M > 0:
            raise BadParam(f"envelope M must be positive, got {self.M!r}")
        if not 0 <= self.q < 0.5:
            raise BadParam(f"envelope q must lie in [0, 1/2), got {self.q!r}")
        if not self.p < 1:
            raise BadParam(f"envelope p must be < 1, got {self.p!r}")

    def __call__(self, x):
        return _evaluate(self.w, x)

    def deriv(self, x):
        if self.w_deriv is None:
            raise ValueError(f"score {self.name!r} has no derivative")
        return _evaluate(self.w_deriv, x)


def _evaluate(fn, x):
    x = np.asarray(x, dtype=float)
    try:
        out = np.asarray(fn(x), dtype=float)
    except (TypeError, ValueError):
        out = np.vectorize(lambda t: float(fn(float(t))), otypes=[float])(x)
    if out.shape != x.shape:
        out = np.broadcast_to(out, x.shape).copy()
    return out


class ExprFunction:
    """Callable built from a numpy expression in the variable ``x``.

    Intended for trusted user config files only: the expression is passed
    to ``eval`` with a numpy-only namespace.
    """

    _NAMESPACE = {
        "np": np, "log": np.log, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs,
        "power": np.power, "where": np.where, "minimum": np.minimum,
        "maximum": np.maximum, "sin": np.sin, "cos": np.cos, "pi": np.pi, "e": np.e,
    }

    def __init__(self, expr: str):
        self.expr = expr
        self._code = compile(expr, "<score expr>", "eval")

    def __call__(self, x):
        env = dict(self._NAMESPACE)
        env["x"] = x
        try:
            return eval(self._code, {"__builtins__": {}}, env)
        except NameError as exc:
            raise BadParam(f"score expression {self.expr!r}: {exc}") from None

    def __getstate__(self):
        return {"expr": self.expr}

    def __setstate__(self, state):
        self.__init__(state["expr"])

    def __repr__(self):
        return f"ExprFunction({self.expr!r})"


def _one(x):
    return np.ones_like(x)


def _zero(x):
    return np.zeros_like(x)


def _zipf_w(x):
    return -(np.log(x) + 1.0)


def _zipf_deriv(x):
    return -1.0 / x


HILL = ScoreFunction("hill", _one, _zero, M=1.0, q=0.0, p=0.0, analytic_mu=1.0, analytic_sigma2=1.0)
# |log x + 1| <= 3 x^-1/4 and |1/x| = 3 x^-1 / 3, hence q = 1/4, p = 3/4
ZIPF = ScoreFunction("zipf", _zipf_w, _zipf_deriv, M=3.0, q=0.25, p=0.75, analytic_mu=1.0, analytic_sigma2=2.0)

_BUILTIN = {"hill": HILL, "zipf": ZIPF}


def builtin_scores() -> dict:
    return dict(_BUILTIN)


def score_from_config(cfg: dict) -> ScoreFunction:
    """Build a score from ``{"name", "expr", ["deriv"], "M", "q", "p", ["mu"], ["sigma2"]}``."""
    try:
        name = str(cfg["name"])
        expr = cfg["expr"]
    except KeyError as exc:
        raise BadParam(f"score config is missing {exc.args[0]!r}") from None
    try:
        w = ExprFunction(expr)
        deriv = ExprFunction(cfg["deriv"]) if cfg.get("deriv") else None
    except SyntaxError as exc:
        raise BadParam(f"bad expression in score {name!r}: {exc.msg}") from None
    return ScoreFunction(
        name, w, deriv,
        M=float(cfg.get("M", 1.0)), q=float(cfg.get("q", 0.0)), p=float(cfg.get("p", 0.0)),
        analytic_mu=cfg.get("mu"), analytic_sigma2=cfg.get("sigma2"),
    )


def load_scores(path) -> dict:
    """Read custom scores from a JSON file: a list, or ``{"scores": [...]}``."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("scores", [])
    return {s.name: s for s in map(score_from_config, data)}


def get_score(name, extra: Optional[dict] = None) -> ScoreFunction:
    if isinstance(name, ScoreFunction):
        return name
    if extra and name in extra:
        return extra[name]
    try:
        return _BUILTIN[name]
    except KeyError:
        known = sorted(set(_BUILTIN) | set(extra or ()))
        raise UnknownScore(f"unknown score {name!r}; known: {', '.join(known)}") from None


# --------------------------------------------------------------------------
# weights

@dataclass(frozen=True)
class WeightSequence:
    alphas: np.ndarray
    eps_sup: float
    score_name: str = ""

    def __post_init__(self):
        self.alphas.setflags(write=False)

    @property
    def k(self) -> int:
        return self.alphas.size + 1


def weights_from_score(f: ScoreFunction, n: int, k: int, eps=None) -> WeightSequence:
    """``alpha_i = W(i/k) + eps_i`` for ``i = 1..k-1``."""
    check_k(n, k)
    base = f(np.arange(1, k) / k)
    if eps is None:
        return WeightSequence(base, 0.0, f.name)
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (k - 1,):
        raise BadEpsilon(f"eps must have length k-1 = {k - 1}, got shape {eps.shape}")
    sup = float(np.max(np.abs(eps))) if eps.size else 0.0
    return WeightSequence(base + eps, sup, f.name)


# --------------------------------------------------------------------------
# quadrature

def _panel_nodes(j0: int, j1: int):
    # nodes/weights for panels j0..j1-1, shape (panels, order)
    lo = np.ldexp(1.0, -(np.arange(j0, j1) + 1))[:, None]
    half = 0.5 * lo  # (b - a) / 2 with b = 2a
    return lo + half * (_GL_NODES + 1.0), half * _GL_WEIGHTS


def _tail_estimate(c_prev, c_last):
    if c_prev == 0.0:
        return 0.0 if c_last == 0.0 else math.inf
    r = abs(c_last / c_prev)
    if r >= 1.0:
        return math.inf
    return abs(c_last) * r / (1.0 - r)


def _walk(block_values, tol, exhaustive=False):
    """Sum panel integrals from [1/2, 1] toward 0.

    ``block_values(j0, j1, x)`` returns integrand values at the nodes ``x``
    of panels ``j0..j1-1``. Stops once the last panel plus a geometric tail
    estimate falls below ``tol`` (or walks all panels if ``exhaustive``).
    """
    contribs = []
    while len(contribs) < _MAX_PANELS:
        j0 = len(contribs)
        j1 = min(j0 + _BLOCK, _MAX_PANELS)
        x, wts = _panel_nodes(j0, j1)
        vals = block_values(j0, j1, x)
        if not np.all(np.isfinite(vals)):
            raise IntegralDiverged("integrand is not finite on (0, 1)")
        contribs.extend((vals * wts).sum(axis=1).tolist())
        j = len(contribs)
        if exhaustive or j < _MIN_PANELS:
            continue
        last = contribs[-1]
        tail = _tail_estimate(contribs[-2], last)
        if abs(last) + tail < tol:
            return math.fsum(contribs) + math.copysign(tail, last), np.array(contribs)
        if j >= 64 and tail == math.inf and abs(last) > tol:
            raise IntegralDiverged("panel contributions do not decay toward 0")
    panels = np.array(contribs)
    tail = _tail_estimate(contribs[-2], contribs[-1])
    if not exhaustive or tail == math.inf:
        raise IntegralDiverged(f"no convergence after {_MAX_PANELS} dyadic panels")
    return math.fsum(contribs) + math.copysign(tail, contribs[-1]), panels


def dyadic_panels(f: Callable, tol: float = 1e-13):
    """Integrate ``f`` over (0, 1] on the panels ``[2^-(j+1), 2^-j]``.

    Returns ``(total, panels)``; ``panels[j]`` is the integral over panel
    ``j`` and ``total`` includes a geometric estimate of the unvisited tail.
    Raises IntegralDiverged when contributions stop shrinking toward 0.
    """
    return _walk(lambda j0, j1, x: _evaluate(f, x), tol)


def mu_quadrature(f: ScoreFunction, tol: float = 1e-9) -> float:
    return dyadic_panels(lambda x: f(x) * -np.log(x), tol * 1e-3)[0]


def sigma2_quadrature(f: ScoreFunction, tol: float = 1e-7) -> float:
    # G at every panel's left end, from W's panel integrals over the full depth
    _, w_panels = _walk(lambda j0, j1, x: f(x), 0.0, exhaustive=True)
    deep_tail = _tail_estimate(w_panels[-2], w_panels[-1])
    g_left = np.cumsum(w_panels[::-1])[::-1] - w_panels + deep_tail

    def outer(j0, j1, x):
        lo = np.ldexp(1.0, -(np.arange(j0, j1) + 1))[:, None]
        half = 0.5 * (x - lo)
        inner = lo[..., None] + half[..., None] * (_GL_NODES + 1.0)
        g = g_left[j0:j1, None] + (f(inner) * _GL_WEIGHTS).sum(axis=-1) * half
        return f(x) * (g / x) * (1.0 - x)

    return 2.0 * _walk(outer, tol * 1e-3)[0]


def mu(f: ScoreFunction, use_analytic: bool = True) -> float:
    """``int_0^1 W(x) log(1/x) dx``; the analytic value is preferred when known."""
    if use_analytic and f.analytic_mu is not None:
        return float(f.analytic_mu)
    return mu_quadrature(f)


def sigma2(f: ScoreFunction, use_analytic: bool = True) -> float:
    """Limiting-variance double integral of ``W`` (see module docstring)."""
    if use_analytic and f.analytic_sigma2 is not None:
        return float(f.analytic_sigma2)
    return sigma2_quadrature(f)


# --------------------------------------------------------------------------
# envelope

@dataclass(frozen=True)
class EnvelopeReport:
    ok: bool
    w_margin: float
    deriv_margin: Optional[float]
    worst_x: float
    grid: np.ndarray = field(repr=False)

    def as_dict(self):
        return {"ok": self.ok, "w_margin": self.w_margin,
                "deriv_margin": self.deriv_margin, "worst_x": self.worst_x}


def envelope_grid(grid_size: int) -> np.ndarray:
    n_low = grid_size // 2
    low = np.logspace(-300, math.log10(0.5), n_low, endpoint=False)
    high = 1.0 - np.logspace(math.log10(0.5), -12, grid_size - n_low)
    return np.concatenate([low, high])


def check_envelope(f: ScoreFunction, grid_size: int = 200) -> EnvelopeReport:
    """Check ``|W| <= M x^-q`` and ``|W'| <= M x^-(p+q)`` on a grid.

    Margins are relative, ``1 - |W| / bound``; negative means violated.
    A pass on a grid is evidence, not proof.
    """
    if grid_size < 10:
        raise ValueError("grid_size must be at least 10")
    x = envelope_grid(grid_size)
    logx = np.log(x)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        bound_w = np.log(f.M) - f.q * logx
        mw = 1.0 - np.exp(np.log(np.abs(f(x))) - bound_w)
        margins = [mw]
        md = None
        if f.w_deriv is not None:
            bound_d = np.log(f.M) - (f.p + f.q) * logx
            md = 1.0 - np.exp(np.log(np.abs(f.deriv(x))) - bound_d)
            margins.append(md)
    worst = np.minimum.reduce([np.nan_to_num(m, nan=-np.inf) for m in margins])
    i = int(np.argmin(worst))
    w_margin = float(np.nan_to_num(mw, nan=-np.inf).min())
    d_margin = None if md is None else float(np.nan_to_num(md, nan=-np.inf).min())
    ok = w_margin >= 0 and (d_margin is None or d_margin >= 0)
    return EnvelopeReport(ok, w_margin, d_margin, float(x[i]), x)

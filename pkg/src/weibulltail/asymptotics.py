"""Limiting normal law of the weighted estimators and its finite-sample use.

For an intermediate sequence with ``k^(1/2) b(log n) -> lambda``,

    k^(1/2) (theta_hat - theta)  ->  N(lambda, theta^2 sigma2(W) / mu(W)^2).

``lambda`` is plugged in as ``k^(1/2) b(log n)`` when a tail model is known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import BadParam, DegenerateScore
from .scorefn import ScoreFunction, mu, sigma2
from .special import norm_ppf
from .tailmodels import TailModel

# flag a condition magnitude above this value; a limit condition has no
# finite-sample threshold, so this is a convention only
ADVISORY_THRESHOLD = 1.0


@dataclass(frozen=True)
class LimitLaw:
    bias_lambda: float
    variance: float
    k: int
    score_name: str
    variance_factor: float  # sigma2(W) / mu(W)^2

    def as_dict(self):
        return {"bias_lambda": self.bias_lambda, "variance": self.variance, "k": self.k,
                "score": self.score_name, "variance_factor": self.variance_factor}


def limit_law(theta: float, f: ScoreFunction, model: Optional[TailModel], n: int, k: int) -> LimitLaw:
    if not theta > 0:
        raise BadParam(f"theta must be positive, got {theta!r}")
    if k < 2:
        raise BadParam(f"k must be >= 2, got {k!r}")
    m = mu(f)
    if m == 0:
        raise DegenerateScore(f"mu({f.name}) = 0, the limiting variance is undefined")
    factor = sigma2(f) / (m * m)
    lam = 0.0
    if model is not None:
        lam = math.sqrt(k) * float(model.b(math.log(n)))
    return LimitLaw(lam, theta * theta * factor, k, f.name, factor)


def confidence_interval(theta_hat: float, law: LimitLaw, level: float = 0.95) -> tuple[float, float]:
    """Bias-corrected normal interval with ``theta_hat`` plugged into the variance."""
    if not 0 < level < 1:
        raise BadParam(f"level must lie in (0, 1), got {level!r}")
    root_k = math.sqrt(law.k)
    center = theta_hat - law.bias_lambda / root_k
    z = norm_ppf(0.5 * (1.0 + level))
    half = z * abs(theta_hat) * math.sqrt(law.variance_factor) / root_k
    return center - half, center + half


@dataclass(frozen=True)
class ConditionReport:
    n: int
    k: int
    bias_term: Optional[float]   # k^(1/2) b(log n)
    log_term: float              # k^(1/2) / log n
    eps_term: float              # k^(1/2) eps_sup
    threshold: float = ADVISORY_THRESHOLD

    @property
    def flags(self) -> dict:
        t = self.threshold
        return {
            "bias_term": self.bias_term is not None and abs(self.bias_term) > t,
            "log_term": self.log_term > t,
            "eps_term": self.eps_term > t,
        }

    @property
    def ok(self) -> bool:
        return not any(self.flags.values())

    def as_dict(self):
        return {
            "n": self.n, "k": self.k,
            "bias_term": self.bias_term, "log_term": self.log_term, "eps_term": self.eps_term,
            "threshold": self.threshold, "flags": self.flags, "ok": self.ok,
            "note": "heuristic finite-sample magnitudes of limit conditions; threshold is a convention",
        }


def condition_diagnostics(model: Optional[TailModel], f: ScoreFunction, n: int, k: int,
                          eps_sup: float = 0.0) -> ConditionReport:
    """Finite-sample sizes of ``k^(1/2) b(log n)``, ``k^(1/2)/log n`` and ``k^(1/2) eps_sup``.

    ``f`` is accepted for symmetry with :func:`limit_law`; the magnitudes do
    not depend on it beyond ``eps_sup``. Without a model the bias term is None.
    """
    root_k = math.sqrt(k)
    log_n = math.log(n)
    bias = None if model is None else root_k * float(model.b(log_n))
    return ConditionReport(n, k, bias, root_k / log_n, root_k * eps_sup)

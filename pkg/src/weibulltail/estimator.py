"""Weighted log-spacings estimators of the Weibull tail-coefficient.

All estimators use the top ``k`` order statistics and the abscissas
``a_i = log log(n/i)``, ``i = 1..k-1``:

    theta(alpha) = sum alpha_i (log X_{n-i+1,n} - log X_{n-k+1,n})
                   / sum alpha_i (a_i - a_k)
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import BadK, DegenerateDenominator, DomainError
from .sample import SortedSample, check_k
from .scorefn import ZIPF, WeightSequence

_DEGENERATE_RTOL = 1e-14


_TABLES: dict[int, np.ndarray] = {}
_MAX_TABLES = 16


def _loglog_table(n: int, k: int) -> np.ndarray:
    # per-n prefix table, grown geometrically so sweeps over k stay linear
    table = _TABLES.get(n)
    if table is None or table.size < k:
        size = min(n - 1, max(k, 2 * (0 if table is None else table.size), 1024))
        i = np.arange(1, size + 1, dtype=float)
        # log(n/i) via log1p keeps full relative precision as i -> n
        table = np.log(np.log1p((n - i) / i))
        table.setflags(write=False)
        if n not in _TABLES and len(_TABLES) >= _MAX_TABLES:
            _TABLES.pop(next(iter(_TABLES)))
        _TABLES[n] = table
    return table[:k]


def loglog_abscissas(n: int, k: int) -> np.ndarray:
    """``log log(n/i)`` for ``i = 1..k`` (requires ``k < n``)."""
    check_k(n, k, k_min=1, k_max=n - 1)
    return _loglog_table(n, k)


def _check_estimator_k(s: SortedSample, k: int, k_min: int = 2):
    # log log(n/k) needs k < n
    check_k(s.n, k, k_min=k_min, k_max=s.n - 1)


def theta_general(sample: SortedSample, k: int, weights: WeightSequence) -> float:
    """Weighted log-spacings estimate for arbitrary weights ``alpha_{i,n}``."""
    _check_estimator_k(sample, k)
    alphas = np.asarray(weights.alphas, dtype=float)
    if alphas.shape != (k - 1,):
        raise BadK(f"weights have length {alphas.size}, expected k-1 = {k - 1}")
    logs = sample.top_logs(k)
    a = loglog_abscissas(sample.n, k)
    num = np.dot(alphas, logs[:-1] - logs[-1])
    den = np.dot(alphas, a[:-1] - a[-1])
    scale = np.abs(alphas).sum()
    if not abs(den) > _DEGENERATE_RTOL * scale:
        raise DegenerateDenominator(f"denominator {den!r} vanishes for k={k}")
    return float(num / den)


def hill_weights(k: int) -> WeightSequence:
    return WeightSequence(np.ones(k - 1), 0.0, "hill")


def theta_hill(sample: SortedSample, k: int) -> float:
    """Hill-type estimator: unit weights."""
    _check_estimator_k(sample, k)
    return theta_general(sample, k, hill_weights(k))


def theta_zipf(sample: SortedSample, k: int) -> float:
    """Least-squares slope of ``log X_{n-i+1,n}`` on ``log log(n/i)``, ``i < k``."""
    _check_estimator_k(sample, k, k_min=3)
    logs = sample.top_logs(k)
    # anchoring at log X_{n-k+1,n} makes tied tops give exactly zero
    y = logs[:-1] - logs[-1]
    a = loglog_abscissas(sample.n, k - 1)
    centered = a - a.mean()
    den = np.dot(centered, a)
    if not abs(den) > _DEGENERATE_RTOL * np.abs(centered).sum():
        raise DegenerateDenominator(f"abscissas are degenerate for k={k}")
    return float(np.dot(centered, y) / den)


def zipf_weights(n: int, k: int) -> WeightSequence:
    """The Zipf estimator rewritten as a member of the weighted family.

    ``alpha_i = log(n/k) (log log(n/i) - zeta_n)``; ``eps_sup`` measures the
    distance to the score ``W(x) = -(log x + 1)``.
    """
    check_k(n, k, k_max=n - 1)
    a = loglog_abscissas(n, k - 1)
    alphas = math.log(n / k) * (a - a.mean())
    eps = alphas - ZIPF(np.arange(1, k) / k)
    return WeightSequence(alphas, float(np.max(np.abs(eps))), "zipf")


def tau_n(n: int, k: int) -> float:
    check_k(n, k, k_max=n - 1)
    a = loglog_abscissas(n, k)
    return float(np.mean(a[:-1] - a[-1]))


def zeta_n(n: int, k: int) -> float:
    check_k(n, k, k_max=n - 1)
    return float(loglog_abscissas(n, k - 1).mean())


def k_rho(lam, rho):
    """``int_1^lam u^(rho-1) du``: ``log(lam)`` at ``rho = 0``, else ``(lam^rho - 1)/rho``."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(~(lam_arr >= 1)):
        raise DomainError("k_rho requires lambda >= 1")
    if not rho <= 0:
        raise DomainError("k_rho requires rho <= 0")
    log_lam = np.log(lam_arr)
    if rho == 0:
        out = log_lam
    elif rho == -math.inf:
        out = np.zeros_like(log_lam)
    else:
        out = np.expm1(rho * log_lam) / rho
    return float(out) if out.ndim == 0 else out


class QqPoint(NamedTuple):
    abscissa: float
    ordinate: float


def qq_pairs(sample: SortedSample, k: int) -> list[QqPoint]:
    """Weibull quantile-plot points ``(log log(n/i), log X_{n-i+1,n})``, ``i = 1..k-1``."""
    _check_estimator_k(sample, k)
    y = sample.top_logs(k)[:-1]
    a = loglog_abscissas(sample.n, k - 1)
    return [QqPoint(float(u), float(v)) for u, v in zip(a, y)]


ESTIMATORS = {"hill": theta_hill, "zipf": theta_zipf}

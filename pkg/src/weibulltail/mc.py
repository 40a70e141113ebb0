"""Monte Carlo checks of the limiting law over seeded replications.

Replication ``r`` draws its sample from ``make_rng(base_seed, r)``, so any
replication can be recomputed on its own and the campaign can be split
across processes. Results are gathered in replication order and reduced
with numpy on the full array, which makes reports independent of the
worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .asymptotics import confidence_interval, limit_law
from .errors import BadSpec, DegenerateDenominator, DegenerateScore, EmptySample, NonPositiveTail
from .estimator import theta_general, theta_hill, theta_zipf
from .scorefn import ScoreFunction, get_score, weights_from_score
from .special import norm_cdf
from .tailmodels import RNG_NAME, TailModel, parse_model, plugin_sample, rho_to_json, sample


@dataclass
class McSpec:
    model: TailModel
    estimators: Sequence = ("hill", "zipf")
    n: int = 5000
    k_grid: Sequence[int] = (100,)
    replications: int = 1000
    base_seed: int = 0
    level: float = 0.95
    scores: dict = field(default_factory=dict)

    def validate(self):
        if self.replications < 1:
            raise BadSpec("replications must be >= 1")
        if self.n < 3:
            raise BadSpec("n must be >= 3")
        ks = list(self.k_grid)
        if not ks:
            raise BadSpec("k_grid is empty")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise BadSpec("k_grid must be strictly increasing")
        bad = [k for k in ks if not 2 <= k <= self.n - 1]
        if bad:
            raise BadSpec(f"k values {bad} are invalid for n={self.n} (need 2 <= k <= n-1)")
        if not self.estimators:
            raise BadSpec("no estimators given")
        for name in self.estimators:
            f = self.score(name)
            if f.name == "zipf" and ks[0] < 3:
                raise BadSpec("the zipf estimator needs k >= 3")
        if not 0 < self.level < 1:
            raise BadSpec("level must lie in (0, 1)")

    def score(self, name) -> ScoreFunction:
        return get_score(name, self.scores)

    @classmethod
    def from_dict(cls, cfg: dict, scores: Optional[dict] = None) -> "McSpec":
        try:
            model = cfg["model"]
            if isinstance(model, str):
                model = parse_model(model)
            return cls(
                model=model,
                estimators=list(cfg.get("estimators", ["hill", "zipf"])),
                n=int(cfg["n"]),
                k_grid=[int(k) for k in cfg["k_grid"]],
                replications=int(cfg["replications"]),
                base_seed=int(cfg.get("base_seed", 0)),
                level=float(cfg.get("level", 0.95)),
                scores=dict(scores or {}),
            )
        except KeyError as exc:
            raise BadSpec(f"simulation config is missing {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise BadSpec(f"bad simulation config: {exc}") from None


@dataclass
class McRow:
    estimator: str
    k: int
    n_ok: int
    failures: int
    mean_theta_hat: Optional[float]
    empirical_bias: Optional[float]
    var_theta_hat: Optional[float]
    empirical_variance: Optional[float]  # of k^(1/2) (theta_hat - theta)
    mse: Optional[float]
    predicted_bias: float
    predicted_variance: float
    bias_ratio: Optional[float]
    ks_distance: Optional[float]
    coverage: Optional[float]


CSV_COLUMNS = [f for f in McRow.__dataclass_fields__]


@dataclass
class McReport:
    model: str
    theta_true: float
    rho: object
    n: int
    replications: int
    base_seed: int
    level: float
    rng: str
    rows: list
    theta_hats: np.ndarray = field(repr=False)  # (replications, estimators, k) with nan for failures

    def row(self, estimator: str, k: int) -> McRow:
        for r in self.rows:
            if r.estimator == estimator and r.k == k:
                return r
        raise KeyError((estimator, k))

    def to_dict(self) -> dict:
        return {
            "model": self.model, "theta_true": self.theta_true, "rho": rho_to_json(self.rho),
            "n": self.n, "replications": self.replications, "base_seed": self.base_seed,
            "level": self.level, "rng": self.rng,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --------------------------------------------------------------------------
# replication

_EXPECTED_FAILURES = (NonPositiveTail, DegenerateDenominator)


def default_sampler(model: TailModel, n: int, seed: int, index: int):
    return sample(model, n, seed, index)


def plugin_sampler(model: TailModel, n: int, seed: int, index: int):
    """Test hook: ignore the randomness and return the deterministic plug-in sample."""
    return plugin_sample(model.theta, n)


def _estimate(name, f, s, k, weight_cache):
    if name == "hill":
        return theta_hill(s, k)
    if name == "zipf":
        return theta_zipf(s, k)
    w = weight_cache.get(k)
    if w is None:
        w = weight_cache[k] = weights_from_score(f, s.n, k)
    return theta_general(s, k, w)


def _run_chunk(args):
    spec, start, stop, sampler = args
    scores = [spec.score(e) for e in spec.estimators]
    names = [f.name if f.name in ("hill", "zipf") and f is get_score(f.name) else f"custom:{f.name}"
             for f in scores]
    caches = [{} for _ in scores]
    out = np.full((stop - start, len(scores), len(spec.k_grid)), np.nan)
    for r in range(start, stop):
        s = sampler(spec.model, spec.n, spec.base_seed, r)
        for e, (name, f) in enumerate(zip(names, scores)):
            for j, k in enumerate(spec.k_grid):
                try:
                    out[r - start, e, j] = _estimate(name, f, s, k, caches[e])
                except _EXPECTED_FAILURES:
                    pass
    return out


def _chunks(reps, workers):
    size = max(1, math.ceil(reps / (4 * workers)))
    return [(a, min(a + size, reps)) for a in range(0, reps, size)]


def run(spec: McSpec, workers: int = 1, sampler: Callable = default_sampler) -> McReport:
    """Run the campaign; deterministic in ``spec`` whatever ``workers`` is."""
    spec.validate()
    if workers > 1 and spec.replications > 1:
        jobs = [(spec, a, b, sampler) for a, b in _chunks(spec.replications, workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
        theta_hats = np.concatenate(parts, axis=0)
    else:
        theta_hats = _run_chunk((spec, 0, spec.replications, sampler))

    model = spec.model
    theta = model.theta
    rows = []
    for e, name in enumerate(spec.estimators):
        f = spec.score(name)
        for j, k in enumerate(spec.k_grid):
            law = limit_law(theta, f, model, spec.n, k)
            rows.append(_aggregate(f.name, k, theta_hats[:, e, j], theta, law, spec))
    return McReport(model.spec_string(), theta, model.rho, spec.n, spec.replications,
                    spec.base_seed, spec.level, RNG_NAME, rows, theta_hats)


def _aggregate(name, k, column, theta, law, spec) -> McRow:
    vals = column[~np.isnan(column)]
    m = vals.size
    pred_bias = law.bias_lambda / math.sqrt(k)
    row = McRow(name, k, m, spec.replications - m, None, None, None, None, None,
                pred_bias, law.variance, None, None, None)
    if m == 0:
        return row
    mean = float(vals.mean())
    err = vals - theta
    row.mean_theta_hat = mean
    row.empirical_bias = mean - theta
    row.mse = float(np.mean(err * err))
    if pred_bias != 0:
        row.bias_ratio = row.empirical_bias / pred_bias
    if m >= 2:
        var = float(np.mean((vals - mean) ** 2))
        row.var_theta_hat = var
        row.empirical_variance = k * var
    if law.variance > 0:
        row.ks_distance = ks_distance(standardized_sample(vals, theta, k, law), norm_cdf)
    lo_hi = [confidence_interval(float(v), law, spec.level) for v in vals]
    row.coverage = float(np.mean([lo <= theta <= hi for lo, hi in lo_hi]))
    return row


def standardized_sample(raw_theta_hats, theta_true: float, k: int, law) -> np.ndarray:
    """``(k^(1/2) (theta_hat - theta) - lambda) / sqrt(variance)`` per replicate."""
    if not law.variance > 0:
        raise DegenerateScore("limit law has zero variance")
    x = np.asarray(raw_theta_hats, dtype=float)
    return (math.sqrt(k) * (x - theta_true) - law.bias_lambda) / math.sqrt(law.variance)


def ks_distance(xs, cdf: Callable) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the ECDF of ``xs`` and ``cdf``."""
    x = np.sort(np.asarray(xs, dtype=float))
    m = x.size
    if m == 0:
        raise EmptySample("ks_distance needs at least one point")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    d_plus = np.max(i / m - F)
    d_minus = np.max(F - (i - 1) / m)
    return float(max(d_plus, d_minus))

"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 estimation-domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .asymptotics import condition_diagnostics, confidence_interval, limit_law
from .errors import BadParam, WeibullTailError
from .estimator import qq_pairs, theta_general, theta_hill, theta_zipf, zipf_weights
from .mc import McSpec, run
from .sample import check_intermediate, read_sample
from .scorefn import (builtin_scores, check_envelope, get_score, load_scores, mu_quadrature,
                      sigma2_quadrature, weights_from_score)
from .tailmodels import catalog, parse_model, rho_to_json

EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _k_range(text: str) -> range:
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k-range {text!r}, expected start:stop[:step]") from None
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"bad k-range {text!r}, expected start:stop[:step]")
    start, stop = parts[:2]
    step = parts[2] if len(parts) == 3 else 1
    if start < 2 or step < 1:
        raise argparse.ArgumentTypeError("k-range needs start >= 2 and step >= 1")
    return range(start, stop + 1, step)


def _int_list(text: str) -> list[int]:
    if ":" in text:
        return list(_k_range(text))
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weibulltail", description="Weibull tail-coefficient estimation and Monte Carlo checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, k_required=True):
        sp.add_argument("--input", required=True, help="text/CSV file, one value per line, '#' comments")
        sp.add_argument("--score", default="hill", help="score name: hill (default), zipf, or a custom score")
        sp.add_argument("--scores-config", help="JSON file defining custom scores")
        sp.add_argument("--model", help="tail model for bias correction, e.g. gaussian:mu=0,sigma2=1")
        sp.add_argument("--level", type=float, default=0.95, help="confidence level (default 0.95)")

    sp = sub.add_parser("estimate", help="estimate theta from a data file")
    common(sp)
    sp.add_argument("--k", type=int, required=True, help="number of upper order statistics")
    sp.add_argument("--output", help="write the report as JSON to this path")

    sp = sub.add_parser("sweep", help="theta estimates over a range of k")
    common(sp)
    sp.add_argument("--k-range", type=_k_range, required=True, help="start:stop[:step], stop inclusive")
    sp.add_argument("--output", help="CSV path (default stdout)")

    sp = sub.add_parser("qqplot", help="Weibull quantile-plot points as CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--k", type=int, help="use points i = 1..k-1 (default n-1)")
    sp.add_argument("--output", help="CSV path (default stdout)")

    sp = sub.add_parser("simulate", help="Monte Carlo campaign over a tail model")
    sp.add_argument("--config", help="JSON config mirroring McSpec (flags override it)")
    sp.add_argument("--model", help="e.g. weibull:alpha=2,lambda=1")
    sp.add_argument("--estimators", help="comma-separated score names (default hill,zipf)")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k-grid", type=_int_list, help="comma list or start:stop:step")
    sp.add_argument("--replications", type=int)
    sp.add_argument("--seed", type=int, help="base seed (default 0)")
    sp.add_argument("--level", type=float)
    sp.add_argument("--scores-config", help="JSON file defining custom scores")
    sp.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    sp.add_argument("--output", help="output prefix; writes PREFIX.json and PREFIX.csv")
    sp.add_argument("--format", choices=("csv", "json"), default="csv", help="stdout format when --output is absent")

    sp = sub.add_parser("catalog", help="list the tail-model families")
    sp.add_argument("--format", choices=("table", "csv", "json"), default="table")

    sp = sub.add_parser("scorefn-info", help="mu, sigma2 and envelope check of a score")
    sp.add_argument("--score", default="hill")
    sp.add_argument("--scores-config")
    sp.add_argument("--grid-size", type=int, default=200)
    return p


# --------------------------------------------------------------------------

def _scores(path):
    return load_scores(path) if path else {}


def _estimate_one(s, k, score_name, extra):
    """Return (theta_hat, score, eps_sup)."""
    f = get_score(score_name, extra)
    if score_name == "hill" and f is builtin_scores()["hill"]:
        return theta_hill(s, k), f, 0.0
    if score_name == "zipf" and f is builtin_scores()["zipf"]:
        est = theta_zipf(s, k)
        return est, f, zipf_weights(s.n, k).eps_sup
    w = weights_from_score(f, s.n, k)
    return theta_general(s, k, w), f, w.eps_sup


def _ci(theta_hat, f, model, n, k, level):
    # the interval only uses sigma2/mu^2, so the law's own theta is irrelevant here
    law = limit_law(1.0, f, model, n, k)
    return confidence_interval(theta_hat, law, level), law


def cmd_estimate(args, out):
    s = read_sample(args.input)
    extra = _scores(args.scores_config)
    model = parse_model(args.model) if args.model else None
    theta_hat, f, eps_sup = _estimate_one(s, args.k, args.score, extra)
    (lo, hi), law = _ci(theta_hat, f, model, s.n, args.k, args.level)
    diag = condition_diagnostics(model, f, s.n, args.k, eps_sup)
    report = {
        "n": s.n, "k": args.k, "score": f.name, "theta_hat": theta_hat,
        "level": args.level, "ci": [lo, hi],
        "asymptotic_variance": theta_hat ** 2 * law.variance_factor,
        "bias_lambda": law.bias_lambda,
        "model": model.spec_string() if model else None,
        "conditions": diag.as_dict(),
        "intermediate": check_intermediate(s.n, args.k).as_dict(),
    }
    print(f"theta_hat = {theta_hat!r}  (score={f.name}, n={s.n}, k={args.k})", file=out)
    print(f"{args.level:g} CI = [{lo!r}, {hi!r}]", file=out)
    bias = "n/a" if diag.bias_term is None else f"{diag.bias_term:.4g}"
    print(f"conditions: k^1/2 b(log n) = {bias}, k^1/2/log n = {diag.log_term:.4g}, "
          f"k^1/2 eps = {diag.eps_term:.4g}  [{'ok' if diag.ok else 'flagged'}]", file=out)
    if args.output:
        Path(args.output).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return 0


def _open_out(path, out):
    return open(path, "w", encoding="utf-8", newline="") if path else _Borrowed(out)


class _Borrowed:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        return False


def cmd_sweep(args, out):
    s = read_sample(args.input)
    extra = _scores(args.scores_config)
    model = parse_model(args.model) if args.model else None
    ks = [k for k in args.k_range if k <= s.n - 1]
    if not ks:
        raise BadParam(f"no valid k in the range for n={s.n}")
    get_score(args.score, extra)
    with _open_out(args.output, out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "theta_hat", "ci_lo", "ci_hi", "error"])
        for k in ks:
            try:
                theta_hat, f, _ = _estimate_one(s, k, args.score, extra)
                (lo, hi), _ = _ci(theta_hat, f, model, s.n, k, args.level)
                w.writerow([k, repr(theta_hat), repr(lo), repr(hi), ""])
            except WeibullTailError as exc:
                w.writerow([k, "", "", "", type(exc).__name__])
    return 0


def cmd_qqplot(args, out):
    s = read_sample(args.input)
    k = args.k if args.k is not None else s.n - 1
    pts = qq_pairs(s, k)
    with _open_out(args.output, out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["abscissa", "ordinate"])
        for p in pts:
            w.writerow([repr(p.abscissa), repr(p.ordinate)])
    return 0


def cmd_simulate(args, out):
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    for key, val in (("model", args.model), ("n", args.n), ("k_grid", args.k_grid),
                     ("replications", args.replications), ("base_seed", args.seed), ("level", args.level)):
        if val is not None:
            cfg[key] = val
    if args.estimators:
        cfg["estimators"] = [e.strip() for e in args.estimators.split(",") if e.strip()]
    extra = _scores(args.scores_config)
    if isinstance(cfg.get("scores"), list):
        from .scorefn import score_from_config
        extra.update({s.name: s for s in map(score_from_config, cfg["scores"])})
    spec = McSpec.from_dict(cfg, extra)
    report = run(spec, workers=max(1, args.workers))
    if args.output:
        Path(args.output + ".json").write_text(report.to_json() + "\n", encoding="utf-8")
        Path(args.output + ".csv").write_text(report.to_csv(), encoding="utf-8")
        for r in report.rows:
            ev = "n/a" if r.empirical_variance is None else f"{r.empirical_variance:.4g}"
            print(f"{r.estimator:>8} k={r.k:<6} mean={r.mean_theta_hat!r} var(k^1/2 err)={ev} "
                  f"predicted={r.predicted_variance:.4g} failures={r.failures}", file=out)
    elif args.format == "json":
        print(report.to_json(), file=out)
    else:
        out.write(report.to_csv())
    return 0


def cmd_catalog(args, out):
    rows = [m.describe() for m in catalog()]
    if args.format == "json":
        print(json.dumps(rows, indent=2), file=out)
        return 0
    cols = ["family", "params", "survival", "theta_formula", "b_formula", "rho"]
    table = [[r["family"], ",".join(f"{k}={v:g}" for k, v in r["params"].items()) or "-",
              r["survival"], r["theta_formula"], r["b_formula"], _rho_text(r["rho"])] for r in rows]
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        w.writerows(table)
        return 0
    widths = [max(len(c), *(len(t[i]) for t in table)) for i, c in enumerate(cols)]
    print("  ".join(c.ljust(wd) for c, wd in zip(cols, widths)), file=out)
    for t in table:
        print("  ".join(v.ljust(wd) for v, wd in zip(t, widths)), file=out)
    return 0


def _rho_text(rho):
    return rho if isinstance(rho, str) else f"{rho:g}"


def cmd_scorefn_info(args, out):
    f = get_score(args.score, _scores(args.scores_config))
    env = check_envelope(f, args.grid_size)
    info = {
        "name": f.name, "M": f.M, "q": f.q, "p": f.p,
        "mu_quadrature": mu_quadrature(f), "sigma2_quadrature": sigma2_quadrature(f),
        "mu_analytic": f.analytic_mu, "sigma2_analytic": f.analytic_sigma2,
        "envelope": env.as_dict(),
    }
    print(json.dumps(info, indent=2), file=out)
    return 0


COMMANDS = {
    "estimate": cmd_estimate, "sweep": cmd_sweep, "qqplot": cmd_qqplot,
    "simulate": cmd_simulate, "catalog": cmd_catalog, "scorefn-info": cmd_scorefn_info,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except WeibullTailError as exc:
        print(f"weibulltail: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"weibulltail: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

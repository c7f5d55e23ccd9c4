"""Command-line front end.

Heavy imports happen inside the command handlers so that ISOCONV_THREADS can
cap the BLAS pool before numpy loads, and so --help stays instant.

Exit codes: 0 success, 1 verify-suite assertion failure, 2 usage error.
Every run is replayable: a missing --seed is generated, announced on stderr,
and embedded in all emitted artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional


def _apply_thread_cap():
    cap = os.environ.get("ISOCONV_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


@dataclass(frozen=True)
class RunConfig:
    """Echo of every knob that shaped a run; embedded in all reports."""

    command: str
    seed: int
    body: Optional[str] = None
    measure: Optional[str] = None
    dims: Optional[list] = None
    p: Optional[float] = None
    p_values: Optional[list] = None
    samples: Optional[int] = None
    sphere_samples: Optional[int] = None
    directions: Optional[int] = None
    trials: Optional[int] = None
    k: Optional[int] = None
    rad: Optional[str] = None
    suite: Optional[str] = None
    extra: dict = field(default_factory=dict)


def write_csv(rows, path: Optional[str]) -> None:
    """Rows in the shared schema -> csv file, or stdout when path is None."""
    from .experiments import CSV_COLUMNS, rows_to_records

    def dump(fh):
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rec in rows_to_records(rows):
            w.writerow(rec)

    if path is None:
        dump(sys.stdout)
        return
    try:
        with open(path, "w", newline="") as fh:
            dump(fh)
    except OSError as exc:
        raise OSError(f"cannot write csv to {path!r}: {exc}") from exc


def write_json(payload: dict, path: Optional[str]) -> None:
    if path is None:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    try:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write json to {path!r}: {exc}") from exc


def _resolve_out(out: Optional[str], fmt: Optional[str]):
    """--out takes a path, or the literal words csv/json meaning stdout."""
    if out in ("csv", "json"):
        return None, out
    if out is not None and fmt is None:
        fmt = "json" if out.endswith(".json") else "csv"
    return out, fmt


def _meta(config: RunConfig) -> dict:
    from . import __version__

    return {"version": __version__, "config": asdict(config)}


def _emit(rows, config: RunConfig, out: Optional[str], fmt: Optional[str]):
    if out is None and fmt is None:
        return
    path, fmt = _resolve_out(out, fmt)
    if fmt == "csv":
        write_csv(rows, path)
    else:
        write_json({"meta": _meta(config), "rows": [asdict(r) for r in rows]}, path)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    from .seeds import generate_seed

    seed = generate_seed()
    print(f"seed: {seed} (generated)", file=sys.stderr)
    return seed


def _parse_values(text: str):
    """Comma-separated numbers, or @file with one value per line."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return [float(line) for line in fh.read().split()]
    return [float(tok) for tok in text.split(",") if tok]


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------


def _cmd_meanwidth(args) -> int:
    from .bodies import parse_body
    from .experiments import Row
    from .functionals import mean_width

    seed = _resolve_seed(args)
    body = parse_body(args.body)
    est = mean_width(body, args.sphere_samples, seed)
    print(f"{est.value:.10g}")
    cfg = RunConfig(command="meanwidth", seed=seed, body=args.body,
                    sphere_samples=args.sphere_samples)
    _emit([Row("meanwidth", body.dim, None, "mstar", est.value, est.std_error,
               est.direction, seed, est.n_samples)], cfg, args.out, args.format)
    return 0


def _cmd_zp(args) -> int:
    from .centroid import zp_support
    from .experiments import Row
    from .measures import draw_samples, parse_measure
    from .seeds import child_seed, sphere_directions

    seed = _resolve_seed(args)
    mu = parse_measure(args.measure, mcmc=args.mcmc)
    samples = draw_samples(mu, args.samples, child_seed(seed, 0))
    dirs = sphere_directions(mu.dim, args.directions, child_seed(seed, 1))
    h = zp_support(samples, args.p, dirs)
    print(f"{h.mean():.10g}")
    cfg = RunConfig(command="zp", seed=seed, measure=args.measure, p=args.p,
                    samples=args.samples, directions=args.directions)
    rows = [Row("zp", mu.dim, args.p, f"h-zp-dir{i}", float(v), 0.0, "mc",
                seed, args.samples) for i, v in enumerate(h)]
    _emit(rows, cfg, args.out, args.format)
    return 0


def _cmd_isotropy(args) -> int:
    from .experiments import Row
    from .isotropy import estimate_moments, isotropic_constant
    from .measures import draw_samples, parse_measure

    seed = _resolve_seed(args)
    mu = parse_measure(args.measure, mcmc=args.mcmc)
    samples = draw_samples(mu, args.samples, seed)
    summary = estimate_moments(samples)
    l_value = None
    if mu.density_sup is not None:
        l_value = isotropic_constant(summary, mu.density_sup).value
    print(f"det_root: {summary.det_root:.10g}")
    print(f"L: {l_value:.10g}" if l_value is not None else "L: unavailable (no density sup)")
    cfg = RunConfig(command="isotropy", seed=seed, measure=args.measure,
                    samples=args.samples)
    path, fmt = _resolve_out(args.out, args.format)
    if fmt == "json":
        payload = {
            "meta": _meta(cfg),
            "result": {
                "barycenter": summary.barycenter.tolist(),
                "eigenvalues": summary.eigenvalues.tolist(),
                "det_root": summary.det_root,
                "L": l_value,
            },
        }
        write_json(payload, path)
    elif fmt == "csv" or path is not None:
        rows = [Row("isotropy", mu.dim, None, f"eigenvalue-{i}", float(v), 0.0,
                    "mc", seed, args.samples)
                for i, v in enumerate(summary.eigenvalues)]
        rows.append(Row("isotropy", mu.dim, None, "det-root", summary.det_root,
                        0.0, "mc", seed, args.samples))
        if l_value is not None:
            rows.append(Row("isotropy", mu.dim, None, "l-mu", l_value, 0.0,
                            "mc", seed, args.samples))
        write_csv(rows, path)
    return 0


def _cmd_vk(args) -> int:
    from .bodies import parse_body
    from .experiments import Row
    from .grassmann import vk_estimate

    seed = _resolve_seed(args)
    body = parse_body(args.body)
    est = vk_estimate(body, args.k, args.trials, seed)
    print(f"{est.value:.10g}")
    cfg = RunConfig(command="vk", seed=seed, body=args.body, k=args.k,
                    trials=args.trials)
    _emit([Row("vk", body.dim, None, f"vk-k{args.k}", est.value, est.std_error,
               est.direction, seed, args.trials)], cfg, args.out, args.format)
    return 0


def _cmd_bound(args) -> int:
    from .functionals import bound_rhs, parse_rad_model

    params = {}
    if args.spectrum is not None:
        params["spectrum"] = _parse_values(args.spectrum)
    if args.vk_values is not None:
        params["vk_values"] = _parse_values(args.vk_values)
    if args.ek_values is not None:
        params["ek_values"] = _parse_values(args.ek_values)
    for name in ("p", "n", "t", "k", "mstar", "l_k", "rad_value"):
        val = getattr(args, name)
        if val is not None:
            params[name] = val
    if args.rad is not None:
        params["rad"] = parse_rad_model(args.rad)
    try:
        value = bound_rhs(args.kind, **params)
    except KeyError as exc:
        print(f"bound kind {args.kind!r} is missing parameter {exc}", file=sys.stderr)
        return 2
    print(f"{value:.10g}")
    return 0


def _cmd_verify(args) -> int:
    from .experiments import SuiteConfig, emit_report, run_suite
    from .functionals import parse_rad_model

    seed = _resolve_seed(args)
    cfg = SuiteConfig(
        seed=seed,
        n_samples=args.samples,
        sphere_samples=args.sphere_samples,
        trials=args.trials,
        rad=parse_rad_model(args.rad),
        p_values=tuple(_parse_values(args.p_values)) if args.p_values else None,
    )
    result = run_suite(args.suite, args.dims, cfg)
    for a in result.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'} {a.name}: {a.detail}")
    if args.out:
        fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
        emit_report(result, fmt, args.out)
    return 0 if result.passed else 1


def _cmd_scaling(args) -> int:
    """Mean-width scaling fit across dims for a body-descriptor template."""
    from .bodies import parse_body
    from .experiments import Row, fit_scaling_slope
    from .functionals import mean_width
    from .seeds import child_seed

    seed = _resolve_seed(args)
    rows, pairs = [], []
    for j, n in enumerate(args.dims):
        body = parse_body(args.body.replace("{n}", str(n)))
        est = mean_width(body, args.sphere_samples, child_seed(seed, j))
        pairs.append((n, est.value))
        rows.append(Row("scaling", n, None, "mstar", est.value, est.std_error,
                        est.direction, seed, est.n_samples))
    slope, intercept, half = fit_scaling_slope(pairs)
    print(f"slope: {slope:.6f} +- {half:.6f}")
    rows.append(Row("scaling", 0, None, "slope", slope, half / 2.0, "mc", seed,
                    len(pairs)))
    cfg = RunConfig(command="scaling", seed=seed, body=args.body,
                    dims=list(args.dims), sphere_samples=args.sphere_samples,
                    extra={"intercept": intercept})
    _emit(rows, cfg, args.out, args.format)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _dims_list(text: str):
    return [int(tok) for tok in text.split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    from .experiments import SUITE_NAMES

    top = argparse.ArgumentParser(
        prog="isoconv",
        description="Numerical toolkit for mean-width, centroid bodies and "
        "isotropic position, with a seeded verification harness.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def add_common(p, seed=True, out=True):
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help="master seed (generated and announced if omitted)")
        if out:
            p.add_argument("--out", default=None, help="write results to this path")
            p.add_argument("--format", choices=("csv", "json"), default=None,
                           help="output format (default: guessed from --out suffix)")

    p = sub.add_parser("meanwidth", help="Monte Carlo mean width of a body")
    p.add_argument("--body", required=True, help="body descriptor, e.g. ball:8 or cube:4:2")
    p.add_argument("--sphere-samples", type=int, default=10_000)
    add_common(p)
    p.set_defaults(fn=_cmd_meanwidth)

    p = sub.add_parser("zp", help="support values of an empirical Z_p body")
    p.add_argument("--measure", required=True, help="e.g. gaussian:16 or uniform:cube:8")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--samples", type=int, default=50_000)
    p.add_argument("--directions", type=int, default=1000)
    p.add_argument("--mcmc", action="store_true",
                   help="authorize hit-and-run for bodies without exact samplers")
    add_common(p)
    p.set_defaults(fn=_cmd_zp)

    p = sub.add_parser("isotropy", help="moments, whitening data and L of a measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--mcmc", action="store_true")
    add_common(p)
    p.set_defaults(fn=_cmd_isotropy)

    p = sub.add_parser("vk", help="sampled sup of projection volume radii (lower bound)")
    p.add_argument("--body", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    add_common(p)
    p.set_defaults(fn=_cmd_vk)

    p = sub.add_parser("bound", help="evaluate a named bound expression (constants = 1)")
    p.add_argument("--kind", required=True)
    p.add_argument("--spectrum", default=None, help="comma list or @file, descending")
    p.add_argument("--vk-values", default=None, help="comma list or @file")
    p.add_argument("--ek-values", default=None, help="comma list or @file")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--mstar", type=float, default=None)
    p.add_argument("--l-k", dest="l_k", type=float, default=None)
    p.add_argument("--rad-value", dest="rad_value", type=float, default=None)
    p.add_argument("--rad", default=None, help="unit | log-min | sqrt-log | constant:<c>")
    p.set_defaults(fn=_cmd_bound)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--suite", required=True, choices=SUITE_NAMES)
    p.add_argument("--dims", type=_dims_list, required=True, help="comma list, e.g. 4,8,16")
    p.add_argument("--samples", type=int, default=50_000)
    p.add_argument("--sphere-samples", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=16)
    p.add_argument("--rad", default="unit")
    p.add_argument("--p-values", default=None, help="override the suite's p grid")
    add_common(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("scaling", help="slope fit of mean width across dimensions")
    p.add_argument("--body", required=True,
                   help="descriptor template with {n}, e.g. b1tilde:{n}")
    p.add_argument("--dims", type=_dims_list, required=True)
    p.add_argument("--sphere-samples", type=int, default=50_000)
    add_common(p)
    p.set_defaults(fn=_cmd_scaling)

    return top


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and args.dims == []:
        parser.error("--dims must name at least one dimension")
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

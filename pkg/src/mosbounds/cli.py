"""Command-line interface: ``mosbounds <command> [options]``.

Commands
--------
bounds    bound estimates for a dataset file or summary statistics
model     BinoVotes / BinoMOS PMFs and the vote-variance curve
curves    bound sweeps over votes per file for several quality laws
simulate  Monte Carlo runs, or the sample-correlation convergence table
tables    regenerate the reference tables from bundled summary statistics
check     range-coverage and validity check of a dataset

Data goes to ``--out`` or stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import statistics
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import binovotes_bounds, bound_curves
from .errors import MosBoundsError
from .estimate import (
    GLOBAL_VOTE_VARIANCE,
    SampleStats,
    TestSummary,
    binovotes_vote_variance,
    estimate_bounds,
    global_average_vote_variance,
    range_coverage_check,
    sample_stats,
    vote_variance_spread,
)
from .ingest import fixtures, load_dataset
from .model import BinoVotes
from .quality import parse_distribution
from .scale import MOS_SCALE, RatingScale
from .simulate import (
    CONVERGENCE_NF_GRID,
    CONVERGENCE_NV,
    SimConfig,
    convergence_experiment,
    load_config,
    run_simulation,
)

# published table cells are two-decimal; allow that much rounding slack
TABLE_TOLERANCE = 0.005

# output


def _human(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.2f}"
    return "" if v is None else str(v)


def render(rows: list[dict], fmt: str) -> str:
    """Render rows as JSON (full precision), CSV (full precision) or a table."""
    if fmt == "json":
        return _dumps(rows)
    if not rows:
        return ""
    columns = list(rows[0])
    for r in rows[1:]:
        columns += [k for k in r if k not in columns]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
        return buf.getvalue()
    cells = [[_human(r.get(k)) for k in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _clean(obj):
    """NaN is not valid JSON; emit null instead."""
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, default=_jsonable) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(type(v))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# argument helpers


def _scale(args, attr="scale") -> RatingScale:
    s_l, s_h, n_s = getattr(args, attr)
    if n_s != int(n_s):
        raise MosBoundsError("N_S must be an integer")
    return RatingScale(s_l, s_h, int(n_s))


def _int_list(text: str) -> list[int]:
    """``1..30`` or ``1,4,16`` (ranges may be mixed in)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_output(p: argparse.ArgumentParser, default="table") -> None:
    p.add_argument("--format", choices=("json", "csv", "table"), default=default)
    p.add_argument("--out", metavar="PATH", help="write data here instead of stdout")


def _add_scale(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scale", nargs=3, type=float, metavar=("S_L", "S_H", "N_S"),
                   default=(1.0, 5.0, 5), help="rating scale (default: 1 5 5)")


# commands


def _report_row(name: str, mode: str, rep) -> dict:
    return {
        "dataset": name,
        "mode": mode,
        "variance_source": rep.variance_source,
        "n_v": rep.inputs.n_v,
        "vote_variance": rep.inputs.expected_vote_variance,
        "mos_variance": rep.inputs.var_X,
        "mse_bound": rep.mse_bound,
        "rmse_bound": rep.rmse_bound,
        "pcc_bound": rep.pcc_bound,
    }


def cmd_bounds(args) -> int:
    scale = _scale(args)
    global_scale = _scale(args, "global_scale")
    if args.summary:
        mu, var, n_v = args.summary
        ds = TestSummary(args.name or "summary", scale, SampleStats(mu, var, 2, n_v), args.vote_var)
        has_info = args.vote_var is not None
    elif args.dataset:
        if args.vote_var is not None:
            raise MosBoundsError("--vote-var applies only with --summary")
        ds = load_dataset(args.dataset, scale, args.variance_convention)
        has_info = ds.has_variance_info()
    else:
        raise MosBoundsError("give a dataset path or --summary MU VAR NV")

    if args.mode == "all":
        modes = (["data"] if has_info else []) + ["binovotes"]
        if scale == global_scale:
            modes.insert(len(modes) - 1, "global")
        else:
            print("note: global vote variance skipped; it was measured on a different scale",
                  file=sys.stderr)
    else:
        modes = [args.mode]
    rows = []
    for mode in modes:
        rep = estimate_bounds(ds, mode, global_var=args.global_var, global_scale=global_scale,
                              exact=args.exact, convention=args.variance_convention)
        rows.append(_report_row(ds.name, mode, rep))
    _emit(render(rows, args.format), args.out)
    return 0


def cmd_model(args) -> int:
    scale = _scale(args)
    model = BinoVotes(scale)
    ys = np.linspace(scale.s_L, scale.s_H, args.grid)
    rows: list[dict] = []
    if args.binomos:
        dist = parse_distribution(args.binomos, scale)
        pmf = model.binomos_pmf(dist, args.nv)
        rows = [{"x": float(x), "probability": float(p)}
                for x, p in zip(pmf.points, pmf.probabilities)]
    elif args.variance_curve:
        rows = [{"y": float(y), "variance": float(model.vote_variance(y))} for y in ys]
    else:
        for y in ys:
            row = {"y": float(y)}
            for level, p in zip(scale.levels, model.vote_pmf(y)):
                row[f"p_{level:g}"] = float(p)
            rows.append(row)
    _emit(render(rows, args.format), args.out)
    return 0


def cmd_curves(args) -> int:
    scale = _scale(args)
    rows = []
    for spec in args.dists.split(","):
        dist = parse_distribution(spec, scale)
        for n_v, rmse, pcc in bound_curves(scale, dist, _int_list(args.nv)):
            rows.append({"distribution": dist.name, "n_v": n_v, "rmse_bound": rmse, "pcc_bound": pcc})
    _emit(render(rows, args.format), args.out)
    return 0


def cmd_simulate(args) -> int:
    scale = _scale(args)
    if args.convergence:
        dist = parse_distribution(args.dist, scale)
        rows = []
        for n_v in _int_list(args.nv_list):
            for r in convergence_experiment(scale, dist, n_v, _int_list(args.nf_grid),
                                            args.reps or 10_000, args.seed):
                rows.append({"n_v": r.n_v, "n_f": r.n_f, "mean_sample_pcc": r.mean_sample_pcc,
                             "se": r.se, "population_pcc": r.population_pcc,
                             "gap": r.population_pcc - r.mean_sample_pcc, "n_valid": r.n_valid})
        _emit(render(rows, args.format), args.out)
        return 0

    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = SimConfig(scale, parse_distribution(args.dist, scale), args.nf, args.nv,
                        args.reps or 1, args.bias, args.seed)
    outcome = run_simulation(cfg, workers=args.workers)
    dist = cfg.quality_dist
    summary = {
        "config": {
            "scale": [cfg.scale.s_L, cfg.scale.s_H, cfg.scale.n_s],
            "distribution": dist.name, "n_f": cfg.n_f, "n_v": cfg.n_v,
            "n_reps": cfg.n_reps, "bias_spread": cfg.bias_spread, "seed": cfg.seed,
        },
        **outcome.summary(),
        "diagnostics": list(outcome.diagnostics),
    }
    model = BinoVotes(cfg.scale)
    mse = model.expected_vote_variance(dist.mean(), dist.variance()) / cfg.n_v
    pcc = None
    if dist.variance() > 0:
        pcc = binovotes_bounds(cfg.scale, dist.mean(), dist.variance(), cfg.n_v).pcc_bound
    summary["model_bounds"] = {"mse_bound": mse, "pcc_bound": pcc}
    if args.rows:
        Path(args.rows).write_text(render(outcome.rows(), "csv"), encoding="utf-8")
    _emit(_dumps(summary), args.out)
    return 0


def _close(published: float | None, value: float) -> bool | None:
    if published is None:
        return None
    return abs(round(value, 2) - published) <= TABLE_TOLERANCE + 1e-12


def table1_rows(global_var: float = GLOBAL_VOTE_VARIANCE) -> list[dict]:
    rows = []
    for row in fixtures().table1:
        s = row.summary()
        dd = estimate_bounds(s, "data")
        ga = estimate_bounds(s, "global", global_var=global_var)
        bv_rep = estimate_bounds(s, "binovotes")
        rows.append({
            "name": row.name, "n_v": row.n_v, "mu_x": row.mu_x, "var_x": row.var_x,
            "var_v": row.var_v, "var_bv": binovotes_vote_variance(s.stats, s.scale),
            "rmse_data": dd.rmse_bound, "rmse_global": ga.rmse_bound, "rmse_binovotes": bv_rep.rmse_bound,
            "pcc_data": dd.pcc_bound, "pcc_global": ga.pcc_bound, "pcc_binovotes": bv_rep.pcc_bound,
            "rmse_global_minus_data": ga.rmse_bound - dd.rmse_bound,
            "rmse_binovotes_minus_data": bv_rep.rmse_bound - dd.rmse_bound,
            "pcc_global_minus_data": ga.pcc_bound - dd.pcc_bound,
            "pcc_binovotes_minus_data": bv_rep.pcc_bound - dd.pcc_bound,
        })
    return rows


def table2_rows(global_var: float = GLOBAL_VOTE_VARIANCE) -> list[dict]:
    rows = []
    for row in fixtures().table2:
        s = row.summary()
        bv_rep = estimate_bounds(s, "binovotes")
        out = {
            "name": row.name, "mu_x": row.mu_x, "var_x": row.var_x, "n_v": row.n_v,
            "scale": f"{row.scale.s_L:g}-{row.scale.s_H:g}/{row.scale.n_s}"
                     + (" (inferred)" if row.scale_inferred else ""),
            "rmse_binovotes": bv_rep.rmse_bound, "rmse_fixed": None,
            "pcc_binovotes": bv_rep.pcc_bound, "pcc_fixed": None,
        }
        if row.scale == MOS_SCALE:
            ga = estimate_bounds(s, "global", global_var=global_var)
            out["rmse_fixed"], out["pcc_fixed"] = ga.rmse_bound, ga.pcc_bound
        checks = [
            _close(row.rmse_binovotes, out["rmse_binovotes"]),
            _close(row.rmse_fixed, out["rmse_fixed"]) if out["rmse_fixed"] is not None else None,
            _close(row.pcc_binovotes, out["pcc_binovotes"]),
            _close(row.pcc_fixed, out["pcc_fixed"]) if out["pcc_fixed"] is not None else None,
        ]
        checks = [c for c in checks if c is not None]
        out["cells_checked"] = len(checks)
        out["matches_published"] = all(checks)
        rows.append(out)
    return rows


def cmd_tables(args) -> int:
    t1 = table1_rows(args.global_var)
    t2 = table2_rows(args.global_var)
    summaries = [r.summary() for r in fixtures().table1]
    stats = {
        "global_vote_variance": global_average_vote_variance(summaries),
        "vote_variance_std": vote_variance_spread(summaries),
        "mean_binovotes_minus_observed": statistics.fmean(r["var_bv"] - r["var_v"] for r in t1),
        "table2_all_match": all(r["matches_published"] for r in t2),
    }
    if args.format == "json":
        text = render([{"table1": t1, "table2": t2, "summary": stats}], "json")
    else:
        parts = []
        if args.table in ("1", "all"):
            parts.append(("reference tests with vote variance", t1))
        if args.table in ("2", "all"):
            parts.append(("reference tests without vote variance", t2))
        chunks = []
        for title, rows in parts:
            chunks.append(f"# {title}\n" + render(rows, args.format))
        chunks.append("# summary\n" + render([stats], args.format))
        text = "\n".join(chunks)
    _emit(text, args.out)
    if not stats["table2_all_match"]:
        print("warning: some regenerated cells differ from the published values", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    scale = _scale(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ds = load_dataset(args.dataset, scale, args.variance_convention)
    cov = range_coverage_check(ds)
    row = {
        "dataset": ds.name,
        "n_f": len(ds),
        "coverage_passed": cov.passed,
        "bin_counts": " ".join(str(c) for c in cov.counts),
        "empty_bins": " ".join(str(b) for b in cov.empty_bins),
        "has_vote_variance": ds.has_variance_info(),
        "warnings": "; ".join(str(w.message) for w in caught),
    }
    if len(ds) >= 2:
        st = sample_stats(ds)
        row.update(mu_x=st.mu_hat, var_x=st.var_hat, n_v=st.n_v_mean)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(render([row], args.format), args.out)
    return 0 if cov.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mosbounds", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="RMSE/PCC bound estimates for a dataset")
    p.add_argument("dataset", nargs="?", help="votes or MOS file")
    p.add_argument("--summary", nargs=3, type=float, metavar=("MU", "VAR", "NV"),
                   help="use MOS mean, MOS variance and votes per file instead of a file")
    p.add_argument("--vote-var", type=float, help="observed mean vote variance (with --summary)")
    p.add_argument("--name", help="label for --summary input")
    _add_scale(p)
    p.add_argument("--mode", choices=("data", "global", "binovotes", "all"), default="all")
    p.add_argument("--global-var", type=float, default=GLOBAL_VOTE_VARIANCE)
    p.add_argument("--global-scale", nargs=3, type=float, metavar=("S_L", "S_H", "N_S"),
                   default=(1.0, 5.0, 5), help="scale the global variance was measured on")
    p.add_argument("--variance-convention", choices=("unbiased", "population"), default="unbiased")
    p.add_argument("--exact", action="store_true", help="per-file vote noise (variable n_votes)")
    _add_output(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("model", help="BinoVotes PMFs and variance curve")
    _add_scale(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pmf-curves", action="store_true", help="rating probabilities vs quality (default)")
    g.add_argument("--variance-curve", action="store_true", help="vote variance vs quality")
    g.add_argument("--binomos", metavar="DIST", help="BinoMOS PMF for a quality distribution")
    p.add_argument("--nv", type=int, default=1, help="votes per file for --binomos")
    p.add_argument("--grid", type=int, default=101, help="number of quality grid points")
    _add_output(p, "csv")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("curves", help="bounds vs votes per file")
    _add_scale(p)
    p.add_argument("--dists", default="uniform,tri:3,beta:2:2,beta:2:2.5")
    p.add_argument("--nv", default="1..30", help="e.g. 1..30 or 1,4,16")
    _add_output(p, "csv")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("simulate", help="Monte Carlo simulation")
    _add_scale(p)
    p.add_argument("--config", help="key = value config file (overrides the flags below)")
    p.add_argument("--dist", default="uniform")
    p.add_argument("--nf", type=int, default=1000)
    p.add_argument("--nv", type=int, default=4)
    p.add_argument("--reps", type=int, help="repetitions (default 1; 10000 with --convergence)")
    p.add_argument("--bias", type=float, default=0.0, help="std of per-subject bias")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--rows", metavar="PATH", help="write per-repetition rows as CSV")
    p.add_argument("--convergence", "--fig4", dest="convergence", action="store_true",
                   help="mean sample PCC against test size, with the population bound")
    p.add_argument("--nv-list", default=",".join(map(str, CONVERGENCE_NV)))
    p.add_argument("--nf-grid", default=",".join(map(str, CONVERGENCE_NF_GRID)))
    _add_output(p, "csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tables", help="regenerate reference tables from bundled data")
    p.add_argument("--table", choices=("1", "2", "all"), default="all")
    p.add_argument("--global-var", type=float, default=GLOBAL_VOTE_VARIANCE)
    _add_output(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("check", help="range coverage and validation")
    p.add_argument("dataset")
    _add_scale(p)
    p.add_argument("--variance-convention", choices=("unbiased", "population"), default="unbiased")
    _add_output(p)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    previous = warnings.showwarning
    warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
    try:
        return args.func(args)
    except (MosBoundsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        warnings.showwarning = previous


if __name__ == "__main__":
    sys.exit(main())

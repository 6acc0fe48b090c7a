"""Command-line front end: ``rgl {theory,simulate,sweep,figures,brute}``.

Exit codes: 0 success, 2 validation error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import experiment, ldp
from .dist import Bernoulli, DistributionError, parse_dist
from .game import CapacityError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3

log = logging.getLogger("rgl")


class ValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# flag parsing
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if any(not math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _n_range(text: str) -> list[int]:
    """``a:b`` or ``a:b:step`` (inclusive of b), or a comma list."""
    if ":" not in text:
        return _int_list(text)
    try:
        parts = [int(t) for t in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b[:step], got {text!r}") from None
    if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] < 1) or parts[1] < parts[0]:
        raise argparse.ArgumentTypeError(f"expected a:b[:step] with a <= b and step >= 1, got {text!r}")
    a, b = parts[:2]
    step = parts[2] if len(parts) == 3 else 1
    return list(range(a, b + 1, step))


def _grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive, evenly spaced) or a comma list."""
    if ":" not in text:
        return _float_list(text)
    try:
        a, b, c = text.split(":")
        a, b, count = float(a), float(b), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from None
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    if count == 1:
        return [a]
    return [a + (b - a) * k / (count - 1) for k in range(count)]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rgl", description="Pure Nash equilibria of random binary-action games: limits and simulation."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def dist_flag(p, default=None):
        p.add_argument("--dist", default=default, required=default is None, help="e.g. bernoulli:p=0.5, uniform:a=0,b=1")

    def out_flags(p, formats=("json", "csv")):
        p.add_argument("--out", type=Path, help="output file (directory for simulate)")
        p.add_argument("--format", choices=formats, default=formats[0])

    def sim_flags(p):
        p.add_argument("--reps", type=_positive_int, default=100)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--eps", type=_float_list, default=[], help="comma list of epsilons")
        p.add_argument("--thresholds", type=_float_list, default=[], help="comma list of x thresholds")
        p.add_argument("--workers", type=_positive_int, default=1)
        p.add_argument("--mem-cap", type=_positive_int, default=None, help="payoff-table byte budget")

    p = sub.add_parser("theory", help="limit thresholds x_typ, x_opt, x_beq, x_weq and PoA/PoS")
    dist_flag(p)
    out_flags(p)

    p = sub.add_parser("simulate", help="Monte Carlo over random games")
    dist_flag(p)
    p.add_argument("--n", type=_int_list, required=True, help="player count(s), comma list")
    sim_flags(p)
    p.add_argument("--out", type=Path, help="directory for results.csv and summary.json")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format when --out is absent")

    p = sub.add_parser("sweep", help="simulation over an n-range and/or theory over a p-grid")
    dist_flag(p, default="bernoulli:p=0.5")
    p.add_argument("--n-range", type=_n_range, help="a:b[:step] or comma list")
    p.add_argument("--grid", type=_grid, help="Bernoulli p-grid, start:stop:count or comma list")
    sim_flags(p)
    out_flags(p, ("csv", "json"))

    p = sub.add_parser("figures", help="data behind the limit-curve and entropy plots")
    p.add_argument("--which", choices=("1", "2"), required=True)
    p.add_argument("--grid", type=_grid, help="p-grid (figure 1) or x-grid (figure 2)")
    p.add_argument("--p", type=float, default=0.5, help="Bernoulli p for figure 2")
    out_flags(p, ("csv", "json"))

    p = sub.add_parser("brute", help="exact moments over every Bernoulli payoff table")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--thresholds", type=_float_list, default=[])
    out_flags(p)
    return parser


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def _num(v: float):
    """Float rounded to 12 significant digits; infinities become marker strings."""
    if v is None:
        return None
    if isinstance(v, int):
        return v
    if math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(f"{v:.12g}")


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, newline="\n")


def _json_text(obj) -> str:
    return json.dumps(experiment._jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def theory_dict(dist_spec: str) -> dict:
    d = parse_dist(dist_spec)
    th = ldp.theory(d)
    out = {
        "dist": th.dist,
        "alpha": _num(th.alpha),
        "beta": _num(th.beta),
        "x_typ": _num(th.x_typ),
        "x_opt": _num(th.x_opt),
        "x_beq": _num(th.x_beq),
        "x_weq": _num(th.x_weq),
        "regime": th.regime,
        "poa": _num(th.poa),
        "pos": _num(th.pos),
    }
    if isinstance(d, Bernoulli) and 0.0 < d.p < 1.0:
        out["p_tilde"] = _num(ldp.bernoulli_limits(d.p).p_tilde)
    return out


def cmd_theory(args) -> int:
    data = theory_dict(args.dist)
    if args.format == "json":
        _emit(_json_text(data), args.out)
    else:
        _emit(experiment.rows_to_csv([data], {"command": "theory", "dist": data["dist"]}), args.out)
    return EXIT_OK


def _config(args, dist: str, ns: list[int]) -> experiment.ExperimentConfig:
    return experiment.ExperimentConfig(
        dist=dist,
        ns=ns,
        reps=args.reps,
        seed=args.seed,
        thresholds=args.thresholds,
        epsilons=args.eps,
        workers=args.workers,
        mem_cap_bytes=args.mem_cap,
    )


def _status(result: experiment.ExperimentResult) -> int:
    for c in result.cells:
        if c.error:
            print(f"rgl: n={c.n}: {c.error}", file=sys.stderr)
    return EXIT_CAPACITY if result.partial else EXIT_OK


def cmd_simulate(args) -> int:
    result = experiment.run(_config(args, args.dist, args.n))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        experiment.write_results_csv(result, args.out / "results.csv")
        experiment.write_summary_json(result, args.out / "summary.json")
    elif args.format == "csv":
        sys.stdout.write(experiment.results_csv_text(result))
    else:
        sys.stdout.write(_json_text(result.summary()))
    return _status(result)


def _sweep_row(dist: str, cell: dict, theory: dict) -> dict:
    def m(key):
        v = cell.get(key)
        return None if not v else v.get("mean")

    def se(key):
        v = cell.get(key)
        return None if not v else v.get("se")

    return {
        "dist": dist,
        "n": cell["n"],
        "reps": cell["reps"],
        "error": cell.get("error", ""),
        "ne_mean": m("ne_count"),
        "ne_se": se("ne_count"),
        "ne_nonempty_frequency": cell.get("ne_nonempty_frequency"),
        "log_growth_mean": m("log_growth"),
        "so_mean": m("so"),
        "beq_mean": m("beq"),
        "weq_mean": m("weq"),
        "expected_ne": None if "targets" not in cell else cell["targets"]["expected_ne_count"],
        "log_1_plus_alpha": theory["log_1_plus_alpha"],
        "x_typ": theory["x_typ"],
        "x_opt": theory["x_opt"],
        "x_beq": theory["x_beq"],
        "x_weq": theory["x_weq"],
    }


def cmd_sweep(args) -> int:
    if args.n_range is None and args.grid is None:
        raise ValidationError("sweep needs --n-range and/or --grid")
    if args.grid is not None:
        if any(not 0.0 <= p <= 1.0 for p in args.grid):
            raise ValidationError("--grid values must lie in [0, 1]")
        dists = [Bernoulli(p).spec() for p in args.grid]
    else:
        dists = [parse_dist(args.dist).spec()]
    rows, status = [], EXIT_OK
    for dist in dists:
        if args.n_range is None:
            th = theory_dict(dist)
            rows.append({k: th[k] for k in ("dist", "alpha", "x_typ", "x_opt", "x_beq", "x_weq", "poa", "pos")})
            continue
        result = experiment.run(_config(args, dist, args.n_range))
        status = max(status, _status(result))
        summary = result.summary()
        rows += [_sweep_row(dist, cell, summary["theory"]) for cell in summary["cells"]]
    config = {
        "command": "sweep",
        "dists": dists,
        "ns": args.n_range,
        "reps": args.reps,
        "seed": args.seed,
        "thresholds": args.thresholds,
        "epsilons": args.eps,
        "mem_cap_bytes": args.mem_cap,
    }
    if args.format == "csv":
        _emit(experiment.rows_to_csv(rows, config), args.out)
    else:
        _emit(_json_text({"config": config, "rows": rows}), args.out)
    return status


def cmd_figures(args) -> int:
    if args.which == "1":
        grid = args.grid if args.grid is not None else [k / 200 for k in range(1, 200)]
        rows = experiment.figure1_data(grid)
        config = {"command": "figures", "which": 1, "p_grid": grid}
        extra = {}
    else:
        grid = args.grid if args.grid is not None else [k / 200 for k in range(1, 200)]
        rows, levels = experiment.figure2_data(args.p, grid)
        config = {"command": "figures", "which": 2, "p": args.p, "x_grid": grid, "levels": levels}
        extra = {"levels": levels}
    if args.format == "csv":
        _emit(experiment.rows_to_csv(rows, config), args.out)
    else:
        _emit(_json_text({"config": config, "rows": rows, **extra}), args.out)
    return EXIT_OK


def cmd_brute(args) -> int:
    bf = experiment.brute_force_expectations(args.n, args.p, args.thresholds)
    data = bf.to_dict()
    closed = [float(experiment.first_moment_closed_form_bernoulli(args.n, args.p, x)) for x in args.thresholds]
    for row, c in zip(data["thresholds"], closed):
        row["E_z_plus_closed_form"] = c
    p_exact = bf.p
    alpha = p_exact**2 + (1 - p_exact) ** 2
    data["E_ne_closed_form"] = float((1 + alpha) ** args.n)
    config = {"command": "brute", "n": args.n, "p": args.p, "thresholds": args.thresholds}
    if args.format == "json":
        _emit(_json_text({"config": config, **data}), args.out)
    else:
        rows = [{"n": data["n"], "p": data["p"], "x": "", "E_ne": data["E_ne"], "E_z_plus": "", "E_z_plus_sq": "", "ratio_z_plus": ""}]
        rows += [
            {"n": data["n"], "p": data["p"], "x": r["x"], "E_ne": data["E_ne"], "E_z_plus": r["E_z_plus"],
             "E_z_plus_sq": r["E_z_plus_sq"], "ratio_z_plus": r["ratio_z_plus"]}
            for r in data["thresholds"]
        ]
        _emit(experiment.rows_to_csv(rows, config), args.out)
    return EXIT_OK


COMMANDS = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "figures": cmd_figures,
    "brute": cmd_brute,
}


def _validate(args) -> None:
    if getattr(args, "dist", None) is not None:
        parse_dist(args.dist)
    ns = getattr(args, "n", None)
    if isinstance(ns, list) and any(n < 1 for n in ns):
        raise ValidationError(f"player counts must be >= 1, got {ns}")
    if any(n < 1 for n in getattr(args, "n_range", None) or []):
        raise ValidationError("player counts must be >= 1")
    if any(e <= 0 for e in getattr(args, "eps", None) or []):
        raise ValidationError("--eps values must be positive")
    if args.command == "brute" and not 0.0 <= args.p <= 1.0:
        raise ValidationError(f"--p must lie in [0, 1], got {args.p}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="rgl: %(message)s")
    try:
        _validate(args)
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"rgl: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, DistributionError, ValueError) as exc:
        print(f"rgl: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

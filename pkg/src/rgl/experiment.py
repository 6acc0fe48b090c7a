"""Monte Carlo and exact-enumeration harness for random binary-action games.

Replication seeds come from a SplitMix64 chain over (master seed, n,
replication index), so every replication can be regenerated on its own and
results do not depend on how replications are spread over workers.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ldp
from .dist import Bernoulli, PayoffDistribution, condition_on_max, parse_dist
from .game import CapacityError, check_capacity, generate, memory_cap, report

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "CellResult",
    "replication_seed",
    "run",
    "poisson_check",
    "growth_check",
    "first_moment_exact",
    "first_moment_check",
    "brute_force_expectations",
    "first_moment_closed_form_bernoulli",
    "results_csv_text",
    "rows_to_csv",
    "figure1_data",
    "figure2_data",
    "write_results_csv",
    "write_summary_json",
]

_MASK64 = (1 << 64) - 1

# Finite-n tolerances; the underlying statements are limits only.
POISSON_TV_TOL = 0.02
POISSON_K_MAX = 10
POISSON_MIN_REPS = 10**4
GROWTH_TOL = 0.05
TYP_FRACTION_MIN = 0.9
CALIBRATION_NOTE = (
    "finite-n tolerances are calibrations: Poisson TV <= 0.02, growth slope within 0.05 of log(1+alpha), "
    "typical fraction >= 0.9; the theory only states the n -> infinity limits"
)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replication_seed(master_seed: int, n: int, replication: int) -> int:
    """SplitMix64(SplitMix64(SplitMix64(master) ^ n) ^ replication)."""
    h = _splitmix64(master_seed & _MASK64)
    h = _splitmix64(h ^ n)
    return _splitmix64(h ^ replication)


@dataclass
class ExperimentConfig:
    dist: str
    ns: list[int]
    reps: int
    seed: int = 0
    thresholds: list[float] = field(default_factory=list)
    epsilons: list[float] = field(default_factory=list)
    workers: int = 1
    mem_cap_bytes: int | None = None
    chunk: int = 256

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not self.ns:
            raise ValueError("at least one player count is required")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if any(e <= 0 for e in self.epsilons):
            raise ValueError("epsilons must be positive")
        self.distribution  # parses and validates the distribution string

    @property
    def distribution(self) -> PayoffDistribution:
        return parse_dist(self.dist)

    def resolved(self) -> dict:
        """Config as written into output files; worker count and chunking excluded (they do not affect results)."""
        d = self.distribution
        return {
            "dist": d.spec(),
            "dist_json": d.to_json(),
            "ns": list(self.ns),
            "reps": self.reps,
            "seed": self.seed,
            "thresholds": list(self.thresholds),
            "epsilons": list(self.epsilons),
            "mem_cap_bytes": self.mem_cap_bytes,
            "seed_derivation": "splitmix64(splitmix64(splitmix64(seed) ^ n) ^ replication); SFC64 stream",
        }


@dataclass
class Row:
    n: int
    replication: int
    seed: int
    ne_count: int
    so: float
    beq: float | None
    weq: float | None
    typ_count: tuple[int, ...]
    w_plus: tuple[int, ...]
    w_minus: tuple[int, ...]
    z_plus: tuple[int, ...]
    z_minus: tuple[int, ...]


@dataclass
class CellResult:
    n: int
    rows: list[Row]
    error: str | None = None

    @property
    def reps(self) -> int:
        return len(self.rows)

    def column(self, name: str, index: int | None = None) -> np.ndarray:
        vals = [getattr(r, name) if index is None else getattr(r, name)[index] for r in self.rows]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    theory: dict
    cells: list[CellResult]

    def cell(self, n: int) -> CellResult:
        for c in self.cells:
            if c.n == n:
                return c
        raise KeyError(n)

    @property
    def partial(self) -> bool:
        return any(c.error for c in self.cells)

    def summary(self) -> dict:
        return {
            "config": self.config.resolved(),
            "theory": self.theory,
            "partial": self.partial,
            "calibration": CALIBRATION_NOTE,
            "cells": [_aggregate(c, self.config, self.theory) for c in self.cells],
        }


def _replicate(args) -> list[Row]:
    spec, n, master, reps, thresholds, epsilons, x_typ, mem_cap = args
    d = parse_dist(spec)
    rows = []
    for r in reps:
        seed = replication_seed(master, n, r)
        rep = report(generate(n, d, seed, mem_cap), thresholds, epsilons, x_typ)
        rows.append(
            Row(n, r, seed, rep.ne_count, rep.so, rep.beq, rep.weq, rep.typ_count, rep.w_plus, rep.w_minus, rep.z_plus, rep.z_minus)
        )
    return rows


def _theory_targets(d: PayoffDistribution) -> dict:
    th = ldp.theory(d)
    return {
        "alpha": th.alpha,
        "beta": th.beta,
        "x_typ": th.x_typ,
        "x_opt": th.x_opt,
        "x_beq": th.x_beq,
        "x_weq": th.x_weq,
        "regime": th.regime,
        "log_1_plus_alpha": math.log1p(th.alpha),
    }


def run(config: ExperimentConfig) -> ExperimentResult:
    """M independent games per player count; deterministic for a given config."""
    d = config.distribution
    theory = _theory_targets(d)
    x_typ = theory["x_typ"]
    spec = d.spec()
    cap = memory_cap(config.mem_cap_bytes)
    cells = []
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for n in config.ns:
            chunks = [range(a, min(a + config.chunk, config.reps)) for a in range(0, config.reps, config.chunk)]
            jobs = [
                (spec, n, config.seed, ch, tuple(config.thresholds), tuple(config.epsilons), x_typ, cap)
                for ch in chunks
            ]
            try:
                check_capacity(n, isinstance(d, Bernoulli), cap)
                parts = pool.map(_replicate, jobs) if pool else map(_replicate, jobs)
                rows = [row for part in parts for row in part]
                cells.append(CellResult(n, rows))
            except (CapacityError, ValueError) as exc:
                log.info("cell n=%d failed: %s", n, exc)
                cells.append(CellResult(n, [], error=f"{type(exc).__name__}: {exc}"))
    finally:
        if pool:
            pool.shutdown()
    return ExperimentResult(config, theory, cells)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def _mean_se(x: np.ndarray) -> dict:
    x = x[~np.isnan(x)]
    m = len(x)
    if m == 0:
        return {"mean": None, "se": None, "count": 0}
    mu = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(m)) if m > 1 else None
    return {"mean": mu, "se": se, "count": m}


def _aggregate(cell: CellResult, cfg: ExperimentConfig, theory: dict) -> dict:
    if cell.error:
        return {"n": cell.n, "error": cell.error, "reps": 0}
    n, m = cell.n, cell.reps
    ne = cell.column("ne_count")
    has_ne = ne >= 1
    values, counts = np.unique(ne.astype(np.int64), return_counts=True)
    ne_stats = _mean_se(ne)
    ne_stats["var"] = float(np.var(ne, ddof=1)) if m > 1 else None
    growth = np.where(has_ne, np.log(np.maximum(ne, 1)) / n, np.nan)
    alpha = theory["alpha"]
    out = {
        "n": n,
        "reps": m,
        "ne_pmf": {str(int(k)): c / m for k, c in zip(values, counts)},
        "ne_count": ne_stats,
        "ne_nonempty_frequency": float(has_ne.mean()),
        "so": _mean_se(cell.column("so")),
        "beq": _mean_se(cell.column("beq")),
        "weq": _mean_se(cell.column("weq")),
        "log_growth": _mean_se(growth),
        "targets": {
            "expected_ne_count": (1.0 + alpha) ** n,
            "log_1_plus_alpha": math.log1p(alpha),
            "x_opt": theory["x_opt"],
            "x_typ": theory["x_typ"],
            "x_beq": theory["x_beq"],
            "x_weq": theory["x_weq"],
        },
        "thresholds": {},
        "typical_fraction": {},
    }
    d = cfg.distribution
    for j, x in enumerate(cfg.thresholds):
        zp = cell.column("z_plus", j)
        entry = {
            "z_plus": _mean_se(zp),
            "z_minus": _mean_se(cell.column("z_minus", j)),
            "w_plus": _mean_se(cell.column("w_plus", j)),
            "w_minus": _mean_se(cell.column("w_minus", j)),
            "z_plus_second_moment_ratio": (
                float(np.mean(zp**2) / np.mean(zp) ** 2) if np.mean(zp) > 0 else None
            ),
        }
        if d.is_discrete:
            entry["z_plus_exact"] = first_moment_exact(d, n, x, "+")
            entry["z_minus_exact"] = first_moment_exact(d, n, x, "-")
        out["thresholds"][repr(x)] = entry
    for j, e in enumerate(cfg.epsilons):
        frac = np.where(has_ne, cell.column("typ_count", j) / np.maximum(ne, 1), np.nan)
        out["typical_fraction"][repr(e)] = _mean_se(frac) | {"conditioning_frequency": float(has_ne.mean())}
    return out


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------


def _cell_str(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def results_csv_text(result: ExperimentResult) -> str:
    cfg = result.config
    buf = io.StringIO()
    buf.write("# config=" + json.dumps(cfg.resolved(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    header = ["n", "replication", "seed", "ne_count", "so", "beq", "weq"]
    header += [f"typ_count@{e!r}" for e in cfg.epsilons]
    for name in ("w_plus", "w_minus", "z_plus", "z_minus"):
        header += [f"{name}@{x!r}" for x in cfg.thresholds]
    w.writerow(header)
    for cell in result.cells:
        for r in cell.rows:
            w.writerow(
                [_cell_str(v) for v in (r.n, r.replication, r.seed, r.ne_count, r.so, r.beq, r.weq)]
                + list(r.typ_count)
                + list(r.w_plus)
                + list(r.w_minus)
                + list(r.z_plus)
                + list(r.z_minus)
            )
    return buf.getvalue()


def write_results_csv(result: ExperimentResult, path) -> Path:
    path = Path(path)
    path.write_text(results_csv_text(result), newline="\n")
    return path


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def write_summary_json(result: ExperimentResult, path, extra: dict | None = None) -> Path:
    path = Path(path)
    data = result.summary()
    if extra:
        data.update(extra)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", newline="\n")
    return path


# ---------------------------------------------------------------------------
# statistical checks
# ---------------------------------------------------------------------------


def poisson_check(cell: CellResult, d: PayoffDistribution, k_max: int = POISSON_K_MAX) -> dict:
    """Total-variation distance of the equilibrium-count pmf to Poisson(1).

    Counts above ``k_max`` are lumped into one residual bin on both sides.
    """
    if d.alpha > 0:
        raise ValueError("Poisson(1) comparison applies to atomless payoff laws only")
    ne = cell.column("ne_count").astype(np.int64)
    m = len(ne)
    emp = np.bincount(np.minimum(ne, k_max + 1), minlength=k_max + 2)[: k_max + 2] / m
    pois = np.array([math.exp(-1.0) / math.factorial(k) for k in range(k_max + 1)])
    pois = np.append(pois, 1.0 - pois.sum())
    tv = 0.5 * float(np.abs(emp - pois).sum())
    return {
        "n": cell.n,
        "reps": m,
        "tv": tv,
        "tolerance": POISSON_TV_TOL,
        "within": tv <= POISSON_TV_TOL,
        "k_max": k_max,
        "residual_empirical": float(emp[-1]),
        "residual_poisson": float(pois[-1]),
        "warning": None if m >= POISSON_MIN_REPS else f"only {m} replications (< {POISSON_MIN_REPS}); TV is noise-dominated",
    }


def growth_check(cell: CellResult, d: PayoffDistribution) -> dict:
    """Mean of (1/n) log |NE| over games with at least one equilibrium, against log(1 + alpha)."""
    if d.alpha <= 0:
        raise ValueError("exponential growth check needs a payoff law with atoms (alpha > 0)")
    ne = cell.column("ne_count")
    vals = np.log(ne[ne >= 1]) / cell.n
    stats = _mean_se(vals)
    target = math.log1p(d.alpha)
    diff = None if stats["mean"] is None else stats["mean"] - target
    return {
        "n": cell.n,
        **stats,
        "conditioning_frequency": float(np.mean(ne >= 1)),
        "target": target,
        "difference": diff,
        "tolerance": GROWTH_TOL,
        "within": diff is not None and abs(diff) <= GROWTH_TOL,
    }


def _asu_ge(total: Fraction, n: int, x: float) -> bool:
    # same predicate as the game counters: float(sum) / n >= x
    return float(total) / n >= x


def _asu_le(total: Fraction, n: int, x: float) -> bool:
    return float(total) / n <= x


def first_moment_exact(d: PayoffDistribution, n: int, x: float, side: str = "+") -> float:
    """(1 + alpha)^n * P(mean of n conditioned draws >= x)  (``side='-'``: <= x).

    The n-fold convolution of the conditioned law is carried out on exact
    rational sums of the (dyadic) support values.
    """
    if not d.is_discrete:
        raise ValueError("exact first moment needs a discrete payoff law")
    atoms = condition_on_max(d).atoms
    dist = {Fraction(0): 1.0}
    for _ in range(n):
        nxt: dict[Fraction, float] = {}
        for s, p in dist.items():
            for v, m in atoms:
                key = s + Fraction(v)
                nxt[key] = nxt.get(key, 0.0) + p * m
        dist = nxt
    test = _asu_ge if side == "+" else _asu_le
    tail = math.fsum(p for s, p in dist.items() if test(s, n, x))
    return (1.0 + d.alpha) ** n * tail


@dataclass
class FirstMomentCheck:
    dist: str
    n: int
    x: float
    side: str
    exact: float | None
    mc_mean: float
    mc_se: float | None
    z: float | None
    reps: int


def first_moment_check(
    d: PayoffDistribution, n: int, x: float, reps: int, seed: int = 0, side: str = "+", workers: int = 1
) -> FirstMomentCheck:
    """Exact expected count of equilibria with utility >= x (<= x) against its Monte Carlo estimate."""
    if n > 20:
        raise ValueError("first_moment_check is limited to n <= 20")
    exact = first_moment_exact(d, n, x, side) if d.is_discrete else None
    res = run(ExperimentConfig(d.spec(), [n], reps, seed, thresholds=[x], workers=workers))
    col = res.cells[0].column("z_plus" if side == "+" else "z_minus", 0)
    stats = _mean_se(col)
    z = None
    if exact is not None and stats["se"] is not None:
        diff = stats["mean"] - exact
        z = diff / stats["se"] if stats["se"] > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
    return FirstMomentCheck(d.spec(), n, x, side, exact, stats["mean"], stats["se"], z, reps)


@dataclass
class BruteForce:
    n: int
    p: Fraction
    games: int
    expected_ne: Fraction
    thresholds: tuple[float, ...]
    z_plus: tuple[Fraction, ...]
    z_plus_sq: tuple[Fraction, ...]
    z_minus: tuple[Fraction, ...]
    z_minus_sq: tuple[Fraction, ...]

    def z_plus_var(self, j: int) -> Fraction:
        return self.z_plus_sq[j] - self.z_plus[j] ** 2

    def z_plus_ratio(self, j: int) -> Fraction | None:
        return self.z_plus_sq[j] / self.z_plus[j] ** 2 if self.z_plus[j] else None

    def to_dict(self) -> dict:
        rows = []
        for j, x in enumerate(self.thresholds):
            ratio = self.z_plus_ratio(j)
            rows.append(
                {
                    "x": x,
                    "E_z_plus": float(self.z_plus[j]),
                    "E_z_plus_sq": float(self.z_plus_sq[j]),
                    "var_z_plus": float(self.z_plus_var(j)),
                    "ratio_z_plus": None if ratio is None else float(ratio),
                    "E_z_minus": float(self.z_minus[j]),
                    "E_z_minus_sq": float(self.z_minus_sq[j]),
                    "E_z_plus_exact": str(self.z_plus[j]),
                }
            )
        return {
            "n": self.n,
            "p": float(self.p),
            "games": self.games,
            "E_ne": float(self.expected_ne),
            "E_ne_exact": str(self.expected_ne),
            "thresholds": rows,
        }


BRUTE_MAX_BITS = 24


def brute_force_expectations(n: int, p: float | Fraction, thresholds: Sequence[float] = (), block: int = 1 << 20) -> BruteForce:
    """Exact moments over every Bernoulli payoff table with n players.

    Tables are enumerated as integers T in [0, 2**(n 2**n)); the payoff of
    player i at profile s is bit i*2**n + s of T.  Per-table statistics are
    summed by the number of ones K, and the expectation is the polynomial
    sum_K S_K p^K (1-p)^(N-K) evaluated in rational arithmetic.
    """
    n_profiles = 1 << n
    nbits = n * n_profiles
    if nbits > BRUTE_MAX_BITS:
        raise ValueError(f"brute force needs n * 2**n <= {BRUTE_MAX_BITS}, got {nbits}")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    thresholds = tuple(float(x) for x in thresholds)
    nt = len(thresholds)
    # S[stat][K]
    s_ne = [0] * (nbits + 1)
    s_zp = [[0] * (nbits + 1) for _ in range(nt)]
    s_zp2 = [[0] * (nbits + 1) for _ in range(nt)]
    s_zm = [[0] * (nbits + 1) for _ in range(nt)]
    s_zm2 = [[0] * (nbits + 1) for _ in range(nt)]
    total = 1 << nbits
    for start in range(0, total, block):
        tables = np.arange(start, min(start + block, total), dtype=np.uint64)
        ones = np.bitwise_count(tables).astype(np.int64)

        def bit(i, s):
            return ((tables >> np.uint64(i * n_profiles + s)) & np.uint64(1)).astype(bool)

        ne_count = np.zeros(tables.size, dtype=np.int64)
        zp = np.zeros((nt, tables.size), dtype=np.int64)
        zm = np.zeros((nt, tables.size), dtype=np.int64)
        for s in range(n_profiles):
            is_ne = np.ones(tables.size, dtype=bool)
            k = np.zeros(tables.size, dtype=np.int64)
            for i in range(n):
                mine = bit(i, s)
                is_ne &= mine | ~bit(i, s ^ (1 << i))
                k += mine
            ne_count += is_ne
            for j, x in enumerate(thresholds):
                asu = k / n
                zp[j] += is_ne & (asu >= x)
                zm[j] += is_ne & (asu <= x)
        for K, v in enumerate(np.bincount(ones, weights=ne_count, minlength=nbits + 1)):
            s_ne[K] += int(v)
        for j in range(nt):
            for acc, vals in ((s_zp[j], zp[j]), (s_zp2[j], zp[j] ** 2), (s_zm[j], zm[j]), (s_zm2[j], zm[j] ** 2)):
                for K, v in enumerate(np.bincount(ones, weights=vals, minlength=nbits + 1)):
                    acc[K] += int(v)

    weights = [p**K * (1 - p) ** (nbits - K) for K in range(nbits + 1)]

    def expect(s):
        return sum((w * c for w, c in zip(weights, s)), Fraction(0))

    return BruteForce(
        n=n,
        p=p,
        games=total,
        expected_ne=expect(s_ne),
        thresholds=thresholds,
        z_plus=tuple(expect(s) for s in s_zp),
        z_plus_sq=tuple(expect(s) for s in s_zp2),
        z_minus=tuple(expect(s) for s in s_zm),
        z_minus_sq=tuple(expect(s) for s in s_zm2),
    )


def first_moment_closed_form_bernoulli(n: int, p: float | Fraction, x: float, side: str = "+") -> Fraction:
    """(1 + alpha)^n P(Bin(n, p~) / n >= x), exact in rationals."""
    p = Fraction(p)
    alpha = p * p + (1 - p) ** 2
    pt = p / (1 - p + p * p)
    keep = (lambda k: k / n >= x) if side == "+" else (lambda k: k / n <= x)
    tail = sum((math.comb(n, k) * pt**k * (1 - pt) ** (n - k) for k in range(n + 1) if keep(k)), Fraction(0))
    return (1 + alpha) ** n * tail


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------


def _check_open_grid(grid, name):
    grid = [float(v) for v in grid]
    if any(not 0.0 < v < 1.0 for v in grid):
        raise ValueError(f"{name} values must lie strictly inside (0, 1)")
    return grid


def figure1_data(p_grid: Sequence[float]) -> list[dict]:
    """Rows (p, x_opt, x_beq, x_weq, x_typ) of the Bernoulli limit curves."""
    rows = []
    for p in _check_open_grid(p_grid, "p grid"):
        lim = ldp.bernoulli_limits(p)
        rows.append({"p": p, "x_opt": lim.x_opt, "x_beq": lim.x_beq, "x_weq": lim.x_weq, "x_typ": lim.x_typ})
    return rows


def figure2_data(p: float, x_grid: Sequence[float]) -> tuple[list[dict], dict]:
    """Rows (x, H_p(x), H_p~(x)) and the two horizontal levels log 2 and log(1 + alpha)."""
    (p,) = _check_open_grid([p], "p")
    lim = ldp.bernoulli_limits(p)
    levels = {"log2": math.log(2.0), "log_1_plus_alpha": math.log1p(lim.alpha), "p": p, "p_tilde": lim.p_tilde}
    rows = [
        {"x": x, "H_p": ldp.entropy(p, x), "H_p_tilde": ldp.entropy(lim.p_tilde, x)}
        for x in _check_open_grid(x_grid, "x grid")
    ]
    return rows, levels


def rows_to_csv(rows: list[dict], config: dict | None = None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write("# config=" + json.dumps(_jsonable(config), sort_keys=True) + "\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell_str(v) for k, v in r.items()})
    return buf.getvalue()

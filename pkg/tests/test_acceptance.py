"""Acceptance criteria, each at its stated tolerance and time limit.

Every test records a one-line PASS/FAIL verdict that is printed in the
session summary (and immediately, with ``pytest -s``).
"""

import io
import json
import math
import time
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from oracles import first_moment_bernoulli, naive_pne
from rgl.cli import main
from rgl.dist import Bernoulli, FiniteDiscrete, Gaussian, Mixed, Uniform
from rgl.experiment import (
    ExperimentConfig,
    brute_force_expectations,
    figure1_data,
    growth_check,
    poisson_check,
    run,
    write_results_csv,
    write_summary_json,
)
from rgl.game import enumerate_pne, generate
from rgl.ldp import RateFunction, entropy, rate

P_STAR = 1 - math.sqrt(2) / 2

# Monte Carlo cells for criteria 6-10; criterion 11 reruns them with another worker count.
MC_CELLS = {
    6: dict(dist="bernoulli:p=0.5", ns=[12], reps=10_000, seed=6006, thresholds=[0.5, 0.75]),
    7: dict(dist="uniform:a=0,b=1", ns=[14], reps=100_000, seed=7007),
    8: dict(dist="bernoulli:p=0.5", ns=[20], reps=200, seed=8008),
    9: dict(dist="bernoulli:p=0.6", ns=[20], reps=200, seed=9009),
    10: dict(dist="bernoulli:p=0.5", ns=[12, 16, 20], reps=200, seed=10010, epsilons=[0.1]),
}
_MC_RESULTS = {}


def _record(log, k, ok, detail, elapsed, limit):
    within = elapsed < limit
    verdict = "PASS" if ok and within else "FAIL"
    limit_text = f"{limit:g}s" if math.isfinite(limit) else "none"
    line = f"criterion {k:2d}: {verdict}  {detail}  [{elapsed:.2f}s, limit {limit_text}]"
    log[k] = line
    print(line)
    return ok and within


def _files(result, directory: Path) -> dict[str, bytes]:
    directory.mkdir(parents=True, exist_ok=True)
    out = {}
    for name, writer in (("results.csv", write_results_csv), ("summary.json", write_summary_json)):
        out[name] = writer(result, directory / name).read_bytes()
    return out


def _mc(k, tmp_root: Path, workers: int = 1):
    t0 = time.perf_counter()
    result = run(ExperimentConfig(**MC_CELLS[k], workers=workers))
    elapsed = time.perf_counter() - t0
    files = _files(result, tmp_root / f"c{k}_w{workers}")
    return result, files, elapsed


@pytest.fixture(scope="module")
def tmp_root(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def test_c01_bernoulli_limit_values(acceptance_log):
    t0 = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["theory", "--dist", "bernoulli:p=0.5"])
    data = json.loads(buf.getvalue())
    elapsed = time.perf_counter() - t0
    poa = data["x_opt"] / data["x_weq"]
    ok = (
        code == 0
        and 0.2266 <= data["x_weq"] <= 0.2276
        and data["x_opt"] == 1
        and data["x_beq"] == 1
        and abs(data["x_typ"] - 2 / 3) <= 1e-9
        and data["alpha"] == 0.5
        and 4.394 <= poa <= 4.413
    )
    detail = f"x_weq={data['x_weq']:.6f} x_opt={data['x_opt']} x_beq={data['x_beq']} x_typ={data['x_typ']} alpha={data['alpha']} PoA={poa:.4f}"
    assert _record(acceptance_log, 1, ok, detail, elapsed, 1.0)


def test_c02_threshold_curve_shape(acceptance_log):
    t0 = time.perf_counter()
    grid = [k / 200 for k in range(1, 200)]
    rows = figure1_data(grid)
    elapsed = time.perf_counter() - t0
    flat = [r for r in rows if r["p"] < P_STAR - 1e-6]
    rising = [r for r in rows if r["p"] >= P_STAR - 1e-6]
    high = [r for r in rows if r["p"] >= 0.5]
    low = [r for r in rows if r["p"] < 0.5]
    checks = {
        "x_weq=0 below threshold": all(r["x_weq"] == 0.0 for r in flat),
        "x_weq strictly increasing after": all(b["x_weq"] > a["x_weq"] for a, b in zip(rising, rising[1:])),
        "x_opt=x_beq=1 for p>=1/2": all(r["x_opt"] == 1.0 and r["x_beq"] == 1.0 for r in high),
        "x_opt increasing below 1/2": all(b["x_opt"] > a["x_opt"] for a, b in zip(low, low[1:])),
        "x_beq increasing below 1/2": all(b["x_beq"] > a["x_beq"] for a, b in zip(low, low[1:])),
    }
    failed = [k for k, v in checks.items() if not v]
    detail = f"{len(rows)} grid points; " + ("all shape checks hold" if not failed else "failed: " + ", ".join(failed))
    assert _record(acceptance_log, 2, not failed, detail, elapsed, 10.0)


def test_c03_legendre_vs_entropy(acceptance_log):
    t0 = time.perf_counter()
    worst = 0.0
    xs = np.linspace(0.0, 1.0, 1001)
    for q in [k / 10 for k in range(1, 10)]:
        r = RateFunction.of(Bernoulli(q))
        for x in xs:
            worst = max(worst, abs(rate(r, float(x)) - entropy(q, float(x))))
    elapsed = time.perf_counter() - t0
    assert _record(acceptance_log, 3, worst <= 1e-9, f"max |I - H| = {worst:.2e} (tol 1e-9)", elapsed, 5.0)


def test_c04_fast_enumeration_matches_naive(acceptance_log):
    kinds = [
        Bernoulli(0.2),
        Bernoulli(0.5),
        Bernoulli(0.8),
        Uniform(0.0, 1.0),
        FiniteDiscrete((0.0, 0.5, 1.0), (0.25, 0.5, 0.25)),
        Gaussian(0.0, 1.0),
        Mixed(Uniform(0.0, 1.0), 0.5, ((0.0, 0.25), (1.0, 0.25))),
    ]
    t0 = time.perf_counter()
    rng = np.random.default_rng(4004)
    mismatches = 0
    games = 0
    for d in kinds:
        for seed in range(1000):
            n = int(rng.integers(1, 11))
            g = generate(n, d, seed)
            if enumerate_pne(g) != naive_pne(g.table().tolist()):
                mismatches += 1
            games += 1
    elapsed = time.perf_counter() - t0
    detail = f"{games} games over {len(kinds)} kinds, {mismatches} mismatches"
    assert _record(acceptance_log, 4, mismatches == 0, detail, elapsed, 30.0)


def test_c05_exhaustive_first_moment(acceptance_log):
    t0 = time.perf_counter()
    worst = 0.0
    for n, p in ((1, 0.5), (2, 0.5), (2, 0.3)):
        xs = sorted({k / n for k in range(n + 1)} | {0.25, 0.75})
        bf = brute_force_expectations(n, p, xs)
        alpha = p * p + (1 - p) ** 2
        worst = max(worst, abs(float(bf.expected_ne) - (1 + alpha) ** n))
        for j, x in enumerate(xs):
            worst = max(worst, abs(float(bf.z_plus[j]) - float(first_moment_bernoulli(n, p, x))))
    elapsed = time.perf_counter() - t0
    assert _record(acceptance_log, 5, worst < 1e-12, f"max deviation {worst:.2e} (tol 1e-12)", elapsed, 60.0)


def test_c06_first_moment_monte_carlo(acceptance_log, tmp_root):
    result, files, elapsed = _mc(6, tmp_root)
    _MC_RESULTS[6] = files
    cell = result.cell(12)
    parts, ok = [], True
    for j, x in enumerate((0.5, 0.75)):
        z = cell.column("z_plus", j)
        se = z.std(ddof=1) / math.sqrt(z.size)
        exact = float(first_moment_bernoulli(12, 0.5, x))
        dev = (z.mean() - exact) / se
        ok &= abs(dev) <= 4
        parts.append(f"x={x}: mean {z.mean():.3f} vs exact {exact:.3f} ({dev:+.2f} SE)")
    assert _record(acceptance_log, 6, ok, "; ".join(parts), elapsed, 120.0)


def test_c07_poisson_limit(acceptance_log, tmp_root):
    result, files, elapsed = _mc(7, tmp_root)
    _MC_RESULTS[7] = files
    rep = poisson_check(result.cell(14), Uniform(0.0, 1.0))
    detail = f"TV = {rep['tv']:.4f} (tol 0.02, calibrated), M = {rep['reps']}"
    assert _record(acceptance_log, 7, rep["tv"] <= 0.02, detail, elapsed, 300.0)


def test_c08_exponential_growth(acceptance_log, tmp_root):
    result, files, elapsed = _mc(8, tmp_root)
    _MC_RESULTS[8] = files
    rep = growth_check(result.cell(20), Bernoulli(0.5))
    detail = f"mean (1/n)log|NE| = {rep['mean']:.4f} vs log 1.5 = {rep['target']:.4f} (tol 0.05)"
    assert _record(acceptance_log, 8, rep["within"], detail, elapsed, 300.0)


def test_c09_optimum_converges(acceptance_log, tmp_root):
    result, files, elapsed = _mc(9, tmp_root)
    _MC_RESULTS[9] = files
    so = result.cell(20).column("so")
    freq = float(np.mean(so == 1.0))
    assert _record(acceptance_log, 9, freq >= 0.99, f"P(SO = 1) = {freq:.3f} (need >= 0.99)", elapsed, 300.0)


def test_c10_typical_concentration(acceptance_log, tmp_root):
    result, files, elapsed = _mc(10, tmp_root)
    _MC_RESULTS[10] = files
    summary = result.summary()
    fracs = [c["typical_fraction"]["0.1"]["mean"] for c in summary["cells"]]
    nondecreasing = all(b >= a for a, b in zip(fracs, fracs[1:]))
    ok = nondecreasing and fracs[-1] >= 0.9
    detail = "fraction at n=12,16,20: " + ", ".join(f"{f:.4f}" for f in fracs) + " (need nondecreasing and >= 0.9 at n=20)"
    assert _record(acceptance_log, 10, ok, detail, elapsed, 600.0)


def test_c11_determinism_across_workers(acceptance_log, tmp_root):
    t0 = time.perf_counter()
    differing = []
    for k in MC_CELLS:
        first = _MC_RESULTS.get(k) or _mc(k, tmp_root, workers=1)[1]
        second = _mc(k, tmp_root, workers=3)[1]
        differing += [f"c{k}/{name}" for name in first if first[name] != second[name]]
    elapsed = time.perf_counter() - t0
    detail = "results.csv and summary.json byte-identical for criteria 6-10 (workers 1 vs 3)"
    if differing:
        detail = "differs: " + ", ".join(differing)
    assert _record(acceptance_log, 11, not differing, detail, elapsed, math.inf)

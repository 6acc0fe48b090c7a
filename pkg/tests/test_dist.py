import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import empirical_conditioned_cdf, pair_conditioned_masses, strict_greater_probability
from rgl.dist import (
    Bernoulli,
    DistributionError,
    FiniteDiscrete,
    Gaussian,
    Mixed,
    Uniform,
    alpha_beta,
    cdf,
    cdf_left,
    condition_on_max,
    dist_from_json,
    mean,
    mgf,
    parse_dist,
    sample,
)

THIRDS = FiniteDiscrete((0.0, 1.0, 2.0), (1 / 3, 1 / 3, 1 / 3))

KINDS = [
    Bernoulli(0.3),
    Bernoulli(0.5),
    THIRDS,
    FiniteDiscrete((0.0, 0.5, 1.0), (0.25, 0.5, 0.25)),
    Uniform(0.0, 1.0),
    Uniform(-1.0, 3.0),
    Gaussian(0.0, 1.0),
    Mixed(Uniform(0.0, 1.0), 0.5, ((0.0, 0.25), (1.0, 0.25))),
    Mixed(Gaussian(0.5, 0.2), 0.6, ((0.5, 0.4),)),
]


def test_cdf_examples():
    assert cdf(Bernoulli(0.3), 0.5) == pytest.approx(0.7, abs=1e-15)
    assert cdf(Uniform(0, 1), 0.25) == 0.25
    assert cdf_left(THIRDS, 1.0) == pytest.approx(1 / 3, abs=1e-15)
    assert cdf(THIRDS, 1.0) == pytest.approx(2 / 3, abs=1e-15)


@pytest.mark.parametrize("d", KINDS, ids=str)
def test_cdf_shape(d):
    ys = np.linspace(d.lower - 1 if math.isfinite(d.lower) else -8, d.upper + 1 if math.isfinite(d.upper) else 8, 401)
    vals = [cdf(d, y) for y in ys]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(0.0, abs=1e-12) and vals[-1] == pytest.approx(1.0, abs=1e-12)
    for y in ys:
        assert cdf_left(d, y) <= cdf(d, y) + 1e-15


def test_alpha_beta_examples():
    assert alpha_beta(Bernoulli(0.5)) == (0.5, 0.25)
    assert alpha_beta(Uniform(0, 1)) == (0.0, 0.5)
    assert alpha_beta(Gaussian(0, 1)) == (0.0, 0.5)
    assert THIRDS.alpha == pytest.approx(1 / 3, abs=1e-15)


@pytest.mark.parametrize("d", KINDS, ids=str)
def test_alpha_plus_two_beta(d):
    a, b = alpha_beta(d)
    assert a + 2 * b == 1.0
    assert 0 <= a <= 1 and 0 <= b <= 0.5


@pytest.mark.parametrize(
    "values,masses",
    [((0, 1, 2), (Fraction(1, 3),) * 3), ((0, 0.5, 1), (0.25, 0.5, 0.25)), ((-1, 2, 3, 7), (0.1, 0.2, 0.3, 0.4))],
)
def test_beta_equals_strict_win_probability(values, masses):
    d = FiniteDiscrete(tuple(map(float, values)), tuple(map(float, masses)))
    assert d.beta == pytest.approx(float(strict_greater_probability(values, masses)), abs=1e-15)


def test_mgf_examples():
    for d in KINDS:
        assert mgf(d, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert mgf(Bernoulli(0.5), math.log(2)) == pytest.approx(1.5, rel=1e-15)
    assert mgf(Uniform(0, 1), 1.0) == pytest.approx(math.e - 1, rel=1e-14)
    assert mgf(Gaussian(0.3, 2.0), 0.7) == pytest.approx(math.exp(0.3 * 0.7 + 2.0 * 0.49), rel=1e-14)
    with pytest.raises(ValueError):
        mgf(Uniform(0, 1), math.inf)


@given(t=st.floats(-30, 30), a=st.floats(-5, 5), w=st.floats(0.01, 5))
def test_uniform_mgf_closed_form(t, a, w):
    b = a + w
    d = Uniform(a, b)
    expected = 1.0 if abs(t * w) < 1e-12 else math.expm1(t * w) / (t * w) * math.exp(t * a)
    assert mgf(d, t) == pytest.approx(expected, rel=1e-11)


def test_mgf_near_zero_is_smooth():
    d = Uniform(0.0, 1.0)
    vals = [mgf(d, t) for t in (-1e-9, -1e-13, 0.0, 1e-13, 1e-9)]
    assert all(abs(v - 1.0) < 1e-8 for v in vals)


@pytest.mark.parametrize("d", KINDS, ids=str)
@pytest.mark.parametrize("t", [-3, -2, -1, 0, 1, 2, 3])
def test_conditioned_mgf_at_most_twice(d, t):
    assert mgf(condition_on_max(d), t) <= 2 * mgf(d, t) * (1 + 1e-12)


def test_condition_bernoulli_half():
    c = condition_on_max(Bernoulli(0.5)).to_payoff()
    assert isinstance(c, Bernoulli)
    assert c.p == pytest.approx(2 / 3, abs=1e-15)


@given(p=st.floats(0.001, 0.999))
def test_condition_bernoulli_closed_form(p):
    c = condition_on_max(Bernoulli(p)).to_payoff()
    assert c.p == pytest.approx(p / (1 - p + p * p), abs=1e-14)


def test_condition_discrete_thirds():
    c = condition_on_max(THIRDS)
    exact = pair_conditioned_masses((0, 1, 2), (Fraction(1, 3),) * 3)
    assert exact == {0: Fraction(1, 6), 1: Fraction(1, 3), 2: Fraction(1, 2)}
    for v, m in c.atoms:
        assert m == pytest.approx(float(exact[v]), abs=1e-15)


@given(
    masses=st.lists(st.integers(1, 20), min_size=1, max_size=6),
)
def test_condition_discrete_matches_pair_enumeration(masses):
    total = sum(masses)
    fr = [Fraction(m, total) for m in masses]
    values = tuple(float(v) for v in range(len(masses)))
    d = FiniteDiscrete(values, tuple(float(f) for f in fr))
    exact = pair_conditioned_masses(values, fr)
    for v, m in condition_on_max(d).atoms:
        assert m == pytest.approx(float(exact[v]), abs=1e-12)


@pytest.mark.parametrize("d", [Uniform(0, 1), Uniform(-2, 5), Gaussian(0, 1), Gaussian(1, 0.3)], ids=str)
def test_atomless_conditioned_cdf_is_square(d):
    c = condition_on_max(d)
    for y in np.linspace(-4, 6, 201):
        assert cdf(c, y) == pytest.approx(cdf(d, y) ** 2, abs=1e-12)


@pytest.mark.parametrize("d", KINDS, ids=str)
def test_conditioned_cdf_matches_simulated_pairs(d):
    c = condition_on_max(d)
    lo = d.lower if math.isfinite(d.lower) else -3.0
    hi = d.upper if math.isfinite(d.upper) else 3.0
    ys = np.linspace(lo, hi, 41)
    emp, kept = empirical_conditioned_cdf(d, ys, 10**6, seed=11)
    for y, e in zip(ys, emp):
        f = cdf(c, y)
        band = 3 * math.sqrt(max(f * (1 - f), 1e-12) / kept) + 1e-9
        assert abs(f - e) <= band, (y, f, e)


@pytest.mark.parametrize("d", KINDS, ids=str)
def test_conditioned_cdf_shape(d):
    c = condition_on_max(d)
    ys = np.linspace(-12, 12, 481)
    vals = [cdf(c, y) for y in ys]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(0.0, abs=1e-9) and vals[-1] == pytest.approx(1.0, abs=1e-9)


def test_mean_examples():
    assert mean(condition_on_max(Bernoulli(0.5))) == pytest.approx(2 / 3, abs=1e-15)
    assert mean(condition_on_max(Uniform(0, 1))) == pytest.approx(2 / 3, abs=1e-10)
    assert mean(Bernoulli(0.3)) == 0.3


@pytest.mark.parametrize("d", KINDS, ids=str)
def test_quadrature_mean_matches_closed_form(d):
    c = condition_on_max(d)
    assert mean(c) == pytest.approx(c.exact_mean, abs=1e-9)
    assert mean(d) == pytest.approx(d.exact_mean, abs=1e-9)


def test_gaussian_conditioned_mean():
    # E max of two standard normals is 1/sqrt(pi)
    assert mean(condition_on_max(Gaussian(0, 1))) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-10)


def test_sample_degenerate_and_mean():
    rng = np.random.Generator(np.random.SFC64(3))
    assert np.all(sample(Bernoulli(1.0), rng, 1000) == 1.0)
    assert np.all(sample(Bernoulli(0.0), rng, 1000) == 0.0)
    draws = sample(Bernoulli(0.5), rng, 10**6)
    assert abs(draws.mean() - 0.5) < 0.002


@pytest.mark.parametrize("d", KINDS, ids=str)
def test_discrete_samples_are_exact_atoms(d):
    rng = np.random.Generator(np.random.SFC64(5))
    x = np.asarray(sample(d, rng, 20_000))
    atoms = {v for v, _ in d.atoms}
    if d.is_discrete:
        assert set(np.unique(x)) <= atoms
    for v, m in d.atoms:
        freq = np.mean(x == v)
        assert abs(freq - m) < 4 * math.sqrt(m * (1 - m) / x.size) + 1e-12


def test_sample_deterministic():
    for d in KINDS:
        a = sample(d, np.random.Generator(np.random.SFC64(9)), 100)
        b = sample(d, np.random.Generator(np.random.SFC64(9)), 100)
        assert np.array_equal(a, b)


@pytest.mark.parametrize(
    "text",
    [
        "bernoulli:p=0.5",
        "uniform:a=0,b=1",
        "gaussian:mu=0,sigma=1",
        "discrete:values=0,1,2;masses=0.3,0.3,0.4",
        "mixed:cont=uniform(0,1);w=0.5;atoms=0:0.25,1:0.25",
        "mixed:cont=gaussian(0,2);w=0.9;atoms=1:0.1",
    ],
)
def test_parse_round_trip(text):
    d = parse_dist(text)
    assert parse_dist(d.spec()) == d
    assert dist_from_json(d.to_json()) == d


@pytest.mark.parametrize(
    "text",
    [
        "bernoulli:p=1.5",
        "uniform:a=1,b=0",
        "gaussian:mu=0,sigma=0",
        "discrete:values=0,1;masses=0.5,0.4",
        "discrete:values=1,0;masses=0.5,0.5",
        "discrete:values=0,1;masses=1,0",
        "mixed:cont=uniform(0,1);w=0.5;atoms=0:0.25",
        "exponential:rate=1",
        "cauchy:x0=0,gamma=1",
        "nonsense",
        "bernoulli:q=0.5",
    ],
)
def test_parse_rejects(text):
    with pytest.raises(DistributionError):
        parse_dist(text)


@settings(max_examples=50)
@given(p=st.floats(0, 1))
def test_bernoulli_alpha(p):
    a, b = alpha_beta(Bernoulli(p))
    assert a == pytest.approx(p * p + (1 - p) ** 2, abs=1e-15)

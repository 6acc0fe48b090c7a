"""Payoff distributions and the law of a payoff conditioned on beating an independent copy.

Every law is stored as a finite mixture of elementary components (point
masses, uniform and Gaussian pieces, and the "max of two" / truncated
variants that appear after conditioning).  Cumulative distribution,
moment generating function and tilted means are evaluated component-wise,
in log space where overflow is possible.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr, ndtr

__all__ = [
    "PayoffDistribution",
    "Bernoulli",
    "FiniteDiscrete",
    "Uniform",
    "Gaussian",
    "Mixed",
    "ConditionedDistribution",
    "DistributionError",
    "QuadratureError",
    "cdf",
    "cdf_left",
    "alpha_beta",
    "mgf",
    "condition_on_max",
    "mean",
    "sample",
    "parse_dist",
    "dist_from_json",
]

MASS_TOL = 1e-12
QUAD_ABS_TOL = 1e-10
QUAD_LIMIT = 10_000

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class DistributionError(ValueError):
    """Invalid distribution parameters or unparseable distribution spec."""


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, error_bound: float):
        super().__init__(f"{message} (achieved error bound {error_bound:.3g})")
        self.error_bound = error_bound


# ---------------------------------------------------------------------------
# elementary components
# ---------------------------------------------------------------------------


def _log_exp_moment(k: int, s: float) -> float:
    """log of int_0^1 v**k exp(s v) dv for k in {0, 1, 2}."""
    if abs(s) <= 1.0:
        total, term = 0.0, 1.0
        for j in range(32):
            total += term / (k + j + 1)
            term *= s / (j + 1)
        return math.log(total)
    if s > 1.0:
        # factor out exp(s)
        e = math.exp(-s)
        if k == 0:
            val = -math.expm1(-s) / s
        elif k == 1:
            val = (s - 1.0 + e) / (s * s)
        else:
            val = (s * s - 2.0 * s + 2.0 - 2.0 * e) / (s * s * s)
        return s + math.log(val)
    e = math.exp(s)
    if k == 0:
        val = -math.expm1(s) / -s
    elif k == 1:
        val = (1.0 + e * (s - 1.0)) / (s * s)
    else:
        val = (e * (s * s - 2.0 * s + 2.0) - 2.0) / (s * s * s)
    return math.log(val)


def _mills(z: float) -> float:
    """phi(z) / (1 - Phi(z)), stable for large z."""
    return math.exp(-0.5 * z * z - _LOG_SQRT_2PI - float(log_ndtr(-z)))


class _Component(ABC):
    lo: float
    hi: float

    @abstractmethod
    def cdf(self, x: float) -> float: ...

    def cdf_left(self, x: float) -> float:
        return self.cdf(x)

    @abstractmethod
    def log_mgf(self, t: float) -> float: ...

    @abstractmethod
    def tilted_mean(self, t: float) -> float: ...

    @property
    @abstractmethod
    def mean(self) -> float: ...

    pdf = None


@dataclass(frozen=True)
class _Atom(_Component):
    value: float

    @property
    def lo(self):
        return self.value

    @property
    def hi(self):
        return self.value

    def cdf(self, x):
        return 1.0 if x >= self.value else 0.0

    def cdf_left(self, x):
        return 1.0 if x > self.value else 0.0

    def log_mgf(self, t):
        return t * self.value

    def tilted_mean(self, t):
        return self.value

    @property
    def mean(self):
        return self.value


@dataclass(frozen=True)
class _UniformPart(_Component):
    lo: float
    hi: float

    def cdf(self, x):
        return min(1.0, max(0.0, (x - self.lo) / (self.hi - self.lo)))

    def pdf(self, x):
        return 1.0 / (self.hi - self.lo) if self.lo <= x <= self.hi else 0.0

    def log_mgf(self, t):
        w = self.hi - self.lo
        return t * self.lo + _log_exp_moment(0, t * w)

    def tilted_mean(self, t):
        w = self.hi - self.lo
        s = t * w
        return self.lo + w * math.exp(_log_exp_moment(1, s) - _log_exp_moment(0, s))

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class _RampPart(_Component):
    """Maximum of two independent Uniform(lo, hi): density 2(y-lo)/w^2."""

    lo: float
    hi: float

    def cdf(self, x):
        return min(1.0, max(0.0, (x - self.lo) / (self.hi - self.lo))) ** 2

    def pdf(self, x):
        w = self.hi - self.lo
        return 2.0 * (x - self.lo) / (w * w) if self.lo <= x <= self.hi else 0.0

    def log_mgf(self, t):
        w = self.hi - self.lo
        return t * self.lo + math.log(2.0) + _log_exp_moment(1, t * w)

    def tilted_mean(self, t):
        w = self.hi - self.lo
        s = t * w
        return self.lo + w * math.exp(_log_exp_moment(2, s) - _log_exp_moment(1, s))

    @property
    def mean(self):
        return self.lo + 2.0 * (self.hi - self.lo) / 3.0


@dataclass(frozen=True)
class _GaussPart(_Component):
    """Gaussian, optionally left-truncated at ``lower``."""

    mu: float
    sigma: float
    lower: float = -math.inf

    @property
    def lo(self):
        return self.lower

    @property
    def hi(self):
        return math.inf

    @property
    def _z0(self):
        return (self.lower - self.mu) / self.sigma

    def cdf(self, x):
        if x < self.lower:
            return 0.0
        z = (x - self.mu) / self.sigma
        if self.lower == -math.inf:
            return float(ndtr(z))
        return -math.expm1(float(log_ndtr(-z) - log_ndtr(-self._z0)))

    def pdf(self, x):
        if x < self.lower:
            return 0.0
        z = (x - self.mu) / self.sigma
        logz = 0.0 if self.lower == -math.inf else float(log_ndtr(-self._z0))
        return math.exp(-0.5 * z * z - _LOG_SQRT_2PI - logz) / self.sigma

    def log_mgf(self, t):
        base = self.mu * t + 0.5 * self.sigma**2 * t * t
        if self.lower == -math.inf:
            return base
        z0 = self._z0
        return base + float(log_ndtr(self.sigma * t - z0) - log_ndtr(-z0))

    def tilted_mean(self, t):
        m = self.mu + self.sigma**2 * t
        if self.lower == -math.inf:
            return m
        return m + self.sigma * _mills(self._z0 - self.sigma * t)

    @property
    def mean(self):
        if self.lower == -math.inf:
            return self.mu
        return self.mu + self.sigma * _mills(self._z0)


@dataclass(frozen=True)
class _GaussMax2Part(_Component):
    """Maximum of two independent N(mu, sigma^2): density 2 phi Phi."""

    mu: float
    sigma: float
    lo = -math.inf
    hi = math.inf

    def cdf(self, x):
        return float(ndtr((x - self.mu) / self.sigma)) ** 2

    def pdf(self, x):
        z = (x - self.mu) / self.sigma
        return 2.0 * math.exp(-0.5 * z * z - _LOG_SQRT_2PI) * float(ndtr(z)) / self.sigma

    def log_mgf(self, t):
        a = self.sigma * t / math.sqrt(2.0)
        return math.log(2.0) + self.mu * t + 0.5 * self.sigma**2 * t * t + float(log_ndtr(a))

    def tilted_mean(self, t):
        a = self.sigma * t / math.sqrt(2.0)
        ratio = math.exp(-0.5 * a * a - _LOG_SQRT_2PI - float(log_ndtr(a)))
        return self.mu + self.sigma**2 * t + self.sigma / math.sqrt(2.0) * ratio

    @property
    def mean(self):
        return self.mu + self.sigma / math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# mixtures
# ---------------------------------------------------------------------------


class _Law:
    """Shared evaluation over ``self.components``: a tuple of (weight, component)."""

    components: tuple

    @property
    def atoms(self) -> list[tuple[float, float]]:
        """Atoms as (value, mass), ascending, masses of coinciding atoms merged."""
        acc: dict[float, float] = {}
        for w, c in self.components:
            if isinstance(c, _Atom) and w > 0:
                acc[c.value] = acc.get(c.value, 0.0) + w
        return sorted(acc.items())

    @property
    def lower(self) -> float:
        return min(c.lo for w, c in self.components if w > 0)

    @property
    def upper(self) -> float:
        return max(c.hi for w, c in self.components if w > 0)

    def atom_mass(self, x: float) -> float:
        return sum(m for v, m in self.atoms if v == x)

    @property
    def is_discrete(self) -> bool:
        return all(isinstance(c, _Atom) for w, c in self.components if w > 0)

    def cdf(self, x: float) -> float:
        return min(1.0, sum(w * c.cdf(x) for w, c in self.components))

    def cdf_left(self, x: float) -> float:
        return min(1.0, sum(w * c.cdf_left(x) for w, c in self.components))

    def _log_terms(self, t: float) -> list[float]:
        return [math.log(w) + c.log_mgf(t) for w, c in self.components if w > 0]

    def log_mgf(self, t: float) -> float:
        terms = self._log_terms(t)
        top = max(terms)
        return top + math.log(math.fsum(math.exp(v - top) for v in terms))

    def tilted_mean(self, t: float) -> float:
        """Derivative of the cumulant generating function at t."""
        terms = self._log_terms(t)
        top = max(terms)
        weights = [math.exp(v - top) for v in terms]
        means = [c.tilted_mean(t) for w, c in self.components if w > 0]
        return math.fsum(w * m for w, m in zip(weights, means)) / math.fsum(weights)

    @property
    def exact_mean(self) -> float:
        """Closed-form mean from the component means."""
        return math.fsum(w * c.mean for w, c in self.components)


class PayoffDistribution(_Law, ABC):
    """A payoff law with everywhere-finite moment generating function."""

    kind: str

    @property
    def alpha(self) -> float:
        return math.fsum(m * m for _, m in self.atoms)

    @property
    def beta(self) -> float:
        return (1.0 - self.alpha) / 2.0

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None): ...

    @abstractmethod
    def params(self) -> dict: ...

    @abstractmethod
    def spec(self) -> str:
        """Canonical textual spec, parseable by :func:`parse_dist`."""

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params()}

    def __str__(self):
        return self.spec()


def _check_prob(name: str, p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DistributionError(f"{name} must lie in [0, 1], got {p}")
    return p


def _check_finite(name: str, v: float) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise DistributionError(f"{name} must be finite, got {v}")
    return v


def _fmt(v: float) -> str:
    return repr(float(v)) if not float(v).is_integer() else str(int(v))


@dataclass(frozen=True)
class Bernoulli(PayoffDistribution):
    p: float
    kind = "bernoulli"

    def __post_init__(self):
        object.__setattr__(self, "p", _check_prob("p", self.p))

    @property
    def components(self):
        return tuple((m, _Atom(v)) for v, m in ((0.0, 1.0 - self.p), (1.0, self.p)) if m > 0)

    def sample(self, rng, size=None):
        u = rng.random(size)
        return (u < self.p).astype(float) if size is not None else float(u < self.p)

    def params(self):
        return {"p": self.p}

    def spec(self):
        return f"bernoulli:p={_fmt(self.p)}"


@dataclass(frozen=True)
class FiniteDiscrete(PayoffDistribution):
    values: tuple[float, ...]
    masses: tuple[float, ...]
    kind = "discrete"

    def __post_init__(self):
        values = tuple(_check_finite("value", v) for v in self.values)
        masses = tuple(_check_prob("mass", m) for m in self.masses)
        if not values or len(values) != len(masses):
            raise DistributionError("discrete: values and masses must be non-empty and of equal length")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DistributionError("discrete: values must be strictly increasing")
        if any(m <= 0 for m in masses):
            raise DistributionError("discrete: masses must be strictly positive")
        if abs(math.fsum(masses) - 1.0) > MASS_TOL:
            raise DistributionError(f"discrete: masses sum to {math.fsum(masses)!r}, not 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masses", masses)

    @property
    def components(self):
        return tuple((m, _Atom(v)) for v, m in zip(self.values, self.masses))

    def sample(self, rng, size=None):
        cum = np.cumsum(self.masses)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(size), side="right")
        out = np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]
        return out if size is not None else float(out)

    def params(self):
        return {"values": list(self.values), "masses": list(self.masses)}

    def spec(self):
        vs = ",".join(_fmt(v) for v in self.values)
        ms = ",".join(_fmt(m) for m in self.masses)
        return f"discrete:values={vs};masses={ms}"


@dataclass(frozen=True)
class Uniform(PayoffDistribution):
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self):
        a, b = _check_finite("a", self.a), _check_finite("b", self.b)
        if not a < b:
            raise DistributionError(f"uniform: need a < b, got a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def components(self):
        return ((1.0, _UniformPart(self.a, self.b)),)

    def sample(self, rng, size=None):
        u = rng.random(size)
        if size is None:
            return self.a + (self.b - self.a) * u
        u *= self.b - self.a
        u += self.a
        return u

    def params(self):
        return {"a": self.a, "b": self.b}

    def spec(self):
        return f"uniform:a={_fmt(self.a)},b={_fmt(self.b)}"


@dataclass(frozen=True)
class Gaussian(PayoffDistribution):
    mu: float
    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        mu, sigma = _check_finite("mu", self.mu), _check_finite("sigma", self.sigma)
        if sigma <= 0:
            raise DistributionError(f"gaussian: sigma must be positive, got {sigma}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def components(self):
        return ((1.0, _GaussPart(self.mu, self.sigma)),)

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size)

    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}

    def spec(self):
        return f"gaussian:mu={_fmt(self.mu)},sigma={_fmt(self.sigma)}"


@dataclass(frozen=True)
class Mixed(PayoffDistribution):
    """Continuous part (Uniform or Gaussian) with weight ``weight`` plus atoms."""

    continuous: Uniform | Gaussian
    weight: float
    atom_list: tuple[tuple[float, float], ...]
    kind = "mixed"

    def __post_init__(self):
        if not isinstance(self.continuous, (Uniform, Gaussian)):
            raise DistributionError("mixed: continuous part must be uniform or gaussian")
        w = _check_prob("w", self.weight)
        atoms = tuple((_check_finite("atom value", v), _check_prob("atom mass", m)) for v, m in self.atom_list)
        vals = [v for v, _ in atoms]
        if len(set(vals)) != len(vals):
            raise DistributionError("mixed: atom values must be distinct")
        if any(m <= 0 for _, m in atoms):
            raise DistributionError("mixed: atom masses must be strictly positive")
        total = math.fsum([w] + [m for _, m in atoms])
        if abs(total - 1.0) > MASS_TOL:
            raise DistributionError(f"mixed: continuous weight plus atom masses sum to {total!r}, not 1")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "atom_list", tuple(sorted(atoms)))

    @property
    def components(self):
        comps = []
        if self.weight > 0:
            comps.append((self.weight, self.continuous.components[0][1]))
        comps.extend((m, _Atom(v)) for v, m in self.atom_list)
        return tuple(comps)

    def sample(self, rng, size=None):
        shape = () if size is None else size
        pick = rng.random(shape)
        cont = np.asarray(self.continuous.sample(rng, shape), dtype=float)
        out = np.array(cont, dtype=float)
        edge = self.weight
        for v, m in self.atom_list:
            out = np.where((pick >= edge) & (pick < edge + m), v, out)
            edge += m
        # rounding slack at the top goes to the last atom
        if self.atom_list:
            out = np.where(pick >= edge, self.atom_list[-1][0], out)
        return out if size is not None else float(out)

    def params(self):
        return {
            "continuous": self.continuous.to_json(),
            "w": self.weight,
            "atoms": [[v, m] for v, m in self.atom_list],
        }

    def spec(self):
        c = self.continuous
        inner = f"uniform({_fmt(c.a)},{_fmt(c.b)})" if isinstance(c, Uniform) else f"gaussian({_fmt(c.mu)},{_fmt(c.sigma)})"
        atoms = ",".join(f"{_fmt(v)}:{_fmt(m)}" for v, m in self.atom_list)
        return f"mixed:cont={inner};w={_fmt(self.weight)};atoms={atoms}"


# ---------------------------------------------------------------------------
# conditioning on X >= X'
# ---------------------------------------------------------------------------


class ConditionedDistribution(_Law):
    """Law of X given X >= X' for X, X' i.i.d. from ``base``.

    Its measure is F(y) dF(y) / (1 - beta).  For an atomless base this is
    the law of the maximum of two draws, with CDF F(y)**2.
    """

    def __init__(self, base: PayoffDistribution):
        self.base = base
        self.components = tuple(_condition_components(base))

    def to_payoff(self) -> PayoffDistribution:
        """Equivalent payoff distribution, for purely discrete bases."""
        if not self.is_discrete:
            raise DistributionError("only discrete conditioned laws convert to a payoff distribution")
        atoms = self.atoms
        if [v for v, _ in atoms] in ([0.0, 1.0], [1.0], [0.0]):
            return Bernoulli(dict(atoms).get(1.0, 0.0))
        masses = [m for _, m in atoms]
        s = math.fsum(masses)
        return FiniteDiscrete(tuple(v for v, _ in atoms), tuple(m / s for m in masses))

    def __repr__(self):
        return f"ConditionedDistribution({self.base.spec()})"


def _condition_components(base: PayoffDistribution):
    norm = 1.0 - base.beta
    out = []
    for v, m in base.atoms:
        out.append((m * base.cdf(v) / norm, _Atom(v)))
    cont = [(w, c) for w, c in base.components if not isinstance(c, _Atom) and w > 0]
    for w, c in cont:
        out.append((w * w / (2.0 * norm), _max2_of(c)))
        for v, m in base.atoms:
            tail = 1.0 - c.cdf(v)
            if tail > 0:
                out.append((w * m * tail / norm, _truncate_below(c, v)))
    return [(w, c) for w, c in out if w > 0]


def _max2_of(c: _Component) -> _Component:
    if isinstance(c, _UniformPart):
        return _RampPart(c.lo, c.hi)
    return _GaussMax2Part(c.mu, c.sigma)


def _truncate_below(c: _Component, v: float) -> _Component:
    if isinstance(c, _UniformPart):
        return _UniformPart(max(c.lo, v), c.hi)
    return _GaussPart(c.mu, c.sigma, lower=v)


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def cdf(d: _Law, x: float) -> float:
    """F(x), right-continuous."""
    return d.cdf(x)


def cdf_left(d: _Law, x: float) -> float:
    """Left limit F(x-)."""
    return d.cdf_left(x)


def alpha_beta(d: PayoffDistribution) -> tuple[float, float]:
    """Tie probability alpha = P(X = X') and beta = P(X > X') = (1 - alpha) / 2."""
    return d.alpha, d.beta


def mgf(d: _Law, t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"mgf argument must be finite, got {t}")
    return math.exp(d.log_mgf(t))


def condition_on_max(d: PayoffDistribution) -> ConditionedDistribution:
    return ConditionedDistribution(d)


def mean(d: _Law) -> float:
    """Mean; atoms summed exactly, continuous parts by adaptive quadrature."""
    parts = []
    for w, c in d.components:
        if isinstance(c, _Atom):
            parts.append(w * c.value)
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            res = integrate.quad(
                lambda y: y * c.pdf(y), c.lo, c.hi, epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=QUAD_LIMIT, full_output=1
            )
        val, err = res[0], res[1]
        if len(res) > 3 or err > QUAD_ABS_TOL:
            raise QuadratureError(f"mean quadrature did not converge for {c!r}", err)
        parts.append(w * val)
    return math.fsum(parts)


def sample(d: PayoffDistribution, rng: np.random.Generator, size=None):
    """Draws from ``d``; discrete atoms come out as their exact stored values."""
    return d.sample(rng, size)


# ---------------------------------------------------------------------------
# textual and JSON forms
# ---------------------------------------------------------------------------

_HEAVY = {"exponential", "cauchy", "lognormal", "pareto", "student", "t", "laplace"}


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise DistributionError(f"cannot parse {what} list {text!r}") from None


def _kv(body: str, sep: str) -> dict[str, str]:
    out = {}
    for part in body.split(sep):
        if not part.strip():
            continue
        if "=" not in part:
            raise DistributionError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _need(kv: dict, keys: Sequence[str], kind: str) -> list[float]:
    extra = set(kv) - set(keys)
    missing = [k for k in keys if k not in kv]
    if extra or missing:
        raise DistributionError(f"{kind}: expected parameters {','.join(keys)}, got {','.join(kv) or 'none'}")
    try:
        return [float(kv[k]) for k in keys]
    except ValueError:
        raise DistributionError(f"{kind}: non-numeric parameter in {kv}") from None


def _parse_continuous(text: str) -> Uniform | Gaussian:
    m = re.fullmatch(r"\s*(uniform|gaussian)\(([^,]+),([^)]+)\)\s*", text)
    if not m:
        raise DistributionError(f"mixed: continuous part must be uniform(a,b) or gaussian(mu,sigma), got {text!r}")
    try:
        x, y = float(m.group(2)), float(m.group(3))
    except ValueError:
        raise DistributionError(f"mixed: non-numeric parameter in {text!r}") from None
    return Uniform(x, y) if m.group(1) == "uniform" else Gaussian(x, y)


def parse_dist(text: str) -> PayoffDistribution:
    """Parse ``kind:params`` specs such as ``bernoulli:p=0.5`` or
    ``mixed:cont=uniform(0,1);w=0.5;atoms=0:0.25,1:0.25``."""
    if ":" not in text:
        raise DistributionError(f"distribution spec {text!r} must look like kind:params")
    kind, body = text.split(":", 1)
    kind = kind.strip().lower()
    if kind == "bernoulli":
        (p,) = _need(_kv(body, ","), ["p"], kind)
        return Bernoulli(p)
    if kind == "uniform":
        a, b = _need(_kv(body, ","), ["a", "b"], kind)
        return Uniform(a, b)
    if kind in ("gaussian", "normal"):
        mu, sigma = _need(_kv(body, ","), ["mu", "sigma"], kind)
        return Gaussian(mu, sigma)
    if kind == "discrete":
        kv = _kv(body, ";")
        if set(kv) != {"values", "masses"}:
            raise DistributionError("discrete: expected values=...;masses=...")
        return FiniteDiscrete(tuple(_floats(kv["values"], "values")), tuple(_floats(kv["masses"], "masses")))
    if kind == "mixed":
        kv = _kv(body, ";")
        if not {"cont", "w"} <= set(kv) or set(kv) - {"cont", "w", "atoms"}:
            raise DistributionError("mixed: expected cont=...;w=...;atoms=v:m,...")
        atoms = []
        for item in kv.get("atoms", "").split(","):
            if not item.strip():
                continue
            if ":" not in item:
                raise DistributionError(f"mixed: atom {item!r} must be value:mass")
            v, m = item.split(":", 1)
            try:
                atoms.append((float(v), float(m)))
            except ValueError:
                raise DistributionError(f"mixed: non-numeric atom {item!r}") from None
        try:
            w = float(kv["w"])
        except ValueError:
            raise DistributionError(f"mixed: non-numeric weight {kv['w']!r}") from None
        return Mixed(_parse_continuous(kv["cont"]), w, tuple(atoms))
    if kind in _HEAVY:
        raise DistributionError(f"{kind}: moment generating function is not finite everywhere; not admitted")
    raise DistributionError(f"unknown distribution kind {kind!r}")


def dist_from_json(obj: dict | str) -> PayoffDistribution:
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "bernoulli":
        return Bernoulli(obj["p"])
    if kind == "uniform":
        return Uniform(obj["a"], obj["b"])
    if kind == "gaussian":
        return Gaussian(obj["mu"], obj["sigma"])
    if kind == "discrete":
        return FiniteDiscrete(tuple(obj["values"]), tuple(obj["masses"]))
    if kind == "mixed":
        cont = dist_from_json(obj["continuous"])
        return Mixed(cont, obj["w"], tuple((v, m) for v, m in obj["atoms"]))
    raise DistributionError(f"unknown distribution kind {kind!r}")

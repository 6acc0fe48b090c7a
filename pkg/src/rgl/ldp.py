"""Cramér rate functions by numerical Legendre transform, and the level-crossing
thresholds for the optimum and the best/worst equilibrium.

The rate of a law with cumulant generating function psi is

    I(x) = sup_t [x t - psi(t)],

evaluated by solving psi'(t) = x (psi' is the tilted mean, strictly
increasing for a non-degenerate law) and returning x t - psi(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .dist import ConditionedDistribution, PayoffDistribution, condition_on_max, mean

__all__ = [
    "RateFunction",
    "RateOverflowError",
    "BracketError",
    "rate",
    "entropy",
    "solve_x_opt",
    "solve_x_beq",
    "solve_x_weq",
    "bernoulli_limits",
    "BernoulliLimits",
    "Theory",
    "theory",
]

T_MAX = 700.0
TILT_TOL = 1e-12
LEVEL_TOL = 1e-12
# A boundary rate within this of the level counts as "never exceeds it";
# absorbs one-ulp disagreements such as -log(fl(2/3)) vs log(1.5).
EDGE_SLACK = 1e-12
LOG2 = math.log(2.0)


class RateOverflowError(ArithmeticError):
    """No tilt with |t| <= 700 reaches the requested mean."""


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class RateFunction:
    source: PayoffDistribution | ConditionedDistribution
    lower: float
    upper: float
    mean_value: float
    lower_mass: float
    upper_mass: float

    @classmethod
    def of(cls, source) -> "RateFunction":
        lo, hi = source.lower, source.upper
        return cls(
            source=source,
            lower=lo,
            upper=hi,
            mean_value=source.tilted_mean(0.0),
            lower_mass=source.atom_mass(lo) if math.isfinite(lo) else 0.0,
            upper_mass=source.atom_mass(hi) if math.isfinite(hi) else 0.0,
        )

    def __call__(self, x: float) -> float:
        return rate(self, x)

    def tilt(self, x: float) -> float:
        """The t solving psi'(t) = x, for x strictly inside the support hull."""
        d = self.source
        g = lambda t: d.tilted_mean(t) - x
        sign = 1.0 if x > self.mean_value else -1.0
        near, far = 0.0, sign
        while sign * g(far) < 0:
            near, far = far, 2.0 * far
            if abs(far) > T_MAX:
                if sign * g(sign * T_MAX) < 0:
                    raise RateOverflowError(f"no tilt with |t| <= {T_MAX:g} reaches mean {x!r}")
                far = sign * T_MAX
                break
        lo, hi = sorted((near, far))
        t = brentq(g, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=500)
        if abs(g(t)) > TILT_TOL:
            # brentq stops on bracket width; finish with bisection on the residual
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if g(mid) < 0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 4e-16 * max(1.0, abs(mid)):
                    break
            t = 0.5 * (lo + hi)
        return t


def rate(r: RateFunction, x: float) -> float:
    x = float(x)
    if math.isnan(x):
        raise ValueError("rate at NaN")
    if x < r.lower or x > r.upper:
        return math.inf
    if x == r.mean_value:
        return 0.0
    if x == r.upper:
        return -math.log(r.upper_mass) if r.upper_mass > 0 else math.inf
    if x == r.lower:
        return -math.log(r.lower_mass) if r.lower_mass > 0 else math.inf
    t = r.tilt(x)
    return max(0.0, x * t - r.source.log_mgf(t))


def entropy(q: float, x: float) -> float:
    """Relative entropy H_q(x) of Bernoulli(x) w.r.t. Bernoulli(q); 0 log 0 = 0."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"entropy: q must lie in (0, 1), got {q}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy: x must lie in [0, 1], got {x}")
    h = 0.0
    if x > 0:
        h += x * math.log(x / q)
    if x < 1:
        h += (1.0 - x) * math.log((1.0 - x) / (1.0 - q))
    return max(0.0, h)


def _safe(f, x):
    try:
        return f(x)
    except RateOverflowError:
        # only reached next to a continuous support edge, where the rate is large
        return math.inf


def _bisect_level(f, level, inside, outside):
    """Point where f crosses ``level`` between ``inside`` (f < level) and ``outside`` (f > level)."""
    for _ in range(400):
        mid = 0.5 * (inside + outside)
        if mid in (inside, outside):
            break
        if _safe(f, mid) > level:
            outside = mid
        else:
            inside = mid
        if abs(outside - inside) <= LEVEL_TOL:
            break
    return 0.5 * (inside + outside)


def _crossing(f, level, start, edge, step):
    """Level crossing of f moving from ``start`` (the zero of f) towards ``edge``.

    Returns ``edge`` when f never exceeds ``level`` there.  ``step`` (+1/-1)
    gives the direction; an infinite edge is bracketed by doubling.
    """
    if math.isfinite(edge):
        if _safe(f, edge) <= level + EDGE_SLACK:
            return edge
        return _bisect_level(f, level, start, edge)
    width = 1.0
    for _ in range(2000):
        probe = start + step * width
        if _safe(f, probe) > level:
            return _bisect_level(f, level, start, probe)
        width *= 2.0
    raise BracketError(f"rate never exceeds level {level!r} towards {edge!r}")


def solve_x_opt(d: PayoffDistribution) -> float:
    """Limit of the optimal average social utility: crossing of I at log 2 above the mean."""
    r = RateFunction.of(d)
    return _crossing(r, LOG2, r.mean_value, r.upper, +1.0)


def _eq_rate(d: PayoffDistribution):
    return RateFunction.of(condition_on_max(d)), math.log1p(d.alpha)


def solve_x_beq(d: PayoffDistribution) -> float:
    """Limit of the best equilibrium's utility (x_typ when the law has no atoms)."""
    r, level = _eq_rate(d)
    if d.alpha == 0:
        return r.mean_value
    return _crossing(r, level, r.mean_value, r.upper, +1.0)


def solve_x_weq(d: PayoffDistribution) -> float:
    """Limit of the worst equilibrium's utility: lower crossing of the conditioned rate at log(1+alpha)."""
    r, level = _eq_rate(d)
    if d.alpha == 0:
        return r.mean_value
    return _crossing(r, level, r.mean_value, r.lower, -1.0)


@dataclass(frozen=True)
class BernoulliLimits:
    p: float
    alpha: float
    p_tilde: float
    x_typ: float
    x_opt: float
    x_beq: float
    x_weq: float


def _entropy_crossing(q, level, edge):
    f = lambda x: entropy(q, x)
    return _crossing(f, level, q, edge, 1.0 if edge > q else -1.0)


def bernoulli_limits(p: float) -> BernoulliLimits:
    """Closed-form Bernoulli thresholds from entropy level crossings."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"bernoulli_limits: p must lie in (0, 1), got {p}")
    alpha = p * p + (1.0 - p) ** 2
    pt = p / (1.0 - p + p * p)
    level = math.log1p(alpha)
    return BernoulliLimits(
        p=p,
        alpha=alpha,
        p_tilde=pt,
        x_typ=pt,
        x_opt=_entropy_crossing(p, LOG2, 1.0),
        x_beq=_entropy_crossing(pt, level, 1.0),
        x_weq=_entropy_crossing(pt, level, 0.0),
    )


@dataclass(frozen=True)
class Theory:
    dist: str
    alpha: float
    beta: float
    x_typ: float
    x_opt: float
    x_beq: float
    x_weq: float
    regime: str

    @property
    def degenerate(self) -> bool:
        return self.regime == "atomless"

    @property
    def poa(self) -> float:
        """x_opt / x_weq; infinite unless x_weq > 0."""
        return self.x_opt / self.x_weq if self.x_weq > 0 else math.inf

    @property
    def pos(self) -> float:
        return self.x_opt / self.x_beq if self.x_beq > 0 else math.inf


def theory(d: PayoffDistribution) -> Theory:
    x_typ = mean(condition_on_max(d))
    atoms = d.alpha > 0
    return Theory(
        dist=d.spec(),
        alpha=d.alpha,
        beta=d.beta,
        x_typ=x_typ,
        x_opt=solve_x_opt(d),
        x_beq=solve_x_beq(d) if atoms else x_typ,
        x_weq=solve_x_weq(d) if atoms else x_typ,
        regime="atoms" if atoms else "atomless",
    )

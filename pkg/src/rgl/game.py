"""Random n-player binary-action games, pure Nash equilibria and utility counters.

Profiles are n-bit integers; bit i is player i's strategy, so player i's
unilateral deviation from s is ``s ^ (1 << i)``.  Payoff tables are laid
out player-major, profile-minor.

Bernoulli games are stored bit-packed: ``bits[i]`` is a plane of 2**n bits
(uint64 words, little-endian bit order) holding u_i(s).  Equilibria and the
per-profile payoff sums are then computed word-parallel: the sum is kept as
bit-sliced counter planes, so no per-profile loop is ever executed.
"""

from __future__ import annotations

import csv
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from numba import njit

from .dist import Bernoulli, PayoffDistribution

__all__ = [
    "Game",
    "EquilibriumReport",
    "CapacityError",
    "generate",
    "is_pne",
    "enumerate_pne",
    "report",
    "memory_cap",
]

MAX_PLAYERS = 30
DEFAULT_MAX_N_FLOAT = 24
DEFAULT_MAX_N_PACKED = 28
PROFILE_CAP = 10**6
MEM_ENV = "RGL_MEM_CAP_BYTES"

_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)
# positions whose bit i is 0, for in-word neighbour swaps
_LOW_MASKS = [
    np.uint64(0x5555555555555555),
    np.uint64(0x3333333333333333),
    np.uint64(0x0F0F0F0F0F0F0F0F),
    np.uint64(0x00FF00FF00FF00FF),
    np.uint64(0x0000FFFF0000FFFF),
    np.uint64(0x00000000FFFFFFFF),
]

assert sys.byteorder == "little"


class CapacityError(MemoryError):
    """The payoff table would exceed the memory budget."""


def memory_cap(mem_cap_bytes: int | None = None) -> int | None:
    """Explicit byte budget: the argument, else $RGL_MEM_CAP_BYTES, else None (player caps apply)."""
    if mem_cap_bytes is not None:
        return int(mem_cap_bytes)
    env = os.environ.get(MEM_ENV)
    return int(env) if env else None


def check_capacity(n: int, packed: bool, mem_cap_bytes: int | None) -> None:
    if not 1 <= n <= MAX_PLAYERS:
        raise ValueError(f"player count must be in [1, {MAX_PLAYERS}], got {n}")
    need = n * (1 << n) // 8 if packed else n * (1 << n) * 8
    cap = memory_cap(mem_cap_bytes)
    if cap is None:
        limit = DEFAULT_MAX_N_PACKED if packed else DEFAULT_MAX_N_FLOAT
        if n > limit:
            raise CapacityError(
                f"n={n} exceeds the default cap n<={limit} for {'bit-packed' if packed else 'float'} payoffs "
                f"({need} bytes); raise the budget with --mem-cap or ${MEM_ENV}"
            )
    elif need > cap:
        raise CapacityError(f"payoff table needs {need} bytes, budget is {cap}; raise --mem-cap or ${MEM_ENV}")


@dataclass(eq=False)
class Game:
    n: int
    dist: PayoffDistribution
    seed: int
    values: np.ndarray | None = None  # float64, shape (n, 2**n)
    bits: np.ndarray | None = None  # uint64, shape (n, words)

    @property
    def packed(self) -> bool:
        return self.bits is not None

    @property
    def profiles(self) -> int:
        return 1 << self.n

    def payoff(self, i: int, s: int) -> float:
        if self.packed:
            return float((int(self.bits[i, s >> 6]) >> (s & 63)) & 1)
        return float(self.values[i, s])

    def table(self) -> np.ndarray:
        """Payoffs as a float array of shape (n, 2**n)."""
        if not self.packed:
            return self.values
        raw = np.unpackbits(self.bits.view(np.uint8), axis=1, bitorder="little")
        return raw[:, : self.profiles].astype(float)

    def to_csv(self, path) -> None:
        """Debug dump with header ``profile,player,payoff`` (n <= 12)."""
        if self.n > 12:
            raise ValueError("game dumps are limited to n <= 12")
        t = self.table()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["profile", "player", "payoff"])
            for s in range(self.profiles):
                for i in range(self.n):
                    w.writerow([s, i, repr(float(t[i, s]))])


def _bernoulli_planes(rng: np.random.Generator, p: float, n: int, words: int) -> np.ndarray:
    """Bit planes with P(bit = 1) = p exactly for the float p.

    Compares a uniform random binary fraction with the binary expansion of p,
    one random word per digit, least significant digit first.
    """
    if p <= 0.0:
        return np.zeros((n, words), dtype=np.uint64)
    if p >= 1.0:
        return np.full((n, words), _ALL, dtype=np.uint64)
    num, den = Fraction(p).as_integer_ratio()
    k = den.bit_length() - 1
    less = np.zeros((n, words), dtype=np.uint64)
    for j in range(k):  # digit k - j of p, counting from the binary point
        r = rng.bit_generator.random_raw(n * words).astype(np.uint64).reshape(n, words)
        if (num >> j) & 1:
            less |= r
        else:
            less &= r
    return less


def _valid_mask(n: int) -> np.uint64:
    return _ALL if n >= 6 else np.uint64((1 << (1 << n)) - 1)


def generate(n: int, d: PayoffDistribution, seed: int, mem_cap_bytes: int | None = None) -> Game:
    """Draw the n * 2**n i.i.d. payoffs of a game from a SFC64 stream seeded with ``seed``."""
    packed = isinstance(d, Bernoulli)
    check_capacity(n, packed, mem_cap_bytes)
    rng = np.random.Generator(np.random.SFC64(seed))
    if packed:
        words = max(1, (1 << n) >> 6)
        bits = _bernoulli_planes(rng, d.p, n, words)
        bits &= _valid_mask(n)
        return Game(n, d, seed, bits=bits)
    values = np.asarray(d.sample(rng, (n, 1 << n)), dtype=np.float64)
    return Game(n, d, seed, values=values)


# ---------------------------------------------------------------------------
# bit-packed path
# ---------------------------------------------------------------------------


def _neighbour_plane(words: np.ndarray, i: int) -> np.ndarray:
    """Plane whose bit s holds bit s ^ (1 << i) of ``words``."""
    if i < 6:
        sh = np.uint64(1 << i)
        m = _LOW_MASKS[i]
        return ((words & m) << sh) | ((words >> sh) & m)
    step = 1 << (i - 6)
    return np.ascontiguousarray(words.reshape(-1, 2, step)[:, ::-1, :]).reshape(-1)


def _packed_ne_plane(g: Game) -> np.ndarray:
    ne = np.full(g.bits.shape[1], _valid_mask(g.n), dtype=np.uint64)
    for i in range(g.n):
        u = g.bits[i]
        ne &= u | ~_neighbour_plane(u, i)
    return ne


def _packed_sum_planes(g: Game) -> list[np.ndarray]:
    """Bit-sliced counters: bit s of planes[j] is bit j of sum_i u_i(s)."""
    planes: list[np.ndarray] = []
    for i in range(g.n):
        carry = g.bits[i].copy()
        for j in range(len(planes)):
            planes[j], carry = planes[j] ^ carry, planes[j] & carry
            if not carry.any():
                break
        else:
            if carry.any():
                planes.append(carry)
    return planes


def _packed_histograms(g: Game, ne: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Counts of profiles / of equilibria whose payoff sum equals k, for k = 0..n."""
    planes = _packed_sum_planes(g)
    valid = _valid_mask(g.n)
    all_h = np.zeros(g.n + 1, dtype=np.int64)
    ne_h = np.zeros(g.n + 1, dtype=np.int64)
    for k in range(g.n + 1):
        if k >> len(planes):
            break
        eq = np.full(g.bits.shape[1], valid, dtype=np.uint64)
        for j, pl in enumerate(planes):
            eq &= pl if (k >> j) & 1 else ~pl
        all_h[k] = int(np.bitwise_count(eq).sum(dtype=np.int64))
        ne_h[k] = int(np.bitwise_count(eq & ne).sum(dtype=np.int64))
    return all_h, ne_h


def _plane_indices(plane: np.ndarray, n: int, cap: int | None = None) -> np.ndarray:
    flags = np.unpackbits(plane.view(np.uint8), bitorder="little")[: 1 << n]
    idx = np.flatnonzero(flags)
    return idx if cap is None else idx[:cap]


# ---------------------------------------------------------------------------
# float path
# ---------------------------------------------------------------------------


@njit(cache=True)
def _float_scan(u):  # pragma: no cover - compiled
    """Per-profile average utility (compensated sum) and equilibrium flags."""
    n, m = u.shape
    tot = np.zeros(m)
    comp = np.zeros(m)
    ne = np.ones(m, dtype=np.bool_)
    for i in range(n):
        row = u[i]
        for s in range(m):
            # branch-free TwoSum
            a = tot[s]
            v = row[s]
            t = a + v
            bp = t - a
            comp[s] += (a - (t - bp)) + (v - bp)
            tot[s] = t
        bit = 1 << i
        for start in range(0, m, 2 * bit):
            for j in range(start, start + bit):
                lo = row[j]
                hi = row[j + bit]
                ne[j] &= lo >= hi
                ne[j + bit] &= hi >= lo
    asu = np.empty(m)
    for s in range(m):
        asu[s] = (tot[s] + comp[s]) / n
    return asu, ne


def _float_scan_checked(g: Game):
    return _float_scan(np.ascontiguousarray(g.values, dtype=np.float64))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def is_pne(g: Game, s: int) -> bool:
    """Weak-inequality equilibrium test for a single profile."""
    if not 0 <= s < g.profiles:
        raise ValueError(f"profile {s} out of range for n={g.n}")
    return all(g.payoff(i, s) >= g.payoff(i, s ^ (1 << i)) for i in range(g.n))


def enumerate_pne(g: Game) -> list[int]:
    """All pure Nash equilibria, ascending by profile index."""
    if g.packed:
        return _plane_indices(_packed_ne_plane(g), g.n).tolist()
    _, ne = _float_scan_checked(g)
    return np.flatnonzero(ne).tolist()


@dataclass
class EquilibriumReport:
    n: int
    ne_count: int
    so: float
    beq: float | None
    weq: float | None
    asu_min: float | None
    asu_max: float | None
    asu_mean: float | None
    # (value or left bin edge, count); exact values for bit-packed games
    asu_histogram: list[tuple[float, int]]
    thresholds: tuple[float, ...] = ()
    epsilons: tuple[float, ...] = ()
    x_typ: float | None = None
    typ_count: tuple[int, ...] = ()
    w_plus: tuple[int, ...] = ()
    w_minus: tuple[int, ...] = ()
    z_plus: tuple[int, ...] = ()
    z_minus: tuple[int, ...] = ()
    ne_profiles: list[int] | None = None
    ne_profiles_truncated: bool = False
    extras: dict = field(default_factory=dict)

    def counter(self, name: str, x: float) -> int:
        return getattr(self, name)[self.thresholds.index(x)]

    def typ(self, eps: float) -> int:
        return self.typ_count[self.epsilons.index(eps)]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "ne_count": self.ne_count,
            "so": self.so,
            "beq": self.beq,
            "weq": self.weq,
            "asu_of_ne": {
                "min": self.asu_min,
                "max": self.asu_max,
                "mean": self.asu_mean,
                "histogram": [list(b) for b in self.asu_histogram],
            },
            "x_typ": self.x_typ,
            "typ_count": dict(zip(map(repr, self.epsilons), self.typ_count)),
            "w_plus": dict(zip(map(repr, self.thresholds), self.w_plus)),
            "w_minus": dict(zip(map(repr, self.thresholds), self.w_minus)),
            "z_plus": dict(zip(map(repr, self.thresholds), self.z_plus)),
            "z_minus": dict(zip(map(repr, self.thresholds), self.z_minus)),
            "ne_profiles": self.ne_profiles,
            "ne_profiles_truncated": self.ne_profiles_truncated,
        }


def report(
    g: Game,
    thresholds: Sequence[float] = (),
    epsilons: Sequence[float] = (),
    x_typ: float | None = None,
    keep_profiles: bool = False,
    profile_cap: int = PROFILE_CAP,
) -> EquilibriumReport:
    """Equilibrium count, SO/BEq/WEq and the W/Z/typical counters of one game.

    W and Z counters use weak inequalities (ASU >= x, ASU <= x); the typical
    count uses the strict |ASU - x_typ| < eps.
    """
    thresholds = tuple(float(x) for x in thresholds)
    epsilons = tuple(float(e) for e in epsilons)
    if epsilons and x_typ is None:
        raise ValueError("typical counts need x_typ")
    if g.packed:
        rep = _report_packed(g, thresholds, epsilons, x_typ)
        plane = _packed_ne_plane(g) if keep_profiles else None
    else:
        rep, ne = _report_float(g, thresholds, epsilons, x_typ)
        plane = None
    if keep_profiles:
        cap = profile_cap
        if plane is not None:
            idx = _plane_indices(plane, g.n, cap)
        else:
            idx = np.flatnonzero(ne)[:cap]
        rep.ne_profiles = idx.tolist()
        rep.ne_profiles_truncated = rep.ne_count > cap
    return rep


def _report_packed(g, thresholds, epsilons, x_typ):
    ne = _packed_ne_plane(g)
    all_h, ne_h = _packed_histograms(g, ne)
    n = g.n
    levels = np.arange(n + 1) / n
    ne_count = int(ne_h.sum())
    so = float(levels[np.flatnonzero(all_h)[-1]])
    hit = np.flatnonzero(ne_h)
    if ne_count:
        beq, weq = float(levels[hit[-1]]), float(levels[hit[0]])
        asu_mean = float(Fraction(int(np.dot(ne_h, np.arange(n + 1))), n * ne_count))
    else:
        beq = weq = asu_mean = None

    def tally(h, mask):
        return int(h[mask].sum())

    return EquilibriumReport(
        n=n,
        ne_count=ne_count,
        so=so,
        beq=beq,
        weq=weq,
        asu_min=weq,
        asu_max=beq,
        asu_mean=asu_mean,
        asu_histogram=[(float(levels[k]), int(ne_h[k])) for k in hit],
        thresholds=thresholds,
        epsilons=epsilons,
        x_typ=x_typ,
        typ_count=tuple(tally(ne_h, np.abs(levels - x_typ) < e) for e in epsilons),
        w_plus=tuple(tally(all_h, levels >= x) for x in thresholds),
        w_minus=tuple(tally(all_h, levels <= x) for x in thresholds),
        z_plus=tuple(tally(ne_h, levels >= x) for x in thresholds),
        z_minus=tuple(tally(ne_h, levels <= x) for x in thresholds),
    )


_HIST_BINS = 10


def _report_float(g, thresholds, epsilons, x_typ):
    asu, ne = _float_scan_checked(g)
    ne_asu = asu[ne]
    ne_count = int(ne_asu.size)
    if ne_count:
        lo, hi = float(ne_asu.min()), float(ne_asu.max())
        counts, edges = np.histogram(ne_asu, bins=_HIST_BINS, range=(lo, hi) if hi > lo else (lo - 0.5, lo + 0.5))
        hist = [(float(e), int(c)) for e, c in zip(edges[:-1], counts)]
        asu_mean = math.fsum(ne_asu.tolist()) / ne_count
    else:
        lo = hi = asu_mean = None
        hist = []
    rep = EquilibriumReport(
        n=g.n,
        ne_count=ne_count,
        so=float(asu.max()),
        beq=hi,
        weq=lo,
        asu_min=lo,
        asu_max=hi,
        asu_mean=asu_mean,
        asu_histogram=hist,
        thresholds=thresholds,
        epsilons=epsilons,
        x_typ=x_typ,
        typ_count=tuple(int(np.count_nonzero(np.abs(ne_asu - x_typ) < e)) for e in epsilons),
        w_plus=tuple(int(np.count_nonzero(asu >= x)) for x in thresholds),
        w_minus=tuple(int(np.count_nonzero(asu <= x)) for x in thresholds),
        z_plus=tuple(int(np.count_nonzero(ne_asu >= x)) for x in thresholds),
        z_minus=tuple(int(np.count_nonzero(ne_asu <= x)) for x in thresholds),
    )
    return rep, ne

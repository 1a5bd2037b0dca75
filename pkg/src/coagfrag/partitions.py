"""Core value types: mass partitions, bridges, interval partitions, and
paint-box set partitions of [n], plus the exact small-n EPPF oracle and
diversity estimators.

All types are immutable after construction and safe to share across
threads; every stochastic operation takes an explicit SeedStream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .rng import SeedStream
from .specfun import alpha_value

__all__ = [
    "MassPartition",
    "Bridge",
    "SimpleBridge",
    "IntervalPartition",
    "SetPartition",
    "bridge_from_mass",
    "interval_partition",
    "paintbox_partition",
    "eppf_pd",
    "diversity_estimate",
    "simple_bridge_labels",
    "set_partitions",
    "crp_partition",
]

_MASS_TOL = 1e-12


def rank_desc(values: np.ndarray) -> np.ndarray:
    """Sort nonincreasing, ties broken by original index (stable)."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(-values, kind="stable")
    return values[order]


@dataclass(frozen=True)
class MassPartition:
    """Ranked nonnegative frequencies with total mass <= 1 plus a dust bound.

    ``dust_bound`` is an upper estimate of the mass not carried by the
    explicit entries (truncated jump-series tail, stick-breaking leftover,
    or genuine dust).  A partition representing all of [0,1] satisfies
    sum(freqs) + dust_bound ~= 1.
    """

    freqs: np.ndarray
    dust_bound: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        if f.ndim != 1:
            raise DomainError("freqs must be one-dimensional")
        if f.size and np.any(f < -_MASS_TOL):
            raise DomainError("frequencies must be nonnegative")
        if f.size and np.any(np.diff(f) > _MASS_TOL):
            raise DomainError("frequencies must be ranked nonincreasing")
        if self.dust_bound < -_MASS_TOL:
            raise DomainError("dust_bound must be nonnegative")
        if f.sum() > 1.0 + 1e-9:
            raise DomainError(f"total mass {f.sum()} exceeds 1")
        f = np.clip(f, 0.0, None)
        f.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "dust_bound", max(float(self.dust_bound), 0.0))

    @classmethod
    def from_unranked(cls, values, dust_bound: float = 0.0) -> "MassPartition":
        return cls(rank_desc(np.asarray(values, dtype=float)), dust_bound)

    @property
    def total(self) -> float:
        return float(self.freqs.sum())

    @property
    def is_proper(self) -> bool:
        return self.total + self.dust_bound >= 1.0 - 1e-9

    def truncated(self, n: int) -> "MassPartition":
        """Keep the n largest entries, folding the cut mass into the dust bound."""
        if n >= self.freqs.size:
            return self
        cut = float(self.freqs[n:].sum())
        return MassPartition(self.freqs[:n].copy(), self.dust_bound + cut)

    def to_json(self) -> dict:
        return {"freqs": [float(v) for v in self.freqs], "dust_bound": float(self.dust_bound)}

    @classmethod
    def from_json(cls, obj: dict) -> "MassPartition":
        return cls(np.asarray(obj["freqs"], dtype=float), float(obj.get("dust_bound", 0.0)))


@dataclass(frozen=True)
class Bridge:
    """Atoms (size, uniform location) plus a linear dust coefficient.

    Realizes the random distribution function
    b(y) = dust*y + sum_i sizes[i] * 1(locs[i] <= y).
    """

    sizes: np.ndarray
    locs: np.ndarray
    dust: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.sizes, dtype=float)
        u = np.asarray(self.locs, dtype=float)
        if s.shape != u.shape or s.ndim != 1:
            raise DomainError("sizes and locs must be 1-d arrays of equal length")
        if np.any(s < 0):
            raise DomainError("atom sizes must be nonnegative")
        if np.any((u < 0) | (u > 1)):
            raise DomainError("locations must lie in [0, 1]")
        if s.sum() + self.dust > 1.0 + 1e-9:
            raise DomainError("total bridge mass exceeds 1")
        s.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "sizes", s)
        object.__setattr__(self, "locs", u)
        object.__setattr__(self, "dust", max(float(self.dust), 0.0))

    def value(self, y) -> float | np.ndarray:
        """Evaluate b(y), vectorized over y."""
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = self.dust * ys + (self.sizes[None, :] * (self.locs[None, :] <= ys[:, None])).sum(axis=1)
        return float(out[0]) if np.isscalar(y) or np.asarray(y).ndim == 0 else out

    def mass_partition(self) -> MassPartition:
        return MassPartition.from_unranked(self.sizes, self.dust)


@dataclass(frozen=True)
class SimpleBridge:
    """Single-atom bridge b(y) = (1 - s1)*y + s1 * 1(u1 <= y)."""

    s1: float
    u1: float

    def __post_init__(self):
        if not (0.0 <= self.s1 <= 1.0):
            raise DomainError("s1 must lie in [0, 1]")
        if not (0.0 <= self.u1 <= 1.0):
            raise DomainError("u1 must lie in [0, 1]")

    def value(self, y):
        ys = np.asarray(y, dtype=float)
        return (1.0 - self.s1) * ys + self.s1 * (self.u1 <= ys)


@dataclass(frozen=True)
class IntervalPartition:
    """Disjoint subintervals of [0, 1] in location order (maximal flats of
    a bridge's right-continuous inverse)."""

    starts: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.starts, dtype=float)
        ln = np.asarray(self.lengths, dtype=float)
        if s.shape != ln.shape or s.ndim != 1:
            raise DomainError("starts and lengths must be 1-d arrays of equal length")
        if np.any(ln < 0):
            raise DomainError("interval lengths must be nonnegative")
        if ln.sum() > 1.0 + 1e-9:
            raise DomainError("total interval length exceeds 1")
        ends = s + ln
        if np.any(s[1:] < ends[:-1] - 1e-12):
            raise DomainError("intervals must be disjoint and ordered")
        s.setflags(write=False)
        ln.setflags(write=False)
        object.__setattr__(self, "starts", s)
        object.__setattr__(self, "lengths", ln)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def ranked_lengths(self) -> np.ndarray:
        return rank_desc(self.lengths)

    def classify(self, points) -> np.ndarray:
        """Map each point to its interval index, or -1 for the gaps."""
        pts = np.asarray(points, dtype=float)
        bounds = np.empty(2 * self.starts.size)
        bounds[0::2] = self.starts
        bounds[1::2] = self.starts + self.lengths
        pos = np.searchsorted(bounds, pts, side="right")
        inside = pos % 2 == 1
        return np.where(inside, (pos - 1) // 2, -1)


@dataclass(frozen=True)
class SetPartition:
    """Partition of [n] stored as block labels in order of first appearance."""

    n: int
    block_of: np.ndarray
    block_sizes: np.ndarray = field(init=False, compare=False)
    k: int = field(init=False, compare=False)

    def __post_init__(self):
        labels = np.asarray(self.block_of, dtype=np.int64)
        if labels.size != self.n:
            raise DomainError("block_of must assign every element of [n]")
        sizes = np.bincount(labels)
        if int(sizes.sum()) != self.n or np.any(sizes == 0):
            raise DomainError("block labels must be contiguous and cover [n]")
        labels.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "block_of", labels)
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "k", int(sizes.size))

    @classmethod
    def from_labels(cls, labels) -> "SetPartition":
        """Canonicalize arbitrary block labels to restricted-growth form."""
        raw = np.asarray(labels)
        seen: dict = {}
        canon = np.empty(raw.size, dtype=np.int64)
        for i, lab in enumerate(raw):
            key = lab.item() if hasattr(lab, "item") else lab
            if key not in seen:
                seen[key] = len(seen)
            canon[i] = seen[key]
        return cls(raw.size, canon)

    def shape_key(self) -> tuple:
        return tuple(int(v) for v in self.block_of)

    def restrict(self, m: int) -> "SetPartition":
        return SetPartition.from_labels(self.block_of[:m])

    def to_json(self) -> dict:
        return {"n": int(self.n), "block_of": [int(v) for v in self.block_of]}

    @classmethod
    def from_json(cls, obj: dict) -> "SetPartition":
        return cls.from_labels(np.asarray(obj["block_of"], dtype=np.int64))


# -- bridge machinery ---------------------------------------------------------

def bridge_from_mass(p: MassPartition, s: SeedStream) -> Bridge:
    """Attach iid uniform locations to the frequencies of ``p``."""
    rng = s.generator()
    locs = rng.random(p.freqs.size)
    return Bridge(p.freqs.copy(), locs, p.dust_bound)


def interval_partition(b: Bridge) -> IntervalPartition:
    """Maximal flats of the bridge's right-continuous inverse.

    Atom i occupies [b(U_i-), b(U_i)), so in location order interval j
    starts at dust*U_(j) plus the mass of all atoms to the left; its
    length is the atom's size.  The ranked lengths therefore reproduce
    the atom sizes exactly.
    """
    order = np.argsort(b.locs, kind="stable")
    sizes = b.sizes[order]
    locs = b.locs[order]
    starts = b.dust * locs + np.concatenate(([0.0], np.cumsum(sizes)[:-1]))
    return IntervalPartition(starts, sizes)


def paintbox_partition(b: Bridge, n: int, s: SeedStream) -> SetPartition:
    """Classify n iid uniforms by the bridge inverse; dust hits become singletons."""
    if n < 1:
        raise DomainError("paint-box partition needs n >= 1")
    iv = interval_partition(b)
    rng = s.generator()
    pts = rng.random(n)
    idx = iv.classify(pts)
    labels = idx.astype(np.int64)
    dust_hits = idx < 0
    if np.any(dust_hits):
        base = int(idx.max()) + 1 if np.any(~dust_hits) else 0
        labels[dust_hits] = base + np.arange(int(dust_hits.sum()))
    return SetPartition.from_labels(labels)


def labels_to_partition(labels) -> SetPartition:
    return SetPartition.from_labels(labels)


# -- EPPF oracle --------------------------------------------------------------

def eppf_pd(alpha: float, theta: float, block_sizes) -> float:
    """Exact PD(alpha, theta) EPPF for a partition with these block sizes.

    Computed as the sequential seating product (seat the customers block
    by block), which is order-invariant in the block sizes.  Valid for
    0 <= alpha < 1, theta > -alpha.
    """
    a = float(alpha)
    th = float(theta)
    if not (0.0 <= a < 1.0):
        raise DomainError("eppf_pd needs 0 <= alpha < 1")
    if th <= -a:
        raise DomainError("eppf_pd needs theta > -alpha")
    sizes = [int(v) for v in block_sizes]
    if any(v < 1 for v in sizes):
        raise DomainError("block sizes must be >= 1")
    prob = 1.0
    m = 0  # customers seated so far
    for j, size in enumerate(sizes):
        if m == 0:
            pass  # first customer opens the first block with probability 1
        else:
            prob *= (th + j * a) / (th + m)
        m += 1
        for c in range(1, size):
            prob *= (c - a) / (th + m)
            m += 1
    return prob


def crp_partition(alpha: float, theta: float, n: int, rng: np.random.Generator) -> SetPartition:
    """Sequential-seating sample of a PD(alpha, theta) partition of [n]."""
    a, th = float(alpha), float(theta)
    if not (0.0 <= a < 1.0) or th <= -a:
        raise DomainError("invalid (alpha, theta) for seating sampler")
    labels = np.zeros(n, dtype=np.int64)
    sizes = [1]
    for i in range(1, n):
        # existing block j with weight sizes[j] - alpha, new block with
        # theta + k*alpha; the weights sum to theta + i
        r = rng.random() * (th + i)
        acc = 0.0
        chosen = len(sizes)
        for j, size in enumerate(sizes):
            acc += size - a
            if r < acc:
                chosen = j
                break
        if chosen == len(sizes):
            sizes.append(1)
        else:
            sizes[chosen] += 1
        labels[i] = chosen
    return SetPartition.from_labels(labels)


def set_partitions(n: int):
    """Yield every set partition of [n] as a restricted-growth label tuple."""
    if n < 1:
        raise DomainError("n must be >= 1")

    def rec(prefix, max_label):
        i = len(prefix)
        if i == n:
            yield tuple(prefix)
            return
        for lab in range(max_label + 2):
            prefix.append(lab)
            yield from rec(prefix, max(max_label, lab))
            prefix.pop()

    yield from rec([0], 0)


# -- diversity ----------------------------------------------------------------

def diversity_estimate(obj, alpha, min_atoms: int = 100, min_n: int = 1000) -> float:
    """Empirical index-scaling statistic of a partition.

    For a MassPartition this returns the total-mass-scale estimate: the
    average of (i * Gamma(1-alpha) * P_i**alpha)**(-1/alpha) over the
    last decade of available indices.  The quantity i*Gamma(1-alpha)*
    P_i**alpha converges almost surely to the diversity, so its -1/alpha
    power converges to the mixed total T.  For a SetPartition the
    estimate is K_n / n**alpha, the diversity itself.
    """
    a = alpha_value(alpha)
    if isinstance(obj, MassPartition):
        f = obj.freqs[obj.freqs > 0]
        if f.size < min_atoms:
            raise DomainError(
                f"diversity estimate needs at least {min_atoms} positive frequencies, got {f.size}"
            )
        n = f.size
        lo = max(n // 10, 1)
        idx = np.arange(lo, n + 1, dtype=float)
        vals = (idx * math.gamma(1.0 - a)) ** (-1.0 / a) / f[lo - 1 : n]
        return float(vals.mean())
    if isinstance(obj, SetPartition):
        if obj.n < min_n:
            raise DomainError(f"diversity estimate needs n >= {min_n}, got {obj.n}")
        return float(obj.k / obj.n**a)
    raise DomainError(f"unsupported input type {type(obj).__name__}")


def simple_bridge_labels(s1: float, n: int, s: SeedStream) -> np.ndarray:
    """iid Bernoulli(s1) block labels from the inverse of a simple bridge."""
    if not (0.0 <= s1 <= 1.0):
        raise DomainError("s1 must lie in [0, 1]")
    rng = s.generator()
    return (rng.random(n) < s1).astype(np.int64)

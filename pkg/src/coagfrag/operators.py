"""Coagulation and fragmentation operators plus the three-step partition
scheme.

The two coagulation operators are built from *dependent* ingredients: the
composed-bridge coagulation shares one mixing draw and one subordinator
path between the inner and outer bridges, and the simple-bridge merge
weight shares its (gamma, zeta) pair with the partition it acts on.
Passing independently sampled pieces is a different (wrong) experiment;
the verification harness exposes exactly that as a negative control.

Besides the materializing operators, this module provides exact lazy
evaluators for the functionals of fragmentation outputs that the
verification harness compares (largest atoms, size-biased value, block
counts).  They avoid building the full child array per replica: the top
products come from extending child rows only until no unexplored atom
can exceed the current candidate, a size-biased pick factorizes through
the row totals, and paint-box block counts within one fragmented atom
follow the sequential-seating law of the child sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .partitions import (
    Bridge,
    IntervalPartition,
    MassPartition,
    SetPartition,
    bridge_from_mass,
    interval_partition,
    rank_desc,
)
from .rng import SeedStream
from .samplers import (
    ZetaSpec,
    gg_jump_series,
    gg_mass_partition,
    pd_conditional_labels,
    pd_sticks,
    size_biased_pick,
    stable_draws,
    stable_jump_series,
    tilted_stable_draws,
)
from .specfun import alpha_value

__all__ = [
    "FragConfig",
    "JointCoagSample",
    "coag_interval",
    "coag_composed",
    "coag_simple",
    "frag_pitman",
    "frag_dgm",
    "structural_sample",
    "three_step_partition",
]


@dataclass(frozen=True)
class FragConfig:
    """Truncation policy for fragmentation child rows.

    ``renormalize`` scales every child row to unit mass (output total
    equals input total exactly); ``truncate_record`` keeps the raw
    truncated products and adds the un-sampled child mass to the output
    dust bound.
    """

    n_child_atoms: int = 500
    tail_policy: str = "renormalize"

    def __post_init__(self):
        if self.n_child_atoms < 1:
            raise DomainError("n_child_atoms must be >= 1")
        if self.tail_policy not in ("renormalize", "truncate_record"):
            raise DomainError("tail_policy must be 'renormalize' or 'truncate_record'")


@dataclass(frozen=True)
class JointCoagSample:
    """One draw of the dependent bridge pair and its coagulation.

    input_freqs  -- outer-bridge frequencies (marginally the coarser law)
    intervals    -- interval partition induced by the inner bridge
    output_freqs -- input coagulated over the intervals
    t1, t2       -- scaled subordinator totals of the two bridges (their
                    -alpha powers are the respective diversities)
    zeta_draw    -- shared mixing draw
    """

    input_freqs: MassPartition
    intervals: IntervalPartition
    output_freqs: MassPartition
    t1: float
    t2: float
    zeta_draw: float
    inner_bridge: Bridge
    outer_bridge: Bridge

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0):
            raise DomainError("bridge totals must be positive")


def coag_interval(p: MassPartition, iv: IntervalPartition, s: SeedStream) -> MassPartition:
    """Merge the masses of ``p`` across the interval partition.

    Each frequency receives an independent uniform location; masses
    landing in the same interval merge, and uniforms falling in the gaps
    keep their own mass as singleton atoms (the dust of the inner
    bridge paints no interval).  The dust of ``p`` is a sea of
    infinitesimally small atoms at iid locations, so its mass joins each
    interval in proportion to length and only the share over the gaps
    stays dust.
    """
    rng = s.generator()
    u = rng.random(p.freqs.size)
    idx = iv.classify(u)
    inside = idx >= 0
    merged = np.bincount(idx[inside], weights=p.freqs[inside], minlength=iv.starts.size)
    merged = merged + p.dust_bound * iv.lengths
    out = np.concatenate((merged, p.freqs[~inside]))
    return MassPartition(rank_desc(out), p.dust_bound * (1.0 - iv.total_length))


def coag_composed(alpha, delta, zeta: ZetaSpec, n_atoms: int, s: SeedStream,
                  coupled: bool = True) -> JointCoagSample:
    """Coagulation by composition of the dependent bridge pair.

    One mixing draw z and one inner subordinator path are shared: the
    inner bridge normalizes the finer subordinator over [0, z], and the
    outer bridge runs the coarser subordinator over [0, tau_inner(z)],
    its time being the realized inner total.  The output frequencies are
    the outer masses merged over the inner interval partition and follow
    the product-index law with the same mixing variable.

    ``coupled=False`` deliberately breaks the construction by giving the
    outer bridge a fresh, independent mixing draw and inner total; it
    exists as a negative-control fixture and is *not* the operator.
    """
    a = alpha_value(alpha)
    d = alpha_value(delta)
    if n_atoms < 1:
        raise DomainError("n_atoms must be >= 1")
    rng = s.generator()
    z = float(zeta.draw(rng))

    if z == 0.0:
        inner = stable_jump_series(d, n_atoms, rng)
        t1_total = inner.total
        t1 = t1_total
        outer = stable_jump_series(a, n_atoms, rng)
        t2 = outer.total
    else:
        inner = gg_jump_series(d, z, n_atoms, rng)
        t1_total = inner.total
        t1 = t1_total / z ** (1.0 / d)
        outer_time = t1_total
        if not coupled:
            z2 = float(zeta.draw(rng))
            outer_time = float(tilted_stable_draws(d, max(z2, 1e-300), rng)[0]) if z2 > 0 else \
                float(stable_draws(d, 1, rng)[0])
        outer = gg_jump_series(a, outer_time, n_atoms, rng)
        t2 = outer.total / t1_total ** (1.0 / a)

    inner_bridge = Bridge(inner.jumps / inner.total, rng.random(n_atoms),
                          inner.tail_mass_bound / inner.total)
    outer_part = MassPartition(outer.jumps / outer.total, outer.tail_mass_bound / outer.total)
    outer_bridge = Bridge(outer_part.freqs, rng.random(n_atoms), outer_part.dust_bound)

    iv = interval_partition(inner_bridge)
    u = rng.random(outer_part.freqs.size)
    idx = iv.classify(u)
    inside = idx >= 0
    merged = np.bincount(idx[inside], weights=outer_part.freqs[inside], minlength=iv.starts.size)
    merged = merged + outer_part.dust_bound * iv.lengths
    out = MassPartition(rank_desc(np.concatenate((merged, outer_part.freqs[~inside]))),
                        outer_part.dust_bound * (1.0 - iv.total_length))
    return JointCoagSample(outer_part, iv, out, float(t1), float(t2), z,
                           inner_bridge, outer_bridge)


def coag_simple(p: MassPartition, s1: float, s: SeedStream) -> MassPartition:
    """Simple-bridge merge: Bernoulli(s1) label per atom, labelled atoms
    collapse into one mass, the rest pass through; result ranked.

    An s1 fraction of the dust (tiny atoms, each labelled independently)
    joins the merged mass; the rest stays dust.
    """
    if not (0.0 <= s1 <= 1.0):
        raise DomainError("s1 must lie in [0, 1]")
    rng = s.generator()
    labels = rng.random(p.freqs.size) < s1
    merged = float(p.freqs[labels].sum()) + s1 * p.dust_bound
    if merged == 0.0 and not labels.any():
        return p  # nothing merged: the operator is the identity
    out = np.concatenate((p.freqs[~labels], [merged]))
    return MassPartition(rank_desc(out), (1.0 - s1) * p.dust_bound)


def _pd_child_rows(alpha: float, theta: float, n_rows: int, n_child: int,
                   rng: np.random.Generator):
    """Stick-break matrix: n_rows independent PD(alpha, theta) rows of
    n_child children each, plus the per-row leftover."""
    k = np.arange(1, n_child + 1, dtype=float)
    w = rng.beta(1.0 - alpha, theta + k * alpha, size=(n_rows, n_child))
    keep = np.cumprod(1.0 - w, axis=1)
    children = np.empty_like(w)
    children[:, 0] = w[:, 0]
    children[:, 1:] = w[:, 1:] * keep[:, :-1]
    return children, keep[:, -1]


def frag_pitman(p: MassPartition, alpha, delta, cfg: FragConfig, s: SeedStream) -> MassPartition:
    """Fragment every atom by an independent child mass partition with
    parameters (alpha, -alpha*delta); the ranked multiset of products."""
    a = alpha_value(alpha)
    d = alpha_value(delta)
    rng = s.generator()
    n = p.freqs.size
    if n == 0:
        return p
    children, leftovers = _pd_child_rows(a, -a * d, n, cfg.n_child_atoms, rng)
    dust = p.dust_bound
    if cfg.tail_policy == "renormalize":
        children = children / (1.0 - leftovers)[:, None]
    else:
        dust += float((p.freqs * leftovers).sum())
    products = (p.freqs[:, None] * children).ravel()
    return MassPartition(rank_desc(products), dust)


def frag_dgm(p: MassPartition, alpha, cfg: FragConfig, s: SeedStream) -> MassPartition:
    """Split one size-biased pick by an independent child partition with
    parameters (alpha, 1 - alpha); the remainder passes through."""
    a = alpha_value(alpha)
    _, value, rest = size_biased_pick(p, s)
    rng = s.substream(1).generator()
    children, leftover = _pd_child_rows(a, 1.0 - a, 1, cfg.n_child_atoms, rng)
    children, leftover = children[0], float(leftover[0])
    dust = p.dust_bound
    if cfg.tail_policy == "renormalize":
        children = children / (1.0 - leftover)
    else:
        dust += value * leftover
    out = np.concatenate((value * children, rest.freqs))
    return MassPartition(rank_desc(out), dust)


def structural_sample(alpha, zeta: ZetaSpec, s: SeedStream) -> float:
    """Law of a size-biased pick from the generalized-gamma family:
    B * (1 - Z**(1/alpha) / (Z + G)**(1/alpha)) with B ~ beta(1-alpha, alpha),
    G a unit-mean gamma, Z ~ zeta, all independent."""
    a = alpha_value(alpha)
    rng = s.generator()
    B = rng.beta(1.0 - a, a)
    Z = float(zeta.draw(rng))
    G = rng.gamma(1.0)
    return float(B * (1.0 - (Z / (Z + G)) ** (1.0 / a)))


# -- three-step partition scheme ------------------------------------------------

def _classify_by_masses(freqs: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Paint-box classification of n uniforms over explicit masses; hits
    beyond the explicit total (the truncation tail of infinitesimally
    small atoms) become singleton labels."""
    cdf = np.cumsum(freqs)
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    labels = idx.astype(np.int64)
    tail_hits = idx >= freqs.size
    if np.any(tail_hits):
        labels[tail_hits] = freqs.size + np.arange(int(tail_hits.sum()))
    return labels


def three_step_partition(alpha, delta, zeta: ZetaSpec, n: int, s: SeedStream,
                         n_atoms: int = 512) -> SetPartition:
    """Sample a partition of [n] from the product-index law by staging.

    Step 1 draws the scaled total of the finer subordinator (whose
    -delta power is its diversity); step 2 partitions [n] by the coarser
    subordinator run for exactly the realized finer total (the joint
    construction, not an independent redraw); step 3 merges the blocks
    by an independent conditioned-total paint box at the same scaled
    total.
    """
    a = alpha_value(alpha)
    d = alpha_value(delta)
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = s.generator()
    z = float(zeta.draw(rng))
    if z == 0.0:
        s_total = float(stable_draws(d, 1, rng)[0])
        time_coarse = 0.0
    else:
        tau_inner = float(tilted_stable_draws(d, z, rng)[0])
        s_total = tau_inner / z ** (1.0 / d)
        time_coarse = tau_inner  # z**(1/d) * s_total
    base = gg_mass_partition(a, time_coarse, n_atoms, rng)
    labels1 = _classify_by_masses(base.freqs, n, rng)
    # canonicalize block ids 0..k-1
    uniq, labels1 = np.unique(labels1, return_inverse=True)
    k = uniq.size
    merge = pd_conditional_labels(d, s_total, k, rng)
    return SetPartition.from_labels(merge[labels1])


# -- exact lazy functionals of fragmentation outputs -----------------------------

_CHUNK = 64


def _lazy_row_top(p_i: float, alpha: float, theta: float, bar: float,
                  rng: np.random.Generator, best: float, second: float):
    """Extend one child row until no unexplored child can beat ``second``;
    returns the updated (best, second) over products of this row."""
    remaining = 1.0
    k = 0
    while p_i * remaining > min(bar, second) and k < 100_000:
        ks = np.arange(k + 1, k + _CHUNK + 1, dtype=float)
        w = rng.beta(1.0 - alpha, theta + ks * alpha)
        stick = np.empty(_CHUNK)
        stick[0] = w[0] * remaining
        keep = remaining * np.cumprod(1.0 - w)
        stick[1:] = w[1:] * keep[:-1]
        vals = p_i * stick
        top = np.partition(vals, _CHUNK - 2)[-2:]
        for v in (top.min(), top.max()):
            if v > best:
                best, second = v, best
            elif v > second:
                second = v
        remaining = keep[-1]
        k += _CHUNK
    return best, second


def frag_pitman_top2(p: MassPartition, alpha, delta, rng: np.random.Generator):
    """Two largest atoms of the fragmentation output, exact almost surely."""
    a = alpha_value(alpha)
    th = -a * alpha_value(delta)
    best = second = 0.0
    for p_i in p.freqs:
        if p_i <= second:
            break  # every product of this and later rows is <= p_i
        best, second = _lazy_row_top(float(p_i), a, th, math.inf, rng, best, second)
    return best, second


def frag_pitman_sizebiased(p: MassPartition, alpha, delta, rng: np.random.Generator) -> float:
    """Value of a size-biased pick from the fragmentation output.

    Rows conserve their atom's mass, so the pick factorizes: choose the
    row size-biasedly, then multiply by an independent draw of the child
    structural law beta(1-alpha, alpha*(1-delta)).
    """
    a = alpha_value(alpha)
    d = alpha_value(delta)
    total = p.total
    cdf = np.cumsum(p.freqs)
    idx = min(int(np.searchsorted(cdf, rng.random() * total, side="right")), p.freqs.size - 1)
    return float(p.freqs[idx]) * float(rng.beta(1.0 - a, a * (1.0 - d)))


def _seating_block_count(alpha: float, theta: float, c: int, rng: np.random.Generator) -> int:
    """Number of blocks of a sequential-seating partition of [c]."""
    if c <= 1:
        return c
    sizes = [1]
    for i in range(1, c):
        r = rng.random() * (theta + i)
        acc = 0.0
        new_block = True
        for j, size in enumerate(sizes):
            acc += size - alpha
            if r < acc:
                sizes[j] += 1
                new_block = False
                break
        if new_block:
            sizes.append(1)
    return len(sizes)


def frag_pitman_block_count(p: MassPartition, alpha, delta, n: int,
                            rng: np.random.Generator) -> int:
    """Paint-box block count K_n of the fragmentation output.

    Uniforms sharing a fragmented atom are sub-partitioned by that row's
    child law, whose paint box is the (alpha, -alpha*delta) seating
    process; uniforms on distinct rows never merge.
    """
    a = alpha_value(alpha)
    th = -a * alpha_value(delta)
    labels = _classify_by_masses(p.freqs, n, rng)
    counts = np.bincount(labels)
    counts = counts[counts > 0]
    return int(sum(_seating_block_count(a, th, int(c), rng) for c in counts))


def frag_dgm_top2(p: MassPartition, alpha, rng: np.random.Generator):
    """Two largest atoms of the single-pick fragmentation output."""
    a = alpha_value(alpha)
    total = p.total
    cdf = np.cumsum(p.freqs)
    idx = min(int(np.searchsorted(cdf, rng.random() * total, side="right")), p.freqs.size - 1)
    value = float(p.freqs[idx])
    rest = np.delete(p.freqs, idx)
    best = float(rest[0]) if rest.size else 0.0
    second = float(rest[1]) if rest.size > 1 else 0.0
    best, second = _lazy_row_top(value, a, 1.0 - a, math.inf, rng, best, second)
    return best, second


def frag_dgm_sizebiased(p: MassPartition, alpha, rng: np.random.Generator) -> float:
    """Size-biased value from the single-pick fragmentation output: with
    probability p_tilde the pick lands in the split row (child structural
    law beta(1-alpha, 1)), otherwise on an untouched atom."""
    a = alpha_value(alpha)
    total = p.total
    cdf = np.cumsum(p.freqs)
    split = min(int(np.searchsorted(cdf, rng.random() * total, side="right")), p.freqs.size - 1)
    value = float(p.freqs[split])
    pick = min(int(np.searchsorted(cdf, rng.random() * total, side="right")), p.freqs.size - 1)
    if pick == split:
        return value * float(rng.beta(1.0 - a, 1.0))
    return float(p.freqs[pick])


def frag_dgm_block_count(p: MassPartition, alpha, n: int, rng: np.random.Generator) -> int:
    """Paint-box block count K_n of the single-pick fragmentation output."""
    a = alpha_value(alpha)
    total = p.total
    cdf = np.cumsum(p.freqs)
    split = min(int(np.searchsorted(cdf, rng.random() * total, side="right")), p.freqs.size - 1)
    labels = _classify_by_masses(p.freqs, n, rng)
    counts = np.bincount(labels)
    k = 0
    for atom, c in enumerate(counts):
        if c == 0:
            continue
        if atom == split:
            k += _seating_block_count(a, 1.0 - a, int(c), rng)
        else:
            k += 1
    return k

"""Statistical verification of the coagulation/fragmentation diagrams.

Each diagram is executed in both directions: channel A applies the
operator to direct samples of one side, channel B samples the claimed
terminal law directly, and the two samples are compared statistic by
statistic (exact two-sample KS for continuous panels, chi-square for
block counts).  A diagram passes when every enabled statistic clears the
level on at least the configured fraction of independent seed
replicates.  Named negative-control fixtures re-run a diagram with one
ingredient deliberately broken (wrong fragmentation parameter, or the
dependence wiring between the coagulation ingredients severed); a
healthy harness must fail them.

Beyond the diagrams, the closed-form transform identities are checked by
Monte Carlo: the joint Laplace transform of the nested subordinator pair,
the moment identity for linear functionals of the fragmenting sequence,
and the conditioned statements (the interval law given the coarse total,
and conditional independence given the fine total).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from . import __version__
from .errors import ConfigError, DomainError, NumericError
from .operators import (
    _classify_by_masses,
    frag_dgm_block_count,
    frag_dgm_sizebiased,
    frag_dgm_top2,
    frag_pitman_block_count,
    frag_pitman_sizebiased,
    frag_pitman_top2,
)
from .partitions import MassPartition
from .rng import SeedStream
from .samplers import (
    ZetaSpec,
    conditional_pick_sampler,
    gg_jump_series,
    pd_conditional_p1,
    pd_sticks,
    stable_draws,
    stable_jump_series,
    tilted_stable_draws,
)
from .specfun import alpha_value
from .stats import bootstrap_se_neglog_mean, chisq_two_sample, ks_two_sample
from . import tables

__all__ = [
    "Statistic",
    "TestReport",
    "DualityReport",
    "DIAGRAMS",
    "NEGATIVE_CONTROLS",
    "run_duality",
    "check_laplace_identity",
    "check_vershik_moment",
    "check_conditional_coag",
    "check_conditional_independence",
]

DEFAULT_PANEL = ("P1", "P2", "sizebiased", "K50")

DIAGRAMS = {
    "pitman_pd": "multiplicative duality of the two-parameter family: "
                 "(alpha*delta, theta) <-> (alpha, theta) via interval coag / row frag",
    "dgm_pd": "additive duality of the two-parameter family: "
              "(alpha, 1+theta) <-> (alpha, theta) via beta merge / single-pick frag",
    "pitman_general": "multiplicative duality of the subordinator-mixture family",
    "dgm_general": "additive duality of the subordinator-mixture family",
    "coag_only": "composed-bridge coagulation lands on the product-index law",
    "recursion": "beta-gamma identity behind the iterated additive duality",
}

NEGATIVE_CONTROLS = {
    "pitman_pd": ("frag_wrong_theta",),
    "dgm_pd": ("coag_wrong_beta",),
    "pitman_general": ("frag_wrong_theta", "uncoupled_zeta"),
    "dgm_general": ("uncoupled_s1",),
    "coag_only": ("uncoupled_zeta",),
    "recursion": (),
}


@dataclass(frozen=True)
class Statistic:
    """One entry of the comparison panel."""

    kind: str  # P1 | P2 | sizebiased | Kn | diversity | bridge_value_at
    n: int = 50
    y: float = 0.5

    def __post_init__(self):
        if self.kind not in ("P1", "P2", "sizebiased", "Kn", "diversity", "bridge_value_at"):
            raise ConfigError(f"unknown statistic kind {self.kind!r}")
        if self.kind == "Kn" and self.n < 2:
            raise ConfigError("Kn needs n >= 2")
        if self.kind == "bridge_value_at" and not (0.0 < self.y < 1.0):
            raise ConfigError("bridge value point must lie in (0, 1)")

    @classmethod
    def parse(cls, text: str) -> "Statistic":
        t = text.strip()
        if t in ("P1", "P2", "sizebiased", "diversity"):
            return cls(t)
        if t.startswith("K") and t[1:].isdigit():
            return cls("Kn", n=int(t[1:]))
        if t.startswith("bridge@"):
            return cls("bridge_value_at", y=float(t.split("@", 1)[1]))
        raise ConfigError(f"cannot parse statistic {text!r}")

    @property
    def name(self) -> str:
        if self.kind == "Kn":
            return f"K{self.n}"
        if self.kind == "bridge_value_at":
            return f"bridge@{self.y:g}"
        return self.kind


@dataclass
class TestReport:
    """Outcome of one statistic comparison across the seed replicates."""

    diagram_id: str
    direction: str
    statistic: str
    test_kind: str  # ks | chisq | z
    sample_sizes: tuple
    stat_values: list
    p_values: list
    seeds: list
    passed: bool
    level: float
    runtime: float = 0.0
    note: str = ""

    def to_json(self) -> dict:
        return {
            "diagram_id": self.diagram_id,
            "direction": self.direction,
            "statistic": self.statistic,
            "test_kind": self.test_kind,
            "sample_sizes": list(self.sample_sizes),
            "stat_values": [float(v) for v in self.stat_values],
            "p_values": [float(v) for v in self.p_values],
            "seeds": [int(v) for v in self.seeds],
            "passed": bool(self.passed),
            "level": float(self.level),
            "runtime": float(self.runtime),
            "note": self.note,
        }


@dataclass
class DualityReport:
    """Full result of one diagram verification run."""

    diagram_id: str
    params: dict
    reports: list
    passed: bool
    negative_control: str | None = None
    runtime: float = 0.0
    version: str = field(default=__version__)

    def to_json(self) -> dict:
        return {
            "diagram_id": self.diagram_id,
            "params": self.params,
            "reports": [r.to_json() for r in self.reports],
            "passed": bool(self.passed),
            "negative_control": self.negative_control,
            "runtime": float(self.runtime),
            "version": self.version,
        }

    def to_csv_rows(self) -> list:
        rows = []
        for r in self.reports:
            for seed, stat, p in zip(r.seeds, r.stat_values, r.p_values):
                rows.append({
                    "diagram_id": self.diagram_id,
                    "direction": r.direction,
                    "statistic": r.statistic,
                    "test_kind": r.test_kind,
                    "stat_value": stat,
                    "p_value": p,
                    "pass": r.passed,
                    "seed": seed,
                    "N": max(r.sample_sizes),
                })
        return rows


# -- raw sampling helpers (hot loop: plain arrays, one generator per channel) ----

def _gg_freqs(alpha: float, time: float, n_atoms: int, rng) -> np.ndarray:
    """Ranked normalized jump series; plain array fast path."""
    arr = np.cumsum(rng.standard_exponential(n_atoms))
    if time == 0.0:
        jumps = np.exp(-(np.log(arr) + sp.gammaln(1.0 - alpha)) / alpha)
        tail = alpha / math.gamma(1.0 - alpha) * jumps[-1] ** (1.0 - alpha) / (1.0 - alpha)
    else:
        jumps = tables.gg_tail_inverse_table(alpha).inverse(arr / time)
        jumps = np.minimum.accumulate(jumps)
        tail = time * alpha * sp.gammainc(1.0 - alpha, jumps[-1])
    return jumps / (jumps.sum() + tail)


def _pa_freqs(alpha: float, zeta: ZetaSpec, n_atoms: int, rng) -> np.ndarray:
    return _gg_freqs(alpha, float(zeta.draw(rng)), n_atoms, rng)


def _pd_freqs(alpha: float, theta: float, n_sticks: int, rng):
    """Ranked stick frequencies plus the exact un-broken leftover."""
    freqs, leftover = pd_sticks(alpha, theta, n_sticks, rng)
    return np.sort(freqs)[::-1], leftover


def _pd_tail_pick(alpha: float, theta: float, n_sticks: int, leftover: float):
    """Exact size-biased value inside a stick leftover: the residual
    sequence is the (alpha, theta + n*alpha) law scaled by the leftover,
    whose first size-biased fraction is beta(1-alpha, theta+n*alpha+alpha)."""
    b_shape = theta + n_sticks * alpha + alpha

    def pick(rng):
        return leftover * float(rng.beta(1.0 - alpha, b_shape))

    return pick


def _tilted_one(alpha: float, t: float, rng) -> float:
    return float(tilted_stable_draws(alpha, np.array([t]), rng)[0])


def _stats_from_freqs(freqs: np.ndarray, wanted, rng, alpha=None, dust: float = 0.0,
                      tail_pick=None) -> dict:
    """Statistic panel of one ranked-frequency sample.

    ``tail_pick``, when given, supplies the exact law of a size-biased
    value landing in the representation's un-sampled remainder; the pick
    then runs over the full mass instead of the explicit atoms only.
    """
    out = {}
    cum = None
    for st in wanted:
        if st.kind == "P1":
            out[st.name] = float(freqs[0])
        elif st.kind == "P2":
            out[st.name] = float(freqs[1]) if freqs.size > 1 else 0.0
        elif st.kind == "sizebiased":
            if cum is None:
                cum = np.cumsum(freqs)
            if tail_pick is not None:
                u = rng.random() * (cum[-1] + dust)
                if u > cum[-1]:
                    out[st.name] = float(tail_pick(rng))
                    continue
                j = int(np.searchsorted(cum, u, side="right"))
            else:
                j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            j = min(j, freqs.size - 1)
            out[st.name] = float(freqs[j])
        elif st.kind == "Kn":
            if cum is None:
                cum = np.cumsum(freqs)
            idx = np.searchsorted(cum, rng.random(st.n), side="right")
            inside = idx < freqs.size
            out[st.name] = float(np.unique(idx[inside]).size + int((~inside).sum()))
        elif st.kind == "diversity":
            f = freqs[freqs > 0]
            n = f.size
            lo = max(n // 10, 1)
            idxs = np.arange(lo, n + 1, dtype=float)
            vals = (idxs * math.gamma(1.0 - alpha)) ** (-1.0 / alpha) / f[lo - 1: n]
            out[st.name] = float(vals.mean())
        elif st.kind == "bridge_value_at":
            mask = rng.random(freqs.size) <= st.y
            out[st.name] = float(freqs[mask].sum() + dust * st.y)
    return out


def _frag_pitman_stats(freqs: np.ndarray, alpha: float, delta: float, wanted, rng) -> dict:
    """Exact lazy statistic panel of the row fragmentation output."""
    p = MassPartition(freqs, max(0.0, 1.0 - freqs.sum()))
    out = {}
    top = None
    for st in wanted:
        if st.kind in ("P1", "P2"):
            if top is None:
                top = frag_pitman_top2(p, alpha, delta, rng)
            out[st.name] = top[0] if st.kind == "P1" else top[1]
        elif st.kind == "sizebiased":
            out[st.name] = frag_pitman_sizebiased(p, alpha, delta, rng)
        elif st.kind == "Kn":
            out[st.name] = float(frag_pitman_block_count(p, alpha, delta, st.n, rng))
        else:
            raise ConfigError(f"statistic {st.name} unsupported on fragmentation channels")
    return out


def _frag_dgm_stats(freqs: np.ndarray, alpha: float, wanted, rng) -> dict:
    p = MassPartition(freqs, max(0.0, 1.0 - freqs.sum()))
    out = {}
    top = None
    for st in wanted:
        if st.kind in ("P1", "P2"):
            if top is None:
                top = frag_dgm_top2(p, alpha, rng)
            out[st.name] = top[0] if st.kind == "P1" else top[1]
        elif st.kind == "sizebiased":
            out[st.name] = frag_dgm_sizebiased(p, alpha, rng)
        elif st.kind == "Kn":
            out[st.name] = float(frag_dgm_block_count(p, alpha, st.n, rng))
        else:
            raise ConfigError(f"statistic {st.name} unsupported on fragmentation channels")
    return out


def _coag_composed_stats(alpha, delta, zeta, n_atoms, wanted, rng, coupled=True) -> dict:
    """Stats of the composed coagulation output; raw fast path sharing the
    mixing draw and inner total between the two bridges."""
    z = float(zeta.draw(rng))
    if z == 0.0:
        inner = stable_jump_series(delta, n_atoms, rng)
        outer_time = 0.0
    else:
        inner = gg_jump_series(delta, z, n_atoms, rng)
        outer_time = inner.total
        if not coupled:
            z2 = float(zeta.draw(rng))
            outer_time = _tilted_one(delta, z2, rng) if z2 > 0 else float(stable_draws(delta, 1, rng)[0])
    outer = _gg_freqs(alpha, outer_time, n_atoms, rng)
    inner_freqs = inner.jumps / inner.total
    # classify the outer masses over the inner interval layout (layout order
    # is immaterial for iid uniforms; the gap plays the dust); the outer
    # tail mass joins intervals in proportion to length
    cuts = np.cumsum(inner_freqs)
    idx = np.searchsorted(cuts, rng.random(n_atoms), side="right")
    inside = idx < inner_freqs.size
    merged = np.bincount(idx[inside], weights=outer[inside], minlength=inner_freqs.size)
    merged = merged + (1.0 - outer.sum()) * inner_freqs
    out = np.sort(np.concatenate((merged, outer[~inside])))[::-1]
    return _stats_from_freqs(out, wanted, rng, alpha=alpha * delta)


def _composed_bridge_value(alpha, delta, zeta, n_atoms, y, rng) -> float:
    """Value of outer(inner(y)) for the coupled bridge pair."""
    z = float(zeta.draw(rng))
    if z == 0.0:
        inner = stable_jump_series(delta, n_atoms, rng)
        outer_time = 0.0
    else:
        inner = gg_jump_series(delta, z, n_atoms, rng)
        outer_time = inner.total
    fi = inner.jumps / inner.total
    di = 1.0 - fi.sum()
    v = di * y + fi[rng.random(fi.size) <= y].sum()
    fo = _gg_freqs(alpha, outer_time, n_atoms, rng)
    do = 1.0 - fo.sum()
    return float(do * v + fo[rng.random(fo.size) <= v].sum())


# -- diagram channel builders ----------------------------------------------------

def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _build_channels(diagram_id, alpha, delta, theta, zeta, n_atoms, wanted, nc):
    """Return {direction: (channel_A, channel_B)}, each channel a callable
    rng -> dict of statistic values."""
    a = alpha
    if diagram_id in ("pitman_pd", "pitman_general", "coag_only"):
        _require(delta is not None and 0.0 < delta < 1.0,
                 "this diagram needs a delta strictly inside (0, 1)")
    if diagram_id in ("pitman_pd", "dgm_pd"):
        _require(theta is not None, "two-parameter diagrams need theta")
    if diagram_id in ("pitman_general", "dgm_general", "coag_only", "recursion"):
        _require(zeta is not None, "mixture diagrams need a zeta spec")

    if diagram_id == "pitman_general":
        d = delta
        d_frag = d * 0.5 if nc == "frag_wrong_theta" else d
        coupled = nc != "uncoupled_zeta"

        def frag_a(rng):
            x = _pa_freqs(a * d, zeta, n_atoms, rng)
            return _frag_pitman_stats(x, a, d_frag, wanted, rng)

        def frag_b(rng):
            z = float(zeta.draw(rng))
            t = _tilted_one(d, z, rng) if z > 0 else 0.0
            y = _gg_freqs(a, t, n_atoms, rng)
            return _stats_from_freqs(y, wanted, rng, alpha=a)

        def coag_a(rng):
            return _coag_composed_stats(a, d, zeta, n_atoms, wanted, rng, coupled=coupled)

        def coag_b(rng):
            x = _pa_freqs(a * d, zeta, n_atoms, rng)
            return _stats_from_freqs(x, wanted, rng, alpha=a * d)

        return {"frag": (frag_a, frag_b), "coag": (coag_a, coag_b)}

    if diagram_id == "coag_only":
        d = delta
        coupled = nc != "uncoupled_zeta"

        def coag_a(rng):
            out = _coag_composed_stats(a, d, zeta, n_atoms,
                                       [st for st in wanted if st.kind != "bridge_value_at"],
                                       rng, coupled=coupled)
            for st in wanted:
                if st.kind == "bridge_value_at":
                    out[st.name] = _composed_bridge_value(a, d, zeta, n_atoms, st.y, rng)
            return out

        def coag_b(rng):
            x = _pa_freqs(a * d, zeta, n_atoms, rng)
            return _stats_from_freqs(x, wanted, rng, alpha=a * d, dust=1.0 - x.sum())

        return {"coag": (coag_a, coag_b)}

    if diagram_id == "dgm_general":
        shifted = zeta.plus_gamma(1.0 / a)
        coupled = nc != "uncoupled_s1"

        def frag_a(rng):
            x = _pa_freqs(a, zeta, n_atoms, rng)
            return _frag_dgm_stats(x, a, wanted, rng)

        def frag_b(rng):
            y = _pa_freqs(a, shifted, n_atoms, rng)
            return _stats_from_freqs(y, wanted, rng, alpha=a)

        def coag_a(rng):
            G = rng.gamma(1.0 / a)
            Z = float(zeta.draw(rng))
            B = rng.beta((1.0 - a) / a, 1.0)
            if coupled:
                s1 = B * G / (G + Z) if G + Z > 0 else 0.0
            else:
                G2 = rng.gamma(1.0 / a)
                Z2 = float(zeta.draw(rng))
                s1 = B * G2 / (G2 + Z2) if G2 + Z2 > 0 else 0.0
            y = _gg_freqs(a, G + Z, n_atoms, rng)
            labels = rng.random(y.size) < s1
            merged = y[labels].sum() + s1 * (1.0 - y.sum())
            out = np.sort(np.concatenate((y[~labels], [merged])))[::-1]
            return _stats_from_freqs(out, wanted, rng, alpha=a)

        def coag_b(rng):
            x = _pa_freqs(a, zeta, n_atoms, rng)
            return _stats_from_freqs(x, wanted, rng, alpha=a)

        return {"frag": (frag_a, frag_b), "coag": (coag_a, coag_b)}

    if diagram_id == "pitman_pd":
        d = delta
        _require(theta > -a * d, "pitman_pd needs theta > -alpha*delta")
        d_frag = d * 0.5 if nc == "frag_wrong_theta" else d

        def frag_a(rng):
            x, _ = _pd_freqs(a * d, theta, n_atoms, rng)
            return _frag_pitman_stats(x, a, d_frag, wanted, rng)

        def frag_b(rng):
            y, left = _pd_freqs(a, theta, n_atoms, rng)
            return _stats_from_freqs(y, wanted, rng, alpha=a, dust=left,
                                     tail_pick=_pd_tail_pick(a, theta, n_atoms, left))

        def coag_a(rng):
            y, y_left = _pd_freqs(a, theta, n_atoms, rng)
            iv, _ = pd_sticks(d, theta / a, n_atoms, rng)  # independent merge intervals
            cuts = np.cumsum(iv)
            u = rng.random(y.size)
            idx = np.searchsorted(cuts, u, side="right")
            inside = idx < iv.size
            merged = np.bincount(idx[inside], weights=y[inside], minlength=iv.size)
            merged = merged + y_left * iv
            out = np.sort(np.concatenate((merged, y[~inside])))[::-1]
            return _stats_from_freqs(out, wanted, rng, alpha=a * d)

        def coag_b(rng):
            x, x_left = _pd_freqs(a * d, theta, n_atoms, rng)
            return _stats_from_freqs(x, wanted, rng, alpha=a * d, dust=x_left,
                                     tail_pick=_pd_tail_pick(a * d, theta, n_atoms, x_left))

        return {"frag": (frag_a, frag_b), "coag": (coag_a, coag_b)}

    if diagram_id == "dgm_pd":
        _require(theta > -a, "dgm_pd needs theta > -alpha")
        beta_b = (theta + a) / a
        if nc == "coag_wrong_beta":
            beta_b = 2.0 * beta_b

        def frag_a(rng):
            x, _ = _pd_freqs(a, theta, n_atoms, rng)
            return _frag_dgm_stats(x, a, wanted, rng)

        def frag_b(rng):
            y, left = _pd_freqs(a, 1.0 + theta, n_atoms, rng)
            return _stats_from_freqs(y, wanted, rng, alpha=a, dust=left,
                                     tail_pick=_pd_tail_pick(a, 1.0 + theta, n_atoms, left))

        def coag_a(rng):
            y, y_left = _pd_freqs(a, 1.0 + theta, n_atoms, rng)
            s1 = rng.beta((1.0 - a) / a, beta_b)
            labels = rng.random(y.size) < s1
            merged = y[labels].sum() + s1 * y_left
            out = np.sort(np.concatenate((y[~labels], [merged])))[::-1]
            return _stats_from_freqs(out, wanted, rng, alpha=a)

        def coag_b(rng):
            x, x_left = _pd_freqs(a, theta, n_atoms, rng)
            return _stats_from_freqs(x, wanted, rng, alpha=a, dust=x_left,
                                     tail_pick=_pd_tail_pick(a, theta, n_atoms, x_left))

        return {"frag": (frag_a, frag_b), "coag": (coag_a, coag_b)}

    if diagram_id == "recursion":
        n_rec = 3

        def rec_a(rng):
            Z = float(zeta.draw(rng))
            g_n = rng.gamma(n_rec / a)
            b = rng.beta((1.0 - a) / a, (n_rec - 1 + a) / a)
            return {"value": b * g_n / (g_n + Z)}

        def rec_b(rng):
            Z = float(zeta.draw(rng))
            g1 = rng.gamma(1.0 / a)
            g_rest = rng.gamma((n_rec - 1) / a)
            b = rng.beta((1.0 - a) / a, 1.0)
            return {"value": b * g1 / (g1 + g_rest + Z)}

        return {"identity": (rec_a, rec_b)}

    raise ConfigError(f"unknown diagram {diagram_id!r}")


def run_duality(diagram_id: str, *, alpha, delta=None, theta=None, zeta: ZetaSpec = None,
                n_replicas: int = 20000, n_atoms: int = 2000, stats=None, level: float = 0.01,
                n_seeds: int = 5, pass_fraction: float = 0.8, s: SeedStream,
                negative_control: str | None = None, max_workers: int = 1) -> DualityReport:
    """Execute one duality diagram and test channel A against channel B.

    Pass rule per statistic: p > level on at least ceil(pass_fraction *
    n_seeds) of the independent seed replicates.  ``max_workers`` > 1
    runs the (direction, seed) units in a thread pool; every unit owns
    its streams, so results are identical regardless of scheduling.
    """
    t_start = time.time()
    if diagram_id not in DIAGRAMS:
        raise ConfigError(f"unknown diagram {diagram_id!r}; choose from {sorted(DIAGRAMS)}")
    a = alpha_value(alpha)
    d = alpha_value(delta) if delta is not None else None
    if negative_control is not None and negative_control not in NEGATIVE_CONTROLS[diagram_id]:
        raise ConfigError(
            f"unknown negative control {negative_control!r} for {diagram_id} "
            f"(available: {NEGATIVE_CONTROLS[diagram_id]})")
    if diagram_id == "recursion":
        wanted = [Statistic("P1")]  # placeholder; recursion uses its own scalar
    elif stats is None:
        wanted = [Statistic.parse(t) for t in DEFAULT_PANEL]
    else:
        wanted = [st if isinstance(st, Statistic) else Statistic.parse(st) for st in stats]
    if n_replicas < 100:
        raise ConfigError("n_replicas must be at least 100")
    if not (0.0 < level < 1.0):
        raise ConfigError("level must lie in (0, 1)")
    if n_seeds < 1:
        raise ConfigError("n_seeds must be >= 1")

    channels = _build_channels(diagram_id, a, d, theta, zeta, n_atoms, wanted, negative_control)

    def run_unit(dir_idx, chan_a, chan_b, seed_idx):
        rng_a = s.substream(1000 * (dir_idx + 1) + 2 * seed_idx).generator()
        rng_b = s.substream(1000 * (dir_idx + 1) + 2 * seed_idx + 1).generator()
        vals_a: dict[str, list] = {}
        vals_b: dict[str, list] = {}
        for _ in range(n_replicas):
            for k, v in chan_a(rng_a).items():
                vals_a.setdefault(k, []).append(v)
            for k, v in chan_b(rng_b).items():
                vals_b.setdefault(k, []).append(v)
        return vals_a, vals_b

    ordered = sorted(channels.items())
    units = [(dir_idx, direction, chan_a, chan_b, seed_idx)
             for dir_idx, (direction, (chan_a, chan_b)) in enumerate(ordered)
             for seed_idx in range(n_seeds)]
    results = {}
    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {pool.submit(run_unit, u[0], u[2], u[3], u[4]): u for u in units}
            for fut, u in futures.items():
                results[(u[1], u[4])] = fut.result()
    else:
        for u in units:
            results[(u[1], u[4])] = run_unit(u[0], u[2], u[3], u[4])

    need_pass = math.ceil(pass_fraction * n_seeds)
    reports = []
    for dir_idx, (direction, (chan_a, chan_b)) in enumerate(ordered):
        names = None
        per_seed = []
        t_dir = time.time()
        for seed_idx in range(n_seeds):
            vals_a, vals_b = results[(direction, seed_idx)]
            if names is None:
                names = sorted(vals_a)
            per_seed.append((vals_a, vals_b))
        for name in names:
            stat_values, p_values = [], []
            is_count = name.startswith("K") and name[1:].isdigit()
            for vals_a, vals_b in per_seed:
                xa = np.asarray(vals_a[name])
                xb = np.asarray(vals_b[name])
                if is_count:
                    m = int(max(xa.max(), xb.max())) + 1
                    res = chisq_two_sample(np.bincount(xa.astype(int), minlength=m),
                                           np.bincount(xb.astype(int), minlength=m))
                    stat_values.append(res.statistic)
                    p_values.append(res.p_value)
                else:
                    res = ks_two_sample(xa, xb)
                    stat_values.append(res.statistic)
                    p_values.append(res.p_value)
            n_ok = sum(1 for p in p_values if p > level)
            reports.append(TestReport(
                diagram_id=diagram_id,
                direction=direction,
                statistic=name,
                test_kind="chisq" if is_count else "ks",
                sample_sizes=(n_replicas, n_replicas),
                stat_values=stat_values,
                p_values=p_values,
                seeds=list(range(n_seeds)),
                passed=n_ok >= need_pass,
                level=level,
                runtime=time.time() - t_dir,
            ))

    passed = all(r.passed for r in reports)
    params = {
        "alpha": a, "delta": d, "theta": theta,
        "zeta": zeta.describe() if zeta is not None else None,
        "n_replicas": n_replicas, "n_atoms": n_atoms,
        "level": level, "n_seeds": n_seeds, "pass_fraction": pass_fraction,
        "stats": [st.name for st in wanted] if diagram_id != "recursion" else ["value"],
        "seed": s.seed, "stream_id": s.stream_id,
    }
    return DualityReport(diagram_id, params, reports, passed,
                         negative_control=negative_control,
                         runtime=time.time() - t_start)


# -- closed-form identity checks ---------------------------------------------------

def check_laplace_identity(alpha, delta, zeta_value: float, y: float,
                           omega1: float, omega2: float, n_samples: int,
                           s: SeedStream) -> TestReport:
    """Joint transform of the nested subordinator pair against the closed form.

    Draws V = tau_fine(zeta), splits tau_coarse over [0, V*y] and
    [V*y, V] by independent increments, and compares the empirical -log
    joint transform with zeta*((y(1+w1+w2)**a + (1-y)(1+w1)**a)**d - 1).
    """
    t0 = time.time()
    a = alpha_value(alpha)
    d = alpha_value(delta)
    if not (zeta_value > 0):
        raise ConfigError("the identity is conditional on a positive zeta value")
    if not (0.0 < y <= 1.0):
        raise ConfigError("y must lie in (0, 1]")
    if omega1 < 0 or omega2 < 0:
        raise ConfigError("transform points must be nonnegative")
    rng = s.generator()
    closed = zeta_value * ((y * (1.0 + omega1 + omega2) ** a
                            + (1.0 - y) * (1.0 + omega1) ** a) ** d - 1.0)
    if omega1 == 0.0 and omega2 == 0.0:
        return TestReport("laplace_identity", "identity", "joint_laplace", "z", (0, 0),
                          [0.0], [1.0], [s.stream_id], True, 0.0027,
                          runtime=time.time() - t0, note="degenerate transform point")
    v = tilted_stable_draws(d, np.full(n_samples, float(zeta_value)), rng)
    part_a = tilted_stable_draws(a, v * y, rng)
    x1 = part_a if y >= 1.0 else part_a + tilted_stable_draws(a, v * (1.0 - y), rng)
    vals = np.exp(-omega1 * x1 - omega2 * part_a)
    emp = -math.log(vals.mean())
    se = bootstrap_se_neglog_mean(vals, rng)
    z = (emp - closed) / se if se > 0 else 0.0
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return TestReport("laplace_identity", "identity", "joint_laplace", "z",
                      (n_samples, 0), [z], [p], [s.stream_id], abs(z) <= 3.0, 0.0027,
                      runtime=time.time() - t0,
                      note=f"empirical={emp:.6g} closed={closed:.6g} se={se:.2g}")


def check_vershik_moment(alpha, delta, levels, breakpoints, n_samples: int,
                         s: SeedStream, n_sticks: int = 1000) -> TestReport:
    """Moment identity for a step functional of the fragmenting sequence.

    With M = sum g(U_k) P_k over the row law, compares the empirical
    E[(1+M)**(alpha*delta)] with (sum len_i (1+level_i)**alpha)**delta.
    """
    t0 = time.time()
    a = alpha_value(alpha)
    d = alpha_value(delta)
    lv = np.asarray(levels, dtype=float)
    bp = np.asarray(breakpoints, dtype=float)
    if lv.size != bp.size + 1 or np.any(lv < 0):
        raise ConfigError("need nonnegative levels with len(levels) == len(breakpoints)+1")
    if bp.size and (np.any(np.diff(bp) <= 0) or bp[0] <= 0 or bp[-1] >= 1):
        raise ConfigError("breakpoints must be strictly increasing inside (0, 1)")
    lengths = np.diff(np.concatenate(([0.0], bp, [1.0])))
    closed = float((lengths * (1.0 + lv) ** a).sum() ** d)
    mean_g = float((lengths * lv).sum())

    rng = s.generator()
    vals = np.empty(n_samples)
    chunk = max(1, min(n_samples, 20_000_000 // n_sticks))
    k = np.arange(1, n_sticks + 1, dtype=float)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        w = rng.beta(1.0 - a, -a * d + k * a, size=(m, n_sticks))
        keep = np.cumprod(1.0 - w, axis=1)
        sticks = np.empty_like(w)
        sticks[:, 0] = w[:, 0]
        sticks[:, 1:] = w[:, 1:] * keep[:, :-1]
        g_u = lv[np.searchsorted(bp, rng.random((m, n_sticks)))]
        m_vals = (g_u * sticks).sum(axis=1) + keep[:, -1] * mean_g
        vals[done: done + m] = (1.0 + m_vals) ** (a * d)
        done += m
    emp = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples))
    if abs(emp - closed) <= 1e-12 * max(1.0, abs(closed)):
        z = 0.0  # degenerate step functions make the functional constant
    else:
        z = (emp - closed) / se if se > 0 else math.inf
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return TestReport("vershik_moment", "identity", "step_moment", "z",
                      (n_samples, 0), [z], [p], [s.stream_id], abs(z) <= 3.0, 0.0027,
                      runtime=time.time() - t0,
                      note=f"empirical={emp:.6g} closed={closed:.6g} se={se:.2g}")


def _pkmix_weight(zeta: ZetaSpec, v: float, alpha: float, delta: float, s_grid: np.ndarray):
    """Mixing weight E[exp(-v zeta**(1/(alpha*delta)) s**(1/alpha)) exp(zeta)]
    up to factors constant in s."""
    if zeta.kind == "zero":
        return np.ones_like(s_grid)
    if zeta.kind == "constant":
        return np.exp(-v * zeta.b ** (1.0 / (alpha * delta)) * s_grid ** (1.0 / alpha))
    if zeta.kind == "gamma":
        # integral y**(g-1) exp(-c y**(1/(alpha*delta))) dy  ~  (c)**(-g*alpha*delta)
        return (v * s_grid ** (1.0 / alpha)) ** (-zeta.shape * alpha * delta)
    if zeta.kind == "empirical":
        vals = np.asarray(zeta.values)
        wts = np.asarray(zeta.weights)
        out = np.zeros_like(s_grid)
        for yv, wv in zip(vals, wts):
            out += wv * math.exp(yv) * np.exp(-v * yv ** (1.0 / (alpha * delta))
                                              * s_grid ** (1.0 / alpha))
        return out
    raise ConfigError(f"conditioned tests do not support zeta kind {zeta.kind!r}")


def _sample_pkmix_totals(zeta: ZetaSpec, v: float, alpha: float, delta: float,
                         n: int, rng) -> np.ndarray:
    """Inverse-CDF draws of the fine total under the conditioned mixing law."""
    tab = tables.stable_density_table(delta)
    s_grid = np.exp(np.linspace(math.log(tab.t_left * 0.8), math.log(1e6), 6000))
    log_dens = tab.log_density(s_grid) + np.log(
        np.maximum(_pkmix_weight(zeta, v, alpha, delta, s_grid), 1e-300)) + np.log(s_grid)
    log_dens -= log_dens.max()
    dens = np.exp(log_dens)
    panel = 0.5 * (dens[1:] + dens[:-1]) * np.diff(np.log(s_grid))
    cdf = np.concatenate(([0.0], np.cumsum(panel)))
    if not cdf[-1] > 0:
        raise NumericError("conditioned mixing density failed to normalize", v=v)
    cdf /= cdf[-1]
    u = rng.random(n)
    pos = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, panel.size - 1)
    frac = (u - cdf[pos]) / np.maximum(cdf[pos + 1] - cdf[pos], 1e-300)
    logs = np.log(s_grid)
    return np.exp(logs[pos] + frac * (logs[pos + 1] - logs[pos]))


def check_conditional_coag(alpha, delta, zeta: ZetaSpec, n_samples: int, s: SeedStream,
                           v_center: float = None, v_halfwidth: float = 0.1,
                           n_atoms: int = 2000, accept_floor: float = 0.02,
                           n_eff_min: int = 5000) -> TestReport:
    """Conditioned interval law of the composed coagulation.

    Bins joint samples on the coarse total and compares the largest
    inner-interval length inside the window against the same statistic
    from totals drawn from the numerically normalized conditioned mixing
    density followed by the conditioned-frequency sampler.
    """
    t0 = time.time()
    a = alpha_value(alpha)
    d = alpha_value(delta)
    rng = s.generator()

    def joint(n):
        t2 = np.empty(n)
        p1 = np.empty(n)
        for i in range(n):
            z = float(zeta.draw(rng))
            if z <= 0:
                raise ConfigError("conditioned tests need a positive mixing draw")
            inner = gg_jump_series(d, z, n_atoms, rng)
            tot = inner.total
            p1[i] = inner.jumps[0] / tot
            t2[i] = _tilted_one(a, tot, rng) / tot ** (1.0 / a)
        return t2, p1

    pilot_t2, _ = joint(2000)
    vc = float(np.median(pilot_t2)) if v_center is None else float(v_center)
    lo, hi = vc * (1.0 - v_halfwidth), vc * (1.0 + v_halfwidth)
    acc = float(((pilot_t2 >= lo) & (pilot_t2 <= hi)).mean())
    if acc < accept_floor:
        raise ConfigError(
            f"window acceptance {acc:.3f} below floor {accept_floor}; widen the window")

    kept = []
    drawn = 0
    while len(kept) < n_eff_min and drawn < n_samples:
        batch = min(5000, n_samples - drawn)
        t2, p1 = joint(batch)
        kept.extend(p1[(t2 >= lo) & (t2 <= hi)].tolist())
        drawn += batch
    if len(kept) < min(n_eff_min, int(0.5 * acc * n_samples)):
        raise NumericError("window acceptance collapsed during sampling",
                           accepted=len(kept), drawn=drawn)
    n_eff = len(kept)

    totals = _sample_pkmix_totals(zeta, vc, a, d, n_eff, rng)
    ref = np.array([pd_conditional_p1(d, t, rng) for t in totals])
    res = ks_two_sample(np.asarray(kept), ref)
    return TestReport("conditional_coag", "conditioned", "largest_interval", "ks",
                      (n_eff, n_eff), [res.statistic], [res.p_value], [s.stream_id],
                      res.p_value > 0.01, 0.01, runtime=time.time() - t0,
                      note=f"window center={vc:.4g} halfwidth={v_halfwidth:.0%} "
                           f"acceptance={acc:.3f}")


def check_conditional_independence(alpha, delta, zeta: ZetaSpec, n_samples: int,
                                   s: SeedStream, s_center: float = None,
                                   s_halfwidth: float = 0.1, n_atoms: int = 2000,
                                   accept_floor: float = 0.02) -> list:
    """Conditional independence and conditional law given the fine total.

    Returns three reports: the in-window fine-side largest frequency against
    the conditioned-frequency sampler at the window center (KS), the
    in-window correlation between the two bridges' largest frequencies
    (consistent with zero), and the unconditioned correlation (a negative
    control expected to register dependence).
    """
    t0 = time.time()
    a = alpha_value(alpha)
    d = alpha_value(delta)
    rng = s.generator()

    t1s = np.empty(n_samples)
    p1_inner = np.empty(n_samples)
    p1_outer = np.empty(n_samples)
    for i in range(n_samples):
        z = float(zeta.draw(rng))
        if z <= 0:
            raise ConfigError("conditioned tests need a positive mixing draw")
        inner = gg_jump_series(d, z, n_atoms, rng)
        tot = inner.total
        t1s[i] = tot / z ** (1.0 / d)
        p1_inner[i] = inner.jumps[0] / tot
        outer = gg_jump_series(a, tot, n_atoms, rng)
        p1_outer[i] = outer.jumps[0] / outer.total

    sc = float(np.median(t1s)) if s_center is None else float(s_center)
    lo, hi = sc * (1.0 - s_halfwidth), sc * (1.0 + s_halfwidth)
    win = (t1s >= lo) & (t1s <= hi)
    n_win = int(win.sum())
    if n_win < accept_floor * n_samples:
        raise ConfigError(f"window captured only {n_win} of {n_samples} samples")

    ref = np.array([pd_conditional_p1(d, sc, rng) for _ in range(n_win)])
    ks = ks_two_sample(p1_inner[win], ref)
    rep_law = TestReport("conditional_independence", "conditioned", "window_freq_law", "ks",
                         (n_win, n_win), [ks.statistic], [ks.p_value], [s.stream_id],
                         ks.p_value > 0.01, 0.01, runtime=time.time() - t0,
                         note=f"window center={sc:.4g} halfwidth={s_halfwidth:.0%}")

    def corr_z(x, y):
        r = float(np.corrcoef(x, y)[0, 1])
        return r, r * math.sqrt(len(x))  # Fisher z ~ r*sqrt(n) for small r

    r_w, z_w = corr_z(p1_inner[win], p1_outer[win])
    p_w = math.erfc(abs(z_w) / math.sqrt(2.0))
    rep_ind = TestReport("conditional_independence", "conditioned", "window_correlation", "z",
                         (n_win, n_win), [z_w], [p_w], [s.stream_id], abs(z_w) <= 3.0, 0.0027,
                         runtime=time.time() - t0, note=f"in-window corr={r_w:.4f}")

    r_f, z_f = corr_z(p1_inner, p1_outer)
    p_f = math.erfc(abs(z_f) / math.sqrt(2.0))
    rep_dep = TestReport("conditional_independence", "negative_control",
                         "unconditional_dependence", "z", (n_samples, n_samples),
                         [z_f], [p_f], [s.stream_id], abs(z_f) > 3.0, 0.0027,
                         runtime=time.time() - t0,
                         note=f"full-sample corr={r_f:.4f} (dependence expected)")
    return [rep_law, rep_ind, rep_dep]

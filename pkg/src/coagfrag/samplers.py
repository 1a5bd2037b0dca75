"""Seeded random generation of all stochastic building blocks.

Covers positive stable and tilted-stable variables, generalized-gamma
subordinator jump series, stick-breaking sequences, frequencies of the
stable law conditioned on its total mass, mixing-variable draws, and
size-biased picks.  Public operations draw from a SeedStream; the
``*_draws`` helpers are vectorized equivalents used by the verification
harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from . import fastpick, tables
from .errors import DomainError, NumericError
from .partitions import MassPartition, rank_desc
from .rng import SeedStream
from .specfun import alpha_value, log_zolotarev_a

__all__ = [
    "ZetaSpec",
    "JumpSeries",
    "sample_stable",
    "sample_tilted_stable",
    "sample_gg_jumps",
    "sample_pa_zeta",
    "sample_pd_stickbreak",
    "sample_pd_conditional",
    "size_biased_pick",
    "sample_zeta",
    "sample_dgm_s1",
    "stable_draws",
    "tilted_stable_draws",
]

# naive accept-with-exp(-x) rejection has rate exp(-t); beyond this the
# double-rejection sampler wins
TILT_SWITCH = 2.0
_MAX_ROUNDS = 400


# -- mixing variable -----------------------------------------------------------

@dataclass(frozen=True)
class ZetaSpec:
    """Distribution of the nonnegative mixing variable.

    Kinds: ``zero`` (degenerate at 0), ``constant`` (degenerate at b > 0),
    ``gamma`` (shape > 0, unit scale), ``empirical`` (finite table), and
    ``plus_gamma`` (an independent gamma variable added to another spec,
    as needed by the additive-duality side laws).
    """

    kind: str
    b: float = 0.0
    shape: float = 0.0
    values: tuple = ()
    weights: tuple = ()
    inner: "ZetaSpec | None" = None

    def __post_init__(self):
        if self.kind == "zero":
            pass
        elif self.kind == "constant":
            if not self.b > 0:
                raise DomainError("constant zeta requires b > 0")
        elif self.kind == "gamma":
            if not self.shape > 0:
                raise DomainError("gamma zeta requires shape > 0")
        elif self.kind == "empirical":
            v = np.asarray(self.values, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if v.size == 0 or v.shape != w.shape:
                raise DomainError("empirical zeta needs matching values/weights")
            if np.any(v < 0) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
                raise DomainError("empirical zeta needs nonnegative values, weights summing to 1")
        elif self.kind == "plus_gamma":
            if self.inner is None or not self.shape > 0:
                raise DomainError("plus_gamma zeta needs an inner spec and shape > 0")
        else:
            raise DomainError(f"unknown zeta kind {self.kind!r}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, b: float):
        return cls("constant", b=float(b))

    @classmethod
    def gamma(cls, shape: float):
        return cls("gamma", shape=float(shape))

    @classmethod
    def empirical(cls, values, weights):
        return cls("empirical", values=tuple(float(v) for v in values),
                   weights=tuple(float(w) for w in weights))

    def plus_gamma(self, extra_shape: float) -> "ZetaSpec":
        """Law of (this variable) + an independent gamma(extra_shape)."""
        return ZetaSpec("plus_gamma", shape=float(extra_shape), inner=self)

    def draw(self, rng: np.random.Generator, size=None):
        if self.kind == "zero":
            return 0.0 if size is None else np.zeros(size)
        if self.kind == "constant":
            return self.b if size is None else np.full(size, self.b)
        if self.kind == "gamma":
            return rng.gamma(self.shape, size=size)
        if self.kind == "empirical":
            v = np.asarray(self.values)
            idx = rng.choice(v.size, size=size, p=np.asarray(self.weights))
            return float(v[idx]) if size is None else v[idx]
        # plus_gamma
        base = self.inner.draw(rng, size=size)
        return base + rng.gamma(self.shape, size=size)

    def describe(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "constant":
            return f"const:{self.b:g}"
        if self.kind == "gamma":
            return f"gamma:{self.shape:g}"
        if self.kind == "empirical":
            pairs = ";".join(f"{v:g},{w:g}" for v, w in zip(self.values, self.weights))
            return f"empirical:{pairs}"
        return f"{self.inner.describe()}+gamma:{self.shape:g}"


def sample_zeta(zeta: ZetaSpec, s: SeedStream) -> float:
    """One draw of the mixing variable."""
    return float(zeta.draw(s.generator()))


# -- positive stable -----------------------------------------------------------

def stable_draws(alpha, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws of the positive stable law with transform exp(-omega**alpha).

    Angle method: T = (A(U) / E)**((1-alpha)/alpha) with U uniform on
    (0, pi), E unit exponential, and A the angle kernel of the density's
    integral representation.
    """
    a = alpha_value(alpha)
    u = rng.random(n) * math.pi
    e = rng.standard_exponential(n)
    log_a = log_zolotarev_a(u, a)
    return np.exp((1.0 - a) / a * (log_a - np.log(e)))


def sample_stable(alpha, s: SeedStream) -> float:
    """One positive stable draw T with E[exp(-omega T)] = exp(-omega**alpha)."""
    return float(stable_draws(alpha, 1, s.generator())[0])


# -- exponentially tilted stable ------------------------------------------------

def _tilted_naive(alpha: float, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rejection from the raw stable proposal, acceptance factor exp(-x)."""
    n = t.size
    out = np.empty(n)
    pending = np.arange(n)
    scale = t ** (1.0 / alpha)
    for _ in range(_MAX_ROUNDS):
        if pending.size == 0:
            return out
        prop = scale[pending] * stable_draws(alpha, pending.size, rng)
        accept = rng.random(pending.size) < np.exp(-prop)
        out[pending[accept]] = prop[accept]
        pending = pending[~accept]
    raise NumericError(
        "naive tilted-stable rejection budget exhausted",
        t=float(t[pending[0]]),
        acceptance_estimate=float(np.exp(-t[pending[0]])),
    )


def _sinc(x):
    return np.sinc(np.asarray(x) / math.pi)


def _devroye_tilted(alpha: float, lam: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Double-rejection sampler for the stable density tilted by exp(-lam*x).

    Returns draws with E[exp(-omega X)] = exp(-((lam+omega)**alpha - lam**alpha)).
    The expected number of rejection rounds is uniformly bounded in lam,
    which is what makes large subordinator times affordable.
    """
    a = alpha
    b = (1.0 - a) / a
    n = lam.size
    out = np.empty(n)
    pending = np.arange(n)

    lam_alpha_all = lam**a
    gamma_all = lam_alpha_all * a * (1.0 - a)

    c1 = math.sqrt(math.pi / 2.0)
    c2 = 2.0 + c1

    for _ in range(_MAX_ROUNDS):
        if pending.size == 0:
            return out
        m_pend = pending.size
        lam_alpha = lam_alpha_all[pending]
        gamma = gamma_all[pending]
        sqrt_gamma = np.sqrt(gamma)
        c3 = c2 * sqrt_gamma
        xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
        with np.errstate(over="ignore", under="ignore"):
            psi = c3 * np.exp(-gamma * math.pi * math.pi / 8.0) / math.sqrt(math.pi)

        # first stage: propose the angle U and the uniform Z, repeat until
        # U < pi and Z <= 1
        U = np.empty(m_pend)
        Z = np.empty(m_pend)
        z = np.empty(m_pend)
        stage1 = np.arange(m_pend)
        for _ in range(_MAX_ROUNDS):
            if stage1.size == 0:
                break
            k = stage1.size
            g1 = gamma[stage1]
            sg1 = sqrt_gamma[stage1]
            xi1 = xi[stage1]
            psi1 = psi[stage1]
            la1 = lam_alpha[stage1]

            w1 = c1 * xi1 / sg1
            w2 = 2.0 * math.sqrt(math.pi) * psi1
            w3 = xi1 * math.pi
            V = rng.random(k)
            W = rng.random(k)
            Nabs = np.abs(rng.standard_normal(k))
            big = g1 >= 1.0
            u_cand = np.where(
                big,
                np.where(V < w1 / (w1 + w2), Nabs / sg1, math.pi * (1.0 - W * W)),
                np.where(V < w3 / (w2 + w3), math.pi * W, math.pi * (1.0 - W * W)),
            )
            in_range = (u_cand > 0.0) & (u_cand < math.pi)
            u_safe = np.clip(u_cand, 1e-12, math.pi - 1e-12)
            zeta = np.sqrt(
                _sinc(u_safe) / (_sinc(a * u_safe) ** a * _sinc((1.0 - a) * u_safe) ** (1.0 - a))
            )
            with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
                z_cand = 1.0 / (1.0 - (1.0 + a * zeta / sg1) ** (-1.0 / a))
                rho = math.pi * np.exp(-la1 * (1.0 - 1.0 / (zeta * zeta))) / (
                    (1.0 + c1) * sg1 / zeta + z_cand
                )
                d = np.where(big, xi1 * np.exp(-g1 * u_cand * u_cand / 2.0), xi1)
                d = d + psi1 / np.sqrt(np.maximum(math.pi - u_cand, 1e-300))
                rho = rho * d
            z_draw = rng.random(k) * rho
            ok = in_range & (z_draw <= 1.0) & np.isfinite(z_draw) & np.isfinite(z_cand)
            tgt = stage1[ok]
            U[tgt] = u_cand[ok]
            Z[tgt] = z_draw[ok]
            z[tgt] = z_cand[ok]
            stage1 = stage1[~ok]
        if stage1.size:
            raise NumericError("tilted-stable first-stage rejection stalled",
                               lam=float(lam[pending[stage1[0]]]))

        # second stage: piecewise proposal for X = S**(-alpha/(1-alpha))
        log_a_u = (
            a * np.log(a * _sinc(a * U))
            + (1.0 - a) * np.log((1.0 - a) * _sinc((1.0 - a) * U))
            - np.log(_sinc(U))
        )
        a_u = np.exp(log_a_u / (1.0 - a))
        m = (b / a_u) ** a * lam_alpha
        delta = np.sqrt(m * a / a_u)
        a1 = delta * c1
        a3 = z / a_u
        ssum = a1 + delta + a3
        V2 = rng.random(m_pend)
        Nvar = rng.standard_normal(m_pend)
        E1 = rng.standard_exponential(m_pend)
        U2 = rng.random(m_pend)

        X = np.where(
            V2 < a1 / ssum,
            m - delta * np.abs(Nvar),
            np.where(V2 < (a1 + delta) / ssum, m + delta * U2, m + delta + E1 * a3),
        )
        left = V2 < a1 / ssum
        right = V2 >= (a1 + delta) / ssum

        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            E2 = -np.log(Z)
            cval = a_u * (X - m) + np.exp(np.log(lam_alpha) / a - b * np.log(m)) * (
                (m / X) ** b - 1.0
            )
            cval = cval - np.where(left, Nvar * Nvar / 2.0, 0.0) - np.where(right, E1, 0.0)
            ok2 = (X >= 0.0) & np.isfinite(cval) & (cval <= E2)
            result = np.where(X > 0.0, X ** (-b), np.inf)
        good = ok2 & np.isfinite(result)
        out[pending[good]] = result[good]
        pending = pending[~good]
    raise NumericError("tilted-stable double rejection budget exhausted",
                       lam=float(lam[pending[0]]))


def tilted_stable_draws(alpha, t, rng: np.random.Generator) -> np.ndarray:
    """Vector of tau_alpha(t_i) draws: E[exp(-omega X_i)] = exp(-t_i((1+omega)**alpha - 1)).

    The subordinator marginal at time t is t**(1/alpha) times a stable
    variable tilted by lam = t**(1/alpha); small times use the plain
    rejection, larger ones the double-rejection sampler.
    """
    a = alpha_value(alpha)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts <= 0):
        raise DomainError("subordinator time must be positive")
    out = np.empty(ts.size)
    small = ts <= TILT_SWITCH
    if np.any(small):
        out[small] = _tilted_naive(a, ts[small], rng)
    if np.any(~small):
        big_t = ts[~small]
        lam = big_t ** (1.0 / a)
        out[~small] = lam * _devroye_tilted(a, lam, rng)
    return out


def sample_tilted_stable(alpha, t, s: SeedStream) -> float:
    """One draw of the generalized-gamma subordinator at time t."""
    return float(tilted_stable_draws(alpha, float(t), s.generator())[0])


# -- jump series ----------------------------------------------------------------

@dataclass(frozen=True)
class JumpSeries:
    """Largest jumps of a subordinator over [0, elapsed_time], ranked
    decreasing, with an upper estimate of the expected un-sampled mass."""

    jumps: np.ndarray
    elapsed_time: float
    tail_mass_bound: float

    def __post_init__(self):
        j = np.asarray(self.jumps, dtype=float)
        if j.size and (np.any(j <= 0) or np.any(np.diff(j) > 0)):
            raise DomainError("jumps must be positive and ranked nonincreasing")
        if self.tail_mass_bound < 0:
            raise DomainError("tail_mass_bound must be nonnegative")
        j.setflags(write=False)
        object.__setattr__(self, "jumps", j)

    @property
    def total(self) -> float:
        """Best estimate of the subordinator value: sampled jumps plus
        the expected mass of the un-sampled tail."""
        return float(self.jumps.sum() + self.tail_mass_bound)


def gg_jump_series(alpha: float, time: float, n_atoms: int, rng: np.random.Generator) -> JumpSeries:
    a = alpha_value(alpha)
    if not time > 0:
        raise DomainError("subordinator time must be positive")
    if n_atoms < 1:
        raise DomainError("need at least one atom")
    arrivals = np.cumsum(rng.standard_exponential(n_atoms))
    jumps = tables.gg_tail_inverse_table(a).inverse(arrivals / time)
    jumps = np.minimum.accumulate(jumps)  # guard interpolation rounding
    # expected mass below the smallest sampled jump:
    # time * integral_0^J u * levy_density(u) du = time * alpha * P(1-alpha, J)
    tail = time * a * sp.gammainc(1.0 - a, jumps[-1])
    return JumpSeries(jumps, float(time), float(tail))


def stable_jump_series(alpha: float, n_atoms: int, rng: np.random.Generator) -> JumpSeries:
    """Ranked jumps of the plain stable subordinator at time 1 (the
    zero-mixing route: normalized, these are the PD(alpha, 0) frequencies)."""
    a = alpha_value(alpha)
    if n_atoms < 1:
        raise DomainError("need at least one atom")
    arrivals = np.cumsum(rng.standard_exponential(n_atoms))
    jumps = np.exp(-(np.log(arrivals) + sp.gammaln(1.0 - a)) / a)
    tail = a / math.gamma(1.0 - a) * jumps[-1] ** (1.0 - a) / (1.0 - a)
    return JumpSeries(jumps, 1.0, float(tail))


def sample_gg_jumps(alpha, time: float, n_atoms: int, s: SeedStream) -> JumpSeries:
    """The n_atoms largest jumps of the generalized-gamma subordinator over
    [0, time], via unit-rate Poisson arrivals through the Levy-tail inverse."""
    return gg_jump_series(alpha_value(alpha), float(time), int(n_atoms), s.generator())


def _normalized_partition(series: JumpSeries) -> MassPartition:
    total = series.total
    return MassPartition(series.jumps / total, series.tail_mass_bound / total)


def gg_mass_partition(alpha: float, time: float, n_atoms: int, rng: np.random.Generator) -> MassPartition:
    """Normalized jump series; time == 0 falls back to the stable route."""
    if time == 0.0:
        return _normalized_partition(stable_jump_series(alpha, n_atoms, rng))
    return _normalized_partition(gg_jump_series(alpha, time, n_atoms, rng))


def sample_pa_zeta(alpha, zeta: ZetaSpec, n_atoms: int, s: SeedStream) -> MassPartition:
    """Ranked frequencies of the stable Poisson-Kingman family driven by the
    generalized-gamma subordinator with mixing variable ``zeta``.

    Draws z, normalizes the jump series over [0, z], and records the tail
    bound as the dust estimate; z == 0 uses normalized plain-stable jumps.
    """
    rng = s.generator()
    z = float(zeta.draw(rng))
    return gg_mass_partition(alpha_value(alpha), z, int(n_atoms), rng)


# -- stick breaking -------------------------------------------------------------

def pd_sticks(alpha: float, theta: float, n_sticks: int, rng: np.random.Generator):
    """Unranked stick-breaking frequencies of PD(alpha, theta) plus leftover."""
    a, th = float(alpha), float(theta)
    if not (0.0 <= a < 1.0) or th <= -a:
        raise DomainError("stick breaking requires 0 <= alpha < 1 and theta > -alpha")
    k = np.arange(1, n_sticks + 1, dtype=float)
    w = rng.beta(1.0 - a, th + k * a)
    keep = np.concatenate(([1.0], np.cumprod(1.0 - w)[:-1]))
    freqs = w * keep
    leftover = float(keep[-1] * (1.0 - w[-1]))
    return freqs, leftover


def sample_pd_stickbreak(alpha: float, theta: float, n_sticks: int, s: SeedStream) -> MassPartition:
    """Ranked PD(alpha, theta) frequencies from residual beta sticks, with
    the un-broken leftover recorded as the dust estimate."""
    freqs, leftover = pd_sticks(alpha, theta, int(n_sticks), s.generator())
    return MassPartition(rank_desc(freqs), leftover)


# -- conditional-total frequencies ----------------------------------------------

class ConditionalPickSampler:
    """Sequential size-biased frequency sampler for the stable law
    conditioned on its total mass.

    Given total t, the first size-biased fraction has density on (0, 1)

        f(q | t) = (alpha / Gamma(1-alpha)) t**-alpha q**-alpha
                   f_alpha((1-q) t) / f_alpha(t),

    the Palm formula for a size-biased jump of the conditioned
    subordinator; removing the pick leaves the same law with total
    (1-q) t, which is what makes the recursion exact.  Sampling is by
    inverse CDF in the variable v = (t - s)**(1-alpha), s = (1-q) t,
    where the density is bounded; the grid unions a linear piece
    (resolving q near 0) with a logarithmic piece (resolving s near 0,
    which carries the mass when t is large).
    """

    def __init__(self, alpha, n_linear: int = 160, n_log: int = 200):
        self.alpha = alpha_value(alpha)
        self.table = tables.stable_density_table(self.alpha)
        w_lin = np.linspace(0.0, 1.0, n_linear + 1)
        w_log = np.exp(np.linspace(math.log(1e-16), math.log(0.98), n_log))
        w = np.unique(np.concatenate((w_lin, 1.0 - w_log)))
        self._w = w
        self._widths = np.diff(w)
        # in the w coordinate, s = t * (1 - w**(1/(1-alpha))) and q = w**(1/(1-alpha)),
        # so the grid geometry is independent of t
        self._q_grid = w ** (1.0 / (1.0 - self.alpha))
        self._s_frac = np.clip(1.0 - self._q_grid, 0.0, 1.0)
        self._n_pos = int(np.count_nonzero(self._s_frac > 0.0))

    def pick(self, t: float, rng: np.random.Generator) -> float:
        """One size-biased fraction q given total t."""
        if fastpick.HAVE_NUMBA:
            tab = self.table
            q = fastpick.pick_kernel(
                float(t), rng.random(), self._s_frac, self._w, self._widths,
                self._n_pos, 1.0 / (1.0 - self.alpha),
                tab.knots, tab.coefs, tab.seg1_lo, tab.seg1_step, tab.seg1_n,
                tab.seg2_lo, tab.seg2_step,
                tab.t_left, tab.left_log_amp, tab.left_pow_coef,
                tab.left_exp_coef, tab.left_exp_pow,
            )
            if q < 0.0:
                raise NumericError("conditional pick density vanished", t=t, alpha=self.alpha)
            return q
        return self._pick_numpy(t, rng)

    def _pick_numpy(self, t: float, rng: np.random.Generator) -> float:
        """Reference implementation of ``pick`` (same math, no JIT)."""
        a = self.alpha
        s = t * self._s_frac
        logf = np.empty(s.size)
        logf[self._n_pos :] = -np.inf
        logf[: self._n_pos] = self.table.log_density_desc(s[: self._n_pos])
        peak = logf.max()
        if not np.isfinite(peak):
            raise NumericError("conditional pick density vanished", t=t, alpha=a)
        dens = np.exp(logf - peak)
        panel = 0.5 * (dens[1:] + dens[:-1]) * self._widths
        cdf = np.cumsum(panel)
        u = rng.random() * cdf[-1]
        j = int(np.searchsorted(cdf, u, side="right"))
        j = min(max(j, 0), panel.size - 1)
        # invert the trapezoid shape within the panel (linear density)
        u_rel = u - (cdf[j - 1] if j > 0 else 0.0)
        d0, d1 = dens[j], dens[j + 1]
        h = self._widths[j]
        slope = (d1 - d0) / h if h > 0 else 0.0
        if abs(slope) * h > 1e-9 * max(d0, 1e-300):
            disc = d0 * d0 + 2.0 * slope * u_rel
            x = (math.sqrt(max(disc, 0.0)) - d0) / slope
        else:
            x = u_rel / max(d0, 1e-300)
        w_draw = self._w[j] + min(max(x, 0.0), h)
        q = w_draw ** (1.0 / (1.0 - a))
        return float(min(max(q, 1e-300), 1.0))

    def sequence(self, t: float, n_picks: int, rng: np.random.Generator):
        """n_picks absolute frequencies (size-biased order) plus leftover mass."""
        freqs = np.empty(n_picks)
        remaining = 1.0
        total = t
        for i in range(n_picks):
            q = self.pick(total, rng)
            freqs[i] = q * remaining
            remaining *= 1.0 - q
            total *= 1.0 - q
            if remaining <= 1e-300:
                freqs = freqs[: i + 1]
                remaining = 0.0
                break
        return freqs, remaining


_pick_samplers: dict[float, ConditionalPickSampler] = {}


def conditional_pick_sampler(alpha) -> ConditionalPickSampler:
    a = alpha_value(alpha)
    samp = _pick_samplers.get(a)
    if samp is None:
        samp = _pick_samplers[a] = ConditionalPickSampler(a)
    return samp


def sample_pd_conditional(alpha, t: float, n_freqs: int, s: SeedStream) -> MassPartition:
    """Ranked frequencies of the stable law given total mass t, by
    sequential size-biased sampling; the unpicked remainder is the dust
    estimate.

    Ranked picks smaller than the remainder are dropped into the dust
    bound: every unpicked atom is bounded by the remainder, so only the
    entries above it are guaranteed to be the true largest atoms.
    """
    if not t > 0:
        raise DomainError("conditional total t must be positive")
    sampler = conditional_pick_sampler(alpha)
    freqs, leftover = sampler.sequence(float(t), int(n_freqs), s.generator())
    ranked = rank_desc(freqs)
    keep = ranked >= leftover
    if not keep.all():
        keep[0] = True
        cut = float(ranked[~keep].sum())
        return MassPartition(ranked[keep], leftover + cut)
    return MassPartition(ranked, leftover)


def pd_conditional_p1(alpha, t: float, rng: np.random.Generator, p2: bool = False):
    """Largest (optionally two largest) frequency of the conditioned law.

    Extends the size-biased sequence until the remainder cannot contain a
    larger atom, so the result is exact almost surely.
    """
    sampler = conditional_pick_sampler(alpha)
    best = 0.0
    second = 0.0
    remaining = 1.0
    total = float(t)
    for _ in range(10_000):
        q = sampler.pick(total, rng)
        f = q * remaining
        if f > best:
            best, second = f, best
        elif f > second:
            second = f
        remaining *= 1.0 - q
        total *= 1.0 - q
        bar = second if p2 else best
        if remaining < bar or remaining <= 1e-12:
            break
    return (best, second) if p2 else best


def pd_conditional_labels(alpha, t: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Paint-box classification of n uniforms by the conditioned law.

    Frequencies are laid on the stick in size-biased order (the partition
    law is invariant to atom arrangement) and extended lazily until every
    uniform is covered; uniforms landing in a sub-1e-9 remainder become
    singletons.
    """
    sampler = conditional_pick_sampler(alpha)
    raw = rng.random(n)
    order = np.argsort(raw, kind="stable")
    pts = raw[order]
    sorted_labels = np.empty(n, dtype=np.int64)
    covered = 0.0
    remaining = 1.0
    total = float(t)
    atom = 0
    i = 0
    while i < n and remaining > 1e-9:
        q = sampler.pick(total, rng)
        f = q * remaining
        hi = covered + f
        while i < n and pts[i] < hi:
            sorted_labels[i] = atom
            i += 1
        covered = hi
        remaining *= 1.0 - q
        total *= 1.0 - q
        atom += 1
    while i < n:  # residual mass: distinct tiny atoms, one per point
        sorted_labels[i] = atom
        atom += 1
        i += 1
    labels = np.empty(n, dtype=np.int64)
    labels[order] = sorted_labels
    return labels


# -- size-biased pick -----------------------------------------------------------

def size_biased_pick(p: MassPartition, s: SeedStream):
    """Pick index i with probability p_i / sum(p), returning
    (index, value, remainder-without-that-entry)."""
    total = p.total
    if not total > 0:
        raise DomainError("size-biased pick needs positive total mass")
    rng = s.generator()
    cdf = np.cumsum(p.freqs)
    idx = int(np.searchsorted(cdf, rng.random() * total, side="right"))
    idx = min(idx, p.freqs.size - 1)
    value = float(p.freqs[idx])
    rest = np.delete(p.freqs, idx)
    return idx, value, MassPartition(rest, p.dust_bound)


# -- additive-duality coagulation weight -----------------------------------------

def sample_dgm_s1(alpha, zeta: ZetaSpec, s: SeedStream):
    """Merge weight s1 = B * G / (G + Z) with B ~ beta((1-alpha)/alpha, 1),
    G ~ gamma(1/alpha), Z ~ zeta, all independent.

    Returns (s1, zeta_draw, gamma_draw) so callers can couple the weight
    with a partition built from the same (G, Z) pair.
    """
    a = alpha_value(alpha)
    rng = s.generator()
    bshape = (1.0 - a) / a
    B = rng.beta(bshape, 1.0)
    G = rng.gamma(1.0 / a)
    Z = float(zeta.draw(rng))
    denom = G + Z
    s1 = B * G / denom if denom > 0 else 0.0
    return float(s1), Z, float(G)

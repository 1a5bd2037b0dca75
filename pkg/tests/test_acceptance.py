"""Acceptance gate: every criterion at its stated size and tolerance.

Each test prints one `[PASS]`/`[FAIL]` line (run with ``pytest -s`` to see
them live).  The criteria are property-based Monte Carlo comparisons plus
exact small-n oracles; tolerances are pinned here, not calibrated later.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, stats as sps

from coagfrag import duality as dl
from coagfrag import operators as op
from coagfrag import samplers as sm
from coagfrag import specfun
from coagfrag.partitions import MassPartition, SetPartition, eppf_pd, set_partitions
from coagfrag.rng import SeedStream
from coagfrag.samplers import ZetaSpec
from coagfrag.stats import chisq_two_sample, ks_two_sample


def report(num, desc, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion {num}: {desc} {detail}")
    return ok


def test_criterion_1_joint_laplace_identity():
    grid = []
    for a, d in [(0.6, 0.5), (0.7, 0.4), (0.4, 0.7)]:
        for z in (0.7, 1.5):
            for y, w1, w2 in [(0.3, 0.5, 1.0), (0.75, 1.2, 0.4)]:
                grid.append((a, d, z, y, w1, w2))
    assert len(grid) == 12
    ok = True
    details = []
    for i, (a, d, z, y, w1, w2) in enumerate(grid):
        rep = dl.check_laplace_identity(a, d, z, y, w1, w2, 200_000, SeedStream(101, i))
        ok &= rep.passed and rep.runtime <= 60.0
        details.append(f"z{i}={rep.stat_values[0]:+.2f}")
    assert report(1, "joint Laplace transform matches closed form on 12-point grid",
                  ok, " ".join(details))


def test_criterion_2_step_moment_identity():
    rng = SeedStream(202, 0).generator()
    steps = []
    for _ in range(5):
        levels = rng.uniform(0.1, 2.5, size=3)
        bps = np.sort(rng.uniform(0.1, 0.9, size=2))
        while bps[1] - bps[0] < 0.05:
            bps = np.sort(rng.uniform(0.1, 0.9, size=2))
        steps.append((levels.tolist(), bps.tolist()))
    ok = True
    zs = []
    for j, (a, d) in enumerate([(0.6, 0.5), (0.7, 0.4)]):
        for i, (levels, bps) in enumerate(steps):
            rep = dl.check_vershik_moment(a, d, levels, bps, 200_000,
                                          SeedStream(202, 10 + 10 * j + i), n_sticks=800)
            ok &= rep.passed
            zs.append(f"{rep.stat_values[0]:+.2f}")
    assert report(2, "step-functional moment identity, 5 random steps x 2 parameter pairs",
                  ok, "z=" + ",".join(zs))


def test_criterion_3_bridge_composition():
    a, d = 0.6, 0.5
    zeta = ZetaSpec.constant(1.0)
    n_rep, n_atoms, n_seeds = 20_000, 2000, 5
    ys = (0.25, 0.5, 0.75)
    passes = {y: 0 for y in ys}
    for seed in range(n_seeds):
        rng_a = SeedStream(303, 2 * seed).generator()
        rng_b = SeedStream(303, 2 * seed + 1).generator()
        vals_a = {y: np.empty(n_rep) for y in ys}
        vals_b = {y: np.empty(n_rep) for y in ys}
        for i in range(n_rep):
            z = 1.0
            inner = sm.gg_jump_series(d, z, n_atoms, rng_a)
            fi = inner.jumps / inner.total
            di = 1.0 - fi.sum()
            fo = dl._gg_freqs(a, inner.total, n_atoms, rng_a)
            do = 1.0 - fo.sum()
            u_in = rng_a.random(fi.size)
            u_out = rng_a.random(fo.size)
            direct = dl._gg_freqs(a * d, z, n_atoms, rng_b)
            dd = 1.0 - direct.sum()
            u_dir = rng_b.random(direct.size)
            for y in ys:
                v = di * y + fi[u_in <= y].sum()
                vals_a[y][i] = do * v + fo[u_out <= v].sum()
                vals_b[y][i] = dd * y + direct[u_dir <= y].sum()
        for y in ys:
            if ks_two_sample(vals_a[y], vals_b[y]).p_value > 0.01:
                passes[y] += 1
    ok = all(passes[y] >= 4 for y in ys)
    assert report(3, "composed bridge equals product-index bridge at y=0.25/0.5/0.75",
                  ok, f"seed passes {passes}")


DIAGRAM_CONFIGS = [
    ("pitman_pd", dict(alpha=0.6, delta=0.5, theta=1.0)),
    ("dgm_pd", dict(alpha=0.5, theta=0.5)),
    ("pitman_general", dict(alpha=0.6, delta=0.5, zeta=ZetaSpec.constant(1.0))),
    ("dgm_general", dict(alpha=0.5, zeta=ZetaSpec.zero())),
]


@pytest.mark.parametrize("diagram,kw", DIAGRAM_CONFIGS, ids=[c[0] for c in DIAGRAM_CONFIGS])
def test_criterion_4_duality_diagrams(diagram, kw):
    stream_id = [c[0] for c in DIAGRAM_CONFIGS].index(diagram)
    rep = dl.run_duality(diagram, n_replicas=20_000, n_atoms=2000, n_seeds=5,
                         level=0.01, s=SeedStream(404, stream_id), **kw)
    detail = "; ".join(
        f"{r.direction}/{r.statistic}:{sum(1 for p in r.p_values if p > 0.01)}/5"
        for r in rep.reports)
    assert report(4, f"duality diagram {diagram} full panel", rep.passed, detail)


NEGATIVE_CASES = [
    ("pitman_pd", "frag_wrong_theta", dict(alpha=0.6, delta=0.5, theta=1.0)),
    ("dgm_pd", "coag_wrong_beta", dict(alpha=0.5, theta=0.5)),
    ("pitman_general", "uncoupled_zeta", dict(alpha=0.6, delta=0.5, zeta=ZetaSpec.constant(1.0))),
    ("dgm_general", "uncoupled_s1", dict(alpha=0.5, zeta=ZetaSpec.constant(1.0))),
]


@pytest.mark.parametrize("diagram,nc,kw", NEGATIVE_CASES, ids=[f"{c[0]}-{c[1]}" for c in NEGATIVE_CASES])
def test_criterion_4_negative_controls(diagram, nc, kw):
    stream_id = [c[1] for c in NEGATIVE_CASES].index(nc)
    rep = dl.run_duality(diagram, n_replicas=8000, n_atoms=1000, n_seeds=3,
                         level=0.01, s=SeedStream(405, stream_id),
                         negative_control=nc, **kw)
    assert report(4, f"negative control {diagram}/{nc} must fail", not rep.passed)


def test_criterion_5_three_step_scheme():
    a, d = 0.6, 0.5
    zeta = ZetaSpec.constant(1.0)
    n_rep = 200_000
    base = SeedStream(505, 0)
    counts_a, counts_b = {}, {}
    for i in range(n_rep):
        sp = op.three_step_partition(a, d, zeta, 5, base.substream(i))
        key = sp.shape_key()
        counts_a[key] = counts_a.get(key, 0) + 1
        st = base.substream(10_000_000 + i)
        freqs = sm.sample_pa_zeta(a * d, zeta, 400, st).freqs
        lab = op._classify_by_masses(freqs, 5, st.substream(1).generator())
        key = SetPartition.from_labels(lab).shape_key()
        counts_b[key] = counts_b.get(key, 0) + 1
    keys = sorted(set(counts_a) | set(counts_b))
    ca = np.array([counts_a.get(k, 0) for k in keys], dtype=float)
    cb = np.array([counts_b.get(k, 0) for k in keys], dtype=float)
    res = chisq_two_sample(ca, cb)
    ok = res.p_value > 0.01 and len(keys) == 52

    # gamma-mixing case: block counts against the exact seating oracle
    th = 0.9
    zeta_g = ZetaSpec.gamma(th / (a * d))
    n_rep2 = 30_000
    counts_k = np.zeros(6)
    base2 = SeedStream(505, 1)
    for i in range(n_rep2):
        sp = op.three_step_partition(a, d, zeta_g, 5, base2.substream(i))
        counts_k[sp.k] += 1
    exact = np.zeros(6)
    for labels in set_partitions(5):
        sizes = np.bincount(np.array(labels))
        exact[len(sizes)] += eppf_pd(a * d, th, sizes.tolist())
    ok_k = True
    zmax = 0.0
    for k in range(1, 6):
        se = math.sqrt(exact[k] * (1 - exact[k]) / n_rep2)
        zval = abs(counts_k[k] / n_rep2 - exact[k]) / se
        zmax = max(zmax, zval)
        ok_k &= zval <= 3.0
    assert report(5, "three-step scheme: 52-shape chi-square and exact block counts",
                  ok and ok_k, f"chi2 p={res.p_value:.4f} cells={len(keys)} max|z|={zmax:.2f}")


def test_criterion_6_structural_distribution():
    configs = [(0.5, ZetaSpec.constant(1.0)), (0.5, ZetaSpec.gamma(2.0)),
               (0.7, ZetaSpec.zero())]
    n, n_seeds = 4000, 5
    ok = True
    details = []
    for ci, (a, zeta) in enumerate(configs):
        n_pass = 0
        for seed in range(n_seeds):
            base = SeedStream(606, 100 * ci + seed)
            sv = np.array([op.structural_sample(a, zeta, base.substream(i))
                           for i in range(n)])
            picks = np.empty(n)
            for i in range(n):
                st = base.substream(1_000_000 + i)
                p = sm.sample_pa_zeta(a, zeta, 2000, st)
                picks[i] = sm.size_biased_pick(p, st.substream(1))[1]
            if ks_two_sample(sv, picks).p_value > 0.01:
                n_pass += 1
        ok &= n_pass >= 4
        details.append(f"cfg{ci}:{n_pass}/5")
    # the zero-mixing case has the closed beta law
    a = 0.7
    base = SeedStream(606, 999)
    sv = np.array([op.structural_sample(a, ZetaSpec.zero(), base.substream(i))
                   for i in range(20_000)])
    ref = sps.beta(1 - a, a)
    ks = sps.kstest(sv, ref.cdf)
    ok_beta = ks.pvalue > 0.01
    assert report(6, "structural law equals size-biased pick law; zero case is beta",
                  ok and ok_beta, " ".join(details) + f" beta-KS p={ks.pvalue:.3f}")


def test_criterion_7_eppf_oracle():
    ok_sum = True
    for n in range(1, 9):
        total = sum(eppf_pd(0.5, 0.5, np.bincount(np.array(lab)).tolist())
                    for lab in set_partitions(n))
        ok_sum &= abs(total - 1.0) <= 1e-12
    # paint-box MC vs the oracle, n <= 5
    from coagfrag.partitions import crp_partition
    ok_mc = True
    worst = 0.0
    for n in (3, 4, 5):
        base = SeedStream(707, n)
        n_rep = 100_000
        counts = {}
        for i in range(n_rep):
            sp = crp_partition(0.5, 0.5, n, base.substream(i).generator())
            counts[sp.shape_key()] = counts.get(sp.shape_key(), 0) + 1
        for lab in set_partitions(n):
            p_exact = eppf_pd(0.5, 0.5, np.bincount(np.array(lab)).tolist())
            se = math.sqrt(p_exact * (1 - p_exact) / n_rep)
            zval = abs(counts.get(lab, 0) / n_rep - p_exact) / se
            worst = max(worst, zval)
            ok_mc &= zval <= 3.0
    assert report(7, "EPPF sums to 1 for n<=8; matches paint-box MC for n<=5",
                  ok_sum and ok_mc, f"max|z|={worst:.2f}")


def test_criterion_8_numeric_kernel():
    ok_closed = True
    worst = 0.0
    for t in np.linspace(0.05, 20.0, 80):
        closed = t ** -1.5 * math.exp(-1 / (4 * t)) / (2 * math.sqrt(math.pi))
        err = abs(specfun.stable_density(0.5, t) - closed)
        worst = max(worst, err)
        ok_closed &= err <= 1e-8
    ok_lt = True
    worst_lt = 0.0
    for a in (0.3, 0.5, 0.7):
        for w in (0.5, 1.0, 2.0):
            val, _ = integrate.quad(
                lambda t: math.exp(-w * t) * specfun.stable_density(a, t),
                0, np.inf, limit=200)
            err = abs(val - math.exp(-(w ** a)))
            worst_lt = max(worst_lt, err)
            ok_lt &= err <= 1e-5
    assert report(8, "stable density closed form (1e-8) and Laplace checks (1e-5)",
                  ok_closed and ok_lt, f"max density err={worst:.1e}, max LT err={worst_lt:.1e}")


def test_criterion_9_conditioned_statements():
    rep_coag = dl.check_conditional_coag(0.6, 0.5, ZetaSpec.constant(1.0),
                                         n_samples=120_000, s=SeedStream(909, 0),
                                         n_atoms=2000, n_eff_min=5000)
    reps = dl.check_conditional_independence(0.6, 0.5, ZetaSpec.constant(1.0),
                                             n_samples=50_000, s=SeedStream(909, 1),
                                             n_atoms=2000)
    law, ind, dep = reps
    ok = rep_coag.passed and law.passed and ind.passed and dep.passed
    assert report(9, "conditioned interval law, in-window independence, dependence control",
                  ok, f"coag p={rep_coag.p_values[0]:.3f} law p={law.p_values[0]:.3f} "
                      f"ind p={ind.p_values[0]:.3f} {dep.note}")

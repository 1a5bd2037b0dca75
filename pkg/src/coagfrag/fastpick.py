"""JIT kernel for the conditional size-biased pick.

The sequential sampler of the conditioned stable frequencies evaluates
the density grid once per pick; this module compiles that inner step
(piecewise-cubic log-density lookup, trapezoid CDF, inverse draw) with
numba.  The pure-numpy fallback in ``samplers`` stays the reference
implementation; results agree to floating-point noise because both
evaluate the same interpolant coefficients.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is normally installed
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


@njit(cache=True)
def _log_density_one(x, knots, coefs, lo1, step1, n1, lo2, step2, n_knots,
                     t_left, log_amp, pow_coef, exp_coef, exp_pow):
    """log f_alpha at one point x > 0 (x in natural scale)."""
    if x < t_left:
        # saddle-point branch
        return log_amp - pow_coef * np.log(x) - exp_coef * x ** exp_pow
    lx = np.log(x)
    last = n_knots - 2
    if lx >= knots[n_knots - 1]:
        j = last  # linear-ish extrapolation on the final cubic panel
    elif lx <= knots[0]:
        j = 0
    elif lx < knots[n1 - 1]:
        j = int((lx - lo1) / step1)
        if j > n1 - 2:
            j = n1 - 2
    elif lx < knots[n1]:
        j = n1 - 1  # seam panel between the two uniform segments
    else:
        j = n1 + int((lx - lo2) / step2)
        if j > last:
            j = last
    dx = lx - knots[j]
    return ((coefs[0, j] * dx + coefs[1, j]) * dx + coefs[2, j]) * dx + coefs[3, j]


@njit(cache=True)
def pick_kernel(t, u, s_frac, w_grid, widths, n_pos, inv_one_minus_alpha,
                knots, coefs, lo1, step1, n1, lo2, step2,
                t_left, log_amp, pow_coef, exp_coef, exp_pow):
    """Draw one size-biased fraction q for conditional total t.

    u is a uniform(0,1) variate supplied by the caller's generator, so
    reproducibility stays with the caller.
    """
    n = s_frac.shape[0]
    n_knots = knots.shape[0]
    dens = np.empty(n)
    peak = -1e308
    for i in range(n_pos):
        v = _log_density_one(t * s_frac[i], knots, coefs, lo1, step1, n1, lo2,
                             step2, n_knots, t_left, log_amp, pow_coef,
                             exp_coef, exp_pow)
        dens[i] = v
        if v > peak:
            peak = v
    for i in range(n_pos, n):
        dens[i] = -np.inf
    if peak == -1e308 or np.isnan(peak):
        return -1.0  # caller raises
    total = 0.0
    for i in range(n):
        dens[i] = np.exp(dens[i] - peak)
    # trapezoid masses and target locating in one pass
    csum = np.empty(n - 1)
    for j in range(n - 1):
        total += 0.5 * (dens[j] + dens[j + 1]) * widths[j]
        csum[j] = total
    target = u * total
    jlo, jhi = 0, n - 2
    while jlo < jhi:
        jm = (jlo + jhi) // 2
        if csum[jm] < target:
            jlo = jm + 1
        else:
            jhi = jm
    j = jlo
    prev = csum[j - 1] if j > 0 else 0.0
    u_rel = target - prev
    d0 = dens[j]
    d1 = dens[j + 1]
    h = widths[j]
    if h > 0.0 and abs(d1 - d0) > 1e-9 * max(d0, 1e-300):
        slope = (d1 - d0) / h
        disc = d0 * d0 + 2.0 * slope * u_rel
        if disc < 0.0:
            disc = 0.0
        x = (np.sqrt(disc) - d0) / slope
    else:
        x = u_rel / max(d0, 1e-300)
    if x < 0.0:
        x = 0.0
    elif x > h:
        x = h
    w_draw = w_grid[j] + x
    q = w_draw**inv_one_minus_alpha
    if q < 1e-300:
        q = 1e-300
    elif q > 1.0:
        q = 1.0
    return q

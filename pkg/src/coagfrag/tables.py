"""Per-alpha interpolation tables.

The samplers evaluate the stable log-density and the generalized-gamma
Levy-tail inverse millions of times per experiment.  Both functions are
smooth in log-log coordinates, so each is tabulated once per stability
index on a dense grid and served through a monotone cubic interpolant;
outside the tabulated window the exact asymptotic branches take over.

The tables are an acceleration layer only: ``specfun`` remains the
definition of the functions, and the table constructors are built by
calling it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import specfun


class StableDensityTable:
    """log f_alpha(t) on a log-t grid with asymptotic tails.

    Mid-range values come from the adaptive-quadrature density; below the
    stitch point the saddle-point expansion is used (it is the more
    accurate branch there), above it the convergent large-t series.
    """

    def __init__(self, alpha: float, n_grid: int = 1600, n_grid_right: int = 600):
        a = specfun.alpha_value(alpha)
        self.alpha = a
        # stitch where the exponential factor reaches e**-120: the saddle
        # expansion's relative error there is far below the table's own
        c_saddle = (1.0 - a) * a ** (a / (1.0 - a))
        self.t_left = (120.0 / c_saddle) ** (-(1.0 - a) / a)
        # the convergent large-t series takes over from quadrature here ...
        t_series = 0.08 ** (-1.0 / a)
        # ... but the table extends far beyond it so lookups rarely leave it
        self.t_right = 1e9
        grid_mid = np.exp(np.linspace(math.log(self.t_left), math.log(t_series), n_grid))
        vals = np.array([specfun.stable_density(a, t) for t in grid_mid])
        logv = np.where(vals > 0, np.log(np.maximum(vals, 1e-320)), -math.inf)
        grid_right = np.exp(
            np.linspace(math.log(t_series) + 1e-6, math.log(self.t_right), n_grid_right)
        )
        logv_right = specfun.stable_log_density_right(a, grid_right)
        grid = np.concatenate((grid_mid, grid_right))
        logv = np.concatenate((logv, logv_right))
        self._interp = PchipInterpolator(np.log(grid), logv, extrapolate=False)
        # layout metadata for the JIT lookup: knots are two uniform-in-log
        # segments joined at a single irregular seam panel
        self.knots = self._interp.x
        self.coefs = np.ascontiguousarray(self._interp.c)
        self.seg1_lo = float(self.knots[0])
        self.seg1_step = float((math.log(t_series) - math.log(self.t_left)) / (n_grid - 1))
        self.seg1_n = int(n_grid)
        self.seg2_lo = float(self.knots[n_grid])
        self.seg2_step = float(
            (math.log(self.t_right) - (math.log(t_series) + 1e-6)) / (n_grid_right - 1)
        )
        c_amp = 0.5 * (math.log(a) / (1.0 - a) - math.log(2.0 * math.pi * (1.0 - a)))
        self.left_log_amp = c_amp
        self.left_pow_coef = (2.0 - a) / (2.0 - 2.0 * a)
        self.left_exp_coef = (1.0 - a) * a ** (a / (1.0 - a))
        self.left_exp_pow = -a / (1.0 - a)

    def log_density(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, -np.inf)
        pos = t > 0
        left = pos & (t < self.t_left)
        right = pos & (t > self.t_right)
        mid = pos & ~left & ~right
        if np.any(mid):
            out[mid] = self._interp(np.log(t[mid]))
        if np.any(left):
            out[left] = specfun.stable_log_density_left(self.alpha, t[left])
        if np.any(right):
            out[right] = specfun.stable_log_density_right(self.alpha, t[right])
        return out

    def log_density_desc(self, t: np.ndarray) -> np.ndarray:
        """log f on a positive, sorted-nonincreasing array (the samplers'
        hot path): branch bounds found by scalar bisection, no masks."""
        neg = -t
        i_r = int(np.searchsorted(neg, -self.t_right, side="left"))
        i_l = int(np.searchsorted(neg, -self.t_left, side="right"))
        out = np.empty(t.size)
        if i_r:
            out[:i_r] = specfun.stable_log_density_right(self.alpha, t[:i_r])
        if i_l > i_r:
            out[i_r:i_l] = self._interp(np.log(t[i_r:i_l]))
        if i_l < t.size:
            out[i_l:] = specfun.stable_log_density_left(self.alpha, t[i_l:])
        return out

    def density(self, t):
        return np.exp(self.log_density(t))


class GGTailInverseTable:
    """Inverse of the generalized-gamma Levy tail, vectorized.

    Tabulates (log x, log tail(x)) over x in [1e-14, 90] and inverts by a
    monotone interpolant in log-log space.  Levels above the window use
    the exact stable-tail inverse (the e**-u factor is 1 to 1e-14 there);
    levels below it fall back to the scalar root-finder.
    """

    def __init__(self, alpha: float, n_grid: int = 4000):
        a = specfun.alpha_value(alpha)
        self.alpha = a
        x = np.exp(np.linspace(math.log(1e-14), math.log(90.0), n_grid))
        tail = specfun.gg_levy_tail(a, x)
        keep = tail > 0
        x, tail = x[keep], tail[keep]
        log_tail = np.log(tail)
        # tail is strictly decreasing in x: flip for an increasing abscissa
        self._interp = PchipInterpolator(log_tail[::-1], np.log(x)[::-1], extrapolate=False)
        self.level_hi = tail[0]
        self.level_lo = tail[-1]

    def inverse(self, level):
        lv = np.asarray(level, dtype=float)
        out = np.empty(lv.shape)
        high = lv >= self.level_hi
        low = lv <= self.level_lo
        mid = ~high & ~low
        if np.any(mid):
            out[mid] = np.exp(self._interp(np.log(lv[mid])))
        if np.any(high):
            out[high] = specfun.stable_levy_tail_inverse(self.alpha, lv[high])
        if np.any(low):
            out[low] = [specfun.gg_levy_tail_inverse(self.alpha, v) for v in np.atleast_1d(lv[low])]
        return out


_density_tables: dict[float, StableDensityTable] = {}
_tail_tables: dict[float, GGTailInverseTable] = {}


def stable_density_table(alpha) -> StableDensityTable:
    a = specfun.alpha_value(alpha)
    tab = _density_tables.get(a)
    if tab is None:
        tab = _density_tables[a] = StableDensityTable(a)
    return tab


def gg_tail_inverse_table(alpha) -> GGTailInverseTable:
    a = specfun.alpha_value(alpha)
    tab = _tail_tables.get(a)
    if tab is None:
        tab = _tail_tables[a] = GGTailInverseTable(a)
    return tab

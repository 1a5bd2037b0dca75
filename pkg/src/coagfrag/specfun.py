"""Deterministic numeric kernel.

Positive stable density, generalized-gamma Levy exponent and Levy tail,
and the tail inverse needed by the jump-series samplers.  Conventions are
fixed once here and shared by every sampler in the package:

* the positive alpha-stable law has Laplace transform exp(-omega**alpha)
  (unit scale constant), with density written ``f_alpha``;
* the generalized-gamma subordinator has Laplace exponent
  ``(1 + omega)**alpha - 1``, i.e. Levy density
  ``(alpha / Gamma(1 - alpha)) * u**(-alpha - 1) * exp(-u)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sp

from .errors import DomainError, NumericError

__all__ = [
    "StableIndex",
    "QuadratureConfig",
    "gg_laplace_exponent",
    "stable_density",
    "gg_levy_tail",
    "gg_levy_tail_inverse",
    "stable_levy_tail",
    "stable_levy_tail_inverse",
]


@dataclass(frozen=True)
class StableIndex:
    """Stability index constrained to the strict interior of (0, 1)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0) or not math.isfinite(a):
            raise DomainError(f"stable index must satisfy 0 < alpha < 1, got {self.alpha}")
        object.__setattr__(self, "alpha", a)


def alpha_value(alpha) -> float:
    """Accept a StableIndex or a bare float, returning the validated float."""
    if isinstance(alpha, StableIndex):
        return alpha.alpha
    return StableIndex(float(alpha)).alpha


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive quadrature budget for the stable-density integral."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_panels: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_panels < 16:
            raise DomainError("max_panels must be at least 16")


DEFAULT_QUADRATURE = QuadratureConfig()


def gg_laplace_exponent(alpha, omega):
    """Levy exponent (1 + omega)**alpha - 1 of the generalized-gamma subordinator."""
    a = alpha_value(alpha)
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be nonnegative")
    out = np.expm1(a * np.log1p(w))
    return float(out) if np.isscalar(omega) or w.ndim == 0 else out


def log_zolotarev_a(u, alpha: float):
    """log A(u) with A the angle kernel of the one-sided stable integral.

    A(u) = [sin(alpha*u)**alpha * sin((1-alpha)*u)**(1-alpha) / sin(u)]**(1/(1-alpha))
    on (0, pi).  Written via sin(x)/x ratios so the u-power factors cancel
    exactly and u -> 0 is regular; u -> pi diverges to +inf.
    """
    a = alpha
    u = np.asarray(u, dtype=float)

    def log_sinc(x):
        # log(sin(x)/x) for x in (0, pi); np.sinc is sin(pi x)/(pi x)
        with np.errstate(divide="ignore"):
            return np.log(np.sinc(x / np.pi))

    base = a * math.log(a) + (1.0 - a) * math.log1p(-a)
    val = base + a * log_sinc(a * u) + (1.0 - a) * log_sinc((1.0 - a) * u) - log_sinc(u)
    return val / (1.0 - a)


def _stable_prefactor(alpha: float, t: float) -> float:
    return alpha / ((1.0 - alpha) * math.pi) * t ** (-1.0 / (1.0 - alpha))


def stable_density(alpha, t, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Density f_alpha(t) of the positive stable law with transform exp(-omega**alpha).

    Evaluated through the bounded-integrand angle representation

        f_alpha(t) = pre(t) * int_0^pi A(u) exp(-A(u) * t**(-alpha/(1-alpha))) du

    with adaptive panel refinement controlled by ``cfg``.  The integrand
    vanishes at both endpoints, so no endpoint special-casing is needed.
    """
    a = alpha_value(alpha)
    t = float(t)
    if not (t > 0) or not math.isfinite(t):
        raise DomainError(f"stable density requires t > 0, got {t}")

    c = t ** (-a / (1.0 - a))
    pre = _stable_prefactor(a, t)

    def integrand(u):
        la = log_zolotarev_a(u, a)
        with np.errstate(over="ignore", invalid="ignore"):
            val = np.exp(la - c * np.exp(la))
        return np.where(np.isfinite(val), val, 0.0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        result = integrate.quad(
            integrand,
            0.0,
            math.pi,
            epsabs=cfg.abs_tol / max(pre, 1e-300),
            epsrel=cfg.rel_tol,
            limit=cfg.max_panels,
            full_output=1,
        )
    value, abserr = result[0], result[1]
    achieved = abserr * pre
    if len(result) > 3:  # explanation string present => quadrature trouble
        if achieved > max(cfg.abs_tol, cfg.rel_tol * abs(value) * pre):
            raise NumericError(
                "stable density quadrature did not converge",
                alpha=a,
                t=t,
                achieved_abs_tol=achieved,
            )
    return max(pre * value, 0.0)


# -- left/right tail expansions, used by the interpolation tables ------------

def stable_log_density_left(alpha: float, t):
    """Saddle-point expansion of log f_alpha(t), exact in the t -> 0 limit.

    f_alpha(t) ~ A * t**(-(2-alpha)/(2-2 alpha)) * exp(-c * t**(-alpha/(1-alpha)))
    with c = (1-alpha) * alpha**(alpha/(1-alpha)).
    """
    a = alpha
    t = np.asarray(t, dtype=float)
    c = (1.0 - a) * a ** (a / (1.0 - a))
    log_amp = 0.5 * (math.log(a) / (1.0 - a) - math.log(2.0 * math.pi * (1.0 - a)))
    return log_amp - (2.0 - a) / (2.0 - 2.0 * a) * np.log(t) - c * t ** (-a / (1.0 - a))


def stable_log_density_right(alpha: float, t):
    """log of the convergent large-t series of f_alpha (alternating in t**-alpha)."""
    a = alpha
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    term_scale = np.ones_like(t)
    for k in range(1, 60):
        term_scale = np.exp(
            sp.gammaln(k * a + 1.0) - sp.gammaln(k + 1.0) - k * a * np.log(t)
        )
        contrib = (-1.0) ** (k + 1) * term_scale * math.sin(math.pi * k * a)
        total += contrib
        if np.all(np.abs(term_scale) < 1e-17 * np.abs(total)):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(total / math.pi) - np.log(t)


# -- generalized-gamma Levy tail ---------------------------------------------

def gg_levy_tail(alpha, x):
    """Upper tail int_x^inf (alpha/Gamma(1-alpha)) u**(-alpha-1) e**-u du.

    Reduced through the incomplete-gamma recurrence to
    x**-alpha e**-x / Gamma(1-alpha) - Q(1-alpha, x) with Q the regularized
    upper incomplete gamma; the cancellation amplification is ~x*eps/alpha,
    negligible for every x at which the tail is representable.
    """
    a = alpha_value(alpha)
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise DomainError("gg_levy_tail requires x > 0")
    val = np.exp(-a * np.log(xs) - xs - sp.gammaln(1.0 - a)) - sp.gammaincc(1.0 - a, xs)
    val = np.maximum(val, 0.0)
    return float(val) if np.isscalar(x) else val


def gg_levy_tail_inverse(alpha, level, rel_tol: float = 1e-12) -> float:
    """Solve gg_levy_tail(alpha, x) == level for x.

    Brackets the monotone-decreasing tail, then alternates bisection with a
    safeguarded secant step in log-log coordinates until the relative width
    of the bracket falls below ``rel_tol``.
    """
    a = alpha_value(alpha)
    level = float(level)
    if not (level > 0) or not math.isfinite(level):
        raise DomainError("level must be a positive finite real")

    # stable tail dominates the gg tail, so its exact inverse is an upper bound
    hi = (math.gamma(1.0 - a) * level) ** (-1.0 / a)
    hi = min(max(hi, 1e-300), 700.0)
    while gg_levy_tail(a, hi) > level:  # only possible when the clamp bit
        hi *= 2.0
        if hi > 1e6:
            raise NumericError("could not bracket gg tail level", level=level)
    lo = hi
    while gg_levy_tail(a, lo) <= level:
        hi = lo
        lo *= 0.5
        if lo < 1e-300:
            raise NumericError("could not bracket gg tail level", level=level)

    log_level = math.log(level)

    def resid(lx):
        val = gg_levy_tail(a, math.exp(lx))
        return math.log(val) - log_level if val > 0 else -math.inf

    llo, lhi = math.log(lo), math.log(hi)
    flo, fhi = resid(llo), resid(lhi)
    bisect_next = True
    while lhi - llo > rel_tol:
        mid = 0.5 * (llo + lhi)
        if not bisect_next and math.isfinite(flo) and math.isfinite(fhi) and flo != fhi:
            sec = llo - flo * (lhi - llo) / (fhi - flo)
            if llo < sec < lhi:
                mid = sec
        fmid = resid(mid)
        if fmid > 0:
            llo, flo = mid, fmid
        else:
            lhi, fhi = mid, fmid
        # alternate secant with bisection so a steep far endpoint cannot stall
        bisect_next = not bisect_next
    return math.exp(0.5 * (llo + lhi))


# -- plain stable Levy measure (the zeta = 0 route) ---------------------------

def stable_levy_tail(alpha, x):
    """Tail x**-alpha / Gamma(1-alpha) of the stable Levy measure."""
    a = alpha_value(alpha)
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise DomainError("stable_levy_tail requires x > 0")
    val = np.exp(-a * np.log(xs) - sp.gammaln(1.0 - a))
    return float(val) if np.isscalar(x) else val


def stable_levy_tail_inverse(alpha, level):
    """Exact inverse of stable_levy_tail; accepts scalars or arrays."""
    a = alpha_value(alpha)
    lv = np.asarray(level, dtype=float)
    if np.any(lv <= 0):
        raise DomainError("level must be positive")
    val = np.exp(-(np.log(lv) + sp.gammaln(1.0 - a)) / a)
    return float(val) if np.isscalar(level) else val

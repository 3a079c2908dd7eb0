"""Brute-force quadratures on the unit disc (n = 1) used to cross-check the spectral routes.

Everything here integrates over the disc in polar form, w = sqrt(s) e^{i theta},
with a periodic trapezoid in theta and scipy's QUADPACK in s.  The algebraic
boundary weight is handed to QUADPACK (``weight="alg"``) so the integrands
stay smooth.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import ParameterError
from .model import ModelParams, RadialProfile, c_nu, monomial_norm_sq

N_THETA = 256
# QUADPACK's algebraic-weight rule can sample the endpoint s = 1 itself; the
# smooth part is evaluated just inside instead.
S_EDGE = 1.0 - 1e-12


def _need_disc(params: ModelParams):
    if params.n != 1:
        raise ParameterError("disc oracles require n = 1")


def _angles(n_theta: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n_theta) / n_theta


def _s_integral(g, alpha: float, breaks=(), epsabs=1e-13, epsrel=1e-12) -> float:
    """int_0^1 g(s) (1 - s)^alpha ds, split at ``breaks``."""
    edges = sorted({0.0, 1.0, *(b for b in breaks if 0 < b < 1)})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi == 1.0:
            val, _ = integrate.quad(
                g, lo, hi,
                weight="alg", wvar=(0.0, alpha), epsabs=epsabs, epsrel=epsrel, limit=200,
            )
        else:
            val, _ = integrate.quad(
                lambda s: g(s) * (1 - s) ** alpha, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=200
            )
        total += val
    return total


def _profile_over_power(f: RadialProfile, s: float) -> float:
    """f(sqrt s) / (1 - s)^decay, the smooth part of a power-law profile."""
    d = f.decay if math.isfinite(f.decay) else 0.0
    s = min(s, S_EDGE)
    y = 1.0 - s
    val = complex(np.asarray(f.func(np.sqrt(s), y)))
    return (val / y**d).real if d else val.real


def berezin_direct(params: ModelParams, f: RadialProfile, r: float, n_theta: int = N_THETA) -> float:
    """B(f)(r) = c_nu int f(w) (1-r^2)^nu (1-|w|^2)^(nu-2) / |1 - r w-bar|^(2 nu) dA(w)/pi."""
    _need_disc(params)
    nu = params.nu
    th = _angles(n_theta)
    d = f.decay if math.isfinite(f.decay) else 0.0

    def g(s):
        ang = np.mean(np.abs(1 - r * math.sqrt(s) * np.exp(1j * th)) ** (-2 * nu))
        return _profile_over_power(f, s) * ang

    breaks = tuple(b * b for b in f.breakpoints)
    val = _s_integral(g, nu - 2 + d, breaks)
    return c_nu(params) * (1 - r * r) ** nu * val


def conv_direct(params: ModelParams, f: RadialProfile, g: RadialProfile, r: float, n_theta: int = N_THETA) -> float:
    """(f * g)(r) = int f(w) g(|phi_r(w)|) dlambda(w) with dlambda = dA / (pi (1-|w|^2)^2).

    Both profiles must be of power type near the boundary; their decays are
    folded into the QUADPACK weight.
    """
    _need_disc(params)
    th = _angles(n_theta)
    df = f.decay if math.isfinite(f.decay) else 0.0
    dg = g.decay if math.isfinite(g.decay) else 0.0

    def integrand(s):
        s = min(s, S_EDGE)
        w = math.sqrt(s) * np.exp(1j * th)
        den = np.abs(1 - r * np.conj(w)) ** 2
        # 1 - |phi_r(w)|^2 = (1 - r^2)(1 - s) / |1 - r w-bar|^2
        y = (1 - r * r) / den
        rad = np.sqrt(np.clip(1 - y * (1 - s), 0.0, 1.0))
        gv = np.asarray(g.func(rad, y * (1 - s)), complex)
        smooth = np.mean(gv) / (1 - s) ** dg
        return (_profile_over_power(f, s) * smooth).real

    breaks = tuple(b * b for b in f.breakpoints)
    return _s_integral(integrand, df + dg - 2, breaks)


def toeplitz_direct(params: ModelParams, f: RadialProfile, m: int, n_theta: int = 64) -> float:
    """<T_f e_m, e_m> = int f |e_m|^2 dv_nu with e_m = z^m / ||z^m||."""
    _need_disc(params)
    nu = params.nu
    th = _angles(n_theta)
    d = f.decay if math.isfinite(f.decay) else 0.0
    norm = monomial_norm_sq([m], nu)

    def g(s):
        w = math.sqrt(s) * np.exp(1j * th)
        return _profile_over_power(f, s) * np.mean(np.abs(w ** m) ** 2)

    breaks = tuple(b * b for b in f.breakpoints)
    return c_nu(params) * _s_integral(g, nu - 2 + d, breaks) / norm


def kernel_norm_sq_direct(params: ModelParams, w: complex, n_theta: int = N_THETA) -> float:
    """||k_w||^2 = int |1 - z w-bar|^(-2 nu) dv_nu(z); the closed form is (1 - |w|^2)^(-nu)."""
    _need_disc(params)
    nu = params.nu
    th = _angles(n_theta)

    def g(s):
        z = math.sqrt(s) * np.exp(1j * th)
        return np.mean(np.abs(1 - z * np.conj(w)) ** (-2 * nu))

    return c_nu(params) * _s_integral(g, nu - 2)

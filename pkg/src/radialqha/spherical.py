"""Spherical functions phi_lambda on the ball and the product-formula defect."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from . import numerics
from .model import ModelParams, geodesic, mobius_arg
from .numerics import EPS, hyp2f1_series, log_gamma

SERIES_MAX_R2 = 0.85
CONNECTION_MAX_Z = 0.6
ABS_TARGET = 1e-13
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class SpectralPoint:
    """A spectral parameter lambda; lambda and -lambda label the same function."""

    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    @property
    def canonical(self) -> "SpectralPoint":
        lam = self.value
        if lam.real < 0 or (lam.real == 0 and lam.imag < 0):
            lam = -lam
        return SpectralPoint(lam)

    @property
    def is_canonical(self) -> bool:
        return self.canonical.value == self.value

    def __complex__(self):
        return self.value


LambdaLike = Union[SpectralPoint, complex, float]


def as_lambda(lam) -> complex:
    if isinstance(lam, SpectralPoint):
        return lam.value
    return complex(lam)


def is_bounded(lam: LambdaLike, n: int) -> bool:
    """phi_lambda is bounded iff |Im lambda| <= n."""
    return abs(as_lambda(lam).imag) <= n + BOUND_SLACK


def is_positive_definite(lam: LambdaLike, n: int) -> bool:
    """phi_lambda is positive definite iff lambda is real or lies on i[-n, n]."""
    lam = as_lambda(lam)
    tiny = BOUND_SLACK * max(1.0, abs(lam))
    return abs(lam.imag) <= tiny or (abs(lam.real) <= tiny and abs(lam.imag) <= n + BOUND_SLACK)


# ---------------------------------------------------------------- series routes


def _log_cosh(t):
    t = np.abs(t)
    return t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0)


def _series_route(n, rho, lam, t):
    """Pfaff-reduced series (1-r^2)^a 2F1(a, n-b; n; r^2) and its error estimate."""
    a = 0.5 * (rho + 1j * lam)
    bb = n - 0.5 * (rho - 1j * lam)
    x = np.tanh(t) ** 2
    pref = np.exp(-2.0 * a * _log_cosh(t))
    val, absum = hyp2f1_series(a, bb, n, x)
    err = 16 * EPS * absum * np.abs(pref)
    return pref * val, err


def _connection_route(n, rho, lam, t):
    """Two-term expansion about the boundary in z = 1 - r^2 = sech^2 t."""
    lam = np.asarray(lam, complex)
    a = 0.5 * (rho + 1j * lam)
    b = 0.5 * (rho - 1j * lam)
    logz = -2.0 * _log_cosh(t)
    z = np.exp(logz)
    lg_n = math.lgamma(n)
    lg1 = [log_gamma(b - a), log_gamma(b), log_gamma(n - a)]
    lg2 = [log_gamma(a - b), log_gamma(a), log_gamma(n - b)]
    c1 = np.exp(lg_n + lg1[0] - lg1[1] - lg1[2] + a * logz)
    c2 = np.exp(lg_n + lg2[0] - lg2[1] - lg2[2] + b * logz)
    f1, s1 = hyp2f1_series(a, n - b, a - b + 1, z)
    f2, s2 = hyp2f1_series(b, n - a, b - a + 1, z)
    val = c1 * f1 + c2 * f2
    gamma_scale = sum(np.abs(v) for v in lg1 + lg2) + n
    err = 16 * EPS * (np.abs(c1) * s1 + np.abs(c2) * s2) + EPS * gamma_scale * (
        np.abs(c1 * f1) + np.abs(c2 * f2)
    )
    return val, err


# ---------------------------------------------------------------- sphere integral


@lru_cache(maxsize=256)
def _kernel_nodes(n: int, t: float, npts: int):
    """Nodes u_k and weights for phi(t) = sum_k w_k exp((i lambda - rho) u_k).

    The sphere average reduces to an integral over u = log|omega_1 sinh t + cosh t|
    in [-t, t] against a density with (t^2 - u^2)^(n - 3/2) endpoint behaviour,
    which is absorbed into a Gauss-Jacobi rule.
    """
    alpha = n - 1.5
    x, w = numerics.gauss_jacobi(npts, alpha, alpha)
    u = t * x
    em = np.expm1(u - t)
    ep = np.expm1(-u - t)
    one_m_x2 = (1.0 - x) * (1.0 + x)
    if n == 1:
        em2 = np.expm1(2.0 * (u - t))
        ep2 = np.expm1(-2.0 * (u + t))
        dens = t * (2.0 / math.pi) * np.exp(u - t) * np.sqrt(one_m_x2 / (em2 * ep2))
    else:
        k = n - 2
        sh = math.sinh(t)
        q = np.exp(u) / sh
        cc = math.cosh(t) / sh
        one_m_kappa = math.exp(t) * em * ep / (2.0 * math.cosh(t))
        psi0 = 2.0 * np.arcsin(np.sqrt(np.clip(one_m_kappa / 2.0, 0.0, 1.0)))
        if k == 0:
            jk = 2.0 * psi0
        else:
            v, wv = numerics.gauss_legendre(24)
            v = 0.5 * (v + 1.0)
            wv = 0.5 * wv
            ps = psi0[:, None]
            prod = 2.0 * np.sin(ps * (1 + v) / 2) * np.sin(ps * (1 - v) / 2)
            jk = 2.0 * psi0 * (prod**k @ wv)
        dens = (
            t
            * (n - 1)
            / math.pi
            * q**2
            * (2.0 * cc * q) ** k
            * jk
            / one_m_x2 ** (k + 0.5)
        )
    weights = w * dens
    weights.setflags(write=False)
    u.setflags(write=False)
    return u, weights


def _integral_nodes(n: int, t: float, lam_abs_re: float, lam_abs_im: float) -> int:
    npts = 24 + int(math.ceil(0.75 * lam_abs_re * t + (6.0 + lam_abs_im) * t))
    # bucket the count so the node cache is reused across nearby calls
    return int(8 * math.ceil(npts / 8))


def phi_integral_rep(params: ModelParams, lam, t, npts: int | None = None):
    """phi_lambda at geodesic distance t from the sphere-average representation.

    Accepts an array of lambdas for a single t.
    """
    lam_arr = np.atleast_1d(np.asarray(lam, complex).ravel())
    t = float(t)
    out = _integral_batch(params.n, params.rho, lam_arr, t, npts)
    return out[0] if np.ndim(lam) == 0 else out.reshape(np.shape(lam))


def _integral_batch(n, rho, lams, t, npts=None):
    if t == 0.0:
        return np.ones(lams.shape, complex)
    if npts is None:
        npts = _integral_nodes(n, t, float(np.max(np.abs(lams.real))), float(np.max(np.abs(lams.imag))))
    u, w = _kernel_nodes(n, t, npts)
    expo = np.exp(np.outer(1j * lams - rho, u))
    return expo @ w


# ---------------------------------------------------------------- dispatcher


def phi_grid(params: ModelParams, lams, ts) -> np.ndarray:
    """phi_lambda(tanh t) on the outer product of ``lams`` and ``ts``."""
    n, rho = params.n, params.rho
    lams = np.atleast_1d(np.asarray(lams, complex))
    ts = np.atleast_1d(np.asarray(ts, float))
    L, T = np.meshgrid(lams, ts, indexing="ij")
    out = np.full(L.shape, np.nan + 0j)
    done = np.zeros(L.shape, bool)

    zero = T == 0.0
    out[zero] = 1.0
    done |= zero

    r = np.tanh(T)
    cand = ~done & (r * r <= SERIES_MAX_R2) & (np.abs(L.real) * r <= 14.0)
    if np.any(cand):
        val, err = _series_route(n, rho, L[cand], T[cand])
        ok = err <= ABS_TARGET
        idx = np.nonzero(cand)
        sel = tuple(i[ok] for i in idx)
        out[sel] = val[ok]
        done[sel] = True

    z = 1.0 / np.cosh(T) ** 2
    cand = ~done & (z <= CONNECTION_MAX_Z) & (np.abs(L.real) >= 0.25)
    if np.any(cand):
        val, err = _connection_route(n, rho, L[cand], T[cand])
        ok = err <= ABS_TARGET
        idx = np.nonzero(cand)
        sel = tuple(i[ok] for i in idx)
        out[sel] = val[ok]
        done[sel] = True

    if not np.all(done):
        for j in np.unique(np.nonzero(~done)[1]):
            rows = ~done[:, j]
            out[rows, j] = _integral_batch(n, rho, L[rows, j], float(ts[j]))
    return out


def phi_t(params: ModelParams, lam, t):
    """phi_lambda at geodesic distance t (scalar lambda, scalar or array t)."""
    vals = phi_grid(params, [as_lambda(lam)], np.ravel(t))[0]
    return vals.reshape(np.shape(t)) if np.ndim(t) else complex(vals[0])


def phi(params: ModelParams, lam, r, y=None):
    """Spherical function phi_lambda(r) for r in [0, 1)."""
    r_arr = np.asarray(r, float)
    if np.any((r_arr < 0) | (r_arr >= 1)):
        raise ValueError("radius must lie in [0, 1)")
    t = geodesic(r_arr, None if y is None else np.asarray(y, float))
    return phi_t(params, lam, t)


def phi_series(params: ModelParams, lam, r):
    """The Pfaff-reduced series alone, without routing (valid for moderate r)."""
    t = np.arctanh(np.asarray(r, float))
    val, _ = _series_route(params.n, params.rho, complex(as_lambda(lam)), t)
    return val if np.ndim(val) else complex(val)


# ---------------------------------------------------------------- product formula


@lru_cache(maxsize=16)
def _sphere_marginal(n: int, n_theta: int, n_rad: int):
    """Nodes (omega_1, weight) for averaging over omega_1 on the unit sphere."""
    theta = 2 * math.pi * np.arange(n_theta) / n_theta
    if n == 1:
        return np.exp(1j * theta), np.full(n_theta, 1.0 / n_theta)
    x, w = numerics.gauss_jacobi(n_rad, float(n - 2), 0.0)
    v = 0.5 * (1.0 + x)
    w = w / w.sum()
    om = (np.sqrt(v)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    wt = (w[:, None] * np.full(n_theta, 1.0 / n_theta)[None, :]).ravel()
    return om, wt


def product_defect(params: ModelParams, lam, s: float, t: float, n_theta: int = 128, n_rad: int = 40) -> float:
    """|avg_omega phi(|a_s^-1 (tanh t) omega|) - phi(tanh s) phi(tanh t)|."""
    if s == 0 or t == 0:
        return 0.0
    lam = as_lambda(lam)
    om, wt = _sphere_marginal(params.n, n_theta, n_rad)
    rs, rt = math.tanh(s), math.tanh(t)
    radii = mobius_arg(rs, rt * om, np.full(om.shape, rt))
    vals = phi_t(params, lam, np.arctanh(radii))
    avg = np.dot(wt, vals)
    rhs = phi_t(params, lam, s) * phi_t(params, lam, t)
    return float(abs(avg - rhs))

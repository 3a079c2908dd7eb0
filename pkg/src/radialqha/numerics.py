"""Gamma functions, Gauss hypergeometric series and adaptive quadrature."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .errors import (
    ConvergenceError,
    NonIntegrableError,
    ParameterError,
    PoleError,
    TailError,
    ToleranceError,
)

EPS = np.finfo(float).eps
MAX_SERIES_TERMS = 10_000


@dataclass(frozen=True)
class QuadSettings:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_subdivisions: int = 400
    singularity_exponents: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("tolerances must be positive")
        if int(self.max_subdivisions) < 1:
            raise ParameterError("max_subdivisions must be at least 1")
        if self.singularity_exponents is not None:
            p, q = self.singularity_exponents
            if p <= -1 or q <= -1:
                raise NonIntegrableError(
                    f"endpoint exponents {p}, {q} are not integrable (need > -1)"
                )

    def with_exponents(self, left: float = 0.0, right: float = 0.0) -> "QuadSettings":
        return QuadSettings(self.rel_tol, self.abs_tol, self.max_subdivisions, (left, right))


# ---------------------------------------------------------------- gamma


def _fault(name: str) -> bool:
    return name in os.environ.get("QHA_FAULT", "").split(",")


def _check_poles(z: np.ndarray) -> None:
    bad = (np.imag(z) == 0) & (np.real(z) <= 0) & (np.real(z) == np.round(np.real(z)))
    if np.any(bad):
        raise PoleError(f"gamma has a pole at {np.real(z[bad]).ravel()[0]:g}")


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    _check_poles(z)
    out = special.loggamma(z)
    if _fault("gamma"):
        out = out + 1e-3
    return out if out.ndim else complex(out)


def gamma_ratio(numerators: Sequence, denominators: Sequence):
    """prod Gamma(num) / prod Gamma(den), computed in log space."""
    nums = [np.asarray(x, dtype=complex) for x in numerators]
    dens = [np.asarray(x, dtype=complex) for x in denominators]
    acc = np.zeros(np.broadcast_shapes(*(x.shape for x in nums + dens)), dtype=complex)
    for x in nums:
        acc = acc + log_gamma(x)
    for x in dens:
        acc = acc - log_gamma(x)
    out = np.exp(acc)
    real_input = all(np.all(np.imag(x) == 0) for x in nums + dens)
    if real_input:
        out = out.real
    if out.ndim == 0:
        return float(out) if real_input else complex(out)
    return out


def pochhammer(a, m: int):
    """(a)_m for integer m >= 0 by direct product (a may be complex)."""
    out = np.ones_like(np.asarray(a, dtype=complex))
    for k in range(m):
        out = out * (a + k)
    return out


# ---------------------------------------------------------------- 2F1


def hyp2f1_series(a, b, c, x, rel_tol: float = 1e-15, max_terms: int = MAX_SERIES_TERMS):
    """Sum the Gauss series, broadcasting over all arguments.

    Returns ``(value, abs_sum)`` where ``abs_sum`` is the sum of term moduli, the
    scale against which rounding error should be judged.
    """
    a, b, c, x = np.broadcast_arrays(
        np.asarray(a, complex), np.asarray(b, complex), np.asarray(c, complex), np.asarray(x, float)
    )
    shape = a.shape
    a, b, c, x = (v.ravel() for v in (a, b, c, x))
    total = np.ones(a.shape, complex)
    abs_total = np.ones(a.shape)
    term = np.ones(a.shape, complex)
    active = np.ones(a.shape, bool)
    for k in range(max_terms):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        ak, bk, ck, xk = a[idx] + k, b[idx] + k, c[idx] + k, x[idx]
        ratio = ak * bk / (ck * (k + 1)) * xk
        t = term[idx] * ratio
        term[idx] = t
        total[idx] += t
        abs_total[idx] += np.abs(t)
        # the next ratio bounds the geometric tail once it drops below 1
        q = np.abs((ak + 1) * (bk + 1) / ((ck + 1) * (k + 2)) * xk)
        with np.errstate(over="ignore", invalid="ignore"):
            tail = np.where(q < 1, np.abs(t) * q / np.maximum(1 - q, 1e-300), np.inf)
        scale = rel_tol * np.maximum(np.abs(total[idx]), 1e-300)
        done = ((np.abs(t) <= scale) & (tail <= scale)) | (t == 0)
        active[idx[done]] = False
    if np.any(active):
        raise ConvergenceError(
            f"hypergeometric series did not converge in {max_terms} terms",
            estimate=total.reshape(shape),
        )
    return total.reshape(shape), abs_total.reshape(shape)


def hyp2f1(a, b, c, x, settings: Optional[QuadSettings] = None):
    """Gauss hypergeometric function 2F1(a, b; c; x) for real x < 1.

    Negative arguments are mapped into [0, 1) with the Pfaff transformation
    2F1(a,b;c;x) = (1-x)^(-a) 2F1(a, c-b; c; x/(x-1)).
    """
    if np.any(np.asarray(c).real <= 0) and np.any(
        np.asarray(c).real == np.round(np.asarray(c).real)
    ) and np.all(np.imag(c) == 0):
        raise PoleError("c must not be a nonpositive integer")
    x = np.asarray(x, float)
    if np.any(x >= 1):
        raise ParameterError("hyp2f1 requires x < 1")
    rel = 1e-15 if settings is None else min(settings.rel_tol, 1e-13)
    a, b, c, x = np.broadcast_arrays(
        np.asarray(a, complex), np.asarray(b, complex), np.asarray(c, complex), x
    )
    out = np.empty(a.shape, complex)
    neg = x < 0
    if np.any(~neg):
        out[~neg] = hyp2f1_series(a[~neg], b[~neg], c[~neg], x[~neg], rel)[0]
    if np.any(neg):
        xn = x[neg]
        y = xn / (xn - 1.0)
        val = hyp2f1_series(a[neg], c[neg] - b[neg], c[neg], y, rel)[0]
        out[neg] = np.exp(-a[neg] * np.log1p(-xn)) * val
    return complex(out) if out.ndim == 0 else out


def hyp2f1_doubling(a, b, x):
    """2F1(a, b; a+b+1/2; x) through the quadratic (doubling) transformation.

    Uses 2F1(a, b; a+b+1/2; x) = 2F1(2a, 2b; a+b+1/2; (1 - sqrt(1-x))/2), an
    independent route valid only for this special relation between parameters.
    """
    x = np.asarray(x, float)
    if np.any(x >= 1):
        raise ParameterError("hyp2f1_doubling requires x < 1")
    y = 0.5 * (1.0 - np.sqrt(1.0 - x))
    return hyp2f1(2 * a, 2 * b, a + b + 0.5, y)


# ---------------------------------------------------------------- quadrature


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def gauss_jacobi(n: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for weight (1-x)^alpha (1+x)^beta on [-1, 1]."""
    if alpha == 0 and beta == 0:
        return gauss_legendre(n)
    x, w = special.roots_jacobi(n, alpha, beta)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges: Sequence[float], order: int = 20) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive panels."""
    xs, ws = gauss_legendre(order)
    e = np.asarray(edges, float)
    lo, hi = e[:-1, None], e[1:, None]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xs
    weights = 0.5 * (hi - lo) * ws
    return nodes.ravel(), weights.ravel()


def _adaptive(g: Callable, a: float, b: float, settings: QuadSettings):
    x15, w15 = gauss_legendre(15)
    x31, w31 = gauss_legendre(31)

    def rule(lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        coarse = half * np.dot(w15, g(mid + half * x15))
        fine = half * np.dot(w31, g(mid + half * x31))
        return fine, abs(fine - coarse)

    pending = [(a, b) + rule(a, b)]
    accepted_val, accepted_err = [], []
    splits = 0
    while pending:
        total = sum(p[2] for p in pending) + sum(accepted_val)
        target = max(settings.abs_tol, settings.rel_tol * abs(total))
        lo, hi, val, err = pending.pop()
        if err <= target * (hi - lo) / (b - a) or hi - lo < 1e-13 * (b - a):
            accepted_val.append(val)
            accepted_err.append(err)
            continue
        splits += 1
        if splits > settings.max_subdivisions:
            est = sum(accepted_val) + val + sum(p[2] for p in pending)
            bound = sum(accepted_err) + err + sum(p[3] for p in pending)
            raise ToleranceError(
                "adaptive quadrature exceeded max_subdivisions", estimate=est, error=bound
            )
        mid = 0.5 * (lo + hi)
        pending.append((lo, mid) + rule(lo, mid))
        pending.append((mid, hi) + rule(mid, hi))
    return math.fsum(np.real(accepted_val)) + 1j * math.fsum(np.imag(accepted_val)), sum(
        accepted_err
    )


def _finish(value: complex):
    return value.real if value.imag == 0 else value


def integrate_01(f: Callable, settings: Optional[QuadSettings] = None):
    """Integrate ``f`` over (0, 1).

    Declared endpoint exponents p, q (integrand ~ x^p near 0, (1-x)^q near 1) are
    removed by the power substitutions x = y^(1/(1+p))/2 and its mirror image on
    each half of the interval; the smooth pieces go to adaptive Gauss-Legendre.
    """
    settings = settings or QuadSettings()
    p, q = settings.singularity_exponents or (0.0, 0.0)
    if p <= -1 or q <= -1:
        raise NonIntegrableError(f"endpoint exponents {p}, {q} are not integrable")

    def vec(x):
        return np.asarray(f(x), dtype=complex) * np.ones_like(x)

    if p == 0 and q == 0:
        val, _ = _adaptive(vec, 0.0, 1.0, settings)
        return _finish(val)

    def left(y):
        s = 1.0 / (1.0 + p)
        x = 0.5 * y**s
        return vec(x) * 0.5 * s * y ** (s - 1.0)

    def right(y):
        s = 1.0 / (1.0 + q)
        x = 1.0 - 0.5 * y**s
        return vec(x) * 0.5 * s * y ** (s - 1.0)

    lv, _ = _adaptive(left if p != 0 else (lambda y: 0.5 * vec(0.5 * y)), 0.0, 1.0, settings)
    rv, _ = _adaptive(right if q != 0 else (lambda y: 0.5 * vec(1.0 - 0.5 * y)), 0.0, 1.0, settings)
    return _finish(lv + rv)


def integrate_halfline(f: Callable, settings: Optional[QuadSettings] = None):
    """Integrate an exponentially decaying ``f`` over (0, inf).

    Uses the map x = exp(u - exp(-u)) with trapezoidal sums, halving the step
    until consecutive sums agree.  The far end is certified by fitting log|f| on
    the last stretch of the grid; a non-negative slope raises :class:`TailError`.
    """
    settings = settings or QuadSettings()

    def vec(x):
        return np.asarray(f(x), dtype=complex) * np.ones_like(x)

    # choose the upper truncation: extend until the mapped integrand is negligible
    u_lo = -4.5
    u_hi = 2.0
    while True:
        x_end = math.exp(u_hi - math.exp(-u_hi))
        probe = np.array([x_end * 0.5, x_end * 0.75, x_end])
        vals = np.abs(vec(probe))
        if np.all(vals * probe < settings.abs_tol * 1e-3) or u_hi >= 7.0:
            break
        u_hi += 0.5
    x_end = math.exp(u_hi - math.exp(-u_hi))
    xs = np.linspace(0.5 * x_end, x_end, 9)
    mags = np.abs(vec(xs))
    nz = mags > 0
    if np.count_nonzero(nz) >= 3:
        slope, icpt = np.polyfit(xs[nz], np.log(mags[nz]), 1)
        if slope >= 0:
            raise TailError("integrand tail does not decay", estimate=None, error=np.inf)
        tail = math.exp(icpt + slope * x_end) / -slope
        if tail > max(settings.abs_tol, 1e-6):
            raise TailError(
                f"tail beyond x={x_end:.3g} is not negligible ({tail:.2e})",
                estimate=None,
                error=tail,
            )

    def mapped(u):
        e = np.exp(-u)
        x = np.exp(u - e)
        return vec(x) * x * (1.0 + e)

    h = 0.125
    prev = None
    for _ in range(10):
        u = np.arange(u_lo, u_hi + 0.5 * h, h)
        val = h * math.fsum(np.real(mapped(u))) + 1j * h * math.fsum(np.imag(mapped(u)))
        if prev is not None and abs(val - prev) <= max(
            settings.abs_tol, settings.rel_tol * abs(val)
        ) * 10:
            return _finish(val)
        prev = val
        h *= 0.5
    raise ToleranceError("half-line quadrature did not settle", estimate=prev, error=abs(val - prev))

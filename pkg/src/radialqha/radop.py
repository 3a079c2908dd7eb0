"""Radial operators on the weighted Bergman space, stored as eigenvalue sequences."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import numerics
from .errors import DegenerateError, ParameterError, TruncationWarning
from .funxform import h_hat, tau_table
from .model import ModelParams, RadialProfile, c_nu, dims, geodesic, numeric, pochhammer_ratio
from .numerics import log_gamma
from .spherical import as_lambda, is_bounded, phi_grid

HHAT_FLOOR = 1e-280


@dataclass(frozen=True, eq=False)
class RadialOperator:
    """A = sum_m coeffs[m] P_m on the degree-m homogeneous blocks (dimension n)."""

    coeffs: np.ndarray
    n: int = 1

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ParameterError("coefficients must be a nonempty vector")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def projection(cls, m: int, n: int = 1) -> "RadialOperator":
        c = np.zeros(m + 1, complex)
        c[m] = 1.0
        return cls(c, n)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def dims(self) -> np.ndarray:
        return dims(self.degree, self.n)

    def padded(self, M: int) -> np.ndarray:
        out = np.zeros(max(M, self.degree) + 1, complex)
        out[: self.coeffs.size] = self.coeffs
        return out

    def _check(self, other: "RadialOperator"):
        if self.n != other.n:
            raise ParameterError("operators act on different dimensions")

    def __add__(self, other):
        self._check(other)
        M = max(self.degree, other.degree)
        return RadialOperator(self.padded(M) + other.padded(M), self.n)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if isinstance(scalar, RadialOperator):
            self._check(scalar)
            M = max(self.degree, scalar.degree)
            return RadialOperator(self.padded(M) * scalar.padded(M), self.n)
        return RadialOperator(self.coeffs * scalar, self.n)

    __rmul__ = __mul__

    def allclose(self, other: "RadialOperator", atol: float = 1e-12) -> bool:
        M = max(self.degree, other.degree)
        return bool(np.allclose(self.padded(M), other.padded(M), rtol=0, atol=atol))


def zero_operator(n: int = 1) -> RadialOperator:
    return RadialOperator([0.0], n)


# ---------------------------------------------------------------- norms


def schatten_norm(A: RadialOperator, p: float = 1.0) -> float:
    """(sum_m d_m |c_m|^p)^(1/p); p = inf gives the operator norm max |c_m|."""
    if p < 1:
        raise ParameterError("Schatten index must be >= 1")
    mags = np.abs(A.coeffs)
    top = float(mags.max())
    if math.isinf(p) or top == 0.0:
        return top
    # scaled to avoid underflow of |c|^p
    return top * float(np.dot(A.dims, (mags / top) ** p) ** (1.0 / p))


def trace(A: RadialOperator) -> complex:
    return complex(np.dot(A.dims, A.coeffs))


def trace_product(A: RadialOperator, B: RadialOperator) -> complex:
    """tr(A B) = sum_m d_m a_m b_m."""
    A._check(B)
    M = min(A.degree, B.degree)
    return complex(np.dot(dims(M, A.n), A.coeffs[: M + 1] * B.coeffs[: M + 1]))


def adjoint(A: RadialOperator) -> RadialOperator:
    return RadialOperator(np.conj(A.coeffs), A.n)


def is_positive(A: RadialOperator, tol: float = 0.0) -> bool:
    c = A.coeffs
    return bool(np.all(np.abs(c.imag) <= tol) and np.all(c.real >= -tol))


def dual_norm(A: RadialOperator) -> float:
    """sup |tr(A B)| over radial B with ||B||_1 = 1, by finite maximisation.

    The extreme points of the trace-norm unit ball among radial operators are
    unimodular multiples of P_m / d_m, so the supremum is a maximum over m.
    """
    best = 0.0
    for m in range(A.degree + 1):
        B = RadialOperator.projection(m, A.n) * (1.0 / A.dims[m])
        best = max(best, abs(trace_product(A, B)))
    return best


# ---------------------------------------------------------------- Toeplitz


def toeplitz_prefactor(params: ModelParams, M: int) -> np.ndarray:
    """Gamma(nu + m) / (Gamma(nu - n) Gamma(n + m)) for m = 0..M."""
    n, nu = params.n, params.nu
    m = np.arange(M + 1)
    return np.exp(
        np.real(log_gamma(nu + m)) - math.lgamma(nu - n) - np.real(log_gamma(n + m))
    )


def toeplitz_eigs(params: ModelParams, f: RadialProfile, M: Optional[int] = None) -> RadialOperator:
    """Eigenvalues of the Toeplitz operator with radial symbol f on P_m, m = 0..M.

    c_m = Gamma(nu+m)/(Gamma(nu-n) Gamma(n+m)) int_0^1 f(sqrt s) s^(n+m-1) (1-s)^(nu-n-1) ds,
    integrated in s near the origin and in the geodesic variable t towards the boundary.
    """
    M = params.truncation if M is None else int(M)
    n, nu = params.n, params.nu
    q = nu - n - 1.0 + f.decay
    if q <= -1:
        raise ParameterError(f"{f.label} is not integrable against the Toeplitz weight")
    vals = _toeplitz_integrals(params, f, M)
    return RadialOperator(toeplitz_prefactor(params, M) * vals, n)


def _toeplitz_integrals(params: ModelParams, f: RadialProfile, M: int) -> np.ndarray:
    n, nu = params.n, params.nu
    # s = tanh^2 t: ds = 2 tanh t sech^2 t dt, (1-s) = sech^2 t
    kappa = 2.0 * (nu - n + f.decay) if math.isfinite(f.decay) else math.inf
    if math.isinf(kappa):
        t_end = float(np.arctanh(max(f.breakpoints)))
    else:
        t_end = min(max(45.0 / kappa, 4.0), 400.0)
    breaks = sorted({0.0, t_end, *(float(np.arctanh(b)) for b in f.breakpoints)})
    breaks = [b for b in breaks if b <= t_end]
    edges = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        k = max(1, int(math.ceil((hi - lo) / 0.25)))
        edges.extend(np.linspace(lo, hi, k + 1)[:-1])
    edges.append(breaks[-1])
    t, w = numerics.panel_rule(edges, 20)
    th = np.tanh(t)
    log_sech2 = -2.0 * (t + np.log1p(np.exp(-2 * t)) - math.log(2.0))
    fv = np.asarray(f.eval_t(t), complex) * np.ones(t.shape)
    m = np.arange(M + 1)[:, None]
    # s^(n+m-1) (1-s)^(nu-n-1) ds / dt = 2 tanh^(2(n+m)-1) sech^(2(nu-n)) t
    logw = (2.0 * (n + m) - 1.0) * np.log(np.maximum(th, 1e-300)) + (nu - n) * log_sech2
    kern = 2.0 * np.exp(logw)
    return kern @ (w * fv)


def toeplitz_eigs_printed(params: ModelParams, f: RadialProfile, M: Optional[int] = None) -> RadialOperator:
    """Diagnostic: eigenvalues without the sphere-average factor 1/d_m (d_m times the corrected value)."""
    A = toeplitz_eigs(params, f, M)
    return RadialOperator(A.coeffs * A.dims, A.n)


# ---------------------------------------------------------------- T^{lambda,nu}


def _check_lambda(params: ModelParams, lam) -> complex:
    lam = as_lambda(lam)
    if not is_bounded(lam, params.n):
        raise ParameterError(f"lambda = {lam} is outside the bounded strip |Im lambda| <= n")
    h = h_hat(params, params.nu, lam)
    if not abs(h) > HHAT_FLOOR:
        raise DegenerateError(f"h_hat_nu({lam}) = {h} is too small to normalise T^(lambda,nu)")
    return lam


def t_lambda_eigs(params: ModelParams, lam, M: Optional[int] = None, method: str = "closed") -> RadialOperator:
    """Eigenvalues tau_m(lambda) of T^{lambda,nu} = h_hat_nu(lambda)^(-1/2) (phi_lambda * P_0).

    ``method="closed"`` uses the dual Hahn recurrence, ``"quadrature"`` divides
    the Toeplitz eigenvalues of phi_lambda by c_nu sqrt(h_hat_nu).
    """
    M = params.truncation if M is None else int(M)
    lam = _check_lambda(params, lam)
    if method == "closed":
        return RadialOperator(tau_table(params, [lam], M)[:, 0], params.n)
    if method != "quadrature":
        raise ParameterError("method must be 'closed' or 'quadrature'")
    prof = numeric(
        lambda r, y: phi_grid(params, [lam], np.ravel(geodesic(r, y)))[0].reshape(np.shape(r)),
        decay=0.5 * (params.rho - abs(lam.imag)),
        bounded=True,
        label=f"phi[{lam}]",
    )
    T = toeplitz_eigs(params, prof, M)
    root = np.sqrt(complex(h_hat(params, params.nu, lam)))
    return RadialOperator(T.coeffs / (c_nu(params) * root), params.n)


# ---------------------------------------------------------------- Berezin


def berezin(params: ModelParams, A: RadialOperator, r):
    """Berezin transform (1-r^2)^nu sum_m c_m (nu)_m/m! r^(2m)."""
    r = np.asarray(r, float)
    m = np.arange(A.degree + 1)
    w = pochhammer_ratio(params.nu, m)
    y = (1 - r) * (1 + r)
    powers = r[..., None] ** (2 * m)
    out = y**params.nu * (powers @ (A.coeffs * w))
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------- matrix oracle


@dataclass(frozen=True)
class MatrixRep:
    matrix: np.ndarray
    tail: np.ndarray

    @property
    def tail_max(self) -> float:
        return float(self.tail.max())


def matrix_rep_oracle(
    params: ModelParams, t: float, M: int, tol: float = 1e-8, block: Optional[int] = None
) -> MatrixRep:
    """Matrix of pi_nu(a_t) in the normalised monomial basis of the disc, degrees 0..M.

    pi(a_t) z^b = k_{tanh t}(z) (a_{-t} z)^b = cosh(t)^(-nu) (1 - z tanh t)^(-nu) B(z)^b
    with the Blaschke factor B(z) = (z - tanh t) / (1 - z tanh t).  Column 0 is a
    binomial series; column b+1 follows from column b through
    (1 - th z) h = (z - th) f, which needs no cancellation of large terms.
    Truncating every series at degree M leaves the coefficients up to M exact.
    ``tail`` holds, per column, 1 - (column norm)^2, the mass beyond degree M.
    """
    if params.n != 1:
        raise ParameterError("the matrix oracle is implemented for n = 1")
    nu = params.nu
    th = math.tanh(t)
    k = np.arange(M + 1)
    log_norm = 0.5 * (np.real(log_gamma(k + 1.0)) + math.lgamma(nu) - np.real(log_gamma(nu + k)))
    lg = np.real(log_gamma(nu + k)) - math.lgamma(nu) - np.real(log_gamma(k + 1.0))
    if th == 0:
        f = (k == 0).astype(float)
    else:
        f = np.exp(lg + k * math.log(abs(th)) - nu * math.log(math.cosh(t))) * np.sign(th) ** k
    U = np.zeros((M + 1, M + 1))
    for b in range(M + 1):
        U[:, b] = f * np.exp(log_norm - log_norm[b])
        h = np.empty_like(f)
        h[0] = -th * f[0]
        for j in range(1, M + 1):
            h[j] = th * h[j - 1] + f[j - 1] - th * f[j]
        f = h
    col = np.sum(U**2, axis=0)
    tail = np.abs(1.0 - col)
    check = tail[: (block if block is not None else max(M - 8, 1))]
    if check.size and check.max() > tol:
        warnings.warn(
            f"matrix oracle truncation tail {check.max():.1e} exceeds {tol:g}",
            TruncationWarning,
            stacklevel=2,
        )
    return MatrixRep(U, tail)


def matrix_conv_oo(params: ModelParams, A: RadialOperator, B: RadialOperator, t: float, M: int = 120) -> float:
    """(A*B)(tanh t) = sum_{a,b} c_a(A) c_b(B) |U(t)_{ab}|^2 from the matrix oracle."""
    rep = matrix_rep_oracle(params, t, M, tol=np.inf)
    U2 = rep.matrix**2
    a = A.padded(M)[: M + 1]
    b = B.padded(M)[: M + 1]
    return complex(a @ U2 @ b)

"""Convolutions of functions and operators, the algebra of pairs and its Gelfand functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NonIntegrableError, ParameterError
from .funxform import (
    PlancherelRule,
    build_plancherel_rule,
    exact_transform,
    sft,
    spectral_profile,
    tau_table,
)
from .model import (
    ModelParams,
    RadialProfile,
    combination,
    invariant_integral,
    numeric,
    zero_profile,
)
from .radop import RadialOperator, _check_lambda, adjoint, schatten_norm, zero_operator
from .spherical import SpectralPoint, as_lambda, is_bounded


# Output truncation for f * A when its Gelfand transform is compared pointwise;
# the coefficients of f * A decay only algebraically in m.
GELFAND_TRUNCATION = 8000

# ---------------------------------------------------------------- operator transform


def op_fourier(params: ModelParams, A: RadialOperator, lam):
    """A-hat(lambda) = tr(A T^{lambda,nu}) = sum_m d_m c_m tau_m(lambda)."""
    lams = np.atleast_1d(np.asarray([as_lambda(l) for l in np.ravel(lam)], complex))
    for l in np.unique(lams):
        _check_lambda(params, l)
    if not np.any(A.coeffs):
        out = np.zeros(lams.shape, complex)
    else:
        tau = tau_table(params, lams, A.degree)
        out = (A.dims * A.coeffs) @ tau
    return out.reshape(np.shape(lam)) if np.ndim(lam) else complex(out[0])


def op_inverse_fourier(
    params: ModelParams, F, M: Optional[int] = None, rule: Optional[PlancherelRule] = None
) -> RadialOperator:
    """c_m = int F(lambda) tau_m(lambda) d mu(lambda), m = 0..M."""
    rule = rule or build_plancherel_rule(params)
    M = params.truncation if M is None else int(M)
    vals = rule.sample(F)
    coeffs = rule.tau(M) @ (rule.weights * vals)
    return RadialOperator(coeffs, params.n)


# ---------------------------------------------------------------- convolutions


def _transform_fn(params: ModelParams, f: RadialProfile):
    exact = exact_transform(params, f)
    if exact is not None:
        return exact
    return lambda lam: sft(params, f, np.asarray(lam), method="quadrature")


def conv_ff(params: ModelParams, f: RadialProfile, g: RadialProfile, rule: Optional[PlancherelRule] = None) -> RadialProfile:
    """f * g through the spectral route: inverse transform of f-hat g-hat."""
    for h in (f, g):
        if not h.is_l1(params.n):
            raise NonIntegrableError(f"{h.label} is not in L1 of the invariant measure")
    if f.kind == "zero" or g.kind == "zero":
        return zero_profile()
    tf, tg = _transform_fn(params, f), _transform_fn(params, g)
    return spectral_profile(
        params,
        lambda lam: np.asarray(tf(lam)) * np.asarray(tg(lam)),
        decay=min(f.decay, g.decay),
        label=f"({f.label})*({g.label})",
        rule=rule,
    )


def conv_oo(params: ModelParams, A: RadialOperator, B: RadialOperator, rule: Optional[PlancherelRule] = None) -> RadialProfile:
    """A * B (x) = tr(A alpha_x(B)) through the spectral route: inverse transform of A-hat B-hat."""
    if not np.any(A.coeffs) or not np.any(B.coeffs):
        return zero_profile()
    return spectral_profile(
        params,
        lambda lam: op_fourier(params, A, lam) * op_fourier(params, B, lam),
        decay=params.nu,
        label="op*op",
        rule=rule,
    )


def conv_fo(
    params: ModelParams,
    f: RadialProfile,
    A: RadialOperator,
    M: Optional[int] = None,
    rule: Optional[PlancherelRule] = None,
    report: bool = False,
):
    """f * A, an operator with c_m = int f-hat A-hat tau_m d mu.

    The output degree is max(deg A, M or the model truncation).  With
    ``report=True`` the pair (operator, estimated trace-norm tail) is returned.
    """
    if not f.is_l1(params.n):
        raise NonIntegrableError(f"{f.label} is not in L1 of the invariant measure")
    rule = rule or build_plancherel_rule(params)
    M = max(A.degree, params.truncation if M is None else int(M))
    if f.kind == "zero" or not np.any(A.coeffs):
        out = RadialOperator(np.zeros(M + 1), params.n)
        return (out, 0.0) if report else out
    fh = _transform_fn(params, f)(rule.nodes)
    ah = op_fourier(params, A, rule.nodes)
    out = op_inverse_fourier(params, lambda _: fh * ah, M, rule)
    if report:
        return out, trace_norm_tail(out)
    return out


def trace_norm_tail(A: RadialOperator) -> float:
    """Power-law estimate of sum_{m > M} d_m |c_m| from the last coefficients."""
    M = A.degree
    if M < 8:
        return 0.0
    m = np.arange(M // 2, M + 1)
    v = A.dims[m] * np.abs(A.coeffs[m])
    ok = v > 0
    if np.count_nonzero(ok) < 4:
        return 0.0
    slope, icpt = np.polyfit(np.log(m[ok]), np.log(v[ok]), 1)
    if slope >= -1:
        return math.inf
    return float(math.exp(icpt) * M ** (slope + 1) / (-slope - 1))


# ---------------------------------------------------------------- the algebra


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """A pair (f, A) with f integrable for the invariant measure and A a radial operator."""

    fun: RadialProfile = field(default_factory=zero_profile)
    op: RadialOperator = field(default_factory=zero_operator)

    def __post_init__(self):
        if self.fun.kind != "zero" and not self.fun.decay > 0:
            raise NonIntegrableError("function component must be integrable")


@dataclass(frozen=True)
class GelfandPoint:
    """A multiplicative functional labelled by a bounded lambda and a sign bit j."""

    lam: complex
    j: int = 0

    def __post_init__(self):
        lam = as_lambda(self.lam)
        if self.j not in (0, 1):
            raise ParameterError("j must be 0 or 1")
        object.__setattr__(self, "lam", SpectralPoint(lam).canonical.value)

    def check(self, n: int):
        if not is_bounded(self.lam, n):
            raise ParameterError(f"lambda = {self.lam} is outside the strip |Im lambda| <= {n}")


def algebra_mul(params: ModelParams, x: AlgebraElement, y: AlgebraElement, M: Optional[int] = None, rule=None) -> AlgebraElement:
    """(f, A)(g, B) = (f*g + A*B, f*B + g*A)."""
    n = params.n
    funs = []
    if x.fun.kind != "zero" and y.fun.kind != "zero":
        funs.append(conv_ff(params, x.fun, y.fun, rule))
    if np.any(x.op.coeffs) and np.any(y.op.coeffs):
        funs.append(conv_oo(params, x.op, y.op, rule))
    fun = combination([1.0] * len(funs), funs) if funs else zero_profile()
    ops = []
    if x.fun.kind != "zero" and np.any(y.op.coeffs):
        ops.append(conv_fo(params, x.fun, y.op, M, rule))
    if y.fun.kind != "zero" and np.any(x.op.coeffs):
        ops.append(conv_fo(params, y.fun, x.op, M, rule))
    op = zero_operator(n)
    for o in ops:
        op = op + o
    return AlgebraElement(fun, op)


def algebra_involution(x: AlgebraElement) -> AlgebraElement:
    """(f, A)* = (conj f, A*)."""
    return AlgebraElement(x.fun.conj(), adjoint(x.op))


def algebra_norm(params: ModelParams, x: AlgebraElement) -> float:
    """||f||_1 + ||A||_1."""
    return function_l1_norm(params, x.fun) + schatten_norm(x.op, 1)


def function_l1_norm(params: ModelParams, f: RadialProfile) -> float:
    if f.kind == "zero":
        return 0.0
    absf = numeric(
        lambda r, y: np.abs(f.func(r, y)),
        decay=f.decay,
        bounded=f.bounded,
        label=f"|{f.label}|",
        real=True,
        breakpoints=f.breakpoints,
    )
    return float(np.real(invariant_integral(absf, params)))


def gelfand_eval(params: ModelParams, x: AlgebraElement, p: GelfandPoint, method: str = "auto") -> complex:
    """Phi_{lambda,j}(f, A) = f-hat(lambda) + (-1)^j A-hat(lambda).

    ``method`` is passed to :func:`sft`; ``"quadrature"`` ignores any transform
    the profile carries and integrates its values.
    """
    p.check(params.n)
    val = 0j
    if x.fun.kind != "zero":
        val += sft(params, x.fun, p.lam, method=method)
    if np.any(x.op.coeffs):
        val += (-1) ** p.j * op_fourier(params, x.op, p.lam)
    return complex(val)


# ---------------------------------------------------------------- checks


def op_plancherel_check(params: ModelParams, A: RadialOperator, rule: Optional[PlancherelRule] = None):
    """(sum_m d_m |c_m|^2, int |A-hat|^2 d mu)."""
    rule = rule or build_plancherel_rule(params)
    lhs = float(np.dot(A.dims, np.abs(A.coeffs) ** 2))
    if not np.any(A.coeffs):
        return lhs, 0.0
    ah = op_fourier(params, A, rule.nodes)
    rhs = float(np.dot(rule.weights, np.abs(ah) ** 2))
    return lhs, rhs


def pd_gram_check(params: ModelParams, A: RadialOperator, ts: Sequence[float], rule=None) -> float:
    """Smallest eigenvalue of G_jk = (A* * A)(|tanh(t_k - t_j)|) for points a_t on a geodesic."""
    if params.n != 1:
        raise ParameterError("the Gram check samples the one-parameter group at n = 1")
    ts = np.asarray(ts, float)
    conv = conv_oo(params, adjoint(A), A, rule)
    diff = np.abs(ts[:, None] - ts[None, :])
    uniq, inv = np.unique(diff, return_inverse=True)
    vals = np.asarray(conv.func(np.tanh(uniq), 1.0 / np.cosh(uniq) ** 2), complex)
    G = vals[inv].reshape(diff.shape)
    G = 0.5 * (G + G.conj().T)
    return float(np.linalg.eigvalsh(G).min())

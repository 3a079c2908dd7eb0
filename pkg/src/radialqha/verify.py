"""Named numerical checks grouped into suites, with machine-readable residuals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from . import numerics
from .errors import QHAError
from .funxform import (
    build_plancherel_rule,
    h_hat,
    isft,
    max_product_defect,
    overlap_agreement,
    sft,
    tau_table,
)
from .model import (
    ModelParams,
    combination,
    hpow,
    hpow_invariant_norm,
    indicator,
    phi_nu,
    pochhammer_ratio,
    radial_integral,
)
from .oracles import berezin_direct
from .qha import (
    GELFAND_TRUNCATION,
    AlgebraElement,
    GelfandPoint,
    algebra_involution,
    algebra_mul,
    conv_fo,
    conv_ff,
    conv_oo,
    gelfand_eval,
    op_fourier,
    op_inverse_fourier,
    op_plancherel_check,
)
from .radop import (
    RadialOperator,
    berezin,
    matrix_conv_oo,
    toeplitz_eigs,
)
from .spherical import phi_t

SUITES = ("specfun", "spherical", "transform", "operators", "algebra", "plancherel")


@dataclass
class Check:
    name: str
    suite: str
    residual: float
    tolerance: float
    relation: str = "<="
    status: str = ""
    detail: str = ""

    def __post_init__(self):
        if self.status:
            return
        r = self.residual
        if not math.isfinite(r):
            self.status = "fail"
        elif self.relation == "<=":
            self.status = "pass" if r <= self.tolerance else "fail"
        else:
            self.status = "pass" if r >= self.tolerance else "fail"

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "skip")

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "suite": self.suite,
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "relation": self.relation,
            "status": self.status,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


_REGISTRY: Dict[str, List[Callable]] = {s: [] for s in SUITES}


def _check(suite: str):
    def deco(fn):
        _REGISTRY[suite].append(fn)
        return fn

    return deco


def _skip(name, suite, why):
    return Check(name, suite, 0.0, 0.0, status="skip", detail=why)


def _random_operator(rng, n, degree, complex_coeffs=True):
    c = rng.normal(size=degree + 1)
    if complex_coeffs:
        c = c + 1j * rng.normal(size=degree + 1)
    return RadialOperator(c, n)


# ---------------------------------------------------------------- specfun


@_check("specfun")
def _gamma_reflection(params, rng):
    z = np.array([0.3 + 0.2j, 1.7 - 2.1j, -2.5 + 0.5j, 0.5])
    lhs = np.exp(numerics.log_gamma(z) + numerics.log_gamma(1 - z))
    rhs = np.pi / np.sin(np.pi * z)
    return Check("gamma reflection", "specfun", float(np.max(np.abs(lhs / rhs - 1))), 1e-12)


@_check("specfun")
def _gamma_half(params, rng):
    val = math.exp(numerics.log_gamma(0.5).real)
    return Check("gamma at one half", "specfun", abs(val - math.sqrt(math.pi)), 1e-14)


@_check("specfun")
def _hyp2f1_log(params, rng):
    x = np.array([-3.0, -0.5, 0.2, 0.7, 0.95])
    val = numerics.hyp2f1(1.0, 1.0, 2.0, x)
    ref = -np.log1p(-x) / x
    return Check("hyp2f1 logarithm closed form", "specfun", float(np.max(np.abs(val - ref))), 1e-12)


@_check("specfun")
def _hyp2f1_doubling(params, rng):
    a, b = 0.7 + 0.3j, 1.1 - 0.3j
    x = np.array([0.1, 0.5, 0.8])
    gap = np.abs(numerics.hyp2f1(a, b, a + b + 0.5, x) - numerics.hyp2f1_doubling(a, b, x))
    return Check("hyp2f1 doubling transformation", "specfun", float(np.max(gap)), 1e-12)


@_check("specfun")
def _beta_closure(params, rng):
    n, worst = params.n, 0.0
    for sigma in (params.nu, params.nu + 1, n + 0.5):
        val = radial_integral(hpow(sigma), n, -(n + 1.0), params.quad).real
        worst = max(worst, abs(val / hpow_invariant_norm(sigma, n) - 1))
    return Check("invariant integral beta closure", "specfun", worst, 1e-10)


@_check("specfun")
def _halfline(params, rng):
    val = numerics.integrate_halfline(lambda x: np.exp(-x) * np.cos(x))
    return Check("half-line quadrature", "specfun", abs(val - 0.5), 1e-11)


# ---------------------------------------------------------------- spherical


@_check("spherical")
def _phi_origin(params, rng):
    lams = [0.0, 0.5, 2.0, 5.0, 1j * params.n, 1.0 + 0.5j]
    worst = max(abs(phi_t(params, l, 0.0) - 1) for l in lams)
    return Check("phi at the origin equals one", "spherical", worst, 1e-14)


@_check("spherical")
def _phi_trivial(params, rng):
    t = np.array([0.3, 1.0, 3.0])
    worst = float(np.max(np.abs(phi_t(params, 1j * params.rho, t) - 1)))
    return Check("trivial character is one", "spherical", worst, 1e-12)


@_check("spherical")
def _phi_even(params, rng):
    t = np.array([0.2, 1.5, 6.0])
    lam = 1.3 + 0.4j
    worst = float(np.max(np.abs(phi_t(params, lam, t) - phi_t(params, -lam, t))))
    return Check("phi is even in lambda", "spherical", worst, 1e-13)


@_check("spherical")
def _overlap(params, rng):
    return Check("series and sphere integral agree", "spherical", overlap_agreement(params), 1e-8)


@_check("spherical")
def _product(params, rng):
    return Check("product formula", "spherical", max_product_defect(params), 1e-6)


@_check("spherical")
def _product_rejected(params, rng):
    alt = params.n - 0.5 if params.rho == params.n else float(params.n)
    other = params.replace(rho=alt, rho_override=False)
    return Check("rejected rho violates product formula", "spherical", max_product_defect(other), 1e-2, ">=")


# ---------------------------------------------------------------- transform


@_check("transform")
def _sft_routes(params, rng):
    lams = np.array([0.5, 2.0, 7.0, 0.5j])
    f = hpow(params.nu + 0.5)
    gap = np.abs(sft(params, f, lams, "exact") - sft(params, f, lams, "quadrature"))
    return Check("closed-form and quadrature transforms agree", "transform", float(np.max(gap)), 1e-10)


@_check("transform")
def _sft_indicator(params, rng):
    lams = np.array([0.0, 1.0, 4.0])
    f = indicator(0.5)
    a = sft(params, f, lams, "quadrature")
    # transform at lambda = i rho is the invariant volume of the ball of radius 1/2
    vol = sft(params, f, 1j * params.rho, "quadrature")
    ref = radial_integral(f, params.n, -(params.n + 1.0), params.quad)
    return Check(
        "indicator transform at the trivial character",
        "transform",
        abs(vol - ref) + float(np.max(np.abs(a.imag))),
        1e-10,
    )


@_check("transform")
def _roundtrip(params, rng):
    rule = build_plancherel_rule(params)
    r = np.array([0.0, 0.3, 0.6])
    vals = isft(params, lambda l: h_hat(params, params.nu, l), r, rule)
    return Check("inverse transform round trip", "transform", float(np.max(np.abs(vals - (1 - r**2) ** params.nu))), 1e-5)


# ---------------------------------------------------------------- operators


@_check("operators")
def _kernel_series(params, rng):
    # sum over |alpha| = m of |z^alpha|^2 / ||z^alpha||^2 is (nu)_m/m! |z|^(2m)
    m = np.arange(201)
    worst = 0.0
    for r in (0.2, 0.5, 0.8):
        s = np.sum(pochhammer_ratio(params.nu, m) * r ** (2 * m))
        worst = max(worst, abs(s * (1 - r * r) ** params.nu - 1))
    return Check("reproducing kernel series", "operators", worst, 1e-10)


@_check("operators")
def _toeplitz_one(params, rng):
    from .model import constant

    c = toeplitz_eigs(params, constant(1.0), 40).coeffs
    return Check("toeplitz operator of one is the identity", "operators", float(np.max(np.abs(c - 1))), 1e-10)


@_check("operators")
def _toeplitz_beta(params, rng):
    n, nu, worst = params.n, params.nu, 0.0
    m = np.arange(41)
    for sigma in (0.5, 2.0, nu):
        c = toeplitz_eigs(params, hpow(sigma), 40).coeffs
        ref = np.exp(
            np.array([math.lgamma(nu + k) - math.lgamma(nu + sigma + k) for k in m])
            + math.lgamma(nu + sigma - n) - math.lgamma(nu - n)
        )
        worst = max(worst, float(np.max(np.abs(c / ref - 1))))
    return Check("toeplitz eigenvalues of powers", "operators", worst, 1e-9)


@_check("operators")
def _regularity(params, rng):
    lams = np.array([0.0, 0.5, 2.0, 5.0, 20.0, 0.5j, 0.3 + 0.2j])
    P0 = RadialOperator.projection(0, params.n)
    a = op_fourier(params, P0, lams)
    h = h_hat(params, params.nu, lams)
    return Check("operator transform of P0 squares to h-hat", "operators", float(np.max(np.abs(a * a - h) / np.abs(h))), 1e-8)


@_check("operators")
def _tau_bound(params, rng):
    lams = np.linspace(0.0, 60.0, 121)
    tau = tau_table(params, lams, 200)
    return Check("eigenvalues of T bounded by one", "operators", float(np.max(np.abs(tau))), 1 + 1e-10)


@_check("operators")
def _riemann_lebesgue(params, rng):
    rule = build_plancherel_rule(params)
    A = RadialOperator([1.0, 1.0], params.n)
    return Check("riemann-lebesgue decay", "operators", abs(op_fourier(params, A, rule.lambda_max)), 1e-4)


@_check("operators")
def _injectivity(params, rng):
    rule = build_plancherel_rule(params)
    worst = 0.0
    for _ in range(5):
        A = _random_operator(rng, params.n, 8)
        B = op_inverse_fourier(params, lambda l: op_fourier(params, A, l), 8, rule)
        worst = max(worst, float(np.max(np.abs(B.coeffs - A.coeffs))))
    return Check("operator transform round trip", "operators", worst, 1e-4)


# ---------------------------------------------------------------- algebra


@_check("algebra")
def _p0p0(params, rng):
    r = np.linspace(0.0, 0.9, 10)
    P0 = RadialOperator.projection(0, params.n)
    v = conv_oo(params, P0, P0)(r)
    return Check("P0 convolved with P0 is h", "algebra", float(np.max(np.abs(v - (1 - r**2) ** params.nu))), 1e-4)


@_check("algebra")
def _pmp0(params, rng):
    r = np.linspace(0.0, 0.9, 10)
    P0 = RadialOperator.projection(0, params.n)
    worst = 0.0
    for m in (1, 2, 5):
        Pm = RadialOperator.projection(m, params.n)
        worst = max(worst, float(np.max(np.abs(conv_oo(params, Pm, P0)(r) - berezin(params, Pm, r)))))
    return Check("Pm convolved with P0 is its berezin transform", "algebra", worst, 1e-4)


@_check("algebra")
def _fo_toeplitz(params, rng):
    from .model import c_nu

    P0 = RadialOperator.projection(0, params.n)
    worst = 0.0
    for f in (hpow(params.nu), indicator(0.5)):
        a = conv_fo(params, f, P0, 20).coeffs
        b = toeplitz_eigs(params, f, 20).coeffs / c_nu(params)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return Check("function convolved with P0 is toeplitz", "algebra", worst, 1e-4)


@_check("algebra")
def _matrix_oracle(params, rng):
    name = "operator convolution matches the matrix oracle"
    if params.n != 1:
        return _skip(name, "algebra", "the matrix oracle is defined on the disc")
    worst = 0.0
    for _ in range(3):
        A = RadialOperator(rng.normal(size=5), 1)
        B = RadialOperator(rng.normal(size=5), 1)
        conv = conv_oo(params, A, B)
        for t in (0.3, 0.7):
            worst = max(worst, abs(conv(math.tanh(t)) - matrix_conv_oo(params, A, B, t, 200)))
    return Check(name, "algebra", worst, 1e-4)


@_check("algebra")
def _berezin_direct(params, rng):
    name = "convolution with phi_nu is the berezin transform"
    if params.n != 1:
        return _skip(name, "algebra", "the direct quadrature is defined on the disc")
    worst = 0.0
    for f in (hpow(params.nu), indicator(0.5)):
        conv = conv_ff(params, f, phi_nu(params))
        for r in (0.0, 0.4, 0.8):
            worst = max(worst, abs(conv(r) - berezin_direct(params, f, r)))
    return Check(name, "algebra", worst, 1e-5)


def random_element(params: ModelParams, rng, degree: int = 4) -> AlgebraElement:
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    f = combination(list(c), [hpow(params.nu), hpow(params.nu + 1)])
    return AlgebraElement(f, _random_operator(rng, params.n, degree))


GELFAND_POINTS = tuple(GelfandPoint(l, j) for l in (0.7, 3.0, 10.0) for j in (0, 1))
PD_POINTS = tuple(GelfandPoint(l, j) for l in (0.7, 4.0, 0.5j) for j in (0, 1))


def multiplicativity_residual(params, x, y, points=GELFAND_POINTS, M=GELFAND_TRUNCATION, rule=None) -> float:
    """Largest |Phi(x y) - Phi(x) Phi(y)|, the function part of x y transformed by quadrature."""
    xy = algebra_mul(params, x, y, M, rule)
    worst = 0.0
    for p in points:
        lhs = gelfand_eval(params, xy, p, method="quadrature")
        rhs = gelfand_eval(params, x, p) * gelfand_eval(params, y, p)
        worst = max(worst, abs(lhs - rhs))
    return worst


def star_residual(params, x, points=PD_POINTS) -> float:
    xs = algebra_involution(x)
    return max(abs(gelfand_eval(params, xs, p) - np.conj(gelfand_eval(params, x, p))) for p in points)


@_check("algebra")
def _multiplicativity(params, rng):
    rule = build_plancherel_rule(params)
    worst = max(
        multiplicativity_residual(params, random_element(params, rng), random_element(params, rng), rule=rule)
        for _ in range(5)
    )
    return Check("gelfand multiplicativity", "algebra", worst, 1e-5)


@_check("algebra")
def _star(params, rng):
    worst = max(star_residual(params, random_element(params, rng)) for _ in range(10))
    return Check("gelfand star compatibility", "algebra", worst, 1e-6)


# ---------------------------------------------------------------- plancherel


@_check("plancherel")
def _hhat_integral(params, rng):
    rule = build_plancherel_rule(params)
    val = rule.integrate(h_hat(params, params.nu, rule.nodes))
    return Check("integral of h-hat equals one", "plancherel", abs(val - 1), 1e-5)


@_check("plancherel")
def _plancherel_hpow(params, rng):
    rule = build_plancherel_rule(params)
    h1 = np.real(h_hat(params, params.nu + 1, rule.nodes))
    norm = hpow_invariant_norm(2 * params.nu + 2, params.n)
    return Check("plancherel identity for the next power", "plancherel", abs(rule.integrate(h1 * h1) / norm - 1), 1e-5)


@_check("plancherel")
def _op_plancherel(params, rng):
    rule = build_plancherel_rule(params)
    worst = 0.0
    for _ in range(20):
        A = _random_operator(rng, params.n, int(rng.integers(0, 9)))
        lhs, rhs = op_plancherel_check(params, A, rule)
        worst = max(worst, abs(lhs - rhs) / lhs)
    return Check("operator plancherel identity", "plancherel", worst, 1e-4)


# ---------------------------------------------------------------- driver


def run_suite(params: ModelParams, suite: str = "all", seed: int = 0) -> dict:
    """Run one suite (or ``"all"``) and return a JSON-ready report."""
    if suite != "all" and suite not in _REGISTRY:
        raise ValueError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
    names = SUITES if suite == "all" else (suite,)
    checks: List[Check] = []
    for s in names:
        rng = np.random.default_rng(seed)
        for fn in _REGISTRY[s]:
            try:
                checks.append(fn(params, rng))
            except (QHAError, ArithmeticError, ValueError) as exc:
                checks.append(
                    Check(fn.__name__.strip("_").replace("_", " "), s, math.nan, 0.0, status="error", detail=str(exc))
                )
    failing = [c.name for c in checks if not c.passed]
    return {
        "suite": suite,
        "seed": seed,
        "model": params.as_dict(),
        "checks": [c.to_dict() for c in checks],
        "failing": failing,
        "passed": not failing,
    }

"""Spherical Fourier transform, Plancherel measure and inversion."""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Union

import numpy as np

from . import numerics
from .errors import CalibrationError, NonIntegrableError, ParameterError, TruncationWarning
from .model import ModelParams, RadialProfile, dims, geodesic, hpow, hpow_invariant_norm, numeric
from .numerics import log_gamma
from .spherical import (
    as_lambda,
    is_positive_definite,
    phi_grid,
    phi_integral_rep,
    phi_series,
    product_defect,
)

PANEL_WIDTH = 4.0
PANEL_ORDER = 32
TAIL_REL = 1e-14
TAIL_DEGREE = 16
ACCEPT_TOL = 1e-5
DEFECT_TOL = 1e-6


# ---------------------------------------------------------------- closed forms


def h_hat(params: ModelParams, sigma: float, lam):
    """Spherical transform of (1 - r^2)^sigma in closed form.

    n! Gamma(s + (rho + i l)/2) Gamma(s + (rho - i l)/2) / (Gamma(sigma) Gamma(s + rho))
    with s = sigma - n.
    """
    n, rho = params.n, params.rho
    if not sigma > n:
        raise NonIntegrableError("h_hat needs sigma > n")
    lam = np.asarray(lam, complex)
    s = sigma - n
    lg = (
        math.lgamma(n + 1)
        + log_gamma(s + 0.5 * (rho + 1j * lam))
        + log_gamma(s + 0.5 * (rho - 1j * lam))
        - math.lgamma(sigma)
        - math.lgamma(s + rho)
    )
    out = np.exp(lg)
    real = np.abs(lam.imag) == 0
    out = np.where(real, out.real, out)
    return out if out.ndim else complex(out)


def plancherel_density(params: ModelParams, lam, literal: bool = False):
    """Uncalibrated Plancherel density rho0(lambda) on lambda > 0.

    rho0 = |Gamma((rho + i l)/2)|^4 / |Gamma(i l)|^2, using
    |Gamma(i l)|^-2 = l sinh(pi l) / pi.  ``literal=True`` returns the
    alternative |Gamma(i l)|^2 / |Gamma((rho+i l)/2) Gamma((n-1+i l)/2)|^2, kept
    for diagnostics only.
    """
    lam = np.asarray(lam, float)
    rho = params.rho
    pos = lam > 0
    out = np.zeros(lam.shape)
    lp = lam[pos]
    if not literal:
        log_sinh = np.pi * lp + np.log1p(-np.exp(-2 * np.pi * lp)) - math.log(2.0)
        logval = 4 * np.real(log_gamma(0.5 * (rho + 1j * lp))) + np.log(lp) + log_sinh - math.log(math.pi)
    else:
        log_g2 = 2 * np.real(log_gamma(1j * lp))
        logval = (
            log_g2
            - 2 * np.real(log_gamma(0.5 * (rho + 1j * lp)))
            - 2 * np.real(log_gamma(0.5 * (params.n - 1 + 1j * lp)))
        )
    out[pos] = np.exp(logval)
    return out if out.ndim else float(out)


def tau_table(params: ModelParams, lams, M: int) -> np.ndarray:
    """Eigenvalues tau_m(lambda), m = 0..M, of T^{lambda,nu} (rows m, columns lambda).

    tau_m = (nu)_m/(n)_m sqrt(h_hat_nu) S_m(lambda) where S_m is the normalised
    continuous dual Hahn polynomial 3F2(-m, a+ix, a-ix; nu, nu-n+rho; 1) with
    a = nu - n + rho/2, x = lambda/2, evaluated by its three-term recurrence.
    """
    n, nu, rho = params.n, params.nu, params.rho
    lams = np.atleast_1d(np.asarray(lams, complex))
    a = nu - n + 0.5 * rho
    b = n - 0.5 * rho
    c = 0.5 * rho
    x2 = (0.5 * lams) ** 2
    S = np.empty((M + 1, lams.size), complex)
    S[0] = 1.0
    if M >= 1:
        A0 = (a + b) * (a + c)
        S[1] = (A0 - (a * a + x2)) / A0
    for m in range(1, M):
        A = (m + a + b) * (m + a + c)
        C = m * (m + b + c - 1)
        S[m + 1] = ((A + C - (a * a + x2)) * S[m] - C * S[m - 1]) / A
    m = np.arange(M + 1)
    pref = np.exp(
        np.real(log_gamma(nu + m)) - math.lgamma(nu) - np.real(log_gamma(n + m)) + math.lgamma(n)
    )
    root = np.sqrt(np.asarray(h_hat(params, nu, lams), complex))
    out = pref[:, None] * root[None, :] * S
    if np.all(lams.imag == 0):
        out = out.real.astype(complex)
    return out


# ---------------------------------------------------------------- sampled data


@dataclass(frozen=True)
class SampledTransform:
    """Values of a spectral function on a nonnegative lambda grid."""

    nodes: np.ndarray
    values: np.ndarray
    meta: str = ""

    def __post_init__(self):
        nodes = np.asarray(self.nodes, float)
        values = np.asarray(self.values, complex)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise ParameterError("nodes and values must be 1-d arrays of equal length")
        if np.any(nodes < 0) or np.any(np.diff(nodes) <= 0):
            raise ParameterError("nodes must be nonnegative and strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    def __mul__(self, other: "SampledTransform") -> "SampledTransform":
        if not isinstance(other, SampledTransform):
            return SampledTransform(self.nodes, self.values * other, self.meta)
        if other.nodes.shape != self.nodes.shape or np.any(other.nodes != self.nodes):
            raise ParameterError("sampled transforms live on different grids")
        return SampledTransform(self.nodes, self.values * other.values, self.meta)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class PlancherelRule:
    """Quadrature for d mu(lambda) = c_P rho0(lambda) d lambda on [0, lambda_max]."""

    nodes: np.ndarray
    weights: np.ndarray
    c_P: float
    lambda_max: float
    calibration_residual: float
    params: ModelParams
    residuals: Dict[str, float] = field(default_factory=dict)
    _cache: Dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def key(self) -> str:
        return self.params.key()

    def tau(self, M: int) -> np.ndarray:
        """tau_m on the nodes for m = 0..M (cached, read-safe)."""
        with self._lock:
            best = self._cache.get("tau")
            if best is None or best.shape[0] <= M:
                best = tau_table(self.params, self.nodes, max(M, self.params.truncation)).real
                best.setflags(write=False)
                self._cache["tau"] = best
        return best[: M + 1]

    def integrate(self, values) -> complex:
        values = np.asarray(values, complex)
        return complex(np.dot(self.weights, values))

    def sample(self, F: Union[SampledTransform, Callable]) -> np.ndarray:
        if isinstance(F, SampledTransform):
            if F.nodes.shape != self.nodes.shape or np.any(F.nodes != self.nodes):
                raise ParameterError("sampled transform is not on this rule's nodes")
            return F.values
        return np.asarray(F(self.nodes), complex) * np.ones(self.nodes.shape)

    def to_dict(self) -> dict:
        return {
            "c_P": self.c_P,
            "lambda_max": self.lambda_max,
            "calibration_residual": self.calibration_residual,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "residuals": dict(self.residuals),
            "model_key": self.key,
        }


def _panel_nodes(lambda_max: float):
    edges = np.arange(0.0, lambda_max + 0.5 * PANEL_WIDTH, PANEL_WIDTH)
    if edges.size < 2:
        edges = np.array([0.0, lambda_max])
    return numerics.panel_rule(edges, PANEL_ORDER)


def _adaptive_lambda_max(params: ModelParams) -> float:
    grid = np.arange(0.5, 600.0, 0.5)
    dens = plancherel_density(params, grid)
    hh = np.real(h_hat(params, params.nu, grid))
    M = min(params.truncation, TAIL_DEGREE)
    tau = tau_table(params, grid, M).real
    d = dims(M, params.n)
    weight = dens * np.maximum(hh, np.max(d[:, None] * tau**2, axis=0))
    big = np.nonzero(weight > TAIL_REL * weight.max())[0]
    last = grid[big[-1]]
    return float(PANEL_WIDTH * math.ceil(last / PANEL_WIDTH))


def _fit(params: ModelParams, nodes, qw, literal=False):
    dens = plancherel_density(params, nodes, literal=literal)
    hh = np.real(h_hat(params, params.nu, nodes))
    target = hpow_invariant_norm(2 * params.nu, params.n)
    base = np.dot(qw * dens, hh * hh)
    if not base > 0:
        raise CalibrationError("Plancherel density vanishes on the quadrature nodes")
    c_P = target / base
    return c_P, c_P * qw * dens


def _validate(params: ModelParams, nodes, weights) -> Dict[str, float]:
    nu, n = params.nu, params.n
    h1 = np.real(h_hat(params, nu + 1, nodes))
    norm1 = hpow_invariant_norm(2 * nu + 2, n)
    res = {
        "plancherel_hpow_nu_plus_1": abs(np.dot(weights, h1 * h1) - norm1) / norm1,
        "inversion_at_origin": abs(np.dot(weights, np.real(h_hat(params, nu, nodes))) - 1.0),
    }
    hh = np.real(h_hat(params, nu, nodes))
    rs = np.array([0.0, 0.3, 0.6])
    keep = np.abs(weights * hh) > 1e-18 * np.max(np.abs(weights * hh))
    vals = (weights[keep] * hh[keep]) @ phi_grid(params, nodes[keep], np.arctanh(rs))
    res["roundtrip"] = float(np.max(np.abs(vals - (1 - rs**2) ** nu)))
    return {k: float(v) for k, v in res.items()}


@lru_cache(maxsize=32)
def build_plancherel_rule(params: ModelParams, tol: float = ACCEPT_TOL) -> PlancherelRule:
    """Calibrated Plancherel rule for the model (cached per parameters)."""
    lam_max = params.lambda_max or _adaptive_lambda_max(params)
    nodes, qw = _panel_nodes(lam_max)
    c_P, weights = _fit(params, nodes, qw)
    res = _validate(params, nodes, weights)
    residual = max(res.values())
    if not np.all(weights > 0):
        raise CalibrationError("Plancherel weights must be positive", report=res)
    if residual > tol:
        raise CalibrationError(
            "Plancherel validation failed: "
            + ", ".join(f"{k}={v:.2e}" for k, v in res.items() if v > tol),
            report=res,
        )
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return PlancherelRule(nodes, weights, float(c_P), float(lam_max), float(residual), params, res)


def rule_from_cache(params: ModelParams, data: dict) -> PlancherelRule:
    """Rebuild a rule from a cached dictionary (see :meth:`PlancherelRule.to_dict`)."""
    if data.get("model_key") != params.key():
        raise ParameterError("cached rule belongs to a different model")
    nodes = np.asarray(data["nodes"], float)
    weights = np.asarray(data["weights"], float)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return PlancherelRule(
        nodes,
        weights,
        float(data["c_P"]),
        float(data["lambda_max"]),
        float(data["calibration_residual"]),
        params,
        dict(data.get("residuals", {})),
    )


# ---------------------------------------------------------------- transforms


def exact_transform(params: ModelParams, f: RadialProfile) -> Optional[Callable]:
    """Closed-form spectral transform of ``f`` when one is known."""
    if f.kind == "zero":
        return lambda lam: np.zeros(np.shape(lam), complex)
    if f.kind == "hpow":
        sigma = f.args[0]
        return (lambda lam: h_hat(params, sigma, lam)) if sigma > params.n else None
    if f.kind == "combination":
        parts = [exact_transform(params, p) for p in f.parts]
        if all(p is not None for p in parts):
            coeffs = f.args
            return lambda lam: sum(c * p(lam) for c, p in zip(coeffs, parts))
        return None
    if f.transform is not None and f.transform_key == params.key():
        return f.transform
    return None


def _t_quadrature(params: ModelParams, f: RadialProfile, lams: np.ndarray) -> np.ndarray:
    n, rho = params.n, params.rho
    kappa = 2 * f.decay - 2 * n + rho - float(np.max(np.abs(lams.imag), initial=0.0))
    if math.isinf(f.decay):
        t_end = float(np.arctanh(max(f.breakpoints)))
    else:
        t_end = min(max(40.0 / kappa, 4.0), 120.0)
    breaks = sorted({0.0, t_end, *(float(np.arctanh(b)) for b in f.breakpoints if b < 1)})
    breaks = [b for b in breaks if b <= t_end]
    h = min(0.5, 8.0 / (float(np.max(np.abs(lams.real), initial=0.0)) + 1.0))
    edges = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        k = max(1, int(math.ceil((hi - lo) / h)))
        edges.extend(np.linspace(lo, hi, k + 1)[:-1])
    edges.append(breaks[-1])
    t, w = numerics.panel_rule(edges, 20)
    jac = 2 * n * np.sinh(t) ** (2 * n - 1) * np.cosh(t)
    fv = np.asarray(f.eval_t(t), complex) * np.ones(t.shape)
    weights = w * jac * fv
    keep = weights != 0
    G = phi_grid(params, lams, t[keep])
    return G @ weights[keep]


def sft(params: ModelParams, f: RadialProfile, lam, method: str = "auto"):
    """Spherical transform of a radial profile at one or more spectral points.

    ``method`` is ``"auto"`` (closed form when available), ``"exact"`` or
    ``"quadrature"`` (t-substitution quadrature against phi_lambda).
    """
    lams = np.atleast_1d(np.asarray([as_lambda(l) for l in np.ravel(lam)], complex))
    n, rho = params.n, params.rho
    imag = float(np.max(np.abs(lams.imag), initial=0.0))
    if not 2 * f.decay - 2 * n + rho - imag > 0:
        raise NonIntegrableError(
            f"{f.label} does not decay fast enough for the requested spectral points"
        )
    exact = exact_transform(params, f) if method in ("auto", "exact") else None
    if method == "exact" and exact is None:
        raise ParameterError(f"no closed-form transform for {f.label}")
    if exact is not None:
        out = np.asarray(exact(lams), complex)
    else:
        out = _t_quadrature(params, f, lams)
    if f.real and np.all(lams.imag == 0):
        out = out.real.astype(complex) if np.all(np.abs(out.imag) <= 1e-14 * np.abs(out) + 1e-300) else out
    return out.reshape(np.shape(lam)) if np.ndim(lam) else complex(out[0])


def sample_transform(params: ModelParams, f: RadialProfile, rule: Optional[PlancherelRule] = None) -> SampledTransform:
    rule = rule or build_plancherel_rule(params)
    return SampledTransform(rule.nodes, sft(params, f, rule.nodes), params.key())


def _tail_check(rule: PlancherelRule, vals: np.ndarray, tol: float = 1e-8):
    contrib = np.abs(rule.weights * vals)
    total = contrib.sum()
    if total == 0:
        return
    tail = contrib[-PANEL_ORDER:].sum() / total
    if tail > tol:
        warnings.warn(
            f"spectral integrand is not negligible at lambda_max (tail fraction {tail:.1e})",
            TruncationWarning,
            stacklevel=3,
        )


def isft_t(params: ModelParams, F, t, rule: Optional[PlancherelRule] = None) -> np.ndarray:
    """Inverse transform evaluated at geodesic distances t."""
    rule = rule or build_plancherel_rule(params)
    vals = rule.sample(F)
    _tail_check(rule, vals)
    coef = rule.weights * vals
    keep = np.abs(coef) > 1e-17 * max(np.max(np.abs(coef)), 1e-300)
    t = np.atleast_1d(np.asarray(t, float))
    if not np.any(keep):
        return np.zeros(t.shape, complex)
    return coef[keep] @ phi_grid(params, rule.nodes[keep], t)


def isft(params: ModelParams, F, r, rule: Optional[PlancherelRule] = None):
    """Inverse spherical transform of F (sampled or callable) at radii r."""
    r_arr = np.asarray(r, float)
    out = isft_t(params, F, np.arctanh(r_arr).ravel(), rule)
    return out.reshape(r_arr.shape) if r_arr.ndim else complex(out[0])


def spectral_profile(
    params: ModelParams,
    transform: Callable,
    decay: float,
    label: str,
    rule: Optional[PlancherelRule] = None,
) -> RadialProfile:
    """A profile defined by its spectral transform, evaluated through the inverse transform."""
    rule = rule or build_plancherel_rule(params)
    sampled = np.asarray(transform(rule.nodes), complex)
    vals = SampledTransform(rule.nodes, sampled, params.key())
    real = bool(np.all(np.abs(sampled.imag) <= 1e-15 * np.max(np.abs(sampled), initial=1.0)))

    def func(r, y):
        t = geodesic(r, y)
        out = isft_t(params, vals, np.ravel(t), rule).reshape(np.shape(t))
        return out.real if real else out

    return numeric(
        func,
        decay=decay,
        bounded=True,
        label=label,
        real=real,
        transform=transform,
        transform_key=params.key(),
    )


# ---------------------------------------------------------------- calibration


@dataclass
class CalibrationReport:
    chosen_rho: float
    product_defect_max: float
    c_P: float
    roundtrip_residual: float
    integral_rep_agreement: float
    plancherel_residual: float
    inversion_residual: float
    lambda_max: float
    candidate_defects: Dict[str, float]
    candidate_integral_agreement: Dict[str, float]
    literal_density_residual: float
    strip_note: str
    status: str
    failures: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DEFECT_GRID = ((0.5, 2.0, 5.0), (0.3, 0.6, 1.0), (0.4, 0.9, 1.3))
OVERLAP_LAMBDAS = (0.5, 2.0, 5.0)
OVERLAP_R2 = (0.75, 0.8, 0.85)


def max_product_defect(params: ModelParams, grid=DEFECT_GRID) -> float:
    lams, ss, ts = grid
    return max(product_defect(params, l, s, t) for l in lams for s in ss for t in ts)


def overlap_agreement(params: ModelParams, lams=OVERLAP_LAMBDAS, r2=OVERLAP_R2) -> float:
    """Largest gap between the series and the sphere-integral routes on the overlap band."""
    worst = 0.0
    for lam in lams:
        for x in r2:
            r = math.sqrt(x)
            a = phi_series(params, lam, r)
            b = phi_integral_rep(params, lam, math.atanh(r))
            worst = max(worst, abs(a - b))
    return float(worst)


def calibrate(params: ModelParams, tol: float = ACCEPT_TOL, defect_tol: float = DEFECT_TOL) -> CalibrationReport:
    """Select rho by the product formula, then fit and validate the Plancherel rule."""
    n = params.n
    defects, agree = {}, {}
    for rho in (float(n), n - 0.5):
        cand = params.replace(rho=rho, rho_override=False)
        defects[f"{rho:g}"] = max_product_defect(cand)
        agree[f"{rho:g}"] = overlap_agreement(cand)
    chosen = min(defects, key=defects.get)
    chosen_rho = float(chosen)
    failures = []
    if defects[chosen] > defect_tol:
        failures.append(f"product formula: every rho candidate exceeds {defect_tol:g} ({defects})")
    chosen_params = params.replace(rho=chosen_rho, rho_override=False)
    if agree[chosen] > 1e-8:
        failures.append(f"series/integral agreement {agree[chosen]:.2e} > 1e-8")

    c_P = math.nan
    res = {"roundtrip": math.nan, "plancherel_hpow_nu_plus_1": math.nan, "inversion_at_origin": math.nan}
    lam_max = math.nan
    try:
        rule = build_plancherel_rule(chosen_params, tol)
        c_P, res, lam_max = rule.c_P, rule.residuals, rule.lambda_max
    except CalibrationError as exc:
        failures.append(str(exc))
        if exc.report:
            res = exc.report

    literal = math.nan
    lm = chosen_params.lambda_max or (lam_max if math.isfinite(lam_max) else 40.0)
    nodes, qw = _panel_nodes(lm)
    with np.errstate(all="ignore"):
        _, w_lit = _fit(chosen_params, nodes, qw, literal=True)
        literal = _validate(chosen_params, nodes, w_lit)["plancherel_hpow_nu_plus_1"]

    note = (
        "boundedness and positive-definiteness strips are |Im lambda| <= n; "
        f"with rho = {chosen_rho:g} the trivial character phi = 1 sits at lambda = {chosen_rho:g}i"
    )
    return CalibrationReport(
        chosen_rho=chosen_rho,
        product_defect_max=float(defects[chosen]),
        c_P=float(c_P),
        roundtrip_residual=float(res.get("roundtrip", math.nan)),
        integral_rep_agreement=float(agree[chosen]),
        plancherel_residual=float(res.get("plancherel_hpow_nu_plus_1", math.nan)),
        inversion_residual=float(res.get("inversion_at_origin", math.nan)),
        lambda_max=float(lam_max),
        candidate_defects=defects,
        candidate_integral_agreement=agree,
        literal_density_residual=float(literal),
        strip_note=note,
        status="pass" if not failures else "fail",
        failures=failures,
    )

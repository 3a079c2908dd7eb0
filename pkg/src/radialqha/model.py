"""Model parameters, radial profiles and the invariant / weighted measures on the ball."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import numerics
from .errors import NonIntegrableError, ParameterError
from .numerics import QuadSettings, gamma_ratio, log_gamma

MODEL_VERSION = 1


@dataclass(frozen=True)
class ModelParams:
    """Global context: dimension ``n``, weight ``nu``, spectral shift ``rho``.

    ``truncation`` is the default operator degree M, ``lambda_max`` fixes the
    spectral cut-off (``None`` selects it adaptively).
    """

    n: int = 1
    nu: float = 2.5
    rho: Optional[float] = None
    truncation: int = 32
    quad: QuadSettings = field(default_factory=QuadSettings)
    lambda_max: Optional[float] = None
    rho_override: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nu", float(self.nu))
        if not self.nu > self.n:
            raise ParameterError(f"nu must exceed n (got nu={self.nu}, n={self.n})")
        rho = float(self.n if self.rho is None else self.rho)
        if not self.rho_override and rho not in (self.n, self.n - 0.5):
            raise ParameterError("rho must be n or n - 1/2 unless rho_override is set")
        object.__setattr__(self, "rho", rho)
        if int(self.truncation) != self.truncation or self.truncation < 0:
            raise ParameterError("truncation must be a nonnegative integer")
        object.__setattr__(self, "truncation", int(self.truncation))
        if self.lambda_max is not None and not self.lambda_max > 0:
            raise ParameterError("lambda_max must be positive")

    def replace(self, **changes) -> "ModelParams":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return ModelParams(**data)

    def as_dict(self) -> dict:
        d = asdict(self)
        q = d.pop("quad")
        d["quad"] = {k: v for k, v in q.items() if k != "singularity_exponents"}
        return d

    def key(self) -> str:
        blob = json.dumps({"version": MODEL_VERSION, **self.as_dict()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------- constants


def c_nu(params: ModelParams, nu: Optional[float] = None) -> float:
    """Normalising constant Gamma(nu)/(n! Gamma(nu - n)) of the weighted measure."""
    nu = params.nu if nu is None else float(nu)
    if not nu > params.n:
        raise ParameterError("nu must exceed n")
    return gamma_ratio([nu], [params.n + 1, nu - params.n])


def dim_pm(m: int, n: int) -> int:
    """Dimension of homogeneous polynomials of degree m in n variables."""
    if m < 0:
        raise ParameterError("degree must be nonnegative")
    return math.comb(m + n - 1, n - 1)


def dims(M: int, n: int) -> np.ndarray:
    return np.array([dim_pm(m, n) for m in range(M + 1)], dtype=float)


def monomial_norm_sq(multiindex, nu: float) -> float:
    """||z^m||^2 = m! Gamma(nu) / Gamma(nu + |m|) in the weighted Bergman space."""
    m = np.atleast_1d(np.asarray(multiindex, dtype=int))
    if np.any(m < 0):
        raise ParameterError("multi-index entries must be nonnegative")
    log_fact = sum(math.lgamma(k + 1) for k in m)
    return math.exp(log_fact + math.lgamma(nu) - math.lgamma(nu + int(m.sum())))


def pochhammer_ratio(nu: float, m) -> np.ndarray:
    """(nu)_m / m! for an array of degrees."""
    m = np.asarray(m, dtype=float)
    return np.exp(
        np.real(log_gamma(nu + m)) - math.lgamma(nu) - np.real(log_gamma(m + 1.0))
    )


# ---------------------------------------------------------------- profiles


def geodesic(r, y=None):
    """t = artanh(r), using y = 1 - r^2 when it is known more accurately."""
    r = np.asarray(r, float)
    if y is None:
        return np.arctanh(r)
    return np.log1p(r) - 0.5 * np.log(y)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial function f(|z|) on the ball.

    ``func(r, y)`` receives the radius and y = 1 - r^2.  ``decay`` is the exponent
    s with f = O((1 - r^2)^s) at the boundary (``inf`` for compact support) and
    drives the integrability flags.
    """

    kind: str
    func: Callable
    decay: float
    bounded: bool
    label: str
    args: Tuple = ()
    parts: Tuple = ()
    breakpoints: Tuple[float, ...] = ()
    real: bool = True
    transform: Optional[Callable] = None
    transform_key: Optional[str] = None

    def __call__(self, r):
        r = np.asarray(r, float)
        if np.any((r < 0) | (r >= 1)):
            raise ParameterError("radius must lie in [0, 1)")
        out = self.func(r, (1.0 - r) * (1.0 + r))
        return out if np.ndim(out) else out[()] if isinstance(out, np.ndarray) else out

    def eval_t(self, t):
        """Evaluate at geodesic distance t (r = tanh t) without cancellation."""
        t = np.asarray(t, float)
        return self.func(np.tanh(t), 1.0 / np.cosh(t) ** 2)

    def eval_y(self, y):
        y = np.asarray(y, float)
        return self.func(np.sqrt(1.0 - y), y)

    def is_l1(self, n: int) -> bool:
        return self.decay > n

    def is_l2(self, n: int) -> bool:
        return 2 * self.decay > n

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, RadialProfile):
            return combination([1.0, 1.0], [self, other])
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, RadialProfile):
            return combination([1.0, -1.0], [self, other])
        return NotImplemented

    def __neg__(self):
        return combination([-1.0], [self])

    def __mul__(self, other):
        if isinstance(other, RadialProfile):
            return product(self, other)
        if np.isscalar(other):
            return combination([other], [self])
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> "RadialProfile":
        if self.real:
            return self
        if self.kind == "combination":
            return combination([np.conj(c) for c in self.args], [p.conj() for p in self.parts])
        tr = self.transform
        return RadialProfile(
            kind="numeric",
            func=lambda r, y, f=self.func: np.conj(f(r, y)),
            decay=self.decay,
            bounded=self.bounded,
            label=f"conj({self.label})",
            breakpoints=self.breakpoints,
            real=False,
            transform=None if tr is None else (lambda lam, tr=tr: np.conj(tr(np.conj(lam)))),
            transform_key=self.transform_key,
        )


def hpow(sigma: float) -> RadialProfile:
    """(1 - r^2)^sigma."""
    sigma = float(sigma)
    return RadialProfile(
        kind="hpow",
        func=lambda r, y: y**sigma,
        decay=sigma,
        bounded=sigma >= 0,
        label=f"hpow({sigma:g})",
        args=(sigma,),
    )


def rpow(k: int) -> RadialProfile:
    """|z|^(2k) = r^(2k)."""
    if k < 0:
        raise ParameterError("rpow exponent must be nonnegative")
    k = int(k)
    return RadialProfile(
        kind="rpow",
        func=lambda r, y: np.asarray(r, float) ** (2 * k) + 0.0 * r,
        decay=0.0,
        bounded=True,
        label=f"rpow({k})",
        args=(k,),
    )


def constant(value: float = 1.0) -> RadialProfile:
    return combination([value], [rpow(0)]) if value != 1.0 else rpow(0)


def indicator(r0: float) -> RadialProfile:
    """Indicator of the ball of radius r0."""
    if not 0 < r0 < 1:
        raise ParameterError("indicator radius must lie in (0, 1)")
    r0 = float(r0)
    return RadialProfile(
        kind="indicator",
        func=lambda r, y: np.where(np.asarray(r) <= r0, 1.0, 0.0),
        decay=math.inf,
        bounded=True,
        label=f"indicator({r0:g})",
        args=(r0,),
        breakpoints=(r0,),
    )


def combination(coeffs: Sequence, profiles: Sequence[RadialProfile]) -> RadialProfile:
    """Linear combination sum_i coeffs[i] * profiles[i]."""
    coeffs = tuple(complex(c) if np.iscomplexobj(c) else float(c) for c in coeffs)
    profiles = tuple(profiles)
    if len(coeffs) != len(profiles) or not profiles:
        raise ParameterError("need matching, nonempty coefficient and profile lists")

    def func(r, y):
        return sum(c * p.func(r, y) for c, p in zip(coeffs, profiles))

    transforms = [p.transform for p in profiles]
    keys = {p.transform_key for p in profiles}
    transform = None
    if all(t is not None for t in transforms) and len(keys) == 1:
        def transform(lam):
            return sum(c * t(lam) for c, t in zip(coeffs, transforms))

    return RadialProfile(
        kind="combination",
        func=func,
        decay=min(p.decay for p in profiles),
        bounded=all(p.bounded for p in profiles),
        label=" + ".join(f"{c:g}*{p.label}" for c, p in zip(coeffs, profiles)),
        args=coeffs,
        parts=profiles,
        breakpoints=tuple(sorted({b for p in profiles for b in p.breakpoints})),
        real=all(p.real for p in profiles) and not any(isinstance(c, complex) for c in coeffs),
        transform=transform,
        transform_key=keys.pop() if transform is not None else None,
    )


def product(f: RadialProfile, g: RadialProfile) -> RadialProfile:
    """Pointwise product."""
    return RadialProfile(
        kind="product",
        func=lambda r, y: f.func(r, y) * g.func(r, y),
        decay=f.decay + g.decay,
        bounded=f.bounded and g.bounded,
        label=f"{f.label}*{g.label}",
        parts=(f, g),
        breakpoints=tuple(sorted(set(f.breakpoints) | set(g.breakpoints))),
        real=f.real and g.real,
    )


def numeric(
    func: Callable,
    decay: float,
    bounded: bool = True,
    label: str = "numeric",
    real: bool = False,
    breakpoints: Tuple[float, ...] = (),
    transform: Optional[Callable] = None,
    transform_key: Optional[str] = None,
) -> RadialProfile:
    """Wrap an evaluator ``func(r)`` or ``func(r, y)`` as a profile."""
    try:
        nargs = func.__code__.co_argcount
    except AttributeError:
        nargs = 1
    wrapped = func if nargs >= 2 else (lambda r, y: func(r))
    return RadialProfile(
        kind="numeric",
        func=wrapped,
        decay=float(decay),
        bounded=bounded,
        label=label,
        breakpoints=tuple(breakpoints),
        real=real,
        transform=transform,
        transform_key=transform_key,
    )


def zero_profile() -> RadialProfile:
    """The zero function (its transform is identically zero)."""
    return RadialProfile(
        kind="zero",
        func=lambda r, y: np.zeros(np.shape(r)),
        decay=math.inf,
        bounded=True,
        label="0",
    )


def phi_nu(params: ModelParams) -> RadialProfile:
    """The normalised weight c_nu (1 - r^2)^nu, which integrates to one against dlambda."""
    return combination([c_nu(params)], [hpow(params.nu)])


# ---------------------------------------------------------------- integrals


def radial_integral(
    f: RadialProfile, n: int, exponent: float, quad: Optional[QuadSettings] = None
) -> complex:
    """n * int_0^1 f(sqrt s) s^(n-1) (1-s)^exponent ds.

    With the normalised volume on the ball this is the integral of
    f(|z|) (1-|z|^2)^exponent dz.  The last panel, next to s = 1, is done in the
    variable y = 1 - s with a Gauss-Jacobi rule for the combined power of y.
    """
    quad = quad or QuadSettings()
    q = exponent + f.decay
    if q <= -1:
        raise NonIntegrableError(
            f"{f.label} is not integrable: boundary exponent {q:g} <= -1"
        )
    cuts = sorted({0.0, *(b * b for b in f.breakpoints), 0.5})
    cuts = [c for c in cuts if c < 1.0]
    pieces = []
    settings = QuadSettings(quad.rel_tol, quad.abs_tol, quad.max_subdivisions)

    def body(s):
        y = 1.0 - s
        return f.func(np.sqrt(s), y) * s ** (n - 1) * y**exponent

    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = numerics._adaptive(
            lambda s: np.asarray(body(s), complex) * np.ones_like(s), lo, hi, settings
        )
        pieces.append(val)

    ymax = 1.0 - cuts[-1]
    if math.isinf(f.decay) and f.breakpoints and max(f.breakpoints) ** 2 <= cuts[-1]:
        pieces.append(0.0)
    else:
        qq = q if math.isfinite(q) else 0.0

        def tail(y):
            # integrand divided by y^qq, smooth at y = 0 for the closed forms
            return f.eval_y(y) * y ** (exponent - qq) * (1.0 - y) ** (n - 1)

        prev = None
        for npts in (40, 80, 160):
            x, w = numerics.gauss_jacobi(npts, 0.0, qq)
            y = 0.5 * ymax * (1.0 + x)
            val = (0.5 * ymax) ** (1.0 + qq) * np.dot(w, np.asarray(tail(y), complex))
            if prev is not None and abs(val - prev) <= max(
                quad.abs_tol, quad.rel_tol * abs(val)
            ) * 10:
                break
            prev = val
        else:
            sub = 1.0 / (1.0 + qq)

            def mapped(v):
                y = ymax * v**sub
                return np.asarray(tail(y), complex) * y**qq * ymax * sub * v ** (sub - 1.0)

            val, _ = numerics._adaptive(mapped, 0.0, 1.0, settings)
        pieces.append(val)
    total = n * complex(math.fsum(np.real(pieces)), math.fsum(np.imag(pieces)))
    return total.real if f.real else total


def invariant_integral(f: RadialProfile, params: ModelParams) -> complex:
    """Integral of f against the Moebius-invariant measure (1-|z|^2)^(-n-1) dz."""
    if not f.is_l1(params.n):
        raise NonIntegrableError(f"{f.label} is not integrable for the invariant measure")
    return radial_integral(f, params.n, -(params.n + 1.0), params.quad)


def weighted_integral(f: RadialProfile, params: ModelParams) -> complex:
    """Integral of f against the probability measure d mu_nu."""
    if not f.decay + params.nu > params.n:
        raise NonIntegrableError(f"{f.label} is not integrable against mu_nu")
    return c_nu(params) * radial_integral(f, params.n, params.nu - params.n - 1.0, params.quad)


def hpow_invariant_norm(sigma: float, n: int) -> float:
    """Closed form of the invariant integral of (1-r^2)^sigma: n! Gamma(sigma-n)/Gamma(sigma)."""
    return gamma_ratio([n + 1, sigma - n], [sigma])


# ---------------------------------------------------------------- geometry


def mobius_arg(r, w, w_norm=None):
    """Radius of phi_w(r e_1): sqrt(1 - (1-r^2)(1-|w|^2)/|1 - r conj(w_1)|^2).

    ``w`` is the first coordinate w_1; pass ``w_norm`` = |w| when n >= 2.
    """
    r = np.asarray(r, float)
    w = np.asarray(w, complex)
    wn = np.abs(w) if w_norm is None else np.asarray(w_norm, float)
    den = np.abs(1.0 - r * np.conj(w)) ** 2
    num = (1.0 - r * r) * (1.0 - wn * wn)
    # 1 - num/den = (den - num)/den with den - num expanded to avoid cancellation
    diff = np.abs(r - w) ** 2 + (wn * wn - np.abs(w) ** 2) * (1.0 - r * r)
    val = np.sqrt(np.maximum(diff, 0.0) / den)
    return val if val.ndim else float(val)


def mobius_at(t, z):
    """Action of the one-parameter group a_t on the disc: (z cosh t + sinh t)/(z sinh t + cosh t)."""
    z = np.asarray(z, complex)
    c, s = np.cosh(t), np.sinh(t)
    out = (z * c + s) / (z * s + c)
    return out if out.ndim else complex(out)


def kernel_k(z, w, nu: float):
    """Normalised reproducing kernel (1-|w|^2)^(nu/2) / (1 - z conj(w))^nu on the disc."""
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    out = (1.0 - np.abs(w) ** 2) ** (nu / 2) * np.exp(-nu * np.log(1.0 - z * np.conj(w)))
    return out if out.ndim else complex(out)

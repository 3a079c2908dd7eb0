"""Radial quantum harmonic analysis on the complex unit ball.

Spherical functions and their transform, radial operators on weighted Bergman
spaces, the three convolutions between functions and operators, and the
Gelfand theory of the resulting commutative algebra.
"""

from .errors import (
    CalibrationError,
    ConvergenceError,
    DegenerateError,
    NonIntegrableError,
    ParameterError,
    PoleError,
    QHAError,
    TailError,
    ToleranceError,
    TruncationWarning,
)
from .funxform import (
    CalibrationReport,
    PlancherelRule,
    SampledTransform,
    build_plancherel_rule,
    calibrate,
    h_hat,
    isft,
    plancherel_density,
    sample_transform,
    sft,
    spectral_profile,
    tau_table,
)
from .model import (
    ModelParams,
    RadialProfile,
    c_nu,
    combination,
    constant,
    dim_pm,
    hpow,
    indicator,
    invariant_integral,
    numeric,
    phi_nu,
    rpow,
    weighted_integral,
    zero_profile,
)
from .numerics import QuadSettings
from .qha import (
    AlgebraElement,
    GelfandPoint,
    algebra_involution,
    algebra_mul,
    algebra_norm,
    conv_ff,
    conv_fo,
    conv_oo,
    gelfand_eval,
    op_fourier,
    op_inverse_fourier,
    op_plancherel_check,
    pd_gram_check,
)
from .radop import (
    RadialOperator,
    adjoint,
    berezin,
    matrix_rep_oracle,
    schatten_norm,
    t_lambda_eigs,
    toeplitz_eigs,
    trace,
    zero_operator,
)
from .spherical import SpectralPoint, is_bounded, is_positive_definite, phi, phi_t

__version__ = "0.1.0"

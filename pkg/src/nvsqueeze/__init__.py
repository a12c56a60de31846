"""Spin-mediated cooling and squeezing of a mechanical oscillator coupled to an
optically pumped, microwave-dressed NV spin.

Pipeline: :func:`dressed_frame` -> :func:`spin_steady_closed` ->
:func:`coefficients_exact` -> :func:`steady_moments` ->
:func:`quadrature_variance`. The :mod:`nvsqueeze.lindblad` engine provides
brute-force Fock-space checks of every closed form.
"""

from .errors import *  # noqa: F401,F403
from .model import (
    DressedFrame,
    PumpParams,
    SystemParams,
    ValidityWarning,
    coupling_from_gradient,
    detuning_for_resonance,
    dressed_frame,
    pump_rates,
    thermal_occupation,
)
from .moments import (
    MomentState,
    SqueezingReport,
    moment_rhs,
    quadrature_variance,
    stability_check,
    steady_moments,
    steady_moments_two_mode,
    two_mode_variance,
    variance_approx,
)
from .reduced import (
    GeneratorSpec,
    KFactors,
    ReducedCoefficients,
    coefficients_approx,
    coefficients_exact,
    k_factors,
    reduced_generator_single,
    reduced_generator_two_mode,
)
from .spinsolver import SpinSteadyState, spin_steady_closed, spin_steady_numeric

__version__ = "0.1.0"

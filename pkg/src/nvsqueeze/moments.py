"""Moment equations of the reduced mechanical model and squeezing metrics.

Because the reduced generator is quadratic in the ladder operators, the
first and second moments obey closed linear equations. Steady states are
only reported after a stability check of both linear systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPhysical, Unstable
from .model import DressedFrame
from .reduced import ApproxCoefficients, ReducedCoefficients

VAR_TOL = 1e-12


@dataclass(frozen=True)
class MomentState:
    """First and second moments: <d>, <d^dag d> and <d^2>."""

    mean_d: complex = 0j
    occupancy: float = 0.0
    pair: complex = 0j

    def physical(self, margin: float = 1e-9) -> bool:
        """Whether the centred moments satisfy ``|m|^2 <= n (n + 1)``."""
        n = self.occupancy - abs(self.mean_d) ** 2
        m = self.pair - self.mean_d**2
        return n >= -margin and abs(m) ** 2 <= n * (n + 1) + margin


@dataclass(frozen=True)
class SqueezingReport:
    n_ss: float
    pair_ss: complex
    var_x: float
    squeezing_db: float
    stable: bool = True

    @property
    def quantum_squeezed(self) -> bool:
        return self.var_x < 0.25

    @property
    def var_p(self) -> float:
        return 0.25 * (2 * self.n_ss + 1 + 2 * abs(self.pair_ss))


def _rates(c: ReducedCoefficients, gamma_m: float):
    gam = gamma_m + c.a_minus - c.a_plus
    return gam, gam + 1j * c.delta_shift, c.s1 - c.s2


def moment_rhs(state: MomentState, c: ReducedCoefficients, gamma_m: float, n_th: float) -> MomentState:
    """Time derivatives of the moments under the reduced generator.

    The occupancy and pair equations are the closed second-moment system;
    the mean obeys ``d<d>/dt = -(Gamma + i delta)/2 <d> + (S1 - S2)/2 <d^dag>``
    with ``Gamma = gamma_m + A- - A+``.
    """
    gam, z, s = _rates(c, gamma_m)
    n, m, a = state.occupancy, state.pair, state.mean_d
    dn = -gam * n + (s * np.conj(m)).real + gamma_m * n_th + c.a_plus
    dm = -z * m + s * n + c.s1
    da = -z / 2 * a + s / 2 * np.conj(a)
    return MomentState(complex(da), float(dn), complex(dm))


def drift_matrices(c: ReducedCoefficients, gamma_m: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear drift of ``(<d>, <d^dag>)`` and of ``(<d^dag d>, <d^2>, <d^dag 2>)``."""
    gam, z, s = _rates(c, gamma_m)
    first = np.array([[-z / 2, s / 2], [np.conj(s) / 2, -np.conj(z) / 2]])
    second = np.array(
        [
            [-gam, np.conj(s) / 2, s / 2],
            [s, -z, 0],
            [np.conj(s), 0, -np.conj(z)],
        ],
        dtype=complex,
    )
    return first, second


def stability_check(c: ReducedCoefficients, gamma_m: float) -> tuple[bool, np.ndarray]:
    """True iff every eigenvalue of both drift matrices has negative real part."""
    first, second = drift_matrices(c, gamma_m)
    eig = np.concatenate([np.linalg.eigvals(first), np.linalg.eigvals(second)])
    return bool(np.all(eig.real < 0)), eig


def steady_moments(c: ReducedCoefficients, gamma_m: float, n_th: float) -> tuple[float, complex]:
    """Steady occupancy and pair amplitude of the single-mode reduced model."""
    ok, eig = stability_check(c, gamma_m)
    if not ok:
        raise Unstable(f"moment equations unstable, max Re(eig) = {eig.real.max():.3e}")
    gam, z, s = _rates(c, gamma_m)
    num = gamma_m * n_th + c.a_plus + (np.conj(s) * c.s1 / z).real
    den = gam - (abs(s) ** 2 / z).real
    n = num / den
    m = (s * n + c.s1) / z
    return float(n), complex(m)


def steady_moments_two_mode(c: ReducedCoefficients, gamma_m: float, n_th: float) -> tuple[float, complex]:
    """Steady ``<(d1+d2)^dag (d1+d2)>`` and ``<(d1+d2)^2>`` for the two-mode model."""
    ok, eig = stability_check(c, gamma_m)
    if not ok:
        raise Unstable(f"moment equations unstable, max Re(eig) = {eig.real.max():.3e}")
    gam, z, s = _rates(c, gamma_m)
    num = 2 * gamma_m * n_th + 2 * c.a_plus + 2 * (np.conj(s) * c.s1 / z).real
    den = gam - (abs(s) ** 2 / z).real
    occ = num / den
    pair = (s * occ + 2 * c.s1) / z
    return float(occ), complex(pair)


def squeezing_db(var_x: float) -> float:
    return -10.0 * math.log10(4.0 * var_x)


def quadrature_variance(n_ss: float, pair_ss: complex, mean_d: complex = 0j, tol: float = VAR_TOL) -> SqueezingReport:
    """Variance of the optimally rotated quadrature, in units where vacuum gives 1/4."""
    if abs(mean_d) > 1e-9:
        raise ValueError(f"expected <d> = 0 at steady state, got {mean_d}")
    var = 0.25 * (2 * n_ss + 1 - 2 * abs(pair_ss))
    if var < -tol:
        raise NonPhysical(f"negative quadrature variance {var:.3e}")
    var = max(var, 0.0)
    db = squeezing_db(var) if var > 0 else math.inf
    return SqueezingReport(float(n_ss), complex(pair_ss), float(var), db)


def two_mode_variance(sum_occupancy: float, sum_pair: complex) -> float:
    return 0.25 * (sum_occupancy - abs(sum_pair) + 1)


def variance_approx(frame: DressedFrame, c_approx: ApproxCoefficients | ReducedCoefficients, gamma_m: float, n_th: float) -> float:
    """Two-term estimate of the squeezed variance from the first-order coefficients.

    Uses the pure-cooling occupancy ``gamma_m n_th / (gamma_m + A-)``.
    """
    c = c_approx.coefficients if isinstance(c_approx, ApproxCoefficients) else c_approx
    ratio = abs(c.s1 / (gamma_m + c.a_minus + 1j * c.delta_shift))
    n = gamma_m * n_th / (gamma_m + c.a_minus)
    return 0.25 * (1 - 2 * ratio) + 0.5 * (1 - ratio) * n


def report(c: ReducedCoefficients, gamma_m: float, n_th: float) -> SqueezingReport:
    """Full single-mode pipeline from coefficients to the squeezing report."""
    n, m = steady_moments(c, gamma_m, n_th)
    return quadrature_variance(n, m)

"""Physical parameters, the dressed-state frame and model Hamiltonians.

All frequencies and rates in :class:`SystemParams` are angular frequencies in
units of the mechanical frequency (``omega_m = 1`` by default). The SI helpers
(:func:`thermal_occupation`, :func:`coupling_from_gradient`) take and return SI
values and are meant for building parameter sets.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import constants

from . import operators as ops
from .errors import NoResonance
from .operators import MINUS1, PLUS1, ZERO, OperatorSpec

SQRT2 = math.sqrt(2.0)
LANDE_G = 2.0


class ValidityWarning(UserWarning):
    """Parameters leave the regime where an approximation is justified."""


@dataclass(frozen=True)
class SystemParams:
    """Model inputs. Frequencies/rates are angular and in units of ``omega_m``.

    ``omega1`` is signed: a negative value encodes a pi phase difference
    between the two microwave drives.
    """

    omega_m: float = 1.0
    delta: float = 0.0
    omega0: float = 0.0
    omega1: float = 0.0
    g: float = 0.06
    phi: float = 0.0
    gamma_m: float = 1e-6
    n_th: float = 1e3
    Gamma0: float = 0.25
    Gamma1: float = 0.25

    def __post_init__(self):
        if not self.omega_m > 0:
            raise ValueError(f"omega_m must be positive, got {self.omega_m}")
        if self.gamma_m < 0:
            raise ValueError(f"gamma_m must be >= 0, got {self.gamma_m}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")
        if not self.Gamma0 > 0:
            raise ValueError(f"Gamma0 must be positive, got {self.Gamma0}")
        if self.Gamma1 < self.Gamma0:
            raise ValueError(
                f"Gamma1 must be >= Gamma0 (got Gamma1={self.Gamma1}, Gamma0={self.Gamma0})"
            )
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be >= 0, got {self.omega0}")

    def replace(self, **changes) -> SystemParams:
        return replace(self, **changes)

    def at_resonance(self) -> SystemParams:
        """Copy with ``delta`` chosen so that the b-c transition sits at ``omega_m``."""
        return self.replace(
            delta=detuning_for_resonance(self.omega_m, self.omega0, self.omega1)
        )


@dataclass(frozen=True)
class PumpParams:
    """Optical pump: Rabi frequency and excited-state branching decay rates."""

    omega_p: float
    gamma0_exc: float
    gamma1_exc: float

    def __post_init__(self):
        if self.omega_p < 0 or self.gamma0_exc <= 0 or self.gamma1_exc < 0:
            raise ValueError(f"invalid pump parameters {self}")
        if self.omega_p > 0.3 * (self.gamma0_exc + self.gamma1_exc):
            warnings.warn(
                "weak-pump condition omega_p << gamma0 + gamma1 is not satisfied",
                ValidityWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class DressedFrame:
    """Eigenbasis of the microwave-dressed spin Hamiltonian.

    ``basis`` holds the dressed states |a>, |b>, |c> as rows expressed in the
    bare basis (|0>, |+1>, |-1>), so ``basis @ rho @ basis.conj().T`` maps a
    bare density matrix into the dressed basis.
    """

    theta: float
    omega_a: float
    omega_b: float
    omega_c: float
    gs: complex
    gc: complex
    omega_m: float

    @property
    def omega_ab(self) -> float:
        return self.omega_a - self.omega_b

    @property
    def omega_bc(self) -> float:
        return self.omega_b - self.omega_c

    @property
    def omega_ac(self) -> float:
        return self.omega_a - self.omega_c

    @property
    def delta0(self) -> float:
        return 2.0 * self.omega_m - self.omega_ac

    @property
    def delta1(self) -> float:
        return self.omega_m - self.omega_bc

    @property
    def delta2(self) -> float:
        return self.omega_m - self.omega_ab

    @property
    def basis(self) -> np.ndarray:
        s, c = math.sin(self.theta), math.cos(self.theta)
        return np.array(
            [
                [s, c / SQRT2, c / SQRT2],
                [0.0, 1 / SQRT2, -1 / SQRT2],
                [c, -s / SQRT2, -s / SQRT2],
            ],
            dtype=complex,
        )

    def ket_bra(self, i: str, j: str) -> np.ndarray:
        """Bare-basis matrix of the dressed operator |i><j| (i, j in 'abc')."""
        u = self.basis
        return np.outer(u["abc".index(i)], u["abc".index(j)].conj())

    def to_dressed(self, rho_bare: np.ndarray) -> np.ndarray:
        u = self.basis
        return u.conj() @ rho_bare @ u.T

    def to_bare(self, rho_dressed: np.ndarray) -> np.ndarray:
        u = self.basis
        return u.T @ rho_dressed @ u.conj()


def nv_hamiltonian(p: SystemParams) -> np.ndarray:
    """3x3 microwave-dressed spin Hamiltonian in the bare basis."""
    h = np.zeros((3, 3), dtype=complex)
    h[PLUS1, PLUS1] = h[MINUS1, MINUS1] = -p.delta
    h[ZERO, PLUS1] = h[PLUS1, ZERO] = p.omega0 / 2
    h[ZERO, MINUS1] = h[MINUS1, ZERO] = p.omega0 / 2
    h[PLUS1, MINUS1] = h[MINUS1, PLUS1] = p.omega1 / 2
    return h


def dressed_frame(p: SystemParams) -> DressedFrame:
    """Mixing angle, dressed energies and dressed couplings for ``p``.

    The angle is taken in [0, pi/2] so that |a> is always the upper level of
    the |0>-|+> pair; at the degenerate point delta = omega1/2 this gives
    theta = pi/4.
    """
    x = p.delta - p.omega1 / 2
    root = math.hypot(x, SQRT2 * p.omega0)
    theta = 0.5 * math.atan2(SQRT2 * p.omega0, -x)
    phase = complex(math.cos(p.phi), math.sin(p.phi))
    return DressedFrame(
        theta=theta,
        omega_a=(-x + root) / 2,
        omega_b=-p.delta - p.omega1 / 2,
        omega_c=(-x - root) / 2,
        gs=-p.g * phase * math.sin(theta),
        gc=p.g * phase * math.cos(theta),
        omega_m=p.omega_m,
    )


def detuning_for_resonance(omega_m: float, omega0: float, omega1: float, tol: float = 1e-9) -> float:
    """Microwave detuning that makes omega_bc equal to omega_m."""
    if omega_m + omega1 == 0:
        raise NoResonance("omega_m + omega1 = 0 has no resonant detuning")
    delta = (omega0**2 - 2 * omega_m**2 - omega1**2 - 3 * omega_m * omega1) / (
        2 * (omega_m + omega1)
    )
    if not 2 * omega_m + delta + 1.5 * omega1 > 0:
        raise NoResonance(
            f"resonance root is on the wrong branch for omega0={omega0}, omega1={omega1}"
        )
    frame = dressed_frame(SystemParams(omega_m=omega_m, delta=delta, omega0=omega0, omega1=omega1))
    if abs(frame.omega_bc - omega_m) > tol * max(1.0, omega_m):
        raise NoResonance(
            f"recomputed omega_bc={frame.omega_bc} misses omega_m={omega_m}"
        )
    return delta


class PumpRates(NamedTuple):
    Gamma0: float
    Gamma1: float
    Gamma0_approx: float
    Gamma0_exact: float


def pump_rates(p: PumpParams, exact: bool = False) -> PumpRates:
    """Effective ground-triplet decay rates induced by the optical pump.

    ``Gamma0`` is the weak-pump form by default; ``exact=True`` keeps the
    ``Omega_p**2`` term in its denominator.
    """
    s = p.gamma0_exc + p.gamma1_exc
    approx = p.omega_p**2 * p.gamma0_exc / s**2
    full = p.omega_p**2 * p.gamma0_exc / (s**2 + p.omega_p**2)
    return PumpRates(full if exact else approx, p.omega_p**2 / s, approx, full)


def thermal_occupation(temperature: float, omega_m: float) -> float:
    """Bose occupation at angular frequency ``omega_m`` (rad/s), temperature in K."""
    if temperature <= 0:
        return 0.0
    x = constants.hbar * omega_m / (constants.k * temperature)
    return 1.0 / math.expm1(x)


def zero_point_amplitude(mass: float, omega_m: float) -> float:
    return math.sqrt(constants.hbar / (2 * mass * omega_m))


def coupling_from_gradient(B0: float, mass: float, omega_m: float) -> float:
    """Spin-mechanical coupling (rad/s) for field gradient ``B0`` in T/m."""
    x0 = zero_point_amplitude(mass, omega_m)
    mu_b = constants.physical_constants["Bohr magneton"][0]
    return LANDE_G * mu_b * B0 * x0 / constants.hbar


def sphere_mass(radius: float, density: float = 3500.0) -> float:
    return 4.0 / 3.0 * math.pi * radius**3 * density


def bare_hamiltonian(p: SystemParams) -> OperatorSpec:
    """Full single-mode Hamiltonian in the microwave rotating frame (no RWA on g)."""
    d, dag = ops.destroy(0), ops.create(0)
    coupling = ops.spin(p.g * (math.cos(p.phi) * ops.sz() + math.sin(p.phi) * ops.sy()))
    return p.omega_m * dag * d + ops.spin(nv_hamiltonian(p)) + coupling * (d + dag)


def interaction_hamiltonian(frame: DressedFrame, p: SystemParams | None = None) -> OperatorSpec:
    """Rotating-wave interaction-picture Hamiltonian in the dressed basis.

    Contains the detuning diagonal and the resonant c<->b (emits a phonon) and
    a<->b (absorbs a phonon) exchange terms.
    """
    if p is not None:
        worst = max(abs(frame.delta0), abs(frame.delta1), p.Gamma0, p.Gamma1)
        if worst > p.omega_m:
            warnings.warn(
                f"rotating-wave approximation questionable: max(|D0|,|D1|,G0,G1)={worst:.3g}",
                ValidityWarning,
                stacklevel=2,
            )
    d, dag = ops.destroy(0), ops.create(0)
    diag = ops.spin(-frame.delta0 * frame.ket_bra("a", "a") - frame.delta1 * frame.ket_bra("b", "b"))
    exch = ops.spin(frame.gs * frame.ket_bra("c", "b")) * dag + ops.spin(
        frame.gc * frame.ket_bra("a", "b")
    ) * d
    return diag + exch + exch.dag()


def two_mode_hamiltonian(p: SystemParams, g1: float | None = None, g2: float | None = None) -> OperatorSpec:
    """Two-mode Hamiltonian including the S_x couplings (for inspection only).

    Mode 0 couples through ``g1 (cos(phi) S_z + sin(phi) S_x)``, mode 1 through
    ``g2 (sin(phi) S_z - cos(phi) S_x)``. Both modes share ``omega_m``.
    """
    g1 = p.g if g1 is None else g1
    g2 = p.g if g2 is None else g2
    c, s = math.cos(p.phi), math.sin(p.phi)
    out = ops.spin(nv_hamiltonian(p))
    for mode, coupling in ((0, g1 * (c * ops.sz() + s * ops.sx())), (1, g2 * (s * ops.sz() - c * ops.sx()))):
        d, dag = ops.destroy(mode), ops.create(mode)
        out = out + p.omega_m * dag * d + ops.spin(coupling) * (d + dag)
    return out

"""Adiabatic elimination of the spin: reduced mechanical master equations.

The spin coherences rho_bc and rho_ba are slaved to the mechanics at first
order in the coupling. The resulting mechanical generator has Lindblad
cooling/heating channels, a frequency shift and two-phonon terms that are
*not* of Lindblad form; they are kept as explicit ``coeff * L rho R`` triples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .errors import ApproxInvalid, DegenerateM
from .model import DressedFrame, ValidityWarning
from .operators import OperatorSpec
from .spinsolver import SpinSteadyState


@dataclass(frozen=True)
class KFactors:
    k1: complex
    k2: complex
    k3: complex

    @property
    def M(self) -> complex:
        return self.k1 * self.k2 - self.k3**2


@dataclass(frozen=True)
class ReducedCoefficients:
    """Coefficients of the reduced single-mode master equation."""

    delta_shift: float
    a_minus: float
    a_plus: float
    s1: complex
    s2: complex

    def scaled(self, factor: float) -> ReducedCoefficients:
        return ReducedCoefficients(
            self.delta_shift * factor,
            self.a_minus * factor,
            self.a_plus * factor,
            self.s1 * factor,
            self.s2 * factor,
        )


@dataclass
class GeneratorSpec:
    """Master-equation generator built from operator expressions.

    ``lindblad_channels`` are ``(L, rate)`` pairs contributing
    ``rate * D[L]``; ``quadratic_terms`` are ``(coeff, left, right)`` triples
    contributing ``coeff * left @ rho @ right``.
    """

    hamiltonian: OperatorSpec = field(default_factory=OperatorSpec)
    lindblad_channels: list = field(default_factory=list)
    quadratic_terms: list = field(default_factory=list)

    def __add__(self, other: GeneratorSpec) -> GeneratorSpec:
        return GeneratorSpec(
            self.hamiltonian + other.hamiltonian,
            self.lindblad_channels + other.lindblad_channels,
            self.quadratic_terms + other.quadratic_terms,
        )


def k_factors(frame: DressedFrame, Gamma1: float) -> KFactors:
    s, c = math.sin(frame.theta), math.cos(frame.theta)
    return KFactors(
        k1=-1j * frame.delta1 + Gamma1 / 2 * (1 + s * s),
        k2=1j * frame.delta2 + Gamma1 / 2 * (1 + c * c),
        k3=complex(Gamma1 / 2 * s * c),
    )


def coefficients_exact(
    frame: DressedFrame, spin: SpinSteadyState, Gamma1: float, m_tol: float = 1e-14
) -> ReducedCoefficients:
    """Frequency shift, cooling/heating rates and two-phonon amplitudes."""
    k = k_factors(frame, Gamma1)
    M = k.M
    if abs(M) < m_tol * max(1.0, Gamma1**2):
        raise DegenerateM(f"|M| = {abs(M):.3e} is too small for the elimination")
    gs2, gc2 = abs(frame.gs) ** 2, abs(frame.gc) ** 2
    gsc = abs(frame.gs * frame.gc)
    raa, rbb, rcc = spin.rho_aa, spin.rho_bb, spin.rho_cc
    rac = spin.rho_ac
    rca = np.conj(rac)
    k1, k2, k3 = k.k1, k.k2, k.k3
    cool = gs2 / M * (k2 * rcc + k3 * rca)
    heat = gc2 / M * (k1 * raa + k3 * rac)
    delta = 2 * (gs2 / M * (k2 * rcc - k2 * rbb + k3 * rca) + gc2 / M * (k1 * raa - k1 * rbb + k3 * rac)).imag
    a_minus = 2 * (cool + gc2 / M * k1 * rbb).real
    a_plus = 2 * (heat + gs2 / M * k2 * rbb).real
    s1 = 2 * gsc * (k3 / M * raa + np.conj(k3 / M) * rbb + k2 / M * rac)
    s2 = 2 * gsc * (np.conj(k3 / M) * rcc + k3 / M * rbb + np.conj(k1 / M) * rac)
    if a_minus < 0 or a_plus < 0:
        warnings.warn(
            f"negative reduced rate (A-={a_minus:.3g}, A+={a_plus:.3g})",
            ValidityWarning,
            stacklevel=2,
        )
    return ReducedCoefficients(float(delta), float(a_minus), float(a_plus), complex(s1), complex(s2))


@dataclass(frozen=True)
class ApproxCoefficients:
    coefficients: ReducedCoefficients
    rho_aa: float
    rho_cc: float
    rho_ac: complex


def approx_spin_state(frame: DressedFrame, Gamma0: float) -> tuple[float, float, complex]:
    """Leading-order ``(rho_aa, rho_cc, rho_ac)`` for Gamma0 = Gamma1 << omega_m."""
    th = frame.theta
    c2 = math.cos(2 * th)
    norm = 1 + c2 * c2
    rho_cc = (1 + c2) ** 2 / (2 * norm)
    rho_aa = (1 - c2) ** 2 / (2 * norm)
    # sqrt(2 (delta - omega1/2)^2 + 2 omega0^2) = omega_ac sqrt(1 + cos^2 2theta)
    rho_ac = -1j * math.sin(2 * th) / math.sqrt(norm) * (Gamma0 / 2) / (frame.omega_ac * math.sqrt(norm))
    return rho_aa, rho_cc, rho_ac


def coefficients_approx(
    frame: DressedFrame, Gamma0: float, g: float, gate: float = 5.0
) -> ApproxCoefficients:
    """First-order coefficients for Gamma0 = Gamma1 << omega_m at resonance.

    Raises :class:`ApproxInvalid` when ``|delta2| < gate * Gamma0``; the
    off-resonant heating transition must be far detuned for these forms.
    """
    if abs(frame.delta2) < gate * Gamma0:
        raise ApproxInvalid(
            f"|delta2| = {abs(frame.delta2):.3g} < {gate} * Gamma0 = {gate * Gamma0:.3g}"
        )
    if abs(frame.delta1) > 1e-6 * frame.omega_m:
        warnings.warn("first-order coefficients assume delta1 = 0", ValidityWarning, stacklevel=2)
    th = frame.theta
    s, c = math.sin(th), math.cos(th)
    norm = 1 + math.cos(2 * th) ** 2
    rho_aa, rho_cc, rho_ac = approx_spin_state(frame, Gamma0)
    gs2 = abs(frame.gs) ** 2
    gsc = abs(frame.gs * frame.gc)
    a_minus = g**2 / Gamma0 * 8 * c**4 * s**2 / ((1 + s * s) * norm)
    s1 = 2 * gsc * s * c * rho_aa / (1j * frame.delta2 * (1 + s * s)) + 4 * gsc * rho_ac / (Gamma0 * (1 + s * s))
    s2 = 2 * gsc * s * c * rho_cc / (-1j * frame.delta2 * (1 + s * s))
    delta = -2 * abs(frame.gc) ** 2 * rho_aa / frame.delta2
    # the two printed forms of the cooling rate coincide once rho_cc is inserted
    assert math.isclose(a_minus, 4 * gs2 * rho_cc / (Gamma0 * (1 + s * s)), rel_tol=1e-9, abs_tol=1e-12 * g**2 / Gamma0)
    return ApproxCoefficients(
        ReducedCoefficients(float(delta), float(a_minus), 0.0, complex(s1), complex(s2)),
        rho_aa,
        rho_cc,
        rho_ac,
    )


def _mode_generator(b: OperatorSpec, c: ReducedCoefficients) -> GeneratorSpec:
    bd = b.dag()
    one = ops.identity()
    return GeneratorSpec(
        hamiltonian=(c.delta_shift / 2) * (bd * b),
        lindblad_channels=[(b, c.a_minus), (bd, c.a_plus)],
        quadratic_terms=[
            (c.s1 / 2, bd * bd, one),
            (-c.s1 / 2, bd, bd),
            (c.s2 / 2, one, bd * bd),
            (-c.s2 / 2, bd, bd),
            (np.conj(c.s1) / 2, one, b * b),
            (-np.conj(c.s1) / 2, b, b),
            (np.conj(c.s2) / 2, b * b, one),
            (-np.conj(c.s2) / 2, b, b),
        ],
    )


def thermal_bath(mode: int, gamma_m: float, n_th: float) -> GeneratorSpec:
    return GeneratorSpec(
        lindblad_channels=[
            (ops.destroy(mode), gamma_m * (n_th + 1)),
            (ops.create(mode), gamma_m * n_th),
        ]
    )


def reduced_generator_single(c: ReducedCoefficients, gamma_m: float, n_th: float) -> GeneratorSpec:
    return _mode_generator(ops.destroy(0), c) + thermal_bath(0, gamma_m, n_th)


def reduced_generator_two_mode(
    c: ReducedCoefficients, gamma_m: float, n_th: float, phi: float = math.pi / 4
) -> GeneratorSpec:
    """Two equal-frequency modes sharing the spin through ``cos(phi) d1 + sin(phi) d2``.

    At ``phi = pi/4`` this is ``A-/2 D[d1 + d2] + ...`` with the shift and
    two-phonon terms divided by 4 in terms of ``d1 + d2``.
    """
    b = math.cos(phi) * ops.destroy(0) + math.sin(phi) * ops.destroy(1)
    return _mode_generator(b, c) + thermal_bath(0, gamma_m, n_th) + thermal_bath(1, gamma_m, n_th)


def slaved_coherences(
    frame: DressedFrame, spin: SpinSteadyState, Gamma1: float, rho_m: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """First-order rho_bc and rho_ba (as mechanical operators) for a given ``rho_m``."""
    n = rho_m.shape[0]
    d = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    dag = d.conj().T
    k = k_factors(frame, Gamma1)
    M = k.M
    raa, rbb, rcc, rac = spin.rho_aa, spin.rho_bb, spin.rho_cc, spin.rho_ac
    rca = np.conj(rac)
    gs, gc = np.conj(frame.gs), np.conj(frame.gc)
    lower = d @ rho_m * rcc - rbb * rho_m @ d
    upper = dag @ rho_m * raa - rbb * rho_m @ dag
    x = -1j * gs * (k.k2 / M * lower + k.k3 / M * rca * d @ rho_m) - 1j * gc * (
        k.k3 / M * upper + k.k2 / M * rac * dag @ rho_m
    )
    y = -1j * gc * (k.k1 / M * upper + k.k3 / M * rac * dag @ rho_m) - 1j * gs * (
        k.k3 / M * lower + k.k1 / M * rca * d @ rho_m
    )
    return x, y

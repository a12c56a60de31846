"""Optically pumped steady state of the ground-state spin triplet.

Two independent routes are provided: the closed-form solution
(:func:`spin_steady_closed`) and a null-space solve of the linear Bloch system
(:func:`spin_steady_numeric`). The closed form is an exact solution of the
Bloch system, so the two agree to rounding everywhere, not only in the weak
drive regime.

Real vectorization layout used by :func:`bloch_generator` (fixed)::

    index  0       1         2         3            4            5
           rho_00  rho_+1+1  rho_-1-1  Re rho_+10   Re rho_-10   Re rho_-1+1
    index  6            7            8
           Im rho_+10   Im rho_-10   Im rho_-1+1
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SingularGenerator
from .model import DressedFrame, PumpParams, SystemParams, ValidityWarning, dressed_frame
from .operators import MINUS1, PLUS1, ZERO

_PAIRS = ((PLUS1, ZERO), (MINUS1, ZERO), (MINUS1, PLUS1))


@dataclass(frozen=True)
class SpinSteadyState:
    """Spin density matrix in the bare (|0>,|+1>,|-1>) and dressed (a,b,c) bases."""

    bare: np.ndarray
    dressed: np.ndarray

    @classmethod
    def from_bare(cls, rho: np.ndarray, frame: DressedFrame) -> SpinSteadyState:
        return cls(rho, frame.to_dressed(rho))

    rho_00 = property(lambda self: self.bare[ZERO, ZERO])
    rho_p1p1 = property(lambda self: self.bare[PLUS1, PLUS1])
    rho_m1m1 = property(lambda self: self.bare[MINUS1, MINUS1])
    rho_m1p1 = property(lambda self: self.bare[MINUS1, PLUS1])
    rho_m10 = property(lambda self: self.bare[MINUS1, ZERO])
    rho_p10 = property(lambda self: self.bare[PLUS1, ZERO])
    rho_aa = property(lambda self: self.dressed[0, 0].real)
    rho_bb = property(lambda self: self.dressed[1, 1].real)
    rho_cc = property(lambda self: self.dressed[2, 2].real)
    rho_ac = property(lambda self: self.dressed[0, 2])


def _warn_regime(p: SystemParams):
    if max(p.omega0, abs(p.omega1)) > p.Gamma1:
        warnings.warn(
            "microwave drives exceed Gamma1; the effective pumping rates assume "
            "drives weak compared with the optical pump",
            ValidityWarning,
            stacklevel=3,
        )


def closed_bare(delta, omega0, omega1, Gamma0, Gamma1) -> np.ndarray:
    """Bare-basis closed-form steady state; ``omega0`` may carry a sign here."""
    det = 2 * delta - omega1
    den = Gamma0 * det**2 + (3 * Gamma1 + Gamma0) * omega0**2 + Gamma0 * Gamma1**2
    rho = np.zeros((3, 3), dtype=complex)
    rho[ZERO, ZERO] = (Gamma0 * det**2 + (Gamma1 + Gamma0) * omega0**2 + Gamma0 * Gamma1**2) / den
    rho[PLUS1, PLUS1] = rho[MINUS1, MINUS1] = Gamma1 * omega0**2 / den
    rho[MINUS1, PLUS1] = Gamma0 * omega0**2 / den
    rho[PLUS1, ZERO] = rho[MINUS1, ZERO] = Gamma0 * omega0 * (det - 1j * Gamma1) / den
    for i, j in _PAIRS:
        rho[j, i] = np.conj(rho[i, j])
    return rho


def spin_steady_closed(p: SystemParams, warn: bool = False) -> SpinSteadyState:
    """Closed-form pumped steady state in both bases."""
    if warn:
        _warn_regime(p)
    rho = closed_bare(p.delta, p.omega0, p.omega1, p.Gamma0, p.Gamma1)
    det = 2 * p.delta - p.omega1
    den = p.Gamma0 * det**2 + (3 * p.Gamma1 + p.Gamma0) * p.omega0**2 + p.Gamma0 * p.Gamma1**2
    return SpinSteadyState(rho, _dressed_closed(p, dressed_frame(p), den))


def _dressed_closed(p: SystemParams, frame: DressedFrame, den: float) -> np.ndarray:
    # x/sqrt(x^2 + 2 omega0^2) = -cos(2 theta) and omega0/(sqrt(2) sqrt(...)) =
    # sin(2 theta)/2; written through theta so the degenerate point follows
    # the frame's branch convention
    g0, g1, om0 = p.Gamma0, p.Gamma1, p.omega0
    cos2, sin2 = math.cos(2 * frame.theta), math.sin(2 * frame.theta)
    det2 = (2 * p.delta - p.omega1) ** 2
    rho_bb = (g1 - g0) * om0**2 / den
    tilt = -cos2 * (g0 * det2 + 8 * g0 * om0**2 + g0 * g1**2) / den
    rho_ac = sin2 / 2 * g0 * g1**2 / den - 1j * math.sqrt(2) * g0 * om0 * g1 / den
    out = np.zeros((3, 3), dtype=complex)
    out[0, 0] = 0.5 - 0.5 * rho_bb + 0.5 * tilt
    out[1, 1] = rho_bb
    out[2, 2] = 0.5 - 0.5 * rho_bb - 0.5 * tilt
    out[0, 2] = rho_ac
    out[2, 0] = np.conj(rho_ac)
    return out


def bloch_rhs(rho: np.ndarray, p: SystemParams) -> np.ndarray:
    """Time derivative of the 3x3 spin density matrix under drive and pumping.

    Written element by element; the lower-triangle elements follow by
    Hermiticity.
    """
    g0, g1, d, o0, o1 = p.Gamma0, p.Gamma1, p.delta, p.omega0, p.omega1
    r = rho
    P, M, Z = PLUS1, MINUS1, ZERO
    out = np.zeros((3, 3), dtype=complex)
    out[P, P] = -g0 * r[P, P] - 0.5j * o0 * (r[Z, P] - r[P, Z]) - 0.5j * o1 * (r[M, P] - r[P, M])
    out[M, M] = -g0 * r[M, M] - 0.5j * o0 * (r[Z, M] - r[M, Z]) + 0.5j * o1 * (r[M, P] - r[P, M])
    out[Z, Z] = (
        g0 * (r[P, P] + r[M, M])
        + 0.5j * o0 * (r[Z, P] - r[P, Z])
        + 0.5j * o0 * (r[Z, M] - r[M, Z])
    )
    out[P, Z] = (
        (1j * d - g1 / 2) * r[P, Z]
        - 0.5j * o0 * (r[Z, Z] - r[P, P])
        + 0.5j * o0 * r[P, M]
        - 0.5j * o1 * r[M, Z]
    )
    out[M, Z] = (
        (1j * d - g1 / 2) * r[M, Z]
        - 0.5j * o0 * (r[Z, Z] - r[M, M])
        + 0.5j * o0 * r[M, P]
        - 0.5j * o1 * r[P, Z]
    )
    out[M, P] = -g1 * r[M, P] - 0.5j * o0 * (r[Z, P] - r[M, Z]) - 0.5j * o1 * (r[P, P] - r[M, M])
    for i, j in _PAIRS:
        out[j, i] = np.conj(out[i, j])
    return out


def to_real(rho: np.ndarray) -> np.ndarray:
    pops = [rho[ZERO, ZERO].real, rho[PLUS1, PLUS1].real, rho[MINUS1, MINUS1].real]
    coh = [rho[i, j] for i, j in _PAIRS]
    return np.array(pops + [c.real for c in coh] + [c.imag for c in coh])


def from_real(v: np.ndarray) -> np.ndarray:
    rho = np.zeros((3, 3), dtype=complex)
    rho[ZERO, ZERO], rho[PLUS1, PLUS1], rho[MINUS1, MINUS1] = v[:3]
    for k, (i, j) in enumerate(_PAIRS):
        rho[i, j] = v[3 + k] + 1j * v[6 + k]
        rho[j, i] = np.conj(rho[i, j])
    return rho


def bloch_generator(p: SystemParams) -> np.ndarray:
    """9x9 real matrix of :func:`bloch_rhs` in the fixed real layout."""
    cols = [to_real(bloch_rhs(from_real(e), p)) for e in np.eye(9)]
    return np.array(cols).T


def spin_steady_numeric(p: SystemParams, rtol: float = 1e-10) -> SpinSteadyState:
    """Steady state from the null vector of :func:`bloch_generator`."""
    gen = bloch_generator(p)
    _, svals, vh = np.linalg.svd(gen)
    scale = max(svals[0], 1e-300)
    if svals[-2] <= rtol * scale:
        raise SingularGenerator(
            f"spin generator null space is degenerate (singular values {svals[-3:]})"
        )
    v = vh[-1]
    rho = from_real(v)
    rho = rho / np.trace(rho).real
    resid = np.linalg.norm(gen @ to_real(rho))
    if resid > rtol * scale:
        raise SingularGenerator(f"null vector residual {resid:.2e} exceeds tolerance")
    return SpinSteadyState.from_bare(rho, dressed_frame(p))


def excited_fractions(p: PumpParams, rho_p1p1: float, rho_m1m1: float) -> dict:
    """Excited-state populations and coherences slaved to the pumped ground levels."""
    s = p.gamma0_exc + p.gamma1_exc
    den = s**2 + p.omega_p**2
    return {
        "rho_E1E1": p.omega_p**2 * rho_p1p1 / den,
        "rho_E2E2": p.omega_p**2 * rho_m1m1 / den,
        "rho_E1p1": -1j * p.omega_p * s * rho_p1p1 / den,
        "rho_E2m1": -1j * p.omega_p * s * rho_m1m1 / den,
    }

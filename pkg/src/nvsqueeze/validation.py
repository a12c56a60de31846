"""Self-checks of the closed forms against independent numerical oracles.

:func:`validate` groups the checks into families and returns a
machine-readable report; a family passes when its worst measured error is
within tolerance. ``tamper`` rescales named reduced coefficients on the
closed-form side only, as a negative control.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import replace

import numpy as np

from .lindblad import (
    HilbertSpace,
    assemble,
    evolve,
    full_model_rwa,
    mechanical_marginal,
    mechanical_moments,
    spin_marginal,
    spin_dissipator_effective,
    steady_state,
    steady_state_adaptive,
)
from .model import SystemParams, ValidityWarning, dressed_frame, nv_hamiltonian
from .moments import (
    MomentState,
    moment_rhs,
    quadrature_variance,
    stability_check,
    steady_moments,
    steady_moments_two_mode,
    two_mode_variance,
)
from .operators import destroy, spin
from .reduced import (
    GeneratorSpec,
    ReducedCoefficients,
    coefficients_exact,
    reduced_generator_single,
    reduced_generator_two_mode,
)
from .spinsolver import SpinSteadyState, bloch_rhs, spin_steady_closed, spin_steady_numeric

SEED = 20240601


def random_spin_params(rng: np.random.Generator) -> SystemParams:
    """Random drive/pump set with both Rabi frequencies bounded by Gamma1."""
    g0 = rng.uniform(0.02, 0.5)
    g1 = g0 * rng.uniform(1.0, 3.0)
    return SystemParams(
        Gamma0=g0,
        Gamma1=g1,
        omega0=rng.uniform(0.0, g1),
        omega1=rng.uniform(-g1, g1),
        delta=rng.uniform(-1.0, 1.0),
    )


def random_pipeline_params(rng: np.random.Generator, n_th=(1e2, 1e4)) -> SystemParams:
    """Random resonance-locked point from the swept figure domains."""
    while True:
        p = SystemParams(
            omega0=rng.uniform(0.05, 1.4),
            omega1=rng.choice([0.0, rng.uniform(-0.9, 0.5)]),
            g=rng.uniform(0.01, 0.1),
            n_th=rng.uniform(*n_th),
        )
        try:
            return p.at_resonance()
        except Exception:
            continue


def coefficients_for(p: SystemParams) -> ReducedCoefficients:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        return coefficients_exact(dressed_frame(p), spin_steady_closed(p), p.Gamma1)


def _tampered(c: ReducedCoefficients, tamper: dict | None) -> ReducedCoefficients:
    if not tamper:
        return c
    return replace(c, **{k: getattr(c, k) * v for k, v in tamper.items()})


def _family(errors, tol, **extra) -> dict:
    worst = float(np.max(errors)) if len(errors) else 0.0
    return {"passed": bool(worst <= tol), "max_error": worst, "tolerance": tol, "n": len(errors), **extra}


# -- quick families -----------------------------------------------------------

def check_spin_closed_vs_numeric(n: int = 200, seed: int = SEED) -> dict:
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(n):
        p = random_spin_params(rng)
        errs.append(np.abs(spin_steady_closed(p).bare - spin_steady_numeric(p).bare).max())
    return _family(errs, 1e-8)


def check_dissipator_reconstruction(n: int = 20, seed: int = SEED) -> dict:
    """Liouvillian of H_NV plus the reconstructed jump operators versus the Bloch equations."""
    rng = np.random.default_rng(seed + 1)
    space = HilbertSpace(3, ())
    errs = []
    for _ in range(n):
        p = random_spin_params(rng)
        gen = GeneratorSpec(spin(nv_hamiltonian(p)), spin_dissipator_effective(p.Gamma0, p.Gamma1))
        L = assemble(space, gen)
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        errs.append(np.abs(L.apply(rho) - bloch_rhs(rho, p)).max())
    return _family(errs, 1e-12)


def check_moment_fixed_point(n: int = 200, seed: int = SEED) -> dict:
    rng = np.random.default_rng(seed + 2)
    errs = []
    for _ in range(n):
        p = random_pipeline_params(rng)
        c = coefficients_for(p)
        if not stability_check(c, p.gamma_m)[0]:
            continue
        nss, m = steady_moments(c, p.gamma_m, p.n_th)
        r = moment_rhs(MomentState(0j, nss, m), c, p.gamma_m, p.n_th)
        errs.append(max(abs(r.occupancy), abs(r.pair)))
    return _family(errs, 1e-12)


def check_two_mode_closed(n: int = 200, seed: int = SEED, tamper=None) -> dict:
    rng = np.random.default_rng(seed + 3)
    errs = []
    for _ in range(n):
        p = random_pipeline_params(rng)
        c = coefficients_for(p)
        if not stability_check(c, p.gamma_m)[0]:
            continue
        var_x = quadrature_variance(*steady_moments(c, p.gamma_m, p.n_th)).var_x
        ct = _tampered(c, tamper)
        if not stability_check(ct, p.gamma_m)[0]:
            errs.append(math.inf)
            continue
        errs.append(abs(two_mode_variance(*steady_moments_two_mode(ct, p.gamma_m, p.n_th)) - var_x))
    return _family(errs, 1e-10)


def small_nth_points(k: int, seed: int, n_th=(0.05, 1.0), max_n: float = 1.0) -> list[SystemParams]:
    """Stable pipeline points with modest occupancy so that Fock truncation is cheap."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < k:
        p = random_pipeline_params(rng, n_th=n_th).replace(gamma_m=rng.uniform(1e-3, 1e-2))
        c = coefficients_for(p)
        if not stability_check(c, p.gamma_m)[0]:
            continue
        n, _ = steady_moments(c, p.gamma_m, p.n_th)
        if 0 < n < max_n:
            out.append(p)
    return out


def reduced_fock_error(p: SystemParams, tamper=None, fock: int = 16) -> tuple[float, float, int]:
    """Fock-space steady state of the single-mode reduced generator versus the closed form."""
    c = coefficients_for(p)
    gen = reduced_generator_single(c, p.gamma_m, p.n_th)
    rho, space = steady_state_adaptive(lambda s: assemble(s, gen), HilbertSpace(1, (fock,)))
    n_f, m_f, _ = mechanical_moments(rho, space)
    n, m = steady_moments(_tampered(c, tamper), p.gamma_m, p.n_th)
    return abs(n_f - n), abs(m_f - m), space.fock_dims[0]


def check_reduced_fock(k: int = 3, seed: int = SEED, tamper=None) -> dict:
    errs = []
    for p in small_nth_points(k, seed + 4):
        en, em, _ = reduced_fock_error(p, tamper)
        errs.append(max(en, em))
    return _family(errs, 1e-6)


# -- full families ------------------------------------------------------------

def two_mode_fock_error(p: SystemParams, focks=(8, 10), tamper=None) -> tuple[float, float, float]:
    """Two-mode Fock-space steady state versus the single-mode closed form.

    Returns ``|<du^2> - <dx^2>|``, ``|<(d1+d2)^dag(d1+d2)> - 2 n_ss|`` and the
    top-two-level population. The cutoff steps through ``focks`` until that
    population is below 1e-9; the LU fill grows roughly as N^6, so the steps
    are kept small.
    """
    c = coefficients_for(p)
    gen = reduced_generator_two_mode(c, p.gamma_m, p.n_th)
    for fock in focks:
        space = HilbertSpace(1, (fock, fock))
        rho = steady_state(assemble(space, gen))
        tail = max(np.diag(mechanical_marginal(rho, space, k)).real[-2:].sum() for k in (0, 1))
        if tail < 1e-9:
            break
    s = (destroy(0) + destroy(1)).to_matrix(space).toarray()
    occ = np.trace(s.conj().T @ s @ rho).real
    pair = np.trace(s @ s @ rho)
    n, m = steady_moments(_tampered(c, tamper), p.gamma_m, p.n_th)
    var_x = quadrature_variance(n, m).var_x
    return abs(two_mode_variance(occ, pair) - var_x), abs(occ - 2 * n), float(tail)


def check_two_mode_fock(k: int = 2, seed: int = SEED, tamper=None) -> dict:
    errs = []
    for p in small_nth_points(k, seed + 5, n_th=(0.05, 0.3), max_n=0.4):
        errs.append(max(two_mode_fock_error(p, focks=(8,), tamper=tamper)[:2]))
    return _family(errs, 1e-4)


def rwa_spin_state(p: SystemParams):
    """Spin steady state of the interaction-picture model with the mechanics removed.

    Differs from the closed form because the bare-basis pump is applied
    without the phases it acquires in the rotating frame.
    """
    frame = dressed_frame(p)
    space = HilbertSpace(3, (2,))
    rho = steady_state(assemble(space, full_model_rwa(p.replace(g=0.0))))
    return SpinSteadyState.from_bare(spin_marginal(rho, space), frame)


def elimination_study(
    omega0: float = 0.77,
    omega1: float = 0.0,
    couplings=(0.02, 0.01, 0.005),
    fock: int = 16,
    n_th: float = 0.5,
    spin_source: str = "closed",
) -> list[dict]:
    """Full spin-mode model versus the eliminated closed form at decreasing coupling.

    Uses the rotating-wave interaction-picture model with Gamma0 = Gamma1 =
    0.25 and the b-c transition locked to the mechanical frequency.
    ``spin_source="closed"`` feeds the reduced coefficients the closed-form
    spin state; ``"model"`` uses the full model's own uncoupled spin state,
    which isolates the elimination step itself.
    """
    if spin_source not in ("closed", "model"):
        raise ValueError(f"spin_source must be 'closed' or 'model', got {spin_source!r}")
    out = []
    for g in couplings:
        p = SystemParams(omega0=omega0, omega1=omega1, g=g, n_th=n_th, Gamma0=0.25, Gamma1=0.25).at_resonance()
        if spin_source == "closed":
            c = coefficients_for(p)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ValidityWarning)
                c = coefficients_exact(dressed_frame(p), rwa_spin_state(p), p.Gamma1)
        n, m = steady_moments(c, p.gamma_m, p.n_th)
        gen = full_model_rwa(p)
        rho, space = steady_state_adaptive(lambda s: assemble(s, gen), HilbertSpace(3, (fock,)))
        n_f, m_f, _ = mechanical_moments(rho, space)
        out.append(
            {"g": g, "n_closed": n, "n_full": n_f, "pair_closed": m, "pair_full": m_f,
             "rel_error": abs(n_f - n) / abs(n), "fock": space.fock_dims[0]}
        )
    return out


def check_elimination_convergence(spin_source: str = "closed") -> dict:
    rows = elimination_study(spin_source=spin_source)
    errs = [r["rel_error"] for r in rows]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    fam = _family([errs[-1]], 0.10, rel_errors=errs, monotone=monotone)
    fam["passed"] = bool(fam["passed"] and monotone)
    return fam


def check_elimination_model_spin() -> dict:
    return check_elimination_convergence("model")


def check_spin_transient() -> dict:
    """Pumped spin relaxes toward the null-space steady state.

    The slowest Bloch mode decays more slowly than Gamma0 (about 0.58 Gamma0
    at this point), so at t = 5/Gamma0 a few percent of the initial distance
    remains; the check requires < 5e-2 there and < 1e-8 at t = 60/Gamma0.
    """
    p = SystemParams(omega0=0.6).at_resonance()
    space = HilbertSpace(3, ())
    L = assemble(space, GeneratorSpec(spin(nv_hamiltonian(p)), spin_dissipator_effective(p.Gamma0, p.Gamma1)))
    rho0 = np.zeros((3, 3), complex)
    rho0[1, 1] = 1.0
    t5, t60 = 5 / p.Gamma0, 60 / p.Gamma0
    traj = evolve(rho0, L, [0.0, t5, t60])
    ref = spin_steady_numeric(p).bare
    early = np.abs(traj.states[1] - ref).max()
    late = np.abs(traj.states[2] - ref).max()
    fam = _family([late], 1e-8, early_error=float(early), trace_drift=traj.trace_drift)
    fam["passed"] = bool(fam["passed"] and early < 5e-2 and traj.trace_drift < 1e-9)
    return fam


QUICK = {
    "spin_closed_vs_numeric": check_spin_closed_vs_numeric,
    "dissipator_reconstruction": check_dissipator_reconstruction,
    "moment_fixed_point": check_moment_fixed_point,
    "two_mode_closed": check_two_mode_closed,
    "reduced_fock_oracle": check_reduced_fock,
}
FULL = {
    "spin_transient": check_spin_transient,
    "two_mode_fock_oracle": check_two_mode_fock,
    "elimination_convergence": check_elimination_convergence,
    "elimination_model_spin": check_elimination_model_spin,
}
TAMPERABLE = {"two_mode_closed", "reduced_fock_oracle", "two_mode_fock_oracle"}


def validate(level: str = "quick", tamper: dict | None = None) -> dict:
    """Run the oracle families for ``level`` ('quick' or 'full')."""
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    fams = dict(QUICK)
    if level == "full":
        fams.update(FULL)
    report = {}
    for name, fn in fams.items():
        t0 = time.perf_counter()
        res = fn(tamper=tamper) if (tamper and name in TAMPERABLE) else fn()
        res["seconds"] = round(time.perf_counter() - t0, 3)
        report[name] = res
    return {"level": level, "passed": all(r["passed"] for r in report.values()), "families": report}

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.integrate import solve_ivp

from nvsqueeze.errors import NonPhysical, Unstable
from nvsqueeze.lindblad import assemble, expect, steady_state
from nvsqueeze.model import dressed_frame
from nvsqueeze.moments import (
    MomentState,
    drift_matrices,
    moment_rhs,
    quadrature_variance,
    report,
    squeezing_db,
    stability_check,
    steady_moments,
    steady_moments_two_mode,
    two_mode_variance,
    variance_approx,
)
from nvsqueeze.operators import HilbertSpace
from nvsqueeze.reduced import (
    ReducedCoefficients,
    coefficients_approx,
    coefficients_exact,
    reduced_generator_single,
    reduced_generator_two_mode,
)
from nvsqueeze.spinsolver import spin_steady_closed

from conftest import fig4

# a strongly damped, strongly squeezing set that stays well inside small Fock spaces
STRONG = ReducedCoefficients(0.2, 1.0, 0.05, 0.3 + 0.1j, 0.05 - 0.02j)


def _ladder(n):
    d = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    return d, d.conj().T


def _coeffs(p):
    f = dressed_frame(p)
    return coefficients_exact(f, spin_steady_closed(p), p.Gamma1)


coeff_st = st.builds(
    ReducedCoefficients,
    st.floats(-1, 1),
    st.floats(0, 2),
    st.floats(0, 0.5),
    st.complex_numbers(max_magnitude=1.0),
    st.complex_numbers(max_magnitude=1.0),
)


# --- examples --------------------------------------------------------------------


def test_fig4_pipeline_values():
    r = report(_coeffs(fig4(omega0=0.77)), 1e-6, 1e3)
    assert r.n_ss == pytest.approx(0.1458, abs=5e-4)
    assert r.var_x == pytest.approx(0.2372, abs=5e-4)
    assert r.quantum_squeezed


def test_fig8_pipeline_values():
    r = report(_coeffs(fig4(omega0=0.37, omega1=-0.7)), 1e-6, 1e3)
    assert r.n_ss == pytest.approx(0.329, abs=1e-3)
    assert r.var_x == pytest.approx(0.13745, abs=5e-5)


def test_vacuum_and_db():
    r = quadrature_variance(0.0, 0j)
    assert r.var_x == 0.25 and r.squeezing_db == pytest.approx(0.0)
    assert squeezing_db(0.125) == pytest.approx(10 * math.log10(2))
    assert quadrature_variance(1.0, 1.5).var_x == 0.0


def test_nonphysical_variance():
    with pytest.raises(NonPhysical):
        quadrature_variance(0.0, 1.0)


def test_nonzero_mean_rejected():
    with pytest.raises(ValueError):
        quadrature_variance(0.1, 0j, mean_d=0.5)


def test_moment_state_physical():
    assert MomentState(0j, 0.1, 0.2j).physical()
    assert not MomentState(0j, -0.1, 0j).physical()
    assert not MomentState(0j, 0.1, 2.0).physical()
    # |m| = n + 1/2 would give zero variance: not a state
    assert not MomentState(0j, 0.0, 0.5).physical()
    assert MomentState(1.0, 1.0, 1.0).physical()


# --- fixed point ----------------------------------------------------------------


@given(coeff_st, st.floats(0, 1), st.floats(0, 100))
def test_steady_state_is_fixed_point(c, gm, nth):
    assume(stability_check(c, gm)[0])
    gam = gm + c.a_minus - c.a_plus
    assume(gam > 1e-3)
    n, m = steady_moments(c, gm, nth)
    d = moment_rhs(MomentState(0j, n, m), c, gm, nth)
    scale = max(1.0, abs(n), abs(m))
    assert abs(d.occupancy) < 1e-12 * scale * max(1, gam)
    assert abs(d.pair) < 1e-12 * scale * max(1, abs(gam + 1j * c.delta_shift))
    assert abs(d.mean_d) == 0


@given(coeff_st, st.floats(0, 1))
def test_steady_moments_raise_when_unstable(c, gm):
    if stability_check(c, gm)[0]:
        steady_moments(c, gm, 1.0)
    else:
        with pytest.raises(Unstable):
            steady_moments(c, gm, 1.0)


# --- generator trace oracle -----------------------------------------------------


@given(coeff_st, st.floats(0, 1), st.floats(0, 5), st.integers(0, 2**31 - 1))
def test_moment_rhs_matches_generator_trace(c, gm, nth, seed):
    n = 14
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    rho[n - 4 :, :] = 0
    rho[:, n - 4 :] = 0
    rho /= np.trace(rho)
    d, dag = _ladder(n)
    L = assemble(HilbertSpace(1, (n,)), reduced_generator_single(c, gm, nth))
    drho = L.apply(rho)
    state = MomentState(np.trace(d @ rho), np.trace(dag @ d @ rho).real, np.trace(d @ d @ rho))
    rhs = moment_rhs(state, c, gm, nth)
    assert rhs.occupancy == pytest.approx(np.trace(dag @ d @ drho).real, abs=1e-10)
    assert abs(rhs.pair - np.trace(d @ d @ drho)) < 1e-10
    assert abs(rhs.mean_d - np.trace(d @ drho)) < 1e-10


def test_drift_matrix_generates_rhs():
    rng = np.random.default_rng(0)
    c, gm = STRONG, 0.1
    first, second = drift_matrices(c, gm)
    a, n, m = complex(rng.normal(), rng.normal()), 0.7, complex(0.1, -0.3)
    rhs = moment_rhs(MomentState(a, n, m), c, gm, 0.0)
    v = second @ np.array([n, m, np.conj(m)])
    assert v[0] == pytest.approx(rhs.occupancy - c.a_plus)
    assert v[1] == pytest.approx(rhs.pair - c.s1)
    assert (first @ np.array([a, np.conj(a)]))[0] == pytest.approx(rhs.mean_d)


# --- Fock-space equivalence -------------------------------------------------------


def test_steady_moments_match_fock_steady_state():
    gm, nth = 0.1, 0.2
    n_ss, m_ss = steady_moments(STRONG, gm, nth)
    N = 40
    rho = steady_state(assemble(HilbertSpace(1, (N,)), reduced_generator_single(STRONG, gm, nth)))
    d, dag = _ladder(N)
    assert np.trace(dag @ d @ rho).real == pytest.approx(n_ss, abs=1e-8)
    assert abs(np.trace(d @ d @ rho) - m_ss) < 1e-8


def test_two_mode_closed_form_matches_fock():
    gm, nth = 0.1, 0.1
    occ, pair = steady_moments_two_mode(STRONG, gm, nth)
    n = 9
    space = HilbertSpace(1, (n, n))
    rho = steady_state(assemble(space, reduced_generator_two_mode(STRONG, gm, nth)))
    d, _ = _ladder(n)
    e = np.kron(d, np.eye(n)) + np.kron(np.eye(n), d)
    assert expect(rho, e.conj().T @ e).real == pytest.approx(occ, abs=1e-4)
    assert abs(expect(rho, e @ e) - pair) < 1e-4


def test_two_mode_sums_are_twice_single_mode():
    c = _coeffs(fig4(omega0=0.6))
    n, m = steady_moments(c, 1e-6, 1e3)
    occ, pair = steady_moments_two_mode(c, 1e-6, 1e3)
    assert occ == pytest.approx(2 * n, rel=1e-12)
    assert pair == pytest.approx(2 * m, rel=1e-12)
    assert two_mode_variance(occ, pair) == pytest.approx(report(c, 1e-6, 1e3).var_x, rel=1e-12)


def test_two_mode_ode_relaxes_to_closed_form():
    # moments of e = d1 + d2 (and of the uncoupled difference mode) under the
    # two-mode generator, written out directly
    c, gm, nth = STRONG, 0.1, 0.3
    gam = gm + c.a_minus - c.a_plus
    z = gam + 1j * c.delta_shift
    s = c.s1 - c.s2

    def rhs(t, y):
        occ, pair = y[0] + 1j * y[1], y[2] + 1j * y[3]
        docc = -gam * occ + (s * np.conj(pair)).real + 2 * gm * nth + 2 * c.a_plus
        dpair = -z * pair + s * occ + 2 * c.s1
        return [docc.real, 0.0, dpair.real, dpair.imag]

    sol = solve_ivp(rhs, (0, 200), [0, 0, 0, 0], rtol=1e-11, atol=1e-13)
    occ, pair = steady_moments_two_mode(c, gm, nth)
    assert sol.y[0, -1] == pytest.approx(occ, abs=1e-8)
    assert complex(sol.y[2, -1], sol.y[3, -1]) == pytest.approx(pair, abs=1e-8)


# --- invariants -------------------------------------------------------------------


@given(st.floats(0.05, 1.4), st.floats(-0.8, 0.5), st.floats(1, 1e4))
def test_heisenberg_bound(om0, om1, nth):
    p = fig4(omega0=om0, omega1=om1, n_th=nth)
    c = _coeffs(p)
    assume(stability_check(c, p.gamma_m)[0])
    n, m = steady_moments(c, p.gamma_m, nth)
    assert MomentState(0j, n, m).physical()
    r = quadrature_variance(n, m)
    assert r.var_x * r.var_p >= 1 / 16 * (1 - 1e-9)


@given(st.floats(0, 10), st.complex_numbers(max_magnitude=10))
def test_optimal_rotation(n, m):
    assume(abs(m) <= n + 0.5)
    r = quadrature_variance(n, m)
    phis = np.linspace(0, math.pi, 4001)
    # Var(X_phi) for X_phi = (d e^{-i phi} + d^dag e^{i phi}) / 2
    var = 0.25 * (2 * n + 1 + 2 * np.real(m * np.exp(-2j * phis)))
    assert r.var_x == pytest.approx(var.min(), abs=1e-5 * (1 + abs(m)))
    assert r.var_x <= var.min() + 1e-12


def test_variance_increases_with_temperature():
    c = _coeffs(fig4(omega0=0.77))
    v = [report(c, 1e-6, nth).var_x for nth in (1e2, 1e3, 1e4)]
    assert v[0] < v[1] < v[2]


# --- stability ------------------------------------------------------------------


def test_stability_examples():
    assert stability_check(STRONG, 0.1)[0]
    # squeezing faster than damping
    bad = ReducedCoefficients(0.0, 0.1, 0.0, 1.0, 0.0)
    ok, eig = stability_check(bad, 0.0)
    assert not ok and eig.real.max() > 0
    # net heating
    assert not stability_check(ReducedCoefficients(0.0, 0.1, 0.2, 0j, 0j), 0.0)[0]


@given(coeff_st, st.floats(0, 1))
def test_stability_boundary_matches_denominator(c, gm):
    gam = gm + c.a_minus - c.a_plus
    z = gam + 1j * c.delta_shift
    s = c.s1 - c.s2
    assume(abs(z) > 1e-6)
    den = gam - (abs(s) ** 2 / z).real
    assume(abs(den) > 1e-9 and abs(gam) > 1e-9)
    assert stability_check(c, gm)[0] == (gam > 0 and den > 0)


# --- first-order variance estimate -----------------------------------------------


@pytest.mark.parametrize("omega0", [0.3, 0.77])
def test_variance_approx_tracks_exact_for_weak_pumping(omega0):
    G = 0.003
    p = fig4(omega0=omega0, g=0.01, Gamma0=G, Gamma1=G, n_th=10)
    f = dressed_frame(p)
    exact = report(_coeffs(p), p.gamma_m, p.n_th).var_x
    approx = variance_approx(f, coefficients_approx(f, G, p.g), p.gamma_m, p.n_th)
    assert approx == pytest.approx(exact, rel=1e-3)


def test_variance_approx_vacuum_limit():
    c = ReducedCoefficients(0.0, 1.0, 0.0, 0j, 0j)
    assert variance_approx(None, c, 0.1, 0.0) == 0.25

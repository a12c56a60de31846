"""Two mechanical modes sharing one spin.

With both modes coupled at ``phi = pi/4`` the sum mode ``d1 + d2`` sees the
same cooling and squeezing as the single mode does, so the two-mode
quadrature variance equals the single-mode one. This script checks that on a
few parameter points, first with the closed forms and then against a
truncated two-mode Fock-space steady state at low temperature.

Run with ``python3 demos/two_mode.py``.
"""


from nvsqueeze.model import detuning_for_resonance
from nvsqueeze.moments import quadrature_variance, steady_moments, steady_moments_two_mode, two_mode_variance
from nvsqueeze.validation import SEED, coefficients_for, small_nth_points, two_mode_fock_error
from nvsqueeze.sweep import caption_params


if __name__ == "__main__":
    for om0 in (0.2, 0.37, 0.6):
        p = caption_params(omega0=om0, omega1=-0.7)
        p = p.replace(delta=detuning_for_resonance(p.omega_m, p.omega0, p.omega1))
        c = coefficients_for(p)
        n, m = steady_moments(c, p.gamma_m, p.n_th)
        vx = quadrature_variance(n, m).var_x
        vu = two_mode_variance(*steady_moments_two_mode(c, p.gamma_m, p.n_th))
        print(f"omega0 = {om0:.2f}: var_x = {vx:.6f}, var_u = {vu:.6f}, difference {abs(vx - vu):.1e}")

    print("Fock-space check (8 x 8 levels, small n_th):")
    for p in small_nth_points(3, SEED, n_th=(0.05, 0.3), max_n=0.4):
        dv, docc, _ = two_mode_fock_error(p, focks=(8,))
        print(f"  omega0 = {p.omega0:.3f}, n_th = {p.n_th:.3f}: |var error| = {dv:.1e}, |occupancy error| = {docc:.1e}")

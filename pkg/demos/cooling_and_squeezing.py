"""Cooling and squeezing along the microwave Rabi frequency.

Runs the closed-form pipeline (pumped spin steady state -> reduced
coefficients -> second moments) on a line of ``omega0`` values with the
detuning locked to the two-phonon resonance, and prints where the mechanical
mode is cooled below one phonon and where one quadrature drops below the
vacuum level. The comparison between ``omega1 = 0`` and ``omega1 = -0.7``
shows the gain from the second microwave drive.

Run with ``python3 demos/cooling_and_squeezing.py``.
"""

import numpy as np

from nvsqueeze.sweep import Axis, SweepSpec, caption_params, run_sweep


def line(omega1, n_th=1e3, count=400):
    spec = SweepSpec(
        base=caption_params(omega1=omega1, n_th=n_th),
        axes=(Axis("omega0", 1e-3, 1.4, count),),
        outputs=("n_ss", "var_x", "squeezing_db"),
    )
    return run_sweep(spec, workers=1)


def summarise(omega1):
    res = line(omega1)
    om, n, v = res.column("omega0"), res.column("n_ss"), res.column("var_x")
    i = int(np.nanargmin(v))
    cooled = om[n < 1]
    squeezed = om[v < 0.25]
    print(f"omega1 = {omega1:+.2f}")
    print(f"  lowest n_ss        {np.nanmin(n):.4f} at omega0 = {om[int(np.nanargmin(n))]:.3f}")
    if cooled.size:
        print(f"  n_ss < 1 for       omega0 in [{cooled.min():.3f}, {cooled.max():.3f}]")
    print(f"  lowest var_x       {v[i]:.5f} at omega0 = {om[i]:.3f} ({res.column('squeezing_db')[i]:.2f} dB)")
    if squeezed.size:
        print(f"  var_x < 1/4 for    omega0 in [{squeezed.min():.3f}, {squeezed.max():.3f}]")
    else:
        print("  no quadrature squeezing on this line")


if __name__ == "__main__":
    for w1 in (0.0, -0.7):
        summarise(w1)

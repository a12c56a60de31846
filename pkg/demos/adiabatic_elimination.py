"""How good is eliminating the spin? A full spin-mechanics comparison.

The reduced mechanical master equation assumes the pumped spin relaxes much
faster than the mechanics. Here the steady-state phonon number from the
closed-form moments is compared with the exact steady state of the coupled
three-level spin plus Fock-space oscillator for a family of shrinking
couplings.

Two variants are shown. ``spin_source="closed"`` feeds the reduced
coefficients with the closed-form pumped spin state; ``spin_source="model"``
uses the uncoupled steady state of the very spin model that is being
compared against. Only the second is self-consistent and it converges
roughly as ``g**2``; the gap left by the first comes from the two spin
states living in different rotating frames.

Run with ``python3 demos/adiabatic_elimination.py`` (a few seconds).
"""

from nvsqueeze.validation import elimination_study


def show(source):
    print(f"spin state from: {source}")
    for r in elimination_study(spin_source=source):
        print(f"  g = {r['g']:<6}  n_ss reduced = {r['n_closed']:.5f}  full = {r['n_full']:.5f}  rel. error = {r['rel_error']:.2e}")


if __name__ == "__main__":
    show("closed")
    show("model")

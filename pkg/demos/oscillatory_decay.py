"""Oscillatory integrals with and without a level crossing.

The first-order correction is an integral of a smooth envelope times
``exp(i lambda phi(t))``.  When the gap closes (phi has a stationary point)
the integral decays like lambda^-1/2, otherwise like lambda^-1.
"""
import numpy as np

from adiabatic_lab.adiabatic import oscillatory_decay_probe

width = 0.2
lams = np.logspace(2, 4, 9)
bump = lambda s: np.exp(-(s**2) / (2 * width**2))

crossing = oscillatory_decay_probe(lambda s: s, bump, lams)
gapped = oscillatory_decay_probe(lambda s: np.ones_like(s), lambda s: bump(s + 1), lams)

print("lambda      |I| crossing   |I| gapped")
for lam, a, b in zip(lams, crossing.errors, gapped.errors):
    print(f"{lam:9.1f}   {a:.4e}     {b:.4e}")
print(f"\nslopes: crossing {crossing.slope:.3f}, gapped {gapped.slope:.3f}")

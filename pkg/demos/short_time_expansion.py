"""Short-time expansion of a free-particle state in a periodic potential.

Starting from a constant wavefunction the expansion keeps the terms up to
t^3 in the exponent.  Its error is compared with a split-operator reference
at several times, and the same factor is evaluated at imaginary time.
"""
import numpy as np

from adiabatic_lab.fitting import loglog_fit
from adiabatic_lab.models import default_grid_model
from adiabatic_lab.wk import beta_scaling, wk_error

g = default_grid_model()
times = np.array([0.005, 0.01, 0.02, 0.05])
errs = np.array([wk_error(g, t) for t in times])
for t, e in zip(times, errs):
    print(f"t = {t:6.3f}   max error {e:.3e}   error / t^3 = {e / t**3:.2f}")
fit = loglog_fit(times, errs)
print(f"fitted exponent {fit.slope:.3f}")
# the first neglected term is t^3 V''''/24 m^2 inside the bracket
print(f"expected error / t^3 from the next term: {(2 * np.pi) ** 4 / 24:.2f}")

print(f"\nlong time: error(1) / error(0.01) = {wk_error(g, 1.0) / wk_error(g, 0.01):.2e}")

sc = beta_scaling(g, [0.1, 0.05, 0.025])
print("\nimaginary time")
for b, r in zip(sc.fit.lambdas, sc.fit.errors):
    print(f"beta = {b:5.3f}   residual {r:.3e}")
print(f"fitted exponent {sc.fit.slope:.2f}")

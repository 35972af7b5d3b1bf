"""How fast does the leading-order error vanish with the coupling strength?

Sweeps lambda over three decades, compares the leading-order state with the
exact one and fits a power law to the infidelity.
"""
import numpy as np

from adiabatic_lab.adiabatic import TimeGrid, lambda_sweep_fit
from adiabatic_lab.models import make_schedule

lams = 10 ** np.arange(1.0, 3.01, 0.5)
res = lambda_sweep_fit(make_schedule("gapped-lz"), lams, TimeGrid(0.0, 2.0, 20000), tol=1e-10)

for lam, err in zip(res.lambdas, res.errors):
    print(f"lambda = {lam:8.1f}   1 - F = {err:.3e}")
print(f"\nfitted slope {res.slope:.2f} +- {res.slope_stderr:.2f}")
print("a slope near -2 means the amplitude error falls like 1/lambda.")

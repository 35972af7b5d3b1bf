"""Berry phase of a spin carried around a loop in field space.

The field ``(X0 + R cos t, 0, Z0 + R sin t)`` circles the degeneracy at the
origin, so the geometric phase is pi and the state changes sign after one
period.  Moving the loop off the origin removes the phase.
"""
import numpy as np

from adiabatic_lab.adiabatic import berry_cycle_phase
from adiabatic_lab.models import make_schedule
from adiabatic_lab.oracle import propagate_dense

for label, params in (("encloses origin", {"R": 1.0}), ("misses origin", {"X0": 2.0, "R": 0.5})):
    cyc = berry_cycle_phase(make_schedule("berry-xz", params), 200.0, nodes=2000)
    print(f"{label:16s} gamma = {np.round(cyc.geometric_phase, 6)}")

sched = make_schedule("berry-xz")
cyc = berry_cycle_phase(sched, 200.0)
psi0 = cyc.trajectory.states[0]
exact = propagate_dense(sched, 200.0, psi0, 0.0, sched.period, tol=1e-11)
# strip the dynamical phase; what remains is the sign flip
overlap = np.vdot(psi0, exact.final) * np.exp(1j * cyc.dynamical_phase[0])
print(f"\n<psi(0)|psi(T)> without dynamical phase: {overlap.real:+.5f} {overlap.imag:+.1e}i")

# a cone of half-angle theta sweeps a solid angle 2 pi (1 - cos theta)
theta = 0.8
cone = berry_cycle_phase(make_schedule("berry-full", {"theta": theta}), 50.0)
print(f"cone theta = {theta}: gamma = {cone.geometric_phase}, "
      f"expected +-{np.pi * (1 - np.cos(theta)):.6f} (mod 2 pi)")

"""Reference propagators and state comparison.

``propagate_dense`` integrates ``i d|psi>/dt = lam H(t) |psi>`` with classic
RK4 on a uniform step grid, doubling the step count until successive
solutions agree (Richardson estimate ``|y_2n - y_n| / 15 <= tol``).
``propagate_grid`` is a Strang split-operator propagator on a periodic grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import BudgetError, ValidationError
from .models import GridModel, HamiltonianSchedule

CHUNK = 1 << 15
DEFAULT_MAX_STEPS = 1 << 27


@numba.njit(cache=True)
def _matvec(H, y, out):
    n = y.shape[0]
    for i in range(n):
        acc = 0j
        for j in range(n):
            acc += H[i, j] * y[j]
        out[i] = acc


@numba.njit(cache=True)
def _rk4_chunk(Hn, Hm, y, h, lam, sub, first, out):
    """Advance ``y`` through ``Hm.shape[0]`` steps; store every ``sub``-th state.

    ``first`` is the global index of the chunk's first step.
    """
    n = y.shape[0]
    a = -1j * lam
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    rec = 0
    for s in range(Hm.shape[0]):
        _matvec(Hn[s], y, k1)
        for i in range(n):
            k1[i] *= a
            tmp[i] = y[i] + 0.5 * h * k1[i]
        _matvec(Hm[s], tmp, k2)
        for i in range(n):
            k2[i] *= a
            tmp[i] = y[i] + 0.5 * h * k2[i]
        _matvec(Hm[s], tmp, k3)
        for i in range(n):
            k3[i] *= a
            tmp[i] = y[i] + h * k3[i]
        _matvec(Hn[s + 1], tmp, k4)
        for i in range(n):
            k4[i] *= a
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if (first + s + 1) % sub == 0:
            for i in range(n):
                out[rec, i] = y[i]
            rec += 1
    return rec


@dataclass(frozen=True)
class DenseResult:
    """States of a dense propagation at uniformly spaced output times."""

    times: np.ndarray
    states: np.ndarray  # (n_out + 1, N)
    steps: int
    error_estimate: float
    norm_drift: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _fixed_rk4(schedule, lam, psi0, t0, t1, n_out, sub):
    total = n_out * sub
    h = (t1 - t0) / total
    y = np.array(psi0, dtype=np.complex128)
    out = np.empty((n_out + 1, y.shape[0]), dtype=np.complex128)
    out[0] = y
    rec = 1
    for start in range(0, total, CHUNK):
        c = min(CHUNK, total - start)
        tn = t0 + h * np.arange(start, start + c + 1)
        Hn = np.ascontiguousarray(schedule.evaluate(tn), dtype=np.complex128)
        Hm = np.ascontiguousarray(schedule.evaluate(tn[:-1] + 0.5 * h), dtype=np.complex128)
        rec += _rk4_chunk(Hn, Hm, y, h, float(lam), sub, start, out[rec:])
    return out


def _initial_substeps(schedule, lam, t0, t1, n_out):
    probe = np.linspace(t0, t1, 65)
    Hs = schedule.evaluate(probe)
    scale = lam * max(np.linalg.norm(Hs, ord=2, axis=(1, 2)).max(), 1e-300)
    per_interval = abs(t1 - t0) / n_out
    return max(1, math.ceil(scale * per_interval / 0.25))


def propagate_dense(
    schedule: HamiltonianSchedule,
    lam: float,
    psi0,
    t0: float,
    t1: float,
    tol: float = 1e-10,
    n_out: int = 1,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> DenseResult:
    """Numerically exact solution of ``i dpsi/dt = lam H(t) psi`` on ``[t0, t1]``.

    States are returned at ``n_out + 1`` equally spaced times.  The input is
    not normalized, so linearity can be tested on arbitrary vectors; the
    recorded ``norm_drift`` is relative to the initial norm.
    """
    if not 1e-12 <= tol <= 1e-6:
        raise ValidationError(f"tol must lie in [1e-12, 1e-6], got {tol:g}")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (schedule.dim,):
        raise ValidationError(f"initial state has shape {psi0.shape}, expected ({schedule.dim},)")
    if n_out < 1:
        raise ValidationError("n_out must be >= 1")
    times = np.linspace(t0, t1, n_out + 1)
    if t1 == t0:
        return DenseResult(times, np.repeat(psi0[None], n_out + 1, axis=0), 0, 0.0, 0.0)

    sub = _initial_substeps(schedule, lam, t0, t1, n_out)
    coarse = _fixed_rk4(schedule, lam, psi0, t0, t1, n_out, sub)
    while True:
        if 2 * sub * n_out > max_steps:
            raise BudgetError(
                f"dense propagation needs more than {max_steps} steps for tol={tol:g} "
                f"(lam={lam:g}, interval [{t0:g}, {t1:g}])"
            )
        fine = _fixed_rk4(schedule, lam, psi0, t0, t1, n_out, 2 * sub)
        err = float(np.max(np.linalg.norm(fine - coarse, axis=1))) / 15.0
        sub *= 2
        if err <= tol:
            break
        coarse = fine
    n0 = np.linalg.norm(psi0)
    drift = float(abs(np.linalg.norm(fine[-1]) - n0) / n0) if n0 > 0 else 0.0
    return DenseResult(times, fine, sub * n_out, err, drift)


@dataclass(frozen=True)
class GridState:
    """Wavefunction samples on a :class:`GridModel`."""

    model: GridModel
    psi: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.model.dx))


def propagate_grid(model: GridModel, psi0, t: float, steps: int) -> GridState:
    """Strang split-operator propagation under a time-independent potential."""
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    if t < 0:
        raise ValidationError("t must be non-negative")
    psi = np.array(psi0.psi if isinstance(psi0, GridState) else psi0, dtype=complex)
    if psi.shape != (model.n,):
        raise ValidationError(f"state has shape {psi.shape}, expected ({model.n},)")
    dt = t / steps
    half_v = np.exp(-0.5j * dt * model.V)
    kin = np.exp(-1j * dt * model.kinetic)
    psi = half_v * psi
    for _ in range(steps - 1):
        psi = np.fft.ifft(kin * np.fft.fft(psi))
        psi = (half_v * half_v) * psi
    psi = half_v * np.fft.ifft(kin * np.fft.fft(psi))
    return GridState(model, psi)


def grid_energy(model: GridModel, psi) -> float:
    """Energy expectation of a normalized grid state."""
    psi = psi.psi if isinstance(psi, GridState) else np.asarray(psi)
    kinetic = np.fft.ifft(model.kinetic * np.fft.fft(psi))
    return float(np.real(np.vdot(psi, kinetic + model.V * psi)) * model.dx)


def fidelity(a, b) -> float:
    """``|<a|b>|^2`` for state vectors or grid states (grid measure ``L/N_x``)."""
    if isinstance(a, GridState) or isinstance(b, GridState):
        if not (isinstance(a, GridState) and isinstance(b, GridState)):
            raise ValidationError("cannot compare a grid state with a state vector")
        if a.psi.shape != b.psi.shape:
            raise ValidationError(f"size mismatch: {a.psi.shape} vs {b.psi.shape}")
        value = abs(np.vdot(a.psi, b.psi) * a.model.dx) ** 2
    else:
        a, b = np.asarray(a), np.asarray(b)
        if a.shape != b.shape:
            raise ValidationError(f"size mismatch: {a.shape} vs {b.shape}")
        value = abs(np.vdot(a, b)) ** 2
    return float(min(value, 1.0))

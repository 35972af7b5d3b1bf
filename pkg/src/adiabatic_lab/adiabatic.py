"""Propagation of ``i d|psi>/dt = lam H(t) |psi>`` in the instantaneous eigenbasis.

The state is expanded as

    |psi(t)> = sum_n c_n(t) exp(i gamma_n(t)) exp(-i Theta_n(t)) |n; t>,

with dynamical phases ``Theta_n = lam * int E_n`` and geometric phases
``gamma_n`` accumulated from eigenvector overlaps.  Freezing ``c_n`` gives the
leading-order (adiabatic) state; integrating the amplitude equations

    dc_m/dt = -sum_{n != m} exp(i(gamma_n - gamma_m)) exp(-i(Theta_n - Theta_m)) D_mn c_n

is exact.  The first iterate of those equations, a strongly oscillating
integral for large ``lam``, is exposed separately so its decay can be measured.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import FitError, LabError, ResolutionError, StepSizeError, ValidationError
from .fitting import SweepResult, loglog_fit
from .models import HamiltonianSchedule
from .oracle import fidelity, propagate_dense
from .spectral import (
    FrameSequence,
    SpectralFrame,
    coupling_sequence,
    frame_sequence,
    gauge_align,
    geometric_phase,
    wrap_phase,
)

NORM_TOL = 1e-9
DRIFT_LIMIT = 1e-6
POINTS_PER_PERIOD = 20


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``steps`` intervals on ``[t0, t1]``."""

    t0: float
    t1: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValidationError(f"a time grid needs at least 2 steps, got {self.steps}")
        if not self.t1 > self.t0:
            raise ValidationError(f"need t1 > t0, got [{self.t0}, {self.t1}]")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.steps + 1)

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.steps

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t0, self.t1, self.steps * factor)


@dataclass(frozen=True)
class PhaseLedger:
    """Dynamical and geometric phases per grid time (rows) and level (columns)."""

    times: np.ndarray
    dynamical: np.ndarray
    geometric: np.ndarray
    lam: float

    @property
    def total(self) -> np.ndarray:
        """Combined phase ``gamma_n - Theta_n`` multiplying each eigenvector."""
        return self.geometric - self.dynamical


@dataclass(frozen=True)
class AdiabaticTrajectory:
    frames: FrameSequence
    ledger: PhaseLedger
    amplitudes: np.ndarray  # (K, N)
    states: np.ndarray  # (K, N)
    couplings: Optional[np.ndarray] = None  # (K, N, N)

    @property
    def times(self) -> np.ndarray:
        return self.frames.times

    def populations(self) -> np.ndarray:
        """``|<n; t|psi(t)>|^2`` per time and level."""
        proj = np.einsum("kin,ki->kn", self.frames.basis.conj(), self.states)
        return np.abs(proj) ** 2


def _as_amplitudes(c0, dim: int) -> np.ndarray:
    if np.isscalar(c0) and float(c0).is_integer():
        level = int(c0)
        if not 0 <= level < dim:
            raise ValidationError(f"level {level} out of range for dimension {dim}")
        c = np.zeros(dim, dtype=complex)
        c[level] = 1.0
        return c
    c = np.asarray(c0, dtype=complex)
    if c.shape != (dim,):
        raise ValidationError(f"amplitudes have shape {c.shape}, expected ({dim},)")
    if abs(np.linalg.norm(c) - 1) > NORM_TOL:
        raise ValidationError(f"initial amplitudes must be normalized, norm = {np.linalg.norm(c):.12g}")
    return c


def schedule_frames(schedule: HamiltonianSchedule, times, degeneracy_tol: float = 1e-9) -> FrameSequence:
    """Gauge-aligned frames of ``schedule`` at ``times``."""
    times = np.asarray(times, dtype=float)
    return frame_sequence(schedule.evaluate(times), times, degeneracy_tol)


def _extended_couplings(schedule, frames: FrameSequence, degeneracy_tol: float) -> np.ndarray:
    """Couplings at every node, using one extra frame beyond each end of the grid."""
    times = frames.times
    dt = times[1] - times[0]
    ends = [
        SpectralFrame(float(t), *np.linalg.eigh(schedule.evaluate(t)))
        for t in (times[0] - dt, times[-1] + dt)
    ]
    before = gauge_align(frames[0], ends[0], degeneracy_tol)
    after = gauge_align(frames[len(frames) - 1], ends[1], degeneracy_tol)
    ext = FrameSequence(
        np.concatenate([[before.t], times, [after.t]]),
        np.concatenate([before.energies[None], frames.energies, after.energies[None]]),
        np.concatenate([before.basis[None], frames.basis, after.basis[None]]),
    )
    return coupling_sequence(ext)


def phase_ledger(frames: FrameSequence, lam: float) -> PhaseLedger:
    """Trapezoidal dynamical phases and overlap-based geometric phases."""
    dynamical = lam * cumulative_trapezoid(frames.energies, frames.times, axis=0, initial=0.0)
    return PhaseLedger(frames.times, dynamical, geometric_phase(frames), float(lam))


def assemble_states(frames: FrameSequence, ledger: PhaseLedger, amplitudes) -> np.ndarray:
    """``sum_n c_n(t) exp(i gamma_n - i Theta_n) |n; t>`` at each grid time."""
    amplitudes = np.asarray(amplitudes)
    if amplitudes.ndim == 1:
        amplitudes = np.broadcast_to(amplitudes, ledger.total.shape)
    weights = amplitudes * np.exp(1j * ledger.total)
    return np.einsum("kin,kn->ki", frames.basis, weights)


def propagate_leading(
    schedule: HamiltonianSchedule,
    lam: float,
    c0,
    grid: TimeGrid,
    degeneracy_tol: float = 1e-9,
    with_couplings: bool = True,
) -> AdiabaticTrajectory:
    """Leading-order adiabatic state: amplitudes frozen at their initial values."""
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    frames = schedule_frames(schedule, grid.times, degeneracy_tol)
    c = _as_amplitudes(c0, frames.dim)
    ledger = phase_ledger(frames, lam)
    amplitudes = np.repeat(c[None], len(frames), axis=0)
    states = assemble_states(frames, ledger, amplitudes)
    couplings = _extended_couplings(schedule, frames, degeneracy_tol) if with_couplings else None
    return AdiabaticTrajectory(frames, ledger, amplitudes, states, couplings)


def _amplitude_generator(ledger_total: np.ndarray, D: np.ndarray) -> np.ndarray:
    # M_mn = -exp(-i phi_m) D_mn exp(i phi_n), diagonal removed.
    M = -np.exp(-1j * ledger_total)[:, :, None] * D * np.exp(1j * ledger_total)[:, None, :]
    idx = np.arange(D.shape[1])
    M[:, idx, idx] = 0
    return M


def propagate_amplitudes(
    schedule: HamiltonianSchedule,
    lam: float,
    c0,
    grid: TimeGrid,
    degeneracy_tol: float = 1e-9,
) -> AdiabaticTrajectory:
    """Integrate the exact amplitude equations with fixed-step RK4.

    Frames, couplings and phases are evaluated on the grid refined by two so
    that the RK4 half-step stages fall on nodes.  The returned trajectory is
    sampled on ``grid`` itself.
    """
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    fine = grid.refined(2)
    frames = schedule_frames(schedule, fine.times, degeneracy_tol)
    c = _as_amplitudes(c0, frames.dim)
    D = _extended_couplings(schedule, frames, degeneracy_tol)
    ledger = phase_ledger(frames, lam)
    M = _amplitude_generator(ledger.total, D)

    dt = grid.dt
    out = np.empty((grid.steps + 1, frames.dim), dtype=complex)
    out[0] = c
    y = c.copy()
    for k in range(grid.steps):
        M0, Mh, M1 = M[2 * k], M[2 * k + 1], M[2 * k + 2]
        k1 = M0 @ y
        k2 = Mh @ (y + 0.5 * dt * k1)
        k3 = Mh @ (y + 0.5 * dt * k2)
        k4 = M1 @ (y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y
    drift = float(np.max(np.abs(np.linalg.norm(out, axis=1) - 1)))
    if drift > DRIFT_LIMIT:
        raise StepSizeError(
            f"amplitude norm drifted by {drift:.3e} (> {DRIFT_LIMIT:g}); "
            f"use a finer grid than {grid.steps} steps"
        )
    coarse = slice(None, None, 2)
    frames_c = FrameSequence(frames.times[coarse], frames.energies[coarse], frames.basis[coarse])
    ledger_c = PhaseLedger(
        ledger.times[coarse], ledger.dynamical[coarse], ledger.geometric[coarse], ledger.lam
    )
    states = assemble_states(frames_c, ledger_c, out)
    return AdiabaticTrajectory(frames_c, ledger_c, out, states, D[coarse])


def _phi_integrals(delta: np.ndarray):
    """``int_0^1 exp(i d u) du`` and ``int_0^1 u exp(i d u) du`` elementwise."""
    d = np.asarray(delta, dtype=float)
    small = np.abs(d) < 0.05
    e0 = np.empty(d.shape, dtype=complex)
    e1 = np.empty(d.shape, dtype=complex)
    big = ~small
    db = d[big]
    eb = np.exp(1j * db)
    e0[big] = (eb - 1) / (1j * db)
    e1[big] = eb / (1j * db) + (eb - 1) / db**2
    ds = d[small]
    s0 = np.zeros(ds.shape, dtype=complex)
    s1 = np.zeros(ds.shape, dtype=complex)
    term = np.ones(ds.shape, dtype=complex)
    for j in range(10):
        s0 += term / (j + 1)
        s1 += term / (j + 2)
        term = term * (1j * ds) / (j + 1)
    e0[small] = s0
    e1[small] = s1
    return e0, e1


def filon_linear(times, amplitude, phase) -> np.ndarray:
    """Cumulative ``int amplitude(t) exp(i phase(t)) dt`` on a grid.

    Amplitude and phase are interpolated linearly on each interval and the
    exponential is integrated exactly, so linear phases are handled to rounding
    at any sampling density.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitude, dtype=complex)
    p = np.asarray(phase, dtype=float)
    h = np.diff(t)
    e0, e1 = _phi_integrals(np.diff(p))
    pieces = h * np.exp(1j * p[:-1]) * (a[:-1] * e0 + (a[1:] - a[:-1]) * e1)
    return np.concatenate([[0j], np.cumsum(pieces)])


def correction_integral(
    frames: FrameSequence,
    couplings: np.ndarray,
    ledger: PhaseLedger,
    n: int,
    m: int,
    t: Optional[float] = None,
    points_per_period: int = POINTS_PER_PERIOD,
) -> complex:
    """First-order correction ``I_nm(t)`` from ``t0`` to grid time ``t``.

    ``int exp(i(gamma_n - gamma_m)) exp(-i lam int Omega_nm) D_mn dt'``, where
    the dynamical phase difference is read from ``ledger``.
    """
    if n == m:
        raise ValidationError("correction integral needs n != m")
    times = frames.times
    if t is None:
        stop = len(times)
    else:
        stop = int(np.searchsorted(times, t + 1e-9 * abs(times[1] - times[0]), side="right"))
        if stop < 1 or not math.isclose(times[stop - 1], t, rel_tol=0, abs_tol=1e-9 * abs(times[1] - times[0]) + 1e-15):
            raise ValidationError(f"t={t} is not a grid time")
    sl = slice(0, stop)
    if stop < 2:
        return 0j
    dt = np.diff(times[sl])
    omega = np.abs(np.diff(ledger.dynamical[sl, n] - ledger.dynamical[sl, m]) / dt)
    if np.any(omega > 0):
        per_period = 2 * np.pi / (omega.max() * dt[np.argmax(omega)])
        if per_period < points_per_period:
            raise ResolutionError(
                f"oscillation of I_{n}{m} sampled with {per_period:.1f} points per period "
                f"(< {points_per_period}); refine the grid"
            )
    amp = np.exp(1j * (ledger.geometric[sl, n] - ledger.geometric[sl, m])) * couplings[sl, m, n]
    phase = -(ledger.dynamical[sl, n] - ledger.dynamical[sl, m])
    return complex(filon_linear(times[sl], amp, phase)[-1])


def oscillatory_integral(
    gap_profile: Callable,
    envelope: Callable,
    lam: float,
    window: tuple[float, float] = (-1.0, 1.0),
    points_per_period: int = 40,
    min_points: int = 4001,
) -> complex:
    """``int_window exp(-i lam int_{t0}^t Omega) D(t) dt`` by linear Filon quadrature."""
    a, b = window
    probe = np.linspace(a, b, min_points)
    omax = float(np.max(np.abs(gap_profile(probe))))
    n = max(min_points, int(math.ceil((b - a) * lam * omax * points_per_period / (2 * np.pi))) + 1)
    t = np.linspace(a, b, n)
    phase = -lam * cumulative_trapezoid(np.broadcast_to(gap_profile(t), t.shape), t, initial=0.0)
    return complex(filon_linear(t, np.broadcast_to(envelope(t), t.shape), phase)[-1])


def oscillatory_decay_probe(
    gap_profile: Callable,
    envelope: Callable,
    lambdas: Sequence[float],
    window: tuple[float, float] = (-1.0, 1.0),
    points_per_period: int = 40,
) -> SweepResult:
    """Magnitude of the oscillatory integral versus ``lam`` and its log-log slope."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size < 4:
        raise FitError(f"need at least 4 lambda values, got {lambdas.size}")
    values = np.array(
        [abs(oscillatory_integral(gap_profile, envelope, lam, window, points_per_period)) for lam in lambdas]
    )
    return loglog_fit(lambdas, values)


def sampling_per_period(schedule: HamiltonianSchedule, lam: float, grid: TimeGrid, probes: int = 257) -> float:
    """Smallest number of grid points per period of ``lam * (E_max - E_min)``."""
    t = np.linspace(grid.t0, grid.t1, probes)
    E = np.linalg.eigvalsh(schedule.evaluate(t))
    spread = float(np.max(E[:, -1] - E[:, 0]))
    if spread == 0:
        return math.inf
    return 2 * np.pi / (lam * spread * grid.dt)


def _tag(lam: float, exc: LabError) -> LabError:
    tagged = type(exc)(f"lambda={lam:g}: {exc}")
    tagged.__dict__.update(exc.__dict__)
    return tagged


def leading_order_error(
    schedule: HamiltonianSchedule, lam: float, grid: TimeGrid, level: int = 0, tol: float = 1e-10
) -> float:
    """``1 - |<psi_leading|psi_exact>|^2`` at the final grid time."""
    traj = propagate_leading(schedule, lam, level, grid, with_couplings=False)
    exact = propagate_dense(schedule, lam, traj.states[0], grid.t0, grid.t1, tol=tol)
    return 1.0 - fidelity(traj.states[-1], exact.final)


def lambda_sweep_fit(
    schedule: HamiltonianSchedule,
    lambdas: Sequence[float],
    grid: TimeGrid,
    level: int = 0,
    tol: float = 1e-10,
) -> SweepResult:
    """Leading-order infidelity versus the dense oracle over ``lambdas``, fitted log-log."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size and np.any(np.diff(lambdas) <= 0):
        raise ValidationError("lambdas must be strictly increasing")
    errors = []
    for lam in lambdas:
        try:
            errors.append(leading_order_error(schedule, float(lam), grid, level, tol))
        except LabError as exc:
            raise _tag(float(lam), exc) from exc
    return loglog_fit(lambdas, errors)


@dataclass(frozen=True)
class BerryCycle:
    """Result of transporting each instantaneous eigenstate around one period.

    ``overlap[n]`` is ``<psi(t0)|psi(T)>`` for the leading-order state started
    in level ``n``; ``transported_overlap`` strips the dynamical phase from it.
    """

    geometric_phase: np.ndarray
    dynamical_phase: np.ndarray
    overlap: np.ndarray
    transported_overlap: np.ndarray
    trajectory: AdiabaticTrajectory


def berry_cycle_phase(
    schedule: HamiltonianSchedule,
    lam: float,
    nodes: int = 2000,
    degeneracy_tol: float = 1e-9,
) -> BerryCycle:
    """Closed-loop geometric phase (mod 2 pi) and cycle overlap per level."""
    if schedule.period is None:
        raise ValidationError("berry cycle requires a periodic schedule")
    grid = TimeGrid(0.0, schedule.period, nodes)
    traj = propagate_leading(schedule, lam, 0, grid, degeneracy_tol, with_couplings=False)
    frames = traj.frames
    gamma = wrap_phase(geometric_phase(frames, closed=True)[-1])
    theta = traj.ledger.dynamical[-1]
    overlaps = []
    for n in range(frames.dim):
        c = np.zeros(frames.dim, dtype=complex)
        c[n] = 1.0
        states = assemble_states(frames, traj.ledger, c)
        overlaps.append(np.vdot(states[0], states[-1]))
    overlaps = np.array(overlaps)
    return BerryCycle(gamma, theta, overlaps, overlaps * np.exp(1j * theta), traj)


"""Strong perturbation in the interaction picture, ``H = H0 + lam V(t)``.

With ``U = exp(-i H0 (t - t0))`` the interaction-picture perturbation is
``U^dagger V U``.  Its eigenvectors are ``U^dagger`` applied to those of ``V``
up to a phase ``alpha_n`` obeying ``d alpha_n/dt = -<n; t|H0|n; t>``, so the
leading-order state can be written entirely in V's eigenbasis:

    |psi(t)> = sum_n c_n exp(i gamma_n) exp(-i int (<n|H0|n> + lam v_n)) |n; t>.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .adiabatic import TimeGrid, _as_amplitudes, assemble_states, PhaseLedger, schedule_frames
from .errors import ValidationError
from .models import HamiltonianSchedule
from .spectral import (
    FrameSequence,
    _check_gaps,
    check_hermitian,
    eigen_frame,
    frame_sequence,
    geometric_phase,
)


@dataclass(frozen=True)
class SplitHamiltonian:
    """Time-independent ``H0`` plus a strong time-dependent ``lam * V(t)``."""

    H0: np.ndarray
    V: HamiltonianSchedule
    lam: float

    def __post_init__(self):
        H0 = check_hermitian(self.H0)
        if H0.shape[0] != self.V.dim:
            raise ValidationError(f"H0 has dimension {H0.shape[0]}, V has {self.V.dim}")
        object.__setattr__(self, "H0", H0)

    def full_schedule(self) -> HamiltonianSchedule:
        """``H0 + lam V(t)`` as a schedule to be propagated with unit coupling."""
        return self.V.plus_constant(self.H0, self.lam)

    def with_lambda(self, lam: float) -> "SplitHamiltonian":
        return SplitHamiltonian(self.H0, self.V, lam)


def free_propagator(H0, t: float) -> np.ndarray:
    """``exp(-i H0 t)`` from the eigendecomposition of ``H0``."""
    H0 = check_hermitian(H0)
    e, Q = np.linalg.eigh(0.5 * (H0 + H0.conj().T))
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t, e))
    U = np.einsum("ij,...j,kj->...ik", Q, phases, Q.conj())
    U[t == 0] = np.eye(e.shape[0])  # exact identity rather than Q Q^dagger
    return U


@dataclass(frozen=True)
class DressedFrameReport:
    """Comparison of V(t) with its interaction-picture image ``U^dagger V U``."""

    t: float
    spectrum_error: float
    overlap_magnitudes: np.ndarray
    phases: np.ndarray

    @property
    def max_overlap_defect(self) -> float:
        return float(np.max(np.abs(self.overlap_magnitudes - 1)))


def dressed_frame_check(
    split: SplitHamiltonian, t: float, t0: float = 0.0, degeneracy_tol: float = 1e-9
) -> DressedFrameReport:
    """Check that ``U |n; t>_I`` is ``|n; t>`` up to a phase."""
    U = free_propagator(split.H0, t - t0)
    Vt = split.V.evaluate(t)
    lab = eigen_frame(Vt, t)
    _check_gaps(lab.energies, t, degeneracy_tol)
    inter = eigen_frame(U.conj().T @ Vt @ U, t)
    overlaps = np.einsum("in,ij,jn->n", lab.basis.conj(), U, inter.basis)
    return DressedFrameReport(
        float(t),
        float(np.max(np.abs(lab.energies - inter.energies))),
        np.abs(overlaps),
        np.angle(overlaps),
    )


def h0_expectations(H0, frames: FrameSequence) -> np.ndarray:
    """``<n; t|H0|n; t>`` per time and level (real)."""
    return np.real(np.einsum("kin,ij,kjn->kn", frames.basis.conj(), H0, frames.basis))


def alpha_phase(split: SplitHamiltonian, frames: FrameSequence) -> np.ndarray:
    """``alpha_n(t) = -int_{t0}^t <n|H0|n> dt'`` by trapezoid on the frame times."""
    return -cumulative_trapezoid(h0_expectations(split.H0, frames), frames.times, axis=0, initial=0.0)


@dataclass(frozen=True)
class InteractionLedger:
    """Phases relating V's eigenframes to the interaction-picture eigenframes.

    ``alpha`` comes from the H0 expectation formula; ``alpha_extracted`` is read
    off independently computed interaction-picture eigenvectors via
    ``arg <n; t|U|n; t>_I``.  ``gamma_interaction`` is the geometric phase of
    interaction-picture eigenvectors phased so that ``U |n>_I = exp(i alpha)|n>``.
    """

    times: np.ndarray
    v: np.ndarray
    alpha: np.ndarray
    alpha_extracted: np.ndarray
    gamma: np.ndarray
    gamma_interaction: np.ndarray


def interaction_ledger(
    split: SplitHamiltonian,
    grid: TimeGrid,
    degeneracy_tol: float = 1e-9,
    gauge_seed: Optional[int] = None,
) -> InteractionLedger:
    """Build both pictures' eigenframes on ``grid`` and their phase relations.

    ``gauge_seed`` multiplies V's eigenvectors by random per-frame phases, which
    makes both geometric phases non-trivial while leaving physics unchanged.
    """
    times = grid.times
    transported = schedule_frames(split.V, times, degeneracy_tol)
    U = free_propagator(split.H0, times - grid.t0)
    W = np.einsum("kji,kjl,klm->kim", U.conj(), split.V.evaluate(times), U)
    inter = frame_sequence(W, times, degeneracy_tol)
    # Between two parallel-transported families the relative phase is alpha itself.
    raw = np.einsum("kin,kij,kjn->kn", transported.basis.conj(), U, inter.basis)
    extracted = np.unwrap(np.angle(raw), axis=0)

    frames = transported
    if gauge_seed is not None:
        rng = np.random.default_rng(gauge_seed)
        chi = np.exp(1j * rng.uniform(-np.pi, np.pi, frames.energies.shape))
        chi[0] = 1.0
        frames = FrameSequence(frames.times, frames.energies, frames.basis * chi[:, None, :])
        raw = raw * np.conj(chi)
    alpha = alpha_phase(split, frames)
    gamma = geometric_phase(frames)
    # Rephase interaction-picture vectors so that U |n>_I = exp(i alpha) |n>.
    phased = inter.basis * (np.exp(1j * alpha) * np.abs(raw) / raw)[:, None, :]
    gamma_i = geometric_phase(FrameSequence(times, inter.energies, phased))
    return InteractionLedger(
        times, frames.energies, alpha, extracted - extracted[0], gamma, gamma_i
    )


@dataclass(frozen=True)
class IPSolution:
    frames: FrameSequence
    ledger: PhaseLedger
    alpha: np.ndarray
    states: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.frames.times


def assemble_ip_solution(
    split: SplitHamiltonian, c0, grid: TimeGrid, degeneracy_tol: float = 1e-9
) -> IPSolution:
    """Leading-order state of ``H0 + lam V`` expressed in V's eigenbasis."""
    frames = schedule_frames(split.V, grid.times, degeneracy_tol)
    c = _as_amplitudes(c0, frames.dim)
    alpha = alpha_phase(split, frames)
    strong = split.lam * cumulative_trapezoid(frames.energies, frames.times, axis=0, initial=0.0)
    # alpha enters the exponent as +i alpha, i.e. as -int <H0> in the dynamical phase.
    ledger = PhaseLedger(frames.times, strong - alpha, geometric_phase(frames), split.lam)
    return IPSolution(frames, ledger, alpha, assemble_states(frames, ledger, c))


@dataclass(frozen=True)
class NeglectRatio:
    """``max |<n|H0|n>| / (lam |v_n|)`` and where it is attained."""

    value: float
    t: float
    level: int

    @property
    def infinite(self) -> bool:
        return np.isinf(self.value)


def neglect_ratio(split: SplitHamiltonian, grid: TimeGrid, degeneracy_tol: float = 1e-9) -> NeglectRatio:
    """How small H0's diagonal is against the strong eigenvalues along the grid."""
    frames = schedule_frames(split.V, grid.times, degeneracy_tol)
    num = np.abs(h0_expectations(split.H0, frames))
    den = split.lam * np.abs(frames.energies)
    scale = max(float(den.max()), np.finfo(float).tiny)
    zero = den <= 1e-12 * scale
    if np.any(zero):
        k, n = np.argwhere(zero)[0]
        return NeglectRatio(np.inf, float(frames.times[k]), int(n))
    ratio = num / den
    k, n = np.unravel_index(np.argmax(ratio), ratio.shape)
    return NeglectRatio(float(ratio[k, n]), float(frames.times[k]), int(n))

"""Instantaneous eigenframes, gauge continuation and eigenbasis couplings.

Every frame stores eigenvectors as the columns of ``basis``.  A sequence of
frames is *gauge aligned* when consecutive overlaps ``<n; t_k | n; t_k+1>``
are real and non-negative (discrete parallel transport).  In that gauge the
diagonal couplings vanish and all geometric information sits in the
eigenvectors themselves; it is recovered by :func:`geometric_phase`.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .errors import DegeneracyError, TrackingError, ValidationError

MAX_DIM = 64
HERMITIAN_RTOL = 1e-12
AMBIGUITY_TOL = 1e-6


@dataclass(frozen=True)
class SpectralFrame:
    """Eigenvalues and eigenvectors of H(t) at a single time."""

    t: float
    energies: np.ndarray
    basis: np.ndarray
    gauge_aligned: bool = False

    @property
    def dim(self) -> int:
        return self.energies.shape[0]


@dataclass(frozen=True)
class CouplingFrame:
    """Eigenbasis couplings ``D[m, n] = <m; t| d/dt |n; t>`` and gaps.

    ``gaps[n, m]`` holds ``E_n(t) - E_m(t)``.
    """

    t: float
    D: np.ndarray
    gaps: np.ndarray


@dataclass(frozen=True)
class FrameSequence:
    """Gauge-aligned frames on a time grid, stored as stacked arrays."""

    times: np.ndarray
    energies: np.ndarray  # (K, N)
    basis: np.ndarray  # (K, N, N), columns are eigenvectors

    def __len__(self) -> int:
        return self.times.shape[0]

    def __getitem__(self, k: int) -> SpectralFrame:
        return SpectralFrame(
            float(self.times[k]), self.energies[k], self.basis[k], gauge_aligned=True
        )

    @property
    def dim(self) -> int:
        return self.energies.shape[1]

    def frames(self) -> list[SpectralFrame]:
        return [self[k] for k in range(len(self))]


Frames = Union[FrameSequence, Sequence[SpectralFrame]]


def check_hermitian(H, tol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return ``H`` as a complex square array or raise naming the worst entry pair."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {H.shape}")
    scale = np.max(np.abs(H))
    dev = np.abs(H - H.conj().T)
    worst = np.unravel_index(np.argmax(dev), dev.shape)
    if dev[worst] > tol * max(scale, np.finfo(float).tiny):
        i, j = (int(k) for k in worst)
        raise ValidationError(
            f"matrix is not Hermitian: |H[{i},{j}] - conj(H[{j},{i}])| = "
            f"{dev[worst]:.3e} exceeds {tol:g} x max|H| = {tol * scale:.3e}"
        )
    return H


def _fix_phase(basis: np.ndarray) -> np.ndarray:
    # Deterministic convention: largest-magnitude component of each column real positive.
    idx = np.argmax(np.abs(basis), axis=-2)
    pivot = np.take_along_axis(basis, idx[..., None, :], axis=-2)
    return basis * (np.abs(pivot) / pivot)


def eigen_frame(H, t: float = 0.0) -> SpectralFrame:
    """Diagonalize a Hermitian matrix; energies ascending, ``gauge_aligned=False``."""
    H = check_hermitian(H)
    if H.shape[0] > MAX_DIM:
        raise ValidationError(f"dimension {H.shape[0]} exceeds the dense limit {MAX_DIM}")
    H = 0.5 * (H + H.conj().T)
    energies, basis = np.linalg.eigh(H)
    return SpectralFrame(float(t), energies, _fix_phase(basis), gauge_aligned=False)


def _check_gaps(energies: np.ndarray, t: float, tol: float) -> None:
    if energies.shape[0] < 2:
        return
    order = np.argsort(energies)
    gaps = np.diff(energies[order])
    k = int(np.argmin(gaps))
    if gaps[k] < tol:
        pair = (int(order[k]), int(order[k + 1]))
        raise DegeneracyError(
            f"levels {pair} are degenerate at t={t:.12g}: gap {gaps[k]:.3e} < {tol:g}",
            levels=pair,
            t=t,
        )


def _match_levels(overlap: np.ndarray, t: float) -> np.ndarray:
    """Permutation ``perm`` with prev level n continued by curr level ``perm[n]``."""
    mag = np.abs(overlap)
    perm = np.argmax(mag, axis=1)
    if mag.shape[1] > 1:
        top2 = np.sort(mag, axis=1)[:, -2:]
        ambiguous = np.nonzero(top2[:, 1] - top2[:, 0] < AMBIGUITY_TOL)[0]
        if ambiguous.size:
            raise TrackingError(
                f"ambiguous level matching at t={t:.12g} for level {int(ambiguous[0])}: "
                f"two overlaps within {AMBIGUITY_TOL:g}; refine the time grid"
            )
    if np.unique(perm).size != perm.size:
        raise TrackingError(
            f"maximal-overlap matching at t={t:.12g} is not one-to-one; refine the time grid"
        )
    return perm


def gauge_align(
    prev: SpectralFrame, curr: SpectralFrame, degeneracy_tol: float = 1e-9
) -> SpectralFrame:
    """Continue ``prev``'s gauge and level labels onto ``curr``.

    Levels of ``curr`` are relabelled by maximal overlap with ``prev`` and each
    eigenvector is rephased so that ``<n; prev | n; curr>`` is real and >= 0.
    """
    if prev.dim != curr.dim:
        raise ValidationError(f"frame dimensions differ: {prev.dim} vs {curr.dim}")
    if not prev.gauge_aligned:
        raise ValidationError("reference frame must itself be gauge aligned")
    _check_gaps(prev.energies, prev.t, degeneracy_tol)
    _check_gaps(curr.energies, curr.t, degeneracy_tol)
    overlap = prev.basis.conj().T @ curr.basis
    perm = _match_levels(overlap, curr.t)
    basis = curr.basis[:, perm]
    diag = overlap[np.arange(prev.dim), perm]
    phase = np.ones(prev.dim, dtype=complex)
    nz = np.abs(diag) > 0
    phase[nz] = np.abs(diag[nz]) / diag[nz]
    return SpectralFrame(curr.t, curr.energies[perm], basis * phase, gauge_aligned=True)


def frame_sequence(hamiltonians, times, degeneracy_tol: float = 1e-9) -> FrameSequence:
    """Eigenframes of a stack of Hamiltonians ``(K, N, N)``, gauge aligned along ``times``.

    The first frame keeps the deterministic phase convention of
    :func:`eigen_frame` and serves as the gauge reference.
    """
    Hs = np.asarray(hamiltonians, dtype=complex)
    times = np.asarray(times, dtype=float)
    if Hs.ndim != 3 or Hs.shape[1] != Hs.shape[2] or Hs.shape[0] != times.shape[0]:
        raise ValidationError(f"expected (K, N, N) matrices for {times.shape[0]} times")
    if Hs.shape[1] > MAX_DIM:
        raise ValidationError(f"dimension {Hs.shape[1]} exceeds the dense limit {MAX_DIM}")
    for k in range(Hs.shape[0]):
        check_hermitian(Hs[k])
    energies, basis = np.linalg.eigh(0.5 * (Hs + np.conj(np.swapaxes(Hs, 1, 2))))
    basis = _fix_phase(basis)
    if Hs.shape[1] > 1:
        gaps = np.diff(energies, axis=1)
        k = int(np.argmin(gaps.min(axis=1)))
        _check_gaps(energies[k], float(times[k]), degeneracy_tol)

    overlaps = np.einsum("kin,kim->knm", basis[:-1].conj(), basis[1:])
    mag = np.abs(overlaps)
    diag = np.diagonal(mag, axis1=1, axis2=2)
    if mag.shape[1] > 1:
        off = np.where(np.eye(mag.shape[1], dtype=bool)[None], -np.inf, mag)
        competitor = np.maximum(off.max(axis=1), off.max(axis=2))
    else:
        competitor = np.zeros_like(diag)
    if np.all(diag - competitor >= AMBIGUITY_TOL):
        # Energy order already is the continuity order: accumulate phases in one pass.
        step = np.diagonal(overlaps, axis1=1, axis2=2)
        theta = np.concatenate(
            [np.zeros((1, basis.shape[1])), np.cumsum(np.angle(step), axis=0)]
        )
        return FrameSequence(times, energies, basis * np.exp(-1j * theta)[:, None, :])

    frame = replace(SpectralFrame(float(times[0]), energies[0], basis[0]), gauge_aligned=True)
    out_e, out_b = [frame.energies], [frame.basis]
    for k in range(1, times.shape[0]):
        frame = gauge_align(
            frame, SpectralFrame(float(times[k]), energies[k], basis[k]), degeneracy_tol
        )
        out_e.append(frame.energies)
        out_b.append(frame.basis)
    return FrameSequence(times, np.array(out_e), np.array(out_b))


def _stack(frames: Frames) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(frames, FrameSequence):
        return frames.times, frames.energies, frames.basis
    frames = list(frames)
    return (
        np.array([f.t for f in frames]),
        np.array([f.energies for f in frames]),
        np.array([f.basis for f in frames]),
    )


def _check_uniform(times: np.ndarray, dt: float | None = None) -> float:
    steps = np.diff(times)
    if dt is None:
        dt = float(steps.mean())
    if dt <= 0 or np.any(np.abs(steps - dt) > 1e-8 * abs(dt)):
        raise ValidationError(f"time grid is not uniform with spacing {dt:g}")
    return dt


def coupling_matrix(frames: Frames, dt: float) -> CouplingFrame:
    """Centered-difference couplings at the middle of three consecutive frames.

    The raw difference quotient is projected onto its anti-Hermitian part,
    which changes it only at O(dt^2) and makes the orthonormality identity
    ``D = -D^dagger`` exact.
    """
    times, energies, basis = _stack(frames)
    if times.shape[0] != 3:
        raise ValidationError(f"need exactly three frames, got {times.shape[0]}")
    _check_uniform(times, dt)
    raw = basis[1].conj().T @ (basis[2] - basis[0]) / (2 * dt)
    D = 0.5 * (raw - raw.conj().T)
    E = energies[1]
    return CouplingFrame(float(times[1]), D, E[:, None] - E[None, :])


def coupling_sequence(frames: FrameSequence) -> np.ndarray:
    """Couplings ``(K-2, N, N)`` at every interior node of a uniform sequence."""
    _check_uniform(frames.times)
    dt = frames.times[1] - frames.times[0]
    B = frames.basis
    raw = np.einsum("kin,kim->knm", B[1:-1].conj(), B[2:] - B[:-2]) / (2 * dt)
    return 0.5 * (raw - np.conj(np.swapaxes(raw, 1, 2)))


def coupling_from_derivative(frame: SpectralFrame, Hdot) -> np.ndarray:
    """Off-diagonal couplings from ``<m|dH/dt|n> / (E_n - E_m)``; diagonal left zero."""
    Hdot = np.asarray(Hdot, dtype=complex)
    M = frame.basis.conj().T @ Hdot @ frame.basis
    gaps = frame.energies[None, :] - frame.energies[:, None]
    out = np.zeros_like(M)
    off = ~np.eye(frame.dim, dtype=bool)
    out[off] = M[off] / gaps[off]
    return out


def geometric_phase(frames: Frames, closed: bool = False) -> np.ndarray:
    """Cumulative geometric phases ``gamma[k, n]`` from successive overlaps.

    ``gamma[k] = -sum_{j<k} arg <n; t_j | n; t_j+1>``.  With ``closed=True`` the
    final row additionally carries ``-arg <n; t_K | n; t_0>`` so that it equals
    the gauge-invariant loop phase ``-arg prod <u_j|u_j+1>``.
    """
    times, _, basis = _stack(frames)
    if times.shape[0] < 3:
        raise ValidationError("geometric phase needs at least three frames")
    _check_uniform(times)
    step = np.einsum("kin,kin->kn", basis[:-1].conj(), basis[1:])
    gamma = np.concatenate([np.zeros((1, basis.shape[2])), -np.cumsum(np.angle(step), axis=0)])
    if closed:
        closing = np.einsum("in,in->n", basis[-1].conj(), basis[0])
        gamma[-1] -= np.angle(closing)
    return gamma


def wrap_phase(phi):
    """Map angles onto ``[0, 2*pi)``."""
    w = np.mod(phi, 2 * np.pi)
    return np.where(w >= 2 * np.pi, 0.0, w)  # mod of a tiny negative rounds up to 2 pi


def phase_distance(a, b):
    """Distance between angles modulo ``2*pi``."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)

"""Short-time expansion for a particle on a periodic segment.

Starting from the constant state ``1/sqrt(L)``, the first correction in the
kinetic energy gives

    psi(x, t) = (1/sqrt(L)) * {1 - i t^3 V'(x)^2 / (6m) + t^2 V''(x) / (4m)} * exp(-i t V(x)).

The kinetic term is the spatial Laplacian ``-(1/2m) d^2/dx^2``.  Replacing
``i t`` by ``beta`` turns the curly bracket into the high-temperature quantum
correction factor ``1 + beta^3 V'^2 / (6m) - beta^2 V'' / (4m)``, which is
compared against ``exp(beta V) exp(-beta H)`` acting on a constant.

The neglected terms are of second order in ``1/m``; the leading one is
``i t^3 V''''/(24 m^2)``, so for generic potentials the residual is cubic in
``t`` (and in ``beta``).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ResolutionError, SizeError, SmoothnessWarning, ValidationError
from .fitting import SweepResult, fixed_exponent_prefactor, loglog_fit
from .models import GridModel
from .oracle import GridState, propagate_grid

MAX_DENSE_GRID = 256
SMOOTHNESS_FRACTION = 1e-3


def spectral_derivatives(model: GridModel) -> tuple[np.ndarray, np.ndarray]:
    """``V'`` and ``V''`` by Fourier differentiation; warns on under-resolved ``V``."""
    Vhat = np.fft.fft(model.V)
    power = np.abs(Vhat) ** 2
    total = power.sum()
    high = np.abs(model.modes) > model.n / 3
    if total > 0 and power[high].sum() / total > SMOOTHNESS_FRACTION:
        warnings.warn(
            f"potential has {power[high].sum() / total:.2e} of its spectral power in the top "
            "third of grid modes; derivatives may be unreliable",
            SmoothnessWarning,
            stacklevel=3,
        )
    k = model.wavenumbers.astype(complex)
    k1 = k.copy()
    if model.n % 2 == 0:
        k1[model.n // 2] = 0  # odd derivative of the Nyquist mode is undefined
    d1 = np.fft.ifft(1j * k1 * Vhat).real
    d2 = np.fft.ifft(-(k**2) * Vhat).real
    return d1, d2


@dataclass(frozen=True)
class WkFactor:
    """Pointwise correction factor and phase of the truncated expansion."""

    t: complex
    factor: np.ndarray
    phase: np.ndarray
    beta_mode: bool = False


def wk_factor(model: GridModel, t: complex) -> WkFactor:
    """The curly-bracket factor at (possibly complex) time ``t``."""
    d1, d2 = spectral_derivatives(model)
    factor = 1 - 1j * t**3 * d1**2 / (6 * model.m) + t**2 * d2 / (4 * model.m)
    return WkFactor(t, factor, np.exp(-1j * t * model.V))


def wk_wavefunction(model: GridModel, t: float) -> GridState:
    """Truncated short-time state; deliberately not renormalized."""
    if t < 0:
        raise ValidationError("t must be non-negative")
    if t == 0:
        return GridState(model, model.constant_state())
    f = wk_factor(model, t)
    return GridState(model, f.factor * f.phase / np.sqrt(model.L))


def wk_beta_factor(model: GridModel, beta: float) -> WkFactor:
    """``1 + beta^3 V'^2/(6m) - beta^2 V''/(4m)``: the factor at ``t = -i beta``."""
    d1, d2 = spectral_derivatives(model)
    factor = 1 + beta**3 * d1**2 / (6 * model.m) - beta**2 * d2 / (4 * model.m)
    return WkFactor(-1j * beta, factor.astype(complex), np.exp(-beta * model.V), beta_mode=True)


def grid_hamiltonian(model: GridModel) -> tuple[np.ndarray, np.ndarray]:
    """Dense kinetic and potential operators on the grid."""
    if model.n > MAX_DENSE_GRID:
        raise SizeError(f"dense grid operators limited to {MAX_DENSE_GRID} points, got {model.n}")
    F = np.fft.fft(np.eye(model.n), axis=0)
    T = np.fft.ifft(model.kinetic[:, None] * F, axis=0)
    T = 0.5 * (T + T.conj().T)
    return T, np.diag(model.V).astype(complex)


@dataclass(frozen=True)
class BetaCheck:
    beta: float
    series: np.ndarray
    operator: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.series - self.operator)))


def wk_beta_check(model: GridModel, beta: float) -> BetaCheck:
    """Series factor versus ``exp(beta V) exp(-beta (T + V))`` on a constant state."""
    if beta < 0:
        raise ValidationError("beta must be non-negative")
    T, V = grid_hamiltonian(model)
    ones = np.ones(model.n, dtype=complex)
    operator = np.exp(beta * model.V) * (expm(-beta * (T + V)) @ ones)
    return BetaCheck(float(beta), wk_beta_factor(model, beta).factor, operator)


@dataclass(frozen=True)
class BetaScaling:
    """Residuals over several ``beta``; ``prefactor`` fits ``C beta^4`` with fixed exponent."""

    fit: SweepResult
    prefactor: float

    @property
    def within_quartic_bound(self) -> np.ndarray:
        return self.fit.errors <= self.prefactor * self.fit.lambdas**4


def beta_scaling(model: GridModel, betas: Sequence[float]) -> BetaScaling:
    betas = np.sort(np.asarray(betas, dtype=float))
    res = np.array([wk_beta_check(model, b).residual for b in betas])
    return BetaScaling(loglog_fit(betas, res, min_points=3), fixed_exponent_prefactor(betas, res, 4.0))


def _oracle_steps(t: float, steps_per_unit: int, min_steps: int) -> int:
    return max(min_steps, int(np.ceil(t * steps_per_unit)))


def wk_error(model: GridModel, t: float, steps_per_unit: int = 200_000, min_steps: int = 1000) -> float:
    """Max-abs deviation of the truncated state from the split-operator oracle."""
    exact = propagate_grid(model, model.constant_state(), t, _oracle_steps(t, steps_per_unit, min_steps))
    return float(np.max(np.abs(wk_wavefunction(model, t).psi - exact.psi)))


@dataclass(frozen=True)
class SmallTimeScan:
    """Error scaling at short times plus the long-time breakdown ratio."""

    fit: SweepResult
    breakdown_ratio: float
    long_time: float
    short_time: float


def small_time_scan(
    model: GridModel,
    times: Sequence[float],
    long_time: float = 1.0,
    short_time: float = 0.01,
    steps_per_unit: int = 200_000,
) -> SmallTimeScan:
    """Fit the truncation error exponent over ``times`` (given in decreasing order)."""
    times = np.asarray(times, dtype=float)
    if times.size < 4:
        raise ValidationError(f"need at least 4 times, got {times.size}")
    if np.any(np.diff(times) >= 0) or np.any(times <= 0):
        raise ValidationError("times must be positive and strictly decreasing")
    if times[0] / times[-1] < 10 * (1 - 1e-12):
        raise ValidationError("times must span at least one decade")
    errors = np.array([wk_error(model, t, steps_per_unit) for t in times])
    if np.any(np.diff(errors) >= 0):
        raise ResolutionError(
            "truncation error does not decrease with t; oracle steps are too coarse "
            f"(errors {errors.tolist()})"
        )
    fit = loglog_fit(times[::-1], errors[::-1])
    ratio = wk_error(model, long_time, steps_per_unit) / wk_error(model, short_time, steps_per_unit)
    return SmallTimeScan(fit, float(ratio), float(long_time), float(short_time))


def norm_defect(model: GridModel, t: float) -> float:
    """``||psi_truncated||^2 - 1``."""
    return wk_wavefunction(model, t).norm() ** 2 - 1.0

"""Hamiltonian schedules and the periodic grid model.

Two-level schedules are written as ``H(t) = (X sx + Y sy + Z sz) / 2``.
Every schedule evaluates vectorized over an array of times.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import ValidationError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def bloch_hamiltonian(X, Y, Z) -> np.ndarray:
    """``(X sx + Y sy + Z sz) / 2`` for scalars or equal-shape arrays."""
    X, Y, Z = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (X, Y, Z)))
    H = np.empty(X.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = 0.5 * Z
    H[..., 1, 1] = -0.5 * Z
    H[..., 0, 1] = 0.5 * (X - 1j * Y)
    H[..., 1, 0] = 0.5 * (X + 1j * Y)
    return H


def _berry_full(t, p):
    phi = 2 * np.pi * t / p["T"] + p["phi0"]
    s = p["R"] * np.sin(p["theta"])
    return bloch_hamiltonian(s * np.cos(phi), s * np.sin(phi), p["R"] * np.cos(p["theta"]) + 0 * t)


def _berry_xz(t, p):
    phi = 2 * np.pi * t / p["T"]
    return bloch_hamiltonian(p["X0"] + p["R"] * np.cos(phi), 0 * t, p["Z0"] + p["R"] * np.sin(phi))


def _gapped_lz(t, p):
    return bloch_hamiltonian(p["delta"] + 0 * t, 0 * t, p["v"] * t)


def _rotating_xy(t, p):
    w = p["omega"] * t
    return bloch_hamiltonian(np.cos(w), np.sin(w), 0 * w)


# kind -> (builder, default parameters, period parameter or callable)
MODEL_KINDS: dict[str, tuple[Callable, dict, Optional[Callable]]] = {
    "berry-full": (
        _berry_full,
        {"R": 1.0, "theta": np.pi / 3, "T": 2 * np.pi, "phi0": 0.0},
        lambda p: p["T"],
    ),
    "berry-xz": (
        _berry_xz,
        {"R": 1.0, "T": 2 * np.pi, "X0": 0.0, "Z0": 0.0},
        lambda p: p["T"],
    ),
    "gapped-lz": (_gapped_lz, {"v": 1.0, "delta": 0.25}, None),
    "rotating-xy": (_rotating_xy, {"omega": 1.0}, lambda p: 2 * np.pi / p["omega"]),
}


def _check_kind(kind: str) -> None:
    if kind not in MODEL_KINDS:
        raise ValidationError(f"unknown model kind {kind!r}; valid kinds: {sorted(MODEL_KINDS)}")


def _check_params(kind: str, params: Mapping[str, float]) -> dict:
    _check_kind(kind)
    expected = MODEL_KINDS[kind][1]
    missing = sorted(set(expected) - set(params))
    if missing:
        raise ValidationError(f"model {kind!r} is missing parameter(s) {missing}")
    extra = sorted(set(params) - set(expected))
    if extra:
        raise ValidationError(f"model {kind!r} has no parameter(s) {extra}; expected {sorted(expected)}")
    out = {}
    for k, v in params.items():
        try:
            out[k] = float(v)
        except (TypeError, ValueError):
            raise ValidationError(f"parameter {k!r} of {kind!r} must be real, got {v!r}") from None
        if not np.isfinite(out[k]):
            raise ValidationError(f"parameter {k!r} of {kind!r} is not finite")
    for k in ("T", "R", "omega"):
        if k in out and out[k] <= 0:
            raise ValidationError(f"parameter {k!r} of {kind!r} must be positive")
    return out


def model_hamiltonian(kind: str, params: Mapping[str, float], t) -> np.ndarray:
    """Evaluate a catalog model with a complete parameter set at time(s) ``t``."""
    p = _check_params(kind, params)
    return MODEL_KINDS[kind][0](np.asarray(t, dtype=float), p)


@dataclass(frozen=True)
class HamiltonianSchedule:
    """A time-indexed Hermitian family ``H(t)`` of fixed dimension.

    ``func`` maps an array of times of shape ``S`` to matrices ``S + (N, N)``.
    """

    dim: int
    kind: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: Mapping[str, float] = field(default_factory=dict)
    period: Optional[float] = None

    def evaluate(self, t) -> np.ndarray:
        return self.func(np.asarray(t, dtype=float))

    __call__ = evaluate

    def derivative(self, t, h: float = 1e-5) -> np.ndarray:
        """Centered-difference ``dH/dt``."""
        t = np.asarray(t, dtype=float)
        return (self.func(t + h) - self.func(t - h)) / (2 * h)

    def rescaled(self, factor: float) -> "HamiltonianSchedule":
        """Time-stretched schedule ``H'(tau) = H(tau / factor)``."""
        factor = float(factor)
        if factor <= 0:
            raise ValidationError("rescaling factor must be positive")
        func = self.func
        return HamiltonianSchedule(
            self.dim,
            f"{self.kind}/rescaled",
            lambda tau: func(tau / factor),
            dict(self.params, rescale=factor),
            None if self.period is None else self.period * factor,
        )

    def plus_constant(self, H0, scale: float = 1.0) -> "HamiltonianSchedule":
        """Schedule ``H0 + scale * H(t)`` with time-independent ``H0``."""
        H0 = np.asarray(H0, dtype=complex)
        func = self.func
        return HamiltonianSchedule(
            self.dim, f"{self.kind}+H0", lambda t: H0 + scale * func(t), dict(self.params), self.period
        )


def make_schedule(kind: str, params: Optional[Mapping[str, float]] = None) -> HamiltonianSchedule:
    """Catalog schedule with unspecified parameters taken from the defaults."""
    _check_kind(kind)
    builder, defaults, period = MODEL_KINDS[kind]
    p = _check_params(kind, {**defaults, **(params or {})})
    return HamiltonianSchedule(
        2, kind, lambda t: builder(t, p), p, None if period is None else period(p)
    )


def path_schedule(path: Callable, period: Optional[float] = None, kind: str = "berry-full") -> HamiltonianSchedule:
    """Two-level schedule from a user path ``t -> (X, Y, Z)``."""
    return HamiltonianSchedule(2, kind, lambda t: bloch_hamiltonian(*path(t)), {}, period)


def matrix_schedule(func: Callable, dim: int, kind: str = "custom", period: Optional[float] = None) -> HamiltonianSchedule:
    """Wrap an arbitrary vectorized ``t -> H(t)`` callable."""
    return HamiltonianSchedule(dim, kind, func, {}, period)


def constant_schedule(H) -> HamiltonianSchedule:
    H = np.asarray(H, dtype=complex)
    return HamiltonianSchedule(
        H.shape[0], "constant", lambda t: np.broadcast_to(H, np.shape(t) + H.shape).copy()
    )


@dataclass(frozen=True)
class GridModel:
    """Particle of mass ``m`` on a periodic segment ``[0, L)`` sampled at ``n`` points."""

    L: float
    m: float
    x: np.ndarray
    V: np.ndarray
    potential: Optional[Callable] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def modes(self) -> np.ndarray:
        """Integer mode numbers ``j`` in FFT order."""
        return np.rint(np.fft.fftfreq(self.n, d=1.0 / self.n)).astype(int)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * self.modes / self.L

    @property
    def kinetic(self) -> np.ndarray:
        """Kinetic mode energies ``(2 pi j / L)^2 / (2 m)`` in FFT order."""
        return self.wavenumbers**2 / (2 * self.m)

    def constant_state(self) -> np.ndarray:
        return np.full(self.n, 1 / np.sqrt(self.L), dtype=complex)


def grid_model(L: float, m: float, V, n: int = 64) -> GridModel:
    """Sample ``V`` (callable or array) on ``x_k = k L / n``."""
    if not (L > 0 and m > 0):
        raise ValidationError(f"need L > 0 and m > 0, got L={L}, m={m}")
    if n < 16 or n & (n - 1):
        raise ValidationError(f"grid size must be a power of two >= 16, got {n}")
    x = np.arange(n) * (L / n)
    if callable(V):
        samples = np.asarray(V(x))
        potential = V
    else:
        samples = np.asarray(V)
        potential = None
    samples = np.broadcast_to(samples, x.shape)
    if np.iscomplexobj(samples):
        if np.any(samples.imag != 0):
            raise ValidationError("potential samples must be real")
        samples = samples.real
    samples = samples.astype(float)
    bad = np.nonzero(~np.isfinite(samples))[0]
    if bad.size:
        raise ValidationError(f"non-finite potential sample at x={x[bad[0]]:.6g}")
    return GridModel(float(L), float(m), x, samples.copy(), potential)


def default_grid_model(n: int = 64) -> GridModel:
    """``V = sin(2 pi x)`` with ``m = L = 1``."""
    return grid_model(1.0, 1.0, lambda x: np.sin(2 * np.pi * x), n)

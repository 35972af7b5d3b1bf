import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from oracles import rotating_exact, solid_angle
from scipy.special import wofz

from adiabatic_lab.adiabatic import (
    PhaseLedger,
    TimeGrid,
    berry_cycle_phase,
    correction_integral,
    filon_linear,
    lambda_sweep_fit,
    leading_order_error,
    oscillatory_decay_probe,
    oscillatory_integral,
    phase_ledger,
    propagate_amplitudes,
    propagate_leading,
    schedule_frames,
)
from adiabatic_lab.errors import FitError, ResolutionError, ValidationError
from adiabatic_lab.fitting import loglog_fit
from adiabatic_lab.models import SIGMA_Z, constant_schedule, make_schedule, matrix_schedule
from adiabatic_lab.oracle import fidelity, propagate_dense
from adiabatic_lab.spectral import FrameSequence, geometric_phase, phase_distance

WIDTH = 0.2


def test_constant_diagonal_phases():
    grid = TimeGrid(0.0, np.pi, 64)
    c0 = np.array([0.6, 0.8])
    traj = propagate_leading(constant_schedule(0.5 * SIGMA_Z), 2.0, c0, grid)
    assert np.allclose(traj.states[-1], -traj.states[0], atol=1e-12)


def test_single_level_population_stays_one():
    traj = propagate_leading(make_schedule("berry-full"), 30.0, 1, TimeGrid(0, 2 * np.pi, 500))
    pops = traj.populations()
    assert np.allclose(pops[:, 1], 1.0, atol=1e-12)
    assert np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1)) < 1e-9


def test_leading_berry_cycle_against_oracle():
    sched = make_schedule("berry-xz")
    traj = propagate_leading(sched, 200.0, 0, TimeGrid(0, sched.period, 2000), with_couplings=False)
    exact = propagate_dense(sched, 200.0, traj.states[0], 0.0, sched.period, tol=1e-10)
    assert fidelity(traj.states[-1], exact.final) >= 0.999


def test_leading_rotating_against_closed_form():
    lam = 60.0
    traj = propagate_leading(make_schedule("rotating-xy"), lam, 0, TimeGrid(0, 3.0, 3000), with_couplings=False)
    ref = rotating_exact(lam, 1.0, 3.0, traj.states[0])
    # leading-order error of a gapped model scales like (omega / lam)^2
    assert 1 - fidelity(traj.states[-1], ref) < 1e-3


def test_amplitudes_constant_hamiltonian():
    H = np.diag([0.0, 1.0, 2.5]).astype(complex)
    c0 = np.array([0.6, 0.0, 0.8])
    traj = propagate_amplitudes(constant_schedule(H), 4.0, c0, TimeGrid(0, 2, 200))
    assert np.max(np.abs(traj.amplitudes - c0)) < 1e-13


def _smooth_gapped(dim, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, dim, dim)) + 1j * rng.normal(size=(2, dim, dim))
    A = 0.5 * (A + np.conj(np.swapaxes(A, 1, 2)))
    base = np.diag(np.arange(dim) * 1.5).astype(complex)
    return matrix_schedule(
        lambda t: base + 0.15 * (np.multiply.outer(np.cos(t), A[0]) + np.multiply.outer(np.sin(2 * t), A[1])),
        dim,
    )


@pytest.mark.parametrize("dim,lam", [(2, 5.0), (4, 8.0), (8, 10.0)])
def test_amplitude_equations_are_exact(dim, lam):
    sched = _smooth_gapped(dim, dim)
    grid = TimeGrid(0.0, 2.0, 4000)
    c0 = np.ones(dim) / np.sqrt(dim)
    traj = propagate_amplitudes(sched, lam, c0, grid)
    exact = propagate_dense(sched, lam, traj.states[0], 0.0, 2.0, tol=1e-11)
    assert fidelity(traj.states[-1], exact.final) >= 1 - 1e-8
    assert np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1)) < 1e-9


def test_amplitude_drift_shrinks_with_lambda():
    sched = make_schedule("gapped-lz")
    grid = TimeGrid(-2.0, 2.0, 8000)
    drift = []
    for lam in (10.0, 100.0):
        tr = propagate_amplitudes(sched, lam, 0, grid)
        drift.append(np.max(np.linalg.norm(tr.amplitudes - tr.amplitudes[0], axis=1)))
    assert 5 < drift[0] / drift[1] < 20


def test_coarse_grid_raises_step_error():
    with pytest.raises(ResolutionError):
        propagate_amplitudes(make_schedule("gapped-lz", {"delta": 0.02}), 5.0, 0, TimeGrid(-2, 2, 20))


def test_richardson_dynamical_phase():
    sched = make_schedule("gapped-lz")
    theta = [
        phase_ledger(schedule_frames(sched, TimeGrid(-2, 2, n).times), 1.0).dynamical[-1]
        for n in (50, 100, 200)
    ]
    d1, d2 = theta[0] - theta[1], theta[1] - theta[2]
    assert np.all((3.5 <= d1 / d2) & (d1 / d2 <= 4.5))


def _synthetic(E, D, lam, times):
    K, N = times.size, len(E)
    frames = FrameSequence(times, np.tile(E, (K, 1)), np.tile(np.eye(N, dtype=complex), (K, 1, 1)))
    couplings = np.tile(D, (K, 1, 1))
    ledger = PhaseLedger(times, lam * np.outer(times - times[0], E), np.zeros((K, N)), lam)
    return frames, couplings, ledger


def test_correction_zero_coupling():
    frames, D, ledger = _synthetic([0.0, 1.0], np.zeros((2, 2)), 10.0, np.linspace(0, 1, 201))
    assert correction_integral(frames, D, ledger, 0, 1) == 0


@pytest.mark.parametrize("lam", [3.0, 40.0])
def test_correction_closed_form(lam):
    omega, d = 1.3, 0.7
    times = np.linspace(0.0, 2.0, 2001)
    D = np.array([[0, -d], [d, 0]], dtype=complex)
    frames, C, ledger = _synthetic([omega, 0.0], D, lam, times)  # Omega_01 = E_0 - E_1 = omega
    t = times[1500]
    ref = d * (np.exp(-1j * lam * omega * t) - 1) / (-1j * lam * omega)
    assert abs(correction_integral(frames, C, ledger, 0, 1, t=t) - ref) < 1e-8


def test_correction_undersampled():
    frames, C, ledger = _synthetic([1.0, 0.0], np.ones((2, 2)), 1000.0, np.linspace(0, 1, 101))
    with pytest.raises(ResolutionError):
        correction_integral(frames, C, ledger, 0, 1)


def test_correction_halves_when_lambda_doubles():
    sched = make_schedule("gapped-lz")
    grid = TimeGrid(0.0, 2.0, 20000)
    mags = []
    for lam in (100.0, 200.0):
        tr = propagate_leading(sched, lam, 0, grid)
        mags.append(abs(correction_integral(tr.frames, tr.couplings, tr.ledger, 0, 1)))
    assert mags[0] / mags[1] == pytest.approx(2.0, rel=0.15)


@settings(max_examples=30, deadline=None)
@given(slope=st.floats(-2, 2), offset=st.floats(-1, 1))
def test_filon_exact_for_linear_phase(slope, offset):
    t = np.linspace(0, 1, 7)
    got = filon_linear(t, np.ones_like(t), 50 * slope * t + offset)[-1]
    k = 50 * slope
    ref = np.exp(1j * offset) * (1.0 if k == 0 else np.expm1(1j * k) / (1j * k))  # expm1: no cancellation at tiny k
    assert abs(got - ref) < 1e-12


def gaussian(t):
    return np.exp(-(t**2) / (2 * WIDTH**2))


@pytest.mark.parametrize("lam", [10.0, 300.0])
def test_oscillatory_integrals_closed_forms(lam):
    # stationary point at t = 0: Gaussian-Fresnel integral over the real line
    crossing = abs(oscillatory_integral(lambda t: t, gaussian, lam))
    assert crossing == pytest.approx(abs(np.sqrt(2 * np.pi / (1j * lam + WIDTH**-2))), rel=1e-5)
    # no stationary point, bump peaked at the window edge: Faddeeva closed form
    edge = oscillatory_integral(lambda t: np.ones_like(t), lambda t: gaussian(t + 1), lam)
    ref = 0.5 * np.sqrt(2 * np.pi) * WIDTH * wofz(-lam * WIDTH / np.sqrt(2))
    assert abs(edge - ref) < 1e-5 * abs(ref)


def test_decay_probe_slopes():
    lams = np.logspace(2, 4, 9)
    crossing = oscillatory_decay_probe(lambda t: t, gaussian, lams)
    gapped = oscillatory_decay_probe(lambda t: np.ones_like(t), lambda t: gaussian(t + 1), lams)
    assert crossing.slope == pytest.approx(-0.5, abs=0.1)
    assert gapped.slope == pytest.approx(-1.0, abs=0.1)


def test_decay_probe_zero_envelope():
    with pytest.raises(FitError, match="zero"):
        oscillatory_decay_probe(lambda t: t, lambda t: np.zeros_like(t), np.logspace(1, 2, 5))


def test_fit_sanity():
    lams = np.logspace(1, 4, 7)
    assert loglog_fit(lams, 1 / lams).slope == pytest.approx(-1.0, abs=1e-12)


def test_sweep_monotone_within_decades():
    sched = make_schedule("gapped-lz")
    lams = 10 ** np.arange(1.0, 3.01, 0.25)
    res = lambda_sweep_fit(sched, lams, TimeGrid(0.0, 2.0, 20000))
    assert np.all(res.errors[1:] <= 1.05 * res.errors[:-1])
    assert res.slope <= -0.9


def test_sweep_requires_increasing():
    with pytest.raises(ValidationError):
        lambda_sweep_fit(make_schedule("gapped-lz"), [100, 100], TimeGrid(0, 1, 100))


def test_rescaling_invariance():
    sched = make_schedule("gapped-lz")
    a = propagate_leading(sched, 10.0, 0, TimeGrid(0.0, 2.0, 4000), with_couplings=False)
    b = propagate_leading(sched.rescaled(10.0), 1.0, 0, TimeGrid(0.0, 20.0, 4000), with_couplings=False)
    assert np.max(np.abs(a.states - b.states)) < 1e-11
    e1 = leading_order_error(sched, 10.0, TimeGrid(0.0, 2.0, 4000), tol=1e-11)
    e2 = leading_order_error(sched.rescaled(10.0), 1.0, TimeGrid(0.0, 20.0, 4000), tol=1e-11)
    assert abs(e1 - e2) < 1e-9


def test_berry_enclosing_and_not():
    assert phase_distance(berry_cycle_phase(make_schedule("berry-xz"), 200.0).geometric_phase, np.pi).max() < 1e-4
    outside = make_schedule("berry-xz", {"X0": 2.0, "R": 0.5})
    path = lambda t: (2 + 0.5 * np.cos(t), 0.0, 0.5 * np.sin(t))
    omega = solid_angle(path, 2 * np.pi, axis=(1, 0, 0))
    assert abs(omega) < 1e-8
    gamma = berry_cycle_phase(outside, 200.0).geometric_phase
    assert phase_distance(gamma, omega / 2).max() < 1e-4


def test_berry_full_cone():
    theta = np.pi / 3
    sched = make_schedule("berry-full", {"theta": theta})
    path = lambda t: (np.sin(theta) * np.cos(t), np.sin(theta) * np.sin(t), np.cos(theta))
    omega = solid_angle(path, 2 * np.pi, axis=(0, 0, 1))
    assert omega == pytest.approx(2 * np.pi * (1 - np.cos(theta)), abs=1e-8)
    gamma = berry_cycle_phase(sched, 50.0).geometric_phase
    # the lower level picks up half the solid angle; the sign follows the orientation
    assert phase_distance(gamma[0], omega / 2) < 1e-3
    assert phase_distance(gamma[1], -omega / 2) < 1e-3


def test_berry_cycle_gauge_invariant():
    cyc = berry_cycle_phase(make_schedule("berry-full", {"theta": 1.0}), 20.0)
    fr = cyc.trajectory.frames
    chi = np.exp(1j * np.random.default_rng(11).uniform(-np.pi, np.pi, fr.energies.shape))
    scrambled = FrameSequence(fr.times, fr.energies, fr.basis * chi[:, None, :])
    assert phase_distance(geometric_phase(scrambled, closed=True)[-1], cyc.geometric_phase).max() < 1e-10


def test_berry_requires_period():
    with pytest.raises(ValidationError):
        berry_cycle_phase(make_schedule("gapped-lz"), 10.0)

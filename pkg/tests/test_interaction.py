import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from adiabatic_lab.adiabatic import TimeGrid, propagate_leading, schedule_frames
from adiabatic_lab.errors import DegeneracyError, ValidationError
from adiabatic_lab.interaction import (
    SplitHamiltonian,
    alpha_phase,
    assemble_ip_solution,
    dressed_frame_check,
    free_propagator,
    h0_expectations,
    interaction_ledger,
    neglect_ratio,
)
from adiabatic_lab.models import SIGMA_Y, SIGMA_Z, IDENTITY2, make_schedule, matrix_schedule
from adiabatic_lab.oracle import fidelity, propagate_dense


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (A + A.conj().T)


def linear_family(seed, n=4):
    rng = np.random.default_rng(seed)
    A, B = random_hermitian(rng, n), random_hermitian(rng, n)
    return matrix_schedule(lambda t: A + np.multiply.outer(t, B), n)


def test_free_propagator_cases():
    assert np.allclose(free_propagator(0.5 * SIGMA_Z, 0.0), np.eye(2))
    assert np.allclose(free_propagator(0.5 * SIGMA_Z, np.pi), np.diag([-1j, 1j]))
    H0 = random_hermitian(np.random.default_rng(2), 5)
    U = free_propagator(H0, 3.7)
    assert np.linalg.norm(U.conj().T @ U - np.eye(5)) <= 1e-12
    assert np.allclose(U, expm(-3.7j * H0), atol=1e-12)


def test_split_dimension_mismatch():
    with pytest.raises(ValidationError):
        SplitHamiltonian(np.eye(3), make_schedule("berry-xz"), 1.0)


def test_dressed_check_at_origin():
    rep = dressed_frame_check(SplitHamiltonian(0.3 * SIGMA_Y, make_schedule("berry-xz"), 10.0), 0.0)
    assert rep.spectrum_error == 0.0
    assert np.allclose(rep.phases, 0, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(-5, 5))
def test_spectrum_invariant_under_similarity(seed, t):
    rng = np.random.default_rng(seed)
    split = SplitHamiltonian(random_hermitian(rng, 4), linear_family(seed), 3.0)
    try:
        rep = dressed_frame_check(split, t)
    except DegeneracyError:
        return
    assert rep.spectrum_error <= 1e-12 * max(1.0, np.abs(split.V.evaluate(t)).max())
    assert rep.max_overlap_defect <= 1e-10


def test_random_split_spectra():
    rng = np.random.default_rng(5)
    rep = dressed_frame_check(SplitHamiltonian(random_hermitian(rng, 4), linear_family(5), 2.0), 1.3)
    assert rep.spectrum_error <= 1e-12


def test_berry_overlap_magnitudes():
    rep = dressed_frame_check(SplitHamiltonian(0.1 * SIGMA_Y, make_schedule("berry-xz"), 50.0), 0.5)
    assert rep.max_overlap_defect <= 1e-10


def test_alpha_zero_and_identity():
    grid = TimeGrid(0.0, 2.0, 200)
    frames = schedule_frames(make_schedule("berry-xz"), grid.times)
    V = make_schedule("berry-xz")
    assert np.all(alpha_phase(SplitHamiltonian(np.zeros((2, 2)), V, 5.0), frames) == 0)
    alpha = alpha_phase(SplitHamiltonian(0.2 * IDENTITY2, V, 5.0), frames)
    assert np.allclose(alpha[-1], -0.4, atol=1e-14)


def test_alpha_rate_from_extracted_phase():
    H0 = 0.1 * SIGMA_Y + 0.07 * SIGMA_Z
    split = SplitHamiltonian(H0, make_schedule("berry-xz"), 10.0)
    grid = TimeGrid(0.0, 2 * np.pi, 4000)
    led = interaction_ledger(split, grid, gauge_seed=3)
    rate = np.gradient(led.alpha_extracted, grid.dt, axis=0, edge_order=2)
    frames = schedule_frames(split.V, grid.times)
    assert np.max(np.abs(rate + h0_expectations(H0, frames))) < 1e-5
    assert np.max(np.abs(led.alpha_extracted - led.alpha)) < 1e-5


def test_interaction_geometric_phase_matches():
    split = SplitHamiltonian(0.1 * SIGMA_Y + 0.07 * SIGMA_Z, make_schedule("berry-xz"), 10.0)
    led = interaction_ledger(split, TimeGrid(0.0, 2 * np.pi, 40000), gauge_seed=8)
    assert np.max(np.abs(led.gamma_interaction - led.gamma)) < 1e-8


def test_ip_solution_reduces_to_leading():
    V = make_schedule("berry-xz")
    grid = TimeGrid(0.0, 2 * np.pi, 1000)
    sol = assemble_ip_solution(SplitHamiltonian(np.zeros((2, 2)), V, 80.0), 1, grid)
    lead = propagate_leading(V, 80.0, 1, grid, with_couplings=False)
    assert np.max(np.abs(sol.states - lead.states)) < 1e-12


def test_ip_solution_against_oracle():
    split = SplitHamiltonian(0.05 * SIGMA_Y, make_schedule("gapped-lz"), 500.0)
    grid = TimeGrid(0.0, 2.0, 20000)
    sol = assemble_ip_solution(split, 0, grid)
    assert np.max(np.abs(np.linalg.norm(sol.states, axis=1) - 1)) < 1e-9
    exact = propagate_dense(split.full_schedule(), 1.0, sol.states[0], 0.0, 2.0, tol=1e-10)
    assert fidelity(sol.states[-1], exact.final) >= 0.999


def test_neglect_ratio_cases():
    V = make_schedule("berry-xz")
    grid = TimeGrid(0.0, 2 * np.pi, 400)
    assert neglect_ratio(SplitHamiltonian(np.zeros((2, 2)), V, 10.0), grid).value == 0
    # |v_n| = 1/2 on the unit circle, so lam = 4 gives lam |v_n| = 2
    assert neglect_ratio(SplitHamiltonian(IDENTITY2, V, 4.0), grid).value <= 0.5 + 1e-12


def test_neglect_ratio_flags_zero_eigenvalue():
    V = matrix_schedule(lambda t: np.einsum("...,ij->...ij", t, np.diag([1.0, 0.0]).astype(complex))
                        + np.diag([0.0, 3.0]), 2)
    r = neglect_ratio(SplitHamiltonian(0.1 * IDENTITY2, V, 10.0), TimeGrid(-1.0, 1.0, 200))
    assert r.infinite
    assert r.t == pytest.approx(0.0, abs=1e-12)
    assert r.level == 0


def test_degenerate_v_is_an_error():
    V = make_schedule("berry-xz", {"R": 1.0, "X0": 1.0})  # circle passes through the origin
    with pytest.raises(DegeneracyError):
        interaction_ledger(SplitHamiltonian(0.1 * SIGMA_Y, V, 10.0), TimeGrid(0.0, 2 * np.pi, 400))

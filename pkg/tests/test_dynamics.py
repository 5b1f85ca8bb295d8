"""Hamiltonian flow, Jacobi fields and their dual forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koopman_forge import dynamics as dyn
from koopman_forge.dynamics import ExtendedState, integrate, system_library

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


def rotation(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]])


def test_library_values():
    h = system_library("harmonic")
    assert h.H(np.array([1.0, 0.0])) == 0.5
    inv = system_library("inverted", k=2.0)
    assert np.array_equal(inv.hess(np.array([0.3, 0.1])), np.diag([-4.0, 1.0]))
    pend = system_library("pendulum")
    assert pend.d3(np.array([0.0, 0.7]))[0, 0, 0] == 0.0
    dw = system_library("double_well")
    assert dw.H(np.array([1.0, 0.0])) == pytest.approx(-0.25)


@pytest.mark.parametrize("bad", [("nope", {}), ("harmonic", {"omega0": -1}), ("inverted", {"k": 0})])
def test_library_rejects(bad):
    with pytest.raises(ValueError):
        system_library(bad[0], **bad[1])


def test_state_rejects_nonfinite():
    with pytest.raises(ValueError):
        ExtendedState([np.nan, 0], [0, 0], [0, 0])
    with pytest.raises(ValueError):
        ExtendedState([0, 0], [0, 0, 0], [0, 0])


@pytest.mark.parametrize("name", dyn.LIBRARY)
def test_derivatives_match_finite_differences(name):
    sys = system_library(name)
    rng = np.random.default_rng(1)
    assert dyn.derivative_fd_error(sys, rng) <= 1e-6
    for _ in range(20):
        K = sys.hess(rng.uniform(-2, 2, 2))
        assert np.array_equal(K, K.T)


def test_step_count_shrinks_dt():
    assert dyn.step_count(1.0, 0.3) == (4, 0.25)
    assert dyn.step_count(1.0, 0.25) == (4, 0.25)
    with pytest.raises(ValueError):
        dyn.step_count(1.0, 0.0)


def test_harmonic_monodromy_is_identity():
    sys = system_library("harmonic")
    traj = integrate(sys, ExtendedState([1.0, 0.0], [1.0, 0.0], [0.0, 1.0]), 2 * math.pi, 1e-3, tangent=True)
    assert np.max(np.abs(traj.phi[-1] - [1.0, 0.0])) <= 1e-9
    assert np.max(np.abs(traj.pi[-1] - [1.0, 0.0])) <= 1e-9
    assert np.max(np.abs(traj.tangent[-1] - np.eye(2))) <= 1e-8
    assert np.all(np.diff(traj.t) > 0)
    assert np.allclose(np.diff(traj.t), traj.meta["dt"])


def test_quarter_period_tangent_is_rotation():
    M = dyn.tangent_map(system_library("harmonic"), [0.4, -1.0], math.pi / 2, 1e-3)
    assert np.max(np.abs(M - rotation(math.pi / 2))) <= 1e-8


def test_closed_form_along_the_orbit():
    sys = system_library("harmonic")
    traj = integrate(sys, ExtendedState([0.7, 0.2], [0.0, 1.0], [0.0, 0.0]), 3.0, 1e-3, record_every=100)
    for t, x in zip(traj.t, traj.phi):
        assert np.allclose(x, rotation(t) @ [0.7, 0.2], atol=1e-11)


def test_rk4_is_fourth_order():
    assert 14.0 <= dyn.convergence_ratio() <= 18.0


@pytest.mark.parametrize("name", dyn.LIBRARY)
def test_tangent_map_symplectic(name):
    r = dyn.symplecticity_check(name)
    assert r.passed
    assert abs(r.details["det"] - 1) <= 1e-8


@pytest.mark.parametrize("name", dyn.LIBRARY)
def test_energy_conserved(name):
    assert dyn.energy_drift(system_library(name), dyn.DEFAULT_STARTS[name], 10.0 if name != "inverted" else 5.0) <= 1e-8


@pytest.mark.parametrize("name", dyn.LIBRARY)
def test_transport_and_pairing(name):
    r = dyn.transport_check(system_library(name), ExtendedState(dyn.DEFAULT_STARTS[name], [0.3, 1.0], [1.0, -0.2]),
                            5.0, 1e-3)
    assert r.passed, r.details


def test_transport_near_separatrix():
    # H = 0.98 just below the separatrix energy 1
    r = dyn.transport_check(system_library("pendulum"), ExtendedState([0.0, 1.99], [1.0, 0.0], [0.0, 1.0]),
                            5.0, 5e-4)
    assert r.passed, r.details


def test_orthogonal_pairing_stays_zero():
    traj = integrate(system_library("pendulum"), ExtendedState([1.0, 0.5], [1.0, 2.0], [2.0, -1.0]), 5.0, 1e-3)
    assert np.max(np.abs(np.einsum("ij,ij->i", traj.pi, traj.xi))) <= 1e-10


def test_brs_diagram():
    harmonic = system_library("harmonic")
    assert dyn.brs_residual(harmonic, [1.0, 0.0], [0.4, -0.7], 2.0, 1e-3, 1e-3) <= 1e-12
    pend = system_library("pendulum")
    assert dyn.brs_residual(pend, [1.0, 0.5], [0.4, -0.7], 2.0, 1e-3, 0.0) == 0.0
    r = dyn.brs_diagram_check(pend, [1.0, 0.5], [0.4, -0.7])
    assert r.passed and 3.5 <= r.value <= 4.5


def test_growth_rates():
    assert abs(dyn.growth_rate(system_library("inverted"), [0.0, 0.0], [1.0, 0.0], (2.0, 6.0)) - 1) <= 0.01
    assert abs(dyn.growth_rate(system_library("inverted", k=2.0), [0.0, 0.0], [1.0, 0.0], (2.0, 6.0)) - 2) <= 0.02
    assert abs(dyn.growth_rate(system_library("harmonic"), [1.0, 0.0], [1.0, 0.0], (2.0, 6.0))) <= 1e-3
    assert abs(dyn.growth_rate(system_library("double_well"), [0.0, 0.0], [1.0, 0.3], (2.0, 8.0)) - 1) <= 0.05


def test_inverted_closed_form():
    # π(t) = (cosh t, sinh t) for π0 = (1, 0) and k = 1
    traj = integrate(system_library("inverted"), ExtendedState([0.0, 0.0], [1.0, 0.0], [0.0, 0.0]), 4.0, 1e-3,
                     record_every=500)
    want = np.column_stack([np.cosh(traj.t), np.sinh(traj.t)])
    assert np.max(np.abs(traj.pi - want) / np.abs(want).max(axis=1, keepdims=True)) <= 1e-10


def test_form_transport_keeps_pairing():
    for name in dyn.LIBRARY:
        assert dyn.form_transport_drift(system_library(name), dyn.DEFAULT_STARTS[name], [0.3, 1.0], [1.0, 2.0]) <= 1e-7


def test_divergence_reports_time():
    with np.errstate(all="ignore"), pytest.raises(dyn.DivergedError) as err:
        integrate(system_library("double_well"), ExtendedState([1e100, 0.0], [0, 0], [0, 0]), 1.0, 0.1)
    assert err.value.t_last == 0.0


def test_trajectory_csv(tmp_path):
    traj = integrate(system_library("harmonic"), ExtendedState([1.0, 0.0], [0, 1.0], [1.0, 0]), 0.01, 1e-3)
    lines = (traj.to_csv(tmp_path / "t.csv")).read_text().splitlines()
    assert lines[0] == "t,phi_1,phi_2,pi_1,pi_2,xi_1,xi_2"
    assert len(lines) == 12


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.sampled_from(dyn.LIBRARY))
def test_tangent_map_symplectic_from_random_starts(q, p, name):
    M = dyn.tangent_map(system_library(name), [q, p], 1.0, 1e-2)
    assert dyn.symplectic_defect(M, OMEGA) / max(1.0, np.linalg.norm(M) ** 2) <= 1e-7


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6), st.sampled_from(dyn.LIBRARY))
def test_pairing_conserved_from_random_starts(v, name):
    traj = integrate(system_library(name), ExtendedState(v[:2], v[2:4], v[4:]), 1.0, 1e-2)
    pair = np.einsum("ij,ij->i", traj.pi, traj.xi)
    scale = max(1.0, float(np.max(np.abs(traj.pi) * np.abs(traj.xi))))
    assert np.max(np.abs(pair - pair[0])) / scale <= 1e-8

"""Discrete causal determinants and the regulated Gaussian."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from koopman_forge import determinants as det
from koopman_forge import dynamics as dyn
from koopman_forge.determinants import TimeGrid, discrete_determinant


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(0.1, np.zeros((0, 2, 2)))
    with pytest.raises(ValueError):
        TimeGrid(-0.1, np.zeros((3, 2, 2)))
    with pytest.raises(ValueError):
        TimeGrid(0.1, np.zeros((3, 2, 3)))
    with pytest.raises(ValueError):
        discrete_determinant(TimeGrid.constant(np.eye(2), 1.0, 4), -1, theta0=0.3)


def test_zero_generator_gives_one():
    g = TimeGrid.constant(np.zeros((2, 2)), 1.0, 50)
    for s in (1, -1):
        for th in det.THETA_VALUES:
            assert discrete_determinant(g, s, th) == 1.0


def test_one_step_scalar():
    g = TimeGrid.constant([[3.0]], 0.1, 1)
    assert discrete_determinant(g, -1) == pytest.approx(1 - 0.5 * 0.1 * 3.0, abs=1e-15)
    assert discrete_determinant(g, +1) == pytest.approx(1 + 0.5 * 0.1 * 3.0, abs=1e-15)


def test_singular_reports_dt():
    g = TimeGrid.constant([[20.0]], 0.1, 1)
    with pytest.raises(det.SingularDeterminantError) as err:
        discrete_determinant(g, -1, theta0=0.5)
    assert err.value.dt == pytest.approx(0.1)


@pytest.mark.parametrize("name", dyn.LIBRARY)
def test_strictly_causal_is_exactly_one(name):
    g = TimeGrid.from_system(dyn.system_library(name), dyn.DEFAULT_STARTS[name], 1.0, 40)
    for s in (1, -1):
        assert discrete_determinant(g, s, 0.0, method="dense") == 1.0
        assert discrete_determinant(g, s, 0.0, method="block") == 1.0


@pytest.mark.parametrize("name", dyn.LIBRARY)
def test_dense_and_block_agree(name):
    g = TimeGrid.from_system(dyn.system_library(name), dyn.DEFAULT_STARTS[name], 1.0, 100)
    for s in (1, -1):
        for th in (0.5, 1.0):
            a = discrete_determinant(g, s, th, method="dense")
            b = discrete_determinant(g, s, th, method="block")
            assert a == pytest.approx(b, rel=1e-12)


def test_sign_flip_symmetry():
    rng = np.random.default_rng(0)
    G = rng.normal(size=(30, 2, 2))
    a = discrete_determinant(TimeGrid(0.01, G), +1)
    b = discrete_determinant(TimeGrid(0.01, -G), -1)
    assert a == b


@pytest.mark.parametrize("name", dyn.LIBRARY)
@pytest.mark.parametrize("T", [1.0, 2.0])
def test_product_identity_linear_decay(name, T):
    r = det.product_identity_check(dyn.system_library(name), dyn.DEFAULT_STARTS[name], T, 100)
    assert r.passed, r.details


def test_hamiltonian_generators_are_traceless():
    rng = np.random.default_rng(2)
    for name in dyn.LIBRARY:
        sys = dyn.system_library(name)
        for _ in range(50):
            assert np.trace(sys.generator(rng.uniform(-3, 3, 2))) == 0.0


def test_closed_form_synthetic():
    r = det.causal_closed_form_check(1.0, 1.0, 10_000)
    assert r.passed
    assert r.details["minus"] == pytest.approx(math.exp(-0.5), rel=0.01)
    assert r.details["plus"] == pytest.approx(math.exp(0.5), rel=0.01)


def test_closed_form_first_order():
    errs = [det.causal_closed_form_error(TimeGrid.constant(np.diag([1.0, 0.0]), 1.0, m), -1) for m in (100, 200)]
    assert 1.7 <= errs[0] / errs[1] <= 2.5


def test_refinement_csv(tmp_path):
    rows = det.refinement_table(dyn.system_library("harmonic"), [1.0, 0.0], 1.0, steps=(50, 100))
    assert rows[0][1] > rows[1][1]
    text = det.write_refinement_csv(rows, tmp_path / "r.csv").read_text().splitlines()
    assert text[0] == "dt,deviation" and len(text) == 3


def test_gaussian_values():
    a, eps = 1.5, 1e-3
    assert det.gaussian_inverse_det([[a]], eps).real == pytest.approx(2 * math.pi / math.sqrt(4 * eps**2 + a**2))
    assert det.gaussian_inverse_det(np.eye(2), 1e-3).real == pytest.approx((2 * math.pi) ** 2, rel=1e-5)
    with pytest.raises(ValueError):
        det.gaussian_inverse_det([[1.0, 0.0], [0.0, -2.0]], 1e-3)
    with pytest.raises(ValueError):
        det.gaussian_inverse_det([[-1.0]], 1e-3)


def test_gaussian_against_quadrature():
    # y integral done by completing the square, x integral by quadrature
    a, eps = 1.5, 0.1
    val, _ = sint.quad(lambda x: math.sqrt(math.pi / eps) * math.exp(-(a * a / (4 * eps) + eps) * x * x),
                       -np.inf, np.inf)
    assert det.gaussian_inverse_det([[a]], eps).real == pytest.approx(val, rel=1e-9)


def test_gaussian_limit_monotone():
    A = np.array([[2.0, 0.5], [-0.3, 1.0]])
    errs = [det.gaussian_limit_error(A, e) for e in np.logspace(-1, -3, 7)]
    assert all(x > y for x, y in zip(errs, errs[1:]))
    for d, M in ((1, [[2.0]]), (2, A), (2, np.eye(2))):
        assert det.gaussian_check(M).passed


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(1e-3, 1.0))
def test_gaussian_two_routes_agree(entries, eps):
    A = np.array(entries).reshape(2, 2)
    if np.linalg.det(A) <= 1e-3:
        A[[0, 1]] = A[[1, 0]]
    if np.linalg.det(A) <= 1e-3:
        return
    a = det.gaussian_inverse_det(A, eps)
    b = det.gaussian_by_quadratic_form(A, eps)
    assert abs(a - b) <= 1e-9 * abs(a)

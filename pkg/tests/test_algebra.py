"""Graded algebra engine: rewriting rules, dagger and exact equality."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koopman_forge import algebra as alg
from koopman_forge.algebra import (
    ONE_I, ConventionError, GradedPolynomial, Letter, SymplecticConvention,
    commutator, commutator_naive, const, dagger, equals, hsym, lam, multiply,
    normal_order, phi, pi, random_polynomial, xi,
)

C1 = SymplecticConvention.standard(1)
C2 = SymplecticConvention.standard(2)
I = ONE_I


def test_convention_matrices():
    for n in (1, 2):
        for conv in (SymplecticConvention.standard(n), SymplecticConvention.swapped(n)):
            w = conv.omega
            assert np.array_equal(w, -w.T)
            assert np.allclose(w @ conv.omega_lower, np.eye(2 * n))
    assert SymplecticConvention.standard(1).w(1, 2) == 1
    assert SymplecticConvention.swapped(1).w(1, 2) == -1


def test_multiply_is_free():
    p = multiply(phi(C1, 1), lam(C1, 1))
    assert list(p.terms) == [(Letter(alg.PHI, 0, 1), Letter(alg.LAMBDA, 0, 1))]
    assert multiply(GradedPolynomial.scalar(C1), p) == p
    q = multiply(pi(C1, 1) + xi(C1, 1), pi(C1, 1) - xi(C1, 1))
    assert len(q) == 4
    assert (Letter(alg.XI, 0, 1), Letter(alg.PI, 0, 1)) in q.terms


def test_mixed_conventions_rejected():
    with pytest.raises(ConventionError):
        multiply(phi(C1, 1), phi(C2, 1))


def test_normal_order_examples():
    assert normal_order(lam(C1, 1) * phi(C1, 1)) == normal_order(phi(C1, 1) * lam(C1, 1) - I)
    assert equals(xi(C1, 1) * pi(C1, 1), pi(C1, 1) * xi(C1, 1) + I)
    got = normal_order(lam(C1, 1) * hsym(C1, 1))
    assert got == normal_order(hsym(C1, 1) * lam(C1, 1) - I * hsym(C1, 1, 1))


def test_commutator_examples():
    for a in (1, 2):
        for b in (1, 2):
            want = const(C1, I if a == b else 0)
            assert equals(commutator(phi(C1, a), lam(C1, b)), want)
    assert commutator(pi(C2, 1, copy=1), pi(C2, 2, copy=2)).is_zero
    assert commutator(xi(C2, 1, copy=1), pi(C2, 1, copy=2)).is_zero
    assert equals(commutator(xi(C2, 1, copy=3), pi(C2, 1, copy=3)), const(C2, I))


def test_dagger_examples():
    assert equals(dagger(I * phi(C1, 1)), -I * phi(C1, 1))
    assert equals(dagger(pi(C1, 1) * lam(C1, 1)), pi(C1, 1) * lam(C1, 1))


def test_equals_examples():
    assert equals(lam(C1, 1) * phi(C1, 1), phi(C1, 1) * lam(C1, 1) - I)
    assert not equals(pi(C1, 1) * xi(C1, 1), xi(C1, 1) * pi(C1, 1))
    for conv in (C1, C2):
        s = alg.total(conv, (conv.w(a, b) * hsym(conv, a, b)
                             for a in conv.indices for b in conv.indices if conv.w(a, b)))
        assert equals(s, 0)


def test_pretty_rendering():
    p = normal_order(-I * hsym(C1, 1, 1) * pi(C1, 1) * xi(C1, 1))
    assert p.pretty() == "−i H_{11} π^1 ξ_1"
    assert GradedPolynomial.zero(C1).pretty() == "0"


def test_invalid_words_rejected():
    with pytest.raises(ValueError):
        phi(C1, 3)
    with pytest.raises(ValueError):
        GradedPolynomial.letter(C1, Letter(alg.PHI, 1, 1))


def test_derivative_of_products():
    f = hsym(C1, 1) * hsym(C1, 2, family=alg.H2)
    d = alg.derivative(f, 1)
    assert equals(d, hsym(C1, 1, 1) * hsym(C1, 2, family=alg.H2) + hsym(C1, 1) * hsym(C1, 1, 2, family=alg.H2))
    with pytest.raises(ValueError):
        alg.derivative(lam(C1, 1), 1)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
convs = st.sampled_from([C1, C2, SymplecticConvention.swapped(1)])


def _triple(conv, seed):
    rng = np.random.default_rng(seed)
    return [random_polynomial(conv, rng, copies=conv.n == 2) for _ in range(3)]


@settings(max_examples=40, deadline=None)
@given(convs, seeds)
def test_jacobi_identity(conv, seed):
    p, q, r = _triple(conv, seed)
    c = commutator
    assert (c(c(p, q), r) + c(c(q, r), p) + c(c(r, p), q)).is_zero


@settings(max_examples=40, deadline=None)
@given(convs, seeds)
def test_leibniz_commutator_matches_naive(conv, seed):
    p, q, _ = _triple(conv, seed)
    assert commutator(p, q) == commutator_naive(p, q)
    assert commutator(p, p).is_zero
    assert equals(commutator(p, q), -commutator(q, p))


@settings(max_examples=40, deadline=None)
@given(convs, seeds)
def test_normal_order_idempotent(conv, seed):
    p, q, _ = _triple(conv, seed)
    once = normal_order(multiply(p, q))
    assert once.is_canonical()
    assert normal_order(once) == once


@settings(max_examples=40, deadline=None)
@given(convs, seeds)
def test_dagger_antiautomorphism(conv, seed):
    p, q, _ = _triple(conv, seed)
    assert equals(dagger(multiply(p, q)), multiply(dagger(q), dagger(p)))
    assert equals(dagger(dagger(p)), p)


@settings(max_examples=40, deadline=None)
@given(convs, seeds)
def test_multiply_associative_and_bilinear(conv, seed):
    p, q, r = _triple(conv, seed)
    assert multiply(multiply(p, q), r) == multiply(p, multiply(q, r))
    assert multiply(p, q + r) == multiply(p, q) + multiply(p, r)

"""Differential forms: direct Lie derivative against the multi-slot commutator."""

import itertools

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from koopman_forge import forms
from koopman_forge.algebra import PI, XI, SymplecticConvention, dagger, equals, normal_order
from koopman_forge.forms import (
    FormField, PolynomialHamiltonian, StructuralError, basis_one_form, extract_form,
    lie_derivative_direct, lie_via_commutator, lift_form, wedge,
)

q, p = sp.symbols("x1 x2")
S1 = SymplecticConvention.standard(1)
S2 = SymplecticConvention.standard(2)


def _expr(poly):
    return sp.expand(poly.as_expr())


def test_wedge_of_basis_forms():
    w = wedge(basis_one_form(1, 1), basis_one_form(1, 2))
    assert _expr(w.component((1, 2))) == 1
    assert _expr(w.component((2, 1))) == -1
    assert wedge(basis_one_form(1, 1), basis_one_form(1, 1)).is_zero


def test_wedge_with_zero_form_scales():
    f = FormField(1, 0, {(): q * p})
    C = FormField(1, 1, {(1,): p, (2,): 3})
    got = wedge(f, C)
    assert got == FormField(1, 1, {(1,): q * p**2, (2,): 3 * q * p})


def test_degree_limits():
    with pytest.raises(ValueError):
        FormField(1, 3)
    with pytest.raises(ValueError):
        wedge(FormField(1, 2, {(1, 2): 1}), basis_one_form(1, 1))


def test_antisymmetric_storage():
    F = FormField(2, 2, {(3, 1): q})
    assert _expr(F.component((1, 3))) == -q
    assert _expr(F.component((3, 1))) == q
    assert F.component((2, 2)).is_zero


def test_zero_form_gives_liouville_derivative():
    H = PolynomialHamiltonian.from_expr(1, q**3 / 3 + p**2 / 2 - q * p)
    F = FormField(1, 0, {(): q**2 * p})
    f, h = q**2 * p, q**3 / 3 + p**2 / 2 - q * p
    # ω^{12} = 1 with φ = (q, p)
    oracle = sp.expand(sp.diff(h, p) * sp.diff(f, q) - sp.diff(h, q) * sp.diff(f, p))
    assert _expr(lie_derivative_direct(F, H).component(())) == oracle


def test_constant_one_form_under_harmonic_flow():
    H = PolynomialHamiltonian.from_expr(1, (q**2 + p**2) / 2)
    got = lie_derivative_direct(basis_one_form(1, 1), H, S1)
    # F'_a = ω^{λe} K_{ea} F_λ with K = 1 and F = (1, 0) gives F'_2 = ω^{12} = 1
    assert got == FormField(1, 1, {(2,): 1})
    flipped = lie_derivative_direct(basis_one_form(1, 1), H, SymplecticConvention.swapped(1))
    assert flipped == FormField(1, 1, {(2,): -1})


def test_two_form_bracket_by_hand():
    h = q**3 - q * p**2 + p
    f = q * p + p**3
    H = PolynomialHamiltonian.from_expr(1, h)
    F = FormField(1, 2, {(1, 2): f})
    x = (q, p)
    w = {(1, 2): 1, (2, 1): -1}
    F_ = {(1, 2): f, (2, 1): -f, (1, 1): 0, (2, 2): 0}
    oracle = 0
    for (a, b), wab in w.items():
        oracle += wab * (sp.diff(h, x[b - 1]) * sp.diff(f, x[a - 1])
                         + sp.diff(h, x[b - 1], x[0]) * F_[(a, 2)]
                         + sp.diff(h, x[b - 1], x[1]) * F_[(1, a)])
    assert _expr(lie_via_commutator(F, H).component((1, 2))) == sp.expand(oracle)
    assert _expr(lie_derivative_direct(F, H).component((1, 2))) == sp.expand(oracle)


@pytest.mark.parametrize("conv", [S1, S2])
def test_symplectic_form_is_invariant(conv):
    rng = np.random.default_rng(3)
    w = forms.symplectic_form(conv)
    for _ in range(5):
        H = forms.random_hamiltonian(conv.n, rng)
        assert lie_derivative_direct(w, H, conv).is_zero
    assert lie_via_commutator(w, H, conv).is_zero


def test_multiform_hamiltonian_slots():
    for conv, slots in ((S1, {1, 2}), (S2, {1, 2, 3, 4})):
        H = forms.multiform_hamiltonian(conv)
        copies = {x.tag for x in H.letters() if x.rank in (PI, XI)}
        assert copies == slots
        assert equals(dagger(H), H)
    Hp = forms.multiform_hamiltonian(S1, PolynomialHamiltonian.from_expr(1, q**2 * p + p**3))
    assert equals(dagger(Hp), Hp)


def test_lift_matches_printed_forms_n1():
    rng = np.random.default_rng(5)
    f0, f1, f2 = (forms.random_form(1, m, rng) for m in (0, 1, 2))
    assert equals(lift_form(f0, S1), forms.literal_zero_form(S1, f0))
    assert equals(lift_form(f1, S1), forms.literal_one_form(S1, f1))
    assert equals(lift_form(f2, S1), forms.literal_two_form_n1(S1, f2))


def test_extract_rejects_hamiltonian():
    with pytest.raises(StructuralError, match="word"):
        extract_form(forms.multiform_hamiltonian(S1), 1)
    with pytest.raises(StructuralError):
        extract_form(lift_form(FormField(1, 1, {(1,): q}), S1), 2)


def test_csv_dump(tmp_path):
    F = FormField(1, 1, {(1,): sp.Rational(1, 3) * q, (2,): 2})
    text = F.to_csv(tmp_path / "f.csv").read_text().splitlines()
    assert text[0].startswith("index")
    assert "1/3" in text[1] and "2/1" in text[2]


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(min_value=0, max_value=2))
def test_commutator_route_equals_direct_n1(seed, m):
    rng = np.random.default_rng(seed)
    P, H = forms.random_form(1, m, rng), forms.random_hamiltonian(1, rng)
    assert lie_via_commutator(P, H, S1) == lie_derivative_direct(P, H, S1)


@settings(max_examples=6, deadline=None)
@given(seeds, st.integers(min_value=0, max_value=4))
def test_commutator_route_equals_direct_n2(seed, m):
    rng = np.random.default_rng(seed)
    P, H = forms.random_form(2, m, rng, max_degree=2), forms.random_hamiltonian(2, rng)
    assert lie_via_commutator(P, H, S2) == lie_derivative_direct(P, H, S2)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=4))
def test_lift_extract_round_trip(seed, m):
    rng = np.random.default_rng(seed)
    P = forms.random_form(2, m, rng)
    assert extract_form(lift_form(P, S2), m) == P


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(0, 2), st.integers(0, 2))
def test_wedge_graded_commutative_and_leibniz(seed, a, b):
    rng = np.random.default_rng(seed)
    P, Q = forms.random_form(2, a, rng), forms.random_form(2, b, rng)
    assert wedge(P, Q) == wedge(Q, P).scale((-1) ** (a * b))
    assert forms.leibniz_holds(P, Q, forms.random_hamiltonian(2, rng))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_wedge_associative(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (forms.random_form(2, 1, rng, max_degree=1) for _ in range(3))
    assert wedge(wedge(A, B), C) == wedge(A, wedge(B, C))


@settings(max_examples=8, deadline=None)
@given(seeds, st.integers(1, 2))
def test_placement_does_not_matter(seed, m):
    rng = np.random.default_rng(seed)
    n = 1 if m == 1 else 2
    assert forms.placement_independent(forms.random_form(n, m, rng), forms.random_hamiltonian(n, rng))


@settings(max_examples=5, deadline=None)
@given(seeds, st.integers(0, 2))
def test_bracket_acts_through_poisson_bracket(seed, m):
    rng = np.random.default_rng(seed)
    P = forms.random_form(1, m, rng, max_degree=2)
    Ha, Hb = forms.random_hamiltonian(1, rng), forms.random_hamiltonian(1, rng)
    assert forms.bracket_echo(P, Ha, Hb).passed


def test_equivalence_trial_counts():
    rng = np.random.default_rng(11)
    for m in range(3):
        assert forms.equivalence_trials(1, m, 20, rng) == (20, 20)


def test_operator_polynomial_round_trip():
    poly = sp.Poly(q**2 * p - sp.Rational(3, 2) * p + 4, *forms.phase_symbols(1), domain="QQ")
    op = forms.poly_to_operator(S1, poly)
    assert forms.operator_to_poly(normal_order(op), forms.phase_symbols(1)) == poly
    assert list(itertools.islice(op.letters(), 1))

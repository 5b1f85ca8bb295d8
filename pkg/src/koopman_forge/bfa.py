"""Bosonic extended-phase-space Hamiltonian, its charges and their commutator identities.

Every verdict compares two polynomials with :func:`~koopman_forge.algebra.equals`,
i.e. exactly, after normal ordering.  Index sums are expanded with the numeric
omega of the supplied convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    H1, H2, ONE_I, GradedPolynomial, SymplecticConvention,
    commutator, dagger, derivative, drop_family, equals, hsym, lam, normal_order, phi, pi,
    total, xi,
)


@dataclass(frozen=True)
class IdentityVerdict:
    check_id: str
    paper_ref: str
    lhs: GradedPolynomial
    rhs: GradedPolynomial
    passed: bool
    note: str = ""

    @classmethod
    def compare(cls, check_id, paper_ref, lhs, rhs, note="") -> "IdentityVerdict":
        return cls(check_id, paper_ref, normal_order(lhs), normal_order(rhs), equals(lhs, rhs), note)

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "paper_ref": self.paper_ref,
            "lhs": self.lhs.pretty(),
            "rhs": self.rhs.pretty(),
            "pass": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True)
class ChargeSet:
    n: int
    Qg: GradedPolynomial
    N: GradedPolynomial
    Nbar: GradedPolynomial
    Q: GradedPolynomial
    Qbar: GradedPolynomial
    QH: GradedPolynomial
    QHbar: GradedPolynomial
    Q1: GradedPolynomial
    Q2: GradedPolynomial
    K: GradedPolynomial
    Kbar: GradedPolynomial


def _sum(conv, terms):
    return total(conv, terms)


def hamiltonian_from(conv: SymplecticConvention, F: GradedPolynomial) -> GradedPolynomial:
    """λ_a ω^{ab} ∂_bF − π^l ω^{ab} ∂_b∂_lF ξ_a for a lambda-free function F.

    Derivatives are taken by the engine itself (``i[λ_a, F]``), so F may be a
    product of classical symbols or an explicit polynomial in φ.
    """
    idx = conv.indices
    dF = {b: derivative(F, b) for b in idx}
    ddF = {(b, l): derivative(dF[b], l) for b in idx for l in idx}
    kinetic = _sum(conv, (
        conv.w(a, b) * (lam(conv, a) * dF[b])
        for a in idx for b in idx if conv.w(a, b)
    ))
    jacobi = _sum(conv, (
        conv.w(a, b) * (pi(conv, l) * ddF[b, l] * xi(conv, a))
        for l in idx for a in idx for b in idx if conv.w(a, b)
    ))
    return kinetic - jacobi


def hamiltonian_bfa(conv: SymplecticConvention, family: int = H1) -> GradedPolynomial:
    """λ_a ω^{ab} H_b − π^l ω^{ab} H_{bl} ξ_a with the index sums expanded.

    The product is left in the written order (λ to the left of H_b), so
    hermiticity checks have to go through the λ–H commutator.
    """
    idx = conv.indices
    kinetic = _sum(conv, (
        conv.w(a, b) * (lam(conv, a) * hsym(conv, b, family=family))
        for a in idx for b in idx if conv.w(a, b)
    ))
    jacobi = _sum(conv, (
        conv.w(a, b) * (pi(conv, l) * hsym(conv, b, l, family=family) * xi(conv, a))
        for l in idx for a in idx for b in idx if conv.w(a, b)
    ))
    return kinetic - jacobi


def poisson_bracket_symbol(conv: SymplecticConvention) -> GradedPolynomial:
    """{H1, H2} = ∂_bH1 ω^{bc} ∂_cH2 as a product of classical symbols."""
    idx = conv.indices
    return _sum(conv, (
        conv.w(b, c) * (hsym(conv, b, family=H1) * hsym(conv, c, family=H2))
        for b in idx for c in idx if conv.w(b, c)
    ))


def build_charges(conv: SymplecticConvention, family: int = H1) -> ChargeSet:
    idx = conv.indices
    h = lambda *d: hsym(conv, *d, family=family)  # noqa: E731
    Qg = ONE_I * _sum(conv, (pi(conv, a) * xi(conv, a) for a in idx))
    N = _sum(conv, (pi(conv, a) * h(a) for a in idx))
    Nbar = _sum(conv, (conv.w(a, b) * (xi(conv, a) * h(b)) for a in idx for b in idx if conv.w(a, b)))
    Q = ONE_I * _sum(conv, (pi(conv, a) * lam(conv, a) for a in idx))
    Qbar = ONE_I * _sum(conv, (
        conv.w(a, b) * (xi(conv, a) * lam(conv, b)) for a in idx for b in idx if conv.w(a, b)
    ))
    half = Fraction(1, 2)
    K = half * _sum(conv, (
        conv.wl(a, b) * (pi(conv, a) * pi(conv, b)) for a in idx for b in idx if conv.wl(a, b)
    ))
    Kbar = half * _sum(conv, (
        conv.w(a, b) * (xi(conv, a) * xi(conv, b)) for a in idx for b in idx if conv.w(a, b)
    ))
    return ChargeSet(
        n=conv.n, Qg=Qg, N=N, Nbar=Nbar, Q=Q, Qbar=Qbar,
        QH=Q - N, QHbar=Qbar + Nbar, Q1=Q - Nbar, Q2=Qbar + N,
        K=K, Kbar=Kbar,
    )


# ---------------------------------------------------------------------------
# expected right-hand sides, written out index by index

def brs_anomaly_rhs(conv, family=H1) -> GradedPolynomial:
    """−π^l ω^{ab} H_{blc} π^c ξ_a."""
    idx = conv.indices
    return -_sum(conv, (
        conv.w(a, b) * (pi(conv, l) * hsym(conv, b, l, c, family=family) * pi(conv, c) * xi(conv, a))
        for l in idx for a in idx for b in idx for c in idx if conv.w(a, b)
    ))


def antibrs_anomaly_rhs(conv, family=H1) -> GradedPolynomial:
    """−ξ_a ω^{ab} ξ_s ω^{st} H_{btl} π^l."""
    idx = conv.indices
    return -_sum(conv, (
        (conv.w(a, b) * conv.w(s, t))
        * (xi(conv, a) * xi(conv, s) * hsym(conv, b, t, l, family=family) * pi(conv, l))
        for a in idx for b in idx for s in idx for t in idx for l in idx
        if conv.w(a, b) and conv.w(s, t)
    ))


def susy_extra_term(conv, family=H1) -> GradedPolynomial:
    """4 π^a ω^{de} H_{ea} ξ_d."""
    idx = conv.indices
    return 4 * _sum(conv, (
        conv.w(d, e) * (pi(conv, a) * hsym(conv, e, a, family=family) * xi(conv, d))
        for a in idx for d in idx for e in idx if conv.w(d, e)
    ))


# ---------------------------------------------------------------------------
# verdicts

def verify_hermiticity(conv, H=None) -> IdentityVerdict:
    H = hamiltonian_bfa(conv) if H is None else H
    return IdentityVerdict.compare("hermiticity", "Eq. 3.7", dagger(H), H)


def verify_conservation(charges: ChargeSet, H: GradedPolynomial) -> list[IdentityVerdict]:
    zero = GradedPolynomial.zero(H.conv)
    return [
        IdentityVerdict.compare("conserve_Qg", "Eq. C1", commutator(charges.Qg, H), zero),
        IdentityVerdict.compare("conserve_N", "Eq. C2", commutator(charges.N, H), zero),
        IdentityVerdict.compare("conserve_Nbar", "Eq. C3", commutator(charges.Nbar, H), zero),
    ]


def verify_ghost_grading(charges: ChargeSet) -> list[IdentityVerdict]:
    """[Qg, π^a] = −π^a and [Qg, ξ_a] = +ξ_a: π and ξ carry opposite ghost grade."""
    conv = charges.Qg.conv
    out = []
    for a in conv.indices:
        out.append(IdentityVerdict.compare(
            f"ghost_grade_pi{a}", "Eq. 4.17", commutator(charges.Qg, pi(conv, a)), -pi(conv, a)))
        out.append(IdentityVerdict.compare(
            f"ghost_grade_xi{a}", "Eq. 4.17", commutator(charges.Qg, xi(conv, a)), xi(conv, a)))
    return out


def brs_anomaly(charges: ChargeSet, H: GradedPolynomial) -> list[IdentityVerdict]:
    conv = H.conv
    q_rhs = brs_anomaly_rhs(conv)
    qbar_rhs = antibrs_anomaly_rhs(conv)
    out = [
        IdentityVerdict.compare("brs_anomaly", "Eq. 4.22", commutator(charges.Q, H), q_rhs),
        IdentityVerdict.compare("antibrs_anomaly", "Eq. 4.23 / C4", commutator(charges.Qbar, H), qbar_rhs),
        IdentityVerdict.compare("susy_charge_anomaly", "Eq. 4.29", commutator(charges.QH, H), q_rhs),
        IdentityVerdict.compare("susy_bar_charge_anomaly", "Eq. 4.29", commutator(charges.QHbar, H), qbar_rhs),
    ]
    zero = GradedPolynomial.zero(conv)
    for name, rhs in (("brs", q_rhs), ("antibrs", qbar_rhs)):
        for a in conv.indices:
            out.append(IdentityVerdict.compare(
                f"{name}_anomaly_phi{a}", "Eq. 4.26", commutator(rhs, phi(conv, a)), zero))
    return out


def susy_algebra(charges: ChargeSet, H: GradedPolynomial) -> list[IdentityVerdict]:
    conv = H.conv
    extra = susy_extra_term(conv)
    out = [IdentityVerdict.compare(
        "susy_algebra", "Eq. 4.31 / C5", commutator(charges.QH, charges.QHbar), 2 * H + extra)]
    zero = GradedPolynomial.zero(conv)
    for a in conv.indices:
        out.append(IdentityVerdict.compare(
            f"susy_extra_phi{a}", "Eq. 4.32", commutator(extra, phi(conv, a)), zero))
    # with H switched off only the λ-bilinear i ω^{ab} λ_a λ_b survives, which vanishes
    idx = conv.indices
    lam_bilinear = ONE_I * _sum(conv, (
        conv.w(a, b) * (lam(conv, a) * lam(conv, b)) for a in idx for b in idx if conv.w(a, b)
    ))
    free = commutator(drop_family(charges.QH, H1), drop_family(charges.QHbar, H1))
    out.append(IdentityVerdict.compare("susy_algebra_free", "Eq. C5", free, lam_bilinear))
    return out


def q1_action(charges: ChargeSet) -> list[IdentityVerdict]:
    """Transformations generated by Q1 (formal parameter set to 1)."""
    conv = charges.Q1.conv
    idx = conv.indices
    out = []
    for a in idx:
        out.append(IdentityVerdict.compare(
            f"q1_phi{a}", "Eq. C6", commutator(charges.Q1, phi(conv, a)), pi(conv, a)))
        out.append(IdentityVerdict.compare(
            f"q1_xi{a}", "Eq. C7", commutator(charges.Q1, xi(conv, a)), lam(conv, a)))
        out.append(IdentityVerdict.compare(
            f"q1_pi{a}", "Eq. C8", commutator(charges.Q1, pi(conv, a)),
            -ONE_I * _sum(conv, (conv.w(a, e) * hsym(conv, e) for e in idx if conv.w(a, e)))))
        out.append(IdentityVerdict.compare(
            f"q1_lambda{a}", "Eq. C9", commutator(charges.Q1, lam(conv, a)),
            -ONE_I * _sum(conv, (
                conv.w(b, e) * (xi(conv, b) * hsym(conv, e, a))
                for b in idx for e in idx if conv.w(b, e)))))
    return out


def q1_square_on_phi(charges: ChargeSet) -> list[IdentityVerdict]:
    """[Q1, [Q1, φ^a]] = −i ω^{ae} H_e; with ε restored both sides carry ε²."""
    conv = charges.Q1.conv
    idx = conv.indices
    out = []
    for a in idx:
        lhs = commutator(charges.Q1, commutator(charges.Q1, phi(conv, a)))
        rhs = -ONE_I * _sum(conv, (conv.w(a, e) * hsym(conv, e) for e in idx if conv.w(a, e)))
        out.append(IdentityVerdict.compare(
            f"q1_square_phi{a}", "Eq. 4.35", lhs, rhs,
            note="equals −iε²φ̇^a once the equations of motion are used"))
    return out


def vanishing_k_charges(charges: ChargeSet) -> list[IdentityVerdict]:
    zero = GradedPolynomial.zero(charges.K.conv)
    return [
        IdentityVerdict.compare("k_charge_zero", "Eq. 4.20", charges.K, zero),
        IdentityVerdict.compare("kbar_charge_zero", "Eq. 4.20", charges.Kbar, zero),
    ]


def charge_relations(charges: ChargeSet) -> list[IdentityVerdict]:
    c = charges
    return [
        IdentityVerdict.compare("charge_QH", "Eq. 4.18", c.QH, c.Q - c.N),
        IdentityVerdict.compare("charge_QHbar", "Eq. 4.18", c.QHbar, c.Qbar + c.Nbar),
        IdentityVerdict.compare("charge_Q1", "Eq. 4.33", c.Q1, c.Q - c.Nbar),
        IdentityVerdict.compare("charge_Q2", "Eq. 4.33", c.Q2, c.Qbar + c.N),
    ]


def lie_bracket_identity(conv: SymplecticConvention, same_family: bool = False) -> IdentityVerdict:
    """[iĤ_{H1}, iĤ_{H2}] = −iĤ_{{H1,H2}} with two independent function families."""
    second = H1 if same_family else H2
    Ha = hamiltonian_bfa(conv, H1)
    Hb = hamiltonian_bfa(conv, second)
    lhs = commutator(ONE_I * Ha, ONE_I * Hb)
    idx = conv.indices
    bracket = _sum(conv, (
        conv.w(b, c) * (hsym(conv, b, family=H1) * hsym(conv, c, family=second))
        for b in idx for c in idx if conv.w(b, c)
    ))
    rhs = -ONE_I * hamiltonian_from(conv, bracket)
    return IdentityVerdict.compare(
        "lie_bracket" if not same_family else "lie_bracket_same", "Eq. 4.14 / B1", lhs, rhs)


def all_verdicts(conv: SymplecticConvention) -> list[IdentityVerdict]:
    H = hamiltonian_bfa(conv)
    ch = build_charges(conv)
    return [
        verify_hermiticity(conv, H),
        *charge_relations(ch),
        *vanishing_k_charges(ch),
        *verify_conservation(ch, H),
        *verify_ghost_grading(ch),
        *brs_anomaly(ch, H),
        *susy_algebra(ch, H),
        *q1_action(ch),
        *q1_square_on_phi(ch),
        lie_bracket_identity(conv),
    ]

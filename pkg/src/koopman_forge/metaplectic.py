"""Truncated Fock-space model of the metaplectic representation.

γ^a = √2 φ̂^a with φ̂ = (x̂, p̂) by default, so that [γ^a, γ^b] = 2iω^{ab} with
the same ω as the rest of the package.  ``ordering="px"`` switches to
φ̂ = (p̂, x̂), which flips ω; all checks read ω from the representation.

Truncation at D levels per mode corrupts the top levels of any polynomial in
the ladder operators, so each identity of degree k is compared only after
projecting out the top k levels of every mode.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import sympy as sp

from .dynamics import HamiltonianSystem, integrate, ExtendedState, step_count, DivergedError
from .results import CheckResult, in_range, within

TOL_CLIFFORD = 1e-12
TOL_HERMITIAN = 1e-14
TOL_UNITARY = 1e-10
TOL_JACOBI = 1e-6
TOL_SVH = 1e-12
WITNESS_FLOOR = 1e-3


def ladder(D: int) -> np.ndarray:
    """Annihilation operator on D number states."""
    return np.diag(np.sqrt(np.arange(1, D, dtype=float)), 1)


def _embed(op: np.ndarray, k: int, N: int, D: int) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for j in range(N):
        out = np.kron(out, op if j == k else np.eye(D))
    return out


@dataclass(frozen=True)
class FockRep:
    N: int
    D: int
    ordering: str = "xp"

    def __post_init__(self):
        if self.D < 4:
            raise ValueError("D must be at least 4")
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.ordering not in ("xp", "px"):
            raise ValueError("ordering must be 'xp' or 'px'")

    @property
    def dim(self) -> int:
        return self.D ** self.N

    @cached_property
    def x(self) -> list[np.ndarray]:
        a = ladder(self.D)
        return [_embed((a + a.T) / math.sqrt(2), k, self.N, self.D) for k in range(self.N)]

    @cached_property
    def p(self) -> list[np.ndarray]:
        a = ladder(self.D)
        return [_embed(1j * (a.T - a) / math.sqrt(2), k, self.N, self.D) for k in range(self.N)]

    @cached_property
    def phi(self) -> list[np.ndarray]:
        return self.x + self.p if self.ordering == "xp" else self.p + self.x

    @cached_property
    def omega(self) -> np.ndarray:
        n = self.N
        w = np.zeros((2 * n, 2 * n))
        w[:n, n:] = np.eye(n)
        w[n:, :n] = -np.eye(n)
        return w if self.ordering == "xp" else -w

    @cached_property
    def omega_lower(self) -> np.ndarray:
        return np.linalg.inv(self.omega)

    @cached_property
    def classical_perm(self) -> np.ndarray:
        """rep index a ↦ index of the same coordinate in (q, p) order."""
        n = self.N
        if self.ordering == "xp":
            return np.arange(2 * n)
        return np.concatenate([np.arange(n, 2 * n), np.arange(n)])

    @cached_property
    def gamma(self) -> np.ndarray:
        return math.sqrt(2) * np.array(self.phi)

    @cached_property
    def gamma_lower(self) -> np.ndarray:
        return np.einsum("ab,bxy->axy", self.omega_lower, self.gamma)

    @cached_property
    def sigma(self) -> np.ndarray:
        """Σ^{ab} = ¼(γ^aγ^b + γ^bγ^a), shape (2N, 2N, dim, dim)."""
        g = self.gamma
        prod = np.einsum("axy,byz->abxz", g, g)
        return 0.25 * (prod + prod.transpose(1, 0, 2, 3))

    @cached_property
    def sigma_sparse(self) -> dict:
        """Σ^{ab} as CSR matrices, built from sparse ladders; keyed by (a, b)."""
        a = sps.diags(np.sqrt(np.arange(1, self.D, dtype=float)), 1, format="csr")
        eye = sps.identity(self.D, format="csr")

        def embed(op, k):
            out = sps.identity(1, format="csr", dtype=complex)
            for j in range(self.N):
                out = sps.kron(out, op if j == k else eye, format="csr")
            return out

        xs = [embed((a + a.T) * (1 / math.sqrt(2)), k) for k in range(self.N)]
        ps = [embed((a.T - a) * (1j / math.sqrt(2)), k) for k in range(self.N)]
        g = [math.sqrt(2) * m for m in (xs + ps if self.ordering == "xp" else ps + xs)]
        return {(i, j): (0.25 * (g[i] @ g[j] + g[j] @ g[i])).tocsr()
                for i in range(2 * self.N) for j in range(2 * self.N)}

    @cached_property
    def gamma_sparse(self) -> list:
        a = sps.diags(np.sqrt(np.arange(1, self.D, dtype=float)), 1, format="csr")
        eye = sps.identity(self.D, format="csr")

        def embed(op, k):
            out = sps.identity(1, format="csr", dtype=complex)
            for j in range(self.N):
                out = sps.kron(out, op if j == k else eye, format="csr")
            return out

        xs = [embed((a + a.T) * 1.0, k) for k in range(self.N)]
        ps = [embed((a.T - a) * 1j, k) for k in range(self.N)]
        return xs + ps if self.ordering == "xp" else ps + xs

    def k_sigma(self, K: np.ndarray) -> np.ndarray:
        """K_{ab}Σ^{ab}."""
        return np.einsum("ab,abxy->xy", K, self.sigma)

    def levels(self) -> np.ndarray:
        """Occupation numbers per basis state, shape (dim, N)."""
        return np.array(list(itertools.product(range(self.D), repeat=self.N)))

    def projector(self, drop: int) -> np.ndarray:
        """Diagonal projector removing states with any mode in its top ``drop`` levels."""
        keep = np.all(self.levels() < self.D - drop, axis=1)
        return np.diag(keep.astype(float))

    def low_mask(self, keep_below: int) -> np.ndarray:
        return np.all(self.levels() < keep_below, axis=1)

    def to_csv(self, path) -> Path:
        """γ and Σ matrices, row-major, entries as "re,im"."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "row", "entries"])
            for a, g in enumerate(self.gamma, 1):
                for r, row in enumerate(g):
                    w.writerow([f"gamma^{a}", r] + [f"{v.real!r},{v.imag!r}" for v in row])
            for a in range(2 * self.N):
                for b in range(a, 2 * self.N):
                    for r, row in enumerate(self.sigma[a, b]):
                        w.writerow([f"Sigma^{a + 1}{b + 1}", r] + [f"{v.real!r},{v.imag!r}" for v in row])
        return path


def build_fock(N: int, D: int, ordering: str = "xp") -> FockRep:
    return FockRep(N, D, ordering)


def _proj_norm(P: np.ndarray, A: np.ndarray) -> float:
    return float(np.max(np.abs(P @ A @ P))) if A.size else 0.0


def heisenberg_residual(rep: FockRep) -> float:
    P = rep.projector(1)
    worst = 0.0
    for k in range(rep.N):
        for j in range(rep.N):
            c = rep.x[k] @ rep.p[j] - rep.p[j] @ rep.x[k]
            worst = max(worst, _proj_norm(P, c - (1j if k == j else 0) * np.eye(rep.dim)))
    return worst


def clifford_check(rep: FockRep) -> CheckResult:
    """P[γ^a, γ^b]P = 2iω^{ab}P."""
    P = rep.projector(1)
    g = rep.gamma
    I = np.eye(rep.dim)
    worst = 0.0
    for a in range(2 * rep.N):
        for b in range(2 * rep.N):
            c = g[a] @ g[b] - g[b] @ g[a]
            worst = max(worst, _proj_norm(P, c - 2j * rep.omega[a, b] * I))
    return within(f"clifford_N{rep.N}_D{rep.D}", worst, TOL_CLIFFORD)


def sigma_gamma_commutator(rep: FockRep) -> CheckResult:
    """P[Σ^{ab}, γ^d]P = i(ω^{ad}γ^b + ω^{bd}γ^a)P over all index triples."""
    P = rep.projector(2)
    g, S, w = rep.gamma, rep.sigma, rep.omega
    worst = 0.0
    r = range(2 * rep.N)
    for a, b, d in itertools.product(r, r, r):
        lhs = S[a, b] @ g[d] - g[d] @ S[a, b]
        rhs = 1j * (w[a, d] * g[b] + w[b, d] * g[a])
        worst = max(worst, _proj_norm(P, lhs - rhs))
    return within(f"sigma_gamma_N{rep.N}_D{rep.D}", worst, TOL_CLIFFORD)


def hermiticity_residual(rep: FockRep) -> float:
    """Largest |A − A†| over all γ^a and Σ^{ab}."""
    mats = list(rep.gamma) + [rep.sigma[a, b] for a in range(2 * rep.N) for b in range(2 * rep.N)]
    return max(float(np.max(np.abs(A - A.conj().T))) for A in mats)


def sigma_symmetry_residual(rep: FockRep) -> float:
    return float(np.max(np.abs(rep.sigma - rep.sigma.transpose(1, 0, 2, 3))))


def metaplectic_operator(rep: FockRep, K: np.ndarray, eps: float) -> np.ndarray:
    """M = exp(−(i/2)εK_{ab}Σ^{ab})."""
    K = np.asarray(K, float)
    if not np.allclose(K, K.T):
        raise ValueError("K must be symmetric")
    return sla.expm(-0.5j * eps * rep.k_sigma(K))


def s_vector(rep: FockRep, K: np.ndarray, eps: float) -> np.ndarray:
    """S^a_b = δ^a_b + εω^{ac}K_{cb}."""
    return np.eye(2 * rep.N) + eps * rep.omega @ K


def s_form(rep: FockRep, K: np.ndarray, eps: float) -> np.ndarray:
    """S^e_f = δ^e_f − εω^{ea}K_{af}."""
    return np.eye(2 * rep.N) - eps * rep.omega @ K


def intertwine_residual(rep: FockRep, K: np.ndarray, eps: float, drop: int = 4) -> float:
    """max_a ‖P(M⁻¹γ^aM − S^a_bγ^b)P‖."""
    M = metaplectic_operator(rep, K, eps)
    Minv = M.conj().T
    S = s_vector(rep, K, eps)
    P = rep.projector(drop)
    g = rep.gamma
    worst = 0.0
    for a in range(2 * rep.N):
        lhs = Minv @ g[a] @ M
        rhs = np.einsum("b,bxy->xy", S[a], g)
        worst = max(worst, _proj_norm(P, lhs - rhs))
    return worst


def unitarity_residual(rep: FockRep, K: np.ndarray, eps: float) -> float:
    M = metaplectic_operator(rep, K, eps)
    P = rep.projector(1)
    return _proj_norm(P, M.conj().T @ M - np.eye(rep.dim))


def intertwine_check(rep: FockRep, K: np.ndarray, eps: float = 1e-3) -> CheckResult:
    """Residual ratio under ε-halving in [3.5, 4.5], M unitary."""
    r1 = intertwine_residual(rep, K, eps)
    r2 = intertwine_residual(rep, K, eps / 2)
    u = unitarity_residual(rep, K, eps)
    ratio = r1 / r2 if r2 > 0 else float("inf")
    res = in_range(f"intertwine_N{rep.N}_D{rep.D}", ratio, 3.5, 4.5,
                   residual=r1, residual_half=r2, unitarity=u)
    if u > TOL_UNITARY:
        return CheckResult(res.check_id, False, res.value, res.tolerance, "M not unitary", res.details)
    return res


def symplectic_residual(S: np.ndarray, omega: np.ndarray) -> float:
    return float(np.max(np.abs(S.T @ omega @ S - omega)))


# ---------------------------------------------------------------------------
# spinor dynamics

def _classical_hessian(rep: FockRep, sys: HamiltonianSystem, phi: np.ndarray) -> np.ndarray:
    """Hessian in the representation's coordinate order."""
    perm = rep.classical_perm
    return sys.hess(phi)[np.ix_(perm, perm)]


def integrate_spinor(rep: FockRep, sys: HamiltonianSystem, phi0, eta0, T: float, dt: float,
                     record_every: int = 10):
    """RK4 on (φ, η) with η̇ = −(i/2)K_{ab}(φ(t))Σ^{ab}η; returns (times, φ, η)."""
    if sys.n != rep.N:
        raise ValueError("system and representation disagree on the number of modes")
    steps, h = step_count(T, dt)
    d = sys.dim
    phi = np.asarray(phi0, float).copy()
    eta = np.asarray(eta0, complex).copy()
    sigma = rep.sigma_sparse

    def f(ph, et):
        K = _classical_hessian(rep, sys, ph)
        out = np.zeros_like(et)
        for (a, b), S in sigma.items():
            if K[a, b]:
                out += K[a, b] * (S @ et)
        return sys.vector_field(ph), -0.5j * out

    times, phis, etas = [0.0], [phi.copy()], [eta.copy()]
    for i in range(1, steps + 1):
        k1 = f(phi, eta)
        k2 = f(phi + 0.5 * h * k1[0], eta + 0.5 * h * k1[1])
        k3 = f(phi + 0.5 * h * k2[0], eta + 0.5 * h * k2[1])
        k4 = f(phi + h * k3[0], eta + h * k3[1])
        phi = phi + (h / 6) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        eta = eta + (h / 6) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(eta))):
            raise DivergedError((i - 1) * h)
        if i % record_every == 0 or i == steps:
            times.append(i * h)
            phis.append(phi.copy())
            etas.append(eta.copy())
    return np.array(times), np.array(phis), np.array(etas)


def bilinear(rep: FockRep, eta: np.ndarray) -> np.ndarray:
    """P^a = η†γ^aη (real up to rounding); works on a stack of states."""
    single = np.ndim(eta) == 1
    eta = np.atleast_2d(eta)
    P = np.stack([np.einsum("tx,tx->t", eta.conj(), (g @ eta.T).T) for g in rep.gamma_sparse], axis=-1)
    return P.real[0] if single else P.real


def random_low_state(rep: FockRep, rng: np.random.Generator, levels: int = 4) -> np.ndarray:
    mask = rep.low_mask(levels)
    v = np.zeros(rep.dim, complex)
    v[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    return v / np.linalg.norm(v)


def coherent_state(rep: FockRep, centre) -> np.ndarray:
    """Product of coherent states with η†γη = ``centre`` (given in the rep's index order)."""
    centre = np.asarray(centre, float)
    n = rep.N
    if rep.ordering == "xp":
        gx, gp = centre[:n], centre[n:]
    else:
        gp, gx = centre[:n], centre[n:]
    out = np.array([1.0 + 0j])
    levels = np.arange(rep.D)
    log_fact = np.array([math.lgamma(k + 1) for k in levels])
    for k in range(n):
        # ⟨a + a†⟩ = 2 Re α, ⟨i(a† − a)⟩ = 2 Im α
        alpha = 0.5 * (gx[k] + 1j * gp[k])
        mag = abs(alpha)
        amp = np.exp(-0.5 * mag**2 + levels * math.log(mag) - 0.5 * log_fact) if mag else (levels == 0) * 1.0
        phase = np.exp(1j * levels * np.angle(alpha)) if mag else 1.0
        out = np.kron(out, amp * phase)
    return out / np.linalg.norm(out)


def jacobi_bilinear_deviation(rep: FockRep, sys: HamiltonianSystem, phi0, eta0,
                              T: float, dt: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Relative gap between η†γη and an independently integrated Jacobi field.

    Returns (deviation, times, P(t)).
    """
    times, phis, etas = integrate_spinor(rep, sys, phi0, eta0, T, dt)
    P = bilinear(rep, etas)
    perm = rep.classical_perm
    pi0 = np.empty(sys.dim)
    pi0[perm] = P[0]
    record = max(1, int(round((times[1] - times[0]) / step_count(T, dt)[1])))
    traj = integrate(sys, ExtendedState(phi0, pi0, np.zeros(sys.dim)), T, dt, record_every=record)
    jac = traj.pi[:, perm]
    scale = max(float(np.max(np.abs(jac))), 1e-300)
    if np.max(np.abs(P)) == 0.0 and np.max(np.abs(jac)) == 0.0:
        return 0.0, times, P
    return float(np.max(np.abs(P - jac)) / max(scale, 1.0)), times, P


def jacobi_bilinear_check(rep: FockRep, sys: HamiltonianSystem, phi0, eta0, T: float,
                          dt: float = 1e-3) -> CheckResult:
    dev, _, _ = jacobi_bilinear_deviation(rep, sys, phi0, eta0, T, dt)
    return within(f"jacobi_bilinear_{sys.name}", dev, TOL_JACOBI, D=rep.D, T=T)


# ---------------------------------------------------------------------------
# fermionic p-particle lift

def slater_lift(A: np.ndarray, p: int) -> np.ndarray:
    """Matrix of Σ_ij A_ij c_i†c_j on the antisymmetric p-particle sector."""
    d = A.shape[0]
    if p > d or p < 0:
        raise ValueError(f"cannot place {p} fermions in {d} modes")
    basis = list(itertools.combinations(range(d), p))
    index = {s: k for k, s in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)), complex)
    for col, occ in enumerate(basis):
        for pos_j, j in enumerate(occ):
            rest = occ[:pos_j] + occ[pos_j + 1:]
            sign_j = (-1) ** pos_j
            for i in range(d):
                if i in rest:
                    continue
                pos_i = sum(1 for r in rest if r < i)
                new = rest[:pos_i] + (i,) + rest[pos_i:]
                out[index[new], col] += sign_j * (-1) ** pos_i * A[i, j]
    return out


def svh_hermiticity_check(rep: FockRep, K: np.ndarray, p: int, d: int = 6) -> CheckResult:
    """Lift of ½K_{ab}Σ^{ab} (first d levels) is Hermitian; the Σ_vec analogue is not.

    The witness uses the vector representation of the same K in 2N dimensions;
    it needs 2N > p for a nontrivial sector.
    """
    if d > rep.dim:
        raise ValueError("d exceeds the truncated dimension")
    one_body = 0.5 * rep.k_sigma(K)[:d, :d]
    lifted = slater_lift(one_body, p)
    herm = float(np.max(np.abs(lifted - lifted.conj().T)))
    vec = 0.5 * np.einsum("ab,abef->ef", K, sigma_vec_numeric(rep.omega))
    lifted_vec = slater_lift(vec, p)
    witness = float(np.max(np.abs(lifted_vec - lifted_vec.conj().T))) if lifted_vec.size else 0.0
    passed = herm <= TOL_SVH and witness > WITNESS_FLOOR
    return CheckResult(f"svh_hermiticity_p{p}", passed, herm, TOL_SVH,
                       details={"vec_witness": witness, "witness_floor": WITNESS_FLOOR,
                                "sector_dim": lifted.shape[0]})


# ---------------------------------------------------------------------------
# vector and form representations

def sigma_vec_numeric(omega: np.ndarray) -> np.ndarray:
    """(Σ_vec^{ab})^e_f = −i(δ^a_f ω^{be} + δ^b_f ω^{ae}), indexed [a, b, e, f]."""
    d = omega.shape[0]
    I = np.eye(d)
    out = np.einsum("af,be->abef", I, omega) + np.einsum("bf,ae->abef", I, omega)
    return -1j * out


@dataclass(frozen=True)
class FiniteRepSet:
    omega: sp.Matrix
    sigma_vec: dict
    sigma_form: dict

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    def s_vec(self, K: sp.Matrix) -> sp.Matrix:
        """1 − (i/2)K_{ab}Σ_vec^{ab}, rows e, columns f."""
        acc = sp.zeros(self.dim)
        for (a, b), S in self.sigma_vec.items():
            acc += K[a, b] * S
        return sp.eye(self.dim) - sp.I / 2 * acc

    def s_form(self, K: sp.Matrix) -> sp.Matrix:
        """1 − (i/2)K_{ab}Σ_form^{ab}, rows f, columns e."""
        acc = sp.zeros(self.dim)
        for (a, b), S in self.sigma_form.items():
            acc += K[a, b] * S
        return sp.eye(self.dim) - sp.I / 2 * acc


def finite_reps(omega) -> FiniteRepSet:
    """Exact Σ_vec and Σ_form.

    ``sigma_vec[(a,b)][e,f]`` is (Σ_vec^{ab})^e_f; ``sigma_form[(a,b)][f,e]`` is
    (Σ_form^{ab})_f^e, so the two printed expressions compare entrywise.
    """
    w = sp.Matrix(np.asarray(omega, dtype=int).tolist())
    d = w.shape[0]
    delta = sp.eye(d)
    vec, form = {}, {}
    for a in range(d):
        for b in range(d):
            vec[(a, b)] = sp.Matrix(d, d, lambda e, f: -sp.I * (delta[a, f] * w[b, e] + delta[b, f] * w[a, e]))
            form[(a, b)] = sp.Matrix(d, d, lambda f, e: sp.I * (delta[a, f] * w[b, e] + delta[b, f] * w[a, e]))
    return FiniteRepSet(w, vec, form)


def finite_rep_sign_flip(reps: FiniteRepSet) -> bool:
    """(Σ_form^{ab})_f^e = −(Σ_vec^{ab})^e_f for equal labels e, f."""
    return all((reps.sigma_form[k].T + reps.sigma_vec[k]).is_zero_matrix for k in reps.sigma_vec)


def finite_rep_s_matrices(reps: FiniteRepSet) -> tuple[bool, bool]:
    """S_vec = 1 + ωK and S_form (as a matrix on α_e) = 1 − ωK, for symbolic symmetric K."""
    d = reps.dim
    syms = sp.symbols(f"k0:{d * d}")
    K = sp.Matrix(d, d, lambda i, j: syms[min(i, j) * d + max(i, j)])
    w = reps.omega
    vec_ok = (reps.s_vec(K) - (sp.eye(d) + w * K)).expand().is_zero_matrix
    # S_f^e = δ − ω^{ea}K_{af}: row f, column e of the stored matrix
    form_expected = sp.Matrix(d, d, lambda f, e: sp.KroneckerDelta(f, e) - sum(w[e, a] * K[a, f] for a in range(d)))
    form_ok = (reps.s_form(K) - form_expected).expand().is_zero_matrix
    return vec_ok, form_ok


def infinitesimal_symplectic_ratio(omega: np.ndarray, K: np.ndarray, scale: float = 1e-3) -> dict:
    """‖SᵀωS − ω‖ for S = 1 ± tωK at t and t/2, for vectors and forms."""
    out = {}
    for label, sign in (("vec", 1.0), ("form", -1.0)):
        r = [symplectic_residual(np.eye(len(K)) + sign * t * omega @ K, omega) for t in (scale, scale / 2)]
        out[label] = r[0] / r[1] if r[1] else float("inf")
    return out


def lie_consistency_trials(omega, trials: int, rng: np.random.Generator, max_degree: int = 3) -> int:
    """Count of random (V, H) where (i/2)K Σ_vec V = −∂h V and (i/2)K Σ_form α = ∂h α exactly."""
    from .forms import random_polynomial, phase_symbols
    w = sp.Matrix(np.asarray(omega, dtype=int).tolist())
    d = w.shape[0]
    n = d // 2
    xs = phase_symbols(n)
    reps = finite_reps(omega)
    ok = 0
    for _ in range(trials):
        H = random_polynomial(n, rng, max_degree).as_expr()
        V = sp.Matrix([random_polynomial(n, rng, max_degree).as_expr() for _ in range(d)])
        K = sp.hessian(H, xs)
        h = w * sp.Matrix([sp.diff(H, x) for x in xs])
        dh = sp.Matrix(d, d, lambda e, f: sp.diff(h[e], xs[f]))
        acc_v = sp.zeros(d)
        acc_f = sp.zeros(d)
        for (a, b) in reps.sigma_vec:
            acc_v += K[a, b] * reps.sigma_vec[(a, b)]
            acc_f += K[a, b] * reps.sigma_form[(a, b)]
        vec_ok = (sp.I / 2 * acc_v * V + dh * V).expand().is_zero_matrix
        # forms: Σ_e (Σ_form)_f^e α_e against Σ_e ∂_f h^e α_e
        form_ok = (sp.I / 2 * acc_f * V - dh.T * V).expand().is_zero_matrix
        ok += bool(vec_ok and form_ok)
    return ok


# ---------------------------------------------------------------------------
# densities from spinor pairs

def rho_from_psi(rep: FockRep, psi2: np.ndarray) -> np.ndarray:
    """ρ_ab = ½⟨ψ|γ_a⊗γ_b|ψ⟩ − ½(a↔b) for a two-index state ψ^{xy}."""
    psi2 = np.asarray(psi2, complex)
    if psi2.shape != (rep.dim, rep.dim):
        raise ValueError(f"psi must have shape {(rep.dim, rep.dim)}")
    gl = rep.gamma_lower
    # ⟨ψ|A⊗B|ψ⟩ = Σ conj(ψ_zw) A_zx ψ_xy B_wy
    G = np.einsum("zw,azx,xy,bwy->ab", psi2.conj(), gl, psi2, gl)
    return 0.5 * (G - G.T)


def random_psi2(rep: FockRep, rng: np.random.Generator, levels: int | None = None) -> np.ndarray:
    levels = rep.D - 4 if levels is None else levels
    mask = rep.low_mask(levels)
    psi = rng.normal(size=(rep.dim, rep.dim)) + 1j * rng.normal(size=(rep.dim, rep.dim))
    psi[~mask, :] = 0
    psi[:, ~mask] = 0
    return psi / np.linalg.norm(psi)


def rho_transform_residual(rep: FockRep, psi2: np.ndarray, K: np.ndarray, eps: float) -> float:
    M = metaplectic_operator(rep, K, eps)
    rho = rho_from_psi(rep, psi2)
    rho_new = rho_from_psi(rep, M @ psi2 @ M.T)
    S = s_form(rep, K, eps)
    return float(np.max(np.abs(rho_new - S.T @ rho @ S)))


def rho_transform_check(rep: FockRep, psi2: np.ndarray, K: np.ndarray, eps: float = 1e-3) -> CheckResult:
    r1 = rho_transform_residual(rep, psi2, K, eps)
    r2 = rho_transform_residual(rep, psi2, K, eps / 2)
    ratio = r1 / r2 if r2 > 0 else float("inf")
    return in_range(f"rho_transform_N{rep.N}_D{rep.D}", ratio, 3.5, 4.5, residual=r1, residual_half=r2)

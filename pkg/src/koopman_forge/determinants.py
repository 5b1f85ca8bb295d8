"""Discrete-time functional determinants and the regulated Gaussian integral.

With the constant ``det ∂_t`` stripped, ``det[∂_t ∓ G']`` becomes the
determinant of the causal matrix

    A_{jk} = δ_{jk} I ∓ Δt θ(t_j − t_k) G'_k,   θ(0) = θ0,

which is block lower triangular, so its determinant is the product of the
diagonal blocks ``det(I ∓ θ0 Δt G'_j)``.  The dense matrix is still built for
small grids as an independent route.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import ExtendedState, HamiltonianSystem, integrate
from .results import CheckResult, in_range, within

THETA_VALUES = (0.0, 0.5, 1.0)
DENSE_LIMIT = 600
TOL_CLOSED_FORM = 0.01
TOL_GAUSSIAN = 0.01


class SingularDeterminantError(ArithmeticError):
    def __init__(self, dt: float):
        super().__init__(f"causal matrix is singular at dt={dt:g}")
        self.dt = dt


@dataclass(frozen=True)
class TimeGrid:
    """Samples G'_j on M steps of size dt."""

    dt: float
    G: np.ndarray  # shape (M, d, d)

    def __post_init__(self):
        if self.G.ndim != 3 or self.G.shape[1] != self.G.shape[2]:
            raise ValueError("G must have shape (M, d, d)")
        if self.steps < 1:
            raise ValueError("need at least one step")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def steps(self) -> int:
        return self.G.shape[0]

    @property
    def T(self) -> float:
        return self.steps * self.dt

    @classmethod
    def constant(cls, G, T: float, steps: int) -> "TimeGrid":
        G = np.atleast_2d(np.asarray(G, float))
        return cls(T / steps, np.broadcast_to(G, (steps,) + G.shape).copy())

    @classmethod
    def from_system(cls, sys: HamiltonianSystem, phi0, T: float, steps: int) -> "TimeGrid":
        """G'_j = ωK(φ(t_j)) at t_j = jΔt, j = 0..M−1, along an RK4 trajectory."""
        dt = T / steps
        inner = max(1, int(math.ceil(dt / 1e-3)))
        z = np.zeros(sys.dim)
        traj = integrate(sys, ExtendedState(phi0, z, z), T, dt / inner, record_every=inner)
        return cls(dt, np.array([sys.generator(x) for x in traj.phi[:steps]]))


def causal_matrix(grid: TimeGrid, sign: int, theta0: float = 0.5) -> np.ndarray:
    """The dense (M·d)×(M·d) matrix δI ∓ Δt θ G'."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    M, d, _ = grid.G.shape
    A = np.eye(M * d)
    for j in range(M):
        for k in range(j + 1):
            w = theta0 if k == j else 1.0
            if w:
                A[j * d:(j + 1) * d, k * d:(k + 1) * d] += sign * grid.dt * w * grid.G[k]
    return A


def discrete_determinant(grid: TimeGrid, sign: int, theta0: float = 0.5, method: str = "auto") -> float:
    """det of the stripped causal operator; ``sign=-1`` is ∂_t − G', ``+1`` is ∂_t + G'."""
    if theta0 not in THETA_VALUES:
        raise ValueError(f"theta0 must be one of {THETA_VALUES}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    M, d, _ = grid.G.shape
    if method == "auto":
        method = "dense" if M * d <= DENSE_LIMIT else "block"
    if method == "dense":
        s, logdet = np.linalg.slogdet(causal_matrix(grid, sign, theta0))
    elif method == "block":
        blocks = np.eye(d) + sign * grid.dt * theta0 * grid.G
        signs, logs = np.linalg.slogdet(blocks)
        s, logdet = float(np.prod(signs)), float(np.sum(logs))
    else:
        raise ValueError(f"unknown method {method!r}")
    if s == 0:
        raise SingularDeterminantError(grid.dt)
    return float(s * math.exp(logdet))


def product_deviation(grid: TimeGrid, theta0: float = 0.5) -> float:
    return abs(discrete_determinant(grid, -1, theta0) * discrete_determinant(grid, +1, theta0) - 1.0)


def product_identity_check(sys: HamiltonianSystem, phi0, T: float = 1.0, steps: int = 100,
                           theta0: float = 0.5) -> CheckResult:
    """det(−)·det(+) − 1 halves when Δt halves."""
    d1 = product_deviation(TimeGrid.from_system(sys, phi0, T, steps), theta0)
    d2 = product_deviation(TimeGrid.from_system(sys, phi0, T, 2 * steps), theta0)
    ratio = d1 / d2 if d2 > 0 else float("inf")
    return in_range(f"det_product_{sys.name}_T{T:g}", ratio, 1.7, 2.5, deviation=d1, deviation_half=d2)


def causal_closed_form_error(grid: TimeGrid, sign: int) -> float:
    """Relative gap between det(∓) and exp(∓½∫tr G' dt)."""
    integral = grid.dt * float(np.sum(np.trace(grid.G, axis1=1, axis2=2)))
    target = math.exp(sign * 0.5 * integral)
    return abs(discrete_determinant(grid, sign, 0.5) / target - 1.0)


def causal_closed_form_check(g: float = 1.0, T: float = 1.0, steps: int = 10_000) -> CheckResult:
    """Synthetic G' = diag(g, 0): det(−) → e^{−gT/2}, det(+) → e^{+gT/2}."""
    grid = TimeGrid.constant(np.diag([g, 0.0]), T, steps)
    em = causal_closed_form_error(grid, -1)
    ep = causal_closed_form_error(grid, +1)
    return within("det_closed_form_synthetic", max(em, ep), TOL_CLOSED_FORM,
                  minus=discrete_determinant(grid, -1), plus=discrete_determinant(grid, +1),
                  target_minus=math.exp(-0.5 * g * T))


def refinement_table(sys: HamiltonianSystem, phi0, T: float, steps=(50, 100, 200, 400)) -> list[tuple]:
    return [(T / m, product_deviation(TimeGrid.from_system(sys, phi0, T, m))) for m in steps]


def write_refinement_csv(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dt", "deviation"])
        for dt, dev in rows:
            w.writerow([repr(dt), repr(dev)])
    return path


# ---------------------------------------------------------------------------
# Gaussian

def gaussian_inverse_det(A, eps: float) -> complex:
    """∫d^dx d^dy exp(i xᵀAy − ε(|x|² + |y|²)) = (2π)^d / √det(4ε²I + AᵀA)."""
    A = np.atleast_2d(np.asarray(A, float))
    d = A.shape[0]
    if A.shape != (d, d) or d not in (1, 2):
        raise ValueError("A must be a 1x1 or 2x2 matrix")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if np.linalg.det(A) <= 0:
        raise ValueError("A must have positive determinant")
    val = (2 * math.pi) ** d / math.sqrt(np.linalg.det(4 * eps**2 * np.eye(d) + A.T @ A))
    return complex(val)


def gaussian_by_quadratic_form(A, eps: float) -> complex:
    """Same integral from the 2d-dimensional complex quadratic form, (2π)^d/√det Q."""
    A = np.atleast_2d(np.asarray(A, float))
    d = A.shape[0]
    Q = np.block([[2 * eps * np.eye(d), -1j * A], [-1j * A.T, 2 * eps * np.eye(d)]])
    return complex((2 * math.pi) ** d / np.sqrt(np.linalg.det(Q)))


def gaussian_limit_error(A, eps: float) -> float:
    A = np.atleast_2d(np.asarray(A, float))
    target = (2 * math.pi) ** A.shape[0] / np.linalg.det(A)
    return float(abs(gaussian_inverse_det(A, eps) / target - 1.0))


def gaussian_check(A) -> CheckResult:
    A = np.atleast_2d(np.asarray(A, float))
    eps = 1e-3 * float(np.linalg.norm(A, 2))
    return within(f"gaussian_inverse_det_d{A.shape[0]}", gaussian_limit_error(A, eps), TOL_GAUSSIAN, eps=eps)

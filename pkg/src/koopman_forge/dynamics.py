"""Hamiltonian flow together with its Jacobi fields (π) and dual fields (ξ).

The joint system is

    φ̇ = ω∇H(φ),   π̇ = ωK(φ) π,   ξ̇ = −(ωK(φ))ᵀ ξ,   K = ∇∇H,

integrated with fixed-step classical RK4.  The tangent matrix obeys the same
linear equation as π.  Coordinates are ordered (q_1..q_n, p_1..p_n).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .results import CheckResult, in_range, within

# tolerances for dt = 1e-3 in double precision
TOL_MONODROMY = 1e-8
TOL_SYMPLECTIC = 1e-7
TOL_TRANSPORT = 1e-6
TOL_PAIRING = 1e-8
TOL_ENERGY = 1e-8
TOL_FORM_PAIRING = 1e-7
TOL_LINEAR_DIAGRAM = 1e-11


class DivergedError(RuntimeError):
    def __init__(self, t_last: float):
        super().__init__(f"integration produced non-finite values after t={t_last:g}")
        self.t_last = t_last


def omega_matrix(n: int) -> np.ndarray:
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


@dataclass(frozen=True)
class HamiltonianSystem:
    """Closed-form H with derivatives up to third order.

    ``d3`` returns the array ∂_a∂_b∂_cH.
    """

    name: str
    n: int
    H: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    d3: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def omega(self) -> np.ndarray:
        return omega_matrix(self.n)

    def vector_field(self, phi: np.ndarray) -> np.ndarray:
        return self.omega @ self.grad(phi)

    def generator(self, phi: np.ndarray) -> np.ndarray:
        """ωK(φ), the matrix driving π and the tangent map."""
        return self.omega @ self.hess(phi)


def _one_dof(name, V, dV, d2V, d3V, **params) -> HamiltonianSystem:
    def H(x):
        return 0.5 * x[1] ** 2 + V(x[0])

    def grad(x):
        return np.array([dV(x[0]), x[1]])

    def hess(x):
        return np.array([[d2V(x[0]), 0.0], [0.0, 1.0]])

    def d3(x):
        out = np.zeros((2, 2, 2))
        out[0, 0, 0] = d3V(x[0])
        return out

    return HamiltonianSystem(name, 1, H, grad, hess, d3, dict(params))


def system_library(name: str, **params) -> HamiltonianSystem:
    """harmonic (omega0), inverted (k), pendulum, double_well."""
    if name == "harmonic":
        w0 = float(params.get("omega0", 1.0))
        if w0 <= 0:
            raise ValueError("omega0 must be positive")
        return _one_dof(name, lambda q: 0.5 * w0**2 * q**2, lambda q: w0**2 * q,
                        lambda q: w0**2, lambda q: 0.0, omega0=w0)
    if name == "inverted":
        k = float(params.get("k", 1.0))
        if k <= 0:
            raise ValueError("k must be positive")
        return _one_dof(name, lambda q: -0.5 * k**2 * q**2, lambda q: -k**2 * q,
                        lambda q: -k**2, lambda q: 0.0, k=k)
    if name == "pendulum":
        return _one_dof(name, lambda q: -math.cos(q), math.sin, math.cos, lambda q: -math.sin(q))
    if name == "double_well":
        return _one_dof(name, lambda q: 0.25 * q**4 - 0.5 * q**2, lambda q: q**3 - q,
                        lambda q: 3 * q**2 - 1, lambda q: 6 * q)
    raise ValueError(f"unknown system {name!r}; expected harmonic, inverted, pendulum or double_well")


LIBRARY = ("harmonic", "inverted", "pendulum", "double_well")


@dataclass(frozen=True)
class ExtendedState:
    phi: np.ndarray
    pi: np.ndarray
    xi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("phi", "pi", "xi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite {name}")
            object.__setattr__(self, name, arr)
        if not (self.phi.shape == self.pi.shape == self.xi.shape):
            raise ValueError("phi, pi and xi must share a shape")


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    phi: np.ndarray
    pi: np.ndarray
    xi: np.ndarray
    tangent: np.ndarray | None
    meta: dict

    @property
    def final(self) -> ExtendedState:
        return ExtendedState(self.phi[-1], self.pi[-1], self.xi[-1], float(self.t[-1]))

    def to_csv(self, path) -> Path:
        d = self.phi.shape[1]
        header = (["t"] + [f"phi_{i}" for i in range(1, d + 1)]
                  + [f"pi_{i}" for i in range(1, d + 1)] + [f"xi_{i}" for i in range(1, d + 1)])
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in np.column_stack([self.t, self.phi, self.pi, self.xi]):
                w.writerow([repr(float(v)) for v in row])
        return path


def step_count(T: float, dt: float) -> tuple[int, float]:
    """Number of steps and the effective step; dt is shrunk to divide T exactly."""
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    steps = max(1, int(math.ceil(T / dt - 1e-9)))
    return steps, T / steps


def _rhs(sys: HamiltonianSystem, y: np.ndarray, d: int, with_tangent: bool) -> np.ndarray:
    phi = y[:d]
    A = sys.generator(phi)
    out = np.empty_like(y)
    out[:d] = sys.vector_field(phi)
    out[d:2 * d] = A @ y[d:2 * d]
    out[2 * d:3 * d] = -A.T @ y[2 * d:3 * d]
    if with_tangent:
        out[3 * d:] = (A @ y[3 * d:].reshape(d, d)).ravel()
    return out


def integrate(sys: HamiltonianSystem, s0: ExtendedState, T: float, dt: float,
              tangent: bool = False, record_every: int = 1) -> Trajectory:
    """RK4 on (φ, π, ξ[, tangent]).  If T/dt is not an integer the step is shrunk."""
    steps, h = step_count(T, dt)
    d = sys.dim
    y = np.concatenate([s0.phi, s0.pi, s0.xi] + ([np.eye(d).ravel()] if tangent else []))
    keep = list(range(0, steps + 1, record_every))
    if keep[-1] != steps:
        keep.append(steps)
    rows = np.empty((len(keep), y.size))
    rows[0] = y
    k_out = 1
    for i in range(1, steps + 1):
        k1 = _rhs(sys, y, d, tangent)
        k2 = _rhs(sys, y + 0.5 * h * k1, d, tangent)
        k3 = _rhs(sys, y + 0.5 * h * k2, d, tangent)
        k4 = _rhs(sys, y + h * k3, d, tangent)
        y_new = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y_new)):
            raise DivergedError(s0.t + (i - 1) * h)
        y = y_new
        if k_out < len(keep) and keep[k_out] == i:
            rows[k_out] = y
            k_out += 1
    times = s0.t + h * np.asarray(keep, dtype=float)
    tan = rows[:, 3 * d:].reshape(-1, d, d) if tangent else None
    meta = {"method": "rk4", "dt": h, "dt_requested": dt, "steps": steps, "system": sys.name}
    return Trajectory(times, rows[:, :d], rows[:, d:2 * d], rows[:, 2 * d:3 * d], tan, meta)


def flow(sys: HamiltonianSystem, phi0, T: float, dt: float) -> np.ndarray:
    d = sys.dim
    z = np.zeros(d)
    return integrate(sys, ExtendedState(phi0, z, z), T, dt, record_every=10**9).phi[-1]


def tangent_map(sys: HamiltonianSystem, phi0, T: float, dt: float) -> np.ndarray:
    d = sys.dim
    z = np.zeros(d)
    traj = integrate(sys, ExtendedState(phi0, z, z), T, dt, tangent=True, record_every=10**9)
    return traj.tangent[-1]


def symplectic_defect(M: np.ndarray, omega: np.ndarray) -> float:
    return float(np.linalg.norm(M.T @ omega @ M - omega))


# ---------------------------------------------------------------------------
# checks

def derivative_fd_error(sys: HamiltonianSystem, rng: np.random.Generator, points: int = 100,
                        h: float = 1e-5, scale: float = 1.5) -> float:
    """Largest relative mismatch of grad/Hessian/third derivative against central differences."""
    d = sys.dim
    worst = 0.0
    for _ in range(points):
        x = rng.uniform(-scale, scale, d)
        fd_g = np.empty(d)
        fd_h = np.empty((d, d))
        fd_3 = np.empty((d, d, d))
        for a in range(d):
            e = np.zeros(d)
            e[a] = h
            fd_g[a] = (sys.H(x + e) - sys.H(x - e)) / (2 * h)
            fd_h[:, a] = (sys.grad(x + e) - sys.grad(x - e)) / (2 * h)
            fd_3[:, :, a] = (sys.hess(x + e) - sys.hess(x - e)) / (2 * h)
        for exact, approx in ((sys.grad(x), fd_g), (sys.hess(x), fd_h), (sys.d3(x), fd_3)):
            err = np.max(np.abs(exact - approx)) / max(1.0, np.max(np.abs(exact)))
            worst = max(worst, float(err))
    return worst


def harmonic_closed_form(phi0, t: float, omega0: float = 1.0) -> np.ndarray:
    q0, p0 = phi0
    c, s = math.cos(omega0 * t), math.sin(omega0 * t)
    return np.array([q0 * c + p0 / omega0 * s, -q0 * omega0 * s + p0 * c])


def monodromy_check(T: float = 2 * math.pi, dt: float = 1e-3) -> CheckResult:
    sys = system_library("harmonic")
    s0 = ExtendedState([1.0, 0.0], [1.0, 0.0], [0.0, 1.0])
    traj = integrate(sys, s0, T, dt, tangent=True, record_every=10**9)
    err = max(np.max(np.abs(traj.phi[-1] - s0.phi)), np.max(np.abs(traj.pi[-1] - s0.pi)),
              np.max(np.abs(traj.tangent[-1] - np.eye(2))))
    return within("harmonic_monodromy", err, TOL_MONODROMY, dt_effective=traj.meta["dt"])


def convergence_ratio(dt: float = 0.02, T: float = 2.0) -> float:
    sys = system_library("harmonic")
    phi0 = np.array([1.0, 0.3])
    exact = harmonic_closed_form(phi0, T)
    e1 = np.linalg.norm(flow(sys, phi0, T, dt) - exact)
    e2 = np.linalg.norm(flow(sys, phi0, T, dt / 2) - exact)
    return float(e1 / e2)


DEFAULT_STARTS = {
    "harmonic": [1.0, 0.0],
    "inverted": [0.3, -0.2],
    "pendulum": [1.0, 0.5],
    "double_well": [0.5, 0.3],
}


def symplecticity_check(name: str, T: float = 5.0, dt: float = 1e-3) -> CheckResult:
    sys = system_library(name)
    M = tangent_map(sys, np.array(DEFAULT_STARTS[name]), T, dt)
    # relative to |M|^2 for growing systems; unit scale otherwise
    scale = max(1.0, float(np.linalg.norm(M)) ** 2)
    return within(f"symplectic_{name}", symplectic_defect(M, sys.omega) / scale, TOL_SYMPLECTIC,
                  det=float(np.linalg.det(M)))


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def transport_check(sys: HamiltonianSystem, s0: ExtendedState, T: float, dt: float) -> CheckResult:
    """π(T) = Tπ(0), ξ(T) = T⁻ᵀξ(0) and ξ·π constant along the run."""
    traj = integrate(sys, s0, T, dt, tangent=True, record_every=max(1, int(round(0.01 / dt))))
    M = traj.tangent[-1]
    pi_err = _rel(traj.pi[-1], M @ s0.pi)
    xi_err = _rel(traj.xi[-1], np.linalg.solve(M.T, s0.xi))
    pairing = np.einsum("ij,ij->i", traj.pi, traj.xi)
    size = np.max(np.abs(traj.pi) * np.abs(traj.xi), axis=1).max()
    drift = float(np.max(np.abs(pairing - pairing[0])) / max(1.0, size))
    passed = pi_err <= TOL_TRANSPORT and xi_err <= TOL_TRANSPORT and drift <= TOL_PAIRING
    return CheckResult(f"transport_{sys.name}", passed, max(pi_err, xi_err), TOL_TRANSPORT,
                       details={"pi_error": pi_err, "xi_error": xi_err, "pairing_drift": drift,
                                "pairing_tolerance": TOL_PAIRING})


def energy_drift(sys: HamiltonianSystem, phi0, T: float = 10.0, dt: float = 1e-3) -> float:
    d = sys.dim
    z = np.zeros(d)
    traj = integrate(sys, ExtendedState(phi0, z, z), T, dt, record_every=100)
    E = np.array([sys.H(x) for x in traj.phi])
    scale = max(abs(E[0]), 1e-300)
    # the quadratic inverted potential cancels two terms of size |φ|²
    if sys.name == "inverted":
        scale = max(scale, float(np.max(np.sum(traj.phi**2, axis=1))))
    return float(np.max(np.abs(E - E[0])) / scale)


def brs_residual(sys: HamiltonianSystem, phi0, pi0, T: float, dt: float, eps: float) -> float:
    """|flow_T(φ0 + επ0) − (flow_T(φ0) + επ(T))|."""
    phi0 = np.asarray(phi0, float)
    pi0 = np.asarray(pi0, float)
    A = flow(sys, phi0 + eps * pi0, T, dt)
    traj = integrate(sys, ExtendedState(phi0, pi0, np.zeros_like(pi0)), T, dt, record_every=10**9)
    B = traj.phi[-1] + eps * traj.pi[-1]
    return float(np.linalg.norm(A - B))


LINEAR = ("harmonic", "inverted")


def brs_diagram_check(sys: HamiltonianSystem, phi0, pi0, T: float = 2.0, dt: float = 1e-3,
                      eps: float = 1e-5) -> CheckResult:
    """Residual ratio under halving ε; should sit near 4 for a nonlinear flow.

    Linear flows close the diagram exactly, so for them the residual itself is
    compared against rounding level instead.
    """
    if sys.name in LINEAR:
        return brs_linear_check(sys.name, phi0, pi0, T, dt, eps)
    r1 = brs_residual(sys, phi0, pi0, T, dt, eps)
    r2 = brs_residual(sys, phi0, pi0, T, dt, eps / 2)
    ratio = r1 / r2 if r2 > 0 else float("inf")
    return in_range(f"brs_diagram_{sys.name}", ratio, 3.5, 4.5, residual=r1, residual_half=r2, eps=eps)


def brs_linear_check(name: str = "harmonic", phi0=(1.0, 0.0), pi0=(0.4, -0.7), T: float = 2.0,
                     dt: float = 1e-3, eps: float = 1e-3) -> CheckResult:
    sys = system_library(name)
    r = brs_residual(sys, phi0, pi0, T, dt, eps)
    return within(f"brs_diagram_{name}", r, TOL_LINEAR_DIAGRAM, eps=eps)


def growth_rate(sys: HamiltonianSystem, phi0, pi0, window: tuple[float, float],
                dt: float = 1e-3) -> float:
    """Least-squares slope of log|π(t)| over the window."""
    t0, t1 = window
    traj = integrate(sys, ExtendedState(phi0, pi0, np.zeros(sys.dim)), t1, dt,
                     record_every=max(1, int(round(0.01 / dt))))
    sel = traj.t >= t0 - 1e-12
    norms = np.linalg.norm(traj.pi[sel], axis=1)
    if np.any(norms < 1e-300):
        raise FloatingPointError("|π| underflowed inside the growth window")
    slope, _ = np.polyfit(traj.t[sel], np.log(norms), 1)
    return float(slope)


def form_transport_drift(sys: HamiltonianSystem, phi0, pi0, F0, T: float = 5.0,
                         dt: float = 1e-3) -> float:
    """A 1-form's components, carried along the flow, keep F·π fixed.

    The transported components solve Ḟ = −(ωK)ᵀF, which is the ξ equation,
    so the pairing is computed from an independent run seeded with ``F0``.
    """
    traj = integrate(sys, ExtendedState(phi0, pi0, F0), T, dt, record_every=10)
    pairing = np.einsum("ij,ij->i", traj.pi, traj.xi)
    size = np.max(np.abs(traj.pi) * np.abs(traj.xi), axis=1).max()
    return float(np.max(np.abs(pairing - pairing[0])) / max(1.0, size))

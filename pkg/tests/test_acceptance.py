"""Acceptance criteria: one PASS/FAIL line per criterion, with the stated tolerances."""

import json
import math
import subprocess
import sys
import time

import numpy as np

from koopman_forge import determinants as det
from koopman_forge import dynamics as dyn
from koopman_forge import forms
from koopman_forge import metaplectic as meta
from koopman_forge import registry
from koopman_forge.registry import RunContext, SuiteConfig

SEED = 20240607


def report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[ACCEPTANCE] {'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, detail


def run_checks(ids, suite="all"):
    ctx = RunContext(SuiteConfig(suite=suite, seed=SEED))
    by_id = {c.check_id: c for c in registry.REGISTRY}
    return {i: by_id[i].fn(ctx) for i in ids}


def test_symbolic_identities(capsys):
    registry._conv.cache_clear()
    registry._verdicts.cache_clear()
    ids = ["bfa_hermiticity", "lie_bracket", "conserve_Qg", "conserve_N", "conserve_Nbar", "brs_anomaly",
           "antibrs_anomaly", "susy_algebra", "q1_action", "q1_square", "k_charges_vanish",
           "anomaly_phi_commute", "multiform_hermiticity"]
    t0 = time.perf_counter()
    res = run_checks(ids)
    elapsed = time.perf_counter() - t0
    bad = [i for i, r in res.items() if not r.passed]
    report(capsys, "symbolic identity suite (n = 1, 2, exact)", not bad and elapsed < 60,
           f"{len(ids) - len(bad)}/{len(ids)} exact identities, {elapsed:.1f} s (limit 60 s)"
           + (f", failed {bad}" if bad else ""))


def test_form_calculus_equivalence(capsys):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    counts = {}
    for n in (1, 2):
        for m in range(2 * n + 1):
            counts[(n, m)] = forms.equivalence_trials(n, m, 20, rng)
    literal = run_checks(["one_form_bracket", "two_form_bracket", "form_leibniz"])
    elapsed = time.perf_counter() - t0
    ok_pairs = all(ok == total >= 20 for ok, total in counts.values())
    ok_lit = all(r.passed for r in literal.values())
    pairs = sum(t for _, t in counts.values())
    report(capsys, "form calculus: commutator route = direct Lie derivative",
           ok_pairs and ok_lit and elapsed < 120,
           f"{pairs} random pairs over {len(counts)} (n, m) cells all equal, "
           f"printed brackets and Leibniz {'hold' if ok_lit else 'FAIL'}, {elapsed:.1f} s (limit 120 s)")


def test_dynamics(capsys):
    parts = {}
    M = dyn.tangent_map(dyn.system_library("harmonic"), [1.0, 0.0], 2 * math.pi, 1e-3)
    parts["monodromy"] = (float(np.max(np.abs(M - np.eye(2)))), 1e-8)
    sym = []
    for name in dyn.LIBRARY:
        sys_ = dyn.system_library(name)
        T = dyn.tangent_map(sys_, dyn.DEFAULT_STARTS[name], 5.0, 1e-3)
        sym.append(dyn.symplectic_defect(T, sys_.omega))
    parts["symplecticity"] = (max(sym), 1e-7)
    tr = [dyn.transport_check(dyn.system_library(name),
                              dyn.ExtendedState(dyn.DEFAULT_STARTS[name], [0.3, 1.0], [1.0, -0.2]), 5.0, 1e-3)
          for name in dyn.LIBRARY]
    parts["pi_transport"] = (max(r.details["pi_error"] for r in tr), 1e-6)
    parts["pairing_drift"] = (max(r.details["pairing_drift"] for r in tr), 1e-8)
    growth = [abs(dyn.growth_rate(dyn.system_library("inverted", k=k), [0.0, 0.0], [1.0, 0.0], (2.0, 6.0)) - k) / k
              for k in (1.0, 2.0)]
    parts["growth_rate_rel"] = (max(growth), 0.01)
    ratios = [dyn.brs_diagram_check(dyn.system_library(name), dyn.DEFAULT_STARTS[name], [0.4, -0.7]).value
              for name in dyn.LIBRARY if name not in dyn.LINEAR]
    parts["brs_ratio_dev"] = (max(abs(r - 4) for r in ratios), 0.5)
    ok = all(v <= tol for v, tol in parts.values())
    report(capsys, "dynamics", ok, ", ".join(f"{k} {v:.2e} (tol {tol:g})" for k, (v, tol) in parts.items()))


def test_metaplectic(capsys):
    parts = {}
    clif, comm, herm, unit, inter = [], [], [], [], []
    rng = np.random.default_rng(SEED)
    for N, D in ((1, 8), (2, 6)):
        rep = meta.build_fock(N, D)
        clif.append(meta.clifford_check(rep).value)
        comm.append(meta.sigma_gamma_commutator(rep).value)
        herm.append(meta.hermiticity_residual(rep))
        K = rng.normal(size=(2 * N, 2 * N))
        K = 0.5 * (K + K.T)
        unit.append(meta.unitarity_residual(rep, K, 0.5))
        inter.append(abs(meta.intertwine_check(rep, K).value - 4))
    parts["clifford"] = (max(clif), 1e-12)
    parts["sigma_gamma"] = (max(comm), 1e-12)
    parts["hermiticity"] = (max(herm), 1e-14)
    parts["unitarity"] = (max(unit), 1e-10)
    parts["intertwine_ratio_dev"] = (max(inter), 0.5)
    jac = []
    for name, (D, T) in registry.JACOBI_SETUP.items():
        rep = meta.build_fock(1, D)
        eta0 = meta.random_low_state(rep, np.random.default_rng(9))
        jac.append(meta.jacobi_bilinear_deviation(rep, dyn.system_library(name), dyn.DEFAULT_STARTS[name],
                                                  eta0, T, 1e-3)[0])
    parts["jacobi_bilinear_rel"] = (max(jac), 1e-6)
    svh, wit = [], []
    for p, N in ((1, 1), (2, 2)):
        K = rng.normal(size=(2 * N, 2 * N))
        r = meta.svh_hermiticity_check(meta.build_fock(N, 6), 0.5 * (K + K.T), p)
        svh.append(r.value)
        wit.append(r.details["vec_witness"])
    parts["svh_hermiticity"] = (max(svh), 1e-12)
    ok = all(v <= tol for v, tol in parts.values()) and min(wit) > 1e-3
    report(capsys, "metaplectic", ok, ", ".join(f"{k} {v:.2e} (tol {tol:g})" for k, (v, tol) in parts.items())
           + f", vec witness min {min(wit):.3f} (> 1e-3)")


def test_determinants(capsys):
    ratios = []
    for name in dyn.LIBRARY:
        for T in (1.0, 2.0):
            ratios.append(det.product_identity_check(dyn.system_library(name), dyn.DEFAULT_STARTS[name], T, 100)
                          .value)
    closed = det.causal_closed_form_check(1.0, 1.0, 10_000)
    gauss = [det.gaussian_check(A) for A in ([[1.5]], [[2.0, 0.5], [-0.3, 1.0]], np.eye(2))]
    ok = (all(1.7 <= r <= 2.5 for r in ratios) and closed.value <= 0.01
          and all(g.value <= 0.01 for g in gauss))
    report(capsys, "determinant identities", ok,
           f"halving ratios {min(ratios):.3f}..{max(ratios):.3f} (first order: 2), "
           f"closed form rel err {closed.value:.2e} at M = 1e4, "
           f"Gaussian rel err {max(g.value for g in gauss):.2e} (tol 1e-2)")


def test_end_to_end(capsys, tmp_path):
    cmd = [sys.executable, "-m", "koopman_forge.cli", "run", "--suite", "all", "--quiet"]
    t0 = time.perf_counter()
    first = subprocess.run(cmd + ["--report", str(tmp_path / "a.json")], capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    second = subprocess.run(cmd + ["--report", str(tmp_path / "b.json")], capture_output=True, text=True)
    a, b = (tmp_path / "a.json").read_bytes(), (tmp_path / "b.json").read_bytes()
    rep = json.loads(a)
    anchored = all(e["paperRef"] for e in rep["checks"])
    ok = (first.returncode == 0 and second.returncode == 0 and elapsed < 300 and a == b
          and len(rep["checks"]) >= 30 and anchored)
    report(capsys, "end-to-end forge run --suite all", ok,
           f"exit {first.returncode}, {elapsed:.0f} s (limit 300 s), {len(rep['checks'])} checks, "
           f"anchors {'present' if anchored else 'MISSING'}, reports {'identical' if a == b else 'DIFFER'}")

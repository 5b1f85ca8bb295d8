"""Figures rendered from the run's CSV tables (Agg backend, PNG files)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _columns(header, rows, *names):
    idx = [header.index(n) for n in names]
    return [np.array([float(r[i]) for r in rows]) for i in idx]


def _growth(header, rows, ax):
    t, y = _columns(header, rows, "t", "log_norm_pi")
    ax.plot(t, y, label="log|π(t)|")
    ax.plot(t, t - t[-1] + y[-1], "--", label="slope 1")
    ax.set_xlabel("t")
    ax.set_ylabel("log |π|")
    ax.set_title("Jacobi field growth, inverted oscillator")


def _brs(header, rows, ax):
    for name in sorted({r[0] for r in rows}):
        sub = [r for r in rows if r[0] == name]
        eps = np.array([float(r[1]) for r in sub])
        res = np.array([float(r[2]) for r in sub])
        ax.loglog(eps, res, "o-", label=name)
    ax.loglog(eps, res[0] * (eps / eps[0]) ** 2, "k--", label="ε²")
    ax.set_xlabel("ε")
    ax.set_ylabel("residual")
    ax.set_title("flow of shifted start vs shifted flow")


def _refinement(header, rows, ax):
    dt, dev = _columns(header, rows, "dt", "deviation")
    ax.loglog(dt, dev, "o-", label="|det(−)det(+) − 1|")
    ax.loglog(dt, dev[0] * dt / dt[0], "k--", label="Δt")
    ax.set_xlabel("Δt")
    ax.set_ylabel("deviation")
    ax.set_title("determinant product, pendulum")


def _jacobi(header, rows, ax):
    t = np.array([float(r[0]) for r in rows])
    for j, name in enumerate(header[1:], start=1):
        ax.plot(t, [float(r[j]) for r in rows], label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("η†γη")
    ax.set_title("spinor bilinear, pendulum")


def _equivalence(header, rows, ax):
    labels = [f"n={r[0]} m={r[1]}" for r in rows]
    ax.bar(labels, [int(r[2]) for r in rows])
    ax.set_ylabel("matching pairs")
    ax.set_title("commutator vs direct Lie derivative")
    ax.tick_params(axis="x", rotation=45)


RENDERERS = {
    "growth_inverted": _growth,
    "brs_residuals": _brs,
    "det_refinement_pendulum": _refinement,
    "jacobi_bilinear_pendulum": _jacobi,
    "form_equivalence": _equivalence,
}


def render(tables: dict, directory) -> list[Path]:
    directory = Path(directory)
    written = []
    for name, (header, rows) in sorted(tables.items()):
        draw = RENDERERS.get(name)
        if draw is None or not rows:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        draw(header, rows, ax)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize="small")
        fig.tight_layout()
        path = directory / f"{name}.png"
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written

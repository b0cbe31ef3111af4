"""Report figures written next to the CLI's delimited output (Agg backend, no display)."""

import os
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fgsim-", suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, dpi=120, format="png", metadata={"Software": None})
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)


def trajectory_figure(traj, path):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6))
    for i, name in enumerate("xyz"):
        ax1.plot(traj.t, traj.n[:, i], lw=0.8, label=f"n_{name}")
    ax1.set_ylabel("spin direction")
    ax1.set_xlabel("t (s)")
    ax1.legend(loc="upper right")
    if traj.model.kind.value == "levitated":
        ax2.plot(traj.t, traj.r[:, 2] * 1e6, lw=0.8)
        ax2.set_ylabel("height (um)")
        ax2.set_xlabel("t (s)")
    else:
        ax2.plot(traj.n[:, 0], traj.n[:, 1], lw=0.5)
        ax2.set_xlabel("n_x")
        ax2.set_ylabel("n_y")
        ax2.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    _save(fig, path)


def sweep_figure(rows, omega_I, path):
    w = np.array([r.omega_L for r in rows]) / omega_I
    fig, ax = plt.subplots(figsize=(6.5, 5))
    for idx, color, label in ((0, "tab:green", "lower FG line"), (1, "tab:red", "upper FG line")):
        pts = [(x, r.fg_peaks[idx][0] / omega_I) for x, r in zip(w, rows) if len(r.fg_peaks) > idx]
        if pts:
            ax.loglog(*zip(*pts), "o-", ms=3, color=color, label=label)
    pts = [(x, r.brick_peak[0] / omega_I) for x, r in zip(w, rows) if r.brick_peak]
    if pts:
        ax.loglog(*zip(*pts), "--", color="tab:blue", label="brick")
    ax.loglog(w, np.sqrt(w), ":", color="grey", label="sqrt(omega_L omega_I)")
    ax.axhline(1.0, color="k", ls="--", lw=0.8)
    ax.set_xlabel("omega_L / omega_I")
    ax.set_ylabel("line frequency / omega_I")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def suppression_figure(points, path):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ok = [(p.radius, p.ratio) for p in points if np.isfinite(p.ratio)]
    if ok:
        ax.loglog(*zip(*ok), "o-", ms=3)
    ax.set_xlabel("radius (m)")
    ax.set_ylabel("free / levitated precession rate")
    fig.tight_layout()
    _save(fig, path)


def noise_figure(noise, path, t_min=1e-3, t_max=1e7):
    t = np.logspace(np.log10(t_min), np.log10(t_max), 200)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.loglog(t, [noise.delta_omega_col(x) for x in t], label="gas collisions")
    ax.loglog(t, [noise.delta_omega_det(x) for x in t], label="SQUID detection")
    ax.set_xlabel("integration time (s)")
    ax.set_ylabel("frequency uncertainty (rad/s)")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def exclusion_figure(curve, path):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ok = np.isfinite(curve.min_coupling)
    ax.loglog(curve.masses[ok], curve.min_coupling[ok], "r:", lw=2)
    ax.set_xlabel("boson mass (eV)")
    ax.set_ylabel("minimum detectable coupling")
    fig.tight_layout()
    _save(fig, path)

"""Matplotlib renderings of the data the CLI writes."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Arc as ArcPatch  # noqa: E402
from matplotlib.patches import Circle, Ellipse  # noqa: E402

STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
}
LEG_COLORS = {"short": "tab:green", "long": "tab:blue", "hyp": "tab:red"}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # no software or date stamps, so reruns give identical bytes
    fig.savefig(path, metadata={"Software": None} if path.suffix == ".png" else {"Date": None})
    plt.close(fig)
    return path


def _degrees_axes(ax, lim=180):
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.set_xlabel(r"$\xi$ (deg)")
    ax.set_ylabel(r"$\eta$ (deg)")


def plot_curvature(xi, eta, K, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.2, 4.6))
        tc = ax.tricontourf(xi, eta, K, levels=np.linspace(-11 / 3, -1, 23), cmap="viridis", extend="both")
        ax.tricontour(xi, eta, K, levels=[-50 / 21], colors="w", linewidths=0.8)
        fig.colorbar(tc, ax=ax, label="Gaussian curvature")
        _degrees_axes(ax)
        return _save(fig, path)


def plot_metric_ellipses(rows: Sequence[tuple], path, scale: float = 0.05):
    """rows of (xi_deg, eta_deg, semi_major, semi_minor, tilt_rad); ellipses shrunk by scale."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        for xi, eta, a, b, tilt in rows:
            ax.add_patch(Ellipse((xi, eta), 2 * scale * np.degrees(a), 2 * scale * np.degrees(b),
                                 angle=np.degrees(tilt), fill=False, lw=0.6))
        _degrees_axes(ax)
        return _save(fig, path)


def plot_boundaries(loops, path):
    """Traced tract boundary loci, coloured by loop kind."""
    from .loops import loop_kind

    colors = {"short": "tab:green", "hypot-long": "tab:blue"}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        for lp in loops:
            pts = np.degrees(np.array([(p[0], p[1]) for p in lp.points]))
            # break the polyline where it wraps across the chart edge
            jump = np.where(np.abs(np.diff(pts, axis=0)).max(axis=1) > 90)[0]
            for seg in np.split(pts, jump + 1):
                ax.plot(seg[:, 0], seg[:, 1], lw=0.7, color=colors.get(loop_kind(lp.iso), "k"))
        _degrees_axes(ax)
        return _save(fig, path)


def plot_chart(grid: np.ndarray, tract=None, path=None):
    """Isothermal images of a dot grid; grid columns xi, eta, u, v."""
    with plt.rc_context(STYLE):
        fig, (a0, a1) = plt.subplots(1, 2, figsize=(9, 4.4))
        a0.plot(grid[:, 0], grid[:, 1], ".", ms=1.5, color="0.3")
        _degrees_axes(a0)
        a1.plot(grid[:, 2], grid[:, 3], ".", ms=1.5, color="0.3")
        if tract is not None:
            for name, w in tract.images.items():
                a1.plot(w.real, w.imag, color=LEG_COLORS[name], lw=1.2, label=name)
            a1.plot(tract.M.real, tract.M.imag, "k+")
            a1.legend(frameon=False)
        a1.set_aspect("equal")
        a1.set_xlabel("u")
        a1.set_ylabel("v")
        return _save(fig, path)


def _draw_geodesic(ax, p: complex, q: complex, **kw):
    from .hyperbolic import Geodesic

    g = Geodesic.through(p, q)
    if g.center is None:
        ax.plot([p.real, q.real], [p.imag, q.imag], **kw)
        return
    a1, a2 = (np.degrees(np.angle(z - g.center)) for z in (p, q))
    if (a2 - a1) % 360 > 180:
        a1, a2 = a2, a1
    ax.add_patch(ArcPatch((g.center.real, g.center.imag), 2 * g.radius, 2 * g.radius,
                          theta1=a1, theta2=a2, fill=False, **kw))


def plot_tiling(tiling, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 6))
        ax.add_patch(Circle((0, 0), 1, fill=False, lw=0.8))
        for t in tiling.tracts:
            for name, (a, b) in (("short", (t.pi2, t.pi4)), ("long", (t.pi2, t.pi5)), ("hyp", (t.pi4, t.pi5))):
                _draw_geodesic(ax, a, b, color=LEG_COLORS[name], lw=0.5)
        ax.set_xlim(-1.02, 1.02)
        ax.set_ylim(-1.02, 1.02)
        ax.set_aspect("equal")
        ax.axis("off")
        return _save(fig, path)


def plot_fit(reports, path):
    """log10 dev against degree, with the geometric trend line fitted above d = 10."""
    d = np.array([r.degree for r in reports])
    dev = np.array([r.dev for r in reports])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.6))
        ax.plot(d, np.log10(dev), "o", ms=3)
        sel = (d >= 10) & (dev > 1e-13)
        if sel.sum() >= 2:
            k, c = np.polyfit(d[sel], np.log10(dev[sel]), 1)
            ax.plot(d, k * d + c, "--", lw=0.8, label=f"factor {10 ** -k:.2f} per degree")
            ax.legend(frameon=False)
        ax.set_xlabel("degree d")
        ax.set_ylabel(r"$\log_{10}$ dev")
        return _save(fig, path)


def plot_scale(z: np.ndarray, s: np.ndarray, path, target=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.8))
        sc = ax.scatter(z.real, z.imag, c=s, s=10, cmap="plasma")
        if target is not None:
            for name, (a, b) in (("short", (target.pi2, target.pi4)), ("long", (target.pi2, target.pi5)),
                                 ("hyp", (target.pi4, target.pi5))):
                _draw_geodesic(ax, a, b, color=LEG_COLORS[name], lw=1)
        fig.colorbar(sc, ax=ax, label="scale factor s")
        ax.set_aspect("equal")
        return _save(fig, path)

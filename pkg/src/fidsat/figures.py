"""Static SVG figures from a completed experiment result.

Three panels mirror the reference presentation: the log-log saturation
curve with its power-law estimate and strong-perturbation floor, the
semi-log fidelity decay against delta^2 n, and the semi-log LDOS with its
fitted Lorentzian. Output bytes are deterministic for fixed input.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .analysis import ensemble_beta, strong_perturbation_floor
from .errors import FidsatError
from .experiment import mean_curve

# stable ids inside the SVG output
matplotlib.rcParams["svg.hashsalt"] = "fidsat"
_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}}


def _finish(fig, path):
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def saturation_figure(result, path):
    """Log-log F_inf vs delta with the C/(delta^2 lam2 N) line and floor."""
    estimators = result.config.estimators
    curves = {est: mean_curve(result, est) for est in estimators}
    if not any(len(c.deltas) for c in curves.values()):
        raise FidsatError("result holds no saturation data")

    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    markers = {"ipr": "o", "time-average": "x"}
    for est, curve in curves.items():
        ax.loglog(curve.deltas, curve.f_inf, markers.get(est, "s"),
                  mfc="none", label=est)

    some_curve = next(iter(curves.values()))
    beta = ensemble_beta(result.config.ensemble)
    floor = strong_perturbation_floor(beta, result.config.dim)
    ax.axhline(floor, color="k", lw=1.0,
               label=f"floor (4-beta)/N = {floor:.2e}")

    for fit in result.fits:
        if fit.model == "power-law" and len(some_curve.deltas) > 1:
            c = fit.params["c_pinned"]
            d = np.geomspace(some_curve.deltas.min(), some_curve.deltas.max(), 64)
            ax.loglog(d, c / (d**2 * result.lambda_sq * result.config.dim),
                      "--", lw=1.0,
                      label=f"C/(d^2 lam2 N), C={c:.2f}")
            break

    ax.set_xlabel(r"perturbation strength $\delta$")
    ax.set_ylabel(r"$F_\infty$")
    ax.set_title(f"{result.config.ensemble}, N={result.config.dim}")
    ax.legend(fontsize=7)
    return _finish(fig, path)


def decay_figure(result, path):
    """Semi-log eigenstate-averaged F(n) against delta^2 n."""
    if not result.series:
        raise FidsatError("result holds no fidelity series")
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    for delta in sorted(result.series):
        f = result.series[delta]
        n = np.arange(len(f))
        ax.semilogy(delta**2 * n, f, lw=1.0, label=f"delta={delta:g}")
    ax.set_xlim(0, None)
    ax.set_xlabel(r"$\delta^2 n$")
    ax.set_ylabel(r"$F(n)$")
    ax.set_title(f"{result.config.ensemble}, N={result.config.dim}, "
                 "first seed, eigenstate-averaged")
    ax.legend(fontsize=7)
    return _finish(fig, path)


def ldos_figure(result, path):
    """Semi-log LDOS histograms with the fitted Lorentzian overlay."""
    if not result.ldos:
        raise FidsatError("result holds no LDOS data")
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    for delta in sorted(result.ldos):
        hist = result.ldos[delta]
        positive = hist.weights > 0
        ax.semilogy(hist.centers[positive], hist.weights[positive],
                    ".", ms=3, label=f"delta={delta:g}")
    # overlay the fit for the last delta only, to keep the panel readable
    last = result.ldos[sorted(result.ldos)[-1]]
    if last.fitted_width:
        x = last.centers
        model = last.fitted_width / (x**2 + 0.25 * last.fitted_width**2)
        model = model / model.sum()
        ax.semilogy(x, model, "k-", lw=1.0,
                    label=f"Lorentzian, width {last.fitted_width:.3g}")
    ax.set_xlabel(r"$\phi' - \phi$")
    ax.set_ylabel("LDOS weight")
    ax.set_title(f"{result.config.ensemble}, N={result.config.dim}")
    ax.legend(fontsize=7)
    return _finish(fig, path)


def emit_figures(result, output_dir):
    """Render the three panels; returns the file paths."""
    os.makedirs(output_dir, exist_ok=True)
    paths = []
    paths.append(saturation_figure(
        result, os.path.join(output_dir, "saturation_loglog.svg")))
    if result.series:
        paths.append(decay_figure(
            result, os.path.join(output_dir, "decay_collapse.svg")))
    if result.ldos:
        paths.append(ldos_figure(
            result, os.path.join(output_dir, "ldos_lorentzian.svg")))
    return paths

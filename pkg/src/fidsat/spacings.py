"""Nearest-neighbor eigenphase spacing statistics.

Used to check which random-matrix symmetry class a map belongs to: the
Wigner surmises for the unitary (beta = 2) and orthogonal (beta = 1)
circular ensembles versus the Poisson law of uncorrelated levels.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import chisquare, ks_2samp


def nearest_neighbor_spacings(phases):
    """Normalized circular spacings of eigenphases.

    The N gaps of the sorted phases (including the wrap-around gap) sum
    to 2 pi; they are normalized by the exact mean 2 pi / N.
    """
    p = np.sort(np.asarray(phases, dtype=float))
    gaps = np.diff(p)
    wrap = p[0] + 2.0 * np.pi - p[-1]
    gaps = np.append(gaps, wrap)
    return gaps * len(p) / (2.0 * np.pi)


def cue_spacing_pdf(s):
    """Wigner surmise for beta = 2: (32 / pi^2) s^2 exp(-4 s^2 / pi)."""
    s = np.asarray(s, dtype=float)
    return (32.0 / np.pi**2) * s**2 * np.exp(-4.0 * s**2 / np.pi)


def coe_spacing_pdf(s):
    """Wigner surmise for beta = 1: (pi / 2) s exp(-pi s^2 / 4)."""
    s = np.asarray(s, dtype=float)
    return (np.pi / 2.0) * s * np.exp(-np.pi * s**2 / 4.0)


def poisson_spacing_pdf(s):
    """Spacing law of uncorrelated levels: exp(-s)."""
    return np.exp(-np.asarray(s, dtype=float))


def bin_probabilities(pdf, edges, resolution=256):
    """Probability mass of ``pdf`` in each bin, by trapezoid quadrature."""
    edges = np.asarray(edges, dtype=float)
    masses = np.empty(len(edges) - 1)
    for i in range(len(edges) - 1):
        grid = np.linspace(edges[i], edges[i + 1], resolution)
        masses[i] = np.trapezoid(pdf(grid), grid)
    return masses


def l1_distance_to_pdf(spacings, pdf, s_max=4.0, bins=24):
    """L1 distance between the empirical spacing distribution and a model pdf.

    Both are reduced to probability masses on a common binning of
    [0, s_max]; spacings beyond s_max land in the last bin so that both
    sides keep total mass ~1.
    """
    edges = np.linspace(0.0, s_max, bins + 1)
    clipped = np.minimum(np.asarray(spacings, dtype=float), s_max - 1e-12)
    emp, _ = np.histogram(clipped, bins=edges)
    emp = emp / emp.sum()
    model = bin_probabilities(pdf, edges)
    # fold the model's tail beyond s_max into the last bin as well
    tail_grid = np.linspace(s_max, max(4.0 * s_max, 16.0), 2048)
    model[-1] += np.trapezoid(pdf(tail_grid), tail_grid)
    return float(np.abs(emp - model).sum())


def ks_distance(samples_a, samples_b):
    """Two-sample Kolmogorov-Smirnov statistic between spacing samples."""
    return float(ks_2samp(samples_a, samples_b).statistic)


def phase_uniformity_pvalue(phases, bins=16):
    """Chi-square p-value for uniformity of phases over (-pi, pi]."""
    counts, _ = np.histogram(phases, bins=bins, range=(-np.pi, np.pi))
    return float(chisquare(counts).pvalue)

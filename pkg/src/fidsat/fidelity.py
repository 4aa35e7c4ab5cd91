"""Fidelity decay series, saturation estimators, and the LDOS.

The production evaluator works in the spectral representation: for an
initial eigenstate |v_m> of U the fidelity under the perturbed map U_p U
is F(n) = |sum_l |a_lm|^2 exp(-i n phi'_l)|^2, which costs O(N) per time
step once the overlap matrix exists. The direct power iteration is kept
as an independent oracle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotNormalizedError,
    WindowOutOfRangeError,
)
from .linalg import wrap_angle, _freeze

NORM_TOL = 1e-10


@dataclass(frozen=True)
class FidelitySeries:
    """F(n) for n = 0..n_max, values in [0, 1], F(0) = 1."""

    values: np.ndarray
    method: str
    initial_state: str

    @property
    def n_max(self):
        return len(self.values) - 1


@dataclass
class LdosHistogram:
    """Local density of states binned over eigenphase differences.

    Weights sum to 1 for a single eigenstate; bin edges cover (-pi, pi].
    ``fitted_width`` is filled in by the Lorentzian fit when one is run.
    """

    bin_edges: np.ndarray
    weights: np.ndarray
    source_eigenstate: object
    fitted_width: float | None = None

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_width(self):
        return float(self.bin_edges[1] - self.bin_edges[0])


@dataclass(frozen=True)
class SaturationEstimate:
    """An F-infinity estimate with its estimator tag and error bar."""

    value: float
    estimator: str
    averaging_window: tuple | None = None
    statistical_error: float = 0.0


def _check_state(psi, dim):
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if psi.shape[0] != dim:
        raise DimensionMismatchError(f"state length {psi.shape[0]} != dimension {dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise NotNormalizedError(f"state norm {norm} is not 1 within {NORM_TOL}")
    return psi


def fidelity_direct(u, up, psi0, n_max, label="custom"):
    """Fidelity by explicit power iteration (the oracle path, O(N^2)/step).

    Maintains a = U^n psi0 and b = (U_p U)^n psi0 and emits
    F(n) = |<a|b>|^2.
    """
    if u.dim != up.dim:
        raise DimensionMismatchError(f"map dimension {u.dim} != perturbation {up.dim}")
    psi = _check_state(psi0, u.dim)
    um = u.matrix
    upm = up.matrix
    a = psi.copy()
    b = psi.copy()
    values = np.empty(n_max + 1)
    values[0] = abs(np.vdot(a, b)) ** 2
    for n in range(1, n_max + 1):
        a = um @ a
        b = upm @ (um @ b)
        values[n] = abs(np.vdot(a, b)) ** 2
    return FidelitySeries(values=_freeze(values), method="direct-power",
                          initial_state=label)


def fidelity_spectral(overlaps, m, n_max):
    """Fidelity of initial eigenstate m from the overlap matrix."""
    if not 0 <= m < overlaps.n_unperturbed:
        raise IndexError(f"eigenstate index {m} out of range")
    w = np.abs(overlaps.a[:, m]) ** 2
    z = np.exp(-1j * overlaps.phases_perturbed)
    c = np.ones_like(z)
    values = np.empty(n_max + 1)
    values[0] = abs(w.sum()) ** 2
    for n in range(1, n_max + 1):
        c = c * z
        values[n] = abs(np.dot(w, c)) ** 2
    return FidelitySeries(values=_freeze(values), method="spectral",
                          initial_state=f"eigenstate:{m}")


def fidelity_spectral_batch(overlaps, n_max, columns=None, chunk=2048):
    """F(n) for many eigenstates at once; returns shape (n_max+1, n_states).

    One BLAS product per time chunk; used by the sweep runner where the
    same overlap matrix feeds hundreds of initial states.
    """
    a = overlaps.a if columns is None else overlaps.a[:, columns]
    w = (np.abs(a) ** 2).T  # (M, L)
    phases = overlaps.phases_perturbed
    out = np.empty((n_max + 1, w.shape[0]))
    for start in range(0, n_max + 1, chunk):
        stop = min(start + chunk, n_max + 1)
        steps = np.arange(start, stop)
        e = np.exp(-1j * np.outer(phases, steps))  # (L, T)
        out[start:stop] = (np.abs(w @ e) ** 2).T
    return out


def saturation_time_average(series, start, count):
    """Arithmetic mean of F(n) over [start, start+count); error = sd/sqrt(count)."""
    if start < 0 or count < 1 or start + count > len(series.values):
        raise WindowOutOfRangeError(
            f"window ({start}, {count}) does not fit series of length "
            f"{len(series.values)}"
        )
    window = series.values[start : start + count]
    mean = float(window.mean())
    err = float(window.std(ddof=1) / np.sqrt(count)) if count > 1 else 0.0
    return SaturationEstimate(value=mean, estimator="time-average",
                              averaging_window=(start, count),
                              statistical_error=err)


def saturation_ipr(overlaps, m):
    """Exact saturation level of eigenstate m: the inverse participation
    ratio sum_l |a_lm|^4. No time evolution involved."""
    if not 0 <= m < overlaps.n_unperturbed:
        raise IndexError(f"eigenstate index {m} out of range")
    w = np.abs(overlaps.a[:, m]) ** 2
    return SaturationEstimate(value=float(np.sum(w**2)), estimator="ipr")


def ipr_all(overlaps, columns=None):
    """IPR saturation levels for every (selected) eigenstate column."""
    a = overlaps.a if columns is None else overlaps.a[:, columns]
    w = np.abs(a) ** 2
    return (w**2).sum(axis=0)


def saturation_random_state(overlaps):
    """Random-state saturation level via the explicit double sum
    N^-2 sum_l (sum_m |a_lm|^2)(sum_j |a_lj|^2).

    Row normalization forces this to 1/N exactly, but it is evaluated as
    written so that the identity is something tests check rather than
    assume.
    """
    if not overlaps.is_square:
        raise DimensionMismatchError("random-state sum is defined for square overlaps")
    n = overlaps.n_unperturbed
    row = (np.abs(overlaps.a) ** 2).sum(axis=1)
    value = float(np.sum(row * row) / n**2)
    return SaturationEstimate(value=value, estimator="random-state-sum")


def ldos(overlaps, m="all", bins=101):
    """Histogram of |a_lm|^2 against the wrapped phase difference
    phi'_l - phi_m, over (-pi, pi].

    m = "all" averages the per-eigenstate histograms uniformly.
    """
    if bins < 8:
        raise ValueError("bins must be >= 8")
    edges = np.linspace(-np.pi, np.pi, bins + 1)
    if m == "all":
        diffs = wrap_angle(
            overlaps.phases_perturbed[:, None] - overlaps.phases_unperturbed[None, :]
        ).ravel()
        weights = (np.abs(overlaps.a) ** 2).ravel() / overlaps.n_unperturbed
        source = "averaged"
    else:
        if not 0 <= m < overlaps.n_unperturbed:
            raise IndexError(f"eigenstate index {m} out of range")
        diffs = wrap_angle(overlaps.phases_perturbed - overlaps.phases_unperturbed[m])
        weights = np.abs(overlaps.a[:, m]) ** 2
        source = int(m)
    hist, _ = np.histogram(diffs, bins=edges, weights=weights)
    return LdosHistogram(bin_edges=_freeze(edges), weights=_freeze(hist),
                         source_eigenstate=source)


class FgrScales(NamedTuple):
    """Constituent scales of the golden-rule rate for one (delta, system)."""

    sigma_sq: float      # typical squared off-diagonal element, delta^2 lam2 / N
    level_spacing: float  # Delta = 2 pi / N
    gamma: float         # 2 pi sigma^2 / Delta = delta^2 lam2


def gamma_theory(delta, lambda_sq):
    """Golden-rule decay rate Gamma = delta^2 * lambda-bar-squared."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if lambda_sq <= 0:
        raise ValueError("lambda_sq must be > 0")
    return float(delta) ** 2 * float(lambda_sq)


def fgr_scales(delta, lambda_sq, dim):
    """sigma^2, mean level spacing, and Gamma = 2 pi sigma^2 / Delta."""
    gamma = gamma_theory(delta, lambda_sq)
    sigma_sq = gamma / dim
    spacing = 2.0 * np.pi / dim
    return FgrScales(sigma_sq=sigma_sq, level_spacing=spacing,
                     gamma=2.0 * np.pi * sigma_sq / spacing)


# ---------------------------------------------------------------------------
# CSV export

def _write_provenance(fh, provenance):
    for key, value in (provenance or {}).items():
        fh.write(f"# {key} = {value}\n")


def series_to_csv(series, path, provenance=None):
    """Columns (n, F); provenance keys become leading comment lines."""
    with open(path, "w", newline="") as fh:
        _write_provenance(fh, {"method": series.method,
                               "initial_state": series.initial_state,
                               **(provenance or {})})
        writer = csv.writer(fh)
        writer.writerow(["n", "F"])
        for n, f in enumerate(series.values):
            writer.writerow([n, f"{f:.12g}"])


def ldos_to_csv(hist, path, provenance=None):
    """Columns (bin_center, weight)."""
    with open(path, "w", newline="") as fh:
        _write_provenance(fh, {"source_eigenstate": hist.source_eigenstate,
                               **(provenance or {})})
        writer = csv.writer(fh)
        writer.writerow(["bin_center", "weight"])
        for x, w in zip(hist.centers, hist.weights):
            writer.writerow([f"{x:.12g}", f"{w:.12g}"])

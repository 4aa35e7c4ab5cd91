"""Dense complex linear algebra for unitary maps.

Certified unitary operators, spectral decompositions with eigenphases on
(-pi, pi], and overlap matrices between perturbed and unperturbed
eigenbases. All tolerances scale linearly with the dimension so rounding
accumulation at N ~ 1000 does not trip certification.

Sign convention throughout: U |v_j> = exp(-i phi_j) |v_j>, so the phase of
a diagonal unitary diag(exp(-i theta)) is +theta.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DecompositionFailedError,
    DimensionMismatchError,
    NonUnitaryError,
)

# All per-unit-dimension: multiply by N before comparing.
UNITARITY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
# Phases closer than this (radians) are treated as one degenerate cluster.
DEGENERACY_GAP = 1e-10

OVERLAP_SUM_TOL = 1e-8

MATRIX_MAGIC = b"FSM1"


def wrap_angle(x):
    """Wrap angles (radians) onto (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


def _as_square_complex(m):
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionMismatchError("matrix dimension must be >= 1")
    return a


def unitarity_defect(m):
    """Max column 2-norm of U^dag U - I."""
    a = _as_square_complex(m)
    d = a.conj().T @ a - np.eye(a.shape[0])
    return float(np.linalg.norm(d, axis=0).max())


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class UnitaryOperator:
    """A dense unitary matrix with certification and provenance.

    Attributes
    ----------
    matrix : ndarray
        N x N complex matrix, read-only.
    provenance : str
        One of CUE, COE, QKT, QKT-oe, perturbation, composed.
    seed : int or None
        Seed used to generate the matrix, when there was one.
    unitarity_defect : float
        Measured max column norm of U^dag U - I at construction time.
    """

    matrix: np.ndarray
    provenance: str = "composed"
    seed: int | None = None
    unitarity_defect: float = 0.0

    @property
    def dim(self):
        return self.matrix.shape[0]


def certify_unitary(m, tolerance=None, provenance="composed", seed=None):
    """Certify a matrix as unitary and wrap it as a UnitaryOperator.

    Parameters
    ----------
    m : array_like
        Square complex matrix.
    tolerance : float, optional
        Acceptance threshold for the defect. Defaults to 1e-10 * N.

    Raises
    ------
    NonUnitaryError
        If the measured defect exceeds the tolerance.
    """
    a = _as_square_complex(m)
    n = a.shape[0]
    if tolerance is None:
        tolerance = UNITARITY_TOL * n
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    defect = unitarity_defect(a)
    if defect > tolerance:
        raise NonUnitaryError(defect, tolerance)
    return UnitaryOperator(
        matrix=_freeze(a),
        provenance=provenance,
        seed=seed,
        unitarity_defect=defect,
    )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenphases and eigenvectors of a unitary operator.

    phases[j] is phi_j in (-pi, pi], sorted ascending; column j of
    ``vectors`` is the eigenvector with U v_j = exp(-i phi_j) v_j.
    """

    phases: np.ndarray
    vectors: np.ndarray
    source: str = "composed"

    @property
    def dim(self):
        return self.vectors.shape[0]


def reassemble(dec):
    """V diag(exp(-i phi)) V^dag -- the inverse of spectral_decompose."""
    v = dec.vectors
    return (v * np.exp(-1j * dec.phases)) @ v.conj().T


def _phase_clusters(phases, gap):
    """Index groups of near-degenerate sorted phases, circular at +-pi."""
    n = len(phases)
    if n < 2:
        return []
    diffs = np.diff(phases)
    breaks = np.nonzero(diffs >= gap)[0]
    clusters = []
    start = 0
    for b in breaks:
        clusters.append(list(range(start, b + 1)))
        start = b + 1
    clusters.append(list(range(start, n)))
    # wrap: first and last cluster join if the circle gap is degenerate too
    if len(clusters) > 1 and (phases[0] + 2.0 * np.pi - phases[-1]) < gap:
        clusters[0] = clusters.pop() + clusters[0]
    return [c for c in clusters if len(c) > 1]


def spectral_decompose(u):
    """Eigenphases in (-pi, pi] and an orthonormal eigenbasis of a unitary.

    Uses a complex Schur factorization (exactly diagonal for a normal
    matrix up to roundoff), then re-orthonormalizes and re-diagonalizes
    any numerically degenerate phase cluster. Any orthonormal basis of a
    degenerate cluster subspace is acceptable.

    Raises
    ------
    DecompositionFailedError
        If the certified reconstruction defect cannot be reached.
    """
    m = u.matrix
    n = m.shape[0]
    t, z = scipy.linalg.schur(np.asarray(m, dtype=np.complex128), output="complex")
    phases = wrap_angle(-np.angle(np.diagonal(t)))
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    vectors = z[:, order]

    for cluster in _phase_clusters(phases, DEGENERACY_GAP):
        block = vectors[:, cluster]
        q, _ = np.linalg.qr(block)
        small = q.conj().T @ m @ q
        ts, ws = scipy.linalg.schur(small, output="complex")
        vectors[:, cluster] = q @ ws
        phases[cluster] = wrap_angle(-np.angle(np.diagonal(ts)))

    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    vectors = vectors[:, order]

    defect = float(np.abs(reassemble_raw(vectors, phases) - m).max())
    if defect > RECONSTRUCTION_TOL * n:
        raise DecompositionFailedError(defect, RECONSTRUCTION_TOL * n)
    return SpectralDecomposition(
        phases=_freeze(phases), vectors=_freeze(vectors), source=u.provenance
    )


def reassemble_raw(vectors, phases):
    return (vectors * np.exp(-1j * phases)) @ vectors.conj().T


@dataclass(frozen=True)
class OverlapMatrix:
    """Overlaps a_lm = <v'_l | v_m> between two eigenbases.

    Rows run over the perturbed basis, columns over the unperturbed one.
    Column sums of |a|^2 are always 1 (completeness of the perturbed
    basis); row sums are 1 only when the matrix is square. The rectangular
    case arises when the unperturbed states span a symmetry subspace of
    the full map.
    """

    a: np.ndarray
    phases_unperturbed: np.ndarray
    phases_perturbed: np.ndarray

    @property
    def n_unperturbed(self):
        return self.a.shape[1]

    @property
    def n_perturbed(self):
        return self.a.shape[0]

    @property
    def is_square(self):
        return self.a.shape[0] == self.a.shape[1]


def _check_overlap_sums(a, square):
    col = np.abs(a) ** 2
    col_sums = col.sum(axis=0)
    worst = float(np.abs(col_sums - 1.0).max())
    if worst > OVERLAP_SUM_TOL:
        raise NonUnitaryError(worst, OVERLAP_SUM_TOL)
    if square:
        row_sums = col.sum(axis=1)
        worst = float(np.abs(row_sums - 1.0).max())
        if worst > OVERLAP_SUM_TOL:
            raise NonUnitaryError(worst, OVERLAP_SUM_TOL)


def overlap_matrix(unperturbed, perturbed):
    """Overlap matrix between two spectral decompositions of equal dimension."""
    if unperturbed.dim != perturbed.dim:
        raise DimensionMismatchError(
            f"decompositions have dimensions {unperturbed.dim} and {perturbed.dim}"
        )
    a = perturbed.vectors.conj().T @ unperturbed.vectors
    _check_overlap_sums(a, square=True)
    return OverlapMatrix(
        a=_freeze(a),
        phases_unperturbed=unperturbed.phases,
        phases_perturbed=perturbed.phases,
    )


def overlap_with_states(perturbed, states, state_phases):
    """Rectangular overlap of explicit eigenstates with a perturbed basis.

    ``states`` holds unit-norm eigenvectors of the unperturbed map as
    columns (possibly fewer than the full dimension); ``state_phases``
    are their eigenphases.
    """
    states = np.asarray(states, dtype=np.complex128)
    if states.ndim != 2 or states.shape[0] != perturbed.dim:
        raise DimensionMismatchError(
            f"states shape {states.shape} incompatible with dimension {perturbed.dim}"
        )
    state_phases = np.asarray(state_phases, dtype=float)
    if state_phases.shape != (states.shape[1],):
        raise DimensionMismatchError("one phase per state column is required")
    a = perturbed.vectors.conj().T @ states
    _check_overlap_sums(a, square=a.shape[0] == a.shape[1])
    return OverlapMatrix(
        a=_freeze(a),
        phases_unperturbed=_freeze(state_phases),
        phases_perturbed=perturbed.phases,
    )


# ---------------------------------------------------------------------------
# serialization: binary "FSM1" format and JSON fixtures

def save_matrix(path, m):
    """Write a square complex matrix: magic FSM1, uint32 dim, row-major
    little-endian float64 (re, im) pairs."""
    a = _as_square_complex(m)
    n = a.shape[0]
    pairs = np.empty((n, n, 2), dtype="<f8")
    pairs[..., 0] = a.real
    pairs[..., 1] = a.imag
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(pairs.tobytes())


def load_matrix(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MATRIX_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MATRIX_MAGIC!r}")
        (n,) = struct.unpack("<I", fh.read(4))
        data = fh.read()
    expected = n * n * 2 * 8
    if len(data) != expected:
        raise ValueError(f"truncated matrix file: {len(data)} != {expected} bytes")
    pairs = np.frombuffer(data, dtype="<f8").reshape(n, n, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def matrix_to_json(m):
    a = _as_square_complex(m)
    return json.dumps(
        {"dim": a.shape[0], "re": a.real.tolist(), "im": a.imag.tolist()}
    )


def matrix_from_json(text):
    obj = json.loads(text)
    n = obj["dim"]
    a = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if a.shape != (n, n):
        raise ValueError(f"JSON matrix shape {a.shape} does not match dim {n}")
    return a

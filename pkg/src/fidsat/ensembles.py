"""Seeded map generators and the collective z-rotation perturbation.

Covers the three system classes studied here -- circular unitary ensemble
(CUE) samples, circular orthogonal ensemble (COE) samples built as U U^T,
and the quantum kicked top with its odd-parity subspace restriction --
plus the perturbation in both its many-qubit and spin-J forms.

Every generator is a pure function of its parameters and seed, so sweeps
may run in parallel with no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionUnexpectedError,
    InvalidSpinError,
    SymmetryBrokenError,
)
from .linalg import certify_unitary, _freeze, UnitaryOperator

COMMUTATOR_TOL = 1e-10  # per unit dimension, max-entry norm
SYMMETRY_TOL = 1e-9     # per unit dimension, max-entry norm

QUBIT_FORM = "qubit-collective-z"
SPIN_FORM = "spin-Jz"


def cache_filename(provenance, params, seed=None):
    """Deterministic file name for caching an operator in the binary format.

    Keyed by (provenance, params, seed); params is a mapping of scalar
    parameters that define the map.
    """
    parts = [str(provenance)]
    for key in sorted(params):
        parts.append(f"{key}={params[key]:g}" if isinstance(params[key], float)
                     else f"{key}={params[key]}")
    if seed is not None:
        parts.append(f"seed={seed}")
    return "_".join(parts) + ".fsm"


def _validate_spin(j):
    two_j = 2.0 * float(j)
    if two_j <= 0 or abs(two_j - round(two_j)) > 1e-12:
        raise InvalidSpinError(f"j must be a positive integer or half-integer, got {j}")
    return round(two_j) / 2.0


def spin_dimension(j):
    """Hilbert space dimension N = 2j + 1."""
    return int(round(2.0 * _validate_spin(j) + 1.0))


# ---------------------------------------------------------------------------
# random circular ensembles

def sample_cue(dim, seed):
    """Draw a Haar-distributed unitary, deterministically for a fixed seed.

    Standard exact-Haar construction: fill a matrix with independent
    standard complex Gaussians, QR-factorize, and absorb the phases of
    diag(R) into Q so the distribution is exactly invariant.

    Parameters
    ----------
    dim : int
        Matrix dimension, at least 2.
    seed : int
        64-bit seed for the underlying PCG64 generator.
    """
    if dim < 2:
        raise DimensionMismatchError("CUE sampling requires dim >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))  # scale columns; Q diag(r_ii/|r_ii|)
    return certify_unitary(q, provenance="CUE", seed=int(seed))


def make_coe(cue):
    """COE member U U^T from a CUE sample; unitary and complex-symmetric."""
    if cue.provenance != "CUE":
        raise ValueError(f"make_coe expects a CUE operator, got {cue.provenance!r}")
    c = cue.matrix @ cue.matrix.T
    return certify_unitary(c, provenance="COE", seed=cue.seed)


# ---------------------------------------------------------------------------
# angular momentum and the kicked top

@dataclass(frozen=True)
class AngularMomentumOps:
    """Spin-j angular momentum matrices in the |j, m> basis, m = j..-j."""

    j: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def dim(self):
        return self.jz.shape[0]


def angular_momentum_ops(j):
    """Jx, Jy, Jz for spin j (hbar = 1), basis ordered m = j, j-1, ..., -j.

    Matrix elements are the standard ladder ones,
    <j, m+1 | J+ | j, m> = sqrt(j(j+1) - m(m+1)).
    """
    j = _validate_spin(j)
    n = spin_dimension(j)
    m = j - np.arange(n)  # descending
    jz = np.diag(m).astype(np.complex128)
    # J+ raises m: |m+1> sits one index above |m| in the descending order
    ladder = np.sqrt(j * (j + 1.0) - m[1:] * (m[1:] + 1.0))
    jplus = np.zeros((n, n), dtype=np.complex128)
    jplus[np.arange(n - 1), np.arange(1, n)] = ladder
    jminus = jplus.T.conj()
    jx = 0.5 * (jplus + jminus)
    jy = -0.5j * (jplus - jminus)
    return AngularMomentumOps(j=j, jx=_freeze(jx), jy=_freeze(jy), jz=_freeze(jz))


@dataclass(frozen=True)
class KickedTopParams:
    """Spin quantum number j and dimensionless kick strength k.

    k = 12 puts the top well inside its chaotic region; the Hilbert space
    dimension is N = 2j + 1.
    """

    j: float
    k: float = 12.0

    def __post_init__(self):
        object.__setattr__(self, "j", _validate_spin(self.j))

    @property
    def dim(self):
        return spin_dimension(self.j)


def kicked_top(params):
    """One-period kicked-top map exp(-i pi Jy / 2) exp(-i k Jz^2 / j).

    The kick factor is diagonal, exp(-i k m^2 / j) on |j, m>; the rotation
    factor is built from the Hermitian eigendecomposition of Jy.
    """
    ops = angular_momentum_ops(params.j)
    m = params.j - np.arange(params.dim)
    kick = np.exp(-1j * params.k * m**2 / params.j)
    evals, w = np.linalg.eigh(ops.jy)
    rot = (w * np.exp(-0.5j * np.pi * evals)) @ w.conj().T
    u = rot * kick  # right-multiply by the diagonal kick
    return certify_unitary(u, provenance="QKT", seed=None)


# ---------------------------------------------------------------------------
# perturbation: collective z-rotation

@dataclass(frozen=True)
class PerturbationSpec:
    """Collective z-rotation of strength delta.

    form "qubit-collective-z": product of exp(-i delta sigma_z / 2) over
    n_qubits qubits, acting on N = 2^n_qubits. form "spin-Jz":
    exp(-i delta Jz) on N = 2j + 1. Both generators are z-diagonal.
    """

    form: str
    delta: float
    n_qubits: int | None = None
    j: float | None = None

    def __post_init__(self):
        if self.form not in (QUBIT_FORM, SPIN_FORM):
            raise ValueError(f"unknown perturbation form {self.form!r}")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.form == QUBIT_FORM:
            if self.n_qubits is None or self.n_qubits < 1:
                raise ValueError("qubit form requires n_qubits >= 1")
        else:
            if self.j is None:
                raise ValueError("spin form requires j")
            object.__setattr__(self, "j", _validate_spin(self.j))

    @property
    def dim(self):
        if self.form == QUBIT_FORM:
            return 2**self.n_qubits
        return spin_dimension(self.j)


def qubit_perturbation(n_qubits, delta):
    return PerturbationSpec(form=QUBIT_FORM, delta=delta, n_qubits=n_qubits)


def spin_perturbation(j, delta):
    return PerturbationSpec(form=SPIN_FORM, delta=delta, j=j)


def generator_eigenvalues(spec):
    """Diagonal of the generator V in the same basis order as the unitary.

    Qubit form: eigenvalue of sum(sigma_z)/2 at computational index b is
    (n_q - 2 popcount(b)) / 2. Spin form: m = j, j-1, ..., -j.
    """
    if spec.form == QUBIT_FORM:
        b = np.arange(2**spec.n_qubits, dtype=np.uint64)
        weights = np.bitwise_count(b).astype(float)
        return (spec.n_qubits - 2.0 * weights) / 2.0
    return spec.j - np.arange(spin_dimension(spec.j), dtype=float)


def perturbation_unitary(spec):
    """U_p = exp(-i delta V) as a certified (diagonal) unitary."""
    lam = generator_eigenvalues(spec)
    u = np.diag(np.exp(-1j * spec.delta * lam))
    return certify_unitary(u, provenance="perturbation", seed=None)


def perturbation_generator_variance(spec):
    """lambda-bar squared: the eigenvalue variance N^-1 sum(lambda_i^2).

    Computed by direct enumeration of the diagonal. Analytically n_q / 4
    for the qubit form and j(j+1)/3 for the spin form.
    """
    lam = generator_eigenvalues(spec)
    return float(np.mean(lam**2))


# ---------------------------------------------------------------------------
# parity symmetry of the kicked top

def rotation_parity_operator(j):
    """R = exp(-i pi Jy), computed numerically from the spectrum of Jy.

    R commutes with the kicked top and generates its parity symmetry.
    Kept numerical on purpose: the analytic odd-sector basis below is
    validated against this independent construction.
    """
    ops = angular_momentum_ops(j)
    evals, w = np.linalg.eigh(ops.jy)
    return (w * np.exp(-1j * np.pi * evals)) @ w.conj().T


def parity_eigenspace_dimension(j):
    """Dimension of the -1 eigenspace of exp(-i pi Jy).

    exp(-i pi Jy) |j, m> = (-1)^(j - m) |j, -m>, so for integer j each
    +-m pair contributes one odd vector and |j, 0> is odd iff j is odd;
    for half-integer j the eigenvalues are +-i and the -1 eigenspace is
    empty.
    """
    j = _validate_spin(j)
    if abs(j - round(j)) > 1e-12:
        return 0
    jr = int(round(j))
    return jr + (1 if jr % 2 == 1 else 0)


def parity_projector(j):
    """Isometry whose columns span the -1 eigenspace of exp(-i pi Jy).

    Built analytically in the |j, m> basis: for integer j the odd vectors
    are (|m> - (-1)^(j-m) |-m>)/sqrt(2) for m = 1..j, plus |0> when j is
    odd. Returns an N x d matrix with P^dag P = I exactly; d may be 0.
    """
    j = _validate_spin(j)
    n = spin_dimension(j)
    if abs(j - round(j)) > 1e-12:
        return np.zeros((n, 0), dtype=np.complex128)
    jr = int(round(j))
    idx = lambda m: jr - m  # descending basis: |m> at index j - m
    cols = []
    for m in range(1, jr + 1):
        v = np.zeros(n, dtype=np.complex128)
        sigma = (-1.0) ** (jr - m)
        v[idx(m)] = 1.0 / np.sqrt(2.0)
        v[idx(-m)] = -sigma / np.sqrt(2.0)
        cols.append(v)
    if jr % 2 == 1:
        v = np.zeros(n, dtype=np.complex128)
        v[idx(0)] = 1.0
        cols.append(v)
    return _freeze(np.column_stack(cols))


def oe_subspace_projector(j):
    """Projector onto the odd ('oe') subspace, claimed to have dimension j.

    Returns the N x j isometry when the -1 eigenspace of exp(-i pi Jy)
    really has dimension j (even integer j). Otherwise raises
    DimensionUnexpectedError carrying the measured dimension -- half-integer
    j has no -1 eigenspace at all, and odd integer j has dimension j + 1.
    """
    j = _validate_spin(j)
    p = parity_projector(j)
    actual = p.shape[1]
    expected = int(round(j)) if abs(j - round(j)) < 1e-12 else j
    if actual != expected:
        raise DimensionUnexpectedError(expected=expected, actual=actual)
    return p


def restrict_to_subspace(u, projector, symmetry=None):
    """P^dag U P, certified unitary on the subspace.

    When ``symmetry`` (a unitary matrix commuting with U, e.g. the parity
    rotation) is given, the commutator is checked first and
    SymmetryBrokenError raised if U does not actually preserve the
    subspace structure.
    """
    m = u.matrix
    if projector.shape[0] != m.shape[0]:
        raise DimensionMismatchError(
            f"projector rows {projector.shape[0]} != dimension {m.shape[0]}"
        )
    if symmetry is not None:
        defect = float(np.abs(u.matrix @ symmetry - symmetry @ u.matrix).max())
        if defect > SYMMETRY_TOL * m.shape[0]:
            raise SymmetryBrokenError(
                f"commutator defect {defect:.3e} exceeds "
                f"{SYMMETRY_TOL * m.shape[0]:.3e}"
            )
    sub = projector.conj().T @ m @ projector
    return certify_unitary(sub, provenance=f"{u.provenance}-oe", seed=u.seed)


@dataclass(frozen=True)
class OeSystem:
    """Kicked top together with its odd-parity reduction."""

    full: UnitaryOperator
    projector: np.ndarray
    restricted: UnitaryOperator


def oe_system(params):
    """Build the kicked top and its certified odd-subspace restriction."""
    full = kicked_top(params)
    r = rotation_parity_operator(params.j)
    p = oe_subspace_projector(params.j)
    restricted = restrict_to_subspace(full, p, symmetry=r)
    return OeSystem(full=full, projector=p, restricted=restricted)

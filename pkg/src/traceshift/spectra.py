"""Validated matrix types and spectral decompositions.

Everything downstream (operator integrals, derivative operators, phase
tracking) works with finite atomic spectral measures, so this module fixes
the conventions once: unitary matrices decompose through a complex Schur
form (orthonormal eigenvectors even at near-degeneracies), Hermitian
matrices through eigh, and near-coincident eigenvalues are grouped into
clusters with a representative point used when kernels must be sampled.
All types are immutable; operations never mutate their inputs.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

DEFAULT_GAP_TOL = 1e-10
UNITARY_TOL = 1e-10            # times n, Frobenius
HERMITIAN_RTOL = 1e-12
HERMITIAN_ATOL = 1e-14
RECONSTRUCTION_RTOL = 1e-9


class ValidationError(ValueError):
    """An input violated a documented precondition or type invariant."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class DecompositionError(NumericalError):
    """Eigendecomposition failed its reconstruction check."""


def as_complex_matrix(entries, name="matrix"):
    """Coerce to a finite two-dimensional complex128 array."""
    arr = np.asarray(entries, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _freeze(arr):
    out = arr.copy()
    out.setflags(write=False)
    return out


class UnitaryMatrix:
    """A square matrix validated to satisfy ||U*U - I||_F <= 1e-10 * n."""

    def __init__(self, entries):
        arr = as_complex_matrix(entries, "unitary matrix")
        n = arr.shape[0]
        if arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"unitary matrix must be square, got {arr.shape}")
        defect = np.linalg.norm(arr.conj().T @ arr - np.eye(n))
        if defect > UNITARY_TOL * n:
            raise ValidationError(
                f"unitarity violated: ||U*U - I||_F = {defect:.3e} exceeds "
                f"{UNITARY_TOL:g} * n = {UNITARY_TOL * n:.3e}"
            )
        self.array = _freeze(arr)

    @property
    def n(self):
        return self.array.shape[0]

    def __repr__(self):
        return f"UnitaryMatrix(n={self.n})"


class HermitianMatrix:
    """A square matrix validated to be Hermitian within roundoff scale."""

    def __init__(self, entries):
        arr = as_complex_matrix(entries, "hermitian matrix")
        if arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"hermitian matrix must be square, got {arr.shape}")
        defect = np.linalg.norm(arr - arr.conj().T)
        bound = HERMITIAN_RTOL * np.linalg.norm(arr) + HERMITIAN_ATOL
        if defect > bound:
            raise ValidationError(
                f"hermiticity violated: ||A - A*||_F = {defect:.3e} exceeds {bound:.3e}"
            )
        # store the exactly Hermitian part so downstream eigh sees a clean input
        self.array = _freeze((arr + arr.conj().T) / 2.0)

    @property
    def n(self):
        return self.array.shape[0]

    def __repr__(self):
        return f"HermitianMatrix(n={self.n})"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues, orthonormal eigenvectors, and near-degeneracy clusters.

    ``values`` are sorted (by angle in (-pi, pi] for unitary input, ascending
    for Hermitian input) and ``vectors[:, i]`` is the eigenvector for
    ``values[i]``. ``clusters`` groups indices whose eigenvalues sit within
    the gap tolerance of each other (arc distance on the circle, absolute
    distance on the line); kernel-sampling code evaluates at one
    representative point per cluster.
    """

    values: np.ndarray
    vectors: np.ndarray
    clusters: tuple
    kind: str

    @property
    def n(self):
        return self.values.shape[0]

    def projection(self, cluster_index):
        """Orthogonal projection onto the span of one cluster."""
        idx = np.asarray(self.clusters[cluster_index])
        q = self.vectors[:, idx]
        return q @ q.conj().T

    def reconstruct(self):
        return (self.vectors * self.values.astype(np.complex128)) @ self.vectors.conj().T

    @cached_property
    def rep_values(self):
        """Per-index cluster-representative eigenvalue (length n)."""
        out = np.empty(self.n, dtype=self.values.dtype)
        for cluster in self.clusters:
            idx = np.asarray(cluster)
            if self.kind == "unitary":
                ang = np.angle(self.values[idx])
                # unwrap relative to the first member; clusters are narrow
                rel = np.angle(np.exp(1j * (ang - ang[0])))
                rep_angle = ang[0] + rel.mean()
                rep_angle = np.angle(np.exp(1j * rep_angle))
                out[idx] = np.exp(1j * rep_angle)
            else:
                out[idx] = self.values[idx].mean()
        return _freeze(out)

    @cached_property
    def rep_angles(self):
        if self.kind != "unitary":
            raise ValidationError("rep_angles is defined for unitary decompositions only")
        return _freeze(np.angle(self.rep_values))


def _cluster_line(values, gap_tol):
    """Group sorted real values whose consecutive gaps are below gap_tol."""
    clusters = []
    start = 0
    for i in range(1, len(values)):
        if values[i] - values[i - 1] >= gap_tol:
            clusters.append(tuple(range(start, i)))
            start = i
    clusters.append(tuple(range(start, len(values))))
    return clusters


def _cluster_circle(angles, gap_tol):
    """Connected components of the 'arc distance < gap_tol' relation."""
    n = len(angles)
    clusters = _cluster_line(angles, gap_tol)
    if len(clusters) > 1:
        wrap_gap = (angles[0] + 2 * np.pi) - angles[-1]
        if wrap_gap < gap_tol:
            merged = clusters[-1] + clusters[0]
            clusters = [merged] + clusters[1:-1]
    return [tuple(c) for c in clusters]


def _validate_gap_tol(gap_tol):
    if not (gap_tol > 0.0 and np.isfinite(gap_tol)):
        raise ValidationError(f"gap_tol must be positive and finite, got {gap_tol}")


def decompose_unitary(u, gap_tol=DEFAULT_GAP_TOL):
    """Spectral decomposition of a unitary matrix.

    Uses the complex Schur form: for a normal matrix it is diagonal up to
    roundoff and the transformation is exactly unitary, so eigenvectors stay
    orthonormal even inside near-degenerate clusters (plain eig does not
    guarantee that).
    """
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    _validate_gap_tol(gap_tol)
    t, z = scipy.linalg.schur(np.asarray(u.array), output="complex")
    vals = np.diag(t).copy()
    order = np.argsort(np.angle(vals), kind="stable")
    vals = vals[order]
    q = z[:, order]
    resid = np.linalg.norm(u.array - (q * vals) @ q.conj().T)
    scale = np.linalg.norm(u.array)
    if resid > RECONSTRUCTION_RTOL * scale:
        raise DecompositionError(
            f"unitary eigendecomposition reconstruction residual {resid:.3e} exceeds "
            f"{RECONSTRUCTION_RTOL:g} * ||U||_F = {RECONSTRUCTION_RTOL * scale:.3e} "
            f"(n={u.n}, unitarity defect={np.linalg.norm(u.array.conj().T @ u.array - np.eye(u.n)):.3e})"
        )
    dev = np.abs(np.abs(vals) - 1.0).max()
    if dev > 1e-9:
        raise DecompositionError(f"eigenvalue modulus deviates from 1 by {dev:.3e}")
    clusters = _cluster_circle(np.angle(vals), gap_tol)
    return SpectralDecomposition(
        values=_freeze(vals), vectors=_freeze(q), clusters=tuple(clusters), kind="unitary"
    )


def decompose_hermitian(a, gap_tol=DEFAULT_GAP_TOL):
    """Spectral decomposition of a Hermitian matrix, eigenvalues ascending."""
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    _validate_gap_tol(gap_tol)
    w, q = np.linalg.eigh(np.asarray(a.array))
    resid = np.linalg.norm(a.array - (q * w.astype(np.complex128)) @ q.conj().T)
    scale = np.linalg.norm(a.array)
    if resid > RECONSTRUCTION_RTOL * scale + 1e-13:
        raise DecompositionError(
            f"hermitian eigendecomposition reconstruction residual {resid:.3e} "
            f"exceeds {RECONSTRUCTION_RTOL:g} * ||A||_F (n={a.n})"
        )
    clusters = _cluster_line(w, gap_tol)
    return SpectralDecomposition(
        values=_freeze(w), vectors=_freeze(q.astype(np.complex128)), clusters=tuple(clusters), kind="hermitian"
    )


def matrix_function(dec, f):
    """Apply a scalar function through a spectral decomposition.

    ``f`` may be a CircleFunction/LineFunction (anything exposing ``eval``)
    or a plain vectorized callable on the eigenvalues.
    """
    vals = dec.values
    fv = f.eval(vals) if hasattr(f, "eval") else f(vals)
    fv = np.asarray(fv, dtype=np.complex128)
    return (dec.vectors * fv) @ dec.vectors.conj().T


class UnitaryPath:
    """The one-parameter family V_s = exp(isA) U with a cached generator eigh.

    Phase tracking and quadrature sample many points along the path, so the
    decomposition of A is done once here.
    """

    def __init__(self, u, a):
        if not isinstance(u, UnitaryMatrix):
            u = UnitaryMatrix(u)
        if not isinstance(a, HermitianMatrix):
            a = HermitianMatrix(a)
        if u.n != a.n:
            raise ValidationError(f"dimension mismatch: U is {u.n}, A is {a.n}")
        self.u = u
        self.a = a
        self._dec_a = decompose_hermitian(a)

    def exponential(self, s):
        """exp(isA) as a plain array."""
        w = self._dec_a.values
        q = self._dec_a.vectors
        return (q * np.exp(1j * s * w)) @ q.conj().T

    def point(self, s):
        """V_s = exp(isA) U."""
        s = float(s)
        if not np.isfinite(s):
            raise ValidationError(f"path parameter must be finite, got {s}")
        return UnitaryMatrix(self.exponential(s) @ self.u.array)


def path_point(u, a, s):
    """exp(isA) U computed through the spectral decomposition of A."""
    return UnitaryPath(u, a).point(s)


def random_haar_unitary(n, seed):
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    diagonal phase correction that makes the factorization unique."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValidationError(f"dimension must be a positive integer, got {n}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return UnitaryMatrix(q)


def random_hermitian(n, rank, norm_bound, seed):
    """Random Hermitian with exactly ``rank`` nonzero eigenvalues, all of
    magnitude in [norm_bound/4, norm_bound]."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValidationError(f"dimension must be a positive integer, got {n}")
    if not (isinstance(rank, (int, np.integer)) and 1 <= rank <= n):
        raise ValidationError(f"rank must satisfy 1 <= rank <= n={n}, got {rank}")
    if not (norm_bound > 0 and np.isfinite(norm_bound)):
        raise ValidationError(f"norm_bound must be positive and finite, got {norm_bound}")
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))) / np.sqrt(2.0)
    q, _ = np.linalg.qr(g)
    mags = rng.uniform(0.25, 1.0, size=rank) * norm_bound
    signs = rng.integers(0, 2, size=rank) * 2.0 - 1.0
    a = (q * (mags * signs)) @ q.conj().T
    a = (a + a.conj().T) / 2.0
    return HermitianMatrix(a)

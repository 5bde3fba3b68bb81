"""Double operator integrals over finite atomic spectral measures.

With spectral decompositions U = Q1 D1 Q1* and (for the second measure)
Q2 D2 Q2*, the double operator integral of a kernel Phi against T is

    Q1 (Phi o (Q1* T Q2)) Q2*,

an entrywise (Schur) product in the eigenbases. Kernels are sampled at one
representative point per near-degeneracy cluster, which keeps divided
differences well defined across exact eigenvalue collisions.
"""

from dataclasses import dataclass

import numpy as np

from .spectra import SpectralDecomposition, UnitaryMatrix, ValidationError, as_complex_matrix, decompose_unitary

GRID_MATCH_TOL = 1e-7


@dataclass(frozen=True)
class KernelMatrix:
    """A kernel sampled on a product grid: values[i, j] = Phi(left[i], right[j])."""

    left_points: np.ndarray
    right_points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        left = np.atleast_1d(np.asarray(self.left_points))
        right = np.atleast_1d(np.asarray(self.right_points))
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (left.shape[0], right.shape[0]):
            raise ValidationError(
                f"kernel values shape {vals.shape} does not match grid "
                f"({left.shape[0]}, {right.shape[0]})"
            )
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise ValidationError("kernel contains non-finite entries")
        object.__setattr__(self, "left_points", left)
        object.__setattr__(self, "right_points", right)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, phi, left_points, right_points):
        """Sample a scalar kernel phi(x, y) on the product grid."""
        left = np.atleast_1d(np.asarray(left_points))
        right = np.atleast_1d(np.asarray(right_points))
        vals = np.empty((left.shape[0], right.shape[0]), dtype=np.complex128)
        for i, x in enumerate(left):
            for j, y in enumerate(right):
                vals[i, j] = phi(x, y)
        return cls(left, right, vals)

    @property
    def diagonal(self):
        return np.diag(self.values)


def dd_kernel(f, dec_left, dec_right):
    """Divided-difference kernel of ``f`` at two decompositions' cluster points."""
    if dec_left.kind != dec_right.kind:
        raise ValidationError("divided-difference kernel needs decompositions of the same kind")
    pl = dec_left.rep_values
    pr = dec_right.rep_values
    values = f.dd_grid(pl, pr)
    return KernelMatrix(pl, pr, values)


def _check_grid(kernel_points, dec, side):
    pts = np.asarray(kernel_points)
    if pts.shape[0] != dec.n:
        raise ValidationError(
            f"grid/decomposition mismatch on the {side} side: kernel has "
            f"{pts.shape[0]} points, decomposition has {dec.n}"
        )
    dev = np.abs(pts.astype(np.complex128) - dec.rep_values.astype(np.complex128)).max()
    if dev > GRID_MATCH_TOL:
        raise ValidationError(
            f"grid/decomposition mismatch on the {side} side: kernel points deviate "
            f"from the decomposition's cluster points by {dev:.3e} (tol {GRID_MATCH_TOL:g})"
        )


def doi_compute(kernel, dec1, t, dec2):
    """Double operator integral of ``kernel`` against ``t``.

    The kernel must be sampled at the decompositions' cluster points. Linear
    in ``t`` by construction.
    """
    t = as_complex_matrix(t, "integrand matrix")
    _check_grid(kernel.left_points, dec1, "left")
    _check_grid(kernel.right_points, dec2, "right")
    if t.shape != (dec1.n, dec2.n):
        raise ValidationError(
            f"integrand shape {t.shape} does not match decompositions ({dec1.n}, {dec2.n})"
        )
    q1 = dec1.vectors
    q2 = dec2.vectors
    inner = q1.conj().T @ t @ q2
    return q1 @ (kernel.values * inner) @ q2.conj().T


def doi_trace(kernel, dec, t):
    """Trace of the double operator integral against a single measure.

    Equals sum over clusters of Phi(lambda, lambda) * trace(T P_cluster),
    i.e. the integral of the kernel's diagonal against the scalar measure
    Delta -> trace(T E(Delta)). Implemented index-wise, which is the same
    sum because kernels are constant on cluster blocks.
    """
    t = as_complex_matrix(t, "integrand matrix")
    _check_grid(kernel.left_points, dec, "left")
    _check_grid(kernel.right_points, dec, "right")
    if t.shape != (dec.n, dec.n):
        raise ValidationError(f"integrand shape {t.shape} does not match decomposition ({dec.n})")
    q = dec.vectors
    weights = np.einsum("ji,jk,ki->i", q.conj(), t, q)
    return complex(np.sum(kernel.diagonal * weights))


def trace_norm(m):
    """Sum of singular values."""
    m = as_complex_matrix(m, "matrix")
    return float(np.linalg.svd(m, compute_uv=False).sum())


def function_difference_doi(f, u, v, gap_tol=None):
    """f(U) - f(V) as the divided-difference double operator integral
    against U - V, using both operators' spectral measures."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(v, UnitaryMatrix):
        v = UnitaryMatrix(v)
    if u.n != v.n:
        raise ValidationError(f"dimension mismatch: U is {u.n}, V is {v.n}")
    kwargs = {} if gap_tol is None else {"gap_tol": gap_tol}
    dec_u = decompose_unitary(u, **kwargs)
    dec_v = decompose_unitary(v, **kwargs)
    kernel = dd_kernel(f, dec_u, dec_v)
    return doi_compute(kernel, dec_u, u.array - v.array, dec_v)

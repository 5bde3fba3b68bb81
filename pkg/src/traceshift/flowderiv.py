"""Strong derivative of s -> f(e^{isA} U) and its self-adjoint analogue.

The derivative at base point s is the double operator integral

    Q_s = i * DOI[ tau * (Df)(zeta, tau) ](A)

taken in the spectral measure of V_s = e^{isA} U on both sides, where Df is
the divided difference of f on the circle. The i and the extra factor tau
come from dV_s/ds = iA V_s. On the real line the path A + tK is affine, so
the analogue carries the plain divided-difference kernel and no i.
"""

from dataclasses import dataclass

import numpy as np

from .circlefn import LineFunction
from .doi import KernelMatrix, doi_compute, doi_trace
from .spectra import (
    HermitianMatrix,
    UnitaryMatrix,
    UnitaryPath,
    ValidationError,
    decompose_hermitian,
    decompose_unitary,
    matrix_function,
)

CANCELLATION_FLOOR = 1e-9


@dataclass(frozen=True)
class DerivativeReport:
    """Finite-difference verification record for one base point.

    ``fd_errors`` pairs each step t with ||central quotient - q_s||_F.
    Steps whose error sits below the cancellation floor carry no order
    information and are listed in ``flagged_steps`` and excluded from the
    log-log regression; ``fitted_order`` is NaN when fewer than two steps
    survive. ``fit_residual`` is the rms residual of the regression in
    log10 coordinates.
    """

    s: float
    q_s: np.ndarray
    fd_errors: list
    fitted_order: float
    fit_residual: float
    flagged_steps: list


def _qs_kernel(f, dec):
    reps = dec.rep_values
    values = f.dd_grid(reps, reps) * reps[None, :]
    return KernelMatrix(reps, reps, values)


def qs_operator(f, u, a, s, _dec=None):
    """The derivative operator Q_s = d/dt f(e^{itA} U) at t = s."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    dec = decompose_unitary(UnitaryPath(u, a).point(s)) if _dec is None else _dec
    kernel = _qs_kernel(f, dec)
    return 1j * doi_compute(kernel, dec, a.array, dec)


def qs_trace(f, u, a, s, _dec=None):
    """trace Q_s without forming the operator (diagonal kernel sum)."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    dec = decompose_unitary(UnitaryPath(u, a).point(s)) if _dec is None else _dec
    kernel = _qs_kernel(f, dec)
    return 1j * doi_trace(kernel, dec, a.array)


def fd_probe(f, u, a, s, steps):
    """Compare Q_s against central differences of f along the path.

    ``steps`` must be positive and strictly decreasing. The quotient at step
    t is (f(V_{s+t}) - f(V_{s-t})) / (2t); its deviation from Q_s decays
    like t^2 for twice-differentiable f, which the report's fitted_order
    estimates by least squares on the unflagged steps.
    """
    steps = [float(t) for t in np.atleast_1d(np.asarray(steps, dtype=np.float64))]
    if not steps:
        raise ValidationError("steps must be non-empty")
    if min(steps) <= 0.0:
        raise ValidationError("steps must be positive")
    if any(b >= a_ for a_, b in zip(steps, steps[1:])):
        raise ValidationError("steps must be strictly decreasing")
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    path = UnitaryPath(u, a)
    q_s = qs_operator(f, u, a, s)
    fd_errors = []
    for t in steps:
        plus = matrix_function(decompose_unitary(path.point(s + t)), f)
        minus = matrix_function(decompose_unitary(path.point(s - t)), f)
        quotient = (plus - minus) / (2.0 * t)
        fd_errors.append((t, float(np.linalg.norm(quotient - q_s))))
    flagged = [t for t, e in fd_errors if e < CANCELLATION_FLOOR]
    kept = [(t, e) for t, e in fd_errors if e >= CANCELLATION_FLOOR]
    if len(kept) >= 2:
        lt = np.log10([t for t, _ in kept])
        le = np.log10([e for _, e in kept])
        slope, intercept = np.polyfit(lt, le, 1)
        resid = float(np.sqrt(np.mean((le - (slope * lt + intercept)) ** 2)))
        order = float(slope)
    else:
        order = float("nan")
        resid = float("nan")
    return DerivativeReport(
        s=float(s), q_s=q_s, fd_errors=fd_errors,
        fitted_order=order, fit_residual=resid, flagged_steps=flagged,
    )


def sa_derivative(f, a, k):
    """d/dt f(A + tK) at t = 0 for a function of a real variable."""
    if not isinstance(f, LineFunction):
        raise ValidationError("sa_derivative needs a function of a real variable")
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    if not isinstance(k, HermitianMatrix):
        k = HermitianMatrix(k)
    if a.n != k.n:
        raise ValidationError(f"dimension mismatch: A is {a.n}, K is {k.n}")
    dec = decompose_hermitian(a)
    reps = dec.rep_values
    kernel = KernelMatrix(reps, reps, f.dd_grid(reps, reps))
    return doi_compute(kernel, dec, k.array, dec)

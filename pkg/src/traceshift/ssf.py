"""Spectral shift function for unitary pairs via eigenphase flow.

Along the path V_s = e^{isA} U the eigenvalues move continuously on the
circle. Tracking each eigenphase branch from s = 0 to s = 1 and counting,
for every angle theta, the net number of branches that sweep past theta
produces a piecewise-constant integer-valued function; its negative, folded
to [0, 2pi) and normalized to zero mean, is the spectral shift function:

    trace(f(U) - f(V)) = integral over [0, 2pi) of g'(theta) xi(theta),

with g(theta) = f(e^{i theta}). The right-hand side telescopes exactly over
the arcs of constancy, so no quadrature enters anywhere: the only numerics
are the eigendecompositions along the path.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .flowderiv import qs_trace
from .spectra import (
    HermitianMatrix,
    NumericalError,
    UnitaryMatrix,
    UnitaryPath,
    ValidationError,
    decompose_unitary,
    matrix_function,
    path_point,
)

TWO_PI = 2.0 * math.pi
BREAKPOINT_MERGE_TOL = 1e-12
CLUSTER_ANGLE_TOL = 1e-3
MAX_REFINEMENT_DEPTH = 20


class TrackingError(NumericalError):
    """Eigenphase continuation failed; carries the offending s-interval."""

    def __init__(self, message, s_left, s_right):
        super().__init__(message)
        self.s_left = s_left
        self.s_right = s_right


@dataclass(frozen=True)
class TrackingPolicy:
    """Step-acceptance thresholds for eigenphase continuation.

    A step is accepted when every branch matches its successor with overlap
    at least ``min_overlap`` (or lands in a near-degenerate eigenvalue
    cluster holding that much combined overlap mass, where any assignment
    inside the cluster is harmless) and moves by at most ``max_increment``
    radians. Rejected steps are halved recursively up to depth 20.
    """

    initial_steps: int = 16
    min_overlap: float = 0.8
    max_increment: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.initial_steps, int) and self.initial_steps >= 1):
            raise ValidationError(f"initial_steps must be a positive integer, got {self.initial_steps}")
        if not (0.5 < self.min_overlap < 1.0):
            raise ValidationError(f"min_overlap must lie in (0.5, 1), got {self.min_overlap}")
        if not (0.0 < self.max_increment <= math.pi / 2.0):
            raise ValidationError(
                f"max_increment must lie in (0, pi/2], got {self.max_increment}"
            )


@dataclass(frozen=True)
class PhaseBraid:
    """Continuously tracked eigenphase branches along the path.

    ``phases[k, j]`` is the unwrapped phase of branch j at ``s_grid[k]``;
    branch identities are fixed by the s = 0 ordering. ``overlaps[k]`` is
    the weakest matching confidence used when stepping from grid node k to
    k + 1 (cluster-adjusted where a near-degeneracy was crossed).
    """

    s_grid: np.ndarray
    phases: np.ndarray
    overlaps: np.ndarray

    @property
    def n(self):
        return self.phases.shape[1]

    @property
    def start_angles(self):
        return self.phases[0]

    @property
    def end_angles(self):
        return self.phases[-1]


def _wrap_pm_pi(x):
    """Reduce to (-pi, pi]."""
    y = np.mod(-x + math.pi, TWO_PI)
    return math.pi - y


def track_eigenphases(u, a, policy=None):
    """Follow every eigenphase of V_s = e^{isA} U continuously over [0, 1].

    Branches are matched step to step by optimal assignment on eigenvector
    overlap magnitudes and continued to the representative nearest the
    previous phase. Steps failing the policy thresholds are bisected, to
    depth 20 at most; exhaustion raises TrackingError with the interval.
    """
    if policy is None:
        policy = TrackingPolicy()
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    path = UnitaryPath(u, a)
    n = u.n
    dec_cache = {}

    def dec_at(s):
        key = float(s)
        if key not in dec_cache:
            dec_cache[key] = decompose_unitary(path.point(key))
        return dec_cache[key]

    s_nodes = [0.0]
    dec0 = dec_at(0.0)
    theta = np.angle(dec0.values).astype(np.float64)
    phase_rows = [theta.copy()]
    overlap_rows = []
    vectors = dec0.vectors
    angle_cache = {0.0: np.angle(dec0.values)}

    def try_step(s_cur, s_next, vec_cur, theta_cur):
        """One continuation attempt; returns None if the policy rejects it."""
        dec = dec_at(s_next)
        vals = dec.values
        vecs = dec.vectors
        overlap = vec_cur.conj().T @ vecs  # overlap[j, l] = <v_j(cur), v_l(next)>
        mag = np.abs(overlap)
        row, col = linear_sum_assignment(-mag)
        perm = np.empty(n, dtype=np.intp)
        perm[row] = col
        angles = np.angle(vals)
        confidence = np.empty(n)
        for j in range(n):
            ov = mag[j, perm[j]]
            if ov < policy.min_overlap:
                # a near-degenerate cluster may hold the mass collectively;
                # intra-cluster assignment errors cannot change the shift
                gap = np.abs(_wrap_pm_pi(angles - angles[perm[j]]))
                cluster = gap <= CLUSTER_ANGLE_TOL
                mass = float(np.sum(mag[j, cluster] ** 2))
                if mass < policy.min_overlap**2:
                    return None
                confidence[j] = math.sqrt(mass)
            else:
                confidence[j] = ov
        increments = _wrap_pm_pi(angles[perm] - theta_cur)
        if np.abs(increments).max() > policy.max_increment:
            return None
        theta_next = theta_cur + increments
        return theta_next, vecs[:, perm], float(confidence.min())

    def advance(s_cur, s_target, vec_cur, theta_cur, depth):
        result = try_step(s_cur, s_target, vec_cur, theta_cur)
        if result is not None:
            theta_next, vec_next, conf = result
            s_nodes.append(s_target)
            phase_rows.append(theta_next)
            overlap_rows.append(conf)
            return vec_next, theta_next
        if depth >= MAX_REFINEMENT_DEPTH:
            raise TrackingError(
                f"eigenphase continuation failed on [{s_cur:.9g}, {s_target:.9g}] "
                f"after {MAX_REFINEMENT_DEPTH} refinement levels",
                s_cur, s_target,
            )
        s_mid = 0.5 * (s_cur + s_target)
        vec_mid, theta_mid = advance(s_cur, s_mid, vec_cur, theta_cur, depth + 1)
        return advance(s_mid, s_target, vec_mid, theta_mid, depth + 1)

    for k in range(policy.initial_steps):
        s_target = (k + 1) / policy.initial_steps
        vectors, theta = advance(s_nodes[-1], s_target, vectors, theta, 0)

    return PhaseBraid(
        s_grid=np.asarray(s_nodes),
        phases=np.asarray(phase_rows),
        overlaps=np.asarray(overlap_rows),
    )


def nu_weights(dec, a):
    """Per-cluster weights trace(P_cluster A) of the derivative measure."""
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    if dec.n != a.n:
        raise ValidationError(f"dimension mismatch: decomposition is {dec.n}, A is {a.n}")
    q = dec.vectors
    diag = np.einsum("ji,jk,ki->i", q.conj(), a.array, q)
    return [float(np.sum(diag[list(cluster)]).real) for cluster in dec.clusters]


@dataclass(frozen=True)
class SpectralShiftFunction:
    """Piecewise-constant shift function on the circle, zero-mean normalized.

    Arc i runs from breakpoints[i] to breakpoints[(i+1) % len] (the last arc
    wraps through 2pi). ``values[i] + normalization_shift`` is the raw
    integer flow count times -1 on that arc; ``normalization_shift`` is the
    constant that was subtracted to make the mean zero, absorbing the gauge
    freedom of the trace formula.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    normalization_shift: float

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if bp.ndim != 1 or bp.shape[0] == 0 or vals.shape != bp.shape:
            raise ValidationError("breakpoints and values must be matching non-empty vectors")
        if np.any(bp < 0.0) or np.any(bp >= TWO_PI) or np.any(np.diff(bp) <= 0.0):
            raise ValidationError("breakpoints must be strictly increasing within [0, 2pi)")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def arc_lengths(self):
        bp = self.breakpoints
        if bp.shape[0] == 1:
            return np.array([TWO_PI])
        out = np.empty_like(bp)
        out[:-1] = np.diff(bp)
        out[-1] = TWO_PI - bp[-1] + bp[0]
        return out

    def mean(self):
        return float(np.dot(self.values, self.arc_lengths) / TWO_PI)

    def shifted(self, chi):
        """Same function with a constant added to every value (gauge move)."""
        return SpectralShiftFunction(
            breakpoints=self.breakpoints.copy(),
            values=self.values + float(chi),
            normalization_shift=self.normalization_shift - float(chi),
        )

    def __call__(self, theta):
        theta = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
        idx = np.searchsorted(self.breakpoints, theta, side="right") - 1
        return self.values[idx]  # index -1 wraps to the last arc, as it must


def _fold(x):
    return np.mod(x, TWO_PI)


def build_ssf(braid):
    """Spectral shift function from a tracked braid's endpoint windings.

    For each branch with unwrapped endpoints (a_j, b_j), the net number of
    times it sweeps past angle theta + 2pi k over all k is

        C_j(theta) = floor((b_j - theta)/2pi) - floor((a_j - theta)/2pi),

    an exact integer depending only on the endpoints. The raw shift is
    -sum_j C_j on each arc between folded endpoints; the stored values have
    the mean subtracted (recorded as normalization_shift).
    """
    a_ends = np.asarray(braid.start_angles, dtype=np.float64)
    b_ends = np.asarray(braid.end_angles, dtype=np.float64)
    if a_ends.shape != b_ends.shape or a_ends.ndim != 1 or a_ends.size == 0:
        raise ValidationError("braid endpoints are malformed")

    folded = np.sort(_fold(np.concatenate([a_ends, b_ends])))
    # dedupe, including the cyclic seam at 2pi
    keep = [folded[0]]
    for x in folded[1:]:
        if x - keep[-1] > BREAKPOINT_MERGE_TOL:
            keep.append(x)
    if len(keep) > 1 and (TWO_PI - keep[-1] + keep[0]) <= BREAKPOINT_MERGE_TOL:
        keep.pop()
    bp = np.asarray(keep)

    arcs = np.empty_like(bp)
    arcs[:-1] = np.diff(bp)
    arcs[-1] = TWO_PI - bp[-1] + bp[0] if bp.shape[0] > 1 else TWO_PI
    mids = bp + arcs / 2.0

    counts = np.floor((b_ends[None, :] - mids[:, None]) / TWO_PI) - np.floor(
        (a_ends[None, :] - mids[:, None]) / TWO_PI
    )
    raw = -np.sum(counts, axis=1)
    err = np.abs(raw - np.round(raw)).max()
    if err > 1e-9:
        raise NumericalError(f"flow counts deviate from integers by {err:.3e}")
    raw = np.round(raw)

    # coalesce adjacent arcs of equal value (cyclically)
    if bp.shape[0] > 1:
        change = np.nonzero(raw != np.roll(raw, 1))[0]
        if change.size == 0:
            bp = bp[:1]
            raw = raw[:1]
        else:
            bp = bp[change]
            raw = raw[change]

    shift = float(np.dot(raw, _arc_lengths_of(bp)) / TWO_PI)
    return SpectralShiftFunction(
        breakpoints=bp, values=raw - shift, normalization_shift=shift
    )


def _arc_lengths_of(bp):
    if bp.shape[0] == 1:
        return np.array([TWO_PI])
    out = np.empty_like(bp)
    out[:-1] = np.diff(bp)
    out[-1] = TWO_PI - bp[-1] + bp[0]
    return out


def krein_rhs(ssf, f):
    """Right-hand side of the trace formula, exactly, by arc telescoping.

    integral of g'(theta) xi(theta) over the circle with g = f(e^{i.}) and
    xi constant on arcs reduces to sum_i xi_i (g(end_i) - g(start_i)); the
    function is only ever evaluated, never numerically integrated. Constant
    shifts of xi cancel exactly by periodicity.
    """
    bp = ssf.breakpoints
    g = np.atleast_1d(np.asarray(f.eval(np.exp(1j * bp)), dtype=np.complex128))
    diffs = np.roll(g, -1) - g
    return complex(np.dot(ssf.values, diffs))


@dataclass(frozen=True)
class VerifyReport:
    """Both sides of the trace formula for one instance."""

    lhs: complex
    rhs: complex
    abs_error: float
    rel_error: float


def verify_trace_formula(f, u, a, policy=None):
    """Compare trace(f(U) - f(V)) with the shift-function integral."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    v = path_point(u, a, 1.0)
    lhs = complex(
        np.trace(matrix_function(decompose_unitary(u), f))
        - np.trace(matrix_function(decompose_unitary(v), f))
    )
    braid = track_eigenphases(u, a, policy)
    rhs = krein_rhs(build_ssf(braid), f)
    abs_error = abs(lhs - rhs)
    return VerifyReport(
        lhs=lhs, rhs=rhs, abs_error=abs_error, rel_error=abs_error / (1.0 + abs(lhs))
    )


def qs_trace_quadrature(f, u, a, steps):
    """Composite Simpson quadrature of s -> trace Q_s over [0, 1].

    ``steps`` is the (even, >= 2) number of subintervals. Converges at
    fourth order to trace(f(V) - f(U)), the independent route to the same
    number the shift function produces exactly.
    """
    if not (isinstance(steps, (int, np.integer)) and steps >= 2):
        raise ValidationError(f"steps must be an integer >= 2, got {steps}")
    if steps % 2 != 0:
        raise ValidationError(f"composite Simpson needs an even step count, got {steps}")
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    h = 1.0 / steps
    total = 0.0 + 0.0j
    for k in range(steps + 1):
        w = 1.0 if k in (0, steps) else (4.0 if k % 2 == 1 else 2.0)
        total += w * qs_trace(f, u, a, k * h)
    return total * (h / 3.0)


@dataclass(frozen=True)
class TwistScan:
    """Samples of zeta -> trace(f(zeta U) - f(zeta V)) on a uniform grid."""

    zetas: np.ndarray
    values: np.ndarray
    max_jump: float

    def __iter__(self):
        return iter(zip(self.zetas, self.values))


def twist_scan(f, u, v, grid):
    """Sample the twisted trace difference at the grid-th roots of unity.

    Reports the largest adjacent (cyclic) jump; continuity supplies no
    modulus, so the jump is data, not an asserted bound.
    """
    if not (isinstance(grid, (int, np.integer)) and grid >= 8):
        raise ValidationError(f"grid must be an integer >= 8, got {grid}")
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    if not isinstance(v, UnitaryMatrix):
        v = UnitaryMatrix(v)
    if u.n != v.n:
        raise ValidationError(f"dimension mismatch: U is {u.n}, V is {v.n}")
    rank = int(np.linalg.matrix_rank(u.array - v.array))
    if rank > u.n:  # defensive; matrix_rank cannot exceed n
        raise ValidationError(f"difference rank {rank} exceeds dimension {u.n}")
    lam = decompose_unitary(u).values
    mu = decompose_unitary(v).values
    zetas = np.exp(2j * math.pi * np.arange(grid) / grid)
    values = np.empty(grid, dtype=np.complex128)
    for k, z in enumerate(zetas):
        values[k] = np.sum(f.eval(z * lam)) - np.sum(f.eval(z * mu))
    jumps = np.abs(np.roll(values, -1) - values)
    return TwistScan(zetas=zetas, values=values, max_jump=float(jumps.max()))

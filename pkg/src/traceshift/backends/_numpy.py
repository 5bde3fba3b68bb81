"""Pure-numpy implementations of the hot numeric kernels.

Reference semantics for the numba build in ``_numba``; every function here
must agree with its numba twin to near machine precision (see
tests/test_backends.py).
"""

import numpy as np

NAME = "numpy"


def trig_dd_grid(coeffs, zl, zr):
    """Divided differences of a trigonometric polynomial on a point grid.

    ``coeffs`` holds c_k for k = -d..d; the function is f(z) = sum c_k z^k on
    the unit circle. Entry (i, j) is (f(zl_i) - f(zr_j)) / (zl_i - zr_j)
    evaluated by exact division,

        (z^k - w^k)/(z - w) = sum_{m=0}^{k-1} z^m w^{k-1-m},

    which is cancellation-free and gives f'(z) on the diagonal with no
    special casing. Writing the double sum as a Hankel quadratic form turns
    the assembly into two small matmuls.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    zl = np.asarray(zl, dtype=np.complex128)
    zr = np.asarray(zr, dtype=np.complex128)
    d = (coeffs.shape[0] - 1) // 2
    out = np.zeros((zl.shape[0], zr.shape[0]), dtype=np.complex128)
    if d == 0:
        return out
    # positive part: sum_{p,q>=0, p+q+1<=d} c_{p+q+1} z^p w^q
    wpos = np.zeros((d, d), dtype=np.complex128)
    for p in range(d):
        for q in range(d - p):
            wpos[p, q] = coeffs[d + p + q + 1]
    pl = zl[:, None] ** np.arange(d)[None, :]
    pr = zr[:, None] ** np.arange(d)[None, :]
    out += (pl @ wpos) @ pr.T
    # negative part: -sum_{p,q>=1, p+q-1<=d} c_{-(p+q-1)} z^-p w^-q
    wneg = np.zeros((d, d), dtype=np.complex128)
    for p in range(1, d + 1):
        for q in range(1, d + 2 - p):
            wneg[p - 1, q - 1] = coeffs[d - (p + q - 1)]
    nl = zl[:, None] ** (-np.arange(1, d + 1))[None, :]
    nr = zr[:, None] ** (-np.arange(1, d + 1))[None, :]
    out -= (nl @ wneg) @ nr.T
    return out


def poly_dd_grid(coeffs, xl, xr):
    """Divided differences of a polynomial (ascending coeffs) on a real grid."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    xl = np.asarray(xl, dtype=np.float64)
    xr = np.asarray(xr, dtype=np.float64)
    d = coeffs.shape[0] - 1
    out = np.zeros((xl.shape[0], xr.shape[0]), dtype=np.complex128)
    if d == 0:
        return out
    w = np.zeros((d, d), dtype=np.complex128)
    for p in range(d):
        for q in range(d - p):
            w[p, q] = coeffs[p + q + 1]
    pl = (xl[:, None] ** np.arange(d)[None, :]).astype(np.complex128)
    pr = (xr[:, None] ** np.arange(d)[None, :]).astype(np.complex128)
    out += (pl @ w) @ pr.T
    return out


def psd_feasibility(phi, c, max_iter, accept_tol):
    """Alternating projections for the Schur-norm completion problem.

    Seeks X = [[S, phi], [phi*, R]] >= 0 with diag <= c by alternating
    between the PSD cone (eigenvalue clipping) and the constraint set
    (fixed off-diagonal blocks, clipped diagonal). Returns the last PSD
    iterate together with its distance-to-constraints diagnostics.

    Returns (y, iterations, offdiag_resid, diag_excess, converged).
    """
    n, m = phi.shape
    nn = n + m
    x = np.zeros((nn, nn), dtype=np.complex128)
    for k in range(nn):
        x[k, k] = c
    x[:n, n:] = phi
    x[n:, :n] = phi.conj().T
    y = x
    offdiag = np.inf
    excess = 0.0
    converged = False
    it = 0
    check_every = 250
    prev_resid = np.inf
    while it < max_iter:
        it += 1
        # PSD projection
        w, v = np.linalg.eigh(x)
        wc = np.maximum(w, 0.0)
        y = (v * wc) @ v.conj().T
        # distance to the constraint set
        offdiag = np.linalg.norm(y[:n, n:] - phi)
        dre = np.real(np.diag(y))
        excess = max(float(np.max(dre - c)), 0.0)
        resid = np.hypot(offdiag, excess)
        if resid <= accept_tol:
            converged = True
            break
        if it % check_every == 0:
            if resid > 0.9 * prev_resid:
                break  # stalled; caller treats as infeasible at this c
            prev_resid = resid
        # constraint projection
        x = y.copy()
        x[:n, n:] = phi
        x[n:, :n] = phi.conj().T
        for k in range(nn):
            x[k, k] = min(float(np.real(x[k, k])), c)
    return y, it, float(offdiag), float(excess), converged


def probe_ratio_batch(phi, probes):
    """Certified transformer ratios ||phi o T|| / ||T|| for stacked probes."""
    phi = np.asarray(phi, dtype=np.complex128)
    probes = np.asarray(probes, dtype=np.complex128)
    num = np.linalg.svd(phi[None, :, :] * probes, compute_uv=False)[:, 0]
    den = np.linalg.svd(probes, compute_uv=False)[:, 0]
    return num / den


def polar_ascent(phi, t0, iters):
    """Power-type ascent on T -> ||phi o T|| over the operator-norm ball.

    Alternates the top singular pair of phi o T with the S1-polar update of
    the resulting linear objective in T. Every visited ratio is certified
    exactly; the best one is returned with its probe.
    """
    phi = np.asarray(phi, dtype=np.complex128)
    t = np.asarray(t0, dtype=np.complex128)
    s0 = np.linalg.svd(t, compute_uv=False)[0]
    if s0 == 0.0:
        return 0.0, t
    t = t / s0
    best = 0.0
    best_t = t.copy()
    for _ in range(iters):
        u, s, vh = np.linalg.svd(phi * t)
        tn = np.linalg.svd(t, compute_uv=False)[0]
        if tn == 0.0 or s[0] == 0.0:
            break
        ratio = s[0] / tn
        if ratio > best:
            best = ratio
            best_t = t.copy()
        # objective Re sum_ij T_ij W_ij with W_ij = conj(u_i) phi_ij v_j
        w = np.conj(u[:, 0])[:, None] * phi * np.conj(vh[0, :])[None, :]
        # thin SVD: the polar partial isometry must have T's (n, m) shape
        um, sm, vm = np.linalg.svd(w.T, full_matrices=False)
        t_next = (vm.conj().T) @ (um.conj().T)
        if np.allclose(t_next, t, rtol=0.0, atol=1e-14):
            break
        t = t_next
    return float(best), best_t

"""Numba builds of the hot kernels. Same contracts as ``_numpy``."""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _trig_dd_point(coeffs, d, zi, wj):
    # positive powers: S_k = sum_{m=0}^{k-1} zi^m wj^{k-1-m}, S_{k+1} = S_k*wj + zi^k
    acc = 0.0 + 0.0j
    s = 0.0 + 0.0j
    zpow = 1.0 + 0.0j
    for k in range(1, d + 1):
        s = s * wj + zpow
        zpow *= zi
        acc += coeffs[d + k] * s
    # negative powers: T_m = sum_{j=0}^{m-1} zi^(j-m) wj^(-1-j),
    # T_{m+1} = (T_m + wj^-(m+1)) / zi; contribution is -c_{-m} T_m
    t = 0.0 + 0.0j
    winv = 1.0 / wj
    wneg = 1.0 + 0.0j
    for m in range(1, d + 1):
        wneg *= winv
        t = (t + wneg) / zi
        acc -= coeffs[d - m] * t
    return acc


@njit(cache=True)
def trig_dd_grid(coeffs, zl, zr):
    d = (coeffs.shape[0] - 1) // 2
    out = np.zeros((zl.shape[0], zr.shape[0]), dtype=np.complex128)
    if d == 0:
        return out
    for i in range(zl.shape[0]):
        for j in range(zr.shape[0]):
            out[i, j] = _trig_dd_point(coeffs, d, zl[i], zr[j])
    return out


@njit(cache=True)
def poly_dd_grid(coeffs, xl, xr):
    d = coeffs.shape[0] - 1
    out = np.zeros((xl.shape[0], xr.shape[0]), dtype=np.complex128)
    if d == 0:
        return out
    for i in range(xl.shape[0]):
        for j in range(xr.shape[0]):
            xi = xl[i]
            yj = xr[j]
            acc = 0.0 + 0.0j
            s = 0.0 + 0.0j
            xpow = 1.0
            for k in range(1, d + 1):
                s = s * yj + xpow
                xpow *= xi
                acc += coeffs[k] * s
            out[i, j] = acc
    return out


@njit(cache=True)
def psd_feasibility(phi, c, max_iter, accept_tol):
    n, m = phi.shape
    nn = n + m
    x = np.zeros((nn, nn), dtype=np.complex128)
    for k in range(nn):
        x[k, k] = c
    x[:n, n:] = phi
    x[n:, :n] = phi.conj().T
    y = x.copy()
    offdiag = 1e300
    excess = 0.0
    converged = False
    it = 0
    prev_resid = 1e300
    while it < max_iter:
        it += 1
        w, v = np.linalg.eigh(x)
        wc = np.maximum(w, 0.0).astype(np.complex128)
        y = (v * wc) @ v.conj().T
        off = 0.0
        for i in range(n):
            for j in range(m):
                dz = y[i, n + j] - phi[i, j]
                off += dz.real * dz.real + dz.imag * dz.imag
        offdiag = np.sqrt(off)
        excess = 0.0
        for k in range(nn):
            e = y[k, k].real - c
            if e > excess:
                excess = e
        resid = np.hypot(offdiag, excess)
        if resid <= accept_tol:
            converged = True
            break
        if it % 250 == 0:
            if resid > 0.9 * prev_resid:
                break
            prev_resid = resid
        x = y.copy()
        x[:n, n:] = phi
        x[n:, :n] = phi.conj().T
        for k in range(nn):
            dk = x[k, k].real
            if dk > c:
                dk = c
            x[k, k] = dk
    return y, it, offdiag, excess, converged


@njit(cache=True)
def probe_ratio_batch(phi, probes):
    k = probes.shape[0]
    out = np.empty(k, dtype=np.float64)
    for t in range(k):
        num = np.linalg.svd(phi * probes[t])[1][0]
        den = np.linalg.svd(probes[t].copy())[1][0]
        out[t] = num / den
    return out


@njit(cache=True)
def polar_ascent(phi, t0, iters):
    t = t0.copy()
    s0 = np.linalg.svd(t)[1][0]
    if s0 == 0.0:
        return 0.0, t
    t = t / s0
    best = 0.0
    best_t = t.copy()
    for _ in range(iters):
        u, s, vh = np.linalg.svd(phi * t)
        tn = np.linalg.svd(t)[1][0]
        if tn == 0.0 or s[0] == 0.0:
            break
        ratio = s[0] / tn
        if ratio > best:
            best = ratio
            best_t = t.copy()
        w = np.conj(u[:, 0]).reshape(-1, 1) * phi * np.conj(vh[0, :]).reshape(1, -1)
        # thin SVD: the polar partial isometry must have T's (n, m) shape
        um, sm, vm = np.linalg.svd(w.T.copy(), False)
        t_next = (vm.conj().T) @ (um.conj().T)
        delta = np.abs(t_next - t).max()
        t = t_next
        if delta <= 1e-14:
            break
    return best, best_t

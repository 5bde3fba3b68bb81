"""Double operator integrals: Schur product in eigenbases, the
function-difference identity, diagonal traces, and the transformer bound."""

import numpy as np
import pytest

from traceshift.circlefn import CircleFunction, random_trig_poly
from traceshift.doi import (
    KernelMatrix,
    dd_kernel,
    doi_compute,
    doi_trace,
    function_difference_doi,
    trace_norm,
)
from traceshift.multiplier import schur_norm
from traceshift.spectra import (
    UnitaryMatrix,
    ValidationError,
    decompose_unitary,
    matrix_function,
    path_point,
    random_haar_unitary,
    random_hermitian,
)


def _ginibre(n, seed):
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def test_kernel_matrix_validation():
    with pytest.raises(ValidationError):
        KernelMatrix(np.ones(3), np.ones(2), np.ones((2, 2)))
    with pytest.raises(ValidationError):
        KernelMatrix(np.ones(2), np.ones(2), np.full((2, 2), np.inf))
    k = KernelMatrix.from_function(lambda x, y: x * y, [1.0, 2.0], [3.0, 4.0])
    assert np.allclose(k.values, [[3.0, 4.0], [6.0, 8.0]])
    assert np.allclose(k.diagonal, [3.0, 8.0])


def test_all_ones_kernel_returns_integrand():
    u = random_haar_unitary(5, 1)
    dec = decompose_unitary(u)
    kernel = KernelMatrix(dec.rep_values, dec.rep_values,
                          np.ones((5, 5), dtype=complex))
    t = _ginibre(5, 2)
    out = doi_compute(kernel, dec, t, dec)
    assert np.linalg.norm(out - t) <= 1e-12 * np.linalg.norm(t)
    assert abs(doi_trace(kernel, dec, t) - np.trace(t)) <= 1e-12


def test_left_eigenvalue_kernel_multiplies():
    u = random_haar_unitary(6, 3)
    dec = decompose_unitary(u)
    kernel = KernelMatrix.from_function(lambda x, y: x, dec.rep_values, dec.rep_values)
    t = _ginibre(6, 4)
    out = doi_compute(kernel, dec, t, dec)
    assert np.linalg.norm(out - u.array @ t) <= 1e-10


def test_function_difference_identity_seed3():
    f = random_trig_poly(5, 3)
    u = random_haar_unitary(8, 3)
    a = random_hermitian(8, 3, 1.5, 10003)
    v = path_point(u, a, 1.0)
    direct = (matrix_function(decompose_unitary(u), f)
              - matrix_function(decompose_unitary(v), f))
    out = function_difference_doi(f, u, v)
    assert np.linalg.norm(out - direct) <= 1e-9 * (1.0 + np.linalg.norm(direct))


def test_function_difference_battery():
    for seed in range(1, 21):
        n = 2 + (seed % 7)
        f = random_trig_poly(1 + seed % 5, seed)
        u = random_haar_unitary(n, seed)
        a = random_hermitian(n, min(2, n), 1.5, seed + 10000)
        v = path_point(u, a, 1.0)
        fu = matrix_function(decompose_unitary(u), f)
        fv = matrix_function(decompose_unitary(v), f)
        err = np.linalg.norm(function_difference_doi(f, u, v) - (fu - fv))
        assert err <= 1e-9 * (1.0 + np.linalg.norm(fu))


def test_doi_linearity():
    u = random_haar_unitary(6, 5)
    dec = decompose_unitary(u)
    f = random_trig_poly(4, 6)
    kernel = dd_kernel(f, dec, dec)
    t = _ginibre(6, 7)
    s = _ginibre(6, 8)
    alpha, beta = 1.3 - 0.2j, -0.7 + 2.1j
    combined = doi_compute(kernel, dec, alpha * t + beta * s, dec)
    split = alpha * doi_compute(kernel, dec, t, dec) + beta * doi_compute(kernel, dec, s, dec)
    assert np.linalg.norm(combined - split) <= 1e-11 * np.linalg.norm(split)


def test_doi_trace_matches_full_integral():
    u = random_haar_unitary(6, 9)
    dec = decompose_unitary(u)
    kernel = dd_kernel(CircleFunction.monomial(3), dec, dec)
    t = _ginibre(6, 10)
    direct = complex(np.trace(doi_compute(kernel, dec, t, dec)))
    assert abs(doi_trace(kernel, dec, t) - direct) <= 1e-10


def test_trace_norm_values():
    assert trace_norm(np.zeros((3, 3))) == 0.0
    assert trace_norm(np.diag([3.0, -4.0j])) == pytest.approx(7.0, abs=1e-12)


def test_transformer_bound_battery():
    # trace_norm(DOI of the divided-difference kernel) stays below the
    # certified multiplier norm times trace_norm(T), with additive slack
    for seed in range(1, 101):
        n = 2 + (seed % 7)
        f = random_trig_poly(1 + seed % 6, seed + 400)
        u = random_haar_unitary(n, seed + 500)
        a = random_hermitian(n, min(2, n), 1.5, seed + 600)
        v = path_point(u, a, 1.0)
        dec_u = decompose_unitary(u)
        dec_v = decompose_unitary(v)
        kernel = dd_kernel(f, dec_u, dec_v)
        t = _ginibre(n, seed + 700)
        lhs = trace_norm(doi_compute(kernel, dec_u, t, dec_v))
        bound = schur_norm(kernel, tol=5e-3, seed=seed, max_iter=1500).value
        assert lhs <= bound * trace_norm(t) + 1e-8


def test_degenerate_spectrum_uses_cluster_representative():
    # exactly repeated eigenvalues: the kernel diagonal is the derivative at
    # the cluster representative, and the identity still holds
    u = UnitaryMatrix(np.diag([1.0, 1.0, 1j, -1j]))
    f = random_trig_poly(3, 12)
    a = random_hermitian(4, 2, 1.5, 13)
    v = path_point(u, a, 1.0)
    fu = matrix_function(decompose_unitary(u), f)
    fv = matrix_function(decompose_unitary(v), f)
    err = np.linalg.norm(function_difference_doi(f, u, v) - (fu - fv))
    assert err <= 1e-9 * (1.0 + np.linalg.norm(fu))


def test_grid_mismatch_rejected():
    u = random_haar_unitary(4, 14)
    dec = decompose_unitary(u)
    good = dd_kernel(CircleFunction.monomial(1), dec, dec)
    other = decompose_unitary(random_haar_unitary(4, 15))
    with pytest.raises(ValidationError):
        doi_compute(good, other, np.eye(4), dec)
    wrong_size = KernelMatrix(np.ones(3), np.ones(3), np.ones((3, 3)))
    with pytest.raises(ValidationError):
        doi_compute(wrong_size, dec, np.eye(4), dec)
    with pytest.raises(ValidationError):
        doi_compute(good, dec, np.eye(3), dec)


def test_function_difference_dimension_mismatch():
    u = random_haar_unitary(3, 16)
    v = random_haar_unitary(4, 17)
    with pytest.raises(ValidationError):
        function_difference_doi(CircleFunction.monomial(1), u, v)

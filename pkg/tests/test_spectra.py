"""Validated matrix types, decompositions, paths, and random instances."""

import numpy as np
import pytest

from traceshift.spectra import (
    HermitianMatrix,
    UnitaryMatrix,
    ValidationError,
    decompose_hermitian,
    decompose_unitary,
    matrix_function,
    path_point,
    random_haar_unitary,
    random_hermitian,
    UnitaryPath,
)


def test_unitary_accepts_haar_and_rejects_perturbation():
    u = random_haar_unitary(6, 0)
    assert np.linalg.norm(u.array.conj().T @ u.array - np.eye(6)) <= 1e-10 * 6
    bad = u.array + 1e-6
    with pytest.raises(ValidationError):
        UnitaryMatrix(bad)


def test_unitary_rejects_nonsquare_and_nonfinite():
    with pytest.raises(ValidationError):
        UnitaryMatrix(np.ones((2, 3)))
    m = np.eye(3, dtype=complex)
    m[0, 0] = np.nan
    with pytest.raises(ValidationError):
        UnitaryMatrix(m)


def test_hermitian_zero_and_diagonal():
    dec = decompose_hermitian(HermitianMatrix(np.zeros((2, 2))))
    assert np.allclose(dec.values, [0.0, 0.0])
    dec = decompose_hermitian(HermitianMatrix(np.diag([-1.0, 3.0])))
    assert np.allclose(dec.values, [-1.0, 3.0])


def test_hermitian_rejects_asymmetric():
    with pytest.raises(ValidationError):
        HermitianMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_unitary_decomposition_seed42_reconstruction():
    u = random_haar_unitary(8, 42)
    dec = decompose_unitary(u)
    err = np.linalg.norm(u.array - dec.reconstruct())
    assert err <= 1e-9 * np.linalg.norm(u.array)
    # angle-sorted eigenvalues on the unit circle
    ang = np.angle(dec.values)
    assert np.all(np.diff(ang) >= 0.0)
    assert np.max(np.abs(np.abs(dec.values) - 1.0)) <= 1e-9


def test_decompose_reconstruct_battery():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(2, 33))
        u = random_haar_unitary(n, int(rng.integers(0, 10**6)))
        dec = decompose_unitary(u)
        rel = np.linalg.norm(u.array - dec.reconstruct()) / np.linalg.norm(u.array)
        assert rel <= 1e-9
        # orthonormal eigenvectors even near degeneracies
        q = dec.vectors
        assert np.linalg.norm(q.conj().T @ q - np.eye(n)) <= 1e-10 * n


def test_rank_two_hermitian_kernel_dimension():
    # independent construction from two outer products
    rng = np.random.default_rng(7)
    g1 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    g2 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    a = np.outer(g1, g1.conj()) - np.outer(g2, g2.conj())
    dec = decompose_hermitian(HermitianMatrix(a))
    assert np.sum(np.abs(dec.values) <= 1e-10) >= 4

    b = random_hermitian(6, 2, 1.5, 7)
    dec_b = decompose_hermitian(b)
    assert np.sum(np.abs(dec_b.values) <= 1e-10) == 4


def test_matrix_function_identity_and_square():
    u = random_haar_unitary(5, 3)
    dec = decompose_unitary(u)
    assert np.linalg.norm(matrix_function(dec, lambda z: z) - u.array) <= 1e-10
    d = UnitaryMatrix(np.diag([1j, 1.0]))
    out = matrix_function(decompose_unitary(d), lambda z: z**2)
    assert np.linalg.norm(out - np.diag([-1.0, 1.0])) <= 1e-10


def test_matrix_function_cube_oracle():
    u = random_haar_unitary(8, 11)
    cube = u.array @ u.array @ u.array
    out = matrix_function(decompose_unitary(u), lambda z: z**3)
    assert np.linalg.norm(out - cube) <= 1e-9


def test_matrix_function_multiplicativity():
    u = random_haar_unitary(7, 5)
    dec = decompose_unitary(u)
    prod = np.eye(7, dtype=complex)
    for k in range(1, 6):
        prod = prod @ u.array
        out = matrix_function(dec, lambda z, k=k: z**k)
        assert np.linalg.norm(out - prod) <= 1e-9 * k


def test_path_point_at_zero_and_zero_generator():
    u = random_haar_unitary(4, 9)
    a = random_hermitian(4, 2, 1.5, 10)
    assert np.linalg.norm(path_point(u, a, 0.0).array - u.array) <= 1e-12
    zero = HermitianMatrix(np.zeros((4, 4)))
    for s in (0.3, 1.0, 2.5):
        assert np.linalg.norm(path_point(u, zero, s).array - u.array) <= 1e-12


def test_path_semigroup_property():
    u = random_haar_unitary(6, 21)
    a = random_hermitian(6, 3, 1.5, 22)
    path = UnitaryPath(u, a)
    lhs = path.point(0.6).array
    rhs = path.exponential(0.3) @ path.point(0.3).array
    assert np.linalg.norm(lhs - rhs) <= 1e-10


def test_path_point_stays_unitary():
    u = random_haar_unitary(5, 31)
    a = random_hermitian(5, 2, 1.5, 32)
    for s in (-1.0, 0.25, 0.5, 1.0, 3.0):
        path_point(u, a, s)  # constructor validates unitarity
    with pytest.raises(ValidationError):
        UnitaryPath(u, a).point(np.inf)


def test_haar_scalar_and_determinism():
    one = random_haar_unitary(1, 0)
    assert abs(abs(one.array[0, 0]) - 1.0) <= 1e-12
    again = random_haar_unitary(7, 123)
    assert np.array_equal(again.array, random_haar_unitary(7, 123).array)
    assert not np.array_equal(again.array, random_haar_unitary(7, 124).array)


def test_haar_trace_statistics():
    # |trace| of a Haar unitary has mean close to sqrt(pi)/2 ~ 0.886
    vals = [abs(np.trace(random_haar_unitary(8, seed).array)) for seed in range(1000)]
    mean = float(np.mean(vals))
    assert 0.6 <= mean <= 1.2


def test_random_hermitian_rank_and_magnitudes():
    a = random_hermitian(3, 1, 1.0, 5)
    w = decompose_hermitian(a).values
    nonzero = w[np.abs(w) > 1e-12]
    assert nonzero.shape[0] == 1
    assert np.abs(nonzero[0]) <= 1.0

    b = random_hermitian(6, 3, 1.5, 8)
    wb = decompose_hermitian(b).values
    assert np.sum(np.abs(wb) > 1e-12) == 3
    assert np.max(np.abs(wb)) <= 1.5 + 1e-12

    with pytest.raises(ValidationError):
        random_hermitian(3, 0, 1.0, 1)
    with pytest.raises(ValidationError):
        random_hermitian(3, 4, 1.0, 1)


def test_cluster_representatives_on_degenerate_spectrum():
    u = UnitaryMatrix(np.diag([1.0, 1.0, 1j]))
    dec = decompose_unitary(u)
    sizes = sorted(len(c) for c in dec.clusters)
    assert sizes == [1, 2]
    # rep values are constant on each cluster and sit on the circle
    for cluster in dec.clusters:
        reps = dec.rep_values[list(cluster)]
        assert np.all(reps == reps[0])
        assert abs(abs(reps[0]) - 1.0) <= 1e-12


def test_decomposition_gap_tol_validation():
    u = random_haar_unitary(3, 2)
    with pytest.raises(ValidationError):
        decompose_unitary(u, gap_tol=0.0)
    with pytest.raises(ValidationError):
        decompose_hermitian(random_hermitian(3, 1, 1.0, 2), gap_tol=-1.0)

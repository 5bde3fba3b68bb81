"""Function models on the circle and the line: evaluation, derivatives,
divided differences, rotation, serialization, and the built-ins."""

import numpy as np
import pytest

from traceshift.circlefn import (
    CircleFunction,
    LineFunction,
    NonDifferentiablePointError,
    builtin_circle_function,
    parse_circle_function,
    parse_line_function,
    random_trig_poly,
    trig_poly_from_json,
    trig_poly_to_json,
)
from traceshift.spectra import ValidationError


def _unit(rng, k):
    theta = rng.uniform(-np.pi, np.pi, size=k)
    return np.exp(1j * theta)


def test_trig_eval_against_direct_sum():
    rng = np.random.default_rng(0)
    f = random_trig_poly(5, 1)
    z = _unit(rng, 40)
    d = f.degree
    ks = np.arange(-d, d + 1)
    direct = (f.coeffs[None, :] * z[:, None] ** ks[None, :]).sum(axis=1)
    assert np.max(np.abs(f.eval(z) - direct)) <= 1e-12


def test_eval_rejects_off_circle_points():
    f = CircleFunction.monomial(2)
    with pytest.raises(ValidationError):
        f.eval(1.1)
    with pytest.raises(ValidationError):
        f.eval(np.array([1.0, 0.5 + 0.5j]))


def test_derivative_angle_closed_forms():
    assert abs(CircleFunction.monomial(1).derivative_angle(0.0) - 1j) <= 1e-14
    assert abs(CircleFunction.monomial(2).derivative_angle(np.pi / 2) - (-2j)) <= 1e-13
    two_cos = CircleFunction.trig_poly([1.0, 0.0, 1.0], label="2cos")
    val = two_cos.derivative_angle(np.pi / 3)
    assert abs(val - (-np.sqrt(3.0))) <= 1e-13


def test_rotate_square_by_i():
    f = CircleFunction.monomial(2)
    rot = f.rotate(1j)
    assert abs(rot.eval(1.0 + 0.0j) - (-1.0)) <= 1e-14
    # (i w)^2 = -w^2: rotation acts on coefficients as zeta^k
    assert np.allclose(rot.coeffs, [0, 0, 0, 0, -1])


def test_rotate_sampled_matches_composition():
    f = builtin_circle_function("abs-theta")
    zeta = np.exp(0.7j)
    rot = f.rotate(zeta)
    rng = np.random.default_rng(3)
    z = _unit(rng, 25)
    assert np.max(np.abs(rot.eval(z) - f.eval(zeta * z))) <= 1e-12


def test_divided_difference_symmetry_exact():
    rng = np.random.default_rng(4)
    f = random_trig_poly(6, 7)
    for _ in range(25):
        z, w = _unit(rng, 2)
        assert f.divided_difference(z, w) == f.divided_difference(w, z)


def test_divided_difference_matches_quotient_when_separated():
    rng = np.random.default_rng(5)
    for deg in (1, 3, 8):
        f = random_trig_poly(deg, deg + 10)
        for _ in range(40):
            z, w = _unit(rng, 2)
            if abs(z - w) < 1e-6:
                continue
            quotient = (f.eval(z) - f.eval(w)) / (z - w)
            exact = f.divided_difference(z, w)
            assert abs(exact - quotient) <= 1e-12 * deg**2 * max(1.0, abs(quotient))


def test_divided_difference_diagonal_limit_linear():
    f = random_trig_poly(4, 2)
    rng = np.random.default_rng(6)
    z = complex(_unit(rng, 1)[0])
    errs = []
    for h in (1e-2, 1e-3, 1e-4):
        dd = f.divided_difference(z, z * np.exp(1j * h))
        errs.append(abs(dd - f.derivative_z(z)))
    assert errs[0] / errs[1] == pytest.approx(10.0, rel=0.5)
    assert errs[1] / errs[2] == pytest.approx(10.0, rel=0.5)
    assert abs(f.divided_difference(z, z) - f.derivative_z(z)) <= 1e-12


def test_dd_grid_agrees_with_scalar_calls():
    f = random_trig_poly(3, 9)
    rng = np.random.default_rng(8)
    zl = _unit(rng, 6)
    zr = _unit(rng, 5)
    grid = f.dd_grid(zl, zr)
    for i, z in enumerate(zl):
        for j, w in enumerate(zr):
            assert abs(grid[i, j] - f.divided_difference(z, w)) <= 1e-12


def test_abs_theta_model():
    f = builtin_circle_function("abs-theta")
    theta = np.array([-2.0, -0.5, 0.5, 2.0])
    assert np.allclose(f.eval(np.exp(1j * theta)), np.abs(theta))
    assert np.allclose(f.derivative_angle(theta), np.sign(theta))
    with pytest.raises(NonDifferentiablePointError):
        f.derivative_angle(0.0)
    with pytest.raises(NonDifferentiablePointError):
        f.derivative_angle(np.pi)
    # off-diagonal divided differences use the raw quotient even when close:
    # straddling the corner symmetrically the quotient is exactly 0, while a
    # midpoint-derivative rule would report +-1
    z = np.exp(1j * 1e-10)
    dd = f.divided_difference(z, np.conj(z))
    assert abs(dd) <= 1e-12


def test_sawtooth_model():
    f = builtin_circle_function("sawtooth")
    theta = np.array([-3.0, -1.0, 0.0, 2.0])
    assert np.allclose(f.eval(np.exp(1j * theta)), theta)
    assert np.allclose(f.derivative_angle(np.array([0.1, -0.3])), 1.0)
    with pytest.raises(NonDifferentiablePointError):
        f.derivative_angle(np.pi)


def test_sampled_consistency_check_catches_wrong_derivative():
    with pytest.raises(ValidationError):
        CircleFunction.sampled(
            g=lambda t: np.cos(t),
            gprime=lambda t: np.cos(t),  # should be -sin
            lipschitz=1.0,
        )


def test_trig_json_round_trip():
    f = random_trig_poly(4, 17)
    obj = trig_poly_to_json(f)
    assert obj["schema"] == "traceshift/trigpoly/v1"
    g = trig_poly_from_json(obj)
    assert np.array_equal(f.coeffs, g.coeffs)
    with pytest.raises(ValidationError):
        trig_poly_from_json({"degree": 2, "coeffs_re": [1, 2], "coeffs_im": [0, 0]})


def test_builtin_names_and_parse(tmp_path):
    assert builtin_circle_function("z^3").degree == 3
    assert builtin_circle_function("z^-2").coeffs[0] == 1.0
    assert builtin_circle_function("cos").eval(1.0 + 0j) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        builtin_circle_function("tan")
    path = tmp_path / "poly.json"
    path.write_text(
        '{"degree": 1, "coeffs_re": [0.0, 0.0, 1.0], "coeffs_im": [0.0, 0.0, 0.0]}'
    )
    f = parse_circle_function(str(path))
    assert abs(f.eval(1j) - 1j) <= 1e-14
    with pytest.raises(ValidationError):
        parse_circle_function(str(tmp_path / "missing.json"))


def test_random_trig_poly_seeded():
    f = random_trig_poly(3, 5)
    g = random_trig_poly(3, 5)
    assert np.array_equal(f.coeffs, g.coeffs)
    assert f.lipschitz > 0.0
    with pytest.raises(ValidationError):
        random_trig_poly(0, 1)


def test_line_polynomial_eval_and_derivative():
    f = LineFunction.polynomial([1.0, -2.0, 0.0, 1.0])  # 1 - 2x + x^3
    x = np.array([-1.5, 0.0, 0.5, 2.0])
    assert np.allclose(f.eval(x), 1 - 2 * x + x**3)
    assert np.allclose(f.derivative(x), -2 + 3 * x**2)


def test_line_divided_difference_cube():
    f = LineFunction.monomial(3)
    xs = np.array([-1.0, 0.3, 2.0])
    grid = f.dd_grid(xs, xs)
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            assert abs(grid[i, j] - (x * x + x * y + y * y)) <= 1e-12
    # near-coincident arguments keep full precision via exact division
    dd = f.divided_difference(1.0, 1.0 + 1e-12)
    assert abs(dd - 3.0) <= 1e-9


def test_line_parse(tmp_path):
    assert parse_line_function("x^2").eval(3.0) == pytest.approx(9.0)
    path = tmp_path / "line.json"
    path.write_text('{"coeffs": [0.0, 0.0, 2.0]}')
    assert parse_line_function(str(path)).eval(2.0) == pytest.approx(8.0)
    with pytest.raises(ValidationError):
        parse_line_function("x^-1")

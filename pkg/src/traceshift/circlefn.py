"""Scalar functions on the unit circle and the real line.

Two models for circle functions: trigonometric polynomials (Laurent
coefficients c_k, k = -d..d, meaning f(e^{i theta}) = sum c_k e^{ik theta})
and sampled pairs (g, g') in angle coordinates with a declared Lipschitz
bound. Divided differences of trig polynomials are always computed by the
exact division

    (z^k - w^k)/(z - w) = sum_{m=0}^{k-1} z^m w^{k-1-m},

never by the raw quotient, so near-coincident points lose no precision and
the diagonal is the derivative with no special casing. Sampled models use
the raw quotient away from the diagonal and switch to the declared
derivative below a separation of DELTA_SWITCH; models with declared
non-differentiable points (|theta| and the sawtooth) keep the raw quotient
everywhere off-diagonal and refuse diagonal evaluation at those points.
"""

import json
import re

import numpy as np

from . import backends
from .spectra import ValidationError

DELTA_SWITCH = 1e-8
UNIT_MODULUS_TOL = 1e-9


class NonDifferentiablePointError(ValidationError):
    """Derivative requested at a declared non-differentiable angle."""


def _wrap_angle(theta):
    """Map angles to the branch (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(theta, dtype=np.float64)))


def _check_unit_modulus(z):
    z = np.asarray(z, dtype=np.complex128)
    dev = np.abs(np.abs(z) - 1.0)
    if np.max(dev) > UNIT_MODULUS_TOL:
        raise ValidationError(
            f"circle function evaluated off the unit circle: | |z|-1 | = {np.max(dev):.3e} "
            f"exceeds {UNIT_MODULUS_TOL:g}"
        )
    return z


class CircleFunction:
    """A function on the unit circle, either a TrigPoly or a Sampled pair."""

    def __init__(self, kind, coeffs=None, g=None, gprime=None, lipschitz=None,
                 nondifferentiable=(), label=None, _check=True):
        self.kind = kind
        self.label = label
        if kind == "trig":
            coeffs = np.asarray(coeffs, dtype=np.complex128)
            if coeffs.ndim != 1 or coeffs.shape[0] % 2 == 0:
                raise ValidationError(
                    f"trig coefficients must be a 1-d array of odd length 2d+1, got shape {coeffs.shape}"
                )
            if not np.all(np.isfinite(coeffs)):
                raise ValidationError("trig coefficients contain non-finite entries")
            self.coeffs = coeffs.copy()
            self.coeffs.setflags(write=False)
            self.g = None
            self.gprime = None
            self.lipschitz = float(np.abs(coeffs * np.arange(-(len(coeffs) // 2), len(coeffs) // 2 + 1)).sum())
            self.nondifferentiable = ()
        elif kind == "sampled":
            if g is None or gprime is None:
                raise ValidationError("sampled model needs both g and g' callables")
            if not (lipschitz is not None and lipschitz > 0 and np.isfinite(lipschitz)):
                raise ValidationError(f"sampled model needs a positive Lipschitz bound, got {lipschitz}")
            self.coeffs = None
            self.g = g
            self.gprime = gprime
            self.lipschitz = float(lipschitz)
            self.nondifferentiable = tuple(float(_wrap_angle(t)) for t in nondifferentiable)
            if _check:
                self._check_consistency()
        else:
            raise ValidationError(f"unknown circle function kind {kind!r}")

    # -- construction -----------------------------------------------------

    @classmethod
    def trig_poly(cls, coeffs, label=None):
        """Trig polynomial from Laurent coefficients ordered k = -d..d."""
        return cls("trig", coeffs=coeffs, label=label)

    @classmethod
    def monomial(cls, k):
        """f(z) = z^k."""
        if not isinstance(k, (int, np.integer)):
            raise ValidationError(f"monomial exponent must be an integer, got {k!r}")
        d = max(abs(int(k)), 1)
        coeffs = np.zeros(2 * d + 1, dtype=complex)
        coeffs[d + int(k)] = 1.0
        return cls("trig", coeffs=coeffs, label=f"z^{int(k)}")

    @classmethod
    def sampled(cls, g, gprime, lipschitz, nondifferentiable=(), label=None):
        """Sampled model (g, g') in angle coordinates with Lipschitz bound."""
        return cls("sampled", g=g, gprime=gprime, lipschitz=lipschitz,
                   nondifferentiable=nondifferentiable, label=label)

    def _check_consistency(self):
        """Finite-difference spot check that g' matches g on a probe grid."""
        h = 1e-5
        grid = _wrap_angle(np.linspace(-np.pi + 0.05, np.pi - 0.05, 41))
        if self.nondifferentiable:
            nd = np.asarray(self.nondifferentiable)
            dist = np.abs(_wrap_angle(grid[:, None] - nd[None, :])).min(axis=1)
            grid = grid[dist > 1e-2]
        fd = (np.asarray(self.g(grid + h)) - np.asarray(self.g(grid))) / h
        dev = np.max(np.abs(fd - np.asarray(self.gprime(grid))))
        tol = 1e-3 * (1.0 + self.lipschitz)
        if dev > tol:
            raise ValidationError(
                f"sampled pair fails the finite-difference consistency check: "
                f"max |(g(t+h)-g(t))/h - g'(t)| = {dev:.3e} exceeds {tol:.3e} at h={h:g}"
            )

    @property
    def degree(self):
        if self.kind != "trig":
            raise ValidationError("degree is defined for trig polynomials only")
        return (self.coeffs.shape[0] - 1) // 2

    # -- evaluation --------------------------------------------------------

    def eval(self, z):
        """f(z) for |z| within 1e-9 of 1. Horner evaluation for TrigPoly."""
        z = _check_unit_modulus(z)
        scalar = z.ndim == 0
        zv = np.atleast_1d(z)
        if self.kind == "trig":
            d = self.degree
            acc = np.zeros_like(zv)
            for k in range(2 * d, -1, -1):
                acc = acc * zv + self.coeffs[k]
            out = acc * zv ** (-d)
        else:
            out = np.asarray(self.g(np.angle(zv)), dtype=np.complex128)
        return out[0] if scalar else out

    def derivative_z(self, z):
        """Complex derivative f'(z) on the circle."""
        z = _check_unit_modulus(z)
        scalar = z.ndim == 0
        zv = np.atleast_1d(z)
        if self.kind == "trig":
            d = self.degree
            ks = np.arange(-d, d + 1)
            out = np.zeros_like(zv)
            for k, c in zip(ks, self.coeffs):
                if k != 0 and c != 0:
                    out = out + c * k * zv ** (k - 1)
        else:
            theta = np.angle(zv)
            self._require_differentiable(theta)
            # g(theta) = f(e^{i theta}) gives f'(z) = g'(theta) / (i z)
            out = np.asarray(self.gprime(theta), dtype=np.complex128) * (-1j) / zv
        return out[0] if scalar else out

    def derivative_angle(self, theta):
        """Angle-coordinate derivative g'(theta) = i e^{i theta} f'(e^{i theta})."""
        theta = np.asarray(theta, dtype=np.float64)
        scalar = theta.ndim == 0
        tv = np.atleast_1d(theta)
        if self.kind == "trig":
            d = self.degree
            z = np.exp(1j * tv)
            out = np.zeros(tv.shape, dtype=np.complex128)
            for k, c in zip(np.arange(-d, d + 1), self.coeffs):
                if k != 0 and c != 0:
                    out = out + 1j * k * c * z ** k
        else:
            self._require_differentiable(tv)
            out = np.asarray(self.gprime(_wrap_angle(tv)), dtype=np.complex128)
        return out[0] if scalar else out

    def _require_differentiable(self, theta):
        if not self.nondifferentiable:
            return
        nd = np.asarray(self.nondifferentiable)
        t = np.atleast_1d(_wrap_angle(theta))
        dist = np.abs(_wrap_angle(t[:, None] - nd[None, :])).min(axis=1)
        if np.any(dist <= 1e-9):
            bad = t[dist <= 1e-9][0]
            raise NonDifferentiablePointError(
                f"derivative requested at theta = {bad:.6g}, a declared "
                f"non-differentiable point of {self.label or 'this sampled model'}"
            )

    # -- divided differences ------------------------------------------------

    def divided_difference(self, z, w):
        """(f(z) - f(w))/(z - w), with the diagonal meaning f'(z).

        TrigPoly: exact division, evaluated in a canonical argument order so
        the symmetry dd(z, w) = dd(w, z) holds exactly in floating point.
        Sampled: raw quotient for separations >= DELTA_SWITCH (and, for
        models with declared corners, everywhere off the exact diagonal);
        otherwise the declared derivative at the midpoint direction.
        """
        z = complex(_check_unit_modulus(z))
        w = complex(_check_unit_modulus(w))
        if self.kind == "trig":
            a, b = ((z, w) if (z.real, z.imag) <= (w.real, w.imag) else (w, z))
            impl = backends.active()
            return complex(impl.trig_dd_grid(
                self.coeffs, np.array([a], complex), np.array([b], complex))[0, 0])
        if z == w:
            return complex(self.derivative_z(z))
        if abs(z - w) >= DELTA_SWITCH or self.nondifferentiable:
            return (complex(self.eval(z)) - complex(self.eval(w))) / (z - w)
        mid = (z + w) / 2.0
        return complex(self.derivative_z(mid / abs(mid)))

    def dd_grid(self, zl, zr):
        """Matrix of divided differences on the grid zl x zr."""
        zl = np.atleast_1d(_check_unit_modulus(zl))
        zr = np.atleast_1d(_check_unit_modulus(zr))
        if self.kind == "trig":
            impl = backends.active()
            return impl.trig_dd_grid(self.coeffs, zl, zr)
        fl = np.asarray(self.eval(zl))
        fr = np.asarray(self.eval(zr))
        diff = zl[:, None] - zr[None, :]
        out = np.empty((zl.shape[0], zr.shape[0]), dtype=np.complex128)
        if self.nondifferentiable:
            near = np.abs(diff) == 0.0
        else:
            near = np.abs(diff) < DELTA_SWITCH
        far = ~near
        out[far] = (fl[:, None] - fr[None, :])[far] / diff[far]
        if np.any(near):
            ii, jj = np.nonzero(near)
            mids = zl[ii] + zr[jj]
            mids = mids / np.abs(mids)
            out[near] = self.derivative_z(mids)
        return out

    def rotate(self, zeta):
        """The rotated function f_zeta(w) = f(zeta w)."""
        zeta = complex(_check_unit_modulus(zeta))
        if self.kind == "trig":
            d = self.degree
            ks = np.arange(-d, d + 1)
            return CircleFunction.trig_poly(self.coeffs * zeta ** ks,
                                            label=f"rot({self.label})" if self.label else None)
        phi = float(np.angle(zeta))
        g, gp = self.g, self.gprime
        return CircleFunction.sampled(
            lambda t, _g=g, _p=phi: _g(_wrap_angle(np.asarray(t) + _p)),
            lambda t, _gp=gp, _p=phi: _gp(_wrap_angle(np.asarray(t) + _p)),
            lipschitz=self.lipschitz,
            nondifferentiable=tuple(_wrap_angle(t - phi) for t in self.nondifferentiable),
            label=f"rot({self.label})" if self.label else None,
        )

    def __repr__(self):
        if self.kind == "trig":
            return f"CircleFunction.trig_poly(degree={self.degree}, label={self.label!r})"
        return f"CircleFunction.sampled(label={self.label!r})"


class LineFunction:
    """A function on the real line: polynomial or sampled (f, f') pair."""

    def __init__(self, kind, coeffs=None, f=None, fprime=None, lipschitz=None, label=None):
        self.kind = kind
        self.label = label
        if kind == "poly":
            coeffs = np.asarray(coeffs, dtype=np.complex128)
            if coeffs.ndim != 1 or coeffs.size == 0:
                raise ValidationError("polynomial coefficients must be a non-empty 1-d array")
            if not np.all(np.isfinite(coeffs)):
                raise ValidationError("polynomial coefficients contain non-finite entries")
            self.coeffs = coeffs.copy()
            self.coeffs.setflags(write=False)
            self.f = None
            self.fprime = None
        elif kind == "sampled":
            if f is None or fprime is None:
                raise ValidationError("sampled model needs both f and f' callables")
            self.coeffs = None
            self.f = f
            self.fprime = fprime
            self.lipschitz = lipschitz
        else:
            raise ValidationError(f"unknown line function kind {kind!r}")

    @classmethod
    def polynomial(cls, coeffs, label=None):
        """Polynomial with ascending coefficients (a_0, a_1, ...)."""
        return cls("poly", coeffs=coeffs, label=label)

    @classmethod
    def sampled(cls, f, fprime, lipschitz=None, label=None):
        return cls("sampled", f=f, fprime=fprime, lipschitz=lipschitz, label=label)

    @classmethod
    def monomial(cls, k):
        if not (isinstance(k, (int, np.integer)) and k >= 0):
            raise ValidationError(f"line monomial exponent must be a nonnegative integer, got {k!r}")
        coeffs = np.zeros(int(k) + 1, dtype=complex)
        coeffs[int(k)] = 1.0
        return cls("poly", coeffs=coeffs, label=f"x^{int(k)}")

    def eval(self, x):
        x = np.asarray(x)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x).astype(np.float64 if not np.iscomplexobj(x) else np.complex128)
        if self.kind == "poly":
            acc = np.zeros(xv.shape, dtype=np.complex128)
            for c in self.coeffs[::-1]:
                acc = acc * xv + c
            out = acc
        else:
            out = np.asarray(self.f(xv), dtype=np.complex128)
        return out[0] if scalar else out

    def derivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        if self.kind == "poly":
            acc = np.zeros(xv.shape, dtype=np.complex128)
            dcoeffs = self.coeffs[1:] * np.arange(1, self.coeffs.shape[0])
            for c in dcoeffs[::-1]:
                acc = acc * xv + c
            out = acc
        else:
            out = np.asarray(self.fprime(xv), dtype=np.complex128)
        return out[0] if scalar else out

    def divided_difference(self, x, y):
        x = float(x)
        y = float(y)
        if self.kind == "poly":
            a, b = min(x, y), max(x, y)
            impl = backends.active()
            return complex(impl.poly_dd_grid(self.coeffs, np.array([a]), np.array([b]))[0, 0])
        if abs(x - y) >= DELTA_SWITCH:
            return (complex(self.eval(x)) - complex(self.eval(y))) / (x - y)
        return complex(self.derivative((x + y) / 2.0))

    def dd_grid(self, xl, xr):
        xl = np.atleast_1d(np.asarray(xl, dtype=np.float64))
        xr = np.atleast_1d(np.asarray(xr, dtype=np.float64))
        if self.kind == "poly":
            impl = backends.active()
            return impl.poly_dd_grid(self.coeffs, xl, xr)
        fl = np.asarray(self.eval(xl))
        fr = np.asarray(self.eval(xr))
        diff = xl[:, None] - xr[None, :]
        out = np.empty((xl.shape[0], xr.shape[0]), dtype=np.complex128)
        near = np.abs(diff) < DELTA_SWITCH
        far = ~near
        out[far] = (fl[:, None] - fr[None, :])[far] / diff[far]
        if np.any(near):
            ii, jj = np.nonzero(near)
            out[near] = self.derivative((xl[ii] + xr[jj]) / 2.0)
        return out

    def __repr__(self):
        if self.kind == "poly":
            return f"LineFunction.polynomial(degree={self.coeffs.shape[0]-1}, label={self.label!r})"
        return f"LineFunction.sampled(label={self.label!r})"


# -- built-ins and parsing ---------------------------------------------------

def _abs_theta():
    return CircleFunction.sampled(
        g=lambda t: np.abs(_wrap_angle(t)),
        gprime=lambda t: np.sign(_wrap_angle(t)),
        lipschitz=1.0,
        nondifferentiable=(0.0, np.pi),
        label="abs-theta",
    )


def _sawtooth():
    return CircleFunction.sampled(
        g=lambda t: _wrap_angle(t),
        gprime=lambda t: np.ones_like(np.asarray(t, dtype=np.float64)),
        lipschitz=1.0,
        nondifferentiable=(np.pi,),
        label="sawtooth",
    )


_MONOMIAL_RE = re.compile(r"^z\^(-?\d+)$")


def builtin_circle_function(name):
    """Built-in circle functions: z^n, abs-theta, cos, sawtooth."""
    m = _MONOMIAL_RE.match(name)
    if m:
        return CircleFunction.monomial(int(m.group(1)))
    if name == "abs-theta":
        return _abs_theta()
    if name == "cos":
        return CircleFunction.trig_poly([0.5, 0.0, 0.5], label="cos")
    if name == "sawtooth":
        return _sawtooth()
    raise ValidationError(
        f"unknown built-in circle function {name!r}; expected z^n, abs-theta, cos, or sawtooth"
    )


def trig_poly_from_json(obj):
    """TrigPoly from the shared JSON form {degree, coeffs_re, coeffs_im}."""
    try:
        d = int(obj["degree"])
        re_part = np.asarray(obj["coeffs_re"], dtype=np.float64)
        im_part = np.asarray(obj["coeffs_im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed trig polynomial object: {exc}")
    if re_part.shape != (2 * d + 1,) or im_part.shape != (2 * d + 1,):
        raise ValidationError(
            f"trig polynomial of degree {d} needs {2*d+1} coefficients, got "
            f"{re_part.shape[0]} real / {im_part.shape[0]} imaginary"
        )
    return CircleFunction.trig_poly(re_part + 1j * im_part)


def trig_poly_to_json(f):
    if f.kind != "trig":
        raise ValidationError("only trig polynomials serialize to JSON")
    return {
        "schema": "traceshift/trigpoly/v1",
        "degree": f.degree,
        "coeffs_re": [float(c.real) for c in f.coeffs],
        "coeffs_im": [float(c.imag) for c in f.coeffs],
    }


def parse_circle_function(spec):
    """Parse a --fn value: a built-in name or a path to a TrigPoly JSON file."""
    try:
        return builtin_circle_function(spec)
    except ValidationError:
        pass
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ValidationError(
            f"function spec {spec!r} is neither a built-in (z^n, abs-theta, cos, "
            f"sawtooth) nor a readable file: {exc}"
        )
    except json.JSONDecodeError as exc:
        raise ValidationError(f"function file {spec!r} is not valid JSON: {exc}")
    return trig_poly_from_json(obj)


_LINE_MONOMIAL_RE = re.compile(r"^x\^(\d+)$")


def parse_line_function(spec):
    """Parse a line-function spec: x^n or a path to {"coeffs": [...]} JSON."""
    m = _LINE_MONOMIAL_RE.match(spec)
    if m:
        return LineFunction.monomial(int(m.group(1)))
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"line function spec {spec!r} is neither x^n nor a readable file: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"line function file {spec!r} is not valid JSON: {exc}")
    try:
        coeffs = np.asarray(obj["coeffs"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed line function object (expected 'coeffs'): {exc}")
    return LineFunction.polynomial(coeffs)


def random_trig_poly(degree, seed, scale=1.0):
    """Seeded random trig polynomial with O(1) coefficients."""
    if not (isinstance(degree, (int, np.integer)) and degree >= 1):
        raise ValidationError(f"degree must be a positive integer, got {degree}")
    rng = np.random.default_rng(seed)
    k = 2 * int(degree) + 1
    coeffs = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * (scale / np.sqrt(2.0 * k))
    return CircleFunction.trig_poly(coeffs, label=f"random(deg={degree}, seed={seed})")

"""Closed-form free functions of the solution families.

Holomorphic functions ``b(z)`` live in :class:`HoloFn` (polynomial,
exp-linear, or rational), real functions of one real variable ``r(y)``,
``k(y)`` in :class:`RealFn1`.  Both expose exact derivatives of any order and
can be pushed onto jets.  The module also evaluates the closed double
integral ``I(z, z-bar)`` appearing in the solution families, fixed to the
antiderivative ``-int b/(z+z-bar) dz - int b-bar/(z+z-bar) dz-bar`` with zero
integration constants.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from heavenly_lift.jets import (
    Jet,
    Point4,
    compose_series,
    jet_ln,
    jet_powi,
    seed_complex,
)


class PoleError(ValueError):
    """Evaluation point too close to a pole of a rational function."""


_POLE_MARGIN = 1e-9


@dataclass(frozen=True)
class HoloFn:
    """One holomorphic function of one complex variable.

    kind is one of "polynomial" (coeffs ascending), "exp" (a * e^{beta z}),
    "rational" (num/den coefficient lists; the denominator roots are recorded
    at construction for the pole guard).
    """

    kind: str
    coeffs: tuple = ()
    a: complex = 0j
    beta: complex = 0j
    num: tuple = ()
    den: tuple = ()
    poles: tuple = field(default=(), compare=False)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def polynomial(coeffs) -> "HoloFn":
        cs = tuple(complex(c) for c in coeffs) or (0j,)
        return HoloFn(kind="polynomial", coeffs=cs)

    @staticmethod
    def zero() -> "HoloFn":
        return HoloFn.polynomial([0.0])

    @staticmethod
    def constant(c) -> "HoloFn":
        return HoloFn.polynomial([c])

    @staticmethod
    def exp_linear(a, beta) -> "HoloFn":
        return HoloFn(kind="exp", a=complex(a), beta=complex(beta))

    @staticmethod
    def rational(num, den) -> "HoloFn":
        n = tuple(complex(c) for c in num) or (0j,)
        d = tuple(complex(c) for c in den)
        if not d or all(abs(c) == 0 for c in d):
            raise ValueError("rational denominator is zero")
        roots = tuple(np.roots(list(reversed(d))).astype(complex)) if len(d) > 1 else ()
        return HoloFn(kind="rational", num=n, den=d, poles=roots)

    # -- structure -----------------------------------------------------------

    @property
    def is_polynomial(self) -> bool:
        return self.kind == "polynomial"

    @property
    def degree(self) -> int:
        if self.kind != "polynomial":
            raise ValueError("degree defined for polynomials only")
        d = 0
        for i, c in enumerate(self.coeffs):
            if abs(c) > 0:
                d = i
        return d

    def is_constant(self, tol: float = 0.0) -> bool:
        if self.kind == "polynomial":
            return all(abs(c) <= tol for c in self.coeffs[1:])
        if self.kind == "exp":
            return abs(self.a) <= tol or abs(self.beta) <= tol
        return False

    def derivative(self) -> "HoloFn":
        if self.kind == "polynomial":
            if len(self.coeffs) == 1:
                return HoloFn.polynomial([0.0])
            return HoloFn.polynomial([k * c for k, c in enumerate(self.coeffs)][1:])
        if self.kind == "exp":
            return HoloFn.exp_linear(self.a * self.beta, self.beta)
        # (p/q)' = (p'q - pq')/q^2; poles unchanged as a set
        p, q = np.array(self.num), np.array(self.den)
        dp = np.arange(1, len(p)) * p[1:] if len(p) > 1 else np.array([0j])
        dq = np.arange(1, len(q)) * q[1:] if len(q) > 1 else np.array([0j])
        num = np.polynomial.polynomial.polysub(
            np.polynomial.polynomial.polymul(dp, q),
            np.polynomial.polynomial.polymul(p, dq),
        )
        den = np.polynomial.polynomial.polymul(q, q)
        out = HoloFn(kind="rational", num=tuple(num.astype(complex)),
                     den=tuple(den.astype(complex)), poles=self.poles)
        return out

    def conjugated(self) -> "HoloFn":
        """The anti-holomorphic partner: conj(self(conj(w)))."""
        if self.kind == "polynomial":
            return HoloFn.polynomial([c.conjugate() for c in self.coeffs])
        if self.kind == "exp":
            return HoloFn.exp_linear(self.a.conjugate(), self.beta.conjugate())
        return HoloFn(kind="rational",
                      num=tuple(c.conjugate() for c in self.num),
                      den=tuple(c.conjugate() for c in self.den),
                      poles=tuple(r.conjugate() for r in self.poles))

    # -- evaluation ------------------------------------------------------------

    def _guard(self, z: complex) -> None:
        for r in self.poles:
            if abs(z - r) <= _POLE_MARGIN:
                raise PoleError(f"evaluation point {z} within {_POLE_MARGIN} of pole {r}")

    def eval_derivs(self, z: complex, order: int) -> np.ndarray:
        """(f(z), f'(z), ..., f^(order)(z)) exactly."""
        z = complex(z)
        self._guard(z)
        if self.kind == "polynomial":
            out = []
            cs = np.array(self.coeffs)
            for k in range(order + 1):
                out.append(np.polynomial.polynomial.polyval(z, cs) if len(cs) else 0j)
                cs = np.arange(1, len(cs)) * cs[1:] if len(cs) > 1 else np.array([0j])
            return np.array(out)
        if self.kind == "exp":
            base = self.a * cmath.exp(self.beta * z)
            return np.array([base * self.beta**k for k in range(order + 1)])
        out = []
        f: HoloFn = self
        for _ in range(order + 1):
            pv = np.polynomial.polynomial.polyval(z, np.array(f.num))
            qv = np.polynomial.polynomial.polyval(z, np.array(f.den))
            out.append(pv / qv)
            f = f.derivative()
        return np.array(out)

    def __call__(self, z: complex) -> complex:
        return complex(self.eval_derivs(z, 0)[0])

    def jet(self, z_jet: Jet, nth: int = 0) -> Jet:
        """Compose the nth derivative of the function onto a jet of its argument."""
        derivs = self.eval_derivs(z_jet.value, z_jet.order + nth)[nth:]
        taylor = [d / math.factorial(k) for k, d in enumerate(derivs)]
        return compose_series(taylor, z_jet)


@dataclass(frozen=True)
class RealFn1:
    """One smooth real function of one real variable.

    kind in {"polynomial", "trig", "exponential", "affine"}; trig is
    a*sin(omega y) + b*cos(omega y), exponential is a*e^{gamma y}, affine is
    mu*y + nu (kept separate because the special solutions force it).
    """

    kind: str
    coeffs: tuple = ()
    a: float = 0.0
    b: float = 0.0
    omega: float = 0.0
    gamma: float = 0.0
    mu: float = 0.0
    nu: float = 0.0

    @staticmethod
    def polynomial(coeffs) -> "RealFn1":
        return RealFn1(kind="polynomial", coeffs=tuple(float(c) for c in coeffs) or (0.0,))

    @staticmethod
    def zero() -> "RealFn1":
        return RealFn1.polynomial([0.0])

    @staticmethod
    def trig(a: float, b: float, omega: float) -> "RealFn1":
        return RealFn1(kind="trig", a=float(a), b=float(b), omega=float(omega))

    @staticmethod
    def sin(omega: float = 1.0) -> "RealFn1":
        return RealFn1.trig(1.0, 0.0, omega)

    @staticmethod
    def cos(omega: float = 1.0) -> "RealFn1":
        return RealFn1.trig(0.0, 1.0, omega)

    @staticmethod
    def exponential(a: float, gamma: float) -> "RealFn1":
        return RealFn1(kind="exponential", a=float(a), gamma=float(gamma))

    @staticmethod
    def affine(mu: float, nu: float) -> "RealFn1":
        return RealFn1(kind="affine", mu=float(mu), nu=float(nu))

    def is_affine(self, tol: float = 0.0) -> bool:
        if self.kind == "affine":
            return True
        if self.kind == "polynomial":
            return all(abs(c) <= tol for c in self.coeffs[2:])
        return False

    def eval_derivs(self, y: float, order: int) -> np.ndarray:
        y = float(y)
        if self.kind == "polynomial":
            out = []
            cs = np.array(self.coeffs, dtype=float)
            for _ in range(order + 1):
                out.append(float(np.polynomial.polynomial.polyval(y, cs)) if len(cs) else 0.0)
                cs = np.arange(1, len(cs)) * cs[1:] if len(cs) > 1 else np.array([0.0])
            return np.array(out)
        if self.kind == "affine":
            out = np.zeros(order + 1)
            out[0] = self.mu * y + self.nu
            if order >= 1:
                out[1] = self.mu
            return out
        if self.kind == "exponential":
            base = self.a * math.exp(self.gamma * y)
            return np.array([base * self.gamma**k for k in range(order + 1)])
        # trig: derivatives cycle with period 4
        s, c = math.sin(self.omega * y), math.cos(self.omega * y)
        cycle = [self.a * s + self.b * c,
                 self.a * c - self.b * s,
                 -self.a * s - self.b * c,
                 -self.a * c + self.b * s]
        return np.array([cycle[k % 4] * self.omega**k for k in range(order + 1)])

    def __call__(self, y: float) -> float:
        return float(self.eval_derivs(y, 0)[0])

    def jet(self, y_jet: Jet, nth: int = 0) -> Jet:
        """Jet of the nth derivative of the function along a jet of its argument."""
        derivs = self.eval_derivs(y_jet.value.real, y_jet.order + nth)[nth:]
        taylor = [d / math.factorial(k) for k, d in enumerate(derivs)]
        return compose_series(taylor, y_jet)


# ---------------------------------------------------------------------------
# The closed double integral  I with  I_{z z-bar} = (b + b-bar)/(z + z-bar)^2
# ---------------------------------------------------------------------------

MAX_DOUBLEINT_DEGREE = 8


def _shifted_coeffs(poly: HoloFn, sign: float) -> list[list[complex]]:
    """Coefficients beta_j of p(w + sign*s) = sum_j beta_j(s) w^j.

    Returns, for each j, the coefficient list of the polynomial beta_j in s.
    """
    b = poly.coeffs
    deg = len(b) - 1
    out: list[list[complex]] = []
    for j in range(deg + 1):
        beta_j = [b[l] * math.comb(l, j) * sign ** (l - j) for l in range(j, deg + 1)]
        # beta_j[m] multiplies s^m with m = l - j
        out.append(beta_j)
    return out


def _poly_on_jet(coeffs, x_jet: Jet) -> Jet:
    acc = Jet.constant(coeffs[-1], x_jet.point, x_jet.order)
    for c in reversed(coeffs[:-1]):
        acc = acc * x_jet + c
    return acc


def antiderivative_pair_jet(p_fn: HoloFn, pbar_fn: HoloFn, point: Point4, order: int) -> Jet:
    """Jet of  -int p(z)/(z+z-bar) dz - int pbar(z-bar)/(z+z-bar) dz-bar.

    Both inputs must be polynomials; ``pbar_fn`` is an independent polynomial
    in z-bar (pass ``p_fn.conjugated()`` for the real-symmetric case).  The
    mixed second derivative of the result is (p(z) + pbar(z-bar))/(z+z-bar)^2.
    Gauge: zero integration constants.
    """
    for f in (p_fn, pbar_fn):
        if not f.is_polynomial:
            raise ValueError("closed double integral requires polynomial numerators")
        if f.degree > MAX_DOUBLEINT_DEGREE:
            raise ValueError(f"polynomial degree > {MAX_DOUBLEINT_DEGREE}")
    w0 = 2.0 * point.z.real
    if w0 <= 1e-9:
        raise ValueError(f"z + z-bar = {w0} must be positive")
    _, _, z, zb = seed_complex(point, order)
    w = z + zb
    lnw = jet_ln(w)
    total = Jet.constant(0.0, point, order)
    # p-part: expand p(w - z-bar) in powers of w (s = -z-bar)
    for arg_jet, fn in ((zb, p_fn), (z, pbar_fn)):
        betas = _shifted_coeffs(fn, -1.0)
        part = _poly_on_jet(betas[0], arg_jet) * lnw
        for j in range(1, len(betas)):
            part = part + _poly_on_jet(betas[j], arg_jet) * jet_powi(w, j) * (1.0 / j)
        total = total - part
    return total


def doubleint_eval(b: HoloFn, z: complex, order: int) -> Jet:
    """Jet of the solution-family double integral at (z, z-bar = conj z).

    The q-coordinates of the returned jet are dummies (the function does not
    depend on them); the base point is placed at q = 1.
    """
    return antiderivative_pair_jet(b, b.conjugated(), Point4(1.0 + 0.0j, z), order)

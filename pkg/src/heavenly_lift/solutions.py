"""The exact solution families and their numeric Legendre round-trip.

``psi_jet`` evaluates the lifted potential psi(q, q-bar, z, z-bar) of each
family as a jet.  Families:

* sol1:   (q+b)ln(q+b) + c.c. - (q+q-bar)(ln w + 1) + I(z,z-bar) + r(y)
* sol3:   sol1 plus the y-integral term 2i * int_0^y ln[(z-bar+2ik)/(z-2ik)] ds
* sol2:   sol3 with k identically zero (both names accepted)
* special1/special2: sol1/sol2 with r forced affine, slope 2(alpha-pi)
  resp. 2*alpha

with w = z + z-bar and y = Im q.  For sol3 every jet coefficient carrying at
least one y-power is closed form; only the pure (z, z-bar) coefficients of
the integral term rest on 32-node Gauss-Legendre quadrature (exact to
roundoff for these analytic integrands), so PDE residuals downstream stay
exact-derivative quantities.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from heavenly_lift.funcspace import HoloFn, RealFn1
from heavenly_lift.jets import (
    Jet,
    Point4,
    jet_exp,
    jet_from_wirtinger,
    jet_ln,
    jet_powi,
    seed_complex,
    seed_coordinates,
)


class DomainError(ValueError):
    """Evaluation point outside a family's domain (branch cuts, w <= 0, ...)."""


class NewtonError(RuntimeError):
    """Legendre inversion did not converge or hit a singular Hessian."""


_ARG_MARGIN = 1e-6

FAMILIES = ("sol1", "sol2", "sol3", "special1", "special2")


@dataclass(frozen=True)
class SolutionSpec:
    """Closed description of one exact solution family.

    ``family`` keeps the requested name; sol2 is evaluated as sol3 with
    k = 0.  The named constructors enforce the special families' affine r;
    building the dataclass directly can bypass that (used by the CLI to
    represent deliberately corrupted configurations).
    """

    family: str
    b: HoloFn
    r: RealFn1
    k: Optional[RealFn1] = None
    alpha: float = 0.0
    r0: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family in ("sol2", "sol3", "special2") and self.k is None:
            object.__setattr__(self, "k", RealFn1.zero())

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def sol1(b: HoloFn, r: RealFn1) -> "SolutionSpec":
        return SolutionSpec(family="sol1", b=b, r=r)

    @staticmethod
    def sol2(b: HoloFn, r: RealFn1) -> "SolutionSpec":
        return SolutionSpec(family="sol2", b=b, r=r, k=RealFn1.zero())

    @staticmethod
    def sol3(b: HoloFn, r: RealFn1, k: RealFn1) -> "SolutionSpec":
        return SolutionSpec(family="sol3", b=b, r=r, k=k)

    @staticmethod
    def special1(b: HoloFn, alpha: float, r0: float = 0.0) -> "SolutionSpec":
        r = RealFn1.affine(2.0 * (alpha - math.pi), r0)
        return SolutionSpec(family="special1", b=b, r=r, alpha=alpha, r0=r0)

    @staticmethod
    def special2(b: HoloFn, alpha: float, r0: float = 0.0) -> "SolutionSpec":
        r = RealFn1.affine(2.0 * alpha, r0)
        return SolutionSpec(family="special2", b=b, r=r, k=RealFn1.zero(),
                            alpha=alpha, r0=r0)

    # -- structure -------------------------------------------------------------

    @property
    def is_special(self) -> bool:
        return self.family in ("special1", "special2")

    @property
    def has_integral_term(self) -> bool:
        """True for the families carrying the y-integral term (sol2/sol3 lineage)."""
        return self.family in ("sol2", "sol3", "special2")

    def special_r_is_consistent(self, tol: float = 1e-12) -> bool:
        """Whether r matches the slope the special family requires."""
        if not self.is_special:
            return True
        slope = 2.0 * (self.alpha - math.pi) if self.family == "special1" else 2.0 * self.alpha
        d = self.r.eval_derivs(0.123, 3)
        return self.r.is_affine(tol) and abs(d[1] - slope) <= 1e-9


@dataclass(frozen=True)
class BFPoint:
    """Evaluation point of the three-dimensional seed solution (y is the lift parameter)."""

    x: float
    y: float
    z: complex

    def __post_init__(self):
        if 2.0 * self.z.real <= 0.0:
            raise DomainError(f"z + z-bar = {2 * self.z.real} must be positive")


# ---------------------------------------------------------------------------
# psi as a jet
# ---------------------------------------------------------------------------

def _check_domain(spec: SolutionSpec, p: Point4) -> None:
    if 2.0 * p.z.real <= 0.0:
        raise DomainError(f"z + z-bar = {2 * p.z.real} must be positive")
    b0 = spec.b(p.z)
    arg = p.q + b0
    if abs(arg) < 1e-12 or abs(cmath.phase(arg)) >= math.pi - _ARG_MARGIN:
        raise DomainError(f"q + b(z) = {arg} on or near the logarithm branch cut")


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _quad_0_to(y0: float, fn) -> complex:
    """32-node Gauss-Legendre integral of fn over [0, y0] (sign-aware)."""
    if y0 == 0.0:
        return 0.0
    t = 0.5 * y0 * (_GL_NODES + 1.0)
    w = 0.5 * y0 * _GL_WEIGHTS
    return complex(np.sum(w * np.array([fn(s) for s in t])))


def _integral_term_jet(k: RealFn1, p: Point4, order: int) -> Jet:
    """Jet of 2i * int_0^y [ln(z-bar + 2ik(s)) - ln(z - 2ik(s))] ds.

    Splits at y0 = Im q: the [0, y0] piece contributes only pure (z, z-bar)
    coefficients and is quadrature-backed; the remainder is the exact
    y-antiderivative of the integrand's own jet, so every coefficient with a
    y-power is closed form.
    """
    y0 = p.q.imag
    x1, x2, x3, x4 = seed_coordinates(p, order)
    _, _, z, zb = seed_complex(p, order)
    z0, zb0 = p.z, p.zbar

    for s in (0.0, y0):
        if abs(z0 - 2j * k(s)) < 1e-12 or abs(zb0 + 2j * k(s)) < 1e-12:
            raise DomainError("z - 2ik(y) vanishes on the integration path")

    # A-part: int_0^{y0} g(s, z, z-bar) ds expanded in (z - z0), (z-bar - zb0)
    total = Jet.constant(_quad_0_to(y0, lambda s: cmath.log(zb0 + 2j * k(s)) - cmath.log(z0 - 2j * k(s))),
                         p, order)
    dz = z - z0
    dzb = zb - zb0
    for n in range(1, order + 1):
        a_n = ((-1.0) ** n / n) * _quad_0_to(y0, lambda s: (z0 - 2j * k(s)) ** (-n))
        ab_n = ((-1.0) ** (n - 1) / n) * _quad_0_to(y0, lambda s: (zb0 + 2j * k(s)) ** (-n))
        total = total + a_n * jet_powi(dz, n) + ab_n * jet_powi(dzb, n)

    # B-part: y-antiderivative (from y0) of the jet of g itself
    if order >= 1:
        k_jet = k.jet(Jet(order - 1, p, x2.coeffs.copy()))
        g = jet_ln(Jet(order - 1, p, zb.coeffs.copy()) + 2j * k_jet) \
            - jet_ln(Jet(order - 1, p, z.coeffs.copy()) - 2j * k_jet)
        from heavenly_lift.jets import _INDEX, _MULTIS, _DEG  # noqa: internal layout
        bcoeffs = np.zeros_like(total.coeffs)
        for i, alpha in enumerate(_MULTIS):
            if _DEG[i] > order - 1 or g.coeffs[i] == 0:
                continue
            up = (alpha[0], alpha[1] + 1, alpha[2], alpha[3])
            bcoeffs[_INDEX[up]] += g.coeffs[i] / (alpha[1] + 1)
        total = total + Jet(order, p, bcoeffs)

    return 2j * total


def psi_jet(spec: SolutionSpec, p: Point4, order: int) -> Jet:
    """Jet of the lifted potential psi at p.

    Requires polynomial b (the double-integral term has a closed form only
    then).  The output is real-valued up to roundoff; a gross imaginary part
    signals a domain violation and raises.
    """
    if not 0 <= order <= 4:
        raise ValueError(f"order must be within 0..4, got {order}")
    if not spec.b.is_polynomial:
        raise DomainError("psi_jet requires a polynomial b(z)")
    _check_domain(spec, p)

    from heavenly_lift.funcspace import antiderivative_pair_jet

    q, qb, z, zb = seed_complex(p, order)
    x2 = seed_coordinates(p, order)[1]
    b = spec.b.jet(z)
    P = q + b
    term = P * jet_ln(P)
    psi = term + term.conjugate()
    w = z + zb
    psi = psi - (q + qb) * (jet_ln(w) + 1.0)
    psi = psi + antiderivative_pair_jet(spec.b, spec.b.conjugated(), p, order)
    psi = psi + spec.r.jet(x2)
    if spec.has_integral_term:
        psi = psi + _integral_term_jet(spec.k, p, order)
    im = psi.max_imag()
    if im > 1e-9:
        raise DomainError(f"psi lost reality (max imag {im:.3e}); point outside the family domain")
    return psi


# ---------------------------------------------------------------------------
# Boyer-Finley seed solution
# ---------------------------------------------------------------------------

def bf_v(spec: SolutionSpec, bp: BFPoint, order: int = 2) -> Jet:
    """Jet of the 3D seed v = ln[x + b + iy] + ln[x + b-bar - iy] - 2 ln w.

    The chart of the returned jet is (x, y, Re z, Im z); v equals psi_x of
    the lifted solution for every family (the r, k and rotation terms drop
    out of psi_x).
    """
    p = Point4(complex(bp.x, bp.y), bp.z)
    q, qb, z, zb = seed_complex(p, order)
    X = q + spec.b.jet(z)
    v0 = X.value
    if abs(v0) < 1e-12:
        raise DomainError("x + b(z, y) vanishes at the evaluation point")
    lnX = jet_ln(X)
    return lnX + lnX.conjugate() - 2.0 * jet_ln(z + zb)


# ---------------------------------------------------------------------------
# Legendre inversion
# ---------------------------------------------------------------------------

@dataclass
class LegendreInverse:
    """Result of inverting the first-pair Legendre map at one target."""

    q: complex
    u_jet: Jet              # order-2 jet of u in the (zeta1, z) chart
    iterations: int
    residual: float
    psi: Jet = field(repr=False, default=None)


def _psi_q_data(spec: SolutionSpec, q: complex, z: complex):
    p = Point4(q, z)
    psi = psi_jet(spec, p, 2)
    return psi, psi.wirtinger("q"), p


def _newton_solve(spec: SolutionSpec, q0: complex, z: complex, zeta1: complex,
                  tol: float, max_iter: int):
    """Damped Newton for psi_q = zeta1 from one starting guess."""
    q = q0
    psi, F, _ = _psi_q_data(spec, q, z)
    F = F - zeta1
    it = 0
    while abs(F) > tol:
        if it >= max_iter:
            raise NewtonError(f"no convergence after {max_iter} iterations (|F| = {abs(F):.3e})")
        h_qq = psi.wirtinger("qq")
        h_qqb = psi.wirtinger("qqb")
        h_qbqb = psi.wirtinger("qbqb")
        det = h_qq * h_qbqb - h_qqb * h_qqb
        if abs(det) < 1e-10:
            raise NewtonError(f"singular Legendre Hessian (|det| = {abs(det):.3e}) at q = {q}")
        # [h_qq h_qqb; h_qqb h_qbqb] [dq; dq-bar] = -[F; conj F]
        dq = (-F * h_qbqb + F.conjugate() * h_qqb) / det
        step = 1.0
        for _ in range(20):
            try:
                psi_new, Fq_new, _ = _psi_q_data(spec, q + step * dq, z)
            except DomainError:
                step *= 0.5
                continue
            F_new = Fq_new - zeta1
            if abs(F_new) < abs(F):
                break
            step *= 0.5
        else:
            raise NewtonError(f"damping stalled at q = {q} (|F| = {abs(F):.3e})")
        q, psi, F = q + step * dq, psi_new, F_new
        it += 1
    return q, psi, F, it


def legendre_invert(spec: SolutionSpec, target, seed: Optional[Point4] = None,
                    tol: float = 1e-12, max_iter: int = 60) -> LegendreInverse:
    """Solve psi_q = zeta1 for q by damped Newton and assemble u's second jet.

    ``target`` is (zeta1, z); zeta1-bar and z-bar are the conjugates.  The
    returned ``u_jet`` carries u = q psi_q + q-bar psi_q-bar - psi and its
    derivatives to second order in the (zeta1, z) chart, obtained by
    inverting the Legendre Hessian relations.
    """
    zeta1, z = complex(target[0]), complex(target[1])
    if seed is not None:
        candidates = [seed.q]
    else:
        # the bare exponential heuristic is exact for b = 0 up to the
        # conformal factor; the refined guess and the box centre cover the
        # families whose first derivative carries extra phase terms
        w0 = 2.0 * z.real
        candidates = [cmath.exp(zeta1),
                      w0 * cmath.exp(zeta1) - spec.b(z),
                      1.3 + 0.0j]
    last_error: Exception | None = None
    for q0 in candidates:
        try:
            q, psi, F, it = _newton_solve(spec, q0, z, zeta1, tol, max_iter)
            break
        except (NewtonError, DomainError) as e:
            last_error = e
    else:
        raise last_error

    # second derivatives of u in the zeta chart from the Hessian relations
    h_qq, h_qqb, h_qbqb = psi.wirtinger("qq"), psi.wirtinger("qqb"), psi.wirtinger("qbqb")
    det = h_qq * h_qbqb - h_qqb * h_qqb
    if abs(det) < 1e-10:
        raise NewtonError(f"singular Legendre Hessian at the solution q = {q}")
    inv = np.array([[h_qbqb, -h_qqb], [-h_qqb, h_qq]], dtype=complex) / det
    g_z = np.array([psi.wirtinger("qz"), psi.wirtinger("qbz")])
    g_zb = np.array([psi.wirtinger("qzb"), psi.wirtinger("qbzb")])
    dq_z = -inv @ g_z       # (q_z, q-bar_z) at fixed zeta
    dq_zb = -inv @ g_zb
    psi_q = psi.wirtinger("q")
    psi_qb = psi.wirtinger("qb")
    u_val = q * psi_q + q.conjugate() * psi_qb - psi.value
    u_z = -psi.wirtinger("z")
    u_zb = -psi.wirtinger("zb")
    u_zz = -(psi.wirtinger("zz") + g_z @ dq_z)
    u_zzb = -(psi.wirtinger("zzb") + g_z @ dq_zb)
    u_zbzb = -(psi.wirtinger("zbzb") + g_zb @ dq_zb)

    zeta_point = Point4(zeta1, z)
    u_jet = jet_from_wirtinger(zeta_point, 2, {
        "": u_val,
        "q": q, "qb": q.conjugate(), "z": u_z, "zb": u_zb,
        "qq": inv[0, 0], "qqb": inv[0, 1], "qbqb": inv[1, 1],
        "qz": dq_z[0], "qzb": dq_zb[0], "qbz": dq_z[1], "qbzb": dq_zb[1],
        "zz": u_zz, "zzb": u_zzb, "zbzb": u_zbzb,
    })
    return LegendreInverse(q=q, u_jet=u_jet, iterations=it, residual=abs(F), psi=psi)

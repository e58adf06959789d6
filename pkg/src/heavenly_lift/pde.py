"""Residual evaluators for every verified equation.

Each evaluator consumes jets, so the residual is an exact-derivative
quantity; the reported relative residual is |value| / max(scale, 1) with
scale the magnitude of the largest constituent term.

Wirtinger tokens refer to the chart's complex coordinate pair: "q"/"qb" are
the first coordinate and its conjugate, "z"/"zb" the second.  For the
original-picture equation the pair is (z1, z2), for the exponentiated
picture (zeta1, z2), for the Legendre picture (q, z).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from heavenly_lift.jets import Jet, jet_exp


@dataclass(frozen=True)
class Residual:
    """One residual value with the magnitude of its largest constituent."""

    value: complex
    scale: float

    @property
    def rel(self) -> float:
        return abs(self.value) / max(self.scale, 1.0)


def _residual(value: complex, *terms: complex) -> Residual:
    return Residual(value=value, scale=max(abs(t) for t in terms))


# ---------------------------------------------------------------------------
# Monge-Ampere pictures
# ---------------------------------------------------------------------------

def residual_hcma(u: Jet) -> Residual:
    """u_{1 1b} u_{2 2b} - u_{1 2b} u_{2 1b} + 1 in the (z1, z2) chart."""
    if u.order < 2:
        raise ValueError("residual_hcma needs a jet of order >= 2")
    t1 = u.wirtinger("qqb") * u.wirtinger("zzb")
    t2 = u.wirtinger("qzb") * u.wirtinger("qbz")
    return _residual(t1 - t2 + 1.0, t1, t2, 1.0)


def residual_zeta(u: Jet) -> Residual:
    """Exponentiated picture: LHS + e^{zeta1 + zeta1-bar}, zeta1 = base q."""
    if u.order < 2:
        raise ValueError("residual_zeta needs a jet of order >= 2")
    t1 = u.wirtinger("qqb") * u.wirtinger("zzb")
    t2 = u.wirtinger("qzb") * u.wirtinger("qbz")
    rhs = cmath.exp(u.point.q + u.point.qbar)
    return _residual(t1 - t2 + rhs, t1, t2, rhs)


def residual_leghcma(psi: Jet) -> Residual:
    """Legendre picture of the hyperbolic Monge-Ampere equation."""
    if psi.order < 2:
        raise ValueError("residual_leghcma needs a jet of order >= 2")
    p_qq = psi.wirtinger("qq")
    p_qqb = psi.wirtinger("qqb")
    p_qbqb = psi.wirtinger("qbqb")
    e = cmath.exp(psi.wirtinger("q") + psi.wirtinger("qb"))
    t1 = p_qqb * psi.wirtinger("zzb")
    t2 = psi.wirtinger("qzb") * psi.wirtinger("qbz")
    t3 = e * p_qqb * p_qqb
    t4 = e * p_qq * p_qbqb
    return _residual(t1 - t2 - t3 + t4, t1, t2, t3, t4)


# ---------------------------------------------------------------------------
# Boyer-Finley forms
# ---------------------------------------------------------------------------

def residual_bf(psi: Jet) -> Residual:
    """psi_{z zb} - e^{psi_x} psi_{xx} with x = Re q (lifted-potential form)."""
    if psi.order < 2:
        raise ValueError("residual_bf needs a jet of order >= 2")
    psi_x = psi.wirtinger("q") + psi.wirtinger("qb")
    psi_xx = psi.wirtinger("qq") + 2.0 * psi.wirtinger("qqb") + psi.wirtinger("qbqb")
    t1 = psi.wirtinger("zzb")
    t2 = cmath.exp(psi_x) * psi_xx
    return _residual(t1 - t2, t1, t2)


def residual_bf_v(v: Jet) -> Residual:
    """v_{z zb} - (e^v)_{xx} for the three-dimensional seed."""
    if v.order < 2:
        raise ValueError("residual_bf_v needs a jet of order >= 2")
    ev = jet_exp(v)
    t1 = v.wirtinger("zzb")
    t2 = ev.dx(0).dx(0).value
    return _residual(t1 - t2, t1, t2)


# ---------------------------------------------------------------------------
# Rotational partner constraints and their consequences
# ---------------------------------------------------------------------------

def residual_legrot(psi: Jet, alpha: float) -> tuple[Residual, Residual]:
    """The two first-order differential constraints with lambda = e^{i alpha}."""
    if psi.order < 2:
        raise ValueError("residual_legrot needs a jet of order >= 2")
    lam = cmath.exp(1j * alpha)
    e_qb = cmath.exp(psi.wirtinger("qb"))
    e_q = cmath.exp(psi.wirtinger("q"))
    p_qq = psi.wirtinger("qq")
    p_qqb = psi.wirtinger("qqb")
    p_qbqb = psi.wirtinger("qbqb")
    a1 = e_qb * (p_qbqb + p_qqb)
    b1 = lam * psi.wirtinger("qzb")
    a2 = lam * e_q * (p_qq + p_qqb)
    b2 = psi.wirtinger("qbz")
    return (_residual(a1 - b1, a1, b1), _residual(a2 - b2, a2, b2))


def backlund_compatibility(psi: Jet, alpha: float) -> Residual:
    """Cross-derivative compatibility of the auto-transformation pair.

    With omega_x = -i psi_y the two first-order relations read
    omega_z = psi_z - 2 lambda e^{(psi_x + omega_x)/2} and
    omega_zb = -psi_zb + 2 lambda^{-1} e^{(psi_x - omega_x)/2}; the returned
    residual is d_zb(RHS1) - d_z(RHS2), which must vanish on solutions of
    the 3D equation.  Precondition: psi satisfies both rotational
    constraints (the pair is only integrable there).
    """
    if psi.order < 3:
        raise ValueError("backlund_compatibility needs a jet of order >= 3")
    r1, r2 = residual_legrot(psi, alpha)
    if max(r1.rel, r2.rel) > 1e-8:
        raise ValueError(
            f"rotational constraints violated (residuals {r1.rel:.2e}, {r2.rel:.2e}); "
            "the transformation pair is not defined for this jet")
    if psi.max_imag() > 1e-10:
        raise ValueError("psi must be real-valued for the exponent split")
    lam = cmath.exp(1j * alpha)
    psi_q = psi.wirt_d("q")    # (psi_x + omega_x)/2 with omega_x = -i psi_y
    psi_qb = psi.wirt_d("qb")  # (psi_x - omega_x)/2
    psi_z = psi.wirt_d("z")
    psi_zb = psi.wirt_d("zb")
    rhs1 = psi_z - 2.0 * lam * jet_exp(psi_q)
    rhs2 = -psi_zb + (2.0 / lam) * jet_exp(psi_qb)
    t1 = rhs1.wirt_d("zb").value
    t2 = rhs2.wirt_d("z").value
    return _residual(t1 - t2, t1, t2, 2.0 * abs(lam * jet_exp(psi_q).wirt_d("zb").value))


def residual_omeg(psi: Jet, omega: Jet) -> Residual:
    """Symmetry-characteristic equation omega_{z zb} - e^{psi_x} omega_{xx}."""
    if psi.order < 1 or omega.order < 2:
        raise ValueError("residual_omeg needs psi order >= 1 and omega order >= 2")
    psi_x = psi.wirtinger("q") + psi.wirtinger("qb")
    t1 = omega.wirtinger("zzb")
    t2 = cmath.exp(psi_x) * omega.dx(0).dx(0).value
    return _residual(t1 - t2, t1, t2)


# ---------------------------------------------------------------------------
# Symmetry operator of the original picture
# ---------------------------------------------------------------------------

def box_apply(u: Jet, phi: Jet) -> Residual:
    """u_{2 2b} phi_{1 1b} + u_{1 1b} phi_{2 2b} - u_{2 1b} phi_{1 2b} - u_{1 2b} phi_{2 1b}."""
    if u.order < 2 or phi.order < 2:
        raise ValueError("box_apply needs jets of order >= 2")
    t1 = u.wirtinger("zzb") * phi.wirtinger("qqb")
    t2 = u.wirtinger("qqb") * phi.wirtinger("zzb")
    t3 = u.wirtinger("zqb") * phi.wirtinger("qzb")
    t4 = u.wirtinger("qzb") * phi.wirtinger("zqb")
    return _residual(t1 + t2 - t3 - t4, t1, t2, t3, t4)


# ---------------------------------------------------------------------------
# The hand-derived combination identity (guard for the implicit coefficients)
# ---------------------------------------------------------------------------

def combination_identity_defect(psi: Jet, alpha: float) -> float:
    """| psi_qqb * BF - [ LEG - e^{psi_q} A1 r1 - lam^{-1} e^{psi_qb} A2 r2 + lam^{-1} r1 r2 ] |.

    A1 = psi_qq + psi_qqb, A2 = psi_qbqb + psi_qqb.  Exact for arbitrary
    jets, not only solutions; this pins down how the three equations
    combine into the 3D equation.  Returned relative to the larger side.
    """
    lam = cmath.exp(1j * alpha)
    r1, r2 = residual_legrot(psi, alpha)
    bf = residual_bf(psi)
    leg = residual_leghcma(psi)
    p_qq = psi.wirtinger("qq")
    p_qqb = psi.wirtinger("qqb")
    p_qbqb = psi.wirtinger("qbqb")
    a1 = p_qq + p_qqb
    a2 = p_qbqb + p_qqb
    e_q = cmath.exp(psi.wirtinger("q"))
    e_qb = cmath.exp(psi.wirtinger("qb"))
    lhs = p_qqb * bf.value
    rhs = leg.value - e_q * a1 * r1.value - (1.0 / lam) * e_qb * a2 * r2.value \
        + (1.0 / lam) * r1.value * r2.value
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))

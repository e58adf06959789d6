"""Residual evaluator tests: hand substitutions, constraint stratification,
the compatibility chain, and the hand-derived combination identity."""

import cmath
import math

import numpy as np
import pytest

from heavenly_lift.funcspace import HoloFn, RealFn1, antiderivative_pair_jet
from heavenly_lift.jets import Jet, Point4, seed_complex, seed_coordinates, jet_ln
from heavenly_lift.pde import (
    backlund_compatibility,
    box_apply,
    combination_identity_defect,
    residual_bf,
    residual_bf_v,
    residual_hcma,
    residual_legrot,
    residual_leghcma,
    residual_omeg,
    residual_zeta,
)
from heavenly_lift.solutions import SolutionSpec, legendre_invert, psi_jet

from conftest import ALPHA, random_points, sample_points


# ---------------------------------------------------------------------------
# Original picture
# ---------------------------------------------------------------------------

def test_hcma_null_plane_solution():
    p = Point4(0.7 + 0.1j, 1.2 - 0.3j)
    q, qb, z, zb = seed_complex(p, 2)
    u = q * zb + z * qb
    assert abs(residual_hcma(u).value) < 1e-15


def test_hcma_positive_definite_plane():
    p = Point4(0.7 + 0.1j, 1.2 - 0.3j)
    q, qb, z, zb = seed_complex(p, 2)
    u = q * qb + z * zb
    assert abs(residual_hcma(u).value - 2.0) < 1e-15


def test_hcma_zero_function():
    u = Jet.constant(0.0, Point4(1.0, 1.0), 2)
    assert abs(residual_hcma(u).value - 1.0) == 0.0


def test_hcma_order_check():
    with pytest.raises(ValueError):
        residual_hcma(Jet.constant(0.0, Point4(1.0, 1.0), 1))


# ---------------------------------------------------------------------------
# Exponentiated picture
# ---------------------------------------------------------------------------

def test_zeta_zero_function():
    r = residual_zeta(Jet.constant(0.0, Point4(0.0, 1.0), 2))
    assert abs(r.value - 1.0) < 1e-15


def test_zeta_from_reconstruction(sol1):
    for p in sample_points(10, seed=4):
        psi = psi_jet(sol1, p, 2)
        inv = legendre_invert(sol1, (psi.wirtinger("q"), p.z))
        assert residual_zeta(inv.u_jet).rel < 1e-8


def test_zeta_chain_rule_against_hcma():
    """Substituting z1 = e^{zeta1} multiplies the defect by e^{zeta1+zeta1b}."""
    rng = np.random.default_rng(8)
    for _ in range(10):
        pz = Point4(complex(rng.uniform(0.2, 0.8), rng.uniform(-0.3, 0.3)),
                    complex(rng.uniform(0.7, 1.6), rng.uniform(-0.3, 0.3)))
        zeta, zetab, z2, z2b = seed_complex(pz, 2)
        z1 = __import__("heavenly_lift.jets", fromlist=["jet_exp"]).jet_exp(zeta)
        z1b = z1.conjugate()
        c = rng.normal(size=3)
        u_zeta_chart = z1 * z2b + z2 * z1b + c[0] * z1 * z1b + c[1] * (z2 * z2b) ** 2
        r_zeta = residual_zeta(u_zeta_chart)
        # same u in the original picture at the image point
        pw = Point4(cmath.exp(pz.q), pz.z)
        w1, w1b, w2, w2b = seed_complex(pw, 2)
        u_w = w1 * w2b + w2 * w1b + c[0] * w1 * w1b + c[1] * (w2 * w2b) ** 2
        r_h = residual_hcma(u_w)
        jac = cmath.exp(pz.q + pz.qbar)
        assert abs(r_zeta.value - jac * r_h.value) < 1e-12 * max(1.0, abs(jac * r_h.value))


# ---------------------------------------------------------------------------
# Legendre picture
# ---------------------------------------------------------------------------

def test_leghcma_membership(sol1):
    for p in sample_points(30, seed=5):
        assert residual_leghcma(psi_jet(sol1, p, 2)).rel < 1e-9


def test_leghcma_qqb_hand_value():
    p = Point4(0.0, 1.0)
    q, qb, z, zb = seed_complex(p, 2)
    r = residual_leghcma(q * qb)
    assert abs(r.value + cmath.exp(0.0)) < 1e-15  # -e^{q+qb} at q=0


def test_leghcma_zero_function():
    assert residual_leghcma(Jet.constant(0.0, Point4(1.0, 1.0), 2)).value == 0.0


# ---------------------------------------------------------------------------
# Boyer-Finley forms
# ---------------------------------------------------------------------------

def test_bf_membership(sol1):
    for p in sample_points(30, seed=6):
        assert residual_bf(psi_jet(sol1, p, 2)).rel < 1e-9


def test_bf_v_x_independent_hand_value():
    p = Point4(1.0 + 0.2j, 1.2 - 0.1j)
    _, _, z, zb = seed_complex(p, 2)
    v = -2.0 * jet_ln(z + zb)
    w = 2 * 1.2
    r = residual_bf_v(v)
    assert abs(r.value - 2.0 / w**2) < 1e-14


# ---------------------------------------------------------------------------
# Rotational constraints
# ---------------------------------------------------------------------------

def test_legrot_special_families(special1, special2):
    for spec in (special1, special2):
        for p in sample_points(40, seed=7):
            r1, r2 = residual_legrot(psi_jet(spec, p, 2), spec.alpha)
            assert max(r1.rel, r2.rel) < 1e-9


def test_legrot_conjugation_pairing(sol1):
    """For real psi and unimodular lambda the pair satisfies r2 = lambda conj(r1)."""
    lam = cmath.exp(1j * ALPHA)
    for p in sample_points(20, seed=8):
        r1, r2 = residual_legrot(psi_jet(sol1, p, 2), ALPHA)
        assert abs(r2.value - lam * r1.value.conjugate()) < 1e-12 * max(1.0, abs(r1.value))


def test_legrot_generic_violation(sol1):
    worst = 0.0
    for p in sample_points(40, seed=9):
        r1, r2 = residual_legrot(psi_jet(sol1, p, 2), ALPHA)
        worst = max(worst, r1.rel, r2.rel)
    assert worst > 1e-2


def test_legrot_cubic_r_violation():
    spec = SolutionSpec.sol1(HoloFn.polynomial([0, 0, 1]), RealFn1.polynomial([0, 0, 0, 1.0]))
    worst = 0.0
    for p in sample_points(40, seed=10):
        r1, r2 = residual_legrot(psi_jet(spec, p, 2), ALPHA)
        worst = max(worst, r1.rel, r2.rel)
    assert worst > 1e-2


# ---------------------------------------------------------------------------
# Compatibility of the first-order pair
# ---------------------------------------------------------------------------

def test_backlund_on_specials(special1, special2):
    for spec in (special1, special2):
        for p in sample_points(30, seed=11):
            r = backlund_compatibility(psi_jet(spec, p, 3), spec.alpha)
            assert r.rel < 1e-8


def test_backlund_precondition(sol1):
    p = sample_points(1, seed=12)[0]
    with pytest.raises(ValueError):
        backlund_compatibility(psi_jet(sol1, p, 3), ALPHA)


def test_backlund_nonsolution_no_crash(special1):
    """A random non-solution jet is rejected by the precondition, not a crash."""
    p = Point4(1.1 + 0.1j, 1.3 - 0.2j)
    q, qb, z, zb = seed_complex(p, 3)
    junk = q * q * qb * qb + z * zb
    with pytest.raises(ValueError):
        backlund_compatibility(junk, special1.alpha)


# ---------------------------------------------------------------------------
# Symmetry-characteristic equation
# ---------------------------------------------------------------------------

def test_omeg_constant_characteristic(special1):
    p = sample_points(1, seed=13)[0]
    psi = psi_jet(special1, p, 2)
    omega = Jet.constant(1.0, p, 2)
    assert residual_omeg(psi, omega).value == 0.0


def _special1_omega(spec, p, order=2):
    """The characteristic generating the lift parameter for the first special
    solution: the x-antiderivative of -i psi_y plus the harmonic completion
    fixed by the symmetry equation."""
    q, qb, z, zb = seed_complex(p, order)
    x2 = seed_coordinates(p, order)[1]
    b = spec.b.jet(z)
    P = q + b
    Pbar = P.conjugate()
    lnP = jet_ln(P)
    alpha = spec.alpha
    core = P * lnP - P - (Pbar * lnP.conjugate() - Pbar) \
        - 2j * (alpha - math.pi) * 0.5 * (q + qb)
    w = z + zb
    # harmonic completion: its mixed z z-bar derivative is (b-bar - b)/w^2
    correction = 2j * x2 * jet_ln(w) \
        + antiderivative_pair_jet(_neg(spec.b), spec.b.conjugated(), p, order)
    return core + correction


def _neg(f: HoloFn) -> HoloFn:
    return HoloFn.polynomial([-c for c in f.coeffs])


def test_omeg_lift_characteristic(special1):
    """omega with omega_x = -i psi_y solves the characteristic equation."""
    for p in sample_points(20, seed=14):
        psi = psi_jet(special1, p, 2)
        omega = _special1_omega(special1, p, 2)
        # Lie equation: omega_x = -i psi_y
        om_x = omega.dx(0).value
        psi_y = psi.dx(1).value
        assert abs(om_x + 1j * psi_y) < 1e-11
        assert residual_omeg(psi, omega).rel < 1e-8


def test_omeg_nonsolution_detects():
    spec = SolutionSpec.special1(HoloFn.polynomial([0, 0, 1]), alpha=0.3)
    p = sample_points(1, seed=15)[0]
    psi = psi_jet(spec, p, 2)
    q, qb, z, zb = seed_complex(p, 2)
    omega = q * qb * (z + zb)
    assert residual_omeg(psi, omega).rel > 1e-3


# ---------------------------------------------------------------------------
# Symmetry operator of the original picture
# ---------------------------------------------------------------------------

def test_box_translation_characteristic():
    p = Point4(0.7 + 0.1j, 1.2 - 0.3j)
    q, qb, z, zb = seed_complex(p, 3)
    u = q * zb + z * qb + 0.3 * (q * qb) ** 2
    phi = Jet.constant(1.0, p, 2)
    assert abs(box_apply(Jet(2, p, u.coeffs.copy()), phi).value) == 0.0


def test_box_hand_value():
    p = Point4(0.7 + 0.1j, 1.2 - 0.3j)
    q, qb, z, zb = seed_complex(p, 2)
    u = q * zb + z * qb
    phi = q * qb
    assert abs(box_apply(u, phi).value) < 1e-15


def test_box_differentiated_equation():
    """phi = u_1 satisfies the symmetry equation when u solves the equation.

    Exact family: u = z1 zb2 + z2 zb1 + F(z1, zb1) solves the original
    equation for any F; its first derivative is then a characteristic.
    """
    rng = np.random.default_rng(16)
    for _ in range(10):
        p = Point4(complex(rng.uniform(0.6, 1.6), rng.uniform(-0.4, 0.4)),
                   complex(rng.uniform(0.6, 1.6), rng.uniform(-0.4, 0.4)))
        q, qb, z, zb = seed_complex(p, 3)
        c = rng.normal(size=3)
        F = c[0] * q * q * qb + c[1] * (q * qb) ** 2 + c[2] * q * qb * q
        u = q * zb + z * qb + F
        assert residual_hcma(Jet(2, p, u.coeffs.copy())).rel < 1e-13
        phi = u.wirt_d("q")
        r = box_apply(Jet(2, p, u.coeffs.copy()), phi)
        assert r.rel < 1e-8


# ---------------------------------------------------------------------------
# The combination identity (hard-coded coefficients guard)
# ---------------------------------------------------------------------------

def test_combination_identity_arbitrary_jets():
    rng = np.random.default_rng(17)
    for _ in range(25):
        p = Point4(complex(rng.uniform(0.7, 1.6), rng.uniform(-0.3, 0.3)),
                   complex(rng.uniform(0.7, 1.6), rng.uniform(-0.3, 0.3)))
        q, qb, z, zb = seed_complex(p, 2)
        c = rng.normal(size=4) * 0.4
        half = c[0] * q * q * qb + c[1] * z * zb * q + c[2] * q * qb * (z + zb) + c[3] * z * z
        psi = half + half.conjugate()
        assert combination_identity_defect(psi, 0.7) < 1e-10


def test_combination_identity_on_solutions(sol1, sol3):
    for spec in (sol1, sol3):
        for p in sample_points(10, seed=18):
            assert combination_identity_defect(psi_jet(spec, p, 2), ALPHA) < 1e-10

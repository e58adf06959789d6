"""Metric and co-frame tests: generic-vs-closed consistency, the bilinear
co-frame identity, signature, and the singular strata contracts."""

import math

import numpy as np
import pytest

from heavenly_lift.funcspace import HoloFn, RealFn1
from heavenly_lift.geometry import (
    COFRAME_FORMS,
    CoframeJet,
    DegenerateMetricError,
    MetricJet,
    SingularCoframeError,
    coframe,
    coframe_metric_check,
    metric_closed,
    metric_from_psi,
)
from heavenly_lift.jets import Jet, Point4, jet_sqrt, seed_complex, seed_coordinates
from heavenly_lift.solutions import SolutionSpec

from conftest import ALPHA, R0, B_Z2, random_points, sample_points


def rel_dev(g1: MetricJet, g2: MetricJet) -> float:
    scale = max(float(np.max(np.abs(g1.comps))), float(np.max(np.abs(g2.comps))), 1e-300)
    return float(np.max(np.abs(g1.comps - g2.comps))) / scale


# ---------------------------------------------------------------------------
# Generic metric vs closed forms
# ---------------------------------------------------------------------------

def test_metric_consistency_families(sol1, sol2, sol3):
    for spec, form in ((sol1, "metr1"), (sol2, "metr2"), (sol3, "metr3")):
        worst = 0.0
        for p in sample_points(100, seed=0):
            worst = max(worst, rel_dev(metric_from_psi(spec, p, 2),
                                       metric_closed(form, spec, p, 2)))
        assert worst < 1e-9, (form, worst)


def test_metr3_with_zero_k_equals_metr2(sol2):
    s3 = SolutionSpec.sol3(sol2.b, sol2.r, RealFn1.zero())
    for p in sample_points(20, seed=1):
        assert rel_dev(metric_closed("metr3", s3, p, 2),
                       metric_closed("metr2", sol2, p, 2)) < 1e-11


def test_metric1_matches_special_limit(special1):
    """metric1 is the r''-to-zero limit of the generic metric."""
    eps = 1e-7
    r_eps = RealFn1.polynomial([R0, 2.0 * (ALPHA - math.pi), eps])
    near = SolutionSpec.sol1(B_Z2, r_eps)
    p = Point4(1.2 + 0.1j, 1.4 - 0.2j)
    g_lim = metric_from_psi(near, p, 2)
    g1 = metric_closed("metric1", special1, p, 2)
    assert rel_dev(g_lim, g1) < 1e-5


def test_metric1_hand_matrix():
    """b = 0 at q = 1, z = 1: ds^2 = (1/4)[2(dq dzb + dqb dz) - (dz + dzb)^2]."""
    spec = SolutionSpec.special1(HoloFn.zero(), ALPHA)
    p = Point4(1.0, 1.0)
    g = metric_closed("metric1", spec, p, 0)
    # convert the displayed complex form by dq = dx1 + i dx2 etc.:
    # 2(dq dzb + dqb dz) = 4(dx1 dx3 + dx2 dx4); (dz + dzb)^2 = 4 dx3^2
    expected = np.zeros((4, 4))
    expected[0, 2] = expected[2, 0] = 0.5
    expected[1, 3] = expected[3, 1] = 0.5
    expected[2, 2] = -1.0
    assert np.max(np.abs(g.value() - expected)) < 1e-14


def test_metr1_sign_branch_matches_principal_sqrt():
    """The expanded sqrt products equal the displayed principal-branch
    reading with the sign following r''; both r'' signs stay real-symmetric."""
    for coeff in (1.0, -1.0):  # r = +-y^2, r'' = +-2
        spec = SolutionSpec.sol1(B_Z2, RealFn1.polynomial([0.0, 0.0, coeff]))
        p = Point4(1.1 + 0.2j, 1.3 - 0.15j)
        g = metric_closed("metr1", spec, p, 2)
        assert np.max(np.abs(g.comps - g.comps.transpose(1, 0, 2))) == 0.0
        # displayed-branch check on the B-term coupling: +-sqrt(D/A) = 4/(w rho)
        q, qb, z, zb = seed_complex(p, 2)
        y = seed_coordinates(p, 2)[1]
        rho = -spec.r.jet(y, nth=2)  # first-family closed-form sign convention
        w = z + zb
        P = q + spec.b.jet(z)
        D = 0.25 * P.conjugate() * (P * rho + 4.0)
        A = (1.0 / 16.0) * w * w * rho * rho * D
        sign = 1.0 if rho.value.real > 0 else -1.0
        lhs = sign * jet_sqrt(D / A)
        rhs = 4.0 / (w * rho)
        assert np.max(np.abs((lhs - rhs).coeffs)) < 1e-12
        # and the identity of the two routes for the generic metric
        assert rel_dev(g, metric_from_psi(spec, p, 2)) < 1e-12


def test_metric_from_psi_rejects_special_stratum(special1):
    with pytest.raises(DegenerateMetricError):
        metric_from_psi(special1, Point4(1.2 + 0.1j, 1.3 - 0.2j), 2)


def test_metr1_rejects_vanishing_rpp(special1):
    with pytest.raises(DegenerateMetricError):
        metric_closed("metr1", special1, Point4(1.2, 1.3), 2)


def test_metric2_nonzero_z_guard(special2):
    box_edge = Point4(1.0, 1e-14 + 0.0j)
    with pytest.raises((DegenerateMetricError, ZeroDivisionError)):
        metric_closed("metric2", special2, box_edge, 2)


def test_unknown_form_rejected(sol1):
    with pytest.raises(ValueError):
        metric_closed("metr9", sol1, Point4(1.0, 1.0), 2)


# ---------------------------------------------------------------------------
# Reality and signature
# ---------------------------------------------------------------------------

def test_metric_reality_and_symmetry(sol1, sol2, sol3, special1, special2):
    cases = [(sol1, "metr1"), (sol2, "metr2"), (sol3, "metr3"),
             (special1, "metric1"), (special2, "metric2")]
    for spec, form in cases:
        for p in sample_points(25, seed=2):
            g = metric_closed(form, spec, p, 2)
            assert np.max(np.abs(g.comps - g.comps.transpose(1, 0, 2))) == 0.0


def test_signature_ultra_hyperbolic(sol1, sol2, sol3, special1, special2):
    cases = [(sol1, "metr1"), (sol2, "metr2"), (sol3, "metr3"),
             (special1, "metric1"), (special2, "metric2")]
    for spec, form in cases:
        for p in sample_points(100, seed=3):
            g = metric_closed(form, spec, p, 0)
            assert g.signature_counts() == (2, 2), (form, p)
            assert abs(g.det()) > 1e-10


# ---------------------------------------------------------------------------
# Co-frames
# ---------------------------------------------------------------------------

def _coframe_cases(sol1_neg, sol2_neg, sol3, sol1_k_positive,
                   special1_frame, special2_frame):
    return [
        ("legtetrad", sol1_neg, lambda s, p: metric_from_psi(s, p, 2)),
        ("legtetrad", sol3, lambda s, p: metric_from_psi(s, p, 2)),
        ("legtetrad2", sol1_k_positive, lambda s, p: metric_from_psi(s, p, 2)),
        ("tetr1", sol1_neg, lambda s, p: metric_closed("metr1", s, p, 2)),
        ("tetr2", sol2_neg, lambda s, p: metric_closed("metr2", s, p, 2)),
        ("tetr3", sol3, lambda s, p: metric_closed("metr3", s, p, 2)),
        ("frame2sol1", special1_frame, lambda s, p: metric_closed("metric1", s, p, 2)),
        ("frame2sol2", special2_frame, lambda s, p: metric_closed("metric2", s, p, 2)),
    ]


def test_coframe_identity_all_forms(sol1_neg, sol2_neg, sol3, sol1_k_positive,
                                    special1_frame, special2_frame):
    """ds^2 = l (x) l-bar - m (x) m-bar for every catalog co-frame."""
    cases = _coframe_cases(sol1_neg, sol2_neg, sol3, sol1_k_positive,
                           special1_frame, special2_frame)
    seen = set()
    for form, spec, gfn in cases:
        seen.add(form)
        worst = 0.0
        for p in sample_points(25, seed=4):
            c = coframe(form, spec, p, 2)
            worst = max(worst, coframe_metric_check(c, gfn(spec, p)))
        assert worst < 1e-10, (form, worst)
    assert seen == set(COFRAME_FORMS)


def test_coframe_bilinear_reality(sol1_neg):
    for p in sample_points(10, seed=5):
        c = coframe("legtetrad", sol1_neg, p, 2)
        jets = c.bilinear_metric_jets()
        worst = max(jets[a][b].max_imag() for a in range(4) for b in range(4))
        assert worst < 1e-12


def test_perturbed_coframe_detected(sol1_neg):
    p = sample_points(1, seed=6)[0]
    c = coframe("legtetrad", sol1_neg, p, 2)
    g = metric_from_psi(sol1_neg, p, 2)
    assert coframe_metric_check(c, g) < 1e-10
    c_bad = CoframeJet(point=c.point, order=c.order,
                       l=[1.01 * comp for comp in c.l], m=c.m)
    dev = coframe_metric_check(c_bad, g)
    scale = float(np.max(np.abs(g.comps)))
    assert dev > 0.005 * scale  # ~2% of the l (x) l-bar block


def test_zero_coframe_vs_zero_metric():
    p = Point4(1.0, 1.0)
    zero = Jet.constant(0.0, p, 2)
    c = CoframeJet(point=p, order=2, l=[zero] * 4, m=[zero] * 4)
    g = MetricJet(point=p, order=2, comps=np.zeros((4, 4, 70)))
    assert coframe_metric_check(c, g) == 0.0


def test_tetr1_singular_at_special_stratum(special1):
    with pytest.raises(SingularCoframeError):
        coframe("tetr1", special1, Point4(1.2 + 0.1j, 1.3), 2)


def test_legtetrad_singular_on_wrong_branch():
    """r'' > 0 with S r'' < 4 puts the first co-frame's roots on the wrong side."""
    spec = SolutionSpec.sol1(HoloFn.zero(), RealFn1.polynomial([0.0, 0.0, 0.5]))
    with pytest.raises(SingularCoframeError):
        coframe("legtetrad", spec, Point4(0.9 + 0.1j, 1.3 - 0.1j), 2)


def test_frame2sol1_needs_negative_re_bprime(special1_curv):
    # b = z has Re b' = 1 > 0: the square root argument is negative real
    with pytest.raises(SingularCoframeError):
        coframe("frame2sol1", special1_curv, Point4(1.2, 1.3), 2)

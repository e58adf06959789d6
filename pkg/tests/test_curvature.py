"""Curvature pipeline tests: textbook oracles, tensor symmetries,
Ricci-flatness of the catalog, closed-form matching, frame two-forms."""

import numpy as np
import pytest

from heavenly_lift.curvature import (
    CurvatureReport,
    christoffel,
    closed_r3434,
    compare_curv_closed,
    complexify,
    frame_curvature,
    frame_pattern_check,
    realify,
    riemann_ricci,
    select_convention,
)
from heavenly_lift.funcspace import HoloFn
from heavenly_lift.geometry import MetricJet, coframe, metric_closed, metric_from_psi
from heavenly_lift.jets import Jet, Point4, seed_coordinates
from heavenly_lift.solutions import SolutionSpec

from conftest import ALPHA, R0, sample_points


def _const_metric(p, diag, order=2):
    jets = [[Jet.constant(0.0, p, order) for _ in range(4)] for _ in range(4)]
    for i, v in enumerate(diag):
        jets[i][i] = Jet.constant(float(v), p, order)
    return MetricJet.from_jets(p, order, jets)


# ---------------------------------------------------------------------------
# Connection
# ---------------------------------------------------------------------------

def test_flat_metric_zero_connection():
    g = _const_metric(Point4(1.0, 1.0), [1, 1, -1, -1])
    assert np.max(np.abs(christoffel(g))) == 0.0
    rep = riemann_ricci(g)
    assert rep.riemann_max == 0.0
    assert np.max(np.abs(rep.ricci)) == 0.0


def test_polar_block_hand_values():
    """ds^2 = dx1^2 + x1^2 dx2^2 - dx3^2 - dx4^2 (flat in polar-like form)."""
    p = Point4(1.4 + 0.3j, 1.0)
    x1 = seed_coordinates(p, 2)[0]
    zero = Jet.constant(0.0, p, 2)
    jets = [[zero] * 4 for _ in range(4)]
    jets[0][0] = Jet.constant(1.0, p, 2)
    jets[1][1] = x1 * x1
    jets[2][2] = Jet.constant(-1.0, p, 2)
    jets[3][3] = Jet.constant(-1.0, p, 2)
    g = MetricJet.from_jets(p, 2, jets)
    gam = christoffel(g)
    r = p.q.real
    assert abs(gam[0, 1, 1] + r) < 1e-12
    assert abs(gam[1, 0, 1] - 1.0 / r) < 1e-12
    assert abs(gam[1, 1, 0] - 1.0 / r) < 1e-12
    assert np.max(np.abs(christoffel(g) - christoffel(g).transpose(0, 2, 1))) == 0.0
    assert riemann_ricci(g).riemann_max < 1e-13


def test_singular_metric_rejected():
    g = _const_metric(Point4(1.0, 1.0), [1, 1, 1, 0])
    with pytest.raises(ValueError):
        christoffel(g)


# ---------------------------------------------------------------------------
# Riemann symmetries and Bianchi identity
# ---------------------------------------------------------------------------

def _catalog(sol1, sol2, sol3, special1, special2):
    return [(sol1, "metr1"), (sol2, "metr2"), (sol3, "metr3"),
            (special1, "metric1"), (special2, "metric2")]


def test_riemann_symmetries_and_bianchi(sol1, sol3, special2):
    for spec, form in [(sol1, "metr1"), (sol3, "metr3"), (special2, "metric2")]:
        for p in sample_points(5, seed=0):
            rep = riemann_ricci(metric_closed(form, spec, p, 2))
            R = rep.riemann_lower
            s = max(rep.scale, 1.0)
            assert np.max(np.abs(R + R.transpose(1, 0, 2, 3))) < 1e-9 * s
            assert np.max(np.abs(R + R.transpose(0, 1, 3, 2))) < 1e-9 * s
            assert np.max(np.abs(R - R.transpose(2, 3, 0, 1))) < 1e-9 * s
            bianchi = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
            assert np.max(np.abs(bianchi)) < 1e-9 * s


def test_ricci_flat_catalog(sol1, sol2, sol3, special1, special2):
    for spec, form in _catalog(sol1, sol2, sol3, special1, special2):
        worst = 0.0
        for p in sample_points(100, seed=1):
            worst = max(worst, riemann_ricci(metric_closed(form, spec, p, 2)).ricci_rel)
        assert worst < 1e-8, (form, worst)


def test_generic_curvature_is_nonzero(sol1):
    worst = 0.0
    for p in sample_points(20, seed=2):
        worst = max(worst, riemann_ricci(metric_closed("metr1", sol1, p, 2)).riemann_max)
    assert worst > 1e-3


def test_constant_b_special1_is_flat():
    spec = SolutionSpec.special1(HoloFn.constant(0.3 + 0.1j), ALPHA, R0)
    for p in sample_points(10, seed=3):
        rep = riemann_ricci(metric_closed("metric1", spec, p, 2))
        assert rep.riemann_max < 1e-9


def test_chart_rescaling_scaling_law(sol1):
    """x -> lambda x rescales R^a_bcd by lambda^2 and R_abcd by lambda^4."""
    lam = 2.0
    p = sample_points(1, seed=4)[0]
    g = metric_closed("metr1", sol1, p, 2)
    rep = riemann_ricci(g)
    # pull back: g~(x) = lam^2 g(lam x) around the same geometric point
    from heavenly_lift.jets import _DEG
    comps = g.comps * (lam ** 2) * (lam ** _DEG)
    g2 = MetricJet(point=Point4.from_reals(*(np.array(p.reals()) / lam)),
                   order=2, comps=comps)
    rep2 = riemann_ricci(g2)
    s = max(1.0, np.max(np.abs(rep.riemann_upper)))
    assert np.max(np.abs(rep2.riemann_upper - lam**2 * rep.riemann_upper)) < 1e-9 * lam**2 * s
    sl = max(1.0, np.max(np.abs(rep.riemann_lower)))
    assert np.max(np.abs(rep2.riemann_lower - lam**4 * rep.riemann_lower)) < 1e-9 * lam**4 * sl


# ---------------------------------------------------------------------------
# Basis transformation
# ---------------------------------------------------------------------------

def test_complexify_flat_metric():
    g = np.diag([1.0, 1.0, -1.0, -1.0])
    gc = complexify(g)
    # dq dq-bar carries the (1,1)-block, dz dz-bar the other
    assert abs(gc[0, 1] - 0.5) < 1e-15
    assert abs(gc[2, 3] + 0.5) < 1e-15
    assert abs(gc[0, 0]) < 1e-15


def test_complexify_involution():
    rng = np.random.default_rng(5)
    T = rng.normal(size=(4, 4, 4, 4))
    back = realify(complexify(T))
    assert np.max(np.abs(back - T)) < 1e-13


def test_complexify_rank_one_chain_rule():
    """A rank-1 covector power transforms factor-by-factor."""
    rng = np.random.default_rng(6)
    v = rng.normal(size=4)
    T = np.einsum("a,b,c,d->abcd", v, v, v, v)
    Tc = complexify(T)
    A = np.array([[0.5, 0.5, 0, 0], [-0.5j, 0.5j, 0, 0],
                  [0, 0, 0.5, 0.5], [0, 0, -0.5j, 0.5j]])
    vc = v @ A
    expected = np.einsum("a,b,c,d->abcd", vc, vc, vc, vc)
    assert np.max(np.abs(Tc - expected)) < 1e-13


# ---------------------------------------------------------------------------
# Closed-form curvature of the specials
# ---------------------------------------------------------------------------

def test_convention_search_unique():
    conv = select_convention(force=True)
    assert conv.describe() == "-(q, q-bar, z, z-bar)"


def test_closed_curvature_match(special1_curv, special2_curv):
    pts = sample_points(100, seed=7)
    for spec in (special1_curv, special2_curv):
        m = compare_curv_closed(spec, pts)
        assert m.max_rel_dev < 1e-8
        assert m.relation_dev < 1e-8
        assert m.matched


def test_spot_value_quarter(special1_curv):
    m = compare_curv_closed(special1_curv, Point4(1.0, 1.0))
    assert abs(m.values[0][2] - 0.25) < 1e-14   # closed form
    assert abs(m.values[0][1] - 0.25) < 1e-9    # numeric under the convention


def test_constant_b_closed_form_vanishes():
    spec = SolutionSpec.special1(HoloFn.constant(0.5 - 0.2j), ALPHA)
    assert abs(closed_r3434(spec, Point4(1.1, 1.3 - 0.2j))) == 0.0


def test_special2_spot_value():
    spec = SolutionSpec.special2(HoloFn.polynomial([0, 1]), ALPHA)
    p = Point4(1.0, 1.0)
    assert abs(closed_r3434(spec, p) - 0.75) < 1e-14
    m = compare_curv_closed(spec, p)
    assert m.max_rel_dev < 1e-8


def test_compare_requires_special(sol1):
    with pytest.raises(ValueError):
        compare_curv_closed(sol1, Point4(1.0, 1.0))


# ---------------------------------------------------------------------------
# Frame curvature two-forms
# ---------------------------------------------------------------------------

def test_frame_pattern_special1(special1_frame):
    worst = 0.0
    factors = set()
    for p in sample_points(25, seed=8):
        g = metric_closed("metric1", special1_frame, p, 2)
        F = frame_curvature(riemann_ricci(g), coframe("frame2sol1", special1_frame, p, 2))
        rep = frame_pattern_check(special1_frame, F, p)
        worst = max(worst, rep.max_rel)
        factors.add(round(complex(rep.combination_factor).real, 10))
    assert worst < 1e-9
    assert len(factors) == 1  # one global convention factor across points


def test_frame_pattern_special2(special2_frame):
    worst = 0.0
    factors = set()
    for p in sample_points(25, seed=9):
        g = metric_closed("metric2", special2_frame, p, 2)
        F = frame_curvature(riemann_ricci(g), coframe("frame2sol2", special2_frame, p, 2))
        rep = frame_pattern_check(special2_frame, F, p)
        worst = max(worst, rep.max_rel)
        factors.add(round(complex(rep.combination_factor).real, 10))
    assert worst < 1e-9
    assert len(factors) == 1


def test_frame_curvature_rejects_singular_frame(special1_frame):
    p = sample_points(1, seed=10)[0]
    g = metric_closed("metric1", special1_frame, p, 2)
    rep = riemann_ricci(g)
    c = coframe("frame2sol1", special1_frame, p, 2)
    zero = Jet.constant(0.0, p, 2)
    from heavenly_lift.geometry import CoframeJet
    bad = CoframeJet(point=p, order=2, l=[zero] * 4, m=c.m)
    with pytest.raises(ValueError):
        frame_curvature(rep, bad)

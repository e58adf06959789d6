"""Ultra-hyperbolic metrics and Newman-Penrose co-frames.

Metrics are assembled both from the general Legendre-transformed expression
(``metric_from_psi``) and from the per-solution closed forms
(``metric_closed``); co-frames likewise.  Both routes produce real-chart
Taylor data (:class:`MetricJet`, :class:`CoframeJet`) so the curvature
pipeline can consume them directly and the identity
``ds^2 = l (x) l-bar - m (x) m-bar`` can be checked coefficient by
coefficient.

Convention notes fixed once and validated by the co-frame identity tests:

* A complex quadratic form ``sum G_{mu nu} dw^mu dw^nu`` converts to the real
  chart through dq = dx1 + i dx2, dz = dx3 + i dx4 (and conjugates).
* In the first-solution closed forms (metr1/tetr1) the second derivative of
  the free real function enters with the opposite sign relative to the
  lifted potential built here (the generic Legendre expressions and the
  second/third-solution closed forms agree with the potential as is); the
  corresponding forms therefore substitute rho = -r''(y).
* All square-root products inside the closed forms are expanded
  algebraically (e.g. sqrt(A) sqrt(D) = (w rho / 4) D), which is branch-free
  and coincides with the displayed principal-branch reading together with
  its sign prescription.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from heavenly_lift.jets import (
    _DEG,
    Jet,
    N_COEFFS,
    Point4,
    jet_exp,
    jet_ln,
    jet_powi,
    jet_sqrt,
    seed_complex,
    seed_coordinates,
)
from heavenly_lift.solutions import SolutionSpec, psi_jet


class DegenerateMetricError(ValueError):
    """Metric assembly hit a degenerate stratum (vanishing discriminant)."""


class SingularCoframeError(ValueError):
    """A co-frame square-root argument vanished or left the right half-plane."""


METRIC_FORMS = ("metr1", "metr2", "metr3", "metric1", "metric2")
COFRAME_FORMS = ("legtetrad", "legtetrad2", "tetr1", "tetr2", "tetr3",
                 "frame2sol1", "frame2sol2")

# rows: dq, dq-bar, dz, dz-bar expressed in dx1..dx4
_CHART = np.array([
    [1.0, 1.0j, 0.0, 0.0],
    [1.0, -1.0j, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0j],
    [0.0, 0.0, 1.0, -1.0j],
])

_REALITY_TOL = 1e-9


@dataclass
class MetricJet:
    """Symmetric real 4x4 metric with Taylor data to ``order`` in x1..x4."""

    point: Point4
    order: int
    comps: np.ndarray  # (4, 4, N_COEFFS) float64

    @classmethod
    def from_jets(cls, point: Point4, order: int, jets) -> "MetricJet":
        comps = np.zeros((4, 4, N_COEFFS))
        worst = 0.0
        for a in range(4):
            for b in range(4):
                cs = jets[a][b].coeffs
                worst = max(worst, float(np.max(np.abs(cs.imag))))
                comps[a, b] = cs.real
        scale = max(1.0, float(np.max(np.abs(comps))))
        if worst > _REALITY_TOL * scale:
            raise DegenerateMetricError(
                f"metric lost reality (max imaginary coefficient {worst:.3e})")
        comps = 0.5 * (comps + comps.transpose(1, 0, 2))
        return cls(point=point, order=order, comps=comps)

    def jet(self, a: int, b: int) -> Jet:
        return Jet(self.order, self.point, self.comps[a, b].astype(complex))

    def value(self) -> np.ndarray:
        return self.comps[:, :, 0].copy()

    def det(self) -> float:
        return float(np.linalg.det(self.value()))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.value())

    def signature_counts(self) -> tuple[int, int]:
        ev = self.eigenvalues()
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))

    def max_imag(self) -> float:  # kept for interface symmetry with jets
        return 0.0


@dataclass
class CoframeJet:
    """Complex null co-frame: real-chart components of l and m as jets."""

    point: Point4
    order: int
    l: list
    m: list

    def bilinear_metric_jets(self):
        """Jets of the symmetrized l (x) l-bar - m (x) m-bar."""
        out = [[None] * 4 for _ in range(4)]
        lc = [c.conjugate() for c in self.l]
        mc = [c.conjugate() for c in self.m]
        for a in range(4):
            for b in range(4):
                t = 0.5 * (self.l[a] * lc[b] + self.l[b] * lc[a]) \
                    - 0.5 * (self.m[a] * mc[b] + self.m[b] * mc[a])
                out[a][b] = t
        return out

    def frame_matrix(self) -> np.ndarray:
        """Rows l, l-bar, m, m-bar of covector values (o(1), o(2), o(3), o(4))."""
        lv = np.array([c.value for c in self.l])
        mv = np.array([c.value for c in self.m])
        return np.vstack([lv, lv.conjugate(), mv, mv.conjugate()])


# ---------------------------------------------------------------------------
# Quadratic-form accumulator over the complex differentials
# ---------------------------------------------------------------------------

_Q, _QB, _Z, _ZB = 0, 1, 2, 3


class _QForm:
    def __init__(self, point: Point4, order: int):
        self.point = point
        self.order = order
        zero = Jet.constant(0.0, point, order)
        self.G = [[zero for _ in range(4)] for _ in range(4)]

    def add(self, mu: int, nu: int, coeff) -> None:
        """Add coeff * dw^mu dw^nu (symmetric product)."""
        if mu == nu:
            self.G[mu][mu] = self.G[mu][mu] + coeff
        else:
            half = 0.5 * coeff
            self.G[mu][nu] = self.G[mu][nu] + half
            self.G[nu][mu] = self.G[nu][mu] + half

    def add_square(self, covector, weight=1.0) -> None:
        """Add weight * (sum_mu covector[mu] dw^mu)^2."""
        for mu in range(4):
            cmu = covector[mu]
            if cmu is None:
                continue
            for nu in range(mu, 4):
                cnu = covector[nu]
                if cnu is None:
                    continue
                term = cmu * cnu * weight
                self.add(mu, nu, term if mu == nu else 2.0 * term)

    def scale(self, factor) -> None:
        self.G = [[self.G[a][b] * factor for b in range(4)] for a in range(4)]

    def to_metric(self) -> MetricJet:
        jets = [[None] * 4 for _ in range(4)]
        for a in range(4):
            for b in range(4):
                acc = Jet.constant(0.0, self.point, self.order)
                for mu in range(4):
                    for nu in range(4):
                        cmn = _CHART[mu, a] * _CHART[nu, b]
                        if cmn != 0:
                            acc = acc + self.G[mu][nu] * cmn
                jets[a][b] = acc
        return MetricJet.from_jets(self.point, self.order, jets)


def complex_covector_to_real(point: Point4, order: int, comps) -> list:
    """Real-chart components of c_q dq + c_qb dq-bar + c_z dz + c_zb dz-bar."""
    zero = Jet.constant(0.0, point, order)
    out = []
    for a in range(4):
        acc = zero
        for mu in range(4):
            if comps[mu] is not None and _CHART[mu, a] != 0:
                acc = acc + comps[mu] * _CHART[mu, a]
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# Shared ingredient bundles
# ---------------------------------------------------------------------------

class _PsiDerivs:
    """Second-derivative jets of psi at a point (all at the same order)."""

    def __init__(self, spec: SolutionSpec, p: Point4, order: int):
        psi = psi_jet(spec, p, order + 2)
        self.psi = psi
        d_q, d_qb = psi.wirt_d("q"), psi.wirt_d("qb")
        self.q = Jet(order, p, d_q.coeffs.copy())
        self.qb = Jet(order, p, d_qb.coeffs.copy())
        self.qq = d_q.wirt_d("q")
        self.qqb = d_q.wirt_d("qb")
        self.qbqb = d_qb.wirt_d("qb")
        self.qz = d_q.wirt_d("z")
        self.qzb = d_q.wirt_d("zb")
        self.qbz = d_qb.wirt_d("z")
        self.qbzb = d_qb.wirt_d("zb")
        self.zzb = psi.wirt_d("z").wirt_d("zb")
        self.delta_minus = self.qq * self.qbqb - self.qqb * self.qqb
        self.delta_plus = self.qq * self.qbqb + self.qqb * self.qqb

    def truncated_first(self):
        """psi_q, psi_qb at the working order (for the co-frame exponentials)."""
        return self.q, self.qb


class _ClosedIngredients:
    """Jets of q, b(z), r''(y), ... shared by the closed-form catalog."""

    def __init__(self, spec: SolutionSpec, p: Point4, order: int):
        if 2.0 * p.z.real <= 0.0:
            raise DegenerateMetricError("z + z-bar must be positive")
        self.spec = spec
        self.q, self.qb, self.z, self.zb = seed_complex(p, order)
        self.y = seed_coordinates(p, order)[1]
        self.w = self.z + self.zb
        self.b = spec.b.jet(self.z)
        self.bb = spec.b.conjugated().jet(self.zb)
        self.b1 = spec.b.jet(self.z, nth=1)
        self.bb1 = spec.b.conjugated().jet(self.zb, nth=1)
        self.P = self.q + self.b
        self.Pb = self.qb + self.bb
        self.S = self.P + self.Pb
        self.rpp = spec.r.jet(self.y, nth=2)


def _require_family(spec: SolutionSpec, allowed: tuple, form: str) -> None:
    if spec.family not in allowed:
        raise ValueError(f"form {form!r} applies to families {allowed}, got {spec.family!r}")


# ---------------------------------------------------------------------------
# Generic Legendre-transformed metric
# ---------------------------------------------------------------------------

def metric_from_psi(spec: SolutionSpec, p: Point4, order: int = 2) -> MetricJet:
    """Metric of the Legendre picture assembled from psi's jet.

    Raises :class:`DegenerateMetricError` when the quadratic discriminant
    Delta_- or psi_{q q-bar} degenerates; the latter happens exactly on the
    r'' = 0 stratum of the special solutions, whose metrics are served by
    the closed forms instead.
    """
    if not 0 <= order <= 2:
        raise ValueError("metric order must be 0, 1 or 2")
    d = _PsiDerivs(spec, p, order)
    if abs(d.delta_minus.value) < 1e-10:
        raise DegenerateMetricError(
            f"Delta_- = {d.delta_minus.value:.3e} degenerate at {p}")
    if abs(d.qqb.value) < 1e-10:
        raise DegenerateMetricError(
            f"psi_qqb = {d.qqb.value:.3e} vanishes at {p} (r''=0 special stratum)")
    form = _QForm(p, order)
    form.add_square([d.qqb, None, d.qbz, None], weight=d.qq)
    form.add_square([None, d.qqb, None, d.qzb], weight=d.qbqb)
    form.add(_Q, _QB, d.delta_plus * d.qqb)
    form.add(_Q, _ZB, d.delta_plus * d.qzb)
    form.add(_QB, _Z, d.delta_plus * d.qbz)
    form.add(_Z, _ZB, d.delta_plus * d.zzb)
    form.add(_Z, _ZB, 2.0 * d.qqb * (d.qzb * d.qbz - d.qqb * d.zzb))
    form.scale(-1.0 / d.delta_minus)
    return form.to_metric()


# ---------------------------------------------------------------------------
# Closed-form catalog
# ---------------------------------------------------------------------------

def _metr1_form(spec: SolutionSpec, p: Point4, order: int) -> _QForm:
    _require_family(spec, ("sol1", "special1"), "metr1")
    c = _ClosedIngredients(spec, p, order)
    rho = -c.rpp  # first-solution closed forms carry the opposite r'' sign
    if abs(rho.value) < 1e-12:
        raise DegenerateMetricError("metr1 requires r''(y) != 0; use metric1 on the special stratum")
    w, P, Pb, S = c.w, c.P, c.Pb, c.S
    denom = S * rho + 4.0
    if abs(denom.value) < 1e-12:
        raise DegenerateMetricError("metr1 conformal factor degenerates")
    D = 0.25 * Pb * (P * rho + 4.0)
    Db = D.conjugate()
    A = (1.0 / 16.0) * w * w * rho * rho * D
    Ab = A.conjugate()
    cross = -0.25 * w * rho * D         # sqrt(A) sqrt(D) on the branch matching the generic metric
    crossb = cross.conjugate()
    B = (-1.0 / 32.0) * w * w * rho * (P * Pb * rho * rho + 2.0 * S * rho + 8.0)
    Bcross = (-1.0 / 8.0) * w * (P * Pb * rho * rho + 2.0 * S * rho + 8.0)  # B * 4/(w rho)
    E = 0.25 * (P * P + Pb * Pb) * rho + S
    form = _QForm(p, order)
    form.add(_Q, _Q, A)
    form.add(_Q, _Z, -2.0 * cross)
    form.add(_Z, _Z, D)
    form.add(_QB, _QB, Ab)
    form.add(_QB, _ZB, -2.0 * crossb)
    form.add(_ZB, _ZB, Db)
    form.add(_Q, _QB, B)
    form.add(_Q, _ZB, Bcross)
    form.add(_QB, _Z, Bcross)
    form.add(_Z, _ZB, E)
    form.scale(-4.0 / (w * w * denom))
    return form


def _metr2_form(spec: SolutionSpec, p: Point4, order: int) -> _QForm:
    _require_family(spec, ("sol2", "sol3", "special2"), "metr2")
    c = _ClosedIngredients(spec, p, order)
    rho = c.rpp
    if abs(rho.value) < 1e-12:
        raise DegenerateMetricError("metr2 requires r''(y) != 0; use metric2 on the special stratum")
    w, P, Pb, S, z, zb = c.w, c.P, c.Pb, c.S, c.z, c.zb
    denom = 4.0 - S * rho
    if abs(denom.value) < 1e-12:
        raise DegenerateMetricError("metr2 conformal factor degenerates")
    D = 0.25 * jet_powi(zb, 4) * Pb * (P * rho - 4.0)
    A = jet_powi(z / (4.0 * zb), 2) * w * w * rho * rho * D
    cross = -(z * w * rho / (4.0 * zb)) * D  # sqrt(A) sqrt(D) on the branch matching the generic metric
    pref1 = 4.0 / (z * z * zb * zb * w * w * denom)
    Btilde = (-1.0 / 32.0) * z * z * zb * zb * w * w * (P * Pb * rho * rho - 2.0 * S * rho + 8.0)
    B = Btilde * rho
    form = _QForm(p, order)
    form.add(_Q, _Q, A * pref1)
    form.add(_Q, _Z, -2.0 * cross * pref1)
    form.add(_Z, _Z, D * pref1)
    form.add(_QB, _QB, (A * pref1).conjugate())
    form.add(_QB, _ZB, (-2.0 * cross * pref1).conjugate())
    form.add(_ZB, _ZB, (D * pref1).conjugate())
    # mixed block of the displayed bilinear term, with the 1/rho factors
    # cancelled analytically against B
    form.add(_Q, _QB, 4.0 * B / (z * z * zb * zb * w * w * denom))
    form.add(_Q, _ZB, 16.0 * Btilde / (z * jet_powi(zb, 3) * jet_powi(w, 3) * denom))
    form.add(_QB, _Z, 16.0 * Btilde / (jet_powi(z, 3) * zb * jet_powi(w, 3) * denom))
    Q2 = P * P + Pb * Pb
    form.add(_Z, _ZB, (rho * Q2 - 4.0 * S) / (w * w * denom))
    return form


def _sol3_shorthand(c: _ClosedIngredients):
    """V, W and the shifted coordinates of the third-solution forms."""
    spec = c.spec
    k_jet = spec.k.jet(c.y)
    kp_jet = spec.k.jet(c.y, nth=1)
    Z1 = c.z - 2j * k_jet
    Z2 = c.zb + 2j * k_jet
    V = c.w * kp_jet - 0.25 * Z1 * Z2 * c.rpp
    W = c.P * V + Z1 * Z2
    Wb = c.Pb * V + Z1 * Z2
    return Z1, Z2, V, W, Wb


def _metr3_form(spec: SolutionSpec, p: Point4, order: int) -> _QForm:
    _require_family(spec, ("sol2", "sol3", "special2"), "metr3")
    c = _ClosedIngredients(spec, p, order)
    Z1, Z2, V, W, Wb = _sol3_shorthand(c)
    if abs(V.value) < 1e-10:
        raise DegenerateMetricError(f"metr3 shorthand V = {V.value:.3e} degenerates (special stratum)")
    w, P, Pb, S = c.w, c.P, c.Pb, c.S
    Z = Z1 * Z2
    scale_head = S * V + Z
    if abs(scale_head.value) < 1e-12 or abs(Z.value) < 1e-12:
        raise DegenerateMetricError("metr3 denominator degenerates")
    head = _QForm(p, order)
    head.add_square([-w * V, None, Z2 * Z2, None], weight=Pb * W)
    head.add_square([None, -w * V, None, Z1 * Z1], weight=P * Wb)
    mixed = W * Wb + P * Pb * V * V
    head.add(_Q, _QB, mixed * (-(w * w) * V))
    head.add(_Q, _ZB, mixed * w * Z1 * Z1)
    head.add(_QB, _Z, mixed * w * Z2 * Z2)
    head.add(_Z, _ZB, mixed * S * Z)
    head.scale(-1.0 / (w * w * Z1 * Z1 * Z2 * Z2 * scale_head))
    head.add(_Z, _ZB, 2.0 * P * Pb * V / (w * w * Z))
    return head


def _metric1_form(spec: SolutionSpec, p: Point4, order: int) -> _QForm:
    _require_family(spec, ("sol1", "special1"), "metric1")
    c = _ClosedIngredients(spec, p, order)
    w, P, Pb = c.w, c.P, c.Pb
    one = Jet.constant(1.0, p, order)
    form = _QForm(p, order)
    form.add(_Q, _ZB, w)
    form.add(_QB, _Z, w)
    # -[P dzb + Pb dz](dz + dzb)
    _product_pair(form, [None, None, Pb, P], [None, None, one, one], weight=-1.0)
    form.scale(1.0 / (w * w))
    return form


def _metric2_form(spec: SolutionSpec, p: Point4, order: int) -> _QForm:
    _require_family(spec, ("sol2", "special2"), "metric2")
    c = _ClosedIngredients(spec, p, order)
    w, P, Pb, z, zb = c.w, c.P, c.Pb, c.z, c.zb
    if min(abs(z.value), abs(zb.value)) < 1e-12:
        raise DegenerateMetricError("metric2 requires z != 0")
    form = _QForm(p, order)
    z2, zb2 = z * z, zb * zb
    # [Pb zb^2 dz + P z^2 dzb] (zb^2 dz + z^2 dzb)
    form.add(_Z, _Z, Pb * zb2 * zb2)
    form.add(_Z, _ZB, Pb * zb2 * z2 + P * z2 * zb2)
    form.add(_ZB, _ZB, P * z2 * z2)
    form.add(_Q, _ZB, z * zb * w * z2)
    form.add(_QB, _Z, z * zb * w * zb2)
    form.scale(1.0 / jet_powi(z * zb * w, 2))
    return form


def _product_pair(form: _QForm, left, right, weight=1.0) -> None:
    """Add weight * (sum left_mu dw^mu)(sum right_nu dw^nu) to the form."""
    for mu in range(4):
        if left[mu] is None:
            continue
        for nu in range(4):
            if right[nu] is None:
                continue
            form.add(mu, nu, weight * left[mu] * right[nu])


def metric_closed(form: str, spec: SolutionSpec, p: Point4, order: int = 2) -> MetricJet:
    """Closed-form metric of the catalog, as real-chart Taylor data."""
    if not 0 <= order <= 2:
        raise ValueError("metric order must be 0, 1 or 2")
    builders = {
        "metr1": _metr1_form,
        "metr2": _metr2_form,
        "metr3": _metr3_form,
        "metric1": _metric1_form,
        "metric2": _metric2_form,
    }
    if form not in builders:
        raise ValueError(f"unknown metric form {form!r}; choose from {METRIC_FORMS}")
    return builders[form](spec, p, order).to_metric()


# ---------------------------------------------------------------------------
# Co-frames
# ---------------------------------------------------------------------------

def _checked_sqrt(arg: Jet, what: str) -> Jet:
    v = arg.value
    if abs(v) <= 1e-12 or v.real <= 0.0:
        raise SingularCoframeError(
            f"{what}: square-root argument {v:.6g} is not in the right half-plane")
    return jet_sqrt(arg)


def _coframe_legtetrad(spec, p, order) -> CoframeJet:
    d = _PsiDerivs(spec, p, order)
    if abs(d.delta_minus.value) < 1e-12 or abs(d.qqb.value) < 1e-12:
        raise SingularCoframeError("legtetrad singular: Delta_- or psi_qqb vanishes")
    root_l = _checked_sqrt(-d.qqb * d.delta_minus, "legtetrad l")
    root_m = _checked_sqrt(-d.delta_minus / d.qqb, "legtetrad m")
    efac = jet_exp(0.5 * (d.q + d.qb))
    inv = 1.0 / root_l
    l = [d.qqb * d.qq * inv, d.qqb * d.qqb * inv, d.qq * d.qbz * inv, d.qqb * d.qzb * inv]
    m = [None, None, efac * root_m, None]
    m = [Jet.constant(0.0, p, order) if c is None else c for c in m]
    return CoframeJet(point=p, order=order,
                      l=complex_covector_to_real(p, order, l),
                      m=complex_covector_to_real(p, order, m))


def _coframe_legtetrad2(spec, p, order) -> CoframeJet:
    d = _PsiDerivs(spec, p, order)
    if abs(d.delta_minus.value) < 1e-12:
        raise SingularCoframeError("legtetrad2 singular: Delta_- vanishes")
    t1 = d.qzb * d.qbqb - d.qqb * d.qbzb   # psi_qzb psi_qbqb - psi_qqb psi_qbzb
    t2 = d.qq * d.qbzb - d.qqb * d.qzb     # psi_qq psi_qbzb - psi_qqb psi_qzb
    K = d.qz * t1 + d.qbz * t2 - d.zzb * d.delta_minus
    root_lk = _checked_sqrt(d.delta_minus * K, "legtetrad2 l")
    root_k = _checked_sqrt(K, "legtetrad2 m")
    head = d.qqb * d.qbzb - d.qbqb * d.qzb
    lz = d.qbz * t2 - d.zzb * d.delta_minus
    inv_l = 1.0 / root_lk
    l = [head * d.qq * inv_l, head * d.qqb * inv_l, lz * inv_l, head * d.qzb * inv_l]
    mfac = jet_exp(d.q) * _checked_sqrt(d.delta_minus, "legtetrad2 m factor") / root_k
    m = [d.qq * mfac, d.qqb * mfac, d.qz * mfac, d.qzb * mfac]
    return CoframeJet(point=p, order=order,
                      l=complex_covector_to_real(p, order, l),
                      m=complex_covector_to_real(p, order, m))


def _coframe_tetr1(spec, p, order) -> CoframeJet:
    _require_family(spec, ("sol1", "special1"), "tetr1")
    c = _ClosedIngredients(spec, p, order)
    rho = -c.rpp  # same sign convention as metr1
    if abs(rho.value) < 1e-12:
        raise SingularCoframeError("tetr1 singular at r'' = 0")
    w, P, S = c.w, c.P, c.S
    root = _checked_sqrt(rho * (S * rho + 4.0), "tetr1 l")
    inv = 1.0 / (4.0 * w * root)
    # numerator: w P rho^2 (dqb - dq) + 4 P rho (dzb - dz) - 4 w rho dq - 16 dz
    l = [(-w * P * rho * rho - 4.0 * w * rho) * inv,
         (w * P * rho * rho) * inv,
         (-4.0 * P * rho - 16.0) * inv,
         (4.0 * P * rho) * inv]
    root_m = _checked_sqrt((S * rho + 4.0) / rho, "tetr1 m")
    m = [Jet.constant(0.0, p, order)] * 2 + [root_m / w, Jet.constant(0.0, p, order)]
    return CoframeJet(point=p, order=order,
                      l=complex_covector_to_real(p, order, l),
                      m=complex_covector_to_real(p, order, m))


def _coframe_tetr2(spec, p, order) -> CoframeJet:
    _require_family(spec, ("sol2", "sol3", "special2"), "tetr2")
    c = _ClosedIngredients(spec, p, order)
    rho = c.rpp
    if abs(rho.value) < 1e-12:
        raise SingularCoframeError("tetr2 singular at r'' = 0")
    w, P, Pb, S, z, zb = c.w, c.P, c.Pb, c.S, c.z, c.zb
    pref = _checked_sqrt(Pb / (P * rho * (S * rho - 4.0)), "tetr2 l") / (4.0 * z * zb * w)
    l = [(z * zb * w * rho * (P * rho - 4.0)) * pref,
         (-z * zb * w * rho * rho * P) * pref,
         (4.0 * P * rho * zb * zb - 16.0 * zb * zb) * pref,
         (-4.0 * P * rho * z * z) * pref]
    root_m = _checked_sqrt((S * rho - 4.0) / rho, "tetr2 m")
    m = [Jet.constant(0.0, p, order)] * 2 + [root_m / w, Jet.constant(0.0, p, order)]
    return CoframeJet(point=p, order=order,
                      l=complex_covector_to_real(p, order, l),
                      m=complex_covector_to_real(p, order, m))


def _coframe_tetr3(spec, p, order) -> CoframeJet:
    _require_family(spec, ("sol2", "sol3", "special2"), "tetr3")
    c = _ClosedIngredients(spec, p, order)
    Z1, Z2, V, W, Wb = _sol3_shorthand(c)
    w, P, Pb, S = c.w, c.P, c.Pb, c.S
    Z = Z1 * Z2
    if abs(V.value) < 1e-12:
        raise SingularCoframeError("tetr3 singular: V vanishes (special stratum)")
    root = _checked_sqrt(V * (S * V + Z), "tetr3 l")
    inv = 1.0 / (w * Z2 * Z2 * root)
    l = [(-w * V * Pb * V) * inv,
         (w * V * Wb) * inv,
         (Pb * Z2 * Z2 * V) * inv,
         (-Z1 * Z1 * Wb) * inv]
    root_m = _checked_sqrt((S * V + Z) / V, "tetr3 m")
    m = [Jet.constant(0.0, p, order)] * 2 + [root_m / w, Jet.constant(0.0, p, order)]
    return CoframeJet(point=p, order=order,
                      l=complex_covector_to_real(p, order, l),
                      m=complex_covector_to_real(p, order, m))


def _coframe_frame2sol1(spec, p, order) -> CoframeJet:
    _require_family(spec, ("sol1", "special1"), "frame2sol1")
    c = _ClosedIngredients(spec, p, order)
    w, P = c.w, c.P
    beta = -(c.b1 + c.bb1)
    pref = 1.0 / (_checked_sqrt(w, "frame2sol1") ** 3 * _checked_sqrt(beta, "frame2sol1 b'"))
    l = [w * pref, Jet.constant(0.0, p, order), (-w * c.bb1 - P) * pref, -P * pref]
    m = [-w * pref, Jet.constant(0.0, p, order), (P - w * c.b1) * pref, P * pref]
    return CoframeJet(point=p, order=order,
                      l=complex_covector_to_real(p, order, l),
                      m=complex_covector_to_real(p, order, m))


def _coframe_frame2sol2(spec, p, order) -> CoframeJet:
    _require_family(spec, ("sol2", "special2"), "frame2sol2")
    c = _ClosedIngredients(spec, p, order)
    w, P, Pb, z, zb = c.w, c.P, c.Pb, c.z, c.zb
    curly = 2.0 * (z * P + zb * Pb) - (z * z * c.b1 + zb * zb * c.bb1)
    curly_root = _checked_sqrt(curly, "frame2sol2 factor")
    zroot = _checked_sqrt(z, "frame2sol2 z")
    zbroot = _checked_sqrt(zb, "frame2sol2 zb")
    wroot = _checked_sqrt(w, "frame2sol2 w")
    pref_l = 1.0 / (zroot * (zbroot * wroot) ** 3 * curly_root)
    l = [zb * w * z * z * pref_l,
         Jet.constant(0.0, p, order),
         (P * z * zb * zb + zb * w * (2.0 * zb * Pb - zb * zb * c.bb1)) * pref_l,
         P * z * z * z * pref_l]
    pref_m = zbroot / ((zroot * wroot) ** 3 * curly_root)
    m = [-z * zb * w * pref_m,
         Jet.constant(0.0, p, order),
         (P * (2.0 * z + zb) * zb - z * zb * w * c.b1) * pref_m,
         -P * z * z * pref_m]
    return CoframeJet(point=p, order=order,
                      l=complex_covector_to_real(p, order, l),
                      m=complex_covector_to_real(p, order, m))


def coframe(form: str, spec: SolutionSpec, p: Point4, order: int = 2) -> CoframeJet:
    """Newman-Penrose co-frame of the catalog (components are jets)."""
    if not 0 <= order <= 2:
        raise ValueError("coframe order must be 0, 1 or 2")
    builders = {
        "legtetrad": _coframe_legtetrad,
        "legtetrad2": _coframe_legtetrad2,
        "tetr1": _coframe_tetr1,
        "tetr2": _coframe_tetr2,
        "tetr3": _coframe_tetr3,
        "frame2sol1": _coframe_frame2sol1,
        "frame2sol2": _coframe_frame2sol2,
    }
    if form not in builders:
        raise ValueError(f"unknown coframe form {form!r}; choose from {COFRAME_FORMS}")
    return builders[form](spec, p, order)


def coframe_metric_check(c: CoframeJet, g: MetricJet) -> float:
    """Max deviation of the symmetrized l (x) l-bar - m (x) m-bar from g.

    Compares every Taylor coefficient up to the common order, so the
    identity is checked as an identity of functions, not just of values.
    """
    if c.point != g.point:
        raise ValueError("coframe and metric base points differ")
    order = min(c.order, g.order)
    mask = _DEG <= order
    worst = 0.0
    jets = c.bilinear_metric_jets()
    for a in range(4):
        for b in range(4):
            diff = jets[a][b].coeffs - g.comps[a, b]
            worst = max(worst, float(np.max(np.abs(diff[mask]))))
    return worst

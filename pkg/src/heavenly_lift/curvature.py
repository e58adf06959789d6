"""Numeric curvature pipeline and closed-form curvature matching.

From an order-2 :class:`MetricJet` everything is exact jet arithmetic: the
inverse metric and Christoffel symbols are built as order-1 jets, so the
connection derivatives entering the Riemann tensor carry no finite-difference
error.  Conventions:

    R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
              + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}

with lowering through the metric and Ricci R_{bd} = R^a_{bad}.

The closed curvature components of the special solutions are stated in a
complex-coordinate basis whose labeling and overall sign are not pinned down
by their source; ``select_convention`` searches the eight candidates (which
conjugate pair carries labels (3,4), times a global sign) against canonical
probes and caches the unique survivor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from heavenly_lift.funcspace import HoloFn
from heavenly_lift.geometry import CoframeJet, MetricJet, metric_closed
from heavenly_lift.jets import Jet, Point4
from heavenly_lift.solutions import SolutionSpec

_WEDGE_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass
class CurvatureReport:
    """Connection and curvature data at one point."""

    point: Point4
    christoffel: np.ndarray          # (4,4,4) real, Gamma^a_{bc}
    riemann_upper: np.ndarray        # (4,4,4,4) real, R^a_{bcd}
    riemann_lower: np.ndarray        # (4,4,4,4) real, R_{abcd}
    ricci: np.ndarray                # (4,4) real
    metric_value: np.ndarray         # (4,4) real
    scale: float                     # magnitude of the largest curvature constituent

    @property
    def ricci_rel(self) -> float:
        return float(np.max(np.abs(self.ricci))) / max(self.scale, 1.0)

    @property
    def riemann_max(self) -> float:
        return float(np.max(np.abs(self.riemann_lower)))


def _inverse_metric_jets(g: MetricJet, order: int):
    """Order-``order`` jets of the inverse metric via a truncated Neumann series."""
    g0 = g.value()
    g0_inv = np.linalg.inv(g0)
    jets = [[g.jet(a, b) for b in range(4)] for a in range(4)]
    # delta = g - g0 (nilpotent), X = sum_k (-g0inv delta)^k g0inv
    zero = Jet.constant(0.0, g.point, g.order)
    delta = [[jets[a][b] - g0[a, b] for b in range(4)] for a in range(4)]
    acc = [[Jet.constant(g0_inv[a, b], g.point, g.order) for b in range(4)] for a in range(4)]
    term = acc
    for _ in range(order):
        nxt = [[zero for _ in range(4)] for _ in range(4)]
        for a in range(4):
            for b in range(4):
                s = zero
                for e in range(4):
                    for f in range(4):
                        if abs(g0_inv[a, e]) == 0.0:
                            continue
                        s = s + (-g0_inv[a, e]) * delta[e][f] * term[f][b]
                nxt[a][b] = s
        term = nxt
        acc = [[acc[a][b] + term[a][b] for b in range(4)] for a in range(4)]
    return acc


def _christoffel_jets(g: MetricJet):
    """Order-1 jets of Gamma^a_{bc} from an order-2 metric jet."""
    if g.order < 2:
        raise ValueError("christoffel jets need an order-2 metric jet")
    ginv = _inverse_metric_jets(g, 1)
    ginv = [[Jet(1, g.point, ginv[a][b].coeffs) for b in range(4)] for a in range(4)]
    jets = [[g.jet(a, b) for b in range(4)] for a in range(4)]
    dg = [[[jets[a][b].dx(c) for c in range(4)] for b in range(4)] for a in range(4)]
    gamma = [[[None] * 4 for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for b in range(4):
            for c in range(b, 4):
                s = Jet.constant(0.0, g.point, 1)
                for d in range(4):
                    s = s + ginv[a][d] * (dg[d][c][b] + dg[d][b][c] - dg[b][c][d])
                s = 0.5 * s
                gamma[a][b][c] = s
                gamma[a][c][b] = s
    return gamma


def christoffel(g: MetricJet) -> np.ndarray:
    """Levi-Civita connection coefficients Gamma^a_{bc} at the base point."""
    if g.order < 1:
        raise ValueError("christoffel needs a metric jet of order >= 1")
    if abs(g.det()) < 1e-10:
        raise ValueError("singular metric")
    g0 = g.value()
    ginv = np.linalg.inv(g0)
    dg = np.empty((4, 4, 4))
    for a in range(4):
        for b in range(4):
            jet = g.jet(a, b)
            for c in range(4):
                dg[a, b, c] = jet.dx(c).value.real
    out = np.empty((4, 4, 4))
    for a in range(4):
        for b in range(4):
            for c in range(4):
                out[a, b, c] = 0.5 * np.sum(
                    ginv[a, :] * (dg[:, c, b] + dg[:, b, c] - dg[b, c, :]))
    return out


def riemann_ricci(g: MetricJet) -> CurvatureReport:
    """Full curvature data from an order-2 metric jet."""
    if g.order < 2:
        raise ValueError("riemann_ricci needs an order-2 metric jet")
    if abs(g.det()) < 1e-10:
        raise ValueError("singular metric")
    gamma_jets = _christoffel_jets(g)
    gamma = np.empty((4, 4, 4))
    dgamma = np.empty((4, 4, 4, 4))  # d_c Gamma^a_{bd} -> [a,b,d,c]
    for a in range(4):
        for b in range(4):
            for d in range(4):
                jet = gamma_jets[a][b][d]
                gamma[a, b, d] = jet.value.real
                for c in range(4):
                    dgamma[a, b, d, c] = jet.dx(c).value.real
    riem_up = np.empty((4, 4, 4, 4))
    scale = 0.0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    t1 = dgamma[a, d, b, c]
                    t2 = dgamma[a, c, b, d]
                    t3 = np.sum(gamma[a, c, :] * gamma[:, d, b])
                    t4 = np.sum(gamma[a, d, :] * gamma[:, c, b])
                    riem_up[a, b, c, d] = t1 - t2 + t3 - t4
                    scale = max(scale, abs(t1), abs(t2), abs(t3), abs(t4))
    g0 = g.value()
    riem_low = np.einsum("ae,ebcd->abcd", g0, riem_up)
    ricci = np.einsum("abad->bd", riem_up)
    return CurvatureReport(point=g.point, christoffel=gamma, riemann_upper=riem_up,
                           riemann_lower=riem_low, ricci=ricci, metric_value=g0,
                           scale=scale)


# ---------------------------------------------------------------------------
# Real chart <-> complex coordinate basis
# ---------------------------------------------------------------------------

# _A[a, mu] = d x^a / d w^mu for w = (q, q-bar, z, z-bar)
_A = np.array([
    [0.5, 0.5, 0.0, 0.0],
    [-0.5j, 0.5j, 0.0, 0.0],
    [0.0, 0.0, 0.5, 0.5],
    [0.0, 0.0, -0.5j, 0.5j],
])
# _B[mu, a] = d w^mu / d x^a  (inverse transformation)
_B = np.array([
    [1.0, 1.0j, 0.0, 0.0],
    [1.0, -1.0j, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0j],
    [0.0, 0.0, 1.0, -1.0j],
])


def complexify(tensor: np.ndarray) -> np.ndarray:
    """Transform an all-lower-index real-chart tensor to the complex basis."""
    out = tensor.astype(complex)
    for axis in range(tensor.ndim):
        out = np.tensordot(_A, out, axes=(0, axis))
        out = np.moveaxis(out, 0, axis)
    return out


def realify(tensor: np.ndarray) -> np.ndarray:
    """Inverse of :func:`complexify` for all-lower-index tensors."""
    out = tensor.astype(complex)
    for axis in range(tensor.ndim):
        out = np.tensordot(_B, out, axes=(0, axis))
        out = np.moveaxis(out, 0, axis)
    return out


# ---------------------------------------------------------------------------
# Closed-form curvature of the special solutions
# ---------------------------------------------------------------------------

def closed_r3434(spec: SolutionSpec, p: Point4) -> complex:
    """The single independent lower-index curvature component, closed form."""
    z, zb = p.z, p.zbar
    w = z + zb
    b1 = complex(spec.b.eval_derivs(z, 2)[1])
    b2 = complex(spec.b.eval_derivs(z, 2)[2])
    bb1, bb2 = b1.conjugate(), b2.conjugate()
    if spec.family == "special1":
        return 0.5 * w ** (-3) * (2.0 * (b1 + bb1) - w * (b2 + bb2))
    if spec.family == "special2":
        return (1.0 / (2.0 * z**2 * zb**2 * w**3)) * (
            w * (z**4 * b2 + zb**4 * bb2)
            + 2.0 * z**3 * (z + 2.0 * zb) * b1
            + 2.0 * zb**3 * (zb + 2.0 * z) * bb1)
    raise ValueError("closed curvature forms exist for the special solutions only")


def closed_mixed_relations(spec: SolutionSpec, p: Point4, r3434: complex) -> dict:
    """The two non-vanishing mixed components {'R2_434': ..., 'R1_334': ...}.

    For the second special solution the conformal factor (z + z-bar) and the
    relative minus of the first-solution pair are restored (the two families
    then agree in the z -> real limit, and the values match the numeric
    pipeline that reproduces the first family's relations exactly).
    """
    z, zb = p.z, p.zbar
    w = z + zb
    if spec.family == "special1":
        return {"R2_434": 2.0 * w * r3434, "R1_334": -2.0 * w * r3434}
    if spec.family == "special2":
        return {"R2_434": w * (2.0 * z / zb) * r3434,
                "R1_334": -w * (2.0 * zb / z) * r3434}
    raise ValueError("closed curvature forms exist for the special solutions only")


@dataclass(frozen=True)
class Convention:
    """Complex-coordinate labeling (1,2,3,4) and overall curvature sign."""

    labels: tuple          # permutation of ("q", "qb", "z", "zb")
    sign: int              # +1 or -1

    def describe(self) -> str:
        pretty = {"q": "q", "qb": "q-bar", "z": "z", "zb": "z-bar"}
        body = ", ".join(pretty[t] for t in self.labels)
        return f"{'+' if self.sign > 0 else '-'}({body})"


_SLOT = {"q": 0, "qb": 1, "z": 2, "zb": 3}

_CANDIDATES = tuple(
    Convention(labels=lab, sign=s)
    for lab in (("q", "qb", "z", "zb"), ("qb", "q", "zb", "z"),
                ("z", "zb", "q", "qb"), ("zb", "z", "qb", "q"))
    for s in (+1, -1)
)

_CONVENTION_CACHE: list = []


def _numeric_components(spec: SolutionSpec, p: Point4):
    """Complex-basis R_{....}, R^._{...} and metric inverse at p."""
    form = "metric1" if spec.family == "special1" else "metric2"
    g = metric_closed(form, spec, p, 2)
    rep = riemann_ricci(g)
    r_low_c = complexify(rep.riemann_lower)
    g_c = complexify(rep.metric_value)
    ginv_c = np.linalg.inv(g_c)
    r_up_c = np.einsum("ae,ebcd->abcd", ginv_c, r_low_c)
    return r_low_c, r_up_c, rep


def _convention_defects(conv: Convention, spec: SolutionSpec, points) -> float:
    worst = 0.0
    s = [_SLOT[t] for t in conv.labels]
    for p in points:
        r_low_c, r_up_c, _ = _numeric_components(spec, p)
        closed = closed_r3434(spec, p)
        mixed = closed_mixed_relations(spec, p, closed)
        scale = max(abs(closed), 1.0)
        num_3434 = conv.sign * r_low_c[s[2], s[3], s[2], s[3]]
        worst = max(worst, abs(num_3434 - closed) / scale)
        num_2434 = conv.sign * r_up_c[s[1], s[3], s[2], s[3]]
        num_1334 = conv.sign * r_up_c[s[0], s[2], s[2], s[3]]
        worst = max(worst, abs(num_2434 - mixed["R2_434"]) / scale)
        worst = max(worst, abs(num_1334 - mixed["R1_334"]) / scale)
    return worst


def select_convention(tol: float = 1e-6, force: bool = False) -> Convention:
    """Search the eight labeling/sign candidates against canonical probes.

    Probes both special families (the first alone is conjugation-degenerate:
    its closed forms are real, so the fully conjugated labeling matches it
    equally well).  The unique survivor is cached.
    """
    if _CONVENTION_CACHE and not force:
        return _CONVENTION_CACHE[0]
    b = HoloFn.polynomial([0.0, 1.0, 0.15])
    probes = [
        (SolutionSpec.special1(b, alpha=0.3, r0=0.0),
         [Point4(1.1 + 0.2j, 1.3 - 0.25j), Point4(0.8 - 0.1j, 1.7 + 0.3j)]),
        (SolutionSpec.special2(b, alpha=0.3, r0=0.0),
         [Point4(1.1 + 0.2j, 1.3 - 0.25j), Point4(0.8 - 0.1j, 1.7 + 0.3j)]),
    ]
    survivors = []
    for conv in _CANDIDATES:
        defect = max(_convention_defects(conv, spec, pts) for spec, pts in probes)
        if defect <= tol:
            survivors.append((defect, conv))
    if len(survivors) != 1:
        raise RuntimeError(
            f"curvature convention search found {len(survivors)} consistent "
            f"candidates instead of exactly one: {[c.describe() for _, c in survivors]}")
    _CONVENTION_CACHE.clear()
    _CONVENTION_CACHE.append(survivors[0][1])
    return survivors[0][1]


@dataclass
class CurvatureMatch:
    """Outcome of matching numeric curvature against the closed forms."""

    convention: Convention
    max_rel_dev: float
    relation_dev: float
    n_points: int
    values: list = field(default_factory=list)  # (point, numeric, closed)

    @property
    def matched(self) -> bool:
        return self.max_rel_dev <= 1e-8 and self.relation_dev <= 1e-8


def compare_curv_closed(spec: SolutionSpec, points) -> CurvatureMatch:
    """Match numeric complex-basis curvature against the closed forms.

    ``points`` is one Point4 or an iterable.  Uses the cached labeling
    convention (running the canonical search on first use).
    """
    if not spec.is_special:
        raise ValueError("closed-form curvature comparison applies to the special solutions")
    if isinstance(points, Point4):
        points = [points]
    conv = select_convention()
    s = [_SLOT[t] for t in conv.labels]
    worst = rel_worst = 0.0
    values = []
    for p in points:
        r_low_c, r_up_c, _ = _numeric_components(spec, p)
        closed = closed_r3434(spec, p)
        mixed = closed_mixed_relations(spec, p, closed)
        scale = max(abs(closed), 1.0)
        num = conv.sign * r_low_c[s[2], s[3], s[2], s[3]]
        worst = max(worst, abs(num - closed) / scale)
        num_2434 = conv.sign * r_up_c[s[1], s[3], s[2], s[3]]
        num_1334 = conv.sign * r_up_c[s[0], s[2], s[2], s[3]]
        rel_worst = max(rel_worst,
                        abs(num_2434 - mixed["R2_434"]) / scale,
                        abs(num_1334 - mixed["R1_334"]) / scale)
        values.append((p, num, closed))
    return CurvatureMatch(convention=conv, max_rel_dev=worst, relation_dev=rel_worst,
                          n_points=len(values), values=values)


# ---------------------------------------------------------------------------
# Frame curvature two-forms
# ---------------------------------------------------------------------------

@dataclass
class FramePatternReport:
    """Deviations of the frame two-forms from the special solutions' pattern."""

    zeros_dev: float          # the eight components that must vanish
    relations_dev: float      # equality/proportionality chain among the rest
    combination_dev: float    # parallelism to the displayed wedge combination
    combination_factor: complex  # fitted global factor (a convention constant)
    scale: float

    @property
    def max_rel(self) -> float:
        s = max(self.scale, 1e-300)
        return max(self.zeros_dev, self.relations_dev, self.combination_dev) / s


_ZERO_SLOTS = ((0, 1), (0, 3), (1, 0), (1, 2), (2, 1), (2, 3), (3, 0), (3, 2))


def _displayed_combination(spec: SolutionSpec, p: Point4) -> np.ndarray:
    """The stated wedge combination of the reference two-form component.

    Wedge basis order: o1^o2, o1^o3, o1^o4, o2^o3, o2^o4, o3^o4.
    """
    z, zb = p.z, p.zbar
    w = z + zb
    d = spec.b.eval_derivs(z, 2)
    b1, b2 = complex(d[1]), complex(d[2])
    bb1, bb2 = b1.conjugate(), b2.conjugate()
    out = np.zeros(6, dtype=complex)
    if spec.family == "special1":
        coef = (2.0 / (b1 + bb1)) * ((b2 + bb2) / (b1 + bb1) - 2.0 / w)
        out[3] = coef          # o2^o3
        out[2] = -coef         # o1^o4
        out[5] = -coef         # o3^o4
        out[0] = -coef         # o1^o2
        return out
    if spec.family == "special2":
        P = p.q + complex(d[0])
        Pb = P.conjugate()
        head = (z * zb) ** (-2) / w / (z * z * b1 + zb * zb * bb1 - 2.0 * (z * P + zb * Pb)) ** 2
        bracket = w * (z**4 * b2 + zb**4 * bb2) \
            + 2.0 * z**3 * (z + 2.0 * zb) * b1 + 2.0 * zb**3 * (2.0 * z + zb) * bb1
        coef = head * bracket
        out[3] = z**4 * coef
        out[2] = -(zb**4) * coef
        out[0] = -((z * zb) ** 2) * coef
        out[5] = -((z * zb) ** 2) * coef
        return out
    raise ValueError("frame patterns exist for the special solutions only")


def frame_pattern_check(spec: SolutionSpec, F: np.ndarray, p: Point4) -> FramePatternReport:
    """Check the zero pattern and component relations of the frame two-forms.

    The relation chains are the conjugation-consistent ones (the second
    family's printed chain flips two signs that would contradict
    o(2) = conj o(1), o(4) = conj o(3); the pattern enforced here is forced
    by that symmetry and reproduced by the numeric pipeline):

    * family 1:  R3_1 = R3_3 = R2_4 = -R1_1 = -R4_2 = -R1_3 = -R4_4 = R2_2
    * family 2:  R2_2 = R3_3 = -R1_1,  R4_4 = R1_1,
                 R1_3 = R4_2 = (z^2/zb^2) R1_1,
                 R2_4 = R3_1 = -(zb^2/z^2) R1_1

    The displayed combination is matched up to one global factor (a wedge
    normalization plus curvature-sign convention), fitted and reported.
    """
    scale = float(np.max(np.abs(F)))
    zeros = max(float(np.max(np.abs(F[i, j]))) for i, j in _ZERO_SLOTS)
    z, zb = p.z, p.zbar
    if spec.family == "special1":
        base = F[1, 1]
        chain = [F[2, 0] - base, F[2, 2] - base, F[1, 3] - base,
                 F[0, 0] + base, F[3, 1] + base, F[0, 2] + base, F[3, 3] + base]
    elif spec.family == "special2":
        base = F[0, 0]
        rp = (z * z) / (zb * zb)
        rm = (zb * zb) / (z * z)
        chain = [F[1, 1] + base, F[2, 2] + base, F[3, 3] - base,
                 F[0, 2] - rp * base, F[3, 1] - rp * base,
                 F[1, 3] + rm * base, F[2, 0] + rm * base]
    else:
        raise ValueError("frame patterns exist for the special solutions only")
    rel = max(float(np.max(np.abs(d))) for d in chain)
    disp = _displayed_combination(spec, p)
    ref = F[1, 1] if spec.family == "special1" else F[0, 0]
    k = int(np.argmax(np.abs(disp)))
    factor = ref[k] / disp[k]
    comb = float(np.max(np.abs(ref - factor * disp)))
    return FramePatternReport(zeros_dev=zeros, relations_dev=rel,
                              combination_dev=comb, combination_factor=factor,
                              scale=scale)


def frame_curvature(rep: CurvatureReport, c: CoframeJet) -> np.ndarray:
    """Curvature two-form components over the co-frame wedge basis.

    Returns F with shape (4, 4, 6): F[i, j, k] is the o(k1) ^ o(k2)
    coefficient of R^i_j for the k-th pair of ``(0,1),(0,2),(0,3),(1,2),
    (1,3),(2,3)`` in the frame ordering o(1)=l, o(2)=l-bar, o(3)=m,
    o(4)=m-bar.
    """
    e = c.frame_matrix()            # rows: covector components of o(i)
    if abs(np.linalg.det(e)) < 1e-12:
        raise ValueError("singular frame")
    einv = np.linalg.inv(e)         # columns: frame vectors
    # R^i_{j,ab} = e[i,c] einv[d,j] R^c_{d,ab}
    r = np.einsum("ic,dj,cdab->ijab", e, einv, rep.riemann_upper.astype(complex))
    # wedge components: F_{i j, kl} = R^i_{j,ab} E_k^a E_l^b  (antisymmetric in kl)
    rf = np.einsum("ijab,ka,lb->ijkl", r, einv.T, einv.T)
    out = np.empty((4, 4, 6), dtype=complex)
    for n, (k, l) in enumerate(_WEDGE_PAIRS):
        out[:, :, n] = rf[:, :, k, l]
    return out

"""Truncated multivariate Taylor arithmetic (jets) over four real coordinates.

A :class:`Jet` stores the Taylor coefficients of a complex-valued function of
the real chart ``(x1, x2, x3, x4) = (Re q, Im q, Re z, Im z)`` around a base
:class:`Point4`, up to a fixed total degree (at most 4).  All arithmetic is
exact at the truncation order, so partial derivatives extracted from jets
carry no finite-difference error.  Wirtinger derivatives with respect to the
complex coordinates ``q, q-bar, z, z-bar`` are obtained by the usual linear
combinations of real derivatives.

Everything here is pure-value code: no shared mutable state, safe to call
concurrently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping

import numpy as np

ORDER_MAX = 4
NVARS = 4

_BRANCH_MARGIN = 1e-9  # distance of arg from the cut at pi
_ZERO_VALUE = 1e-12    # ln/sqrt refuse arguments this close to 0
_DIV_FLOOR = 1e-14     # division refuses denominators this close to 0


class JetError(ValueError):
    """Domain violation inside jet arithmetic."""


class BranchCutError(JetError):
    """ln/sqrt argument on or too close to the principal branch cut."""


# ---------------------------------------------------------------------------
# Multi-index layout (graded lexicographic, all |alpha| <= 4 in 4 variables)
# ---------------------------------------------------------------------------

def _build_layout():
    multis = []
    for total in range(ORDER_MAX + 1):
        grade = [m for m in product(range(total + 1), repeat=NVARS) if sum(m) == total]
        grade.sort()
        multis.extend(grade)
    index = {m: i for i, m in enumerate(multis)}
    deg = np.array([sum(m) for m in multis], dtype=np.int64)
    return multis, index, deg


_MULTIS, _INDEX, _DEG = _build_layout()
N_COEFFS = len(_MULTIS)  # 70


def _build_mul_table():
    ii, jj, kk = [], [], []
    for i, a in enumerate(_MULTIS):
        for j, b in enumerate(_MULTIS):
            if _DEG[i] + _DEG[j] <= ORDER_MAX:
                c = tuple(a[v] + b[v] for v in range(NVARS))
                ii.append(i)
                jj.append(j)
                kk.append(_INDEX[c])
    return np.array(ii), np.array(jj), np.array(kk)


_MUL_I, _MUL_J, _MUL_K = _build_mul_table()


def _build_deriv_maps():
    # (dst, src, factor): coefficient of d/dx_v at dst comes from src times factor
    maps = []
    for v in range(NVARS):
        dst, src, fac = [], [], []
        for i, a in enumerate(_MULTIS):
            up = list(a)
            up[v] += 1
            key = tuple(up)
            if key in _INDEX:
                dst.append(i)
                src.append(_INDEX[key])
                fac.append(a[v] + 1)
        maps.append((np.array(dst), np.array(src), np.array(fac, dtype=np.float64)))
    return maps


_DERIV_MAPS = _build_deriv_maps()

_DEGREE_MASKS = [(_DEG <= n) for n in range(ORDER_MAX + 1)]


@dataclass(frozen=True)
class Point4:
    """Base point: two complex coordinates; conjugates are implicit."""

    q: complex
    z: complex

    @property
    def qbar(self) -> complex:
        return self.q.conjugate()

    @property
    def zbar(self) -> complex:
        return self.z.conjugate()

    def reals(self) -> tuple[float, float, float, float]:
        return (self.q.real, self.q.imag, self.z.real, self.z.imag)

    @classmethod
    def from_reals(cls, x1: float, x2: float, x3: float, x4: float) -> "Point4":
        return cls(complex(x1, x2), complex(x3, x4))


class Jet:
    """Dense truncated Taylor expansion with complex coefficients.

    ``coeffs[i]`` is the coefficient of ``prod (x_v - x0_v)^alpha_v`` for the
    multi-index ``_MULTIS[i]``; entries of total degree above ``order`` are
    kept at exactly zero.
    """

    __slots__ = ("order", "point", "coeffs")

    def __init__(self, order: int, point: Point4, coeffs: np.ndarray):
        self.order = order
        self.point = point
        self.coeffs = coeffs

    # -- construction -------------------------------------------------------

    @staticmethod
    def constant(value: complex, point: Point4, order: int) -> "Jet":
        _check_order(order)
        c = np.zeros(N_COEFFS, dtype=np.complex128)
        c[0] = value
        return Jet(order, point, c)

    # -- basic queries -------------------------------------------------------

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def deriv(self, alpha: tuple[int, int, int, int]) -> complex:
        """Partial derivative d^alpha f / dx^alpha at the base point."""
        if sum(alpha) > self.order:
            raise JetError(f"derivative {alpha} exceeds jet order {self.order}")
        fac = 1.0
        for a in alpha:
            fac *= math.factorial(a)
        return complex(self.coeffs[_INDEX[tuple(alpha)]]) * fac

    def max_imag(self) -> float:
        return float(np.max(np.abs(self.coeffs.imag)))

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise JetError("jet orders differ")
            if other.point != self.point:
                raise JetError("jet base points differ")
            return other
        return Jet.constant(complex(other), self.point, self.order)

    def __add__(self, other) -> "Jet":
        o = self._coerce(other)
        return Jet(self.order, self.point, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        o = self._coerce(other)
        return Jet(self.order, self.point, self.coeffs - o.coeffs)

    def __rsub__(self, other) -> "Jet":
        o = self._coerce(other)
        return Jet(self.order, self.point, o.coeffs - self.coeffs)

    def __neg__(self) -> "Jet":
        return Jet(self.order, self.point, -self.coeffs)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.order, self.point, self.coeffs * complex(other))
        o = self._coerce(other)
        out = np.zeros(N_COEFFS, dtype=np.complex128)
        np.add.at(out, _MUL_K, self.coeffs[_MUL_I] * o.coeffs[_MUL_J])
        if self.order < ORDER_MAX:
            out[~_DEGREE_MASKS[self.order]] = 0.0
        return Jet(self.order, self.point, out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.order, self.point, self.coeffs / complex(other))
        return self * self._coerce(other)._inverse()

    def __rtruediv__(self, other) -> "Jet":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "Jet":
        return jet_powi(self, n)

    def _inverse(self) -> "Jet":
        v = self.value
        if abs(v) <= _DIV_FLOOR:
            raise ZeroDivisionError("division by a jet with vanishing value")
        # 1/f = (1/v) * sum_k w^k  with  w = 1 - f/v  (nilpotent)
        w = Jet(self.order, self.point, -(self.coeffs / v))
        w.coeffs[0] = 0.0
        acc = Jet.constant(1.0, self.point, self.order)
        for _ in range(self.order):
            acc = 1.0 + w * acc
        return acc / v

    def conjugate(self) -> "Jet":
        return Jet(self.order, self.point, np.conj(self.coeffs))

    # -- calculus -------------------------------------------------------------

    def dx(self, v: int) -> "Jet":
        """Derivative jet with respect to real coordinate x_{v+1} (order drops by 1)."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        dst, src, fac = _DERIV_MAPS[v]
        out = np.zeros(N_COEFFS, dtype=np.complex128)
        out[dst] = self.coeffs[src] * fac
        order = self.order - 1
        out[~_DEGREE_MASKS[order]] = 0.0
        return Jet(order, self.point, out)

    def wirt_d(self, token: str) -> "Jet":
        """Wirtinger derivative jet for one of the tokens q, qb, z, zb."""
        if token == "q":
            return (self.dx(0) - 1j * self.dx(1)) * 0.5
        if token == "qb":
            return (self.dx(0) + 1j * self.dx(1)) * 0.5
        if token == "z":
            return (self.dx(2) - 1j * self.dx(3)) * 0.5
        if token == "zb":
            return (self.dx(2) + 1j * self.dx(3)) * 0.5
        raise JetError(f"unknown Wirtinger token {token!r}")

    def wirtinger(self, pattern: str) -> complex:
        """Complex Wirtinger derivative at the base point.

        ``pattern`` is a word over q, q-bar, z, z-bar; the conjugated letters
        are written either with a combining macron or with a 'b' suffix
        ("qqb" means d/dq d/dq-bar).
        """
        tokens = parse_pattern(pattern)
        if len(tokens) > self.order:
            raise JetError(f"pattern {pattern!r} longer than jet order {self.order}")
        cur = self
        for t in tokens:
            cur = cur.wirt_d(t)
        return cur.value

    def __repr__(self) -> str:  # pragma: no cover
        return f"Jet(order={self.order}, value={self.value:.6g}, point={self.point})"


def _check_order(order: int) -> None:
    if not 0 <= order <= ORDER_MAX:
        raise JetError(f"order must be between 0 and {ORDER_MAX}, got {order}")


_MACRON = "̄"


def parse_pattern(pattern: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch in " ,":
            i += 1
            continue
        if ch not in "qz":
            raise JetError(f"unexpected character {ch!r} in pattern {pattern!r}")
        if i + 1 < len(pattern) and pattern[i + 1] in ("b", _MACRON):
            tokens.append(ch + "b")
            i += 2
        else:
            tokens.append(ch)
            i += 1
    return tokens


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------

def seed_coordinates(p: Point4, order: int) -> tuple[Jet, Jet, Jet, Jet]:
    """Jets of the four real coordinates at p: value plus unit slope."""
    _check_order(order)
    reals = p.reals()
    out = []
    for v in range(NVARS):
        c = np.zeros(N_COEFFS, dtype=np.complex128)
        c[0] = reals[v]
        if order >= 1:
            e = tuple(1 if u == v else 0 for u in range(NVARS))
            c[_INDEX[e]] = 1.0
        out.append(Jet(order, p, c))
    return tuple(out)


def seed_complex(p: Point4, order: int) -> tuple[Jet, Jet, Jet, Jet]:
    """Jets of q, q-bar, z, z-bar at p."""
    x1, x2, x3, x4 = seed_coordinates(p, order)
    return (x1 + 1j * x2, x1 - 1j * x2, x3 + 1j * x4, x3 - 1j * x4)


# ---------------------------------------------------------------------------
# Elementary functions
# ---------------------------------------------------------------------------

def _nilpotent_part(a: Jet) -> Jet:
    d = Jet(a.order, a.point, a.coeffs.copy())
    d.coeffs[0] = 0.0
    return d


def _check_branch(v: complex, what: str) -> None:
    if abs(v) <= _ZERO_VALUE:
        raise BranchCutError(f"{what} of a jet with value {v} too close to 0")
    if abs(abs(cmath.phase(v)) - math.pi) <= _BRANCH_MARGIN:
        raise BranchCutError(f"{what} argument {v} too close to the branch cut")


def jet_exp(a: Jet) -> Jet:
    d = _nilpotent_part(a)
    acc = Jet.constant(1.0, a.point, a.order)
    for k in range(a.order, 0, -1):
        acc = 1.0 + acc * d * (1.0 / k)
    return acc * cmath.exp(a.value)


def jet_ln(a: Jet) -> Jet:
    _check_branch(a.value, "ln")
    u = _nilpotent_part(a) / a.value
    acc = Jet.constant(cmath.log(a.value), a.point, a.order)
    term = Jet.constant(1.0, a.point, a.order)
    for k in range(1, a.order + 1):
        term = term * u
        acc = acc + term * ((-1.0) ** (k + 1) / k)
    return acc


_SQRT_SERIES = (1.0, 0.5, -0.125, 0.0625, -0.0390625)  # binomial (1+u)^{1/2}


def jet_sqrt(a: Jet) -> Jet:
    _check_branch(a.value, "sqrt")
    u = _nilpotent_part(a) / a.value
    acc = Jet.constant(_SQRT_SERIES[a.order], a.point, a.order)
    for k in range(a.order - 1, -1, -1):
        acc = _SQRT_SERIES[k] + acc * u
    return acc * cmath.sqrt(a.value)


def jet_powi(a: Jet, n: int) -> Jet:
    if n == 0:
        return Jet.constant(1.0, a.point, a.order)
    if n < 0:
        return jet_powi(a, -n)._inverse()
    acc = None
    base = a
    while n:
        if n & 1:
            acc = base if acc is None else acc * base
        base = base * base
        n >>= 1
    return acc


def compose_series(coeffs: Iterable[complex], inner: Jet) -> Jet:
    """sum_k coeffs[k] * (inner - inner.value)^k, truncated at the jet order.

    ``coeffs`` are Taylor coefficients (already divided by k!) of the outer
    function at the inner jet's value.
    """
    cs = list(coeffs)
    d = _nilpotent_part(inner)
    top = min(len(cs) - 1, inner.order)
    acc = Jet.constant(cs[top], inner.point, inner.order)
    for k in range(top - 1, -1, -1):
        acc = cs[k] + acc * d
    return acc


# ---------------------------------------------------------------------------
# Assembling jets from Wirtinger data (used by the Legendre inversion)
# ---------------------------------------------------------------------------

def _real_op_to_wirtinger(alpha: tuple[int, int, int, int]) -> dict[tuple[int, int, int, int], complex]:
    """Expand d^alpha/dx^alpha into Wirtinger monomials (n_q, n_qb, n_z, n_zb)."""
    out: dict[tuple[int, int, int, int], complex] = {(0, 0, 0, 0): 1.0}
    # d/dx1 = d_q + d_qb ; d/dx2 = i d_q - i d_qb ; likewise for (x3, x4)
    pairs = [((1, 0, 0, 0), (0, 1, 0, 0), 1.0, 1.0),
             ((1, 0, 0, 0), (0, 1, 0, 0), 1j, -1j),
             ((0, 0, 1, 0), (0, 0, 0, 1), 1.0, 1.0),
             ((0, 0, 1, 0), (0, 0, 0, 1), 1j, -1j)]
    for v in range(NVARS):
        e1, e2, c1, c2 = pairs[v]
        for _ in range(alpha[v]):
            nxt: dict[tuple[int, int, int, int], complex] = {}
            for mono, w in out.items():
                for e, c in ((e1, c1), (e2, c2)):
                    key = tuple(mono[i] + e[i] for i in range(4))
                    nxt[key] = nxt.get(key, 0.0) + w * c
            out = nxt
    return out


def jet_from_wirtinger(point: Point4, order: int, derivs: Mapping[str, complex]) -> Jet:
    """Build a jet from Wirtinger derivative values.

    ``derivs`` maps canonical patterns ("", "q", "qb", "qqb", "zzb", ...) to
    the derivative value; a pattern's letter multiset is what matters, order
    inside the word does not.  Every multiset up to the requested order must
    be present.
    """
    _check_order(order)
    table: dict[tuple[int, int, int, int], complex] = {}
    for pat, val in derivs.items():
        tokens = parse_pattern(pat) if pat else []
        key = (tokens.count("q"), tokens.count("qb"), tokens.count("z"), tokens.count("zb"))
        table[key] = complex(val)
    coeffs = np.zeros(N_COEFFS, dtype=np.complex128)
    for i, alpha in enumerate(_MULTIS):
        if _DEG[i] > order:
            continue
        expansion = _real_op_to_wirtinger(alpha)
        total = 0.0 + 0.0j
        for mono, w in expansion.items():
            if mono not in table:
                raise JetError(f"missing Wirtinger derivative {mono} for multi-index {alpha}")
            total += w * table[mono]
        fac = 1.0
        for a in alpha:
            fac *= math.factorial(a)
        coeffs[i] = total / fac
    return Jet(order, point, coeffs)

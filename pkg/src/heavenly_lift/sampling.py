"""Quasi-random sampling of the evaluation box.

Halton sequences (bases 2, 3, 5, 7) give reproducible, well-spread sample
points; ``seed`` offsets the start index so independent runs draw distinct
but deterministic point sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from heavenly_lift.jets import Point4

_HALTON_BASES = (2, 3, 5, 7)


def _radical_inverse(n: int, base: int) -> float:
    inv = 0.0
    f = 1.0 / base
    while n > 0:
        n, digit = divmod(n, base)
        inv += digit * f
        f /= base
    return inv


def halton(n: int, dim: int = 4, start: int = 1) -> np.ndarray:
    """n points of the Halton sequence in [0, 1)^dim, indices start.."""
    out = np.empty((n, dim))
    for i in range(n):
        for d in range(dim):
            out[i, d] = _radical_inverse(start + i, _HALTON_BASES[d])
    return out


@dataclass(frozen=True)
class Box:
    """Axis-aligned sample box over the real chart (Re q, Im q, Re z, Im z)."""

    re_q: tuple = (0.6, 2.0)
    im_q: tuple = (-0.4, 0.4)
    re_z: tuple = (0.6, 2.0)
    im_z: tuple = (-0.4, 0.4)

    def __post_init__(self):
        for name in ("re_q", "im_q", "re_z", "im_z"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"box bound {name} = ({lo}, {hi}) is empty")
        if self.re_z[0] <= 0.0:
            raise ValueError("box must keep Re z positive (z + z-bar > 0)")

    def bounds(self) -> np.ndarray:
        return np.array([self.re_q, self.im_q, self.re_z, self.im_z])

    def points(self, n: int, seed: int = 0) -> list[Point4]:
        """n Halton points mapped into the box (deterministic given seed)."""
        u = halton(n, 4, start=1 + seed)
        b = self.bounds()
        x = b[:, 0] + u * (b[:, 1] - b[:, 0])
        return [Point4.from_reals(*row) for row in x]

    def grid(self, per_axis: int, max_rows: int = 10_000) -> list[Point4]:
        """Lattice of per_axis^4 points, strided down to at most max_rows."""
        axes = [np.linspace(lo, hi, per_axis) for lo, hi in self.bounds()]
        total = per_axis ** 4
        stride = max(1, -(-total // max_rows))
        pts = []
        idx = 0
        for x1 in axes[0]:
            for x2 in axes[1]:
                for x3 in axes[2]:
                    for x4 in axes[3]:
                        if idx % stride == 0:
                            pts.append(Point4.from_reals(x1, x2, x3, x4))
                        idx += 1
        return pts


STANDARD_BOX = Box()

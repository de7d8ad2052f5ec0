"""Constant-curvature (K <= 0) planar trigonometry.

Triangles are resolved from their side lengths with half-angle forms of the
law of cosines, which stay accurate near the degenerate boundary where the
plain arccos form loses all digits.  Every hyperbolic formula is evaluated at
curvature -1 after rescaling lengths by sqrt(-K); areas are rescaled back by
1/(-K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

IDENTITY_TOL = 1e-12
SOLVE_TOL = 1e-9


class DegenerateTriangleError(ValueError):
    """Side lengths violate the (strict) triangle inequality."""


def check_curvature(K: float) -> float:
    if not math.isfinite(K) or K > 0.0:
        raise ValueError(f"curvature must be finite and <= 0, got {K}")
    return float(K)


def _check_sides(a: float, b: float, c: float, tol: float) -> None:
    sides = (a, b, c)
    if not all(math.isfinite(x) and x > 0.0 for x in sides):
        raise DegenerateTriangleError(f"sides must be positive and finite, got {sides}")
    perim = a + b + c
    margin = min(b + c - a, c + a - b, a + b - c)
    if margin <= tol * perim:
        raise DegenerateTriangleError(
            f"triangle inequality violated within tolerance: sides={sides}, "
            f"margin={margin:.3e} <= {tol:.1e} * perimeter"
        )


def _euclidean_angle(a: float, b: float, c: float) -> float:
    # angle opposite side a, via tan(alpha/2) = sqrt((s-b)(s-c)/(s(s-a)))
    s = 0.5 * (a + b + c)
    num = (s - b) * (s - c)
    den = s * (s - a)
    return 2.0 * math.atan2(math.sqrt(max(0.0, num)), math.sqrt(max(0.0, den)))


def _hyperbolic_angle(a: float, b: float, c: float) -> float:
    # same half-angle form with sinh in place of lengths; curvature -1 inputs
    s = 0.5 * (a + b + c)
    num = math.sinh(s - b) * math.sinh(s - c)
    den = math.sinh(s) * math.sinh(s - a)
    return 2.0 * math.atan2(math.sqrt(max(0.0, num)), math.sqrt(max(0.0, den)))


def heron_area(a: float, b: float, c: float) -> float:
    """Numerically stable Heron formula (Kahan ordering)."""
    a, b, c = sorted((a, b, c), reverse=True)
    t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(max(0.0, t))


@dataclass(frozen=True)
class TriangleShape:
    """Triangle in the plane of constant curvature K <= 0.

    ``angles[i]`` is the angle opposite ``sides[i]``.  For K < 0 the area is
    the angle defect divided by -K; for K = 0 it is the Heron value.
    """

    curvature: float
    sides: tuple[float, float, float]
    angles: tuple[float, float, float]
    area: float

    @property
    def angle_sum(self) -> float:
        return self.angles[0] + self.angles[1] + self.angles[2]


def triangle_from_sides(
    K: float, a: float, b: float, c: float, tol: float = IDENTITY_TOL
) -> TriangleShape:
    """Resolve a triangle from its three side lengths at curvature K <= 0."""
    K = check_curvature(K)
    _check_sides(a, b, c, tol)
    if K == 0.0:
        angles = (
            _euclidean_angle(a, b, c),
            _euclidean_angle(b, c, a),
            _euclidean_angle(c, a, b),
        )
        area = heron_area(a, b, c)
    else:
        q = math.sqrt(-K)
        ra, rb, rc = q * a, q * b, q * c
        angles = (
            _hyperbolic_angle(ra, rb, rc),
            _hyperbolic_angle(rb, rc, ra),
            _hyperbolic_angle(rc, ra, rb),
        )
        defect = math.pi - (angles[0] + angles[1] + angles[2])
        area = defect / (-K)
    return TriangleShape(K, (float(a), float(b), float(c)), angles, area)


@dataclass(frozen=True)
class TriangleComparison:
    """Per-vertex angle ratios and the area ratio of two equilateral-side twins."""

    angle_ratios: tuple[float, float, float]
    area_ratio: float
    first: TriangleShape
    second: TriangleShape

    def max_angle_deviation(self) -> float:
        return max(abs(r - 1.0) for r in self.angle_ratios)


def compare_triangles(
    K1: float, K2: float, a: float, b: float, c: float
) -> TriangleComparison:
    """Resolve the same side lengths at two curvatures; return ratios t1/t2."""
    t1 = triangle_from_sides(K1, a, b, c)
    t2 = triangle_from_sides(K2, a, b, c)
    ratios = tuple(x / y for x, y in zip(t1.angles, t2.angles))
    return TriangleComparison(ratios, t1.area / t2.area, t1, t2)


def side_from_sas(K: float, x: float, y: float, angle: float) -> float:
    """Third side from two sides and the included angle (law of cosines)."""
    K = check_curvature(K)
    if x <= 0.0 or y <= 0.0:
        raise ValueError("sides must be positive")
    if K == 0.0:
        return math.sqrt(x * x + y * y - 2.0 * x * y * math.cos(angle))
    q = math.sqrt(-K)
    ch = math.cosh(q * x) * math.cosh(q * y) - math.sinh(q * x) * math.sinh(q * y) * math.cos(angle)
    return math.acosh(max(1.0, ch)) / q


@dataclass(frozen=True)
class HexagonShape:
    """Right-angled geodesic hexagon at curvature K < 0.

    ``prescribed`` are three pairwise non-adjacent sides, ``solved`` the
    remaining three; ``solved[i]`` is the side opposite ``prescribed[i]``.
    Cyclic order around the hexagon is (p0, s2, p1, s0, p2, s1).
    """

    curvature: float
    prescribed: tuple[float, float, float]
    solved: tuple[float, float, float]

    @property
    def cyclic_sides(self) -> tuple[float, float, float, float, float, float]:
        p, s = self.prescribed, self.solved
        return (p[0], s[2], p[1], s[0], p[2], s[1])


def _hexagon_opposite(px: float, pl: float, pr: float) -> float:
    # side opposite px, whose neighbors are pl and pr (curvature -1)
    ch = (math.cosh(px) + math.cosh(pl) * math.cosh(pr)) / (math.sinh(pl) * math.sinh(pr))
    return math.acosh(max(1.0, ch))


def hexagon_solve(prescribed: tuple[float, float, float], K: float) -> HexagonShape:
    """Solve the three free sides of a right-angled hexagon.

    Any triple of positive lengths is admissible; the solution is unique.
    """
    K = check_curvature(K)
    if K == 0.0:
        raise ValueError("right-angled hexagons require strictly negative curvature")
    p0, p1, p2 = prescribed
    if not all(math.isfinite(x) and x > 0.0 for x in (p0, p1, p2)):
        raise ValueError(f"prescribed lengths must be positive and finite, got {prescribed}")
    q = math.sqrt(-K)
    r0, r1, r2 = q * p0, q * p1, q * p2
    solved = (
        _hexagon_opposite(r0, r1, r2) / q,
        _hexagon_opposite(r1, r2, r0) / q,
        _hexagon_opposite(r2, r0, r1) / q,
    )
    return HexagonShape(K, (float(p0), float(p1), float(p2)), solved)

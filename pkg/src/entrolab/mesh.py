"""Triangulated constant-curvature surfaces with cone points.

Half-edge combinatorics in flat arrays: face f owns half-edges 3f, 3f+1,
3f+2 in counterclockwise order, half-edge 3f+i runs from local corner i to
corner i+1.  Geometry lives on edges (lengths) and faces (constant
curvature); vertices carry whatever total angle the incident face corners
sum to.  The genus-2 base instance is the regular hyperbolic octagon with
all vertex angles pi/4, fanned into 8 triangles from its center.

Geodesics on flat instances are traced by isometric unfolding: each crossed
triangle is laid out in one Euclidean chart so the geodesic stays a straight
line.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property

from .hypgeom import side_from_sas, triangle_from_sides

VERTEX_HIT_TOL = 1e-10


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class TriangulatedSurface:
    next_he: tuple[int, ...]
    twin_he: tuple[int, ...]
    vertex_of: tuple[int, ...]  # origin vertex of each half-edge
    edge_of: tuple[int, ...]
    edge_lengths: tuple[float, ...]
    face_curvatures: tuple[float, ...]

    # -- combinatorial basics ------------------------------------------------

    @property
    def n_faces(self) -> int:
        return len(self.face_curvatures)

    @property
    def n_edges(self) -> int:
        return len(self.edge_lengths)

    @cached_property
    def n_vertices(self) -> int:
        return max(self.vertex_of) + 1

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self) -> int:
        chi = self.euler_characteristic
        if chi % 2 != 0:
            raise MeshError(f"odd Euler characteristic {chi}")
        return (2 - chi) // 2

    def face_sides(self, f: int) -> tuple[float, float, float]:
        return (
            self.edge_lengths[self.edge_of[3 * f]],
            self.edge_lengths[self.edge_of[3 * f + 1]],
            self.edge_lengths[self.edge_of[3 * f + 2]],
        )

    # -- metric quantities ---------------------------------------------------

    @cached_property
    def face_shapes(self):
        return tuple(
            triangle_from_sides(self.face_curvatures[f], *self.face_sides(f))
            for f in range(self.n_faces)
        )

    def corner_angle(self, h: int) -> float:
        """Interior angle at the origin corner of half-edge h."""
        f, i = divmod(h, 3)
        # corner i sits between sides i and i+2; the opposite side is i+1
        return self.face_shapes[f].angles[(i + 1) % 3]

    @cached_property
    def cone_angles(self) -> tuple[float, ...]:
        total = [0.0] * self.n_vertices
        for h in range(3 * self.n_faces):
            total[self.vertex_of[h]] += self.corner_angle(h)
        return tuple(total)

    def validate(self) -> None:
        n_he = 3 * self.n_faces
        for h in range(n_he):
            if self.twin_he[self.twin_he[h]] != h or self.twin_he[h] == h:
                raise MeshError(f"twin is not a fixed-point-free involution at {h}")
            if self.edge_of[self.twin_he[h]] != self.edge_of[h]:
                raise MeshError(f"twin of {h} lies on a different edge")
            f, i = divmod(h, 3)
            if self.next_he[h] != 3 * f + (i + 1) % 3:
                raise MeshError(f"next is not the face cycle at {h}")
            # origin of next equals destination of h under the twin convention
            if self.vertex_of[self.next_he[h]] != self.vertex_of[self.twin_he[h]]:
                raise MeshError(f"vertex labels inconsistent across half-edge {h}")
        for f in range(self.n_faces):
            a, b, c = self.face_sides(f)
            if not (a < b + c and b < c + a and c < a + b):
                raise MeshError(f"face {f} sides {a, b, c} violate the triangle inequality")

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "next": list(self.next_he),
            "twin": list(self.twin_he),
            "vertex": list(self.vertex_of),
            "edge": list(self.edge_of),
            "edge_lengths": list(self.edge_lengths),
            "face_curvatures": list(self.face_curvatures),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TriangulatedSurface":
        surf = cls(
            tuple(data["next"]),
            tuple(data["twin"]),
            tuple(data["vertex"]),
            tuple(data["edge"]),
            tuple(float(x) for x in data["edge_lengths"]),
            tuple(float(x) for x in data["face_curvatures"]),
        )
        surf.validate()
        return surf


def write_surface_json(surface: TriangulatedSurface, path) -> None:
    with open(path, "w") as fh:
        json.dump(surface.to_json_dict(), fh, sort_keys=True, indent=1)


def read_surface_json(path) -> TriangulatedSurface:
    with open(path) as fh:
        return TriangulatedSurface.from_json_dict(json.load(fh))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def regular_octagon_dimensions(K: float) -> tuple[float, float]:
    """(circumradius, side) of the regular octagon with corner angles pi/4.

    From the right triangle cut by the apothem: cosh R = cot^2(pi/8) and
    sinh(side/2) = sinh R sin(pi/8), both at curvature -1, rescaled by
    1/sqrt(-K).
    """
    if K >= 0.0:
        raise MeshError("regular octagon with pi/4 corners needs K < 0")
    q = math.sqrt(-K)
    R = math.acosh(1.0 / math.tan(math.pi / 8.0) ** 2)
    side = 2.0 * math.asinh(math.sinh(R) * math.sin(math.pi / 8.0))
    return R / q, side / q


# gluing pattern of the octagon sides: a b a' b' c d c' d'
_OCTAGON_PAIRING = {0: 2, 2: 0, 1: 3, 3: 1, 4: 6, 6: 4, 5: 7, 7: 5}
_OCTAGON_PAIR_ID = {(0, 2): 0, (1, 3): 1, (4, 6): 2, (5, 7): 3}


def _vertex_ids_from_orbits(next_he, twin_he) -> list[int]:
    """Assign vertex ids as orbits of h -> next(twin(h)) (outgoing stars)."""
    n = len(next_he)
    ids = [-1] * n
    count = 0
    for h0 in range(n):
        if ids[h0] >= 0:
            continue
        h = h0
        while ids[h] < 0:
            ids[h] = count
            h = next_he[twin_he[h]]
        count += 1
    return ids


def build_octagon_surface(K: float, refinement: int = 0) -> TriangulatedSurface:
    """Genus-2 surface: regular octagon at curvature K, fanned from its
    center, with sides glued in the a b a' b' c d c' d' pattern; refined by
    midpoint subdivision ``refinement`` times.

    Every vertex of the base surface is smooth (total angle 2 pi).
    """
    R, side = regular_octagon_dimensions(K)
    n_he = 24
    nxt = [0] * n_he
    twin = [0] * n_he
    edge = [0] * n_he
    for f in range(8):
        for i in range(3):
            nxt[3 * f + i] = 3 * f + (i + 1) % 3
        twin[3 * f + 0] = 3 * ((f - 1) % 8) + 2
        twin[3 * f + 2] = 3 * ((f + 1) % 8) + 0
        twin[3 * f + 1] = 3 * _OCTAGON_PAIRING[f] + 1
        edge[3 * f + 0] = f
        edge[3 * f + 2] = (f + 1) % 8
        key = tuple(sorted((f, _OCTAGON_PAIRING[f])))
        edge[3 * f + 1] = 8 + _OCTAGON_PAIR_ID[key]
    vertex = _vertex_ids_from_orbits(nxt, twin)
    lengths = tuple([R] * 8 + [side] * 4)
    surf = TriangulatedSurface(
        tuple(nxt), tuple(twin), tuple(vertex), tuple(edge), lengths, (float(K),) * 8
    )
    surf.validate()
    for _ in range(refinement):
        surf = subdivide(surf)
    return surf


def subdivide(surface: TriangulatedSurface) -> TriangulatedSurface:
    """Split every face in four at geodesic edge midpoints.

    Midpoints are taken at each face's own curvature; boundary halves keep
    exactly half the parent length and the three midlines come from the
    side-angle-side resolution at the face curvature.
    """
    S = surface
    F, E, V = S.n_faces, S.n_edges, S.n_vertices
    canon = [0] * E
    for h in range(3 * F):
        e = S.edge_of[h]
        canon[e] = min(h, S.twin_he[h])

    def child_edge_first(h: int) -> int:
        # edge id of the (origin(h), midpoint) half
        e = S.edge_of[h]
        return 2 * e if h == canon[e] else 2 * e + 1

    def child_edge_second(h: int) -> int:
        e = S.edge_of[h]
        return 2 * e + 1 if h == canon[e] else 2 * e

    n_faces = 4 * F
    n_he = 3 * n_faces
    nxt = [0] * n_he
    twin = [0] * n_he
    vert = [0] * n_he
    edge = [0] * n_he
    lengths = [0.0] * (2 * E + 3 * F)
    for e in range(E):
        lengths[2 * e] = 0.5 * S.edge_lengths[e]
        lengths[2 * e + 1] = 0.5 * S.edge_lengths[e]

    def corner_he(f: int, c: int, k: int) -> int:
        return 12 * f + 3 * c + k

    def central_he(f: int, j: int) -> int:
        return 12 * f + 9 + j

    for f in range(F):
        K_f = S.face_curvatures[f]
        sides = S.face_sides(f)
        shape = S.face_shapes[f]
        # midline m_j -> m_{j+1} cuts the corner v_{j+1}; its SAS data is the
        # two half-sides at that corner and the corner angle (opposite j+2)
        for j in range(3):
            ang = shape.angles[(j + 2) % 3]
            lengths[2 * E + 3 * f + j] = side_from_sas(
                K_f, 0.5 * sides[j], 0.5 * sides[(j + 1) % 3], ang
            )
        for c in range(3):
            h_par = 3 * f + c            # parent side c (origin v_c)
            h_prev = 3 * f + (c + 2) % 3  # parent side c-1 (ends at v_c)
            t_par = S.twin_he[h_par]
            t_prev = S.twin_he[h_prev]
            g, j = divmod(t_par, 3)
            g2, j2 = divmod(t_prev, 3)
            # he0: v_c -> m_c
            h0 = corner_he(f, c, 0)
            vert[h0] = S.vertex_of[h_par]
            edge[h0] = child_edge_first(h_par)
            twin[h0] = corner_he(g, (j + 1) % 3, 2)
            # he1: m_c -> m_{c-1} (midline shared with the central face)
            h1 = corner_he(f, c, 1)
            vert[h1] = V + S.edge_of[h_par]
            edge[h1] = 2 * E + 3 * f + (c + 2) % 3
            twin[h1] = central_he(f, (c + 2) % 3)
            # he2: m_{c-1} -> v_c
            h2 = corner_he(f, c, 2)
            vert[h2] = V + S.edge_of[h_prev]
            edge[h2] = child_edge_second(h_prev)
            twin[h2] = corner_he(g2, j2, 0)
            for k in range(3):
                nxt[corner_he(f, c, k)] = corner_he(f, c, (k + 1) % 3)
        for j in range(3):
            hj = central_he(f, j)
            vert[hj] = V + S.edge_of[3 * f + j]
            edge[hj] = 2 * E + 3 * f + j
            twin[hj] = corner_he(f, (j + 1) % 3, 1)
            nxt[hj] = central_he(f, (j + 1) % 3)

    out = TriangulatedSurface(
        tuple(nxt), tuple(twin), tuple(vert), tuple(edge),
        tuple(lengths), (tuple(S.face_curvatures[f] for f in range(F) for _ in range(4))),
    )
    out.validate()
    return out


# ---------------------------------------------------------------------------
# curvature interpolation, Gauss-Bonnet, area
# ---------------------------------------------------------------------------


def interpolate_curvature(surface: TriangulatedSurface, t: float) -> TriangulatedSurface:
    """Replace every face curvature K by (1-t)K, keeping all edge lengths.

    At t=1 the faces are flat and the vertices become cone points of total
    angle > 2 pi (negative curvature type).
    """
    Ks = set(surface.face_curvatures)
    if len(Ks) != 1:
        raise MeshError("curvature interpolation expects a uniform starting curvature")
    K = Ks.pop()
    return TriangulatedSurface(
        surface.next_he, surface.twin_he, surface.vertex_of, surface.edge_of,
        surface.edge_lengths, ((1.0 - t) * K,) * surface.n_faces,
    )


def total_area(surface: TriangulatedSurface) -> float:
    return sum(shape.area for shape in surface.face_shapes)


def rescale(surface: TriangulatedSurface, c: float) -> TriangulatedSurface:
    """Metric rescale g -> c g: lengths scale by sqrt(c), curvatures by 1/c.

    Angles are unchanged and the total area scales by exactly c.
    """
    if c <= 0.0:
        raise MeshError("rescale factor must be positive")
    rt = math.sqrt(c)
    return TriangulatedSurface(
        surface.next_he, surface.twin_he, surface.vertex_of, surface.edge_of,
        tuple(length * rt for length in surface.edge_lengths),
        tuple(K / c for K in surface.face_curvatures),
    )


def gauss_bonnet_residual(surface: TriangulatedSurface) -> float:
    """sum_f K_f area_f - sum_v (theta_v - 2 pi) - 2 pi chi; ~0 for any
    surface assembled from constant-curvature triangles."""
    curv = sum(
        surface.face_curvatures[f] * surface.face_shapes[f].area
        for f in range(surface.n_faces)
    )
    cones = sum(theta - 2.0 * math.pi for theta in surface.cone_angles)
    return curv - cones - 2.0 * math.pi * surface.euler_characteristic


# ---------------------------------------------------------------------------
# flat geodesic tracing by unfolding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceSegment:
    face: int
    entry: tuple[float, float]
    exit: tuple[float, float]

    @property
    def length(self) -> float:
        return math.hypot(self.exit[0] - self.entry[0], self.exit[1] - self.entry[1])


@dataclass
class GeodesicTrace:
    segments: list[TraceSegment]
    total_length: float
    end_face: int
    end_point: tuple[float, float]
    end_direction: float  # angle in the end face's local chart
    vertex_hit: bool
    crossings: int


def face_layout(surface: TriangulatedSurface, f: int):
    """Euclidean chart of face f: v0 at the origin, v1 on the positive x-axis,
    v2 in the upper half plane."""
    l0, l1, l2 = surface.face_sides(f)
    x2 = (l0 * l0 + l2 * l2 - l1 * l1) / (2.0 * l0)
    y2 = math.sqrt(max(0.0, l2 * l2 - x2 * x2))
    return ((0.0, 0.0), (l0, 0.0), (x2, y2))


class _FlatChartCache:
    def __init__(self, surface: TriangulatedSurface):
        self.surface = surface
        self.layouts: dict[int, tuple] = {}

    def layout(self, f: int):
        lay = self.layouts.get(f)
        if lay is None:
            lay = face_layout(self.surface, f)
            self.layouts[f] = lay
        return lay


def point_in_face(surface: TriangulatedSurface, f: int, p: tuple[float, float]) -> bool:
    (x0, y0), (x1, y1), (x2, y2) = face_layout(surface, f)
    px, py = p
    for (ax, ay), (bx, by) in (((x0, y0), (x1, y1)), ((x1, y1), (x2, y2)), ((x2, y2), (x0, y0))):
        if (bx - ax) * (py - ay) - (by - ay) * (px - ax) <= 0.0:
            return False
    return True


def trace_geodesic(
    surface: TriangulatedSurface,
    face: int,
    point: tuple[float, float],
    direction: float,
    length: float,
    vertex_tol: float = VERTEX_HIT_TOL,
) -> GeodesicTrace:
    """Straight-line continuation across edges of a flat cone surface.

    The current face is always placed in a fixed plane chart; crossing an
    edge places the neighbor across it, so the traced line never bends.
    Terminates early with ``vertex_hit`` set when the line meets a vertex
    within ``vertex_tol``.
    """
    if any(abs(K) > 1e-14 for K in surface.face_curvatures):
        raise MeshError("geodesic tracing requires a flat surface (all face curvatures 0)")
    if not point_in_face(surface, face, point):
        raise MeshError(f"start point {point} is not strictly inside face {face}")

    charts = _FlatChartCache(surface)
    # placement of the current face: local -> world is rot(ang) + shift
    cos_a, sin_a = 1.0, 0.0
    ox, oy = 0.0, 0.0

    def to_world(p):
        return (ox + cos_a * p[0] - sin_a * p[1], oy + sin_a * p[0] + cos_a * p[1])

    def to_local(p):
        dx, dy = p[0] - ox, p[1] - oy
        return (cos_a * dx + sin_a * dy, -sin_a * dx + cos_a * dy)

    f = face
    lay = charts.layout(f)
    W = [to_world(lay[0]), to_world(lay[1]), to_world(lay[2])]
    px, py = to_world(point)
    dx, dy = math.cos(direction), math.sin(direction)
    remaining = length
    entry_side = -1
    segments: list[TraceSegment] = []
    total = 0.0
    vertex_hit = False
    crossings = 0

    while True:
        # exit through one of the two (or three) non-entry sides
        best_t = math.inf
        best_i = -1
        for i in range(3):
            if i == entry_side:
                continue
            ax, ay = W[i]
            bx, by = W[(i + 1) % 3]
            ex, ey = bx - ax, by - ay
            denom = dx * ey - dy * ex
            if abs(denom) < 1e-300:
                continue
            wx, wy = ax - px, ay - py
            t = (wx * ey - wy * ex) / denom
            s = (wx * dy - wy * dx) / denom
            if t > 1e-12 and -1e-9 <= s <= 1.0 + 1e-9 and t < best_t:
                best_t = t
                best_i = i
        entry_local = to_local((px, py))
        if best_i < 0:
            raise MeshError("trace lost: no exit side found (degenerate geometry)")
        if best_t >= remaining:
            qx, qy = px + remaining * dx, py + remaining * dy
            segments.append(TraceSegment(f, entry_local, to_local((qx, qy))))
            total += remaining
            end_local = to_local((qx, qy))
            ca, sa = cos_a, sin_a
            end_dir = math.atan2(-sa * dx + ca * dy, ca * dx + sa * dy)
            return GeodesicTrace(segments, total, f, end_local, end_dir, vertex_hit, crossings)
        qx, qy = px + best_t * dx, py + best_t * dy
        segments.append(TraceSegment(f, entry_local, to_local((qx, qy))))
        total += best_t
        remaining -= best_t
        ax, ay = W[best_i]
        bx, by = W[(best_i + 1) % 3]
        if math.hypot(qx - ax, qy - ay) < vertex_tol or math.hypot(qx - bx, qy - by) < vertex_tol:
            vertex_hit = True
            end_local = to_local((qx, qy))
            ca, sa = cos_a, sin_a
            end_dir = math.atan2(-sa * dx + ca * dy, ca * dx + sa * dy)
            return GeodesicTrace(segments, total, f, end_local, end_dir, vertex_hit, crossings)

        # place the neighbor across side best_i: its side j runs b -> a
        h = 3 * f + best_i
        ht = surface.twin_he[h]
        g, j = divmod(ht, 3)
        glay = charts.layout(g)
        gj = glay[j]
        gj1 = glay[(j + 1) % 3]
        # rotation taking (gj1 - gj) to (a - b), translation taking gj to b
        vx, vy = gj1[0] - gj[0], gj1[1] - gj[1]
        tx, ty = ax - bx, ay - by
        nv = math.hypot(vx, vy)
        nt = math.hypot(tx, ty)
        ca = (vx * tx + vy * ty) / (nv * nt)
        sa = (vx * ty - vy * tx) / (nv * nt)
        cos_a, sin_a = ca, sa
        ox = bx - (cos_a * gj[0] - sin_a * gj[1])
        oy = by - (sin_a * gj[0] + cos_a * gj[1])
        f = g
        entry_side = j
        lay = glay
        W = [to_world(lay[0]), to_world(lay[1]), to_world(lay[2])]
        px, py = qx, qy
        crossings += 1


def random_flat_start(surface: TriangulatedSurface, rng):
    """Uniform random start: face by area, point uniform in the face,
    direction uniform on the circle."""
    areas = [shape.area for shape in surface.face_shapes]
    total = sum(areas)
    x = rng.random() * total
    f = 0
    acc = 0.0
    for i, area in enumerate(areas):
        acc += area
        if x <= acc:
            f = i
            break
    (x0, y0), (x1, y1), (x2, y2) = face_layout(surface, f)
    r1, r2 = rng.random(), rng.random()
    sq = math.sqrt(r1)
    b0 = 1.0 - sq
    b1 = sq * (1.0 - r2)
    b2 = sq * r2
    p = (b0 * x0 + b1 * x1 + b2 * x2, b0 * y0 + b1 * y1 + b2 * y2)
    theta = rng.random() * 2.0 * math.pi
    return f, p, theta


def near_vertex_length(surface: TriangulatedSurface, trace: GeodesicTrace, r: float) -> float:
    """Total trace length at distance < r from some vertex.

    Valid for r below half the shortest edge, so the r-discs around cone
    points are disjoint and covered by the incident face corners.
    """
    total = 0.0
    for seg in trace.segments:
        lay = face_layout(surface, seg.face)
        for cx, cy in lay:
            total += _chord_in_disc(seg.entry, seg.exit, (cx, cy), r)
    return total


def _chord_in_disc(p, q, center, r) -> float:
    px, py = p[0] - center[0], p[1] - center[1]
    dx, dy = q[0] - p[0], q[1] - p[1]
    L = math.hypot(dx, dy)
    if L == 0.0:
        return 0.0
    ux, uy = dx / L, dy / L
    b = px * ux + py * uy
    c = px * px + py * py - r * r
    disc = b * b - c
    if disc <= 0.0:
        return 0.0
    sq = math.sqrt(disc)
    t0 = max(0.0, -b - sq)
    t1 = min(L, -b + sq)
    return max(0.0, t1 - t0)


def write_trace_csv(trace: GeodesicTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["face", "x_in", "y_in", "x_out", "y_out", "length"])
        for seg in trace.segments:
            writer.writerow([seg.face] + [
                format(x, ".17g")
                for x in (seg.entry[0], seg.entry[1], seg.exit[0], seg.exit[1], seg.length)
            ])

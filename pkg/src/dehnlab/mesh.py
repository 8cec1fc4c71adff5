"""Adaptive dyadic triangulation of the square D²(t) = [0, t]².

A 1-Lipschitz sizing field h ≥ 1 selects the maximal dyadic squares with
σ(S) <= h on S.  Their edges are subdivided at the corners of neighbouring
squares and each resulting polygon is cut into n − 2 triangles.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

SQRT2 = math.sqrt(2.0)
INCIDENCE_BOUND = 128
SIDE_BOUND = 32


class FieldViolation(ValueError):
    pass


class SizingField:
    """h: D²(t) -> [1, ∞), 1-Lipschitz.

    `fn(x, y)` gives values; `min_on(x0, y0, s)` may return an exact (or
    conservative) minimum over the square [x0, x0+s] x [y0, y0+s].  Without
    it the minimum is bounded from the corners through the Lipschitz bound.
    """

    def __init__(self, fn, min_on=None, name: str = "field"):
        self.fn = fn
        self._min_on = min_on
        self.name = name
        self._cache: dict = {}

    def __call__(self, x: float, y: float) -> float:
        key = (x, y)
        v = self._cache.get(key)
        if v is None:
            v = max(1.0, float(self.fn(x, y)))
            self._cache[key] = v
        return v

    def lower_bound_on(self, x0: int, y0: int, s: int) -> float:
        if self._min_on is not None:
            return max(1.0, float(self._min_on(x0, y0, s)))
        corners = min(self(x0, y0), self(x0 + s, y0), self(x0, y0 + s), self(x0 + s, y0 + s))
        # every point of the square lies within s·√2/2 of some corner
        return max(1.0, corners - s * SQRT2 / 2)

    def check(self, t: int, samples: int = 2000, seed: int = 0) -> None:
        """Rejection test of the lower bound and the Lipschitz constant."""
        rng = random.Random(seed)
        pts = [(rng.uniform(0, t), rng.uniform(0, t)) for _ in range(samples)]
        pts += [(rng.randint(0, t), rng.randint(0, t)) for _ in range(samples)]
        for k in range(len(pts) - 1):
            (x1, y1), (x2, y2) = pts[k], pts[k + 1]
            h1, h2 = float(self.fn(x1, y1)), float(self.fn(x2, y2))
            if max(1.0, h1) < 1:
                raise FieldViolation("field below 1")
            if abs(max(1.0, h1) - max(1.0, h2)) > math.hypot(x1 - x2, y1 - y2) * (1 + 1e-9) + 1e-9:
                raise FieldViolation(f"Lipschitz test failed between {pts[k]} and {pts[k + 1]}")


def constant_field(c: float) -> SizingField:
    return SizingField(lambda x, y: c, lambda x0, y0, s: c, name=f"constant({c})")


def cone_field(t: int) -> SizingField:
    """h(v) = max(1, ‖v − centre‖_∞ / 2)."""
    c = t / 2

    def fn(x, y):
        return max(abs(x - c), abs(y - c)) / 2

    def mn(x0, y0, s):
        dx = max(x0 - c, 0, c - (x0 + s))
        dy = max(y0 - c, 0, c - (y0 + s))
        return max(dx, dy) / 2

    return SizingField(fn, mn, name="cone")


def random_field(t: int, rng: random.Random, k: int = 4) -> SizingField:
    """min over k cones c_i + L_i ‖v − p_i‖ with L_i <= 1: admissible by construction."""
    cones = [(rng.uniform(0, t), rng.uniform(0, t), rng.uniform(0, t / 4), rng.uniform(0.1, 1.0))
             for _ in range(k)]

    def fn(x, y):
        return min(c + l * math.hypot(x - px, y - py) for px, py, c, l in cones)

    def mn(x0, y0, s):
        out = math.inf
        for px, py, c, l in cones:
            dx = max(x0 - px, 0, px - (x0 + s))
            dy = max(y0 - py, 0, py - (y0 + s))
            out = min(out, c + l * math.hypot(dx, dy))
        return out

    return SizingField(fn, mn, name="random")


@dataclass(frozen=True, order=True)
class DyadicSquare:
    i: int
    j: int
    s: int

    @property
    def side(self) -> int:
        return 1 << self.s

    @property
    def origin(self) -> tuple:
        return (self.i << self.s, self.j << self.s)

    def parent(self) -> "DyadicSquare":
        return DyadicSquare(self.i // 2, self.j // 2, self.s + 1)

    def children(self):
        for di in (0, 1):
            for dj in (0, 1):
                yield DyadicSquare(2 * self.i + di, 2 * self.j + dj, self.s - 1)


def _log2_exact(t: int) -> int:
    if t < 1 or t & (t - 1):
        raise ValueError("t must be a power of two")
    return t.bit_length() - 1


def square_admissible(S: DyadicSquare, h: SizingField) -> bool:
    """Certified form of "h(x) >= σ(S) for all x in S"; unit squares always pass."""
    if S.s == 0:
        return True
    x0, y0 = S.origin
    return h.lower_bound_on(x0, y0, S.side) >= S.side


def whitney_cover(t: int, h: SizingField) -> list[DyadicSquare]:
    """Maximal admissible dyadic squares, found top-down from D²(t)."""
    k = _log2_exact(t)
    out = []
    stack = [DyadicSquare(0, 0, k)]
    while stack:
        S = stack.pop()
        if square_admissible(S, h):
            out.append(S)
        else:
            stack.extend(S.children())
    out.sort(key=lambda S: (S.origin[1], S.origin[0], S.s))
    return out


@dataclass
class Mesh:
    t: int
    vertices: list                      # lattice points (x, y)
    triangles: list                     # index triples, counter-clockwise
    squares: list = field(default_factory=list)
    polygon_sides: list = field(default_factory=list)

    def edges(self) -> dict:
        """Undirected edge -> number of incident triangles."""
        out: dict = {}
        for tri in self.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                e = (min(a, b), max(a, b))
                out[e] = out.get(e, 0) + 1
        return out

    def incidence(self) -> list:
        deg = [0] * len(self.vertices)
        for tri in self.triangles:
            for v in tri:
                deg[v] += 1
        return deg

    def to_dict(self) -> dict:
        edges = self.edges()
        return {
            "t": self.t,
            "vertices": [list(v) for v in self.vertices],
            "triangles": [list(tr) for tr in self.triangles],
            "edges": [[a, b, _dist(self.vertices[a], self.vertices[b])] for a, b in sorted(edges)],
        }


def _dist(u, v) -> float:
    return math.hypot(u[0] - v[0], u[1] - v[1])


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _ear_clip(poly: list) -> list:
    """n − 2 nondegenerate triangles of a weakly convex polygon (ccw).

    Ears are cut at the lexicographically least strictly convex vertex, so
    collinear hanging vertices never produce flat triangles.
    """
    poly = list(poly)
    tris = []
    while len(poly) > 3:
        n = len(poly)
        best = None
        for k in range(n):
            a, b, c = poly[k - 1], poly[k], poly[(k + 1) % n]
            if _cross(a, b, c) > 0 and (best is None or b < poly[best]):
                best = k
        k = best
        tris.append((poly[k - 1], poly[k], poly[(k + 1) % n]))
        del poly[k]
    tris.append(tuple(poly))
    return tris


def triangulate_cover(cover: list, t: int | None = None) -> Mesh:
    if t is None:
        t = max(S.origin[0] + S.side for S in cover)
    corners = set()
    for S in cover:
        x0, y0 = S.origin
        s = S.side
        corners.update(((x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)))
    index: dict = {}
    vertices: list = []

    def vid(v):
        k = index.get(v)
        if k is None:
            k = index[v] = len(vertices)
            vertices.append(v)
        return k

    triangles = []
    sides = []
    for S in cover:
        x0, y0 = S.origin
        s = S.side
        poly = []
        # counter-clockwise boundary with hanging vertices
        for k in range(s):
            if k == 0 or (x0 + k, y0) in corners:
                poly.append((x0 + k, y0))
        for k in range(s):
            if k == 0 or (x0 + s, y0 + k) in corners:
                poly.append((x0 + s, y0 + k))
        for k in range(s):
            if k == 0 or (x0 + s - k, y0 + s) in corners:
                poly.append((x0 + s - k, y0 + s))
        for k in range(s):
            if k == 0 or (x0, y0 + s - k) in corners:
                poly.append((x0, y0 + s - k))
        sides.append(len(poly))
        for tri in _ear_clip(poly):
            triangles.append(tuple(vid(v) for v in tri))
    # deterministic vertex order: lexicographic
    order = sorted(range(len(vertices)), key=lambda k: vertices[k])
    remap = {old: new for new, old in enumerate(order)}
    verts = [vertices[k] for k in order]
    tris = [tuple(remap[v] for v in tr) for tr in triangles]
    return Mesh(t, verts, tris, list(cover), sides)


def adaptive_mesh(t: int, h: SizingField) -> Mesh:
    return triangulate_cover(whitney_cover(t, h), t)


@dataclass
class AuditReport:
    lattice: bool
    edge_sandwich: bool
    incidence: bool
    perimeter: bool
    triangle_count: bool
    cover_area: bool
    euler: bool
    max_incidence: int
    max_sides: int
    perimeter_sum: float
    n_triangles: int
    witnesses: dict

    @property
    def ok(self) -> bool:
        return all((self.lattice, self.edge_sandwich, self.incidence, self.perimeter,
                    self.triangle_count, self.cover_area, self.euler))

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def audit_mesh(mesh: Mesh, h: SizingField, t: int | None = None) -> AuditReport:
    """Check the mesh against the edge sandwich, incidence, perimeter and
    count bounds; failures carry a witness."""
    t = mesh.t if t is None else t
    wit: dict = {}
    lattice = all(isinstance(x, int) and isinstance(y, int) and 0 <= x <= t and 0 <= y <= t
                  for x, y in mesh.vertices)
    edges = mesh.edges()
    sandwich = True
    for a, b in edges:
        u, v = mesh.vertices[a], mesh.vertices[b]
        d = _dist(u, v)
        for x in (u, v):
            hx = h(*x)
            if not (min(hx / 4, t) / 2 <= d <= SQRT2 * hx):
                sandwich = False
                wit.setdefault("edge_sandwich", (u, v, d, hx))
    deg = mesh.incidence()
    max_inc = max(deg) if deg else 0
    psum = 0.0
    for tri in mesh.triangles:
        p = [mesh.vertices[k] for k in tri]
        per = _dist(p[0], p[1]) + _dist(p[1], p[2]) + _dist(p[2], p[0])
        psum += per * per
    n_tri = len(mesh.triangles)
    area = sum(S.side ** 2 for S in mesh.squares) == t * t if mesh.squares else True
    interior = sum(1 for c in edges.values() if c == 2)
    boundary = sum(1 for c in edges.values() if c == 1)
    euler = (len(mesh.vertices) - len(edges) + n_tri == 1
             and all(c in (1, 2) for c in edges.values()) and boundary >= 3)
    if not euler:
        wit["euler"] = (len(mesh.vertices), len(edges), n_tri, interior, boundary)
    if max_inc > INCIDENCE_BOUND:
        wit["incidence"] = mesh.vertices[deg.index(max_inc)]
    return AuditReport(
        lattice=lattice,
        edge_sandwich=sandwich,
        incidence=max_inc <= INCIDENCE_BOUND,
        perimeter=psum <= 1152 * t * t,
        triangle_count=n_tri <= 32 * t * t,
        cover_area=area,
        euler=euler,
        max_incidence=max_inc,
        max_sides=max(mesh.polygon_sides) if mesh.polygon_sides else 0,
        perimeter_sum=psum,
        n_triangles=n_tri,
        witnesses=wit,
    )


def mesh_svg(mesh: Mesh, size: int = 512) -> str:
    """SVG drawing with squares shaded by level."""
    sc = size / mesh.t
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    top = max((S.s for S in mesh.squares), default=0) or 1
    for S in mesh.squares:
        x0, y0 = S.origin
        shade = int(235 - 150 * S.s / top)
        out.append(f'<rect x="{x0 * sc:.2f}" y="{size - (y0 + S.side) * sc:.2f}" '
                   f'width="{S.side * sc:.2f}" height="{S.side * sc:.2f}" '
                   f'fill="rgb({shade},{shade},255)" stroke="none"/>')
    for tri in mesh.triangles:
        pts = " ".join(f"{mesh.vertices[k][0] * sc:.2f},{size - mesh.vertices[k][1] * sc:.2f}" for k in tri)
        out.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="0.3"/>')
    out.append("</svg>")
    return "\n".join(out)

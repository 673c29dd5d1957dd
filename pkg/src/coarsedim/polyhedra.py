"""Uniform polyhedra: nerves, canonical projections, subdivisions and
mapping cylinders.

Complexes are realized with one orthonormal basis vector per vertex, so a
point is a sparse vertex-to-weight map with weights summing to 1, and the
polyhedron metric is plain Euclidean distance on those coordinate vectors.
Mapping cylinders are triangulated on the disjoint union of source and
target vertices; the quotient map q from (source point, t) onto the
cylinder is computed explicitly from the ordered prism decomposition, and
its Lipschitz constant is measured, not assumed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .covers import Cover, lebesgue_number, mesh, multiplicity
from .errors import InputError, InvariantViolation
from .metric_core import TOL, MetricMap, measured_lipschitz

COORD_EPS = 1e-12


def _closure(cells: Iterable[tuple]) -> frozenset[tuple]:
    out = set()
    for cell in cells:
        for size in range(1, len(cell) + 1):
            out.update(itertools.combinations(cell, size))
    return frozenset(out)


@dataclass(frozen=True)
class SimplicialComplex:
    """Abstract simplicial complex over ordered, hashable vertex ids.

    ``vertices`` fixes the canonical vertex order (used by cylinder
    triangulations); ``simplices`` is face-closed and stores sorted id
    tuples in that order.
    """

    vertices: tuple[Hashable, ...]
    simplices: frozenset[tuple]

    def __post_init__(self):
        pos = {v: i for i, v in enumerate(self.vertices)}
        if len(pos) != len(self.vertices):
            raise InputError("duplicate vertex ids")
        for s in self.simplices:
            if not s:
                raise InputError("empty simplex")
            order = [pos[v] for v in s]
            if order != sorted(order) or len(set(order)) != len(order):
                raise InputError(f"simplex {s} not sorted in vertex order")
        if self.simplices != _closure(self.simplices):
            raise InputError("simplex set is not face-closed")

    @staticmethod
    def from_maximal(vertices: Sequence, maximal: Iterable[Iterable]) -> "SimplicialComplex":
        vertices = tuple(vertices)
        pos = {v: i for i, v in enumerate(vertices)}
        cells = [tuple(sorted(set(c), key=pos.__getitem__)) for c in maximal]
        cells += [(v,) for v in vertices]
        return SimplicialComplex(vertices, _closure(cells))

    def position(self, v) -> int:
        return self.vertices.index(v)

    def sort_ids(self, ids: Iterable) -> tuple:
        pos = {v: i for i, v in enumerate(self.vertices)}
        return tuple(sorted(set(ids), key=pos.__getitem__))

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def has_simplex(self, ids: Iterable) -> bool:
        return self.sort_ids(ids) in self.simplices

    def maximal_simplices(self) -> list[tuple]:
        out = [
            s
            for s in self.simplices
            if not any(set(s) < set(t) for t in self.simplices)
        ]
        return sorted(out, key=lambda s: (len(s), s))


@dataclass(frozen=True)
class EmbeddedPoint:
    """Sparse barycentric point of a complex: vertex id -> weight, weights
    positive and summing to 1, support a simplex of the complex."""

    complex: SimplicialComplex
    coords: tuple[tuple[Hashable, float], ...]

    @staticmethod
    def of(complex: SimplicialComplex, coords: dict) -> "EmbeddedPoint":
        clean = {v: float(w) for v, w in coords.items() if abs(w) > COORD_EPS}
        total = sum(clean.values())
        if abs(total - 1.0) > 1e-7:
            raise InputError(f"coordinates sum to {total}, expected 1")
        if any(w < 0 for w in clean.values()):
            raise InputError("negative barycentric coordinate")
        support = complex.sort_ids(clean)
        if support not in complex.simplices:
            raise InvariantViolation(f"support {support} is not a simplex")
        return EmbeddedPoint(complex, tuple((v, clean[v]) for v in support))

    def as_dict(self) -> dict:
        return dict(self.coords)

    def support(self) -> tuple:
        return tuple(v for v, _ in self.coords)


def embedded_distance(p: EmbeddedPoint, q: EmbeddedPoint) -> float:
    """Euclidean distance of sparse coordinate vectors (vertex ids are the
    orthonormal basis, so this also works across glued complexes)."""
    a, b = p.as_dict(), q.as_dict()
    total = 0.0
    for v in set(a) | set(b):
        diff = a.get(v, 0.0) - b.get(v, 0.0)
        total += diff * diff
    return math.sqrt(total)


def polyhedron_distance(p: EmbeddedPoint, q: EmbeddedPoint) -> float:
    """Distance between two points of the same complex; use
    :func:`embedded_distance` directly for points of a glued family."""
    if p.complex is not q.complex:
        raise InputError("points belong to different complexes")
    return embedded_distance(p, q)


def vertex_point(complex: SimplicialComplex, v) -> EmbeddedPoint:
    return EmbeddedPoint.of(complex, {v: 1.0})


def barycenter_point(complex: SimplicialComplex, simplex: Iterable) -> EmbeddedPoint:
    ids = complex.sort_ids(simplex)
    return EmbeddedPoint.of(complex, {v: 1.0 / len(ids) for v in ids})


def combine(points: Sequence[EmbeddedPoint], weights: Sequence[float]) -> EmbeddedPoint:
    """Convex combination inside a common complex; the combined support
    must still be a simplex (checked)."""
    if abs(sum(weights) - 1.0) > 1e-9:
        raise InputError("weights must sum to 1")
    acc: dict = {}
    for pt, w in zip(points, weights):
        if w <= COORD_EPS:
            continue
        for v, c in pt.coords:
            acc[v] = acc.get(v, 0.0) + w * c
    return EmbeddedPoint.of(points[0].complex, acc)


# ---------------------------------------------------------------------------
# nerves and canonical projections


def nerve(cover: Cover, vertex_ids: Sequence | None = None) -> SimplicialComplex:
    """One vertex per cover set, one simplex per set pattern realized by a
    point of the carrier."""
    ids = tuple(vertex_ids) if vertex_ids is not None else tuple(range(len(cover.sets)))
    if len(ids) != len(cover.sets):
        raise InputError("need one vertex id per cover set")
    member_of: dict[int, list[int]] = {}
    for si, s in enumerate(cover.sets):
        for p in s:
            member_of.setdefault(p, []).append(si)
    patterns = {tuple(sorted(member_of[p])) for p in cover.universe()}
    cells = [tuple(ids[i] for i in pat) for pat in patterns]
    cells += [(v,) for v in ids]
    return SimplicialComplex(ids, _closure(cells))


def canonical_projection(cover: Cover, x: int, complex: SimplicialComplex | None = None) -> EmbeddedPoint:
    """Partition-of-unity projection of a carrier point into the nerve:
    the weight of a set is its normalized depth d(x, carrier minus set).

    A set equal to the whole carrier has infinite depth; when any such set
    contains x the weight concentrates evenly on those sets (the limit of
    the formula as the depth grows)."""
    if complex is None:
        complex = nerve(cover)
    uni = cover.universe()
    m = cover.space.matrix
    depths = []
    infinite = []
    for si, s in enumerate(cover.sets):
        comp = uni.difference(s)
        if not comp.indices:
            depths.append(math.inf)
            infinite.append(si)
        else:
            depths.append(float(m[x, list(comp.indices)].min()))
    ids = complex.vertices
    if infinite:
        w = 1.0 / len(infinite)
        return EmbeddedPoint.of(complex, {ids[si]: w for si in infinite})
    total = sum(depths)
    if total <= 0:
        raise InputError(f"point {x} lies in no cover set; family is not a cover at {x}")
    return EmbeddedPoint.of(complex, {ids[si]: d / total for si, d in enumerate(depths) if d > 0})


def projection_map(cover: Cover, complex: SimplicialComplex | None = None) -> MetricMap:
    """Canonical projection packaged as a measurable map on the carrier."""
    if complex is None:
        complex = nerve(cover)
    images = [None] * cover.space.n
    for x in cover.universe():
        images[x] = canonical_projection(cover, x, complex)
    return MetricMap(
        cover.space,
        tuple(images),
        embedded_distance,
        None,
        cover.universe(),
        complex,
    )


def projection_lipschitz_check(cover: Cover) -> dict:
    """Measure the canonical projection against the (2k+3)^2 / L bound,
    where k+1 is the multiplicity and L the Lebesgue number."""
    k = multiplicity(cover) - 1
    leb = lebesgue_number(cover)
    bound = 0.0 if math.isinf(leb) else (2 * k + 3) ** 2 / leb
    measured = measured_lipschitz(projection_map(cover))
    return {
        "measured": measured,
        "bound": bound,
        "k": k,
        "lebesgue": leb,
        "ok": measured <= bound + TOL,
    }


# ---------------------------------------------------------------------------
# subdivision, simplicial maps, refinement


def barycentric_subdivision(complex: SimplicialComplex):
    """Subdivide: one vertex per simplex, one simplex per containment
    chain.  Returns the subdivision and a map from new vertex ids (the
    original simplex tuples) to their barycenters in the original complex.
    """
    verts = sorted(complex.simplices, key=lambda s: (len(s), s))
    chains: set[tuple] = set()

    def grow(chain):
        chains.add(tuple(chain))
        last = chain[-1]
        for s in complex.simplices:
            if len(s) > len(last) and set(last) < set(s):
                grow(chain + [s])

    for s in complex.simplices:
        grow([s])
    sub = SimplicialComplex(tuple(verts), frozenset(chains))
    barycenters = {s: barycenter_point(complex, s) for s in verts}
    return sub, barycenters


@dataclass(frozen=True)
class SimplicialMap:
    """Vertex assignment between complexes sending simplices to simplices."""

    source: SimplicialComplex
    target: SimplicialComplex
    assignment: dict

    def __post_init__(self):
        missing = [v for v in self.source.vertices if v not in self.assignment]
        if missing:
            raise InputError(f"assignment misses vertices {missing[:4]}")
        for s in self.source.simplices:
            if not self.target.has_simplex(self.assignment[v] for v in s):
                raise InvariantViolation(
                    "image of a simplex is not a simplex", witness=s
                )

    def apply_vertex(self, v):
        return self.assignment[v]

    def apply(self, point: EmbeddedPoint) -> EmbeddedPoint:
        acc: dict = {}
        for v, w in point.coords:
            img = self.assignment[v]
            acc[img] = acc.get(img, 0.0) + w
        return EmbeddedPoint.of(self.target, acc)

    def compose(self, later: "SimplicialMap") -> "SimplicialMap":
        if later.source is not self.target:
            raise InputError("composition mismatch")
        return SimplicialMap(
            self.source,
            later.target,
            {v: later.assignment[self.assignment[v]] for v in self.source.vertices},
        )


def identity_simplicial_map(complex: SimplicialComplex) -> SimplicialMap:
    return SimplicialMap(complex, complex, {v: v for v in complex.vertices})


def refinement_map(
    fine: Cover,
    coarse: Cover,
    fine_nerve: SimplicialComplex | None = None,
    coarse_nerve: SimplicialComplex | None = None,
) -> SimplicialMap:
    """Send each fine set to the first coarse set containing it.

    Requires Lebesgue(coarse) > mesh(fine), which guarantees a containing
    set exists; prefers the identical set when present, then lowest index.
    """
    if fine_nerve is None:
        fine_nerve = nerve(fine)
    if coarse_nerve is None:
        coarse_nerve = nerve(coarse)
    leb = lebesgue_number(coarse)
    b = mesh(fine)
    if not leb > b:
        raise InputError(f"need Lebesgue(coarse) > mesh(fine); got {leb} <= {b}")
    assignment = {}
    for fi, fset in enumerate(fine.sets):
        fpts = fset.as_set()
        target = None
        for ci, cset in enumerate(coarse.sets):
            if fpts <= cset.as_set():
                if cset.as_set() == fpts:
                    target = ci
                    break
                if target is None:
                    target = ci
        if target is None:
            raise InvariantViolation(
                f"fine set {fi} is contained in no coarse set", witness=fi
            )
        assignment[fine_nerve.vertices[fi]] = coarse_nerve.vertices[target]
    return SimplicialMap(fine_nerve, coarse_nerve, assignment)


# ---------------------------------------------------------------------------
# mapping cylinders


@dataclass(frozen=True)
class MappingCylinder:
    """Triangulated cylinder of a simplicial map g.

    Vertices are the disjoint union of source and target vertices; each
    source simplex [v0..vp] contributes the cells [v0..vi, g(vi)..g(vp)].
    ``point(w, t)`` is the quotient map: t=0 is the isometric source copy,
    t=1 lands on the g-image in the target copy.
    """

    map: SimplicialMap
    complex: SimplicialComplex
    measured_constant: float | None = None

    @property
    def source(self) -> SimplicialComplex:
        return self.map.source

    @property
    def target(self) -> SimplicialComplex:
        return self.map.target

    def point(self, w: EmbeddedPoint, t: float) -> EmbeddedPoint:
        if not (-TOL <= t <= 1 + TOL):
            raise InputError("cylinder parameter must lie in [0, 1]")
        t = min(1.0, max(0.0, t))
        order = {v: i for i, v in enumerate(self.source.vertices)}
        supp = sorted(w.as_dict(), key=order.__getitem__)
        a = [w.as_dict()[v] for v in supp]
        p = len(a)
        suffix = [0.0] * (p + 1)
        for j in range(p - 1, -1, -1):
            suffix[j] = suffix[j + 1] + a[j]
        valid = [
            i
            for i in range(p)
            if suffix[i + 1] <= t + COORD_EPS and t <= suffix[i] + COORD_EPS
        ]
        i = max(valid)
        coords: dict = {}
        for j in range(i):
            coords[supp[j]] = coords.get(supp[j], 0.0) + a[j]
        coords[supp[i]] = coords.get(supp[i], 0.0) + (suffix[i] - t)
        top = {supp[i]: t - suffix[i + 1]}
        for j in range(i + 1, p):
            top[supp[j]] = top.get(supp[j], 0.0) + a[j]
        for v, weight in top.items():
            img = self.map.assignment[v]
            coords[img] = coords.get(img, 0.0) + weight
        return EmbeddedPoint.of(self.complex, coords)


def mapping_cylinder(g: SimplicialMap) -> MappingCylinder:
    src, dst = g.source, g.target
    if set(src.vertices) & set(dst.vertices):
        raise InputError("source and target vertex ids must be disjoint")
    vertices = src.vertices + dst.vertices
    pos = {v: i for i, v in enumerate(vertices)}
    cells = set(dst.simplices)
    for s in src.simplices:
        for i in range(len(s)):
            cell = set(s[: i + 1]) | {g.assignment[v] for v in s[i:]}
            cells.add(tuple(sorted(cell, key=pos.__getitem__)))
    complex = SimplicialComplex(vertices, _closure(cells))
    return MappingCylinder(g, complex)


def _simplex_complex(dim: int, tag: str) -> SimplicialComplex:
    ids = tuple((tag, i) for i in range(dim + 1))
    return SimplicialComplex.from_maximal(ids, [ids])


def _sample_points(complex: SimplicialComplex) -> list[EmbeddedPoint]:
    pts = [vertex_point(complex, v) for v in complex.vertices]
    for s in sorted(complex.simplices, key=lambda s: (len(s), s)):
        if len(s) >= 2:
            pts.append(barycenter_point(complex, s))
    return pts


def measure_cylinder_constant(cyl: MappingCylinder, t_steps: int = 16) -> float:
    """Measured Lipschitz constant of the quotient map q on the product
    source x [0, 1] with metric sqrt(d^2 + dt^2), sampled on vertices,
    barycenters, and a uniform t grid."""
    samples = _sample_points(cyl.source)
    ts = [i / t_steps for i in range(t_steps + 1)]
    states = [(z, t, cyl.point(z, t)) for z in samples for t in ts]
    best = 0.0
    for i in range(len(states)):
        z1, t1, q1 = states[i]
        for j in range(i + 1, len(states)):
            z2, t2, q2 = states[j]
            denom = math.hypot(embedded_distance(z1, z2), t1 - t2)
            if denom <= COORD_EPS:
                continue
            best = max(best, embedded_distance(q1, q2) / denom)
    return best


def measure_uniformization_constant(dim: int, sample_maps: Sequence[SimplicialMap] | None = None) -> float:
    """Estimate the uniformization constant for cylinders over complexes of
    the given dimension: the max measured quotient-map constant over a
    deterministic family of collapse and identity maps (always >= 1, since
    q restricted to t=0 is an isometry)."""
    if sample_maps is None:
        sample_maps = []
        src = _simplex_complex(dim, "s")
        point = _simplex_complex(0, "t")
        sample_maps.append(
            SimplicialMap(src, point, {v: ("t", 0) for v in src.vertices})
        )
        dst_same = _simplex_complex(dim, "t")
        sample_maps.append(
            SimplicialMap(src, dst_same, {("s", i): ("t", i) for i in range(dim + 1)})
        )
        if dim >= 1:
            dst_low = _simplex_complex(dim - 1, "t")
            collapse = {("s", i): ("t", min(i, dim - 1)) for i in range(dim + 1)}
            sample_maps.append(SimplicialMap(src, dst_low, collapse))
    best = 1.0
    for g in sample_maps:
        best = max(best, measure_cylinder_constant(mapping_cylinder(g)))
    if best < 1.0:
        raise InvariantViolation(f"uniformization constant {best} measured below 1")
    return best


# ---------------------------------------------------------------------------
# gluing


def glue(complexes: Sequence[SimplicialComplex]) -> SimplicialComplex:
    """Pushout along shared vertex ids: vertices and simplices are merged
    by identity of ids.  Shared subcomplexes must literally agree, which is
    how tower complexes are set up."""
    order: list = []
    seen = set()
    for c in complexes:
        for v in c.vertices:
            if v not in seen:
                seen.add(v)
                order.append(v)
    pos = {v: i for i, v in enumerate(order)}
    cells = set()
    for c in complexes:
        for s in c.simplices:
            cells.add(tuple(sorted(s, key=pos.__getitem__)))
    return SimplicialComplex(tuple(order), _closure(cells))


def glue_with_identifications(
    a: SimplicialComplex,
    b: SimplicialComplex,
    identify: dict,
) -> SimplicialComplex:
    """Glue two complexes along an explicit vertex bijection b-id -> a-id.

    The identification must be an isomorphism of the induced subcomplexes:
    a simplex on identified b-vertices must exist exactly when its a-image
    does.  Other vertex ids must not collide.
    """
    dom = set(identify)
    img = set(identify.values())
    if len(img) != len(dom):
        raise InputError("identification is not injective")
    if not dom <= set(b.vertices) or not img <= set(a.vertices):
        raise InputError("identification references unknown vertices")
    for s in b.simplices:
        if set(s) <= dom:
            if not a.has_simplex(identify[v] for v in s):
                raise InvariantViolation(
                    "identification is not a subcomplex isomorphism", witness=s
                )
    for s in a.simplices:
        if set(s) <= img:
            inv = {v: k for k, v in identify.items()}
            if not b.has_simplex(inv[v] for v in s):
                raise InvariantViolation(
                    "identification is not a subcomplex isomorphism", witness=s
                )
    rename = {v: identify.get(v, v) for v in b.vertices}
    leftover = [rename[v] for v in b.vertices if v not in dom]
    if set(leftover) & set(a.vertices):
        raise InputError("unidentified vertex ids collide; relabel first")
    order = list(a.vertices) + [v for v in leftover]
    pos = {v: i for i, v in enumerate(order)}
    cells = set(a.simplices)
    for s in b.simplices:
        cells.add(tuple(sorted((rename[v] for v in s), key=pos.__getitem__)))
    return SimplicialComplex(tuple(order), _closure(cells))


def euler_characteristic(complex: SimplicialComplex) -> int:
    chi = 0
    for s in complex.simplices:
        chi += (-1) ** (len(s) - 1)
    return chi


# ---------------------------------------------------------------------------
# JSON formats


def complex_to_json(complex: SimplicialComplex) -> dict:
    return {
        "vertices": [list(v) if isinstance(v, tuple) else v for v in complex.vertices],
        "simplices": sorted(
            [list(v) if isinstance(v, tuple) else v for v in s] for s in complex.simplices
        ),
    }


def embedded_point_to_json(point: EmbeddedPoint) -> dict:
    return {"coords": {str(v): w for v, w in point.coords}}

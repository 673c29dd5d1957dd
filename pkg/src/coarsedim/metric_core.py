"""Finite metric spaces and measured Lipschitz constants.

Everything downstream runs on a :class:`FiniteMetricSpace`: an immutable
point set with an explicit distance matrix that is checked against the
metric axioms at construction time.  Balls, neighborhoods and set-to-set
distances are computed exactly.  Lipschitz constants of maps are *measured*
over point pairs rather than trusted, which is the verification instrument
used by every other module.

Distances are 64-bit floats.  Integer-weight graphs (the dominant case)
produce exact values, so comparisons against them are exact; everywhere
else a 1e-9 tolerance applies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import InputError, MetricAxiomError

TOL = 1e-9

# Exhaustive triangle checks run below this size; above it a seeded sample
# is used (the seed is part of the report).
EXHAUSTIVE_TRIPLE_LIMIT = 300


# ---------------------------------------------------------------------------
# point sets


@dataclass(frozen=True)
class PointSet:
    """Sorted tuple of point indices of some ambient space."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = self.indices
        if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
            raise InputError("PointSet indices must be strictly increasing")
        if idx and idx[0] < 0:
            raise InputError("PointSet indices must be nonnegative")

    @staticmethod
    def of(points: Iterable[int]) -> "PointSet":
        return PointSet(tuple(sorted(set(int(p) for p in points))))

    @staticmethod
    def universe(n: int) -> "PointSet":
        return PointSet(tuple(range(n)))

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, p) -> bool:
        return p in set(self.indices)

    def as_set(self) -> frozenset[int]:
        return frozenset(self.indices)

    def union(self, other: "PointSet") -> "PointSet":
        return PointSet.of(self.as_set() | other.as_set())

    def intersection(self, other: "PointSet") -> "PointSet":
        return PointSet.of(self.as_set() & other.as_set())

    def difference(self, other: "PointSet") -> "PointSet":
        return PointSet.of(self.as_set() - other.as_set())


def as_point_set(points) -> PointSet:
    if isinstance(points, PointSet):
        return points
    return PointSet.of(points)


# ---------------------------------------------------------------------------
# spaces


PROVENANCES = (
    "explicit-matrix",
    "graph-shortest-path",
    "word-metric-ball",
    "free-product",
    "hyperbolization",
)


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Immutable finite metric space, compared by identity.

    The distance matrix is validated on construction (see
    :func:`verify_metric_axioms`); the array is frozen so instances can be
    shared freely across threads.
    """

    matrix: np.ndarray
    labels: tuple[str, ...] | None = None
    provenance: str = "explicit-matrix"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.provenance not in PROVENANCES:
            raise InputError(f"unknown provenance {self.provenance!r}")
        if self.labels is not None and len(self.labels) != m.shape[0]:
            raise InputError("label count does not match point count")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def dist(self, a: int, b: int) -> float:
        return float(self.matrix[a, b])

    def points(self) -> range:
        return range(self.n)

    def diameter(self) -> float:
        return float(self.matrix.max()) if self.n else 0.0

    def label(self, p: int) -> str:
        return self.labels[p] if self.labels else str(p)


def _triangle_violation_exhaustive(m: np.ndarray, tol: float):
    n = m.shape[0]
    for k in range(n):
        via = m[:, k][:, None] + m[k, :][None, :]
        bad = m > via + tol
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            return (i, j, k, float(m[i, j]), float(m[i, k] + m[k, j]))
    return None


def _triangle_violation_sampled(m: np.ndarray, tol: float, seed: int, samples: int):
    n = m.shape[0]
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(samples, 3))
    lhs = m[idx[:, 0], idx[:, 1]]
    rhs = m[idx[:, 0], idx[:, 2]] + m[idx[:, 2], idx[:, 1]]
    bad = lhs > rhs + tol
    if bad.any():
        w = int(np.argmax(bad))
        i, j, k = map(int, idx[w])
        return (i, j, k, float(m[i, j]), float(m[i, k] + m[k, j]))
    return None


def verify_metric_axioms(
    space_or_matrix,
    *,
    triple_mode: str = "auto",
    seed: int = 0,
    samples: int = 200_000,
    tol: float = TOL,
) -> dict:
    """Check symmetry, positivity and the triangle inequality.

    Symmetry and positivity checks are always exhaustive.  The triangle
    check is exhaustive for spaces up to 300 points; above that,
    ``triple_mode="auto"`` samples triples with the given seed (recorded in
    the report).  Pass ``triple_mode="exhaustive"`` to force the full scan.
    """
    m = space_or_matrix.matrix if isinstance(space_or_matrix, FiniteMetricSpace) else np.asarray(space_or_matrix, float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError("distance matrix must be square")
    n = m.shape[0]
    report: dict[str, Any] = {"n": n, "ok": True, "witness": None, "seed": seed}

    diag = np.abs(np.diag(m))
    if n and diag.max() > tol:
        i = int(np.argmax(diag))
        report.update(ok=False, axiom="zero-diagonal", witness=(i, i, float(m[i, i])))
        return report
    asym = np.abs(m - m.T)
    if n and asym.max() > tol:
        i, j = map(int, np.unravel_index(np.argmax(asym), asym.shape))
        report.update(ok=False, axiom="symmetry", witness=(i, j, float(m[i, j]), float(m[j, i])))
        return report
    off = m + np.eye(n)  # mask the diagonal before positivity test
    if n and off.min() <= 0:
        i, j = map(int, np.unravel_index(np.argmin(off), off.shape))
        report.update(ok=False, axiom="positivity", witness=(i, j, float(m[i, j])))
        return report

    if triple_mode == "exhaustive" or (triple_mode == "auto" and n <= EXHAUSTIVE_TRIPLE_LIMIT):
        report["triple_mode"] = "exhaustive"
        w = _triangle_violation_exhaustive(m, tol)
    elif triple_mode in ("auto", "sampled"):
        report["triple_mode"] = "sampled"
        report["triples_sampled"] = samples
        w = _triangle_violation_sampled(m, tol, seed, samples)
    else:
        raise InputError(f"unknown triple_mode {triple_mode!r}")
    if w is not None:
        report.update(ok=False, axiom="triangle", witness=w)
    return report


def build_explicit(matrix, labels=None, *, provenance: str = "explicit-matrix") -> FiniteMetricSpace:
    """Build a space from an explicit square distance matrix, verifying the
    axioms first (exhaustively up to 300 points, sampled above)."""
    m = np.asarray(matrix, dtype=float)
    report = verify_metric_axioms(m)
    if not report["ok"]:
        raise MetricAxiomError(
            f"matrix violates {report['axiom']} axiom at {report['witness']}",
            witness=report["witness"],
        )
    return FiniteMetricSpace(m, tuple(labels) if labels else None, provenance)


def build_graph_metric(n: int, edges: Sequence[tuple], labels=None) -> FiniteMetricSpace:
    """Shortest-path metric of a connected, positively weighted graph.

    ``edges`` is a list of ``(i, j)`` or ``(i, j, w)`` entries; missing
    weights default to 1.  Disconnected graphs are rejected.
    """
    if n <= 0:
        raise InputError("graph needs at least one vertex")
    rows, cols, data = [], [], []
    for e in edges:
        if len(e) == 2:
            i, j, w = e[0], e[1], 1.0
        else:
            i, j, w = e
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"edge {e} out of range")
        if w <= 0:
            raise InputError(f"edge {e} has nonpositive weight")
        rows.append(i)
        cols.append(j)
        data.append(float(w))
    if n == 1:
        m = np.zeros((1, 1))
    else:
        graph = coo_matrix((data, (rows, cols)), shape=(n, n))
        m = dijkstra(graph, directed=False)
        if np.isinf(m).any():
            i, j = map(int, np.argwhere(np.isinf(m))[0])
            raise InputError(f"graph is disconnected: no path between {i} and {j}")
    space = FiniteMetricSpace(m, tuple(labels) if labels else None, "graph-shortest-path")
    space.meta["edges"] = [(int(r), int(c), float(w)) for r, c, w in zip(rows, cols, data)]
    return space


def path_space(n: int) -> FiniteMetricSpace:
    """Unit-weight path 0 - 1 - ... - n-1."""
    return build_graph_metric(n, [(i, i + 1) for i in range(n - 1)])


def cycle_space(n: int) -> FiniteMetricSpace:
    if n < 3:
        raise InputError("cycle needs at least 3 vertices")
    return build_graph_metric(n, [(i, (i + 1) % n) for i in range(n)])


def grid_space(rows: int, cols: int) -> FiniteMetricSpace:
    """Unit-weight grid graph; point index is row*cols + col."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return build_graph_metric(rows * cols, edges)


# ---------------------------------------------------------------------------
# balls, neighborhoods, set distances


def ball(space: FiniteMetricSpace, center: int, radius: float) -> PointSet:
    """Closed ball: all points at distance <= radius from the center."""
    if radius < 0:
        raise InputError("radius must be nonnegative")
    hits = np.nonzero(space.matrix[center] <= radius + TOL)[0]
    return PointSet(tuple(int(i) for i in hits))


def set_distance(space: FiniteMetricSpace, a, b) -> float:
    """Minimum distance over pairs; 0 when the sets intersect."""
    a, b = as_point_set(a), as_point_set(b)
    if not a.indices or not b.indices:
        raise InputError("set_distance needs nonempty sets")
    sub = space.matrix[np.ix_(a.indices, b.indices)]
    return float(sub.min())


def point_set_distance(space: FiniteMetricSpace, p: int, a) -> float:
    a = as_point_set(a)
    if not a.indices:
        raise InputError("distance to an empty set is undefined")
    return float(space.matrix[p, list(a.indices)].min())


def neighborhood(space: FiniteMetricSpace, a, r: float, within=None) -> PointSet:
    """Closed r-neighborhood of a set, optionally restricted to a carrier
    subset (used when a cover lives on a subspace)."""
    if r < 0:
        raise InputError("radius must be nonnegative")
    a = as_point_set(a)
    if not a.indices:
        return a
    dist_to_a = space.matrix[:, list(a.indices)].min(axis=1)
    hits = np.nonzero(dist_to_a <= r + TOL)[0]
    out = PointSet(tuple(int(i) for i in hits))
    if within is not None:
        out = out.intersection(as_point_set(within))
    return out


def diameter_of(space: FiniteMetricSpace, a) -> float:
    a = as_point_set(a)
    if not a.indices:
        return 0.0
    sub = space.matrix[np.ix_(a.indices, a.indices)]
    return float(sub.max())


# ---------------------------------------------------------------------------
# maps and measured Lipschitz constants


@dataclass(frozen=True)
class MetricMap:
    """Total map from a finite metric space into anything with a metric.

    ``images[p]`` is the image of point ``p``; ``image_distance`` computes
    distances between images.  ``domain_points`` restricts the map (and all
    measurements) to a subset of the domain, which is how maps defined on
    fibers are represented.
    """

    domain: FiniteMetricSpace
    images: tuple
    image_distance: Callable[[Any, Any], float]
    declared_lipschitz: float | None = None
    domain_points: PointSet | None = None
    codomain: Any = None

    def __post_init__(self):
        if len(self.images) != self.domain.n:
            raise InputError("assignment must be total on the domain")

    def points(self) -> Sequence[int]:
        if self.domain_points is not None:
            return self.domain_points.indices
        return range(self.domain.n)

    def __call__(self, p: int):
        return self.images[p]


def map_between_spaces(
    domain: FiniteMetricSpace,
    codomain: FiniteMetricSpace,
    assignment: Sequence[int],
    declared_lipschitz: float | None = None,
    domain_points: PointSet | None = None,
) -> MetricMap:
    assignment = tuple(int(a) for a in assignment)
    for a in assignment:
        if not (0 <= a < codomain.n):
            raise InputError(f"image point {a} outside codomain")
    return MetricMap(
        domain,
        assignment,
        lambda a, b: float(codomain.matrix[a, b]),
        declared_lipschitz,
        domain_points,
        codomain,
    )


def identity_map(space: FiniteMetricSpace) -> MetricMap:
    return map_between_spaces(space, space, range(space.n), declared_lipschitz=1.0)


def constant_map(domain: FiniteMetricSpace, codomain: FiniteMetricSpace, point: int) -> MetricMap:
    return map_between_spaces(domain, codomain, [point] * domain.n, declared_lipschitz=0.0)


def map_to_reals(domain: FiniteMetricSpace, values: Sequence[float], declared_lipschitz=None,
                 domain_points=None) -> MetricMap:
    return MetricMap(
        domain,
        tuple(float(v) for v in values),
        lambda a, b: abs(a - b),
        declared_lipschitz,
        domain_points,
        "reals",
    )


def measured_lipschitz(m: MetricMap, pair_budget="all", seed: int = 0) -> float:
    """Largest ratio d(f(x), f(y)) / d(x, y) over distinct point pairs.

    With ``pair_budget="all"`` the supremum is exact; otherwise that many
    pairs are sampled with the given seed.
    """
    pts = list(m.points())
    if len(pts) < 2:
        return 0.0
    if pair_budget == "all" and m.codomain is not None and isinstance(m.codomain, FiniteMetricSpace):
        # vectorized fast path: integer images into a finite space
        idx = np.array(pts)
        img = np.array([m.images[p] for p in pts])
        dd = m.domain.matrix[np.ix_(idx, idx)]
        di = m.codomain.matrix[np.ix_(img, img)]
        iu = np.triu_indices(len(pts), k=1)
        return float(np.max(di[iu] / dd[iu])) if len(iu[0]) else 0.0
    if pair_budget == "all":
        pairs = ((pts[i], pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts)))
    else:
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(int(pair_budget)):
            i, j = rng.integers(0, len(pts), 2)
            if i != j:
                pairs.append((pts[int(i)], pts[int(j)]))
    best = 0.0
    for x, y in pairs:
        dxy = m.domain.dist(x, y)
        if dxy <= 0:
            continue
        best = max(best, m.image_distance(m.images[x], m.images[y]) / dxy)
    return best


def check_declared_lipschitz(m: MetricMap) -> dict:
    """Measure the map and compare against its declared constant."""
    measured = measured_lipschitz(m)
    ok = m.declared_lipschitz is None or measured <= m.declared_lipschitz + TOL
    return {"measured": measured, "declared": m.declared_lipschitz, "ok": ok}


def product_map(f: MetricMap, g: MetricMap) -> MetricMap:
    """Pair two maps on a common domain into the product of their codomains
    with metric sqrt(d1^2 + d2^2); the declared constant is
    sqrt(2) * max of the factors' constants."""
    if f.domain is not g.domain and f.domain != g.domain:
        raise InputError("product_map needs a common domain")
    lam_f = f.declared_lipschitz if f.declared_lipschitz is not None else measured_lipschitz(f)
    lam_g = g.declared_lipschitz if g.declared_lipschitz is not None else measured_lipschitz(g)
    df, dg = f.image_distance, g.image_distance

    def dist(a, b):
        return math.hypot(df(a[0], b[0]), dg(a[1], b[1]))

    images = tuple((f.images[p], g.images[p]) for p in range(f.domain.n))
    return MetricMap(
        f.domain,
        images,
        dist,
        math.sqrt(2.0) * max(lam_f, lam_g),
        f.domain_points,
        ("product", f.codomain, g.codomain),
    )


# ---------------------------------------------------------------------------
# JSON format: {"kind": "matrix"|"graph", "n": int, "labels": [...],
#               "matrix": [[...]] | "edges": [[i, j, w], ...]}


def space_to_json(space: FiniteMetricSpace) -> dict:
    doc: dict[str, Any] = {"n": space.n}
    if space.labels:
        doc["labels"] = list(space.labels)
    if space.provenance == "graph-shortest-path" and "edges" in space.meta:
        doc["kind"] = "graph"
        doc["edges"] = [[i, j, w] for i, j, w in space.meta["edges"]]
    else:
        doc["kind"] = "matrix"
        doc["matrix"] = [[float(x) for x in row] for row in space.matrix]
    return doc


def space_from_json(doc: dict) -> FiniteMetricSpace:
    try:
        kind = doc["kind"]
        n = doc["n"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"space JSON missing field: {exc}") from exc
    labels = doc.get("labels")
    if kind == "matrix":
        m = doc["matrix"]
        if len(m) != n:
            raise InputError("matrix size does not match n")
        return build_explicit(m, labels)
    if kind == "graph":
        return build_graph_metric(n, [tuple(e) for e in doc["edges"]], labels)
    raise InputError(f"unknown space kind {kind!r}")


def load_space(path) -> FiniteMetricSpace:
    with open(path, "r", encoding="utf-8") as f:
        return space_from_json(json.load(f))

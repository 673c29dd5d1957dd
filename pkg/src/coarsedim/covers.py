"""Covers and colored decompositions.

A *cover* is a family of point sets whose union is the carrier (the whole
space unless stated).  A *colored decomposition* splits a carrier into
color classes, each a family of pairwise far-apart sets: within one color,
distinct sets are more than D apart, and every set has diameter at most B.
The number of colors needed at a given separation scale D is the basic
finite-scale dimension witness computed here.

Solvers: clusters are carved deterministically by smallest-index ball
carving at mesh B, then colored either greedily (descending size,
first-fit) or exactly (branch-and-bound chromatic number of the cluster
conflict graph, capped at 12 clusters).  Exact color counts are minimal
*for the carved clustering*; reports label which mode produced a value.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, InputError, InvariantViolation
from .metric_core import (
    TOL,
    FiniteMetricSpace,
    PointSet,
    as_point_set,
    diameter_of,
    neighborhood,
    set_distance,
)

EXACT_CLUSTER_CAP = 12


# ---------------------------------------------------------------------------
# covers


@dataclass(frozen=True)
class Cover:
    """Family of nonempty point sets covering a carrier.

    ``carrier`` defaults to the whole space; a cover of a subspace keeps
    ambient indices and distances but treats the carrier as its universe
    (complements, Lebesgue numbers and projections are carrier-relative).
    A family that fails to cover is only accepted with ``partial=True``.
    """

    space: FiniteMetricSpace
    sets: tuple[PointSet, ...]
    carrier: PointSet | None = None
    partial: bool = False

    def __post_init__(self):
        if not self.sets:
            raise InputError("cover needs at least one set")
        if any(not s.indices for s in self.sets):
            raise InputError("cover sets must be nonempty")
        uni = self.universe()
        covered = frozenset().union(*(s.as_set() for s in self.sets))
        if not covered <= uni.as_set():
            raise InputError("cover sets leave the carrier")
        if not self.partial and covered != uni.as_set():
            missing = sorted(uni.as_set() - covered)[:5]
            raise InputError(f"family does not cover the carrier (missing {missing})")

    def universe(self) -> PointSet:
        return self.carrier if self.carrier is not None else PointSet.universe(self.space.n)


def make_cover(space, sets: Iterable, carrier=None, partial=False) -> Cover:
    return Cover(
        space,
        tuple(as_point_set(s) for s in sets),
        as_point_set(carrier) if carrier is not None else None,
        partial,
    )


def multiplicity(cover: Cover) -> int:
    """Largest number of cover sets through a single point."""
    counts = {}
    for s in cover.sets:
        for p in s:
            counts[p] = counts.get(p, 0) + 1
    return max(counts.values())


def r_multiplicity(cover: Cover, radius: float) -> int:
    """Largest number of cover sets meeting a single closed radius-ball,
    centers ranging over the carrier."""
    if radius < 0:
        raise InputError("radius must be nonnegative")
    m = cover.space.matrix
    best = 0
    for x in cover.universe():
        hits = sum(1 for s in cover.sets if m[x, list(s.indices)].min() <= radius + TOL)
        best = max(best, hits)
    return best


def mesh(cover: Cover) -> float:
    """Largest member diameter (the uniform boundedness witness)."""
    return max(diameter_of(cover.space, s) for s in cover.sets)


def family_mesh(space, sets: Sequence) -> float:
    sets = [as_point_set(s) for s in sets]
    return max((diameter_of(space, s) for s in sets), default=0.0)


def lebesgue_number(cover: Cover) -> float:
    """inf over carrier points of the largest distance to a member's
    complement (complement taken inside the carrier).  A member equal to
    the whole carrier makes this +inf."""
    uni = cover.universe()
    best = math.inf
    m = cover.space.matrix
    complements = [uni.difference(s) for s in cover.sets]
    for x in uni:
        val = 0.0
        for comp in complements:
            if not comp.indices:
                val = math.inf
                break
            val = max(val, float(m[x, list(comp.indices)].min()))
        best = min(best, val)
        if best == 0.0:
            break
    return best


def is_d_disjoint(space, family: Sequence, d: float) -> tuple[bool, tuple | None]:
    """Whether distinct members are pairwise more than d apart; on failure
    the witness is (i, j, distance)."""
    fam = [as_point_set(s) for s in family]
    for i in range(len(fam)):
        for j in range(i + 1, len(fam)):
            dist = set_distance(space, fam[i], fam[j])
            if dist <= d:
                return False, (i, j, dist)
    return True, None


def enlarge(cover: Cover, d: float) -> Cover:
    # set-wise closed d-neighborhood inside the carrier; cardinality kept
    uni = cover.universe()
    sets = tuple(neighborhood(cover.space, s, d, within=uni) for s in cover.sets)
    return Cover(cover.space, sets, cover.carrier, cover.partial)


# ---------------------------------------------------------------------------
# colored decompositions


@dataclass(frozen=True)
class ColoredDecomposition:
    """Per-color families of B-bounded sets, pairwise more than D apart
    within each color, jointly covering the carrier."""

    space: FiniteMetricSpace
    families: tuple[tuple[PointSet, ...], ...]
    D: float
    B: float
    carrier: PointSet | None = None
    info: dict = field(default_factory=dict, compare=False)

    def universe(self) -> PointSet:
        return self.carrier if self.carrier is not None else PointSet.universe(self.space.n)

    @property
    def colors(self) -> int:
        return len(self.families)

    def all_sets(self) -> list[PointSet]:
        return [s for fam in self.families for s in fam]

    def validate(self) -> None:
        covered: set[int] = set()
        for ci, fam in enumerate(self.families):
            ok, witness = is_d_disjoint(self.space, fam, self.D)
            if not ok:
                raise InvariantViolation(
                    f"color {ci} not {self.D}-disjoint", witness=(ci,) + witness
                )
            for si, s in enumerate(fam):
                dia = diameter_of(self.space, s)
                if dia > self.B + TOL:
                    raise InvariantViolation(
                        f"set {si} of color {ci} has diameter {dia} > B={self.B}",
                        witness=(ci, si, dia),
                    )
                covered.update(s.indices)
        uni = self.universe().as_set()
        if covered != uni:
            missing = sorted(uni - covered)[:5]
            extra = sorted(covered - uni)[:5]
            raise InvariantViolation(
                f"families do not cover the carrier exactly (missing {missing}, extra {extra})"
            )

    def as_cover(self) -> Cover:
        return Cover(self.space, tuple(self.all_sets()), self.carrier)


# ---------------------------------------------------------------------------
# saturated unions


def saturated_union(space, v_family: Sequence, u_family: Sequence, d: float) -> list[PointSet]:
    """d-saturated union of two families: each V absorbs every U within
    distance d of it; U's farther than d from all V's survive unchanged."""
    vs = [as_point_set(s) for s in v_family]
    us = [as_point_set(s) for s in u_family]
    absorbed = [False] * len(us)
    merged = []
    for v in vs:
        acc = set(v.indices)
        for i, u in enumerate(us):
            if set_distance(space, v, u) <= d:
                acc.update(u.indices)
                absorbed[i] = True
        merged.append(PointSet.of(acc))
    survivors = [u for i, u in enumerate(us) if not absorbed[i]]
    return merged + survivors


def finite_union_cover(
    decomp_a: ColoredDecomposition,
    decomp_b: ColoredDecomposition,
    d: float,
) -> ColoredDecomposition:
    """Color-wise d-saturated union: decomp_b's families absorb decomp_a's
    sets.  With decomp_a R-bounded and decomp_b r-bounded, the output is
    d-disjoint with mesh at most r + 2(d + R); both facts are verified
    exactly on the result and a violation raises with a witness.

    Output d-disjointness needs headroom on the absorbing side: it is
    guaranteed when decomp_b's families are (3d + 2R)-disjoint, since a
    single far-reaching set of decomp_a can otherwise be absorbed by two
    different members of decomp_b and weld them together.
    """
    if decomp_a.space is not decomp_b.space and not np.array_equal(
        decomp_a.space.matrix, decomp_b.space.matrix
    ):
        raise InputError("decompositions must share a space")
    if decomp_a.colors != decomp_b.colors:
        raise InputError(
            f"color count mismatch: {decomp_a.colors} vs {decomp_b.colors}"
        )
    space = decomp_a.space
    r_bound = decomp_a.B
    families = []
    for fam_a, fam_b in zip(decomp_a.families, decomp_b.families):
        families.append(tuple(saturated_union(space, fam_b, fam_a, d)))
    mesh_bound = decomp_b.B + 2 * (d + r_bound)
    out = ColoredDecomposition(
        space,
        tuple(families),
        D=d,
        B=mesh_bound,
        carrier=decomp_a.universe().union(decomp_b.universe()),
        info={"rule": "saturated-union", "d": d, "R": decomp_a.B, "r": decomp_b.B},
    )
    out.validate()
    return out


def disjoint_to_cover(decomp: ColoredDecomposition) -> Cover:
    """Enlarge every set by D/2 and pool all colors into one cover.

    The result is verified to have multiplicity at most the color count,
    Lebesgue number greater than D/2, and mesh at most B + D.
    """
    half = decomp.D / 2.0
    uni = decomp.universe()
    sets = []
    for fam in decomp.families:
        for s in fam:
            sets.append(neighborhood(decomp.space, s, half, within=uni))
    cover = Cover(decomp.space, tuple(sets), decomp.carrier)
    mult = multiplicity(cover)
    if mult > decomp.colors:
        raise InvariantViolation(
            f"enlarged cover multiplicity {mult} exceeds color count {decomp.colors}"
        )
    leb = lebesgue_number(cover)
    if not leb > half:
        raise InvariantViolation(f"Lebesgue number {leb} not greater than D/2 = {half}")
    got_mesh = mesh(cover)
    if got_mesh > decomp.B + decomp.D + TOL:
        raise InvariantViolation(f"mesh {got_mesh} exceeds B + D = {decomp.B + decomp.D}")
    return cover


# ---------------------------------------------------------------------------
# carving and coloring


def carve_clusters(space, B: float, carrier=None, first_seed: int | None = None) -> list[PointSet]:
    """Deterministic ball carving: repeatedly take the unassigned point of
    smallest index and claim every unassigned point within B/2 of it.
    ``first_seed`` overrides only the first pick (used by the exact solver
    to scan alternative carvings)."""
    uni = as_point_set(carrier) if carrier is not None else PointSet.universe(space.n)
    unassigned = set(uni.indices)
    m = space.matrix
    clusters = []
    first = True
    while unassigned:
        if first and first_seed is not None and first_seed in unassigned:
            seed = first_seed
        else:
            seed = min(unassigned)
        first = False
        members = [p for p in unassigned if m[seed, p] <= B / 2.0 + TOL]
        clusters.append(PointSet.of(members))
        unassigned.difference_update(members)
    return clusters


def _conflict_graph(space, clusters: Sequence[PointSet], D: float) -> list[set[int]]:
    n = len(clusters)
    adj: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if set_distance(space, clusters[i], clusters[j]) <= D:
                adj[i].add(j)
                adj[j].add(i)
    return adj


def greedy_coloring(adj: list[set[int]], sizes: Sequence[int]) -> list[int]:
    """First-fit in descending cluster size, ties by smallest index."""
    order = sorted(range(len(adj)), key=lambda v: (-sizes[v], v))
    colors = [-1] * len(adj)
    for v in order:
        used = {colors[u] for u in adj[v] if colors[u] >= 0}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def _greedy_clique(adj: list[set[int]]) -> int:
    if not adj:
        return 0
    best = 1
    for start in range(len(adj)):
        clique = [start]
        for v in sorted(range(len(adj)), key=lambda u: (-len(adj[u]), u)):
            if v != start and all(v in adj[u] for u in clique):
                clique.append(v)
        best = max(best, len(clique))
    return best


def _lex_min_coloring(adj: list[set[int]], k: int) -> list[int] | None:
    """Lexicographically smallest proper k-coloring in vertex order, or None.

    Colors beyond (max used so far + 1) are skipped: any coloring using a
    fresh color higher than that can be permuted down to one that is
    lexicographically no larger, so the restriction keeps both feasibility
    and the lex-minimal witness.
    """
    n = len(adj)
    colors = [-1] * n

    def place(v, used):
        if v == n:
            return True
        for c in range(min(k, used + 1)):
            if all(colors[u] != c for u in adj[v]):
                colors[v] = c
                if place(v + 1, max(used, c + 1)):
                    return True
                colors[v] = -1
        return False

    return colors if place(0, 0) else None


def chromatic_number(adj: list[set[int]]) -> tuple[int, list[int]]:
    """Exact chromatic number by branch and bound, with a deterministic
    lexicographically minimal witness at the optimum."""
    n = len(adj)
    if n == 0:
        return 0, []
    sizes = [1] * n
    ub_coloring = greedy_coloring(adj, sizes)
    best = max(ub_coloring) + 1
    lb = _greedy_clique(adj)
    k = lb
    while k < best:
        if _lex_min_coloring(adj, k) is not None:
            best = k
            break
        k += 1
    witness = _lex_min_coloring(adj, best)
    assert witness is not None
    return best, witness


def brute_force_chromatic(adj: list[set[int]]) -> int:
    """Independent oracle: try every color count from 1 up, enumerating raw
    assignments with early conflict rejection.  Only for tiny instances."""
    n = len(adj)
    if n == 0:
        return 0

    def feasible(k):
        def rec(v, assignment):
            if v == n:
                return True
            for c in range(k):
                if all(assignment[u] != c for u in adj[v] if u < v):
                    assignment[v] = c
                    if rec(v + 1, assignment):
                        return True
            assignment[v] = -1
            return False

        return rec(0, [-1] * n)

    k = 1
    while not feasible(k):
        k += 1
    return k


def colored_decomposition(
    space,
    D: float,
    B: float,
    mode: str = "auto",
    carrier=None,
    cluster_cap: int = EXACT_CLUSTER_CAP,
) -> ColoredDecomposition:
    """Carve clusters at mesh B and color them so same-color clusters are
    more than D apart.

    ``mode="greedy"`` is the first-fit heuristic; ``mode="exact"`` returns
    a provably minimal color count for the carved clustering (branch and
    bound, at most ``cluster_cap`` clusters) and additionally scans the
    alternative carvings obtained by letting each point seed the first
    cluster; ``mode="auto"`` runs exact when the default carving is small
    enough.  Color counts are minimal among colorings of carved
    clusterings, which may overestimate the true optimum at (D, B).
    """
    if D < 0 or B < 0:
        raise InputError("D and B must be nonnegative")
    t0 = time.perf_counter()
    base_clusters = carve_clusters(space, B, carrier)
    if mode == "auto":
        mode = "exact" if len(base_clusters) <= cluster_cap else "greedy"
    if mode == "greedy":
        adj = _conflict_graph(space, base_clusters, D)
        colors = greedy_coloring(adj, [len(c) for c in base_clusters])
        chosen, coloring = base_clusters, colors
    elif mode == "exact":
        if len(base_clusters) > cluster_cap:
            raise CapExceeded(
                f"exact mode capped at {cluster_cap} clusters, carving produced {len(base_clusters)}"
            )
        best = None
        uni = as_point_set(carrier) if carrier is not None else PointSet.universe(space.n)
        seeds = [None] + [p for p in uni if p != min(uni.indices)]
        for seed in seeds:
            clusters = base_clusters if seed is None else carve_clusters(space, B, carrier, seed)
            if len(clusters) > cluster_cap:
                continue
            adj = _conflict_graph(space, clusters, D)
            chi, witness = chromatic_number(adj)
            if best is None or chi < best[0]:
                best = (chi, clusters, witness)
        assert best is not None
        _, chosen, coloring = best
    else:
        raise InputError(f"unknown mode {mode!r}")

    n_colors = max(coloring) + 1 if coloring else 1
    families: list[list[PointSet]] = [[] for _ in range(n_colors)]
    for cluster, color in zip(chosen, coloring):
        families[color].append(cluster)
    decomp = ColoredDecomposition(
        space,
        tuple(tuple(fam) for fam in families),
        D=D,
        B=B,
        carrier=as_point_set(carrier) if carrier is not None else None,
        info={
            "mode": mode,
            "clusters": len(chosen),
            "colors": n_colors,
            "seconds": time.perf_counter() - t0,
            "label": "exact over carved clusterings" if mode == "exact" else "upper bound (greedy/carved)",
        },
    )
    decomp.validate()
    return decomp


# ---------------------------------------------------------------------------
# transported and union decompositions


def verify_isometry(src: FiniteMetricSpace, dst: FiniteMetricSpace, assignment: Sequence[int]):
    """Exact check that the assignment is a distance-preserving bijection."""
    if len(assignment) != src.n or src.n != dst.n:
        raise InputError("isometry must be a bijection between equal-size spaces")
    if len(set(assignment)) != len(assignment):
        raise InvariantViolation("assignment is not injective")
    a = list(assignment)
    img = dst.matrix[np.ix_(a, a)]
    if not np.allclose(img, src.matrix, atol=TOL, rtol=0):
        diff = np.abs(img - src.matrix)
        i, j = map(int, np.unravel_index(np.argmax(diff), diff.shape))
        raise InvariantViolation(
            "map is not an isometry",
            witness=(i, j, float(src.matrix[i, j]), float(img[i, j])),
        )


def uniform_decomposition(
    spaces: Sequence[FiniteMetricSpace],
    isometries: Sequence[Sequence[int]],
    D: float,
    B: float,
    mode: str = "auto",
) -> list[ColoredDecomposition]:
    """Decompose the first space once and transport the result through the
    supplied isometries, so all spaces share one color count and mesh."""
    if not spaces:
        raise InputError("need at least one space")
    if len(isometries) != len(spaces):
        raise InputError("one isometry per space required (identity for the first)")
    for space, iso in zip(spaces, isometries):
        verify_isometry(spaces[0], space, iso)
    rep = colored_decomposition(spaces[0], D, B, mode)
    out = []
    for space, iso in zip(spaces, isometries):
        fams = tuple(
            tuple(PointSet.of(iso[p] for p in s) for s in fam) for fam in rep.families
        )
        dec = ColoredDecomposition(space, fams, D=D, B=B, info=dict(rep.info))
        dec.validate()
        out.append(dec)
    return out


def union_cover(
    members: Sequence[PointSet],
    member_decomps: Sequence[ColoredDecomposition],
    saturating_decomp: ColoredDecomposition | None,
    r: float,
) -> ColoredDecomposition:
    """Decompose a union of subspaces that are pairwise far apart outside a
    saturating core.

    Each member comes with its own decomposition (all sharing a color
    count); the members minus the core must be pairwise more than r apart
    (verified, witness on failure).  Member families are restricted away
    from the core, concatenated color-wise, and r-saturated into the core's
    families.  The result is validated before being returned.
    """
    if not members:
        raise InputError("need at least one member")
    if len(member_decomps) != len(members):
        raise InputError("one decomposition per member required")
    space = member_decomps[0].space
    members = [as_point_set(m) for m in members]
    core = saturating_decomp.universe() if saturating_decomp is not None else PointSet.of([])
    trimmed = [m.difference(core) for m in members]
    for i in range(len(trimmed)):
        for j in range(i + 1, len(trimmed)):
            if not trimmed[i].indices or not trimmed[j].indices:
                continue
            dist = set_distance(space, trimmed[i], trimmed[j])
            if dist <= r:
                raise InvariantViolation(
                    f"members {i} and {j} are only {dist} apart outside the core (need > {r})",
                    witness=(i, j, dist),
                )
    n_colors = max(d.colors for d in member_decomps)
    if saturating_decomp is not None:
        n_colors = max(n_colors, saturating_decomp.colors)

    def padded(decomp):
        fams = list(decomp.families)
        fams += [tuple()] * (n_colors - len(fams))
        return fams

    concat: list[list[PointSet]] = [[] for _ in range(n_colors)]
    for m, dec, trim in zip(members, member_decomps, trimmed):
        keep = trim.as_set()
        for color, fam in enumerate(padded(dec)):
            for s in fam:
                cut = PointSet.of(s.as_set() & keep)
                if cut.indices:
                    concat[color].append(cut)
    families = []
    for color in range(n_colors):
        if saturating_decomp is not None:
            sat_fam = padded(saturating_decomp)[color]
            families.append(tuple(saturated_union(space, sat_fam, concat[color], r)))
        else:
            families.append(tuple(concat[color]))
    carrier = PointSet.of(set().union(*(m.as_set() for m in members)) | core.as_set())
    d_out = min([r] + [d.D for d in member_decomps] + ([saturating_decomp.D] if saturating_decomp is not None else []))
    b_out = max(family_mesh(space, fam) for fam in families if fam)
    out = ColoredDecomposition(
        space,
        tuple(families),
        D=d_out,
        B=b_out,
        carrier=carrier,
        info={"rule": "union-of-subspaces", "r": r, "colors": n_colors},
    )
    out.validate()
    return out


# ---------------------------------------------------------------------------
# profiles


def scale_dimension_profile(
    space,
    d_list: Sequence[float],
    mesh_multiplier: float = 3.0,
    carrier=None,
    cluster_cap: int = EXACT_CLUSTER_CAP,
) -> list[dict]:
    """Minimal color counts found at each separation scale D with mesh
    policy B = multiplier * D.  Exact when the carving is small enough,
    greedy otherwise; each row records which."""
    rows = []
    for d in d_list:
        b = mesh_multiplier * d
        t0 = time.perf_counter()
        dec = colored_decomposition(space, d, b, mode="auto", carrier=carrier, cluster_cap=cluster_cap)
        rows.append(
            {
                "D": d,
                "B": b,
                "colors": dec.colors,
                "mode": dec.info["mode"],
                "seconds": time.perf_counter() - t0,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# JSON formats


def cover_to_json(cover: Cover) -> dict:
    return {"sets": [list(s.indices) for s in cover.sets]}


def cover_from_json(doc: dict, space, carrier=None, partial=False) -> Cover:
    try:
        sets = doc["sets"]
    except (KeyError, TypeError) as exc:
        raise InputError("cover JSON needs a 'sets' field") from exc
    return make_cover(space, sets, carrier=carrier, partial=partial)


def decomposition_to_json(decomp: ColoredDecomposition) -> dict:
    doc = {
        "D": decomp.D,
        "B": decomp.B,
        "families": [[list(s.indices) for s in fam] for fam in decomp.families],
    }
    if decomp.carrier is not None:
        doc["carrier"] = list(decomp.carrier.indices)
    return doc


def decomposition_from_json(doc: dict, space) -> ColoredDecomposition:
    try:
        fams = tuple(tuple(PointSet.of(s) for s in fam) for fam in doc["families"])
        dec = ColoredDecomposition(
            space,
            fams,
            D=float(doc["D"]),
            B=float(doc["B"]),
            carrier=PointSet.of(doc["carrier"]) if "carrier" in doc else None,
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"decomposition JSON missing field: {exc}") from exc
    dec.validate()
    return dec

"""Free products of pointed metric spaces.

Elements are alternating words over the two factors minus their
basepoints.  The norm of a word adds the letter depths d(letter, base);
the distance between two words strips their longest common beginning and
adds the norms of what is left.  The associated coset tree and its
1-Lipschitz projection are built for any truncation, and both are checked
(connectivity, acyclicity, measured Lipschitz constant) rather than
assumed.

Letters must sit at depth >= 1 from the basepoint, which is what makes
the tree projection 1-Lipschitz; factors violating this are rejected, or
rescaled on request (recording the induced constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..covers import scale_dimension_profile
from ..errors import CapExceeded, InputError, InvariantViolation
from ..metric_core import (
    FiniteMetricSpace,
    MetricMap,
    PointSet,
    ball,
    build_graph_metric,
    measured_lipschitz,
    set_distance,
)

Letter = tuple[str, int]  # (factor tag "x"|"y", point index in that factor)
Word = tuple[Letter, ...]

WORD_CAP = 20_000


@dataclass(frozen=True)
class PointedSpace:
    space: FiniteMetricSpace
    basepoint: int

    def letter_norms(self) -> dict[int, float]:
        return {
            p: float(self.space.matrix[p, self.basepoint])
            for p in range(self.space.n)
            if p != self.basepoint
        }


def _scaled(space: FiniteMetricSpace, factor: float) -> FiniteMetricSpace:
    return FiniteMetricSpace(space.matrix * factor, space.labels, space.provenance)


@dataclass(frozen=True, eq=False)
class FreeProductSpace:
    """Truncated free product: all alternating words of norm <= max_norm,
    as a finite metric space in canonical (norm, length, word) order."""

    space: FiniteMetricSpace
    words: tuple[Word, ...]
    norms: tuple[float, ...]
    factors: tuple[PointedSpace, PointedSpace]
    max_norm: float
    index: dict = field(compare=False)
    rescale_constant: float = 1.0

    def word_index(self, w: Word) -> int:
        return self.index[w]


def word_norm(fps_or_factors, w: Word) -> float:
    factors = fps_or_factors.factors if isinstance(fps_or_factors, FreeProductSpace) else fps_or_factors
    by_tag = {"x": factors[0], "y": factors[1]}
    total = 0.0
    for tag, p in w:
        ps = by_tag[tag]
        total += float(ps.space.matrix[p, ps.basepoint])
    return total


def _common_prefix(u: Word, v: Word) -> int:
    i = 0
    while i < len(u) and i < len(v) and u[i] == v[i]:
        i += 1
    return i


def word_distance(fps: FreeProductSpace, u: Word, v: Word) -> float:
    i = _common_prefix(u, v)
    return word_norm(fps, u[i:]) + word_norm(fps, v[i:])


def _distance_matrix(words: Sequence[Word], norms: Sequence[float], letter_norm) -> np.ndarray:
    """Tail-norm recursion on the word trie: pairs whose next letters
    differ are exactly tail-norm apart; equal next letters recurse with the
    letter stripped.  One dense write per trie node keeps this near-linear
    in matrix size."""
    n = len(words)
    out = np.zeros((n, n))

    def fill(indices: list[int], depth: int, remaining: np.ndarray):
        idx = np.array(indices)
        out[np.ix_(idx, idx)] = remaining[:, None] + remaining[None, :]
        groups: dict[Letter, list[int]] = {}
        for pos, wi in enumerate(indices):
            w = words[wi]
            if len(w) > depth:
                groups.setdefault(w[depth], []).append(pos)
        for letter, members in groups.items():
            if len(members) < 2:
                continue
            sub = [indices[p] for p in members]
            rem = remaining[members] - letter_norm(letter)
            fill(sub, depth + 1, rem)

    fill(list(range(n)), 0, np.asarray(norms, float))
    np.fill_diagonal(out, 0.0)
    return out


def free_product_space(
    x: PointedSpace,
    y: PointedSpace,
    max_norm: float,
    cap: int = WORD_CAP,
    rescale: bool = False,
) -> FreeProductSpace:
    factors = (x, y)
    min_norm = min(
        min(x.letter_norms().values(), default=math.inf),
        min(y.letter_norms().values(), default=math.inf),
    )
    rescale_constant = 1.0
    if min_norm < 1.0:
        if not rescale:
            raise InputError(
                f"letter norms must be >= 1 (found {min_norm}); pass rescale=True "
                "to scale both factors up"
            )
        scale = 1.0 / min_norm
        factors = (
            PointedSpace(_scaled(x.space, scale), x.basepoint),
            PointedSpace(_scaled(y.space, scale), y.basepoint),
        )
        rescale_constant = max(1.0, scale)

    letters = {
        "x": sorted(factors[0].letter_norms().items()),
        "y": sorted(factors[1].letter_norms().items()),
    }

    import heapq

    words: list[Word] = []
    frontier: list[tuple[float, int, Word]] = [(0.0, 0, ())]
    while frontier:
        norm, _, w = heapq.heappop(frontier)
        words.append(w)
        if len(words) > cap:
            raise CapExceeded(f"free product truncation exceeds cap {cap}")
        last = w[-1][0] if w else None
        for tag in ("x", "y"):
            if tag == last:
                continue
            for p, ln in letters[tag]:
                if norm + ln <= max_norm + 1e-12:
                    new = w + ((tag, p),)
                    heapq.heappush(frontier, (norm + ln, len(new), new))
    words.sort(key=lambda w: (word_norm(factors, w), len(w), w))
    norms = tuple(word_norm(factors, w) for w in words)

    def letter_norm(letter: Letter) -> float:
        ps = factors[0] if letter[0] == "x" else factors[1]
        return float(ps.space.matrix[letter[1], ps.basepoint])

    matrix = _distance_matrix(words, norms, letter_norm)
    space = FiniteMetricSpace(matrix, tuple(_word_label(w) for w in words), "free-product")
    return FreeProductSpace(
        space,
        tuple(words),
        norms,
        factors,
        max_norm,
        {w: i for i, w in enumerate(words)},
        rescale_constant,
    )


def _word_label(w: Word) -> str:
    return "e" if not w else "".join(f"{t}{p}" for t, p in w)


# ---------------------------------------------------------------------------
# the coset tree


def _strip_trailing(w: Word, tag: str) -> Word:
    return w[:-1] if w and w[-1][0] == tag else w


TREE_EDGE_LENGTH = 0.5


@dataclass(frozen=True, eq=False)
class TreeSpace:
    """Coset tree of a truncated free product; vertices are ("X", word)
    and ("Y", word) with the trailing letter of the matching factor
    stripped.

    Every edge crosses between X-cosets and Y-cosets, so the tree is
    bipartite and an X-to-X trip of one letter costs two hops.  Edges get
    length 1/2 so that one letter of travel costs one unit of tree
    distance; this is the normalization that makes the coset projection
    1-Lipschitz (with unit edges its worst pairs measure exactly 2)."""

    space: FiniteMetricSpace
    vertices: tuple
    index: dict = field(compare=False)
    edges: tuple = ()


def free_product_tree(fps: FreeProductSpace) -> TreeSpace:
    vertices = []
    for w in fps.words:
        if not w or w[-1][0] == "y":
            vertices.append(("X", w))
        if not w or w[-1][0] == "x":
            vertices.append(("Y", w))
    vertices.sort(key=lambda v: (len(v[1]), v))
    index = {v: i for i, v in enumerate(vertices)}
    edges = set()
    for side, w in vertices:
        if not w:
            continue
        # stripping the last letter joins a coset of the opposite factor
        parent = ("Y" if side == "X" else "X", w[:-1])
        if parent in index:
            edges.add((index[parent], index[(side, w)]))
    edges.add((index[("X", ())], index[("Y", ())]))
    space = build_graph_metric(
        len(vertices),
        [(i, j, TREE_EDGE_LENGTH) for i, j in sorted(edges)],
        [f"{s}:{_word_label(w)}" for s, w in vertices],
    )
    tree = TreeSpace(space, tuple(vertices), index, tuple(sorted(edges)))
    if len(tree.edges) != len(vertices) - 1:
        raise InvariantViolation(
            f"coset graph has {len(tree.edges)} edges on {len(vertices)} vertices, not a tree"
        )
    return tree


def tree_projection(fps: FreeProductSpace, tree: TreeSpace | None = None) -> MetricMap:
    """Word -> its X-coset vertex; verified 1-Lipschitz exhaustively by the
    caller via measured_lipschitz (letter norms >= 1 make it so)."""
    if tree is None:
        tree = free_product_tree(fps)
    assignment = []
    for w in fps.words:
        v = ("X", _strip_trailing(w, "x"))
        assignment.append(tree.index[v])
    return MetricMap(
        fps.space,
        tuple(assignment),
        lambda a, b: float(tree.space.matrix[a, b]),
        1.0,
        None,
        tree.space,
    )


def word_stratification(fps: FreeProductSpace) -> dict:
    """Length strata P_k plus their split by last-letter factor; includes
    the shift check that stripping the last X-letter of a (k+1)-stratum
    word lands in the Y-side k-stratum."""
    strata: dict[int, dict[str, list[Word]]] = {}
    for w in fps.words:
        k = len(w)
        entry = strata.setdefault(k, {"P": [], "PX": [], "PY": []})
        entry["P"].append(w)
        if w:
            entry["P" + w[-1][0].upper()].append(w)
    max_k = max(strata)
    for k in range(1, max_k):
        upper = strata.get(k + 1, {"PX": [], "PY": []})
        for w in upper["PX"]:
            if w[:-1] not in set(strata[k]["PY"]):
                raise InvariantViolation(
                    f"stratification inclusion fails at k={k}", witness=w
                )
        for w in upper["PY"]:
            if w[:-1] not in set(strata[k]["PX"]):
                raise InvariantViolation(
                    f"stratification inclusion fails at k={k}", witness=w
                )
    return strata


# ---------------------------------------------------------------------------
# empirical report for maps to trees


def _is_tree(space: FiniteMetricSpace) -> bool:
    edges = space.meta.get("edges")
    if edges is None:
        return False
    n = space.n
    return len({(min(i, j), max(i, j)) for i, j, _ in edges}) == n - 1


def tree_target_report(
    f: MetricMap,
    tree_space: FiniteMetricSpace,
    r_list: Sequence[float],
    R_list: Sequence[float],
    base_point: int = 0,
    d_list: Sequence[float] = (1.0, 2.0),
    seed: int = 0,
) -> dict:
    """Empirical hypothesis report for a map into a tree: measured
    Lipschitz constant, separation growth of two far fiber bundles outside
    growing balls, and per-fiber color profiles.  Nothing here is a
    pass/fail judgment; limit statements are not decidable on truncations.
    """
    if not _is_tree(tree_space):
        raise InputError("codomain is not a tree (need graph provenance with |E| = |V| - 1)")
    rng = np.random.default_rng(seed)
    report: dict = {"seed": seed, "measured_lipschitz": measured_lipschitz(f)}

    # two disjoint bounded vertex sets, as far apart as the truncation allows
    m = tree_space.matrix
    v, w = np.unravel_index(np.argmax(m), m.shape)
    W1 = ball(tree_space, int(v), 1.0)
    W2 = ball(tree_space, int(w), 1.0)
    fiber1 = PointSet.of(p for p in f.points() if f.images[p] in set(W1))
    fiber2 = PointSet.of(p for p in f.points() if f.images[p] in set(W2))
    rows = []
    for r in r_list:
        core = ball(f.domain, base_point, r)
        a = fiber1.difference(core)
        b = fiber2.difference(core)
        sep = None if not a.indices or not b.indices else set_distance(f.domain, a, b)
        rows.append({"r": r, "separation": sep, "left": len(a), "right": len(b)})
    report["separation_growth"] = rows
    report["fiber_sets_disjoint"] = not (set(W1) & set(W2))

    profiles = []
    centers = sorted(rng.choice(tree_space.n, size=min(3, tree_space.n), replace=False).tolist())
    for R in R_list:
        for center in centers:
            tree_ball = set(ball(tree_space, center, R))
            fiber = PointSet.of(p for p in f.points() if f.images[p] in tree_ball)
            if not fiber.indices:
                continue
            rows = scale_dimension_profile(f.domain, d_list, carrier=fiber)
            profiles.append(
                {
                    "R": R,
                    "center": center,
                    "fiber_size": len(fiber),
                    "colors": [r["colors"] for r in rows],
                    "modes": [r["mode"] for r in rows],
                }
            )
    report["fiber_profiles"] = profiles
    return report

"""Finitely generated group models and word-metric balls.

A :class:`GroupModel` is an oracle: an identity element, a generator list
closed under inverses, and a total multiplication.  Balls are enumerated
breadth-first; the word metric restricted to a radius-R ball is computed
inside the radius-2R enumeration, which is exact because word-metric
geodesics between B_R points stay inside B_2R (2|z| <= |x| + |y| + d(x,y)).
Element order is canonical (word length, then repr), so the metric does
not depend on generator order.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from ..errors import CapExceeded, InputError, InvariantViolation
from ..metric_core import FiniteMetricSpace

BALL_CAP = 200_000


@dataclass(frozen=True)
class GroupModel:
    """Group given by oracles; elements must be hashable."""

    name: str
    identity: Any
    generators: tuple[tuple[str, Any], ...]
    multiply: Callable[[Any, Any], Any]

    def generator_elements(self) -> list:
        return [g for _, g in self.generators]


def validate_group_model(group: GroupModel, radius: int = 2) -> dict:
    """Exact identity laws and generator-inverse closure; associativity on
    all triples of ball elements (desk-scale sample of the group law)."""
    e = group.identity
    for label, g in group.generators:
        if group.multiply(e, g) != g or group.multiply(g, e) != g:
            raise InvariantViolation(f"identity law fails on generator {label}")
        if not any(group.multiply(g, h) == e for _, h in group.generators):
            raise InvariantViolation(f"generator {label} has no inverse in the list")
    elems = list(enumerate_ball(group, radius))
    for a in elems[: min(len(elems), 12)]:
        for b in elems[: min(len(elems), 12)]:
            for c in elems[: min(len(elems), 12)]:
                if group.multiply(group.multiply(a, b), c) != group.multiply(a, group.multiply(b, c)):
                    raise InvariantViolation("associativity fails", witness=(a, b, c))
    return {"ok": True, "ball_checked": radius}


def enumerate_ball(group: GroupModel, radius: int, cap: int = BALL_CAP) -> dict:
    """BFS enumeration of the radius ball: element -> (word length, word),
    where the word is a tuple of generator indices reaching it."""
    gens = group.generator_elements()
    found = {group.identity: (0, ())}
    frontier = [group.identity]
    for depth in range(1, radius + 1):
        nxt = []
        for elem in frontier:
            word = found[elem][1]
            for gi, g in enumerate(gens):
                new = group.multiply(elem, g)
                if new not in found:
                    found[new] = (depth, word + (gi,))
                    nxt.append(new)
                    if len(found) > cap:
                        raise CapExceeded(f"ball of {group.name} exceeds cap {cap}")
        frontier = nxt
    return found


def _inverse_generator_indices(group: GroupModel) -> list[int]:
    gens = group.generator_elements()
    inv = []
    for g in gens:
        match = next((j for j, h in enumerate(gens) if group.multiply(g, h) == group.identity), None)
        if match is None:
            raise InvariantViolation("generator set is not closed under inverses")
        inv.append(match)
    return inv


def element_inverse(group: GroupModel, word: tuple[int, ...]) -> Any:
    """Inverse of the element reached by a generator word."""
    inv_idx = _inverse_generator_indices(group)
    gens = group.generator_elements()
    out = group.identity
    for gi in reversed(word):
        out = group.multiply(out, gens[inv_idx[gi]])
    return out


@dataclass(frozen=True)
class CayleyBall:
    """Word-metric ball: a finite metric space plus the element list in
    canonical order (word length, then repr)."""

    group: GroupModel
    radius: int
    space: FiniteMetricSpace
    elements: tuple
    index: dict = field(compare=False)

    def element_of(self, i: int):
        return self.elements[i]


def cayley_ball(group: GroupModel, radius: int, cap: int = BALL_CAP) -> CayleyBall:
    """Enumerate B_radius with the exact word metric (computed in B_2radius
    so no geodesic is cut off)."""
    if radius < 0:
        raise InputError("radius must be nonnegative")
    wide = enumerate_ball(group, 2 * radius, cap)
    inner = {e: lw for e, lw in wide.items() if lw[0] <= radius}
    order_all = sorted(wide, key=lambda e: (wide[e][0], repr(e)))
    pos = {e: i for i, e in enumerate(order_all)}
    gens = group.generator_elements()
    adjacency: list[list[int]] = [[] for _ in order_all]
    for e in order_all:
        for g in gens:
            to = group.multiply(e, g)
            if to in pos:
                adjacency[pos[e]].append(pos[to])
    inner_sorted = sorted(inner, key=lambda e: (inner[e][0], repr(e)))
    n = len(inner_sorted)
    matrix = np.zeros((n, n))
    for i, e in enumerate(inner_sorted):
        dist = {pos[e]: 0}
        frontier = [pos[e]]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in adjacency[u]:
                    if v not in dist:
                        dist[v] = d
                        nxt.append(v)
            frontier = nxt
        for j, f in enumerate(inner_sorted):
            matrix[i, j] = dist[pos[f]]
    space = FiniteMetricSpace(matrix, tuple(repr(e) for e in inner_sorted), "word-metric-ball")
    return CayleyBall(group, radius, space, tuple(inner_sorted), {e: i for i, e in enumerate(inner_sorted)})


def left_invariance_check(group: GroupModel, radius: int) -> dict:
    """d(gx, gy) = d(x, y) for all g, x, y in B_radius, with all products
    evaluated inside the safe double ball.  A witness means the multiply
    oracle is broken."""
    if radius < 1:
        raise InputError("radius must be at least 1")
    big = cayley_ball(group, 2 * radius)
    inner = [e for e in big.elements if big.space.matrix[big.index[group.identity], big.index[e]] <= radius]
    for g in inner:
        for x in inner:
            gx = group.multiply(g, x)
            if gx not in big.index:
                continue
            for y in inner:
                gy = group.multiply(g, y)
                if gy not in big.index:
                    continue
                lhs = big.space.dist(big.index[gx], big.index[gy])
                rhs = big.space.dist(big.index[x], big.index[y])
                if lhs != rhs:
                    return {"ok": False, "witness": (g, x, y, lhs, rhs)}
    return {"ok": True, "witness": None}


# ---------------------------------------------------------------------------
# builtin families


def free_group(rank: int) -> GroupModel:
    """Free group on `rank` letters; elements are reduced tuples of nonzero
    ints (sign = inverse)."""

    def mul(a, b):
        a = list(a)
        for x in b:
            if a and a[-1] == -x:
                a.pop()
            else:
                a.append(x)
        return tuple(a)

    gens = []
    for i in range(1, rank + 1):
        gens.append((f"g{i}", (i,)))
        gens.append((f"g{i}~", (-i,)))
    return GroupModel(f"free-{rank}", (), tuple(gens), mul)


def free_abelian_group(rank: int) -> GroupModel:
    def mul(a, b):
        return tuple(x + y for x, y in zip(a, b))

    zero = tuple([0] * rank)
    gens = []
    for i in range(rank):
        e = tuple(1 if j == i else 0 for j in range(rank))
        ne = tuple(-1 if j == i else 0 for j in range(rank))
        gens.append((f"e{i}", e))
        gens.append((f"e{i}~", ne))
    return GroupModel(f"zn-{rank}", zero, tuple(gens), mul)


def cyclic_group(m: int) -> GroupModel:
    if m < 2:
        raise InputError("cyclic group order must be at least 2")

    def mul(a, b):
        return (a + b) % m

    gens = [("t", 1 % m), ("t~", (-1) % m)]
    return GroupModel(f"z{m}", 0, tuple(gens), mul)


def heisenberg_group() -> GroupModel:
    """Integer upper-triangular 3x3 matrices encoded as (a, b, c):
    (a,b,c)*(a',b',c') = (a+a', b+b', c+c'+a*b')."""

    def mul(p, q):
        return (p[0] + q[0], p[1] + q[1], p[2] + q[2] + p[0] * q[1])

    gens = (
        ("x", (1, 0, 0)),
        ("x~", (-1, 0, 0)),
        ("y", (0, 1, 0)),
        ("y~", (0, -1, 0)),
    )
    return GroupModel("heisenberg", (0, 0, 0), gens, mul)


def direct_product(a: GroupModel, b: GroupModel) -> GroupModel:
    def mul(p, q):
        return (a.multiply(p[0], q[0]), b.multiply(p[1], q[1]))

    gens = [(f"{la}|", (ga, b.identity)) for la, ga in a.generators]
    gens += [(f"|{lb}", (a.identity, gb)) for lb, gb in b.generators]
    return GroupModel(f"{a.name}x{b.name}", (a.identity, b.identity), tuple(gens), mul)


# ---------------------------------------------------------------------------
# quotients and the kernel-neighborhood identity


@dataclass(frozen=True)
class QuotientPresentation:
    """Surjection onto a quotient: the projection oracle, a kernel
    membership test, and the quotient group generated by the images."""

    group: GroupModel
    quotient: GroupModel
    project: Callable[[Any], Any]
    in_kernel: Callable[[Any], bool]


def heisenberg_center_quotient() -> QuotientPresentation:
    """Heisenberg onto Z^2 by killing the center (the c coordinate)."""
    g = heisenberg_group()
    h = free_abelian_group(2)
    return QuotientPresentation(
        g,
        h,
        project=lambda p: (p[0], p[1]),
        in_kernel=lambda p: p[0] == 0 and p[1] == 0,
    )


def kernel_neighborhood_check(q: QuotientPresentation, R: int, ball_radius: int) -> dict:
    """Exact set equality, inside the enumerated ball, of

      {g : the quotient image of g has word norm <= R}   and
      {g : g lies within R of the kernel},

    the latter decided algebraically as: some h in B_R has g*h^-1 in the
    kernel (so no geodesic can escape the enumeration).
    """
    if ball_radius < 2 * R:
        raise InputError("ball radius must be at least 2R for a safe check")
    ball = enumerate_ball(q.group, ball_radius)
    quotient_ball = enumerate_ball(q.quotient, R)
    small = enumerate_ball(q.group, R)
    inverses = {e: element_inverse(q.group, w) for e, (_, w) in small.items()}
    side_w, side_n = set(), set()
    for g in ball:
        if q.project(g) in quotient_ball:
            side_w.add(g)
        if any(q.in_kernel(q.group.multiply(g, inv)) for inv in inverses.values()):
            side_n.add(g)
    only_w = sorted(side_w - side_n, key=repr)
    only_n = sorted(side_n - side_w, key=repr)
    return {
        "ok": not only_w and not only_n,
        "R": R,
        "ball_radius": ball_radius,
        "ball_size": len(ball),
        "witness_w_only": only_w[:3],
        "witness_n_only": only_n[:3],
        "size": len(side_w),
    }


# ---------------------------------------------------------------------------
# external oracle and JSON


class ExternalGroupOracle:
    """Group multiplication served by an external process over a line
    protocol: send "MUL a b", read back the product token."""

    def __init__(self, command: Sequence[str]):
        self.proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def multiply(self, a: str, b: str) -> str:
        assert self.proc.stdin and self.proc.stdout
        self.proc.stdin.write(f"MUL {a} {b}\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise InputError("group oracle process closed the stream")
        return line.strip()

    def close(self):
        if self.proc.poll() is None:
            self.proc.terminate()
            self.proc.wait(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


_BUILTIN_FACTORIES: dict[str, Callable[..., GroupModel]] = {
    "free": lambda params: free_group(int(params.get("rank", 2))),
    "free-abelian": lambda params: free_abelian_group(int(params.get("rank", 2))),
    "zn": lambda params: free_abelian_group(int(params.get("rank", 2))),
    "cyclic": lambda params: cyclic_group(int(params.get("order", 2))),
    "heisenberg": lambda params: heisenberg_group(),
}


def group_from_json(doc: dict) -> GroupModel:
    """Group JSON: {"builtin": name, "params": {...}} or
    {"custom": {"command": [...], "identity": tok, "generators": [[label, tok], ...]}}."""
    if "builtin" in doc:
        name = doc["builtin"]
        if name not in _BUILTIN_FACTORIES:
            raise InputError(f"unknown builtin group {name!r}")
        return _BUILTIN_FACTORIES[name](doc.get("params", {}))
    if "custom" in doc:
        spec = doc["custom"]
        try:
            oracle = ExternalGroupOracle(spec["command"])
            identity = spec["identity"]
            gens = tuple((str(l), str(e)) for l, e in spec["generators"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"custom group JSON missing field: {exc}") from exc
        return GroupModel("custom", identity, gens, oracle.multiply)
    raise InputError("group JSON needs 'builtin' or 'custom'")

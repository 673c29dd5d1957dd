"""The logarithmic space of balls over a base space.

Points are pairs (center, radius t > 0); the distance between two balls is
2 ln((d(x, y) + max(t, s)) / sqrt(t s)).  Radii come from a finite
geometric grid.  The height map (x, t) -> ln t is 1-Lipschitz, which is
verified exhaustively rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..metric_core import FiniteMetricSpace, MetricMap, map_to_reals

HEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class BallSpacePoint:
    center: int
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise InputError("ball radius must be positive")


@dataclass(frozen=True, eq=False)
class BallSpace:
    space: FiniteMetricSpace
    points: tuple[BallSpacePoint, ...]
    base: FiniteMetricSpace
    index: dict = field(compare=False)


def geometric_radii(t0: float = 1.0, ratio: float = math.e, levels: int = 5) -> list[float]:
    if t0 <= 0 or ratio <= 1:
        raise InputError("need t0 > 0 and ratio > 1")
    return [t0 * ratio**i for i in range(levels)]


def ball_distance(base: FiniteMetricSpace, p: BallSpacePoint, q: BallSpacePoint) -> float:
    d = base.dist(p.center, q.center)
    return 2.0 * math.log((d + max(p.radius, q.radius)) / math.sqrt(p.radius * q.radius))


def hyperbolization(base: FiniteMetricSpace, radii) -> BallSpace:
    """Space of balls over the base with the logarithmic metric; the
    resulting distance table passes the full axiom check (triangle
    inequality asserted numerically at 1e-9)."""
    radii = sorted(set(float(t) for t in radii))
    if not radii:
        raise InputError("need at least one radius")
    if radii[0] <= 0:
        raise InputError("radii must be positive")
    points = tuple(
        BallSpacePoint(x, t) for t in radii for x in range(base.n)
    )
    n = len(points)
    matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i, j] = matrix[j, i] = ball_distance(base, points[i], points[j])
    space = FiniteMetricSpace(
        matrix,
        tuple(f"B_{p.radius:g}({p.center})" for p in points),
        "hyperbolization",
    )
    from ..metric_core import verify_metric_axioms

    report = verify_metric_axioms(space, triple_mode="exhaustive" if n <= 600 else "auto")
    if not report["ok"]:
        raise InputError(f"ball-space metric failed {report['axiom']} at {report['witness']}")
    return BallSpace(space, points, base, {p: i for i, p in enumerate(points)})


def height_projection(hspace: BallSpace) -> MetricMap:
    """(x, t) -> ln t into the real line; |ln t - ln s| <= ball distance
    holds exactly since max(t,s)^2 >= t s, checked to 1e-12 on all pairs."""
    values = [math.log(p.radius) for p in hspace.points]
    m = map_to_reals(hspace.space, values, declared_lipschitz=1.0)
    pts = list(range(len(values)))
    for i in pts:
        for j in pts[i + 1:]:
            gap = abs(values[i] - values[j])
            if gap > hspace.space.dist(i, j) + HEIGHT_TOL:
                raise InputError(
                    f"height projection expands pair {(i, j)}: {gap} > {hspace.space.dist(i, j)}"
                )
    return m

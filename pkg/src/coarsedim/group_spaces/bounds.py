"""Symbolic upper-bound calculus for coarse dimension of groups.

Bounds are combined by three rules, each printed into a derivation chain:

  extension     quotient bound + kernel bound
  polycyclic    the Hirsch length (number of infinite-cyclic factors)
  free product  max(left, right, 1)
  amalgam       subgroup bound + max(left quotient, right quotient, 1)

Leaves are known bounds, infinite-cyclic factors (1) or finite groups (0).
The free-product rule is stated for positive inputs; when both sides are 0
the max(..., 1) value is an upper bound only and the chain says so.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import InputError

INFINITE_CYCLIC = "Z"


@dataclass(frozen=True)
class NormalSeries:
    """Consecutive quotient descriptors, each "Z" or "finite:<m>"."""

    quotients: tuple[str, ...]

    def __post_init__(self):
        if not self.quotients:
            raise InputError("a normal series needs at least one quotient")
        for q in self.quotients:
            if q != INFINITE_CYCLIC and not q.startswith("finite"):
                raise InputError(f"unknown quotient descriptor {q!r}")

    @staticmethod
    def of(items: Sequence[str]) -> "NormalSeries":
        return NormalSeries(tuple(items))


def hirsch_length(series: NormalSeries) -> int:
    """Number of infinite-cyclic factors in the series."""
    return sum(1 for q in series.quotients if q == INFINITE_CYCLIC)


def _eval(expr, lines: list[str], depth: int) -> int:
    pad = "  " * depth
    if isinstance(expr, (int, float)):
        value = int(expr)
        lines.append(f"{pad}known bound: {value}")
        return value
    if isinstance(expr, str):
        if expr == INFINITE_CYCLIC:
            lines.append(f"{pad}infinite cyclic: 1")
            return 1
        if expr.startswith("finite"):
            lines.append(f"{pad}finite group: 0")
            return 0
        raise InputError(f"unknown leaf {expr!r}")
    if isinstance(expr, NormalSeries):
        expr = {"rule": "polycyclic", "series": list(expr.quotients)}
    if not isinstance(expr, dict) or "rule" not in expr:
        raise InputError(f"cannot evaluate bound expression {expr!r}")
    rule = expr["rule"]
    if rule == "leaf":
        value = int(expr["value"])
        lines.append(f"{pad}known bound: {value}")
        return value
    if rule == "polycyclic":
        series = NormalSeries.of(expr["series"])
        h = hirsch_length(series)
        lines.append(
            f"{pad}polycyclic rule: bound = Hirsch length = {h} "
            f"(series {', '.join(series.quotients)})"
        )
        return h
    if rule == "extension":
        lines.append(f"{pad}extension rule: quotient bound + kernel bound")
        q = _eval(expr["quotient"], lines, depth + 1)
        k = _eval(expr["kernel"], lines, depth + 1)
        lines.append(f"{pad}= {q} + {k} = {q + k}")
        return q + k
    if rule == "free_product":
        lines.append(f"{pad}free product rule: max(left, right, 1)")
        a = _eval(expr["left"], lines, depth + 1)
        b = _eval(expr["right"], lines, depth + 1)
        value = max(a, b, 1)
        note = " (upper bound; the equality case needs a positive side)" if max(a, b) == 0 else ""
        lines.append(f"{pad}= max({a}, {b}, 1) = {value}{note}")
        return value
    if rule == "amalgam":
        lines.append(
            f"{pad}amalgam rule: subgroup bound + max(left quotient, right quotient, 1)"
        )
        c = _eval(expr["c"], lines, depth + 1)
        a = _eval(expr["a_quotient"], lines, depth + 1)
        b = _eval(expr["b_quotient"], lines, depth + 1)
        value = c + max(a, b, 1)
        lines.append(f"{pad}= {c} + max({a}, {b}, 1) = {value}")
        return value
    raise InputError(f"unknown rule {rule!r}")


def asdim_upper_bound(expr) -> dict:
    """Evaluate a bound expression tree and return the bound with its
    printed derivation chain."""
    lines: list[str] = []
    value = _eval(expr, lines, 0)
    return {"bound": value, "derivation": lines}

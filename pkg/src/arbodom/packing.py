"""Dual packing values kept in symbolic form.

Node ``v`` carries ``x_v = tau_v * (1 + eps)**i_v * gamma**j_v / base_v``.
The integers ``(tau, i, j)`` are what travels in messages; every receiver
rebuilds the exact rational locally.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .graph import WeightedGraph


class PowerTable:
    """Memoised non-negative powers of one rational."""

    __slots__ = ("base", "_pows")

    def __init__(self, base: Fraction):
        self.base = base
        self._pows = [Fraction(1)]

    def __getitem__(self, k: int) -> Fraction:
        pows = self._pows
        while len(pows) <= k:
            pows.append(pows[-1] * self.base)
        return pows[k]


@dataclass(frozen=True)
class PackingAssignment:
    tau: tuple[int, ...]
    i: tuple[int, ...]
    j: tuple[int, ...]
    base: tuple[int, ...]
    eps: Fraction
    gamma: Fraction = Fraction(1)
    frozen: tuple[bool, ...] = ()

    @classmethod
    def from_values(cls, values: Sequence[Fraction | int]) -> "PackingAssignment":
        """Wrap arbitrary non-negative rationals (``tau/base`` with i = j = 0)."""
        fr = [Fraction(x) for x in values]
        return cls(
            tuple(x.numerator for x in fr),
            (0,) * len(fr),
            (0,) * len(fr),
            tuple(x.denominator for x in fr),
            Fraction(0),
        )

    @cached_property
    def values(self) -> tuple[Fraction, ...]:
        grow = PowerTable(1 + self.eps)
        scale = PowerTable(self.gamma)
        return tuple(
            Fraction(t, b) * grow[i] * scale[j]
            for t, i, j, b in zip(self.tau, self.i, self.j, self.base)
        )

    def value(self, v: int) -> Fraction:
        return self.values[v]

    def total(self, nodes: Iterable[int] | None = None) -> Fraction:
        if nodes is None:
            return sum(self.values, Fraction(0))
        return sum((self.values[v] for v in nodes), Fraction(0))

    def load(self, g: WeightedGraph, u: int) -> Fraction:
        """``X_u``: packing mass on the closed neighborhood of ``u``."""
        vals = self.values
        return vals[u] + sum((vals[v] for v in g.adjacency[u]), Fraction(0))

    def to_json(self) -> dict:
        from ._exact import format_fraction

        return {
            "eps": format_fraction(self.eps),
            "gamma": format_fraction(self.gamma),
            "tau": list(self.tau),
            "i": list(self.i),
            "j": list(self.j),
            "base": list(self.base),
            "frozen": list(self.frozen),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PackingAssignment":
        from ._exact import parse_fraction

        return cls(
            tuple(int(x) for x in data["tau"]),
            tuple(int(x) for x in data["i"]),
            tuple(int(x) for x in data["j"]),
            tuple(int(x) for x in data["base"]),
            parse_fraction(data["eps"]),
            parse_fraction(data.get("gamma", "1")),
            tuple(bool(x) for x in data.get("frozen", ())),
        )

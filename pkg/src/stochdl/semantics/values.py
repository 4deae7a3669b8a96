"""Valuations, choice sequences and evaluation outcomes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping

from ..syntax import TruthValue


class Status(IntEnum):
    OK = 0
    CRASH = 1  # ▽
    OUT = 2  # △


@dataclass(frozen=True)
class Valuation:
    """Finite-support map from variables to reals, or a crash/out marker.

    Missing variables are undefined (⊥). Non-finite values are treated as
    undefined and dropped.
    """

    values: Mapping[str, float] = field(default_factory=dict)
    status: Status = Status.OK

    def __post_init__(self):
        clean = {k: float(v) for k, v in dict(self.values).items() if v is not None and math.isfinite(v)}
        object.__setattr__(self, "values", clean)

    @classmethod
    def crash(cls) -> "Valuation":
        return cls({}, Status.CRASH)

    @classmethod
    def out(cls) -> "Valuation":
        return cls({}, Status.OUT)

    @property
    def ok(self) -> bool:
        return self.status == Status.OK

    def get(self, name: str) -> float:
        return self.values.get(name, math.nan)

    def set(self, name: str, value: float) -> "Valuation":
        new = dict(self.values)
        if math.isfinite(value):
            new[name] = value
        else:
            new.pop(name, None)
        return Valuation(new, self.status)

    def __hash__(self):
        return hash((frozenset(self.values.items()), self.status))

    def __str__(self) -> str:
        if self.status == Status.CRASH:
            return "▽"
        if self.status == Status.OUT:
            return "△"
        return "{" + ", ".join(f"{k}: {v!r}" for k, v in sorted(self.values.items())) + "}"


@dataclass(frozen=True)
class ChoiceSequence:
    """Co-finitely-zero bit sequence read from position ``pos`` onward."""

    bits: tuple[int, ...] = ()
    pos: int = 0

    def bit(self, i: int) -> int:
        return self.bits[i] if i < len(self.bits) else 0

    def head(self) -> int:
        return self.bit(self.pos)

    def advance(self, k: int) -> "ChoiceSequence":
        return ChoiceSequence(self.bits, self.pos + k)

    def remaining(self) -> tuple[int, ...]:
        """Explicit bits still to be read (trailing zeros implicit)."""
        rest = list(self.bits[self.pos :])
        while rest and rest[-1] == 0:
            rest.pop()
        return tuple(rest)


def nat(c: ChoiceSequence) -> int:
    """Number of leading ones from the read position."""
    n = 0
    while c.bit(c.pos + n) == 1:
        n += 1
    return n


def tail(n: int, c: ChoiceSequence) -> ChoiceSequence:
    """Drop ``n`` bits."""
    return c.advance(n)


@dataclass(frozen=True)
class TruthOutcome:
    value: TruthValue
    truncated: bool = False

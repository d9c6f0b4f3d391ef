"""Finite path prefixes and the excursion-removal projection onto lower levels.

A path at level ``N`` takes values in ``{0, ..., N}`` where 0 is an absorbing
cemetery. Infinite paths are stored as a finite prefix plus a tail flag:

* ``Tail.ABSORBED``: the path has reached 0 (or is empty and all-zero) and
  stays there forever, so every later entry is known.
* ``Tail.TRUNCATED``: nothing is known past the prefix.

Projection to level ``N`` keeps the entries that are ``<= N`` in order. It never
invents entries: on a truncated prefix the output stops at the last visit that
can be resolved from the data.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import InvalidLevel, InvalidState

MAX_LEVEL = 2**16


class Tail(enum.Enum):
    ABSORBED = "absorbed"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class PathPrefix:
    """A prefix of a path. ``level=None`` means the unbounded state space."""

    level: int | None
    entries: tuple[int, ...]
    tail: Tail = Tail.TRUNCATED

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))
        if self.level is not None and not 1 <= self.level <= MAX_LEVEL:
            raise InvalidLevel(f"level must be in [1, {MAX_LEVEL}], got {self.level}")
        hi = self.level
        seen_zero = False
        for i, e in enumerate(self.entries):
            if e < 0 or (hi is not None and e > hi):
                raise InvalidState(f"entry {e} at position {i} outside [0, {hi}]")
            if seen_zero and e != 0:
                raise InvalidState(f"path leaves the cemetery at position {i}")
            seen_zero = seen_zero or e == 0
        if self.tail is Tail.ABSORBED and self.entries and self.entries[-1] != 0:
            raise InvalidState("an absorbed tail requires the last entry to be 0")

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, i: int) -> int | None:
        """Entry ``i``, or None if it lies past a truncated prefix."""
        if i < len(self.entries):
            return self.entries[i]
        return 0 if self.tail is Tail.ABSORBED else None

    def extended(self, length: int) -> tuple[int, ...] | None:
        """The first ``length`` entries if they are all known."""
        if length <= len(self.entries):
            return self.entries[:length]
        if self.tail is Tail.ABSORBED:
            return self.entries + (0,) * (length - len(self.entries))
        return None

    def to_json(self) -> dict[str, Any]:
        return {
            "level": -1 if self.level is None else self.level,
            "entries": list(self.entries),
            "tail": self.tail.value,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "PathPrefix":
        level = data["level"]
        return cls(None if level == -1 else int(level), tuple(data["entries"]), Tail(data["tail"]))


@dataclass(frozen=True)
class VisitIndexList:
    """Positions where a path visits ``{0, ..., N}``.

    If ``absorbed`` is set, the visits continue at every position after the last
    listed one; otherwise the list ends at the prefix boundary.
    """

    indices: tuple[int, ...]
    absorbed: bool

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("visit indices must be strictly increasing")


def visit_indices(x: PathPrefix, n: int) -> VisitIndexList:
    if n < 1:
        raise InvalidLevel(f"projection level must be >= 1, got {n}")
    idx = tuple(i for i, e in enumerate(x.entries) if e <= n)
    return VisitIndexList(idx, x.tail is Tail.ABSORBED)


def project_path(x: PathPrefix, n: int) -> PathPrefix:
    """Delete every excursion above ``n``."""
    if n < 1:
        raise InvalidLevel(f"projection level must be >= 1, got {n}")
    if x.level is not None and n > x.level:
        raise InvalidLevel(f"cannot project a level-{x.level} path to level {n}")
    vis = visit_indices(x, n)
    entries = tuple(x.entries[i] for i in vis.indices)
    return PathPrefix(n, entries, x.tail)


def agree_on_resolvable(a: PathPrefix, b: PathPrefix) -> bool:
    """True iff ``a`` and ``b`` coincide wherever both are known."""
    la = len(a.entries) if a.tail is Tail.TRUNCATED else None
    lb = len(b.entries) if b.tail is Tail.TRUNCATED else None
    if la is None and lb is None:
        n = max(len(a.entries), len(b.entries))
    elif la is None:
        n = lb  # type: ignore[assignment]
    elif lb is None:
        n = la
    else:
        n = min(la, lb)
    return a.extended(n) == b.extended(n)


def check_virtual_path_prefix(xs: Sequence[PathPrefix]) -> bool:
    """Check that ``xs[k]`` (at level ``k + 1``) projects onto ``xs[k - 1]``."""
    for k, x in enumerate(xs):
        if x.level != k + 1:
            return False
    for k in range(1, len(xs)):
        if not agree_on_resolvable(project_path(xs[k], k), xs[k - 1]):
            return False
    return True


def ascending_path(n: int) -> PathPrefix:
    """Level ``n`` member of the path that climbs 1, 2, 3, ... and is then absorbed."""
    return PathPrefix(n, tuple(range(1, n + 1)) + (0,), Tail.ABSORBED)


def up_and_back_path(n: int, hold: int = 3) -> PathPrefix:
    """Level ``n`` member of the path that climbs to the top, walks back to 1 and holds.

    The top state is visited twice in a row: at level ``n`` the excursion above
    ``n`` sits between those two visits, which keeps the family coherent.
    """
    up = tuple(range(1, n + 1))
    down = tuple(range(n, 0, -1))
    return PathPrefix(n, up + down + (1,) * hold, Tail.TRUNCATED)


def descending_path(n: int, hold: int = 3) -> PathPrefix:
    """Level ``n`` member of the path that starts at the top, descends to 1 and holds."""
    return PathPrefix(n, tuple(range(n, 0, -1)) + (1,) * hold, Tail.TRUNCATED)

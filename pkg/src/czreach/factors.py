"""Factor identifiers and factor assignments.

Every dependent factor of a set carries a process-unique positive integer
identifier.  Shared identifiers across sets encode dependency: two sets that
mention the same identifier are parameterized by the same scalar.
"""

from __future__ import annotations

import itertools
import threading
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import MissingFactor

FactorId = int

_lock = threading.Lock()
_counter = itertools.count(1)


def fresh_ids(count: int) -> list[FactorId]:
    """Allocate ``count`` identifiers never handed out before in this process.

    Linearizable: concurrent callers receive disjoint ids.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    with _lock:
        return [next(_counter) for _ in range(count)]


class FactorAssignment(Mapping[FactorId, float]):
    """A mapping from factor identifiers to values in [-1, 1]."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[FactorId, float] | Iterable[tuple[FactorId, float]]):
        data = dict(entries)
        for fid, value in data.items():
            if not -1.0 <= value <= 1.0:
                raise ValueError(f"factor {fid} value {value} outside [-1, 1]")
        self._entries = data

    def __getitem__(self, fid: FactorId) -> float:
        return self._entries[fid]

    def __iter__(self) -> Iterator[FactorId]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"FactorAssignment({self._entries!r})"

    def values_for(self, ids: Iterable[FactorId]) -> np.ndarray:
        """Values for ``ids`` in order, as a float vector.

        Raises MissingFactor if any identifier is not covered.
        """
        try:
            return np.array([self._entries[i] for i in ids], dtype=float)
        except KeyError as exc:
            raise MissingFactor(f"assignment lacks factor {exc.args[0]}") from exc

    def merged_with(self, other: "FactorAssignment") -> "FactorAssignment":
        """Union of two assignments; overlapping ids must agree."""
        data = dict(self._entries)
        for fid, value in other.items():
            if fid in data and data[fid] != value:
                raise ValueError(f"conflicting values for factor {fid}")
            data[fid] = value
        return FactorAssignment(data)


def merge_assignments(fragments: Iterable[FactorAssignment | Mapping[FactorId, float]]) -> FactorAssignment:
    """Combine assignment fragments into one; overlaps must agree."""
    out = FactorAssignment({})
    for frag in fragments:
        if not isinstance(frag, FactorAssignment):
            frag = FactorAssignment(frag)
        out = out.merged_with(frag)
    return out

"""Orderings on length vectors and candidate ranking."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


class Ordering(str, enum.Enum):
    AVERAGE = "avg"
    MAJORITY = "maj"

    @classmethod
    def parse(cls, value: str | Ordering) -> Ordering:
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        for o in cls:
            if v in (o.value, o.name.lower()):
                return o
        raise ValueError(f"unknown ordering {value!r}")

    @property
    def label(self) -> str:
        return "Av" if self is Ordering.AVERAGE else "Maj"


def _matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        arr = vectors
    else:
        rows = [tuple(v) for v in vectors]
        if rows and len({len(r) for r in rows}) > 1:
            raise ValueError("length vectors have different lengths")
        arr = np.array(rows, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("need at least one length vector")
    return arr


def compare_average(u: Sequence[int], v: Sequence[int]) -> int:
    """-1, 0 or 1 as sum(u) is less than, equal to or greater than sum(v)."""
    if len(u) != len(v):
        raise ValueError(f"vector lengths differ: {len(u)} != {len(v)}")
    su, sv = sum(u), sum(v)
    return (su > sv) - (su < sv)


def majority_scores(vectors) -> np.ndarray:
    """For each vector, the number of coordinates where it attains the set-wide minimum."""
    arr = _matrix(vectors)
    return (arr == arr.min(axis=0)).sum(axis=1)


@dataclass(frozen=True)
class RankedCandidates:
    """Candidates sorted best first; ties go to the lower candidate index."""

    order: np.ndarray  # candidate indices, best first
    scores: np.ndarray  # score of each candidate, indexed by candidate
    vectors: np.ndarray  # length vectors, indexed by candidate
    ordering: Ordering

    def __len__(self) -> int:
        return len(self.order)

    @property
    def best(self) -> int:
        return int(self.order[0])

    def position(self, index: int) -> int:
        """1-based rank of candidate ``index``."""
        return int(np.flatnonzero(self.order == index)[0]) + 1

    @property
    def entries(self) -> Iterator[tuple[int, tuple[int, ...], int]]:
        for i in self.order:
            yield int(i), tuple(int(x) for x in self.vectors[i]), int(self.scores[i])


def rank_candidates(vectors, ordering: Ordering | str) -> RankedCandidates:
    ordering = Ordering.parse(ordering)
    arr = _matrix(vectors)
    if ordering is Ordering.AVERAGE:
        scores = arr.sum(axis=1)
        key = scores
    else:
        scores = majority_scores(arr)
        key = -scores
    order = np.argsort(key, kind="stable")
    return RankedCandidates(order=order, scores=scores, vectors=arr, ordering=ordering)

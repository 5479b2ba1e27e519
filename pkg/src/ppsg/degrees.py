"""Multi-index arithmetic, generalized binomial coefficients, and degree sets.

A multi-index is a plain tuple of ints of length D (the dimensionality).
Degree sets are finite collections of nonnegative multi-indices stored
together with an explicit total order that refines the componentwise
partial order; estimators and coefficient vectors index into that order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

MultiIndex = tuple[int, ...]


def binom(n: int, k: int) -> int:
    """Generalized binomial coefficient n(n-1)...(n-k+1)/k! for integer n.

    Returns 0 for k < 0.  Exact integer arithmetic for any n, including
    negative n (e.g. binom(-1, 2) == 1).
    """
    if k < 0:
        return 0
    result = 1
    for i in range(k):
        result = result * (n - i) // (i + 1)
    return result


def multi_binom(n: Sequence[int], m: Sequence[int]) -> int:
    """Product of per-dimension binomial coefficients."""
    if len(n) != len(m):
        raise ValueError(f"length mismatch: {len(n)} vs {len(m)}")
    result = 1
    for nd, md in zip(n, m):
        result *= binom(nd, md)
        if result == 0:
            return 0
    return result


def partial_leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """Componentwise partial order: a <= b in every dimension."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return all(ad <= bd for ad, bd in zip(a, b))


def _check_degree(m: Sequence[int], dim: int) -> MultiIndex:
    t = tuple(int(v) for v in m)
    if len(t) != dim:
        raise ValueError(f"degree {t} has length {len(t)}, expected {dim}")
    if any(v < 0 for v in t):
        raise ValueError(f"degree {t} has a negative entry")
    return t


@dataclass(frozen=True)
class DegreeSet:
    """An ordered set of polynomial degrees.

    ``degrees`` is stored in a total order compatible with the componentwise
    partial order: whenever m' <= m componentwise and m' != m, m' appears
    before m.  Use :func:`build_total_order` to construct one with the
    default ordering; the constructor accepts any compatible order and
    rejects incompatible ones.
    """

    degrees: tuple[MultiIndex, ...]

    def __post_init__(self) -> None:
        if not self.degrees:
            raise ValueError("degree set must be nonempty")
        dim = len(self.degrees[0])
        if dim < 1:
            raise ValueError("dimensionality must be >= 1")
        seen = set()
        cleaned = tuple(_check_degree(m, dim) for m in self.degrees)
        object.__setattr__(self, "degrees", cleaned)
        for m in cleaned:
            if m in seen:
                raise ValueError(f"duplicate degree {m}")
            seen.add(m)
        for i, mi in enumerate(cleaned):
            for mj in cleaned[i + 1 :]:
                if partial_leq(mj, mi):
                    raise ValueError(
                        f"stored order is incompatible: {mj} follows {mi}"
                    )

    @property
    def dim(self) -> int:
        return len(self.degrees[0])

    def __len__(self) -> int:
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __contains__(self, m) -> bool:
        return tuple(m) in self._positions

    @cached_property
    def _positions(self) -> dict[MultiIndex, int]:
        return {m: i for i, m in enumerate(self.degrees)}

    def position(self, m: Sequence[int]) -> int:
        """Index of degree ``m`` in the stored total order."""
        return self._positions[tuple(m)]

    def is_downward_closed(self) -> bool:
        return all(
            ell in self._positions for m in self.degrees for ell in _below(m)
        )

    def to_json(self) -> list[list[int]]:
        """JSON form: array of integer arrays in the stored total order."""
        return [list(m) for m in self.degrees]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[int]]) -> "DegreeSet":
        return build_total_order(tuple(tuple(m) for m in data))


def _below(m: MultiIndex) -> Iterable[MultiIndex]:
    """All multi-indices componentwise <= m (the box [m+1])."""
    return itertools.product(*(range(md + 1) for md in m))


def build_total_order(degrees: Iterable[Sequence[int]]) -> DegreeSet:
    """Arrange degrees in a total order compatible with the partial order.

    Repeatedly extracts a minimal element, breaking ties by smallest total
    degree |m| and then lexicographically.  Sorting by (|m|, m) realizes
    exactly that sequence, because the (|m|, m)-smallest remaining element
    is always minimal: anything strictly below it would have smaller |m|.
    """
    unique = set(tuple(int(v) for v in m) for m in degrees)
    ordered = sorted(unique, key=lambda m: (sum(m), m))
    return DegreeSet(tuple(ordered))


@dataclass(frozen=True)
class DegreeSetReport:
    window_ok: bool
    downward_closed: bool


def validate_degree_set(M: DegreeSet, N: Sequence[int]) -> DegreeSetReport:
    """Check the observation-window and downward-closure conditions.

    ``window_ok`` holds iff N >= m+1 componentwise for every degree,
    i.e. the window provides at least max-degree-plus-one samples per
    dimension.  ``downward_closed`` holds iff every degree's lower box is
    contained in the set.
    """
    N = tuple(int(v) for v in N)
    if len(N) != M.dim:
        raise ValueError(f"window length {len(N)} does not match dim {M.dim}")
    window_ok = all(
        all(Nd >= md + 1 for Nd, md in zip(N, m)) for m in M.degrees
    )
    return DegreeSetReport(window_ok=window_ok, downward_closed=M.is_downward_closed())


def downward_closure(M: DegreeSet) -> DegreeSet:
    """Smallest downward-closed degree set containing M."""
    closed = set()
    for m in M.degrees:
        closed.update(_below(m))
    return build_total_order(closed)

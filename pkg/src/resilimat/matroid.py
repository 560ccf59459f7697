"""Matroids behind a single independence-oracle interface.

Subsets are handled as ``frozenset[int]`` over a dense ground set ``0..n-1``.
All matroids are immutable once built.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import ContractError, GuardExceeded, InputError

Subset = frozenset

EXHAUSTIVE_LIMIT = 12


@dataclass(frozen=True)
class GroundSet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 0:
            raise InputError(f"ground set size must be >= 0, got {self.size}")
        if self.labels is not None and len(self.labels) != self.size:
            raise InputError("label count does not match ground set size")

    def subset(self, ids: Iterable[int]) -> frozenset[int]:
        return as_subset(ids, self.size)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    @property
    def elements(self) -> range:
        return range(self.size)


def as_subset(ids: Iterable[int], n: int) -> frozenset[int]:
    """Validate ``ids`` against a ground set of size ``n``."""
    items = list(ids)
    s = frozenset(int(i) for i in items)
    if len(s) != len(items):
        raise InputError(f"duplicate element ids in {sorted(items)}")
    for i in s:
        if not 0 <= i < n:
            raise InputError(f"element id {i} outside ground set of size {n}")
    return s


def to_mask(s: Iterable[int]) -> int:
    m = 0
    for i in s:
        m |= 1 << i
    return m


def from_mask(m: int) -> frozenset[int]:
    out = []
    i = 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return frozenset(out)


class Matroid:
    """Base class: subclasses implement ``_independent`` on validated sets."""

    kind = "abstract"

    def __init__(self, n: int):
        self.ground = GroundSet(n)

    @property
    def n(self) -> int:
        return self.ground.size

    def is_independent(self, s: Iterable[int]) -> bool:
        return self._independent(as_subset(s, self.n))

    def _independent(self, s: frozenset[int]) -> bool:
        raise NotImplementedError

    def rank(self) -> int:
        return len(greedy_basis(self))

    def __contains__(self, s) -> bool:
        return self.is_independent(s)


def greedy_basis(m: Matroid, order: Iterable[int] | None = None) -> frozenset[int]:
    """Maximal independent set built by scanning ``order`` (default: by id)."""
    basis: set[int] = set()
    for i in (range(m.n) if order is None else order):
        if m._independent(frozenset(basis | {i})):
            basis.add(i)
    return frozenset(basis)


class UniformMatroid(Matroid):
    kind = "uniform"

    def __init__(self, n: int, alpha: int):
        super().__init__(n)
        if alpha < 0:
            raise InputError(f"alpha must be >= 0, got {alpha}")
        self.alpha = int(alpha)

    def _independent(self, s):
        return len(s) <= self.alpha

    def rank(self):
        return min(self.alpha, self.n)

    def __repr__(self):
        return f"UniformMatroid(n={self.n}, alpha={self.alpha})"


class PartitionMatroid(Matroid):
    kind = "partition"

    def __init__(self, n: int, blocks: Iterable[Iterable[int]], caps: Iterable[int]):
        super().__init__(n)
        blocks = tuple(as_subset(b, n) for b in blocks)
        caps = [int(c) for c in caps]
        if len(blocks) != len(caps):
            raise InputError("need exactly one cap per block")
        seen: set[int] = set()
        for b in blocks:
            if seen & b:
                raise InputError("partition blocks overlap")
            seen |= b
        if len(seen) != n:
            raise InputError(f"partition blocks cover {len(seen)} of {n} elements")
        for k, (b, c) in enumerate(zip(blocks, caps)):
            if c < 0:
                raise InputError(f"negative cap for block {k}")
            if c > len(b):
                warnings.warn(f"cap {c} of block {k} exceeds its size {len(b)}; clamped")
                caps[k] = len(b)
        self.blocks = blocks
        self.caps = tuple(caps)
        self._block_of = np.empty(n, dtype=int)
        for k, b in enumerate(blocks):
            for i in b:
                self._block_of[i] = k

    def block_of(self, i: int) -> int:
        return int(self._block_of[i])

    def _independent(self, s):
        counts = [0] * len(self.blocks)
        for i in s:
            k = self._block_of[i]
            counts[k] += 1
            if counts[k] > self.caps[k]:
                return False
        return True

    def rank(self):
        return sum(self.caps)

    def same_partition(self, other: Matroid) -> bool:
        return isinstance(other, PartitionMatroid) and set(self.blocks) == set(other.blocks)

    def __repr__(self):
        return f"PartitionMatroid(blocks={[sorted(b) for b in self.blocks]}, caps={list(self.caps)})"


class TransversalMatroid(Matroid):
    """Partial transversals of a family of subsets, decided by bipartite matching."""

    kind = "transversal"

    def __init__(self, n: int, subsets: Iterable[Iterable[int]]):
        super().__init__(n)
        self.subsets = tuple(as_subset(x, n) for x in subsets)
        # element -> indices of the family members containing it
        self._adj = tuple(
            tuple(j for j, x in enumerate(self.subsets) if i in x) for i in range(n)
        )

    def matching_size(self, s: Iterable[int]) -> int:
        match: dict[int, int] = {}  # family index -> element

        def augment(e: int, visited: set[int]) -> bool:
            for j in self._adj[e]:
                if j in visited:
                    continue
                visited.add(j)
                if j not in match or augment(match[j], visited):
                    match[j] = e
                    return True
            return False

        return sum(augment(e, set()) for e in sorted(s))

    def _independent(self, s):
        if len(s) > len(self.subsets):
            return False
        return self.matching_size(s) == len(s)

    def rank(self):
        return self.matching_size(range(self.n))

    def __repr__(self):
        return f"TransversalMatroid(n={self.n}, subsets={[sorted(x) for x in self.subsets]})"


class RestrictedMatroid(Matroid):
    """Sets X within V minus ``pinned`` such that X together with ``pinned`` is independent."""

    kind = "restricted"

    def __init__(self, base: Matroid, pinned: Iterable[int]):
        super().__init__(base.n)
        self.base = base
        self.pinned = as_subset(pinned, base.n)
        if not base._independent(self.pinned):
            raise ContractError(f"pinned set {sorted(self.pinned)} is not independent")

    def _independent(self, s):
        if s & self.pinned:
            return False
        return self.base._independent(s | self.pinned)

    def __repr__(self):
        return f"RestrictedMatroid({self.base!r}, pinned={sorted(self.pinned)})"


class SubsetMatroid(Matroid):
    """The matroid ``base`` restricted to subsets of ``support``."""

    def __init__(self, base: Matroid, support: Iterable[int]):
        super().__init__(base.n)
        self.base = base
        self.support = as_subset(support, base.n)
        self.kind = base.kind

    @property
    def alpha(self) -> int:
        return self.base.alpha

    def _independent(self, s):
        return s <= self.support and self.base._independent(s)

    def rank(self):
        return len(greedy_basis(self, sorted(self.support)))


class OracleMatroid(Matroid):
    """Wraps an arbitrary independence predicate; no axioms are assumed."""

    kind = "oracle"

    def __init__(self, n: int, indep: Callable[[frozenset[int]], bool]):
        super().__init__(n)
        self._indep = indep

    def _independent(self, s):
        return bool(self._indep(s))


def is_independent(matroid: Matroid, s: Iterable[int]) -> bool:
    return matroid.is_independent(s)


def rank(matroid: Matroid) -> int:
    return matroid.rank()


def restrict(matroid: Matroid, pinned: Iterable[int]) -> RestrictedMatroid:
    return RestrictedMatroid(matroid, pinned)


def subset_matroid(iprime: Matroid, a: Iterable[int]) -> Matroid:
    return SubsetMatroid(iprime, a)


@dataclass
class AxiomReport:
    ok: bool
    axiom: str | None = None
    x: frozenset[int] | None = None
    z: frozenset[int] | None = None
    n_independent: int = 0

    def __bool__(self):
        return self.ok


def verify_matroid_axioms(
    n: int | GroundSet,
    indep: Matroid | Callable[[frozenset[int]], bool],
    limit: int = EXHAUSTIVE_LIMIT,
) -> AxiomReport:
    """Exhaustively check that ``indep`` defines a matroid over ``0..n-1``.

    Augmentation is checked only for pairs with ``|Z| = |X| + 1``; together
    with downward closure this implies the general exchange axiom.
    """
    if isinstance(n, GroundSet):
        n = n.size
    if n > limit:
        raise GuardExceeded(f"ground set of size {n} exceeds exhaustive limit {limit}", 2**n)
    pred = indep._independent if isinstance(indep, Matroid) else indep

    full = 1 << n
    member = np.zeros(full, dtype=bool)
    for m in range(full):
        member[m] = bool(pred(from_mask(m)))
    if not member[0]:
        return AxiomReport(False, "nonempty", frozenset(), None, 0)

    popcount = np.array([bin(m).count("1") for m in range(full)])
    for m in np.flatnonzero(member):
        m = int(m)
        for i in range(n):
            if m >> i & 1 and not member[m ^ (1 << i)]:
                return AxiomReport(False, "downward_closure", from_mask(m ^ (1 << i)), from_mask(m))

    # aug[X] = elements z outside X with X + z independent
    aug = np.zeros(full, dtype=np.int64)
    for i in range(n):
        bit = 1 << i
        idx = np.arange(full)
        without = (idx & bit) == 0
        aug[without & member & member[idx | bit]] |= bit
    for k in range(n):
        xs = np.flatnonzero(member & (popcount == k))
        zs = np.flatnonzero(member & (popcount == k + 1))
        if len(xs) == 0 or len(zs) == 0:
            continue
        bad = (zs[None, :] & aug[xs][:, None]) == 0
        if bad.any():
            r, c = np.argwhere(bad)[0]
            return AxiomReport(False, "augmentation", from_mask(int(xs[r])), from_mask(int(zs[c])))
    return AxiomReport(True, n_independent=int(member.sum()))


def independent_sets(m: Matroid, within: Iterable[int] | None = None, size: int | None = None):
    """Yield independent subsets of ``within`` (default: whole ground set)."""
    items = sorted(range(m.n) if within is None else within)
    sizes = range(len(items) + 1) if size is None else [size]
    for k in sizes:
        for combo in itertools.combinations(items, k):
            s = frozenset(combo)
            if m._independent(s):
                yield s


def maximal_independent_sets(m: Matroid, within: Iterable[int] | None = None):
    """Bases of ``m`` restricted to ``within``; all have the same size."""
    items = sorted(range(m.n) if within is None else within)
    r = len(greedy_basis(m, items))
    return independent_sets(m, items, r)


# JSON descriptors ---------------------------------------------------------


def matroid_from_dict(d: dict, n: int | None = None) -> Matroid:
    try:
        kind = d["kind"]
        if kind == "uniform":
            return UniformMatroid(int(d.get("n", n)), int(d["alpha"]))
        if kind == "partition":
            blocks = [list(b) for b in d["blocks"]]
            size = int(d.get("n", sum(len(b) for b in blocks)))
            return PartitionMatroid(size, blocks, d["caps"])
        if kind == "transversal":
            return TransversalMatroid(int(d.get("n", n)), d["subsets"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed matroid descriptor {d!r}: {exc}") from exc
    raise InputError(f"unknown matroid kind {d.get('kind')!r}")


def matroid_to_dict(m: Matroid) -> dict:
    if isinstance(m, UniformMatroid):
        return {"kind": "uniform", "n": m.n, "alpha": m.alpha}
    if isinstance(m, PartitionMatroid):
        return {"kind": "partition", "blocks": [sorted(b) for b in m.blocks], "caps": list(m.caps)}
    if isinstance(m, TransversalMatroid):
        return {"kind": "transversal", "n": m.n, "subsets": [sorted(x) for x in m.subsets]}
    raise InputError(f"no descriptor for {type(m).__name__}")

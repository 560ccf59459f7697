"""Two-phase resilient selection: a bait set followed by a greedy set."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError
from .matroid import Matroid, PartitionMatroid, SubsetMatroid, UniformMatroid
from .setfn import SetFunction


@dataclass
class SolverOutput:
    a1: frozenset[int]
    a2: frozenset[int]
    eval_count: int
    warnings: list[str] = field(default_factory=list)
    order1: tuple[int, ...] = ()
    order2: tuple[int, ...] = ()

    @property
    def a(self) -> frozenset[int]:
        return self.a1 | self.a2

    def to_dict(self) -> dict:
        return {
            "a1": sorted(self.a1),
            "a2": sorted(self.a2),
            "a": sorted(self.a),
            "eval_count": self.eval_count,
            "warnings": list(self.warnings),
        }


def evaluation_budget(n: int) -> int:
    return 2 * n * n


def guarantees_apply(i: Matroid, iprime: Matroid) -> bool:
    """Removal constraint is uniform, or a partition sharing i's blocks."""
    base = iprime.base if isinstance(iprime, SubsetMatroid) else iprime
    if isinstance(base, UniformMatroid):
        return True
    return isinstance(i, PartitionMatroid) and i.same_partition(base)


def solve_resilient(f: SetFunction, i: Matroid, iprime: Matroid, lazy: bool = False) -> SolverOutput:
    """Select A = A1 ∪ A2, independent in ``i``, to withstand removals in ``iprime``.

    Phase 1 scans elements by decreasing singleton value (ties: lowest id) and
    keeps those that stay independent in both matroids. Phase 2 runs the
    matroid greedy on the remaining elements, with A1 pinned.

    ``lazy`` enables lazy evaluation in phase 2; it is ignored unless ``f`` is
    known to be submodular.
    """
    n = f.n
    if i.n != n or iprime.n != n:
        raise InputError(f"ground sets differ: f has {n}, I has {i.n}, I' has {iprime.n}")
    warns = []
    if not guarantees_apply(i, iprime):
        warns.append("removal matroid is neither uniform nor same-partition: guarantees void")
    start = f.eval_count

    singles = [f.evaluate({v}) for v in range(n)]
    a1: set[int] = set()
    order1 = []
    for v in sorted(range(n), key=lambda v: (-singles[v], v)):
        cand = frozenset(a1 | {v})
        if i._independent(cand) and iprime._independent(cand):
            a1.add(v)
            order1.append(v)
    a1 = frozenset(a1)

    if lazy and f.submodular:
        a2, order2 = _lazy_phase2(f, i, a1)
    else:
        a2, order2 = _greedy_phase2(f, i, a1)
    return SolverOutput(a1, a2, f.eval_count - start, warns, tuple(order1), tuple(order2))


def _greedy_phase2(f: SetFunction, i: Matroid, a1: frozenset[int]):
    remaining = [v for v in range(f.n) if v not in a1]
    a2: frozenset[int] = frozenset()
    order = []
    values: dict[int, float] = {}
    while remaining:
        if not values:
            values = {y: f.evaluate(a2 | {y}) for y in remaining}
        # max value, lowest id on ties
        x = min(remaining, key=lambda y: (-values[y], y))
        remaining.remove(x)
        if i._independent(a1 | a2 | {x}):
            a2 = a2 | {x}
            order.append(x)
            values = {}
        else:
            del values[x]
    return a2, order


def _lazy_phase2(f: SetFunction, i: Matroid, a1: frozenset[int]):
    import heapq

    a2: frozenset[int] = frozenset()
    order = []
    base = 0.0
    heap = [(-f.evaluate({y}), y, 0) for y in range(f.n) if y not in a1]
    heapq.heapify(heap)
    stamp = 0
    while heap:
        neg, y, t = heapq.heappop(heap)
        if t != stamp:
            gain = f.evaluate(a2 | {y}) - base
            heapq.heappush(heap, (-gain, y, stamp))
            continue
        if i._independent(a1 | a2 | {y}):
            a2 = a2 | {y}
            order.append(y)
            base = base - neg
            stamp += 1
    return a2, order

"""Brute-force ground truth for small instances.

Everything here enumerates; the guards keep calls at desk scale. These
functions are the reference that the solver is measured against, so they
share no code with it beyond the matroid and set-function primitives.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import GuardExceeded
from .matroid import Matroid, SubsetMatroid, UniformMatroid, as_subset, maximal_independent_sets
from .setfn import Memo, SetFunction

REMOVAL_GUARD = 10**6
OPTIMAL_GUARD = 12


def _env_guard(default: int) -> int:
    """Optimal-oracle size limit, overridable through the environment."""
    raw = os.environ.get("RESILIMAT_ORACLE_GUARD")
    return int(raw) if raw else default


@dataclass
class OracleResult:
    argset: frozenset[int]
    value: float
    explored: int
    removal: frozenset[int] | None = None


def _lex_key(s: frozenset[int]):
    return (len(s), tuple(sorted(s)))


def _uniform_cap(iprime: Matroid) -> int | None:
    base = iprime.base if isinstance(iprime, SubsetMatroid) else iprime
    return base.alpha if isinstance(base, UniformMatroid) else None


def _removal_candidates(a: frozenset[int], iprime: Matroid, fixed_size: bool):
    items = sorted(a)
    beta = _uniform_cap(iprime)
    if beta is not None:
        sizes = [min(beta, len(items))] if fixed_size else range(min(beta, len(items)) + 1)
        for k in sizes:
            for c in itertools.combinations(items, k):
                yield frozenset(c)
        return
    for k in range(len(items) + 1):
        for c in itertools.combinations(items, k):
            b = frozenset(c)
            if iprime._independent(b):
                yield b


def _removal_count(a: frozenset[int], iprime: Matroid, fixed_size: bool) -> int:
    beta = _uniform_cap(iprime)
    m = len(a)
    if beta is None:
        return 2**m
    if fixed_size:
        return math.comb(m, min(beta, m))
    return sum(math.comb(m, k) for k in range(min(beta, m) + 1))


def worst_case_removal(
    f: SetFunction | Memo,
    a: Iterable[int],
    iprime: Matroid,
    *,
    fixed_size: bool | None = None,
    guard: int | None = None,
) -> OracleResult:
    """Removal B within ``a``, independent in ``iprime``, minimizing f(a - B).

    With a uniform removal matroid and monotone ``f``, only removals of size
    exactly min(beta, |a|) need to be enumerated; ``fixed_size`` defaults to
    that shortcut whenever ``f`` is known monotone. Ties go to the
    lexicographically smallest removal.
    """
    fn = f if isinstance(f, Memo) else Memo(f)
    a = as_subset(a, fn.n)
    if fixed_size is None:
        fixed_size = bool(fn.f.monotone)
    guard = REMOVAL_GUARD if guard is None else guard
    count = _removal_count(a, iprime, fixed_size)
    if count > guard:
        raise GuardExceeded(f"{count} candidate removals exceed guard {guard}", count)
    best, best_b, explored = math.inf, None, 0
    for b in _removal_candidates(a, iprime, fixed_size):
        explored += 1
        v = fn(a - b)
        if v < best or (v == best and _lex_key(b) < _lex_key(best_b)):
            best, best_b = v, b
    return OracleResult(best_b, best, explored, best_b)


def resilient_value(f, a, iprime, **kw) -> float:
    return worst_case_removal(f, a, iprime, **kw).value


def optimal_resilient(
    f: SetFunction | Memo,
    i: Matroid,
    iprime: Matroid,
    *,
    maximal_only: bool | None = None,
    guard: int | None = None,
    removal_guard: int | None = None,
) -> OracleResult:
    """Exact max-min: the best A in ``i`` against its worst removal in ``iprime``.

    For monotone f a superset never does worse, so by default only the bases
    of ``i`` are enumerated when f is known monotone.
    """
    fn = f if isinstance(f, Memo) else Memo(f)
    guard = _env_guard(OPTIMAL_GUARD) if guard is None else guard
    if fn.n > guard:
        raise GuardExceeded(f"|V|={fn.n} exceeds optimal-oracle guard {guard}", 2**fn.n)
    if maximal_only is None:
        maximal_only = bool(fn.f.monotone)
    if maximal_only:
        cands = maximal_independent_sets(i)
    else:
        cands = (
            frozenset(c)
            for k in range(fn.n + 1)
            for c in itertools.combinations(range(fn.n), k)
            if i._independent(frozenset(c))
        )
    best, best_a, best_b, explored = -math.inf, None, None, 0
    for a in cands:
        explored += 1
        r = worst_case_removal(fn, a, iprime, guard=removal_guard)
        if r.value > best or (r.value == best and _lex_key(a) < _lex_key(best_a)):
            best, best_a, best_b = r.value, a, r.argset
    return OracleResult(best_a, best, explored, best_b)


def greedy_nonresilient(f: SetFunction, i: Matroid) -> frozenset[int]:
    """Classical matroid greedy: add the feasible element with the best f(A + y)."""
    a: frozenset[int] = frozenset()
    while True:
        best, x = -math.inf, None
        for y in range(f.n):
            if y in a or not i._independent(a | {y}):
                continue
            v = f.evaluate(a | {y})
            if v > best:
                best, x = v, y
        if x is None:
            return a
        a = a | {x}


def random_feasible(i: Matroid, seed) -> frozenset[int]:
    """Scan a seeded shuffle of the ground set, keeping what stays independent."""
    a: set[int] = set()
    for v in np.random.default_rng(seed).permutation(i.n).tolist():
        if i._independent(frozenset(a | {v})):
            a.add(v)
    return frozenset(a)


def best_extension_value(f: SetFunction | Memo, i: Matroid, pinned: Iterable[int]) -> float:
    """max f(X) over X outside ``pinned`` with X plus ``pinned`` independent in ``i``."""
    fn = f if isinstance(f, Memo) else Memo(f)
    pinned = frozenset(pinned)
    rest = [v for v in range(fn.n) if v not in pinned]
    best = 0.0
    for k in range(len(rest) + 1):
        for c in itertools.combinations(rest, k):
            x = frozenset(c)
            if i._independent(x | pinned):
                best = max(best, fn(x))
    return best

"""Set-function oracles, built-in objective families and curvature."""

from __future__ import annotations

import itertools
import math
import threading
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, GuardExceeded, InputError, UndefinedCurvatureError
from .matroid import GroundSet, as_subset

TOL = 1e-9
EXHAUSTIVE_LIMIT = 10
MEMO_LIMIT = 2**20


class SetFunction:
    """Normalized evaluation oracle with a thread-safe call counter.

    The raw evaluator is shifted so that the reported value of the empty set
    is exactly zero. ``monotone`` and ``submodular`` are known structural
    facts (``None`` when unknown); the exhaustive checkers do not trust them.
    """

    def __init__(
        self,
        n: int,
        evaluator: Callable[[frozenset[int]], float],
        *,
        monotone: bool | None = None,
        submodular: bool | None = None,
        name: str = "f",
    ):
        self.ground = GroundSet(n)
        self.evaluator = evaluator
        self.monotone = monotone
        self.submodular = submodular
        self.name = name
        self.offset = float(evaluator(frozenset()))
        self._count = 0
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.ground.size

    @property
    def eval_count(self) -> int:
        return self._count

    def reset_count(self) -> None:
        with self._lock:
            self._count = 0

    def __call__(self, s: Iterable[int]) -> float:
        return self.evaluate(s)

    def evaluate(self, s: Iterable[int]) -> float:
        s = as_subset(s, self.n)
        raw = self.evaluator(s)
        with self._lock:
            self._count += 1
        if not s:
            return 0.0
        val = float(raw) - self.offset
        if math.isnan(val):
            raise ContractError(f"{self.name} returned NaN on {sorted(s)}")
        if val < -TOL:
            raise ContractError(f"{self.name}({sorted(s)}) = {val} < 0 after normalization")
        return max(val, 0.0)

    def marginal(self, x: Iterable[int], y: Iterable[int]) -> float:
        x, y = frozenset(x), frozenset(y)
        return self.evaluate(x | y) - self.evaluate(y)

    def __repr__(self):
        return f"SetFunction({self.name}, n={self.n})"


class Memo:
    """Per-operation cache in front of a SetFunction, keyed by subset."""

    def __init__(self, f: SetFunction, limit: int = MEMO_LIMIT):
        self.f = f
        self.limit = limit
        self._cache: dict[frozenset[int], float] = {}

    def __call__(self, s: Iterable[int]) -> float:
        s = frozenset(s)
        v = self._cache.get(s)
        if v is None:
            v = self.f.evaluate(s)
            if len(self._cache) < self.limit:
                self._cache[s] = v
        return v

    @property
    def n(self) -> int:
        return self.f.n


def evaluate(f: SetFunction, s: Iterable[int]) -> float:
    return f.evaluate(s)


def marginal(f: SetFunction, x: Iterable[int], y: Iterable[int]) -> float:
    return f.marginal(x, y)


def _all_subsets(items: Sequence[int]):
    for k in range(len(items) + 1):
        for c in itertools.combinations(items, k):
            yield frozenset(c)


def _guard(f: SetFunction, limit: int):
    if f.n > limit:
        raise GuardExceeded(f"|V|={f.n} exceeds exhaustive limit {limit}", 2**f.n)


# curvature ----------------------------------------------------------------


@dataclass
class CurvatureReport:
    kappa: float | None = None
    c_total: float | None = None
    mode: str = "exact"
    element: int | None = None
    a: frozenset[int] | None = None
    b: frozenset[int] | None = None


def curvature_kappa(f: SetFunction) -> CurvatureReport:
    """1 - min_v [f(V) - f(V - v)] / f(v), skipping elements with f(v) = 0."""
    V = frozenset(range(f.n))
    full = f.evaluate(V)
    best, arg = math.inf, None
    zero = []
    for v in range(f.n):
        drop = full - f.evaluate(V - {v})
        single = f.evaluate({v})
        if single == 0:
            zero.append(v)
            continue
        r = drop / single
        if r < best:
            best, arg = r, v
    if arg is None:
        raise UndefinedCurvatureError("all singleton values are zero")
    if zero:
        warnings.warn(f"elements {zero} have zero singleton value; excluded from curvature")
    kappa = min(max(1.0 - best, 0.0), 1.0)
    return CurvatureReport(kappa=kappa, element=arg, a=V - {arg}, b=frozenset())


def total_curvature_exact(f: SetFunction, limit: int = EXHAUSTIVE_LIMIT) -> CurvatureReport:
    """Total curvature by exhaustive enumeration.

    For fixed v the minimum ratio over (A, B) is min_A m_v(A) / max_B m_v(B),
    so each element needs one pass over the subsets of V - v. Pairs with zero
    denominator are skipped; an element whose marginals are all zero
    contributes nothing. A negative marginal means f is not monotone, for
    which total curvature is undefined.
    """
    _guard(f, limit)
    memo = Memo(f)
    best, wit = math.inf, None
    for v in range(f.n):
        rest = [i for i in range(f.n) if i != v]
        lo, lo_set, hi, hi_set = math.inf, None, -math.inf, None
        for s in _all_subsets(rest):
            m = memo(s | {v}) - memo(s)
            if m < -TOL:
                raise ContractError(f"total curvature needs a monotone f: f({sorted(s | {v})}) < f({sorted(s)})")
            if m < lo:
                lo, lo_set = m, s
            if m > hi:
                hi, hi_set = m, s
        if hi <= 0:
            continue
        r = lo / hi
        if r < best:
            best, wit = r, (v, lo_set, hi_set)
    if wit is None:
        raise UndefinedCurvatureError("all marginals are zero")
    c = min(max(1.0 - best, 0.0), 1.0)
    return CurvatureReport(c_total=c, element=wit[0], a=wit[1], b=wit[2])


# structural checks ----------------------------------------------------------


@dataclass
class CheckResult:
    ok: bool
    a: frozenset[int] | None = None
    a_prime: frozenset[int] | None = None
    v: int | None = None

    def __bool__(self):
        return self.ok


def check_monotone(f: SetFunction, limit: int = EXHAUSTIVE_LIMIT, tol: float = TOL) -> CheckResult:
    """Exhaustive: f(A) <= f(A + v) for every A and v outside A."""
    _guard(f, limit)
    memo = Memo(f)
    for a in _all_subsets(range(f.n)):
        for v in range(f.n):
            if v not in a and memo(a | {v}) < memo(a) - tol:
                return CheckResult(False, a, a | {v}, v)
    return CheckResult(True)


def check_submodular(f: SetFunction, limit: int = EXHAUSTIVE_LIMIT, tol: float = TOL) -> CheckResult:
    """Exhaustive diminishing-returns check over A ⊆ A' and v outside A'."""
    _guard(f, limit)
    memo = Memo(f)
    subsets = list(_all_subsets(range(f.n)))
    for a in subsets:
        for ap in subsets:
            if not a <= ap:
                continue
            for v in range(f.n):
                if v in ap:
                    continue
                if memo(a | {v}) - memo(a) < memo(ap | {v}) - memo(ap) - tol:
                    return CheckResult(False, a, ap, v)
    return CheckResult(True)


# built-in families ----------------------------------------------------------


def make_modular(weights: Sequence[float]) -> SetFunction:
    w = np.asarray(weights, dtype=float)
    if (w < 0).any():
        raise InputError("modular weights must be non-negative")
    wl = w.tolist()
    return SetFunction(
        len(wl), lambda s: math.fsum(wl[i] for i in s), monotone=True, submodular=True, name="modular"
    )


def make_coverage(sets: Sequence[Iterable], weights: dict | None = None) -> SetFunction:
    """f(S) = (weighted) size of the union of the items covered by S."""
    covers = [frozenset(x) for x in sets]
    if weights is None:
        val = lambda s: float(len(frozenset().union(*(covers[i] for i in s))))
    else:
        if any(w < 0 for w in weights.values()):
            raise InputError("coverage weights must be non-negative")
        val = lambda s: math.fsum(weights.get(u, 0.0) for u in frozenset().union(*(covers[i] for i in s)))
    return SetFunction(len(covers), val, monotone=True, submodular=True, name="coverage")


def _check_psd(m: np.ndarray, what: str, strict: bool = False):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{what} must be square")
    if not np.allclose(m, m.T, atol=1e-10):
        raise InputError(f"{what} must be symmetric")
    lo = np.linalg.eigvalsh(m).min()
    if lo < (1e-12 if strict else -1e-10):
        raise InputError(f"{what} is not positive {'definite' if strict else 'semi-definite'}")


def make_logdet(matrices: Sequence, base=None) -> SetFunction:
    """f(S) = logdet(base + sum_{i in S} M_i) - logdet(base)."""
    mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in matrices]
    if not mats:
        raise InputError("need at least one matrix")
    d = mats[0].shape[0]
    base = np.eye(d) if base is None else np.atleast_2d(np.asarray(base, dtype=float))
    _check_psd(base, "base", strict=True)
    for k, m in enumerate(mats):
        if m.shape != (d, d):
            raise InputError(f"matrix {k} has shape {m.shape}, expected {(d, d)}")
        _check_psd(m, f"matrix {k}")

    def val(s):
        tot = base.copy()
        for i in s:
            tot += mats[i]
        return np.linalg.slogdet(tot)[1]

    return SetFunction(len(mats), val, monotone=True, submodular=True, name="logdet")


CONCAVE = {
    "sqrt": math.sqrt,
    "log1p": math.log1p,
    "min1": lambda x: min(x, 1.0),
}


def make_concave_over_modular(weights: Sequence[float], concave: str | Callable = "sqrt") -> SetFunction:
    """f(S) = phi(sum of weights in S) for a non-decreasing concave phi."""
    w = [float(x) for x in weights]
    if any(x < 0 for x in w):
        raise InputError("weights must be non-negative")
    phi = CONCAVE[concave] if isinstance(concave, str) else concave
    return SetFunction(
        len(w), lambda s: phi(math.fsum(w[i] for i in s)), monotone=True, submodular=True, name="concave"
    )


def make_power(f: SetFunction, p: float) -> SetFunction:
    """f(S)^p; monotone for p > 0, generally not submodular for p > 1."""
    if p <= 0:
        raise InputError("power must be positive")
    return SetFunction(
        f.n,
        lambda s: max(f.evaluator(s) - f.offset, 0.0) ** p if s else 0.0,
        monotone=f.monotone,
        submodular=f.submodular if p <= 1 else None,
        name=f"{f.name}^{p:g}",
    )


def from_dict(d: dict) -> SetFunction:
    try:
        kind = d["kind"]
        if kind == "modular":
            return make_modular(d["weights"])
        if kind == "coverage":
            return make_coverage(d["sets"], d.get("weights"))
        if kind == "logdet":
            dim = int(d["dim"])
            mats = [np.asarray(m, dtype=float).reshape(dim, dim) for m in d["matrices"]]
            base = d.get("base", "identity")
            base = np.eye(dim) if base == "identity" else np.asarray(base, dtype=float).reshape(dim, dim)
            return make_logdet(mats, base)
        if kind == "concave":
            return make_concave_over_modular(d["weights"], d.get("concave", "sqrt"))
        if kind == "power":
            return make_power(from_dict(d["base"]), float(d["p"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed objective descriptor: {exc}") from exc
    raise InputError(f"unknown objective kind {d.get('kind')!r}")

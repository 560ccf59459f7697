import itertools
import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilimat.errors import ContractError, GuardExceeded, InputError, UndefinedCurvatureError
from resilimat.setfn import (
    SetFunction,
    check_monotone,
    check_submodular,
    curvature_kappa,
    from_dict,
    make_concave_over_modular,
    make_coverage,
    make_logdet,
    make_modular,
    make_power,
    total_curvature_exact,
)

from instances import random_coverage, random_logdet, random_nonsubmodular, random_submodular

COVER = make_coverage([{"u1", "u2"}, {"u2", "u3"}])


def subsets(items):
    items = list(items)
    for k in range(len(items) + 1):
        for c in itertools.combinations(items, k):
            yield frozenset(c)


def naive_total_curvature(f):
    """Direct min over v, A, B of the marginal ratio (no factorization)."""
    best = math.inf
    for v in range(f.n):
        rest = [i for i in range(f.n) if i != v]
        for a in subsets(rest):
            num = f(a | {v}) - f(a)
            for b in subsets(rest):
                den = f(b | {v}) - f(b)
                if den <= 0:
                    continue
                best = min(best, num / den)
    return 1 - best


def test_evaluate_examples():
    f = make_modular([3, 2, 1])
    assert f({}) == 0
    assert f({0, 2}) == 4
    assert COVER({0, 1}) == 3


def test_marginal_examples():
    f = make_modular([3, 2, 1])
    assert f.marginal(set(), {1}) == 0
    assert f.marginal({0}, {1}) == 3
    assert COVER.marginal({1}, {0}) == 1


def test_normalization_offset():
    f = SetFunction(2, lambda s: 5.0 + len(s))
    assert f(set()) == 0.0
    assert f({0, 1}) == 2.0


def test_eval_counter_counts_every_call():
    f = make_modular([1, 2, 3])
    f.reset_count()
    f({0})
    f({0})
    f(set())
    assert f.eval_count == 3


def test_eval_counter_thread_safe():
    f = make_modular([1.0] * 4)
    f.reset_count()

    def work():
        for _ in range(500):
            f({1, 2})

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert f.eval_count == 2000


def test_contract_violations():
    f = SetFunction(2, lambda s: -float(len(s)))
    with pytest.raises(ContractError):
        f({0})
    g = SetFunction(2, lambda s: float("nan") if s else 0.0)
    with pytest.raises(ContractError):
        g({0})
    with pytest.raises(InputError):
        f({7})


def test_curvature_examples():
    assert curvature_kappa(make_modular([1, 2, 3])).kappa == pytest.approx(0, abs=1e-15)
    step = make_concave_over_modular([1, 1], "min1")
    assert curvature_kappa(step).kappa == 1
    root = make_concave_over_modular([1, 1], "sqrt")
    assert curvature_kappa(root).kappa == pytest.approx(1 - (math.sqrt(2) - 1), abs=1e-15)
    assert curvature_kappa(root).kappa == pytest.approx(0.5858, abs=1e-4)


def test_curvature_eval_count():
    f = random_coverage(np.random.default_rng(1), 7)
    f.reset_count()
    curvature_kappa(f)
    assert f.eval_count == 2 * 7 + 1


def test_curvature_zero_singletons():
    f = make_modular([0, 2])
    with pytest.warns(UserWarning):
        assert curvature_kappa(f).kappa == 0
    with pytest.raises(UndefinedCurvatureError):
        curvature_kappa(make_modular([0, 0]))


def test_total_curvature_examples():
    assert total_curvature_exact(make_modular([1, 2, 3])).c_total == pytest.approx(0, abs=1e-15)
    assert total_curvature_exact(make_concave_over_modular([1, 1], "min1")).c_total == 1
    with pytest.raises(GuardExceeded):
        total_curvature_exact(make_modular([1] * 11))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_total_curvature_matches_naive(seed, n):
    rng = np.random.default_rng(seed)
    f = random_nonsubmodular(rng, n) if rng.integers(2) else random_submodular(rng, n)
    assert total_curvature_exact(f).c_total == pytest.approx(naive_total_curvature(f), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_curvatures_coincide_for_submodular(seed, n):
    f = random_submodular(np.random.default_rng(seed), n)
    k = curvature_kappa(f).kappa
    c = total_curvature_exact(f).c_total
    assert 0 <= k <= 1 and 0 <= c <= 1
    assert abs(k - c) <= 1e-12


def test_structure_checks():
    f = make_modular([1, 2, 3])
    assert check_monotone(f) and check_submodular(f)
    sq = SetFunction(3, lambda s: float(len(s)) ** 2)
    assert check_monotone(sq)
    bad = check_submodular(sq)
    assert not bad
    assert (bad.a, bad.a_prime, bad.v) == (frozenset(), frozenset({0}), 1)
    assert check_monotone(COVER) and check_submodular(COVER)
    dec = SetFunction(2, lambda s: 1.0 if s == {0} else 0.0)
    assert not check_monotone(dec)


def test_builtin_families():
    assert make_modular([1, 1])({0, 1}) == 2
    assert make_logdet([np.array([[1.0]])], np.eye(1))({0}) == pytest.approx(math.log(2), abs=1e-15)
    assert make_concave_over_modular([4], "sqrt")({0}) == 2
    with pytest.raises(InputError):
        make_modular([-1, 2])
    with pytest.raises(InputError):
        make_logdet([np.array([[1.0, 0], [0, -1.0]])])
    with pytest.raises(InputError):
        make_logdet([np.eye(2)], base=np.zeros((2, 2)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_builtins_monotone_submodular(seed, n):
    rng = np.random.default_rng(seed)
    for f in (random_coverage(rng, n), random_logdet(rng, n), make_concave_over_modular(rng.uniform(0, 3, n), "log1p")):
        assert f(set()) == 0
        assert check_monotone(f)
        assert check_submodular(f)


def test_power_is_monotone_not_submodular():
    f = make_power(make_modular([1, 1, 1]), 1.5)
    assert check_monotone(f)
    assert not check_submodular(f)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_curvature_lower_bound_on_sums(seed, n):
    # f(A) >= (1 - kappa) * sum of singleton values
    f = random_submodular(np.random.default_rng(seed), n)
    k = curvature_kappa(f).kappa
    for a in subsets(range(n)):
        assert f(a) >= (1 - k) * sum(f({x}) for x in a) - 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_total_curvature_inequalities(seed, n):
    rng = np.random.default_rng(seed)
    f = random_nonsubmodular(rng, n)
    c = total_curvature_exact(f).c_total
    items = list(range(n))
    for a in subsets(items):
        rest = [i for i in items if i not in a]
        for b in subsets(rest):
            assert f(a | b) >= (1 - c) * (f(a) + f(b)) - 1e-9
            assert f(a) + sum(f({x}) for x in b) >= (1 - c) * f(a | b) - 1e-9


def test_descriptors():
    assert from_dict({"kind": "modular", "weights": [3, 2, 1]})({0, 2}) == 4
    assert from_dict({"kind": "coverage", "sets": [[1, 2], [2, 3]]})({0, 1}) == 3
    f = from_dict({"kind": "logdet", "dim": 1, "matrices": [[1.0]], "base": "identity"})
    assert f({0}) == pytest.approx(math.log(2))
    with pytest.raises(InputError):
        from_dict({"kind": "mystery"})
    with pytest.raises(InputError):
        from_dict({"kind": "modular"})


def test_total_curvature_rejects_non_monotone():
    # f({0}) = 1, f({0,1}) = 0.5: adding 1 lowers the value
    table = {frozenset(): 0.0, frozenset({0}): 1.0, frozenset({1}): 1.0, frozenset({0, 1}): 0.5}
    f = SetFunction(2, lambda s: table[frozenset(s)], monotone=False, submodular=True)
    with pytest.raises(ContractError):
        total_curvature_exact(f)

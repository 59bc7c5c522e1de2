import numpy as np
import pytest
from hypothesis import given, strategies as st

from threshgraph.core import EdgeSet
from threshgraph.metrics import Confusion, confusion, f1, f1_score, sign_consistency, tuning_share


def E(p, pairs):
    return EdgeSet.from_pairs(p, pairs)


def test_confusion_examples():
    t = E(4, [(0, 1), (1, 2), (2, 3)])
    assert confusion(t, t) == Confusion(3, 0, 0, 3)
    assert confusion(E(4, []), t)[:3] == (0, 0, 3)
    assert confusion(E(3, [(0, 1), (1, 2)]), E(3, [(0, 1)])) == Confusion(1, 1, 0, 1)
    with pytest.raises(ValueError):
        confusion(E(3, []), E(4, []))


def test_f1_examples():
    assert f1(Confusion(3, 0, 0, 0)) == 1.0
    assert f1(Confusion(1, 1, 1, 0)) == 0.5
    assert f1(Confusion(0, 5, 2, 0)) == 0.0
    assert f1(Confusion(0, 0, 0, 6)) == 1.0


def test_sign_consistency_examples():
    t = np.array([[2.0, -0.5, 0.0], [-0.5, 2.0, 0.3], [0.0, 0.3, 2.0]])
    assert sign_consistency(t, t)
    flipped = t.copy()
    flipped[0, 1] = flipped[1, 0] = 0.5
    assert not sign_consistency(flipped, t)
    assert sign_consistency(0.5 * t, t)
    noisy = t.copy()
    noisy[0, 2] = noisy[2, 0] = 1e-4
    assert not sign_consistency(noisy, t)
    assert sign_consistency(noisy, t, tol=1e-3)
    with pytest.raises(ValueError):
        sign_consistency(np.eye(2), np.eye(3))


def test_tuning_share_examples():
    path = E(4, [(0, 1), (1, 2), (2, 3)])
    assert tuning_share(path, ["A"] * 4) == 1.0
    assert tuning_share(path, ["A", "B", "A", "B"]) == 0.0
    four = E(5, [(0, 1), (2, 3), (0, 4), (1, 3)])
    assert tuning_share(four, ["A", "A", "B", "B", "C"]) == 0.5
    assert tuning_share(E(4, []), ["A"] * 4) is None
    with pytest.raises(ValueError):
        tuning_share(path, ["A"] * 3)


pairs_st = st.integers(3, 9).flatmap(
    lambda p: st.tuples(
        st.just(p),
        st.sets(st.tuples(st.integers(0, p - 1), st.integers(0, p - 1)).filter(lambda t: t[0] != t[1])),
        st.sets(st.tuples(st.integers(0, p - 1), st.integers(0, p - 1)).filter(lambda t: t[0] != t[1])),
        st.permutations(list(range(p))),
    ))


@given(pairs_st)
def test_metric_properties(args):
    p, a, b, perm = args
    ea, eb = E(p, a), E(p, b)
    c = confusion(ea, eb)
    assert sum(c) == p * (p - 1) // 2
    assert 0.0 <= f1(c) <= 1.0
    assert f1_score(ea, eb) == f1_score(eb, ea)
    ra = E(p, [(perm[i], perm[j]) for i, j in ea.edges])
    rb = E(p, [(perm[i], perm[j]) for i, j in eb.edges])
    assert confusion(ra, rb) == c

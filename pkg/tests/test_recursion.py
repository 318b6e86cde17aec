import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permmap.recursion import (ConstructionError, ExtendedMapping, IneligibleError, certify_base,
                               extend_once, extend_to, last_symbol_violations)
from permmap.tables import MappingTable, builtin_table
from permmap.verify import Exhaustive, VerificationJob, verify

from conftest import hd, words


def oracle_extend(f, base_n, x):
    """Straight-line evaluation of one extension step, one word at a time."""
    if len(x) == base_n:
        return list(f(x))
    prefix, t = x[:-1], x[-1]
    phi = oracle_extend(f, base_n, prefix)
    n = len(prefix)
    width = len(phi)
    big = width + 1
    pivot = width - 4
    if t == 0:
        return phi + [big]
    if t == 1:
        r = phi.index(pivot)
        g = list(phi)
        g[r] = big
        return g + [pivot]
    # position (1-based) whose value moves to the end
    if n % 2 == 1 or prefix[-1] < 2:
        pos = width
    else:
        pos = width - 1
    g = list(phi)
    moved = g[pos - 1]
    g[pos - 1] = big
    return g + [moved]


def test_extension_examples(F):
    g = extend_once(F)
    assert g((0, 0, 0, 0)) == (1, 2, 3, 4, 5, 6)
    assert g((0, 0, 0, 1)) == (6, 2, 3, 4, 5, 1)
    assert g((0, 0, 0, 2)) == (1, 2, 3, 4, 6, 5)


@pytest.mark.parametrize("target", [4, 5, 6, 7])
def test_matches_oracle_exhaustively(F, target):
    g = extend_to(F, target)
    out = g.outputs()
    for i, x in enumerate(words(target)):
        assert out[i].tolist() == oracle_extend(F, 3, x), x


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=12, max_size=12))
def test_matches_oracle_at_length_12(x):
    F = builtin_table("F")
    g = extend_to(F, 12)
    assert list(g(x)) == oracle_extend(F, 3, x)


def test_names_and_root(F):
    g = extend_to(F, 6)
    assert g.name == "F_6" and (g.n, g.k, g.length) == (6, 2, 8)
    assert g.root is F
    assert extend_to(F, 3) is F
    with pytest.raises(ValueError):
        extend_to(F, 2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=4, max_size=9))
def test_image_is_permutation(x):
    g = extend_to(builtin_table("F"), len(x))
    p = g(x)
    assert sorted(p) == list(range(1, len(x) + 3))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=3, max_size=9))
def test_prefix_image_changes_in_at_most_one_place(x):
    F = builtin_table("F")
    g = extend_once(extend_to(F, len(x)))
    phi = list(extend_to(F, len(x))(x))
    for t in range(3):
        head = list(g(x + [t]))[:-1]
        changed = [i for i, (a, b) in enumerate(zip(head, phi)) if a != b]
        assert len(changed) <= 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=3, max_size=9))
def test_three_children_pairwise_apart(x):
    g = extend_to(builtin_table("F"), len(x) + 1)
    kids = [g(x + [t]) for t in range(3)]
    for i in range(3):
        for j in range(i + 1, 3):
            assert hd(kids[i], kids[j]) >= 2


def test_chain_keeps_distance_increase(F):
    for target in range(4, 8):
        report = verify(VerificationJob(extend_to(F, target), "increase", Exhaustive()), workers=1)
        assert report.passed, (target, report.violations[:2])


def test_last_symbol_exclusion_on_chain(F):
    counts = {n: len(last_symbol_violations(extend_to(F, n))) for n in range(3, 10)}
    for n in (3, 5, 7, 9):
        assert counts[n] == 0
    # the even levels are never used as bases and do break the exclusion
    assert counts[4] == 9


def test_certify_odd_base(F):
    cert = certify_base(F, "increase")
    assert (cert.m, cert.k, cert.mode) == (3, 2, "increase")
    assert cert.excluded_last_symbols == {1, 2}
    assert certify_base(extend_to(F, 5)).m == 5


def test_certify_rejects_even_base(F):
    with pytest.raises(IneligibleError, match="even"):
        certify_base(extend_to(F, 4))


def test_certify_reports_witnesses(F):
    # swapping the values 1 and 5 keeps every distance but breaks the exclusion
    out = F.outputs().copy()
    ones, fives = out == 1, out == 5
    out[ones], out[fives] = 5, 1
    bad = MappingTable(3, 2, out, name="bad")
    with pytest.raises(IneligibleError) as err:
        certify_base(bad)
    expected = int((F.outputs()[:, -1] == 5).sum())
    assert len(err.value.witnesses) == expected > 0
    assert all(bad(w)[-1] in (1, 2) for w in err.value.witnesses)


def test_certify_unknown_mode(F):
    with pytest.raises(ValueError):
        certify_base(F, "sideways")


def test_pivot_must_exist():
    f = MappingTable(1, 2, np.array([[1, 2, 3], [2, 3, 1], [3, 1, 2]], dtype=np.uint8))
    with pytest.raises(ConstructionError):
        ExtendedMapping(f)

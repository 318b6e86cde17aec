import itertools
import json
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permmap.pairs import scan_all_pairs
from permmap.recursion import extend_to
from permmap.tables import MappingTable, builtin_table
from permmap.verify import (Exhaustive, InfeasibleJobError, Sampled, Stratified, VerificationJob,
                            verify, verify_pa, verify_projected)

from conftest import hd, words

REPORT_KEYS = ["mapping", "n", "k", "mode", "strategy", "seed", "pairs_checked", "min_slack",
               "violations", "verdict", "wall_ms"]


def brute_force(table, threshold, drop=()):
    """Reference pair scan in plain Python; returns (pairs, min_slack, violations)."""
    ws = words(table.n)
    out = [[v for i, v in enumerate(table(w), 1) if i not in drop] for w in ws]
    bad, slack, pairs = [], None, 0
    for i, j in itertools.combinations(range(len(ws)), 2):
        pairs += 1
        s = hd(out[i], out[j]) - hd(ws[i], ws[j])
        slack = s if slack is None else min(slack, s)
        if s < threshold:
            bad.append((i, j))
    return pairs, slack, bad


def test_F_is_distance_increasing(F):
    r = verify(VerificationJob(F, "increase", Exhaustive()), workers=1)
    assert r.verdict == "pass" and r.pairs_checked == 351 and r.violations == []
    assert r.min_slack == 1


def test_report_layout(F):
    d = verify(VerificationJob(F, "dim", Exhaustive()), workers=1).to_dict()
    assert list(d) == REPORT_KEYS
    assert d["wall_ms"] is None and d["mode"] == "increase"
    assert json.loads(verify(VerificationJob(F), workers=1).to_text()) == \
        verify(VerificationJob(F), workers=1).to_dict()
    timed = verify(VerificationJob(F), workers=1).to_dict(timing=True)
    assert timed["wall_ms"] >= 0


def counterexample():
    out = np.array([p for p in itertools.permutations(range(1, 6))][:27], dtype=np.uint8)
    order = [w for w in words(3)]
    a, b = order.index((0, 0, 0)), order.index((1, 1, 1))
    out = out.copy()
    for row in (a, b):
        for other in range(27):
            if other not in (a, b) and tuple(out[other]) in {(1, 2, 3, 4, 5), (2, 1, 3, 4, 5)}:
                out[other], out[row] = out[row].copy(), out[other].copy()
    out[a], out[b] = (1, 2, 3, 4, 5), (2, 1, 3, 4, 5)
    return MappingTable(3, 2, out, name="counter")


def test_counterexample_reported_with_witness():
    t = counterexample()
    r = verify(VerificationJob(t, "preserve", Exhaustive()), workers=1)
    assert r.verdict == "fail"
    hit = [v for v in r.violations if (v.x, v.y) == ("000", "111")]
    assert len(hit) == 1
    assert (hit[0].input_distance, hit[0].output_distance) == (3, 2)
    keys = [(v.x, v.y) for v in r.violations]
    assert keys == sorted(keys)


@pytest.mark.parametrize("name", ["F", "R", "S"])
@pytest.mark.parametrize("mode,threshold", [("preserve", 0), ("increase", 1)])
def test_matches_brute_force(name, mode, threshold):
    t = builtin_table(name)
    r = verify(VerificationJob(t, mode, Exhaustive()), workers=1)
    pairs, slack, bad = brute_force(t, threshold)
    assert (r.pairs_checked, r.min_slack, len(r.violations)) == (pairs, slack, len(bad))


def test_projection_matches_brute_force():
    R = builtin_table("R")
    r = verify_projected(R, {4, 5})
    pairs, slack, bad = brute_force(R, 0, drop={4, 5})
    assert r.passed and not bad and r.min_slack == slack
    assert r.to_dict()["strategy"]["projection"] == [4, 5]


def test_projected_examples(tables):
    assert verify_projected(tables["G"], {7}).passed
    assert verify_projected(tables["R"], {4, 5}).passed
    everything = verify_projected(tables["F"], range(1, 6))
    assert not everything.passed and len(everything.violations) == 351


def test_increase_implies_preserve(tables):
    for t in tables.values():
        inc = verify(VerificationJob(t, "increase", Exhaustive()), workers=1)
        pre = verify(VerificationJob(t, "preserve", Exhaustive()), workers=1)
        if inc.passed:
            assert pre.passed
        assert len(pre.violations) <= len(inc.violations)


def test_increase_needs_redundancy():
    from permmap.mapping import Mapping

    class Dummy(Mapping):
        def _evaluate(self, w):
            raise AssertionError

    with pytest.raises(ValueError, match="k >= 1"):
        VerificationJob(Dummy(3, 0), "increase")


def test_job_validation(F):
    with pytest.raises(ValueError):
        VerificationJob(F, "sideways")
    with pytest.raises(ValueError):
        Sampled(0)
    with pytest.raises(ValueError):
        VerificationJob(F, strategy=Stratified({4: 10}))
    with pytest.raises(IndexError):
        VerificationJob(F, projection={6})


def test_ceiling_refusal(p130):
    with pytest.raises(InfeasibleJobError) as err:
        verify(VerificationJob(p130, "preserve", Exhaustive()))
    assert str(3**13 * (3**13 - 1) // 2) in str(err.value)
    assert "stratified" in str(err.value)
    with pytest.raises(InfeasibleJobError):
        verify(VerificationJob(builtin_table("F"), max_pairs=350))


def test_sampled_is_reproducible(p91):
    job = VerificationJob(p91, "preserve", Sampled(50_000, seed=3))
    a, b = verify(job, workers=1), verify(job, workers=1)
    assert a.to_text() == b.to_text()
    assert a.pairs_checked == 50_000 and a.verdict == "pass-sampled"
    c = verify(VerificationJob(p91, "preserve", Sampled(50_000, seed=4)), workers=1)
    assert c.to_dict()["seed"] == 4


def test_stratified_buckets_hit_requested_distance(p91):
    """A failing threshold makes every sampled pair a violation, exposing its distance."""
    quotas = {1: 40, 5: 30, 9: 20}
    job = VerificationJob(p91, "preserve", Stratified(quotas, seed=1), projection=range(1, 11))
    r = verify(job, workers=1)
    assert r.pairs_checked == 90 and len(r.violations) == 90
    got = sorted(v.input_distance for v in r.violations)
    assert got == [1] * 40 + [5] * 30 + [9] * 20
    for v in r.violations:
        assert v.x < v.y and hd(v.x, v.y) == v.input_distance


def test_stratified_even_split():
    s = Stratified.even(100, 13, seed=0)
    assert sum(s.quotas.values()) == 100 and set(s.quotas) == set(range(1, 14))
    assert max(s.quotas.values()) - min(s.quotas.values()) <= 1


def test_sampling_never_draws_identical_words():
    t = builtin_table("F")
    r = verify(VerificationJob(t, "preserve", Sampled(20_000, seed=0), projection=range(1, 6)), workers=1)
    assert len(r.violations) == 20_000
    assert all(v.x != v.y for v in r.violations)


def test_worker_count_does_not_change_reports(F):
    g = extend_to(F, 7)
    for strategy in (Exhaustive(), Stratified.even(3 * 2**20 + 5, 7, seed=2)):
        job = VerificationJob(g, "increase", strategy)
        assert verify(job, workers=1).to_text() == verify(job, workers=3).to_text()


def test_pa_examples():
    assert verify_pa([(1, 2, 3)], 99).passed
    r = verify_pa([(1, 2, 3), (2, 1, 3)], 3)
    assert r.verdict == "fail" and r.min_distance == 2
    ok = verify_pa([(1, 2, 3), (2, 3, 1), (3, 1, 2)], 3)
    assert ok.passed and ok.min_distance == 3 and ok.pairs_checked == 3
    with pytest.raises(ValueError):
        verify_pa([], 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.permutations(list(range(1, 7))), min_size=2, max_size=25, unique_by=tuple),
       st.integers(1, 6))
def test_pa_minimum_matches_brute_force(perms, d):
    r = verify_pa(perms, d, workers=1)
    true_min = min(hd(a, b) for a, b in itertools.combinations(perms, 2))
    assert r.min_distance == true_min
    assert r.passed == (true_min >= d)


def test_throughput_gate(p91):
    outputs = np.ascontiguousarray(p91.outputs()[:6000])
    inputs = np.ascontiguousarray(p91.outputs()[:6000, :9] % 3)
    scan_all_pairs(outputs[:100], inputs[:100], 0)
    t0 = time.perf_counter()
    res = scan_all_pairs(outputs, inputs, 0, workers=1)
    rate = res.pairs / (time.perf_counter() - t0)
    assert rate >= 1e7, f"{rate:.3g} pairs/s"

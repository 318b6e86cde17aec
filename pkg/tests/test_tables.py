import io

import numpy as np
import pytest

from permmap.core import TernaryWord
from permmap.tables import (ConstraintSet, DuplicateOutputError, DuplicateWordError, MappingTable,
                            MissingRowError, NotPermutationError, ProjectedDPM, TableFormatError,
                            builtin_constraints, builtin_table, check_constraints, dump_table,
                            load_table, parse_table)

SIZES = {"F": 27, "G": 243, "H4": 81, "R": 27, "S": 27, "T": 81}


def _text(table):
    return dump_table(table)


def test_appendix_rows(F):
    assert F((0, 0, 0)) == (1, 2, 3, 4, 5)
    assert F((2, 2, 2)) == (3, 1, 5, 2, 4)
    assert F[(0, 0, 1)] == (1, 2, 5, 4, 3)


@pytest.mark.parametrize("name,rows", sorted(SIZES.items()))
def test_shipped_tables_load(name, rows):
    t = builtin_table(name)
    assert len(t) == rows
    assert t.outputs().shape == (rows, t.n + t.k)


def test_alias_h():
    assert builtin_table("H") == builtin_table("H4")


@pytest.mark.parametrize("name", ["G", "H4", "R", "S", "T"])
def test_shipped_tables_meet_their_constraints(name):
    report = check_constraints(builtin_table(name), builtin_constraints(name))
    assert report.passed, report.violations[:3]
    assert report.rows_checked == SIZES[name]
    assert report.pairs_checked == SIZES[name] * (SIZES[name] - 1) // 2


def test_F_last_position_avoids_1_and_2(F):
    c = ConstraintSet(3, 2, exclusions=[(5, {1, 2})])
    report = check_constraints(F, c)
    assert report.passed and report.rows_checked == 27


def test_H4_puts_1_up_front(tables):
    assert (tables["H4"].outputs()[:, :3] == 1).any(axis=1).all()


def test_builtin_constraint_contents():
    g = builtin_constraints("G")
    assert (6, frozenset({1, 2, 3})) in g.membership
    assert (7, frozenset({4, 5, 6})) in g.membership
    assert g.projected_dpm.remove == {7}
    assert (5, frozenset({5})) in builtin_constraints("R").exclusions
    assert builtin_constraints("T").projected_dpm.remove == {5, 6}
    assert builtin_constraints("H").projected_dpm.remove == {5, 6}
    u = builtin_constraints("U")
    assert (u.n, u.k) == (6, 2) and u.projected_dpm.remove == {4, 8}
    v = builtin_constraints("V")
    assert (2, frozenset({5, 6, 7})) in v.membership and v.projected_dpm.remove == {4, 9}
    with pytest.raises(KeyError):
        builtin_constraints("Q")


def test_constraint_failure_reports_witness(F):
    out = F.outputs().copy()
    out[TernaryWord((0, 0, 0)).index] = (1, 2, 3, 4, 5)
    out[TernaryWord((1, 1, 1)).index] = (2, 1, 3, 4, 5)
    # the displaced originals would now clash, so keep them apart by
    # swapping them into each other's old places
    out[TernaryWord((1, 0, 0)).index] = F((1, 1, 1))
    bad = MappingTable(3, 2, out, name="F-broken")
    report = check_constraints(bad, ConstraintSet(3, 2, projected_dpm=ProjectedDPM(())))
    assert not report.passed
    hits = [v for v in report.violations if (v.word, v.other) == ((0, 0, 0), (1, 1, 1))]
    assert len(hits) == 1
    assert "input distance 3, output distance 2" in hits[0].detail


def test_violations_sorted(F):
    c = ConstraintSet(3, 2, membership=[(1, {1})])
    report = check_constraints(F, c)
    keys = [v.word.index for v in report.violations]
    assert keys == sorted(keys)
    assert len(keys) == int((F.outputs()[:, 0] != 1).sum())


def test_round_trip_format(tables):
    for t in tables.values():
        again = parse_table(io.StringIO(_text(t)))
        assert again == t


def test_rows_in_any_order(F):
    lines = _text(F).splitlines()
    shuffled = [lines[0]] + lines[1:][::-1]
    assert parse_table(io.StringIO("\n".join(shuffled))) == F


def test_load_from_path(tmp_path, F):
    p = tmp_path / "F.txt"
    p.write_text(_text(F))
    assert load_table(p) == F


def test_missing_row(F):
    lines = _text(F).splitlines()
    with pytest.raises(MissingRowError):
        parse_table(io.StringIO("\n".join(lines[:-1])))


def test_duplicate_word(F):
    lines = _text(F).splitlines()
    with pytest.raises(DuplicateWordError):
        parse_table(io.StringIO("\n".join(lines + [lines[1]])))


def test_non_permutation_row(F):
    lines = _text(F).splitlines()
    lines[1] = "0 0 0 : 1 1 3 4 5"
    with pytest.raises(NotPermutationError, match="line 2"):
        parse_table(io.StringIO("\n".join(lines)))


def test_duplicate_output(F):
    lines = _text(F).splitlines()
    lines[2] = "0 0 1 : 1 2 3 4 5"
    with pytest.raises(DuplicateOutputError):
        parse_table(io.StringIO("\n".join(lines)))


@pytest.mark.parametrize("row", ["0 0 : 1 2 3 4 5", "0 0 0 1 2 3 4 5", "0 0 3 : 1 2 3 4 5", "a b c : 1"])
def test_malformed_rows(F, row):
    lines = _text(F).splitlines()
    lines[1] = row
    with pytest.raises(TableFormatError):
        parse_table(io.StringIO("\n".join(lines)))


def test_constraint_ranges_checked():
    with pytest.raises(ValueError):
        ConstraintSet(3, 2, membership=[(6, {1})])
    with pytest.raises(ValueError):
        ConstraintSet(3, 2, exclusions=[(0, {1})])
    with pytest.raises(IndexError):
        ConstraintSet(3, 2, projected_dpm=ProjectedDPM({6}))


def test_constraint_json_round_trip(tmp_path):
    c = builtin_constraints("S")
    p = tmp_path / "s.json"
    p.write_text(c.to_json())
    assert ConstraintSet.load(p) == c


def test_data_dir_override(tmp_path, monkeypatch, F):
    out = F.outputs().copy()
    out[[0, 1]] = out[[1, 0]]
    (tmp_path / "F.txt").write_text(dump_table(MappingTable(3, 2, out)))
    monkeypatch.setenv("PERMMAP_DATA_DIR", str(tmp_path))
    assert builtin_table("F")((0, 0, 0)) == F((0, 0, 1))
    assert builtin_table("G") == builtin_table("G")


def test_table_constructor_checks_shape():
    with pytest.raises(MissingRowError):
        MappingTable(1, 2, np.array([[1, 2, 3], [2, 1, 3]]))

import pytest
from hypothesis import given, settings, strategies as st

from rlaf.cnf import (
    CnfFormula,
    DimacsError,
    Verdict,
    evaluate,
    normalize_clause,
    parse_dimacs,
    read_dimacs,
    save_dimacs,
    write_dimacs,
)
from rlaf.generators import gen_3col, gen_3sat


def test_parse_minimal():
    f = parse_dimacs("p cnf 2 1\n1 -2 0")
    assert f.num_vars == 2
    assert f.clauses == ((1, -2),)


def test_parse_comment_and_multi_clause_line():
    f = parse_dimacs(b"c hi\np cnf 3 2\n1 2 3 0 -1 -3 0")
    assert f.num_vars == 3
    assert f.clauses == ((1, 2, 3), (-1, -3))


def test_parse_clause_split_over_lines():
    assert parse_dimacs("p cnf 3 1\n1 2\n3 0\n").clauses == ((1, 2, 3),)


def test_parse_percent_footer_ignored():
    f = parse_dimacs("p cnf 2 1\n1 2 0\n%\n0\n")
    assert f.clauses == ((1, 2),)


@pytest.mark.parametrize("text, msg", [
    ("p cnf 1 1\n2 0", "literal out of range"),
    ("1 2 0\n", "before 'p cnf' header"),
    ("", "missing 'p cnf' header"),
    ("p cnf 2 1\np cnf 2 1\n1 0", "duplicate header"),
    ("p dnf 2 1\n1 0", "malformed header"),
    ("p cnf x 1\n1 0", "malformed header"),
    ("p cnf 2 2\n1 0", "clause count mismatch"),
    ("p cnf 2 1\n1 a 0", "bad token"),
    ("p cnf 2 2\n1 0 0", "empty clause"),
])
def test_parse_errors(text, msg):
    with pytest.raises(DimacsError, match=msg):
        parse_dimacs(text)


def test_error_names_line():
    with pytest.raises(DimacsError, match="line 3"):
        parse_dimacs("c x\np cnf 1 1\n2 0")


def test_write_exact_bytes():
    assert write_dimacs(CnfFormula(2, [[1, -2]])) == b"p cnf 2 1\n1 -2 0\n"


@pytest.mark.parametrize("f", [gen_3sat(50, 3), gen_3col(30, 4)], ids=["3sat50", "3col30"])
def test_round_trip_generated(f):
    assert parse_dimacs(write_dimacs(f)) == f


def test_file_round_trip(tmp_path):
    f = gen_3sat(20, 1)
    save_dimacs(f, tmp_path / "a.cnf")
    assert read_dimacs(tmp_path / "a.cnf") == f


def test_formula_validation():
    with pytest.raises(ValueError, match="empty"):
        CnfFormula(2, [[1], []])
    with pytest.raises(ValueError, match="out of range"):
        CnfFormula(2, [[3]])
    with pytest.raises(ValueError):
        CnfFormula(-1)


def test_normalization_keeps_tautologies():
    f = CnfFormula(2, [[1, 1, -2], [1, -1]])
    assert f.clauses == ((1, -2), (1, -1))
    assert f.num_clauses == 2


@pytest.mark.parametrize("clauses, a, want", [
    ([[1, -2]], {1: 1}, Verdict.SATISFIED),
    ([[1], [-1]], {1: 1}, Verdict.FALSIFIED),
    ([[1, 2]], {1: 0}, Verdict.UNDETERMINED),
    ([[1, -1]], {}, Verdict.UNDETERMINED),
])
def test_evaluate_examples(clauses, a, want):
    n = max(abs(l) for c in clauses for l in c)
    assert evaluate(CnfFormula(n, clauses), a) == want


def test_evaluate_sequence_and_range():
    f = CnfFormula(2, [[1, -2]])
    assert evaluate(f, [0, 0]) == Verdict.SATISFIED
    with pytest.raises(ValueError):
        evaluate(f, {3: 1})


lits = st.integers(1, 6).flatmap(lambda v: st.sampled_from([v, -v]))
formulas = st.lists(st.lists(lits, min_size=1, max_size=4), max_size=8).map(lambda cs: CnfFormula(6, cs))


@settings(max_examples=100, deadline=None)
@given(formulas)
def test_round_trip_property(f):
    assert parse_dimacs(write_dimacs(f)) == f


@settings(max_examples=100, deadline=None)
@given(st.lists(lits, max_size=8))
def test_normalize_idempotent(c):
    once = normalize_clause(c)
    assert normalize_clause(once) == once
    assert set(once) == set(c)


@settings(max_examples=100, deadline=None)
@given(formulas, st.dictionaries(st.integers(1, 6), st.integers(0, 1)), st.data())
def test_evaluate_monotone(f, partial, data):
    before = evaluate(f, partial)
    extra = data.draw(st.dictionaries(st.integers(1, 6), st.integers(0, 1)))
    extended = {**extra, **partial}
    after = evaluate(f, extended)
    if before != Verdict.UNDETERMINED:
        assert after == before

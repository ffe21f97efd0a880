import json

import numpy as np
import pytest

from oracles import implies, is_sat, lookahead_reference, models
from rlaf.cnf import CnfFormula, Verdict, evaluate
from rlaf.generators import gen_3col, gen_3sat
from rlaf.solvers import (
    HAVE_EXT,
    ConfigError,
    LookaheadConfig,
    Parameterization,
    SolverConfig,
    cdcl,
    get_solver,
    lookahead,
    run,
)
from rlaf.solvers._cdcl_py import luby

SOLVE = {"cdcl": cdcl.solve, "lookahead": lookahead.solve}
BASELINE = {"cdcl": cdcl.solve_baseline, "lookahead": lookahead.solve_baseline}
BACKENDS = ["python", "cython"] if HAVE_EXT else ["python"]
TRACE = SolverConfig(record_trace=True)


def random_params(n, rng):
    return Parameterization(rng.lognormal(0.0, 1.0, n), rng.integers(0, 2, n))


def small_corpus():
    return [gen_3sat(n, s) for n, s in zip([8, 12, 14, 16] * 10, range(40))] + \
           [gen_3col(5, s) for s in range(10)]


@pytest.fixture(params=["cdcl", "lookahead"])
def solver(request):
    return request.param


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def test_empty_formula(solver):
    rep = SOLVE[solver](CnfFormula(3, []), Parameterization.uniform(3))
    assert rep.verdict == "SAT" and rep.decisions == 0
    assert len(rep.model) == 3


def test_unit_conflict(solver):
    rep = SOLVE[solver](CnfFormula(2, [[1, 2], [-1], [-2]]), Parameterization.uniform(2))
    assert rep.verdict == "UNSAT" and rep.decisions == 0


def test_single_unit(solver):
    rep = BASELINE[solver](CnfFormula(1, [[1]]))
    assert rep.verdict == "SAT" and rep.decisions == 0 and rep.model == [1]


def test_lookahead_unit_and_pure_only():
    rep = lookahead.solve(CnfFormula(3, [[1], [-2], [1, 2, 3]]), Parameterization.uniform(3))
    assert rep.verdict == "SAT" and rep.decisions == 0


def test_brute_force_agreement(solver, backend):
    rng = np.random.default_rng(0)
    for f in small_corpus():
        params = random_params(f.num_vars, rng)
        rep = SOLVE[solver](f, params, backend=backend)
        assert rep.verdict == ("SAT" if is_sat(f) else "UNSAT")
        if rep.verdict == "SAT":
            assert evaluate(f, rep.model) == Verdict.SATISFIED
        else:
            assert rep.model is None


def test_solvers_agree_on_3sat50():
    for s in range(15):
        f = gen_3sat(50, s)
        assert cdcl.solve_baseline(f).verdict == lookahead.solve_baseline(f).verdict


@pytest.mark.parametrize("c", [1e-3, 1.0, 1e3])
def test_scale_invariance(solver, c):
    rng = np.random.default_rng(1)
    for s in range(8):
        f = gen_3sat(40, s)
        p = random_params(f.num_vars, rng)
        a = SOLVE[solver](f, p, TRACE)
        b = SOLVE[solver](f, p.scaled(c), TRACE)
        assert a.trace == b.trace
        assert (a.decisions, a.conflicts, a.propagations) == (b.decisions, b.conflicts, b.propagations)


def test_uniform_weights_replay_baseline(solver):
    for s in range(8):
        f = gen_3sat(40, s)
        base = BASELINE[solver](f, TRACE)
        for w in (1.0, 0.37, 12.0):
            rep = SOLVE[solver](f, Parameterization.uniform(f.num_vars, weight=w), TRACE)
            assert rep.trace == base.trace
            assert rep.decisions == base.decisions


def test_polarity_seeds_first_decision():
    f = gen_3sat(30, 2)
    for p in (0, 1):
        rep = cdcl.solve(f, Parameterization.uniform(30, polarity=p), TRACE)
        assert rep.trace[0] == (1 if p else -1)  # all activities start equal: lowest index first


def test_backend_equivalence(solver):
    if not HAVE_EXT:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(2)
    cfg = SolverConfig(record_trace=True, record_learned=solver == "cdcl")
    for s in range(10):
        f = gen_3sat(60, s)
        p = random_params(f.num_vars, rng)
        a = SOLVE[solver](f, p, cfg, backend="python")
        b = SOLVE[solver](f, p, cfg, backend="cython")
        assert (a.verdict, a.decisions, a.conflicts, a.propagations, a.model, a.trace) == \
               (b.verdict, b.decisions, b.conflicts, b.propagations, b.model, b.trace)
        assert a.learned == b.learned and a.failed_literals == b.failed_literals
        assert (a.backend, b.backend) == ("python", "cython")


def test_learned_clauses_are_implied():
    checked = 0
    for s in range(20):
        f = gen_3sat(16, s)
        rep = cdcl.solve_baseline(f, SolverConfig(record_learned=True))
        for clause in rep.learned[:10]:
            assert implies(f, clause)
            checked += 1
    assert checked > 20


def test_failed_literals_are_sound():
    checked = 0
    for s in range(30):
        f = gen_3sat(16, s)
        rep = lookahead.solve_baseline(f, SolverConfig(record_trace=True))
        for prefix, lit in rep.failed_literals:
            # f plus the prefix entails the opposite of the failed literal
            assert implies(f.with_clauses([[l] for l in prefix]), [-lit])
            checked += 1
    assert checked > 10


def test_rescaling_keeps_branching_order():
    # a low threshold forces many rescale events; power-of-two scaling is exact
    for s in range(1, 7):
        f = gen_3sat(100, s)
        a = cdcl.solve_baseline(f, SolverConfig(record_trace=True))
        b = cdcl.solve_baseline(f, SolverConfig(record_trace=True, rescale_threshold=50.0))
        assert a.conflicts > 100  # increment passes 50 after ~80 conflicts
        assert a.trace == b.trace


def test_preselect_all_equals_no_preselection():
    rng = np.random.default_rng(3)
    for s in range(12):
        f = gen_3sat(18, s)
        p = random_params(18, rng)
        for mix in ("product", "sum"):
            rep = lookahead.solve(f, p, TRACE, LookaheadConfig(1.0, mix))
            assert (rep.verdict, rep.trace) == lookahead_reference(f, p.weights, p.polarities, mix)


def test_budget(solver):
    f = gen_3sat(80, 0)
    full = SOLVE[solver](f, Parameterization.uniform(80))
    assert full.decisions > 5
    rep = SOLVE[solver](f, Parameterization.uniform(80), SolverConfig(budget=5))
    assert rep.budget_exhausted and rep.verdict is None and rep.decisions == 5
    ok = SOLVE[solver](f, Parameterization.uniform(80), SolverConfig(budget=full.decisions))
    assert not ok.budget_exhausted and ok.verdict == full.verdict


def test_unused_variables_take_polarity(solver):
    f = CnfFormula(4, [[1, 2], [-1, 2]])
    rep = SOLVE[solver](f, Parameterization(np.ones(4), [1, 1, 0, 1]))
    assert rep.verdict == "SAT"
    assert rep.model[2:] == [0, 1]


def test_get_solver_and_run():
    f = gen_3sat(20, 0)
    assert run("cdcl", f).decisions == cdcl.solve_baseline(f).decisions
    assert get_solver("lookahead") is lookahead.solve
    with pytest.raises(ValueError):
        get_solver("walksat")


def test_report_json():
    rep = cdcl.solve_baseline(gen_3sat(20, 0))
    d = json.loads(rep.to_json())
    assert set(d) >= {"verdict", "decisions", "conflicts", "propagations", "elapsed"}
    assert rep.cost == rep.decisions


@pytest.mark.parametrize("w, p", [([1.0, 0.0], [0, 1]), ([1.0, -2.0], [0, 1]), ([np.nan, 1.0], [0, 1]),
                                  ([1.0, np.inf], [0, 1]), ([1.0, 1.0], [0, 2]), ([1.0], [0, 1])])
def test_parameterization_validation(w, p):
    with pytest.raises(ConfigError):
        Parameterization(w, p)


def test_parameterization_size_check():
    with pytest.raises(ConfigError):
        cdcl.solve(gen_3sat(10, 0), Parameterization.uniform(9))


def test_parameterization_text_round_trip(tmp_path):
    p = Parameterization(np.array([0.5, 1e-9, 3.25]), np.array([1, 0, 1]))
    p.save(tmp_path / "p.txt")
    q = Parameterization.load(tmp_path / "p.txt", 3)
    assert np.array_equal(p.weights, q.weights) and np.array_equal(p.polarities, q.polarities)


@pytest.mark.parametrize("text", ["1 1.0 1\n", "1 1.0 1\n2 0 1\n", "1 1.0 1\n1 2.0 0\n", "1 x 1\n2 1 1\n",
                                  "1 1.0 3\n2 1 1\n", "1 1.0\n2 1 1\n"])
def test_parameterization_text_errors(text):
    with pytest.raises(ConfigError):
        Parameterization.from_text(text, 2)


def test_config_validation():
    for kw in ({"activity_decay": 1.0}, {"bump_increment": 0}, {"rescale_threshold": 1.0}, {"budget": -1}):
        with pytest.raises(ConfigError):
            SolverConfig(**kw)
    for kw in ({"preselect_fraction": 0.0}, {"preselect_fraction": 1.5}, {"mix": "max"}):
        with pytest.raises(ConfigError):
            LookaheadConfig(**kw)


def test_luby():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_model_count_oracle_sanity():
    # the cube oracle and itertools enumeration agree
    from oracles import naive_count
    for s in range(5):
        f = gen_3sat(8, s)
        assert len(models(f)) == naive_count(f)

import math

import numpy as np
import pytest

from rlaf import fgraph, neural, supervised
from rlaf.cnf import CnfFormula
from rlaf.generators import gen_3sat
from rlaf.solvers import Parameterization, get_solver

CHAIN = CnfFormula(3, [[1], [-1, 2], [-2, 3]])


def chain_instance():
    return supervised.LabeledInstance(CHAIN, supervised.labels_from_backbone(CHAIN, [1, 2, 3]))


def test_labels_layout_and_validation():
    y = supervised.labels_from_backbone(CHAIN, [1, -3])
    assert y.tolist() == [1, 0, 0, 0, 0, 1]
    with pytest.raises(ValueError):
        supervised.LabeledInstance(CHAIN, [1, 1, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        supervised.LabeledInstance(CHAIN, [1, 0, 0])
    with pytest.raises(ValueError):
        supervised.LabeledInstance(CHAIN, [0.5, 0, 0, 0, 0, 0])


def test_label_instance():
    inst = supervised.label_instance(CHAIN)
    assert inst.labels.tolist() == [1, 0, 1, 0, 1, 0]
    assert supervised.label_instance(CnfFormula(1, [[1], [-1]])) is None


def test_label_file_roundtrip(tmp_path):
    recs = [("a.cnf", [1, -4]), ("b.cnf", [])]
    supervised.write_labels(tmp_path / "l.jsonl", recs)
    assert supervised.read_labels(tmp_path / "l.jsonl") == [("a.cnf", [1, -4]), ("b.cnf", [])]


def test_initial_loss_is_ln2():
    params = neural.NetParams.init(8, 2, seed=0)
    insts = [supervised.label_instance(gen_3sat(20, s)) for s in range(6)]
    insts = [x for x in insts if x is not None]
    assert supervised.dataset_loss(params, insts) == pytest.approx(math.log(2), abs=1e-12)


def test_logit_gradient_fd():
    rng = np.random.default_rng(0)
    f = gen_3sat(8, 3)
    g = fgraph.build(f)
    params = neural.NetParams.init(4, 2, seed=1)
    params.flat[:] += rng.normal(0, 0.3, params.flat.size)
    y = (rng.random(2 * f.num_vars) < 0.3).astype(float)

    def loss():
        return supervised.bce(supervised.literal_logits(params, g, keep_cache=False)[0], y)

    z, caches = supervised.literal_logits(params, g)
    grad = supervised.literal_logits_backward(params, g, caches,
                                              (supervised.sigmoid(z) - y) / y.size)
    base = params.flat.copy()
    for i in rng.choice(base.size, 25, replace=False):
        params.flat[i] = base[i] + 1e-6
        up = loss()
        params.flat[i] = base[i] - 1e-6
        down = loss()
        params.flat[i] = base[i]
        fd = (up - down) / 2e-6
        assert abs(fd - grad.flat[i]) <= 1e-6 * max(1.0, abs(grad.flat[i]))


def test_forced_chain_overfits():
    hist = []
    supervised.train_supervised([chain_instance()], d=16, L=4, epochs=200, lr=1e-2,
                                weight_decay=0.0, history=hist)
    assert hist[0] == pytest.approx(math.log(2))
    assert hist[-1] < 0.1


def test_all_zero_labels_predict_zero():
    f = gen_3sat(10, 1)
    inst = supervised.LabeledInstance(f, np.zeros(20))
    params = supervised.train_supervised([inst], d=8, L=2, epochs=300, lr=1e-2, weight_decay=0.0)
    assert supervised.predict_backbone(params, f).max() < 0.05


def test_empty_training_set():
    with pytest.raises(ValueError):
        supervised.train_supervised([])


def test_guide_examples():
    p = supervised.guide_from_backbone([0.8, 0.2], 10)
    assert p.weights[0] == pytest.approx(6.0) and p.polarities[0] == 1
    p = supervised.guide_from_backbone([0.1, 0.7, 0.4, 0.4], 0)
    assert np.all(p.weights == 1) and p.polarities.tolist() == [0, 1]
    rng = np.random.default_rng(0)
    assert np.all(supervised.guide_from_backbone(rng.random(40), 123.0).weights >= 1)
    for bad in ((-1.0, [0.5, 0.5]), (1.0, [0.5]), (1.0, [1.5, 0.0]), (math.inf, [0.5, 0.5])):
        with pytest.raises(ValueError):
            supervised.guide_from_backbone(bad[1], bad[0])


def test_alpha_zero_changes_only_polarity():
    f = gen_3sat(30, 4)
    solve = get_solver("cdcl")
    params = neural.NetParams.init(8, 2, seed=0)
    guide = supervised.guide_from_backbone(supervised.predict_backbone(params, f), 0.0)
    # zero-init predicts 1/2 everywhere, so the tie rule gives polarity 1: the baseline
    assert solve(f, guide).decisions == solve(f, Parameterization.uniform(30)).decisions


def test_tune_alpha():
    params = neural.NetParams.init(8, 2, seed=0)
    params.flat[:] += np.random.default_rng(0).normal(0, 0.3, params.flat.size)
    insts = [gen_3sat(30, s) for s in range(8)]
    assert supervised.tune_alpha(params, insts, grid=[0.0])[0] == 0.0
    best, table = supervised.tune_alpha(params, insts, grid=[0.0, 1e9])
    costs = dict(table)
    assert best == min(costs, key=lambda a: (costs[a], a))
    a1, t1 = supervised.tune_alpha(params, insts)
    a2, t2 = supervised.tune_alpha(params, insts)
    assert a1 == a2 and t1 == t2 and len(t1) == 9
    with pytest.raises(ValueError):
        supervised.tune_alpha(params, insts, grid=[])

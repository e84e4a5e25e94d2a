import math

import numpy as np
import pytest

from embedlab import embeddings as em
from embedlab import optimize as op
from embedlab import primitives
from embedlab.errors import DimensionTooLarge, ValidationError

OT1 = primitives.make_ot(1).dist
ROT1 = primitives.make_rot(1).dist
CORR = primitives.make_correlated().dist


def test_splitmix_reference_values():
    # reference outputs of the published splitmix64 generator seeded with 0
    state, outs = 0, []
    for _ in range(3):
        outs.append(op.splitmix64(state))
        state = (state + 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_restart_seeds_distinct():
    seeds = {op.restart_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000


def test_config_validation():
    with pytest.raises(ValidationError):
        op.OptimizerConfig(restarts=0)
    with pytest.raises(ValidationError):
        op.OptimizerConfig(ftol=0)
    cfg = op.OptimizerConfig()
    assert (cfg.restarts, cfg.max_iters, cfg.ftol, cfg.simplex_scale) == (16, 2000, 1e-9, math.pi / 4)


def test_objective_examples():
    rng = np.random.default_rng(3)
    assert op.evaluate_objective(OT1, [0.0]) == pytest.approx(0.5, abs=1e-12)
    assert op.evaluate_objective(ROT1, []) == pytest.approx(primitives.rot_leakage_closed(1).delta, abs=1e-12)
    assert op.evaluate_objective(CORR, []) == pytest.approx(0, abs=1e-12)
    for w in rng.uniform(0, 2 * math.pi, 5):
        e = em.build_regular(OT1, em.free_phase_coordinates(OT1).embed([w]))
        assert op.evaluate_objective(OT1, [w]) == pytest.approx(em.leakage_regular(e).delta, abs=1e-12)
    with pytest.raises(ValidationError):
        op.evaluate_objective(OT1, [0.0, 1.0])


def test_minimize_ot_and_sand():
    r = op.minimize_leakage(OT1, op.OptimizerConfig(seed=7))
    assert r.best_delta == pytest.approx(0.5, abs=1e-4)
    # optimum is the canonical point modulo the gauge
    w = r.best_coords[0]
    assert min(w, 2 * math.pi - w) < 1e-2
    s = op.minimize_leakage(primitives.make_sand().dist, op.OptimizerConfig(seed=7))
    assert s.best_delta == pytest.approx(0.5, abs=1e-3)


def test_minimize_trivial_and_zero_coordinate():
    r = op.minimize_leakage(primitives.make_independent().dist, op.OptimizerConfig(seed=1))
    assert r.best_delta < 1e-6
    r = op.minimize_leakage(ROT1, op.OptimizerConfig(seed=1))
    assert r.count == 0 and len(r.per_restart) == 1
    assert r.best_delta == pytest.approx(primitives.rot_leakage_closed(1).delta)


def test_result_invariants():
    P = primitives.make_otp(0.1).dist
    cfg = op.OptimizerConfig(restarts=4, seed=11, max_iters=300)
    r = op.minimize_leakage(P, cfg)
    assert r.best_delta == min(t.delta for t in r.per_restart)
    assert r.best_delta <= op.evaluate_objective(P, np.zeros(r.count)) + 1e-12
    assert r.per_restart[0].start == tuple([0.0] * r.count)
    assert r.best_delta >= -1e-9
    assert em.leakage_regular(em.build_regular(P, r.best_phases)).delta == pytest.approx(r.best_delta, abs=1e-12)
    d = r.to_dict()
    assert len(d["per_restart"]) == 4 and d["free_coordinates"] == r.count


def test_deterministic_across_threads(monkeypatch):
    P = primitives.make_otp(0.05).dist
    cfg = op.OptimizerConfig(restarts=6, seed=5, max_iters=200)
    monkeypatch.setenv("EMBEDLAB_THREADS", "1")
    a = op.minimize_leakage(P, cfg)
    monkeypatch.setenv("EMBEDLAB_THREADS", "4")
    b = op.minimize_leakage(P, cfg)
    assert a.best_delta == b.best_delta
    assert [t.final for t in a.per_restart] == [t.final for t in b.per_restart]
    c = op.minimize_leakage(P, op.OptimizerConfig(restarts=6, seed=6, max_iters=200))
    assert [t.start for t in c.per_restart[1:]] != [t.start for t in a.per_restart[1:]]


def test_coordinate_guard():
    with pytest.raises(DimensionTooLarge):
        op.minimize_leakage(primitives.make_ot(4).dist, op.OptimizerConfig(restarts=1))

"""Acceptance criteria, one test per criterion, at their stated tolerances."""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from embedlab import attacks, checks, primitives
from embedlab import embeddings as em
from embedlab import probdist as pd
from embedlab import quantum as q
from embedlab.optimize import OptimizerConfig, minimize_leakage

GOLDEN = Path(__file__).parent / "golden"


def h(p):
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def test_criterion_1_rot1_row():
    t0 = time.perf_counter()
    P = primitives.make_rot(1).dist
    d0 = em.leakage_regular(em.canonical(P)).delta
    rng = np.random.default_rng(1)
    others = [em.leakage_regular(em.build_regular(P, rng.uniform(0, 2 * math.pi, len(P.support)))).delta for _ in range(20)]
    elapsed = time.perf_counter() - t0
    assert d0 == pytest.approx(h(0.25) - 0.5, abs=1e-6)
    assert abs(d0 - 0.311278) < 1e-6
    assert max(abs(d - d0) for d in others) < 1e-9
    assert elapsed < 0.1, elapsed


def test_criterion_2_ot_and_sand_rows():
    t0 = time.perf_counter()
    ot = minimize_leakage(primitives.make_ot(1).dist, OptimizerConfig(restarts=16, seed=7))
    sand = minimize_leakage(primitives.make_sand().dist, OptimizerConfig(restarts=16, seed=7))
    c = primitives.ot_entropy_closed(0.0)
    elapsed = time.perf_counter() - t0
    assert abs(ot.best_delta - 0.5) < 1e-4
    assert abs(sand.best_delta - 0.5) < 1e-3
    assert c.s_aprime == 1.5
    np.testing.assert_allclose(c.spectrum, [0.5, 0.25, 0.25, 0.0], rtol=0, atol=1e-10)
    assert elapsed < 30, elapsed


def test_criterion_3_rot_scaling():
    for r in (4, 8):
        t0 = time.perf_counter()
        d = em.leakage_regular(em.canonical(primitives.make_rot(r).dist)).delta
        elapsed = time.perf_counter() - t0
        assert abs(d - primitives.rot_leakage_closed(r).delta) < 1e-9
        if r == 8:
            assert abs(d - 0.98155) < 1e-5
            assert elapsed < 5, elapsed
    deltas = [em.leakage_regular(em.canonical(primitives.make_rot(r).dist)).delta for r in range(1, 11)]
    closed = [primitives.rot_leakage_closed(r).delta for r in range(1, 11)]
    assert max(abs(a - b) for a, b in zip(deltas, closed)) < 1e-9
    assert all(b > a for a, b in zip(deltas, deltas[1:]))
    ratios = [(1 - deltas[r - 1]) / (r * 2.0**-r) for r in range(2, 11)]
    assert max(ratios) <= 4, ratios


def test_criterion_4_povm_attacks():
    t0 = time.perf_counter()
    e = em.canonical(primitives.make_ot(1).dist)
    bob = attacks.run_povm_attack(e, attacks.bob_xor_povm(), "B", attacks.xor_of_bits)
    alice = attacks.run_povm_attack(e, attacks.alice_choice_povm(), "A", attacks.selection_bit)
    elapsed = time.perf_counter() - t0
    assert abs(bob.conclusive_probability - 0.5) < 1e-12
    assert bob.conditional_correctness == pytest.approx(1.0, abs=1e-12)
    assert abs(alice.success_probability - 0.5) < 1e-12
    assert elapsed < 0.1, elapsed


def test_criterion_5_tripartite_asymmetry():
    psi = np.zeros(8, dtype=complex)
    psi[[0b001, 0b110, 0b111]] = 1 / math.sqrt(3)
    layout = q.RegisterLayout((("E", 2), ("A", 2), ("B", 2)))
    rep = em.tripartite_leakage(em.TripartiteState.from_state(q.StateVector(layout, psi)))
    assert abs(rep.toward_bob - rep.toward_alice) > 0.01
    golden = json.loads((GOLDEN / "tripartite.json").read_text())
    assert rep.toward_bob == pytest.approx(golden["toward_bob"], abs=1e-12)
    assert rep.toward_alice == pytest.approx(golden["toward_alice"], abs=1e-12)
    assert rep.mutual_information == pytest.approx(golden["I_XY"], abs=1e-12)


def test_criterion_6_noisy_ot_bound():
    for p in (0.01, 0.05, 0.10):
        d = em.leakage_regular(em.canonical(primitives.make_otp(p).dist)).delta
        assert d - primitives.otp_lower_bound(p) >= 0
    assert abs(primitives.otp_lower_bound(0.0) - 1 / (128 * math.log(2))) < 1e-6
    assert abs(primitives.otp_lower_bound(1e-12) - 0.011) < 1e-3


def test_criterion_7_property_suites():
    t0 = time.perf_counter()
    reports = checks.run_suite("all", seed=7)
    elapsed = time.perf_counter() - t0
    expected = {
        "directed leakages agree on strictly correct embeddings": 100,
        "dependent part preserves I(X;Y) and H(Y|X)": 100,
        "basis measurement information at most Holevo chi": 200,
        "average encoding inequality": 200,
        "leakage additive over connected components": 50,
    }
    props = {p.name: p for r in reports for p in r.properties}
    for name, n in expected.items():
        assert props[name].total == n
    failed = [p.to_dict() for p in props.values() if not p.ok]
    assert not failed, failed
    assert props["directed leakages agree on strictly correct embeddings"].worst < 1e-8
    assert elapsed < 120, elapsed


def test_criterion_8_triviality_classifier():
    cfg = OptimizerConfig(restarts=16, seed=7)
    for name in ("independent", "correlated"):
        P = primitives.resolve(name).dist
        assert pd.is_trivial(P).trivial
        assert minimize_leakage(P, cfg).best_delta < 1e-6
    for name in ("rot/1", "ot/1", "sand"):
        P = primitives.resolve(name).dist
        assert not pd.is_trivial(P).trivial
        assert minimize_leakage(P, cfg).best_delta > 0.05

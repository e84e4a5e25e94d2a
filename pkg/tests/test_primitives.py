import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from embedlab import embeddings as em
from embedlab import linalg, primitives
from embedlab import probdist as pd
from embedlab.errors import OutOfValidity, OutOfValidityWarning, ParameterOutOfRange, ParseError


def h(p):
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def test_rot_tables():
    P = primitives.make_rot(1).dist
    assert P.shape == (2, 3) and list(P.y) == ["0", "1", "_bot"]
    np.testing.assert_array_equal(P.probs, [[0.25, 0, 0.25], [0, 0.25, 0.25]])
    P = primitives.make_rot(2).dist
    assert P.shape == (4, 5)
    assert np.count_nonzero(P.probs) == 8 and set(P.probs[P.probs > 0]) == {0.125}
    for r in (1, 3, 5):
        assert pd.shannon_entropy(primitives.make_rot(r).dist.px) == pytest.approx(r)


@pytest.mark.parametrize("bad", [0, 13, 1.5, True])
def test_rot_range(bad):
    with pytest.raises(ParameterOutOfRange):
        primitives.make_rot(bad)


def test_ot_tables():
    P = primitives.make_ot(1).dist
    assert P.shape == (4, 4) and list(P.y) == ["0:0", "0:1", "1:0", "1:1"]
    assert np.count_nonzero(P.probs) == 8
    assert P.prob("10", "0:1") == 0.125 and P.prob("10", "1:0") == 0.125 and P.prob("10", "0:0") == 0
    for r in (1, 2, 3):
        Q = primitives.make_ot(r).dist
        assert len(Q.support) == 2 ** (2 * r + 1)
        assert pd.mutual_information(Q) == pytest.approx(r, abs=1e-12)
    with pytest.raises(ParameterOutOfRange):
        primitives.make_ot(7)


def test_sand_table():
    P = primitives.make_sand().dist
    for i, j in P.support:
        x, a = map(int, P.x[i])
        y, b = map(int, P.y[j])
        assert a ^ b == x & y
    assert len(P.support) == 8
    np.testing.assert_allclose(P.px, 0.25)
    np.testing.assert_allclose(P.py, 0.25)
    # given (y, b), x is uniform and fixes a, so H(X|Y) = 1
    assert pd.conditional_entropy(P, given="y") == pytest.approx(1.0, abs=1e-12)
    assert pd.mutual_information(P) == pytest.approx(1.0, abs=1e-12)


def test_otp_table():
    P = primitives.make_otp(0.25).dist
    assert sorted(set(P.probs.ravel())) == [0.25 / 8, 0.75 / 8]
    for p in (0.01, 0.1, 0.3):
        assert pd.mutual_information(primitives.make_otp(p).dist) == pytest.approx(1 - h(p), abs=1e-12)
    # the p -> 0 limit is the plain OT table
    np.testing.assert_allclose(primitives.make_otp(1e-12).dist.probs, primitives.make_ot(1).dist.probs, atol=1e-12)
    for bad in (0.0, 0.5, -0.1):
        with pytest.raises(ParameterOutOfRange):
            primitives.make_otp(bad)


def test_otp_quarter_is_measured_not_asserted():
    # recorded as an experiment: the classical definition gives a non-zero value here
    rep = pd.is_trivial(primitives.make_otp(0.25).dist)
    assert rep.consistent
    assert rep.h_xdep_given_y > 1e-9


@pytest.mark.parametrize("ident", ["rot/1", "rot/4", "ot/1", "ot/2", "sand", "otp/0.05", "independent", "correlated"])
def test_catalog_normalized_and_round_trips(ident):
    P = primitives.resolve(ident).dist
    assert P.probs.sum() == 1.0
    assert pd.JointDistribution.from_json(P.to_json()) == P


def test_resolver():
    assert primitives.resolve("primitive://rot/3").identifier == "rot/3"
    assert primitives.resolve("ot").identifier == "ot/1"
    assert primitives.resolve("otp/0.25").identifier == "otp/0.25"
    assert primitives.resolve(" sand ").identifier == "sand"
    for bad in ("nope", "rot/x", "otp", "sand/2", "otp/abc"):
        with pytest.raises(ParseError):
            primitives.resolve(bad)
    with pytest.raises(ParameterOutOfRange):
        primitives.resolve("rot/99")


# -- closed forms -----------------------------------------------------------


def test_rot_closed_examples():
    c = primitives.rot_leakage_closed(1)
    assert c.delta == pytest.approx(h(0.25) - 0.5, abs=1e-12)
    np.testing.assert_allclose(c.spectrum, [0.75, 0.25])
    c8 = primitives.rot_leakage_closed(8)
    assert c8.delta == pytest.approx(0.98155, abs=1e-5)
    assert c8.spectrum.sum() == pytest.approx(1.0)
    assert primitives.rot_leakage_closed(40).delta == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ParameterOutOfRange):
        primitives.rot_leakage_closed(0)


@pytest.mark.parametrize("r", range(1, 9))
def test_rot_closed_matches_numeric(r):
    c = primitives.rot_leakage_closed(r)
    e = em.canonical(primitives.make_rot(r).dist)
    assert em.leakage_regular(e).delta == pytest.approx(c.delta, abs=1e-9)
    if r <= 5:
        a = np.asarray(e.amplitudes)
        np.testing.assert_allclose(linalg.eigvalsh(a @ a.conj().T), c.spectrum, atol=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_rot_phase_independence(r):
    rng = np.random.default_rng(r)
    P = primitives.make_rot(r).dist
    ref = primitives.rot_leakage_closed(r).delta
    for _ in range(20):
        e = em.build_regular(P, rng.uniform(0, 2 * math.pi, len(P.support)))
        assert em.leakage_regular(e).delta == pytest.approx(ref, abs=1e-9)


def test_ot_closed_at_zero():
    c = primitives.ot_entropy_closed(0.0)
    assert c.s_aprime == 1.5
    np.testing.assert_allclose(c.spectrum, [0.5, 0.25, 0.25, 0.0], atol=1e-15)
    d = em.leakage_regular(em.canonical(primitives.make_ot(1).dist))
    assert c.s_aprime == pytest.approx(d.delta + d.mutual_information, abs=1e-9)


@given(st.floats(0, 2 * math.pi, exclude_max=True))
def test_ot_closed_matches_numeric(omega):
    e = em.build_regular(primitives.make_ot(1).dist, primitives.ot_single_phase_phases(omega))
    a = np.asarray(e.amplitudes)
    w = linalg.eigvalsh(a @ a.conj().T)
    c = primitives.ot_entropy_closed(omega)
    np.testing.assert_allclose(w, c.spectrum, atol=1e-10)
    assert em.leakage_regular(e).s_x_bb == pytest.approx(c.s_aprime, abs=1e-9)


def test_ot_closed_range():
    with pytest.raises(ParameterOutOfRange):
        primitives.ot_entropy_closed(2 * math.pi)


def test_otp_bound_examples():
    assert primitives.otp_lower_bound(0.0) == pytest.approx(1 / (128 * math.log(2)), abs=1e-12)
    assert primitives.otp_lower_bound(0.05) > 0
    with pytest.warns(OutOfValidityWarning):
        assert primitives.otp_lower_bound(primitives.OTP_THRESHOLD) == 0.0
    with pytest.raises(OutOfValidity):
        primitives.otp_lower_bound(0.3, strict=True)
    with pytest.raises(ParameterOutOfRange):
        primitives.otp_lower_bound(-0.1)


@given(st.floats(0, primitives.OTP_THRESHOLD, exclude_max=True))
def test_otp_bound_decreasing_and_nonnegative(p):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        b = primitives.otp_lower_bound(p)
    assert 0 <= b <= primitives.otp_lower_bound(0.0)
    q = p + 0.5 * (primitives.OTP_THRESHOLD - p)
    assert primitives.otp_lower_bound(q) <= b + 1e-15


@pytest.mark.parametrize("p", [0.01, 0.05, 0.10])
def test_otp_bound_sound(p):
    d = em.leakage_regular(em.canonical(primitives.make_otp(p).dist)).delta
    assert d >= primitives.otp_lower_bound(p)

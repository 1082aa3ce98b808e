import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcc.channel import AuxInput, AuxInputP2, AuxInputV, make_joint
from rcc.checks import random_channel, random_p1
from rcc.errors import ValidationError, WrongInputClass
from rcc.regions import (
    INNER,
    OUTER,
    BoundId,
    RateTriple,
    Section,
    bound_constraints,
    constraint_check,
    r0_cap,
    r1_cap,
    re_cap,
)

import oracles

LEAK = 1 - oracles.h2(0.25)  # I(X;Z|US) on the flip fixture with uniform X


@pytest.fixture
def flip_joint(flip, uniform_input):
    return make_joint(flip, uniform_input)


class TestRateTriple:
    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            RateTriple(0.0, -0.1, 0.0)

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            RateTriple(math.nan, 0.0, 0.0)


class TestBoundId:
    def test_parse_accepts_underscores(self):
        assert BoundId.parse("D_IN_TILDE") is BoundId.D_IN_TILDE

    def test_parse_unknown(self):
        with pytest.raises(ValidationError):
            BoundId.parse("d-sideways")

    def test_partition(self):
        assert INNER | OUTER == set(BoundId)
        assert not INNER & OUTER

    def test_input_classes(self):
        assert BoundId.D_OUT.input_class == "P2"
        assert BoundId.S_IN.input_class == "Q1"
        assert BoundId.S_OUT.input_class == "Q2"
        assert BoundId.S_IN_TILDE.stochastic and not BoundId.D_IN.stochastic


class TestFlipFixture:
    def test_private_corner(self, flip_joint):
        t = RateTriple(0.0, 1.0, 1.0 - LEAK)
        res = constraint_check(BoundId.D_IN_TILDE, flip_joint, t)
        assert res.ok
        assert res.min_slack == pytest.approx(0.0, abs=1e-12)

    def test_too_much_equivocation(self, flip_joint):
        t = RateTriple(0.0, 1.0, 1.0 - LEAK + 0.01)
        res = constraint_check(BoundId.D_IN_TILDE, flip_joint, t)
        assert not res.ok
        assert res.slacks["Re<=[R1-I(X;Z|US)]+"] == pytest.approx(-0.01)

    def test_common_rate_needs_u(self, flip_joint):
        # with |U| = 1 and S independent of Y, no common rate is supported
        assert not constraint_check(BoundId.D_IN_TILDE, flip_joint, RateTriple(0.01, 0, 0)).ok

    def test_positive_part_below_leak(self, flip_joint):
        t = RateTriple(0.0, 0.1, 0.0)
        assert constraint_check(BoundId.D_IN_TILDE, flip_joint, t).ok
        assert not constraint_check(BoundId.D_IN_TILDE, flip_joint, RateTriple(0, 0.1, 1e-6)).ok

    def test_stochastic_allows_full_secrecy_rate(self, flip_joint):
        # stochastic sets cap Re by I(X;Y|US) - I(X;Z|US), independently of R1
        t = RateTriple(0.0, 0.5, 0.5)
        assert constraint_check(BoundId.S_IN_TILDE, flip_joint, t).ok
        assert not constraint_check(BoundId.D_IN_TILDE, flip_joint, t).ok

    def test_stochastic_enforces_re_le_r1(self, flip_joint):
        res = constraint_check(BoundId.S_IN_TILDE, flip_joint, RateTriple(0.0, 0.2, 0.3))
        assert res.slacks["Re<=R1"] == pytest.approx(-0.1)


class TestSections:
    def test_r0_zero(self, flip_joint):
        res = constraint_check(BoundId.D_OUT_TILDE, flip_joint, RateTriple(0, 0.5, 0.2), Section.R0_ZERO)
        assert res.ok and res.slacks["R0=0"] == 0.0

    def test_re_eq_r1(self, flip_joint):
        res = constraint_check(BoundId.S_IN_TILDE, flip_joint, RateTriple(0, 0.5, 0.4), Section.RE_EQ_R1)
        assert not res.ok
        assert res.slacks["Re=R1"] == pytest.approx(-0.1)


class TestInputClass:
    def test_v_bound_needs_v(self, flip_joint):
        with pytest.raises(WrongInputClass):
            bound_constraints(BoundId.S_IN, flip_joint)

    def test_u_bound_rejects_v(self, flip):
        aux = AuxInputV(np.full((1, 2, 2), 0.25), np.eye(2))
        with pytest.raises(WrongInputClass):
            bound_constraints(BoundId.D_IN, make_joint(flip, aux))

    def test_p1_bound_rejects_u_correlated_with_z(self, flip):
        pu = np.zeros((2, 2, 2, 2))
        pu[:, :, 0, 0] = pu[:, :, 1, 1] = 1.0  # U = Z
        aux = AuxInputP2.from_factors(flip, np.full((2, 2), 0.25), pu)
        joint = make_joint(flip, aux)
        with pytest.raises(WrongInputClass):
            bound_constraints(BoundId.D_IN_TILDE, joint)
        bound_constraints(BoundId.D_OUT, joint)

    def test_v_bound_with_v_input(self, flip):
        aux = AuxInputV(np.full((1, 2, 2), 0.25), np.eye(2))
        cons = {c.name: c for c in bound_constraints(BoundId.S_IN, make_joint(flip, aux))}
        assert cons["Re<=[I(V;Y|US)-I(V;Z|US)]+"].rhs == pytest.approx(1 - LEAK)


class TestCaps:
    def test_caps_on_fixture(self, flip):
        aux = AuxInput.from_factors([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], np.array([[[1.0, 0], [1.0, 0]], [[0, 1.0], [0, 1.0]]]))
        cons = bound_constraints(BoundId.D_IN_TILDE, make_joint(flip, aux))
        # U = X: R0 <= min{I(US;Y), I(U;Z|S)} = 1 - h(0.25), and X carries nothing beyond U
        assert r0_cap(cons) == pytest.approx(LEAK)
        assert r1_cap(cons, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert r1_cap(cons, LEAK + 0.01) == -math.inf
        assert re_cap(cons, 0.0, 0.0) == 0.0


class TestInclusion:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_tilde_inner_within_outer(self, seed):
        rng = np.random.default_rng(seed)
        ch = random_channel(rng, 2, 2, 3, 2)
        joint = make_joint(ch, random_p1(rng, 2, 2, 2))
        for _ in range(50):
            t = RateTriple(*rng.uniform(0, 0.6, size=3))
            if constraint_check(BoundId.D_IN_TILDE, joint, t).ok:
                assert constraint_check(BoundId.D_OUT_TILDE, joint, t).ok

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_inner_within_own_outer_at_same_p1_input(self, seed):
        # every P1 input is also a P2 input, and the D_OUT slacks dominate D_IN's
        rng = np.random.default_rng(seed)
        ch = random_channel(rng, 2, 2, 2, 2)
        joint = make_joint(ch, random_p1(rng, 3, 2, 2))
        for _ in range(50):
            t = RateTriple(*rng.uniform(0, 0.6, size=3))
            if constraint_check(BoundId.D_IN, joint, t).ok:
                assert constraint_check(BoundId.D_OUT, joint, t).ok

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcc.channel import AuxInput, make_joint
from rcc.checks import random_channel, random_p1, reversely_degraded_channel
from rcc.errors import OverlappingSets, UnknownKind, ValidationError
from rcc.info import (
    DENSITY_KINDS,
    cond_mutual_information as I,
    delta_gap,
    density_table,
    entropy,
    information_density,
    zeta,
)

import oracles

VARS = "USXYZ"


@st.composite
def joints(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    sizes = draw(st.tuples(*[st.integers(1, 3)] * 5))
    rng = np.random.default_rng(seed)
    nu, nx, ns, ny, nz = sizes
    ch = random_channel(rng, nx, ns, ny, nz)
    return make_joint(ch, random_p1(rng, nu, ns, nx))


@st.composite
def disjoint_sets(draw, k=3):
    labels = draw(st.lists(st.integers(0, k), min_size=5, max_size=5))
    groups = ["".join(v for v, g in zip(VARS, labels) if g == i) for i in range(k)]
    return groups


class TestAgainstOracle:
    @settings(max_examples=60, deadline=None)
    @given(joints(), disjoint_sets())
    def test_cmi(self, joint, sets):
        a, b, c = sets
        if not a or not b:
            return
        ref = oracles.cmi(np.asarray(joint.p), joint.axes, a, b, c)
        assert I(joint, a, b, c) == pytest.approx(ref, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(joints(), disjoint_sets(2))
    def test_entropy(self, joint, sets):
        a, c = sets
        if not a:
            return
        ref = oracles.cond_entropy(np.asarray(joint.p), joint.axes, a, c)
        assert entropy(joint, a, c) == pytest.approx(ref, abs=1e-12)


class TestIdentities:
    @settings(max_examples=40, deadline=None)
    @given(joints())
    def test_chain_rule(self, joint):
        lhs = I(joint, "X", "YZ", "US")
        rhs = I(joint, "X", "Y", "US") + I(joint, "X", "Z", "YUS")
        assert lhs == pytest.approx(rhs, abs=1e-11)

    @settings(max_examples=40, deadline=None)
    @given(joints(), disjoint_sets())
    def test_symmetric_and_nonnegative(self, joint, sets):
        a, b, c = sets
        if not a or not b:
            return
        assert I(joint, a, b, c) >= 0.0
        assert I(joint, a, b, c) == pytest.approx(I(joint, b, a, c), abs=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(joints())
    def test_markov_chain_u_to_xs_to_yz(self, joint):
        # the channel is applied after (u, s, x)
        assert I(joint, "U", "YZ", "XS") == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(joints())
    def test_density_mean_is_mutual_information(self, joint):
        for kind, (a, b, c) in DENSITY_KINDS.items():
            table, order = density_table(joint, kind)
            p = joint.marginal(set(order))
            mean = float(np.sum(np.where(p > 0, p * np.where(p > 0, table, 0.0), 0.0)))
            ref = I(joint, a, b, c) if b is not None else entropy(joint, a, c)
            assert mean == pytest.approx(ref, abs=1e-11), kind


class TestKnownValues:
    def test_flip_fixture(self, flip, uniform_input):
        joint = make_joint(flip, uniform_input)
        assert I(joint, "X", "Z", "US") == pytest.approx(1 - oracles.h2(0.25), abs=1e-15)
        assert I(joint, "X", "Y", "US") == pytest.approx(1.0, abs=1e-15)
        assert entropy(joint, "Z", "XS") == pytest.approx(oracles.h2(0.25), abs=1e-15)

    def test_zeta_exactly_zero_without_relay_alphabet(self, rng):
        for _ in range(50):
            ch = random_channel(rng, 3, 1, 3, 2)
            joint = make_joint(ch, random_p1(rng, 3, 1, 3))
            assert zeta(joint) == 0.0

    def test_delta_vanishes_when_reversely_degraded(self, rng):
        ch = reversely_degraded_channel(rng, 3, 2, 3, 3)
        for _ in range(10):
            assert delta_gap(make_joint(ch, random_p1(rng, 2, 2, 3))) < 1e-12

    def test_delta_positive_in_general(self, rng):
        ch = random_channel(rng, 3, 2, 3, 3)
        assert delta_gap(make_joint(ch, random_p1(rng, 2, 2, 3))) > 1e-6


class TestDensity:
    def test_sequence_average(self, flip, uniform_input):
        joint = make_joint(flip, uniform_input)
        x = np.array([0, 1, 0, 1])
        z = np.array([0, 1, 1, 1])  # one flip
        zeros = np.zeros(4, dtype=int)
        got = information_density(joint, "XZ|US", {"U": zeros, "S": zeros, "X": x, "Z": z})
        ref = (3 * math.log2(0.75 / 0.5) + math.log2(0.25 / 0.5)) / 4
        assert got == pytest.approx(ref, abs=1e-14)

    def test_broadcasts_over_leading_axes(self, flip, uniform_input):
        joint = make_joint(flip, uniform_input)
        xs = np.array([[0, 0, 1], [1, 1, 0]])
        y = np.array([0, 0, 1])
        s = np.zeros(3, dtype=int)
        out = information_density(joint, "XY|US", {"U": s, "S": s, "X": xs, "Y": y})
        assert out.shape == (2,)
        assert out[0] == pytest.approx(1.0)
        assert out[1] == -np.inf

    def test_self_information_zero_probability_is_inf(self):
        joint = make_joint(*_erasure())
        s = np.zeros(2, dtype=int)
        out = information_density(joint, "Z|XS", {"X": np.array([0, 0]), "S": s, "Z": np.array([1, 1])})
        assert out == np.inf

    def test_unknown_kind(self, flip, uniform_input):
        with pytest.raises(UnknownKind):
            density_table(make_joint(flip, uniform_input), "XY|Z")

    def test_empty_sequence(self, flip, uniform_input):
        e = np.zeros(0, dtype=int)
        with pytest.raises(ValidationError):
            information_density(make_joint(flip, uniform_input), "SY", {"S": e, "Y": e})


class TestErrors:
    def test_overlap(self, flip, uniform_input):
        with pytest.raises(OverlappingSets):
            I(make_joint(flip, uniform_input), "XS", "Y", "S")

    def test_empty(self, flip, uniform_input):
        with pytest.raises(ValidationError):
            I(make_joint(flip, uniform_input), "", "Y")


def _erasure():
    from rcc.channel import validate_channel

    g = np.zeros((2, 1, 1, 2))
    g[0, 0, 0, 0] = 1.0
    g[1, 0, 0, 1] = 1.0
    return validate_channel(g), AuxInput(np.full((1, 1, 2), 0.5))

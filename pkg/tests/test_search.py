from math import comb

import numpy as np
import pytest

from rcc.channel import validate_channel
from rcc.checks import degraded_channel, random_channel
from rcc.errors import BudgetExceeded, NotClassNL, ValidationError
from rcc.regions import BoundId, RateTriple, Section
from rcc.search import (
    SearchConfig,
    boundary_trace,
    family_for,
    inner_membership,
    outer_violation,
    secrecy_capacity_bounds,
    simplex_grid,
    vanishing_zeta_diagnostic,
)

import oracles

FAST = SearchConfig(restarts=8, grid=3, refine_steps=6, refine_top=1, seed=3)
SECRET = 1 - (1 - oracles.h2(0.25))  # I(X;Y|US) - I(X;Z|US) at uniform X, = h(0.25)


class TestSimplexGrid:
    @pytest.mark.parametrize("k,m", [(1, 3), (2, 4), (3, 3), (4, 2)])
    def test_counts_and_rows(self, k, m):
        g = simplex_grid(k, m)
        assert g.shape == (comb(m + k - 1, k - 1), k)
        np.testing.assert_allclose(g.sum(axis=1), 1.0)
        assert np.all(g >= 0)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"restarts": 0}, {"grid": 1}, {"u_cap": 0}, {"refine_steps": -1}])
    def test_rejects(self, kw):
        with pytest.raises(ValidationError):
            SearchConfig(**kw)

    def test_family_caps(self, flip):
        fam = family_for("P1", flip, SearchConfig(u_cap=2))
        assert fam.nu == 2
        fam = family_for("Q1", flip, SearchConfig(u_cap=3, v_cap=2))
        assert (fam.nu, fam.nv) == (3, 2)

    def test_full_caps_warn(self, flip):
        with pytest.warns(UserWarning):
            fam = family_for("P1", flip, SearchConfig(full_caps=True))
        assert fam.nu == flip.p1_cap()


class TestMembership:
    def test_private_corner_found(self, flip):
        t = RateTriple(0.0, 1.0, SECRET - 1e-6)
        res = inner_membership(BoundId.D_IN_TILDE, flip, t, FAST)
        assert res.found
        assert res.witness.min_slack >= -1e-9

    def test_private_rate_above_log_alphabet_never_found(self, flip):
        res = inner_membership(BoundId.D_IN_TILDE, flip, RateTriple(0, 1.1, 0), FAST)
        assert not res.found and res.witness is None
        assert res.best_slack == pytest.approx(-0.1, abs=1e-9)

    def test_outer_search(self, flip):
        res = outer_violation(BoundId.D_OUT_TILDE, flip, RateTriple(0, 0.5, 0.2), FAST)
        assert res.found and res.note

    def test_section(self, flip):
        t = RateTriple(0.0, 0.5, 0.5)
        assert inner_membership(BoundId.S_IN_TILDE, flip, t, FAST, Section.RE_EQ_R1).found

    def test_stochastic_v_bound(self, flip):
        t = RateTriple(0.0, SECRET - 1e-3, SECRET - 1e-3)
        assert inner_membership(BoundId.S_IN, flip, t, FAST).found

    def test_wrong_direction(self, flip):
        with pytest.raises(ValidationError):
            inner_membership(BoundId.D_OUT, flip, RateTriple(0, 0, 0), FAST)
        with pytest.raises(ValidationError):
            outer_violation(BoundId.D_IN, flip, RateTriple(0, 0, 0), FAST)

    def test_hat_bound_needs_class_nl(self, rng):
        ch = random_channel(rng, 2, 2, 2, 2)
        with pytest.raises(NotClassNL):
            outer_violation(BoundId.D_OUT_HAT, ch, RateTriple(0, 0, 0), FAST)

    def test_hat_bound_on_class_nl(self, flip):
        assert outer_violation(BoundId.D_OUT_HAT, flip, RateTriple(0, 0.5, 0.1), FAST).found

    def test_budget(self, flip):
        cfg = SearchConfig(restarts=4, grid=2, time_budget=1e-9)
        with pytest.raises(BudgetExceeded) as exc:
            inner_membership(BoundId.D_IN_TILDE, flip, RateTriple(0, 1.5, 0), cfg)
        assert exc.value.best is not None and not exc.value.best.found

    def test_seed_determinism(self, rng):
        ch = random_channel(rng, 2, 2, 2, 2)
        t = RateTriple(0.05, 0.2, 0.05)
        a = inner_membership(BoundId.D_IN, ch, t, FAST)
        b = inner_membership(BoundId.D_IN, ch, t, FAST)
        assert a.best_slack == b.best_slack and a.evaluated == b.evaluated


class TestTrace:
    def test_rows_and_grid(self, flip):
        pts = boundary_trace(BoundId.D_IN_TILDE, flip, FAST, 5)
        assert len(pts) == 5
        r0 = [p.R0 for p in pts]
        assert r0[0] == 0.0 and r0 == sorted(r0)
        assert pts[0].R1 == pytest.approx(1.0, abs=1e-9)
        assert pts[0].Re == pytest.approx(SECRET, abs=1e-9)
        assert all(p.slack_min >= -1e-9 for p in pts)

    def test_grid_size_checked(self, flip):
        with pytest.raises(ValidationError):
            boundary_trace(BoundId.D_IN_TILDE, flip, FAST, 1)

    def test_degraded_has_no_secrecy(self, rng):
        ch = degraded_channel(rng, 2, 2, 2, 2)
        pts = boundary_trace(BoundId.S_OUT_TILDE, ch, FAST, 4)
        assert max(p.Re for p in pts) <= 1e-9


class TestSecrecy:
    @pytest.mark.parametrize("mode", ["det", "sto"])
    def test_flip_fixture(self, flip, mode):
        b = secrecy_capacity_bounds(flip, mode, FAST)
        assert b.lower == pytest.approx(SECRET, abs=1e-6)
        assert b.upper == pytest.approx(SECRET, abs=1e-6)

    def test_lower_never_exceeds_upper(self, rng):
        for _ in range(5):
            ch = random_channel(rng, 2, 2, 2, 2)
            b = secrecy_capacity_bounds(ch, "det", FAST)
            assert 0.0 <= b.lower <= b.upper + 1e-12

    def test_mode(self, flip):
        with pytest.raises(ValidationError):
            secrecy_capacity_bounds(flip, "quantum", FAST)


class TestZetaDiagnostic:
    def test_noiseless_receiver_keeps_zeta(self):
        # Y = (X, S) reveals S, so H(S|Z) > 0 and I(XS;Y|Z) > 0 for some input
        g = np.zeros((2, 2, 4, 1))
        for x in range(2):
            for s in range(2):
                g[x, s, 2 * x + s, 0] = 1.0
        assert vanishing_zeta_diagnostic(validate_channel(g), FAST) > 0.5

    def test_relay_sees_everything(self):
        g = np.zeros((2, 2, 1, 4))
        for x in range(2):
            for s in range(2):
                g[x, s, 0, 2 * x + s] = 1.0
        assert vanishing_zeta_diagnostic(validate_channel(g), FAST) == pytest.approx(0.0, abs=1e-12)

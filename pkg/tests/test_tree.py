"""Market tree construction, validation and the frictionless baseline."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binarycps.errors import DomainError, ShapeError
from binarycps.tree import (
    DriftParametrization,
    MarketTree,
    NodePath,
    emm_q0,
    frictionless_no_arbitrage,
    from_drift,
    market_from_config,
    spot_price,
    validate_market,
)

from conftest import market_trees, random_market
from oracles import spot_reference


class TestValidate:
    def test_valid_one_step(self):
        tree = MarketTree.homogeneous(1, 1.2, 0.9)
        assert validate_market(tree) == []

    def test_order_violation_at_root(self):
        tree = MarketTree.homogeneous(1, 0.9, 1.2)
        violations = validate_market(tree)
        assert len(violations) == 1
        assert violations[0].level == 1 and violations[0].node_index == 0
        assert "beta" in violations[0].reason and ">=" in violations[0].reason

    def test_malformed_level_shape(self):
        tree = MarketTree(2, 1.0, ((1.2,), (1.2, 1.2)), ((0.9,), (0.9,)))
        with pytest.raises(ShapeError, match="expected 2 entries"):
            validate_market(tree)

    def test_nonpositive_beta_and_s0(self):
        tree = MarketTree(1, 0.0, ((1.2,),), ((0.0,),))
        reasons = [v.reason for v in validate_market(tree)]
        assert any("s0" in r for r in reasons)
        assert any("beta" in r for r in reasons)


class TestFromDrift:
    def test_direct_substitution(self):
        p = DriftParametrization(1, x0=0.0, a=(0.0, 0.0), u=((0.2,),), d=((-0.1,),))
        tree = from_drift(p)
        assert tree.s0 == 1.0
        assert tree.alpha == ((1.2,),)
        assert tree.beta == ((0.9,),)

    def test_interest_rate_division(self):
        # hand: (1 + 0 + 0.2) / 1.2 = 1.0 and (1 - 0.1) / 1.2 = 0.75
        p = DriftParametrization(1, 0.0, (0.0, 0.0), ((0.2,),), ((-0.1,),), r=(0.2,))
        tree = from_drift(p)
        assert tree.alpha[0][0] == pytest.approx(1.0, abs=1e-15)
        assert tree.beta[0][0] == pytest.approx(0.75, abs=1e-15)

    def test_nonpositive_factor_rejected(self):
        p = DriftParametrization(1, 0.0, (0.0, 0.0), ((0.2,),), ((-2.0,),))
        with pytest.raises(DomainError, match="level 1 node 0"):
            from_drift(p)

    def test_rate_at_minus_one_rejected(self):
        p = DriftParametrization(1, 0.0, (0.0, 0.0), ((0.2,),), ((-0.1,),), r=(-1.0,))
        with pytest.raises(DomainError, match="r_1"):
            from_drift(p)

    @given(market_trees(max_steps=3))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_when_rates_are_zero(self, tree):
        # read off u = alpha - 1, d = beta - 1 with zero drift, rebuild, compare
        p = DriftParametrization(
            tree.n_steps,
            x0=tree.s0 - 1.0,
            a=tuple([0.0] * (tree.n_steps + 1)),
            u=tuple(tuple(a - 1 for a in level) for level in tree.alpha),
            d=tuple(tuple(b - 1 for b in level) for level in tree.beta),
        )
        rebuilt = from_drift(p)
        assert rebuilt.s0 == pytest.approx(tree.s0, rel=1e-15)
        for la, lb in zip(rebuilt.alpha, tree.alpha):
            assert la == pytest.approx(lb, rel=1e-15)
        for la, lb in zip(rebuilt.beta, tree.beta):
            assert la == pytest.approx(lb, rel=1e-15)


class TestFrictionless:
    def test_strict_band_holds(self):
        assert frictionless_no_arbitrage(MarketTree.homogeneous(3, 1.2, 0.9))

    def test_alpha_below_one_fails(self):
        assert not frictionless_no_arbitrage(MarketTree.homogeneous(2, 0.9, 0.5))

    def test_boundary_excluded(self):
        assert not frictionless_no_arbitrage(MarketTree.homogeneous(1, 1.2, 1.0))


class TestEmm:
    def test_one_third(self):
        q = emm_q0(MarketTree.homogeneous(1, 1.2, 0.9))
        assert q.q[0][0] == pytest.approx(1 / 3, abs=1e-15)

    def test_one_third_wide(self):
        q = emm_q0(MarketTree.homogeneous(1, 2.0, 0.5))
        assert q.q[0][0] == pytest.approx(1 / 3, abs=1e-15)

    def test_undefined_without_frictionless_band(self):
        with pytest.raises(DomainError, match="Q0 undefined"):
            emm_q0(MarketTree.homogeneous(1, 0.9, 0.5))

    @given(market_trees(max_steps=4, lo=1.01, hi=3.0))
    @settings(max_examples=80, deadline=None)
    def test_martingale_identity(self, tree):
        # beta < 1 by construction is not guaranteed; clamp into the band
        tree = MarketTree(
            tree.n_steps,
            tree.s0,
            tree.alpha,
            tuple(tuple(min(b, 0.99) for b in level) for level in tree.beta),
        )
        q = emm_q0(tree)
        for level_q, level_a, level_b in zip(q.q, tree.alpha, tree.beta):
            for p, a, b in zip(level_q, level_a, level_b):
                assert 0 < p < 1
                assert abs(p * a + (1 - p) * b - 1) <= 1e-12


class TestSpot:
    def test_root_is_s0(self):
        tree = MarketTree.homogeneous(2, 1.2, 0.9, s0=3.5)
        assert spot_price(tree, NodePath.root()) == 3.5

    def test_double_up(self):
        tree = MarketTree.homogeneous(2, 1.2, 0.9)
        assert spot_price(tree, NodePath.from_string("UU")) == pytest.approx(1.44, abs=1e-15)

    def test_up_down_mixed_factors(self):
        tree = MarketTree(2, 1.0, ((1.2,), (1.5, 1.1)), ((0.8,), (0.7, 0.9)))
        # up then down: 1.2 * beta_2 at the up node (index 1) = 1.2 * 0.9
        assert spot_price(tree, NodePath.from_string("UD")) == pytest.approx(1.08, abs=1e-15)

    def test_level_out_of_range(self):
        tree = MarketTree.homogeneous(1, 1.2, 0.9)
        with pytest.raises(DomainError):
            spot_price(tree, NodePath.from_string("UU"))

    def test_positive_and_matches_reference(self, rng):
        for n_steps in (1, 2, 3, 4):
            tree = random_market(rng, n_steps)
            prices = tree.node_prices()
            for level in range(n_steps + 1):
                for i in range(2**level):
                    node = NodePath.from_index(level, i)
                    value = spot_price(tree, node)
                    assert value > 0
                    assert value == pytest.approx(spot_reference(tree, node.moves), rel=1e-12)
                    assert prices[level][i] == pytest.approx(value, rel=1e-12)


class TestNodePath:
    @given(st.integers(0, 6), st.data())
    def test_index_roundtrip(self, level, data):
        index = data.draw(st.integers(0, max(0, 2**level - 1)))
        node = NodePath.from_index(level, index)
        assert node.level == level
        assert node.index == index

    def test_rejects_bad_moves(self):
        with pytest.raises(ValueError):
            NodePath(("U", "X"))


class TestConfig:
    def test_modes_agree(self):
        homogeneous = market_from_config({"N": 2, "mode": "homogeneous", "alpha": 1.2, "beta": 0.9})
        semi = market_from_config({"N": 2, "mode": "semi", "alpha": [1.2, 1.2], "beta": [0.9, 0.9]})
        node = market_from_config(
            {"N": 2, "mode": "node", "alpha": [[1.2], [1.2, 1.2]], "beta": [[0.9], [0.9, 0.9]]}
        )
        assert homogeneous == semi == node

    def test_drift_mode(self):
        cfg = {
            "N": 1,
            "mode": "drift",
            "x0": 0.0,
            "a": [0.0, 0.0],
            "u": [[0.2]],
            "d": [[-0.1]],
        }
        tree = market_from_config(cfg)
        assert tree.alpha == ((1.2,),) and tree.beta == ((0.9,),) and tree.s0 == 1.0

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="unknown mode"):
            market_from_config({"N": 1, "mode": "mystery", "alpha": 1.2, "beta": 0.9})

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symcret import (
    BudgetExceededError,
    Controller,
    ContractError,
    FiniteTransitionSystem,
    ReachAvoidSpec,
    check_spec,
    controllable_predecessor,
    controlled_system,
    controller_count,
    enumerate_controllers,
    is_sub_controller,
    losing_initial_states,
    synthesize_reach_avoid,
    winning_region,
)
from symcret.fixtures import ALPHA, BETA
from symcret.oracle import random_system

from conftest import seeded_rng


def brute_force_predecessor(sys, safe, target):
    # Independent oracle: literal set comprehension over raw rows.
    return frozenset(
        x
        for x in safe
        if any(
            sys.trans[(x, u)] and sys.trans[(x, u)] <= target
            for u in sys.inputs
        )
    )


class TestControllablePredecessor:
    def test_extended_abstraction_row(self, fx):
        safe = frozenset(fx.s2_extended.states) - {"d"}
        got = controllable_predecessor(fx.s2_extended, safe, {"f"})
        assert got == frozenset({"b", "e", "f"})
        assert got == brute_force_predecessor(fx.s2_extended, safe, frozenset({"f"}))

    def test_target_equals_safe(self, fx):
        everything = frozenset(fx.s2.states)
        assert controllable_predecessor(fx.s2, everything, everything) == everything

    def test_chain_parent(self):
        sys = FiniteTransitionSystem(
            ("s0", "s1", "s2"), ("go",),
            {("s0", "go"): {"s1"}, ("s1", "go"): {"s2"}, ("s2", "go"): {"s2"}},
        )
        got = controllable_predecessor(sys, frozenset(sys.states), {"s1"})
        assert got == frozenset({"s0"})

    def test_target_outside_safe_rejected(self, fx):
        with pytest.raises(ContractError):
            controllable_predecessor(fx.s2, {"a"}, {"f"})


class TestSynthesis:
    def test_original_abstraction_admits_both_routes(self, fx):
        result = synthesize_reach_avoid(fx.s2, fx.spec2)
        assert result is not None
        assert result.winning == frozenset({"a", "b", "e", "f"})
        assert result.controller.choices["a"] == frozenset({ALPHA, BETA})
        assert is_sub_controller(fx.c2_via_b, result.controller)
        assert is_sub_controller(fx.c2_via_e, result.controller)

    def test_both_routes_actually_solve(self, fx):
        for c2 in (fx.c2_via_b, fx.c2_via_e):
            assert check_spec(controlled_system(fx.s2, c2), fx.spec2, 7).holds

    def test_extension_collapses_to_one_route(self, fx):
        result = synthesize_reach_avoid(fx.s2_extended, fx.spec2)
        assert result is not None
        assert result.controller.choices["a"] == frozenset({BETA})
        # The discarded route genuinely fails on the extension.
        assert not check_spec(
            controlled_system(fx.s2_extended, fx.c2_via_b), fx.spec2, 7
        ).holds

    def test_unreachable_target(self, fx):
        spec = ReachAvoidSpec(frozenset({"a"}), frozenset({"d"}), frozenset())
        assert synthesize_reach_avoid(fx.s2, spec) is None
        assert losing_initial_states(fx.s2, spec) == frozenset({"a"})

    def test_target_obstacle_clash_rejected(self, fx):
        spec = ReachAvoidSpec(frozenset({"a"}), frozenset({"d"}), frozenset({"d"}))
        with pytest.raises(ContractError):
            winning_region(fx.s2, spec)

    def test_result_invariants(self, fx):
        result = synthesize_reach_avoid(fx.s2_extended, fx.spec2)
        assert fx.spec2.target <= result.winning
        assert not result.winning & fx.spec2.obstacle
        for x, us in result.controller.choices.items():
            assert x in result.winning - fx.spec2.target
            for u in us:
                succ = fx.s2_extended.successors(x, u)
                assert succ and succ <= result.winning
                assert max(result.rank[xp] for xp in succ) < result.rank[x]

    def test_ranks_on_extension(self, fx):
        result = synthesize_reach_avoid(fx.s2_extended, fx.spec2)
        assert result.rank == {"f": 0, "b": 1, "e": 1, "a": 2}

    def test_mutation_breaks_soundness(self, fx):
        # Re-enabling the pruned route at `a` lets a run reach the obstacle.
        result = synthesize_reach_avoid(fx.s2_extended, fx.spec2)
        widened = dict(result.controller.choices)
        widened["a"] = widened["a"] | {ALPHA}
        bad = Controller(widened)
        assert not check_spec(controlled_system(fx.s2_extended, bad), fx.spec2, 7).holds

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_winning_region_monotone(self, seed):
        rng = seeded_rng(seed)
        sys = random_system(rng, rng.randint(3, 5), rng.randint(1, 2))
        states = list(sys.states)
        target = frozenset(rng.sample(states, 1))
        extra = frozenset(rng.sample(states, 1))
        obstacle = frozenset(rng.sample(states, 1)) - target - extra
        base = ReachAvoidSpec(frozenset(), target, obstacle)
        wider_target = ReachAvoidSpec(frozenset(), target | extra, obstacle)
        w_base, _ = winning_region(sys, base)
        w_wide, _ = winning_region(sys, wider_target)
        assert w_base <= w_wide
        more_obstacle = frozenset(rng.sample(states, 1)) - (target | extra)
        harder = ReachAvoidSpec(frozenset(), target, obstacle | more_obstacle)
        w_hard, _ = winning_region(sys, harder)
        assert w_hard <= w_base

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_random_synthesis_is_sound(self, seed):
        rng = seeded_rng(seed)
        sys = random_system(rng, rng.randint(2, 5), rng.randint(1, 3))
        states = list(sys.states)
        target = frozenset(rng.sample(states, rng.randint(1, len(states))))
        obstacle = frozenset(rng.sample(states, rng.randint(0, len(states) - 1))) - target
        initial = frozenset(rng.sample(states, rng.randint(1, len(states))))
        spec = ReachAvoidSpec(initial, target, obstacle)
        result = synthesize_reach_avoid(sys, spec)
        if result is None:
            assert losing_initial_states(sys, spec)
            return
        closed = controlled_system(sys, result.controller)
        assert check_spec(closed, spec, len(sys.states) + 1).holds


class TestEnumeration:
    def test_two_input_state_order(self, fx):
        menus = [
            sorted(c.choices["a"]) for c in enumerate_controllers(fx.s2, {"a"})
        ]
        assert menus == [[ALPHA], [BETA], [ALPHA, BETA]]

    def test_empty_domain_single_empty_controller(self, fx):
        ctrls = list(enumerate_controllers(fx.s2, set()))
        assert len(ctrls) == 1 and ctrls[0].choices == {}

    def test_count_matches_enumeration(self, fx):
        n = controller_count(fx.s2, fx.s2.states)
        assert n == 3  # only `a` has more than one available input
        assert len(list(enumerate_controllers(fx.s2, fx.s2.states))) == n

    def test_budget(self, fx):
        with pytest.raises(BudgetExceededError):
            list(enumerate_controllers(fx.s2, fx.s2.states, budget=2))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_count_formula_random(self, seed):
        rng = seeded_rng(seed)
        sys = random_system(rng, rng.randint(2, 3), rng.randint(1, 2))
        domain = sys.states[: rng.randint(1, len(sys.states))]
        assert controller_count(sys, domain) == len(list(enumerate_controllers(sys, domain)))


class TestSubController:
    def test_reflexive(self, fx):
        assert is_sub_controller(fx.c2_via_b, fx.c2_via_b)

    def test_respects_pointwise_containment(self, fx):
        big = Controller({"a": {ALPHA, BETA}})
        small = Controller({"a": {ALPHA}})
        assert is_sub_controller(small, big)
        assert not is_sub_controller(big, small)

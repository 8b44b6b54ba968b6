import random

import pytest

from symcret import (
    BrokenCertificateError,
    Controller,
    ContractError,
    ControllerUndefinedError,
    DynamicConcretizer,
    FiniteTransitionSystem,
    Interface,
    Relation,
    RelationKind,
    Trajectory,
    closed_loop_run,
    closed_loop_tree,
    controlled_system,
    dynamic_init,
    dynamic_step,
    enumerate_dynamic_runs,
    maximal_interface,
    maximal_trajectories,
    memoryless_controller,
    scripted,
)
from symcret.fixtures import ALPHA, BETA
from symcret.relations import StrictnessError


@pytest.fixture(scope="module")
def asr_interface(fx):
    return maximal_interface(fx.s1, fx.s2, fx.relation, RelationKind.ASR)


class TestMemorylessController:
    def test_fig5_values(self, fx, asr_interface):
        c1 = memoryless_controller(fx.c2_via_b, fx.relation, asr_interface)
        assert c1.choices == {"1": frozenset({"0"}), "2": frozenset({"0", "1"})}

    def test_detour_values(self, fx, asr_interface):
        c1 = memoryless_controller(fx.c2_via_e, fx.relation, asr_interface)
        assert c1.choices == {"1": frozenset({"1"}), "4": frozenset({"0"})}

    def test_frr_interface_reduces_to_composition(self, fx):
        ident = Relation.identity(fx.s1.states)
        iface = maximal_interface(fx.s1, fx.s1, ident, RelationKind.FRR)
        c2 = Controller({"1": {"0"}, "2": {"0", "1"}})
        c1 = memoryless_controller(c2, ident, iface)
        assert c1.choices == c2.choices

    def test_identity_relation_contains_original(self, fx):
        ident = Relation.identity(fx.s1.states)
        iface = maximal_interface(fx.s1, fx.s1, ident, RelationKind.MCR)
        c2 = Controller({"1": {"0"}, "3": {"0"}})
        c1 = memoryless_controller(c2, ident, iface)
        for x, us in c2.choices.items():
            assert us <= c1.choices[x]

    def test_needs_strict_relation(self, fx, asr_interface):
        partial = Relation(fx.s1.states, fx.s2.states, fx.relation.pairs - {("3", "d")})
        with pytest.raises(StrictnessError):
            memoryless_controller(fx.c2_via_b, partial, asr_interface)

    def test_missing_interface_entry_is_contract_error(self, fx):
        stub = Interface(RelationKind.ASR, {("1", "a", ALPHA): frozenset({"0"})})
        with pytest.raises(ContractError):
            memoryless_controller(fx.c2_via_e, fx.relation, stub)

    def test_output_is_static_value(self, fx, asr_interface):
        c1 = memoryless_controller(fx.c2_via_b, fx.relation, asr_interface)
        assert isinstance(c1, Controller)

    def test_stateless_across_call_orders(self, fx, asr_interface):
        c1 = memoryless_controller(fx.c2_via_b, fx.relation, asr_interface)
        rng = random.Random(11)
        states = [x for x in fx.s1.states if x in c1.choices]
        baseline = {x: c1.choices[x] for x in states}
        for _ in range(5):
            rng.shuffle(states)
            assert all(c1.choices[x] == baseline[x] for x in states)


class TestDynamicArchitecture:
    def test_init_direct_route(self, fx, asr_interface):
        state, u1 = dynamic_init(fx.c2_via_b, fx.relation, asr_interface, "1")
        assert (state.x2, state.u2, u1) == ("a", ALPHA, "0")

    def test_init_detour_route(self, fx, asr_interface):
        state, u1 = dynamic_init(fx.c2_via_e, fx.relation, asr_interface, "1")
        assert (state.x2, state.u2) == ("a", BETA)
        assert u1 in asr_interface.inputs_for("1", "a", BETA)

    def test_init_uncovered_everywhere(self, fx, asr_interface):
        with pytest.raises(ControllerUndefinedError):
            dynamic_init(fx.c2_via_e, fx.relation, asr_interface, "3")

    def test_init_unrelated_state(self, fx, asr_interface):
        partial = Relation(fx.s1.states, fx.s2.states, fx.relation.pairs - {("3", "d")})
        with pytest.raises(ContractError):
            dynamic_init(fx.c2_via_b, partial, asr_interface, "3")

    def test_step_resynchronises_through_overlap(self, fx, asr_interface):
        state, _ = dynamic_init(fx.c2_via_b, fx.relation, asr_interface, "1")
        # Plant moved 1 -> 2; of the two quantizations {b, c} only b is a
        # successor of (a, alpha), so the tracker commits to b.
        state, u1 = dynamic_step(
            state, fx.c2_via_b, fx.relation, asr_interface, fx.s2, "2"
        )
        assert (state.x2, u1) == ("b", "0")

    def test_three_step_run_reproduces_abstract_route(self, fx, asr_interface):
        tracker = DynamicConcretizer(fx.s2, fx.c2_via_b, fx.relation, asr_interface)
        run = closed_loop_run(fx.s1, tracker, "1", 3)
        assert run.states == ("1", "2", "5")
        assert tuple(step[1] for step in tracker.trace) == ("a", "b")
        final = fx.s2.successors(tracker.state.x2, tracker.state.u2) & fx.relation.forward("5")
        assert final == frozenset({"f"})

    def test_partition_case_has_no_choice(self, fx):
        # Tracking a system against itself along identity: the quantizer is
        # single-valued, so both the start and every re-synchronisation are
        # forced singletons.
        ident = Relation.identity(fx.s1.states)
        iface = maximal_interface(fx.s1, fx.s1, ident, RelationKind.MCR)
        state, u1 = dynamic_init(fx.c1_safe, ident, iface, "1")
        assert (state.x2, state.u2, u1) == ("1", "0", "0")
        state, u1 = dynamic_step(state, fx.c1_safe, ident, iface, fx.s1, "2")
        assert (state.x2, u1) == ("2", "0")

    def test_broken_certificate_detected(self):
        s1 = FiniteTransitionSystem(("x", "y"), ("u",), {("x", "u"): {"y"}, ("y", "u"): {"y"}})
        s2 = FiniteTransitionSystem(("q", "r"), ("v",), {("q", "v"): {"q"}, ("r", "v"): {"r"}})
        rel = Relation(s1.states, s2.states, frozenset({("x", "q"), ("y", "r")}))
        # Hand-built interface that was never certified: q loops while the
        # plant escapes to y, whose only quantization r is not a successor.
        iface = Interface(RelationKind.ASR, {("x", "q", "v"): frozenset({"u"})})
        c2 = Controller({"q": {"v"}})
        state, _ = dynamic_init(c2, rel, iface, "x")
        with pytest.raises(BrokenCertificateError):
            dynamic_step(state, c2, rel, iface, s2, "y")


class TestClosedLoopRun:
    def test_scripted_inputs_reach_the_obstacle(self, fx, asr_interface):
        c1 = memoryless_controller(fx.c2_via_b, fx.relation, asr_interface)
        run = closed_loop_run(fx.s1, c1, "1", 3, choose_input=["0", "1"])
        assert run == Trajectory(("1", "2", "3"), ("0", "1"))

    def test_safe_controller_default_run(self, fx):
        run = closed_loop_run(fx.s1, fx.c1_safe, "1", 3)
        assert run.states == ("1", "2", "5")

    def test_horizon_one(self, fx):
        run = closed_loop_run(fx.s1, fx.c1_safe, "1", 1)
        assert run == Trajectory(("1",))

    def test_undefined_state_raises_with_name(self, fx):
        with pytest.raises(ControllerUndefinedError) as err:
            closed_loop_run(fx.s1, fx.c1_safe, "1", 4)
        assert err.value.state == "5"

    def test_scripted_resolver_validates(self, fx):
        with pytest.raises(ContractError):
            closed_loop_run(fx.s1, fx.c1_safe, "1", 3, resolver=["4"])

    def test_script_exhaustion(self, fx):
        with pytest.raises(ContractError):
            closed_loop_run(fx.s1, fx.c1_safe, "1", 3, choose_input=scripted(["0"]))

    def test_tree_matches_maximal_behavior(self, fx, asr_interface):
        c1 = memoryless_controller(fx.c2_via_b, fx.relation, asr_interface)
        tree = closed_loop_tree(fx.s1, c1, "1", 6)
        expected = maximal_trajectories(controlled_system(fx.s1, c1), {"1"}, 6)
        assert tree == expected
        assert {t.states for t in tree} == {("1", "2", "3"), ("1", "2", "5")}


class TestDynamicEnumeration:
    def test_all_runs_keep_the_relation_and_never_block(self, fx, asr_interface):
        total = 0
        for c2 in (fx.c2_via_b, fx.c2_via_e):
            for x0 in fx.s1.states:
                if not any(x2 in c2.choices for x2 in fx.relation.forward(x0)):
                    continue
                runs = enumerate_dynamic_runs(
                    fx.s1, fx.s2, c2, fx.relation, asr_interface, x0, 6
                )
                total += len(runs)
                for run in runs:
                    assert all(
                        (x1, x2) in fx.relation.pairs
                        for x1, x2 in zip(run.concrete, run.abstract)
                    )
                    assert Trajectory(run.concrete, run.concrete_inputs).is_valid_for(fx.s1)
                    assert Trajectory(run.abstract, run.abstract_inputs).is_valid_for(fx.s2)
                    assert all(
                        u2 in c2.choices[x2]
                        for x2, u2 in zip(run.abstract, run.abstract_inputs)
                    )
        assert total > 0

"""The bundled fig5 scenario: a five-state plant, a six-state abstraction
over an overlapping two-cell quantizer, and the controllers that separate
the alternating-simulation guarantee from the memoryless one.

The concrete plant has states 1..5 and inputs 0/1; the abstraction has
states a..f and inputs alpha/beta/gamma, with state 2 quantizing to both b
and c.  The reach-avoid goal drives 1 to 5 while avoiding 3 (abstractly: a
to f avoiding d).

Two abstract controllers solve the abstract problem: one routes a -> b -> f,
the other a -> e -> f.  States b..f each have a single available input, so a
total controller is pinned everywhere except at a; the bundled controllers
list the forced value at c (which the route through b exercises via the
overlap) and omit the states their runs never consult.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import Controller, FiniteTransitionSystem, ReachAvoidSpec
from .relations import (
    Relation,
    RelationKind,
    check_asr,
    check_mcr,
    maximal_interface,
    mcr_extension,
)

ALPHA, BETA, GAMMA = "α", "β", "γ"


@dataclass(frozen=True)
class Fig5:
    s1: FiniteTransitionSystem
    s2: FiniteTransitionSystem
    s2_extended: FiniteTransitionSystem
    relation: Relation
    spec1: ReachAvoidSpec
    spec2: ReachAvoidSpec
    c2_via_b: Controller
    c2_via_e: Controller
    c1_safe: Controller


def fig5() -> Fig5:
    """Build the scenario.  The extended abstraction is derived, not stated:
    it is the completion of s2 that makes the memoryless check pass."""
    s1 = FiniteTransitionSystem(
        states=("1", "2", "3", "4", "5"),
        inputs=("0", "1"),
        trans={
            ("1", "0"): {"2"},
            ("1", "1"): {"4"},
            ("2", "0"): {"5"},
            ("2", "1"): {"3"},
            ("3", "0"): {"3"},
            ("4", "0"): {"5"},
            ("5", "0"): {"5"},
        },
    )
    s2 = FiniteTransitionSystem(
        states=("a", "b", "c", "d", "e", "f"),
        inputs=(ALPHA, BETA, GAMMA),
        trans={
            ("a", ALPHA): {"b"},
            ("a", BETA): {"e"},
            ("b", ALPHA): {"f"},
            ("c", ALPHA): {"d"},
            ("d", GAMMA): {"d"},
            ("e", ALPHA): {"f"},
            ("f", GAMMA): {"f"},
        },
    )
    relation = Relation(
        s1.states,
        s2.states,
        frozenset({("1", "a"), ("2", "b"), ("2", "c"), ("3", "d"), ("4", "e"), ("5", "f")}),
    )
    spec1 = ReachAvoidSpec(frozenset({"1"}), frozenset({"5"}), frozenset({"3"}))
    spec2 = ReachAvoidSpec(frozenset({"a"}), frozenset({"f"}), frozenset({"d"}))
    c2_via_b = Controller({"a": {ALPHA}, "b": {ALPHA}, "c": {ALPHA}})
    c2_via_e = Controller({"a": {BETA}, "e": {ALPHA}})
    c1_safe = Controller({"1": {"0"}, "2": {"0"}})
    return Fig5(
        s1=s1,
        s2=s2,
        s2_extended=mcr_extension(s1, s2, relation),
        relation=relation,
        spec1=spec1,
        spec2=spec2,
        c2_via_b=c2_via_b,
        c2_via_e=c2_via_e,
        c1_safe=c1_safe,
    )


def verify_fig5_consistency(fx: Fig5 | None = None) -> dict[str, bool]:
    """Gate run before anything else trusts the fixture.

    Checks: both systems are non-blocking, the original abstraction is
    deterministic while the extension is not, the relation is an alternating
    simulation, the maximal interface takes exactly the documented values on
    the overlap-relevant keys, and the memoryless check fails at exactly the
    documented spot (state 1 against a under alpha, exposed by cell c at
    state 2).
    """
    fx = fx or fig5()
    checks: dict[str, bool] = {}
    checks["s1_non_blocking"] = fx.s1.is_non_blocking()
    checks["s2_non_blocking"] = fx.s2.is_non_blocking()
    checks["s2_deterministic"] = fx.s2.is_deterministic()
    checks["s2_extended_non_deterministic"] = not fx.s2_extended.is_deterministic()
    checks["relation_strict"] = fx.relation.is_strict()
    checks["relation_overlaps_at_2"] = fx.relation.forward("2") == frozenset({"b", "c"})

    asr = check_asr(fx.s1, fx.s2, fx.relation)
    checks["asr_holds"] = asr.holds

    interface = maximal_interface(fx.s1, fx.s2, fx.relation, RelationKind.ASR)
    checks["interface_1_a_alpha"] = interface.inputs_for("1", "a", ALPHA) == frozenset({"0"})
    checks["interface_2_b_alpha"] = interface.inputs_for("2", "b", ALPHA) == frozenset({"0"})
    checks["interface_2_c_alpha"] = interface.inputs_for("2", "c", ALPHA) == frozenset({"1"})

    mcr = check_mcr(fx.s1, fx.s2, fx.relation)
    checks["mcr_refuted"] = not mcr.holds
    checks["mcr_witness"] = (
        mcr.witness is not None
        and (mcr.witness.x1, mcr.witness.x2, mcr.witness.u2) == ("1", "a", ALPHA)
        and mcr.witness.evidence == ("2", "c")
    )
    failed = sorted(name for name, ok in checks.items() if not ok)
    if failed:
        raise AssertionError(f"fig5 fixture consistency checks failed: {failed}")
    return checks

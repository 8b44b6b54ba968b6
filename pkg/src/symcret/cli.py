"""Command-line front end.

Objects live in JSON files; an argument of the form ``path`` names a
single-object file and ``path:name`` picks a member out of a bundle file.
Exit codes: 0 when the queried property holds or the command succeeds, 1 when
a property is refuted or synthesis is unsolvable (the witness is still
emitted), 2 for usage and validation errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import jsonio
from .concretize import (
    DynamicConcretizer,
    closed_loop_run,
    enumerate_dynamic_runs,
    memoryless_controller,
)
from .core import Controller, FiniteTransitionSystem, SymcretError
from .fixtures import ALPHA, BETA, fig5, verify_fig5_consistency
from .interval import prove_frr_infeasible_fig8
from .jsonio import FormatError, ProjectBundle
from .oracle import (
    check_controlled_simulability,
    check_memoryless_concretization,
    check_memoryless_concretization_all_controllers,
    run_crosscheck,
    CrosscheckFailure,
)
from .relations import (
    Relation,
    RelationKind,
    check_mcr,
    check_relation,
    extended_relation,
    maximal_interface,
    mcr_extension,
)
from .synthesis import is_sub_controller, losing_initial_states, synthesize_reach_avoid


class UsageError(SymcretError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _emit(payload: dict[str, Any], json_only: bool, lines: Sequence[str] = ()) -> None:
    if not json_only:
        for line in lines:
            print(line)
    print(jsonio.dumps(payload), end="")


def _fail(code: str, message: str) -> int:
    print(json.dumps({"error": code, "detail": message}), file=sys.stderr)
    return 2


# ------------------------------------------------------------- references


def _split_ref(ref: str) -> tuple[Path, str | None]:
    path, sep, name = ref.rpartition(":")
    if sep and path and Path(path).suffix == ".json":
        return Path(path), name
    return Path(ref), None


def _load_doc(ref: str) -> Any:
    path, member = _split_ref(ref)
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    doc = jsonio.load(path)
    if member is None:
        return doc
    if doc.get("kind") != "bundle":
        raise UsageError(f"{path} is not a bundle, cannot select member {member!r}")
    for section in ("systems", "relations", "controllers", "specs", "covers"):
        if member in doc.get(section, {}):
            return doc[section][member]
    raise UsageError(f"bundle {path} has no member named {member!r}")


def _load_system(ref: str) -> FiniteTransitionSystem:
    return jsonio.system_from_obj(_load_doc(ref))


def _load_relation(ref: str, s1: FiniteTransitionSystem, s2: FiniteTransitionSystem) -> Relation:
    return jsonio.relation_from_obj(_load_doc(ref), s1, s2)


def _load_controller(ref: str) -> Controller:
    return jsonio.controller_from_obj(_load_doc(ref))


def _load_spec(ref: str):
    return jsonio.spec_from_obj(_load_doc(ref))


def _maybe_save(obj: dict[str, Any], out: str | None) -> None:
    if out:
        jsonio.save(out, obj)


# --------------------------------------------------------------- commands


def _witness_obj(witness) -> Any:
    if witness is None:
        return None
    return {
        "x1": witness.x1,
        "x2": witness.x2,
        "u2": witness.u2,
        "evidence": list(witness.evidence) if witness.evidence else None,
    }


def cmd_check(args: argparse.Namespace) -> int:
    s1 = _load_system(args.s1)
    s2 = _load_system(args.s2)
    rel = _load_relation(args.rel, s1, s2)
    kind = RelationKind(args.kind)
    verdict = check_relation(kind, s1, s2, rel)
    if args.extended_out:
        ext = extended_relation(kind, s1, s2, rel)
        jsonio.save(args.extended_out, {
            "format": jsonio.FORMAT,
            "kind": "extended-relation",
            "relation_kind": kind.value,
            "tuples": [list(t) for t in sorted(ext.tuples)],
        })
    payload = {
        "format": jsonio.FORMAT,
        "kind": "relation-verdict",
        "relation_kind": kind.value,
        "holds": verdict.holds,
        "witness": _witness_obj(verdict.witness),
    }
    _emit(payload, args.json, [f"{kind.value}: {'holds' if verdict.holds else 'refuted'}"])
    return 0 if verdict.holds else 1


def cmd_extend(args: argparse.Namespace) -> int:
    s1 = _load_system(args.s1)
    s2 = _load_system(args.s2)
    rel = _load_relation(args.rel, s1, s2)
    extended = mcr_extension(s1, s2, rel)
    obj = jsonio.system_to_obj(extended)
    _maybe_save(obj, args.out)
    _emit(obj, args.json, ["wrote extended abstraction" if args.out else "extended abstraction:"])
    return 0


def cmd_synthesize(args: argparse.Namespace) -> int:
    sys_ = _load_system(args.sys)
    spec = _load_spec(args.spec)
    spec.validate_for(sys_)
    result = synthesize_reach_avoid(sys_, spec)
    if result is None:
        payload = {
            "format": jsonio.FORMAT,
            "kind": "synthesis-result",
            "solvable": False,
            "losing_initial": sorted(losing_initial_states(sys_, spec)),
        }
        _emit(payload, args.json, ["unsolvable"])
        return 1
    payload = {
        "format": jsonio.FORMAT,
        "kind": "synthesis-result",
        "solvable": True,
        "controller": jsonio.controller_to_obj(result.controller),
        "rank": {x: result.rank[x] for x in sorted(result.rank)},
        "winning": sorted(result.winning),
    }
    _maybe_save(payload, args.out)
    _emit(payload, args.json, ["solvable"])
    return 0


def cmd_concretize(args: argparse.Namespace) -> int:
    s1 = _load_system(args.s1)
    s2 = _load_system(args.s2)
    rel = _load_relation(args.rel, s1, s2)
    c2 = _load_controller(args.controller)
    kind = RelationKind(args.kind)
    interface = maximal_interface(s1, s2, rel, kind)
    if args.mode == "memoryless":
        c1 = memoryless_controller(c2, rel, interface)
        obj = jsonio.controller_to_obj(c1)
    else:
        obj = {
            "format": jsonio.FORMAT,
            "kind": "concretizer",
            "s2": jsonio.system_to_obj(s2),
            "relation": jsonio.relation_to_obj(rel),
            "interface": jsonio.interface_to_obj(interface),
            "controller": jsonio.controller_to_obj(c2),
        }
    _maybe_save(obj, args.out)
    _emit(obj, args.json, [f"{args.mode} concretization ready"])
    return 0


def _controller_for_simulation(ref: str, s1: FiniteTransitionSystem):
    doc = _load_doc(ref)
    if doc.get("kind") == "concretizer":
        s2 = jsonio.system_from_obj(doc["s2"])
        rel = jsonio.relation_from_obj(doc["relation"], s1, s2)
        interface = jsonio.interface_from_obj(doc["interface"])
        c2 = jsonio.controller_from_obj(doc["controller"])
        return DynamicConcretizer(s2, c2, rel, interface)
    return jsonio.controller_from_obj(doc)


def cmd_simulate(args: argparse.Namespace) -> int:
    sys_ = _load_system(args.sys)
    controller = _controller_for_simulation(args.controller, sys_)
    resolver = args.resolver.split(",") if args.resolver and args.resolver != "lex" else None
    input_script = args.input_script.split(",") if args.input_script else None
    traj = closed_loop_run(
        sys_, controller, args.from_state, args.horizon,
        choose_input=input_script, resolver=resolver,
    )
    if isinstance(controller, DynamicConcretizer):
        payload = jsonio.dynamic_trace_to_obj(controller.trace)
    else:
        payload = jsonio.trajectory_to_obj(traj)
    _emit(payload, args.json, [" -> ".join(traj.states)])
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    s1 = _load_system(args.s1)
    s2 = _load_system(args.s2)
    rel = _load_relation(args.rel, s1, s2)
    if args.property == "one":
        if not (args.c1 and args.c2):
            raise UsageError("property `one` needs --c1 and --c2")
        verdict = check_controlled_simulability(
            s1, s2, rel, _load_controller(args.c1), _load_controller(args.c2), args.horizon
        )
        witness = None
        if verdict.witness:
            witness = {"concrete": list(verdict.witness.concrete),
                       "inputs": list(verdict.witness.concrete_inputs)}
    else:
        interface = maximal_interface(s1, s2, rel, RelationKind(args.kind))
        if args.property == "two":
            if not args.c2:
                raise UsageError("property `two` needs --c2")
            verdict = check_memoryless_concretization(
                s1, s2, rel, interface, _load_controller(args.c2), args.horizon
            )
        else:
            verdict = check_memoryless_concretization_all_controllers(
                s1, s2, rel, interface, args.horizon, budget=args.budget
            )
        witness = None
        inner = getattr(verdict, "witness", None)
        if inner is not None:
            witness = {
                "concrete": list(inner.concrete),
                "inputs": list(inner.concrete_inputs),
                "quantization": list(inner.quantization) if inner.quantization else None,
            }
        if getattr(verdict, "witness_controller", None) is not None:
            witness["controller"] = jsonio.controller_to_obj(verdict.witness_controller)
    payload = {
        "format": jsonio.FORMAT,
        "kind": "property-verdict",
        "property": args.property,
        "holds": verdict.holds,
        "witness": witness,
    }
    _emit(payload, args.json, [f"property {args.property}: {'holds' if verdict.holds else 'refuted'}"])
    return 0 if verdict.holds else 1


# ------------------------------------------------------------------ demos


def _table(rows: list[tuple[str, bool, str]], json_only: bool, extra: dict[str, Any]) -> int:
    ok = all(passed for _, passed, _ in rows)
    if not json_only:
        width = max(len(label) for label, _, _ in rows)
        for label, passed, detail in rows:
            mark = "PASS" if passed else "FAIL"
            print(f"  [{mark}] {label.ljust(width)}  {detail}")
        print(f"{'all checks passed' if ok else 'SOME CHECKS FAILED'}")
    if json_only:
        payload = {
            "format": jsonio.FORMAT,
            "kind": "demo-report",
            "checks": [
                {"label": label, "passed": passed, "detail": detail}
                for label, passed, detail in rows
            ],
            "passed": ok,
            **extra,
        }
        print(jsonio.dumps(payload), end="")
    return 0 if ok else 1


def fig5_bundle() -> ProjectBundle:
    fx = fig5()
    bundle = ProjectBundle()
    bundle.systems = {"S1": fx.s1, "S2": fx.s2, "S2x": fx.s2_extended}
    bundle.relations = {"R": ("S1", "S2", fx.relation), "Rx": ("S1", "S2x", fx.relation)}
    bundle.controllers = {
        "c2_via_b": ("S2", fx.c2_via_b),
        "c2_via_e": ("S2", fx.c2_via_e),
        "c1_safe": ("S1", fx.c1_safe),
    }
    bundle.specs = {
        "sigma1": ("S1", fx.spec1),
        "sigma2": ("S2", fx.spec2),
        "sigma2x": ("S2x", fx.spec2),
    }
    bundle.validate()
    return bundle


def cmd_demo_fig5(args: argparse.Namespace) -> int:
    fx = fig5()
    rows: list[tuple[str, bool, str]] = []

    try:
        verify_fig5_consistency(fx)
        rows.append(("fixture-consistency", True, "all fixture checks passed"))
    except AssertionError as err:
        rows.append(("fixture-consistency", False, str(err)))

    asr = check_relation(RelationKind.ASR, fx.s1, fx.s2, fx.relation)
    rows.append(("alternating-simulation", asr.holds, "holds"))

    mcr = check_relation(RelationKind.MCR, fx.s1, fx.s2, fx.relation)
    mcr_ok = (
        not mcr.holds
        and mcr.witness is not None
        and (mcr.witness.x1, mcr.witness.x2, mcr.witness.u2) == ("1", "a", ALPHA)
        and mcr.witness.evidence == ("2", "c")
    )
    rows.append((
        "memoryless-relation",
        mcr_ok,
        f"refuted at (1, a, {ALPHA}), successor pair (2, c) escapes",
    ))

    interface = maximal_interface(fx.s1, fx.s2, fx.relation, RelationKind.ASR)
    iface_ok = (
        interface.inputs_for("1", "a", ALPHA) == frozenset({"0"})
        and interface.inputs_for("2", "b", ALPHA) == frozenset({"0"})
        and interface.inputs_for("2", "c", ALPHA) == frozenset({"1"})
    )
    rows.append(("maximal-interface", iface_ok,
                 f"(1,a,{ALPHA})->{{0}}  (2,b,{ALPHA})->{{0}}  (2,c,{ALPHA})->{{1}}"))

    c1 = memoryless_controller(fx.c2_via_b, fx.relation, interface)
    values_ok = (
        c1.choices.get("1") == frozenset({"0"}) and c1.choices.get("2") == frozenset({"0", "1"})
    )
    rows.append(("memoryless-controller-values", values_ok, "c1(1)={0}, c1(2)={0,1}"))

    p2_bad = check_memoryless_concretization(fx.s1, fx.s2, fx.relation, interface, fx.c2_via_b, 6)
    bad_ok = (
        not p2_bad.holds
        and p2_bad.witness is not None
        and p2_bad.witness.concrete == ("1", "2", "3")
        and p2_bad.witness.quantization == ("a", "c", "d")
    )
    rows.append(("memoryless-guarantee-refuted", bad_ok,
                 "run (1,2,3) quantizes to invalid abstract trace (a,c,d)"))

    p2_good = check_memoryless_concretization(fx.s1, fx.s2, fx.relation, interface, fx.c2_via_e, 6)
    rows.append(("alternate-controller-safe", p2_good.holds,
                 "the detour controller satisfies the memoryless guarantee"))

    p1_bad = check_controlled_simulability(
        fx.s1, fx.s2, fx.relation, c1, fx.c2_via_b, 6
    )
    p1_good = check_controlled_simulability(
        fx.s1, fx.s2, fx.relation, fx.c1_safe, fx.c2_via_b, 6
    )
    rows.append((
        "controlled-simulability",
        (not p1_bad.holds and p1_bad.witness.concrete == ("1", "2", "3") and p1_good.holds),
        "concretized controller leaks run (1,2,3); the safe hand-built one does not",
    ))

    extended = fx.s2_extended
    ext_ok = (
        extended.successors("a", ALPHA) == frozenset({"b", "c"})
        and all(
            extended.trans[key] == fx.s2.trans[key]
            for key in fx.s2.trans
            if key != ("a", ALPHA)
        )
        and check_mcr(fx.s1, extended, fx.relation).holds
        and check_mcr(fx.s2, extended, Relation.identity(fx.s2.states)).holds
    )
    rows.append(("extension", ext_ok,
                 f"only row (a, {ALPHA}) grows, to {{b, c}}; memoryless checks pass"))

    res2 = synthesize_reach_avoid(fx.s2, fx.spec2)
    res2x = synthesize_reach_avoid(extended, fx.spec2)
    synth_ok = (
        res2 is not None
        and is_sub_controller(fx.c2_via_b, res2.controller)
        and is_sub_controller(fx.c2_via_e, res2.controller)
        and res2x is not None
        and res2x.controller.choices.get("a") == frozenset({BETA})
    )
    rows.append(("synthesis-collapse", synth_ok,
                 f"original admits both routes; extension pins a -> {{{BETA}}}"))

    dyn_ok = True
    runs_total = 0
    try:
        for c2 in (fx.c2_via_b, fx.c2_via_e):
            for x0 in fx.s1.states:
                if any(x2 in c2.choices for x2 in fx.relation.forward(x0)):
                    runs = enumerate_dynamic_runs(
                        fx.s1, fx.s2, c2, fx.relation, interface, x0, 6
                    )
                    runs_total += len(runs)
    except SymcretError:
        dyn_ok = False
    rows.append(("dynamic-architecture-invariant", dyn_ok and runs_total > 0,
                 f"{runs_total} fully branched runs, relation held, no empty intersection"))

    if args.export_bundle:
        jsonio.save(args.export_bundle, jsonio.bundle_to_obj(fig5_bundle()))

    return _table(rows, args.json, {"demo": "fig5"})


def cmd_demo_fig8(args: argparse.Namespace) -> int:
    bound = Fraction(args.bound)
    report = prove_frr_infeasible_fig8(bound)
    expected = {
        "0 < c < L": frozenset({"q1", "q2", "q3"}),
        "c = L": frozenset({"q2", "q3"}),
        "c = 0": frozenset({"q1"}),
    }
    rows: list[tuple[str, bool, str]] = []
    for case in report.constant_cases:
        ok = case.q1_successors == expected[case.label] and not case.solvable
        rows.append((
            f"constant-case {case.label}",
            ok,
            f"shift {case.shift}: q1 -> {{{', '.join(sorted(case.q1_successors))}}}, unsolvable",
        ))
    rows.append(("affine-feedback", (
        report.affine_solvable
        and report.affine_deterministic
        and report.affine_ranks.get("q1") == 1
        and report.affine_ranks.get("q3") == 1
        and report.affine_mcr_ok
    ), "deterministic, solvable, both side cells one step from the origin"))
    extra = {
        "demo": "fig8",
        "report": {
            "bound": jsonio.fraction_to_str(report.bound),
            "cases": [
                {
                    "label": c.label,
                    "shift": jsonio.fraction_to_str(c.shift),
                    "q1_successors": sorted(c.q1_successors),
                    "q3_successors": sorted(c.q3_successors),
                    "solvable": c.solvable,
                }
                for c in report.constant_cases
            ],
            "affine": {
                "solvable": report.affine_solvable,
                "deterministic": report.affine_deterministic,
                "ranks": dict(sorted(report.affine_ranks.items())),
                "memoryless_containment": report.affine_mcr_ok,
            },
            "rationale": report.rationale,
        },
    }
    return _table(rows, args.json, extra)


def cmd_demo_crosscheck(args: argparse.Namespace) -> int:
    try:
        report = run_crosscheck(trials=args.trials, seed=args.seed)
    except CrosscheckFailure as err:
        payload = {
            "format": jsonio.FORMAT,
            "kind": "crosscheck-report",
            "passed": False,
            "failed_law": err.law,
            "bundle": err.bundle,
        }
        _emit(payload, args.json, [f"law {err.law} FAILED"])
        return 1
    required = ("mcr_implies_asr", "mcr_sufficiency_trials", "asr_gap_necessity",
                "partition_collapse", "transitivity", "extension_postconditions")
    covered = all(report.counters.get(key, 0) > 0 for key in required)
    payload = {
        "format": jsonio.FORMAT,
        "kind": "crosscheck-report",
        "passed": covered,
        **report.to_obj(),
    }
    if args.json:
        print(jsonio.dumps(payload), end="")
    else:
        for key, value in sorted(report.counters.items()):
            print(f"  {key}: {value}")
        print(
            f"{report.trials} trials, 0 failures, {report.elapsed_seconds:.1f}s"
            + ("" if covered else " (WARNING: some branches never ran)")
        )
    return 0 if covered else 1


# ------------------------------------------------------------------ main


def _build_parser() -> _Parser:
    parser = _Parser(prog="symcret", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check a relation between two systems")
    check.add_argument("kind", choices=[k.value for k in RelationKind])
    check.add_argument("--s1", required=True)
    check.add_argument("--s2", required=True)
    check.add_argument("--rel", required=True)
    check.add_argument("--extended-out")
    check.add_argument("--json", action="store_true")
    check.set_defaults(run=cmd_check)

    extend = sub.add_parser("extend", help="complete an abstraction for memoryless use")
    extend.add_argument("--s1", required=True)
    extend.add_argument("--s2", required=True)
    extend.add_argument("--rel", required=True)
    extend.add_argument("--out")
    extend.add_argument("--json", action="store_true")
    extend.set_defaults(run=cmd_extend)

    synth = sub.add_parser("synthesize", help="solve a reach-avoid problem")
    synth.add_argument("--sys", required=True)
    synth.add_argument("--spec", required=True)
    synth.add_argument("--out")
    synth.add_argument("--json", action="store_true")
    synth.set_defaults(run=cmd_synthesize)

    conc = sub.add_parser("concretize", help="derive a concrete controller")
    conc.add_argument("--mode", choices=["memoryless", "dynamic"], required=True)
    conc.add_argument("--s1", required=True)
    conc.add_argument("--s2", required=True)
    conc.add_argument("--rel", required=True)
    conc.add_argument("--controller", required=True)
    conc.add_argument("--kind", choices=[k.value for k in RelationKind], default="asr")
    conc.add_argument("--out")
    conc.add_argument("--json", action="store_true")
    conc.set_defaults(run=cmd_concretize)

    sim = sub.add_parser("simulate", help="run a closed loop")
    sim.add_argument("--sys", required=True)
    sim.add_argument("--controller", required=True)
    sim.add_argument("--from", dest="from_state", required=True)
    sim.add_argument("--horizon", type=int, required=True)
    sim.add_argument("--resolver", default="lex",
                     help="'lex' or a comma-separated successor script")
    sim.add_argument("--input-script", default=None,
                     help="comma-separated input picks for memoryless runs")
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(run=cmd_simulate)

    verify = sub.add_parser("verify", help="brute-force a transfer guarantee")
    verify.add_argument("--property", choices=["one", "two", "two-all"], required=True)
    verify.add_argument("--s1", required=True)
    verify.add_argument("--s2", required=True)
    verify.add_argument("--rel", required=True)
    verify.add_argument("--c1")
    verify.add_argument("--c2")
    verify.add_argument("--kind", choices=[k.value for k in RelationKind], default="asr")
    verify.add_argument("--horizon", type=int, default=None)
    verify.add_argument("--budget", type=int, default=10000)
    verify.add_argument("--json", action="store_true")
    verify.set_defaults(run=cmd_verify)

    demo = sub.add_parser("demo", help="bundled end-to-end scenarios")
    demo_sub = demo.add_subparsers(dest="scenario", required=True)

    d5 = demo_sub.add_parser("fig5", help="finite separation scenario")
    d5.add_argument("--json", action="store_true")
    d5.add_argument("--export-bundle", default=None)
    d5.set_defaults(run=cmd_demo_fig5)

    d8 = demo_sub.add_parser("fig8", help="segment reach-the-origin scenario")
    d8.add_argument("--bound", default="1", help="segment half-width, as p/q")
    d8.add_argument("--json", action="store_true")
    d8.set_defaults(run=cmd_demo_fig8)

    dc = demo_sub.add_parser("crosscheck", help="randomized law cross-validation")
    dc.add_argument("--trials", type=int, default=500)
    dc.add_argument("--seed", type=int, default=0)
    dc.add_argument("--json", action="store_true")
    dc.set_defaults(run=cmd_demo_crosscheck)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        return _fail("usage", str(err))
    try:
        return args.run(args)
    except UsageError as err:
        return _fail("usage", str(err))
    except (SymcretError, FormatError, ValueError) as err:
        return _fail("validation", str(err))


if __name__ == "__main__":
    sys.exit(main())

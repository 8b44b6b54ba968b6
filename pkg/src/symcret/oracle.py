"""Brute-force verification of the two controller-transfer guarantees.

*Controlled simulability*: every bounded state sequence of the concrete
closed loop has some related state sequence in the abstract closed loop.

*Memoryless concretization*: running the quantizer-in-the-loop architecture
(quantize the current concrete state, ask the abstract controller there, map
the abstract input through the interface, let the plant move), the abstract
trace produced is a valid run of the abstract closed loop, for every choice
the quantizer, the controllers, and the plant could make.  Violations are
step-local, so the check walks the finite product of related pairs rather
than enumerating trajectories; witnesses are reported as full runs.

``run_crosscheck`` cross-validates the whole theory on randomly generated
systems: the containment hierarchy of the relation checks, the collapse on
partitions, sufficiency and necessity of the memoryless relation for the
memoryless guarantee, the extension construction, and reflexivity and
transitivity.  Any failed law aborts with a replayable counterexample bundle.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Any, Iterable

from .core import Controller, FiniteTransitionSystem, SymcretError
from .relations import (
    Interface,
    Relation,
    RelationKind,
    StrictnessError,
    check_asr,
    check_mcr,
    maximal_interface,
    mcr_extension,
    compose,
    replay_witness,
)
from .synthesis import BudgetExceededError, controller_count, enumerate_controllers


def default_horizon_pair(s1: FiniteTransitionSystem, s2: FiniteTransitionSystem) -> int:
    """Product-state pigeonhole bound: longer runs must repeat a pair."""
    return len(s1.states) * len(s2.states) + 1


@dataclass(frozen=True)
class PropertyWitness:
    """A violating concrete run; for the memoryless check also the abstract
    trace the architecture produced alongside it."""

    concrete: tuple[str, ...]
    concrete_inputs: tuple[str, ...]
    quantization: tuple[str, ...] | None = None


@dataclass(frozen=True)
class PropertyVerdict:
    holds: bool
    witness: PropertyWitness | None = None


@dataclass(frozen=True)
class AllControllersVerdict:
    holds: bool
    witness_controller: Controller | None = None
    witness: PropertyWitness | None = None
    checked: int = 0


def _controlled_post(
    s2: FiniteTransitionSystem, c2: Controller
) -> dict[str, frozenset[str]]:
    post: dict[str, frozenset[str]] = {}
    for q in s2.states:
        succ: set[str] = set()
        for u2 in c2.choices.get(q, frozenset()):
            succ |= s2.successors(q, u2)
        post[q] = frozenset(succ)
    return post


def check_controlled_simulability(
    s1: FiniteTransitionSystem,
    s2: FiniteTransitionSystem,
    rel: Relation,
    c1: Controller,
    c2: Controller,
    horizon: int | None = None,
) -> PropertyVerdict:
    """Does every bounded state sequence of c1 x s1 have a pointwise-related
    state sequence in c2 x s2?

    The search carries the set of abstract states any matching sequence could
    currently be at; the witness is the shortest, lexicographically least
    concrete sequence at which that set empties.
    """
    c1.validate_for(s1)
    c2.validate_for(s2)
    bound = default_horizon_pair(s1, s2) if horizon is None else horizon
    post = _controlled_post(s2, c2)
    found: list[tuple[tuple[str, ...], tuple[str, ...]]] = []

    def walk(x1s: tuple[str, ...], u1s: tuple[str, ...], tracked: frozenset[str]) -> None:
        if len(x1s) >= bound:
            return
        x = x1s[-1]
        reachable = frozenset().union(*(post[q] for q in tracked)) if tracked else frozenset()
        for u in sorted(c1.choices.get(x, frozenset())):
            for xp in sorted(s1.successors(x, u)):
                tracked_next = rel.forward(xp) & reachable
                if not tracked_next:
                    found.append((x1s + (xp,), u1s + (u,)))
                else:
                    walk(x1s + (xp,), u1s + (u,), tracked_next)

    for x0 in sorted(s1.states):
        start = rel.forward(x0)
        if not start:
            found.append(((x0,), ()))
            continue
        walk((x0,), (), start)
    if found:
        states, inputs = min(found, key=lambda pair: (len(pair[0]), pair[0]))
        return PropertyVerdict(False, PropertyWitness(states, inputs, None))
    return PropertyVerdict(True, None)


def _extend_architecture_run(
    s1: FiniteTransitionSystem,
    rel: Relation,
    interface: Interface,
    c2: Controller,
    states: list[str],
    quant: list[str],
    inputs: list[str],
    bound: int,
) -> PropertyWitness:
    """Continue a run lexicographically until the horizon or an uncovered
    abstract state, so witnesses read as complete executions."""
    while len(states) < bound:
        x1, x2 = states[-1], quant[-1]
        menu = sorted(c2.choices.get(x2, frozenset()))
        if not menu:
            break
        u2 = menu[0]
        u1 = sorted(interface.inputs_for(x1, x2, u2))[0]
        successors = sorted(s1.successors(x1, u1))
        if not successors:
            break
        x1p = successors[0]
        states.append(x1p)
        inputs.append(u1)
        quant.append(sorted(rel.forward(x1p))[0])
    return PropertyWitness(tuple(states), tuple(inputs), tuple(quant))


def check_memoryless_concretization(
    s1: FiniteTransitionSystem,
    s2: FiniteTransitionSystem,
    rel: Relation,
    interface: Interface,
    c2: Controller,
    horizon: int | None = None,
) -> PropertyVerdict:
    """Does every quantizer-in-the-loop run produce a valid abstract run?

    A violation is one architecture step whose freshly quantized state is not
    an abstract successor of the committed (abstract state, abstract input):
    related pair (x1, x2), abstract choice u2 there, interface output u1,
    plant move x1', and a quantization x2' of x1' outside F2(x2, u2).  Since
    runs may start at any state, the verdict does not depend on the horizon
    once it admits a single step; the witness run is capped by it.
    """
    if not rel.is_strict():
        raise StrictnessError("the memoryless guarantee is stated for strict relations")
    c2.validate_for(s2)
    bound = default_horizon_pair(s1, s2) if horizon is None else horizon
    if bound < 2:
        return PropertyVerdict(True, None)
    for x1, x2 in sorted(rel.pairs):
        for u2 in sorted(c2.choices.get(x2, frozenset())):
            succ2 = s2.successors(x2, u2)
            for u1 in sorted(interface.inputs_for(x1, x2, u2)):
                for x1p in sorted(s1.successors(x1, u1)):
                    for x2p in sorted(rel.forward(x1p)):
                        if x2p not in succ2:
                            witness = _extend_architecture_run(
                                s1, rel, interface, c2,
                                [x1, x1p], [x2, x2p], [u1], bound,
                            )
                            return PropertyVerdict(False, witness)
    return PropertyVerdict(True, None)


def replay_memoryless_witness(
    s1: FiniteTransitionSystem,
    s2: FiniteTransitionSystem,
    rel: Relation,
    interface: Interface,
    c2: Controller,
    witness: PropertyWitness,
) -> bool:
    """True iff the witness is a genuine violation: the concrete run is valid
    under the memoryless controller, the abstract trace quantizes it, and the
    abstract trace is not a run of the abstract closed loop."""
    from .concretize import memoryless_controller

    if witness.quantization is None:
        return False
    xs, us, qs = witness.concrete, witness.concrete_inputs, witness.quantization
    if len(xs) != len(qs) or len(us) != len(xs) - 1:
        return False
    c1 = memoryless_controller(c2, rel, interface)
    for k, u in enumerate(us):
        if u not in c1.choices.get(xs[k], frozenset()):
            return False
        if xs[k + 1] not in s1.successors(xs[k], u):
            return False
    if any(q not in rel.forward(x) for x, q in zip(xs, qs)):
        return False
    for k in range(len(qs) - 1):
        feasible = any(
            qs[k + 1] in s2.successors(qs[k], u2)
            for u2 in c2.choices.get(qs[k], frozenset())
        )
        if not feasible:
            return True
    return False


def check_memoryless_concretization_all_controllers(
    s1: FiniteTransitionSystem,
    s2: FiniteTransitionSystem,
    rel: Relation,
    interface: Interface,
    horizon: int | None = None,
    budget: int | None = None,
) -> AllControllersVerdict:
    """Quantify the memoryless check over every total abstract controller,
    stopping at the first violator.  Enumeration is refused up front if the
    controller count exceeds ``budget``."""
    total = controller_count(s2, s2.states)
    if budget is not None and total > budget:
        raise BudgetExceededError(f"{total} controllers exceed the budget of {budget}")
    checked = 0
    for c2 in enumerate_controllers(s2, s2.states):
        verdict = check_memoryless_concretization(s1, s2, rel, interface, c2, horizon)
        checked += 1
        if not verdict.holds:
            return AllControllersVerdict(False, c2, verdict.witness, checked)
    return AllControllersVerdict(True, None, None, checked)


# --------------------------------------------------------------------------
# Randomized cross-validation of the theory.
# --------------------------------------------------------------------------


class CrosscheckFailure(SymcretError):
    """A law failed on a generated instance; carries a replayable bundle."""

    def __init__(self, law: str, bundle: dict[str, Any]) -> None:
        super().__init__(f"law {law!r} failed; counterexample bundle attached")
        self.law = law
        self.bundle = bundle


@dataclass
class CrosscheckReport:
    trials: int
    seed: int
    counters: dict[str, int] = field(default_factory=dict)
    failures: list[dict[str, Any]] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    def bump(self, key: str, amount: int = 1) -> None:
        self.counters[key] = self.counters.get(key, 0) + amount

    def to_obj(self) -> dict[str, Any]:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "counters": dict(sorted(self.counters.items())),
            "failures": self.failures,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }


def random_system(
    rng: random.Random,
    n_states: int,
    n_inputs: int,
    *,
    fully_available: bool = False,
    state_prefix: str = "x",
    input_prefix: str = "u",
) -> FiniteTransitionSystem:
    """Random non-blocking system.  With ``fully_available`` every input is
    available at every state, which the constructive generators below rely
    on."""
    states = [f"{state_prefix}{i}" for i in range(n_states)]
    inputs = [f"{input_prefix}{j}" for j in range(n_inputs)]
    trans: dict[tuple[str, str], frozenset[str]] = {}
    for x in states:
        live = list(inputs) if fully_available else [u for u in inputs if rng.random() < 0.7]
        if not live:
            live = [rng.choice(inputs)]
        for u in live:
            width = 1 if rng.random() < 0.6 else rng.randint(1, min(3, n_states))
            trans[(x, u)] = frozenset(rng.sample(states, width))
    return FiniteTransitionSystem(tuple(states), tuple(inputs), trans)


def random_strict_relation(
    rng: random.Random,
    concrete_states: Iterable[str],
    abstract_states: Iterable[str],
    *,
    overlap: float = 0.25,
) -> Relation:
    """Strict cover of the concrete states: one cell each, and with
    probability ``overlap`` membership in a second cell as well."""
    concrete = tuple(concrete_states)
    abstract = tuple(abstract_states)
    pairs = set()
    for x in concrete:
        pairs.add((x, rng.choice(abstract)))
        if rng.random() < overlap:
            pairs.add((x, rng.choice(abstract)))
    return Relation(concrete, abstract, frozenset(pairs))


def induced_abstraction(
    s1: FiniteTransitionSystem, rel: Relation, *, loop_input: str | None = None
) -> FiniteTransitionSystem:
    """Existential abstraction over the cells of ``rel`` with the concrete
    input alphabet.  When ``s1`` is fully available this is a memoryless
    concretization abstraction by construction.  Abstract states with empty
    cells get a self loop to stay non-blocking."""
    u0 = loop_input if loop_input is not None else s1.inputs[0]
    trans: dict[tuple[str, str], frozenset[str]] = {}
    for q in rel.codomain:
        cell = rel.inverse_map(q)
        if not cell:
            trans[(q, u0)] = frozenset({q})
            continue
        for u in s1.inputs:
            succ: set[str] = set()
            for x in cell:
                succ |= rel.image(s1.successors(x, u))
            if succ:
                trans[(q, u)] = frozenset(succ)
    return FiniteTransitionSystem(rel.codomain, s1.inputs, trans)


def _perturb_abstraction(
    rng: random.Random, s2: FiniteTransitionSystem
) -> FiniteTransitionSystem:
    """Randomly drop successors (rows stay non-empty) and occasionally add
    some, to move instances around the strict/loose boundary."""
    trans: dict[tuple[str, str], frozenset[str]] = {}
    for (q, u), succ in s2.trans.items():
        if not succ:
            continue
        kept = set(succ)
        for target in sorted(succ):
            if len(kept) > 1 and rng.random() < 0.3:
                kept.discard(target)
        if rng.random() < 0.15:
            kept.add(rng.choice(s2.states))
        trans[(q, u)] = frozenset(kept)
    return FiniteTransitionSystem(s2.states, s2.inputs, trans)


def availability_quotient(
    rng: random.Random, s2: FiniteTransitionSystem, *, prefix: str = "p"
) -> tuple[FiniteTransitionSystem, Relation]:
    """Random partition quotient that only merges states with identical
    available-input sets; the quotient abstracts the original in the
    memoryless sense by construction."""
    groups: dict[frozenset[str], list[str]] = {}
    for q in s2.states:
        groups.setdefault(frozenset(s2.available_inputs(q)), []).append(q)
    assignment: dict[str, str] = {}
    names: list[str] = []
    counter = 0
    for _, members in sorted(groups.items(), key=lambda kv: sorted(kv[1])):
        buckets = rng.randint(1, len(members))
        labels = [f"{prefix}{counter + i}" for i in range(buckets)]
        counter += buckets
        names.extend(labels)
        for q in members:
            assignment[q] = rng.choice(labels)
    used = sorted(set(assignment.values()))
    rel = Relation(s2.states, used, frozenset(assignment.items()))
    trans: dict[tuple[str, str], frozenset[str]] = {}
    for p in used:
        cell = rel.inverse_map(p)
        for u in s2.inputs:
            succ: set[str] = set()
            for q in cell:
                succ |= rel.image(s2.successors(q, u))
            if succ:
                trans[(p, u)] = frozenset(succ)
    return FiniteTransitionSystem(tuple(used), s2.inputs, trans), rel


def _bundle(**parts: Any) -> dict[str, Any]:
    from . import jsonio

    out: dict[str, Any] = {}
    for name, value in parts.items():
        if isinstance(value, FiniteTransitionSystem):
            out[name] = jsonio.system_to_obj(value)
        elif isinstance(value, Relation):
            out[name] = jsonio.relation_to_obj(value)
        elif isinstance(value, Controller):
            out[name] = jsonio.controller_to_obj(value)
        else:
            out[name] = value
    return out


def run_crosscheck(
    trials: int = 500,
    seed: int = 0,
    *,
    max_states: int = 5,
    max_inputs: int = 3,
    enumeration_budget: int = 256,
    horizon: int | None = None,
    include_fig5: bool = True,
) -> CrosscheckReport:
    """Randomized cross-validation of the relation and concretization laws.

    Per trial, whichever laws apply to the drawn instance are asserted:

    * memoryless relation implies alternating simulation;
    * on partitions the two checks agree;
    * memoryless relation implies the memoryless guarantee for every total
      abstract controller (enumeration capped at ``enumeration_budget``);
    * alternating simulation without the memoryless relation admits a
      violating controller;
    * the extension construction satisfies its postconditions and adds
      nothing on partitions;
    * reflexivity along identity and transitivity along composition.

    Raises :class:`CrosscheckFailure` with a replayable bundle on the first
    violated law.  Coverage counters in the report show how often each branch
    actually ran.
    """
    rng = random.Random(seed)
    report = CrosscheckReport(trials=trials, seed=seed)
    started = time.perf_counter()

    try:
        for index in range(trials):
            _run_trial(report, rng, index, include_fig5, max_states, max_inputs,
                       enumeration_budget, horizon)
    except CrosscheckFailure as err:
        err.bundle.setdefault("trial", index)
        err.bundle.setdefault("master_seed", seed)
        report.failures.append({"law": err.law, **err.bundle})
        report.elapsed_seconds = time.perf_counter() - started
        err.report = report  # type: ignore[attr-defined]
        raise

    report.elapsed_seconds = time.perf_counter() - started
    return report


def _run_trial(
    report: CrosscheckReport,
    rng: random.Random,
    index: int,
    include_fig5: bool,
    max_states: int,
    max_inputs: int,
    enumeration_budget: int,
    horizon: int | None,
) -> None:
    if include_fig5 and index == 0:
        from .fixtures import fig5

        fx = fig5()
        s1, s2, rel = fx.s1, fx.s2, fx.relation
    else:
        flavor = index % 4
        n1 = rng.randint(2, max_states)
        m1 = rng.randint(1, max_inputs)
        n2 = rng.randint(2, min(4, max(2, n1)))
        fully = flavor in (0, 2)
        s1 = random_system(rng, n1, m1, fully_available=fully)
        partition = rng.random() < 0.3
        rel = random_strict_relation(
            rng, s1.states, [f"q{i}" for i in range(n2)],
            overlap=0.0 if partition else 0.25,
        )
        if flavor == 0:
            s2 = induced_abstraction(s1, rel)
        elif flavor == 2:
            s2 = _perturb_abstraction(rng, induced_abstraction(s1, rel))
        else:
            s2 = random_system(
                rng, n2, rng.randint(1, max_inputs),
                state_prefix="q", input_prefix="v",
            )
            rel = Relation(rel.domain, s2.states, rel.pairs)
    report.bump("trials")

    identity = Relation.identity(s1.states)
    if not check_mcr(s1, s1, identity).holds:
        raise CrosscheckFailure("reflexivity", _bundle(s1=s1))
    report.bump("reflexivity")

    asr = check_asr(s1, s2, rel)
    mcr = check_mcr(s1, s2, rel)

    if not asr.holds:
        if not replay_witness(RelationKind.ASR, s1, s2, rel, asr.witness):
            raise CrosscheckFailure(
                "asr_witness_replay", _bundle(s1=s1, s2=s2, rel=rel)
            )
        report.bump("asr_witness_replayed")
    if not mcr.holds:
        if not replay_witness(RelationKind.MCR, s1, s2, rel, mcr.witness):
            raise CrosscheckFailure(
                "mcr_witness_replay", _bundle(s1=s1, s2=s2, rel=rel)
            )
        report.bump("mcr_witness_replayed")

    if mcr.holds and not asr.holds:
        raise CrosscheckFailure(
            "mcr_implies_asr", _bundle(s1=s1, s2=s2, rel=rel)
        )
    if mcr.holds:
        report.bump("mcr_implies_asr")

    if rel.is_single_valued():
        if asr.holds != mcr.holds:
            raise CrosscheckFailure(
                "partition_collapse", _bundle(s1=s1, s2=s2, rel=rel)
            )
        report.bump("partition_collapse")

    total_controllers = controller_count(s2, s2.states)

    if mcr.holds:
        interface = maximal_interface(s1, s2, rel, RelationKind.MCR)
        if total_controllers <= enumeration_budget:
            for c2 in enumerate_controllers(s2, s2.states):
                verdict = check_memoryless_concretization(s1, s2, rel, interface, c2, horizon)
                report.bump("memoryless_controllers_checked")
                if not verdict.holds:
                    raise CrosscheckFailure(
                        "mcr_sufficiency",
                        _bundle(s1=s1, s2=s2, rel=rel, c2=c2,
                                witness=list(verdict.witness.concrete)),
                    )
            report.bump("mcr_sufficiency_trials")
        else:
            report.bump("mcr_sufficiency_skipped_budget")

    if asr.holds and not mcr.holds:
        interface = maximal_interface(s1, s2, rel, RelationKind.ASR)
        if total_controllers <= enumeration_budget:
            outcome = check_memoryless_concretization_all_controllers(
                s1, s2, rel, interface, horizon, budget=enumeration_budget
            )
            if outcome.holds:
                raise CrosscheckFailure(
                    "asr_gap_necessity", _bundle(s1=s1, s2=s2, rel=rel)
                )
            if not replay_memoryless_witness(
                s1, s2, rel, interface, outcome.witness_controller, outcome.witness
            ):
                raise CrosscheckFailure(
                    "memoryless_witness_replay",
                    _bundle(s1=s1, s2=s2, rel=rel, c2=outcome.witness_controller),
                )
            report.bump("asr_gap_necessity")
        else:
            report.bump("asr_gap_skipped_budget")

    if asr.holds:
        extended = mcr_extension(s1, s2, rel)
        report.bump("extension_postconditions")
        if any(
            not s2.trans[key] <= extended.trans[key] for key in s2.trans
        ):
            raise CrosscheckFailure(
                "extension_inclusion", _bundle(s1=s1, s2=s2, rel=rel)
            )
        if rel.is_single_valued() and extended.trans != s2.trans:
            raise CrosscheckFailure(
                "partition_extension_identity", _bundle(s1=s1, s2=s2, rel=rel)
            )
        if rel.is_single_valued():
            report.bump("partition_extension_identity")

        quotient, q_rel = availability_quotient(rng, extended)
        if not check_mcr(extended, quotient, q_rel).holds:
            raise CrosscheckFailure(
                "quotient_construction", _bundle(s2=extended, s3=quotient, rel=q_rel)
            )
        composed = compose(rel, q_rel)
        if not check_mcr(s1, quotient, composed).holds:
            raise CrosscheckFailure(
                "transitivity",
                _bundle(s1=s1, s2=extended, s3=quotient, rel=rel, q_rel=q_rel),
            )
        report.bump("transitivity")


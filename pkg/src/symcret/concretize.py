"""Turning abstract controllers into concrete ones, and running the loops.

Two architectures are provided:

* The *memoryless* controller plays, at concrete state x1, any interface
  output for any related abstract state the quantizer could report and any
  abstract choice there.  It needs nothing but the current concrete state.
* The *dynamic* concretizer tracks the abstract state it committed to, one
  step behind, and re-synchronises it after every concrete move by
  intersecting the abstract successors with the quantizer output.  An empty
  intersection means the relation certificate it was built from is wrong.

All free choices (abstract state, abstract input, concrete input, successor
resolution) default to lexicographic minimum so that runs replay bit for bit;
scripted sequences or callables can be supplied instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .core import (
    Controller,
    ContractError,
    ControllerUndefinedError,
    FiniteTransitionSystem,
    SymcretError,
    Trajectory,
)
from .relations import Interface, Relation, StrictnessError


class BrokenCertificateError(SymcretError):
    """The dynamic loop hit an empty re-synchronisation intersection, which a
    valid alternating-simulation certificate rules out."""


Chooser = Callable[[Sequence[str]], str]


def lexicographic(options: Sequence[str]) -> str:
    return options[0]


def scripted(values: Sequence[str]) -> Chooser:
    """Chooser that replays a fixed sequence of picks, validating each one."""
    queue: Iterator[str] = iter(values)

    def choose(options: Sequence[str]) -> str:
        try:
            pick = next(queue)
        except StopIteration:
            raise ContractError("scripted choice sequence exhausted") from None
        if pick not in options:
            raise ContractError(f"scripted choice {pick!r} not among {list(options)!r}")
        return pick

    return choose


def _chooser(policy: Chooser | Sequence[str] | None) -> Chooser:
    if policy is None:
        return lexicographic
    base = policy if callable(policy) else scripted(policy)

    def choose(options: Sequence[str]) -> str:
        pick = base(options)
        if pick not in options:
            raise ContractError(f"policy chose {pick!r} outside {list(options)!r}")
        return pick

    return choose


def memoryless_controller(c2: Controller, rel: Relation, interface: Interface) -> Controller:
    """Union, over the related abstract states the abstract controller covers,
    of the interface outputs for its choices there.  Defined exactly at the
    concrete states with at least one covered related abstract state."""
    if not rel.is_strict():
        raise StrictnessError("memoryless concretization needs a strict relation")
    choices: dict[str, frozenset[str]] = {}
    for x1 in rel.domain:
        covered = [x2 for x2 in sorted(rel.forward(x1)) if x2 in c2.choices]
        if not covered:
            continue
        inputs: set[str] = set()
        for x2 in covered:
            for u2 in sorted(c2.choices[x2]):
                inputs |= interface.inputs_for(x1, x2, u2)
        if not inputs:
            raise ContractError(f"concretized controller has no input at {x1!r}")
        choices[x1] = frozenset(inputs)
    return Controller(choices)


@dataclass(frozen=True)
class DynamicConcretizerState:
    """Delay-block contents: the abstract state committed to at the previous
    step and the abstract input played from it."""

    x2: str
    u2: str


def dynamic_init(
    c2: Controller,
    rel: Relation,
    interface: Interface,
    x1_0: str,
    *,
    choose_x2: Chooser | Sequence[str] | None = None,
    choose_u2: Chooser | Sequence[str] | None = None,
    choose_u1: Chooser | Sequence[str] | None = None,
) -> tuple[DynamicConcretizerState, str]:
    """Commit to an abstract start related to ``x1_0`` and emit the first
    concrete input."""
    related = sorted(rel.forward(x1_0))
    if not related:
        raise ContractError(f"state {x1_0!r} is related to no abstract state")
    covered = [x2 for x2 in related if x2 in c2.choices]
    if not covered:
        raise ControllerUndefinedError(x1_0, who="abstract controller (via quantizer)")
    x2 = _chooser(choose_x2)(covered)
    u2 = _chooser(choose_u2)(sorted(c2.choices[x2]))
    u1 = _chooser(choose_u1)(sorted(interface.inputs_for(x1_0, x2, u2)))
    return DynamicConcretizerState(x2, u2), u1


def dynamic_step(
    state: DynamicConcretizerState,
    c2: Controller,
    rel: Relation,
    interface: Interface,
    s2: FiniteTransitionSystem,
    x1_next: str,
    *,
    choose_x2: Chooser | Sequence[str] | None = None,
    choose_u2: Chooser | Sequence[str] | None = None,
    choose_u1: Chooser | Sequence[str] | None = None,
) -> tuple[DynamicConcretizerState, str]:
    """Re-synchronise the abstract state after the plant moved to ``x1_next``
    and emit the next concrete input.

    The new abstract state is taken from the abstract successors of the
    delayed (state, input) pair intersected with the quantizations of
    ``x1_next``; an alternating simulation certificate guarantees that the
    intersection is non-empty, so emptiness is reported as a broken
    certificate rather than handled by backtracking.
    """
    sync = s2.successors(state.x2, state.u2) & rel.forward(x1_next)
    if not sync:
        raise BrokenCertificateError(
            f"no abstract successor of ({state.x2!r}, {state.u2!r}) is related to {x1_next!r}"
        )
    covered = [x2 for x2 in sorted(sync) if x2 in c2.choices]
    if not covered:
        raise ControllerUndefinedError(x1_next, who="abstract controller (via quantizer)")
    x2 = _chooser(choose_x2)(covered)
    u2 = _chooser(choose_u2)(sorted(c2.choices[x2]))
    u1 = _chooser(choose_u1)(sorted(interface.inputs_for(x1_next, x2, u2)))
    return DynamicConcretizerState(x2, u2), u1


class DynamicConcretizer:
    """Stateful wrapper around :func:`dynamic_init` / :func:`dynamic_step`
    recording the (x1, x2, u2, u1) trace of one execution."""

    def __init__(
        self,
        s2: FiniteTransitionSystem,
        c2: Controller,
        rel: Relation,
        interface: Interface,
        *,
        choose_x2: Chooser | Sequence[str] | None = None,
        choose_u2: Chooser | Sequence[str] | None = None,
        choose_u1: Chooser | Sequence[str] | None = None,
    ) -> None:
        self.s2 = s2
        self.c2 = c2
        self.rel = rel
        self.interface = interface
        self._choose_x2 = _chooser(choose_x2)
        self._choose_u2 = _chooser(choose_u2)
        self._choose_u1 = _chooser(choose_u1)
        self.state: DynamicConcretizerState | None = None
        self.trace: list[tuple[str, str, str, str]] = []

    def initialize(self, x1_0: str) -> str:
        self.state, u1 = dynamic_init(
            self.c2, self.rel, self.interface, x1_0,
            choose_x2=self._choose_x2, choose_u2=self._choose_u2, choose_u1=self._choose_u1,
        )
        self.trace.append((x1_0, self.state.x2, self.state.u2, u1))
        return u1

    def step(self, x1_next: str) -> str:
        if self.state is None:
            raise ContractError("step before initialize")
        self.state, u1 = dynamic_step(
            self.state, self.c2, self.rel, self.interface, self.s2, x1_next,
            choose_x2=self._choose_x2, choose_u2=self._choose_u2, choose_u1=self._choose_u1,
        )
        self.trace.append((x1_next, self.state.x2, self.state.u2, u1))
        return u1


def closed_loop_run(
    sys: FiniteTransitionSystem,
    controller: Controller | DynamicConcretizer,
    x1_0: str,
    horizon: int,
    *,
    choose_input: Chooser | Sequence[str] | None = None,
    resolver: Chooser | Sequence[str] | None = None,
) -> Trajectory:
    """Execute one closed-loop run of at most ``horizon`` states.

    ``resolver`` picks the plant's move among the non-deterministic
    successors; ``choose_input`` picks among the memoryless controller's
    enabled inputs (the dynamic concretizer makes its own internal choices).
    Reaching a state the controller does not cover while steps remain is a
    contract error naming the state.
    """
    sys.require_state(x1_0)
    if horizon < 1:
        raise ContractError("horizon must be at least 1")
    pick_input = _chooser(choose_input)
    pick_successor = _chooser(resolver)
    dynamic = isinstance(controller, DynamicConcretizer)

    states = [x1_0]
    inputs: list[str] = []
    pending: str | None = None
    if dynamic and horizon > 1:
        pending = controller.initialize(x1_0)
    while len(states) < horizon:
        x = states[-1]
        if dynamic:
            u1 = pending  # type: ignore[assignment]
        else:
            enabled = controller.choices.get(x)
            if enabled is None:
                raise ControllerUndefinedError(x)
            u1 = pick_input(sorted(enabled))
        succ = sorted(sys.successors(x, u1))
        if not succ:
            raise ContractError(f"input {u1!r} is unavailable at state {x!r}")
        xp = pick_successor(succ)
        states.append(xp)
        inputs.append(u1)
        if dynamic and len(states) < horizon:
            pending = controller.step(xp)
    return Trajectory(tuple(states), tuple(inputs))


def closed_loop_tree(
    sys: FiniteTransitionSystem, controller: Controller, x1_0: str, horizon: int
) -> tuple[Trajectory, ...]:
    """All maximal closed-loop runs under every resolver choice.  Runs end
    where the controller is undefined or the horizon is reached."""
    from .core import controlled_system, maximal_trajectories

    return maximal_trajectories(controlled_system(sys, controller), {x1_0}, horizon)


@dataclass(frozen=True)
class DynamicRun:
    """One fully resolved execution of the dynamic architecture."""

    concrete: tuple[str, ...]
    abstract: tuple[str, ...]
    concrete_inputs: tuple[str, ...]
    abstract_inputs: tuple[str, ...]


def enumerate_dynamic_runs(
    s1: FiniteTransitionSystem,
    s2: FiniteTransitionSystem,
    c2: Controller,
    rel: Relation,
    interface: Interface,
    x1_0: str,
    horizon: int,
) -> tuple[DynamicRun, ...]:
    """Every execution of the dynamic architecture from ``x1_0``, branching
    over all abstract-state, input, and plant choices.

    While walking, two facts are verified at every step and reported as
    :class:`BrokenCertificateError` if they fail: the committed abstract state
    stays related to the concrete one, and the re-synchronisation
    intersection is never empty.  Runs end when the horizon is reached or the
    abstract controller runs out of choices.
    """
    if horizon < 1:
        raise ContractError("horizon must be at least 1")
    runs: list[DynamicRun] = []

    def walk(x1s: tuple[str, ...], x2s: tuple[str, ...],
             u1s: tuple[str, ...], u2s: tuple[str, ...]) -> None:
        x1, x2 = x1s[-1], x2s[-1]
        if (x1, x2) not in rel.pairs:
            raise BrokenCertificateError(f"({x1!r}, {x2!r}) escaped the relation")
        if len(x1s) == horizon or x2 not in c2.choices:
            runs.append(DynamicRun(x1s, x2s, u1s, u2s))
            return
        for u2 in sorted(c2.choices[x2]):
            for u1 in sorted(interface.inputs_for(x1, x2, u2)):
                for x1p in sorted(s1.successors(x1, u1)):
                    sync = s2.successors(x2, u2) & rel.forward(x1p)
                    if not sync:
                        raise BrokenCertificateError(
                            f"empty re-synchronisation after ({x1!r}, {x2!r}, {u2!r}) -> {x1p!r}"
                        )
                    for x2p in sorted(sync):
                        walk(x1s + (x1p,), x2s + (x2p,), u1s + (u1,), u2s + (u2,))

    for x2_0 in sorted(rel.forward(x1_0)):
        walk((x1_0,), (x2_0,), (), ())
    return tuple(runs)

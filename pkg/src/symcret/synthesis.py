"""Reach-avoid controller synthesis on finite non-deterministic systems.

Non-determinism makes this a reachability problem on a forward hypergraph:
each (state, input) row is a hyperarc with one tail and all its successors as
heads, and a state is winning only if some row keeps every head winning.  The
least fixed point of the controllable predecessor collects the winning set;
ranks record the iteration at which a state entered and bound its distance to
the target.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .core import Controller, ContractError, FiniteTransitionSystem, ReachAvoidSpec


class BudgetExceededError(ContractError):
    """An enumeration would exceed its configured budget."""


@dataclass(frozen=True)
class SynthesisResult:
    """Winning set, rank bound per winning state, and the maximally
    permissive rank-decreasing controller on ``winning`` minus the target."""

    winning: frozenset[str]
    controller: Controller
    rank: Mapping[str, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "winning", frozenset(self.winning))
        object.__setattr__(self, "rank", dict(self.rank))


def controllable_predecessor(
    sys: FiniteTransitionSystem, safe: Iterable[str], target: Iterable[str]
) -> frozenset[str]:
    """States in ``safe`` with some input forcing every successor into
    ``target``."""
    safe = frozenset(safe)
    target = frozenset(target)
    if not target <= safe:
        raise ContractError("target must be contained in safe")
    return frozenset(
        x
        for x in safe
        if any(sys.successors(x, u) <= target for u in sys.available_inputs(x))
    )


def winning_region(
    sys: FiniteTransitionSystem, spec: ReachAvoidSpec
) -> tuple[frozenset[str], dict[str, int]]:
    """Least fixed point of the controllable predecessor over the obstacle-free
    states, together with the entry rank of every winning state."""
    spec.validate_for(sys)
    if spec.target & spec.obstacle:
        raise ContractError("a target state may not also be an obstacle")
    safe = frozenset(sys.states) - spec.obstacle
    winning = frozenset(spec.target)
    rank = {x: 0 for x in winning}
    level = 0
    while True:
        level += 1
        fresh = controllable_predecessor(sys, safe, winning) - winning
        if not fresh:
            return winning, rank
        for x in fresh:
            rank[x] = level
        winning |= fresh


def synthesize_reach_avoid(
    sys: FiniteTransitionSystem, spec: ReachAvoidSpec
) -> SynthesisResult | None:
    """Solve the reach-avoid problem, or return None if some initial state is
    losing (see :func:`losing_initial_states` for which ones).

    The controller keeps, at each winning non-target state, every input whose
    successors all stay winning with strictly smaller rank; that is the
    largest choice set that cannot livelock under non-determinism.
    """
    winning, rank = winning_region(sys, spec)
    if not spec.initial <= winning:
        return None
    choices: dict[str, frozenset[str]] = {}
    for x in sorted(winning - spec.target):
        here = rank[x]
        good = frozenset(
            u
            for u in sys.available_inputs(x)
            if sys.successors(x, u) <= winning
            and max(rank[xp] for xp in sys.successors(x, u)) < here
        )
        choices[x] = good
    return SynthesisResult(winning, Controller(choices), rank)


def losing_initial_states(
    sys: FiniteTransitionSystem, spec: ReachAvoidSpec
) -> frozenset[str]:
    winning, _ = winning_region(sys, spec)
    return frozenset(spec.initial) - winning


def is_sub_controller(candidate: Controller, reference: Controller) -> bool:
    """Pointwise containment of choices on the shared domain."""
    return all(
        candidate.choices[x] <= reference.choices[x]
        for x in candidate.domain & reference.domain
    )


def controller_count(sys: FiniteTransitionSystem, domain: Iterable[str]) -> int:
    """Number of static controllers assigning each domain state a non-empty
    subset of its available inputs."""
    total = 1
    for x in sorted(set(domain)):
        total *= 2 ** len(sys.available_inputs(x)) - 1
    return total


def _nonempty_subsets(items: tuple[str, ...]) -> list[frozenset[str]]:
    # Bitmask order: singletons of earlier inputs first, full set last.
    return [
        frozenset(items[i] for i in range(len(items)) if mask >> i & 1)
        for mask in range(1, 2 ** len(items))
    ]


def enumerate_controllers(
    sys: FiniteTransitionSystem,
    domain: Iterable[str],
    budget: int | None = None,
) -> Iterator[Controller]:
    """Yield every controller over ``domain`` in a fixed deterministic order.

    The count is checked against ``budget`` before anything is yielded.  A
    domain state with no available input admits no controller at all.
    """
    dom = sorted(set(domain))
    for x in dom:
        sys.require_state(x)
    if budget is not None:
        total = controller_count(sys, dom)
        if total > budget:
            raise BudgetExceededError(
                f"{total} controllers exceed the budget of {budget}"
            )
    menus = [_nonempty_subsets(sys.available_inputs(x)) for x in dom]
    for combo in itertools.product(*menus):
        yield Controller(dict(zip(dom, combo)))

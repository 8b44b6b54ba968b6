"""Exact 1-D interval abstractions for translation dynamics on a segment.

The concrete plant moves by plain translation, x' = x + u, on a bounded
segment of the rational line.  Cells carry explicit open/closed endpoint
flags and all arithmetic is over ``fractions.Fraction``: the separating
examples hinge on whether images touch the single point 0, which floating
point cannot be trusted with.

Abstract inputs are affine state-feedback laws u = gain * x + offset that act
on a whole cell; the closed-loop map of a cell is then the affine map
x -> (1 + gain) * x + offset, whose exact image interval is computed here.
Because an affine map sends a cell onto exactly its image interval, the
memoryless containment condition over all points of a cell reduces to one
inclusion between quantizations, so the checks below are exact without any
sampling.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import ContractError, DomainError, FiniteTransitionSystem, ReachAvoidSpec
from .synthesis import synthesize_reach_avoid


class OutOfDomainError(ContractError):
    """A point or image interval escapes the covered segment."""


Rational = Fraction | int


def _frac(value: Rational) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class IntervalCell:
    """Rational interval with endpoint flags; a single point is the closed
    degenerate case lo == hi."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", _frac(self.lo))
        object.__setattr__(self, "hi", _frac(self.hi))
        if self.lo > self.hi:
            raise ContractError(f"empty interval: lo {self.lo} > hi {self.hi}")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ContractError("a point cell must be closed on both sides")

    @staticmethod
    def point(value: Rational) -> "IntervalCell":
        v = _frac(value)
        return IntervalCell(v, v, True, True)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Rational) -> bool:
        x = _frac(x)
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def intersects(self, other: "IntervalCell") -> bool:
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return False
        if lo < hi:
            return True
        return self.contains(lo) and other.contains(lo)

    def is_subset_of(self, other: "IntervalCell") -> bool:
        if self.lo < other.lo or self.hi > other.hi:
            return False
        if self.lo == other.lo and self.lo_closed and not other.lo_closed:
            return False
        if self.hi == other.hi and self.hi_closed and not other.hi_closed:
            return False
        return True

    def describe(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        if self.is_point():
            return f"{{{self.lo}}}"
        return f"{left}{self.lo}, {self.hi}{right}"


@dataclass(frozen=True)
class AffineMap:
    """Feedback law u = gain * x + offset."""

    gain: Fraction
    offset: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "gain", _frac(self.gain))
        object.__setattr__(self, "offset", _frac(self.offset))

    def apply(self, x: Rational) -> Fraction:
        return self.gain * _frac(x) + self.offset

    def closed_loop(self, x: Rational) -> Fraction:
        """Next plant state under translation dynamics: x + u."""
        return _frac(x) + self.apply(x)


@dataclass(frozen=True)
class AbstractInput:
    """Named abstract input carrying its feedback law, so interfaces never
    need a stored table: the concrete input at x is just law.apply(x)."""

    name: str
    law: AffineMap


@dataclass(frozen=True)
class CellCover:
    """Ordered list of named cells; may overlap, may leave gaps."""

    cells: tuple[tuple[str, IntervalCell], ...]

    def __post_init__(self) -> None:
        cells = tuple((str(name), cell) for name, cell in self.cells)
        names = [name for name, _ in cells]
        if len(names) != len(set(names)):
            raise ContractError("cell names must be unique")
        object.__setattr__(self, "cells", cells)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.cells)

    def cell(self, name: str) -> IntervalCell:
        for cell_name, cell in self.cells:
            if cell_name == name:
                return cell
        raise DomainError(f"unknown cell {name!r}")

    def hull(self) -> IntervalCell:
        lo = min(cell.lo for _, cell in self.cells)
        hi = max(cell.hi for _, cell in self.cells)
        lo_closed = any(cell.lo_closed for _, cell in self.cells if cell.lo == lo)
        hi_closed = any(cell.hi_closed for _, cell in self.cells if cell.hi == hi)
        return IntervalCell(lo, hi, lo_closed, hi_closed)

    def covers(self, target: IntervalCell) -> bool:
        return interval_covered(target, [cell for _, cell in self.cells])


def interval_covered(target: IntervalCell, pieces: Sequence[IntervalCell]) -> bool:
    """Exact test that ``target`` lies inside the union of ``pieces``.

    Membership in a union of intervals is constant between consecutive
    endpoint values, so it suffices to test every endpoint inside the target
    and one rational midpoint between each adjacent pair.
    """
    marks = {target.lo, target.hi}
    for piece in pieces:
        marks.add(piece.lo)
        marks.add(piece.hi)
    ordered = sorted(marks)
    samples: list[Fraction] = []
    for value in ordered:
        if target.contains(value):
            samples.append(value)
    for left, right in zip(ordered, ordered[1:]):
        mid = (left + right) / 2
        if target.contains(mid):
            samples.append(mid)
    return all(any(piece.contains(s) for piece in pieces) for s in samples)


def affine_image(cell: IntervalCell, law: AffineMap) -> IntervalCell:
    """Exact image of a cell under the closed loop x -> (1 + gain) x + offset.

    Endpoint flags follow the sign of (1 + gain); a gain of -1 collapses the
    cell to the single point {offset}.
    """
    slope = 1 + law.gain
    if slope == 0:
        return IntervalCell.point(law.offset)
    lo = slope * cell.lo + law.offset
    hi = slope * cell.hi + law.offset
    if slope > 0:
        return IntervalCell(lo, hi, cell.lo_closed, cell.hi_closed)
    return IntervalCell(hi, lo, cell.hi_closed, cell.lo_closed)


def quantize(cover: CellCover, target: IntervalCell | Rational) -> frozenset[str]:
    """Names of all cells meeting ``target``, exactly honouring endpoint
    flags.  Raises if the target is not contained in the covered segment."""
    if not isinstance(target, IntervalCell):
        target = IntervalCell.point(target)
    if not target.is_subset_of(cover.hull()):
        raise OutOfDomainError(
            f"{target.describe()} escapes the domain {cover.hull().describe()}"
        )
    return frozenset(name for name, cell in cover.cells if cell.intersects(target))


def build_abstraction(
    cover: CellCover,
    inputs: Sequence[AbstractInput],
    availability: Mapping[str, Iterable[str]],
) -> FiniteTransitionSystem:
    """Finite abstraction of the translation plant over ``cover``.

    For each cell and each abstract input available there, the successors are
    the quantization of the exact closed-loop image of the cell.  This is the
    smallest successor assignment under which the memoryless containment
    holds for every point of the cell.
    """
    laws = {ai.name: ai.law for ai in inputs}
    trans: dict[tuple[str, str], frozenset[str]] = {}
    for name, cell in cover.cells:
        for input_name in sorted(set(availability.get(name, ()))):
            if input_name not in laws:
                raise DomainError(f"unknown abstract input {input_name!r}")
            image = affine_image(cell, laws[input_name])
            try:
                trans[(name, input_name)] = quantize(cover, image)
            except OutOfDomainError as err:
                raise OutOfDomainError(
                    f"image of cell {name!r} under {input_name!r} leaves the domain: {err}"
                ) from None
    return FiniteTransitionSystem(cover.names, tuple(sorted(laws)), trans)


def verify_mcr_interval(
    cover: CellCover,
    abstraction: FiniteTransitionSystem,
    inputs: Sequence[AbstractInput],
) -> bool:
    """Exact memoryless containment check of an abstraction over ``cover``:
    every quantization of every point of a cell's closed-loop image must be a
    declared successor.  Availability is read off the abstraction's rows."""
    laws = {ai.name: ai.law for ai in inputs}
    for name, cell in cover.cells:
        for input_name in abstraction.available_inputs(name):
            image = affine_image(cell, laws[input_name])
            if not quantize(cover, image) <= abstraction.successors(name, input_name):
                return False
    return True


def verify_asr_interval(
    cover: CellCover,
    abstraction: FiniteTransitionSystem,
    inputs: Sequence[AbstractInput],
) -> bool:
    """Exact existential counterpart: every point of the closed-loop image
    must fall in at least one declared successor cell, i.e. the image is
    covered by the successors' union."""
    laws = {ai.name: ai.law for ai in inputs}
    for name, cell in cover.cells:
        for input_name in abstraction.available_inputs(name):
            image = affine_image(cell, laws[input_name])
            pieces = [cover.cell(q) for q in abstraction.successors(name, input_name)]
            if not interval_covered(image, pieces):
                return False
    return True


# --------------------------------------------------------------------------
# The bundled fig8 scenario: reach the origin on [-L, L].
# --------------------------------------------------------------------------


def fig8_cover(bound: Rational) -> CellCover:
    """Three cells on [-L, L]: the negatives, the origin, the positives."""
    size = _frac(bound)
    if size <= 0:
        raise ContractError("the segment half-width must be positive")
    return CellCover((
        ("q1", IntervalCell(-size, Fraction(0), True, False)),
        ("q2", IntervalCell.point(0)),
        ("q3", IntervalCell(Fraction(0), size, False, True)),
    ))


FIG8_AVAILABILITY = {"q1": ["k1"], "q2": ["k2"], "q3": ["k3"]}


def fig8_affine_inputs() -> tuple[AbstractInput, ...]:
    """One state-feedback law per cell driving every point to the origin in a
    single step: u = -x on the side cells, u = 0 at the origin."""
    return (
        AbstractInput("k1", AffineMap(Fraction(-1), Fraction(0))),
        AbstractInput("k2", AffineMap(Fraction(0), Fraction(0))),
        AbstractInput("k3", AffineMap(Fraction(-1), Fraction(0))),
    )


def fig8_constant_inputs(shift: Rational) -> tuple[AbstractInput, ...]:
    """Piecewise constant laws: move right by ``shift`` on the negatives,
    stay at the origin, move left by ``shift`` on the positives."""
    c = _frac(shift)
    return (
        AbstractInput("k1", AffineMap(Fraction(0), c)),
        AbstractInput("k2", AffineMap(Fraction(0), Fraction(0))),
        AbstractInput("k3", AffineMap(Fraction(0), -c)),
    )


def fig8_target_spec(cover: CellCover) -> ReachAvoidSpec:
    return ReachAvoidSpec(frozenset(cover.names), frozenset({"q2"}), frozenset())


@dataclass(frozen=True)
class Fig8Case:
    """One representative constant-shift case in the infeasibility analysis."""

    label: str
    shift: Fraction
    q1_successors: frozenset[str]
    q3_successors: frozenset[str]
    solvable: bool


@dataclass(frozen=True)
class Fig8Report:
    bound: Fraction
    constant_cases: tuple[Fig8Case, ...]
    affine_solvable: bool
    affine_deterministic: bool
    affine_ranks: Mapping[str, int]
    affine_mcr_ok: bool
    rationale: str


def prove_frr_infeasible_fig8(bound: Rational) -> Fig8Report:
    """Case analysis showing that no piecewise constant input solves the
    reach-the-origin problem on the three-cell cover, while the affine
    feedback laws solve it in one step.

    For a constant shift c applied on the negative cell, the image of
    [-L, 0) is [c - L, c), and its quantization depends only on how c
    compares with 0 and L.  That leaves three cases, each represented by one
    exact rational value: 0 < c < L, c = L, and c = 0 (the positive cell is
    symmetric).  Every case yields an abstraction whose side cells cannot be
    forced into the origin cell, so synthesis fails; larger shifts leave the
    segment and are inadmissible.
    """
    size = _frac(bound)
    cover = fig8_cover(size)
    spec = fig8_target_spec(cover)

    cases = []
    for label, shift in (
        ("0 < c < L", size / 2),
        ("c = L", size),
        ("c = 0", Fraction(0)),
    ):
        inputs = fig8_constant_inputs(shift)
        abstraction = build_abstraction(cover, inputs, FIG8_AVAILABILITY)
        result = synthesize_reach_avoid(abstraction, spec)
        cases.append(
            Fig8Case(
                label=label,
                shift=shift,
                q1_successors=abstraction.successors("q1", "k1"),
                q3_successors=abstraction.successors("q3", "k3"),
                solvable=result is not None,
            )
        )

    affine_inputs = fig8_affine_inputs()
    affine = build_abstraction(cover, affine_inputs, FIG8_AVAILABILITY)
    affine_result = synthesize_reach_avoid(affine, spec)
    rationale = (
        "constant shift c on the negative cell maps [-L, 0) to [c - L, c); "
        "its quantization only depends on the comparisons of c with 0 and L, "
        "so one exact representative per case decides the whole family"
    )
    return Fig8Report(
        bound=size,
        constant_cases=tuple(cases),
        affine_solvable=affine_result is not None,
        affine_deterministic=affine.is_deterministic(),
        affine_ranks=dict(affine_result.rank) if affine_result else {},
        affine_mcr_ok=verify_mcr_interval(cover, affine, affine_inputs),
        rationale=rationale,
    )

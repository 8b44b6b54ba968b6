"""File formats: UTF-8 JSON with a top-level format tag, ``symcret/1``.

A system is ``{"states": [...], "inputs": [...], "trans": {"x|u": [...]}}``
with ``|`` separating the composite transition key, so identifiers may not
contain ``|``.  Relations are arrays of pairs, controllers map states to
input arrays, rationals are written as ``"p/q"`` strings.  Serialization is
canonical (sorted keys, sorted arrays), so save -> load -> save is
bit-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .core import Controller, DomainError, FiniteTransitionSystem, ReachAvoidSpec, Trajectory
from .interval import AbstractInput, AffineMap, CellCover, IntervalCell
from .relations import Interface, Relation, RelationKind

FORMAT = "symcret/1"
KEY_SEP = "|"


class FormatError(DomainError):
    """Malformed or wrong-version document."""


def _check_id(name: str) -> str:
    if KEY_SEP in name:
        raise FormatError(f"identifier {name!r} may not contain {KEY_SEP!r}")
    return name


def _tagged(kind: str, body: dict[str, Any]) -> dict[str, Any]:
    return {"format": FORMAT, "kind": kind, **body}


def _untag(obj: Mapping[str, Any], kind: str) -> Mapping[str, Any]:
    if not isinstance(obj, Mapping):
        raise FormatError("document is not a JSON object")
    if obj.get("format") != FORMAT:
        raise FormatError(f"expected format {FORMAT!r}, got {obj.get('format')!r}")
    if obj.get("kind") != kind:
        raise FormatError(f"expected kind {kind!r}, got {obj.get('kind')!r}")
    return obj


def fraction_to_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def fraction_from_str(text: str) -> Fraction:
    return Fraction(text)


# ---------------------------------------------------------------- systems


def system_to_obj(sys: FiniteTransitionSystem) -> dict[str, Any]:
    trans = {
        f"{_check_id(x)}{KEY_SEP}{_check_id(u)}": sorted(succ)
        for (x, u), succ in sorted(sys.trans.items())
        if succ
    }
    return _tagged("system", {
        "states": list(sys.states),
        "inputs": list(sys.inputs),
        "trans": trans,
    })


def system_from_obj(obj: Mapping[str, Any]) -> FiniteTransitionSystem:
    body = _untag(obj, "system")
    trans: dict[tuple[str, str], frozenset[str]] = {}
    for key, succ in body["trans"].items():
        x, sep, u = key.partition(KEY_SEP)
        if not sep:
            raise FormatError(f"transition key {key!r} lacks the {KEY_SEP!r} separator")
        trans[(x, u)] = frozenset(succ)
    sys = FiniteTransitionSystem(tuple(body["states"]), tuple(body["inputs"]), trans)
    sys.require_non_blocking()
    return sys


# -------------------------------------------------------------- relations


def relation_to_obj(rel: Relation) -> dict[str, Any]:
    return _tagged("relation", {
        "pairs": [list(p) for p in sorted(rel.pairs)],
    })


def relation_from_obj(
    obj: Mapping[str, Any], s1: FiniteTransitionSystem, s2: FiniteTransitionSystem
) -> Relation:
    body = _untag(obj, "relation")
    pairs = frozenset((a, b) for a, b in body["pairs"])
    return Relation(s1.states, s2.states, pairs)


# ------------------------------------------------------------ controllers


def controller_to_obj(ctrl: Controller) -> dict[str, Any]:
    return _tagged("controller", {
        "choices": {x: sorted(us) for x, us in sorted(ctrl.choices.items())},
    })


def controller_from_obj(obj: Mapping[str, Any]) -> Controller:
    body = _untag(obj, "controller")
    return Controller({x: frozenset(us) for x, us in body["choices"].items()})


# ------------------------------------------------------------------ specs


def spec_to_obj(spec: ReachAvoidSpec) -> dict[str, Any]:
    return _tagged("spec", {
        "initial": sorted(spec.initial),
        "target": sorted(spec.target),
        "obstacle": sorted(spec.obstacle),
    })


def spec_from_obj(obj: Mapping[str, Any]) -> ReachAvoidSpec:
    body = _untag(obj, "spec")
    return ReachAvoidSpec(
        frozenset(body["initial"]), frozenset(body["target"]), frozenset(body["obstacle"])
    )


# ------------------------------------------------------------- interfaces


def interface_to_obj(interface: Interface) -> dict[str, Any]:
    table = {
        KEY_SEP.join((_check_id(x1), _check_id(x2), _check_id(u2))): sorted(us)
        for (x1, x2, u2), us in sorted(interface.table.items())
    }
    return _tagged("interface", {"relation_kind": interface.kind.value, "table": table})


def interface_from_obj(obj: Mapping[str, Any]) -> Interface:
    body = _untag(obj, "interface")
    table: dict[tuple[str, str, str], frozenset[str]] = {}
    for key, us in body["table"].items():
        parts = key.split(KEY_SEP)
        if len(parts) != 3:
            raise FormatError(f"interface key {key!r} must have three components")
        table[(parts[0], parts[1], parts[2])] = frozenset(us)
    return Interface(RelationKind(body["relation_kind"]), table)


# ----------------------------------------------------------------- covers


def _cell_to_obj(cell: IntervalCell) -> dict[str, Any]:
    return {
        "lo": fraction_to_str(cell.lo),
        "hi": fraction_to_str(cell.hi),
        "lo_closed": cell.lo_closed,
        "hi_closed": cell.hi_closed,
    }


def _cell_from_obj(obj: Mapping[str, Any]) -> IntervalCell:
    return IntervalCell(
        fraction_from_str(obj["lo"]),
        fraction_from_str(obj["hi"]),
        bool(obj["lo_closed"]),
        bool(obj["hi_closed"]),
    )


def cover_to_obj(
    cover: CellCover,
    inputs: tuple[AbstractInput, ...] = (),
    availability: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    return _tagged("cover", {
        "cells": [
            {"state": _check_id(name), **_cell_to_obj(cell)} for name, cell in cover.cells
        ],
        "inputs": [
            {
                "input": _check_id(ai.name),
                "gain": fraction_to_str(ai.law.gain),
                "offset": fraction_to_str(ai.law.offset),
            }
            for ai in inputs
        ],
        "availability": {
            name: sorted(us) for name, us in sorted((availability or {}).items())
        },
    })


def cover_from_obj(
    obj: Mapping[str, Any],
) -> tuple[CellCover, tuple[AbstractInput, ...], dict[str, list[str]]]:
    body = _untag(obj, "cover")
    cover = CellCover(tuple((c["state"], _cell_from_obj(c)) for c in body["cells"]))
    inputs = tuple(
        AbstractInput(
            i["input"],
            AffineMap(fraction_from_str(i["gain"]), fraction_from_str(i["offset"])),
        )
        for i in body["inputs"]
    )
    availability = {name: list(us) for name, us in body["availability"].items()}
    return cover, inputs, availability


# ------------------------------------------------------------------ runs


def trajectory_to_obj(traj: Trajectory) -> dict[str, Any]:
    steps: list[dict[str, str]] = [{"x": traj.states[0]}]
    for k, u in enumerate(traj.inputs):
        steps.append({"x": traj.states[k + 1], "u": u})
    return _tagged("trace", {"steps": steps})


def trajectory_from_obj(obj: Mapping[str, Any]) -> Trajectory:
    body = _untag(obj, "trace")
    steps = body["steps"]
    states = tuple(step["x"] for step in steps)
    inputs = tuple(step["u"] for step in steps[1:])
    return Trajectory(states, inputs)


def dynamic_trace_to_obj(trace: list[tuple[str, str, str, str]]) -> dict[str, Any]:
    return _tagged("dynamic-trace", {
        "steps": [
            {"x1": x1, "x2": x2, "u2": u2, "u1": u1} for x1, x2, u2, u1 in trace
        ],
    })


# ---------------------------------------------------------------- bundles


@dataclass
class ProjectBundle:
    """Named collection of cross-referencing objects, the on-disk shape of a
    whole scenario.  Relations, controllers, and specs name the systems they
    belong to; loading validates every reference and that every system is
    non-blocking."""

    systems: dict[str, FiniteTransitionSystem] = field(default_factory=dict)
    relations: dict[str, tuple[str, str, Relation]] = field(default_factory=dict)
    controllers: dict[str, tuple[str, Controller]] = field(default_factory=dict)
    specs: dict[str, tuple[str, ReachAvoidSpec]] = field(default_factory=dict)
    covers: dict[str, tuple[CellCover, tuple[AbstractInput, ...], dict[str, list[str]]]] = (
        field(default_factory=dict)
    )

    def validate(self) -> None:
        for name, sys in self.systems.items():
            try:
                sys.require_non_blocking()
            except Exception as err:
                raise FormatError(f"system {name!r}: {err}") from None
        for name, (s1_name, s2_name, rel) in self.relations.items():
            for ref in (s1_name, s2_name):
                if ref not in self.systems:
                    raise FormatError(f"relation {name!r} references unknown system {ref!r}")
            if set(rel.domain) != set(self.systems[s1_name].states):
                raise FormatError(f"relation {name!r} does not match system {s1_name!r}")
            if set(rel.codomain) != set(self.systems[s2_name].states):
                raise FormatError(f"relation {name!r} does not match system {s2_name!r}")
        for name, (sys_name, ctrl) in self.controllers.items():
            if sys_name not in self.systems:
                raise FormatError(f"controller {name!r} references unknown system {sys_name!r}")
            ctrl.validate_for(self.systems[sys_name])
        for name, (sys_name, spec) in self.specs.items():
            if sys_name not in self.systems:
                raise FormatError(f"spec {name!r} references unknown system {sys_name!r}")
            spec.validate_for(self.systems[sys_name])


def bundle_to_obj(bundle: ProjectBundle) -> dict[str, Any]:
    return _tagged("bundle", {
        "systems": {n: system_to_obj(s) for n, s in sorted(bundle.systems.items())},
        "relations": {
            n: {"s1": s1, "s2": s2, **relation_to_obj(rel)}
            for n, (s1, s2, rel) in sorted(bundle.relations.items())
        },
        "controllers": {
            n: {"system": s, **controller_to_obj(c)}
            for n, (s, c) in sorted(bundle.controllers.items())
        },
        "specs": {
            n: {"system": s, **spec_to_obj(sp)}
            for n, (s, sp) in sorted(bundle.specs.items())
        },
        "covers": {
            n: cover_to_obj(cov, ins, avail)
            for n, (cov, ins, avail) in sorted(bundle.covers.items())
        },
    })


def bundle_from_obj(obj: Mapping[str, Any]) -> ProjectBundle:
    body = _untag(obj, "bundle")
    bundle = ProjectBundle()
    for name, sys_obj in body.get("systems", {}).items():
        bundle.systems[name] = system_from_obj(sys_obj)
    for name, rel_obj in body.get("relations", {}).items():
        s1, s2 = rel_obj["s1"], rel_obj["s2"]
        if s1 not in bundle.systems or s2 not in bundle.systems:
            raise FormatError(f"relation {name!r} references an unknown system")
        bundle.relations[name] = (
            s1, s2, relation_from_obj(rel_obj, bundle.systems[s1], bundle.systems[s2])
        )
    for name, ctrl_obj in body.get("controllers", {}).items():
        bundle.controllers[name] = (ctrl_obj["system"], controller_from_obj(ctrl_obj))
    for name, spec_obj in body.get("specs", {}).items():
        bundle.specs[name] = (spec_obj["system"], spec_from_obj(spec_obj))
    for name, cover_obj in body.get("covers", {}).items():
        bundle.covers[name] = cover_from_obj(cover_obj)
    bundle.validate()
    return bundle


# ------------------------------------------------------------------- I/O


def dumps(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save(path: str | Path, obj: Mapping[str, Any]) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))

"""Detuning sequences as on/off masks over a few shared flux-pulse primitives.

In the standard arrangement three primitives suffice: P1 takes an f1 data
qubit down to f1_int, P2 takes an ancilla down to f2_int and P3 parks an f3
data qubit at f3_park. Ancilla parking at f2_park during the other half-cycle
is attached to the readout window and is not maskable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import InvalidTarget, LadderMismatch, OrderViolation, UnsupportedSchedule
from .fabric import ARMS, Coord, Fabric, frequency_group, is_data_site
from .freqplan import (FrequencyLadder, InteractionZoneReport, check_cycle, summarize,
                       sweetspot_counts)
from .schedule import (HALF_OF_TYPE, INTERACTION_SLOTS, CycleSchedule, arm_slots,
                       reorder_arms, validate_ordering)

EDIT_KINDS = ("stabilizer_off_h_mask", "stabilizer_off_flux_mask",
              "remove_data_from_check", "reorder_gates")
_ARM_ROW = {"NE": 0, "NW": 0, "SE": 1, "SW": 1}  # data row of each arm


@dataclass(frozen=True)
class PulsePrimitive:
    id: str
    from_level: str
    to_level: str
    roles: tuple[str, ...]


_STANDARD_ROLES = {"P1": ("D1", "D2"), "P2": ("X1", "X2", "Z1", "Z2"), "P3": ("D3", "D4")}
_SPLIT_ROLES = {
    "standard": _STANDARD_ROLES,
    "break_f1_f3": {"P1a": ("D1",), "P1b": ("D2",), "P2": ("X1", "X2", "Z1", "Z2"),
                    "P3a": ("D3",), "P3b": ("D4",)},
    "break_all": {"P1a": ("D1",), "P1b": ("D2",), "P2a": ("X1",), "P2b": ("X2",),
                  "P2c": ("Z1",), "P2d": ("Z2",), "P3a": ("D3",), "P3b": ("D4",)},
}
_LEVELS = {"P1": ("f1", "f1_int"), "P2": ("f2", "f2_int"), "P3": ("f3", "f3_park")}
_INVERTED = {
    "P1": ("f1", "f1_int", ("X1", "Z1")),
    "P2u": ("f2_park", "f2", ("D1", "D2", "D3", "D4")),
    "P2d": ("f2_park", "f2_int", ("D1", "D2", "D3", "D4")),
    "P3": ("f3_park", "f3", ("X2", "Z2")),
}


def primitives(variant: str = "standard", arrangement: str = "standard") -> list[PulsePrimitive]:
    if arrangement == "inverted":
        if variant != "standard":
            raise ValueError("degeneracy-breaking variants are defined for the standard arrangement")
        return [PulsePrimitive(p, a, b, roles) for p, (a, b, roles) in _INVERTED.items()]
    try:
        table = _SPLIT_ROLES[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}") from None
    return [PulsePrimitive(p, *_LEVELS[p[:2]], roles) for p, roles in table.items()]


def primitive_count(variant: str = "standard") -> int:
    return len(primitives(variant))


def primitive_for(role: str, variant: str = "standard") -> str:
    for p, roles in _SPLIT_ROLES[variant].items():
        if role in roles:
            return p
    raise KeyError(role)


@dataclass(frozen=True)
class LogicalEdit:
    """A logical operation expressed as a change to masks and/or the gate list.

    ``cycles`` is an inclusive ``(first, last)`` range; ``None`` means every cycle.
    """

    kind: str
    target: Coord
    arm: str | None = None
    order: tuple[str, ...] | None = None
    cycles: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise InvalidTarget(f"unknown edit kind {self.kind!r}")
        object.__setattr__(self, "target", tuple(self.target))
        if self.order is not None:
            object.__setattr__(self, "order", tuple(self.order))
        if self.cycles is not None:
            object.__setattr__(self, "cycles", tuple(self.cycles))

    def active_in(self, cycle: int) -> bool:
        return self.cycles is None or self.cycles[0] <= cycle <= self.cycles[1]

    @classmethod
    def from_dict(cls, d: Mapping) -> "LogicalEdit":
        return cls(d["kind"], tuple(d["target"]), d.get("arm"),
                   tuple(d["order"]) if d.get("order") else None,
                   tuple(d["cycles"]) if d.get("cycles") else None)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "target": list(self.target)}
        if self.arm:
            out["arm"] = self.arm
        if self.order:
            out["order"] = list(self.order)
        if self.cycles:
            out["cycles"] = list(self.cycles)
        return out


def load_edits(text: str) -> list[LogicalEdit]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    return [LogicalEdit.from_dict(d) for d in data]


@dataclass(frozen=True, eq=False)
class MaskTable:
    """On/off bits per (qubit, interaction slot, primitive) for one cycle."""

    schedule: CycleSchedule
    arrangement: str
    variant: str
    bits: Mapping[tuple[Coord, str, str], int]
    edits: tuple[LogicalEdit, ...] = ()

    @property
    def fabric(self) -> Fabric:
        return self.schedule.fabric

    def bit(self, q: Coord, slot: str, primitive: str) -> int:
        return self.bits.get((q, slot, primitive), 0)

    def on_slots(self, q: Coord, primitive: str | None = None) -> list[str]:
        return [s for (c, s, p), b in sorted(self.bits.items(), key=_bit_key)
                if c == q and b and (primitive is None or p == primitive)]

    def with_bits(self, updates: Mapping[tuple[Coord, str, str], int],
                  edit: LogicalEdit | None = None) -> "MaskTable":
        bits = dict(self.bits)
        for k, v in updates.items():
            if k not in bits:
                raise InvalidTarget(f"no primitive {k[2]} defined for {k[0]} at slot {k[1]}")
            bits[k] = int(v)
        edits = self.edits + ((edit,) if edit else ())
        return replace(self, bits=bits, edits=edits)

    def to_rows(self) -> list[dict]:
        return [{"row": c[0], "col": c[1], "role": self.fabric.role_of(c),
                 "slot": s, "primitive": p, "bit": b}
                for (c, s, p), b in sorted(self.bits.items(), key=_bit_key)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["row", "col", "role", "slot", "primitive", "bit"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(self.to_rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"arrangement": self.arrangement, "variant": self.variant,
                "edits": [e.to_dict() for e in self.edits],
                "entries": self.to_rows()}


def _bit_key(item):
    (c, s, p), _ = item
    return (c, INTERACTION_SLOTS.index(s), p)


def _slot_kind(slot: str) -> str:
    return "X" if slot in HALF_OF_TYPE["X"] else "Z"


def _partner_slots(fabric: Fabric, scheduled: Mapping[Coord, dict[str, Coord]],
                   data: Coord) -> dict[str, Coord]:
    """Slot -> ancilla for a data qubit's CZs, with absent tiling partners filled in.

    Absent partners (outside a planar boundary) keep their default slot so
    boundary qubits follow the same detuning sequence as their bulk role.
    """
    out = {}
    for anc, arm, present in fabric.tiling_neighbors(data):
        if not present:
            kind = "X" if fabric.tiling_role_at(anc).startswith("X") else "Z"
            out[arm_slots(kind)[arm]] = anc
    out.update(scheduled.get(data, {}))
    return out


def synthesize_masks(schedule: CycleSchedule, fabric: Fabric | None = None,
                     variant: str = "standard", arrangement: str = "standard") -> MaskTable:
    """Mask bits realizing the CZs of a pipelined schedule."""
    if schedule.mode != "pipelined":
        raise UnsupportedSchedule(f"masks are defined for the pipelined cycle, not {schedule.mode}")
    fabric = fabric or schedule.fabric
    if fabric is not schedule.fabric:
        raise UnsupportedSchedule("schedule was built for a different fabric")
    primitives(variant, arrangement)
    if arrangement == "inverted":
        return _synthesize_inverted(schedule)
    bits: dict[tuple[Coord, str, str], int] = {}
    scheduled: dict[Coord, dict[str, Coord]] = {}
    for g in schedule.gates:
        if g.kind == "CZ":
            d, a = g.qubits if is_data_site(g.qubits[0]) else g.qubits[::-1]
            scheduled.setdefault(d, {})[g.slot] = a
    for q, role in sorted(fabric.qubits.items()):
        prim = primitive_for(role, variant)
        if is_data_site(q):
            active = set(_partner_slots(fabric, scheduled, q))
            for s in INTERACTION_SLOTS:
                on = s in active
                # P1 pulls f1 data into the zone; P3 parks f3 data when idle
                bits[(q, s, prim)] = int(on if prim.startswith("P1") else not on)
        else:
            kind = fabric.plaquette(q).kind
            for s in (x for x in INTERACTION_SLOTS if _slot_kind(x) == kind):
                bits[(q, s, prim)] = 0
            for arm in ARMS:
                s = schedule.arm_slot[(q, arm)]
                partner = fabric.tiling_arm(q, arm)
                if frequency_group(fabric.tiling_role_at(partner)) == "f3":
                    bits[(q, s, prim)] = 1
    return MaskTable(schedule, "standard", variant, bits)


def _synthesize_inverted(schedule: CycleSchedule) -> MaskTable:
    fabric = schedule.fabric
    bits: dict[tuple[Coord, str, str], int] = {}
    for q, role in sorted(fabric.qubits.items()):
        if is_data_site(q):
            for s in INTERACTION_SLOTS:
                bits[(q, s, "P2u")] = 0
                bits[(q, s, "P2d")] = 0
        else:
            prim = "P1" if role in ("X1", "Z1") else "P3"
            kind = fabric.plaquette(q).kind
            for s in INTERACTION_SLOTS:
                if _slot_kind(s) == kind:
                    bits[(q, s, prim)] = 0
    for g in schedule.gates:
        if g.kind != "CZ":
            continue
        d, a = g.qubits if is_data_site(g.qubits[0]) else g.qubits[::-1]
        upper = fabric.role_of(a) in ("X1", "Z1")
        bits[(a, g.slot, "P1" if upper else "P3")] = 1
        bits[(d, g.slot, "P2u" if upper else "P2d")] = 1
    return MaskTable(schedule, "inverted", "standard", bits)


# -- expansion to frequencies ---------------------------------------------------

@dataclass(frozen=True)
class DetuningSequences:
    """Per-qubit frequency (GHz) in every slot of the pipelined cycle."""

    table: MaskTable
    ladder: FrequencyLadder
    frequencies: Mapping[Coord, Mapping[str, float]]

    @property
    def slots(self) -> tuple[str, ...]:
        return self.table.schedule.slot_ids

    def interaction(self, q: Coord) -> list[float]:
        return [self.frequencies[q][s] for s in INTERACTION_SLOTS]

    def slot_frequencies(self, slot: str) -> dict[Coord, float]:
        return {q: f[slot] for q, f in self.frequencies.items()}

    def distinct_sequences(self) -> set[tuple[float, ...]]:
        return {tuple(round(f, 9) for f in self.interaction(q)) for q in self.frequencies}

    def sequences_by_role(self) -> dict[str, set[tuple[float, ...]]]:
        out: dict[str, set] = {}
        for q in self.frequencies:
            role = self.table.fabric.role_of(q)
            out.setdefault(role, set()).add(tuple(round(f, 9) for f in self.interaction(q)))
        return out

    def to_dict(self) -> dict:
        return {"slots": list(self.slots),
                "ladder": self.ladder.to_dict(),
                "qubits": [{"row": q[0], "col": q[1], "role": self.table.fabric.role_of(q),
                            "frequencies_ghz": [round(self.frequencies[q][s], 9)
                                                for s in self.slots]}
                           for q in sorted(self.frequencies)]}


def masks_to_sequences(table: MaskTable, ladder: FrequencyLadder,
                       fabric: Fabric | None = None) -> DetuningSequences:
    fabric = fabric or table.fabric
    if ladder.arrangement != table.arrangement:
        raise LadderMismatch(f"ladder is {ladder.arrangement}, masks are {table.arrangement}")
    if ladder.variant != table.variant:
        raise LadderMismatch(f"ladder variant {ladder.variant} != mask variant {table.variant}")
    slots = table.schedule.slot_ids
    on: dict[tuple[Coord, str], set[str]] = {}
    for (c, s, p), b in table.bits.items():
        if b:
            on.setdefault((c, s), set()).add(p)
    out: dict[Coord, dict[str, float]] = {}
    for q, role in fabric.qubits.items():
        lv = lambda name: ladder.level(name, role)  # noqa: E731
        out[q] = {s: _level_at(fabric, q, role, s, on.get((q, s), set()),
                               table.arrangement, lv) for s in slots}
    return DetuningSequences(table, ladder, out)


def _level_at(fabric: Fabric, q: Coord, role: str, slot: str, on: set[str],
              arrangement: str, lv) -> float:
    if arrangement == "standard":
        if is_data_site(q):
            if frequency_group(role) == "f1":
                return lv("f1_int") if on else lv("f1")
            return lv("f3_park") if on else lv("f3")
        if _slot_kind(slot) != fabric.plaquette(q).kind:
            return lv("f2_park")
        return lv("f2_int") if on else lv("f2")
    # inverted: data in the middle, ancillas at the outer levels
    if is_data_site(q):
        if slot not in INTERACTION_SLOTS:
            return lv("f2")
        if "P2u" in on:
            return lv("f2")
        if "P2d" in on:
            return lv("f2_int")
        return lv("f2_park")
    if role in ("X1", "Z1"):
        return lv("f1_int") if on else lv("f1")
    return lv("f3") if on else lv("f3_park")


def realized_cz(sequences: DetuningSequences) -> dict[str, set[tuple[Coord, Coord]]]:
    """Coupled (data, ancilla) pairs sitting at a CZ zone in each interaction slot."""
    ladder = sequences.ladder
    fabric = sequences.table.fabric
    out = {}
    for s in INTERACTION_SLOTS:
        hits = set()
        for d, a in fabric.couplings:
            delta = sequences.frequencies[d][s] - sequences.frequencies[a][s]
            if abs(abs(delta) - ladder.abs_alpha) < ladder.guard:
                hits.add((d, a))
        out[s] = hits
    return out


def check_sequences(sequences: DetuningSequences) -> list[InteractionZoneReport]:
    """Zone checks over all 14 slots and all transitions (cyclic) of the cycle."""
    schedule = sequences.table.schedule
    intended = schedule.cz_by_slot()
    freqs = {s: sequences.slot_frequencies(s) for s in sequences.slots}
    return check_cycle(schedule.fabric, sequences.ladder, sequences.slots, freqs, intended)


def sweetspots(sequences: DetuningSequences) -> dict[str, tuple[int, int]]:
    return sweetspot_counts(sequences.table.fabric, sequences.ladder,
                            {q: sequences.interaction(q) for q in sequences.frequencies})


# -- logical edits ----------------------------------------------------------------

@dataclass(frozen=True)
class CompiledCycle:
    """A schedule together with the masks that realize it."""

    schedule: CycleSchedule
    masks: MaskTable


def _check_target(fabric: Fabric, edit: LogicalEdit):
    if edit.target not in fabric.qubits or is_data_site(edit.target):
        raise InvalidTarget(f"{edit.target} is not an ancilla of the fabric")
    pl = fabric.plaquette(edit.target)
    if edit.kind == "remove_data_from_check":
        if edit.arm not in pl.arms:
            raise InvalidTarget(f"ancilla {edit.target} has no arm {edit.arm!r}")
    if edit.kind == "reorder_gates":
        if edit.order is None or sorted(edit.order) != sorted(ARMS):
            raise InvalidTarget("reorder_gates needs an order that permutes NE, NW, SE, SW")


def _data_side_off(table: MaskTable, ancilla: Coord, arms: Iterable[str]) -> dict:
    """Bits that keep the given arms' data qubits away from the CZ zone.

    f1 data simply skip their P1 pulse. f3 data are parked; the ancilla keeps
    its own P2 pulse because an ancilla left at f2 would meet the exchange-free
    but CZ-active f1_int level of its other neighbors.
    """
    fabric = table.fabric
    pl = fabric.plaquette(ancilla)
    updates = {}
    for arm in arms:
        if arm not in pl.arms:
            continue
        d = pl.arms[arm]
        s = table.schedule.arm_slot[(ancilla, arm)]
        role = fabric.role_of(d)
        if table.arrangement == "inverted":
            upper = fabric.role_of(ancilla) in ("X1", "Z1")
            updates[(d, s, "P2u" if upper else "P2d")] = 0
            updates[(ancilla, s, "P1" if upper else "P3")] = 0
            continue
        prim = primitive_for(role, table.variant)
        updates[(d, s, prim)] = 0 if prim.startswith("P1") else 1
    return updates


def _edit_schedule(schedule: CycleSchedule, edit: LogicalEdit) -> CycleSchedule:
    a = edit.target
    if edit.kind == "stabilizer_off_h_mask":
        gates = [g for g in schedule.gates
                 if not (g.qubits == (a,) and g.kind in ("H", "Y_plus_90", "Y_minus_90"))]
        return schedule.replace_gates(gates)
    if edit.kind == "stabilizer_off_flux_mask":
        gates = [g for g in schedule.gates if not (g.kind == "CZ" and a in g.qubits)]
        return schedule.replace_gates(gates)
    if edit.kind == "remove_data_from_check":
        d = schedule.fabric.plaquette(a).arms[edit.arm]
        gates = [g for g in schedule.gates
                 if not (g.kind == "CZ" and set(g.qubits) == {a, d})]
        return schedule.replace_gates(gates)
    # reorder_gates: arms on the same data row must keep sharing their pair of
    # slots, otherwise the ancilla's P2 pattern no longer matches its role
    old = {schedule.arm_slot[(a, arm)]: arm for arm in ARMS}
    slots = sorted(old, key=schedule.slot_index)
    for slot, arm in zip(slots, edit.order):
        if _ARM_ROW[arm] != _ARM_ROW[old[slot]]:
            raise OrderViolation(
                f"order {edit.order} for {a} moves arm {arm} into the slot of {old[slot]}, "
                "breaking the two-in-a-row grouping")
    edited = reorder_arms(schedule, a, edit.order)
    bad = [v for v in validate_ordering(edited, skip_pattern=[a])]
    if bad:
        raise OrderViolation(f"order {edit.order} for {a} breaks the schedule: {bad[0]}")
    return edited


def _edit_masks(table: MaskTable, edit: LogicalEdit) -> MaskTable:
    pl = table.fabric.plaquette(edit.target)
    if edit.kind == "stabilizer_off_h_mask":
        return replace(table, edits=table.edits + (edit,))
    if edit.kind == "stabilizer_off_flux_mask":
        return table.with_bits(_data_side_off(table, edit.target, pl.arms), edit)
    if edit.kind == "remove_data_from_check":
        return table.with_bits(_data_side_off(table, edit.target, [edit.arm]), edit)
    schedule = _edit_schedule(table.schedule, edit)
    fresh = synthesize_masks(schedule, variant=table.variant, arrangement=table.arrangement)
    for e in table.edits:
        fresh = _edit_masks(fresh, e)
    return replace(fresh, edits=table.edits + (edit,))


def apply_edit(artifact, edit: LogicalEdit):
    """Apply ``edit`` to a MaskTable, a CycleSchedule or a CompiledCycle (copy-on-edit)."""
    if isinstance(artifact, CompiledCycle):
        schedule = apply_edit(artifact.schedule, edit)
        masks = apply_edit(artifact.masks, edit)
        masks = replace(masks, schedule=schedule)
        return CompiledCycle(schedule, masks)
    if isinstance(artifact, MaskTable):
        _check_target(artifact.fabric, edit)
        edited = _edit_masks(artifact, edit)
        return replace(edited, schedule=_edit_schedule(artifact.schedule, edit))
    if isinstance(artifact, CycleSchedule):
        if artifact.mode != "pipelined" and edit.kind == "reorder_gates":
            raise UnsupportedSchedule("reorder_gates is defined for the pipelined cycle")
        _check_target(artifact.fabric, edit)
        return _edit_schedule(artifact, edit)
    raise TypeError(f"cannot apply an edit to {type(artifact).__name__}")


def compile_cycle(schedule: CycleSchedule, edits: Sequence[LogicalEdit] = (),
                  variant: str = "standard", arrangement: str = "standard",
                  cycle: int | None = None) -> CompiledCycle:
    """Masks for ``schedule`` with the edits active in ``cycle`` applied (all if None)."""
    out = CompiledCycle(schedule, synthesize_masks(schedule, variant=variant,
                                                   arrangement=arrangement))
    for e in edits:
        if cycle is None or e.active_in(cycle):
            out = apply_edit(out, e)
    return out


def schedule_provider(schedule: CycleSchedule, edits: Sequence[LogicalEdit]):
    """Callable ``cycle -> schedule`` honoring each edit's cycle range."""
    cache: dict[tuple, CycleSchedule] = {}

    def for_cycle(cycle: int) -> CycleSchedule:
        active = tuple(i for i, e in enumerate(edits) if e.active_in(cycle))
        if active not in cache:
            s = schedule
            for i in active:
                s = apply_edit(s, edits[i])
            cache[active] = s
        return cache[active]

    return for_cycle


def verify(compiled: CompiledCycle, ladder: FrequencyLadder) -> dict:
    """Expand masks, run every zone check and compare realized with scheduled CZs."""
    seqs = masks_to_sequences(compiled.masks, ladder)
    reports = check_sequences(seqs)
    realized = realized_cz(seqs)
    scheduled = compiled.schedule.cz_by_slot()
    mismatched = {s: sorted(realized[s] ^ scheduled.get(s, set())) for s in INTERACTION_SLOTS}
    return {
        "sequences": seqs,
        "reports": reports,
        "summary": summarize(reports),
        "realized_cz": realized,
        "cz_match": not any(mismatched.values()),
        "cz_mismatch": {s: v for s, v in mismatched.items() if v},
    }

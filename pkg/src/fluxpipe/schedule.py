"""QEC-cycle schedules: the pipelined depth-7 cycle and the parallel depth-9 cycle.

A schedule is a flat list of :class:`GateOp` placed into ordered time slots.
The pipelined cycle uses the slots::

    A 1 2 3 4 B C | D 5 6 7 8 E F

X-type checks run their coherent steps in the first half while Z-type
ancillas are read out, and the roles swap in the second half. A Z-ancilla's
measurement therefore lands in slot A of the *next* cycle; such gates carry
``prev_cycle=True``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterable

from .fabric import ARMS, Coord, Fabric, build_fabric, is_data_site

X_ORDER = ("NE", "NW", "SE", "SW")
Z_ORDER = ("NE", "SE", "NW", "SW")

PIPELINED_SLOTS = ("A", "1", "2", "3", "4", "B", "C", "D", "5", "6", "7", "8", "E", "F")
PARALLEL_SLOTS = ("s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9")
INTERACTION_SLOTS = ("1", "2", "3", "4", "5", "6", "7", "8")

_PIPELINED_KIND = {
    "A": "single_qubit", "B": "single_qubit", "D": "single_qubit", "E": "single_qubit",
    "C": "flex", "F": "flex",
    **{s: "two_qubit" for s in INTERACTION_SLOTS},
}
_PARALLEL_KIND = {
    "s1": "single_qubit", "s2": "two_qubit", "s3": "single_qubit", "s4": "two_qubit",
    "s5": "two_qubit", "s6": "single_qubit", "s7": "two_qubit", "s8": "single_qubit",
    "s9": "measure",
}
# CZ steps of the parallel cycle and the single-qubit slots around them
_PAR_CZ = ("s2", "s4", "s5", "s7")
_PAR_BEFORE = {0: "s1", 1: "s3", 3: "s6", 4: "s8"}  # switch point -> slot

GATE_KINDS = ("H", "Y_plus_90", "Y_minus_90", "CZ", "Measure", "Idle", "PauliX", "PauliZ")
SINGLE_QUBIT_ROTATIONS = ("H", "Y_plus_90", "Y_minus_90")

HALF_OF_TYPE = {"X": ("A", "1", "2", "3", "4", "B", "C"), "Z": ("D", "5", "6", "7", "8", "E", "F")}


def arm_slots(kind: str) -> dict[str, str]:
    """Default arm -> slot assignment of the pipelined cycle."""
    if kind == "X":
        return dict(zip(X_ORDER, ("1", "2", "3", "4")))
    return dict(zip(Z_ORDER, ("5", "6", "7", "8")))


@dataclass(frozen=True)
class TimeSlot:
    id: str
    kind: str  # single_qubit, two_qubit, flex, measure


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[Coord, ...]
    slot: str
    span: tuple[str, str] | None = None
    prev_cycle: bool = False

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "qubits": [list(q) for q in self.qubits]}
        if self.span:
            out["span"] = list(self.span)
        if self.prev_cycle:
            out["prev_cycle"] = True
        return out


@dataclass(frozen=True)
class Durations:
    tau_1q: float = 20.0   # ns
    tau_2q: float = 40.0   # ns
    tau_ro: float = 500.0  # ns, readout plus resonator depletion

    def __post_init__(self):
        if min(self.tau_1q, self.tau_2q, self.tau_ro) <= 0:
            raise ValueError("durations must be positive")


@dataclass(frozen=True, eq=False)
class CycleSchedule:
    fabric: Fabric
    mode: str  # "pipelined" or "parallel_s17"
    slots: tuple[TimeSlot, ...]
    gates: tuple[GateOp, ...]
    arm_slot: dict[tuple[Coord, str], str] = field(default_factory=dict)

    @property
    def slot_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.slots)

    def slot_index(self, slot: str) -> int:
        return self.slot_ids.index(slot)

    def gates_in(self, slot: str) -> list[GateOp]:
        return [g for g in self.gates if g.slot == slot]

    def cz_pairs(self, slot: str | None = None) -> list[tuple[Coord, Coord]]:
        """CZ gates as (data, ancilla) pairs, optionally restricted to one slot."""
        out = []
        for g in self.gates:
            if g.kind == "CZ" and (slot is None or g.slot == slot):
                a, b = g.qubits
                out.append((a, b) if is_data_site(a) else (b, a))
        return out

    def cz_by_slot(self) -> dict[str, set[tuple[Coord, Coord]]]:
        out: dict[str, set] = {s: set() for s in self.slot_ids}
        for pair, g in zip(self.cz_pairs(), (g for g in self.gates if g.kind == "CZ")):
            out[g.slot].add(pair)
        return out

    def ops_on(self, qubit: Coord) -> list[GateOp]:
        return [g for g in self.gates if qubit in g.qubits]

    def replace_gates(self, gates: Iterable[GateOp], **kwargs) -> "CycleSchedule":
        return replace(self, gates=tuple(gates), **kwargs)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "patch": self.fabric.patch.to_dict(),
            "slots": [
                {"id": s.id, "kind": s.kind,
                 "gates": [g.to_dict() for g in self.gates_in(s.id)]}
                for s in self.slots
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


_ASCII = {"H": "H", "Y_plus_90": "Y+", "Y_minus_90": "Y-", "CZ": "*", "Measure": "M",
          "Idle": ".", "PauliX": "X", "PauliZ": "Z"}


def ascii_diagram(schedule: CycleSchedule) -> str:
    """One row per qubit, one column per slot."""
    roles = schedule.fabric.qubits
    width = 4
    header = " " * 14 + "".join(s.id.ljust(width) for s in schedule.slots)
    lines = [header]
    cells: dict[tuple[Coord, str], str] = {}
    for g in schedule.gates:
        for q in g.qubits:
            cells[(q, g.slot)] = _ASCII[g.kind]
    for q in sorted(roles):
        label = f"{roles[q]} {q}"
        row = "".join(cells.get((q, s.id), "-").ljust(width) for s in schedule.slots)
        lines.append(label.ljust(14) + row)
    return "\n".join(lines)


def pipelined_cycle(fabric: Fabric) -> CycleSchedule:
    """One pipelined QEC cycle for ``fabric``.

    X-ancillas and every data qubit on an X-check get H in slots A and B around
    the X-type CZs in slots 1-4 (order NE, NW, SE, SW). Z-ancillas get H in D and
    E around their CZs in slots 5-8 (order NE, SE, NW, SW). X-ancillas are read
    out during D-F, Z-ancillas during A-C of the following cycle.
    """
    slots = tuple(TimeSlot(s, _PIPELINED_KIND[s]) for s in PIPELINED_SLOTS)
    gates: list[GateOp] = []
    x_data = sorted({d for pl in fabric.plaquettes if pl.kind == "X" for d in pl.data})
    x_anc = fabric.x_ancillas()
    z_anc = fabric.z_ancillas()
    arm_slot: dict[tuple[Coord, str], str] = {}
    for pl in fabric.plaquettes:
        for arm, slot in arm_slots(pl.kind).items():
            arm_slot[(pl.ancilla, arm)] = slot

    for a in z_anc:
        gates.append(GateOp("Measure", (a,), "A", span=("A", "C"), prev_cycle=True))
    for q in x_anc + x_data:
        gates.append(GateOp("H", (q,), "A"))
    for slot in ("1", "2", "3", "4"):
        gates.extend(_cz_for_slot(fabric, "X", slot, arm_slot))
    for q in x_anc + x_data:
        gates.append(GateOp("H", (q,), "B"))
    for d in fabric.data_qubits:
        gates.append(GateOp("Idle", (d,), "C"))
    for a in z_anc:
        gates.append(GateOp("H", (a,), "D"))
    for a in x_anc:
        gates.append(GateOp("Measure", (a,), "D", span=("D", "F")))
    for slot in ("5", "6", "7", "8"):
        gates.extend(_cz_for_slot(fabric, "Z", slot, arm_slot))
    for a in z_anc:
        gates.append(GateOp("H", (a,), "E"))
    for d in fabric.data_qubits:
        gates.append(GateOp("Idle", (d,), "F"))
    return CycleSchedule(fabric, "pipelined", slots, tuple(gates), arm_slot)


def _cz_for_slot(fabric: Fabric, kind: str, slot: str,
                 arm_slot: dict[tuple[Coord, str], str]) -> list[GateOp]:
    out = []
    for pl in fabric.plaquettes:
        if pl.kind != kind:
            continue
        for arm, data in pl.arms.items():
            if arm_slot[(pl.ancilla, arm)] == slot:
                out.append(GateOp("CZ", (data, pl.ancilla), slot))
    return out


def _basis_changes(required: list[str | None]) -> list[int]:
    """Switch points for one data qubit in the parallel cycle.

    ``required[k]`` is ``"X"`` (needs the H basis), ``"Z"`` or None at CZ step k.
    Switch point ``s`` sits before step ``s`` (4 = after the last step); no
    single-qubit slot exists between steps 2 and 3, so switch point 2 is
    unavailable. Returns the cheapest feasible set of switch points.
    """
    best = None
    for bases in itertools.product("ZX", repeat=4):
        if any(r is not None and r != b for r, b in zip(required, bases)):
            continue
        seq = ("Z",) + bases + ("Z",)
        points = [k for k in range(5) if seq[k] != seq[k + 1]]
        if 2 in points:
            continue
        if best is None or len(points) < len(best):
            best = points
    if best is None:
        raise ValueError(f"no basis-change placement for CZ pattern {required}")
    return best


def parallel_cycle(fabric: Fabric) -> CycleSchedule:
    """Fully parallel depth-9 cycle: X- and Z-type CZs share the four CZ steps."""
    slots = tuple(TimeSlot(s, _PARALLEL_KIND[s]) for s in PARALLEL_SLOTS)
    arm_slot: dict[tuple[Coord, str], str] = {}
    for pl in fabric.plaquettes:
        order = X_ORDER if pl.kind == "X" else Z_ORDER
        for k, arm in enumerate(order):
            arm_slot[(pl.ancilla, arm)] = _PAR_CZ[k]

    required: dict[Coord, list[str | None]] = {d: [None] * 4 for d in fabric.data_qubits}
    cz: list[GateOp] = []
    for pl in fabric.plaquettes:
        for arm, data in pl.arms.items():
            slot = arm_slot[(pl.ancilla, arm)]
            required[data][_PAR_CZ.index(slot)] = pl.kind
            cz.append(GateOp("CZ", (data, pl.ancilla), slot))

    gates: list[GateOp] = []
    one_q: dict[str, list[Coord]] = {s: [] for s in _PAR_BEFORE.values()}
    for a in fabric.ancillas:
        one_q["s1"].append(a)
        one_q["s8"].append(a)
    for d in fabric.data_qubits:
        for point in _basis_changes(required[d]):
            one_q[_PAR_BEFORE[point]].append(d)
    for slot in PARALLEL_SLOTS:
        if slot in one_q:
            gates.extend(GateOp("H", (q,), slot) for q in sorted(one_q[slot]))
        gates.extend(g for g in cz if g.slot == slot)
    gates.extend(GateOp("Measure", (a,), "s9", span=("s9", "s9")) for a in fabric.ancillas)
    return CycleSchedule(fabric, "parallel_s17", slots, tuple(gates), arm_slot)


def parallel_cycle_s17() -> CycleSchedule:
    return parallel_cycle(build_fabric(3))


def ancilla_depth(schedule: CycleSchedule, ancilla: Coord) -> int:
    """Layers from an ancilla's first operation through its measurement.

    Flex slots (C, F) are optional slack and do not add depth; a measurement
    flagged ``prev_cycle`` is placed after the end of the cycle.
    """
    ids = schedule.slot_ids
    n = len(ids)
    positions = []
    for g in schedule.ops_on(ancilla):
        if g.kind == "Idle":
            continue
        pos = ids.index(g.slot) + (n if g.prev_cycle else 0)
        positions.append(pos)
    if not positions:
        return 0
    kinds = [s.kind for s in schedule.slots] * 2
    return sum(1 for p in range(min(positions), max(positions) + 1) if kinds[p] != "flex")


def slot_exclusivity(schedule: CycleSchedule) -> list[dict]:
    out = []
    for slot in schedule.slot_ids:
        seen: dict[Coord, GateOp] = {}
        for g in schedule.gates_in(slot):
            for q in g.qubits:
                if q in seen:
                    out.append({"kind": "slot_conflict", "slot": slot, "qubit": list(q),
                                "gates": [seen[q].kind, g.kind]})
                seen[q] = g
        # a measurement spanning several slots keeps its qubit busy throughout
    spans = [g for g in schedule.gates if g.kind == "Measure" and g.span]
    for g in spans:
        lo, hi = schedule.slot_index(g.span[0]), schedule.slot_index(g.span[1])
        for s in schedule.slot_ids[lo + 1:hi + 1]:
            for other in schedule.gates_in(s):
                if g.qubits[0] in other.qubits:
                    out.append({"kind": "slot_conflict", "slot": s, "qubit": list(g.qubits[0]),
                                "gates": ["Measure", other.kind]})
    return out


def validate_ordering(schedule: CycleSchedule, skip_pattern: Iterable[Coord] = ()) -> list[dict]:
    """Check slot exclusivity, the per-plaquette CZ pattern and shared-qubit order.

    * ``pattern``: an X-plaquette's CZs must run NE, NW, SE, SW and a Z-plaquette's
      NE, SE, NW, SW (restricted to present arms).
    * ``shared_order``: the two data qubits common to adjacent X and Z plaquettes
      must both interact with the same ancilla first.
    """
    fabric = schedule.fabric
    skip = set(skip_pattern)
    violations = slot_exclusivity(schedule)
    time_of: dict[tuple[Coord, Coord], int] = {}
    for g in schedule.gates:
        if g.kind == "CZ":
            a, b = g.qubits
            d, anc = (a, b) if is_data_site(a) else (b, a)
            time_of[(d, anc)] = schedule.slot_index(g.slot)

    for pl in fabric.plaquettes:
        if pl.ancilla in skip:
            continue
        order = X_ORDER if pl.kind == "X" else Z_ORDER
        present = [(arm, time_of.get((pl.arms[arm], pl.ancilla))) for arm in order
                   if arm in pl.arms]
        times = [t for _, t in present if t is not None]
        if times != sorted(times) or len(set(times)) != len(times):
            violations.append({"kind": "pattern", "ancilla": list(pl.ancilla),
                               "plaquette": pl.kind,
                               "order": [arm for arm, t in sorted(
                                   (p for p in present if p[1] is not None),
                                   key=lambda p: p[1])]})

    for x in fabric.plaquettes:
        if x.kind != "X":
            continue
        x_data = set(x.data)
        for z in fabric.plaquettes:
            if z.kind != "Z":
                continue
            shared = sorted(x_data & set(z.data))
            if len(shared) < 2:
                continue
            firsts = set()
            for d in shared:
                tx = time_of.get((d, x.ancilla))
                tz = time_of.get((d, z.ancilla))
                if tx is None or tz is None:
                    continue
                firsts.add("X" if tx < tz else "Z")
            if len(firsts) > 1:
                violations.append({"kind": "shared_order", "x_ancilla": list(x.ancilla),
                                   "z_ancilla": list(z.ancilla),
                                   "qubits": [list(d) for d in shared]})
    return violations


def slot_durations(schedule: CycleSchedule, durations: Durations = Durations()) -> dict[str, float]:
    """Duration of every slot in ns.

    Flex slots C and F absorb the readout of the opposite ancilla type: each
    half-cycle lasts ``max(coherent block, readout)``.
    """
    out = {}
    for s in schedule.slots:
        if s.kind == "single_qubit":
            out[s.id] = durations.tau_1q
        elif s.kind == "two_qubit":
            out[s.id] = durations.tau_2q
        elif s.kind == "measure":
            out[s.id] = durations.tau_ro
        else:
            out[s.id] = 0.0
    if schedule.mode == "pipelined":
        for flex, half in (("C", HALF_OF_TYPE["X"]), ("F", HALF_OF_TYPE["Z"])):
            coherent = sum(out[s] for s in half if s != flex)
            out[flex] = max(0.0, durations.tau_ro - coherent)
    return out


def cycle_time(schedule: CycleSchedule, durations: Durations = Durations()) -> float:
    """Wall-clock length of one QEC cycle in ns."""
    return sum(slot_durations(schedule, durations).values())


def substitute_hadamards(schedule: CycleSchedule) -> CycleSchedule:
    """Replace opening H gates by Y_-90 and closing H gates by Y_+90.

    For each qubit the H gates of one cycle alternate between opening and
    closing a basis change.
    """
    count: dict[Coord, int] = {}
    gates = []
    for g in schedule.gates:
        if g.kind == "H":
            q = g.qubits[0]
            k = count.get(q, 0)
            count[q] = k + 1
            g = replace(g, kind="Y_minus_90" if k % 2 == 0 else "Y_plus_90")
        gates.append(g)
    return schedule.replace_gates(gates)


def reorder_arms(schedule: CycleSchedule, ancilla: Coord, order: tuple[str, ...]) -> CycleSchedule:
    """Reassign an ancilla's arms to its CZ slots in the given order (no validation)."""
    pl = schedule.fabric.plaquette(ancilla)
    if sorted(order) != sorted(ARMS):
        raise ValueError(f"order must be a permutation of {ARMS}, got {order}")
    slots = sorted({schedule.arm_slot[(ancilla, arm)] for arm in ARMS},
                   key=schedule.slot_index)
    new_arm_slot = dict(schedule.arm_slot)
    for arm, slot in zip(order, slots):
        new_arm_slot[(ancilla, arm)] = slot
    gates = []
    for g in schedule.gates:
        if g.kind == "CZ" and ancilla in g.qubits:
            data = g.qubits[0] if g.qubits[1] == ancilla else g.qubits[1]
            arm = next(a for a, c in pl.arms.items() if c == data)
            g = replace(g, slot=new_arm_slot[(ancilla, arm)])
        gates.append(g)
    gates.sort(key=lambda g: schedule.slot_index(g.slot))
    return schedule.replace_gates(gates, arm_slot=new_arm_slot)

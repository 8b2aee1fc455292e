"""Stabilizer simulation of QEC-cycle schedules with Pauli-frame bookkeeping.

Ancillas are never reset. After a measurement with raw bit ``r`` the ancilla
is physically left in ``|r>``; the simulator records ``X^r`` on it in a
:class:`PauliFrame` instead (Pauli frame updating). Frame-corrected outcomes
are the parity-check values and ``syndrome_t = outcome_t XOR outcome_{t-1}``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InjectionOutOfRange, InvalidTarget, OutOfRange, TooLarge
from .fabric import Coord, Fabric, is_data_site
from .schedule import CycleSchedule, GateOp, pipelined_cycle
from .tableau import Tableau

PAULIS = ("X", "Y", "Z")


class Register:
    """Coordinate <-> tableau index map for one fabric."""

    def __init__(self, fabric: Fabric):
        self.coords = sorted(fabric.qubits)
        self.index = {c: k for k, c in enumerate(self.coords)}

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, coord: Coord) -> int:
        try:
            return self.index[tuple(coord)]
        except KeyError:
            raise OutOfRange(f"{coord} is not a qubit of the fabric") from None

    def pauli_vectors(self, paulis: dict[Coord, str]) -> tuple[np.ndarray, np.ndarray]:
        x = np.zeros(len(self), dtype=bool)
        z = np.zeros(len(self), dtype=bool)
        for c, p in paulis.items():
            k = self[c]
            x[k] = p in "XY"
            z[k] = p in "ZY"
        return x, z

    def pauli_dict(self, x: np.ndarray, z: np.ndarray) -> dict[Coord, str]:
        out = {}
        for k in np.flatnonzero(x | z):
            out[self.coords[k]] = "Y" if x[k] and z[k] else ("X" if x[k] else "Z")
        return out


def pauli_label(paulis: dict[Coord, str]) -> str:
    if not paulis:
        return "I"
    return " ".join(f"{p}{c}" for c, p in sorted(paulis.items()))


@dataclass
class PauliFrame:
    """n-qubit Pauli operator propagated through Clifford gates (signs ignored)."""

    x: np.ndarray
    z: np.ndarray
    last_outcomes: dict[Coord, int] = field(default_factory=dict)

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x.copy(), self.z.copy(), dict(self.last_outcomes))

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x ^ other.x, self.z ^ other.z, dict(self.last_outcomes))

    def h(self, q: int):
        self.x[q], self.z[q] = self.z[q], self.x[q]

    def s(self, q: int):
        self.z[q] ^= self.x[q]

    def cz(self, a: int, b: int):
        self.z[a] ^= self.x[b]
        self.z[b] ^= self.x[a]

    def measure_flip(self, q: int) -> bool:
        """Whether the frame flips a Z measurement of ``q``; drops the Z part."""
        flip = bool(self.x[q])
        self.z[q] = False
        return flip


@dataclass(frozen=True)
class ErrorInjection:
    """Pauli error applied immediately before ``slot`` of ``cycle``.

    ``slot="end"`` places it after the last slot of the cycle.
    """

    pauli: str
    target: Coord
    cycle: int
    slot: str = "end"

    @classmethod
    def parse(cls, text: str) -> "ErrorInjection":
        """Parse ``P@row,col@cycleN`` or ``P@row,col@cycleN:slot``."""
        try:
            pauli, where, when = text.strip().split("@")
            row, col = (int(v) for v in where.split(","))
            if not when.startswith("cycle"):
                raise ValueError
            when = when[len("cycle"):]
            cycle, _, slot = when.partition(":")
            inj = cls(pauli.upper(), (row, col), int(cycle), slot or "end")
        except ValueError:
            raise InjectionOutOfRange(f"malformed injection spec {text!r}") from None
        if inj.pauli not in PAULIS:
            raise InjectionOutOfRange(f"unknown Pauli {pauli!r}")
        return inj


@dataclass
class SyndromeRecord:
    cycle: int
    outcomes: dict[Coord, int]
    syndrome: dict[Coord, int]

    def flipped(self) -> list[Coord]:
        return sorted(a for a, s in self.syndrome.items() if s)

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "outcomes": {f"{r},{c}": v for (r, c), v in sorted(self.outcomes.items())},
            "syndrome": {f"{r},{c}": v for (r, c), v in sorted(self.syndrome.items())},
        }


class StabilizerState:
    """A fabric-sized tableau plus the Pauli frame and RNG of one run."""

    def __init__(self, fabric: Fabric, seed: int | None = None):
        self.fabric = fabric
        self.reg = Register(fabric)
        self.tableau = Tableau(len(self.reg))
        self.frame = PauliFrame.identity(len(self.reg))
        self.rng = np.random.default_rng(seed)

    @property
    def n(self) -> int:
        return self.tableau.n

    def apply_pauli(self, pauli: str, coord: Coord):
        k = self.reg[coord]
        {"X": self.tableau.pauli_x, "Y": self.tableau.pauli_y,
         "Z": self.tableau.pauli_z}[pauli](k)

    def expectation(self, paulis: dict[Coord, str]) -> int:
        x, z = self.reg.pauli_vectors(paulis)
        return self.tableau.peek_pauli(x, z)

    def measure_pauli(self, paulis: dict[Coord, str]) -> int:
        x, z = self.reg.pauli_vectors(paulis)
        bit, _ = self.tableau.measure_pauli(x, z, self.rng)
        return bit


def apply_gate(state: StabilizerState, gate: GateOp) -> int | None:
    """Apply one schedule gate; returns the frame-corrected bit for a Measure."""
    t, f = state.tableau, state.frame
    qs = [state.reg[q] for q in gate.qubits]
    kind = gate.kind
    if kind == "H":
        t.h(qs[0])
        f.h(qs[0])
    elif kind == "Y_plus_90":
        t.y_plus_90(qs[0])
        f.h(qs[0])
    elif kind == "Y_minus_90":
        t.y_minus_90(qs[0])
        f.h(qs[0])
    elif kind == "CZ":
        t.cz(qs[0], qs[1])
        f.cz(qs[0], qs[1])
    elif kind == "PauliX":
        t.pauli_x(qs[0])
    elif kind == "PauliZ":
        t.pauli_z(qs[0])
    elif kind == "Idle":
        pass
    elif kind == "Measure":
        q = qs[0]
        raw, _ = t.measure(q, state.rng)
        bit = raw ^ int(f.x[q])
        # no reset: the ancilla stays in |raw>, which the frame records as X^raw
        f.x[q] = bool(raw)
        f.z[q] = False
        f.last_outcomes[gate.qubits[0]] = bit
        return bit
    else:
        raise ValueError(f"unsupported gate kind {kind!r}")
    return None


def _propagate_frame(frame: PauliFrame, gate: GateOp, reg: Register) -> bool | None:
    qs = [reg[q] for q in gate.qubits]
    if gate.kind in ("H", "Y_plus_90", "Y_minus_90"):
        frame.h(qs[0])
    elif gate.kind == "CZ":
        frame.cz(qs[0], qs[1])
    elif gate.kind == "Measure":
        return frame.measure_flip(qs[0])
    return None


def _check_injections(schedule: CycleSchedule, injections: Sequence[ErrorInjection],
                      n_cycles: int):
    for inj in injections:
        if inj.target not in schedule.fabric.qubits:
            raise InjectionOutOfRange(f"injection target {inj.target} is not in the fabric")
        if not 1 <= inj.cycle <= n_cycles:
            raise InjectionOutOfRange(f"injection cycle {inj.cycle} outside 1..{n_cycles}")
        if inj.slot != "end" and inj.slot not in schedule.slot_ids:
            raise InjectionOutOfRange(f"unknown slot {inj.slot!r}")
        if inj.pauli not in PAULIS:
            raise InjectionOutOfRange(f"unknown Pauli {inj.pauli!r}")


def init_code_state(state: StabilizerState, randomize: bool = True):
    """Project the data qubits onto a code state by measuring every plaquette.

    With ``randomize`` the data start in a random single-qubit stabilizer
    product state, so the logical state is random as well.
    """
    if randomize:
        for d in state.fabric.data_qubits:
            k = state.reg[d]
            for _ in range(int(state.rng.integers(4))):
                state.tableau.h(k)
                if state.rng.integers(2):
                    state.tableau.s(k)
    for pl in state.fabric.plaquettes:
        state.measure_pauli({d: pl.kind for d in pl.data})


def run_cycles(schedule: CycleSchedule | None = None, fabric: Fabric | None = None,
               n_cycles: int = 1, injections: Sequence[ErrorInjection] = (),
               seed: int | None = None, init: str = "zero",
               schedule_for_cycle=None, state: StabilizerState | None = None,
               ) -> list[SyndromeRecord]:
    """Run ``n_cycles`` QEC cycles and return one :class:`SyndromeRecord` per cycle.

    Measurements flagged ``prev_cycle`` belong to the previous cycle's checks;
    the ones in cycle 1 read the freshly initialized ancillas and are dropped,
    and a trailing pass after the last cycle collects cycle ``n_cycles``.
    ``schedule_for_cycle(c)`` may supply a different schedule per cycle (for
    time-varying edits). ``init`` is ``"zero"`` (data in ``|0...0>``) or
    ``"code"`` (random code state).
    """
    if schedule is None:
        schedule = pipelined_cycle(fabric)
    fabric = schedule.fabric
    _check_injections(schedule, injections, n_cycles)
    if state is None:
        state = StabilizerState(fabric, seed)
        if init == "code":
            init_code_state(state)
        elif init != "zero":
            raise ValueError(f"unknown init {init!r}")

    ancillas = fabric.ancillas
    raw: dict[int, dict[Coord, int]] = {c: {} for c in range(1, n_cycles + 1)}
    by_slot: dict[tuple[int, str], list[ErrorInjection]] = {}
    for inj in injections:
        by_slot.setdefault((inj.cycle, inj.slot), []).append(inj)

    def run_slot(sched: CycleSchedule, cycle: int, slot: str, only_prev: bool = False):
        for gate in sched.gates_in(slot):
            if only_prev and not gate.prev_cycle:
                continue
            bit = apply_gate(state, gate)
            if bit is not None:
                owner = cycle - 1 if gate.prev_cycle else cycle
                if owner >= 1:
                    raw[owner][gate.qubits[0]] = bit

    for cycle in range(1, n_cycles + 1):
        sched = schedule_for_cycle(cycle) if schedule_for_cycle else schedule
        for slot in sched.slot_ids:
            for inj in by_slot.get((cycle, slot), ()):
                state.apply_pauli(inj.pauli, inj.target)
            run_slot(sched, cycle, slot)
        for inj in by_slot.get((cycle, "end"), ()):
            state.apply_pauli(inj.pauli, inj.target)
    tail = schedule_for_cycle(n_cycles + 1) if schedule_for_cycle else schedule
    for slot in tail.slot_ids:
        run_slot(tail, n_cycles + 1, slot, only_prev=True)

    records = []
    previous: dict[Coord, int] | None = None
    for cycle in range(1, n_cycles + 1):
        outcomes = {a: raw[cycle].get(a, 0) for a in ancillas}
        if previous is None:
            syndrome = {a: 0 for a in ancillas}
        else:
            syndrome = {a: outcomes[a] ^ previous[a] for a in ancillas}
        records.append(SyndromeRecord(cycle, outcomes, syndrome))
        previous = outcomes
    return records


def syndrome_stream(records: Iterable[SyndromeRecord]) -> str:
    """JSON lines, one per cycle, followed by a summary object."""
    records = list(records)
    lines = [json.dumps(r.to_dict(), sort_keys=True) for r in records]
    flips: dict[str, int] = {}
    for r in records:
        for (row, col), s in sorted(r.syndrome.items()):
            key = f"{row},{col}"
            flips[key] = flips.get(key, 0) + s
    lines.append(json.dumps({"summary": {"cycles": len(records), "flips": flips,
                                         "total_flips": sum(flips.values())}},
                            sort_keys=True))
    return "\n".join(lines) + "\n"


# -- Heisenberg-picture checks ------------------------------------------------

class _Row:
    """A single signed Pauli row, updated by the same rules as the tableau."""

    def __init__(self, n: int):
        self.t = Tableau.__new__(Tableau)
        self.t.n = n
        self.t.x = np.zeros((1, n), dtype=bool)
        self.t.z = np.zeros((1, n), dtype=bool)
        self.t.r = np.zeros(1, dtype=bool)


_INVERSE = {"H": "h", "Y_plus_90": "y_minus_90", "Y_minus_90": "y_plus_90",
            "PauliX": "pauli_x", "PauliZ": "pauli_z"}


def _timeline(schedule: CycleSchedule, measure: GateOp) -> list[GateOp]:
    """Gates of the cycle that precede ``measure`` in time."""
    if measure.prev_cycle:
        return [g for g in schedule.gates if g.kind != "Measure"]
    stop = schedule.slot_index(measure.slot)
    return [g for g in schedule.gates
            if g.kind != "Measure" and schedule.slot_index(g.slot) < stop]


def measured_observable(schedule: CycleSchedule, ancilla: Coord) -> tuple[dict[Coord, str], int]:
    """Observable at the start of the cycle that the ancilla's measurement reveals.

    Conjugates ``Z`` on the ancilla back through the gates that precede its
    measurement. Returns the Pauli (as a dict) and its sign (+1 or -1).
    """
    reg = Register(schedule.fabric)
    measure = next(g for g in schedule.ops_on(ancilla) if g.kind == "Measure")
    row = _Row(len(reg))
    row.t.z[0, reg[ancilla]] = True
    for g in reversed(_timeline(schedule, measure)):
        qs = [reg[q] for q in g.qubits]
        if g.kind == "CZ":
            row.t.cz(qs[0], qs[1])
        elif g.kind in _INVERSE:
            getattr(row.t, _INVERSE[g.kind])(qs[0])
    paulis = reg.pauli_dict(row.t.x[0], row.t.z[0])
    sign = -1 if row.t.r[0] else 1
    return paulis, sign


def verify_stabilizer_projection(schedule: CycleSchedule) -> dict[Coord, dict]:
    """Per ancilla: does its measurement reveal exactly its plaquette operator?

    The expected observable is ``Z_ancilla * prod_arms P`` with ``P`` = X or Z
    for the plaquette type, and sign +1. The ``Z_ancilla`` factor is the
    ancilla's carried-over value, which the Pauli frame removes.
    """
    fabric = schedule.fabric
    report = {}
    for pl in fabric.plaquettes:
        paulis, sign = measured_observable(schedule, pl.ancilla)
        expected = {d: pl.kind for d in pl.data}
        expected[pl.ancilla] = "Z"
        data_part = {c: p for c, p in paulis.items() if is_data_site(c)}
        report[pl.ancilla] = {
            "kind": pl.kind,
            "pass": paulis == expected and sign == 1,
            "observable": pauli_label(data_part),
            "sign": sign,
            "ancilla_part": pauli_label({c: p for c, p in paulis.items()
                                         if not is_data_site(c)}),
        }
    return report


def logical_operator_check(fabric: Fabric, edit, ancilla_state: int,
                           schedule: CycleSchedule | None = None) -> dict:
    """Net Pauli that one cycle applies to the data when the target ancilla starts in ``|s>``.

    The edit must be ``stabilizer_off_h_mask``. Starting the ancilla in ``|1>``
    instead of ``|0>`` is an ``X`` on it at the start of the cycle; that Pauli is
    pushed through the edited cycle. The data part is the net action, the
    ancilla part tells which measurement outcomes flip.
    """
    from .pulsemask import apply_edit

    if edit.kind != "stabilizer_off_h_mask":
        raise InvalidTarget("logical_operator_check expects a stabilizer_off_h_mask edit")
    if schedule is None:
        schedule = pipelined_cycle(fabric)
    edited = apply_edit(schedule, edit)
    reg = Register(fabric)
    frame = PauliFrame.identity(len(reg))
    if ancilla_state:
        frame.x[reg[edit.target]] = True
    flips: dict[Coord, int] = {}
    gates = [g for g in edited.gates if not g.prev_cycle]
    for g in gates:
        flip = _propagate_frame(frame, g, reg)
        if flip is not None:
            flips[g.qubits[0]] = int(flip)
    # Z-ancilla readout of this cycle happens in the next cycle's slot A
    for g in edited.gates:
        if g.prev_cycle:
            flips[g.qubits[0]] = int(_propagate_frame(frame, g, reg))
    paulis = reg.pauli_dict(frame.x, frame.z)
    data = {c: p for c, p in paulis.items() if is_data_site(c)}
    return {
        "target": edit.target,
        "ancilla_state": ancilla_state,
        "data_pauli": data,
        "label": pauli_label(data),
        "flipped_outcomes": sorted(c for c, v in flips.items() if v),
    }


# -- code distance -------------------------------------------------------------

def check_matrices(fabric: Fabric) -> tuple[np.ndarray, np.ndarray, list[Coord]]:
    """Binary X-check and Z-check matrices over the data qubits."""
    data = fabric.data_qubits
    col = {d: k for k, d in enumerate(data)}
    hx = [[0] * len(data) for _ in fabric.x_ancillas()]
    hz = [[0] * len(data) for _ in fabric.z_ancillas()]
    for k, a in enumerate(fabric.x_ancillas()):
        for d in fabric.plaquette(a).data:
            hx[k][col[d]] = 1
    for k, a in enumerate(fabric.z_ancillas()):
        for d in fabric.plaquette(a).data:
            hz[k][col[d]] = 1
    return np.array(hx, dtype=np.uint8), np.array(hz, dtype=np.uint8), data


def _gf2_rank(m: np.ndarray) -> int:
    m = m.copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


class _Span:
    """Membership test for the GF(2) row span of a matrix."""

    def __init__(self, m: np.ndarray):
        self.m = m % 2
        self.rank = _gf2_rank(self.m)

    def contains(self, v: np.ndarray) -> bool:
        return _gf2_rank(np.vstack([self.m, v])) == self.rank


def classify_pauli(fabric: Fabric, paulis: dict[Coord, str]) -> str:
    """``"detected"``, ``"stabilizer"`` (trivial) or ``"logical"`` (undetected, nontrivial)."""
    hx, hz, data = check_matrices(fabric)
    col = {d: k for k, d in enumerate(data)}
    ex = np.zeros(len(data), dtype=np.uint8)
    ez = np.zeros(len(data), dtype=np.uint8)
    for c, p in paulis.items():
        if c not in col:
            raise InvalidTarget(f"{c} is not a data qubit")
        ex[col[c]] = p in "XY"
        ez[col[c]] = p in "ZY"
    if (hz @ ex % 2).any() or (hx @ ez % 2).any():
        return "detected"
    if _Span(hx).contains(ex) and _Span(hz).contains(ez):
        return "stabilizer"
    return "logical"


def distance_check(fabric: Fabric, full_enumeration: bool = False) -> int:
    """Smallest weight of an undetected nontrivial logical operator.

    For a CSS code a nontrivial logical has a nontrivial pure-X or pure-Z part
    of no larger support, so by default only supports carrying a single Pauli
    type are enumerated. ``full_enumeration`` also tries every X/Y/Z
    assignment on each support (feasible for d = 3).
    """
    if fabric.is_torus:
        raise TooLarge("distance_check supports planar patches only")
    if fabric.patch.distance > 5:
        raise TooLarge("brute-force distance check is limited to d <= 5")
    hx, hz, data = check_matrices(fabric)
    span_x, span_z = _Span(hx), _Span(hz)
    n = len(data)
    for w in range(1, n + 1):
        for support in itertools.combinations(range(n), w):
            idx = list(support)
            if full_enumeration:
                labels = itertools.product("XYZ", repeat=w)
            else:
                labels = ("X" * w, "Z" * w)
            for lab in labels:
                ex = np.zeros(n, dtype=np.uint8)
                ez = np.zeros(n, dtype=np.uint8)
                for k, p in zip(idx, lab):
                    ex[k] = p in "XY"
                    ez[k] = p in "ZY"
                if (hz @ ex % 2).any() or (hx @ ez % 2).any():
                    continue
                if span_x.contains(ex) and span_z.contains(ez):
                    continue
                return w
    raise AssertionError("code has no logical operator")

"""Operating-frequency ladder, residual-error model and interaction-zone checks.

Units: frequencies are ordinary frequencies in GHz, durations in ns and the
coupling strength ``xi`` is angular (rad/ns), so ``xi = 2*pi/tau_2q``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateLadder, UnassignedQubit
from .fabric import Coord, Fabric, is_data_site

LEVELS = ("f1", "f1_int", "f2", "f2_park", "f2_int", "f3", "f3_park")
ZONE_KINDS = ("exchange_10_01", "avoided_11_20", "avoided_11_02")
DEFAULT_GUARD = 0.05  # GHz
VARIANTS = ("standard", "break_f1_f3", "break_all")
ARRANGEMENTS = ("standard", "inverted")

# per-role frequency offsets (in units of the split) that lift degeneracies
_VARIANT_OFFSETS = {
    "standard": {},
    "break_f1_f3": {"D2": 1, "D4": 1},
    "break_all": {"D2": 1, "D4": 1, "X2": 1, "Z1": 0.5, "Z2": 1.5},
}
_TOL = 1e-9


@dataclass(frozen=True)
class FrequencyLadder:
    f1: float
    f1_int: float
    f2: float
    f2_park: float
    f2_int: float
    f3: float
    f3_park: float
    delta_f: float
    alpha: float
    arrangement: str = "standard"
    variant: str = "standard"
    guard: float = DEFAULT_GUARD
    role_offsets: Mapping[str, float] = field(default_factory=dict)

    @property
    def abs_alpha(self) -> float:
        return abs(self.alpha)

    def levels(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in LEVELS}

    def level(self, name: str, role: str | None = None) -> float:
        """Ladder level ``name``, shifted by the role's degeneracy-breaking offset."""
        return getattr(self, name) + self.role_offsets.get(role, 0.0)

    def zones(self, f: float) -> list[tuple[str, float]]:
        """Interaction zones a partner at ``f`` creates for a qubit whose frequency is varied."""
        a = self.abs_alpha
        return [("exchange_10_01", f), ("avoided_11_20", f + a), ("avoided_11_02", f - a)]

    def to_dict(self) -> dict:
        out = {f"{k}_ghz": v for k, v in self.levels().items()}
        out.update(delta_f_ghz=self.delta_f, alpha_ghz=self.alpha,
                   arrangement=self.arrangement, variant=self.variant,
                   guard_ghz=self.guard,
                   role_offsets_ghz=dict(sorted(self.role_offsets.items())))
        return out


def build_ladder(f2: float = 6.0, delta_f: float = 0.4, alpha: float = -0.3,
                 arrangement: str = "standard", variant: str = "standard",
                 guard: float = DEFAULT_GUARD, split: float = 0.02) -> FrequencyLadder:
    """Seven-level ladder from ``f2``, the detuning scale and the anharmonicity.

    Raises :class:`DegenerateLadder` when two levels that are not meant to
    interact sit within ``guard`` of an interaction zone of each other.
    """
    if arrangement not in ARRANGEMENTS:
        raise ValueError(f"unknown arrangement {arrangement!r}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if alpha > 0:
        raise ValueError("transmon anharmonicity must be negative")
    if delta_f <= 0 or alpha == 0:
        raise DegenerateLadder("delta_f and |alpha| must be positive")
    a = abs(alpha)
    f1_int = f2 + a
    f2_int = f2 - 2 * delta_f
    levels = {
        "f1": f1_int + delta_f, "f1_int": f1_int, "f2": f2,
        "f2_park": f2 - delta_f, "f2_int": f2_int,
        "f3": f2_int - a, "f3_park": f2_int - a - delta_f,
    }
    intended = {("f1_int", "f2"), ("f2_int", "f3")}
    for (na, fa), (nb, fb) in itertools.combinations(levels.items(), 2):
        if (na, nb) in intended:
            continue
        gap = abs(fa - fb)
        for zone in (0.0, a):
            if abs(gap - zone) < guard:
                raise DegenerateLadder(
                    f"{na}={fa:.4g} and {nb}={fb:.4g} GHz are {gap:.4g} GHz apart, "
                    f"within {guard} GHz of the zone at {zone:.4g} GHz")
    offsets = _VARIANT_OFFSETS[variant]
    if offsets and split * max(offsets.values()) >= guard:
        raise ValueError("degeneracy split must stay below the guard band")
    offsets = {role: k * split for role, k in _VARIANT_OFFSETS[variant].items()}
    return FrequencyLadder(**levels, delta_f=delta_f, alpha=alpha,
                           arrangement=arrangement, variant=variant, guard=guard,
                           role_offsets=offsets)


# -- residual error ------------------------------------------------------------

@dataclass(frozen=True)
class ErrorModelParams:
    xi: float      # rad/ns
    tau_1q: float  # ns
    tau_2q: float  # ns

    @classmethod
    def from_durations(cls, tau_1q: float = 20.0, tau_2q: float = 40.0) -> "ErrorModelParams":
        return cls(2 * math.pi / tau_2q, tau_1q, tau_2q)

    def residual_error(self, delta_f: float) -> float:
        return residual_error(self.xi, delta_f, self.tau_1q)


def residual_error(xi: float, delta_f: float, tau_1q: float) -> float:
    """Single-qubit error from residual coupling to a neighbor detuned by ``delta_f``."""
    if min(xi, delta_f, tau_1q) <= 0:
        raise ValueError("residual_error needs positive inputs")
    return (xi ** 2 * tau_1q / (4 * math.pi * delta_f)) ** 2


def required_detuning(epsilon: float, xi: float, tau_1q: float) -> float:
    """Inverse of :func:`residual_error` in ``delta_f``."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if min(xi, tau_1q) <= 0:
        raise ValueError("required_detuning needs positive inputs")
    return xi ** 2 * tau_1q / (4 * math.pi * math.sqrt(epsilon))


# -- zone checks ---------------------------------------------------------------

@dataclass(frozen=True)
class InteractionZoneReport:
    pair: tuple[Coord, Coord]
    where: str
    zone_kind: str
    status: str  # intended, violation, safe
    margin: float
    delta: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"pair": [list(self.pair[0]), list(self.pair[1])], "where": self.where,
               "zone_kind": self.zone_kind, "status": self.status,
               "margin_ghz": round(self.margin, 12)}
        if self.delta is not None:
            out["delta_ghz"] = round(self.delta, 12)
        if self.detail:
            out["detail"] = self.detail
        return out


def classify_detuning(delta: float, alpha: float, intended: bool,
                      guard: float = DEFAULT_GUARD) -> tuple[str, str, float]:
    """Classify ``delta = f_a - f_b`` as (zone_kind, status, margin)."""
    a = abs(alpha)
    dist = {"exchange_10_01": abs(delta), "avoided_11_20": abs(delta - a),
            "avoided_11_02": abs(delta + a)}
    kind = min(dist, key=lambda k: (dist[k], ZONE_KINDS.index(k)))
    if intended:
        cz_kind = "avoided_11_20" if delta >= 0 else "avoided_11_02"
        if dist[cz_kind] < guard:
            return cz_kind, "intended", dist[cz_kind]
        return cz_kind, "violation", dist[cz_kind]
    if dist[kind] < guard:
        return kind, "violation", dist[kind]
    return kind, "safe", dist[kind]


def _freq(freqs: Mapping[Coord, float], q: Coord) -> float:
    try:
        return freqs[q]
    except KeyError:
        raise UnassignedQubit(f"no frequency assigned to {q}") from None


def _pairs(pairs: Iterable) -> set[frozenset]:
    return {frozenset(p) for p in pairs}


def check_static(fabric: Fabric, ladder: FrequencyLadder, slot_frequencies: Mapping[Coord, float],
                 intended_cz: Iterable = (), where: str = "",
                 guard: float | None = None) -> list[InteractionZoneReport]:
    """One report per coupling for a frozen frequency assignment.

    Pairs are reported as (data, ancilla) with ``delta = f_data - f_ancilla``.
    """
    guard = ladder.guard if guard is None else guard
    intended = _pairs(intended_cz)
    for q in fabric.qubits:
        _freq(slot_frequencies, q)
    out = []
    for d, a in sorted(fabric.couplings):
        delta = slot_frequencies[d] - slot_frequencies[a]
        kind, status, margin = classify_detuning(delta, ladder.alpha,
                                                 frozenset((d, a)) in intended, guard)
        out.append(InteractionZoneReport((d, a), where, kind, status, margin, delta))
    return out


def check_transition(fabric: Fabric, ladder: FrequencyLadder,
                     from_frequencies: Mapping[Coord, float],
                     to_frequencies: Mapping[Coord, float],
                     intended_endpoints: Iterable = (), where: str = "",
                     guard: float | None = None) -> list[InteractionZoneReport]:
    """Check every frequency sweep between two consecutive slots.

    For a moving qubit and each coupled neighbor, no zone of the neighbor
    (evaluated at its frequency in either slot) may lie inside the swept
    interval. Zones within the guard band of an endpoint count as sitting at
    that endpoint: one at the destination coming from the neighbor's
    destination frequency is a violation unless the pair is an intended CZ
    there, since the two then stay at the zone for the whole next slot.
    Endpoint coincidences with the neighbor's other-slot frequency last only
    while the neighbor itself moves away and are allowed.
    """
    guard = ladder.guard if guard is None else guard
    intended = _pairs(intended_endpoints)
    for q in fabric.qubits:
        _freq(from_frequencies, q)
        _freq(to_frequencies, q)
    out = []
    for d, a in sorted(fabric.couplings):
        worst: InteractionZoneReport | None = None
        margin = math.inf
        moved = False
        for q, n in ((d, a), (a, d)):
            f0, f1 = from_frequencies[q], to_frequencies[q]
            if abs(f0 - f1) < _TOL:
                continue
            moved = True
            lo, hi = min(f0, f1), max(f0, f1)
            sources = {("from", from_frequencies[n]), ("to", to_frequencies[n])}
            for label, fn in sorted(sources):
                for kind, z in ladder.zones(fn):
                    if abs(z - f1) < guard:
                        if label == "to" and frozenset((d, a)) not in intended and worst is None:
                            worst = InteractionZoneReport(
                                (d, a), where, kind, "violation", abs(z - f1),
                                detail=f"{q} lands on zone {z:.4f} GHz of {n}")
                        continue
                    if abs(z - f0) < guard:
                        continue  # the source slot's static check covers this
                    if lo < z < hi:
                        if worst is None:
                            worst = InteractionZoneReport(
                                (d, a), where, kind, "violation", 0.0,
                                detail=f"{q} sweeps {f0:.4f}->{f1:.4f} GHz through zone "
                                       f"{z:.4f} GHz of {n}")
                        continue
                    margin = min(margin, max(lo - z, z - hi))
        if worst is not None:
            out.append(worst)
        elif moved:
            out.append(InteractionZoneReport((d, a), where, "none", "safe",
                                             margin if margin < math.inf else math.inf))
    return out


def check_cycle(fabric: Fabric, ladder: FrequencyLadder, slots: Sequence[str],
                slot_frequencies: Mapping[str, Mapping[Coord, float]],
                intended: Mapping[str, Iterable], cyclic: bool = True,
                ) -> list[InteractionZoneReport]:
    """Static check of every slot plus every transition between consecutive slots."""
    reports: list[InteractionZoneReport] = []
    for s in slots:
        reports += check_static(fabric, ladder, slot_frequencies[s], intended.get(s, ()),
                                where=f"slot {s}")
    steps = list(zip(slots, slots[1:]))
    if cyclic:
        steps.append((slots[-1], slots[0]))
    for s, t in steps:
        reports += check_transition(fabric, ladder, slot_frequencies[s], slot_frequencies[t],
                                    intended.get(t, ()), where=f"{s}->{t}")
    return reports


def summarize(reports: Sequence[InteractionZoneReport]) -> dict:
    violations = [r for r in reports if r.status == "violation"]
    safe = [r.margin for r in reports if r.status == "safe" and math.isfinite(r.margin)]
    return {"violations": len(violations),
            "intended": sum(r.status == "intended" for r in reports),
            "checked": len(reports),
            "min_margin_ghz": round(min(safe), 12) if safe else None}


def fourth_order_pairs(fabric: Fabric, frequencies: Mapping[Coord, float],
                       tol: float = _TOL) -> list[tuple[Coord, Coord]]:
    """Same-frequency qubits sharing a coupled neighbor (informational only)."""
    out = set()
    for q in fabric.qubits:
        for a, b in itertools.combinations(sorted(fabric.neighbors(q)), 2):
            if abs(frequencies[a] - frequencies[b]) < tol:
                out.add((a, b))
    return sorted(out)


TOP_LEVEL = {
    "standard": {"D1": "f1", "D2": "f1", "D3": "f3", "D4": "f3",
                 "X1": "f2", "X2": "f2", "Z1": "f2", "Z2": "f2"},
    "inverted": {"D1": "f2", "D2": "f2", "D3": "f2", "D4": "f2",
                 "X1": "f1", "Z1": "f1", "X2": "f3", "Z2": "f3"},
}


def sweetspot_counts(fabric: Fabric, ladder: FrequencyLadder,
                     interaction_frequencies: Mapping[Coord, Sequence[float]],
                     ) -> dict[str, tuple[int, int]]:
    """Per role: (steps at the role's top frequency, interaction steps considered).

    Data qubits are counted over all eight interaction steps, ancillas over the
    four steps of their own half-cycle. Only fully coordinated (bulk) qubits
    are counted, since boundary qubits have fewer CZs.
    """
    full = max(len(fabric.neighbors(q)) for q in interaction_frequencies)
    tally: dict[str, dict[tuple[int, int], int]] = {}
    for q, seq in interaction_frequencies.items():
        if len(fabric.neighbors(q)) != full:
            continue
        role = fabric.role_of(q)
        top = ladder.level(TOP_LEVEL[ladder.arrangement][role], role)
        if is_data_site(q):
            steps = list(seq)
        else:
            steps = list(seq[:4]) if role.startswith("X") else list(seq[4:])
        count = (sum(abs(f - top) < _TOL for f in steps), len(steps))
        tally.setdefault(role, {}).setdefault(count, 0)
        tally[role][count] += 1
    return {role: max(c, key=c.get) for role, c in sorted(tally.items())}

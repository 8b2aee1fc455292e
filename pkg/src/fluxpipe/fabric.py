"""Surface-code fabrics assembled from the repeating 8-qubit unit cell.

Qubits live on an integer grid. Data qubits sit on sites with ``row + col``
even, ancillas on sites with ``row + col`` odd, and every coupling joins a
data qubit to an ancilla one grid step away. The four arms of a plaquette are
named after the 45-degree rotated drawing of the lattice::

    NE = (row - 1, col)    NW = (row, col - 1)
    SE = (row, col + 1)    SW = (row + 1, col)

In the rotated drawing the data qubits form horizontal rows. On the grid those
rows are the anti-diagonals ``row + col = const``: the NE/NW arms of an
ancilla share one data row and the SE/SW arms share the next one. Data rows
alternate between frequency group f1 (D1, D2) and f3 (D3, D4), so every
ancilla couples to two f1 and two f3 data qubits.

Internally the module also uses "lattice" indices: data qubit ``(i, j)`` is in
data row ``i`` and data column ``j`` of the rotated drawing, and plaquette
``(p, q)`` sits between data rows ``p`` and ``p + 1``.  The two index systems
are related by ``row = i - j + K``, ``col = i + j`` (data) and
``row = p - q + K``, ``col = p + q + 1`` (ancillas), with the row offset ``K``
a multiple of four so that roles agree with the infinite tiling anchored at
``(0, 0) = D1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import InvalidPatch, MisalignedAnchor, OutOfPatch

Coord = tuple[int, int]

DATA_ROLES = ("D1", "D2", "D3", "D4")
ANCILLA_ROLES = ("X1", "X2", "Z1", "Z2")
ROLES = DATA_ROLES + ANCILLA_ROLES

ARMS = ("NE", "NW", "SE", "SW")
ARM_OFFSETS: dict[str, Coord] = {
    "NE": (-1, 0),
    "NW": (0, -1),
    "SE": (0, 1),
    "SW": (1, 0),
}
# plaquette (p, q) -> lattice index of the data qubit on each arm
_ARM_LATTICE: dict[str, Coord] = {
    "NE": (0, 1),
    "NW": (0, 0),
    "SE": (1, 1),
    "SW": (1, 0),
}

# Role -> single-qubit control frequency group in the standard arrangement.
FREQUENCY_GROUP = {
    "D1": "f1", "D2": "f1", "D3": "f3", "D4": "f3",
    "X1": "f2", "X2": "f2", "Z1": "f2", "Z2": "f2",
}
# Alternative arrangement: data in the middle, ancillas at the outer frequencies.
INVERTED_FREQUENCY_GROUP = {
    "D1": "f2", "D2": "f2", "D3": "f2", "D4": "f2",
    "X1": "f1", "Z1": "f1", "X2": "f3", "Z2": "f3",
}

SVG_COLORS = {
    "D1": "#d62728", "D2": "#d62728",  # red, f1 data
    "D3": "#f4a6c0", "D4": "#f4a6c0",  # pink, f3 data
    "X1": "#1f77b4", "X2": "#1f77b4",
    "Z1": "#2ca02c", "Z2": "#2ca02c",
}


def is_data_site(coord: Coord) -> bool:
    return (coord[0] + coord[1]) % 2 == 0


def _lattice_index(coord: Coord, offset: int = 0) -> Coord:
    row, col = coord
    row -= offset
    if (row + col) % 2 == 0:
        return (row + col) // 2, (col - row) // 2
    return (row + col - 1) // 2, (col - 1 - row) // 2


def _data_coord(i: int, j: int, offset: int = 0) -> Coord:
    return i - j + offset, i + j


def _ancilla_coord(p: int, q: int, offset: int = 0) -> Coord:
    return p - q + offset, p + q + 1


def _role_from_lattice(index: Coord, data: bool) -> str:
    a, b = index
    if data:
        if a % 2 == 0:
            return "D1" if b % 2 == 0 else "D2"
        return "D3" if b % 2 == 1 else "D4"
    kind = "X" if (a + b) % 2 == 0 else "Z"
    return kind + ("1" if a % 2 == 1 else "2")


def tiling_role(coord: Coord) -> str:
    """Role of ``coord`` in the infinite unit-cell tiling anchored at (0, 0) = D1."""
    return _role_from_lattice(_lattice_index(coord), is_data_site(coord))


def frequency_group(role: str, arrangement: str = "standard") -> str:
    table = FREQUENCY_GROUP if arrangement == "standard" else INVERTED_FREQUENCY_GROUP
    return table[role]


@dataclass(frozen=True)
class PatchSpec:
    kind: str  # "planar" or "torus"
    distance: int | None = None
    rows: int | None = None
    cols: int | None = None

    @classmethod
    def planar(cls, distance: int) -> "PatchSpec":
        return cls("planar", distance=distance)

    @classmethod
    def torus(cls, rows: int, cols: int) -> "PatchSpec":
        return cls("torus", rows=rows, cols=cols)

    @classmethod
    def parse(cls, text: str) -> "PatchSpec":
        """Parse ``"d3"``, ``"3"`` or ``"torus:4x4"`` / ``"4x4"``."""
        text = text.strip().lower()
        if text.startswith("torus:"):
            text = text[len("torus:"):]
        if "x" in text:
            try:
                r, c = (int(v) for v in text.split("x"))
            except ValueError:
                raise InvalidPatch(f"cannot parse torus size {text!r}") from None
            return cls.torus(r, c)
        try:
            return cls.planar(int(text.lstrip("d")))
        except ValueError:
            raise InvalidPatch(f"cannot parse patch {text!r}") from None

    def to_dict(self) -> dict:
        if self.kind == "planar":
            return {"kind": "planar", "distance": self.distance}
        return {"kind": "torus", "rows": self.rows, "cols": self.cols}


@dataclass(frozen=True)
class Plaquette:
    ancilla: Coord
    kind: str  # "X" or "Z"
    arms: dict[str, Coord] = field(hash=False)

    @property
    def weight(self) -> int:
        return len(self.arms)

    @property
    def data(self) -> tuple[Coord, ...]:
        return tuple(self.arms[a] for a in ARMS if a in self.arms)

    def to_dict(self) -> dict:
        return {
            "ancilla": list(self.ancilla),
            "kind": self.kind,
            "arms": {a: list(c) for a, c in self.arms.items()},
        }


@dataclass(frozen=True, eq=False)
class Fabric:
    """Immutable qubit lattice: roles, couplings and plaquettes."""

    patch: PatchSpec
    qubits: dict[Coord, str]
    couplings: frozenset[tuple[Coord, Coord]]  # (data, ancilla)
    plaquettes: tuple[Plaquette, ...]
    offset: int = 0
    _lattice: dict[Coord, Coord] = field(default_factory=dict, repr=False)
    _plaquette_by_ancilla: dict[Coord, Plaquette] = field(default_factory=dict, repr=False)
    _neighbors: dict[Coord, tuple[Coord, ...]] = field(default_factory=dict, repr=False)

    # -- queries -----------------------------------------------------------

    def __contains__(self, coord: object) -> bool:
        return coord in self.qubits

    def __iter__(self) -> Iterator[Coord]:
        return iter(sorted(self.qubits))

    def __len__(self) -> int:
        return len(self.qubits)

    @property
    def is_torus(self) -> bool:
        return self.patch.kind == "torus"

    @property
    def data_qubits(self) -> list[Coord]:
        return sorted(c for c in self.qubits if is_data_site(c))

    @property
    def ancillas(self) -> list[Coord]:
        return sorted(c for c in self.qubits if not is_data_site(c))

    def x_ancillas(self) -> list[Coord]:
        return [p.ancilla for p in self.plaquettes if p.kind == "X"]

    def z_ancillas(self) -> list[Coord]:
        return [p.ancilla for p in self.plaquettes if p.kind == "Z"]

    def role_of(self, coord: Coord) -> str:
        try:
            return self.qubits[tuple(coord)]
        except KeyError:
            raise OutOfPatch(f"{coord} is not a qubit of this fabric") from None

    def group_of(self, coord: Coord, arrangement: str = "standard") -> str:
        return frequency_group(self.role_of(coord), arrangement)

    def plaquette(self, ancilla: Coord) -> Plaquette:
        try:
            return self._plaquette_by_ancilla[tuple(ancilla)]
        except KeyError:
            raise OutOfPatch(f"{ancilla} is not an ancilla of this fabric") from None

    def neighbors(self, coord: Coord) -> tuple[Coord, ...]:
        return self._neighbors.get(tuple(coord), ())

    def lattice_index(self, coord: Coord) -> Coord:
        return self._lattice[tuple(coord)]

    def tiling_neighbors(self, data: Coord) -> list[tuple[Coord, str, bool]]:
        """Ancillas around ``data`` in the infinite tiling.

        Returns ``(ancilla, arm, present)`` where ``arm`` names the position of
        ``data`` relative to that ancilla. Absent ancillas lie outside a
        planar patch boundary.
        """
        i, j = self._lattice[data]
        out = []
        for arm, (di, dj) in _ARM_LATTICE.items():
            p, q = i - di, j - dj
            if self.is_torus:
                p %= self.patch.rows
                q %= self.patch.cols
            anc = _ancilla_coord(p, q, self.offset)
            present = anc in self._plaquette_by_ancilla and \
                self._plaquette_by_ancilla[anc].arms.get(arm) == data
            out.append((anc, arm, present))
        return out

    def tiling_arm(self, ancilla: Coord, arm: str) -> Coord:
        """Coordinate of ``arm`` of ``ancilla`` in the infinite tiling (may be absent)."""
        p, q = self._lattice[ancilla]
        di, dj = _ARM_LATTICE[arm]
        i, j = p + di, q + dj
        if self.is_torus:
            i %= self.patch.rows
            j %= self.patch.cols
        return _data_coord(i, j, self.offset)

    def tiling_role_at(self, coord: Coord) -> str:
        return _role_from_lattice(_lattice_index(coord, self.offset), is_data_site(coord))

    # -- export ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "patch": self.patch.to_dict(),
            "qubits": [{"row": r, "col": c, "role": self.qubits[(r, c)]}
                       for r, c in sorted(self.qubits)],
            "couplings": [[list(d), list(a)] for d, a in sorted(self.couplings)],
            "plaquettes": [p.to_dict() for p in self.plaquettes],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_svg(self, scale: int = 40) -> str:
        """Render the lattice rotated by 45 degrees, data rows horizontal."""
        def xy(coord: Coord) -> tuple[float, float]:
            r, c = coord
            r -= self.offset
            return (c - r) * scale / 2.0, (r + c) * scale / 2.0

        points = {c: xy(c) for c in self.qubits}
        xs = [p[0] for p in points.values()]
        ys = [p[1] for p in points.values()]
        pad = scale
        x0, y0 = min(xs) - pad, min(ys) - pad
        width, height = max(xs) - x0 + pad, max(ys) - y0 + pad
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
            f'height="{height:.0f}" viewBox="{x0:.1f} {y0:.1f} {width:.1f} {height:.1f}">'
        ]
        for d, a in sorted(self.couplings):
            (xa, ya), (xb, yb) = points[d], points[a]
            if abs(xa - xb) > scale or abs(ya - yb) > scale:
                continue  # periodic wrap on a torus
            parts.append(
                f'<line x1="{xa:.1f}" y1="{ya:.1f}" x2="{xb:.1f}" y2="{yb:.1f}" '
                'stroke="#888" stroke-dasharray="3,3"/>'
            )
        for coord in sorted(self.qubits):
            role = self.qubits[coord]
            x, y = points[coord]
            parts.append(
                f'<circle cx="{x:.1f}" cy="{y:.1f}" r="{scale * 0.3:.1f}" '
                f'fill="{SVG_COLORS[role]}"><title>{role} {coord}</title></circle>'
            )
            parts.append(
                f'<text x="{x:.1f}" y="{y + 4:.1f}" font-size="{scale * 0.3:.0f}" '
                f'text-anchor="middle" fill="white">{role}</text>'
            )
        parts.append("</svg>")
        return "\n".join(parts)


def _assemble(patch: PatchSpec, data_idx: Iterable[Coord], plaq_idx: Iterable[Coord],
              offset: int, wrap: tuple[int, int] | None) -> Fabric:
    data_set = set(data_idx)
    qubits: dict[Coord, str] = {}
    lattice: dict[Coord, Coord] = {}
    for i, j in data_set:
        coord = _data_coord(i, j, offset)
        qubits[coord] = _role_from_lattice((i, j), True)
        lattice[coord] = (i, j)

    plaquettes = []
    for p, q in sorted(plaq_idx):
        arms = {}
        for arm in ARMS:
            di, dj = _ARM_LATTICE[arm]
            i, j = p + di, q + dj
            if wrap is not None:
                i, j = i % wrap[0], j % wrap[1]
            if (i, j) in data_set:
                arms[arm] = _data_coord(i, j, offset)
        if len(arms) < 2:
            continue
        anc = _ancilla_coord(p, q, offset)
        qubits[anc] = _role_from_lattice((p, q), False)
        lattice[anc] = (p, q)
        plaquettes.append(Plaquette(anc, "X" if (p + q) % 2 == 0 else "Z", arms))

    couplings = frozenset((d, pl.ancilla) for pl in plaquettes for d in pl.arms.values())
    by_anc = {pl.ancilla: pl for pl in plaquettes}
    neighbors: dict[Coord, list[Coord]] = {c: [] for c in qubits}
    for d, a in sorted(couplings):
        neighbors[d].append(a)
        neighbors[a].append(d)
    return Fabric(
        patch=patch,
        qubits=qubits,
        couplings=couplings,
        plaquettes=tuple(sorted(plaquettes, key=lambda pl: pl.ancilla)),
        offset=offset,
        _lattice=lattice,
        _plaquette_by_ancilla=by_anc,
        _neighbors={c: tuple(v) for c, v in neighbors.items()},
    )


def build_fabric(spec: PatchSpec | int | str) -> Fabric:
    """Build a planar distance-d patch or a periodic torus of unit cells.

    ``spec`` may be a :class:`PatchSpec`, an odd distance, or a string accepted
    by :meth:`PatchSpec.parse`. Torus sizes count data rows and data columns of
    the rotated drawing and must be even, so that the torus holds
    ``rows * cols / 4`` whole unit cells.
    """
    if isinstance(spec, int):
        spec = PatchSpec.planar(spec)
    elif isinstance(spec, str):
        spec = PatchSpec.parse(spec)

    if spec.kind == "planar":
        d = spec.distance
        if d is None or d < 3 or d % 2 == 0:
            raise InvalidPatch(f"planar distance must be odd and >= 3, got {d}")
        # top-left data qubit at lattice (d - 1, 0): an f1 row, role D1
        i0 = d - 1
        data = [(i, j) for i in range(i0, i0 + d) for j in range(d)]
        plaq = []
        for p in range(i0 - 1, i0 + d):
            for q in range(-1, d):
                interior_p = i0 <= p < i0 + d - 1
                interior_q = 0 <= q < d - 1
                is_x = (p + q) % 2 == 0
                if interior_p and interior_q:
                    plaq.append((p, q))
                elif interior_q and not interior_p and is_x:
                    plaq.append((p, q))  # top/bottom weight-2 X checks
                elif interior_p and not interior_q and not is_x:
                    plaq.append((p, q))  # left/right weight-2 Z checks
        return _assemble(spec, data, plaq, offset=0, wrap=None)

    if spec.kind == "torus":
        r, c = spec.rows, spec.cols
        if not r or not c or r <= 0 or c <= 0 or r % 2 or c % 2:
            raise InvalidPatch(f"torus dimensions must be even positive integers, got {r}x{c}")
        offset = 4 * ((c - 1 + 3) // 4)
        data = [(i, j) for i in range(r) for j in range(c)]
        plaq = [(p, q) for p in range(r) for q in range(c)]
        return _assemble(spec, data, plaq, offset=offset, wrap=(r, c))

    raise InvalidPatch(f"unknown patch kind {spec.kind!r}")


def role_of(coord: Coord, fabric: Fabric | None = None) -> str:
    """Role of ``coord``: within ``fabric`` if given, otherwise in the infinite tiling."""
    if fabric is None:
        return tiling_role(coord)
    return fabric.role_of(coord)


def unit_cell(fabric: Fabric, anchor: Coord) -> set[Coord]:
    """The 8 qubits of the unit cell whose D1 sits at ``anchor``."""
    if not fabric.is_torus:
        raise MisalignedAnchor("unit-cell census needs a torus fabric")
    if anchor not in fabric.qubits or fabric.role_of(anchor) != "D1":
        raise MisalignedAnchor(f"{anchor} is not the D1 anchor of a unit cell")
    i, j = fabric.lattice_index(anchor)
    r, c = fabric.patch.rows, fabric.patch.cols
    cell = set()
    for di in (0, 1):
        for dj in (0, 1):
            a, b = (i + di) % r, (j + dj) % c
            cell.add(_data_coord(a, b, fabric.offset))
            cell.add(_ancilla_coord(a, b, fabric.offset))
    return cell


def unit_cell_census(fabric: Fabric, anchor: Coord, schedule=None) -> dict[str, int]:
    """Count one cycle's CZ gates touching the cell at ``anchor``.

    ``internal_cz`` counts gates with both qubits inside the cell,
    ``boundary_cz`` gates with exactly one.
    """
    if fabric.is_torus and (fabric.patch.rows < 4 or fabric.patch.cols < 4):
        raise MisalignedAnchor("census needs at least 4x4 so neighboring cells are distinct")
    cell = unit_cell(fabric, anchor)
    if schedule is None:
        from .schedule import pipelined_cycle
        schedule = pipelined_cycle(fabric)
    internal = boundary = 0
    for a, b in schedule.cz_pairs():
        inside = (a in cell) + (b in cell)
        if inside == 2:
            internal += 1
        elif inside == 1:
            boundary += 1
    return {"internal_cz": internal, "boundary_cz": boundary}


def cell_anchors(fabric: Fabric) -> list[Coord]:
    return [c for c in fabric.data_qubits if fabric.role_of(c) == "D1"]

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fluxpipe.errors import InvalidPatch, MisalignedAnchor, OutOfPatch
from fluxpipe.fabric import (ARM_OFFSETS, PatchSpec, build_fabric, cell_anchors, frequency_group,
                             is_data_site, role_of, tiling_role, unit_cell, unit_cell_census)


def gf2_rank(rows):
    m = np.array(rows, dtype=np.uint8) % 2
    rank = 0
    for c in range(m.shape[1]):
        piv = next((r for r in range(rank, m.shape[0]) if m[r, c]), None)
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_planar_counts(d):
    f = build_fabric(d)
    assert len(f.data_qubits) == d * d
    assert len(f.ancillas) == d * d - 1
    # sum of plaquette weights: (d-1)^2 weight-4 plus 2(d-1) weight-2 checks
    assert len(f.couplings) == 4 * (d - 1) ** 2 + 2 * 2 * (d - 1) == 4 * d * (d - 1)
    assert len(f.x_ancillas()) == len(f.z_ancillas()) == (d * d - 1) // 2


def test_surface17_plaquette_weights():
    f = build_fabric(3)
    weights = sorted(p.weight for p in f.plaquettes)
    assert weights == [2, 2, 2, 2, 4, 4, 4, 4]
    assert len(f.qubits) == 17
    assert sorted(p.kind for p in f.plaquettes if p.weight == 4) == ["X", "X", "Z", "Z"]


@pytest.mark.parametrize("d", [3, 5, 7])
def test_planar_patch_is_a_surface_code(d):
    """Independent check: commuting checks, one logical qubit."""
    f = build_fabric(d)
    col = {q: k for k, q in enumerate(f.data_qubits)}
    hx = [[int(q in f.plaquette(a).data) for q in col] for a in f.x_ancillas()]
    hz = [[int(q in f.plaquette(a).data) for q in col] for a in f.z_ancillas()]
    assert not (np.array(hx) @ np.array(hz).T % 2).any()
    n = d * d
    assert n - gf2_rank(hx) - gf2_rank(hz) == 1


@pytest.mark.parametrize("d", [3, 5, 7])
def test_coupling_geometry(d):
    f = build_fabric(d)
    for data, anc in f.couplings:
        assert is_data_site(data) and not is_data_site(anc)
        assert abs(data[0] - anc[0]) + abs(data[1] - anc[1]) == 1
    for pl in f.plaquettes:
        for arm, q in pl.arms.items():
            dr, dc = ARM_OFFSETS[arm]
            assert (pl.ancilla[0] + dr, pl.ancilla[1] + dc) == q
        assert pl.weight in (2, 4)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_data_neighbor_types(d):
    f = build_fabric(d)
    for q in f.data_qubits:
        kinds = [f.plaquette(a).kind for a in f.neighbors(q)]
        assert kinds.count("X") <= 2 and kinds.count("Z") <= 2
        if len(kinds) == 4:
            assert kinds.count("X") == kinds.count("Z") == 2
            # X-type along one grid axis, Z-type along the other
            xs = [a for a in f.neighbors(q) if f.plaquette(a).kind == "X"]
            assert xs[0][0] == xs[1][0] or xs[0][1] == xs[1][1]


def test_roles_and_groups():
    f = build_fabric(5)
    for q, role in f.qubits.items():
        assert role == f.tiling_role_at(q)
        expected = {"D1": "f1", "D2": "f1", "D3": "f3", "D4": "f3"}.get(role, "f2")
        assert frequency_group(role) == expected
    assert role_of((0, 0)) == "D1"
    # along an anti-diagonal data row roles alternate D1/D2 or D3/D4
    assert {role_of((0, 0)), role_of((-1, 1))} == {"D1", "D2"}
    assert {role_of((1, 1)), role_of((0, 2))} == {"D3", "D4"}
    assert role_of((1, 2)) == "Z1"
    assert role_of((0, 2)) == "D3"


@given(st.integers(-40, 40), st.integers(-40, 40))
def test_role_period_four(r, c):
    for dr, dc in ((4, 0), (0, 4), (4, 4)):
        assert tiling_role((r, c)) == tiling_role((r + dr, c + dc))


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_role_parity(r, c):
    role = tiling_role((r, c))
    assert role.startswith("D") == ((r + c) % 2 == 0)


def test_role_of_out_of_patch():
    f = build_fabric(3)
    with pytest.raises(OutOfPatch):
        role_of((100, 100), f)


@pytest.mark.parametrize("spec", [1, 2, 4, "0x4", "3x4", "torus:0x0"])
def test_invalid_patches(spec):
    with pytest.raises(InvalidPatch):
        build_fabric(spec)


def test_single_cell_torus():
    f = build_fabric(PatchSpec.torus(2, 2))
    assert len(f.data_qubits) == 4 and len(f.ancillas) == 4
    assert len(f.couplings) == 16
    assert sorted(f.role_of(q) for q in f.qubits) == sorted(
        ["D1", "D2", "D3", "D4", "X1", "X2", "Z1", "Z2"])
    assert all(p.weight == 4 for p in f.plaquettes)


@pytest.mark.parametrize("shape", ["4x4", "4x8", "8x4", "8x8"])
def test_census(shape):
    f = build_fabric(shape)
    anchors = cell_anchors(f)
    assert len(anchors) == len(f.data_qubits) // 4
    censuses = [unit_cell_census(f, a) for a in anchors]
    assert all(c == {"internal_cz": 9, "boundary_cz": 14} for c in censuses)
    # double-counting identity: 16 ancilla-incident + 16 data-incident - shared
    cell = unit_cell(f, anchors[0])
    anc_inc = sum(1 for d, a in f.couplings if a in cell)
    data_inc = sum(1 for d, a in f.couplings if d in cell)
    shared = sum(1 for d, a in f.couplings if a in cell and d in cell)
    assert (anc_inc, data_inc, shared) == (16, 16, 9)
    assert anc_inc + data_inc - shared == 23


def test_census_anchor_errors():
    f = build_fabric("4x4")
    non_d1 = next(q for q in f.data_qubits if f.role_of(q) != "D1")
    with pytest.raises(MisalignedAnchor):
        unit_cell_census(f, non_d1)
    with pytest.raises(MisalignedAnchor):
        unit_cell_census(build_fabric(3), (2, 2))
    with pytest.raises(MisalignedAnchor):
        unit_cell_census(build_fabric("2x2"), cell_anchors(build_fabric("2x2"))[0])


def test_json_and_svg_export():
    f = build_fabric(3)
    d = json.loads(f.to_json())
    assert set(d) == {"patch", "qubits", "couplings", "plaquettes"}
    assert len(d["qubits"]) == 17 and len(d["couplings"]) == 24
    assert {q["role"] for q in d["qubits"]} == {"D1", "D2", "D3", "D4", "X1", "X2", "Z1", "Z2"}
    svg = f.to_svg()
    assert svg.startswith("<svg") and svg.count("<circle") == 17
    assert "#1f77b4" in svg and "#2ca02c" in svg and "#d62728" in svg


def test_torus_translation_invariance_of_roles():
    f = build_fabric("8x8")
    i_max, j_max = f.patch.rows, f.patch.cols
    by_index = {f.lattice_index(q): f.role_of(q) for q in f.data_qubits}
    for (i, j), role in by_index.items():
        assert by_index[((i + 2) % i_max, j)] == role
        assert by_index[(i, (j + 2) % j_max)] == role


def test_tiling_neighbors_cover_present_couplings():
    f = build_fabric(5)
    for q in f.data_qubits:
        present = {a for a, arm, ok in f.tiling_neighbors(q) if ok}
        assert present == set(f.neighbors(q))
    for pl, arm in itertools.product(f.plaquettes, ("NE", "NW", "SE", "SW")):
        if arm in pl.arms:
            assert f.tiling_arm(pl.ancilla, arm) == pl.arms[arm]

import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fluxpipe.fabric import build_fabric, is_data_site
from fluxpipe.schedule import (GATE_KINDS, PIPELINED_SLOTS, Durations, ancilla_depth,
                               ascii_diagram, cycle_time, parallel_cycle, parallel_cycle_s17,
                               pipelined_cycle, reorder_arms, slot_durations, slot_exclusivity,
                               substitute_hadamards, validate_ordering)


@pytest.fixture(scope="module")
def s17():
    return build_fabric(3)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_pipelined_depth_seven(d):
    sched = pipelined_cycle(build_fabric(d))
    assert {ancilla_depth(sched, a) for a in sched.fabric.ancillas} == {7}


@pytest.mark.parametrize("d", [3, 5])
def test_parallel_depth_nine(d):
    sched = parallel_cycle(build_fabric(d))
    assert {ancilla_depth(sched, a) for a in sched.fabric.ancillas} == {9}


def test_parallel_timing_740(s17):
    sched = parallel_cycle_s17()
    # 4 single-qubit layers, 4 CZ layers and one readout
    assert cycle_time(sched) == 4 * 20 + 4 * 40 + 500 == 740


def test_pipelined_timing_default(s17):
    sched = pipelined_cycle(s17)
    assert cycle_time(sched) == 1000
    durations = slot_durations(sched)
    coherent = sum(v for k, v in durations.items() if k in "AB1234")
    assert coherent == 200 and durations["C"] == 300


@given(st.floats(1, 100), st.floats(1, 200), st.floats(1, 2000))
def test_pipelined_timing_model(t1, t2, tro):
    sched = pipelined_cycle(build_fabric(3))
    expected = 2 * max(2 * t1 + 4 * t2, tro)
    assert cycle_time(sched, Durations(t1, t2, tro)) == pytest.approx(expected, rel=1e-12)


def test_readout_shorter_than_coherent_block(s17):
    sched = pipelined_cycle(s17)
    assert cycle_time(sched, Durations(20, 40, 100)) == 2 * (2 * 20 + 4 * 40)


def test_durations_must_be_positive():
    with pytest.raises(ValueError):
        Durations(0, 40, 500)


@pytest.mark.parametrize("d", [3, 5])
def test_pipelined_slot_contents(d):
    sched = pipelined_cycle(build_fabric(d))
    f = sched.fabric
    x_anc, z_anc = set(f.x_ancillas()), set(f.z_ancillas())
    x_data = {q for a in x_anc for q in f.plaquette(a).data}
    for g in sched.gates:
        assert g.kind in GATE_KINDS
        if g.kind == "CZ":
            anc = next(q for q in g.qubits if not is_data_site(q))
            assert g.slot in ("1234" if anc in x_anc else "5678")
            assert tuple(sorted(g.qubits, key=lambda q: not is_data_site(q))) in f.couplings
        elif g.kind == "H":
            q = g.qubits[0]
            if g.slot in ("A", "B"):
                assert q in x_anc or q in x_data
            else:
                assert g.slot in ("D", "E") and q in z_anc
        elif g.kind == "Measure":
            a = g.qubits[0]
            assert a in (x_anc if g.slot == "D" else z_anc)
        elif g.kind == "Idle":
            assert g.slot in ("C", "F") and is_data_site(g.qubits[0])
    assert slot_exclusivity(sched) == []


@pytest.mark.parametrize("d", [3, 5, 7])
def test_orderings_valid(d):
    assert validate_ordering(pipelined_cycle(build_fabric(d))) == []


def test_parallel_ordering_valid(s17):
    sched = parallel_cycle_s17()
    assert validate_ordering(sched) == []
    assert slot_exclusivity(sched) == []
    czs = sched.cz_by_slot()
    assert sum(len(v) for v in czs.values()) == 24
    assert sorted(len(v) for v in czs.values() if v) == [6, 6, 6, 6]


def test_validate_ordering_flags_pattern(s17):
    sched = pipelined_cycle(s17)
    x = next(a for a in s17.x_ancillas() if s17.plaquette(a).weight == 4)
    bad = reorder_arms(sched, x, ("SW", "SE", "NW", "NE"))
    kinds = {v["kind"] for v in validate_ordering(bad)}
    assert "pattern" in kinds
    assert all(v["kind"] != "pattern" for v in validate_ordering(bad, skip_pattern=[x]))


def test_validate_ordering_flags_conflict(s17):
    sched = pipelined_cycle(s17)
    # bulk X-ancillas interact in every X slot, so moving one of their CZs clashes
    x = next(a for a in s17.x_ancillas() if s17.plaquette(a).weight == 4)
    clash = next(g for g in sched.gates_in("2") if x in g.qubits)
    moved = [replace(g, slot="1") if g is clash else g for g in sched.gates]
    kinds = {v["kind"] for v in validate_ordering(sched.replace_gates(moved))}
    assert "slot_conflict" in kinds


def test_shared_order_violation_in_parallel(s17):
    sched = parallel_cycle_s17()
    z = next(a for a in s17.z_ancillas() if s17.plaquette(a).weight == 4)
    x = next(a for a in s17.x_ancillas()
             if len(set(s17.plaquette(a).data) & set(s17.plaquette(z).data)) == 2)
    shared = sorted(set(s17.plaquette(x).data) & set(s17.plaquette(z).data))
    # swap the X and Z slots of one shared data qubit only
    sx = next(g for g in sched.gates if g.kind == "CZ" and set(g.qubits) == {x, shared[0]})
    sz = next(g for g in sched.gates if g.kind == "CZ" and set(g.qubits) == {z, shared[0]})
    gates = [replace(g, slot=sz.slot) if g is sx else replace(g, slot=sx.slot) if g is sz else g
             for g in sched.gates]
    kinds = {v["kind"] for v in validate_ordering(sched.replace_gates(gates))}
    assert "shared_order" in kinds


def test_hadamard_identity_matrices():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    z = np.diag([1, -1])

    def ry(theta):
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        return np.array([[c, -s], [s, c]])

    assert np.allclose(h, ry(np.pi / 2) @ z)
    assert np.allclose(h, z @ ry(-np.pi / 2))


def test_substitute_hadamards(s17):
    sched = substitute_hadamards(pipelined_cycle(s17))
    kinds = [g.kind for g in sched.gates]
    assert "H" not in kinds
    assert kinds.count("Y_plus_90") == kinds.count("Y_minus_90") > 0
    for q in s17.qubits:
        ys = [g.kind for g in sched.ops_on(q) if g.kind.startswith("Y")]
        assert ys == ["Y_minus_90", "Y_plus_90"] * (len(ys) // 2)


def test_exports(s17):
    sched = pipelined_cycle(s17)
    d = json.loads(sched.to_json())
    assert [s["id"] for s in d["slots"]] == list(PIPELINED_SLOTS)
    assert d["mode"] == "pipelined"
    text = ascii_diagram(sched)
    lines = text.splitlines()
    assert len(lines) == 1 + len(s17.qubits)
    assert lines[0].split() == list(PIPELINED_SLOTS)

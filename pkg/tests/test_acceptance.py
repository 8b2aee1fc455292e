"""The eleven acceptance criteria, each with its runtime budget.

Every test is named ``test_criterion_NN_*``; ``conftest.py`` prints one
PASS/FAIL line per criterion at the end of the session.
"""

import math
import time
from contextlib import contextmanager

import pytest

from fluxpipe.cliffsim import (ErrorInjection, distance_check, logical_operator_check, run_cycles,
                               verify_stabilizer_projection)
from fluxpipe.fabric import build_fabric, cell_anchors, unit_cell_census
from fluxpipe.freqplan import (build_ladder, check_static, check_transition, required_detuning,
                               residual_error)
from fluxpipe.pulsemask import (LogicalEdit, apply_edit, compile_cycle, masks_to_sequences,
                                primitives, synthesize_masks, verify)
from fluxpipe.schedule import (Durations, ancilla_depth, cycle_time, parallel_cycle,
                               parallel_cycle_s17, pipelined_cycle)

XI = 2 * math.pi / 40


@contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.2f} s, budget {seconds} s"


def test_criterion_01_parallel_timing():
    with budget(1):
        assert cycle_time(parallel_cycle_s17(), Durations()) == 740


def test_criterion_02_depth():
    with budget(1):
        f3 = build_fabric(3)
        par, pip = parallel_cycle_s17(), pipelined_cycle(f3)
        assert all(ancilla_depth(par, a) == 9 for a in f3.ancillas)
        assert all(ancilla_depth(pip, a) == 7 for a in f3.ancillas)
        for d in (5, 7):
            f = build_fabric(d)
            sched = pipelined_cycle(f)
            assert all(ancilla_depth(sched, a) == 7 for a in f.ancillas)


def test_criterion_03_census():
    with budget(1):
        for shape in ("4x4", "8x8"):
            f = build_fabric(shape)
            censuses = [unit_cell_census(f, a) for a in cell_anchors(f)]
            assert len(censuses) == len(f.data_qubits) // 4
            assert all(c == {"internal_cz": 9, "boundary_cz": 14} for c in censuses)


def test_criterion_04_masks():
    with budget(1):
        lad = build_ladder()
        for d in (3, 5, 7):
            f = build_fabric(d)
            table = synthesize_masks(pipelined_cycle(f))
            d2s = [q for q in f.data_qubits if f.role_of(q) == "D2"]
            assert d2s and all(table.on_slots(q, "P1") == ["1", "4", "6", "7"] for q in d2s)
            assert len(masks_to_sequences(table, lad).distinct_sequences()) == 8
            assert len(primitives()) == 3
            assert {p for (_, _, p) in table.bits} == {"P1", "P2", "P3"}


@pytest.mark.parametrize("d", [3, 5, 7])
def test_criterion_05_zone_freedom(d):
    with budget(10):
        lad = build_ladder(6.0, 0.4, -0.3, guard=0.05)
        assert lad.guard == 0.05
        compiled = compile_cycle(pipelined_cycle(build_fabric(d)))
        seqs = masks_to_sequences(compiled.masks, lad)
        f = compiled.schedule.fabric
        intended = compiled.schedule.cz_by_slot()
        slots = seqs.slots
        static = transitions = 0
        for s, t in zip(slots, slots[1:] + slots[:1]):
            now, nxt = seqs.slot_frequencies(s), seqs.slot_frequencies(t)
            rs = check_static(f, lad, now, intended.get(s, ()), where=s)
            endpoints = set(intended.get(s, ())) | set(intended.get(t, ()))
            rt = check_transition(f, lad, now, nxt, endpoints, where=f"{s}->{t}")
            static += sum(r.status == "violation" for r in rs)
            transitions += sum(r.status == "violation" for r in rt)
        assert (static, transitions) == (0, 0)
        assert verify(compiled, lad)["cz_match"]


def test_criterion_06_error_model():
    with budget(1):
        e400 = residual_error(XI, 0.4, 20)
        e1200 = residual_error(XI, 1.2, 20)
        assert 9.0e-3 <= e400 <= 1.05e-2
        assert 1.0e-3 <= e1200 <= 1.15e-3
        for df in (0.4, 1.2, 0.05, 3.0):
            eps = residual_error(XI, df, 20)
            assert abs(required_detuning(eps, XI, 20) - df) <= 1e-12 * df


def test_criterion_07_projection():
    with budget(5):
        f = build_fabric(3)
        pip = verify_stabilizer_projection(pipelined_cycle(f))
        par = verify_stabilizer_projection(parallel_cycle_s17())
        assert len(pip) == len(par) == 8
        assert all(r["pass"] for r in pip.values()) and all(r["pass"] for r in par.values())
        assert {a: r["observable"] for a, r in pip.items()} == \
            {a: r["observable"] for a, r in par.items()}
        assert all(r["pass"] for r in verify_stabilizer_projection(parallel_cycle(f)).values())


def test_criterion_08_syndrome_propagation():
    with budget(10):
        f = build_fabric(3)
        sched = pipelined_cycle(f)
        cases = 0
        for q in f.data_qubits:
            for p in "XYZ":
                recs = run_cycles(sched, n_cycles=3, seed=cases, init="code",
                                  injections=[ErrorInjection(p, q, 2)])
                opposite = {"X": {"Z"}, "Z": {"X"}, "Y": {"X", "Z"}}[p]
                expected = sorted(a for a in f.neighbors(q) if f.plaquette(a).kind in opposite)
                assert sorted(recs[2].flipped()) == expected
                assert not recs[0].flipped() and not recs[1].flipped()
                for kind in opposite:
                    n = sum(f.plaquette(a).kind == kind for a in expected)
                    assert n in (1, 2)
                    if len(f.neighbors(q)) == 4:
                        assert n == 2
                cases += 1
        assert cases == 27


def test_criterion_09_logical_masking():
    with budget(5):
        f = build_fabric(3)
        sched = pipelined_cycle(f)
        for kind in ("X", "Z"):
            a = next(x for x in f.ancillas
                     if f.plaquette(x).kind == kind and f.plaquette(x).weight == 4)
            edit = LogicalEdit("stabilizer_off_h_mask", a)
            assert logical_operator_check(f, edit, 1)["data_pauli"] == \
                {d: kind for d in f.plaquette(a).data}
            assert logical_operator_check(f, edit, 0)["data_pauli"] == {}

        lad = build_ladder()
        base = compile_cycle(sched)
        before = verify(base, lad)
        x = next(a for a in f.x_ancillas() if f.plaquette(a).weight == 4)
        edited = apply_edit(base, LogicalEdit("remove_data_from_check", x, arm="NE"))
        after = verify(edited, lad)
        n_before = sum(len(v) for v in before["realized_cz"].values())
        n_after = sum(len(v) for v in after["realized_cz"].values())
        assert n_before - n_after == 1
        assert after["summary"]["violations"] == 0 and after["cz_match"]


def test_criterion_10_distance():
    with budget(60):
        assert distance_check(build_fabric(3), full_enumeration=True) == 3


def test_criterion_11_pipelined_timing():
    with budget(1):
        sched = pipelined_cycle(build_fabric(3))
        assert cycle_time(sched, Durations()) == 1000
        coherent = 2 * 20 + 4 * 40
        assert 500 > coherent  # readout outlasts the coherent block and absorbs C/F
        short = Durations(20, 40, 150)
        assert cycle_time(sched, short) == 2 * (2 * 20 + 4 * 40)

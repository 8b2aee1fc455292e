import math

import pytest
from hypothesis import assume, given, strategies as st

from fluxpipe.errors import DegenerateLadder, UnassignedQubit
from fluxpipe.fabric import build_fabric
from fluxpipe.freqplan import (ErrorModelParams, build_ladder, check_cycle, check_static,
                               check_transition, classify_detuning, fourth_order_pairs,
                               required_detuning, residual_error, summarize)

XI = 2 * math.pi / 40  # rad/ns


def test_default_ladder_values():
    lad = build_ladder(6.0, 0.4, -0.3)
    expected = {"f1": 6.7, "f1_int": 6.3, "f2": 6.0, "f2_park": 5.6, "f2_int": 5.2,
                "f3": 4.9, "f3_park": 4.5}
    for name, value in expected.items():
        assert getattr(lad, name) == pytest.approx(value, abs=1e-12)


@given(st.floats(4.0, 8.0), st.floats(0.1, 1.5), st.floats(-0.45, -0.1))
def test_ladder_identities(f2, df, alpha):
    try:
        lad = build_ladder(f2, df, alpha)
    except DegenerateLadder:
        return
    a = abs(alpha)
    for hi, lo in (("f1", "f1_int"), ("f2", "f2_park"), ("f2_park", "f2_int"), ("f3", "f3_park")):
        assert getattr(lad, hi) - getattr(lad, lo) == pytest.approx(df, abs=1e-12)
    assert lad.f1_int == pytest.approx(f2 - alpha)
    assert lad.f2_int == pytest.approx(lad.f3 - alpha)
    values = [lad.f1, lad.f1_int, lad.f2, lad.f2_park, lad.f2_int, lad.f3, lad.f3_park]
    assert values == sorted(values, reverse=True) and len(set(values)) == 7
    assert a > 0


@pytest.mark.parametrize("df, alpha", [(0.0, -0.3), (0.4, -0.4), (0.3, -0.6), (0.4, 0.0)])
def test_degenerate_ladders(df, alpha):
    with pytest.raises(DegenerateLadder):
        build_ladder(6.0, df, alpha)


def test_positive_alpha_rejected():
    with pytest.raises(ValueError):
        build_ladder(6.0, 0.4, 0.3)


def test_residual_error_numbers():
    # direct evaluation of (xi^2 tau / (4 pi dF))^2
    assert residual_error(XI, 0.4, 20) == pytest.approx(9.64e-3, rel=2e-3)
    assert residual_error(XI, 1.2, 20) == pytest.approx(1.07e-3, rel=3e-3)
    assert residual_error(XI, 0.4, 20) / residual_error(XI, 1.2, 20) == pytest.approx(9.0)
    assert ErrorModelParams.from_durations(20, 40).residual_error(0.4) == residual_error(XI, 0.4, 20)


def test_residual_error_limits():
    assert residual_error(XI, 1e9, 20) < 1e-18
    assert required_detuning(1.0, XI, 20) == pytest.approx(XI ** 2 * 20 / (4 * math.pi))


@given(st.floats(0.01, 1.0), st.floats(0.05, 5.0), st.floats(1.0, 100.0))
def test_round_trip(xi, df, tau):
    eps = residual_error(xi, df, tau)
    assume(0 < eps <= 1)
    assert required_detuning(eps, xi, tau) == pytest.approx(df, rel=1e-12)


@given(st.floats(0.01, 1.0), st.floats(0.05, 5.0), st.floats(1.0, 100.0), st.floats(1.01, 3.0))
def test_monotonicity(xi, df, tau, k):
    e = residual_error(xi, df, tau)
    assert residual_error(xi, df * k, tau) < e
    assert residual_error(xi * k, df, tau) > e
    assert residual_error(xi, df, tau * k) > e


@pytest.mark.parametrize("eps, df", [(9.64e-3, 0.4), (1.07e-3, 1.2)])
def test_required_detuning_examples(eps, df):
    assert required_detuning(eps, XI, 20) == pytest.approx(df, rel=3e-3)


def test_invalid_error_inputs():
    with pytest.raises(ValueError):
        residual_error(XI, 0, 20)
    with pytest.raises(ValueError):
        required_detuning(0, XI, 20)


# -- static zone classification -----------------------------------------------------

@pytest.fixture(scope="module")
def s17():
    return build_fabric(3)


def _pair(fabric):
    return sorted(fabric.couplings)[0]


def _assign(fabric, d, a, fd, fa, rest=5.0):
    freqs = {q: rest + 0.001 * k for k, q in enumerate(sorted(fabric.qubits))}
    freqs[d], freqs[a] = fd, fa
    return freqs


def test_static_intended(s17):
    lad = build_ladder()
    d, a = _pair(s17)
    freqs = {q: lad.f1 for q in s17.qubits}
    freqs.update({d: lad.f1_int, a: lad.f2})
    r = next(r for r in check_static(s17, lad, freqs, [(d, a)]) if r.pair == (d, a))
    assert (r.status, r.zone_kind) == ("intended", "avoided_11_20")
    assert r.margin == pytest.approx(0, abs=1e-12)


def test_static_safe_margin(s17):
    lad = build_ladder()
    d, a = _pair(s17)
    r = next(r for r in check_static(s17, lad, _assign(s17, d, a, lad.f1, lad.f2))
             if r.pair == (d, a))
    assert r.status == "safe"
    assert r.margin == pytest.approx(lad.delta_f)


def test_static_exchange_violation(s17):
    lad = build_ladder()
    d, a = _pair(s17)
    r = next(r for r in check_static(s17, lad, _assign(s17, d, a, 5.5, 5.5)) if r.pair == (d, a))
    assert (r.status, r.zone_kind) == ("violation", "exchange_10_01")


def test_static_missed_cz_is_violation(s17):
    lad = build_ladder()
    d, a = _pair(s17)
    r = next(r for r in check_static(s17, lad, _assign(s17, d, a, lad.f1, lad.f2), [(d, a)])
             if r.pair == (d, a))
    assert r.status == "violation"


def test_static_unassigned(s17):
    lad = build_ladder()
    freqs = {q: 5.0 for q in list(s17.qubits)[:-1]}
    with pytest.raises(UnassignedQubit):
        check_static(s17, lad, freqs)


_MIRROR = {"avoided_11_20": "avoided_11_02", "avoided_11_02": "avoided_11_20",
           "exchange_10_01": "exchange_10_01"}


@given(st.floats(-2.0, 2.0), st.booleans(), st.floats(0.01, 0.1))
def test_zone_symmetry(delta, intended, guard):
    k1, s1, m1 = classify_detuning(delta, -0.3, intended, guard)
    k2, s2, m2 = classify_detuning(-delta, -0.3, intended, guard)
    assert s1 == s2 and m1 == pytest.approx(m2)
    if delta != 0:
        assert k2 == _MIRROR[k1]


# -- transitions -----------------------------------------------------------------------

def _two(fabric):
    d, a = _pair(fabric)
    return d, a


def test_transition_f1_data_descends(s17):
    lad = build_ladder()
    d, a = _two(s17)
    src = _assign(s17, d, a, lad.f1, lad.f2)
    dst = dict(src, **{})
    dst[d] = lad.f1_int
    r = check_transition(s17, lad, src, dst, [(d, a)])
    assert [x.status for x in r if x.pair == (d, a)] == ["safe"]


def test_transition_ancilla_descends_to_f3_partner(s17):
    lad = build_ladder()
    d, a = _two(s17)
    src = _assign(s17, d, a, lad.f3, lad.f2)
    dst = dict(src)
    dst[a] = lad.f2_int
    assert all(x.status == "safe" for x in check_transition(s17, lad, src, dst, [(d, a)])
               if x.pair == (d, a))
    # without the CZ being intended, landing on the zone is a violation
    bad = [x for x in check_transition(s17, lad, src, dst, []) if x.pair == (d, a)]
    assert [x.status for x in bad] == ["violation"]


def test_transition_through_zone(s17):
    lad = build_ladder()
    d, a = _two(s17)
    # ancilla sweeps f2 -> f2_int while the neighbor sits at f3 + |alpha| + 0.2
    src = _assign(s17, d, a, lad.f2_int - lad.abs_alpha + 0.2, lad.f2)
    dst = dict(src)
    dst[a] = lad.f2_int
    r = [x for x in check_transition(s17, lad, src, dst, []) if x.pair == (d, a)]
    assert r[0].status == "violation" and "sweeps" in r[0].detail


def test_transition_checks_both_neighbor_frequencies(s17):
    lad = build_ladder()
    d, a = _two(s17)
    src = _assign(s17, d, a, 4.0, 6.0)
    dst = dict(src)
    dst[a] = 5.0
    dst[d] = 5.3  # the neighbor's destination zone (5.3 - 0.3 = 5.0) lands on the mover
    r = [x for x in check_transition(s17, lad, src, dst, []) if x.pair == (d, a)]
    assert r[0].status == "violation"


def test_cycle_and_summary(s17):
    lad = build_ladder()
    base = {q: (lad.f1 if i % 2 else lad.f3) for i, q in enumerate(sorted(s17.qubits))}
    slots = ["a", "b"]
    reports = check_cycle(s17, lad, slots, {"a": base, "b": base}, {})
    summary = summarize(reports)
    assert summary["checked"] == 2 * len(s17.couplings)
    assert set(summary) == {"violations", "intended", "checked", "min_margin_ghz"}


def test_fourth_order_pairs_informational(s17):
    freqs = {q: 5.0 for q in s17.qubits}
    pairs = fourth_order_pairs(s17, freqs)
    assert pairs and all(a != b for a, b in pairs)

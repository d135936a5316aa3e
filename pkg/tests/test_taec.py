import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dltenergy.errors import ConfigError
from dltenergy.measurement import ScenarioStats
from dltenergy.metrics import PerMessageCurve, interpolate_energy
from dltenergy.taec import (
    Fleet,
    HardwareClass,
    RateProfile,
    annual_total,
    e_base,
    e_messages_class,
    e_messages_total,
    p_base_from_measurement,
)

YEAR_S = 86400 * 365


def rpi(n=450, pue=1.59, p=2.680131, curve=((50, 0.00678),), name="rpi4b"):
    return HardwareClass(name, pue, p, n, PerMessageCurve(curve))


def test_e_base_examples():
    total, terms = e_base(Fleet((rpi(),)))
    assert total == pytest.approx(1.59 * 2.680131 * 450 * YEAR_S, rel=1e-15)
    assert total == pytest.approx(6.04745e10, rel=1e-6)
    assert e_base(Fleet((rpi(1, 1.0, 1.0),)))[0] == 31_536_000
    split = Fleet((rpi(225, name="a"), rpi(225, name="b")))
    assert e_base(split)[0] == pytest.approx(total, rel=1e-15)


def test_e_messages_class_examples():
    c = rpi()
    assert e_messages_class(c, RateProfile.constant(50)) == pytest.approx(4_810_816_800, rel=1e-12)
    assert e_messages_class(c, RateProfile.constant(0)) == 0.0
    one_day = RateProfile((100.0,) + (0.0,) * 364)
    c1 = rpi(1, curve=((100, 0.00445),))
    assert e_messages_class(c1, one_day) == pytest.approx(38_448, rel=1e-12)


def test_e_messages_total_examples():
    total, terms = e_messages_total(Fleet((rpi(),)), RateProfile.constant(50))
    assert total == pytest.approx(1.59 * 4_810_816_800, rel=1e-12)
    assert e_messages_total(Fleet((rpi(),)), RateProfile.constant(0))[0] == 0.0
    merged = Fleet((rpi(10, 1.0),))
    split = Fleet((rpi(4, 1.0, name="a"), rpi(6, 1.0, name="b")))
    prof = RateProfile((10.0, 50.0, 80.0))
    assert e_messages_total(split, prof)[0] == pytest.approx(e_messages_total(merged, prof)[0], rel=1e-15)


def test_worked_example():
    est = annual_total(Fleet((rpi(),)), RateProfile.constant(50))
    assert est.total_J == pytest.approx(68_123_687_160.320, rel=1e-3)
    assert est.total_kWh == pytest.approx(18923.25, rel=1e-3)
    assert est.total_J == est.e_base_J + est.e_messages_J
    assert est.classes[0].e_messages_it_J == pytest.approx(4_810_816_800, rel=1e-12)


def test_zero_profile_is_base_only():
    fleet = Fleet((rpi(),))
    est = annual_total(fleet, RateProfile.constant(0))
    assert est.total_J == e_base(fleet)[0]
    assert est.e_messages_J == 0.0


def test_doubling_nodes_doubles_total():
    prof = RateProfile((10.0, 75.0, 150.0, 0.0, 400.0))
    curve = ((50, 6.78e-3), (100, 4.45e-3), (200, 2.54e-3))
    a = annual_total(Fleet((rpi(7, curve=curve),)), prof)
    b = annual_total(Fleet((rpi(14, curve=curve),)), prof)
    assert b.total_J == 2 * a.total_J


def test_short_period_scales_base():
    fleet = Fleet((rpi(1, 1.0, 1.0),))
    assert annual_total(fleet, RateProfile.constant(0, days=10)).e_base_J == 864_000


def test_p_base_from_measurement():
    ref = ScenarioStats("reference", 50, 2.648, 2.494, 2.914, 0.107)
    assert p_base_from_measurement(ref, 0.03221) == pytest.approx(2.680131, abs=1e-3)
    assert p_base_from_measurement(ref, 0.0) == 2.648
    assert p_base_from_measurement(ScenarioStats("r", 1, 1.0, 1.0, 1.0, 0.0), 0.5) == 1.5


@pytest.mark.parametrize(
    "kwargs",
    [dict(pue=0.9), dict(p=0.0), dict(n=0)],
)
def test_class_invariants(kwargs):
    with pytest.raises(ConfigError):
        rpi(**kwargs)


def test_fleet_invariants():
    with pytest.raises(ConfigError):
        Fleet(())
    with pytest.raises(ConfigError):
        Fleet((rpi(), rpi()))


def test_profile_parsing():
    assert RateProfile.from_json({"constant_mps": 50}).days == 365
    assert RateProfile.from_json({"constant_mps": 5, "days": 3}).daily_rates_mps == (5.0, 5.0, 5.0)
    assert RateProfile.from_json([1, 2.5]).daily_rates_mps == (1.0, 2.5)
    for bad in ([-1], [], {"constant_mps": 1, "days": 0}, {"rate": 1}, "50"):
        with pytest.raises(ConfigError):
            RateProfile.from_json(bad)


def test_fleet_round_trip():
    fleet = Fleet((rpi(), rpi(3, 1.2, name="x86", curve=((10, 0.1), (100, 0.01)))))
    assert Fleet.from_dict(fleet.to_dict()) == fleet


# brute-force oracle -------------------------------------------------------------
#
# Inputs are dyadic rationals with short mantissas so every product is exact
# in binary floating point; the oracle then sums in exact rational arithmetic
# with a plain nested loop over (class, day) and must agree bit for bit.

KNOT_RATES = (16, 64, 256)


@st.composite
def dyadic_class(draw, name):
    energies = [Fraction(draw(st.integers(1, 64)), 1024) for _ in KNOT_RATES]
    return HardwareClass(
        name=name,
        pue=float(draw(st.sampled_from([Fraction(1), Fraction(5, 4), Fraction(3, 2), Fraction(2)]))),
        p_base_W=draw(st.integers(1, 64)) / 8,
        node_count=draw(st.integers(1, 50)),
        curve=PerMessageCurve(tuple((r, float(e)) for r, e in zip(KNOT_RATES, energies))),
    )


@st.composite
def dyadic_fleet(draw):
    k = draw(st.integers(1, 3))
    return Fleet(tuple(draw(dyadic_class(f"c{i}")) for i in range(k)))


# 0 (idle), knot rates, and rates past the last knot (clamped)
profile_rates = st.lists(st.sampled_from([0, 16, 64, 256, 512, 1024]), min_size=1, max_size=5)


def oracle_energy_at(curve, x):
    for r, e in curve.points:
        if r == x:
            return Fraction(e)
    if x > curve.points[-1][0]:
        return Fraction(curve.points[-1][1])
    raise AssertionError("oracle only handles knots and clamped rates")


def nested_loop_total(fleet, rates):
    days = len(rates)
    total = Fraction(0)
    for c in fleet.classes:
        pue, p, n = Fraction(c.pue), Fraction(c.p_base_W), c.node_count
        total += pue * p * n * 86400 * days
        for x in rates:
            if x:
                total += pue * n * oracle_energy_at(c.curve, x) * x * 86400
    return total


@given(dyadic_fleet(), profile_rates)
def test_matches_nested_loop_oracle_exactly(fleet, rates):
    est = annual_total(fleet, RateProfile(tuple(float(x) for x in rates)))
    assert est.total_J == float(nested_loop_total(fleet, rates))


# properties on general inputs ----------------------------------------------------

curve_st = st.lists(
    st.tuples(st.floats(0.5, 500), st.floats(1e-5, 1.0)), min_size=1, max_size=4, unique_by=lambda p: p[0]
).map(lambda pts: PerMessageCurve(tuple(sorted(pts))))


@st.composite
def general_class(draw, name):
    return HardwareClass(
        name, draw(st.floats(1.0, 3.0)), draw(st.floats(0.1, 500.0)), draw(st.integers(1, 1000)), draw(curve_st)
    )


general_fleet = st.integers(1, 3).flatmap(
    lambda k: st.tuples(*[general_class(f"c{i}") for i in range(k)]).map(Fleet)
)
general_profile = st.lists(st.floats(0, 1000), min_size=1, max_size=5).map(lambda r: RateProfile(tuple(r)))


@given(general_fleet, general_profile)
def test_estimate_bookkeeping(fleet, prof):
    est = annual_total(fleet, prof)
    assert est.total_J == est.e_base_J + est.e_messages_J
    assert est.e_base_J == math.fsum(c.e_base_J for c in est.classes)
    assert est.e_messages_J == math.fsum(c.e_messages_J for c in est.classes)


@given(general_fleet, general_profile)
def test_float_nested_loop_agrees(fleet, prof):
    total = 0.0
    for c in fleet.classes:
        total += c.pue * c.p_base_W * c.node_count * 86400 * prof.days
        for x in prof.daily_rates_mps:
            if x > 0:
                total += c.pue * c.node_count * interpolate_energy(c.curve, x) * x * 86400
    assert annual_total(fleet, prof).total_J == pytest.approx(total, rel=1e-12)


@given(general_class("c"), general_profile, st.randoms(use_true_random=False))
def test_day_order_invariance(c, prof, rnd):
    rates = list(prof.daily_rates_mps)
    rnd.shuffle(rates)
    assert e_messages_class(c, RateProfile(tuple(rates))) == e_messages_class(c, prof)


@given(general_class("c"), general_profile, st.integers(1, 999))
def test_split_class_additivity(c, prof, cut):
    n1 = max(1, min(c.node_count - 1, cut)) if c.node_count > 1 else None
    if n1 is None:
        return
    whole = annual_total(Fleet((c,)), prof)
    a = HardwareClass("a", c.pue, c.p_base_W, n1, c.curve)
    b = HardwareClass("b", c.pue, c.p_base_W, c.node_count - n1, c.curve)
    split = annual_total(Fleet((a, b)), prof)
    assert split.total_J == pytest.approx(whole.total_J, rel=1e-12)
    assert split.e_messages_J == pytest.approx(whole.e_messages_J, rel=1e-12)


@given(general_class("c"), general_profile, st.floats(0.1, 10))
def test_linear_in_base_power_and_pue(c, prof, k):
    base = annual_total(Fleet((c,)), prof)
    scaled_p = annual_total(Fleet((HardwareClass("c", c.pue, c.p_base_W * k, c.node_count, c.curve),)), prof)
    assert scaled_p.e_base_J == pytest.approx(base.e_base_J * k, rel=1e-12)
    assert scaled_p.e_messages_J == base.e_messages_J
    pue2 = min(c.pue * 2, 6.0)
    scaled_pue = annual_total(Fleet((HardwareClass("c", pue2, c.p_base_W, c.node_count, c.curve),)), prof)
    assert scaled_pue.total_J == pytest.approx(base.total_J * pue2 / c.pue, rel=1e-12)


nondecreasing_curve = st.lists(
    st.tuples(st.floats(0.5, 500), st.floats(1e-5, 1.0)), min_size=1, max_size=4, unique_by=lambda p: p[0]
).map(lambda pts: PerMessageCurve(tuple(zip(sorted(r for r, _ in pts), sorted(e for _, e in pts)))))


@given(nondecreasing_curve, general_profile, st.integers(0, 4), st.floats(0, 500))
def test_raising_a_day_never_lowers_total(curve, prof, day, bump):
    # energy and rate both nondecreasing, so their product is too
    c = HardwareClass("c", 1.3, 2.0, 17, curve)
    rates = list(prof.daily_rates_mps)
    day %= len(rates)
    before = annual_total(Fleet((c,)), prof).total_J
    rates[day] += bump
    after = annual_total(Fleet((c,)), RateProfile(tuple(rates))).total_J
    assert after >= before


def test_measured_curve_power_is_monotone_at_the_knots():
    pts = ((50, 6.78e-3), (100, 4.45e-3), (200, 2.54e-3))
    powers = [e * r for r, e in pts]
    assert powers == sorted(powers)

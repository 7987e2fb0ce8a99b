"""Driving-style feature catalog semantics."""
from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given, settings, strategies as st

from drivescore.features import (ACCEL_FEATURES, FEATURE_CSV_COLUMNS,
                                 FEATURE_NAMES, MODEL_FEATURE_NAMES, FeatureVector,
                                 Window, compute_features, compute_feature_table,
                                 feature_from_row, feature_to_row,
                                 is_holiday_class, lifetime_window,
                                 load_holiday_calendar, weekly_windows)
from drivescore.trips import HourlyRecord, Trip

UTC = timezone.utc
MON = datetime(2021, 6, 7, tzinfo=UTC)   # Monday
SUN = datetime(2021, 6, 6, tzinfo=UTC)


def rec(ts, km, mean_sp, max_sp, bands=None, counts=(0,) * 9, device="d1"):
    """HourlyRecord with all mileage in one band unless bands given."""
    if bands is None:
        bands = (0.0, km, 0.0, 0.0, 0.0)
    return HourlyRecord(device, ts, km, mean_sp, max_sp, *counts, *bands)


def trip(start, km, minutes, device="d1"):
    dur = minutes * 60.0
    return Trip(device, start, start + timedelta(seconds=dur), km, dur,
                km / dur * 3600.0)


class TestPerDayDenominators:
    """Per-day features divide by days covered by data, split by day class."""

    def test_day_class_split(self):
        hourly = [rec(MON.replace(hour=10), 30.0, 40.0, 80.0),
                  rec(SUN.replace(hour=23), 10.0, 15.0, 20.0,
                      bands=(10.0, 0.0, 0.0, 0.0, 0.0))]
        fv = compute_features(hourly, [], lifetime_window(hourly, []))
        assert fv.d_total_m == pytest.approx(40.0 / 2)
        assert fv.d_business_m == pytest.approx(30.0 / 1)
        assert fv.d_holi_m == pytest.approx(10.0 / 1)
        assert fv.day_m_pr == pytest.approx(100.0 * 30.0 / 40.0)
        assert fv.avg_sp == pytest.approx((30 * 40 + 10 * 15) / 40.0)
        assert fv.m_pr_below_20 == pytest.approx(100.0 * 10.0 / 40.0)
        assert fv.max_sp == 80.0
        assert "no_trips" in fv.quality_flags

    def test_jam_slices_use_all_covered_days(self):
        hourly = [rec(MON.replace(hour=8), 6.0, 30.0, 50.0),
                  rec(MON + timedelta(days=1, hours=12), 14.0, 50.0, 70.0),
                  rec(MON + timedelta(days=2, hours=12), 10.0, 50.0, 70.0)]
        fv = compute_features(hourly, [], lifetime_window(hourly, []))
        assert fv.d_morning_jam_m == pytest.approx(6.0 / 3)
        assert fv.max_mj_sp == 50.0
        assert fv.d_day_m == pytest.approx(30.0 / 3)


class TestTripShares:
    def test_length_buckets(self):
        trips = [trip(MON.replace(hour=9), 5.0, 20),
                 trip(MON.replace(hour=12), 25.0, 40),
                 trip(MON.replace(hour=15), 250.0, 150),
                 trip(MON.replace(hour=20), 420.0, 260)]
        fv = compute_features([], trips, lifetime_window([], trips))
        assert fv.below_10_pr == pytest.approx(25.0)
        assert fv.below_30_pr == pytest.approx(50.0)
        assert fv.over_200 == pytest.approx(50.0)
        assert fv.over_400 == pytest.approx(25.0)
        assert fv.avg_trip_mil == pytest.approx(700.0 / 4)
        assert fv.avg_trip_dur == pytest.approx((20 + 40 + 150 + 260) * 60 / 4)
        assert "no_mileage" in fv.quality_flags  # no hourly records

    def test_boundary_lengths_are_not_below(self):
        trips = [trip(MON.replace(hour=9), 10.0, 20),
                 trip(MON.replace(hour=12), 30.0, 40)]
        fv = compute_features([], trips, lifetime_window([], trips))
        assert fv.below_10_pr == 0.0
        assert fv.below_30_pr == pytest.approx(50.0)


def test_empty_window_returns_none():
    w = Window("weekly", MON, MON + timedelta(days=7))
    assert compute_features([], [], w) is None
    later = [rec(MON + timedelta(days=30), 5.0, 30.0, 40.0)]
    assert compute_features(later, [], w) is None


def test_no_mileage_never_divides_by_zero():
    hourly = [rec(MON.replace(hour=10), 0.0, 0.0, 0.0,
                  bands=(0.0,) * 5, counts=(3, 0, 0, 1, 0, 0, 0, 0, 0))]
    fv = compute_features(hourly, [], lifetime_window(hourly, []))
    assert "no_mileage" in fv.quality_flags
    assert fv.a1 == 0.0 and fv.d1 == 0.0
    assert fv.day_m_pr == 0.0 and fv.m_pr_below_20 == 0.0


def test_accel_rates_per_100km():
    hourly = [rec(MON.replace(hour=10), 50.0, 60.0, 90.0,
                  counts=(2, 1, 0, 4, 0, 0, 1, 0, 0))]
    fv = compute_features(hourly, [], lifetime_window(hourly, []))
    assert fv.a1 == pytest.approx(100.0 * 2 / 50.0)
    assert fv.a2 == pytest.approx(100.0 * 1 / 50.0)
    assert fv.d1 == pytest.approx(100.0 * 4 / 50.0)
    assert fv.s1 == pytest.approx(100.0 * 1 / 50.0)


class TestWindows:
    def test_weekly_windows_start_on_local_mondays(self):
        hourly = [rec(SUN.replace(hour=12), 5.0, 30.0, 40.0),
                  rec(MON.replace(hour=12), 5.0, 30.0, 40.0)]
        wins = weekly_windows(hourly, [], UTC)
        assert len(wins) == 2
        for w in wins:
            assert w.start.weekday() == 0
            assert w.start.hour == 0
            assert w.end - w.start == timedelta(days=7)

    def test_lifetime_window_spans_activity(self):
        hourly = [rec(MON, 5.0, 30.0, 40.0),
                  rec(MON + timedelta(days=40), 5.0, 30.0, 40.0)]
        w = lifetime_window(hourly, [])
        assert w.contains(hourly[0].hour_start)
        assert w.contains(hourly[1].hour_start)

    def test_lifetime_window_needs_activity(self):
        with pytest.raises(ValueError):
            lifetime_window([], [])

    def test_window_validation(self):
        with pytest.raises(ValueError):
            Window("monthly", MON, MON + timedelta(days=30))
        with pytest.raises(ValueError):
            Window("weekly", MON, MON)

    def test_weekly_table_one_row_per_active_week(self):
        hourly = [rec(MON.replace(hour=10), 5.0, 30.0, 40.0),
                  rec(MON + timedelta(days=14, hours=10), 5.0, 30.0, 40.0)]
        table = compute_feature_table(hourly, [], "weekly", frozenset(), UTC)
        assert len(table) == 2
        assert table[0].window.start + timedelta(days=14) == table[1].window.start

    def test_unknown_window_kind(self):
        with pytest.raises(ValueError):
            compute_feature_table([], [], "daily", frozenset(), UTC)


class TestHolidayCalendar:
    def test_weekends_are_holiday_class(self):
        assert is_holiday_class(date(2021, 6, 6), frozenset())
        assert not is_holiday_class(date(2021, 6, 7), frozenset())

    def test_calendar_file(self, tmp_path):
        p = tmp_path / "cal.txt"
        p.write_text("# national days\n2021-06-14\n\n2021-11-04  # comment\n")
        cal = load_holiday_calendar(p)
        assert cal == frozenset({date(2021, 6, 14), date(2021, 11, 4)})
        assert is_holiday_class(date(2021, 6, 14), cal)


def test_feature_row_round_trip():
    hourly = [rec(MON.replace(hour=10), 30.0, 40.0, 80.0,
                  counts=(1, 0, 0, 2, 0, 0, 0, 0, 1))]
    trips = [trip(MON.replace(hour=10), 30.0, 45)]
    fv = compute_features(hourly, trips, lifetime_window(hourly, trips))
    row = dict(zip(FEATURE_CSV_COLUMNS, (str(v) for v in feature_to_row(fv))))
    back = feature_from_row(row)
    assert back.device_id == fv.device_id
    assert back.quality_flags == fv.quality_flags
    assert back.as_dict() == fv.as_dict()


def test_catalog_layout():
    assert len(FEATURE_NAMES) == 38
    assert len(MODEL_FEATURE_NAMES) == 35
    assert set(ACCEL_FEATURES) <= set(MODEL_FEATURE_NAMES)
    assert not set(("sp1", "sp2", "sp3")) & set(MODEL_FEATURE_NAMES)


_hours = st.integers(min_value=0, max_value=23)
_days = st.integers(min_value=0, max_value=6)
_km = st.floats(min_value=0.0, max_value=400.0, allow_nan=False)


@st.composite
def activity(draw):
    hourly = []
    seen = set()
    for _ in range(draw(st.integers(min_value=1, max_value=8))):
        ts = MON + timedelta(days=draw(_days), hours=draw(_hours))
        if ts in seen:
            continue
        seen.add(ts)
        bands = tuple(draw(_km) for _ in range(5))
        mean_sp = draw(st.floats(min_value=0.0, max_value=150.0))
        max_sp = mean_sp + draw(st.floats(min_value=0.0, max_value=100.0))
        counts = tuple(draw(st.integers(min_value=0, max_value=20))
                       for _ in range(9))
        hourly.append(HourlyRecord("d1", ts, sum(bands), mean_sp, max_sp,
                                   *counts, *bands))
    trips = [trip(MON + timedelta(days=draw(_days), hours=draw(_hours)),
                  draw(st.floats(min_value=0.1, max_value=600.0)),
                  draw(st.integers(min_value=2, max_value=300)))
             for _ in range(draw(st.integers(min_value=0, max_value=5)))]
    return hourly, trips


@settings(deadline=None, max_examples=60)
@given(activity())
def test_feature_invariants(data):
    hourly, trips = data
    fv = compute_features(hourly, trips, lifetime_window(hourly, trips))
    assert fv.below_10_pr <= fv.below_30_pr + 1e-12
    assert fv.over_400 <= fv.over_200 + 1e-12
    assert fv.m_pr_below_20 <= fv.m_pr_below_60 + 1e-12
    for name in ("below_10_pr", "below_30_pr", "over_200", "over_400",
                 "day_m_pr", "ej_m_pr", "m_pr_below_20", "m_pr_below_60",
                 "m_pr_over_100", "m_pr_over_130"):
        v = getattr(fv, name)
        assert 0.0 <= v <= 100.0 + 1e-9, name
    for name in ("max_ej_sp", "max_mj_sp", "max_n_sp"):
        assert getattr(fv, name) <= fv.max_sp
    assert fv.mileage == pytest.approx(sum(r.mileage_km for r in hourly))
    assert fv.d_day_m <= fv.d_total_m + 1e-9
    for name in ACCEL_FEATURES:
        assert getattr(fv, name) >= 0.0

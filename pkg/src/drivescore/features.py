"""Driving-style feature catalog computed per device over a time window.

Three indicator groups: mileage structure (how much, when, in what trip
lengths), speed profile (averages, maxima by time slice, speed-band shares)
and harsh-manoeuvre frequencies per 100 km.  Event counts per G-band come in
from hourly records; the bands themselves are defined in ``bands``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from datetime import date, datetime, timedelta, timezone, tzinfo
from typing import Iterable, Sequence

from .trips import HourlyRecord, Trip

# Local-clock slices, half-open hour ranges.
DAYTIME_HOURS = range(7, 19)
MORNING_JAM_HOURS = range(8, 10)
EVENING_JAM_HOURS = range(18, 20)
NIGHT_HOURS = range(0, 6)

TRIP_SHORT_KM = (10.0, 30.0)
TRIP_LONG_KM = (200.0, 400.0)

MILEAGE_FEATURES = ("mileage", "trips_day", "below_10_pr", "below_30_pr",
                    "over_200", "over_400", "d_total_m", "avg_trip_mil",
                    "avg_trip_dur", "d_business_m", "d_day_m",
                    "d_evening_jam_m", "d_morning_jam_m", "d_holi_m",
                    "d_night_m", "day_m_pr", "ej_m_pr")
SPEED_FEATURES = ("avg_sp", "max_sp", "max_ej_sp", "max_mj_sp", "max_n_sp",
                  "m_pr_below_20", "m_pr_below_60", "m_pr_over_100",
                  "m_pr_over_130")
ACCEL_FEATURES = ("a1", "a2", "a3", "d1", "d2", "d3", "s1", "s2", "s3")
SPEEDING_FEATURES = ("sp1", "sp2", "sp3")

FEATURE_NAMES = MILEAGE_FEATURES + SPEED_FEATURES + ACCEL_FEATURES + SPEEDING_FEATURES
MODEL_FEATURE_NAMES = MILEAGE_FEATURES + SPEED_FEATURES + ACCEL_FEATURES

FEATURE_CSV_COLUMNS = ("device", "window_kind", "window_start", "quality_flags") + FEATURE_NAMES

WINDOW_KINDS = ("weekly", "lifetime")


@dataclass(frozen=True)
class Window:
    kind: str
    start: datetime
    end: datetime

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind: {self.kind!r}")
        if self.end <= self.start:
            raise ValueError("window must end after it starts")

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end


@dataclass(frozen=True)
class FeatureVector:
    device_id: str
    window: Window
    quality_flags: tuple[str, ...]

    mileage: float
    trips_day: float
    below_10_pr: float
    below_30_pr: float
    over_200: float
    over_400: float
    d_total_m: float
    avg_trip_mil: float
    avg_trip_dur: float
    d_business_m: float
    d_day_m: float
    d_evening_jam_m: float
    d_morning_jam_m: float
    d_holi_m: float
    d_night_m: float
    day_m_pr: float
    ej_m_pr: float

    avg_sp: float
    max_sp: float
    max_ej_sp: float
    max_mj_sp: float
    max_n_sp: float
    m_pr_below_20: float
    m_pr_below_60: float
    m_pr_over_100: float
    m_pr_over_130: float

    a1: float
    a2: float
    a3: float
    d1: float
    d2: float
    d3: float
    s1: float
    s2: float
    s3: float

    sp1: float = 0.0
    sp2: float = 0.0
    sp3: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FEATURE_NAMES}


_NUMERIC_FIELDS = tuple(f.name for f in fields(FeatureVector)
                        if f.name not in ("device_id", "window", "quality_flags"))
assert _NUMERIC_FIELDS == FEATURE_NAMES


def load_holiday_calendar(path) -> frozenset[date]:
    """Read a holiday calendar file: one YYYY-MM-DD per line, # comments."""
    days = set()
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                days.add(date.fromisoformat(line))
    return frozenset(days)


def is_holiday_class(day: date, calendar: frozenset[date] | set[date]) -> bool:
    """Weekends and calendar holidays form the holiday day class."""
    return day.weekday() >= 5 or day in calendar


def _share(part: float, whole: float) -> float:
    return 100.0 * part / whole if whole > 0 else 0.0


def _per_day(km: float, days: int) -> float:
    return km / days if days > 0 else 0.0


def compute_features(hourly: Sequence[HourlyRecord], trips: Sequence[Trip],
                     window: Window, calendar: frozenset[date] | set[date] = frozenset(),
                     ) -> FeatureVector | None:
    """Compute the full indicator vector for one device over one window.

    Hourly records select into the window by their hour start, trips by
    their start instant.  Ratio features never divide by zero: with no trips
    the trip-share block is 0 and the vector is flagged ``no_trips``; with no
    mileage every share and per-100km frequency is 0 under ``no_mileage``.
    Returns None when the window saw no activity at all.
    """
    recs = [r for r in hourly if window.contains(r.hour_start)]
    trs = [t for t in trips if window.contains(t.start)]
    if not recs and not trs:
        return None
    device_id = recs[0].device_id if recs else trs[0].device_id

    flags = set()
    total_km = sum(r.mileage_km for r in recs)
    if total_km <= 0:
        flags.add("no_mileage")
    if not trs:
        flags.add("no_trips")

    covered: set[date] = {r.hour_start.date() for r in recs}
    n_days = len(covered)
    n_business = sum(1 for d in covered if not is_holiday_class(d, calendar))
    n_holi = n_days - n_business

    slice_km = {"day": 0.0, "mj": 0.0, "ej": 0.0, "night": 0.0,
                "business": 0.0, "holi": 0.0}
    band_km = [0.0] * 5
    counts = [0] * 9
    speed_wsum = 0.0
    max_sp = max_ej = max_mj = max_n = 0.0
    for r in recs:
        h = r.hour_start.hour
        if h in DAYTIME_HOURS:
            slice_km["day"] += r.mileage_km
        if h in MORNING_JAM_HOURS:
            slice_km["mj"] += r.mileage_km
            max_mj = max(max_mj, r.max_speed_kph)
        if h in EVENING_JAM_HOURS:
            slice_km["ej"] += r.mileage_km
            max_ej = max(max_ej, r.max_speed_kph)
        if h in NIGHT_HOURS:
            slice_km["night"] += r.mileage_km
            max_n = max(max_n, r.max_speed_kph)
        if is_holiday_class(r.hour_start.date(), calendar):
            slice_km["holi"] += r.mileage_km
        else:
            slice_km["business"] += r.mileage_km
        max_sp = max(max_sp, r.max_speed_kph)
        speed_wsum += r.mileage_km * r.mean_speed_kph
        for i, km in enumerate(r.band_mileage()):
            band_km[i] += km
        for i, n in enumerate(r.accel_counts()):
            counts[i] += n

    n_trips = len(trs)
    if n_trips:
        short10 = sum(1 for t in trs if t.mileage_km < TRIP_SHORT_KM[0])
        short30 = sum(1 for t in trs if t.mileage_km < TRIP_SHORT_KM[1])
        long200 = sum(1 for t in trs if t.mileage_km > TRIP_LONG_KM[0])
        long400 = sum(1 for t in trs if t.mileage_km > TRIP_LONG_KM[1])
        avg_trip_mil = sum(t.mileage_km for t in trs) / n_trips
        avg_trip_dur = sum(t.duration_s for t in trs) / n_trips
        below_10 = _share(short10, n_trips)
        below_30 = _share(short30, n_trips)
        over_200 = _share(long200, n_trips)
        over_400 = _share(long400, n_trips)
    else:
        avg_trip_mil = avg_trip_dur = 0.0
        below_10 = below_30 = over_200 = over_400 = 0.0

    per100 = [100.0 * n / total_km if total_km > 0 else 0.0 for n in counts]

    return FeatureVector(
        device_id=device_id,
        window=window,
        quality_flags=tuple(sorted(flags)),
        mileage=total_km,
        trips_day=n_trips / n_days if n_days else 0.0,
        below_10_pr=below_10,
        below_30_pr=below_30,
        over_200=over_200,
        over_400=over_400,
        d_total_m=_per_day(total_km, n_days),
        avg_trip_mil=avg_trip_mil,
        avg_trip_dur=avg_trip_dur,
        d_business_m=_per_day(slice_km["business"], n_business),
        d_day_m=_per_day(slice_km["day"], n_days),
        d_evening_jam_m=_per_day(slice_km["ej"], n_days),
        d_morning_jam_m=_per_day(slice_km["mj"], n_days),
        d_holi_m=_per_day(slice_km["holi"], n_holi),
        d_night_m=_per_day(slice_km["night"], n_days),
        day_m_pr=_share(slice_km["day"], total_km),
        ej_m_pr=_share(slice_km["ej"], total_km),
        avg_sp=speed_wsum / total_km if total_km > 0 else 0.0,
        max_sp=max_sp,
        max_ej_sp=max_ej,
        max_mj_sp=max_mj,
        max_n_sp=max_n,
        m_pr_below_20=_share(band_km[0], total_km),
        m_pr_below_60=_share(band_km[0] + band_km[1], total_km),
        m_pr_over_100=_share(band_km[3] + band_km[4], total_km),
        m_pr_over_130=_share(band_km[4], total_km),
        a1=per100[0], a2=per100[1], a3=per100[2],
        d1=per100[3], d2=per100[4], d3=per100[5],
        s1=per100[6], s2=per100[7], s3=per100[8],
    )


def lifetime_window(hourly: Sequence[HourlyRecord], trips: Sequence[Trip]) -> Window:
    starts = [r.hour_start for r in hourly] + [t.start for t in trips]
    if not starts:
        raise ValueError("no activity to derive a window from")
    lo, hi = min(starts), max(starts)
    return Window("lifetime", lo, hi + timedelta(hours=1))


def weekly_windows(hourly: Sequence[HourlyRecord], trips: Sequence[Trip],
                   tz: tzinfo = timezone.utc) -> list[Window]:
    """ISO-week windows (Monday 00:00 local) covering all observed activity."""
    starts = [r.hour_start for r in hourly] + [t.start for t in trips]
    if not starts:
        return []
    days = sorted({ts.astimezone(tz).date() for ts in starts})
    weeks = sorted({d - timedelta(days=d.weekday()) for d in days})
    out = []
    for monday in weeks:
        start = datetime(monday.year, monday.month, monday.day, tzinfo=tz)
        out.append(Window("weekly", start, start + timedelta(days=7)))
    return out


def compute_feature_table(hourly: Iterable[HourlyRecord], trips: Iterable[Trip],
                          window_kind: str, calendar: frozenset[date] | set[date] = frozenset(),
                          tz: tzinfo = timezone.utc) -> list[FeatureVector]:
    """Feature vectors for every device (and, if weekly, every active week)."""
    if window_kind not in WINDOW_KINDS:
        raise ValueError(f"unknown window kind: {window_kind!r}")
    by_dev_h: dict[str, list[HourlyRecord]] = {}
    by_dev_t: dict[str, list[Trip]] = {}
    for r in hourly:
        by_dev_h.setdefault(r.device_id, []).append(r)
    for t in trips:
        by_dev_t.setdefault(t.device_id, []).append(t)
    out: list[FeatureVector] = []
    for dev in sorted(set(by_dev_h) | set(by_dev_t)):
        h = by_dev_h.get(dev, [])
        t = by_dev_t.get(dev, [])
        if window_kind == "lifetime":
            windows = [lifetime_window(h, t)]
        else:
            windows = weekly_windows(h, t, tz)
        for w in windows:
            fv = compute_features(h, t, w, calendar)
            if fv is not None:
                out.append(fv)
    return out


def feature_to_row(fv: FeatureVector) -> list:
    row = [fv.device_id, fv.window.kind, fv.window.start.isoformat(),
           ";".join(fv.quality_flags)]
    row.extend(getattr(fv, name) for name in FEATURE_NAMES)
    return row


def feature_from_row(row: dict) -> FeatureVector:
    start = datetime.fromisoformat(row["window_start"])
    kind = row["window_kind"]
    end = start + (timedelta(days=7) if kind == "weekly" else timedelta(days=36500))
    flags = tuple(f for f in row["quality_flags"].split(";") if f)
    values = {name: float(row[name]) for name in FEATURE_NAMES}
    return FeatureVector(device_id=row["device"], window=Window(kind, start, end),
                         quality_flags=flags, **values)

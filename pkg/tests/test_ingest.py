"""JSONL event parsing, validation and round-tripping."""
import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from drivescore.ingest import (AXES, MAX_ABS_ACCEL_G, SUSPECT_SPEED_KPH,
                               DeviceLog, EventPackage, EventValidationError,
                               event_from_obj, event_to_obj, parse_event_log,
                               serialize_logs, validate_log)
from conftest import jsonl, parse_objs

UTC = timezone.utc


def ev(kind, ts="2021-05-03T10:00:00Z", device="d1", **extra):
    obj = {"device": device, "ts": ts, "kind": kind}
    obj.update(extra)
    return obj


def pos(ts, lon, lat=0.0, device="d1"):
    return ev("position", ts, device, lat=lat, lon=lon)


class TestEventFromObj:
    def test_position(self):
        e = event_from_obj(pos("2021-05-03T10:00:00Z", 30.5, lat=59.9))
        assert e.kind == "position"
        assert e.latitude == 59.9 and e.longitude == 30.5
        assert e.timestamp == datetime(2021, 5, 3, 10, tzinfo=UTC)

    def test_ignition_carries_no_payload(self):
        with pytest.raises(EventValidationError):
            event_from_obj(ev("ignition_on", speed_kph=10.0))

    @pytest.mark.parametrize("bad", [
        {"ts": "2021-05-03T10:00:00Z", "kind": "position", "lat": 0.0, "lon": 0.0},
        ev("position"),                          # no coordinates
        ev("speed"),                             # no speed_kph
        ev("speed", speed_kph=-3.0),
        ev("acceleration", accel_g=0.4),         # no axis
        ev("acceleration", axis="vertical", accel_g=0.4),
        ev("acceleration", axis="lateral"),      # no magnitude
        ev("warp_drive"),
        ev("position", ts="yesterday", lat=0.0, lon=0.0),
    ])
    def test_rejects(self, bad):
        with pytest.raises(EventValidationError):
            event_from_obj(bad)

    def test_accel_magnitude_cap(self):
        ok = ev("acceleration", axis="longitudinal", accel_g=MAX_ABS_ACCEL_G)
        assert event_from_obj(ok).accel_g == MAX_ABS_ACCEL_G
        with pytest.raises(EventValidationError):
            event_from_obj(ev("acceleration", axis="longitudinal",
                              accel_g=MAX_ABS_ACCEL_G + 0.001))


class TestParseEventLog:
    def test_line_bookkeeping(self):
        lines = [json.dumps(pos("2021-05-03T10:00:00Z", 1.0)),
                 "{not json",
                 json.dumps(pos("2021-05-03T10:01:00Z", 1.01)),
                 json.dumps(pos("2021-05-03T10:01:00Z", 1.01)),  # duplicate
                 json.dumps(ev("speed"))]                        # invalid
        result = parse_event_log(lines)
        assert result.n_lines == 5
        assert result.n_events == 2
        assert [s.line_no for s in result.skipped] == [2, 4, 5]
        assert result.n_events + len(result.skipped) == result.n_lines

    def test_sorts_within_device(self):
        objs = [pos("2021-05-03T10:05:00Z", 1.05),
                pos("2021-05-03T10:00:00Z", 1.0),
                pos("2021-05-03T10:02:00Z", 1.02)]
        log = parse_objs(objs).logs[0]
        stamps = [e.timestamp for e in log.events]
        assert stamps == sorted(stamps)

    def test_splits_by_device(self):
        objs = [pos("2021-05-03T10:00:00Z", 1.0, device="a"),
                pos("2021-05-03T10:00:00Z", 1.0, device="b")]
        result = parse_objs(objs)
        assert sorted(log.device_id for log in result.logs) == ["a", "b"]

    def test_serialize_round_trip(self):
        objs = [ev("ignition_on", "2021-05-03T10:00:00Z"),
                pos("2021-05-03T10:00:30Z", 1.0),
                ev("speed", "2021-05-03T10:01:00Z", speed_kph=55.0),
                ev("acceleration", "2021-05-03T10:01:30Z",
                   axis="lateral", accel_g=0.42),
                ev("ignition_off", "2021-05-03T10:02:00Z")]
        first = parse_objs(objs)
        text = serialize_logs(first.logs)
        second = parse_event_log(text.splitlines())
        assert not second.skipped
        assert second.logs[0].events == first.logs[0].events


_ts = st.datetimes(min_value=datetime(2019, 1, 1),
                   max_value=datetime(2022, 12, 31)).map(
    lambda d: d.replace(microsecond=0, tzinfo=UTC))
_lat = st.floats(min_value=-90, max_value=90, allow_nan=False)
_lon = st.floats(min_value=-180, max_value=180, allow_nan=False)


@st.composite
def event_packages(draw):
    kind = draw(st.sampled_from(("ignition_on", "ignition_off", "position",
                                 "speed", "acceleration")))
    device = draw(st.text(alphabet="abc123", min_size=1, max_size=6))
    ts = draw(_ts)
    if kind == "position":
        return EventPackage(device, ts, kind, latitude=draw(_lat),
                            longitude=draw(_lon))
    if kind == "speed":
        return EventPackage(device, ts, kind,
                            speed_kph=draw(st.floats(min_value=0, max_value=400,
                                                     allow_nan=False)))
    if kind == "acceleration":
        return EventPackage(device, ts, kind, axis=draw(st.sampled_from(sorted(AXES))),
                            accel_g=draw(st.floats(min_value=-24, max_value=24,
                                                   allow_nan=False)))
    return EventPackage(device, ts, kind)


@given(event_packages())
def test_obj_round_trip_is_identity(pkg):
    assert event_from_obj(json.loads(json.dumps(event_to_obj(pkg)))) == pkg


class TestValidateLog:
    def _log(self, objs):
        return parse_objs(objs).logs[0]

    def test_clean(self):
        log = self._log([ev("ignition_on", "2021-05-03T10:00:00Z"),
                         pos("2021-05-03T10:01:00Z", 1.0),
                         ev("ignition_off", "2021-05-03T10:02:00Z")])
        assert validate_log(log).is_clean

    def test_double_ignition_on(self):
        log = self._log([ev("ignition_on", "2021-05-03T10:00:00Z"),
                         ev("ignition_on", "2021-05-03T10:30:00Z"),
                         ev("ignition_off", "2021-05-03T11:00:00Z")])
        codes = [i.code for i in validate_log(log).issues]
        assert "unterminated_trip" in codes

    def test_unmatched_ignition_off(self):
        log = self._log([pos("2021-05-03T10:00:00Z", 1.0),
                         ev("ignition_off", "2021-05-03T10:02:00Z")])
        codes = [i.code for i in validate_log(log).issues]
        assert "unmatched_ignition_off" in codes

    def test_suspect_speed_flagged_not_dropped(self):
        log = self._log([ev("speed", "2021-05-03T10:00:00Z",
                            speed_kph=SUSPECT_SPEED_KPH + 50)])
        report = validate_log(log)
        assert [i.code for i in report.issues] == ["suspect_speed"]
        assert len(log.events) == 1

    def test_never_ends(self):
        log = self._log([ev("ignition_on", "2021-05-03T10:00:00Z"),
                         pos("2021-05-03T10:01:00Z", 1.0)])
        codes = [i.code for i in validate_log(log).issues]
        assert "unterminated_trip" in codes


def test_device_log_requires_events():
    with pytest.raises(ValueError):
        DeviceLog.from_events("d1", [])


def test_jsonl_helper_ends_with_newline():
    assert jsonl([{"a": 1}]).endswith("\n")

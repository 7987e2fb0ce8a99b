"""Command-line pipeline driver.

Subcommands compose the library modules through files only: parse,
aggregate, features, label, fit, score, premium, evaluate, ablate, report,
synth.  Every artifact carries a provenance header (tool version, seed,
input digests) and is written atomically, so identical inputs and seeds
reproduce identical bytes.

Exit codes: 0 success, 2 missing input file, 3 estimation failure
(separation, collinearity, single-class target), 4 malformed configuration,
1 any other data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import timezone
from importlib import resources
from pathlib import Path
from zoneinfo import ZoneInfo

from . import __version__
from .evaluation import (AblationResult, DegenerateLabelsError, SplitSpec,
                         ablation_compare, correlation_matrix,
                         descriptive_stats, evaluate_model)
from .features import (ACCEL_FEATURES, FEATURE_CSV_COLUMNS, MILEAGE_FEATURES,
                       MODEL_FEATURE_NAMES, SPEED_FEATURES, WINDOW_KINDS,
                       compute_feature_table, feature_from_row, feature_to_row,
                       load_holiday_calendar)
from .fileio import (atomic_write_text, provenance_line, read_csv_rows,
                     render_csv, sha256_digest)
from .glm import (CollinearityError, DesignMatrix, SeparationError,
                  SingleClassError, backward_eliminate, compute_premium,
                  load_reference_models, model_from_dict, model_to_dict,
                  predict_proba)
from .ingest import (EventValidationError, parse_event_file, serialize_logs,
                     validate_log)
from .labeling import (CLAIMS_CSV_COLUMNS, LABELS_CSV_COLUMNS, TARGETS,
                       ClaimValidationError, build_targets, claim_from_row,
                       classify_severity)
from .synthgen import SynthConfig, generate_population, iter_event_logs
from .trips import (DEFAULT_GAP_THRESHOLD_S, HOURLY_CSV_COLUMNS,
                    TRIP_CSV_COLUMNS, aggregate_hourly, hourly_from_row,
                    hourly_to_row, segment_trips, trip_from_row, trip_to_row)

FEATURE_GROUPS = {"accel": ACCEL_FEATURES, "speed": SPEED_FEATURES,
                  "mileage": MILEAGE_FEATURES}

REFERENCE_MODEL_TOKEN = "paper-reference"


KNOWN_CONFIG_KEYS = frozenset({
    "out_dir", "tz", "gap_threshold_s", "window", "holidays", "alpha",
    "test_fraction", "seed", "stratify", "loss", "admin", "margin",
    "group", "n", "weeks",
})


class ConfigError(ValueError):
    pass


class InputMissingError(FileNotFoundError):
    pass


def load_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` config file; # starts a comment."""
    p = Path(path)
    if not p.exists():
        raise InputMissingError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        if key not in KNOWN_CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = value
    return out


def _opt(ns, key: str, cast, default):
    """Flag value if given, else config value, else default; flags win."""
    v = getattr(ns, key.replace("-", "_"), None)
    if v is not None:
        return v
    raw = ns._config.get(key)
    if raw is None:
        return default
    try:
        if cast is bool:
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r}: bad value {raw!r} ({exc})") from None


def _require(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise InputMissingError(f"{what} not found: {p}")
    return p


def _tzinfo(name: str):
    if name.upper() == "UTC":
        return timezone.utc
    try:
        return ZoneInfo(name)
    except Exception:
        raise ConfigError(f"unknown timezone: {name!r}") from None


def _calendar(ns):
    spec = _opt(ns, "holidays", str, "default")
    if spec == "none":
        return frozenset()
    if spec == "default":
        with resources.as_file(resources.files("drivescore.data")
                               .joinpath("holidays_ru.txt")) as p:
            return load_holiday_calendar(p)
    return load_holiday_calendar(_require(spec, "holiday calendar"))


def _provenance_obj(seed: int | None, inputs: dict[str, str]) -> dict:
    obj: dict = {"tool_version": __version__}
    if seed is not None:
        obj["seed"] = seed
    if inputs:
        obj["inputs"] = {k: f"sha256:{v}" for k, v in inputs.items()}
    return obj


def _write_json(path: Path, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def _read_features(path: Path):
    _, rows = read_csv_rows(path)
    return [feature_from_row(r) for r in rows]


def _read_claims(path: Path):
    _, rows = read_csv_rows(path)
    return [claim_from_row(r) for r in rows]


# ---------------------------------------------------------------- commands

def cmd_parse(ns) -> int:
    events_path = _require(ns.events, "events file")
    result = parse_event_file(events_path)
    reports = {log.device_id: validate_log(log) for log in
               sorted(result.logs, key=lambda l: l.device_id)}
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    digest = sha256_digest(events_path)
    atomic_write_text(out_dir / "parsed.jsonl",
                      serialize_logs(sorted(result.logs, key=lambda l: l.device_id)))
    _write_json(out_dir / "parse_report.json", {
        "n_lines": result.n_lines,
        "n_events": result.n_events,
        "n_devices": len(result.logs),
        "skipped": [{"line": s.line_no, "reason": s.reason} for s in result.skipped],
        "validation": {dev: [{"code": i.code, "message": i.message} for i in rep.issues]
                       for dev, rep in reports.items() if rep.issues},
        "provenance": _provenance_obj(None, {"events": digest}),
    })
    print(f"parsed {result.n_events} events from {result.n_lines} lines "
          f"({len(result.skipped)} skipped, {len(result.logs)} devices)")
    return 0


def cmd_aggregate(ns) -> int:
    events_path = _require(ns.events, "events file")
    tz = _tzinfo(_opt(ns, "tz", str, "UTC"))
    gap = _opt(ns, "gap_threshold_s", float, DEFAULT_GAP_THRESHOLD_S)
    result = parse_event_file(events_path)
    hourly_rows, trip_rows = [], []
    for log in sorted(result.logs, key=lambda l: l.device_id):
        trips = segment_trips(log, gap)
        for t in trips:
            trip_rows.append(trip_to_row(t))
        for rec in aggregate_hourly(log, trips, tz):
            hourly_rows.append(hourly_to_row(rec))
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    prov = provenance_line(None, {"events": sha256_digest(events_path)})
    atomic_write_text(out_dir / "hourly.csv",
                      render_csv(HOURLY_CSV_COLUMNS, hourly_rows, prov))
    atomic_write_text(out_dir / "trips.csv",
                      render_csv(TRIP_CSV_COLUMNS, trip_rows, prov))
    print(f"wrote {len(hourly_rows)} hourly records and {len(trip_rows)} trips")
    return 0


def cmd_features(ns) -> int:
    hourly_path = _require(ns.hourly, "hourly CSV")
    trips_path = _require(ns.trips, "trips CSV")
    window = _opt(ns, "window", str, "lifetime")
    if window not in WINDOW_KINDS:
        raise ConfigError(f"window must be one of {WINDOW_KINDS}, got {window!r}")
    tz = _tzinfo(_opt(ns, "tz", str, "UTC"))
    calendar = _calendar(ns)
    _, hourly_rows = read_csv_rows(hourly_path)
    _, trip_rows = read_csv_rows(trips_path)
    hourly = [hourly_from_row(r) for r in hourly_rows]
    trips = [trip_from_row(r) for r in trip_rows]
    table = compute_feature_table(hourly, trips, window, calendar, tz)
    prov = provenance_line(None, {"hourly": sha256_digest(hourly_path),
                                  "trips": sha256_digest(trips_path)})
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    atomic_write_text(out_dir / "features.csv",
                      render_csv(FEATURE_CSV_COLUMNS,
                                 [feature_to_row(fv) for fv in table], prov))
    print(f"wrote {len(table)} feature vectors ({window} windows)")
    return 0


def cmd_label(ns) -> int:
    claims_path = _require(ns.claims, "claims CSV")
    claims = _read_claims(claims_path)
    rows = [[c.device_id, classify_severity(c)] for c in claims]
    prov = provenance_line(None, {"claims": sha256_digest(claims_path)})
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    atomic_write_text(out_dir / "labels.csv",
                      render_csv(LABELS_CSV_COLUMNS, rows, prov))
    print(f"labeled {len(rows)} claims")
    return 0


def _constant_columns(dicts, names):
    out = []
    for n in names:
        vals = {d[n] for d in dicts}
        if len(vals) <= 1:
            out.append(n)
    return out


def _build_design(features, claims, target):
    devices = [fv.device_id for fv in features]
    y = build_targets(claims, devices, target)
    dicts = [fv.as_dict() for fv in features]
    dropped = _constant_columns(dicts, MODEL_FEATURE_NAMES)
    kept = tuple(n for n in MODEL_FEATURE_NAMES if n not in dropped)
    return DesignMatrix.from_rows(dicts, y, kept, devices), dropped


def _eval_report_csv(reports, prov):
    header = ("target", "auc_in_sample", "auc_out_of_sample", "mcfadden_r2",
              "n_train", "n_test", "seed", "note")
    rows = [[r.target, r.auc_in_sample,
             "" if r.auc_out_of_sample is None else r.auc_out_of_sample,
             r.mcfadden_r2, r.n_train, r.n_test, r.seed, r.note]
            for r in reports]
    return render_csv(header, rows, prov)


def cmd_fit(ns) -> int:
    features_path = _require(ns.features, "features CSV")
    claims_path = _require(ns.claims, "claims CSV")
    alpha = _opt(ns, "alpha", float, 0.05)
    spec = SplitSpec(test_fraction=_opt(ns, "test_fraction", float, 0.10),
                     seed=_opt(ns, "seed", int, 0),
                     stratify=_opt(ns, "stratify", bool, False))
    features = _read_features(features_path)
    claims = _read_claims(claims_path)
    inputs = {"features": sha256_digest(features_path),
              "claims": sha256_digest(claims_path)}
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    reports = []
    for target in TARGETS:
        design, dropped = _build_design(features, claims, target)
        model = backward_eliminate(design, alpha, target=target)
        selected = design.drop([n for n in design.feature_names
                                if n not in model.feature_names])
        report, _ = evaluate_model(selected, target, spec)
        reports.append(report)
        payload = model_to_dict(model)
        payload["alpha"] = alpha
        payload["dropped_columns"] = dropped
        payload["provenance"] = _provenance_obj(spec.seed, inputs)
        _write_json(out_dir / f"model_{target}.json", payload)
    atomic_write_text(out_dir / "eval_report.csv",
                      _eval_report_csv(reports, provenance_line(spec.seed, inputs)))
    kept = {r.target: r for r in reports}
    for target in TARGETS:
        r = kept[target]
        out = "n/a" if r.auc_out_of_sample is None else f"{r.auc_out_of_sample:.3f}"
        print(f"{target}: auc_in={r.auc_in_sample:.3f} auc_out={out} "
              f"r2={r.mcfadden_r2:.4f}")
    return 0


def cmd_evaluate(ns) -> int:
    features_path = _require(ns.features, "features CSV")
    claims_path = _require(ns.claims, "claims CSV")
    alpha = _opt(ns, "alpha", float, 0.05)
    spec = SplitSpec(test_fraction=_opt(ns, "test_fraction", float, 0.10),
                     seed=_opt(ns, "seed", int, 0),
                     stratify=_opt(ns, "stratify", bool, False))
    features = _read_features(features_path)
    claims = _read_claims(claims_path)
    inputs = {"features": sha256_digest(features_path),
              "claims": sha256_digest(claims_path)}
    reports = []
    for target in TARGETS:
        design, _ = _build_design(features, claims, target)
        model = backward_eliminate(design, alpha, target=target)
        selected = design.drop([n for n in design.feature_names
                                if n not in model.feature_names])
        report, _ = evaluate_model(selected, target, spec)
        reports.append(report)
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    atomic_write_text(out_dir / "eval_report.csv",
                      _eval_report_csv(reports, provenance_line(spec.seed, inputs)))
    print(f"wrote eval_report.csv for {len(reports)} targets")
    return 0


def _load_scoring_model(ns):
    """FittedModel from a JSON file, or the published bundle by token."""
    if ns.model == REFERENCE_MODEL_TOKEN:
        target = ns.target or "any"
        if target not in TARGETS:
            raise ConfigError(f"target must be one of {TARGETS}, got {target!r}")
        bundle = load_reference_models()
        model = bundle[target]
        if model.non_scorable:
            print(f"note: reference model {target!r} coefficients for "
                  f"{', '.join(model.non_scorable)} rounded to zero in print "
                  "and contribute nothing to scores", file=sys.stderr)
        raw = resources.files("drivescore.data").joinpath("reference_models.json").read_bytes()
        return model, hashlib.sha256(raw).hexdigest()
    path = _require(ns.model, "model file")
    payload = json.loads(path.read_text(encoding="utf-8"))
    return model_from_dict(payload), sha256_digest(path)


def cmd_score(ns) -> int:
    features_path = _require(ns.features, "features CSV")
    model, model_digest = _load_scoring_model(ns)
    features = _read_features(features_path)
    rows = []
    for fv in features:
        p = predict_proba(model, fv.as_dict())
        rows.append([fv.device_id, fv.window.kind, fv.window.start.isoformat(), p])
    prov = provenance_line(None, {"features": sha256_digest(features_path),
                                  "model": model_digest})
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    atomic_write_text(out_dir / "scores.csv",
                      render_csv(("device", "window_kind", "window_start",
                                  "probability"), rows, prov))
    print(f"scored {len(rows)} feature vectors with model {model.target!r}")
    return 0


def cmd_premium(ns) -> int:
    scores_path = _require(ns.scores, "scores CSV")
    loss = _opt(ns, "loss", float, None)
    if loss is None:
        raise ConfigError("predicted loss required (--loss or config key 'loss')")
    admin = _opt(ns, "admin", float, 0.0)
    margin = _opt(ns, "margin", float, 0.0)
    _, rows = read_csv_rows(scores_path)
    out_rows = []
    for r in rows:
        p = float(r["probability"])
        out_rows.append([r["device"], p, compute_premium(p, loss, admin, margin)])
    prov = provenance_line(None, {"scores": sha256_digest(scores_path)})
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    atomic_write_text(out_dir / "premiums.csv",
                      render_csv(("device", "probability", "premium"), out_rows, prov))
    print(f"computed {len(out_rows)} premiums "
          f"(loss={loss}, admin={admin}, margin={margin})")
    return 0


def cmd_ablate(ns) -> int:
    features_path = _require(ns.features, "features CSV")
    claims_path = _require(ns.claims, "claims CSV")
    group_spec = _opt(ns, "group", str, "accel")
    features = _read_features(features_path)
    claims = _read_claims(claims_path)
    results: list[AblationResult] = []
    for target in TARGETS:
        design, _ = _build_design(features, claims, target)
        if group_spec in FEATURE_GROUPS:
            group = [n for n in FEATURE_GROUPS[group_spec] if n in design.feature_names]
        else:
            group = [g.strip() for g in group_spec.split(",") if g.strip()]
        results.append(ablation_compare(design, target, group))
    prov = provenance_line(None, {"features": sha256_digest(features_path),
                                  "claims": sha256_digest(claims_path)})
    rows = [[r.target, " ".join(r.group), r.r2_with, r.r2_without, r.difference]
            for r in results]
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    atomic_write_text(out_dir / "ablation.csv",
                      render_csv(("target", "group", "r2_with", "r2_without",
                                  "difference"), rows, prov))
    for r in results:
        print(f"{r.target}: r2 {r.r2_without:.4f} -> {r.r2_with:.4f} "
              f"(+{r.difference:.4f})")
    return 0


def cmd_report(ns) -> int:
    features_path = _require(ns.features, "features CSV")
    claims_path = _require(ns.claims, "claims CSV")
    features = _read_features(features_path)
    claims = _read_claims(claims_path)
    devices = [fv.device_id for fv in features]
    y = build_targets(claims, devices, "any")
    dicts = [fv.as_dict() for fv in features]
    names = list(MODEL_FEATURE_NAMES)
    stat_rows, notes = descriptive_stats(dicts, y, names)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    prov = provenance_line(None, {"features": sha256_digest(features_path),
                                  "claims": sha256_digest(claims_path)})
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    rows = [[r["feature"],
             float("nan") if r["mean_acc"] is None else r["mean_acc"],
             float("nan") if r["std_acc"] is None else r["std_acc"],
             float("nan") if r["mean_noacc"] is None else r["mean_noacc"],
             float("nan") if r["std_noacc"] is None else r["std_noacc"]]
            for r in stat_rows]
    atomic_write_text(out_dir / "descriptive.csv",
                      render_csv(("feature", "mean_accidents", "std_accidents",
                                  "mean_no_accidents", "std_no_accidents"),
                                 rows, prov))
    corr, cnotes = correlation_matrix(dicts, names)
    for note in cnotes:
        print(f"note: {note}", file=sys.stderr)
    corr_rows = [[names[i]] + [float(corr[i, j]) for j in range(len(names))]
                 for i in range(len(names))]
    atomic_write_text(out_dir / "correlation.csv",
                      render_csv(["feature"] + names, corr_rows, prov))
    print(f"wrote descriptive.csv and correlation.csv over {len(features)} rows")
    return 0


def cmd_synth(ns) -> int:
    n = _opt(ns, "n", int, None)
    if n is None:
        raise ConfigError("population size required (--n or config key 'n')")
    weeks = _opt(ns, "weeks", int, 26)
    seed = _opt(ns, "seed", int, 0)
    config = SynthConfig(n_drivers=n, weeks=weeks, seed=seed)
    result = generate_population(config)
    out_dir = Path(_opt(ns, "out_dir", str, "."))
    prov = provenance_line(seed)
    atomic_write_text(out_dir / "features.csv",
                      render_csv(FEATURE_CSV_COLUMNS,
                                 [feature_to_row(fv) for fv in result.features], prov))
    claim_rows = [[c.device_id, c.loss_size, c.ins_sum, "1" if c.culprit else "0"]
                  for c in result.claims]
    atomic_write_text(out_dir / "claims.csv",
                      render_csv(CLAIMS_CSV_COLUMNS, claim_rows, prov))
    truth = result.truth()
    truth["provenance"] = _provenance_obj(seed, {})
    _write_json(out_dir / "truth.json", truth)
    if ns.logs:
        limit = ns.logs_limit
        text_parts = [serialize_logs([log])
                      for log in iter_event_logs(result, limit)]
        atomic_write_text(out_dir / "events.jsonl", "".join(text_parts))
    pos = {t: sum(v) for t, v in result.outcomes.items()}
    print(f"generated {n} drivers, {len(result.claims)} claims "
          f"(any={pos['any']}, weak={pos['weak']}, medium={pos['medium']}, "
          f"strong={pos['strong']})")
    return 0


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="drivescore",
        description="Telematics event logs to driving-style features, "
                    "severity labels, accident-probability models and premiums.")
    ap.add_argument("--version", action="version", version=f"drivescore {__version__}")
    ap.add_argument("--config", help="flat 'key = value' config file; flags win")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--out-dir", dest="out_dir")
        return p

    p = add("parse", cmd_parse, "validate a JSONL event log")
    p.add_argument("--events", required=True)

    p = add("aggregate", cmd_aggregate, "segment trips and build hourly records")
    p.add_argument("--events", required=True)
    p.add_argument("--tz")
    p.add_argument("--gap-threshold-s", dest="gap_threshold_s", type=float)

    p = add("features", cmd_features, "compute the driving-style feature catalog")
    p.add_argument("--hourly", required=True)
    p.add_argument("--trips", required=True)
    p.add_argument("--window", choices=WINDOW_KINDS)
    p.add_argument("--tz")
    p.add_argument("--holidays", help="'default', 'none', or a calendar file")

    p = add("label", cmd_label, "classify claim severity")
    p.add_argument("--claims", required=True)

    p = add("fit", cmd_fit, "fit the four-target model family")
    p.add_argument("--features", required=True)
    p.add_argument("--claims", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--stratify", action="store_const", const=True)

    p = add("score", cmd_score, "score feature vectors with a model")
    p.add_argument("--model", required=True,
                   help=f"model JSON path or '{REFERENCE_MODEL_TOKEN}'")
    p.add_argument("--features", required=True)
    p.add_argument("--target", help=f"target when --model {REFERENCE_MODEL_TOKEN}")

    p = add("premium", cmd_premium, "turn probabilities into premiums")
    p.add_argument("--scores", required=True)
    p.add_argument("--loss", type=float)
    p.add_argument("--admin", type=float)
    p.add_argument("--margin", type=float)

    p = add("evaluate", cmd_evaluate, "in/out-of-sample AUC report")
    p.add_argument("--features", required=True)
    p.add_argument("--claims", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--stratify", action="store_const", const=True)

    p = add("ablate", cmd_ablate, "McFadden R^2 with vs without a feature group")
    p.add_argument("--features", required=True)
    p.add_argument("--claims", required=True)
    p.add_argument("--group", help="accel|speed|mileage or comma-separated names")

    p = add("report", cmd_report, "descriptive statistics and correlations")
    p.add_argument("--features", required=True)
    p.add_argument("--claims", required=True)

    p = add("synth", cmd_synth, "generate a synthetic population with known risk")
    p.add_argument("--n", type=int)
    p.add_argument("--weeks", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--logs", action="store_true",
                   help="also write events.jsonl (large; prefer small --n)")
    p.add_argument("--logs-limit", dest="logs_limit", type=int, default=None,
                   help="emit logs for the first K drivers only")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        ns._config = load_config(ns.config) if ns.config else {}
        return ns.func(ns)
    except InputMissingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SeparationError, CollinearityError, SingleClassError,
            DegenerateLabelsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (EventValidationError, ClaimValidationError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Accident-severity labeling from claims and binary target construction.

A claim's severity class comes from its loss-to-insured-sum ratio: zero loss
counts as no accident, under 5% is weak, 5% to 20% inclusive is medium, above
20% is strong.  Claims where the driver was not the culprit are treated as no
accident for modeling.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

SEVERITY_CLASSES = ("none", "weak", "medium", "strong")
TARGETS = ("any", "weak", "medium", "strong")

WEAK_UPPER = 0.05   # r below this (and above 0) is weak
MEDIUM_UPPER = 0.20  # r above this is strong; boundaries fall to medium

CLAIMS_CSV_COLUMNS = ("device", "loss_size", "ins_sum", "culprit")
LABELS_CSV_COLUMNS = ("device", "class")


class ClaimValidationError(ValueError):
    """A claim record violates its invariants."""


@dataclass(frozen=True)
class ClaimRecord:
    device_id: str
    loss_size: float
    ins_sum: float
    culprit: bool

    def __post_init__(self):
        if self.ins_sum <= 0:
            raise ClaimValidationError(f"ins_sum must be positive, got {self.ins_sum}")
        if self.loss_size < 0:
            raise ClaimValidationError(f"loss_size must be non-negative, got {self.loss_size}")


def classify_severity(claim: ClaimRecord) -> str:
    """Severity class of one claim, from its loss ratio.

    Non-culprit claims and zero-loss claims classify as "none".  The 5% and
    20% boundaries both map to "medium".
    """
    if not claim.culprit:
        return "none"
    r = claim.loss_size / claim.ins_sum
    if r == 0.0:
        return "none"
    if r < WEAK_UPPER:
        return "weak"
    if r <= MEDIUM_UPPER:
        return "medium"
    return "strong"


def label_claims(claims: Iterable[ClaimRecord]) -> list[tuple[str, str]]:
    """(device_id, class) for each claim, in input order."""
    return [(c.device_id, classify_severity(c)) for c in claims]


def build_targets(claims: Sequence[ClaimRecord], devices: Sequence[str],
                  target: str) -> list[int]:
    """Binary target per device.

    "any" is 1 iff the device has at least one claim whose class is not
    "none"; a severity target is 1 iff the device has at least one claim of
    exactly that class.  A device with claims of two classes is positive in
    both severity targets.  Devices without claims are 0.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target: {target!r}")
    classes: dict[str, set[str]] = {}
    for c in claims:
        classes.setdefault(c.device_id, set()).add(classify_severity(c))
    out = []
    for dev in devices:
        got = classes.get(dev, set())
        if target == "any":
            out.append(int(any(cls != "none" for cls in got)))
        else:
            out.append(int(target in got))
    return out


def claim_from_row(row: dict) -> ClaimRecord:
    culprit_raw = str(row["culprit"]).strip().lower()
    if culprit_raw in ("1", "true", "yes"):
        culprit = True
    elif culprit_raw in ("0", "false", "no"):
        culprit = False
    else:
        raise ClaimValidationError(f"culprit must be boolean-like, got {row['culprit']!r}")
    return ClaimRecord(row["device"], float(row["loss_size"]),
                       float(row["ins_sum"]), culprit)


def claim_to_row(claim: ClaimRecord) -> list:
    return [claim.device_id, claim.loss_size, claim.ins_sum,
            "1" if claim.culprit else "0"]

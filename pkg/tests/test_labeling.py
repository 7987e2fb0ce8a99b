"""Claim severity classes and per-device targets."""
import pytest
from hypothesis import given, strategies as st

from drivescore.labeling import (CLAIMS_CSV_COLUMNS, ClaimRecord,
                                 ClaimValidationError, build_targets,
                                 claim_from_row, claim_to_row, classify_severity,
                                 label_claims)


def claim(loss, ins=100_000.0, culprit=True, device="d1"):
    return ClaimRecord(device, loss, ins, culprit)


class TestClassifySeverity:
    def test_zero_loss_is_none(self):
        assert classify_severity(claim(0.0)) == "none"

    def test_non_culprit_is_none_whatever_the_loss(self):
        assert classify_severity(claim(90_000.0, culprit=False)) == "none"

    @pytest.mark.parametrize("loss,want", [
        (1.0, "weak"),
        (4_999.99, "weak"),
        (5_000.0, "medium"),     # ratio exactly 0.05
        (12_000.0, "medium"),
        (20_000.0, "medium"),    # ratio exactly 0.20
        (20_000.01, "strong"),
        (95_000.0, "strong"),
    ])
    def test_ratio_bands(self, loss, want):
        assert classify_severity(claim(loss)) == want

    def test_scale_invariance(self):
        small = claim(12.0, ins=100.0)
        big = claim(120_000.0, ins=1_000_000.0)
        assert classify_severity(small) == classify_severity(big) == "medium"


class TestClaimValidation:
    def test_negative_loss(self):
        with pytest.raises(ClaimValidationError):
            claim(-1.0)

    def test_nonpositive_ins_sum(self):
        with pytest.raises(ClaimValidationError):
            claim(10.0, ins=0.0)


class TestBuildTargets:
    def test_severity_targets_are_exact_class_hits(self):
        claims = [claim(1_000.0, device="a"),          # weak
                  claim(10_000.0, device="b"),         # medium
                  claim(50_000.0, device="b"),         # strong, same device
                  claim(3_000.0, device="c", culprit=False)]
        devices = ["a", "b", "c", "d"]
        assert build_targets(claims, devices, "weak") == [1, 0, 0, 0]
        assert build_targets(claims, devices, "medium") == [0, 1, 0, 0]
        assert build_targets(claims, devices, "strong") == [0, 1, 0, 0]
        assert build_targets(claims, devices, "any") == [1, 1, 0, 0]

    def test_unknown_target(self):
        with pytest.raises(ValueError):
            build_targets([], ["a"], "catastrophic")

    def test_devices_without_claims_are_negative(self):
        assert build_targets([], ["a", "b"], "any") == [0, 0]


def test_label_claims_preserves_order():
    claims = [claim(50_000.0, device="x"), claim(0.0, device="y")]
    assert label_claims(claims) == [("x", "strong"), ("y", "none")]


def test_claim_row_round_trip():
    c = claim(1234.5, ins=98765.0, culprit=False, device="z9")
    row = dict(zip(CLAIMS_CSV_COLUMNS, (str(v) for v in claim_to_row(c))))
    assert claim_from_row(row) == c


def test_claim_row_culprit_parsing():
    base = {"device": "d", "loss_size": "1", "ins_sum": "10"}
    assert claim_from_row({**base, "culprit": "true"}).culprit
    assert not claim_from_row({**base, "culprit": "0"}).culprit
    with pytest.raises(ClaimValidationError):
        claim_from_row({**base, "culprit": "maybe"})


_RANK = {"none": 0, "weak": 1, "medium": 2, "strong": 3}


@given(st.floats(min_value=0.0, max_value=5e5, allow_nan=False),
       st.floats(min_value=0.0, max_value=5e5, allow_nan=False),
       st.floats(min_value=1.0, max_value=1e7, allow_nan=False))
def test_severity_monotone_in_loss(loss_a, loss_b, ins):
    lo, hi = sorted((loss_a, loss_b))
    assert _RANK[classify_severity(claim(lo, ins=ins))] <= \
        _RANK[classify_severity(claim(hi, ins=ins))]

import math

import numpy as np
import pytest

import bowlforge.classifier as classifier_mod
from bowlforge import (IntegrationConfig, classify, constraint_context,
                       cross_validate, get_speed, integrate)
from bowlforge.classifier import (RULE_BOUNDARY, RULE_FAST_DECAY,
                                RULE_LOW_HOMOGENEITY, RULE_NONDEGENERATE,
                                RULE_POSITIVE_L, RULE_SLOW_DECAY)
from bowlforge.constraint import TailDecay


def test_nondegenerate_rule_and_constant():
    for n in (2, 3, 5):
        c = classify(get_speed("mean", n))
        assert c.verdict == "entire" and c.rule_fired == RULE_NONDEGENERATE
        assert c.asymptotic_constant == pytest.approx(1.0 / (2 * (n - 1)),
                                                      rel=1e-10)
    c = classify(get_speed("scalar", 3))
    assert c.asymptotic_constant == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)),
                                                  rel=1e-9)


def test_low_homogeneity_rule():
    c = classify(get_speed("gauss:0.5", 2))
    assert c.verdict == "entire" and c.rule_fired == RULE_LOW_HOMOGENEITY
    assert c.asymptotic_constant is None


def test_positive_tail_limit_rule():
    for n in (2, 3, 4):
        c = classify(get_speed("harmonic-mean", n))
        assert c.verdict == "bounded" and c.rule_fired == RULE_POSITIVE_L
        assert c.tail_limit == pytest.approx(1.0, rel=1e-9)
        assert math.pi / (2 * n) - 1e-3 <= c.r_low
        assert c.r_high <= math.pi / 2 + 1e-3


def test_gauss_dichotomy():
    # entire exactly when the homogeneity degree is at most half the dimension
    for n in (2, 3):
        for alpha in (0.25, 0.5, 1.0, 1.5, 2.0, 3.0):
            c = classify(get_speed(f"gauss:{alpha}", n))
            expected = "entire" if alpha <= n / 2 else "bounded"
            assert c.verdict == expected, (n, alpha, c)


def test_gauss_bounded_brackets_match_closed_forms():
    c = classify(get_speed("gauss:2", 2))
    assert c.rule_fired == RULE_SLOW_DECAY
    assert c.r_low <= math.sqrt(2.0) <= c.r_high
    c = classify(get_speed("gauss:1.5", 2))
    assert c.r_low <= math.sqrt(3.0) <= c.r_high


def test_composite_expression_fast_decay():
    # ((x+y) x y)^(1/3): alpha = 1, tail decays like y^-2 >= 2*alpha - 1
    c = classify(get_speed("expr:(S1*K)^(1/3)", 2))
    assert c.verdict == "entire" and c.rule_fired == RULE_FAST_DECAY
    assert c.tail.exponent == pytest.approx(2.0, abs=1e-3)


def test_classify_is_deterministic():
    a = classify(get_speed("gauss:1.5", 3))
    b = classify(get_speed("gauss:1.5", 3))
    assert a.verdict == b.verdict == "entire"
    assert a.rule_fired == b.rule_fired
    assert a.tail.exponent == b.tail.exponent


def test_boundary_case_maps_to_undetermined(monkeypatch):
    # a degenerate speed whose tail is not a clean power law (rms residual
    # far above the gate) must be left unclassified, with evidence
    speed = get_speed("gauss:2", 2)
    poor = TailDecay(exponent=3.0, rms_residual=0.02, window=(1e3, 1e8),
                     good_fit=False)
    monkeypatch.setattr(classifier_mod, "tail_decay_exponent",
                        lambda ctx, **kw: poor)
    c = classify(speed)
    assert c.verdict == "undetermined" and c.rule_fired == RULE_BOUNDARY
    assert "rms residual" in c.evidence
    assert c.tail is poor


def test_margin_band_counts_as_fast_decay(monkeypatch):
    # fitted exponent a hair below the critical rate, clean fit: entire
    speed = get_speed("gauss:2", 2)
    near = TailDecay(exponent=3.0 - 5e-4, rms_residual=1e-12,
                     window=(1e3, 1e8), good_fit=True)
    monkeypatch.setattr(classifier_mod, "tail_decay_exponent",
                        lambda ctx, **kw: near)
    c = classify(speed)
    assert c.verdict == "entire" and c.rule_fired == RULE_FAST_DECAY


def test_to_dict_round_trip():
    d = classify(get_speed("mean", 5)).to_dict()
    assert d["verdict"] == "entire" and d["rule"] == "nondegenerate"
    assert d["C"] == pytest.approx(0.125)
    d = classify(get_speed("gauss:2", 2)).to_dict()
    assert "R_low" in d and "tail_fit" in d


# ---------------------------------------------------------------------------
# cross-validation
# ---------------------------------------------------------------------------

def test_cross_validate_consistent_cases(profile_cache):
    for spec, dim, cfg in [("scalar", 3, None),
                           ("gauss:2", 2, None),
                           ("harmonic-mean", 2, None),
                           ("mean", 2, None)]:
        speed = get_speed(spec, dim)
        verdict = classify(speed)
        profile = profile_cache(spec, dim, cfg)
        report = cross_validate(speed, profile, verdict)
        assert report.consistent, (spec, dim, report.mismatches)


def test_cross_validate_degenerate_entire_capped(profile_cache):
    speed = get_speed("gauss:1", 2)
    verdict = classify(speed)
    profile = profile_cache("gauss:1", 2, None)
    assert profile.status.capped
    report = cross_validate(speed, profile, verdict)
    assert report.consistent


def test_cross_validate_flags_truncated_run():
    # a slope cap below the switch level truncates the run before the tail
    # can be analyzed; an entire verdict must then be flagged, not excused
    speed = get_speed("mean", 2)
    verdict = classify(speed)
    fault = integrate(speed, IntegrationConfig(r_max=100.0, v_cap=10.0))
    report = cross_validate(speed, fault, verdict)
    assert not report.consistent
    assert any("truncated" in m or "before" in m for m in report.mismatches)


def test_cross_validate_flags_wrong_verdict(profile_cache):
    # feed the bounded harmonic profile to an entire classification
    hm = get_speed("harmonic-mean", 2)
    profile = profile_cache("harmonic-mean", 2, None)
    wrong = classify(get_speed("mean", 2))
    report = cross_validate(hm, profile, wrong)
    assert not report.consistent

import math
import random

import numpy as np
import pytest

from keyfitts.fitts import (
    GENERIC_A,
    GENERIC_B,
    DirectionalFittsModel,
    FittsBinModel,
    MovementSample,
    UnfittedBinWarning,
    anisotropic_model,
    fit_bins,
    generic_model,
    index_of_difficulty,
    model_from_json,
    model_to_json,
    predict_mt,
)
from keyfitts.hexgeom import NUM_ANGLE_BINS, bin_center_deg

# the nine hop-class difficulty values log2(k+1), k = 0..8
CLASS_IDS = [math.log2(k + 1) for k in range(9)]


def _sample(distance, angle, mt, demanded_bin=0, distance_class=1):
    return MovementSample(distance, angle, mt, demanded_bin, distance_class)


def _bin(a, b, r2=1.0, n=12):
    return FittsBinModel(a=a, b=b, r_squared=r2, n_samples=n, outlier_count=0)


def test_index_of_difficulty_values():
    assert index_of_difficulty(0, 130) == 0.0
    assert index_of_difficulty(130, 130) == pytest.approx(1.0)
    assert index_of_difficulty(390, 130) == pytest.approx(2.0)


def test_index_of_difficulty_rejects_bad_width():
    with pytest.raises(ValueError):
        index_of_difficulty(100, 0)


def test_fit_recovers_noiseless_line():
    samples = [
        _sample(130 * k, 1.0, 0.5 + 0.2 * math.log2(k + 1), distance_class=k) for k in range(1, 9)
    ]
    model = fit_bins(samples, 130)
    b0 = model.bins[0]
    assert b0.fitted
    assert b0.a == pytest.approx(0.5)
    assert b0.b == pytest.approx(0.2)
    assert b0.r_squared == pytest.approx(1.0)
    assert b0.n_samples == 8


def test_single_distinct_id_is_unfittable():
    samples = [_sample(130, 1.0, 0.6) for _ in range(5)]
    samples += [
        _sample(130 * k, 90.0, 0.5 + 0.2 * math.log2(k + 1), distance_class=k)
        for k in range(1, 5)
    ]
    model = fit_bins(samples, 130)
    assert not model.bins[0].fitted
    assert model.bins[4].fitted


def test_outlier_flagged_never_removed():
    # 12 samples on MT = 0.4 + 0.25*ID with the last displaced by +0.1 s;
    # after refitting, its residual is 3.30 residual SDs (numpy oracle).
    ks = [1, 2, 3, 4, 5, 6, 7, 8, 1, 2, 3, 4]
    samples = [
        _sample(130 * k, 0.0, 0.4 + 0.25 * math.log2(k + 1), distance_class=k) for k in ks
    ]
    displaced = samples[-1]
    samples[-1] = _sample(displaced.distance, 0.0, displaced.movement_time + 0.1, distance_class=4)
    model = fit_bins(samples, 130)
    b0 = model.bins[0]
    assert b0.outlier_count == 1
    assert b0.outlier_idx == (11,)
    assert b0.n_samples == 12  # flagged sample stays in the fit
    assert b0.a == pytest.approx(0.4007, abs=1e-4)
    assert b0.b == pytest.approx(0.2536, abs=1e-4)


def test_zero_distance_samples_anchor_demanded_bin():
    samples = [_sample(0.0, None, 0.45, demanded_bin=3, distance_class=0) for _ in range(3)]
    samples += [
        _sample(130 * k, bin_center_deg(3), 0.4 + 0.3 * math.log2(k + 1), demanded_bin=3, distance_class=k)
        for k in (2, 5)
    ]
    model = fit_bins(samples, 130)
    b3 = model.bins[3]
    assert b3.fitted
    assert b3.n_samples == 5


def test_fit_empty_sample_list_rejected():
    with pytest.raises(ValueError):
        fit_bins([], 130)


def test_r_squared_matches_independent_two_pass(seed=0):
    rng = random.Random(seed)
    for _ in range(20):
        xs = [rng.uniform(0, 3.2) for _ in range(15)]
        samples = [
            _sample(130 * (2**x - 1), 1.0, max(0.05, 0.4 + 0.3 * x + rng.gauss(0, 0.1)), distance_class=min(8, round(2**x - 1)))
            for x in xs
        ]
        model = fit_bins(samples, 130)
        b = model.bins[0]
        ids = [index_of_difficulty(s.distance, 130) for s in samples]
        mts = [s.movement_time for s in samples]
        coef = np.polyfit(ids, mts, 1)
        pred = np.polyval(coef, ids)
        ss_res = float(np.sum((np.array(mts) - pred) ** 2))
        ss_tot = float(np.sum((np.array(mts) - np.mean(mts)) ** 2))
        assert b.r_squared == pytest.approx(1 - ss_res / ss_tot, abs=1e-12)


def test_generic_model_constants():
    model = generic_model(130)
    assert model.bins[7].a == 0.127
    assert all(b.b == pytest.approx(1 / 4.9) for b in model.bins)
    assert model.mean_intercept == pytest.approx(0.127)
    assert all(b.synthetic for b in model.bins)


def test_predict_generic_neighbor_distance():
    model = generic_model(130)
    expected = 0.127 + (1 / 4.9) * 1.0
    for angle in (0.0, 37.0, 275.0):
        assert predict_mt(model, angle, 130) == pytest.approx(expected)
    assert predict_mt(model, 45.0, 130) == pytest.approx(0.3311, abs=2e-4)


def test_predict_zero_distance_returns_mean_intercept():
    model = generic_model(130)
    assert predict_mt(model, None, 0.0) == pytest.approx(0.127)


def test_predict_two_bin_fixture():
    bins = [_bin(0.3, 0.2)] * NUM_ANGLE_BINS
    bins[0] = _bin(0.2, 0.1)
    bins[4] = _bin(0.4, 0.3)
    model = DirectionalFittsModel(tuple(bins), 130.0, sum(b.a for b in bins) / 16)
    assert predict_mt(model, 1.0, 130) == pytest.approx(0.3)
    assert predict_mt(model, 89.0, 130) == pytest.approx(0.7)


def test_predict_requires_angle_for_nonzero_distance():
    with pytest.raises(ValueError):
        predict_mt(generic_model(130), None, 100.0)


def test_predict_clamps_negative_to_zero():
    bins = tuple(_bin(-0.5, 0.01) for _ in range(NUM_ANGLE_BINS))
    model = DirectionalFittsModel(bins, 130.0, -0.5)
    assert predict_mt(model, 10.0, 130) == 0.0


def test_unfitted_bin_falls_back_to_mean_with_warning():
    bins = [_bin(0.2, 0.1)] * NUM_ANGLE_BINS
    from keyfitts.fitts import UNFITTED_BIN

    bins[5] = UNFITTED_BIN
    fitted = [b for b in bins if b.fitted]
    model = DirectionalFittsModel(tuple(bins), 130.0, sum(b.a for b in fitted) / len(fitted))
    with pytest.warns(UnfittedBinWarning):
        mt = predict_mt(model, bin_center_deg(5), 130)
    assert mt == pytest.approx(0.2 + 0.1)


def test_predict_monotone_in_distance():
    model = generic_model(130)
    prev = -1.0
    for d in (0, 50, 130, 400, 900):
        mt = predict_mt(model, 45.0, d)
        assert mt >= prev
        prev = mt


def synthetic_bin_samples(truth_a, truth_b, rng, per_bin=25, noise_sd=0.05):
    """25 samples per bin cycling the nine hop-class IDs, Gaussian MT noise."""
    samples = []
    for k in range(NUM_ANGLE_BINS):
        for i in range(per_bin):
            cls = i % 9
            ident = CLASS_IDS[cls]
            mt = truth_a[k] + truth_b[k] * ident + rng.gauss(0, noise_sd)
            samples.append(
                MovementSample(
                    distance=130 * (2**ident - 1),
                    angle=None if cls == 0 else bin_center_deg(k),
                    movement_time=max(mt, 1e-3),
                    demanded_bin=k,
                    distance_class=cls,
                )
            )
    return samples


def test_regression_recovery_per_bin():
    rng = random.Random(1234)
    truth_a = [0.3 + 0.04 * k for k in range(NUM_ANGLE_BINS)]
    truth_b = [0.5 + 0.03 * k for k in range(NUM_ANGLE_BINS)]
    model = fit_bins(synthetic_bin_samples(truth_a, truth_b, rng), 130)
    for k in range(NUM_ANGLE_BINS):
        b = model.bins[k]
        assert b.fitted
        assert b.a == pytest.approx(truth_a[k], abs=0.05)
        assert b.b == pytest.approx(truth_b[k], abs=0.05)
        assert b.r_squared >= 0.9


def test_anisotropic_model_ratio():
    model = anisotropic_model(130, a=0.83, b_vertical=0.5, horizontal_ratio=2.0)
    assert model.bins[0].b == pytest.approx(1.0)
    assert model.bins[8].b == pytest.approx(1.0)
    assert model.bins[4].b == pytest.approx(0.5)
    assert model.bins[12].b == pytest.approx(0.5)
    assert all(b.a == 0.83 for b in model.bins)


def test_model_json_round_trip():
    samples = [
        MovementSample(130 * k, bin_center_deg(b), 0.3 + 0.2 * math.log2(k + 1), b, k)
        for b in range(NUM_ANGLE_BINS)
        for k in (1, 3, 5)
    ]
    model = fit_bins(samples, 130)
    text = model_to_json(model)
    restored = model_from_json(text)
    assert model_to_json(restored) == text
    for orig, back in zip(model.bins, restored.bins):
        assert back.a == pytest.approx(orig.a)
        assert back.b == pytest.approx(orig.b)


def test_movement_sample_validation():
    with pytest.raises(ValueError):
        MovementSample(100.0, None, 0.5, 0, 1)  # angle required
    with pytest.raises(ValueError):
        MovementSample(0.0, None, 0.5, 0, 2)  # class must be 0 at distance 0
    with pytest.raises(ValueError):
        MovementSample(100.0, 1.0, 0.0, 0, 1)  # movement time positive

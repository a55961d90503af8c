import dataclasses
import inspect
import math

import numpy as np
import pytest

from conftest import TINY_TRAINING, make_params
from phumobcal_core.calib.calibrate import (
    CalibrationReport,
    CurvePrediction,
    average_phumob,
    calibrate,
    compare_with_truth,
    verify,
)
from phumobcal_core.calib.cohort import Cohort, CohortConfig, CohortTruth, generate_cohort
from phumobcal_core.calib.metrics import count_violations, quartile_stats, r2
from phumobcal_core.calib.summary import MethodSummary, ReportSummary, render_text
from phumobcal_core.datagen.dataset import Dataset, build_dataset
from phumobcal_core.datagen.sampling import SamplingConfig
from phumobcal_core.domain.params import DeviceGeometry
from phumobcal_core.physics.sbd import simulate
from phumobcal_core.pinn.models import AutoencoderModel
from phumobcal_core.pinn.training import TrainConfig, predict_targets, train_autoencoder, train_head
from phumobcal_core.shared.errors import ConstantSeriesError, DimensionMismatchError, DomainError


# --- metrics -----------------------------------------------------------------


def test_r2_reference_values() -> None:
    assert r2(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 4.0])) == pytest.approx(0.5)
    assert r2(np.array([1.0, 2.0, 3.0]), np.array([2.0, 2.0, 2.0])) == pytest.approx(0.0)
    assert r2(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0])) == 1.0


def test_r2_rejects_constant_reference() -> None:
    with pytest.raises(ConstantSeriesError):
        r2(np.array([2.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0]))


@pytest.mark.parametrize("actual, predicted", [([1.0, 2.0], [1.0]), ([1.0], [1.0])])
def test_r2_rejects_bad_lengths(actual: list[float], predicted: list[float]) -> None:
    with pytest.raises(DimensionMismatchError):
        r2(np.array(actual), np.array(predicted))


def test_quartiles_of_single_value() -> None:
    assert quartile_stats([1.0]).as_tuple() == (1.0, 1.0, 1.0, 1.0, 1.0)


def test_quartiles_interpolate_linearly() -> None:
    stats = quartile_stats([4.0, 1.0, 3.0, 2.0])
    assert stats.as_tuple() == pytest.approx((1.0, 1.75, 2.5, 3.25, 4.0))
    assert stats.iqr == pytest.approx(1.5)


def test_quartiles_match_sorted_order_statistics() -> None:
    values = np.random.default_rng(0).normal(size=17)
    ordered = np.sort(values)

    def at(p: float) -> float:
        pos = p * (len(ordered) - 1)
        lo = math.floor(pos)
        hi = min(lo + 1, len(ordered) - 1)
        return ordered[lo] + (ordered[hi] - ordered[lo]) * (pos - lo)

    expected = tuple(at(p) for p in (0.0, 0.25, 0.5, 0.75, 1.0))
    assert quartile_stats(values).as_tuple() == pytest.approx(expected)


def test_quartiles_reject_empty_input() -> None:
    with pytest.raises(DomainError):
        quartile_stats([])


def test_count_violations() -> None:
    predictions = [
        make_params(mu_max=90.0, mu_min=100.0),
        make_params(mu_max=100.0, mu_min=100.0),
        make_params(mu_max=50.0, mu_min=60.0),
        make_params(mu_max=153.0, mu_min=55.0),
    ]
    assert count_violations(predictions) == 3
    assert count_violations(np.stack([p.to_targets() for p in predictions])) == 3
    assert count_violations([]) == 0


# --- averaging -----------------------------------------------------------------


def test_average_phumob_uses_arithmetic_means_and_log_n_ref() -> None:
    targets = np.array(
        [
            [300.0, 5.2, 100.0, 50.0, 17.0, 2.0, 2.0],
            [310.0, 5.3, 200.0, 60.0, 18.0, 3.0, 3.0],
        ]
    )
    averaged = average_phumob(targets)
    assert averaged.mu_max == pytest.approx(150.0)
    assert averaged.mu_min == pytest.approx(55.0)
    assert averaged.log10_n_ref == pytest.approx(17.5)
    assert averaged.alpha == pytest.approx(2.5)
    assert averaged.theta == pytest.approx(2.5)


# --- cohort --------------------------------------------------------------------


def test_default_cohort_layout() -> None:
    config = CohortConfig()
    cohort, truth = generate_cohort(config, DeviceGeometry(), seed=1)

    assert config.n_curves == 66
    assert len(cohort) == 66
    assert cohort.groups == ["Temp1", "Temp2", "Temp3"]
    assert cohort.curves[0].curve_id == "Temp1-00"
    assert len({c.curve_id for c in cohort.curves}) == 66

    nominal = DeviceGeometry()
    for c in cohort.curves:
        lo, hi = config.groups[c.group]
        params = truth.params[c.curve_id]
        assert lo <= params.temperature <= hi
        assert 5.05 <= params.workfunction <= 5.45
        assert params.phumob == truth.shared
        ratio = truth.geometries[c.curve_id].drift_thickness / nominal.drift_thickness
        assert 0.7 <= ratio <= 1.3

    assert truth.shared.mu_max == 153.0
    assert truth.shared.mu_min == 55.0
    assert truth.shared.log10_n_ref == pytest.approx(17.4)


def test_cohort_is_seeded() -> None:
    config = CohortConfig(curves_per_group=2)
    a, _ = generate_cohort(config, DeviceGeometry(), seed=5)
    b, _ = generate_cohort(config, DeviceGeometry(), seed=5)
    c, _ = generate_cohort(config, DeviceGeometry(), seed=6)
    assert np.array_equal(a.currents(), b.currents())
    assert not np.array_equal(a.currents(), c.currents())


def test_noise_free_cohort_reproduces_truth() -> None:
    config = CohortConfig(curves_per_group=2, snr_db=None)
    cohort, truth = generate_cohort(config, DeviceGeometry(), seed=2)
    for c in cohort.curves:
        expected = simulate(truth.params[c.curve_id], truth.geometries[c.curve_id])
        assert c.curve.same_as(expected)


def test_calibration_never_sees_ground_truth() -> None:
    assert [f.name for f in dataclasses.fields(Cohort)] == ["curves"]
    for fn in (calibrate, verify):
        annotations = " ".join(str(p.annotation) for p in inspect.signature(fn).parameters.values())
        assert "CohortTruth" not in annotations


# --- calibrate / verify ----------------------------------------------------------


def _exact_cohort() -> tuple[Cohort, CohortTruth]:
    config = CohortConfig(
        groups={"G": (300.0, 300.0)},
        curves_per_group=4,
        workfunction=(5.2, 5.2),
        geometry_variation=0.0,
        snr_db=None,
    )
    return generate_cohort(config, DeviceGeometry(), seed=0)


def _report_from_truth(cohort: Cohort, truth: CohortTruth, *, temperature: float = 300.0) -> CalibrationReport:
    return CalibrationReport(
        lambda_=0.02,
        predictions=[
            CurvePrediction(curve_id=c.curve_id, group=c.group, params=truth.params[c.curve_id], violation=False)
            for c in cohort.curves
        ],
        phumob=truth.shared,
        group_temperatures={"G": temperature},
        workfunctions={c.curve_id: 5.2 for c in cohort.curves},
    )


def test_verify_with_exact_parameters_scores_one() -> None:
    cohort, truth = _exact_cohort()
    report = verify(_report_from_truth(cohort, truth), cohort, DeviceGeometry())

    assert report.is_verified
    assert all(s.ok for s in report.scores)
    assert [s.r2_linear for s in report.scores] == pytest.approx([1.0] * 4)
    assert [s.r2_log for s in report.scores] == pytest.approx([1.0] * 4)
    assert report.median_r2() == pytest.approx((1.0, 1.0))
    assert set(report.simulated) == {c.curve_id for c in cohort.curves}

    comparison = compare_with_truth(report, truth)
    assert all(v == 0.0 for v in comparison.relative_errors.values())
    assert all(v == 0.0 for v in comparison.temperature_errors.values())


def test_verify_records_failures_per_curve() -> None:
    cohort, truth = _exact_cohort()
    report = verify(_report_from_truth(cohort, truth, temperature=50.0), cohort, DeviceGeometry())

    assert not any(s.ok for s in report.scores)
    assert all(math.isnan(s.r2_linear) for s in report.scores)
    assert all("DomainError" in (s.error or "") for s in report.scores)
    assert report.quartiles_linear is None
    assert math.isnan(report.median_r2()[0])


def test_verify_worker_count_does_not_change_scores() -> None:
    cohort, truth = _exact_cohort()
    serial = verify(_report_from_truth(cohort, truth), cohort, DeviceGeometry())
    parallel = verify(_report_from_truth(cohort, truth), cohort, DeviceGeometry(), n_jobs=2)
    assert serial.scores == parallel.scores


def test_calibrate_averages_network_predictions(tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel) -> None:
    head = train_head(tiny_autoencoder, tiny_dataset, TINY_TRAINING).model
    cohort, _ = generate_cohort(CohortConfig(curves_per_group=2), DeviceGeometry(), seed=3)
    scalers = {"input_scaler": tiny_dataset.input_scaler, "target_scaler": tiny_dataset.target_scaler}

    report = calibrate(tiny_autoencoder, head, cohort, lambda_=0.02, **scalers)
    targets = predict_targets(tiny_autoencoder, head, cohort.currents(), **scalers)

    assert report.label == "AE-PINN"
    assert len(report.predictions) == 6
    assert set(report.group_temperatures) == {"Temp1", "Temp2", "Temp3"}
    assert report.phumob.mu_max == pytest.approx(float(np.mean(targets[:, 2])))
    assert report.violations == count_violations(targets)
    first = report.predictions[0]
    assert report.calibrated_params(first.curve_id, first.group).workfunction == first.params.workfunction


@pytest.mark.slow
def test_closed_loop_on_default_cohort_reaches_r2_targets() -> None:
    geometry = DeviceGeometry()
    dataset = build_dataset(SamplingConfig(n_samples=2000, seed=1), geometry, split_seed=2, n_jobs=4)
    config = TrainConfig(seed=0, max_epochs=500, ae_max_epochs=500, log_every=100)
    ae = train_autoencoder(dataset, config).model
    head = train_head(ae, dataset, config).model

    cohort, _ = generate_cohort(CohortConfig(), geometry, seed=3)
    scalers = {"input_scaler": dataset.input_scaler, "target_scaler": dataset.target_scaler}
    report = verify(calibrate(ae, head, cohort, lambda_=config.lambda_, **scalers), cohort, geometry)

    median_linear, median_log = report.median_r2()
    assert median_linear >= 0.90
    assert median_log >= 0.95


# --- summary ---------------------------------------------------------------------


def test_render_text_lists_methods_and_truth() -> None:
    method = MethodSummary(
        label="AE-PINN",
        lambda_=0.02,
        violations={"Test": 1, "Training": 2, "Experiment": 0},
        averaged={"mu_max": 150.0, "mu_min": 50.0, "log10_n_ref": 17.4, "alpha": 2.8, "theta": 2.3},
        r2_linear=[0.9, 1.0],
        r2_log=[0.8, 0.9],
        quartiles_linear=quartile_stats([0.9, 1.0]),
        quartiles_log=quartile_stats([0.8, 0.9]),
    )
    summary = ReportSummary(
        config_digest="d" * 64,
        seed=7,
        methods=[method],
        truth={"mu_max": 153.0, "mu_min": 55.0, "log10_n_ref": 17.4, "alpha": 2.8, "theta": 2.3},
        sweep_minima=[0.02],
    )
    text = render_text(summary)
    assert "AE-PINN" in text
    assert "153" in text
    assert "Lambda sweep validation-loss minima: 0.02" in text
    assert summary.box_rows()[0]["median"] == pytest.approx(0.95)
    assert method.mean_r2_linear == pytest.approx(0.95)

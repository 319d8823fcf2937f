import numpy as np
import pytest

from fringelab.calib import (
    FLATNESS_BOUND,
    CalibrationError,
    calibrate,
    fit_quadratic_plate_model,
    normalize_intensity,
    phase_from_intensity,
)

ALPHA = 150.0


def _grid_with_extrema(theta_max, alpha=ALPHA, points=401):
    # include every theta where alpha theta^2 = k pi so the extremes are sampled
    k = np.arange(int(alpha * theta_max**2 / np.pi) + 1)
    return np.union1d(np.linspace(0, theta_max, points), np.sqrt(k * np.pi / alpha))


def test_round_trip_on_sampled_extrema():
    theta = _grid_with_extrema(0.35)
    phi_true = ALPHA * theta**2
    t, phi = phase_from_intensity(theta, np.cos(phi_true), extreme_fraction=0.0)
    np.testing.assert_allclose(phi, phi_true, atol=1e-6)


def test_two_sided_scan():
    half = _grid_with_extrema(0.3)
    theta = np.concatenate([-half[:0:-1], half])
    phi_true = ALPHA * theta**2
    t, phi = phase_from_intensity(theta, np.cos(phi_true), extreme_fraction=0.0)
    np.testing.assert_allclose(phi, ALPHA * t**2, atol=1e-6)


def test_acos_endpoints():
    y = normalize_intensity([1.0, 0.0, -1.0, 0.5], extreme_fraction=0.0)
    assert np.arccos(y[0]) == 0.0
    assert np.arccos(y[2]) == pytest.approx(np.pi)


@pytest.mark.parametrize("gain, background", [(1.0, 0.0), (2500.0, 3100.0), (0.01, 5.0)])
def test_affine_invariance(gain, background):
    theta = _grid_with_extrema(0.3)
    base = np.cos(ALPHA * theta**2)
    a = calibrate(theta, base, extreme_fraction=0.0)
    b = calibrate(theta, background + gain * base, extreme_fraction=0.0)
    assert b.coefficient == pytest.approx(a.coefficient, rel=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_monotone_phase_recovered(seed):
    rng = np.random.default_rng(seed)
    c1, c2 = rng.uniform(5, 30), rng.uniform(0, 60)
    theta = np.linspace(0, 1, 4001)
    phi_true = c1 * theta + c2 * theta**3
    _, phi = phase_from_intensity(theta, np.cos(phi_true), extreme_fraction=0.0)
    # dense sampling puts every extremum within one step, so accuracy is set by the step
    step = np.max(np.diff(phi_true))
    assert np.max(np.abs(phi - phi_true)) < 3 * np.sqrt(step)


def test_degree_input():
    theta = _grid_with_extrema(0.3)
    curve = calibrate(np.rad2deg(theta), np.cos(ALPHA * theta**2), deg=True, extreme_fraction=0.0)
    assert curve.coefficient == pytest.approx(ALPHA, rel=1e-6)
    assert curve.offset == pytest.approx(0.0, abs=1e-6)


class TestFlatness:
    theta = np.linspace(0.0, 0.3, 61)

    def test_small_perturbation_passes(self):
        phi = ALPHA * self.theta**2 + (FLATNESS_BOUND / 4) * np.sin(40 * self.theta)
        curve = fit_quadratic_plate_model(self.theta, phi)
        assert curve.within_flatness

    def test_large_perturbation_flagged(self):
        phi = ALPHA * self.theta**2
        phi[30] += 3 * FLATNESS_BOUND
        curve = fit_quadratic_plate_model(self.theta, phi)
        assert not curve.within_flatness
        assert curve.flagged[30]
        assert curve.to_json_obj()["flagged_points"] >= 1


@pytest.mark.parametrize("noise_on", ["phase", "counts"])
def test_noisy_recovery_within_one_percent(noise_on):
    theta = np.linspace(-0.3, 0.3, 601)
    failures = 0
    for seed in range(100):
        noise = np.random.default_rng(seed).normal(0, 0.01, theta.size)
        if noise_on == "phase":
            counts = 3 + 2 * np.cos(ALPHA * theta**2 + noise)
        else:
            counts = 3 + 2 * np.cos(ALPHA * theta**2) + noise
        curve = calibrate(theta, counts)
        failures += abs(curve.coefficient / ALPHA - 1) > 0.01
    assert failures == 0


def test_noise_on_fringe_slope_is_not_a_reversal():
    theta = np.linspace(0, 0.3, 301)
    phi_true = ALPHA * theta**2
    clean = np.cos(phi_true)
    spiked = clean.copy()
    mid = np.argmin(np.abs(phi_true - 1.44))
    spiked[mid + 1] = spiked[mid] + 0.05  # upward spike in the middle of a falling slope
    _, want = phase_from_intensity(theta, clean, extreme_fraction=0.0)
    _, got = phase_from_intensity(theta, spiked, extreme_fraction=0.0)
    far = theta > theta[mid] + 0.02
    np.testing.assert_allclose(got[far], want[far], atol=1e-12)


def test_fit_reports_standard_error():
    theta = np.linspace(0, 0.3, 50)
    phi = 3.0 * theta**2 + np.random.default_rng(1).normal(0, 0.01, 50)
    curve = fit_quadratic_plate_model(theta, phi, offset=False)
    assert curve.offset == 0.0
    assert abs(curve.coefficient - 3.0) < 5 * curve.coefficient_stderr
    np.testing.assert_allclose(curve.phase(theta), curve.coefficient * theta**2)


class TestErrors:
    def test_flat_scan(self):
        with pytest.raises(CalibrationError, match="extrema"):
            calibrate(np.linspace(0, 1, 20), np.full(20, 7.0))

    def test_too_few_points(self):
        with pytest.raises(CalibrationError):
            fit_quadratic_plate_model([0.1, 0.2, 0.3, 0.4], [1, 2, 3, 4])

    def test_degenerate_design(self):
        with pytest.raises(CalibrationError, match="degenerate"):
            fit_quadratic_plate_model(np.full(6, 0.2), np.arange(6.0))

    def test_dense_reversals(self):
        theta = np.linspace(0, 1, 40)
        with pytest.raises(CalibrationError, match="reversals"):
            phase_from_intensity(theta, np.cos(theta * 400), extreme_fraction=0.0)

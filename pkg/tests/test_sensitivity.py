import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fringelab.ensemble import FITTED, IDEAL
from fringelab.fringe import FringeScan, analytic_fringe, scan
from fringelab.sensitivity import (
    CoarseGridError,
    analytic_sensitivity,
    combined_scheme_fringe,
    fisher_sensitivity,
    ideal_fringe_sensitivity,
    phase_sensitivity,
    sensitivity_scan,
    sensitivity_sweep,
)


@given(st.floats(0.01, 0.99), st.floats(-3, 3), st.integers(1, 6), st.floats(1, 1e6))
def test_trial_count_cancels(p, dp, n, k):
    assert fisher_sensitivity(p, dp, n, trials=k) == pytest.approx(fisher_sensitivity(p, dp, n), rel=1e-12)


@given(st.floats(0.01, 0.99), st.floats(-3, 3), st.integers(1, 6))
def test_formula(p, dp, n):
    assert fisher_sensitivity(p, dp, n) == pytest.approx(np.sqrt(dp**2 / (n * p * (1 - p))), rel=1e-12)


@pytest.mark.parametrize(
    "efficiency, n, expected",
    [(1.0, 2, np.sqrt(2)), (1.0, 1, 1.0), (0.75, 4, np.sqrt(3)), (3 / 8, 4, np.sqrt(1.5))],
)
def test_ideal_fringe_reaches_sqrt_efficiency_n(efficiency, n, expected):
    curve = ideal_fringe_sensitivity(efficiency, n)
    assert curve.S_max == pytest.approx(expected, rel=1e-4)
    assert curve.S_max <= np.sqrt(n) * (1 + 1e-6)


@pytest.mark.parametrize("config, expected", [("10", 1.0), ("11", np.sqrt(2)), ("20", 1.0), ("22", np.sqrt(1.5))])
def test_ideal_model_fringes(config, expected):
    assert sensitivity_scan(config).S_max == pytest.approx(expected, rel=1e-4)


def test_callable_and_sampled_agree():
    a = analytic_sensitivity("P11", 2).S_max
    b = phase_sensitivity(scan("11", IDEAL, phis=np.linspace(0, 2 * np.pi, 2881)), 2).S_max
    assert a == pytest.approx(b, rel=1e-5)


def test_heisenberg_bound_never_exceeded():
    for config in ("10", "11", "20", "22"):
        curve = sensitivity_scan(config, FITTED)
        assert curve.S_max <= np.sqrt(curve.N) * (1 + 1e-6)


def test_extreme_probabilities_masked():
    curve = phase_sensitivity(lambda x: analytic_fringe("P11", x), 2)
    p = analytic_fringe("P11", curve.phis)
    assert np.all(np.isnan(curve.S_values[(p <= 1e-9) | (p >= 1 - 1e-9)]))


def test_coarse_grid_rejected():
    phis = np.linspace(0, 2 * np.pi, 25)
    fringe = FringeScan(phis, analytic_fringe("P22", phis), "22")
    with pytest.raises(CoarseGridError):
        phase_sensitivity(fringe, 4)


def test_non_uniform_grid_rejected():
    phis = np.sort(np.random.default_rng(0).uniform(0, 6, 200))
    with pytest.raises(ValueError):
        phase_sensitivity(FringeScan(phis, analytic_fringe("P11", phis)), 2)


class TestCombinedScheme:
    def test_values(self):
        f = combined_scheme_fringe(phis=np.array([0.0, np.pi / 4, np.pi / 2]))
        np.testing.assert_allclose(f.probs, [0.0, 0.75, 0.0], atol=1e-12)

    def test_beats_single_orientation(self):
        combined = phase_sensitivity(combined_scheme_fringe(), 4).S_max
        single = sensitivity_scan("22").S_max
        assert combined == pytest.approx(np.sqrt(3), rel=1e-4)
        assert combined > single

    def test_losses_excluded_by_default(self):
        lossless = phase_sensitivity(combined_scheme_fringe(FITTED), 4).S_max
        lossy = phase_sensitivity(combined_scheme_fringe(FITTED, exclude_losses=False), 4).S_max
        assert lossless > lossy


class TestSweeps:
    def test_indist_sweep_rises_with_flattening_slope(self):
        grid = np.linspace(0, 1, 11)
        values = np.array(sensitivity_sweep("22", "3,1", "indist", grid))
        assert np.all(np.diff(values) > 0)
        slopes = np.diff(values)
        assert slopes[:3].mean() > slopes[-3:].mean()
        assert values[-1] == pytest.approx(np.sqrt(1.5), rel=1e-4)

    def test_g2_sweep_decreases(self):
        values = sensitivity_sweep("22", "3,1", "g2", [0.0, 1e-3, 1e-2, 0.05, 0.1])
        assert np.all(np.diff(values) < 0)

    def test_single_photon_stays_at_shot_noise(self):
        values = sensitivity_sweep("10", "1,0", "g2", [0.0, 0.05, 0.1])
        np.testing.assert_allclose(values, 1.0, atol=1e-3)

    def test_ket11_indistinguishability(self):
        values = sensitivity_sweep("11", "1,1", "indist", [0.0, 1.0])
        assert values[0] == pytest.approx(1.0, rel=1e-4)
        assert values[1] == pytest.approx(np.sqrt(2), rel=1e-4)

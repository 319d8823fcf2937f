"""End-to-end acceptance checks, one test per criterion."""

import time

import numpy as np
from oracles import brute_force_distribution, printed_p31

from fringelab.ensemble import FITTED, IDEAL, InputConfig, SourceParams
from fringelab.fitsolver import contrast_vs_g2_curve, staged_workflow, synthesize_stages
from fringelab.fock import LabeledFockState
from fringelab.fringe import analytic_fringe, contrast, photon_number_product_expectation, scan
from fringelab.network import transfer_coefficients
from fringelab.propagator import Scheme, output_distribution
from fringelab.sensitivity import combined_scheme_fringe, phase_sensitivity, sensitivity_scan
from fringelab.temporal import WavepacketParams, contrast_decay_constant, contrast_vs_separation, emg_density, temporal_overlap

GRID = np.linspace(0.0, 2 * np.pi, 721)
TABLE = SourceParams(g2=0.018, indist=0.974, eta_c=0.803, eta_d=0.761, eta_e=0.178, eta_f=0.322)


def test_01_analytic_equivalence(criterion):
    start = time.perf_counter()
    errors = {
        kind: float(np.max(np.abs(scan(config, IDEAL, phis=GRID).probs - analytic_fringe(kind, GRID))))
        for config, kind in [("10", "P10"), ("11", "P11"), ("20", "P20"), ("22", "P22")]
    }
    elapsed = time.perf_counter() - start
    worst = max(errors.values())
    criterion(1, "analytic equivalence", worst < 1e-10 and elapsed < 1.0, f"max err {worst:.1e}, {elapsed:.2f} s")


def test_02_distinguishable_floor(criterion):
    f = scan("11", IDEAL.replace(indist=0.0), phis=GRID)
    err = float(np.max(np.abs(f.probs - analytic_fringe("distinguishable11", GRID))))
    c = contrast(f).mean_contrast
    ok = err < 1e-10 and abs(c - 1 / 3) < 1e-6
    criterion(2, "distinguishable floor", ok, f"fringe err {err:.1e}, contrast {c:.9f}")


def test_03_deep_minimum_invariance(criterion):
    phis = np.pi * np.arange(3)
    worst = max(
        float(scan("22", IDEAL.replace(indist=i), "3,1", phis).probs.max()) for i in (0.0, 0.25, 0.5, 0.75, 1.0)
    )
    criterion(3, "deep-minimum invariance", worst < 1e-10, f"max P(k pi) {worst:.1e}")


def test_04_worked_example_oracle(criterion):
    rng = np.random.default_rng(4)
    state = LabeledFockState.parse("2a 1a' 2b")
    photons = [("a", 0), ("a", 0), ("a", 1), ("b", 0), ("b", 0)]
    scheme = Scheme.at_least(3, 1)
    worst_closed = worst_brute = 0.0
    for _ in range(20):
        phi = rng.uniform(0, 2 * np.pi)
        etas = rng.uniform(0.05, 1.0, 4)
        coeffs = transfer_coefficients(phi=phi, eta_c=etas[0], eta_d=etas[1], eta_e=etas[2], eta_f=etas[3])
        engine = scheme.probability(output_distribution(state, coeffs))
        brute = scheme.probability(brute_force_distribution(photons, tuple(coeffs)))
        worst_closed = max(worst_closed, abs(engine - printed_p31(*coeffs)))
        worst_brute = max(worst_brute, abs(engine - brute))
    ok = worst_closed < 1e-9 and worst_brute < 1e-9
    criterion(4, "worked-example oracle", ok, f"closed form {worst_closed:.1e}, brute force {worst_brute:.1e}")


def test_05_fitted_fringe_reproduction(criterion):
    start = time.perf_counter()
    report = contrast(scan("22", TABLE, "3,1", GRID))
    elapsed = time.perf_counter() - start
    checks = [
        abs(report.mean_contrast - 0.841) <= 0.03,
        abs(report.deep_contrast - 0.909) <= 0.04,
        abs(report.shallow_contrast - 0.778) <= 0.04,
        elapsed < 10.0,
    ]
    detail = (
        f"mean {report.mean_contrast:.3f} (0.841+-0.03), deep {report.deep_contrast:.3f} (0.909+-0.04), "
        f"shallow {report.shallow_contrast:.3f} (0.778+-0.04), {elapsed:.2f} s"
    )
    criterion(5, "fitted |2,2> fringe", all(checks), detail)


def test_06_contrast_vs_g2(criterion):
    (_, c0), (_, c1) = contrast_vs_g2_curve(TABLE, [0.0, 0.018])
    ok = abs(c1 - 0.930) <= 0.01 and abs(c0 - 0.969) <= 0.01
    criterion(6, "contrast vs g2", ok, f"C(0.018) {c1:.4f}, C(0) {c0:.4f}")


def test_07_sensitivity_targets(criterion):
    ideal11 = sensitivity_scan("11", IDEAL).S_max
    ideal22 = phase_sensitivity(combined_scheme_fringe(IDEAL), 4).S_max
    fitted11 = sensitivity_scan("11", TABLE).S_max
    fitted22 = phase_sensitivity(combined_scheme_fringe(TABLE), 4).S_max
    ok = (
        abs(ideal11 - np.sqrt(2)) <= 1e-6
        and abs(ideal22 - np.sqrt(3)) <= 1e-4
        and abs(fitted11 - 1.39) <= 0.02
        and abs(fitted22 - 1.41) <= 0.03
    )
    detail = f"ideal 11 {ideal11:.8f}, ideal 22 {ideal22:.6f}, fitted 11 {fitted11:.4f}, fitted 22 {fitted22:.4f}"
    criterion(7, "sensitivity targets", ok, detail)


def test_08_n_photon_generalisations(criterion):
    products = [float(photon_number_product_expectation(n, 0.0)) for n in (2, 4, 6, 8)]
    exact = all(p == (n / 2) ** 2 for p, n in zip(products, (2, 4, 6, 8)))
    err = float(np.max(np.abs(analytic_fringe("holland_burnett", GRID, n=4) - analytic_fringe("P22", GRID))))
    criterion(8, "N-photon generalisations", exact and err < 1e-12, f"<n_e n_f>(0) {products}, HB(4) err {err:.1e}")


def test_09_fit_round_trip(criterion):
    truth = {
        InputConfig.KET10: {"eta_d": 0.781},
        InputConfig.KET20: {"eta_d": 0.761, "eta_f": 0.322},
        InputConfig.KET11: {"indist": 0.974},
        InputConfig.KET22: {"eta_e": 0.178},
    }
    hits: dict[str, int] = {}
    seeds = range(20)
    start = time.perf_counter()
    for seed in seeds:
        staged = staged_workflow(synthesize_stages(seed, peak_counts=1e5))
        for config, expected in truth.items():
            result = staged.results[config]
            for name, value in expected.items():
                key = f"{name}({config.value})"
                inside = abs(result.value(name) - value) <= 2 * result.uncertainties[name]
                hits[key] = hits.get(key, 0) + int(inside)
    elapsed = time.perf_counter() - start
    rates = {k: v / len(seeds) for k, v in hits.items()}
    ok = all(r >= 0.9 for r in rates.values()) and elapsed < 120
    detail = ", ".join(f"{k} {r:.0%}" for k, r in rates.items()) + f", {elapsed:.0f} s"
    criterion(9, "staged fit round trip", ok, detail)


def test_10_temporal_map(criterion):
    packet = WavepacketParams(T1=59.0, w_p=8.86)
    zero = temporal_overlap(0.0, packet)
    from scipy import integrate

    norms = [
        integrate.quad(lambda x: emg_density(x, K), -40, 40 * max(K, 1), limit=400, points=[0.0])[0]
        for K in (0.1, 1.0, 10.0, 100.0)
    ]
    curve = [c for _, c in contrast_vs_separation(np.linspace(0, 1200, 25), packet)]
    monotone = bool(np.all(np.diff(curve) <= 1e-12))
    floor = abs(curve[-1] - 1 / 3) < 1e-4 and min(curve) >= 1 / 3 - 1e-9
    decay = contrast_decay_constant(packet)
    ok = abs(zero - 1) < 1e-9 and max(abs(n - 1) for n in norms) < 1e-8 and monotone and floor
    ok = ok and abs(decay - packet.T1) <= 0.1 * packet.T1
    detail = (
        f"I(0) {zero}, norm err {max(abs(n - 1) for n in norms):.1e}, monotone {monotone}, "
        f"floor {curve[-1]:.6f}, decay {decay:.2f} ps"
    )
    criterion(10, "temporal map", ok, detail)


def test_11_calibration_round_trip(criterion):
    from fringelab.calib import fit_quadratic_plate_model, phase_from_intensity

    alpha = 150.0
    theta = np.linspace(-0.3, 0.3, 601)
    errors = []
    for seed in range(100):
        noise = np.random.default_rng(seed).normal(0, 0.01, theta.size)
        t, phi = phase_from_intensity(theta, np.cos(alpha * theta**2 + noise))
        errors.append(abs(fit_quadratic_plate_model(t, phi).coefficient / alpha - 1))
    worst = max(errors)
    criterion(11, "calibration round trip", worst < 0.01, f"worst coefficient error {worst:.2e} over 100 seeds")

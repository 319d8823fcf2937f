import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fringelab.ensemble import (
    FITTED,
    IDEAL,
    WEIGHT_TABLES,
    InputConfig,
    SourceParams,
    build_ensemble,
    ensemble_probability,
    mixed_probability,
)
from fringelab.propagator import Scheme, output_distribution

g2s = st.floats(0.0, 0.1)
indists = st.floats(0.0, 1.0)


@pytest.mark.parametrize("config", list(InputConfig))
def test_ideal_source_is_single_pure_state(config):
    ens = build_ensemble(config, IDEAL)
    nonzero = [(s, w) for s, w in ens if w > 0]
    assert len(nonzero) == 1
    assert nonzero[0][1] == 1.0
    assert nonzero[0][0].total_photons == config.n_photons


@given(g2s, indists)
@pytest.mark.parametrize("config", [InputConfig.KET10, InputConfig.KET11])
def test_weights_sum_to_one(config, g2, indist):
    ens = build_ensemble(config, SourceParams(g2=g2, indist=indist))
    assert ens.total_weight == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.001, 0.1), st.floats(0.0, 0.99))
@pytest.mark.parametrize("config", [InputConfig.KET20, InputConfig.KET22])
def test_probabilistic_preparation_weights_below_one(config, g2, indist):
    ens = build_ensemble(config, SourceParams(g2=g2, indist=indist))
    assert 0.0 < ens.total_weight < 1.0
    assert build_ensemble(config, SourceParams(g2=g2, indist=indist), renormalize=True).total_weight == pytest.approx(1.0)


def test_tables_have_expected_sizes():
    assert [len(WEIGHT_TABLES[c]) for c in InputConfig] == [2, 8, 6, 10]


def test_six_photon_entry_left_out():
    ens = build_ensemble(InputConfig.KET22, FITTED)
    six = [(s, w) for s, w in ens if s.total_photons == 6]
    assert len(six) == 1 and six[0][1] > 0
    coeffs = FITTED.coefficients(0.3)
    kept = sum(
        w * Scheme.parse("3,1").probability(output_distribution(s, coeffs))
        for s, w in ens
        if s.total_photons <= 5
    )
    assert ensemble_probability(ens, coeffs, "3,1") == pytest.approx(kept, rel=1e-14)


def test_ket10_independent_of_indist():
    phis = np.linspace(0, 2 * np.pi, 9)
    a = mixed_probability("10", SourceParams(g2=0.05, indist=0.2), phis, "1,0")
    b = mixed_probability("10", SourceParams(g2=0.05, indist=0.9), phis, "1,0")
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_distinguishable_ket11_visibility():
    phis = np.array([0.0, np.pi / 2])
    p = mixed_probability("11", IDEAL.replace(indist=0.0), phis, "1,1")
    # distinguishable photons never bunch, so the coincidence rate only halves
    assert p[0] == pytest.approx(1.0) and p[1] == pytest.approx(0.5)


def test_g2_soft_limit_warns():
    with pytest.warns(UserWarning, match="g2"):
        SourceParams(g2=0.15)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        SourceParams(g2=0.1)


@pytest.mark.parametrize("field", ["g2", "indist", "eta_c", "eta_f"])
@pytest.mark.parametrize("value", [-0.01, 1.01])
def test_out_of_range(field, value):
    with pytest.raises(ValueError):
        SourceParams(**{field: value})


def test_unknown_fixed():
    with pytest.raises(ValueError):
        SourceParams(fixed={"phi"})


@pytest.mark.parametrize("text, config", [("10", InputConfig.KET10), ("|2,2>", InputConfig.KET22), ("ket11", InputConfig.KET11)])
def test_config_parse(text, config):
    assert InputConfig.parse(text) is config
    assert InputConfig.parse(str(config)) is config


def test_json_output():
    obj = json.loads(build_ensemble("22", FITTED).to_json())
    assert len(obj) == 10
    assert obj[0]["state"] == {"a": [2], "b": [2]}
    assert obj[0]["alpha"] == pytest.approx(FITTED.indist**2 * (1 - FITTED.g2) ** 4)
    assert SourceParams(fixed={"g2"}).to_json_obj()["fixed"] == ["g2"]


def test_lossless_keeps_source():
    p = FITTED.lossless()
    assert (p.g2, p.indist) == (FITTED.g2, FITTED.indist)
    assert (p.eta_c, p.eta_d, p.eta_e, p.eta_f) == (1, 1, 1, 1)

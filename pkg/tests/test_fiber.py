import numpy as np
import pytest
from hypothesis import given, strategies as st

import supercl as s
from supercl.fiber import (
    FiberSpan, SampledCurve, alpha_linear, beta2, coupling_matrix,
    make_default_smf, raman_coupling,
)

LN10 = np.log(10.0)


def flat_alpha_span(alpha_db_km=0.225, length=100.0):
    base = make_default_smf(length)
    return FiberSpan(
        length_km=length,
        attenuation_db_km=SampledCurve.constant(alpha_db_km, 180.0, 215.0),
        dispersion_ps_nm_km=base.dispersion_ps_nm_km,
        gamma_w_km=base.gamma_w_km,
        raman_gain_w_km=base.raman_gain_w_km,
        lumped_loss_db=0.0,
    )


def test_curve_interpolation_and_clamping():
    c = SampledCurve(np.array([190.0, 196.0]), np.array([0.20, 0.22]))
    assert c(193.0) == pytest.approx(0.21)
    assert c(185.0) == 0.20     # clamp below
    assert c(200.0) == 0.22     # clamp above
    assert c(190.0) == 0.20     # exact at knot


def test_curve_needs_increasing_knots():
    with pytest.raises(ValueError):
        SampledCurve(np.array([1.0, 1.0]), np.array([0.0, 1.0]))


def test_alpha_linear_conversion():
    span = flat_alpha_span(0.225)
    # 0.225 * ln(10)/10; 22.5 dB over a 100 km span
    assert alpha_linear(span, 190.0) == pytest.approx(0.225 * LN10 / 10.0, rel=1e-12)


def test_beta2_value_and_sign(default_span):
    # -D lambda^2 / (2 pi c) at 193.4 THz, D = 16.7 ps/(nm km); the stored
    # dispersion curve is sampled every 0.5 THz, hence the loose tolerance
    lam = 299792.458 / 193.4
    expected = -16.7 * lam**2 / (2 * np.pi * 299792.458)
    assert beta2(default_span, 193.4) == pytest.approx(expected, rel=1e-4)
    assert expected == pytest.approx(-21.3, abs=0.1)
    # D > 0 everywhere in band -> beta2 < 0
    f = np.linspace(184.5, 196.6, 30)
    assert np.all(beta2(default_span, f) < 0)


def test_beta2_linear_in_dispersion(default_span):
    doubled = FiberSpan(
        length_km=default_span.length_km,
        attenuation_db_km=default_span.attenuation_db_km,
        dispersion_ps_nm_km=SampledCurve(
            default_span.dispersion_ps_nm_km.x, 2 * default_span.dispersion_ps_nm_km.y
        ),
        gamma_w_km=default_span.gamma_w_km,
        raman_gain_w_km=default_span.raman_gain_w_km,
        lumped_loss_db=default_span.lumped_loss_db,
    )
    assert beta2(doubled, 190.0) == pytest.approx(2 * beta2(default_span, 190.0), rel=1e-12)


def test_zero_dispersion_gives_zero_beta2(default_span):
    span = FiberSpan(
        length_km=100.0,
        attenuation_db_km=default_span.attenuation_db_km,
        dispersion_ps_nm_km=SampledCurve.constant(0.0, 180.0, 200.0),
        gamma_w_km=default_span.gamma_w_km,
        raman_gain_w_km=default_span.raman_gain_w_km,
    )
    assert beta2(span, 190.0) == 0.0


def test_beta2_rejects_nonpositive_frequency(default_span):
    with pytest.raises(ValueError):
        beta2(default_span, 0.0)


def test_raman_coupling_signs():
    span = make_default_smf(100.0)
    cr10 = float(span.raman_gain_w_km(10.0))
    assert raman_coupling(span, 196.0, 196.0) == 0.0
    assert raman_coupling(span, 196.0, 186.0) == pytest.approx(cr10)
    # depleted side carries the photon-conservation factor
    assert raman_coupling(span, 186.0, 196.0) == pytest.approx(-(196.0 / 186.0) * cr10)


@given(
    st.floats(min_value=184.0, max_value=212.0),
    st.floats(min_value=184.0, max_value=212.0),
)
def test_raman_coupling_photon_antisymmetry(fa, fb):
    span = make_default_smf(100.0)
    ab = raman_coupling(span, fa, fb)   # rate constant seen by channel b
    ba = raman_coupling(span, fb, fa)   # rate constant seen by channel a
    # photon-flux balance of the pair ODE: ab/fb + ba/fa = 0
    assert ab / fb + ba / fa == pytest.approx(0.0, abs=1e-12)


def test_coupling_matrix_matches_scalar(default_span):
    f = np.array([185.0, 190.0, 196.0])
    k = coupling_matrix(default_span, f)
    for b in range(3):
        for a in range(3):
            assert k[b, a] == pytest.approx(raman_coupling(default_span, f[a], f[b]))


def test_default_smf_span_loss_reference():
    span = make_default_smf(100.0)
    total = 100.0 * span.attenuation_db_km(193.4) + span.lumped_loss_db
    assert total == pytest.approx(22.5, abs=1e-9)


def test_default_smf_length_scaling():
    s100 = make_default_smf(100.0)
    s50 = make_default_smf(50.0)
    fiber_100 = 100.0 * s100.attenuation_db_km(193.4)
    fiber_50 = 50.0 * s50.attenuation_db_km(193.4)
    assert fiber_50 == pytest.approx(fiber_100 / 2.0, rel=1e-12)
    assert s50.lumped_loss_db == pytest.approx(s100.lumped_loss_db, rel=1e-12)


def test_default_smf_attenuation_only_propagation(paper_grid):
    span = flat_alpha_span(0.2, length=80.0)
    launch = s.PowerSpectrum.flat(0.0, paper_grid.n_channels)
    evo = s.evolve_signals(span, launch, paper_grid, isrs_enabled=False)
    np.testing.assert_allclose(evo.output_mw, 10 ** (-0.2 * 80.0 / 10.0), rtol=1e-12)


def test_span_validation(default_span):
    with pytest.raises(ValueError):
        FiberSpan(
            length_km=0.0,
            attenuation_db_km=default_span.attenuation_db_km,
            dispersion_ps_nm_km=default_span.dispersion_ps_nm_km,
            gamma_w_km=default_span.gamma_w_km,
            raman_gain_w_km=default_span.raman_gain_w_km,
        )
    with pytest.raises(ValueError, match="zero offset"):
        FiberSpan(
            length_km=100.0,
            attenuation_db_km=default_span.attenuation_db_km,
            dispersion_ps_nm_km=default_span.dispersion_ps_nm_km,
            gamma_w_km=default_span.gamma_w_km,
            raman_gain_w_km=SampledCurve(np.array([0.0, 13.2]), np.array([0.1, 0.4])),
        )


def test_pump_set_validation():
    with pytest.raises(ValueError):
        s.RamanPumpSet(f_thz=np.array([210.0]), power_mw=np.array([-1.0]))
    ok = s.RamanPumpSet(f_thz=np.array([210.0, 205.0]), power_mw=np.array([100.0, 0.0]))
    assert ok.n_pumps == 2


def test_link_requires_matching_lists(default_span):
    nf = s.default_nf_curve()
    with pytest.raises(ValueError):
        s.Link(spans=(default_span,), nf_db=(nf, nf), raman=(None,))

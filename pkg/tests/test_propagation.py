import numpy as np
import pytest

import supercl as s
from supercl.fiber import FiberSpan, SampledCurve, make_default_smf
from supercl.grid import Band, ChannelGrid
from supercl.propagation import evolve_signals, evolve_with_counterpumps, normalized_profile

WIDE = (180.0, 215.0)


def lossless_span(cr_peak=0.35, df_peak=10.0, length=100.0):
    """alpha ~ 0 span with a simple triangular Raman curve."""
    base = make_default_smf(length)
    return FiberSpan(
        length_km=length,
        attenuation_db_km=SampledCurve.constant(1e-12, *WIDE),
        dispersion_ps_nm_km=base.dispersion_ps_nm_km,
        gamma_w_km=base.gamma_w_km,
        raman_gain_w_km=SampledCurve(
            np.array([0.0, df_peak, 30.0]), np.array([0.0, cr_peak, 0.0])
        ),
        lumped_loss_db=0.0,
    )


def two_channel_grid(f_lo=186.0, f_hi=196.0):
    return ChannelGrid(
        f_thz=np.array([f_lo, f_hi]),
        symbol_rate_gbaud=np.full(2, 100.0),
        roll_off=np.full(2, 0.1),
        band_index=np.array([0, 1]),
        bands=(Band("L", 184.50, 190.32), Band("C", 190.75, 196.57)),
    )


def two_channel_lossless_solution(p1_mw, p2_mw, f1, f2, cr, z_km):
    """Closed-form lossless two-channel transfer: the low-frequency power
    follows a logistic curve, the partner follows from photon-flux
    conservation."""
    a = cr * 1e-3                 # gain rate per mW
    b = (f2 / f1) * cr * 1e-3     # depletion rate per mW
    q = b * p1_mw + a * p2_mw
    p1 = q / (b + (q / p1_mw - b) * np.exp(-q * z_km))
    p2 = (q - b * p1) / a
    return p1, p2


def test_single_channel_isrs_is_pure_loss(default_span, paper_grid):
    g1 = ChannelGrid(
        f_thz=np.array([193.4]), symbol_rate_gbaud=np.array([100.0]),
        roll_off=np.array([0.1]), band_index=np.array([1]), bands=s.DEFAULT_BANDS,
    )
    launch = s.PowerSpectrum(np.array([2.0]))
    evo = evolve_signals(default_span, launch, g1, isrs_enabled=True)
    loss_db = 100.0 * default_span.attenuation_db_km(193.4) + default_span.lumped_loss_db
    out_dbm = s.mw_to_dbm(evo.output_mw[0])
    assert out_dbm == pytest.approx(2.0 - loss_db, abs=1e-6)


def test_isrs_off_equals_analytic_attenuation(default_span, paper_grid):
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    evo = evolve_signals(default_span, launch, paper_grid, isrs_enabled=False)
    alpha = s.alpha_linear(default_span, paper_grid.f_thz)
    expected = launch.mw * np.exp(-alpha * 100.0)
    expected_out = expected * 10 ** (-default_span.lumped_loss_db / 10.0)
    np.testing.assert_array_equal(evo.signal_mw[-1], expected_out)
    inner = launch.mw[None, :] * np.exp(-np.outer(evo.z_km[:-1], alpha))
    np.testing.assert_array_equal(evo.signal_mw[:-1], inner)


def test_two_channel_lossless_matches_logistic_oracle():
    span = lossless_span()
    grid = two_channel_grid()
    launch = s.PowerSpectrum.from_mw(np.array([100.0, 100.0]))
    evo = evolve_signals(span, launch, grid, step_km=0.1)
    p1, p2 = two_channel_lossless_solution(100.0, 100.0, 186.0, 196.0, 0.35, evo.z_km)
    np.testing.assert_allclose(evo.signal_mw[:, 0], p1, rtol=1e-9)
    np.testing.assert_allclose(evo.signal_mw[:, 1], p2, rtol=1e-9)
    # photon flux is conserved along the way
    flux = evo.signal_mw[:, 0] / 186.0 + evo.signal_mw[:, 1] / 196.0
    np.testing.assert_allclose(flux, flux[0], rtol=1e-9)
    # energy flows downhill: lower-frequency channel never shrinks
    assert np.all(np.diff(evo.signal_mw[:, 0]) >= 0)


def test_normalized_profile_basics(default_span, paper_grid):
    launch = s.PowerSpectrum.flat(0.0, paper_grid.n_channels)
    evo = evolve_signals(default_span, launch, paper_grid)
    rho = normalized_profile(evo, 3)
    assert rho[0] == 1.0
    assert np.all(rho > 0)
    evo_off = evolve_signals(default_span, launch, paper_grid, isrs_enabled=False)
    rho_off = normalized_profile(evo_off, 3)
    alpha = s.alpha_linear(default_span, paper_grid.f_thz[3])
    np.testing.assert_allclose(rho_off[:-1], np.exp(-alpha * evo_off.z_km[:-1]), rtol=1e-12)


def test_photon_conservation_lossless_100_channels(paper_grid):
    span = lossless_span(cr_peak=0.42, df_peak=13.2)
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    evo = evolve_signals(span, launch, paper_grid, step_km=0.25)
    flux = evo.signal_mw @ (1.0 / paper_grid.f_thz)
    drift = np.max(np.abs(flux / flux[0] - 1.0))
    assert drift < 1e-6


def test_step_halving_changes_little(default_span, paper_grid):
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    out_a = evolve_signals(default_span, launch, paper_grid, step_km=0.25).output_mw
    out_b = evolve_signals(default_span, launch, paper_grid, step_km=0.125).output_mw
    assert np.max(np.abs(10 * np.log10(out_a / out_b))) < 0.001


def test_partial_final_step(default_span, paper_grid):
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    evo = evolve_signals(default_span, launch, paper_grid, step_km=0.3)
    assert evo.z_km[-1] == pytest.approx(100.0)
    ref = evolve_signals(default_span, launch, paper_grid, step_km=0.25)
    assert np.max(np.abs(10 * np.log10(evo.output_mw / ref.output_mw))) < 1e-3


def test_zero_power_pumps_identical_to_unpumped(default_span, paper_grid):
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    pumps = s.RamanPumpSet(f_thz=np.array([205.0]), power_mw=np.array([0.0]))
    evo_p = evolve_with_counterpumps(default_span, launch, paper_grid, pumps)
    evo_u = evolve_signals(default_span, launch, paper_grid)
    np.testing.assert_array_equal(evo_p.signal_mw, evo_u.signal_mw)


def test_lone_pump_decays_at_its_own_rate(default_span):
    grid = two_channel_grid()
    launch = s.PowerSpectrum(np.array([-80.0, -80.0]))  # negligible signal
    pumps = s.RamanPumpSet(f_thz=np.array([205.0]), power_mw=np.array([100.0]))
    evo = evolve_with_counterpumps(default_span, launch, grid, pumps)
    alpha = s.alpha_linear(default_span, 205.0)
    expected = 100.0 * np.exp(-alpha * (default_span.length_km - evo.z_km))
    np.testing.assert_allclose(evo.pump_mw[:, 0], expected, rtol=1e-6)


def test_counterpump_fixed_point(default_span, paper_grid, caption_pumps):
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    evo = evolve_with_counterpumps(default_span, launch, paper_grid, caption_pumps, tol_db=0.01)
    tight = evolve_with_counterpumps(default_span, launch, paper_grid, caption_pumps, tol_db=0.001)
    assert np.max(np.abs(10 * np.log10(evo.signal_mw / tight.signal_mw))) < 0.01


def test_counterpump_gain_structure(default_span, paper_grid, caption_pumps):
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    evo_p = evolve_with_counterpumps(default_span, launch, paper_grid, caption_pumps)
    evo_u = evolve_signals(default_span, launch, paper_grid)
    onoff = 10 * np.log10(evo_p.output_mw / evo_u.output_mw)
    assert np.all(onoff > 0)                      # net loss reduced everywhere
    assert onoff.argmin() == 0                    # weakest at the low-L edge
    c_idx = paper_grid.channels_in_band(1)
    assert onoff[c_idx].mean() > onoff[0] + 3.0   # C-band favored over low-L


def test_counterpump_nonconvergence_reports_residual(default_span, paper_grid, caption_pumps):
    launch = s.PowerSpectrum.flat(2.0, paper_grid.n_channels)
    with pytest.raises(s.ConvergenceError) as err:
        evolve_with_counterpumps(default_span, launch, paper_grid, caption_pumps, max_sweeps=1)
    assert err.value.residual_db > 0.01


def test_blowup_raises(paper_grid):
    span = lossless_span(cr_peak=0.42)
    # absurd launch drives the coupled system to negative powers fast
    launch = s.PowerSpectrum.flat(33.0, paper_grid.n_channels)
    with pytest.raises(ValueError, match="non-positive power"):
        evolve_signals(span, launch, paper_grid, step_km=5.0)

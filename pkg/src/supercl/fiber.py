"""Frequency-dependent fiber parameters for a span.

All curves are piecewise-linear in their sampled knots and clamp to the
end values outside the knot range, so Raman pumps far above the signal
band see the last characterized value instead of a wild extrapolation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import C_NM_THZ, alpha_db_km_to_lin, frozen_array


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Piecewise-linear curve y(x) through >= 2 knots, clamped at the ends."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", frozen_array(self.x))
        object.__setattr__(self, "y", frozen_array(self.y))
        if self.x.ndim != 1 or len(self.x) < 2 or len(self.x) != len(self.y):
            raise ValueError("curve needs >= 2 knots with matching x/y")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("curve knots must be strictly increasing in x")

    def __call__(self, q):
        return np.interp(q, self.x, self.y)

    @classmethod
    def constant(cls, value: float, lo: float = 0.0, hi: float = 1000.0) -> "SampledCurve":
        return cls(np.array([lo, hi]), np.array([value, value]))

    def knots(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.x, self.y)]


@dataclass(frozen=True, eq=False)
class FiberSpan:
    """One fiber span: length plus frequency-dependent loss, dispersion,
    nonlinearity and Raman efficiency, with lumped connector/splice loss
    applied at the span output."""

    length_km: float
    attenuation_db_km: SampledCurve   # alpha(f) in dB/km vs THz
    dispersion_ps_nm_km: SampledCurve  # D(f) in ps/(nm km) vs THz
    gamma_w_km: SampledCurve          # gamma(f) in 1/(W km) vs THz
    raman_gain_w_km: SampledCurve     # C_R(df) in 1/(W km) vs pump-signal offset THz
    lumped_loss_db: float = 0.0

    def __post_init__(self):
        if not self.length_km > 0:
            raise ValueError("span length must be > 0")
        if np.any(self.attenuation_db_km.y <= 0):
            raise ValueError("attenuation must be > 0 everywhere")
        cr = self.raman_gain_w_km
        if np.any(cr.y < 0):
            raise ValueError("Raman efficiency must be >= 0")
        if cr(0.0) != 0.0:
            raise ValueError("Raman efficiency must vanish at zero offset")
        if self.lumped_loss_db < 0:
            raise ValueError("lumped loss must be >= 0 dB")


@dataclass(frozen=True, eq=False)
class RamanPumpSet:
    """Counter-propagating Raman pumps injected at the span output."""

    f_thz: np.ndarray
    power_mw: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f_thz", frozen_array(self.f_thz))
        object.__setattr__(self, "power_mw", frozen_array(self.power_mw))
        if len(self.f_thz) != len(self.power_mw) or len(self.f_thz) == 0:
            raise ValueError("pump set needs matching, non-empty frequency/power arrays")
        if np.any(self.power_mw < 0) or not np.all(np.isfinite(self.power_mw)):
            raise ValueError("pump powers must be finite and >= 0")
        if np.any(self.f_thz <= 0):
            raise ValueError("pump frequencies must be > 0")

    @property
    def n_pumps(self) -> int:
        return len(self.f_thz)


@dataclass(frozen=True, eq=False)
class Link:
    """A chain of spans, each followed by an EDFA described by its
    noise-figure curve, with an optional Raman pump set per span."""

    spans: tuple[FiberSpan, ...]
    nf_db: tuple[SampledCurve, ...]
    raman: tuple[RamanPumpSet | None, ...]

    def __post_init__(self):
        if len(self.spans) < 1:
            raise ValueError("link needs at least one span")
        if len(self.nf_db) != len(self.spans) or len(self.raman) != len(self.spans):
            raise ValueError("per-span amplifier/pump lists must match span count")

    @property
    def n_spans(self) -> int:
        return len(self.spans)

    @property
    def length_km(self) -> float:
        return float(sum(s.length_km for s in self.spans))


def build_link(spans, nf_curve, raman=None) -> Link:
    """Assemble a link from spans sharing one NF curve and pump set."""
    spans = tuple(spans)
    return Link(
        spans=spans,
        nf_db=tuple(nf_curve for _ in spans),
        raman=tuple(raman for _ in spans),
    )


def alpha_linear(span: FiberSpan, f_thz):
    """Power attenuation coefficient in 1/km at frequency f (clamped)."""
    return alpha_db_km_to_lin(span.attenuation_db_km(f_thz))


def beta2(span: FiberSpan, f_thz):
    """Group-velocity dispersion beta2 in ps^2/km from D(f).

    beta2 = -D * lambda^2 / (2 pi c); anomalous dispersion (D > 0) gives
    beta2 < 0.
    """
    f = np.asarray(f_thz, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency must be > 0")
    lam_nm = C_NM_THZ / f
    out = -span.dispersion_ps_nm_km(f) * lam_nm**2 / (2.0 * np.pi * C_NM_THZ)
    return float(out) if np.isscalar(f_thz) else out


def beta3(span: FiberSpan, f_thz, df: float = 0.01):
    """Third-order dispersion d(beta2)/d(omega) in ps^3/km, by central
    difference of beta2(f)."""
    b2p = beta2(span, np.asarray(f_thz, dtype=float) + df)
    b2m = beta2(span, np.asarray(f_thz, dtype=float) - df)
    out = (b2p - b2m) / (2.0 * df) / (2.0 * np.pi)
    return float(out) if np.isscalar(f_thz) else out


def raman_coupling(span: FiberSpan, f_a: float, f_b: float) -> float:
    """Signed Raman efficiency in 1/(W km) seen by channel b due to a.

    A higher-frequency channel pumps a lower one (+C_R); the reverse
    direction depletes, scaled by f_b/f_a so photon count is conserved.
    """
    if f_a <= 0 or f_b <= 0:
        raise ValueError("frequencies must be > 0")
    if f_a == f_b:
        return 0.0
    if f_a > f_b:
        return float(span.raman_gain_w_km(f_a - f_b))
    return float(-(f_b / f_a) * span.raman_gain_w_km(f_b - f_a))


def coupling_matrix(span: FiberSpan, f_thz: np.ndarray) -> np.ndarray:
    """Matrix K with K[b, a] = raman_coupling(span, f_a, f_b)."""
    f = np.asarray(f_thz, dtype=float)
    fb = f[:, None]
    fa = f[None, :]
    cr_gain = span.raman_gain_w_km(np.abs(fa - fb))
    k = np.where(fa > fb, cr_gain, -(fb / fa) * cr_gain)
    np.fill_diagonal(k, 0.0)
    return k


# representative SMF profile; every curve is overridable from a scenario file
DEFAULT_ATTENUATION_KNOTS = ((184.5, 0.235), (190.5, 0.222), (196.6, 0.225))
DEFAULT_GAMMA_KNOTS = ((184.5, 1.1), (196.6, 1.4))
DEFAULT_DISPERSION_REF = (193.4, 16.7)    # THz, ps/(nm km)
DEFAULT_DISPERSION_SLOPE = 0.067          # ps/(nm^2 km)
# silica-like Raman efficiency vs frequency offset: near-linear rise to the
# 13.2 THz peak, steep fall past the peak, weak shoulder, zero by 30 THz
DEFAULT_RAMAN_KNOTS = (
    (0.0, 0.0), (1.0, 0.012), (3.0, 0.046), (5.0, 0.095), (7.0, 0.152),
    (9.0, 0.220), (11.0, 0.318), (12.0, 0.380), (13.2, 0.420), (14.0, 0.405),
    (15.0, 0.288), (15.8, 0.180), (16.5, 0.115), (18.0, 0.093), (19.0, 0.075),
    (20.5, 0.060), (22.0, 0.046), (24.0, 0.032), (26.0, 0.018), (28.0, 0.008),
    (30.0, 0.0),
)
SPAN_LOSS_REF_THZ = 193.4
SPAN_LOSS_REF_DB = 22.5     # total loss of a 100 km span at the reference frequency


def _curve_from_knots(knots) -> SampledCurve:
    arr = np.asarray(knots, dtype=float)
    return SampledCurve(arr[:, 0], arr[:, 1])


def default_dispersion_curve() -> SampledCurve:
    """D(f) sampled from the wavelength-domain slope model."""
    f = np.arange(183.0, 198.01, 0.5)
    lam = C_NM_THZ / f
    lam_ref = C_NM_THZ / DEFAULT_DISPERSION_REF[0]
    d = DEFAULT_DISPERSION_REF[1] + DEFAULT_DISPERSION_SLOPE * (lam - lam_ref)
    return SampledCurve(f, d)


def make_default_smf(length_km: float) -> FiberSpan:
    """Representative SMF span of the requested length.

    The lumped connector loss is fixed so that a 100 km span totals
    22.5 dB at 193.4 THz; it does not scale with length.
    """
    if length_km <= 0:
        raise ValueError("length must be > 0")
    att = _curve_from_knots(DEFAULT_ATTENUATION_KNOTS)
    lumped = SPAN_LOSS_REF_DB - 100.0 * float(att(SPAN_LOSS_REF_THZ))
    return FiberSpan(
        length_km=float(length_km),
        attenuation_db_km=att,
        dispersion_ps_nm_km=default_dispersion_curve(),
        gamma_w_km=_curve_from_knots(DEFAULT_GAMMA_KNOTS),
        raman_gain_w_km=_curve_from_knots(DEFAULT_RAMAN_KNOTS),
        lumped_loss_db=lumped,
    )


def default_nf_curve(nf_l_db: float = 6.0, nf_c_db: float = 5.0) -> SampledCurve:
    """Flat per-band EDFA noise figure: nf_l below the guard gap, nf_c above."""
    return SampledCurve(
        np.array([184.50, 190.32, 190.75, 196.57]),
        np.array([nf_l_db, nf_l_db, nf_c_db, nf_c_db]),
    )

"""Amplification bands and the WDM channel grid.

A grid is a flat comb of channels, each belonging to one band.  Channels
are placed symmetrically about each band center; combs may overhang the
band edges by at most half a channel spacing per side, which matches how
dense combs fill an amplification band edge-to-edge in practice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import dbm_to_mw, frozen_array, mw_to_dbm


@dataclass(frozen=True)
class Band:
    """One amplification band, delimited by [f_lo, f_hi] in THz."""

    name: str
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.f_lo < self.f_hi:
            raise ValueError(f"band {self.name}: f_lo must be < f_hi")

    @property
    def center_thz(self) -> float:
        return 0.5 * (self.f_lo + self.f_hi)

    @property
    def width_thz(self) -> float:
        return self.f_hi - self.f_lo


# default super-L / super-C band plan
SUPER_L = Band("L", 184.50, 190.32)
SUPER_C = Band("C", 190.75, 196.57)
DEFAULT_BANDS = (SUPER_L, SUPER_C)


@dataclass(frozen=True, eq=False)
class ChannelGrid:
    """Ordered WDM comb: center frequencies, symbol rates, band membership."""

    f_thz: np.ndarray
    symbol_rate_gbaud: np.ndarray
    roll_off: np.ndarray
    band_index: np.ndarray
    bands: tuple[Band, ...]

    def __post_init__(self):
        object.__setattr__(self, "f_thz", frozen_array(self.f_thz))
        object.__setattr__(self, "symbol_rate_gbaud", frozen_array(self.symbol_rate_gbaud))
        object.__setattr__(self, "roll_off", frozen_array(self.roll_off))
        object.__setattr__(self, "band_index", frozen_array(self.band_index, dtype=int))
        f = self.f_thz
        if f.ndim != 1 or len(f) == 0:
            raise ValueError("grid must contain at least one channel")
        if not (len(f) == len(self.symbol_rate_gbaud) == len(self.roll_off) == len(self.band_index)):
            raise ValueError("grid arrays must have equal length")
        if np.any(np.diff(f) <= 0):
            raise ValueError("channel frequencies must be strictly increasing")
        occ = self.symbol_rate_gbaud * (1.0 + self.roll_off) / 1000.0  # THz
        if np.any(f[1:] - occ[1:] / 2 < f[:-1] + occ[:-1] / 2 - 1e-12):
            raise ValueError("adjacent channel occupancies overlap")
        for i, b in enumerate(self.band_index):
            band = self.bands[b]
            if not (band.f_lo <= f[i] <= band.f_hi):
                raise ValueError(f"channel {i} at {f[i]:.4f} THz outside band {band.name}")

    @property
    def n_channels(self) -> int:
        return len(self.f_thz)

    @property
    def bandwidth_thz(self) -> np.ndarray:
        """Per-channel noise/signal bandwidth (= symbol rate) in THz."""
        return self.symbol_rate_gbaud / 1000.0

    def band_of(self, index: int) -> Band:
        return self.bands[int(self.band_index[index])]

    def channels_in_band(self, band_idx: int) -> np.ndarray:
        return np.flatnonzero(self.band_index == band_idx)


def build_grid(bands, per_band_count, spacing_ghz, symbol_rate_gbaud, roll_off) -> ChannelGrid:
    """Build a uniform comb of ``per_band_count`` channels per band.

    The comb in each band is centered on the band; it may overhang each
    band edge by at most half a spacing, otherwise the comb is rejected.
    """
    bands = tuple(bands)
    if per_band_count < 1:
        raise ValueError("per_band_count must be >= 1")
    if spacing_ghz <= 0 or symbol_rate_gbaud <= 0:
        raise ValueError("spacing and symbol rate must be > 0")
    if symbol_rate_gbaud * (1.0 + roll_off) > spacing_ghz * (1 + 1e-12):
        raise ValueError("channel occupancy exceeds spacing: comb would overlap")
    for lo, hi in zip(bands[:-1], bands[1:]):
        if lo.f_hi >= hi.f_lo:
            raise ValueError("bands must be disjoint and sorted by frequency")

    spacing_thz = spacing_ghz / 1000.0
    comb_width = (per_band_count - 1) * spacing_thz
    freqs = []
    band_idx = []
    for b, band in enumerate(bands):
        overhang = (per_band_count * spacing_thz - band.width_thz) / 2.0
        if overhang > spacing_thz / 2.0 + 1e-12:
            raise ValueError(
                f"comb of {per_band_count} x {spacing_ghz} GHz overflows band {band.name} "
                f"by {overhang * 1e3:.1f} GHz per side"
            )
        first = band.center_thz - comb_width / 2.0
        freqs.extend(first + k * spacing_thz for k in range(per_band_count))
        band_idx.extend([b] * per_band_count)

    n = len(freqs)
    return ChannelGrid(
        f_thz=np.array(freqs),
        symbol_rate_gbaud=np.full(n, float(symbol_rate_gbaud)),
        roll_off=np.full(n, float(roll_off)),
        band_index=np.array(band_idx),
        bands=bands,
    )


def default_grid() -> ChannelGrid:
    """The reference 100-channel super-(C+L) comb: 50 channels per band,
    118.75 GHz spacing, 100 GBaud, roll-off 0.1."""
    return build_grid(DEFAULT_BANDS, 50, 118.75, 100.0, 0.1)


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    """Per-channel launch power in dBm, aligned index-for-index with a grid."""

    dbm: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.dbm, dtype=float)
        if a.ndim != 1 or not np.all(np.isfinite(a)):
            raise ValueError("power spectrum must be a 1-D finite dBm array")
        object.__setattr__(self, "dbm", frozen_array(a))

    @classmethod
    def from_mw(cls, mw) -> "PowerSpectrum":
        return cls(mw_to_dbm(np.asarray(mw, dtype=float)))

    @classmethod
    def flat(cls, level_dbm: float, n: int) -> "PowerSpectrum":
        return cls(np.full(n, float(level_dbm)))

    @property
    def mw(self) -> np.ndarray:
        return dbm_to_mw(self.dbm)

    def __len__(self) -> int:
        return len(self.dbm)

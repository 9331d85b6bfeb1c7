"""Unit conventions and conversions shared across the package.

Frequencies are in THz, distances in km, powers in dBm at module
boundaries and in mW (linear) inside numerical code.  Dispersion is
handled in ps^2/km, nonlinearity and Raman efficiency in 1/(W km).
"""
from __future__ import annotations

import numpy as np

# speed of light in nm*THz (identical in nm/ps), so wavelength_nm = C_NM_THZ / f_thz
C_NM_THZ = 299792.458
# Planck constant in J*s
PLANCK_JS = 6.62607015e-34

LN10 = np.log(10.0)

trapezoid = np.trapezoid if hasattr(np, "trapezoid") else np.trapz


def dbm_to_mw(p_dbm):
    """Convert power from dBm to mW.  Rejects non-finite input."""
    p = np.asarray(p_dbm, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite power in dBm")
    out = 10.0 ** (p / 10.0)
    return float(out) if np.isscalar(p_dbm) else out


def mw_to_dbm(p_mw):
    """Convert power from mW to dBm.  Power must be strictly positive."""
    p = np.asarray(p_mw, dtype=float)
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise ValueError("power in mW must be finite and > 0")
    out = 10.0 * np.log10(p)
    return float(out) if np.isscalar(p_mw) else out


def db_to_lin(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def alpha_db_km_to_lin(alpha_db_km):
    """Power attenuation dB/km -> 1/km (field of power)."""
    return np.asarray(alpha_db_km, dtype=float) * LN10 / 10.0


def frozen_array(values, dtype=float) -> np.ndarray:
    """Copy ``values`` into a read-only float array."""
    a = np.array(values, dtype=dtype)
    a.setflags(write=False)
    return a

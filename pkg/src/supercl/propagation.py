"""Power evolution inside one span.

Signals follow the coupled Raman power ODEs

    dP_i/dz = P_i * ( -alpha(f_i) + sum_j K[i, j] * P_j )

integrated with fixed-step classical RK4.  With inter-channel Raman
scattering disabled the system separates and is evolved analytically.
Counter-propagating pumps turn the problem into a two-point boundary
value problem, solved by alternating frozen-field sweeps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fiber import FiberSpan, RamanPumpSet, alpha_linear, coupling_matrix
from .grid import ChannelGrid, PowerSpectrum
from .units import db_to_lin, frozen_array


class ConvergenceError(RuntimeError):
    """Raised when the counter-pump sweep iteration does not converge."""

    def __init__(self, message: str, residual_db: float):
        super().__init__(message)
        self.residual_db = residual_db


@dataclass(frozen=True, eq=False)
class PowerEvolution:
    """Per-channel (and per-pump) power in mW versus distance in one span."""

    z_km: np.ndarray                 # positions, 0 .. span length
    signal_mw: np.ndarray            # [z, channel]
    pump_mw: np.ndarray | None = None  # [z, pump], counter-propagating

    def __post_init__(self):
        object.__setattr__(self, "z_km", frozen_array(self.z_km))
        object.__setattr__(self, "signal_mw", frozen_array(self.signal_mw))
        if self.pump_mw is not None:
            object.__setattr__(self, "pump_mw", frozen_array(self.pump_mw))
        if np.any(np.diff(self.z_km) <= 0):
            raise ValueError("z grid must be strictly increasing")
        if self.signal_mw.shape[0] != len(self.z_km):
            raise ValueError("signal matrix rows must match z grid")
        if np.any(self.signal_mw <= 0):
            raise ValueError("signal powers must stay > 0")

    @property
    def launch_mw(self) -> np.ndarray:
        return self.signal_mw[0]

    @property
    def output_mw(self) -> np.ndarray:
        return self.signal_mw[-1]


def normalized_profile(evolution: PowerEvolution, channel_index: int) -> np.ndarray:
    """rho_i(z) = P_i(z) / P_i(0) for one channel."""
    p = evolution.signal_mw[:, channel_index]
    return p / p[0]


def normalized_profiles(evolution: PowerEvolution) -> np.ndarray:
    """All rho_i(z) as a [z, channel] matrix."""
    return evolution.signal_mw / evolution.signal_mw[0]


def _z_grid(length_km: float, step_km: float) -> np.ndarray:
    """Uniform grid with a final partial step when step does not divide
    the length."""
    if step_km <= 0:
        raise ValueError("step must be > 0")
    n_full = int(np.floor(length_km / step_km + 1e-9))
    z = step_km * np.arange(n_full + 1)
    if z[-1] < length_km - 1e-9 * max(1.0, length_km):
        z = np.append(z, length_km)
    else:
        z[-1] = length_km
    return z


def _rk4_forward(p0: np.ndarray, z: np.ndarray, rhs) -> np.ndarray:
    """Fixed-step RK4 of dP/dz = rhs(k, frac, P); ``k`` is the interval
    index and ``frac`` the position inside it (0, 0.5 or 1), so frozen
    external fields can be sampled without interpolation machinery."""
    out = np.empty((len(z), len(p0)))
    out[0] = p0
    p = p0.copy()
    for k in range(len(z) - 1):
        h = z[k + 1] - z[k]
        k1 = rhs(k, 0.0, p)
        k2 = rhs(k, 0.5, p + 0.5 * h * k1)
        k3 = rhs(k, 0.5, p + 0.5 * h * k2)
        k4 = rhs(k, 1.0, p + h * k3)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(p <= 0.0) or not np.all(np.isfinite(p)):
            raise ValueError(f"non-positive power during integration at z={z[k + 1]:.3f} km")
        out[k + 1] = p
    return out


def evolve_signals(
    span: FiberSpan,
    launch: PowerSpectrum,
    grid: ChannelGrid,
    step_km: float = 0.25,
    isrs_enabled: bool = True,
) -> PowerEvolution:
    """Propagate the comb through one span, signals only.

    With ISRS disabled each channel sees pure attenuation and the exact
    exponential solution is returned.  The lumped span loss is applied to
    the final row.
    """
    p0 = launch.mw
    if len(p0) != grid.n_channels:
        raise ValueError("launch spectrum length must match grid")
    z = _z_grid(span.length_km, step_km)
    alpha = alpha_linear(span, grid.f_thz)

    if not isrs_enabled:
        sig = p0[None, :] * np.exp(-np.outer(z, alpha))
    else:
        k_mat = coupling_matrix(span, grid.f_thz) * 1e-3  # per mW

        def rhs(_k, _frac, p):
            return p * (-alpha + k_mat @ p)

        sig = _rk4_forward(p0, z, rhs)

    sig[-1] = sig[-1] * db_to_lin(-span.lumped_loss_db)
    return PowerEvolution(z_km=z, signal_mw=sig)


def evolve_with_counterpumps(
    span: FiberSpan,
    launch: PowerSpectrum,
    grid: ChannelGrid,
    pumps: RamanPumpSet | None,
    step_km: float = 0.25,
    tol_db: float = 0.01,
    max_sweeps: int = 50,
) -> PowerEvolution:
    """Signals forward, pumps backward: alternate frozen-field sweeps.

    Pumps are first propagated backward with attenuation only; then
    signals are integrated forward against the frozen pump profiles
    (including signal-signal ISRS), pumps are re-integrated backward
    against the frozen signals (including pump depletion and pump-pump
    ISRS), and the pair of sweeps repeats until no power anywhere moves
    by more than ``tol_db`` between sweeps.
    """
    active = pumps is not None and bool(np.any(pumps.power_mw > 0))
    if not active:
        return evolve_signals(span, launch, grid, step_km=step_km, isrs_enabled=True)
    keep = pumps.power_mw > 0
    pump_f = pumps.f_thz[keep]
    pump_p0 = pumps.power_mw[keep]
    if np.min(pump_f) <= np.max(grid.f_thz):
        raise ValueError("pump frequencies must lie above the signal band")

    p0 = launch.mw
    z = _z_grid(span.length_km, step_km)
    s = span.length_km - z[::-1]  # pump travel coordinate, from the span output
    n_ch = grid.n_channels
    all_f = np.concatenate([grid.f_thz, pump_f])
    alpha = alpha_linear(span, all_f)
    k_mat = coupling_matrix(span, all_f) * 1e-3  # per mW
    a_sig, a_pmp = alpha[:n_ch], alpha[n_ch:]
    k_ss = k_mat[:n_ch, :n_ch]
    k_sp = k_mat[:n_ch, n_ch:]
    k_ps = k_mat[n_ch:, :n_ch]
    k_pp = k_mat[n_ch:, n_ch:]

    # pumps launched at z = L; seed with attenuation-only decay toward z = 0
    pump = pump_p0[None, :] * np.exp(-np.outer(span.length_km - z, a_pmp))
    sig = p0[None, :] * np.exp(-np.outer(z, a_sig))
    tiny = 1e-300

    residual = np.inf
    for _ in range(max_sweeps):
        sig_prev, pump_prev = sig, pump

        # pump -> signal gain along z, precomputed at nodes and midpoints
        gain_nodes = pump @ k_sp.T
        gain_mid = 0.5 * (gain_nodes[:-1] + gain_nodes[1:])

        def sig_rhs(k, frac, p):
            ext = gain_nodes[k] if frac == 0.0 else (gain_nodes[k + 1] if frac == 1.0 else gain_mid[k])
            return p * (-a_sig + k_ss @ p + ext)

        sig = _rk4_forward(p0, z, sig_rhs)

        # pump sweep runs in s = L - z; row k of the reversed matrices is
        # position z = L - s_k, so frozen signals are indexed reversed
        depl_nodes = sig[::-1] @ k_ps.T
        depl_mid = 0.5 * (depl_nodes[:-1] + depl_nodes[1:])

        def pump_rhs(k, frac, p):
            ext = depl_nodes[k] if frac == 0.0 else (depl_nodes[k + 1] if frac == 1.0 else depl_mid[k])
            return p * (-a_pmp + ext + k_pp @ p)

        pump_rev = _rk4_forward(pump_p0.copy(), s, pump_rhs)
        pump = pump_rev[::-1]

        residual = max(
            np.max(np.abs(10.0 * np.log10((sig + tiny) / (sig_prev + tiny)))),
            np.max(np.abs(10.0 * np.log10((pump + tiny) / (pump_prev + tiny)))),
        )
        if residual < tol_db:
            break
    else:
        raise ConvergenceError(
            f"counter-pump sweeps did not converge below {tol_db} dB in "
            f"{max_sweeps} iterations (residual {residual:.3f} dB)",
            residual_db=float(residual),
        )

    sig = sig.copy()
    sig[-1] = sig[-1] * db_to_lin(-span.lumped_loss_db)
    pump_full = np.zeros((len(z), pumps.n_pumps))
    pump_full[:, keep] = pump
    return PowerEvolution(z_km=z, signal_mw=sig, pump_mw=pump_full)

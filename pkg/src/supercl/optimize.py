"""Launch-power policies and derivative-free optimization.

Policies map a small coefficient vector to a per-channel launch spectrum:
a cubic polynomial per band over the normalized in-band coordinate
x in [-1, 1], a flat level per band, or one flat level overall.  The
optimizer is a plain Nelder-Mead simplex (reflection 1, expansion 2,
contraction 0.5, shrink 0.5) with deterministic tie-breaking and a small
multi-start over flat starting levels.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fiber import Link
from .grid import ChannelGrid, PowerSpectrum
from .linkbudget import GsnrReport, LinkOptions, OverAmplifiedSpanError, run_link
from .units import frozen_array

CUBIC = "cubic"
FLAT_PER_BAND = "flat_per_band"
FLAT_ALL_BANDS = "flat_both"
THREE_DB = "three_db"

VARIANTS = (CUBIC, FLAT_PER_BAND, FLAT_ALL_BANDS, THREE_DB)
THREE_DB_GAP = 10.0 * np.log10(2.0)


@dataclass(frozen=True, eq=False)
class LaunchPolicy:
    """Parameterized launch-power spectrum family (coefficients in dBm)."""

    variant: str
    params: np.ndarray

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown policy variant {self.variant!r}")
        object.__setattr__(self, "params", frozen_array(self.params))
        if not np.all(np.isfinite(self.params)):
            raise ValueError("policy parameters must be finite")


def n_params(variant: str, n_bands: int) -> int:
    if variant == FLAT_ALL_BANDS:
        return 1
    if variant == FLAT_PER_BAND:
        return n_bands
    if variant in (CUBIC, THREE_DB):
        return 4 * n_bands
    raise ValueError(f"unknown policy variant {variant!r}")


def band_coordinates(grid: ChannelGrid) -> np.ndarray:
    """Per-channel normalized offset from its band center, x in [-1, 1]
    at the band edges."""
    x = np.empty(grid.n_channels)
    for b, band in enumerate(grid.bands):
        sel = grid.band_index == b
        x[sel] = (grid.f_thz[sel] - band.center_thz) / (band.width_thz / 2.0)
    return x


def policy_to_spectrum(policy: LaunchPolicy, grid: ChannelGrid) -> PowerSpectrum:
    """Evaluate the policy's launch power for every channel of the grid."""
    n_bands = len(grid.bands)
    expected = n_params(policy.variant, n_bands)
    if len(policy.params) != expected:
        raise ValueError(
            f"{policy.variant} over {n_bands} bands needs {expected} parameters, "
            f"got {len(policy.params)}"
        )
    if policy.variant == FLAT_ALL_BANDS:
        return PowerSpectrum.flat(float(policy.params[0]), grid.n_channels)
    dbm = np.empty(grid.n_channels)
    if policy.variant == FLAT_PER_BAND:
        for b in range(n_bands):
            dbm[grid.band_index == b] = policy.params[b]
        return PowerSpectrum(dbm)
    x = band_coordinates(grid)
    for b in range(n_bands):
        c0, c1, c2, c3 = policy.params[4 * b : 4 * b + 4]
        sel = grid.band_index == b
        xb = x[sel]
        dbm[sel] = c0 + c1 * xb + c2 * xb**2 + c3 * xb**3
    return PowerSpectrum(dbm)


@dataclass(frozen=True)
class OptimizeOptions:
    starts_dbm: tuple[float, ...] = (0.0, 2.0, 5.0)
    simplex_spread_dbm: float = 1.0
    max_evals: int = 500
    f_spread_tol: float = 0.01   # objective spread at termination (Tb/s for throughput)
    link: LinkOptions = LinkOptions()
    # optional full coefficient vector used as an extra (warm) start
    initial_params: tuple[float, ...] | None = None


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    policy: LaunchPolicy
    total_tbps: float
    report: GsnrReport
    evaluations: int
    converged: bool
    residual_rms_db: float | None = None


def nelder_mead(fn, x0, step=1.0, f_spread_tol=1e-9, max_evals=500):
    """Minimize ``fn`` with a fixed-coefficient Nelder-Mead simplex.

    Terminates when the simplex objective spread falls below
    ``f_spread_tol`` or the evaluation budget is exhausted; returns the
    best point ever evaluated, its value, the evaluation count and a
    convergence flag.  Vertex ordering ties break lexicographically on
    the parameters so runs are deterministic.
    """
    alpha, gamma, beta, delta = 1.0, 2.0, 0.5, 0.5
    x0 = np.asarray(x0, dtype=float)
    dim = len(x0)
    evals = 0
    best_x, best_f = None, np.inf

    def call(x):
        nonlocal evals, best_x, best_f
        evals += 1
        fx = float(fn(x))
        if fx < best_f or (fx == best_f and best_x is not None and tuple(x) < tuple(best_x)):
            best_x, best_f = x.copy(), fx
        return fx

    simplex = [(x0.copy(), call(x0))]
    for i in range(dim):
        x = x0.copy()
        x[i] += step
        simplex.append((x, call(x)))
        if evals >= max_evals:
            return best_x, best_f, evals, False

    converged = False
    while evals < max_evals:
        simplex.sort(key=lambda v: (v[1], tuple(v[0])))
        if simplex[-1][1] - simplex[0][1] < f_spread_tol:
            converged = True
            break
        centroid = np.mean([v[0] for v in simplex[:-1]], axis=0)
        worst_x, worst_f = simplex[-1]
        xr = centroid + alpha * (centroid - worst_x)
        fr = call(xr)
        if simplex[0][1] <= fr < simplex[-2][1]:
            simplex[-1] = (xr, fr)
            continue
        if fr < simplex[0][1]:
            xe = centroid + gamma * (centroid - worst_x)
            fe = call(xe)
            simplex[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        xc = centroid + beta * (worst_x - centroid)
        fc = call(xc)
        if fc < worst_f:
            simplex[-1] = (xc, fc)
            continue
        x_best = simplex[0][0]
        simplex = [simplex[0]] + [
            (x_best + delta * (v[0] - x_best), None) for v in simplex[1:]
        ]
        simplex = [(x, call(x) if fx is None else fx) for x, fx in simplex]

    return best_x, best_f, evals, converged


def _start_vector(variant: str, n_bands: int, c0: float) -> np.ndarray:
    x = np.zeros(n_params(variant, n_bands))
    if variant == FLAT_ALL_BANDS:
        x[0] = c0
    elif variant == FLAT_PER_BAND:
        x[:] = c0
    else:
        x[0::4] = c0
    return x


def _multistart(objective, variant, n_bands, opts: OptimizeOptions):
    starts = [_start_vector(variant, n_bands, c0) for c0 in opts.starts_dbm]
    if opts.initial_params is not None:
        warm = np.asarray(opts.initial_params, dtype=float)
        if len(warm) != n_params(variant, n_bands):
            raise ValueError("initial_params length does not match the policy variant")
        starts.append(warm)
    if not starts:
        raise ValueError("no starting points: give starts_dbm or initial_params")
    best = None
    total_evals = 0
    any_converged = False
    any_nonzero = False
    for x0 in starts:
        x, fx, evals, converged = nelder_mead(
            objective, x0,
            step=opts.simplex_spread_dbm,
            f_spread_tol=opts.f_spread_tol,
            max_evals=opts.max_evals,
        )
        total_evals += evals
        any_converged = any_converged or converged
        any_nonzero = any_nonzero or fx != 0.0
        if best is None or fx < best[1] or (fx == best[1] and tuple(x) < tuple(best[0])):
            best = (x, fx)
    return best[0], best[1], total_evals, any_converged, any_nonzero


def maximize_throughput(
    link: Link,
    grid: ChannelGrid,
    variant: str,
    options: OptimizeOptions = OptimizeOptions(),
) -> OptimizationResult:
    """Maximize total throughput over the chosen policy family."""
    if variant not in (CUBIC, FLAT_PER_BAND, FLAT_ALL_BANDS):
        raise ValueError(f"throughput maximization needs a power-law variant, got {variant!r}")
    n_bands = len(grid.bands)

    def objective(params):
        spectrum = policy_to_spectrum(LaunchPolicy(variant, params), grid)
        try:
            return -run_link(link, grid, spectrum, options.link).total_tbps
        except OverAmplifiedSpanError:
            return 0.0  # infeasible relaunch point; steer the simplex away

    x, fx, evals, converged, nonzero = _multistart(objective, variant, n_bands, options)
    if not nonzero and fx == 0.0:
        raise ValueError(
            "degenerate start: every evaluated spectrum yields zero throughput "
            "(all channels below the transponder cutoff)"
        )
    policy = LaunchPolicy(variant, x)
    report = run_link(link, grid, policy_to_spectrum(policy, grid), options.link)
    return OptimizationResult(
        policy=policy,
        total_tbps=report.total_tbps,
        report=report,
        evaluations=evals,
        converged=converged,
    )


def solve_three_db(
    link: Link,
    grid: ChannelGrid,
    options: OptimizeOptions = OptimizeOptions(),
) -> OptimizationResult:
    """Fit the cubic-per-band launch so the NLI-only SNR sits one
    half-power factor (about 3 dB) above the ASE-only SNR on every
    channel, in the least-squares sense."""
    n_bands = len(grid.bands)

    def gaps(params):
        spectrum = policy_to_spectrum(LaunchPolicy(THREE_DB, params), grid)
        rep = run_link(link, grid, spectrum, options.link)
        return rep.snr_nl_db - rep.osnr_db - THREE_DB_GAP

    def objective(params):
        try:
            g = gaps(params)
        except OverAmplifiedSpanError:
            return 1e9  # infeasible relaunch point; steer the simplex away
        return float(np.sum(g * g))

    tol = replace(options, f_spread_tol=min(options.f_spread_tol, 1e-4))
    x, fx, evals, converged, _ = _multistart(objective, THREE_DB, n_bands, tol)
    policy = LaunchPolicy(THREE_DB, x)
    report = run_link(link, grid, policy_to_spectrum(policy, grid), options.link)
    residual = float(np.sqrt(np.mean(gaps(x) ** 2)))
    return OptimizationResult(
        policy=policy,
        total_tbps=report.total_tbps,
        report=report,
        evaluations=evals,
        converged=converged,
        residual_rms_db=residual,
    )


@dataclass(frozen=True)
class CompareCase:
    label: str
    variant: str
    isrs: bool = True
    raman: bool = False


@dataclass(frozen=True, eq=False)
class CompareRow:
    case: CompareCase
    result: OptimizationResult
    delta_pct: float


def compare_scenarios(
    link: Link,
    grid: ChannelGrid,
    cases: list[CompareCase],
    options: OptimizeOptions = OptimizeOptions(),
) -> list[CompareRow]:
    """Run every case and report totals plus percentage deltas against the
    first throughput-maximized cubic case (or the first case if none)."""
    results = []
    for case in cases:
        link_opts = replace(options.link, isrs=case.isrs, raman=case.raman)
        case_opts = replace(options, link=link_opts)
        if case.variant == THREE_DB:
            res = solve_three_db(link, grid, case_opts)
        else:
            res = maximize_throughput(link, grid, case.variant, case_opts)
        results.append(res)

    base_idx = next(
        (k for k, c in enumerate(cases) if c.variant == CUBIC),
        0,
    )
    base = results[base_idx].total_tbps
    return [
        CompareRow(case=c, result=r, delta_pct=100.0 * (r.total_tbps - base) / base)
        for c, r in zip(cases, results)
    ]

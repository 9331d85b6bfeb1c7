"""Scenario files: strict TOML parsing, defaults, and system assembly.

A scenario resolves to a Link plus ChannelGrid (plus transponder curve
and solver options).  Unknown keys are rejected so typos fail loudly,
and every error names the offending field.  A minimal file needs only::

    length_km = 1000

which expands to the reference system: 10 x 100 km representative SMF
spans, 50 + 50 channels at 118.75 GHz / 100 GBaud / roll-off 0.1 across
the super-L and super-C bands, EDFA noise figures of 6 / 5 dB.
"""
from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from . import fiber
from .fiber import FiberSpan, RamanPumpSet, SampledCurve, build_link
from .grid import Band, ChannelGrid, DEFAULT_BANDS, build_grid
from .linkbudget import LinkOptions, TransponderCurve, default_transponder_curve
from .optimize import CUBIC, OptimizeOptions, VARIANTS


class ScenarioError(ValueError):
    """Scenario validation failure, carrying the offending field path."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


Knots = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class Scenario:
    """Fully-resolved scenario with defaults applied; plain tuples and
    scalars only, so scenarios compare and serialize exactly."""

    span_lengths_km: tuple[float, ...]
    isrs: bool = True
    raman_enabled: bool = False
    strategy: str = CUBIC
    step_km: float = 0.25
    # channel plan
    bands: tuple[tuple[str, float, float], ...] = tuple(
        (b.name, b.f_lo, b.f_hi) for b in DEFAULT_BANDS
    )
    per_band_count: int = 50
    spacing_ghz: float = 118.75
    symbol_rate_gbaud: float = 100.0
    roll_off: float = 0.1
    # amplifiers: one NF value per band, in band order
    nf_db: tuple[float, ...] = (6.0, 5.0)
    # fiber overrides (None -> representative SMF defaults)
    attenuation_knots: Knots | None = None
    dispersion_knots: Knots | None = None
    gamma_knots: Knots | None = None
    raman_gain_knots: Knots | None = None
    lumped_loss_db: float | None = None
    # optional counter-propagating pumps, (f_thz, power_mw) pairs
    pumps: tuple[tuple[float, float], ...] = ()
    raman_tol_db: float = 0.01
    raman_max_sweeps: int = 50
    # launch policy for plain simulation runs
    launch_flat_dbm: float = 2.0
    # optimizer controls
    starts_dbm: tuple[float, ...] = (0.0, 2.0, 5.0)
    max_evals: int = 500
    spread_tol_tbps: float = 0.01
    # transponder curve override: (gsnr_db, rate_gbps) pairs
    transponder_knots: Knots | None = None
    transponder_cutoff_db: float = 3.0
    transponder_cap_gbps: float = 1100.0
    output_dir: str = "out"


def _err(path: str, msg: str):
    raise ScenarioError(path, msg)


def _expect(table: dict, path: str, allowed: set[str]):
    for key in table:
        if key not in allowed:
            _err(f"{path}.{key}" if path else key, "unknown key")


def _number(table: dict, path: str, key: str, default, minimum=None, maximum=None):
    val = table.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _err(f"{path}{key}", "expected a number")
    val = float(val)
    if minimum is not None and val < minimum:
        _err(f"{path}{key}", f"must be >= {minimum}")
    if maximum is not None and val > maximum:
        _err(f"{path}{key}", f"must be <= {maximum}")
    return val


def _integer(table: dict, path: str, key: str, default, minimum=1):
    val = table.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        _err(f"{path}{key}", "expected an integer")
    if val < minimum:
        _err(f"{path}{key}", f"must be >= {minimum}")
    return int(val)


def _boolean(table: dict, path: str, key: str, default):
    val = table.get(key, default)
    if not isinstance(val, bool):
        _err(f"{path}{key}", "expected true/false")
    return val


def _knot_list(table: dict, path: str, key: str) -> Knots | None:
    val = table.get(key)
    if val is None:
        return None
    out = []
    if not isinstance(val, list) or not val:
        _err(f"{path}{key}", "expected a non-empty list of [x, y] pairs")
    for k, item in enumerate(val):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in item)
        ):
            _err(f"{path}{key}[{k}]", "expected an [x, y] number pair")
        out.append((float(item[0]), float(item[1])))
    return tuple(out)


_TOP_KEYS = {
    "length_km", "span_length_km", "span_lengths_km", "isrs", "raman", "strategy",
    "step_km", "bands", "channels", "amplifier", "fiber", "pumps", "launch",
    "optimizer", "transponder", "output",
}


def scenario_from_dict(data: dict) -> Scenario:
    """Validate a parsed TOML table and resolve it into a Scenario."""
    _expect(data, "", _TOP_KEYS)

    # span plan
    explicit = data.get("span_lengths_km")
    if explicit is not None:
        if "length_km" in data:
            _err("span_lengths_km", "give either length_km or span_lengths_km, not both")
        if not isinstance(explicit, list) or not explicit:
            _err("span_lengths_km", "expected a non-empty list of lengths")
        spans = []
        for k, v in enumerate(explicit):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                _err(f"span_lengths_km[{k}]", "span length must be a number > 0")
            spans.append(float(v))
        span_lengths = tuple(spans)
    else:
        if "length_km" not in data:
            _err("length_km", "missing (give length_km or span_lengths_km)")
        length = _number(data, "", "length_km", None)
        if length is None or length <= 0:
            _err("length_km", "must be > 0")
        span_km = _number(data, "", "span_length_km", 100.0)
        if span_km <= 0:
            _err("span_length_km", "must be > 0")
        n_full = int(length // span_km)
        remainder = length - n_full * span_km
        spans = [span_km] * n_full
        if remainder > 1e-9:
            spans.append(remainder)
        if not spans:
            spans = [length]
        span_lengths = tuple(spans)

    strategy = data.get("strategy", CUBIC)
    if strategy not in VARIANTS:
        _err("strategy", f"must be one of {', '.join(VARIANTS)}")

    # bands
    bands_cfg = data.get("bands")
    if bands_cfg is None:
        bands = tuple((b.name, b.f_lo, b.f_hi) for b in DEFAULT_BANDS)
    else:
        if not isinstance(bands_cfg, list) or not bands_cfg:
            _err("bands", "expected a non-empty array of band tables")
        bands = []
        for k, entry in enumerate(bands_cfg):
            if not isinstance(entry, dict):
                _err(f"bands[{k}]", "expected a table")
            _expect(entry, f"bands[{k}]", {"name", "f_lo", "f_hi"})
            name = entry.get("name")
            if not isinstance(name, str) or not name:
                _err(f"bands[{k}].name", "expected a non-empty string")
            f_lo = _number(entry, f"bands[{k}].", "f_lo", None)
            f_hi = _number(entry, f"bands[{k}].", "f_hi", None)
            if f_lo is None or f_hi is None or f_lo >= f_hi:
                _err(f"bands[{k}]", "needs f_lo < f_hi in THz")
            bands.append((name, f_lo, f_hi))
        bands = tuple(bands)

    ch = data.get("channels", {})
    if not isinstance(ch, dict):
        _err("channels", "expected a table")
    _expect(ch, "channels", {"per_band", "spacing_ghz", "symbol_rate_gbaud", "roll_off"})
    per_band = _integer(ch, "channels.", "per_band", 50)
    spacing = _number(ch, "channels.", "spacing_ghz", 118.75, minimum=1e-6)
    rs = _number(ch, "channels.", "symbol_rate_gbaud", 100.0, minimum=1e-6)
    roll = _number(ch, "channels.", "roll_off", 0.1, minimum=0.0, maximum=1.0)

    amp = data.get("amplifier", {})
    if not isinstance(amp, dict):
        _err("amplifier", "expected a table")
    _expect(amp, "amplifier", {"nf_db"})
    nf_cfg = amp.get("nf_db")
    if nf_cfg is None:
        nf = (6.0, 5.0) if len(bands) == 2 else tuple(5.5 for _ in bands)
    else:
        if not isinstance(nf_cfg, list) or len(nf_cfg) != len(bands):
            _err("amplifier.nf_db", f"expected one NF value per band ({len(bands)})")
        for k, v in enumerate(nf_cfg):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                _err(f"amplifier.nf_db[{k}]", "noise figure must be a number > 0 dB")
        nf = tuple(float(v) for v in nf_cfg)

    fb = data.get("fiber", {})
    if not isinstance(fb, dict):
        _err("fiber", "expected a table")
    _expect(fb, "fiber", {"attenuation", "dispersion", "gamma", "raman_gain", "lumped_loss_db"})
    lumped = _number(fb, "fiber.", "lumped_loss_db", None, minimum=0.0)

    pumps_cfg = data.get("pumps", {})
    if not isinstance(pumps_cfg, dict):
        _err("pumps", "expected a table")
    _expect(pumps_cfg, "pumps", {"list", "tol_db", "max_sweeps"})
    pump_pairs = _knot_list(pumps_cfg, "pumps.", "list") or ()
    for k, (f_p, p_p) in enumerate(pump_pairs):
        if f_p <= 0 or p_p < 0:
            _err(f"pumps.list[{k}]", "expected [f_THz > 0, power_mW >= 0]")

    launch = data.get("launch", {})
    if not isinstance(launch, dict):
        _err("launch", "expected a table")
    _expect(launch, "launch", {"flat_dbm"})

    opt = data.get("optimizer", {})
    if not isinstance(opt, dict):
        _err("optimizer", "expected a table")
    _expect(opt, "optimizer", {"starts_dbm", "max_evals", "spread_tol_tbps"})
    starts_cfg = opt.get("starts_dbm")
    if starts_cfg is None:
        starts = (0.0, 2.0, 5.0)
    else:
        if not isinstance(starts_cfg, list) or not starts_cfg:
            _err("optimizer.starts_dbm", "expected a non-empty list of dBm levels")
        for k, v in enumerate(starts_cfg):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                _err(f"optimizer.starts_dbm[{k}]", "expected a number")
        starts = tuple(float(v) for v in starts_cfg)

    tp = data.get("transponder", {})
    if not isinstance(tp, dict):
        _err("transponder", "expected a table")
    _expect(tp, "transponder", {"table", "cutoff_db", "cap_gbps"})

    out = data.get("output", {})
    if not isinstance(out, dict):
        _err("output", "expected a table")
    _expect(out, "output", {"dir"})
    out_dir = out.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        _err("output.dir", "expected a non-empty string")

    return Scenario(
        span_lengths_km=span_lengths,
        isrs=_boolean(data, "", "isrs", True),
        raman_enabled=_boolean(data, "", "raman", bool(pump_pairs)),
        strategy=strategy,
        step_km=_number(data, "", "step_km", 0.25, minimum=1e-3),
        bands=bands,
        per_band_count=per_band,
        spacing_ghz=spacing,
        symbol_rate_gbaud=rs,
        roll_off=roll,
        nf_db=nf,
        attenuation_knots=_knot_list(fb, "fiber.", "attenuation"),
        dispersion_knots=_knot_list(fb, "fiber.", "dispersion"),
        gamma_knots=_knot_list(fb, "fiber.", "gamma"),
        raman_gain_knots=_knot_list(fb, "fiber.", "raman_gain"),
        lumped_loss_db=lumped,
        pumps=pump_pairs,
        raman_tol_db=_number(pumps_cfg, "pumps.", "tol_db", 0.01, minimum=1e-6),
        raman_max_sweeps=_integer(pumps_cfg, "pumps.", "max_sweeps", 50),
        launch_flat_dbm=_number(launch, "launch.", "flat_dbm", 2.0),
        starts_dbm=starts,
        max_evals=_integer(opt, "optimizer.", "max_evals", 500),
        spread_tol_tbps=_number(opt, "optimizer.", "spread_tol_tbps", 0.01, minimum=0.0),
        transponder_knots=_knot_list(tp, "transponder.", "table"),
        transponder_cutoff_db=_number(tp, "transponder.", "cutoff_db", 3.0),
        transponder_cap_gbps=_number(tp, "transponder.", "cap_gbps", 1100.0, minimum=1.0),
        output_dir=out_dir,
    )


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario TOML file."""
    p = Path(path)
    if not p.is_file():
        raise ScenarioError(str(p), "scenario file not found")
    try:
        with open(p, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(str(p), f"TOML syntax error: {exc}") from exc
    return scenario_from_dict(data)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(float(v)) if isinstance(v, float) else str(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def scenario_to_toml(sc: Scenario) -> str:
    """Serialize a scenario to TOML that re-parses to an equal Scenario."""
    lines = [
        f"span_lengths_km = {_toml_value(list(sc.span_lengths_km))}",
        f"isrs = {_toml_value(sc.isrs)}",
        f"raman = {_toml_value(sc.raman_enabled)}",
        f"strategy = {_toml_value(sc.strategy)}",
        f"step_km = {_toml_value(sc.step_km)}",
        "",
    ]
    for name, f_lo, f_hi in sc.bands:
        lines += ["[[bands]]", f"name = {_toml_value(name)}",
                  f"f_lo = {_toml_value(f_lo)}", f"f_hi = {_toml_value(f_hi)}", ""]
    lines += [
        "[channels]",
        f"per_band = {sc.per_band_count}",
        f"spacing_ghz = {_toml_value(sc.spacing_ghz)}",
        f"symbol_rate_gbaud = {_toml_value(sc.symbol_rate_gbaud)}",
        f"roll_off = {_toml_value(sc.roll_off)}",
        "",
        "[amplifier]",
        f"nf_db = {_toml_value(list(sc.nf_db))}",
        "",
        "[fiber]",
    ]
    for key, knots in (
        ("attenuation", sc.attenuation_knots),
        ("dispersion", sc.dispersion_knots),
        ("gamma", sc.gamma_knots),
        ("raman_gain", sc.raman_gain_knots),
    ):
        if knots is not None:
            lines.append(f"{key} = {_toml_value([list(k) for k in knots])}")
    if sc.lumped_loss_db is not None:
        lines.append(f"lumped_loss_db = {_toml_value(sc.lumped_loss_db)}")
    lines += ["", "[pumps]"]
    if sc.pumps:
        lines.append(f"list = {_toml_value([list(p) for p in sc.pumps])}")
    lines += [
        f"tol_db = {_toml_value(sc.raman_tol_db)}",
        f"max_sweeps = {sc.raman_max_sweeps}",
        "",
        "[launch]",
        f"flat_dbm = {_toml_value(sc.launch_flat_dbm)}",
        "",
        "[optimizer]",
        f"starts_dbm = {_toml_value(list(sc.starts_dbm))}",
        f"max_evals = {sc.max_evals}",
        f"spread_tol_tbps = {_toml_value(sc.spread_tol_tbps)}",
        "",
        "[transponder]",
    ]
    if sc.transponder_knots is not None:
        lines.append(f"table = {_toml_value([list(k) for k in sc.transponder_knots])}")
    lines += [
        f"cutoff_db = {_toml_value(sc.transponder_cutoff_db)}",
        f"cap_gbps = {_toml_value(sc.transponder_cap_gbps)}",
        "",
        "[output]",
        f"dir = {_toml_value(sc.output_dir)}",
        "",
    ]
    return "\n".join(lines)


def scenario_hash(sc: Scenario) -> str:
    return hashlib.sha256(scenario_to_toml(sc).encode()).hexdigest()[:16]


def _curve(knots: Knots | None, fallback: SampledCurve) -> SampledCurve:
    if knots is None:
        return fallback
    arr = np.asarray(knots, dtype=float)
    try:
        return SampledCurve(arr[:, 0], arr[:, 1])
    except ValueError as exc:
        raise ScenarioError("fiber", str(exc)) from exc


def build_system(sc: Scenario):
    """Resolve the scenario into (link, grid, transponder curve,
    link options, optimizer options)."""
    bands = tuple(Band(name, lo, hi) for name, lo, hi in sc.bands)
    try:
        grid = build_grid(bands, sc.per_band_count, sc.spacing_ghz, sc.symbol_rate_gbaud, sc.roll_off)
    except ValueError as exc:
        raise ScenarioError("channels", str(exc)) from exc

    reference = fiber.make_default_smf(100.0)
    att = _curve(sc.attenuation_knots, reference.attenuation_db_km)
    disp = _curve(sc.dispersion_knots, reference.dispersion_ps_nm_km)
    gam = _curve(sc.gamma_knots, reference.gamma_w_km)
    cr = _curve(sc.raman_gain_knots, reference.raman_gain_w_km)
    lumped = reference.lumped_loss_db if sc.lumped_loss_db is None else sc.lumped_loss_db

    span_by_length: dict[float, FiberSpan] = {}
    spans = []
    for length in sc.span_lengths_km:
        span = span_by_length.get(length)
        if span is None:
            try:
                span = FiberSpan(length, att, disp, gam, cr, lumped)
            except ValueError as exc:
                raise ScenarioError("fiber", str(exc)) from exc
            span_by_length[length] = span
        spans.append(span)

    nf_x = []
    nf_y = []
    for band, nf in zip(bands, sc.nf_db):
        nf_x += [band.f_lo, band.f_hi]
        nf_y += [nf, nf]
    nf_curve = SampledCurve(np.array(nf_x), np.array(nf_y))

    pumps = None
    if sc.pumps:
        arr = np.asarray(sc.pumps, dtype=float)
        try:
            pumps = RamanPumpSet(f_thz=arr[:, 0], power_mw=arr[:, 1])
        except ValueError as exc:
            raise ScenarioError("pumps.list", str(exc)) from exc

    link = build_link(spans, nf_curve, raman=pumps)

    if sc.transponder_knots is not None:
        arr = np.asarray(sc.transponder_knots, dtype=float)
        try:
            curve = TransponderCurve(
                gsnr_db=arr[:, 0], rate_gbps=arr[:, 1],
                cutoff_db=sc.transponder_cutoff_db, cap_gbps=sc.transponder_cap_gbps,
            )
        except ValueError as exc:
            raise ScenarioError("transponder.table", str(exc)) from exc
    else:
        curve = default_transponder_curve(
            symbol_rate_gbaud=sc.symbol_rate_gbaud,
            cap_gbps=sc.transponder_cap_gbps,
            cutoff_db=sc.transponder_cutoff_db,
        )

    link_opts = LinkOptions(
        isrs=sc.isrs,
        raman=sc.raman_enabled and pumps is not None,
        curve=curve,
        step_km=sc.step_km,
        raman_tol_db=sc.raman_tol_db,
        raman_max_sweeps=sc.raman_max_sweeps,
    )
    opt_opts = OptimizeOptions(
        starts_dbm=sc.starts_dbm,
        max_evals=sc.max_evals,
        f_spread_tol=sc.spread_tol_tbps,
        link=link_opts,
    )
    return link, grid, curve, link_opts, opt_opts

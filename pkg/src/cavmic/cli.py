"""Command-line front end.

    cavmic single-pass --material graphene
    cavmic cw-sweep --material bn --modes znk+ --t2 0.04 --out cw.csv
    cavmic rd-sweep --config run.json
    cavmic mp-sweep --material bn --m 1,3,5,7
    cavmic calibrate

Every run writes a CSV table and a ``.manifest.json`` next to it. The
manifest stores the fully resolved configuration, so passing it back with
``--config`` reproduces the table byte for byte.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import CavityConfig
from .detection import DetectionMode
from .experiments import (
    DamageBudget,
    SnrPoint,
    SweepGrid,
    calibrate_wavelength,
    cw_cut,
    cw_map,
    mp_sweep,
    rd_sweep,
    single_pass_reference,
)
from .materials import (
    ANGSTROM,
    CarrierSpec,
    MaterialLayer,
    Sample,
    WavelengthSpec,
    preset,
)

COLUMNS = ("scheme", "mode", "coord1", "coord2", "n1", "n2", "snr", "damage", "input_scale")
SUBCOMMANDS = ("single-pass", "cw-sweep", "rd-sweep", "mp-sweep", "calibrate")

DEFAULTS = {
    "wavelength_nm": None,
    "calibration": {"method": "weak-sample", "material": "graphene", "target_absorbed": 26.0},
    "materials": [{"name": "graphene"}],
    "carrier": {"n_g": 1.5, "half_wave_order": 0, "d_g_nm": None},
    "cavity": {"R1": 0.98, "output_reflectivity": 0.98, "T2_rule": "lossy", "outcoupler_efficiency": 1.0},
    "illumination": {"input_photons": 1000.0},
    "budget": {"mode": "auto", "reference_photons": 1000.0},
    "grids": {
        "detuning_points": 256,
        "t2": {"min": 1e-3, "max": 1.0, "points": 64},
        "m": {"max": 501},
        "cw_full_map": False,
    },
    "modes": ["bf", "df", "znk+", "znk-"],
    "output": None,
}

MATERIAL_KEYS = {"name", "n_re", "n_im", "monolayer_thickness_angstrom", "layers"}
BUDGET_MODES = {"auto": "auto", "absorbed-photons": "absorbed-photons", "fluence": "fluence-interactions",
                "fluence-interactions": "fluence-interactions"}


class ConfigError(ValueError):
    pass


# --- configuration --------------------------------------------------------------

def _merge(defaults, given, path=""):
    """Defaults overlaid with ``given``; unknown keys are rejected."""
    if not isinstance(given, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown key {where!r}")
        if isinstance(defaults[key], dict) and isinstance(value, dict) and key != "t2" and key != "m":
            out[key] = _merge(defaults[key], value, where)
        else:
            out[key] = value
    return out


def _material(entry, where):
    if isinstance(entry, str):
        entry = {"name": entry}
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: expected a name or an object")
    extra = set(entry) - MATERIAL_KEYS
    if extra:
        raise ConfigError(f"unknown key {where}.{sorted(extra)[0]!r}")
    name = entry.get("name", "")
    try:
        base = preset(name) if name else None
    except KeyError:
        base = None
    if base is None and ("n_re" not in entry or "monolayer_thickness_angstrom" not in entry):
        raise ConfigError(f"{where}.name: unknown material {name!r} (give n_re and monolayer_thickness_angstrom)")
    n = complex(entry.get("n_re", base.n.real if base else 1.0), entry.get("n_im", base.n.imag if base else 0.0))
    d = entry["monolayer_thickness_angstrom"] * ANGSTROM if "monolayer_thickness_angstrom" in entry else base.d
    layers = entry.get("layers", base.layers if base else 1)
    try:
        return MaterialLayer(n, d, layers, name)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _t2_grid(spec):
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.array([float(spec)])
    if isinstance(spec, list):
        return np.array(spec, dtype=float)
    if isinstance(spec, dict) and set(spec) <= {"min", "max", "points"}:
        s = {**DEFAULTS["grids"]["t2"], **spec}
        # max is excluded: T2 = 1 leaves no output mirror
        return np.logspace(np.log10(s["min"]), np.log10(s["max"]), int(s["points"]), endpoint=False)
    raise ConfigError("grids.t2: expected a number, a list, or {min, max, points}")


def _m_grid(spec):
    if isinstance(spec, list):
        return np.array(spec, dtype=int)
    if isinstance(spec, dict) and set(spec) == {"max"}:
        return np.arange(1, int(spec["max"]) + 1, 2)
    raise ConfigError("grids.m: expected a list of odd integers or {max}")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated run configuration; ``data`` is the fully defaulted JSON form."""

    data: dict

    @classmethod
    def from_dict(cls, given: dict) -> "RunConfig":
        given = dict(given)
        if "material" in given:
            if "materials" in given:
                raise ConfigError("give either 'material' or 'materials', not both")
            given["materials"] = [given.pop("material")]
        data = _merge(DEFAULTS, given)
        if isinstance(data["materials"], list):
            data["materials"] = [{"name": m} if isinstance(m, str) else m for m in data["materials"]]
        if data["wavelength_nm"] is None:
            cal = data["calibration"]
            try:
                wl = calibrate_wavelength(preset(cal["material"]), cal["target_absorbed"], method=cal["method"])
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"calibration: {exc}") from None
            data["wavelength_nm"] = wl.wavelength * 1e9
        cfg = cls(data)
        cfg.validate()
        return cfg

    def validate(self):
        d = self.data
        try:
            self.wavelength
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"wavelength_nm: {exc}") from None
        if not isinstance(d["materials"], list) or not d["materials"]:
            raise ConfigError("materials: expected a non-empty list")
        self.materials
        r1, rout = d["cavity"]["R1"], d["cavity"]["output_reflectivity"]
        if not isinstance(r1, (int, float)) or not 0 < r1 < 1:
            raise ConfigError("cavity.R1: R1 out of (0,1)")
        if not isinstance(rout, (int, float)) or not 0 < rout <= 1:
            raise ConfigError("cavity.output_reflectivity: must lie in (0,1]")
        if d["cavity"]["T2_rule"] not in ("lossy", "lossless"):
            raise ConfigError("cavity.T2_rule: expected 'lossy' or 'lossless'")
        if not 0 < d["cavity"]["outcoupler_efficiency"] <= 1:
            raise ConfigError("cavity.outcoupler_efficiency: must lie in (0,1]")
        if not d["illumination"]["input_photons"] > 0:
            raise ConfigError("illumination.input_photons: must be positive")
        if d["budget"]["mode"] not in BUDGET_MODES:
            raise ConfigError(f"budget.mode: expected one of {sorted(BUDGET_MODES)}")
        try:
            self.budget
            self.carrier
            self.modes
            t2 = self.t2_grid
            if np.any((t2 <= 0) | (t2 >= 1)):
                raise ValueError("T2 values must lie in (0,1)")
            SweepGrid(self.detuning_grid, t2, self.m_grid)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{exc}") from None
        if not isinstance(d["grids"]["cw_full_map"], bool):
            raise ConfigError("grids.cw_full_map: expected true or false")

    # resolved domain objects
    @property
    def wavelength(self) -> WavelengthSpec:
        return WavelengthSpec.from_nm(float(self.data["wavelength_nm"]))

    @property
    def materials(self) -> list[MaterialLayer]:
        return [_material(m, f"materials[{i}]") for i, m in enumerate(self.data["materials"])]

    @property
    def carrier(self) -> CarrierSpec:
        c = self.data["carrier"]
        if c["d_g_nm"] is not None:
            return CarrierSpec(c["n_g"], c["d_g_nm"] * 1e-9, c["half_wave_order"])
        if c["half_wave_order"] == 0:
            return CarrierSpec(c["n_g"], 0.0, 0)
        return CarrierSpec.half_wave(self.wavelength, c["n_g"], c["half_wave_order"])

    @property
    def budget(self) -> DamageBudget:
        b = self.data["budget"]
        return DamageBudget(float(b["reference_photons"]), BUDGET_MODES[b["mode"]])

    @property
    def modes(self) -> list[DetectionMode]:
        return [DetectionMode.parse(m) for m in self.data["modes"]]

    @property
    def output_reflectivity(self) -> float:
        c = self.data["cavity"]
        return 1.0 if c["T2_rule"] == "lossless" else float(c["output_reflectivity"])

    @property
    def detuning_grid(self):
        return np.arange(int(self.data["grids"]["detuning_points"])) / int(self.data["grids"]["detuning_points"])

    @property
    def t2_grid(self):
        return _t2_grid(self.data["grids"]["t2"])

    @property
    def m_grid(self):
        return _m_grid(self.data["grids"]["m"])

    def canonical_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(raw, dict) and "config" in raw and "config_hash" in raw:
        raw = raw["config"]  # a run manifest
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    return RunConfig.from_dict(raw)


def load_config(path) -> RunConfig:
    """Read a JSON configuration (or a run manifest) and apply defaults."""
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


# --- output -----------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return "%.12g" % v


def csv_text(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for p in points:
        w.writerow([_fmt(getattr(p, c)) for c in COLUMNS])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".manifest.json")


# --- runs ---------------------------------------------------------------------

def _points(subcommand: str, cfg: RunConfig, sample: Sample) -> list[SnrPoint]:
    budget = cfg.budget
    R1 = float(cfg.data["cavity"]["R1"])
    Rout = cfg.output_reflectivity
    grid = SweepGrid(cfg.detuning_grid, cfg.t2_grid, cfg.m_grid)
    out: list[SnrPoint] = []
    for mode in cfg.modes:
        if subcommand == "single-pass":
            out.append(single_pass_reference(sample, mode, budget))
        elif subcommand == "cw-sweep":
            if cfg.data["grids"]["cw_full_map"]:
                S, n1, n2, s, dmg = cw_map(sample, mode, grid.t2, grid.detuning, budget, R1, Rout)
                for i, t2 in enumerate(grid.t2):
                    for j, det in enumerate(grid.detuning):
                        out.append(SnrPoint("cw", mode.value, float(det), float(t2), float(n1[i, j]),
                                            float(n2[i, j]), float(S[i, j]), float(dmg[i, j]), float(s[i, j])))
            else:
                out.extend(cw_cut(sample, mode, grid, budget, R1, Rout))
        elif subcommand == "rd-sweep":
            out.extend(rd_sweep(sample, mode, grid.t2, budget, R1, Rout))
        elif subcommand == "mp-sweep":
            out.extend(mp_sweep(sample, mode, grid.m, budget, R1, cfg.data["cavity"]["outcoupler_efficiency"]))
        else:
            raise ValueError(f"unknown subcommand {subcommand!r}")
    return out


def run(subcommand: str, cfg: RunConfig, out=None, stdout=None) -> list[Path]:
    """Run one study and write its CSV table(s) and manifest; returns the written paths."""
    stdout = stdout or sys.stdout
    if subcommand == "calibrate":
        return _run_calibrate(cfg, out, stdout)
    out = Path(out or cfg.data["output"] or f"{subcommand}.csv")
    materials = cfg.materials
    written = []
    for mat in materials:
        path = out if len(materials) == 1 else out.with_name(f"{out.stem}-{mat.name or 'material'}{out.suffix}")
        sample = Sample(mat, cfg.wavelength, cfg.carrier)
        write_atomic(path, csv_text(_points(subcommand, cfg, sample)))
        written.append(path)
    _write_manifest(out, subcommand, cfg, [p.name for p in written])
    for p in written:
        print(p, file=stdout)
    return written + [manifest_path(out)]


def _run_calibrate(cfg: RunConfig, out, stdout):
    # always the exact root here; calibration.method only picks the default wavelength
    target = cfg.data["calibration"]["target_absorbed"]
    q = cfg.data["illumination"]["input_photons"]
    mat = cfg.materials[0]
    wl = calibrate_wavelength(mat, target, q, method="exact")
    ws = calibrate_wavelength(mat, target, q, method="weak-sample")
    absorbed = Sample(mat, wl).coeffs.single_pass_absorption * q
    print(f"wavelength_nm={wl.wavelength * 1e9:.9f}", file=stdout)
    print(f"absorbed_photons={absorbed:.9f}", file=stdout)
    print(f"weak_sample_wavelength_nm={ws.wavelength * 1e9:.9f}", file=stdout)
    if out is None:
        return []
    out = Path(out)
    _write_manifest(out, "calibrate", cfg, [], {"calibrated_wavelength_nm": wl.wavelength * 1e9,
                                               "absorbed_photons": absorbed})
    return [manifest_path(out)]


def _write_manifest(out: Path, subcommand: str, cfg: RunConfig, outputs, extra=None):
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config_hash": cfg.hash,
        "wavelength_nm": cfg.data["wavelength_nm"],
        "outputs": outputs,
        "config": cfg.data,
    }
    if extra:
        manifest.update(extra)
    write_atomic(manifest_path(out), json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# --- argument parsing -------------------------------------------------------------

def _overrides(args) -> dict:
    o: dict = {}
    if args.material:
        o["materials"] = [{"name": args.material}]
    if args.modes:
        o["modes"] = [m for m in args.modes.split(",") if m]
    grids = {}
    if args.t2 is not None and args.t2 != "grid":
        try:
            grids["t2"] = [float(x) for x in args.t2.split(",")]
        except ValueError:
            raise ConfigError(f"--t2: expected a number, a comma list, or 'grid', got {args.t2!r}") from None
    elif args.t2 == "grid":
        grids["t2"] = DEFAULTS["grids"]["t2"]
    if args.m:
        try:
            grids["m"] = [int(x) for x in args.m.split(",")]
        except ValueError:
            raise ConfigError(f"--m: expected a comma list of odd integers, got {args.m!r}") from None
    if grids:
        o["grids"] = grids
    if args.carrier:
        o["carrier"] = {"half_wave_order": 1 if args.carrier == "halfwave" else 0, "d_g_nm": None}
    return o


def _apply(cfg_data: dict, overrides: dict) -> dict:
    out = copy.deepcopy(cfg_data)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavmic", description="Cavity-enhanced wide-field microscopy studies.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config or run manifest")
        s.add_argument("--material", help="material preset (graphene, bn, bn20, vacuum)")
        s.add_argument("--modes", help="comma list of bf, df, znk+, znk-")
        s.add_argument("--t2", help="output-mirror transmission: number, comma list, or 'grid'")
        s.add_argument("--m", help="comma list of odd pass numbers")
        s.add_argument("--carrier", choices=("halfwave", "none"))
        s.add_argument("--out", help="output CSV path")
        s.add_argument("--seedless", action="store_true", help="no effect; nothing here is random")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            base = load_config(args.config).data
            if args.material or args.modes or args.t2 or args.m or args.carrier:
                base = _apply(base, _overrides(args))
            cfg = RunConfig.from_dict(base)
        else:
            cfg = RunConfig.from_dict(_apply({}, _overrides(args)))
        run(args.subcommand, cfg, args.out)
    except (ConfigError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"cavmic: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

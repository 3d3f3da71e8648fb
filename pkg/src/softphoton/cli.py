"""Experiment runner: flat key=value configs in, CSV/JSON reports out.

Usage:
    softphoton <experiment> --config <path> [--set key=value]... [--out <path>]
               [--format csv|json]

Experiments: exponent, scan-lambda, converge, counterterm-check, emission,
compare-gauges, crosscheck, validate.  Exit codes: 0 success, 2 config error,
3 numerical error.  ``SOFTPHOTON_THREADS`` caps the evaluation worker count;
reports are byte-identical for any setting.

CSV reports carry only the result rows (header + data, RFC-4180 quoting,
'.' decimal separator, 17 significant digits) so identical configs produce
byte-identical files.  JSON reports wrap the rows in an envelope
{experiment, config, results, metadata}; an envelope file can be fed back
as --config and reproduces the run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .amplitudes import (crosscheck_grid, dipole_lambda_scan, dipole_overlap_exponent,
                         fit_log_slope, gauge_compare_bn, perturbative_crosscheck)
from .coherence import FAMILIES, Kinematics, convergence_profile
from .errors import ConfigInvalid, SoftPhotonError
from .models import ModelSpec, cancellation_scan
from .momentum import Dispersion, FormFactor, default_grid
from .weyl import PhotonList
from .amplitudes import emission_amplitude

EXPERIMENTS = ("exponent", "scan-lambda", "converge", "counterterm-check",
               "emission", "compare-gauges", "crosscheck")


def _parse_float(s):
    return float(s)


def _parse_int(s):
    return int(s)


def _parse_vec3(s):
    parts = [p for p in str(s).replace(";", ",").split(",") if p.strip() != ""]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated numbers, got {s!r}")
    return tuple(float(p) for p in parts)


def _parse_complex(s):
    parts = str(s).split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"expected 're' or 're,im', got {s!r}")


def _parse_rtol(s):
    if str(s).strip().lower() in ("none", "off"):
        return None
    return float(s)


def _parse_photons(s):
    entries = []
    for chunk in str(s).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 4:
            raise ValueError(f"photon entry needs 'kx,ky,kz,index', got {chunk!r}")
        entries.append(((float(parts[0]), float(parts[1]), float(parts[2])),
                        int(parts[3])))
    return tuple(entries)


def _parse_families(s):
    fams = tuple(p.strip() for p in str(s).split(",") if p.strip())
    for f in fams:
        if f not in FAMILIES:
            raise ValueError(f"unknown family {f!r}")
    return fams


# key -> (parser, default)
SCHEMA = {
    "experiment": (str, None),
    "family": (str, "PFB"),
    "families": (_parse_families, ("PFB", "BN_F")),
    "gauge": (str, "feynman"),
    "e": (_parse_float, 0.30282),
    "m": (_parse_float, 1.0),
    "lambda": (_parse_float, 0.1),
    "eps": (_parse_float, 0.1),
    "uv_scale": (_parse_float, 1.0),
    "v": (_parse_vec3, (0.0, 0.0, 0.2)),
    "v_prime": (_parse_vec3, (0.2, 0.0, 0.0)),
    "x": (_parse_vec3, (0.0, 0.0, 0.0)),
    "hard": (_parse_complex, complex(1.0, 0.0)),
    "photons": (_parse_photons, (((0.05, 0.0, 0.2), 0), ((0.0, 0.1, 0.15), 3))),
    "counterterm_scale": (_parse_float, 1.0),
    "grid.n_panels": (_parse_int, 24),
    "grid.n_radial": (_parse_int, 16),
    "grid.n_costheta": (_parse_int, 64),
    "grid.n_phi": (_parse_int, 32),
    "grid.check_rtol": (_parse_rtol, 1e-6),
    "ladder.lo": (_parse_float, None),
    "ladder.hi": (_parse_float, None),
    "ladder.n": (_parse_int, None),
    "out": (str, None),
    "format": (str, "csv"),
}

_LADDER_DEFAULTS = {
    "scan-lambda": (1e-4, 1e-2, 7),
    "compare-gauges": (1e-4, 1e-2, 6),
    "counterterm-check": (0.02, 0.00125, 5),  # keep eps well below lambda
    "converge": (6.0, 96.0, 9),
    "exponent": (None, None, None),
    "emission": (None, None, None),
    "crosscheck": (None, None, None),
}


@dataclass
class ExperimentConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def ladder(self, experiment: str):
        lo, hi, n = _LADDER_DEFAULTS.get(experiment, (None, None, None))
        lo = self.values["ladder.lo"] if self.values["ladder.lo"] is not None else lo
        hi = self.values["ladder.hi"] if self.values["ladder.hi"] is not None else hi
        n = self.values["ladder.n"] if self.values["ladder.n"] is not None else n
        if lo is None or hi is None or n is None:
            return None
        return [float(x) for x in np.geomspace(lo, hi, int(n))]


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; '#' starts a comment; later keys win."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid([(f"line {lineno}", f"expected key=value, got {line!r}")])
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def load_config(path: str | None, overrides) -> ExperimentConfig:
    raw = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            envelope = json.loads(text)
            fields = envelope.get("config", envelope)
            raw.update({str(k): str(v) for k, v in fields.items()})
        else:
            raw.update(parse_config_text(text))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigInvalid([("--set", f"expected key=value, got {item!r}")])
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()

    problems = []
    values = {key: default for key, (_, default) in SCHEMA.items()}
    for key, text_value in raw.items():
        if key not in SCHEMA:
            problems.append((key, "unknown key"))
            continue
        parser, _ = SCHEMA[key]
        try:
            values[key] = parser(text_value)
        except (ValueError, TypeError) as exc:
            problems.append((key, str(exc)))
    if problems:
        raise ConfigInvalid(problems)
    return ExperimentConfig(values)


def validate_config(cfg: ExperimentConfig):
    """Full precondition audit without running anything."""
    diagnostics = []
    vals = cfg.values
    if vals["lambda"] <= 0.0:
        diagnostics.append(("lambda", "NonPositiveCutoff: infrared cutoff must be > 0"))
    if vals["uv_scale"] <= 0.0:
        diagnostics.append(("uv_scale", "form-factor scale must be > 0"))
    if vals["m"] <= 0.0:
        diagnostics.append(("m", "mass must be > 0"))
    if vals["eps"] < 0.0:
        diagnostics.append(("eps", "adiabatic rate must be >= 0"))
    for key in ("v", "v_prime"):
        speed = math.sqrt(sum(c * c for c in vals[key]))
        if speed >= 1.0:
            diagnostics.append((key, f"NonPhysicalVelocity: |{key}| = {speed:.6g} >= 1"))
    if vals["family"] not in FAMILIES:
        diagnostics.append(("family", f"unknown family {vals['family']!r}"))
    if vals["gauge"] not in ("coulomb", "feynman"):
        diagnostics.append(("gauge", f"unknown gauge {vals['gauge']!r}"))
    if vals["format"] not in ("csv", "json"):
        diagnostics.append(("format", f"format must be csv or json, got {vals['format']!r}"))
    for key in ("grid.n_panels", "grid.n_radial", "grid.n_costheta", "grid.n_phi"):
        if vals[key] < 2:
            diagnostics.append((key, "grid counts must be >= 2"))
    lo, hi, n = vals["ladder.lo"], vals["ladder.hi"], vals["ladder.n"]
    if (lo is None) != (hi is None) or (lo is None) != (n is None):
        diagnostics.append(("ladder", "set all of ladder.lo, ladder.hi, ladder.n or none"))
    elif lo is not None:
        if lo <= 0 or hi <= 0:
            diagnostics.append(("ladder.lo", "ladder endpoints must be > 0"))
        if n < 2:
            diagnostics.append(("ladder.n", "ladder needs at least 2 points"))
    for _, idx in vals["photons"]:
        if not 0 <= idx <= 3:
            diagnostics.append(("photons", f"Lorentz index {idx} outside 0..3"))
    return diagnostics


def _setup(cfg: ExperimentConfig):
    vals = cfg.values
    dispersion = Dispersion(vals["lambda"])
    ff = FormFactor(vals["uv_scale"])
    grid = default_grid(dispersion, ff,
                        n_panels=vals["grid.n_panels"], n_radial=vals["grid.n_radial"],
                        n_costheta=vals["grid.n_costheta"], n_phi=vals["grid.n_phi"],
                        check_rtol=vals["grid.check_rtol"])
    kin_v = Kinematics(e=vals["e"], m=vals["m"], v=vals["v"], x=vals["x"])
    kin_vp = Kinematics(e=vals["e"], m=vals["m"], v=vals["v_prime"], x=vals["x"])
    return dispersion, ff, grid, kin_v, kin_vp


def _grid_factory(cfg: ExperimentConfig, ff: FormFactor):
    vals = cfg.values

    def factory(lam: float):
        return default_grid(Dispersion(lam), ff,
                            n_panels=vals["grid.n_panels"], n_radial=vals["grid.n_radial"],
                            n_costheta=vals["grid.n_costheta"], n_phi=vals["grid.n_phi"],
                            check_rtol=vals["grid.check_rtol"])

    return factory


# -- experiment implementations ----------------------------------------------


def run_exponent(cfg):
    dispersion, ff, grid, kin_v, kin_vp = _setup(cfg)
    rows = []
    values = {}
    for gauge in ("coulomb", "feynman"):
        exp_ir = dipole_overlap_exponent(gauge, kin_v, kin_vp, dispersion, ff, grid,
                                         eps=cfg["eps"])
        values[gauge] = exp_ir.value
    ratio = values["feynman"].real / values["coulomb"].real
    for gauge in ("coulomb", "feynman"):
        val = values[gauge]
        rows.append({"gauge": gauge, "re_exponent": val.real, "im_exponent": val.imag,
                     "overlap_modulus": math.exp(val.real), "ratio_feynman_coulomb": ratio})
    return ["gauge", "re_exponent", "im_exponent", "overlap_modulus",
            "ratio_feynman_coulomb"], rows


def run_scan_lambda(cfg):
    _, ff, _, kin_v, kin_vp = _setup(cfg)
    ladder = cfg.ladder("scan-lambda")
    scan = dipole_lambda_scan(cfg["gauge"] if cfg["gauge"] in ("coulomb", "feynman")
                              else "coulomb",
                              kin_v, kin_vp, ff, ladder, eps=cfg["eps"],
                              grid_factory=_grid_factory(cfg, ff))
    rows = [{"lambda": lam, "re_exponent": re, "overlap_modulus": mod,
             "slope_vs_log_inv_lambda": scan.slope_vs_log_inv_lam,
             "predicted_slope": scan.predicted_slope}
            for lam, re, mod in scan.rows]
    return ["lambda", "re_exponent", "overlap_modulus", "slope_vs_log_inv_lambda",
            "predicted_slope"], rows


def run_converge(cfg):
    dispersion, ff, grid, kin_v, _ = _setup(cfg)
    ladder = cfg.ladder("converge")
    profile, norm = convergence_profile(cfg["family"], kin_v, dispersion, ff,
                                        cfg["eps"], ladder, grid)
    rows = [{"t": t, "strong_residual": s, "weak_residual": w,
             "target_norm": norm, "strong_over_norm": s / norm}
            for t, s, w in profile]
    return ["t", "strong_residual", "weak_residual", "target_norm",
            "strong_over_norm"], rows


def run_counterterm_check(cfg):
    dispersion, ff, grid, kin_v, _ = _setup(cfg)
    spec = ModelSpec(cfg["family"], kin_v, dispersion, ff, eps=cfg["eps"])
    ladder = cfg.ladder("counterterm-check")
    scan = cancellation_scan(spec, ladder, grid, counterterm_scale=cfg["counterterm_scale"])
    eps_vals = [r[0] for r in scan]
    args = [r[1] for r in scan]
    diffs = [abs(a - b) for a, b in zip(args, args[1:])]
    # Cauchy-difference slope for the convergent case, |arg| slope otherwise
    slope_cauchy, _ = fit_log_slope(eps_vals[:-1], [math.log(max(d, 1e-300)) for d in diffs])
    slope_arg, _ = fit_log_slope(eps_vals, [math.log(max(abs(a), 1e-300)) for a in args])
    divergent = slope_arg < -0.5
    rows = []
    for i, (eps, arg) in enumerate(scan):
        rows.append({"eps": eps, "argument": arg,
                     "cauchy_diff": diffs[i] if i < len(diffs) else float("nan"),
                     "cauchy_fit_slope": slope_cauchy, "arg_fit_slope": slope_arg,
                     "verdict": "divergent" if divergent else "convergent"})
    return ["eps", "argument", "cauchy_diff", "cauchy_fit_slope", "arg_fit_slope",
            "verdict"], rows


def run_emission(cfg):
    dispersion, ff, grid, kin_v, kin_vp = _setup(cfg)
    photons = PhotonList(cfg["photons"])
    element = emission_amplitude(kin_v, kin_vp, dispersion, ff, photons, cfg["hard"],
                                 grid, eps=cfg["eps"], gauge="feynman")
    rows = [{"photon": 0, "kx": 0.0, "ky": 0.0, "kz": 0.0, "pol": -1,
             "factor_re": 1.0, "factor_im": 0.0,
             "amplitude_re": (element.hard * element.soft_factor).real,
             "amplitude_im": (element.hard * element.soft_factor).imag}]
    running = element.hard * element.soft_factor
    for j, ((k, idx), factor) in enumerate(zip(photons.entries, element.photon_factors), 1):
        running *= factor
        rows.append({"photon": j, "kx": k[0], "ky": k[1], "kz": k[2], "pol": idx,
                     "factor_re": factor.real, "factor_im": factor.imag,
                     "amplitude_re": running.real, "amplitude_im": running.imag})
    return ["photon", "kx", "ky", "kz", "pol", "factor_re", "factor_im",
            "amplitude_re", "amplitude_im"], rows


def run_compare_gauges(cfg):
    _, ff, _, kin_v, kin_vp = _setup(cfg)
    ladder = cfg.ladder("compare-gauges")
    report = gauge_compare_bn(kin_v, kin_vp, ladder, ff, eps=cfg["eps"],
                              grid_factory=_grid_factory(cfg, ff))
    rows = [{"lambda": lam, "exponent_feynman": ef, "exponent_coulomb": ec,
             "kj_max": kj, "slope_feynman": report.slope_feynman,
             "slope_coulomb": report.slope_coulomb,
             "slope_rel_difference": report.slope_rel_difference,
             "offset_difference": report.offset_difference,
             "dipole_slope_ratio": report.dipole_slope_ratio}
            for lam, ef, ec, kj in report.rows]
    return ["lambda", "exponent_feynman", "exponent_coulomb", "kj_max",
            "slope_feynman", "slope_coulomb", "slope_rel_difference",
            "offset_difference", "dipole_slope_ratio"], rows


def run_crosscheck(cfg):
    dispersion = Dispersion(cfg["lambda"])
    ff = FormFactor(cfg["uv_scale"])
    grid = crosscheck_grid(dispersion, ff)
    kin_v = Kinematics(e=cfg["e"], m=cfg["m"], v=cfg["v"], x=cfg["x"])
    kin_vp = Kinematics(e=cfg["e"], m=cfg["m"], v=cfg["v_prime"], x=cfg["x"])
    rows = []
    for family in cfg["families"]:
        chk = perturbative_crosscheck(family, kin_v, kin_vp, dispersion, ff, grid,
                                      eps=max(cfg["eps"], 0.3))
        rows.append({"family": family,
                     "closed_re": chk.closed_coefficient.real,
                     "closed_im": chk.closed_coefficient.imag,
                     "dyson_re": chk.dyson_coefficient.real,
                     "dyson_im": chk.dyson_coefficient.imag,
                     "rel_err": chk.rel_err})
    return ["family", "closed_re", "closed_im", "dyson_re", "dyson_im", "rel_err"], rows


RUNNERS = {
    "exponent": run_exponent,
    "scan-lambda": run_scan_lambda,
    "converge": run_converge,
    "counterterm-check": run_counterterm_check,
    "emission": run_emission,
    "compare-gauges": run_compare_gauges,
    "crosscheck": run_crosscheck,
}


# -- report serialization ------------------------------------------------------


def _format_cell(value):
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in columns])
    return buf.getvalue()


def _config_echo(cfg: ExperimentConfig) -> dict:
    echo = {}
    for key, value in cfg.values.items():
        if value is None:
            continue
        if isinstance(value, tuple):
            if key == "photons":
                echo[key] = ";".join(f"{k[0]},{k[1]},{k[2]},{idx}" for k, idx in value)
            elif key == "families":
                echo[key] = ",".join(value)
            else:
                echo[key] = ",".join(f"{c:.17g}" for c in value)
        elif isinstance(value, complex):
            echo[key] = f"{value.real:.17g},{value.imag:.17g}"
        elif isinstance(value, float):
            echo[key] = f"{value:.17g}"
        else:
            echo[key] = str(value)
    return echo


def render_json(experiment, cfg, columns, rows, metadata) -> str:
    envelope = {
        "experiment": experiment,
        "config": _config_echo(cfg),
        "columns": columns,
        "results": [{c: row[c] for c in columns} for row in rows],
        "metadata": metadata,
    }
    return json.dumps(envelope, indent=2) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="softphoton", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("experiment", choices=EXPERIMENTS + ("validate",))
    parser.add_argument("--config", default=None, help="flat key=value file or JSON envelope")
    parser.add_argument("--set", action="append", default=[], metavar="key=value",
                        help="override one config key (later wins)")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, args.set)
    except ConfigInvalid as exc:
        for field, msg in exc.diagnostics:
            print(f"config error at {field}: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.out is not None:
        cfg.values["out"] = args.out
    if args.format is not None:
        cfg.values["format"] = args.format

    diagnostics = validate_config(cfg)
    if args.experiment == "validate":
        for field, msg in diagnostics:
            print(f"{field}: {msg}")
        if not diagnostics:
            print("ok")
        return 0 if not diagnostics else 2
    if diagnostics:
        for field, msg in diagnostics:
            print(f"config error at {field}: {msg}", file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    try:
        columns, rows = RUNNERS[args.experiment](cfg)
    except SoftPhotonError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - t0

    dispersion = Dispersion(cfg["lambda"])
    ff = FormFactor(cfg["uv_scale"])
    grid = default_grid(dispersion, ff, n_panels=cfg["grid.n_panels"],
                        n_radial=cfg["grid.n_radial"], n_costheta=cfg["grid.n_costheta"],
                        n_phi=cfg["grid.n_phi"], check_rtol=cfg["grid.check_rtol"])
    metadata = {
        "version": __version__,
        "grid_fingerprint": grid.fingerprint(),
        "wall_time_s": wall,
        "threads": os.environ.get("SOFTPHOTON_THREADS", "1"),
    }

    fmt = cfg["format"]
    text = (render_csv(columns, rows) if fmt == "csv"
            else render_json(args.experiment, cfg, columns, rows, metadata))
    out_path = cfg.values.get("out")
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {out_path}")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

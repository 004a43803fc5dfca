"""Command-line front end.

    stone-spectra cdf --observable heisenberg --vacuum 1,0,0 --min -3 --max 3 --points 61
    stone-spectra cf --observable anticommutator --min -2 --max 2 --points 41 --format json
    stone-spectra verify --suite all

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .charfun import ComplexGridFunction, cf_anticommutator_reference, cf_from_measure, measure_from_cdf
from .config import DEFAULT_CONFIG, NumericsConfig, SeriesControl
from .errors import NumericalError
from .resolvents import ObservableSpec
from .stone import SpectralCDF, stone_cdf
from .verify import SUITES, run_verify

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
PRESETS = ("anticommutator", "oscillator", "heisenberg", "matrix")


@dataclass
class RunRequest:
    command: str
    observable: ObservableSpec
    grid_min: float
    grid_max: float
    grid_points: int
    output_format: str = "csv"
    config: NumericsConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not (math.isfinite(self.grid_min) and math.isfinite(self.grid_max)):
            raise ValueError("--min and --max must be finite")
        if not self.grid_min < self.grid_max:
            raise ValueError("--min must be smaller than --max")
        if self.grid_points < 2:
            raise ValueError("--points must be at least 2")
        if self.output_format not in ("csv", "json"):
            raise ValueError("--format must be csv or json")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_min, self.grid_max, self.grid_points)


# --------------------------------------------------------------------------
# request building
# --------------------------------------------------------------------------

def _parse_vector(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"cannot parse vector {text!r}; expected comma-separated numbers") from None


def build_observable(name, vacuum=None, file=None, normalize=False) -> ObservableSpec:
    matrix = None
    if file is not None:
        with open(file) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{file}: invalid JSON ({exc})") from None
        if not isinstance(data, dict) or "matrix" not in data:
            raise ValueError(f"{file}: expected an object with a 'matrix' entry")
        matrix = data["matrix"]
        if vacuum is None and "vacuum" in data:
            vacuum = data["vacuum"]
    if isinstance(vacuum, str):
        vacuum = _parse_vector(vacuum)
    if vacuum is not None and normalize:
        v = np.asarray(vacuum, dtype=float)
        nrm = float(np.linalg.norm(v))
        if nrm == 0:
            raise ValueError("vacuum vector is zero")
        vacuum = v / nrm

    if name in ("anticommutator", "oscillator"):
        if vacuum is not None or file is not None:
            raise ValueError(f"{name} takes neither --vacuum nor --file")
        return ObservableSpec.anticommutator() if name == "anticommutator" else ObservableSpec.oscillator()
    if name == "heisenberg":
        if file is not None:
            raise ValueError("heisenberg takes no --file")
        return ObservableSpec.heisenberg((1.0, 0.0, 0.0) if vacuum is None else vacuum)
    if name == "matrix":
        if matrix is None:
            raise ValueError("matrix observable needs --file")
        if vacuum is None:
            raise ValueError("matrix observable needs a vacuum (--vacuum or 'vacuum' in the file)")
        try:
            m = np.asarray(matrix, dtype=float)
            v = np.asarray(vacuum, dtype=float)
        except (TypeError, ValueError):
            raise ValueError("matrix and vacuum must be numeric") from None
        return ObservableSpec.finite(m, v)
    raise ValueError(f"unknown observable {name!r}")


def apply_overrides(cfg: NumericsConfig, items) -> NumericsConfig:
    """Apply ``key=value`` strings; ``series.<field>`` reaches the series control."""
    top, series = {}, {}
    kinds = {f.name: f for f in fields(NumericsConfig)}
    for item in items or ():
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        if key.startswith("series."):
            sub = key[len("series."):]
            if sub not in {f.name for f in fields(SeriesControl)}:
                raise ValueError(f"unknown series setting {sub!r}")
            series[sub] = int(raw) if sub == "max_terms" else float(raw)
            continue
        if key not in kinds or key == "series":
            raise ValueError(f"unknown config setting {key!r}")
        try:
            if key == "eps_schedule":
                top[key] = tuple(float(v) for v in raw.split(","))
            elif key == "refine_grid":
                if raw.lower() not in ("true", "false", "1", "0"):
                    raise ValueError
                top[key] = raw.lower() in ("true", "1")
            elif key == "threads":
                top[key] = None if raw.lower() == "none" else int(raw)
            else:
                top[key] = float(raw)
        except ValueError:
            raise ValueError(f"bad value for {key}: {raw!r}") from None
    if series:
        top["series"] = SeriesControl(**{**cfg.series.__dict__, **series})
    return cfg.with_overrides(**top) if top else cfg


# --------------------------------------------------------------------------
# computations
# --------------------------------------------------------------------------

def _internal_lambda_grid(spec: ObservableSpec) -> np.ndarray:
    if spec.name == "anticommutator":
        return np.arange(-600, 601) * 0.05
    if spec.name == "oscillator":
        return np.linspace(-1.0, 2.0, 61)
    m = spec.matrix
    radius = np.sum(np.abs(m), axis=1) - np.abs(np.diag(m))
    lo = float(np.min(np.diag(m) - radius)) - 1.0
    hi = float(np.max(np.diag(m) + radius)) + 1.0
    return np.linspace(lo, hi, int(math.ceil((hi - lo) / 0.02)) + 1)


def run_cdf(req: RunRequest) -> SpectralCDF:
    cdf = stone_cdf(req.observable, req.grid, req.config)
    cdf.check_invariants()
    return cdf


def reference_cf(spec: ObservableSpec):
    """Closed-form CF for the presets, or None."""
    if spec.name == "anticommutator":
        return cf_anticommutator_reference
    if spec.name == "oscillator":
        return lambda t: np.exp(0.5j * np.asarray(t))
    if spec.name == "heisenberg":
        x2 = float(np.sum(spec.vacuum)) ** 2
        return lambda t: (1 - x2 / 3) * np.exp(-1j * np.asarray(t)) + x2 / 3 * np.exp(2j * np.asarray(t))
    return None


def run_cf(req: RunRequest):
    cdf = stone_cdf(req.observable, _internal_lambda_grid(req.observable), req.config)
    measure = measure_from_cdf(cdf)
    measure.check()
    phi = cf_from_measure(measure, req.grid, req.config)
    phi.check_characteristic(1e-6)
    return phi, cdf


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def to_json(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(json.dumps(str(k)) + ": " + to_json(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return json.dumps(str(obj))


def format_cdf(req: RunRequest, cdf: SpectralCDF) -> str:
    if req.output_format == "json":
        doc = {
            "observable": req.observable.describe(),
            "config": req.config.as_dict(),
            "grid": cdf.grid,
            "values": cdf.values,
            "atoms": [[x, m] for x, m in cdf.atoms],
            "error_budget": cdf.error_budget,
        }
        return to_json(doc) + "\n"
    lines = ["lambda,F"]
    lines += [f"{_num(x)},{_num(f)}" for x, f in zip(cdf.grid, cdf.values)]
    lines += ["", "atom_location,atom_mass"]
    lines += [f"{_num(x)},{_num(m)}" for x, m in cdf.atoms]
    return "\n".join(lines) + "\n"


def format_cf(req: RunRequest, phi: ComplexGridFunction, cdf: SpectralCDF) -> str:
    ref = reference_cf(req.observable)
    ref_vals = None if ref is None else np.asarray(ref(phi.grid), dtype=complex)
    dev = None if ref is None else phi.max_deviation(ref)
    if req.output_format == "json":
        doc = {
            "observable": req.observable.describe(),
            "config": req.config.as_dict(),
            "grid": phi.grid,
            "values": [[v.real, v.imag] for v in phi.values],
            "reference": None if ref_vals is None else [[v.real, v.imag] for v in ref_vals],
            "max_deviation": dev,
            "atoms": [[x, m] for x, m in cdf.atoms],
            "error_budget": cdf.error_budget,
        }
        return to_json(doc) + "\n"
    head = "t,re,im" + (",ref_re,ref_im" if ref is not None else "")
    lines = [head]
    for i, (t, v) in enumerate(zip(phi.grid, phi.values)):
        row = [_num(t), _num(v.real), _num(v.imag)]
        if ref_vals is not None:
            row += [_num(ref_vals[i].real), _num(ref_vals[i].imag)]
        lines.append(",".join(row))
    if dev is not None:
        lines += ["", f"max_deviation,{_num(dev)}"]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stone-spectra", description="Vacuum spectral CDFs and characteristic functions via Stone's formula.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    for name, helptext in (("cdf", "spectral CDF on a lambda grid"), ("cf", "characteristic function on a t grid")):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("--observable", required=True, choices=PRESETS)
        q.add_argument("--vacuum", help="comma-separated vacuum vector (heisenberg, matrix)")
        q.add_argument("--normalize-vacuum", action="store_true", help="scale the vacuum to unit length")
        q.add_argument("--file", help='JSON file {"matrix": [[...]], "vacuum": [...]} for --observable matrix')
        q.add_argument("--min", type=float, required=True, dest="grid_min")
        q.add_argument("--max", type=float, required=True, dest="grid_max")
        q.add_argument("--points", type=int, default=101, dest="grid_points")
        q.add_argument("--format", choices=("csv", "json"), default="csv", dest="output_format")
        q.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a numerics setting (repeatable)")
        q.add_argument("-o", "--output", help="write to this file instead of stdout")

    v = sub.add_parser("verify", help="run the self-verification suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--set", action="append", metavar="KEY=VALUE")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(DEFAULT_CONFIG, args.set)
        if args.command == "verify":
            report = run_verify(args.suite, cfg)
            print(report.table())
            return EXIT_OK if report.overall else EXIT_CHECK_FAILED
        spec = build_observable(args.observable, args.vacuum, args.file, args.normalize_vacuum)
        req = RunRequest(args.command, spec, args.grid_min, args.grid_max, args.grid_points, args.output_format, cfg)
        if args.command == "cdf":
            text = format_cdf(req, run_cdf(req))
        else:
            text = format_cf(req, *run_cf(req))
    except NumericalError as exc:
        print(f"stone-spectra: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"stone-spectra: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``dispersim simulate|reference|compare|calibrate|rerun``.

Every output carries a run manifest (inline for JSON, ``<out>.manifest.json``
beside CSV). ``dispersim rerun MANIFEST`` replays a run and reproduces its
files byte for byte.

Exit codes: 0 ok, 2 usage, 3 model-domain rejection, 4 calibration failure, 5 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from datetime import datetime, timezone

import numpy as np

from dispersim import __version__
from dispersim import calibration as cal
from dispersim import crystal, orbit, refmodels
from dispersim.crystal import CrystalFilm
from dispersim.engine import RNG_NAME, TABLE_WAVELENGTHS_NM, SimulationConfig, simulate_dispersion
from dispersim.errors import CalibrationError, DomainError
from dispersim.physics import NM

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CALIBRATION, EXIT_IO = 0, 2, 3, 4, 5

SIMULATE_COLUMNS = ("wavelength_nm", "axis", "n", "stderr", "sum_tau_s", "layers")
COMPARE_COLUMNS = ("wavelength_nm", "n_exp", "n_sim", "n_sellmeier", "percent_error")
TARGET_COLUMNS = ("wavelength_nm", "axis", "n_exp")
DEFAULT_BOUNDS = "eccentricity=0.01:0.6,semimajor=1.33e-10:1.47e-10,charge=1:40"


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


# --- manifest and output ------------------------------------------------------


def _now() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return ts.isoformat(timespec="seconds")


def make_manifest(command: str, config: dict, timestamp: str | None = None) -> dict:
    return {
        "command": command,
        "config": config,
        "tool_version": __version__,
        "dataset_sha256": refmodels.dataset_sha256(),
        "rng": RNG_NAME,
        "numpy_version": np.__version__,
        "timestamp": timestamp or _now(),
    }


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def emit(args, text: str, manifest: dict, inline: bool) -> None:
    """Write a result; CSV gets a sidecar manifest, JSON embeds it already."""
    _write(args.out, text)
    if not inline and args.out != "-":
        _write(args.out + ".manifest.json", _dump_json(manifest))


def _resolved(args) -> dict:
    # where the output goes is not part of the run
    skip = {"func", "config", "timestamp", "out", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# --- parsing helpers ------------------------------------------------------------


def parse_wavelengths(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise UsageError("--wavelengths needs at least one value (nm)")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--wavelengths must be a comma list of numbers, got {text!r}") from None
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise UsageError("--wavelengths must be positive")
    return values


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in str(text).split(":"))
    except ValueError:
        raise UsageError(f"--range must look like lo:hi, got {text!r}") from None
    if not 0 < lo < hi:
        raise UsageError("--range needs 0 < lo < hi")
    return lo, hi


def parse_bounds(text: str) -> cal.Bounds:
    aliases = {"eps": "eccentricity", "e": "eccentricity", "u": "semimajor", "z": "charge"}
    ranges = {}
    for item in filter(None, (p.strip() for p in str(text).split(","))):
        try:
            key, rng = item.split("=")
            lo, hi = (float(v) for v in rng.split(":"))
        except ValueError:
            raise UsageError(f"bad --bounds entry {item!r}; expected name=lo:hi") from None
        key = aliases.get(key.strip().lower(), key.strip().lower())
        if key not in cal.PARAMS:
            raise UsageError(f"unknown bound {key!r}; expected one of {cal.PARAMS}")
        ranges[key] = (lo, hi)
    try:
        return cal.Bounds(**ranges)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_targets(path: str) -> list[cal.Target]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read targets {path}: {exc}") from exc
    if not lines or not lines[0].strip():
        raise InputError(f"{path}: line 1: empty targets file; expected header {','.join(TARGET_COLUMNS)}")
    header = [h.strip() for h in lines[0].split(",")]
    if tuple(header) != TARGET_COLUMNS:
        raise InputError(f"{path}: line 1: expected header {','.join(TARGET_COLUMNS)}, got {lines[0]!r}")
    targets = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            if len(fields) != 3:
                raise ValueError(f"expected 3 fields, got {len(fields)}")
            targets.append(cal.Target(float(fields[0]) * NM, fields[1], float(fields[2])))
        except ValueError as exc:
            raise InputError(f"{path}: line {lineno}: {exc}") from None
    if not targets:
        raise InputError(f"{path}: line 2: no target rows")
    return targets


def read_simulation(path: str) -> list[dict]:
    """Rows of a ``simulate`` output, CSV or JSON."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read simulation table {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            rows = json.loads(text)["rows"]
        except (ValueError, KeyError) as exc:
            raise InputError(f"{path}: not a simulate JSON table ({exc})") from None
    else:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != SIMULATE_COLUMNS:
            raise InputError(f"{path}: line 1: expected header {','.join(SIMULATE_COLUMNS)}")
        rows = list(reader)
    try:
        return [{"wavelength_nm": float(r["wavelength_nm"]), "axis": str(r["axis"]), "n": float(r["n"])} for r in rows]
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed simulation row ({exc})") from None


# --- commands ---------------------------------------------------------------------


def cmd_simulate(args) -> int:
    wavelengths = parse_wavelengths(args.wavelengths)
    axes = ("x", "y") if args.axis == "both" else (args.axis,)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    try:
        config = SimulationConfig(
            film=CrystalFilm(thickness=args.thickness),
            orbit=orbit.Orbit(eccentricity=args.eccentricity, semimajor=args.semimajor, charge=args.charge),
            wavelengths=tuple(w * NM for w in wavelengths),
            axes=axes,
            samples_per_point=args.samples,
            seed=args.seed,
            mode="monte_carlo" if args.mode == "mc" else "deterministic",
            frame_offset=math.radians(args.frame_offset),
        )
    except DomainError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = simulate_dispersion(config)
    manifest = make_manifest("simulate", _resolved(args), args.timestamp)
    rows = [
        (round(p.wavelength / NM, 9), p.axis, p.n, p.stderr, p.sum_tau, p.layer_count) for p in table.points
    ]
    if args.format == "json":
        payload = {
            "manifest": manifest,
            "metadata": table.metadata,
            "columns": list(SIMULATE_COLUMNS),
            "rows": [dict(zip(SIMULATE_COLUMNS, r)) for r in rows],
        }
        emit(args, _dump_json(payload), manifest, inline=True)
    else:
        emit(args, _csv_text(SIMULATE_COLUMNS, rows), manifest, inline=False)
    return EXIT_OK


def _reference_rows(args):
    model = "pdf" if args.pdf else args.model
    if args.crystal:
        film = CrystalFilm(thickness=args.thickness)
        info = crystal.describe(film)
        text = "".join(f"{k} = {v if isinstance(v, str) else fmt(v)}\n" for k, v in info.items())
        return None, text
    if model is None:
        raise UsageError("reference needs --model, --pdf or --crystal")
    if args.points < 2:
        raise UsageError("--points must be >= 2")

    if model == "pdf":
        if not 0 <= args.eccentricity < 1:
            raise UsageError("--eccentricity must lie in [0, 1)")
        theta = np.linspace(0.0, orbit.TWO_PI, args.points)
        dens = orbit.pdf(theta, args.eccentricity)
        cum = orbit.cdf(theta, args.eccentricity)
        return ("theta_rad", "pdf", "cdf"), list(zip(theta, dens, cum))

    if model == "experimental":
        if args.axis == "z":
            raise UsageError("measured indices exist for axes x and y only")
        col = 1 if args.axis == "x" else 2
        return ("wavelength_nm", "n"), [(row[0], row[col]) for row in refmodels.experimental_table()]

    lo, hi = parse_range(args.range)
    lam_nm = np.linspace(lo, hi, args.points)
    lam_um = lam_nm / 1000.0
    if model in refmodels.FORMS:
        n = refmodels.sellmeier_eval(refmodels.sellmeier_model(model, args.axis), lam_um)
    elif model == "cauchy":
        if args.axis == "z":
            raise UsageError("cauchy reference is fitted to measured indices; axis must be x or y")
        fit_nm = parse_wavelengths(args.fit_wavelengths)
        if len(fit_nm) != 3:
            raise UsageError("--fit-wavelengths needs exactly three values for the Cauchy fit")
        try:
            pts = [(w / 1000.0, refmodels.experimental(args.axis, w)) for w in fit_nm]
        except KeyError as exc:
            raise UsageError(str(exc)) from None
        n = refmodels.cauchy_eval(refmodels.cauchy_fit(pts), lam_um)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown model {model!r}")
    return ("wavelength_nm", "n"), list(zip(lam_nm, np.atleast_1d(n)))


def cmd_reference(args) -> int:
    header, rows = _reference_rows(args)
    manifest = make_manifest("reference", _resolved(args), args.timestamp)
    text = rows if header is None else _csv_text(header, rows)
    emit(args, text, manifest, inline=False)
    return EXIT_OK


def cmd_compare(args) -> int:
    sim = [r for r in read_simulation(args.sim) if r["axis"] == args.axis]
    if not sim:
        raise InputError(f"{args.sim}: no rows for axis {args.axis}")
    grid = refmodels.experimental_wavelengths_nm()
    offending = [r["wavelength_nm"] for r in sim if not any(math.isclose(r["wavelength_nm"], g, abs_tol=1e-6) for g in grid)]
    if offending:
        listed = ", ".join(fmt(w) for w in offending)
        raise InputError(f"join error: simulated wavelengths not in the measured grid: {listed} nm")
    model = refmodels.sellmeier_model("datta", args.axis)
    rows, errors = [], []
    for r in sorted(sim, key=lambda r: r["wavelength_nm"]):
        w = min(grid, key=lambda g: abs(g - r["wavelength_nm"]))
        n_exp = refmodels.experimental(args.axis, w)
        err = abs(r["n"] - n_exp) / n_exp * 100.0
        errors.append(err)
        rows.append((w, n_exp, r["n"], refmodels.sellmeier_eval(model, w / 1000.0), err))
    rows.append(("max", "", "", "", fmt(max(errors))))
    rows.append(("min", "", "", "", fmt(min(errors))))
    manifest = make_manifest("compare", _resolved(args), args.timestamp)
    emit(args, _csv_text(COMPARE_COLUMNS, rows), manifest, inline=False)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    targets = read_targets(args.targets)
    if args.fit_wavelengths:
        keep = parse_wavelengths(args.fit_wavelengths)
        targets = [t for t in targets if any(math.isclose(t.wavelength / NM, w, abs_tol=1e-6) for w in keep)]
    bounds = parse_bounds(args.bounds)
    try:
        problem = cal.CalibrationProblem(
            targets=tuple(targets),
            bounds=bounds,
            film=CrystalFilm(thickness=args.thickness),
            frame_offset=math.radians(args.frame_offset),
            grid_points=args.grid,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = cal.calibrate(problem)

    holdout = []
    for axis in sorted({t.axis for t in targets}):
        used = {round(t.wavelength / NM, 6) for t in targets if t.axis == axis}
        rest = [w for w in refmodels.experimental_wavelengths_nm() if round(float(w), 6) not in used]
        holdout.extend(cal.table_targets(axis, rest))
    report = cal.validate(result, holdout, problem.film, problem.frame_offset)

    manifest = make_manifest("calibrate", _resolved(args), args.timestamp)
    payload = {
        "manifest": manifest,
        "result": result.to_dict(),
        "targets": [{"wavelength_nm": round(t.wavelength / NM, 9), "axis": t.axis, "n_exp": t.n_exp} for t in targets],
        "bounds": {name: list(bounds.interval(name)) for name in cal.PARAMS},
        "holdout": {"rows": report.rows, "max_percent_error": report.max_error, "min_percent_error": report.min_error},
    }
    emit(args, _dump_json(payload), manifest, inline=True)
    return EXIT_OK


def cmd_rerun(args) -> int:
    try:
        with open(args.manifest, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read manifest {args.manifest}: {exc}") from exc
    manifest = data.get("manifest", data)
    try:
        command, config, stamp = manifest["command"], dict(manifest["config"]), manifest["timestamp"]
    except KeyError as exc:
        raise InputError(f"{args.manifest}: manifest lacks {exc}") from None
    if command not in COMMANDS or command == "rerun":
        raise InputError(f"{args.manifest}: unknown command {command!r}")
    ns = argparse.Namespace(**config, command=command, out=args.out or "-", timestamp=stamp)
    return COMMANDS[command](ns)


COMMANDS = {
    "simulate": cmd_simulate,
    "reference": cmd_reference,
    "compare": cmd_compare,
    "calibrate": cmd_calibrate,
    "rerun": cmd_rerun,
}


# --- argument parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dispersim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="key = value file; flags override it")
        p.add_argument("--out", default="-", metavar="PATH", help="output file (default stdout)")
        p.set_defaults(timestamp=None)

    grid = ",".join(str(w) for w in TABLE_WAVELENGTHS_NM)

    p = sub.add_parser("simulate", help="simulate n(lambda) for the NPP film")
    common(p)
    p.add_argument("--wavelengths", default=grid, help="comma list, nm")
    p.add_argument("--thickness", type=float, default=3e-6, help="film thickness, m")
    p.add_argument("--eccentricity", type=float, default=0.26)
    p.add_argument("--charge", type=float, default=3.9)
    p.add_argument("--semimajor", type=float, default=1.4e-10, help="m")
    p.add_argument("--axis", choices=("x", "y", "both"), default="both")
    p.add_argument("--samples", type=int, default=1000, help="Monte-Carlo repetitions per point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("mc", "det"), default="mc")
    p.add_argument("--frame-offset", type=float, default=0.0, help="degrees added to the orbit angle")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reference", help="reference curves and datasets")
    common(p)
    p.add_argument("--model", choices=("datta", "ledoux", "cauchy", "experimental", "pdf"))
    p.add_argument("--axis", choices=("x", "y", "z"), default="x")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--range", default="480:2000", help="lo:hi wavelength range, nm")
    p.add_argument("--eccentricity", type=float, default=0.26, help="for the pdf model")
    p.add_argument("--fit-wavelengths", default="509,633,1064", help="Cauchy fit points, nm")
    p.add_argument("--pdf", action="store_true", help="same as --model pdf")
    p.add_argument("--crystal", action="store_true", help="print the built-in NPP crystal data")
    p.add_argument("--thickness", type=float, default=3e-6, help="film thickness for --crystal, m")
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("compare", help="join a simulation with measured and Sellmeier indices")
    common(p)
    p.add_argument("--sim", required=True, metavar="PATH")
    p.add_argument("--axis", choices=("x", "y"), default="x")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("calibrate", help="fit eccentricity, semimajor axis and charge to targets")
    common(p)
    p.add_argument("--targets", required=True, metavar="PATH", help="CSV wavelength_nm,axis,n_exp")
    p.add_argument("--fit-wavelengths", default=None, help="only use targets at these wavelengths (nm)")
    p.add_argument("--bounds", default=DEFAULT_BOUNDS, help="name=lo:hi,... (semimajor in m)")
    p.add_argument("--thickness", type=float, default=3e-6)
    p.add_argument("--frame-offset", type=float, default=0.0, help="degrees")
    p.add_argument("--grid", type=int, default=20, help="grid points per parameter")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("rerun", help="replay a run from its manifest")
    p.add_argument("manifest", metavar="MANIFEST")
    p.add_argument("--out", default=None, metavar="PATH", help="output file (default stdout)")
    p.set_defaults(func=cmd_rerun, config=None, timestamp=None)
    return parser


def load_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}: line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = load_config_file(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, raw in values.items():
            action = known.get(key)
            if action is None or key in ("help", "config"):
                raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
            if action.nargs == 0:
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    defaults[key] = action.type(raw) if action.type else raw
                except ValueError:
                    raise UsageError(f"{args.config}: bad value for {key}: {raw!r}") from None
                if action.choices and defaults[key] not in action.choices:
                    raise UsageError(f"{args.config}: {key} must be one of {list(action.choices)}")
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit with 2
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"dispersim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"dispersim: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(f"dispersim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"dispersim: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"dispersim: rejected: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except CalibrationError as exc:
        print(f"dispersim: calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION


if __name__ == "__main__":
    sys.exit(main())

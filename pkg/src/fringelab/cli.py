"""Command-line front end: every subcommand writes ``PREFIX.csv`` and ``PREFIX.json``.

Parameters come from built-in defaults, then an optional ``--config`` file
of ``key = value`` lines (keys are the long option names), then explicit
flags, each overriding the previous. Angles are radians unless ``--deg``.
Times accept a ``ps`` or ``ns`` suffix and default to picoseconds.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import calib, fitsolver, fringe, io, sensitivity, temporal
from ._version import __version__
from .ensemble import FITTED, IDEAL, PARAM_NAMES, InputConfig, SourceParams
from .propagator import Scheme

log = logging.getLogger("fringelab")

COMMANDS = ("scan", "sweep", "sensitivity", "fit", "calibrate", "overlap", "synthesize")
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off", ""}


def _add_source_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("source and loss parameters")
    g.add_argument("--ideal", action="store_true", help="start from ideal parameters (default)")
    g.add_argument("--fitted", action="store_true", help="start from the fitted parameter set")
    g.add_argument("--g2", type=float)
    g.add_argument("--indist", type=float)
    for k in "cdef":
        g.add_argument(f"--eta-{k}", type=float, dest=f"eta_{k}")


def _add_common(p: argparse.ArgumentParser, default_out: str) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("-o", "--out", default=default_out, help="output prefix (PREFIX.csv, PREFIX.json)")
    p.add_argument("--deg", action="store_true", help="angles in degrees")


# checked after the config file is merged, so values may come from either
REQUIRED = {
    "scan": ("input",),
    "sweep": ("input", "var"),
    "sensitivity": ("input",),
    "calibrate": ("data",),
    "synthesize": ("input",),
}


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", choices=[c.value for c in InputConfig])
    p.add_argument("--scheme", help='detection scheme, e.g. "1,1", "3,1+1,3" or "exact:2,2"')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fringelab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fringelab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="model fringe over phase")
    _add_common(p, "scan")
    _add_input(p)
    _add_source_options(p)
    p.add_argument("--points", type=int, default=fringe.DEFAULT_POINTS)
    p.add_argument("--phi-min", type=float, default=0.0)
    p.add_argument("--phi-max", type=float)
    p.add_argument("--analytic", action="store_true", help="add the closed-form ideal fringe as a column")
    p.add_argument("--max-photons", type=int, default=5)
    p.add_argument("--convention", choices=("linear", "amplitude"), default="linear")

    p = sub.add_parser("sweep", help="contrast as one parameter varies")
    _add_common(p, "sweep")
    _add_input(p)
    _add_source_options(p)
    p.add_argument("--var", choices=fringe.SWEEP_VARIABLES)
    p.add_argument("--grid", default="0:1:21", help="start:stop:num or comma list")
    p.add_argument("--points", type=int, default=fringe.DEFAULT_POINTS)

    p = sub.add_parser("sensitivity", help="phase sensitivity fringe or S_max sweep")
    _add_common(p, "sensitivity")
    _add_input(p)
    _add_source_options(p)
    p.add_argument("--var", choices=fringe.SWEEP_VARIABLES, help="sweep this parameter instead")
    p.add_argument("--grid", default="0:1:21")
    p.add_argument("--points", type=int, default=sensitivity.SENSITIVITY_POINTS)
    p.add_argument("--keep-losses", action="store_true", help="do not set transmissions to one")

    p = sub.add_parser("fit", help="fit a fringe, or run the staged workflow")
    _add_common(p, "fit")
    _add_input(p)
    _add_source_options(p)
    p.add_argument("--data", help="CSV with phi, value[, sigma]")
    p.add_argument("--free", default="", help="comma list of free parameters")
    p.add_argument("--initial", default="", help="comma list name=value of starting values")
    p.add_argument("--fit-offset", action="store_true")
    p.add_argument("--staged", action="store_true", help="run the four-stage workflow")
    for c in InputConfig:
        p.add_argument(f"--data-{c.value}", dest=f"data_{c.value}", help=f"staged data for {c}")

    p = sub.add_parser("calibrate", help="plate angle to phase from an intensity scan")
    _add_common(p, "calibrate")
    p.add_argument("--data", help="CSV with theta, counts")
    p.add_argument("--no-offset", action="store_true")
    p.add_argument("--extreme-fraction", type=float, default=calib.EXTREME_FRACTION)

    p = sub.add_parser("overlap", help="indistinguishability and contrast versus delay")
    _add_common(p, "overlap")
    _add_source_options(p)
    p.add_argument("--T1", default="59ps", dest="T1")
    p.add_argument("--wp", default="8.86ps")
    p.add_argument("--taus", default="0ps:600ps:61", help="start:stop:num or list, ps/ns suffix")

    p = sub.add_parser("synthesize", help="Poisson-noised synthetic fringe data")
    _add_common(p, "synthesize")
    _add_input(p)
    _add_source_options(p)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--peak-counts", type=float, default=1e5)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _apply_config(sub: argparse.ArgumentParser, path: str) -> None:
    config = io.read_config(path)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in config.items():
        if key not in actions or key in ("config", "help"):
            raise ValueError(f"{path}: unknown key {key!r}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in _BOOL_TRUE | _BOOL_FALSE:
                raise ValueError(f"{path}: {key} must be true or false")
            defaults[key] = value.lower() in _BOOL_TRUE
        else:
            defaults[key] = value  # string defaults go through the option's type
    sub.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        _apply_config(_subparser(parser, args.command), args.config)
        args = parser.parse_args(argv)
    missing = [name for name in REQUIRED.get(args.command, ()) if getattr(args, name) is None]
    if missing:
        _subparser(parser, args.command).error(
            "missing " + ", ".join("--" + m.replace("_", "-") for m in missing) + " (flag or config file)"
        )
    return args


def argv_from_metadata(meta: dict) -> list[str]:
    """Command line that regenerates a file from its embedded metadata."""
    params = meta["parameters"]
    parser = build_parser()
    sub = _subparser(parser, params["command"])
    flags = {a.dest: a for a in sub._actions if a.option_strings}
    argv = [params["command"]]
    for key, value in params.items():
        if key in ("command", "derived") or key not in flags or value is None:
            continue
        action = flags[key]
        if isinstance(action, argparse._StoreTrueAction):
            if value:
                argv.append(action.option_strings[-1])
        else:
            argv += [action.option_strings[-1], str(value)]
    return argv


def source_params(args) -> SourceParams:
    if args.ideal and args.fitted:
        raise ValueError("--ideal and --fitted are exclusive")
    base = FITTED if args.fitted else IDEAL
    changes = {n: getattr(args, n) for n in PARAM_NAMES if getattr(args, n, None) is not None}
    return base.replace(**changes)


def _angle(args, value: float) -> float:
    return float(np.deg2rad(value)) if args.deg else float(value)


def _record(args, **derived) -> dict:
    """Every option value, plus resolved quantities under ``"derived"``."""
    skip = {"config", "out", "verbose"}
    rec = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if derived:
        rec["derived"] = derived
    return rec


def _analytic_kind(config: InputConfig, scheme: Scheme, params: SourceParams) -> str:
    ideal_losses = params.lossless() == params
    if params.g2 != 0 or not ideal_losses:
        raise ValueError("--analytic needs g2 = 0 and unit transmissions")
    default = scheme == fringe.DEFAULT_SCHEMES[config]
    if config is InputConfig.KET11 and default and params.indist == 0:
        return "distinguishable11"
    if params.indist != 1 or not default:
        raise ValueError("--analytic needs indist = 1 (or 0 for |1,1>) and the default scheme")
    return "P" + config.value


def cmd_scan(args) -> list[Path]:
    params = source_params(args)
    config = InputConfig.parse(args.input)
    scheme = fringe.DEFAULT_SCHEMES[config] if args.scheme is None else Scheme.parse(args.scheme)
    phi_max = 2 * np.pi if args.phi_max is None else _angle(args, args.phi_max)
    phis = np.linspace(_angle(args, args.phi_min), phi_max, args.points)
    result = fringe.scan(config, params, scheme, phis, args.max_photons, args.convention)
    header, columns = ["phi", "prob"], [phis, result.probs]
    if args.analytic:
        header.append("analytic")
        columns.append(fringe.analytic_fringe(_analytic_kind(config, scheme, params), phis))
    try:
        report = fringe.contrast(result).to_json_obj()
    except fringe.NoExtremaError:
        report = None
    rec = _record(args, source=params.to_json_obj(), scheme_resolved=str(scheme))
    out = Path(args.out)
    return [
        io.write_csv(out.with_suffix(".csv"), header, columns, rec),
        io.write_json(out.with_suffix(".json"), {"contrast": report}, rec),
    ]


def cmd_sweep(args) -> list[Path]:
    params = source_params(args)
    grid = io.parse_grid(args.grid)
    phis = fringe.phase_grid(args.points)
    reports = fringe.parameter_sweep(args.input, args.scheme, args.var, grid, params, phis)
    nan = float("nan")
    columns = [
        grid,
        [r.mean_contrast for r in reports],
        [nan if r.deep_contrast is None else r.deep_contrast for r in reports],
        [nan if r.shallow_contrast is None else r.shallow_contrast for r in reports],
    ]
    rec = _record(args, source=params.to_json_obj())
    out = Path(args.out)
    return [
        io.write_csv(out.with_suffix(".csv"), [args.var, "mean_contrast", "deep_contrast", "shallow_contrast"], columns, rec),
        io.write_json(out.with_suffix(".json"), [r.to_json_obj() for r in reports], rec),
    ]


def cmd_sensitivity(args) -> list[Path]:
    params = source_params(args)
    config = InputConfig.parse(args.input)
    phis = sensitivity.sensitivity_grid(args.points)
    rec = _record(args, source=params.to_json_obj())
    out = Path(args.out)
    if args.var:
        if args.keep_losses:
            raise ValueError("--keep-losses applies to single sensitivity fringes only")
        grid = io.parse_grid(args.grid)
        smax = sensitivity.sensitivity_sweep(config, args.scheme, args.var, grid, params, phis)
        return [
            io.write_csv(out.with_suffix(".csv"), [args.var, "S_max"], [grid, smax], rec),
            io.write_json(out.with_suffix(".json"), {"grid": grid, "S_max": smax}, rec),
        ]
    curve = sensitivity.sensitivity_scan(config, params, args.scheme, phis, exclude_losses=not args.keep_losses)
    return [
        io.write_csv(out.with_suffix(".csv"), ["phi", "S"], [curve.phis, curve.S_values], rec),
        io.write_json(out.with_suffix(".json"), curve.to_json_obj(), rec),
    ]


def _load_fit_data(args, path) -> fitsolver.FitData:
    cols, _ = io.read_csv(path)
    names = list(cols)
    if len(names) < 2:
        raise ValueError(f"{path}: need phi and value columns")
    phis = cols[names[0]]
    phis = np.deg2rad(phis) if args.deg else phis
    sigma = cols[names[2]] if len(names) > 2 else None
    return fitsolver.FitData(phis, cols[names[1]], sigma)


def _parse_assignments(text: str) -> dict[str, float]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, _, value = item.partition("=")
        out[key.strip()] = float(value)
    return out


def _fit_rows(label: str, result: fitsolver.FitResult):
    rows = result.to_json_obj()["parameters"]
    return [(label, r["parameter"], r["value"], np.nan if r["sigma"] is None else r["sigma"], int(r["fixed"])) for r in rows]


def cmd_fit(args) -> list[Path]:
    out = Path(args.out)
    if args.staged:
        datasets = {c: _load_fit_data(args, getattr(args, f"data_{c.value}"))
                    for c in InputConfig if getattr(args, f"data_{c.value}")}
        staged = fitsolver.staged_workflow(datasets)
        rows = [row for c, r in staged.results.items() for row in _fit_rows(c.value, r)]
        if staged.cross_check is not None:
            rows += _fit_rows("11_indist_fixed", staged.cross_check)
        result = staged.to_json_obj()
        rec = _record(args)
    else:
        if not (args.data and args.input):
            raise ValueError("fit needs --data and --input (or --staged)")
        free = [s.strip() for s in args.free.split(",") if s.strip()]
        unknown = set(free) - set(PARAM_NAMES)
        if unknown:
            raise ValueError(f"unknown free parameters {sorted(unknown)}")
        params = source_params(args).replace(fixed=frozenset(PARAM_NAMES) - set(free))
        problem = fitsolver.FitProblem(
            _load_fit_data(args, args.data), args.input, params, args.scheme,
            initial=_parse_assignments(args.initial), fit_offset=args.fit_offset,
        )
        res = fitsolver.fit(problem)
        rows = _fit_rows(args.input, res)
        result = res.to_json_obj()
        rec = _record(args, source=params.to_json_obj())
    labels, names, values, sigmas, fixed = zip(*rows)
    return [
        io.write_csv(out.with_suffix(".csv"), ["fit", "parameter", "value", "sigma", "fixed"],
                     [labels, names, values, sigmas, fixed], rec),
        io.write_json(out.with_suffix(".json"), result, rec),
    ]


def cmd_calibrate(args) -> list[Path]:
    cols, _ = io.read_csv(args.data)
    names = list(cols)
    curve = calib.calibrate(cols[names[0]], cols[names[1]], deg=args.deg, offset=not args.no_offset,
                            extreme_fraction=args.extreme_fraction)
    rec = _record(args)
    out = Path(args.out)
    return [
        io.write_csv(out.with_suffix(".csv"), ["theta", "phi", "residual"],
                     [curve.theta_points, curve.phi_points, curve.residuals], rec),
        io.write_json(out.with_suffix(".json"), curve.to_json_obj(), rec),
    ]


def cmd_overlap(args) -> list[Path]:
    params = source_params(args)
    packet = temporal.WavepacketParams(io.parse_time_ps(args.T1), io.parse_time_ps(args.wp))
    taus = io.parse_grid(args.taus, io.parse_time_ps)
    overlaps = temporal.overlap_curve(taus, packet)
    curve = temporal.contrast_vs_separation(taus, packet, params)
    rec = _record(args, source=params.to_json_obj(), T1_ps=packet.T1, w_p_ps=packet.w_p)
    out = Path(args.out)
    return [
        io.write_csv(out.with_suffix(".csv"), ["tau_ps", "overlap", "contrast"],
                     [taus, overlaps, [c for _, c in curve]], rec),
        io.write_json(out.with_suffix(".json"), {"K": packet.K, "tau_ps": taus, "overlap": overlaps}, rec),
    ]


def cmd_synthesize(args) -> list[Path]:
    params = source_params(args)
    phis = np.linspace(0.0, 2 * np.pi, args.points)
    data = fitsolver.synthesize(args.input, params, phis, args.peak_counts, args.seed, args.scheme)
    rec = _record(args, source=params.to_json_obj())
    out = Path(args.out)
    col_phi = np.rad2deg(data.phis) if args.deg else data.phis
    return [
        io.write_csv(out.with_suffix(".csv"), ["phi", "value", "sigma"], [col_phi, data.values, data.sigma], rec),
        io.write_json(out.with_suffix(".json"), {"points": len(data), "total_counts": float(data.values.sum())}, rec),
    ]


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ValueError as exc:
        print(f"fringelab: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            written = HANDLERS[args.command](args)
    except (ValueError, OSError, fitsolver.FitError, calib.CalibrationError) as exc:
        print(f"fringelab {args.command}: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver for the benchmark experiments.

Subcommands: ``scan``, ``npe``, ``screening``, ``gradient-cost``,
``control-noise``, ``fcidump-info``.  Every flag has a config-file twin:
pass ``--config FILE`` pointing at an INI file whose section names match
the subcommand; explicit command-line flags override config values.

Exit codes: 0 on success, 1 for configuration errors, 2 for runtime
failures.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

from . import experiments as ex
from .chem import UnsupportedBasisError
from .fcidump import FcidumpError, read_fcidump


class ConfigError(ValueError):
    pass


def _parse_trotter(value: str) -> tuple[int, str]:
    if value.lower() == "exact":
        return 1, "exact"
    try:
        rho = int(value)
    except ValueError:
        raise ConfigError(f"--trotter must be an integer or 'exact', got {value!r}") from None
    if rho < 1:
        raise ConfigError("--trotter must be >= 1")
    return rho, "trotterized"


def _parse_gradient(value: str) -> tuple[str, float]:
    if value == "analytical":
        return "analytical", 1e-6
    if value.startswith("central:"):
        try:
            step = float(value.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad --gradient step in {value!r}") from None
        if step <= 0:
            raise ConfigError("--gradient central step must be positive")
        return "central", step
    raise ConfigError(f"--gradient must be 'analytical' or 'central:<step>', got {value!r}")


def _parse_shots(value: str) -> float | None:
    if value == "exact":
        return None
    if value.startswith("eps:"):
        try:
            eps = float(value.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad --shots precision in {value!r}") from None
        if eps <= 0:
            raise ConfigError("--shots precision must be positive")
        return eps
    raise ConfigError(f"--shots must be 'exact' or 'eps:<epsilon>', got {value!r}")


def _parse_floats(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated float list, got {value!r}") from None


def _path_canonical(value: str) -> str:
    aliases = {
        "rect": "rectangular", "rectangular": "rectangular", "parallel": "rectangular",
        "trap": "trapezoidal", "trapezoidal": "trapezoidal",
        "lin": "linear", "linear": "linear",
    }
    try:
        return aliases[value.lower()]
    except KeyError:
        raise ConfigError(f"--path must be rect|trap|linear, got {value!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uccvqe",
        description="UCC-based VQE benchmark experiments on a statevector simulator",
    )
    parser.add_argument("--config", help="INI config file; section per subcommand")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--basis", default="sto-6g", choices=("sto-3g", "sto-6g"))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", default=None)

    p_scan = sub.add_parser("scan", help="potential-energy-surface scan")
    common(p_scan)
    p_scan.add_argument("--path", default="trap")
    p_scan.add_argument("--geometry-file", default=None)
    p_scan.add_argument("--trotter", default="1", help="trotter number or 'exact'")
    p_scan.add_argument("--guess", default="mp2", choices=("random", "zeros", "mp2"))
    p_scan.add_argument("--optimizer", default="lbfgs", choices=("nelder-mead", "lbfgs"))
    p_scan.add_argument("--gradient", default="analytical")
    p_scan.add_argument("--screen", type=float, default=None)
    p_scan.add_argument("--noise-sigma", type=float, default=0.0)
    p_scan.add_argument("--shots", default="exact")
    p_scan.add_argument("--n-seeds", type=int, default=1)
    p_scan.add_argument("--points", type=int, default=None, help="grid density override")
    p_scan.add_argument("--grid", default=None, help="explicit comma-separated grid")
    p_scan.add_argument("--extend", action="store_true")

    p_npe = sub.add_parser("npe", help="non-parallelism error from scan CSVs")
    p_npe.add_argument("csv")
    p_npe.add_argument("--reference", default=None, help="grid-aligned reference CSV")

    p_scr = sub.add_parser("screening", help="amplitude pre-screening study")
    common(p_scr)
    p_scr.add_argument("--path", default="trap")
    p_scr.add_argument("--thresholds", default="1e-2,1e-3")
    p_scr.add_argument("--points", type=int, default=None)
    p_scr.add_argument("--gradient", default="central:1e-6")

    p_gc = sub.add_parser("gradient-cost", help="gradient error vs sampling cost")
    common(p_gc)
    p_gc.add_argument("--path", default="linear")
    p_gc.add_argument("--param", type=float, default=1.2)
    p_gc.add_argument("--trotter", default="1")
    p_gc.add_argument("--deltas", default="0.5,0.1,0.05")
    p_gc.add_argument("--eps-grid", default="0.3,0.1,0.03,0.01,0.003")
    p_gc.add_argument("--samples", type=int, default=100)

    p_cn = sub.add_parser("control-noise", help="optimization under control errors")
    common(p_cn)
    p_cn.add_argument(
        "--systems", default="trap:135,rectangular:1.2,linear:1.2",
        help="comma list of path:parameter instances",
    )
    p_cn.add_argument("--noise-sigma", type=float, default=0.01)
    p_cn.add_argument("--runs", type=int, default=150)
    p_cn.add_argument("--deltas", default="0.05,0.1")
    p_cn.add_argument("--sigmas", default="0.003,0.01,0.03,0.1")
    p_cn.add_argument("--slope-samples", type=int, default=100)
    p_cn.add_argument("--skip-slope", action="store_true")

    p_fd = sub.add_parser("fcidump-info", help="summarize an FCIDUMP file")
    p_fd.add_argument("file")
    p_fd.add_argument("--no-fci", action="store_true")

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, rest = probe.parse_known_args(argv)
    if known.config:
        ini = configparser.ConfigParser()
        if not ini.read(known.config):
            raise ConfigError(f"cannot read config file {known.config}")
        command = next((a for a in rest if not a.startswith("-")), None)
        if command and ini.has_section(command):
            for sub_action in parser._subparsers._group_actions:  # noqa: SLF001
                if command in getattr(sub_action, "choices", {}):
                    subparser = sub_action.choices[command]
                    defaults = _coerce_section(subparser, dict(ini.items(command)))
                    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _coerce_section(subparser: argparse.ArgumentParser, section: dict) -> dict:
    """Convert raw INI strings through each option's declared type."""
    actions = {action.dest: action for action in subparser._actions}  # noqa: SLF001
    defaults = {}
    for key, raw in section.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):  # noqa: SLF001
            defaults[dest] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[dest] = action.type(raw)
            except ValueError as exc:
                raise ConfigError(f"bad config value for {key!r}: {raw!r}") from exc
        else:
            defaults[dest] = raw
    return defaults


def _seeds(base: int, count: int) -> tuple[int, ...]:
    return tuple(base + 10007 * k for k in range(count))


def _cmd_scan(args) -> int:
    trotter, mode = _parse_trotter(str(args.trotter))
    gradient_mode, gradient_step = _parse_gradient(args.gradient)
    shot_epsilon = _parse_shots(str(args.shots))
    if args.geometry_file:
        grid = (0.0,)
        path = "file"
    else:
        path = _path_canonical(args.path)
        if args.grid:
            grid = _parse_floats(str(args.grid))
        else:
            grid = ex.default_grid(path, args.points)
    spec = ex.ScanSpec(
        path_kind=path,
        parameters=grid,
        basis=args.basis,
        trotter=trotter,
        mode=mode,
        guess=args.guess,
        optimizer=args.optimizer.replace("-", "_"),
        gradient_mode=gradient_mode,
        gradient_step=gradient_step,
        screen_threshold=args.screen,
        noise_sigma=float(args.noise_sigma),
        shot_epsilon=shot_epsilon,
        seeds=_seeds(args.seed, args.n_seeds),
        jobs=args.jobs,
        extend=bool(args.extend),
        geometry_file=args.geometry_file,
    )
    rows = ex.run_scan(spec)
    out = args.out or "scan.csv"
    ex.write_csv(rows, ex.SCAN_COLUMNS, out)
    ex.write_run_manifest(out + ".manifest.json", "scan", _spec_dict(spec))
    failures = [r for r in rows if r["failure"]]
    print(f"wrote {out}: {len(rows)} rows, {len(failures)} failed points")
    for row in failures:
        print(f"  {row['path']} {row['parameter']} seed {row['seed']}: {row['failure']}")
    return 0


def _spec_dict(spec: ex.ScanSpec) -> dict:
    from dataclasses import asdict

    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(spec).items()}


def _cmd_npe(args) -> int:
    rows = ex.read_csv(args.csv)
    reference = ex.read_csv(args.reference) if args.reference else None
    value = ex.npe_from_rows(rows, reference)
    print(f"npe_kcal_per_mol {value!r}")
    return 0


def _cmd_screening(args) -> int:
    path = _path_canonical(args.path)
    thresholds = _parse_floats(str(args.thresholds))
    gradient_mode, gradient_step = _parse_gradient(args.gradient)
    if gradient_mode != "central":
        raise ConfigError("screening evaluation counts are defined for central gradients")
    grid = ex.default_grid(path, args.points)
    rows = ex.screening_study(
        path, thresholds, parameters=grid, basis=args.basis,
        gradient_step=gradient_step, jobs=args.jobs,
    )
    out = args.out or "screening.csv"
    ex.write_csv(rows, ex.SCREENING_COLUMNS, out)
    ex.write_run_manifest(
        out + ".manifest.json", "screening",
        {"path": path, "thresholds": list(thresholds), "basis": args.basis,
         "points": len(grid), "gradient_step": gradient_step, "seed": args.seed},
    )
    for row in rows:
        print(
            f"d={row['threshold']}: parameters {row['n_parameters_min']}"
            f"-{row['n_parameters_max']}, max deviation {row['max_deviation_kcal']} kcal/mol,"
            f" mean evals {row['mean_evaluations']}"
        )
    print(f"wrote {out}")
    return 0


def _cmd_gradient_cost(args) -> int:
    trotter, mode = _parse_trotter(str(args.trotter))
    path = _path_canonical(args.path)
    bundle = ex.prepare_point(path, args.param, basis=args.basis, trotter=trotter, mode=mode)
    rows = ex.gradient_cost_study(
        bundle.problem,
        deltas=_parse_floats(str(args.deltas)),
        epsilon_grid=_parse_floats(str(args.eps_grid)),
        n_samples=args.samples,
        seed=args.seed,
    )
    out = args.out or "gradient_cost.csv"
    ex.write_csv(rows, ex.GRADIENT_COST_COLUMNS, out)
    ex.write_run_manifest(
        out + ".manifest.json", "gradient-cost",
        {"path": path, "param": args.param, "basis": args.basis,
         "deltas": str(args.deltas), "eps_grid": str(args.eps_grid),
         "samples": args.samples, "seed": args.seed},
    )
    print(f"wrote {out}: {len(rows)} rows")
    return 0


def _cmd_control_noise(args) -> int:
    systems = []
    for item in str(args.systems).split(","):
        if not item.strip():
            continue
        try:
            path, param = item.split(":")
        except ValueError:
            raise ConfigError(f"--systems entries look like path:parameter, got {item!r}") from None
        systems.append((_path_canonical(path.strip()), float(param)))
    if args.runs < 2:
        raise ConfigError("--runs must be at least 2")
    bundles = [
        ex.prepare_point(path, param, basis=args.basis) for path, param in systems
    ]
    rows = ex.control_noise_study(
        bundles, sigma=float(args.noise_sigma), n_runs=args.runs,
        deltas=_parse_floats(str(args.deltas)), seed=args.seed,
    )
    out = args.out or "control_noise.csv"
    ex.write_csv(rows, ex.CONTROL_NOISE_COLUMNS, out)
    for row in rows:
        print(
            f"{row['system']} {row['method']}"
            f"{' d=' + row['delta'] if row['delta'] else ''}: "
            f"grad calls {float(row['grad_calls_mean']):.1f}"
            f" +- {float(row['grad_calls_std']):.1f}, energy error "
            f"{float(row['energy_error_mean']):.4f} +- {float(row['energy_error_std']):.4f}"
        )
    slope_info = {}
    if not args.skip_slope:
        slope_rows = []
        for bundle in bundles:
            rows_b, slopes = ex.noise_scaling_study(
                bundle.problem,
                sigmas=_parse_floats(str(args.sigmas)),
                n_samples=args.slope_samples,
                delta=_parse_floats(str(args.deltas))[0],
                seed=args.seed,
                label=bundle.label,
            )
            slope_rows.extend(rows_b)
            slope_info[bundle.label] = slopes
            for method, slope in slopes.items():
                print(f"{bundle.label} {method}: log-log slope {slope:.3f}")
        ex.write_csv(slope_rows, ex.NOISE_SLOPE_COLUMNS, out + ".scaling.csv")
    ex.write_run_manifest(
        out + ".manifest.json", "control-noise",
        {"systems": str(args.systems), "sigma": args.noise_sigma,
         "runs": args.runs, "deltas": str(args.deltas),
         "sigmas": str(args.sigmas), "seed": args.seed, "slopes": slope_info},
    )
    print(f"wrote {out}")
    return 0


def _cmd_fcidump_info(args) -> int:
    mo = read_fcidump(args.file)
    info = ex.fcidump_summary(mo, with_fci=not args.no_fci)
    for key, value in info.items():
        print(f"{key}: {value}")
    return 0


_COMMANDS = {
    "scan": _cmd_scan,
    "npe": _cmd_npe,
    "screening": _cmd_screening,
    "gradient-cost": _cmd_gradient_cost,
    "control-noise": _cmd_control_noise,
    "fcidump-info": _cmd_fcidump_info,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse usage errors -> config error code
        return 0 if exc.code in (0, None) else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (
        ConfigError,
        FcidumpError,
        UnsupportedBasisError,
        FileNotFoundError,
        ValueError,
        json.JSONDecodeError,
    ) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: spectrum, sweep, field, bounds, thresholds, oracle,
analyze.  All energies are emitted in units of mu, lengths in units of
d, densities in d^-2, so outputs are directly comparable across
geometries.  Every run is deterministic: identical invocations produce
byte-identical files (no timestamps, sorted JSON keys, fixed float
formatting).

Exit codes: 0 ok, 2 bad configuration, 3 non-convergence, 4 missing
branch, 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import analysis as an
from . import bounds as bd
from . import fdm_oracle as fo
from . import modematch as mm
from . import variational as va
from .geometry import Geometry, ModelKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_MISSING_BRANCH = 4
EXIT_INVARIANT = 5

CSV_VERSION_LINE = "# wavebound-csv v1"

MU = math.pi**2 / 4.0


class ConfigError(Exception):
    """Invalid configuration (exit 2)."""


class InvariantViolation(Exception):
    """An emitted spectrum failed bounds validation (exit 5)."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved run parameters (defaults documented in --help)."""

    model: ModelKind
    d: float
    lam: float | None
    modes: int
    scan_points: int
    out: str | None
    format: str
    jobs: int

    @property
    def geometry(self) -> Geometry:
        if self.lam is None:
            raise ConfigError("this command requires --lambda or --delta")
        return Geometry.from_lambda(self.lam)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def load_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment; whitespace ignored."""
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{lineno}: expected key=value, got {line!r}"
                    )
                key, _, value = line.partition("=")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flags over config-file values over defaults."""
    file_values = load_config_file(args.config) if args.config else {}

    def pick(flag_value, key: str, cast, default):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            try:
                return cast(file_values[key])
            except ValueError as exc:
                raise ConfigError(f"config key {key}: {exc}") from exc
        return default

    model_name = pick(args.model, "model", str, "A")
    try:
        model = ModelKind[model_name.upper()]
    except KeyError:
        raise ConfigError(f"unknown model {model_name!r} (expected A or B)")

    d = pick(getattr(args, "d", None), "d", float, 1.0)
    lam = pick(getattr(args, "lam", None), "lambda", float, None)
    delta = pick(getattr(args, "delta", None), "delta", float, None)
    if lam is not None and delta is not None:
        raise ConfigError("give exactly one of --lambda and --delta")
    if lam is None and delta is not None:
        if d <= 0:
            raise ConfigError("d must be positive")
        lam = delta / d
    if lam is not None and lam <= 0:
        raise ConfigError("lambda must be positive")

    modes = pick(args.modes, "modes", int, 64)
    scan_points = pick(args.scan_points, "scan_points", int, 400)
    out = pick(args.out, "out", str, None)
    fmt = pick(args.format, "format", str, None)
    if fmt is not None and fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r} (expected csv or json)")
    jobs = pick(getattr(args, "jobs", None), "jobs", int, 1)
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    return RunConfig(
        model=model,
        d=d,
        lam=lam,
        modes=modes,
        scan_points=scan_points,
        out=out,
        format=fmt,
        jobs=jobs,
    )


def _config_dict(config: RunConfig, **extra) -> dict:
    base = {
        "model": config.model.name,
        "d": config.d,
        "lambda": config.lam,
        "modes": config.modes,
        "scan_points": config.scan_points,
    }
    base.update(extra)
    return base


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def render_csv(columns, rows) -> str:
    lines = [CSV_VERSION_LINE, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def render_json(config: dict, results) -> str:
    payload = {
        "config": config,
        "results": results,
        "provenance": {"tool": "wavebound", "version": __version__},
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _emit(config: RunConfig, default_fmt: str, columns, rows, json_config) -> None:
    fmt = config.format or default_fmt
    if fmt == "csv":
        _write_text(config.out, render_csv(columns, rows))
    else:
        _write_text(config.out, render_json(json_config, rows))


# ---------------------------------------------------------------------------
# spectrum rows shared by cmd_spectrum and cmd_sweep
# ---------------------------------------------------------------------------

SPECTRUM_COLUMNS = ("lambda", "branch_index", "eigenvalue_over_mu",
                    "residual", "stable")


def _spectrum_rows(config: RunConfig, lam: float) -> list:
    spectrum = mm.scan_spectrum(
        config.model,
        Geometry.from_lambda(lam),
        N=config.modes,
        grid_points=config.scan_points,
    )
    gate = all(spectrum.stable) and not spectrum.near_threshold
    violations = bd.check_spectrum(lam, spectrum.eigenvalues, all_stable=gate)
    if violations:
        raise InvariantViolation("; ".join(violations))
    return [
        {
            "lambda": lam,
            "branch_index": i + 1,
            "eigenvalue_over_mu": value,
            "residual": spectrum.residuals[i],
            "stable": spectrum.stable[i],
        }
        for i, value in enumerate(spectrum.eigenvalues)
    ]


def cmd_spectrum(config: RunConfig) -> int:
    rows = _spectrum_rows(config, config.geometry.lam)
    _emit(config, "csv", SPECTRUM_COLUMNS, rows, _config_dict(config))
    return EXIT_OK


def _sweep_worker(args) -> list:
    config, lam = args
    return _spectrum_rows(config, lam)


def cmd_sweep(config: RunConfig, lam_min: float, lam_max: float, step: float) -> int:
    if not (0 < lam_min <= lam_max) or step <= 0:
        raise ConfigError("sweep requires 0 < lambda-min <= lambda-max, step > 0")
    count = int(math.floor((lam_max - lam_min) / step + 1e-9)) + 1
    lams = [lam_min + i * step for i in range(count)]
    tasks = [(config, lam) for lam in lams]
    if config.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(_sweep_worker, tasks))
    else:
        chunks = [_sweep_worker(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    json_config = _config_dict(
        config, lambda_min=lam_min, lambda_max=lam_max, step=step
    )
    json_config.pop("lambda")
    _emit(config, "csv", SPECTRUM_COLUMNS, rows, json_config)
    return EXIT_OK


def cmd_field(
    config: RunConfig, branch: int, nx: int, ny: int, x_halfwidth: float
) -> int:
    if branch < 1:
        raise ConfigError("branch must be >= 1")
    if nx < 2 or ny < 2 or x_halfwidth <= 0:
        raise ConfigError("field grid requires nx, ny >= 2 and x-halfwidth > 0")
    try:
        field = mm.solve_field(
            config.model,
            config.geometry,
            branch,
            N=config.modes,
            grid_points=config.scan_points,
        )
    except LookupError as exc:
        raise LookupError(str(exc)) from exc
    xs = np.linspace(-x_halfwidth, x_halfwidth, nx)
    ys = np.linspace(0.0, 1.0, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    values = mm.evaluate_field(field, X.ravel(), Y.ravel()).reshape(X.shape)
    rows = [
        {"x": float(xs[i]), "y": float(ys[j]), "density": float(values[i, j] ** 2)}
        for i in range(nx)
        for j in range(ny)
    ]
    json_config = _config_dict(
        config,
        branch=branch,
        nx=nx,
        ny=ny,
        x_halfwidth=x_halfwidth,
        eigenvalue_over_mu=field.E / MU,
    )
    _emit(config, "csv", ("x", "y", "density"), rows, json_config)
    return EXIT_OK


def cmd_bounds(config: RunConfig) -> int:
    lam = config.geometry.lam
    report = bd.bracket_report(lam)
    rows = [
        {
            "lambda": lam,
            "n_min": report.n_min,
            "n_max": report.n_max,
            "branch_index": m,
            "window_lo": lo,
            "window_hi": hi,
        }
        for m, (lo, hi) in enumerate(report.per_eigenvalue_window, start=1)
    ]
    _emit(config, "csv",
          ("lambda", "n_min", "n_max", "branch_index", "window_lo", "window_hi"),
          rows, _config_dict(config))
    return EXIT_OK


def cmd_thresholds(config: RunConfig) -> int:
    try:
        lambda1 = va.lambda1()
        kappa0 = va.kappa0()
        lambda2 = va.lambda2()
        lambda0 = an.find_emergence(ModelKind.A, 1, N=32)
    except (RuntimeError, ValueError) as exc:
        raise RuntimeError(f"threshold search failed: {exc}") from exc
    report = va.ThresholdReport(
        lambda1=lambda1, kappa0=kappa0, lambda2=lambda2, lambda0_numeric=lambda0
    )
    results = {
        "lambda1": report.lambda1,
        "kappa0": report.kappa0,
        "lambda2": report.lambda2,
        "lambda0_numeric": report.lambda0_numeric,
        "ordering_ok": report.ordering_ok,
    }
    fmt = config.format or "json"
    if fmt == "json":
        _write_text(config.out, render_json({"command": "thresholds"}, results))
    else:
        rows = [{"name": k, "value": v} for k, v in sorted(results.items())]
        _write_text(config.out, render_csv(("name", "value"), rows))
    return EXIT_OK


def cmd_oracle(config: RunConfig, branch: int | None) -> int:
    lam = config.geometry.lam
    n_min, n_max = bd.state_count_bounds(lam)
    branches = [branch] if branch is not None else list(range(1, n_max + 1))
    rows = []
    for b in branches:
        try:
            estimate, order = fo.extrapolate(config.model, config.geometry, branch=b)
        except LookupError:
            if branch is not None:
                raise
            continue
        if estimate / MU >= 1.0:
            if branch is not None:
                raise LookupError(
                    f"branch {b} lies above the threshold at lambda={lam}"
                )
            continue
        rows.append(
            {
                "lambda": lam,
                "branch_index": b,
                "eigenvalue_over_mu": estimate / MU,
                "order": order,
            }
        )
    _emit(config, "csv",
          ("lambda", "branch_index", "eigenvalue_over_mu", "order"),
          rows, _config_dict(config))
    return EXIT_OK


def cmd_analyze(
    config: RunConfig,
    lam_min: float,
    lam_max: float,
    step: float,
    rho: float,
    branch: int,
) -> int:
    if not (0 < lam_min < lam_max) or step <= 0:
        raise ConfigError("analyze requires 0 < lambda-min < lambda-max, step > 0")
    count = int(math.floor((lam_max - lam_min) / step + 1e-9)) + 1
    lams = [lam_min + i * step for i in range(count)]
    sweep_result = an.sweep(
        config.model,
        lams,
        N=config.modes,
        grid_points=config.scan_points,
        check_stability=False,
        jobs=config.jobs,
    )
    mono_ok, violations = an.monotonicity_check(sweep_result)
    scale_ok, worst = an.scaling_check(sweep_result, rho)

    corners = {}
    lam = config.lam if config.lam is not None else 0.5
    field = mm.solve_field(
        config.model,
        Geometry.from_lambda(lam),
        branch,
        N=config.modes,
        grid_points=config.scan_points,
    )
    for i, corner in enumerate(an.switch_points(config.model, field.geometry), 1):
        exponent, quality = an.corner_exponent(field, corner)
        corners[f"P{i}"] = {
            "x": corner[0],
            "y": corner[1],
            "exponent": exponent,
            "fit_r_squared": quality,
        }

    results = {
        "monotonicity": {"ok": mono_ok, "violations": violations},
        "scaling": {"rho": rho, "ok": scale_ok, "worst_margin": worst},
        "corner_exponents": {"lambda": lam, "branch": branch, "fits": corners},
    }
    json_config = _config_dict(
        config, lambda_min=lam_min, lambda_max=lam_max, step=step, rho=rho
    )
    fmt = config.format or "json"
    if fmt == "json":
        _write_text(config.out, render_json(json_config, results))
    else:
        rows = [
            {"name": "monotonicity_ok", "value": mono_ok},
            {"name": "scaling_ok", "value": scale_ok},
            {"name": "scaling_worst_margin", "value": worst},
        ]
        for name, fit in sorted(corners.items()):
            rows.append({"name": f"{name}_exponent", "value": fit["exponent"]})
            rows.append({"name": f"{name}_r_squared", "value": fit["fit_r_squared"]})
        _write_text(config.out, render_csv(("name", "value"), rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=["A", "B", "a", "b"], default=None,
                        help="boundary-condition model (default A)")
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="window half-length over width, delta/d")
    parser.add_argument("--delta", type=float, default=None,
                        help="window half-length (needs --d unless d=1)")
    parser.add_argument("--d", type=float, default=None,
                        help="strip width (default 1)")
    parser.add_argument("--modes", type=int, default=None,
                        help="truncation order per region (default 64)")
    parser.add_argument("--scan-points", dest="scan_points", type=int,
                        default=None, help="energy grid size (default 400)")
    parser.add_argument("--out", default=None,
                        help="output path (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default=None,
                        help="output format (default csv; thresholds/analyze json)")
    parser.add_argument("--jobs", type=int, default=None,
                        help="parallel workers for sweeps (default 1)")
    parser.add_argument("--config", default=None,
                        help="key=value config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavebound",
        description="Bound states of a strip with mixed boundary windows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues at one window size")
    _add_common(p)

    p = sub.add_parser("sweep", help="eigenvalue branches over a lambda range")
    _add_common(p)
    p.add_argument("--lambda-min", dest="lam_min", type=float, required=True)
    p.add_argument("--lambda-max", dest="lam_max", type=float, required=True)
    p.add_argument("--step", type=float, required=True)

    p = sub.add_parser("field", help="probability density grid of one state")
    _add_common(p)
    p.add_argument("--branch", type=int, default=1)
    p.add_argument("--nx", type=int, default=201)
    p.add_argument("--ny", type=int, default=41)
    p.add_argument("--x-halfwidth", dest="x_halfwidth", type=float, default=6.0)

    p = sub.add_parser("bounds", help="bracketing state counts and windows")
    _add_common(p)

    p = sub.add_parser("thresholds", help="analytic and numeric critical windows")
    _add_common(p)

    p = sub.add_parser("oracle", help="finite-difference cross-check")
    _add_common(p)
    p.add_argument("--branch", type=int, default=None)

    p = sub.add_parser("analyze", help="monotonicity, scaling, corner fits")
    _add_common(p)
    p.add_argument("--lambda-min", dest="lam_min", type=float, default=0.3)
    p.add_argument("--lambda-max", dest="lam_max", type=float, default=0.9)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--rho", type=float, default=1.5)
    p.add_argument("--branch", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve(args)
        if args.command == "spectrum":
            return cmd_spectrum(config)
        if args.command == "sweep":
            return cmd_sweep(config, args.lam_min, args.lam_max, args.step)
        if args.command == "field":
            return cmd_field(config, args.branch, args.nx, args.ny,
                             args.x_halfwidth)
        if args.command == "bounds":
            return cmd_bounds(config)
        if args.command == "thresholds":
            return cmd_thresholds(config)
        if args.command == "oracle":
            return cmd_oracle(config, args.branch)
        if args.command == "analyze":
            return cmd_analyze(config, args.lam_min, args.lam_max, args.step,
                               args.rho, args.branch)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LookupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_BRANCH
    except InvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

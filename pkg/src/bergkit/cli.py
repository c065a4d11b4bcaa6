"""Command-line front end: moments, kernel and curvature runs, verify suite.

Configuration comes from one JSON file per run (no environment variables):

    {
      "domain": {"type": "dalpha", "alpha": 2.5},
      "settings": {"quad_tol": 1e-9, "fd_step": 0.05, "truncation": 60,
                   "tol_profile": "default"},
      "seed": 7,
      "output": "out.csv"
    }

Unknown keys are rejected with the offending key named.  Outputs are written
atomically (temp file + rename).  Exit codes: 0 success, 1 a verify check
failed, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .domains import DomainSpec, HartogsGauss, Sliver, sample_interior, spec_from_json
from .errors import BergkitError, ConfigError, InputError
from .geometry import GeometrySettings, constant_curvature_verdict
from .kernels import HartogsGaussSeriesKernel, canonical_model
from .moments import QuadratureSettings, Verdict, build_moment_table, table_rows
from .modeltests import paper_suite


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    quad: QuadratureSettings
    geometry: GeometrySettings
    truncation: int
    tol_profile: str
    seed: int
    output: str | None


_TOP_KEYS = {"domain", "settings", "seed", "output"}
_SETTINGS_KEYS = {"quad_tol", "fd_step", "truncation", "tol_profile"}


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    if "domain" not in raw:
        raise ConfigError("config is missing the 'domain' object")
    try:
        domain = spec_from_json(raw["domain"])
    except InputError as exc:
        raise ConfigError(str(exc)) from exc

    settings = raw.get("settings", {})
    if not isinstance(settings, dict):
        raise ConfigError("'settings' must be a JSON object")
    unknown = set(settings) - _SETTINGS_KEYS
    if unknown:
        raise ConfigError(f"unknown settings key {sorted(unknown)[0]!r}")
    quad_tol = float(settings.get("quad_tol", 1e-9))
    fd_step = float(settings.get("fd_step", 0.05))
    truncation = int(settings.get("truncation", 60))
    tol_profile = settings.get("tol_profile", "default")
    if quad_tol <= 0 or fd_step <= 0:
        raise ConfigError("tolerances must be positive")
    if truncation < 1:
        raise ConfigError("truncation must be >= 1")
    if tol_profile not in ("default", "strict"):
        raise ConfigError(f"unknown tol_profile {tol_profile!r}")

    geometry = GeometrySettings(fd_step=fd_step)
    if tol_profile == "strict":
        geometry = geometry.halved()
    return RunConfig(
        domain=domain,
        quad=QuadratureSettings(rel_tol=quad_tol),
        geometry=geometry,
        truncation=truncation,
        tol_profile=tol_profile,
        seed=int(raw.get("seed", 0)),
        output=raw.get("output"),
    )


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bergkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: str, rows, reproducible: bool, comments=()) -> str:
    lines = []
    if not reproducible:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat()}")
    lines.append(header)
    lines.extend(",".join(row) for row in rows)
    lines.extend(comments)
    return "\n".join(lines) + "\n"


def _out_path(args, cfg: RunConfig) -> str:
    path = args.out or cfg.output
    if not path:
        raise ConfigError("no output path: pass --out or set 'output' in the config")
    return path


def _format_point(point: np.ndarray) -> str:
    return ";".join(repr(complex(c)) for c in point)


def _parse_points(path: str, dimension: int) -> np.ndarray:
    rows = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                vals = [float(v) for v in line.replace(";", ",").split(",")]
                if len(vals) != 2 * dimension:
                    raise ConfigError(
                        f"points file rows need {2 * dimension} floats "
                        f"(re,im per coordinate), got {len(vals)}"
                    )
                rows.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(dimension)])
    except OSError as exc:
        raise ConfigError(f"cannot read points file {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"points file {path} contains no points")
    return np.asarray(rows, dtype=complex)


def cmd_moments(args) -> int:
    cfg = load_config(args.config)
    table = build_moment_table(cfg.domain, args.max_degree, cfg.quad)
    rows = table_rows(table)
    text = _csv_text("indices,value,abs_error,verdict,evidence", rows, args.reproducible)
    path = _out_path(args, cfg)
    _atomic_write(path, text)
    convergent = sum(
        1 for r in table.entries.values() if r.verdict is Verdict.CONVERGENT
    )
    print(f"moments: wrote {len(rows)} rows ({convergent} convergent) to {path}")
    return 0


def cmd_kernel(args) -> int:
    cfg = load_config(args.config)
    if isinstance(cfg.domain, HartogsGauss):
        model = HartogsGaussSeriesKernel(cfg.domain.n, cfg.truncation)
    else:
        model = canonical_model(cfg.domain, cfg.quad, cfg.truncation)
    points = _parse_points(args.points_file, model.dimension)
    if not model.valid(points).all():
        bad = points[~model.valid(points)][0]
        raise ConfigError(f"point {bad} lies outside the kernel evaluation domain")
    logk = model.log_kernel(points)
    bounds = model.tail_bound(points)
    rows = [
        (_format_point(p), repr(float(v)), repr(float(b)))
        for p, v, b in zip(points, logk, bounds)
    ]
    text = _csv_text("point,logK,tail_bound", rows, args.reproducible)
    path = _out_path(args, cfg)
    _atomic_write(path, text)
    print(f"kernel: evaluated {len(rows)} points to {path}")
    return 0


def cmd_curvature(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    model = canonical_model(cfg.domain, cfg.quad, cfg.truncation)
    if isinstance(cfg.domain, HartogsGauss):
        # tighter sampling keeps derivative stencils inside u < 1
        points = sample_interior(cfg.domain, args.points, seed, margin=0.25, box_radius=1.0)
    else:
        points = sample_interior(cfg.domain, args.points, seed)
    tol = 1e-3 if cfg.tol_profile == "default" else 5e-4
    report = constant_curvature_verdict(
        model, points, args.dirs, seed=seed, tol=tol, settings=cfg.geometry
    )
    rows = [
        (
            _format_point(p),
            repr(float(lo)),
            repr(float(hi)),
            repr(float(hi - lo)),
        )
        for p, lo, hi in zip(report.points, report.hsc_min, report.hsc_max)
    ]
    value = "" if report.constant_value is None else repr(report.constant_value)
    comment = (
        f"# constant={str(report.is_constant).lower()} value={value} "
        f"max_dev={report.max_deviation!r}"
    )
    text = _csv_text(
        "point,hsc_min,hsc_max,deviation", rows, args.reproducible, comments=[comment]
    )
    path = _out_path(args, cfg)
    _atomic_write(path, text)
    print(
        f"curvature: {len(rows)} points, constant={report.is_constant}, "
        f"max_dev={report.max_deviation:.3e}, wrote {path}"
    )
    return 0


#: details keys that vary run to run; stripped under --reproducible
_VOLATILE_KEYS = {"runtime_s"}


def _jsonable(obj, drop_volatile: bool = False):
    if isinstance(obj, dict):
        return {
            str(k): _jsonable(v, drop_volatile)
            for k, v in obj.items()
            if not (drop_volatile and k in _VOLATILE_KEYS)
        }
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v, drop_volatile) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return repr(obj)
    return obj


def cmd_verify(args) -> int:
    if args.suite != "paper":
        raise ConfigError(f"unknown suite {args.suite!r}")
    outcomes = paper_suite(tol_profile=args.tol_profile)
    width = max(len(o.name) for o in outcomes)
    for o in outcomes:
        status = "PASS" if o.passed else "FAIL"
        print(
            f"{o.name:<{width}} | {status} | measured={o.measured:.9g} | "
            f"expected={o.expected:.9g} | tol={o.tolerance:g}"
        )
    all_passed = all(o.passed for o in outcomes)
    print(
        f"verify: {sum(o.passed for o in outcomes)}/{len(outcomes)} checks passed "
        f"(profile={args.tol_profile})"
    )
    if args.json:
        payload = {
            "suite": "paper",
            "tol_profile": args.tol_profile,
            "all_passed": all_passed,
            "outcomes": [
                _jsonable(dataclasses.asdict(o), drop_volatile=args.reproducible)
                for o in outcomes
            ],
        }
        if not args.reproducible:
            payload["timestamp"] = datetime.now(timezone.utc).isoformat()
        _atomic_write(args.json, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0 if all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bergkit",
        description="Bergman kernels, metrics and holomorphic sectional "
        "curvature for model domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="moment table of a domain to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--out")
    p.add_argument("--reproducible", action="store_true")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("kernel", help="evaluate log K at points from a CSV file")
    p.add_argument("--config", required=True)
    p.add_argument("--points-file", required=True)
    p.add_argument("--out")
    p.add_argument("--reproducible", action="store_true")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("curvature", help="sample holomorphic sectional curvature")
    p.add_argument("--config", required=True)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--dirs", type=int, default=16)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.add_argument("--reproducible", action="store_true")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--suite", default="paper")
    p.add_argument("--tol-profile", choices=("default", "strict"), default="default")
    p.add_argument("--json", help="write outcomes to this JSON file")
    p.add_argument("--reproducible", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BergkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

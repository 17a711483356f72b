"""Command line interface.

    ddfv run1d|converge1d|fet|face-concentration|selftest
         [--config file.toml] [--scheme NAME ...] [--out DIR]

Configuration files are TOML with a strict schema: unknown keys are
rejected.  Command line flags override file values.  Exit codes: 0 on
success, 2 on solver failure, 3 on configuration errors.  The
environment variable DDFV_THREADS caps worker parallelism in the
convergence study.
"""

from __future__ import annotations

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import experiments
from .fluxes import SchemeKind
from .solver import SolverConfig, SolverFailure

__all__ = ["main"]


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "run1d": {
        "preset": str, "n_cells": int, "length": float, "doping": float,
        "t1": float, "delta": float, "t_end": float, "c0": float,
        "phi_left": float, "phi_right": float,
        "schemes": list, "out": str,
    },
    "converge1d": {
        "grids": list, "reference_cells": int, "length": float,
        "doping": float, "c_left": float, "c_right": float,
        "schemes": list, "out": str,
    },
    "fet": {
        "n_ref": int, "gate_max": float, "gate_min": float,
        "gate_points": int, "snapshots": bool, "schemes": list, "out": str,
    },
    "face-concentration": {
        "c_left": float, "c_right": float, "dphi_max": float, "steps": int,
        "out": str,
    },
    "selftest": {},
}

_SOLVER_KEYS = {
    "newton_tol": float, "max_newton_iters": int, "min_damping": float,
    "embedding_steps": int, "max_bisections": int, "safeguard_eps": float,
}


def _coerce(key, value, kind):
    if kind is float and isinstance(value, (int, float)) \
            and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    if kind in (str, list) and isinstance(value, kind):
        return value
    raise ConfigError(f"config key {key!r}: expected {kind.__name__}, "
                      f"got {type(value).__name__}")


def load_config(path: str, experiment: str) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    schema = _SCHEMA[experiment]
    out = {}
    solver_overrides = raw.pop("solver", {})
    if not isinstance(solver_overrides, dict):
        raise ConfigError("config key 'solver': expected a table")
    for key, value in raw.items():
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for {experiment}")
        out[key] = _coerce(key, value, schema[key])
    solver = {}
    for key, value in solver_overrides.items():
        if key not in _SOLVER_KEYS:
            raise ConfigError(f"unknown solver key {key!r}")
        solver[key] = _coerce(key, value, _SOLVER_KEYS[key])
    if solver:
        out["config"] = SolverConfig(**solver)
    return out


def _parse_schemes(names):
    try:
        return [SchemeKind.from_name(n) for n in names]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ddfv",
        description="Finite-volume drift-diffusion experiments")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in _SCHEMA:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--scheme", action="append", default=None,
                       help="restrict to a scheme (repeatable)")
        p.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    try:
        kwargs = {}
        if args.config:
            kwargs = load_config(args.config, args.experiment)
        if args.scheme:
            kwargs["schemes"] = args.scheme
        if "schemes" in kwargs:
            kwargs["schemes"] = _parse_schemes(kwargs["schemes"])
        if args.out:
            kwargs["out"] = args.out
        outdir = kwargs.pop("out", "ddfv_out")

        if args.experiment == "selftest":
            if kwargs:
                raise ConfigError("selftest takes no configuration")
            ok = True
            for name, passed in experiments.selftest():
                print(f"{'PASS' if passed else 'FAIL'}  {name}")
                ok = ok and passed
            return 0 if ok else 2

        if args.experiment == "run1d":
            experiments.run1d(outdir, **kwargs)
        elif args.experiment == "converge1d":
            experiments.converge1d(outdir, **kwargs)
        elif args.experiment == "fet":
            experiments.fet(outdir, **kwargs)
        elif args.experiment == "face-concentration":
            if "schemes" in kwargs:
                raise ConfigError(
                    "face-concentration always writes all schemes")
            experiments.face_concentration_table(outdir, **kwargs)
        print(f"wrote results to {outdir}")
        return 0
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``ruinkit {ruin, experiment, figure}``.

Exit codes: 0 on success, 2 on a domain error, 3 on a numeric failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .distributions import model_from_params
from .errors import DomainError, NumericError
from .experiments import KINDS, ExperimentSpec, emit_figure_data, run_experiment, write_csv

# defaults that match the models used throughout the experiments
_MODEL_DEFAULTS = {"mu": 2.0, "a": 3.0, "alpha": 4.0, "b": 3.0}
_KEYS = ("model", "mu", "a", "alpha", "b", "rho", "k", "delta", "u", "grid",
         "samples", "seed", "partitions", "out", "digits", "kind", "rounding")


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise DomainError(f"{path}:{n}: unknown key {key!r}")
            out[key] = value
    return out


def _floats(text, name):
    try:
        return tuple(float(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise DomainError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _ints(text, name):
    vals = _floats(text, name)
    if any(v != int(v) for v in vals):
        raise DomainError(f"--{name} expects integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _grid(text):
    """``auto``, ``auto:N`` or ``START:STOP:NUM`` (linear)."""
    parts = str(text).split(":")
    if parts[0] == "auto":
        if len(parts) == 1:
            return None, 500
        if len(parts) == 2 and parts[1].isdigit():
            return None, int(parts[1])
    elif len(parts) == 3:
        try:
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            pass
        else:
            if num >= 1 and stop >= start:
                return tuple(np.linspace(start, stop, num)), 500
    raise DomainError(f"--grid expects auto, auto:N or START:STOP:NUM, got {text!r}")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags given here override it")
    common.add_argument("--model", choices=("abate-whitt", "weibull-half", "pareto"))
    common.add_argument("--mu", type=float, help="Abate-Whitt parameter (default 2)")
    common.add_argument("--a", type=float, help="Weibull scale (default 3)")
    common.add_argument("--alpha", type=float, help="Pareto shape (default 4)")
    common.add_argument("--b", type=float, help="Pareto scale (default 3)")
    common.add_argument("--rho", help="load, or comma-separated loads")
    common.add_argument("--k", help="number of phases, or comma-separated counts")
    common.add_argument("--delta", help="target error bound")
    common.add_argument("--u", help="comma-separated initial reserves")
    common.add_argument("--out", help="CSV destination (default: standard output)")
    common.add_argument("--digits", help="significant digits in the CSV (default 6)")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--grid", help="auto, auto:N or START:STOP:NUM (ignored with --u)")
    mc.add_argument("--samples", help="Monte Carlo replications (default 1e6)")
    mc.add_argument("--seed", help="Monte Carlo seed (default 0)")
    mc.add_argument("--partitions", help="Monte Carlo partitions (default 1)")

    p = argparse.ArgumentParser(prog="ruinkit", description="Ruin probabilities for heavy-tailed claims.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("ruin", parents=[common], help="spectral approximation at given u")
    exp = sub.add_parser("experiment", parents=[common, mc], help="comparison tables")
    exp.add_argument("--kind", choices=KINDS)
    exp.add_argument("--rounding", choices=("ceil", "nearest"),
                     help="phase matching rule for bound-matching (default ceil)")
    sub.add_parser("figure", parents=[common, mc], help="curves for plotting")
    return p


def _settings(args) -> dict:
    cfg = read_config(args.config) if args.config else {}
    for key in _KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _model(cfg):
    family = cfg.get("model")
    if family is None:
        raise DomainError("--model is required")
    names = {"abate-whitt": ("mu",), "weibull-half": ("a",), "pareto": ("alpha", "b")}.get(family)
    if names is None:
        raise DomainError(f"unknown model {family!r}")
    params = {}
    for name in names:
        try:
            params[name] = float(cfg.get(name, _MODEL_DEFAULTS[name]))
        except ValueError:
            raise DomainError(f"--{name} must be a number") from None
    return model_from_params(family, **params)


def _spec(cfg, kind) -> ExperimentSpec:
    u, points = None, 500
    if "grid" in cfg:
        u, points = _grid(cfg["grid"])
    if "u" in cfg:
        u = _floats(cfg["u"], "u")
    delta = cfg.get("delta")
    return ExperimentSpec(
        kind=kind,
        model=_model(cfg),
        rhos=_floats(cfg.get("rho", "0.7"), "rho"),
        ks=_ints(cfg["k"], "k") if "k" in cfg else (),
        delta=None if delta is None else _floats(delta, "delta")[0],
        u=u,
        grid_points=points,
        samples=_ints(cfg.get("samples", "1000000"), "samples")[0],
        seed=_ints(cfg.get("seed", "0"), "seed")[0],
        partitions=_ints(cfg.get("partitions", "1"), "partitions")[0],
        rounding=cfg.get("rounding", "ceil"),
    )


def _emit(result, cfg, digits, summary=True):
    out = cfg.get("out")
    text = write_csv(result.columns, result.rows, out, digits)
    if out is None:
        sys.stdout.write(text)
    for note in result.notes:
        print(f"note: {note}", file=sys.stderr)
    if summary and result.summary:
        # keep stdout pure CSV when the table itself goes there
        stream = sys.stdout if out is not None else sys.stderr
        stream.write("summary\n")
        stream.write(write_csv(result.summary_columns, result.summary, None, digits))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _settings(args)
        digits = _ints(cfg.get("digits", "6"), "digits")[0]
        if not 1 <= digits <= 17:
            raise DomainError("--digits must lie in 1..17")
        if args.command == "ruin":
            if "u" not in cfg:
                raise DomainError("--u is required")
            _emit(run_experiment(_spec(cfg, "single-query")), cfg, digits)
        elif args.command == "experiment":
            kind = cfg.get("kind")
            if kind is None:
                raise DomainError("--kind is required")
            if kind not in KINDS:
                raise DomainError(f"unknown kind {kind!r}")
            _emit(run_experiment(_spec(cfg, kind)), cfg, digits)
        else:
            _emit(emit_figure_data(_spec(cfg, "approx-comparison")), cfg, digits, summary=False)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Batch experiment harness.

    circlesum <command> --config <path> [--workers N] [--out prefix]

The config is a YAML file with a ``system`` section (``n`` and ``blocks``
mapping each degree to polynomial strings), a ``parameters`` section and an
optional ``output`` prefix.  Every run writes ``<prefix>.csv`` (data) and
``<prefix>.json`` (config echo, version, timestamps, workers, summary).

Exit status: 0 success, 1 invalid input, 2 budget exhausted.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._io import fmt_number, jsonable, write_csv
from ._parallel import ENV_WORKERS, default_workers
from .dioph import DEFAULT_Q_BUDGET
from .errors import BudgetError, CirclesumError, ParseError, QuadratureError, ShapeError
from .expsum import (DEFAULT_LATTICE_BUDGET, AlphaVector, BoxSpec, ExpLinear, PolyField,
                     as_fraction, eval_S, partial_summation_sides)
from .linforms import LinearBlock, b1, b1_support, restrict
from .polysys import GradedSystem, parse_polynomial, validate_system
from .singint import DEFAULT_CELL_BUDGET, TauVector, decay_exponent, eval_I
from .thresholds import system_thresholds, verify_dichotomy
from .variety import DEFAULT_BUDGET, DEFAULT_R0_VALUES, block_exponents, count_series

COMMANDS = (
    "eval-sum", "scan-alpha", "count-variety", "estimate-g", "compute-b1", "thresholds",
    "verify-dichotomy", "singular-integral", "partial-summation-check",
)

DEFAULT_GRID_BUDGET = 10**6

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2


class ConfigError(CirclesumError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message)


# -- grid ---------------------------------------------------------------------

def grid(resolution: int, shape, budget: int = DEFAULT_GRID_BUDGET) -> list[AlphaVector]:
    """All points ``k / resolution`` (``0 <= k < resolution``) per coordinate,
    last coordinate varying fastest.
    """
    if not isinstance(resolution, int) or resolution < 1:
        raise ValueError("resolution must be a positive integer")
    shape = tuple(shape)
    total = resolution ** sum(shape)
    if total > budget:
        raise BudgetError("alpha grid points", total, budget)
    axis = [Fraction(k, resolution) for k in range(resolution)]
    return [AlphaVector.from_flat(shape, pt) for pt in itertools.product(axis, repeat=sum(shape))]


# -- config parsing -------------------------------------------------------------

def _pos_number(v):
    x = float(v)
    if not x > 0 or not math.isfinite(x):
        raise ValueError("must be a positive finite number")
    return x


def _number(v):
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _pos_int(v):
    if isinstance(v, bool) or int(v) != v or int(v) < 1:
        raise ValueError("must be a positive integer")
    return int(v)


def _nonneg_int(v):
    if isinstance(v, bool) or int(v) != v or int(v) < 0:
        raise ValueError("must be a non-negative integer")
    return int(v)


def _int_list(v):
    if not isinstance(v, (list, tuple)) or not v:
        raise ValueError("must be a nonempty list of integers")
    return [_pos_int(x) for x in v]


def _nonneg_int_list(v):
    if not isinstance(v, (list, tuple)) or not v:
        raise ValueError("must be a nonempty list of integers")
    return [_nonneg_int(x) for x in v]


def _number_list(v):
    if not isinstance(v, (list, tuple)) or not v:
        raise ValueError("must be a nonempty list of numbers")
    return [_number(x) for x in v]


def _raw(v):
    return v


def _text(v):
    if not isinstance(v, str):
        raise ValueError("must be a string")
    return v


_COMMON = {"workers": (_pos_int, None)}
_REQ = object()

PARAMETERS = {
    "eval-sum": {"P": (_pos_number, _REQ), "alpha": (_raw, _REQ),
                 "lattice_budget": (_pos_int, DEFAULT_LATTICE_BUDGET)},
    "scan-alpha": {"P": (_pos_number, _REQ), "resolution": (_pos_int, _REQ),
                   "lattice_budget": (_pos_int, DEFAULT_LATTICE_BUDGET),
                   "grid_budget": (_pos_int, DEFAULT_GRID_BUDGET)},
    "count-variety": {"R0": (_int_list, list(DEFAULT_R0_VALUES)), "ell": (_pos_int, None),
                      "budget": (_pos_int, DEFAULT_BUDGET)},
    "estimate-g": {"R0": (_int_list, list(DEFAULT_R0_VALUES)), "budget": (_pos_int, DEFAULT_BUDGET)},
    "compute-b1": {},
    "thresholds": {"R0": (_int_list, list(DEFAULT_R0_VALUES)), "budget": (_pos_int, DEFAULT_BUDGET)},
    "verify-dichotomy": {"P": (_pos_number, _REQ), "delta": (_pos_number, _REQ),
                         "omega": (_pos_number, _REQ), "resolution": (_pos_int, _REQ),
                         "slack": (_pos_number, 1.0), "gamma_sum": (_raw, None),
                         "R0": (_int_list, list(DEFAULT_R0_VALUES)),
                         "lattice_budget": (_pos_int, DEFAULT_LATTICE_BUDGET),
                         "q_budget": (_pos_int, DEFAULT_Q_BUDGET),
                         "grid_budget": (_pos_int, DEFAULT_GRID_BUDGET)},
    "singular-integral": {"tau": (_number_list, None), "direction": (_number_list, None),
                          "t_values": (_number_list, None), "tol": (_pos_number, 1e-9),
                          "cell_budget": (_pos_int, DEFAULT_CELL_BUDGET)},
    "partial-summation-check": {"N": (_nonneg_int_list, _REQ), "f": (_text, None),
                                "theta": (_number_list, None), "rho": (_text, "one"),
                                "order": (_pos_int, 10)},
}


def _find_line(text: str, needle: str) -> int | None:
    for k, line in enumerate(text.splitlines(), start=1):
        if needle and needle in line:
            return k
    return None


@dataclass
class ExperimentConfig:
    command: str
    system: GradedSystem | None
    parameters: dict
    output: str
    raw: dict = field(default_factory=dict)


def load_config(path: str, command: str) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {exc}", mark.line + 1 if mark else None) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    declared = data.get("command")
    if declared is not None and declared != command:
        raise ConfigError(f"config declares command {declared!r} but {command!r} was requested",
                          _find_line(text, "command"))
    unknown = set(data) - {"command", "system", "parameters", "output"}
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown top-level key {key!r}", _find_line(text, key))

    sysdata = data.get("system")
    if not isinstance(sysdata, dict) or "n" not in sysdata or "blocks" not in sysdata:
        raise ConfigError("config needs a 'system' section with 'n' and 'blocks'",
                          _find_line(text, "system"))
    try:
        n = _pos_int(sysdata["n"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"system.n {exc}", _find_line(text, "n:")) from None
    blocks_raw = sysdata["blocks"]
    if not isinstance(blocks_raw, dict):
        raise ConfigError("system.blocks must map degrees to lists of polynomials",
                          _find_line(text, "blocks"))
    blocks = {}
    for key, polys in blocks_raw.items():
        try:
            ell = _pos_int(key)
        except (TypeError, ValueError):
            raise ConfigError(f"block key {key!r} is not a positive degree",
                              _find_line(text, str(key))) from None
        if isinstance(polys, str):
            polys = [polys]
        parsed = []
        for p in polys or []:
            try:
                parsed.append(parse_polynomial(str(p), n))
            except ParseError as exc:
                raise ConfigError(f"malformed polynomial {str(p)!r}: {exc}",
                                  _find_line(text, str(p))) from None
        blocks[ell] = parsed
    system = GradedSystem.from_blocks(n, blocks)
    problems = validate_system(system)
    if problems:
        raise ConfigError("invalid system: " + "; ".join(map(str, problems)),
                          _find_line(text, "blocks"))

    params_in = data.get("parameters") or {}
    if not isinstance(params_in, dict):
        raise ConfigError("parameters must be a mapping", _find_line(text, "parameters"))
    schema = {**_COMMON, **PARAMETERS[command]}
    params = {}
    for key in params_in:
        if key not in schema:
            raise ConfigError(f"unknown parameter {key!r} for {command}", _find_line(text, key))
    for key, (conv, default) in schema.items():
        if key in params_in:
            try:
                params[key] = conv(params_in[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"parameter {key!r} {exc}", _find_line(text, key)) from None
        elif default is _REQ:
            raise ConfigError(f"missing required parameter {key!r} for {command}")
        else:
            params[key] = default
    cfg = ExperimentConfig(command, system, params, str(data.get("output") or Path(path).with_suffix("")),
                           data)
    _validate_command(cfg, text)
    return cfg


def _alpha_from(system, value):
    if isinstance(value, dict):
        return AlphaVector.for_system(system, {int(k): v for k, v in value.items()})
    if isinstance(value, (list, tuple)):
        return AlphaVector.for_system(system, list(value))
    return AlphaVector.for_system(system, [value])


def _validate_command(cfg: ExperimentConfig, text: str) -> None:
    p, s = cfg.parameters, cfg.system
    try:
        if cfg.command == "eval-sum":
            p["alpha"] = _alpha_from(s, p["alpha"])
        elif cfg.command == "verify-dichotomy":
            if not p["delta"] <= 1:
                raise ValueError("delta must lie in (0, 1]")
            if p["P"] <= 1:
                raise ValueError("P must exceed 1")
            if p["gamma_sum"] is not None:
                g = p["gamma_sum"]
                p["gamma_sum"] = math.inf if str(g) in ("inf", "+inf") else as_fraction(g)
        elif cfg.command == "count-variety":
            if p["ell"] is not None and (not 2 <= p["ell"] <= s.d or s.r(p["ell"]) == 0):
                raise ValueError(f"ell={p['ell']} is not a nonempty block of degree >= 2")
        elif cfg.command == "singular-integral":
            if p["tau"] is None and p["direction"] is None:
                raise ValueError("give either 'tau' or 'direction' with 't_values'")
            if p["tau"] is not None:
                p["tau"] = TauVector.from_flat(s.block_sizes, p["tau"])
            else:
                if p["t_values"] is None:
                    raise ValueError("'direction' needs 't_values'")
                p["direction"] = TauVector.from_flat(s.block_sizes, p["direction"])
        elif cfg.command == "partial-summation-check":
            N = p["N"]
            if len(N) > 3:
                raise ValueError("partial summation supports at most 3 dimensions")
            if (p["f"] is None) == (p["theta"] is None):
                raise ValueError("give exactly one of 'f' (polynomial) or 'theta' (e(theta.x))")
            if p["f"] is not None:
                p["f_poly"] = parse_polynomial(p["f"], len(N))
            elif len(p["theta"]) != len(N):
                raise ValueError("theta must have one entry per dimension")
            if p["rho"] not in ("one", "alternating"):
                p["rho_poly"] = parse_polynomial(p["rho"], len(N))
    except (ValueError, TypeError, ShapeError) as exc:
        raise ConfigError(f"{cfg.command}: {exc}") from None


# -- commands --------------------------------------------------------------------

def _alpha_header(shape):
    return [f"alpha_{ell}_{r}" for ell, size in enumerate(shape, start=1) for r in range(1, size + 1)]


def _cmd_eval_sum(cfg, workers):
    s, p = cfg.system, cfg.parameters
    a = p["alpha"]
    v = eval_S(s, BoxSpec(p["P"], s.n), a, budget=p["lattice_budget"], workers=workers)
    csv_text = write_csv(_alpha_header(a.shape) + ["re", "im", "abs"],
                         [list(a.flat()) + [v.real, v.imag, abs(v)]])
    return csv_text, {"value": fmt_number(v), "re": v.real, "im": v.imag, "abs": abs(v)}, EXIT_OK


def _cmd_scan_alpha(cfg, workers):
    s, p = cfg.system, cfg.parameters
    pts = grid(p["resolution"], s.block_sizes, p["grid_budget"])
    box = BoxSpec(p["P"], s.n)
    if box.size > p["lattice_budget"]:
        raise BudgetError("lattice points", box.size, p["lattice_budget"])
    from ._parallel import ordered_map
    values = ordered_map(_scan_task, [(s, box, a, p["lattice_budget"]) for a in pts], workers)
    rows = [list(a.flat()) + [v.real, v.imag, abs(v)] for a, v in zip(pts, values)]
    k = max(range(len(values)), key=lambda i: abs(values[i]))
    summary = {"points": len(pts), "max_abs": abs(values[k]),
               "argmax": [fmt_number(x) for x in pts[k].flat()]}
    return write_csv(_alpha_header(s.block_sizes) + ["re", "im", "abs"], rows), summary, EXIT_OK


def _scan_task(args):
    s, box, a, budget = args
    return eval_S(s, box, a, budget=budget, workers=1)


def _cmd_count_variety(cfg, workers):
    s, p = cfg.system, cfg.parameters
    ells = [p["ell"]] if p["ell"] else [l for l in range(2, s.d + 1) if s.r(l)]
    rows, summary = [], {}
    for ell in ells:
        series = count_series(s, ell, p["R0"], budget=p["budget"], workers=workers)
        rows.extend([ell, r0, z] for r0, z in series.samples)
        summary[f"ell_{ell}"] = [list(x) for x in series.samples]
    return write_csv(["ell", "R0", "z"], rows), summary, EXIT_OK


def _cmd_estimate_g(cfg, workers):
    s, p = cfg.system, cfg.parameters
    rows, summary = [], {}
    for b in block_exponents(s, p["R0"], budget=p["budget"], workers=workers):
        rows.extend([b.ell, r0, z] for r0, z in b.series.samples)
        summary[f"ell_{b.ell}"] = {
            "gHat": b.estimate.gHat, "stderr": b.estimate.stderr,
            "exponentFit": b.estimate.exponentFit, "gamma": b.gamma,
            "gammaPrime": b.gamma_prime, "zeroCountsAt": list(b.estimate.flagged),
        }
    return write_csv(["ell", "R0", "z"], rows), summary, EXIT_OK


def _cmd_compute_b1(cfg, workers):
    s = cfg.system
    block = LinearBlock.from_system(s)
    value = b1(block)
    rows = []
    if block.r:
        for j in range(1, s.n + 1):
            rb = b1(restrict(block, j))
            rows.append([j, rb, rb - value])
    support = b1_support(block)
    summary = {"b1": value, "r1": block.r,
               "support": None if support is None else [j + 1 for j in support]}
    return write_csv(["j", "b1_restricted", "gap"], rows), summary, EXIT_OK


def _cmd_thresholds(cfg, workers):
    s, p = cfg.system, cfg.parameters
    rep = system_thresholds(s, p["R0"], budget=p["budget"], workers=workers)
    rows = [[k, v] for k, v in rep.rows()]
    return write_csv(["quantity", "value"], rows), {k: v for k, v in rep.rows()}, EXIT_OK


def _cmd_verify_dichotomy(cfg, workers):
    s, p = cfg.system, cfg.parameters
    pts = grid(p["resolution"], s.block_sizes, p["grid_budget"])
    res = verify_dichotomy(s, p["P"], p["delta"], p["omega"], pts, gamma_sum_value=p["gamma_sum"],
                           r0_values=p["R0"], slack=p["slack"], lattice_budget=p["lattice_budget"],
                           q_budget=p["q_budget"], workers=workers)
    status = EXIT_BUDGET if res.errors else EXIT_OK
    return res.to_csv(), res.summary(), status


def _cmd_singular_integral(cfg, workers):
    s, p = cfg.system, cfg.parameters
    if p["tau"] is not None:
        r = eval_I(s, p["tau"], p["tol"], cell_budget=p["cell_budget"])
        csv_text = write_csv([f"tau_{k}" for k in range(1, s.R + 1)] + ["re", "im", "abs", "err"],
                             [list(p["tau"].flat()) + [r.value.real, r.value.imag, abs(r.value),
                                                        r.errEstimate]])
        summary = {"value": fmt_number(r.value), "errEstimate": r.errEstimate,
                   "converged": r.converged, "cells": r.cells}
        return csv_text, summary, EXIT_OK if r.converged else EXIT_BUDGET
    fit = decay_exponent(s, p["direction"], p["t_values"], p["tol"], cell_budget=p["cell_budget"])
    summary = {"exponent": fit.exponent, "C": fit.C, "R": s.R,
               "envelope_holds": fit.envelope_holds,
               "excluded_t": [r.t for r in fit.rows if not r.used]}
    return fit.to_csv(), summary, EXIT_OK


def _rho_callable(p):
    if p["rho"] == "one":
        return lambda x: 1.0
    if p["rho"] == "alternating":
        return lambda x: (-1.0) ** sum(x)
    poly = p["rho_poly"]
    return lambda x: float(poly(list(x)))


def _cmd_partial_summation(cfg, workers):
    p = cfg.parameters
    f = PolyField(p["f_poly"]) if p["f"] is not None else ExpLinear(p["theta"])
    lhs, rhs = partial_summation_sides(f, _rho_callable(p), p["N"], order=p["order"],
                                       check_order=p["order"] + 4)
    residual = abs(lhs - rhs) / max(1.0, abs(lhs))
    header = [f"N_{i}" for i in range(1, len(p["N"]) + 1)] + ["lhs_re", "lhs_im", "rhs_re",
                                                                "rhs_im", "residual"]
    rows = [list(p["N"]) + [lhs.real, lhs.imag, rhs.real, rhs.imag, residual]]
    return write_csv(header, rows), {"residual": residual, "lhs": fmt_number(lhs),
                                     "rhs": fmt_number(rhs)}, EXIT_OK


DISPATCH = {
    "eval-sum": _cmd_eval_sum,
    "scan-alpha": _cmd_scan_alpha,
    "count-variety": _cmd_count_variety,
    "estimate-g": _cmd_estimate_g,
    "compute-b1": _cmd_compute_b1,
    "thresholds": _cmd_thresholds,
    "verify-dichotomy": _cmd_verify_dichotomy,
    "singular-integral": _cmd_singular_integral,
    "partial-summation-check": _cmd_partial_summation,
}


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def run(cfg: ExperimentConfig, workers: int) -> int:
    """Execute one configured command and write ``<prefix>.csv``/``<prefix>.json``."""
    started = _now()
    status = EXIT_OK
    try:
        csv_text, summary, status = DISPATCH[cfg.command](cfg, workers)
    except BudgetError as exc:
        csv_text, summary, status = "", {"error": str(exc), "required": exc.required,
                                         "budget": exc.budget}, EXIT_BUDGET
    out = Path(cfg.output)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out.with_name(out.name + ".csv")
    json_path = out.with_name(out.name + ".json")
    if csv_text:
        csv_path.write_text(csv_text)
    manifest = {
        "command": cfg.command,
        "config": jsonable(cfg.raw),
        "version": __version__,
        "started": started,
        "finished": _now(),
        "workers": workers,
        "status": status,
        "summary": jsonable(summary),
        "outputs": {"csv": str(csv_path) if csv_text else None, "json": str(json_path)},
    }
    json_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if status == EXIT_BUDGET:
        print(f"circlesum: budget exhausted: {summary.get('error', 'see manifest')}", file=sys.stderr)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circlesum", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("--config", required=True, help="YAML experiment config")
    ap.add_argument("--workers", type=int, default=None,
                    help=f"worker processes (default: ${ENV_WORKERS} or config or 1)")
    ap.add_argument("--out", default=None, help="output prefix (overrides config 'output')")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        cfg = load_config(args.config, args.command)
    except ConfigError as exc:
        where = f"{args.config}:{exc.line}: " if exc.line else f"{args.config}: "
        print(f"circlesum: {where}{exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"circlesum: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        cfg.output = args.out
    if args.workers is not None:
        workers = max(1, args.workers)
    elif default_workers() > 1 or cfg.parameters.get("workers") is None:
        workers = default_workers()
    else:
        workers = cfg.parameters["workers"]
    try:
        return run(cfg, workers)
    except (QuadratureError, ShapeError, ValueError) as exc:
        print(f"circlesum: {cfg.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CirclesumError as exc:
        print(f"circlesum: {cfg.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

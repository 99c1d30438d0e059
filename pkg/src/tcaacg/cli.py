"""Command-line front end: ``tcaacg simulate|sweep|boa|baseline``.

Configuration is a flat ``key = value`` text file (``#`` comments, values
written as JSON: numbers, ``true``/``false``, ``[lists]``, quoted or bare
strings). Precedence, lowest first: built-in defaults, the config file,
environment variables ``TCAACG_<KEY>`` (upper case), command-line flags
``--<key> <value>``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import svg
from .metrics import mcot, speed
from .model import LiftoffPoint, ModelParams
from .poincare import (
    BOA_NORMALIZATION,
    FallBeforeReturn,
    boa_interval,
    solve_ladder,
)
from .simulator import IntegratorConfig, simulate, write_trace_csv
from .sweep import CANNED_GUESS, SweepSpec, baseline_frontier, grid, run_sweep

ENV_PREFIX = "TCAACG_"

SWEEP_HEADER = (
    "r0,theta_trig,k,status,period,lambda_max,region,speed,mcot,"
    "boa_dths,boa_thn,boa_dthn,q_dthetas,q_thetan,q_dthetan"
)
BASELINE_HEADER = "impulse,speed,mcot,lambda_max"

MODEL_KEYS = ("m_b", "m", "l", "k", "g", "r0", "theta_trig", "com_offset")
INTEGRATOR_KEYS = ("rel_tol", "abs_tol", "max_step", "event_time_tol", "max_stride_time", "max_strides")

DEFAULTS = {
    **{f: getattr(ModelParams(), f) for f in MODEL_KEYS if f != "com_offset"},
    "com_offset": None,
    **{f: getattr(IntegratorConfig(), f) for f in INTEGRATOR_KEYS},
    "r0_range": [0.0, 0.15, 76],
    "theta_trig_range": [-0.6, 0.1, 71],
    "k_values": [100.0, 300.0],
    "periods": [1, 2, 4, 8],
    "boa_enabled": False,
    "output_dir": "out",
    "emit_svg": False,
    "jobs": 1,
    "q_l": list(CANNED_GUESS),
    "n": 1,
    "impulse_range": [0.05, 1.3, 26],
    "boa_strides": 50,
    "boa_tol": 1e-4,
    "speed_scale": [0.0, 1.4],
    "mcot_scale": [0.0, 0.15],
    "boa_scale": [0.0, 1.0],
    "lambda_scale": [0.0, 1.0],
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config


def _parse_value(key, text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        if text[:1] in "[{\"" or text in ("True", "False"):
            raise ConfigError(f"{key}: cannot parse value {text!r}") from None
        return text


def read_config(path) -> dict:
    """Parse a flat key/value file; unknown keys are an error."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#",))
    cp.optionxform = str
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        cp.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    if len(cp.sections()) != 1:
        raise ConfigError(f"config {path} must be flat (no [sections])")
    out = {}
    for key, val in cp.items("run"):
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _parse_value(key, val)
    return out


def _env_overrides(environ) -> dict:
    out = {}
    for key in DEFAULTS:
        name = ENV_PREFIX + key.upper()
        if name in environ:
            out[key] = _parse_value(key, environ[name])
    return out


def _number(key, v, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    return int(v) if integer else float(v)


def _range(key, v):
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(f"{key}: expected [min, max, count]")
    return (_number(key, v[0]), _number(key, v[1]), _number(key, v[2], integer=True))


def _pair(key, v):
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError(f"{key}: expected [low, high]")
    return (_number(key, v[0]), _number(key, v[1]))


def _bool(key, v):
    if not isinstance(v, bool):
        raise ConfigError(f"{key}: expected true or false, got {v!r}")
    return v


class RunConfig:
    """Validated run configuration."""

    def __init__(self, values: dict):
        v = dict(DEFAULTS)
        v.update(values)
        self.raw = v
        try:
            model = {}
            for key in MODEL_KEYS:
                if key == "com_offset" and v[key] is None:
                    continue
                model[key] = _number(key, v[key])
            self.model = ModelParams(**model)
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from None
        try:
            integ = {key: _number(key, v[key], integer=(key == "max_strides")) for key in INTEGRATOR_KEYS}
            self.integrator = IntegratorConfig(**integ)
        except ValueError as exc:
            raise ConfigError(f"integrator: {exc}") from None
        k_values = v["k_values"]
        if not isinstance(k_values, list):
            raise ConfigError("k_values: expected a list")
        periods = v["periods"]
        if not isinstance(periods, list):
            raise ConfigError("periods: expected a list")
        try:
            self.sweep = SweepSpec(
                r0_range=_range("r0_range", v["r0_range"]),
                theta_trig_range=_range("theta_trig_range", v["theta_trig_range"]),
                k_values=tuple(_number("k_values", k) for k in k_values),
                periods=tuple(_number("periods", j, integer=True) for j in periods),
                integrator=self.integrator,
                boa_enabled=_bool("boa_enabled", v["boa_enabled"]),
                base=self.model,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.output_dir = Path(str(v["output_dir"]))
        self.emit_svg = _bool("emit_svg", v["emit_svg"])
        self.jobs = _number("jobs", v["jobs"], integer=True)
        q = v["q_l"]
        if not isinstance(q, list) or len(q) != 3:
            raise ConfigError("q_l: expected [dtheta_s, theta_n, dtheta_n]")
        self.q_l = LiftoffPoint(*(_number("q_l", x) for x in q))
        self.n = _number("n", v["n"], integer=True)
        if self.n < 1:
            raise ConfigError("n: must be at least 1")
        ir = v["impulse_range"]
        if not isinstance(ir, list):
            raise ConfigError("impulse_range: expected [min, max, count] or a list")
        if len(ir) == 3 and all(isinstance(x, (int, float)) for x in ir) and float(ir[2]).is_integer() and ir[2] >= 0:
            lo, hi, cnt = _number("impulse_range", ir[0]), _number("impulse_range", ir[1]), int(ir[2])
            if lo > hi:
                raise ConfigError("impulse_range: min exceeds max")
            self.impulses = np.linspace(lo, hi, cnt) if cnt > 0 else np.zeros(0)
        else:
            self.impulses = np.array([_number("impulse_range", x) for x in ir], dtype=float)
        if np.any(self.impulses < 0):
            raise ConfigError("impulse_range: impulses must be non-negative")
        self.boa_strides = _number("boa_strides", v["boa_strides"], integer=True)
        self.boa_tol = _number("boa_tol", v["boa_tol"])
        self.scales = {name: _pair(name, v[name]) for name in ("speed_scale", "mcot_scale", "boa_scale", "lambda_scale")}


def load_config(path=None, overrides=None, environ=None) -> RunConfig:
    values = {}
    if path is not None:
        values.update(read_config(path))
    values.update(_env_overrides(os.environ if environ is None else environ))
    values.update(overrides or {})
    return RunConfig(values)


# ---------------------------------------------------------------- output


def fmt(x) -> str:
    """17 significant digits; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.17g}"


def sweep_rows(cells):
    for c in cells:
        rec = c.record
        boa = rec.boa if rec is not None and rec.boa is not None else (None, None, None)
        q = rec.q_star.as_array() if rec is not None else (None, None, None)
        yield [
            fmt(c.r0), fmt(c.theta_trig), fmt(c.k), c.status,
            str(rec.period_j) if rec is not None else "",
            fmt(rec.lambda_max) if rec is not None else "",
            (rec.region or "") if rec is not None else "",
            fmt(rec.speed) if rec is not None else "",
            fmt(rec.mcot) if rec is not None else "",
            *(fmt(b) for b in boa),
            *(fmt(x) for x in q),
        ]


def write_sweep_csv(cells, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(SWEEP_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for row in sweep_rows(cells):
            w.writerow(row)
    return path


def write_baseline_csv(points, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(BASELINE_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for p in points:
            w.writerow([fmt(p.impulse), fmt(p.speed), fmt(p.mcot), fmt(p.lambda_max)])
    return path


def sweep_figures(cells, spec: SweepSpec, scales, out_dir: Path) -> list[Path]:
    r0s = grid(spec.r0_range)
    ths = grid(spec.theta_trig_range)
    written = []
    for k in spec.k_values:
        sel = [c for c in cells if c.k == k]
        shape = (len(ths), len(r0s))
        fields = {
            "period": np.full(shape, np.nan),
            "speed": np.full(shape, np.nan),
            "mcot": np.full(shape, np.nan),
            "boa_dths": np.full(shape, np.nan),
            "boa_thn": np.full(shape, np.nan),
            "boa_dthn": np.full(shape, np.nan),
        }
        for idx, c in enumerate(sel):
            iy, ix = divmod(idx, len(r0s))
            if c.status != "stable" or c.record is None:
                continue
            rec = c.record
            fields["period"][iy, ix] = rec.period_j
            if rec.speed is not None:
                fields["speed"][iy, ix] = rec.speed
                fields["mcot"][iy, ix] = rec.mcot
            if rec.boa is not None:
                for name, val in zip(("boa_dths", "boa_thn", "boa_dthn"), rec.boa):
                    fields[name][iy, ix] = val
        kk = f"{k:g}"
        figs = [
            ("period", f"Stable gait period, k = {kk} N/m", None, svg.PERIOD_COLORS),
            ("speed", f"Speed (m/s), k = {kk} N/m", scales["speed_scale"], None),
            ("mcot", f"Mechanical cost of transport, k = {kk} N/m", scales["mcot_scale"], None),
        ]
        if spec.boa_enabled:
            for name, label in (("boa_dths", "dtheta_s"), ("boa_thn", "theta_n"), ("boa_dthn", "dtheta_n")):
                figs.append((name, f"Normalized basin extent along {label}, k = {kk} N/m", scales["boa_scale"], None))
        for name, title, vr, cat in figs:
            doc = svg.heatmap(
                fields[name], r0s, ths, title, "r0 (m)", "theta_trig (rad)", vrange=vr, categorical=cat
            )
            path = out_dir / f"{name}_k{kk}.svg"
            path.write_text(doc)
            written.append(path)
    return written


# ---------------------------------------------------------------- commands


def cmd_simulate(cfg: RunConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    results = simulate(cfg.q_l, cfg.model, cfg.integrator, n=cfg.n, record=True)
    for i, r in enumerate(results):
        if r.trace is not None:
            write_trace_csv(r.trace, out / f"trace_{i + 1:04d}.csv")
    done = [r for r in results if r.completed]
    if done:
        d = [r.info["step_length"] for r in done]
        t = [r.info["duration"] for r in done]
        v = speed(d, t)
        c = mcot(cfg.model, d)
    else:
        v = c = float("nan")
    last = results[-1]
    print(f"outcome={last.outcome} strides={len(done)} speed={fmt(v)} mcot={fmt(c)}")
    if not last.completed:
        print(f"stride {len(results)} {last.outcome}: {last.reason}", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    cells = run_sweep(cfg.sweep, jobs=cfg.jobs)
    write_sweep_csv(cells, out / "results.csv")
    if cfg.emit_svg:
        sweep_figures(cells, cfg.sweep, cfg.scales, out)
    n_stable = sum(c.status == "stable" for c in cells)
    print(f"cells={len(cells)} stable={n_stable} csv={out / 'results.csv'}")
    return 0


def cmd_boa(cfg: RunConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    rec, _ = solve_ladder(cfg.q_l, cfg.model, cfg.integrator, cfg.sweep.periods)
    if rec is None:
        print("no stable gait found from q_l", file=sys.stderr)
        return 1
    path = out / "boa.csv"
    with path.open("w", newline="") as fh:
        fh.write("coordinate,q_star,lower,upper,extent_normalized\n")
        w = csv.writer(fh, lineterminator="\n")
        q = rec.q_star.as_array()
        for i, name in enumerate(("dtheta_s", "theta_n", "dtheta_n")):
            a, b = boa_interval(rec, i, cfg.model, cfg.integrator, strides=cfg.boa_strides, tol=cfg.boa_tol)
            w.writerow([name, fmt(q[i]), fmt(q[i] - a), fmt(q[i] + b), fmt((a + b) * BOA_NORMALIZATION[i])])
    print(f"period={rec.period_j} lambda_max={fmt(rec.lambda_max)} csv={path}")
    return 0


def cmd_baseline(cfg: RunConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    pts = baseline_frontier(list(cfg.impulses), cfg.model, cfg.integrator, periods=cfg.sweep.periods)
    write_baseline_csv(pts, out / "baseline.csv")
    if cfg.emit_svg:
        doc = svg.scatter(
            [("impulsive pushoff", "#d62728", [p.speed for p in pts], [p.mcot for p in pts])],
            "Impulsive baseline", "speed (m/s)", "mCoT",
        )
        (out / "baseline.svg").write_text(doc)
    print(f"points={len(pts)} csv={out / 'baseline.csv'}")
    return 0


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "boa": cmd_boa, "baseline": cmd_baseline}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tcaacg", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--out", help="output directory (same as output_dir)")
    ap.add_argument("--svg", action="store_true", help="emit SVG figures (same as emit_svg = true)")
    ap.add_argument("--jobs", help="worker processes for sweeps")
    for key in DEFAULTS:
        if key == "jobs":
            continue
        ap.add_argument(f"--{key}", dest=f"set_{key}", metavar="VALUE", help=argparse.SUPPRESS)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    overrides = {}
    try:
        for key in DEFAULTS:
            val = getattr(args, f"set_{key}", None)
            if val is not None:
                overrides[key] = _parse_value(key, val)
        if args.out is not None:
            overrides["output_dir"] = args.out
        if args.svg:
            overrides["emit_svg"] = True
        if args.jobs is not None:
            overrides["jobs"] = _parse_value("jobs", args.jobs)
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except FallBeforeReturn as exc:
        print(f"gait failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Batch command line front end.

Every command reads an optional flat ``key = value`` config file, applies
command line overrides on top, and writes either a JSON report (with the
resolved configuration embedded) or a CSV table.
"""

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import blowup, covers, filler, hfun, spaces
from .errors import ConfigInvalid, HausfillError
from .report import render_csv, render_error, render_report
from .sets import SetSample, depth_cap, parse_set

COMMANDS = ("hfun", "measure", "dimension", "net", "fill", "blowup")

# Keys each command accepts, with defaults.  ``None`` means "derived".
SCHEMA = {
    "hfun": {"action": "check", "gauge": "power:1", "gauge2": "dimfun:1",
             "levels": None, "t_min": "1e-12"},
    "measure": {"set": "cantor", "gauge": "power:log2/log3", "deltas": None,
                "depth_lo": 1, "depth": 8},
    "dimension": {"set": "cantor", "depth_lo": 3, "depth": 10},
    "net": {"space": "square", "levels": 4, "validation_level": None},
    "fill": {"domain": "interval", "space": "square", "set": "full", "gauge": "power:1",
             "depth": 6, "validation_level": None, "sample_size": 33, "seed": 0},
    "blowup": {"s_dim": "log2/log3", "depth": 10, "depth_lo": 1, "curve": "hilbert",
               "holder_depth": 10, "pairs": 10000, "seed": 0},
}
COMMON = {"command", "format"}
INTS = {"levels", "depth_lo", "depth", "validation_level", "sample_size", "seed",
        "holder_depth", "pairs"}
FORMATS = ("report", "csv")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigInvalid(message)


def build_parser():
    p = _Parser(prog="hausfill", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", help="one of " + ", ".join(COMMANDS))
    p.add_argument("action", nargs="?", help="for hfun: check or precedes")
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=FORMATS)
    for flag in ("space", "gauge", "gauge2", "set", "domain", "deltas", "s-dim", "curve",
                 "t-min", "depth", "depth-lo", "levels", "validation-level",
                 "sample-size", "seed", "holder-depth", "pairs"):
        p.add_argument("--" + flag, dest=flag.replace("-", "_"))
    return p


def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ConfigInvalid(f"{path}:{lineno}: expected key = value")
        if key in out:
            raise ConfigInvalid(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    if not out:
        raise ConfigInvalid(f"config {path} is empty")
    return out


def resolve(args):
    """Merge file values, flag overrides and defaults into one validated dict."""
    raw = read_config(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("config", "out", "command", "action")}
    raw.update(flags)
    if args.command is not None:
        raw["command"] = args.command
    if args.action is not None:
        raw["action"] = args.action
    command = raw.get("command")
    if command is None:
        raise ConfigInvalid("no command given")
    if command not in COMMANDS:
        raise ConfigInvalid(f"unknown command {command!r}")
    schema = SCHEMA[command]
    unknown = sorted(set(raw) - set(schema) - COMMON)
    if unknown:
        raise ConfigInvalid(f"unknown keys for {command}: {', '.join(unknown)}")
    cfg = {k: raw.get(k, v) for k, v in schema.items()}
    cfg["command"] = command
    cfg["format"] = raw.get("format", "report")
    if cfg["format"] not in FORMATS:
        raise ConfigInvalid(f"format must be one of {FORMATS}")
    for k in INTS & set(cfg):
        if cfg[k] is not None:
            try:
                cfg[k] = int(cfg[k])
            except (TypeError, ValueError) as exc:
                raise ConfigInvalid(f"{k} must be an integer, got {cfg[k]!r}") from exc
    if command == "hfun":
        if cfg["action"] not in ("check", "precedes"):
            raise ConfigInvalid("hfun action must be check or precedes")
        if cfg["levels"] is None:
            cfg["levels"] = 32 if cfg["action"] == "check" else 40
    return cfg


def _real(cfg, key):
    try:
        return hfun.parse_real(str(cfg[key]))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigInvalid(f"{key} must be a real number, got {cfg[key]!r}") from exc


# ---------------------------------------------------------------- commands


def run_hfun(cfg):
    if cfg["action"] == "check":
        rep = hfun.finite_order_check(hfun.parse_gauge(cfg["gauge"]),
                                      t_min=_real(cfg, "t_min"), levels=cfg["levels"])
    else:
        rep = hfun.precedes(hfun.parse_gauge(cfg["gauge"]), hfun.parse_gauge(cfg["gauge2"]),
                            levels=cfg["levels"])
    return rep.to_dict(), (["t", "ratio"], rep.ratio_samples)


def _trend(values):
    first, last = values[0], values[-1]
    if all(b >= a for a, b in zip(values, values[1:])) and last > 2 * first:
        return "growing"
    if last < 0.5 * first:
        return "decaying"
    return "stable"


def run_measure(cfg):
    E = parse_set(cfg["set"])
    h = hfun.parse_gauge(cfg["gauge"])
    if cfg["deltas"]:
        try:
            deltas = [hfun.parse_real(s) for s in str(cfg["deltas"]).split(",")]
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigInvalid("deltas must be a comma separated list of reals") from exc
    else:
        deltas = [E.cell_diameter(j) for j in range(cfg["depth_lo"], cfg["depth"] + 1)]
    profile = covers.measure_upper_profile(E, h, deltas)
    best = covers.certified_bounds(profile)
    rows = [dict(c.to_dict(), certified=b) for c, b in zip(profile, best)]
    result = {"set": E.describe(), "gauge": h.label, "profile": rows,
              "trend": _trend([c.sum for c in profile])}
    table = [(c.delta, c.level, c.cell_count, c.sum, b) for c, b in zip(profile, best)]
    return result, (["delta", "level", "cell_count", "sum", "certified"], table)


def run_dimension(cfg):
    E = parse_set(cfg["set"])
    est = covers.box_dimension(E, cfg["depth_lo"], cfg["depth"])
    table = [(s, c, est.slope, est.r2) for s, c in est.scales]
    return dict(est.to_dict(), set=E.describe()), (["scale", "count", "slope", "r2"], table)


def run_net(cfg):
    Y = spaces.parse_space(cfg["space"])
    if not Y.is_length_space:
        raise ConfigInvalid(f"{Y.kind} is not a length space and cannot carry nets")
    net = spaces.build_net_hierarchy(Y, cfg["levels"], cfg["validation_level"])
    table = [(n, k, r, math.ldexp(1.0, -n))
             for n, (k, r) in enumerate(zip(net.sizes, net.covering_radii))]
    return net.to_dict(), (["n", "k", "covering_radius", "bound"], table)


def _domain_set(cfg, X):
    if cfg["set"] == "full":
        return SetSample(X, "full", 2, depth_cap(2), label="full")
    P = parse_set(cfg["set"])
    if P.dim != X.dim:
        raise ConfigInvalid("the set and the domain have different dimensions")
    return dataclasses.replace(P, ambient=X)


def run_fill(cfg):
    X = spaces.parse_space(cfg["domain"])
    if not isinstance(X, spaces.EuclideanCube):
        raise ConfigInvalid("the domain must be a cube or a snowflake cube")
    Y = spaces.parse_space(cfg["space"])
    if not Y.is_length_space:
        raise ConfigInvalid(f"{Y.kind} is not a length space and cannot be a target")
    P = _domain_set(cfg, X)
    F = filler.build_filling(X, Y, P, hfun.parse_gauge(cfg["gauge"]), cfg["depth"],
                             cfg["validation_level"])
    cert = filler.certificate(F)
    result = {
        "domain": X.describe(), "target": Y.describe(), "set": P.describe(),
        "net": {"sizes": F.net.sizes, "covering_radii": F.net.covering_radii,
                "validation_resolution": F.net.validation_resolution},
        "balls": F.balls.to_dict(), "certificate": cert.to_dict(),
        "null_set": filler.null_set_report(F).to_dict(),
        "lipschitz": F.lipschitz_constants(),
    }
    m = cfg["sample_size"]
    if X.dim == 1:
        xs = np.linspace(0.0, X.side, m).reshape(-1, 1)
    else:
        xs = np.random.default_rng(cfg["seed"]).uniform(0.0, X.side, (m, X.dim))
    return result, filler.trace_csv(F, xs)


def run_blowup(cfg):
    rep = blowup.blowup_demo(_real(cfg, "s_dim"), cfg["depth"], cfg["depth_lo"])
    curve = blowup.parse_curve(cfg["curve"])
    hold = blowup.holder_exponent(curve, cfg["holder_depth"], cfg["pairs"], seed=cfg["seed"])
    result = dict(rep.to_dict(), holder=dict(hold.to_dict(), curve=curve.name))
    return result, rep.to_csv()


RUNNERS = {"hfun": run_hfun, "measure": run_measure, "dimension": run_dimension,
           "net": run_net, "fill": run_fill, "blowup": run_blowup}


def run(cfg):
    """Execute a resolved config; returns the rendered output text."""
    result, table = RUNNERS[cfg["command"]](cfg)
    if cfg["format"] == "csv":
        return table if isinstance(table, str) else render_csv(*table)
    return render_report(cfg["command"], cfg, result)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    cfg, out = {}, None
    try:
        args = build_parser().parse_args(argv)
        out = args.out
        cfg = resolve(args)
        text = run(cfg)
    except HausfillError as exc:
        sys.stderr.write(render_error(cfg.get("command"), cfg, exc))
        return exc.exit_status
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core_paths import RngStream, TimeGrid, read_path_csv, sample_brownian_path, write_table_csv
from .grsk import pitman_transform, transform_t, transform_t_beta, tri_labels
from .polymer import ground_state, log_partition
from .rmt import sample_gue_spectrum
from .toda_sde import (
    EntranceSpec,
    SdeConfig,
    entrance_point,
    simulate_symmetric_s,
    simulate_triangular_z,
    simulate_whittaker_diffusion_n2,
    simulate_xy_pair_n2,
)
from .verify import SUITES, UnknownSuite, run_suite, suite_defaults
from .whittaker import PoleError, critical_point, log_whittaker_psi, moment_transform

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "seed": 1,
    "threads": 1,
    "dt": 1e-3,
    "t": 1.0,
    "reps": 1,
    "m_entrance": 10.0,
    "method": "auto",
    "beta": 1.0,
}


class UsageError(Exception):
    pass


def _floats(text, name):
    if text is None:
        return None
    try:
        return np.array([float(v) for v in str(text).split(",") if v.strip()])
    except ValueError as exc:
        raise UsageError(f"--{name} expects comma-separated numbers") from exc


def _common(p, top=False):
    # subcommands repeat the global flags; SUPPRESS keeps them from clobbering
    # values given before the subcommand name
    d = None if top else argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=d)
    p.add_argument("--threads", type=int, default=d)
    p.add_argument("--out", default=d, help="write output to this file instead of stdout")
    p.add_argument("--json", action="store_true", default=d)
    p.add_argument("--config", default=d, help="key=value configuration file")
    p.add_argument("--print-config", action="store_true", default=False if top else d,
                   help="print the effective configuration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="todapolymer",
                                     description="Geometric RSK, Brownian polymers and Whittaker functions")
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate Toda-type diffusions")
    _common(sim)
    sim.add_argument("kind", choices=["toda-z", "toda-s", "whittaker-n2", "xy-n2"])
    sim.add_argument("--nu", default=None)
    sim.add_argument("--x0", default=None, help="start (bottom row); default entrance law")
    sim.add_argument("--m-entrance", dest="m_entrance", type=float, default=None)
    sim.add_argument("--dt", type=float, default=None)
    sim.add_argument("--t", type=float, default=None)
    sim.add_argument("--reps", type=int, default=None)

    tr = sub.add_parser("transform", help="path transforms and polymer quantities")
    _common(tr)
    tr.add_argument("kind", choices=["t", "pitman", "t-beta", "log-partition", "ground-state"])
    tr.add_argument("--input", default=None, help="path CSV; default a Brownian path")
    tr.add_argument("--n", type=int, default=None)
    tr.add_argument("--dt", type=float, default=None)
    tr.add_argument("--t", type=float, default=None)
    tr.add_argument("--beta", type=float, default=None)
    tr.add_argument("--pattern", action="store_true", help="emit the whole triangular pattern")

    wh = sub.add_parser("whittaker", help="Whittaker functions")
    _common(wh)
    wh.add_argument("action", choices=["eval", "critical-point"])
    wh.add_argument("--n", type=int, default=None)
    wh.add_argument("--x", default=None)
    wh.add_argument("--lambda-re", dest="lambda_re", default=None)
    wh.add_argument("--lambda-im", dest="lambda_im", default=None)
    wh.add_argument("--method", choices=["auto", "closed-form", "givental", "mellin-barnes"], default=None)

    rm = sub.add_parser("rmt", help="GUE spectra")
    _common(rm)
    rm.add_argument("action", choices=["sample"])
    rm.add_argument("--n", type=int, default=None)
    rm.add_argument("--reps", type=int, default=None)

    ve = sub.add_parser("verify", help="run a named acceptance suite")
    _common(ve)
    ve.add_argument("suite", help="suite name, or 'list'")
    ve.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a suite option")
    ve.add_argument("--fresh-seed", action="store_true", help="draw a new seed from the OS")

    mo = sub.add_parser("moments", help="E exp(-s Z) by the contour formula")
    _common(mo)
    mo.add_argument("--s", default="1")
    mo.add_argument("--t", type=float, default=None)
    mo.add_argument("--n", type=int, default=None)
    return parser


def _read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {line!r}")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _merge(args) -> dict:
    """Explicit flags win over the config file, which wins over defaults."""
    cfg = {}
    if args.config:
        cfg = _read_config(args.config)
    for key, val in cfg.items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            default = DEFAULTS.get(key)
            if isinstance(default, bool) or key == "json":
                val = val.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                val = int(val)
            elif isinstance(default, float):
                val = float(val)
            setattr(args, key, val)
    for key, val in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, val)
    if args.json is None:
        args.json = False
    return {k: v for k, v in vars(args).items() if k not in ("config", "print_config", "seed_given")}


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_simulate(a) -> int:
    nu = _floats(a.nu, "nu")
    cfg = SdeConfig(a.dt, a.t)
    rng = RngStream(a.seed)
    reps = None if a.reps == 1 else a.reps
    if a.kind in ("toda-z", "toda-s"):
        if nu is None:
            raise UsageError("--nu is required")
        n = nu.size
        if a.x0 is not None:
            raise UsageError("toda-z/toda-s start from the entrance law; use --m-entrance")
        sim = simulate_triangular_z if a.kind == "toda-z" else simulate_symmetric_s
        res = sim(nu, EntranceSpec(a.m_entrance), cfg, rng, reps=reps)
        if reps is None:
            _emit(res.to_csv(), a.out)
            return EXIT_OK
        _emit(write_table_csv(tri_labels(n), res), a.out)
        return EXIT_OK
    nu = np.zeros(2) if nu is None else nu
    if nu.size != 2:
        raise UsageError("whittaker-n2 and xy-n2 need --nu of length 2")
    x0 = _floats(a.x0, "x0")
    x0 = entrance_point(a.m_entrance, 2) if x0 is None else x0
    if a.kind == "whittaker-n2":
        res = simulate_whittaker_diffusion_n2(nu, x0, cfg, rng, reps=reps)
        text = res.to_csv() if reps is None else write_table_csv(["x1", "x2"], res)
    else:
        x, y = simulate_xy_pair_n2(nu, x0, cfg, rng, reps=reps)
        if reps is None:
            rows = np.column_stack([x.times, x.values, y.values[:, 0]])
            text = write_table_csv(["t", "x1", "x2", "y1"], rows)
        else:
            text = write_table_csv(["x1", "x2", "y1"], np.column_stack([x, y]))
    _emit(text, a.out)
    return EXIT_OK


def _cmd_transform(a) -> int:
    if a.input:
        with open(a.input) as fh:
            path = read_path_csv(fh)
    else:
        path = sample_brownian_path(a.n or 2, None, TimeGrid.from_dt(a.dt, a.t), RngStream(a.seed))
    if a.kind == "t":
        res = transform_t(path, return_pattern=a.pattern)
    elif a.kind == "pitman":
        res = pitman_transform(path, return_pattern=a.pattern)
    if a.pattern and a.kind in ("t", "pitman"):
        res = res[1]
    elif a.kind == "t-beta":
        res = transform_t_beta(path, a.beta)
    elif a.kind == "log-partition":
        lz = log_partition(path, a.beta)
        res = None
        text = write_table_csv(["t"] + [f"logZ_{k}" for k in range(1, path.dims + 1)],
                               np.column_stack([path.times, lz]))
    else:
        res = None
        text = write_table_csv(["t", "M"], np.column_stack([path.times, ground_state(path)]))
    if res is not None:
        text = res.to_csv()
    _emit(text, a.out)
    return EXIT_OK


def _cmd_whittaker(a) -> int:
    x = _floats(a.x, "x")
    if x is None:
        raise UsageError("--x is required")
    if a.n is not None and x.size != a.n:
        raise UsageError("--x must have --n entries")
    if a.action == "critical-point":
        T, info = critical_point(x, return_info=True)
        payload = {"entries": T.entries.tolist(), **info}
        _emit(json.dumps(payload, sort_keys=True) + "\n", a.out)
        return EXIT_OK
    re = _floats(a.lambda_re, "lambda-re")
    im = _floats(a.lambda_im, "lambda-im")
    re = np.zeros(x.size) if re is None else re
    im = np.zeros(x.size) if im is None else im
    if re.size != x.size or im.size != x.size:
        raise UsageError("spectral parameter must have one entry per coordinate")
    val = log_whittaker_psi(x, re + 1j * im, a.method)
    v = complex(np.exp(val.log_value))
    payload = {"value_re": v.real, "value_im": v.imag, "method": val.method,
               "est_error": float(val.est_error), "log_value_re": val.log_value.real,
               "log_value_im": val.log_value.imag}
    if a.json:
        _emit(json.dumps(payload, sort_keys=True) + "\n", a.out)
    else:
        _emit(f"psi = {v.real:.17g} {v.imag:+.17g}i  ({val.method}, est. error {val.est_error:.2g})\n", a.out)
    return EXIT_OK


def _cmd_rmt(a) -> int:
    n = a.n or 2
    vals = sample_gue_spectrum(n, RngStream(a.seed), reps=a.reps)
    _emit(write_table_csv([f"lambda_{i}" for i in range(1, n + 1)], vals), a.out)
    return EXIT_OK


def _cmd_verify(a) -> int:
    if a.suite == "list":
        _emit("\n".join(sorted(SUITES)) + "\n", a.out)
        return EXIT_OK
    overrides = {}
    for item in a.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip().replace("-", "_")] = v.strip()
    try:
        defaults = suite_defaults(a.suite)
    except UnknownSuite as exc:
        raise UsageError(f"unknown suite {a.suite!r}") from exc
    if "seed" in defaults:
        if a.fresh_seed:
            overrides["seed"] = int(np.random.SeedSequence().entropy % (2**31))
        elif a.seed_given:
            overrides["seed"] = a.seed
    try:
        report = run_suite(a.suite, overrides, threads=a.threads)
    except ValueError as exc:
        if "has no option" in str(exc):
            raise UsageError(str(exc)) from exc
        raise
    if a.json:
        _emit(report.to_json() + "\n", a.out)
    else:
        lines = [f"{report.suite}: {'PASS' if report.passed else 'FAIL'} ({report.runtime_s:.1f} s)"]
        _emit("\n".join(lines + report.summary_lines()) + "\n", a.out)
    return EXIT_OK if report.passed else EXIT_FAILED


def _cmd_moments(a) -> int:
    rows = []
    for s in _floats(a.s, "s"):
        rows.append({"s": float(s), "t": a.t, "n": a.n or 1,
                     "value": moment_transform(float(s), a.t, a.n or 1)})
    if a.json:
        _emit(json.dumps(rows, sort_keys=True) + "\n", a.out)
    else:
        _emit(write_table_csv(["s", "value"], [[r["s"], r["value"]] for r in rows]), a.out)
    return EXIT_OK


COMMANDS = {
    "simulate": _cmd_simulate,
    "transform": _cmd_transform,
    "whittaker": _cmd_whittaker,
    "rmt": _cmd_rmt,
    "verify": _cmd_verify,
    "moments": _cmd_moments,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    args.seed_given = args.seed is not None
    try:
        effective = _merge(args)
        if args.print_config:
            text = "".join(f"{k}={effective[k]}\n" for k in sorted(effective)
                           if effective[k] is not None)
            _emit(text, None)
            return EXIT_OK
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FloatingPointError, OverflowError, ZeroDivisionError, PoleError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

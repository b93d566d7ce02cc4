"""Command-line entry point.

Subcommands::

    cirjump validate CONFIG            check model assumptions, exit 0 iff all pass
    cirjump laplace  CONFIG [flags]    transition-transform values as CSV
    cirjump sample   CONFIG [flags]    draws from a transition-law component
    cirjump simulate CONFIG [flags]    trajectory files plus a manifest
    cirjump verify   CONFIG --suite S  run a named verification suite

Flags override the scalars of the ``run``/``controls`` sections of the
configuration. Numeric CSV output uses 17 significant digits, so identical
configuration and seed reproduce byte-identical files. Exit codes: 0 on
success, 1 on a failed validation or verification, 2 on configuration or
usage errors. The environment variable ``CIRJUMP_THREADS`` sets the default
worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .coefficients import validate
from .config import RunConfig, load_config
from .errors import CirJumpError, ConfigError
from .jumps import atoms
from .kernels import get_kernels
from .numerics import RngStream
from .paths import branching_path, euler_path, exact_skeleton
from .samplers import get_sampler
from .suites import SUITES, run_suite

SCHEMA_VERSION = 1
COMPONENTS = ("K", "H", "I", "Itilde")


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _default_workers(args, cfg: RunConfig) -> int:
    if getattr(args, "workers", None) is not None:
        return args.workers
    if cfg.workers != 1:
        return cfg.workers
    return int(os.environ.get("CIRJUMP_THREADS", "1"))


def _override_run(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    for field, attr in (("s", "s"), ("t", "t"), ("y", "y"),
                        ("n_samples", "n"), ("seed", "seed")):
        v = getattr(args, attr, None)
        if v is not None:
            changes[field] = v
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    cfg = replace(cfg, **changes) if changes else cfg
    if not (0.0 <= cfg.s < cfg.t <= cfg.coeffs.t_max):
        raise ConfigError("need 0 <= s < t <= t_max")
    return cfg


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    nu = cfg.nu if cfg.nu is not None else atoms([])
    report = validate(cfg.coeffs, nu, raise_on_error=False)
    print(report)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"schema_version": SCHEMA_VERSION,
                                 **report.as_dict()}) + "\n")
    return 0 if report.all_ok else 1


def cmd_laplace(args) -> int:
    cfg = _override_run(load_config(args.config), args)
    lams = [float(x) for x in args.lambdas.split(",")] if args.lambdas \
        else list(cfg.lambda_grid)
    eng = get_kernels(cfg.coeffs, cfg.nu, tol=cfg.kernel_tol,
                      nu_tol=cfg.nu_tol)
    grid = np.asarray(lams, dtype=float)
    if args.component == "K":
        vals, errs = eng.laplace_K(cfg.s, cfg.t, cfg.y, grid)
    elif args.component == "H":
        vals, errs = eng.laplace_H(cfg.s, cfg.t, cfg.y, grid)
    elif args.component == "I":
        vals, errs = eng.laplace_I(cfg.s, cfg.t, grid)
    else:
        vals, errs = eng.laplace_Itilde(cfg.s, cfg.t, grid)
    errs = np.broadcast_to(np.asarray(errs, dtype=float), vals.shape)
    lines = ["lambda,value,error_estimate"]
    lines += [f"{_fmt(l)},{_fmt(v)},{_fmt(e)}"
              for l, v, e in zip(grid, vals, errs)]
    _write_lines(args.out, lines)
    return 0


def cmd_sample(args) -> int:
    cfg = _override_run(load_config(args.config), args)
    sampler = get_sampler(cfg.coeffs, cfg.nu, n_cells=cfg.n_cells,
                          delta=cfg.delta)
    g = RngStream(cfg.seed, 0).generator()
    n = cfg.n_samples
    draw = {"K": lambda: sampler.sample_k(g, cfg.s, cfg.t, cfg.y, size=n),
            "H": lambda: sampler.sample_h(g, cfg.s, cfg.t, cfg.y, size=n),
            "I": lambda: sampler.sample_i(g, cfg.s, cfg.t, size=n),
            "Itilde": lambda: sampler.sample_itilde(g, cfg.s, cfg.t, size=n),
            }[args.component]
    x = draw()
    lines = ["value"] + [_fmt(v) for v in x]
    var = x.var(ddof=1) if x.size > 1 else 0.0
    summary = (f"n={n} mean={_fmt(x.mean())} variance={_fmt(var)} "
               f"zero_fraction={_fmt(np.mean(x == 0.0))}")
    if args.out:
        _write_lines(args.out, lines)
        print(summary)
    else:
        _write_lines(None, lines)
        print(summary, file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    cfg = _override_run(load_config(args.config), args)
    step = args.step if args.step is not None else cfg.step
    n_steps = max(1, int(round((cfg.t - cfg.s) / step)))
    grid = np.linspace(cfg.s, cfg.t, n_steps + 1)
    os.makedirs(args.outdir, exist_ok=True)
    sampler = get_sampler(cfg.coeffs, cfg.nu, n_cells=cfg.n_cells,
                          delta=cfg.delta)
    files = []
    for i in range(args.n_paths):
        stream = RngStream(cfg.seed, i)
        g = stream.generator()
        info = (stream.seed, stream.stream_id)
        if args.scheme == "euler":
            path = euler_path(g, cfg.coeffs, cfg.nu, grid, delta=sampler.delta,
                              y0=cfg.y, seed_info=info)
        elif args.scheme == "exact_skeleton":
            path = exact_skeleton(g, cfg.coeffs, cfg.nu, grid,
                                  n_cells=cfg.n_cells, delta=sampler.delta,
                                  y0=cfg.y, seed_info=info)
        else:
            path = branching_path(g, cfg.coeffs, cfg.nu, cfg.s, cfg.t, cfg.y,
                                  delta=sampler.delta, grid=grid,
                                  n_cells=cfg.n_cells, seed_info=info)
        name = f"path_{i:04d}.csv"
        with open(os.path.join(args.outdir, name), "w", encoding="utf-8",
                  newline="") as fh:
            path.write_csv(fh)
        files.append(name)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "scheme": args.scheme,
        "seed": cfg.seed,
        "streams": [[cfg.seed, i] for i in range(args.n_paths)],
        "s": cfg.s, "t": cfg.t, "y": cfg.y, "step": step,
        "n_steps": n_steps, "n_paths": args.n_paths,
        "n_cells": cfg.n_cells, "delta": sampler.delta,
        "files": files,
    }
    with open(os.path.join(args.outdir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.n_paths} {args.scheme} path(s) to {args.outdir}")
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    cfg = replace(cfg, workers=_default_workers(args, cfg))
    report = run_suite(args.suite, cfg)
    for line in report.lines():
        print(line)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            for e in report.entries:
                fh.write(json.dumps({"schema_version": SCHEMA_VERSION,
                                     "suite": report.suite, **e}) + "\n")
            fh.write(json.dumps({"schema_version": SCHEMA_VERSION,
                                 "suite": report.suite,
                                 "passed": report.passed}) + "\n")
    return 0 if report.passed else 1


def _write_lines(out, lines) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cirjump", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, times=True):
        sp.add_argument("config", help="YAML run configuration")
        if times:
            sp.add_argument("--s", type=float, default=None)
            sp.add_argument("--t", type=float, default=None)
            sp.add_argument("--y", type=float, default=None)
            sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("validate", help="check model assumptions")
    sp.add_argument("config")
    sp.add_argument("--json", default=None, help="write the report as JSON")
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("laplace", help="evaluate transition transforms")
    common(sp)
    sp.add_argument("--component", choices=COMPONENTS, default="K")
    sp.add_argument("--lambdas", default=None,
                    help="comma-separated transform arguments")
    sp.add_argument("--out", default=None, help="CSV output path (default stdout)")
    sp.set_defaults(fn=cmd_laplace)

    sp = sub.add_parser("sample", help="draw from a transition law")
    common(sp)
    sp.add_argument("--component", choices=COMPONENTS, default="K")
    sp.add_argument("--n", type=int, default=None, help="number of draws")
    sp.add_argument("--out", default=None, help="CSV output path (default stdout)")
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("simulate", help="simulate trajectories")
    common(sp)
    sp.add_argument("--scheme", choices=("euler", "exact_skeleton", "branching"),
                    required=True)
    sp.add_argument("--step", type=float, default=None, help="grid step")
    sp.add_argument("--n-paths", type=int, default=1)
    sp.add_argument("--outdir", required=True)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("config")
    sp.add_argument("--suite", choices=sorted(SUITES), required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", "--workers", type=int, default=None,
                    dest="workers", help="worker cap for Monte Carlo batches")
    sp.add_argument("--json", default=None, help="write the report as JSON lines")
    sp.set_defaults(fn=cmd_verify)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CirJumpError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``liesym {transform,flow,sweep,verify}``.

Exit statuses: 0 success, 1 verification failure, 2 usage error, 3 domain
or flow error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import DomainError, FlowError, UsageError
from .flow import MIN_STEPS, FlowSpec, FlowState, integrate, parse_rate, smd_derivative_check
from .lie_core import MeasurementVector, apply, log_map, make_group
from .simulate import PAPER_SCALE_N, SweepConfig, run_sweep
from .svg import sweep_chart
from .verify import format_table, mc_scale, run_checks

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

SWEEP_FLAGS = ("n", "mu1", "sd1", "mu2", "sd2", "gamma", "k_start", "k_end", "k_step")


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(f"{self.prog}: {message}")


def manifest(command: str, config: dict, seed) -> dict:
    return {"command": command, "config": config, "seed": seed, "version": __version__}


def read_config_file(path) -> dict:
    """Flat ``key = value`` text; ``#`` starts a comment line.

    A JSON run manifest written by a previous command is also accepted; its
    ``config`` block is used, so any output can be regenerated from it.
    """
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON manifest ({exc})") from None
        config = dict(doc.get("config", {}))
        config.update(config.pop("initial", None) or {})
        return {k: v for k, v in config.items() if v is not None}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _positive_gamma(args):
    # a nonpositive scale is rejected as a flag error, before any computation
    if not args.gamma > 0:
        raise CliUsageError(f"--gamma: scale must be positive (got {args.gamma})")


def cmd_transform(args) -> int:
    _positive_gamma(args)
    g = make_group(args.gamma, args.omega)
    v = MeasurementVector(args.tau, args.sigma_e)
    out = apply(g, v)
    gen = log_map(g)
    report = {
        "group": {"gamma": g.gamma, "omega": g.omega},
        "input": {"tau": v.tau, "sigma_e": v.sigma_e, "anchor": v.anchor},
        "output": {"tau": out.tau, "sigma_e": out.sigma_e, "anchor": out.anchor},
        "generator": {"a": gen.a, "c": gen.c},
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


FLOW_DEFAULTS = {
    "gamma": 2.0,
    "omega": 0.0,
    "steps": 1000,
    "break_mean_rate": None,
    "break_var_rate": None,
    "mu1": 55.0,
    "mu2": 50.0,
    "tau_sd1": 10.0,
    "tau_sd2": 10.0,
    "error_sd1": 5.0,
    "error_sd2": 5.0,
    "n1": 1000,
    "n2": 1000,
}


def resolve_flow_args(args) -> None:
    """Fill unset flow flags: defaults < config file < flags."""
    from_file = read_config_file(args.config) if args.config else {}
    unknown = sorted(set(from_file) - set(FLOW_DEFAULTS) - {"kind"})
    if unknown:
        raise UsageError(f"unknown flow config keys: {', '.join(unknown)}")
    for key, default in FLOW_DEFAULTS.items():
        if getattr(args, key) is not None:
            continue
        value = from_file.get(key, default)
        if value is not None and key not in ("break_mean_rate", "break_var_rate"):
            try:
                value = int(value) if key in ("steps", "n1", "n2") else float(value)
            except (TypeError, ValueError):
                raise UsageError(f"{key}: not a number ({value!r})") from None
        setattr(args, key, value)


def cmd_flow(args) -> int:
    resolve_flow_args(args)
    _positive_gamma(args)
    if args.steps < MIN_STEPS:
        raise CliUsageError(f"--steps must be at least {MIN_STEPS} (got {args.steps})")
    overrides = {}
    if args.break_mean_rate:
        overrides["f2"] = parse_rate(args.break_mean_rate)
    if args.break_var_rate:
        overrides["g1"] = parse_rate(args.break_var_rate)
    spec = (
        FlowSpec.broken(args.gamma, args.omega, **overrides)
        if overrides
        else FlowSpec.symmetric(args.gamma, args.omega)
    )
    state = FlowState(
        args.mu1, args.mu2, args.tau_sd1, args.tau_sd2, args.error_sd1, args.error_sd2, args.n1, args.n2
    )
    trace = integrate(spec, state, args.steps)

    config = {
        "kind": spec.kind,
        "gamma": args.gamma,
        "omega": args.omega,
        "steps": args.steps,
        "break_mean_rate": overrides["f2"].describe() if "f2" in overrides else None,
        "break_var_rate": overrides["g1"].describe() if "g1" in overrides else None,
        "initial": {k: getattr(state, k) for k in ("mu1", "mu2", "tau_sd1", "tau_sd2", "error_sd1", "error_sd2", "n1", "n2")},
    }
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "flow.csv"
    trace.write_csv(csv_path)
    _write(out_dir / "flow.manifest.json", _dump(manifest("flow", config, args.seed)))

    summary = {
        "kind": spec.kind,
        "max_smd_drift": trace.max_smd_drift,
        "derivative_check": smd_derivative_check(trace),
        "smd_start": float(trace.smd[0]),
        "smd_end": float(trace.smd[-1]),
        "csv": str(csv_path),
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"kind              {summary['kind']}")
        print(f"max_smd_drift     {summary['max_smd_drift']:.6e}")
        print(f"derivative_check  {summary['derivative_check']:.6e}")
        print(f"trace             {csv_path}")
    return EXIT_OK


def resolve_sweep_config(args) -> SweepConfig:
    """Defaults < config file < flags."""
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    if args.paper_scale:
        values["n"] = PAPER_SCALE_N
    for name in SWEEP_FLAGS:
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag
    if args.seed is not None:
        values["seed"] = args.seed
    config = SweepConfig.from_mapping(values)
    problems = config.problems()
    if problems:
        raise UsageError("invalid sweep config: " + "; ".join(problems))
    return config


def cmd_sweep(args) -> int:
    config = resolve_sweep_config(args)
    result = run_sweep(config, workers=args.threads)
    run = manifest("sweep", config.to_dict(), config.seed)
    result.metadata["manifest"] = run

    out_dir = Path(args.out_dir)
    _write(out_dir / "sweep.csv", result.to_csv())
    _write(out_dir / "sweep.manifest.json", _dump(run))
    _write(out_dir / "sweep.json", result.to_json())
    written = ["sweep.csv", "sweep.json", "sweep.manifest.json"]
    if args.plot:
        _write(out_dir / "sweep.svg", sweep_chart(result, metadata=json.dumps(run, sort_keys=True)))
        written.append("sweep.svg")

    elapsed = result.metadata["elapsed_seconds"]
    if args.json:
        print(json.dumps({
            "baseline": result.baseline,
            "rows": len(result.rows),
            "max_deviation": float(result.deviations.max()),
            "files": [str(out_dir / f) for f in written],
            "elapsed_seconds": elapsed,
        }, indent=2))
    else:
        print(f"baseline SMD  {result.baseline!r}")
        print(f"{'k':>8}  {'smd_broken':>14}  {'deviation':>12}")
        for r in result.rows:
            print(f"{r.k:>8.3f}  {r.smd_broken:>14.8f}  {r.deviation:>12.4e}")
        print(f"wrote {', '.join(written)} to {out_dir} in {elapsed:.2f}s")
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = 0 if args.seed is None else args.seed
    checks = run_checks(n=args.n, seed=seed)
    ok = all(c.passed for c in checks)
    if args.json:
        print(json.dumps({
            "n": args.n,
            "seed": seed,
            "tolerance_scale": mc_scale(args.n),
            "checks": [
                {"name": c.name, "measured": c.measured, "tolerance": c.tolerance, "passed": c.passed}
                for c in checks
            ],
            "passed": ok,
        }, indent=2))
    else:
        print(format_table(checks))
        print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master RNG seed")
    common.add_argument("--json", action="store_true", help="machine-readable output and errors")
    common.add_argument("--out-dir", default=".", help="directory for output files")

    parser = _Parser(prog="liesym", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"liesym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transform", parents=[common], help="apply a group element to a measurement vector")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--sigma-e", type=float, default=0.0)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("flow", parents=[common], help="integrate a (possibly broken) transformation flow")
    p.add_argument("--config", help="flat key = value config file or a flow manifest")
    p.add_argument("--gamma", type=float, help="scale of the target element (default 2)")
    p.add_argument("--omega", type=float, help="translation of the target element (default 0)")
    p.add_argument("--steps", type=int, help=f"RK4 steps on [0, 1] (default 1000, minimum {MIN_STEPS})")
    p.add_argument("--break-mean-rate", metavar="RATE", help="override P2's mean rate, e.g. constant:0.5")
    p.add_argument("--break-var-rate", metavar="RATE", help="override P1's error-SD rate, e.g. constant:1.5")
    for name in ("mu1", "mu2", "tau_sd1", "tau_sd2", "error_sd1", "error_sd2"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("sweep", parents=[common], help="run the k-exponent symmetry-breaking sweep")
    p.add_argument("--config", help="flat key = value config file or a sweep manifest")
    p.add_argument("--n", type=int)
    p.add_argument("--paper-scale", action="store_true", help=f"use n = {PAPER_SCALE_N}")
    for name in SWEEP_FLAGS[1:]:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    p.add_argument("--threads", type=int, default=1, help="threads for grid evaluation")
    p.add_argument("--plot", action="store_true", help="also write sweep.svg")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run the cross-module property suite")
    p.add_argument("--n", type=int, default=100_000, help="Monte Carlo sample size")
    p.set_defaults(func=cmd_verify)
    return parser


def _report_error(kind: str, message: str, as_json: bool) -> None:
    if as_json:
        print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    as_json = "--json" in argv
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (CliUsageError, UsageError) as exc:
        _report_error("usage", str(exc), as_json)
        return EXIT_USAGE
    except (DomainError, FlowError) as exc:
        _report_error("flow" if isinstance(exc, FlowError) else "domain", str(exc), as_json)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

    contact-bar simulate [--config FILE] [--out FILE] [key=value ...]
    contact-bar compare-mods | temporal-order | spatial-refine | oracle-dump
    contact-bar validate

Exit codes: 0 success, 1 acceptance failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import tempfile
from typing import Iterable

import numpy as np

from . import benchmark as bm
from .assembly import Mode
from .contact import EnergyLedger
from .experiments import (
    OUTPUTS,
    ScenarioConfig,
    compare_mods,
    run_scenario,
    spatial_refinement_study,
    temporal_order_study,
)
from .integrators import ConfigurationError

CSV_HEADER = "t,u0,u1,lambda,energy,denergy"

_FIELDS = {
    "scheme": str,
    "beta": float,
    "gamma": float,
    "e": float,
    "mod": str,
    "m": int,
    "dt": float,
    "T": float,
    "outputs": str,
}


class ConfigError(ValueError):
    pass


def _coerce(key, raw, lineno):
    try:
        if key == "outputs":
            return frozenset(p.strip() for p in raw.split(",") if p.strip())
        if key == "mod":
            return Mode.parse(raw)
        return _FIELDS[key](raw)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {exc}") from None


def parse_pairs(lines: Iterable[str], start: int = 1) -> dict:
    values = {}
    for lineno, line in enumerate(lines, start):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"line {lineno}: expected key=value, got {line.strip()!r}")
        key, raw = (p.strip() for p in text.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if not raw:
            raise ConfigError(f"line {lineno}: missing value for {key!r}")
        values[key] = _coerce(key, raw, lineno)
    return values


def build_config(values: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> ScenarioConfig:
    """Flat ``key=value`` format, one pair per line, ``#`` comments."""
    return build_config(parse_pairs(text.splitlines()))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_rows(t, u0, u1, lam, energy) -> str:
    denergy = np.concatenate([[0.0], np.diff(energy)])
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for row in zip(t, u0, u1, lam, energy, denergy):
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
        with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_csv(traj, ledger: EnergyLedger, path: str):
    """Write ``t,u0,u1,lambda,energy,denergy``; ``denergy[n] = E[n] - E[n-1]``."""
    write_atomic(path, csv_rows(traj.t, traj.u0, traj.u1, traj.lam, ledger.E))


def read_csv(path: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        return np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])


def _emit(text: str, out):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _load_config(args) -> ScenarioConfig:
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(parse_pairs(fh.read().splitlines()))
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from None
    values.update(parse_pairs(args.overrides))
    return build_config(values)


def cmd_simulate(args):
    config = _load_config(args)
    traj, ledger, report = run_scenario(config)
    if "trajectory" in config.outputs or "energy" in config.outputs:
        _emit(csv_rows(traj.t, traj.u0, traj.u1, traj.lam, ledger.E), args.out)
    if "errors" in config.outputs:
        print(
            "# linf_l2_displacement={} l2_contact_displacement={} "
            "l2_multiplier={} energy_drift={}".format(
                *(_fmt(v) for v in (
                    report.linf_l2_displacement,
                    report.l2_contact_displacement,
                    report.l2_multiplier,
                    report.energy_drift,
                ))
            ),
            file=sys.stderr,
        )
    return 0


def cmd_compare_mods(args):
    base = _load_config(args)
    reports = compare_mods(base)
    lines = ["mod,linf_l2_displacement,l2_contact_displacement,l2_multiplier,energy_drift"]
    for mod, r in reports.items():
        lines.append(",".join([mod.value[-1]] + [_fmt(v) for v in (
            r.linf_l2_displacement, r.l2_contact_displacement, r.l2_multiplier, r.energy_drift
        )]))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_temporal_order(args):
    pairs, slope = temporal_order_study(m=args.m)
    lines = ["dt,error"] + [f"{_fmt(dt)},{_fmt(err)}" for dt, err in pairs]
    _emit("\n".join(lines) + "\n", args.out)
    print(f"# slope={_fmt(slope)}", file=sys.stderr)
    return 0


def cmd_spatial_refine(args):
    rows = spatial_refinement_study(dt=args.dt)
    lines = ["m,linf_l2_error"] + [f"{m},{_fmt(err)}" for m, err in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_oracle_dump(args):
    config = _load_config(args)
    n = config.nsteps
    t = np.arange(n + 1) * config.dt
    h = 1.0 / config.m
    # same 1/2 scaling as the discrete energies in simulate output
    energy = np.full(t.shape, 0.5 * bm.exact_energy())
    text = csv_rows(
        t, bm.exact_displacement(0.0, t), bm.exact_displacement(h, t), bm.exact_multiplier(t), energy
    )
    _emit(text, args.out)
    return 0


def cmd_validate(args):
    from .acceptance import run_all

    results = run_all()
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contact-bar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    def scenario(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--out", help="output CSV (default: stdout)")
        p.add_argument("overrides", nargs="*", help="key=value overrides")
        p.set_defaults(func=func)
        return p

    scenario("simulate", cmd_simulate, "run one benchmark scenario")
    scenario("compare-mods", cmd_compare_mods, "error summary for mod 1/2/3")
    scenario("oracle-dump", cmd_oracle_dump, "exact solution in the simulate CSV layout")

    p = sub.add_parser("temporal-order", help="semi-discrete Crank-Nicolson order study")
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_temporal_order)

    p = sub.add_parser("spatial-refine", help="hybrid/mod 3 error for m = 6, 12, 24")
    p.add_argument("--dt", type=float, default=1 / 800)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spatial_refine)

    p = sub.add_parser("validate", help="run the acceptance criteria")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError) as exc:
        print(f"contact-bar: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"contact-bar: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

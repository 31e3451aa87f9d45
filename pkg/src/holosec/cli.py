"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 infeasible scenario,
4 validation or oracle check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import replace
from fractions import Fraction

import numpy as np

from holosec import __version__
from holosec.beamforming import DegenerateChannel, InfeasibleNullSpace
from holosec.experiments import (
    CSV_COLUMNS,
    CSV_VERSION,
    ConfigError,
    ScenarioConfig,
    heatmap_config,
    rows_to_csv,
    run_csi_sweep,
    run_eve_sweep,
    run_heatmap,
    run_snr_sweep,
    run_spacing_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_CHECK_FAILED = 4

SUBCOMMANDS = ("snr-sweep", "spacing-sweep", "csi-sweep", "eve-sweep", "heatmap", "oracle-compare", "validate")


def _number(text: str, flag: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{flag}: cannot parse {text!r} as a number") from None


def parse_list(text: str, flag: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (inclusive stop)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{flag}: ranges are written start:stop:step, got {text!r}")
        start, stop, step = (_number(p, flag) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"{flag}: range {text!r} is empty or has a nonpositive step")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]
    return [_number(p, flag) for p in text.split(",") if p.strip()]


def parse_sizes(text: str, flag: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        try:
            nx, ny = (int(v) for v in item.lower().split("x"))
        except ValueError:
            raise ConfigError(f"{flag}: sizes are written NxM, got {item!r}") from None
        out.append((nx, ny))
    return out


_VALUE_FLAGS = ("--snr", "--delta", "--xi", "--x-range", "--y-range")


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse mistakes "-10:20:5" or "-30,40" for an option; glue it to its flag.
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holosec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"holosec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file (flat keys; flags override it)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials (or problems for oracle-compare)")
    common.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    common.add_argument("--pa", help="proposed | fixed=<frac> | both")
    common.add_argument("--snr", help="SNR grid in dB: a,b,c or start:stop:step")
    common.add_argument("--delta", help="element spacing in wavelengths (list for spacing-sweep)")
    common.add_argument("--xi", help="CSI error level (list for csi-sweep)")

    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "eve-sweep":
            p.add_argument("--eve-sizes", default="6x6,10x10,16x16", help="Eve arrays (default: %(default)s)")
        if name == "heatmap":
            p.add_argument("--x-range", default="30,70", help="Eve x range in meters (default: %(default)s)")
            p.add_argument("--y-range", default="-30,40", help="Eve y range in meters (default: %(default)s)")
            p.add_argument("--resolution", type=int, default=8, help="grid points per axis (default: %(default)s)")
        if name == "oracle-compare":
            p.add_argument("--step", type=float, default=0.02, help="grid step as a fraction of P_T")
    return parser


def load_config(path: str | None, base: ScenarioConfig | None = None) -> ScenarioConfig:
    base = base or ScenarioConfig()
    if not path:
        return base
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path!r} is not valid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path!r} must hold a JSON object")
    merged = base.to_dict()
    merged.update(data)
    return ScenarioConfig.from_dict(merged)


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    base = heatmap_config() if args.command == "heatmap" else ScenarioConfig()
    cfg = load_config(args.config, base)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.pa is not None:
        updates["pa"] = args.pa
    if args.snr is not None:
        updates["snr_db"] = tuple(parse_list(args.snr, "--snr"))
    if args.delta is not None and args.command != "spacing-sweep":
        vals = parse_list(args.delta, "--delta")
        if len(vals) != 1:
            raise ConfigError(f"--delta: expected one value for {args.command}, got {args.delta!r}")
        updates["spacing"] = vals[0]
    if args.xi is not None and args.command != "csi-sweep":
        vals = parse_list(args.xi, "--xi")
        if len(vals) != 1:
            raise ConfigError(f"--xi: expected one value for {args.command}, got {args.xi!r}")
        updates["xi"] = vals[0]
    if not updates:
        return cfg
    merged = cfg.to_dict()
    merged.update(updates)
    return ScenarioConfig.from_dict(merged)


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_outputs(out_dir: str, name: str, body: str, manifest: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    _atomic_write(csv_path, body)
    manifest["outputs"] = [csv_path]
    _atomic_write(os.path.join(out_dir, f"{name}.manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return csv_path


def _run_experiment(args, cfg: ScenarioConfig) -> str:
    cmd = args.command
    if cmd == "snr-sweep":
        rows = run_snr_sweep(cfg)
    elif cmd == "spacing-sweep":
        deltas = parse_list(args.delta, "--delta") if args.delta else [0.125, 0.25, 0.5]
        rows = run_spacing_sweep(cfg, deltas)
    elif cmd == "csi-sweep":
        xis = parse_list(args.xi, "--xi") if args.xi else [0.0, 0.1, 0.2]
        rows = run_csi_sweep(cfg, xis)
    elif cmd == "eve-sweep":
        rows = run_eve_sweep(cfg, parse_sizes(args.eve_sizes, "--eve-sizes"))
    elif cmd == "heatmap":
        xr = parse_list(args.x_range, "--x-range")
        yr = parse_list(args.y_range, "--y-range")
        if len(xr) != 2 or len(yr) != 2:
            raise ConfigError("--x-range/--y-range: expected two values lo,hi")
        if args.resolution < 1:
            raise ConfigError(f"--resolution must be positive, got {args.resolution}")
        rows = run_heatmap(cfg, tuple(xr), tuple(yr), args.resolution)
    else:
        raise ConfigError(f"unknown command {cmd!r}")
    return rows_to_csv(rows)


def _validate(args) -> tuple[str, bool]:
    from holosec.validation import run_all

    checks = run_all()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "passed", "detail"])
    for c in checks:
        w.writerow([c.name, c.passed, c.detail])
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return buf.getvalue(), all(c.passed for c in checks)


def _oracle(args) -> tuple[str, bool]:
    from holosec.oracle import compare, dominance_fraction

    n = args.trials if args.trials is not None else 50
    if n < 1:
        raise ConfigError(f"--trials must be positive, got {n}")
    pairs = compare(n, seed=args.seed or 0, step=args.step)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["problem", "sca_min_secrecy", "grid_min_secrecy", "within_95pct"])
    for p in pairs:
        w.writerow([p.index, repr(p.sca_min_secrecy), repr(p.grid_min_secrecy), p.ratio_ok])
    frac = dominance_fraction(pairs)
    print(f"SCA >= 0.95 x grid optimum on {frac:.0%} of {n} problems")
    return buf.getvalue(), frac >= 0.9


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    raw = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_join_negative_values(raw))
    t0 = time.time()
    manifest = {
        "subcommand": args.command,
        "argv": raw,
        "version": __version__,
        "csv_version": CSV_VERSION,
    }
    name = args.command.replace("-", "_")
    try:
        if args.command == "validate":
            body, ok = _validate(args)
            manifest["seed"] = 0
        elif args.command == "oracle-compare":
            body, ok = _oracle(args)
            manifest["seed"] = args.seed or 0
        else:
            cfg = resolve_config(args)
            manifest["config"] = cfg.to_dict()
            manifest["seed"] = cfg.seed
            manifest["csv_columns"] = CSV_COLUMNS
            body, ok = _run_experiment(args, cfg), True
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleNullSpace, DegenerateChannel) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    manifest["duration_s"] = round(time.time() - t0, 3)
    path = _write_outputs(args.out, name, body, manifest)
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

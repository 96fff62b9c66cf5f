"""Command-line driver: ``qmmofdm {simulate,compare,bound,table,constellation}``.

Exit status is 0 on success, 2 for configuration errors and 3 when a
request exceeds an enumeration guard rail.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from contextlib import contextmanager

import numpy as np

from .analysis import union_bound
from .constellation import build_modes
from .errors import ConfigurationError, GuardRailError, QmmError
from .index_code import generate_codebook, int_to_bits
from .simulation import (
    DETECTORS,
    ROSTERS,
    SCHEMES,
    SweepConfig,
    build_scheme,
    emit_plot_data,
    parse_grid,
    roster,
    run_compare,
    run_sweep,
    write_records,
)

log = logging.getLogger("qmmofdm")

EXIT_CONFIG = 2
EXIT_GUARD = 3


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def parse_curve(text: str) -> dict:
    """``scheme=qmm,q=4,n=4,m=2,detector=ml`` -> dict."""
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigurationError(f"bad curve option {item!r}; use key=value")
        k, v = item.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p.add_argument("--config", default=None, help="key = value file; flags take precedence")


def _add_scheme(p: argparse.ArgumentParser, detector: bool = True) -> None:
    p.add_argument("--scheme", choices=SCHEMES, default="qmm")
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--ka", type=int, default=3, help="active subcarriers (ofdmim)")
    p.add_argument("--family", choices=("psk", "qam"), default="psk")
    if detector:
        p.add_argument("--detector", choices=DETECTORS, default="ml")


def _add_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--snr-db", default="0:40:5", help="start:stop:step or comma list")
    p.add_argument("--min-bit-errors", type=int, default=500)
    p.add_argument("--max-bits", type=int, default=10**9)
    p.add_argument("--batch-blocks", type=int, default=4096)
    p.add_argument("--plot-out", default=None, help="also write scheme,detector,snr_db,ber")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmmofdm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.commands = {}

    p = sub.add_parser("simulate", help="Monte Carlo BER sweep for one scheme")
    _add_scheme(p)
    _add_budget(p)
    _add_common(p)
    parser.commands["simulate"] = p

    p = sub.add_parser("compare", help="several sweeps merged into one CSV")
    p.add_argument("--curve", action="append", default=[], help="scheme=qmm,q=4,n=4,m=2,detector=ml")
    p.add_argument("--roster", choices=sorted(ROSTERS), default=None)
    _add_budget(p)
    _add_common(p)
    parser.commands["compare"] = p

    p = sub.add_parser("bound", help="union bound on BER")
    _add_scheme(p, detector=False)
    p.add_argument("--snr-db", default="0:40:5")
    p.add_argument("--method", choices=("approx", "exact"), default="approx")
    _add_common(p)
    parser.commands["bound"] = p

    p = sub.add_parser("table", help="index codebook lookup table")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--n", type=int, default=3)
    _add_common(p)
    parser.commands["table"] = p

    p = sub.add_parser("constellation", help="dump mode constellation points")
    p.add_argument("--family", choices=("psk", "qam"), default="psk")
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--m", type=int, default=2)
    _add_common(p)
    parser.commands["constellation"] = p
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # defaults come from the file, explicit flags still win; argparse
        # runs string defaults through each option's type converter
        sub = parser.commands[args.command]
        file_values = read_config_file(args.config)
        known = {a.dest for a in sub._actions}
        unknown = set(file_values) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**file_values)
        args = parser.parse_args(argv)
    return args


def _sweep_options(args) -> dict:
    return dict(
        snr_db=parse_grid(args.snr_db),
        seed=args.seed,
        workers=args.workers,
        min_bit_errors=args.min_bit_errors,
        max_bits=args.max_bits,
        batch_blocks=args.batch_blocks,
    )


def _progress(rec) -> None:
    log.info(
        "%s %s %.2f dB: %d/%d errors, BER %.3e (%.1fs)",
        rec.scheme, rec.detector, rec.snr_db, rec.bit_errors, rec.bits_simulated, rec.ber, rec.wall_seconds,
    )


def cmd_simulate(args) -> None:
    cfg = SweepConfig(
        scheme=args.scheme, q=args.q, n=args.n, m=args.m, ka=args.ka,
        family=args.family, detector=args.detector, **_sweep_options(args),
    )
    records = run_sweep(cfg, _progress)
    with _output(args.out) as fh:
        write_records(records, fh)
    if args.plot_out:
        emit_plot_data(records, args.plot_out)


def cmd_compare(args) -> None:
    common = _sweep_options(args)
    configs = roster(args.roster, **common) if args.roster else []
    configs += [SweepConfig.from_mapping({**common, **parse_curve(c)}) for c in args.curve]
    records = run_compare(configs, _progress)
    with _output(args.out) as fh:
        write_records(records, fh)
    if args.plot_out and records:
        emit_plot_data(records, args.plot_out)


def cmd_bound(args) -> None:
    cfg = SweepConfig(scheme=args.scheme, q=args.q, n=args.n, m=args.m, ka=args.ka, family=args.family)
    scheme = build_scheme(cfg)
    grid = parse_grid(args.snr_db)
    values = union_bound(scheme, 10 ** (np.asarray(grid) / 10), method=args.method)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["snr_db", "union_bound"])
        for s, v in zip(grid, values):
            w.writerow([repr(float(s)), repr(float(v))])


def cmd_table(args) -> None:
    cb = generate_codebook(args.q, args.n)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "bits", "codeword", "used"])
        for r in range(cb.size):
            used = r < cb.used_count
            bits = "".join(map(str, int_to_bits(r, cb.f1))) if used else ""
            w.writerow([r, bits, " ".join(map(str, cb.unrank(r))), int(used)])


def cmd_constellation(args) -> None:
    ms = build_modes(args.family, args.q, args.m)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode", "index", "re", "im"])
        for q in range(ms.Q):
            for k, z in enumerate(ms.modes[q]):
                w.writerow([q, k, repr(float(z.real)), repr(float(z.imag))])


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "bound": cmd_bound,
    "table": cmd_table,
    "constellation": cmd_constellation,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ConfigurationError as exc:
        print(f"qmmofdm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except GuardRailError as exc:
        print(f"qmmofdm: guard rail: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigurationError, ValueError, QmmError) as exc:
        print(f"qmmofdm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())

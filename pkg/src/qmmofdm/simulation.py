"""Monte Carlo BER sweeps and their CSV formats.

Each SNR point is simulated in fixed-size batches. Batch ``k`` at SNR ``s``
draws its payload bits, fading and noise from streams seeded by
``(seed, tag(s), k, purpose)``, and batches are accumulated strictly in
index order until the error target or the bit budget is reached. Batches
may be computed by a process pool, but the accumulated totals never depend
on the number of workers.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import baselines
from .analysis import union_bound
from .channel import BITS, CHANNEL, NOISE, NoiseParams, apply_channel, draw_channel, substream
from .errors import ConfigurationError
from .modem import QmmScheme

SCHEMES = ("qmm", "ofdm", "ofdmim", "mmofdmim")
DETECTORS = ("ml", "lcml", "bound")
RECORD_HEADER = ("scheme", "detector", "snr_db", "bits_simulated", "bit_errors", "ber", "unconverged")
PLOT_HEADER = ("scheme", "detector", "snr_db", "ber")


@dataclass(frozen=True)
class SweepConfig:
    scheme: str = "qmm"
    q: int = 4
    n: int = 4
    m: int = 2
    ka: int = 3
    family: str = "psk"
    detector: str = "ml"
    snr_db: tuple[float, ...] = tuple(float(s) for s in range(0, 41, 5))
    seed: int = 0
    min_bit_errors: int = 500
    max_bits: int = 10**9
    workers: int = 1
    batch_blocks: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.detector not in DETECTORS:
            raise ConfigurationError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.detector == "lcml" and self.scheme != "qmm":
            raise ConfigurationError("the lcml detector applies to the qmm scheme only")
        grid = np.asarray(self.snr_db)
        if grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ConfigurationError("SNR grid must be nonempty and strictly increasing")
        if self.min_bit_errors < 1 or self.max_bits < 1 or self.batch_blocks < 1:
            raise ConfigurationError("min_bit_errors, max_bits and batch_blocks must be positive")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")

    @classmethod
    def from_mapping(cls, values: dict) -> SweepConfig:
        """Build from loosely typed key/value pairs (config files, --curve specs)."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigurationError(f"unknown sweep option {key!r}")
            if key == "snr_db":
                kwargs[key] = parse_grid(raw) if isinstance(raw, str) else tuple(raw)
            elif key in ("scheme", "family", "detector"):
                kwargs[key] = str(raw).lower()
            else:
                kwargs[key] = int(float(raw)) if isinstance(raw, str) else int(raw)
        return cls(**kwargs)


def parse_grid(text: str) -> tuple[float, ...]:
    """``"a:b:step"`` (inclusive of b) or a comma list of values."""
    text = text.strip()
    if ":" in text:
        parts = [float(t) for t in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigurationError(f"bad SNR range {text!r}; use start:stop:step")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(max(count, 0)))
    return tuple(float(t) for t in text.split(",") if t.strip())


def build_scheme(cfg: SweepConfig):
    if cfg.scheme == "qmm":
        return QmmScheme.build(cfg.q, cfg.n, cfg.m, cfg.family)
    if cfg.scheme == "ofdm":
        return baselines.ofdm_scheme(cfg.n, cfg.m, cfg.family)
    if cfg.scheme == "ofdmim":
        return baselines.ofdmim_scheme(baselines.OfdmImParams(cfg.n, cfg.ka, cfg.m))
    return baselines.mmofdmim_scheme(baselines.MmOfdmImParams(cfg.n, cfg.m))


@dataclass
class BerRecord:
    scheme: str
    detector: str
    snr_db: float
    bits_simulated: int
    bit_errors: int
    ber: float
    wall_seconds: float = 0.0
    unconverged: bool = False

    def row(self) -> list:
        return [
            self.scheme,
            self.detector,
            repr(float(self.snr_db)),
            self.bits_simulated,
            self.bit_errors,
            repr(float(self.ber)),
            int(self.unconverged),
        ]


def _snr_tag(snr_db: float) -> int:
    return int(round(snr_db * 1000)) % 2**32


def simulate_batch(scheme, detector: str, snr_db: float, seed: int, batch: int, blocks: int):
    """Simulate ``blocks`` blocks; returns (bits sent, bit errors)."""
    tag = _snr_tag(snr_db)
    bits = substream(seed, tag, batch, BITS).integers(0, 2, size=(blocks, scheme.f), dtype=np.uint8)
    h = draw_channel((blocks, scheme.N), substream(seed, tag, batch, CHANNEL))
    s = scheme.encode(bits).symbols
    noise = NoiseParams.from_snr_db(snr_db)
    y = apply_channel(s, h, noise, substream(seed, tag, batch, NOISE))
    out = scheme.detect(y, h, noise.es, detector)
    return bits.size, int(np.count_nonzero(out.bits != bits))


def _run_point(cfg: SweepConfig, scheme, snr_db: float, pool) -> BerRecord:
    t0 = time.perf_counter()
    cap_blocks = max(1, cfg.max_bits // scheme.f)
    sent = errors = 0
    done_blocks = 0
    k = 0
    while errors < cfg.min_bit_errors and done_blocks < cap_blocks:
        sizes = []
        for j in range(cfg.workers):
            start = (k + j) * cfg.batch_blocks
            if start >= cap_blocks:
                break
            sizes.append(min(cfg.batch_blocks, cap_blocks - start))
        args = [(scheme, cfg.detector, snr_db, cfg.seed, k + j, b) for j, b in enumerate(sizes)]
        if pool is None:
            results = [simulate_batch(*a) for a in args]
        else:
            results = list(pool.map(simulate_batch, *zip(*args)))
        for b, (nbits, nerr) in zip(sizes, results):
            sent += nbits
            errors += nerr
            done_blocks += b
            if errors >= cfg.min_bit_errors:
                break
        k += len(sizes)
    return BerRecord(
        scheme=scheme.name,
        detector=cfg.detector,
        snr_db=snr_db,
        bits_simulated=sent,
        bit_errors=errors,
        ber=errors / sent,
        wall_seconds=time.perf_counter() - t0,
        unconverged=errors < cfg.min_bit_errors,
    )


def run_sweep(cfg: SweepConfig, progress=None) -> list[BerRecord]:
    scheme = build_scheme(cfg)
    if cfg.detector == "bound":
        t0 = time.perf_counter()
        values = union_bound(scheme, 10 ** (np.asarray(cfg.snr_db) / 10))
        wall = time.perf_counter() - t0
        return [BerRecord(scheme.name, "bound", s, 0, 0, float(v), wall) for s, v in zip(cfg.snr_db, values)]
    records = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for snr in cfg.snr_db:
            rec = _run_point(cfg, scheme, snr, pool)
            records.append(rec)
            if progress is not None:
                progress(rec)
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def run_compare(configs, progress=None) -> list[BerRecord]:
    merged: dict[tuple, BerRecord] = {}
    for cfg in configs:
        for rec in run_sweep(cfg, progress):
            merged[(rec.scheme, rec.detector, rec.snr_db)] = rec
    return list(merged.values())


def write_records(records, path_or_file) -> None:
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        for rec in records:
            w.writerow(rec.row())

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def read_records(path) -> list[BerRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            BerRecord(
                scheme=r["scheme"],
                detector=r["detector"],
                snr_db=float(r["snr_db"]),
                bits_simulated=int(r["bits_simulated"]),
                bit_errors=int(r["bit_errors"]),
                ber=float(r["ber"]),
                unconverged=bool(int(r["unconverged"])),
            )
            for r in reader
        ]


def emit_plot_data(records, path) -> None:
    """Write ``scheme,detector,snr_db,ber`` rows sorted by scheme then SNR."""
    records = list(records)
    if not records:
        raise ConfigurationError("no records to write")
    ordered = sorted(records, key=lambda r: (r.scheme, r.snr_db, r.detector))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLOT_HEADER)
        for r in ordered:
            w.writerow([r.scheme, r.detector, f"{r.snr_db:.5e}", f"{r.ber:.5e}"])


def read_plot_data(path) -> list[tuple[str, str, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != PLOT_HEADER:
            raise ConfigurationError(f"unexpected header {header}")
        return [(s, d, float(x), float(b)) for s, d, x, b in reader]


ROSTERS = {
    "fig1": [
        dict(scheme="qmm", q=4, n=4, m=2, family="psk", detector="ml"),
        dict(scheme="qmm", q=8, n=4, m=1, family="psk", detector="ml"),
        dict(scheme="mmofdmim", n=4, m=2, detector="ml"),
        dict(scheme="ofdmim", n=4, ka=3, m=4, detector="ml"),
        dict(scheme="ofdm", n=4, m=4, detector="ml"),
    ],
    "fig2": [
        dict(scheme="qmm", q=q, n=4, m=m, family="psk", detector=det)
        for q, m in ((8, 2), (4, 2), (8, 1))
        for det in ("ml", "lcml", "bound")
    ],
    "fig3": [
        dict(scheme="qmm", q=8, n=4, m=2, family="qam", detector="lcml"),
        dict(scheme="qmm", q=8, n=4, m=2, family="psk", detector="lcml"),
        dict(scheme="qmm", q=16, n=4, m=1, family="qam", detector="lcml"),
        dict(scheme="mmofdmim", n=4, m=4, detector="ml"),
        dict(scheme="ofdmim", n=4, ka=3, m=8, detector="ml"),
        dict(scheme="ofdm", n=4, m=8, detector="ml"),
    ],
}


def roster(name: str, **common) -> list[SweepConfig]:
    if name not in ROSTERS:
        raise ConfigurationError(f"unknown roster {name!r}; choose from {sorted(ROSTERS)}")
    return [SweepConfig.from_mapping({**common, **entry}) for entry in ROSTERS[name]]

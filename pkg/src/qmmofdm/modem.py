"""Block mapping and detection for Q-MM-OFDM-IM and related block schemes.

A block of N subcarriers is described by a *pattern* (one mode id per
subcarrier, chosen by the f1 index bits) and one symbol per subcarrier drawn
from that subcarrier's mode alphabet (chosen by the remaining f2 bits).
:class:`BlockScheme` captures this for any scheme in the family, so the same
encoder and exhaustive ML detector serve Q-MM-OFDM-IM, plain OFDM, OFDM-IM
and permutation MM-OFDM-IM.

All encode/detect functions accept a single block (shape ``(N,)``) or a
batch (shape ``(B, N)``); bit vectors are ``uint8`` arrays of shape
``(f,)`` or ``(B, f)``, MSB first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .constellation import ModeSet, build_modes
from .errors import ConfigurationError, EmptyFrame, LengthMismatch, SearchSpaceTooLarge
from .index_code import IndexCodebook, generate_codebook, index_bits, nearest_used_rank

ML_MAX_BITS = 24
# bound on the (blocks x candidate patterns) metric matrix held at once
_METRIC_CELLS = 2**22
_SELECTOR_CELLS = 2**24


def _log2(x: int) -> int:
    if x < 1 or x & (x - 1):
        raise ConfigurationError(f"{x} is not a power of two")
    return x.bit_length() - 1


def bits_to_ints(bits: np.ndarray) -> np.ndarray:
    """Rows of MSB-first bits to unsigned integers."""
    bits = np.asarray(bits, dtype=np.int64)
    width = bits.shape[-1]
    weights = np.left_shift(1, np.arange(width - 1, -1, -1, dtype=np.int64))
    return bits @ weights if width else np.zeros(bits.shape[:-1], dtype=np.int64)


def ints_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def _as_batch(x: np.ndarray, width: int, what: str) -> tuple[np.ndarray, bool]:
    x = np.asarray(x)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != width:
        raise LengthMismatch(f"{what}: expected last dimension {width}, got shape {x.shape}")
    return x, single


@dataclass(frozen=True)
class BlockSymbols:
    symbols: np.ndarray
    modes: np.ndarray


@dataclass(frozen=True)
class DetectionResult:
    modes: np.ndarray
    symbols: np.ndarray
    bits: np.ndarray
    comparisons: int | None = None


@dataclass(frozen=True, eq=False)
class BlockScheme:
    """Table-driven description of one block-based index-modulation scheme.

    ``alphabet[m, v]`` is the point with bit label ``v`` in mode ``m``; rows
    shorter than the widest mode are padded and masked via ``sizes``.
    ``patterns[r]`` is the per-subcarrier mode assignment addressed by index
    bits ``r``.
    """

    name: str
    alphabet: np.ndarray
    sizes: np.ndarray
    patterns: np.ndarray
    f1: int

    def __post_init__(self):
        patterns = np.asarray(self.patterns, dtype=np.int64)
        if patterns.ndim != 2 or len(patterns) != 1 << self.f1:
            raise ConfigurationError("need exactly 2**f1 patterns")
        widths = np.array([_log2(int(s)) for s in self.sizes])
        per_pattern = widths[patterns].sum(axis=1)
        if np.any(per_pattern != per_pattern[0]):
            raise ConfigurationError("all patterns must carry the same number of symbol bits")
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(
            self, "valid", np.arange(self.alphabet.shape[1])[None, :] < self.sizes[:, None]
        )

    @property
    def N(self) -> int:
        return self.patterns.shape[1]

    @cached_property
    def selector(self) -> np.ndarray | None:
        """One-hot (N*modes, patterns) matrix, or None when too large to hold."""
        n_modes = len(self.sizes)
        if self.N * n_modes * len(self.patterns) > _SELECTOR_CELLS:
            return None
        selector = np.zeros((self.N * n_modes, len(self.patterns)))
        cols = np.arange(len(self.patterns))
        for n in range(self.N):
            selector[n * n_modes + self.patterns[:, n], cols] = 1.0
        return selector

    @property
    def f2(self) -> int:
        return int(self.widths[self.patterns[0]].sum())

    @property
    def f(self) -> int:
        return self.f1 + self.f2

    def average_energy(self) -> float:
        """Mean |s|^2 over all equiprobable transmittable blocks."""
        energy = np.array(
            [np.mean(np.abs(self.alphabet[m, : self.sizes[m]]) ** 2) for m in range(len(self.sizes))]
        )
        return float(energy[self.patterns].mean())

    def encode(self, bits) -> BlockSymbols:
        bits, single = _as_batch(bits, self.f, "bits")
        rank = bits_to_ints(bits[:, : self.f1])
        modes = self.patterns[rank]
        widths = self.widths[modes]
        labels = _unpack_labels(bits[:, self.f1:], widths)
        symbols = self.alphabet[modes, labels]
        if single:
            return BlockSymbols(symbols[0], modes[0])
        return BlockSymbols(symbols, modes)

    def bits_of(self, rank: np.ndarray, modes: np.ndarray, labels: np.ndarray) -> np.ndarray:
        head = ints_to_bits(rank, self.f1)
        tail = _pack_labels(labels, self.widths[modes], self.f2)
        return np.concatenate([head, tail], axis=1)

    def detect(self, y, h, es: float = 1.0, detector: str = "ml") -> DetectionResult:
        if detector != "ml":
            raise ConfigurationError(f"{self.name} supports only the ml detector")
        return ml_search(self, y, h, es)


def _unpack_labels(bits: np.ndarray, widths: np.ndarray) -> np.ndarray:
    B, N = widths.shape
    wmax = int(widths.max()) if widths.size else 0
    if wmax == 0:
        return np.zeros((B, N), dtype=np.int64)
    t = np.arange(wmax)
    mask = t[None, None, :] < widths[..., None]
    grid = np.zeros((B, N, wmax), dtype=np.int64)
    grid[mask] = bits.reshape(-1)
    shift = np.where(mask, widths[..., None] - 1 - t, 0)
    return (grid << shift).sum(axis=-1)


def _pack_labels(labels: np.ndarray, widths: np.ndarray, f2: int) -> np.ndarray:
    B = labels.shape[0]
    wmax = int(widths.max()) if widths.size else 0
    if wmax == 0:
        return np.zeros((B, 0), dtype=np.uint8)
    t = np.arange(wmax)
    mask = t[None, None, :] < widths[..., None]
    shift = np.where(mask, widths[..., None] - 1 - t, 0)
    grid = (labels[..., None] >> shift) & 1
    return grid[mask].reshape(B, f2).astype(np.uint8)


def ml_search(scheme: BlockScheme, y, h, es: float = 1.0) -> DetectionResult:
    """Exhaustive ML decision over every used pattern and symbol assignment.

    The block metric is a sum of per-subcarrier terms, so for each pattern
    the best symbol assignment is the per-subcarrier nearest point of the
    assigned mode; the minimisation over patterns then scans all 2**f1 of
    them. Ties go to the lowest pattern rank, then the lowest symbol label.
    """
    if scheme.f > ML_MAX_BITS:
        raise SearchSpaceTooLarge(f"f = {scheme.f} bits exceeds ML guard of {ML_MAX_BITS}")
    y2, single = _as_batch(y, scheme.N, "y")
    h2, _ = _as_batch(h, scheme.N, "h")
    if y2.shape != h2.shape:
        raise LengthMismatch("y and h must have the same shape")
    B = y2.shape[0]
    gain = np.sqrt(es) * h2
    d = np.abs(y2[:, :, None, None] - gain[:, :, None, None] * scheme.alphabet) ** 2
    d = np.where(scheme.valid, d, np.inf)
    best_label = d.argmin(axis=-1)
    e = np.take_along_axis(d, best_label[..., None], axis=-1)[..., 0]

    patterns = scheme.patterns
    C = len(patterns)
    selector = scheme.selector
    flat = e.reshape(B, -1)
    rank = np.empty(B, dtype=np.int64)
    step = max(1, _METRIC_CELLS // C)
    for start in range(0, B, step):
        if selector is not None:
            metric = flat[start:start + step] @ selector
        else:
            part = e[start:start + step]
            metric = np.zeros((part.shape[0], C))
            for n in range(scheme.N):
                metric += part[:, n, patterns[:, n]]
        rank[start:start + step] = metric.argmin(axis=1)

    modes = patterns[rank]
    labels = np.take_along_axis(best_label, modes[..., None], axis=-1)[..., 0]
    symbols = scheme.alphabet[modes, labels]
    bits = scheme.bits_of(rank, modes, labels)
    if single:
        return DetectionResult(modes[0], symbols[0], bits[0])
    return DetectionResult(modes, symbols, bits)


# -- Q-MM-OFDM-IM -----------------------------------------------------------


@dataclass(frozen=True)
class SchemeParams:
    Q: int
    N: int
    M: int
    family: str = "psk"

    def __post_init__(self):
        if self.N < 2:
            raise ConfigurationError(f"N must be at least 2, got {self.N}")
        if self.Q < 1:
            raise ConfigurationError(f"Q must be positive, got {self.Q}")
        _log2(self.M)
        if self.family not in ("psk", "qam"):
            raise ConfigurationError(f"unknown family {self.family!r}")

    @property
    def f1(self) -> int:
        return index_bits(self.Q, self.N)

    @property
    def f2(self) -> int:
        return self.N * _log2(self.M)

    @property
    def f(self) -> int:
        return self.f1 + self.f2


def qmm_block_scheme(p: SchemeParams, ms: ModeSet, cb: IndexCodebook) -> BlockScheme:
    if (ms.Q, ms.M) != (p.Q, p.M) or (cb.Q, cb.N) != (p.Q, p.N):
        raise ConfigurationError("mode set / codebook do not match the scheme parameters")
    if cb.codewords is None:
        raise SearchSpaceTooLarge("pattern table needs a materialized codebook")
    name = f"qmm-{p.family}({p.Q},{p.N},{p.M})"
    return BlockScheme(
        name=name,
        alphabet=ms.by_label,
        sizes=np.full(p.Q, p.M),
        patterns=cb.codewords[: cb.used_count],
        f1=cb.f1,
    )


def encode_block(bits, p: SchemeParams, ms: ModeSet, cb: IndexCodebook) -> BlockSymbols:
    return qmm_block_scheme(p, ms, cb).encode(bits)


def ml_detect(y, h, es: float, p: SchemeParams, ms: ModeSet, cb: IndexCodebook) -> DetectionResult:
    return ml_search(qmm_block_scheme(p, ms, cb), y, h, es)


def lcml_detect(y, h, es: float, p: SchemeParams, ms: ModeSet, cb: IndexCodebook) -> DetectionResult:
    """Low-complexity subcarrier-wise ML detection.

    The N-1 subcarriers with the largest |h|^2 are decided independently over
    the union of all modes; the weakest subcarrier's mode is then fixed by
    the zero-sum parity and only its M points are searched. Ties in |h|^2
    keep natural subcarrier order. A parity-consistent but unused codeword
    is remapped to the nearest used one (Hamming distance, lowest rank on
    ties). ``comparisons`` is the number of squared distances evaluated per
    block.
    """
    y2, single = _as_batch(y, p.N, "y")
    h2, _ = _as_batch(h, p.N, "h")
    if y2.shape != h2.shape:
        raise LengthMismatch("y and h must have the same shape")
    B, N = y2.shape
    Q, M = p.Q, p.M
    rows = np.arange(B)[:, None]

    order = np.argsort(-(np.abs(h2) ** 2), axis=1, kind="stable")
    strong, weak = order[:, : N - 1], order[:, N - 1]

    union = ms.by_label.reshape(-1)
    ys = y2[rows, strong]
    gs = np.sqrt(es) * h2[rows, strong]
    d_strong = np.abs(ys[..., None] - gs[..., None] * union) ** 2
    pick = d_strong.argmin(axis=-1)
    mode_strong, label_strong = np.divmod(pick, M)

    mode_weak = (-mode_strong.sum(axis=1)) % Q
    yw = y2[np.arange(B), weak]
    gw = np.sqrt(es) * h2[np.arange(B), weak]
    cand = ms.by_label[mode_weak]
    d_weak = np.abs(yw[:, None] - gw[:, None] * cand) ** 2
    label_weak = d_weak.argmin(axis=1)
    comparisons = d_strong.shape[1] * d_strong.shape[2] + d_weak.shape[1]

    modes = np.empty((B, N), dtype=np.int64)
    labels = np.empty((B, N), dtype=np.int64)
    modes[rows, strong] = mode_strong
    labels[rows, strong] = label_strong
    modes[np.arange(B), weak] = mode_weak
    labels[np.arange(B), weak] = label_weak

    rank = np.zeros(B, dtype=np.int64)
    for n in range(N - 1):
        rank = rank * Q + modes[:, n]
    unused = rank >= cb.used_count
    if np.any(unused):
        remap = {int(r): nearest_used_rank(cb, int(r)) for r in np.unique(rank[unused])}
        rank = np.array([remap.get(int(r), int(r)) for r in rank], dtype=np.int64)
        modes = np.asarray(cb.codewords)[rank]

    symbols = ms.by_label[modes, labels]
    bits = np.concatenate(
        [ints_to_bits(rank, cb.f1), ints_to_bits(labels, _log2(M)).reshape(B, -1)], axis=1
    )
    if single:
        return DetectionResult(modes[0], symbols[0], bits[0], comparisons)
    return DetectionResult(modes, symbols, bits, comparisons)


@dataclass(frozen=True, eq=False)
class QmmScheme:
    """Bundle of parameters, modes and codebook for one Q-MM configuration."""

    params: SchemeParams
    modes: ModeSet
    codebook: IndexCodebook

    @classmethod
    def build(cls, Q: int, N: int, M: int, family: str = "psk") -> QmmScheme:
        p = SchemeParams(Q, N, M, family)
        return cls(p, build_modes(family, Q, M), generate_codebook(Q, N))

    @property
    def name(self) -> str:
        p = self.params
        return f"qmm-{p.family}({p.Q},{p.N},{p.M})"

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def f(self) -> int:
        return self.params.f

    def block_scheme(self) -> BlockScheme:
        return qmm_block_scheme(self.params, self.modes, self.codebook)

    def average_energy(self) -> float:
        return self.block_scheme().average_energy()

    def encode(self, bits) -> BlockSymbols:
        return encode_block(bits, self.params, self.modes, self.codebook)

    def detect(self, y, h, es: float = 1.0, detector: str = "ml") -> DetectionResult:
        if detector == "ml":
            return ml_detect(y, h, es, self.params, self.modes, self.codebook)
        if detector == "lcml":
            return lcml_detect(y, h, es, self.params, self.modes, self.codebook)
        raise ConfigurationError(f"unknown detector {detector!r}")


def assemble_frame(blocks) -> np.ndarray:
    blocks = list(blocks)
    if not blocks:
        raise EmptyFrame("a frame needs at least one block")
    parts = [np.asarray(b.symbols if isinstance(b, BlockSymbols) else b) for b in blocks]
    if len({p.shape for p in parts}) != 1:
        raise LengthMismatch("all blocks in a frame must have the same length")
    return np.concatenate(parts)


def disassemble_frame(frame, N: int) -> np.ndarray:
    """Split a length-(B*N) frame vector into a (B, N) view of its blocks."""
    frame = np.asarray(frame)
    if frame.size == 0:
        raise EmptyFrame("empty frame")
    if frame.ndim != 1 or frame.size % N:
        raise LengthMismatch(f"frame length {frame.size} is not a multiple of N={N}")
    return frame.reshape(-1, N)

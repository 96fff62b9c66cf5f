"""Mod-Q single-parity MDS code over the mode indices of a subcarrier block.

The code contains every length-N tuple over Z_Q whose digit sum is 0 mod Q.
It meets the Singleton bound for minimum Hamming distance 2, giving Q**(N-1)
codewords, of which the first ``2**f1`` (lexicographic order of the free
N-1 digits) are addressed by index bits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapacityExceeded,
    LengthMismatch,
    NotInCodebook,
    TooFewCodewords,
    UnusedCodeword,
)

DEFAULT_BUDGET = 2**24


def index_bits(Q: int, N: int) -> int:
    """floor(log2(Q**(N-1))), computed in exact integer arithmetic."""
    return (Q ** (N - 1)).bit_length() - 1


def bits_to_int(bits) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - t)) & 1 for t in range(width)], dtype=np.uint8)


@dataclass(frozen=True)
class IndexCodebook:
    """Ordered mod-Q MDS codebook.

    ``codewords`` is an (Q**(N-1), N) integer array when materialized, else
    ``None``; ranking and unranking work either way since the rank of a
    codeword is the base-Q value of its first N-1 digits.
    """

    Q: int
    N: int
    codewords: np.ndarray | None = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.Q ** (self.N - 1)

    @property
    def f1(self) -> int:
        return index_bits(self.Q, self.N)

    @property
    def used_count(self) -> int:
        return 1 << self.f1

    def unrank(self, rank: int) -> tuple[int, ...]:
        if not 0 <= rank < self.size:
            raise IndexError(f"rank {rank} outside codebook of size {self.size}")
        if self.codewords is not None:
            return tuple(int(v) for v in self.codewords[rank])
        digits = []
        for _ in range(self.N - 1):
            rank, d = divmod(rank, self.Q)
            digits.append(d)
        digits.reverse()
        return (*digits, (-sum(digits)) % self.Q)

    def rank(self, codeword) -> int:
        cw = [int(v) for v in codeword]
        if len(cw) != self.N:
            raise LengthMismatch(f"codeword length {len(cw)} != N={self.N}")
        if any(not 0 <= v < self.Q for v in cw) or sum(cw) % self.Q:
            raise NotInCodebook(f"{tuple(cw)} is not a mod-{self.Q} zero-sum word")
        r = 0
        for v in cw[:-1]:
            r = r * self.Q + v
        return r


def generate_codebook(
    Q: int, N: int, *, budget: int = DEFAULT_BUDGET, materialize: bool = True
) -> IndexCodebook:
    if Q < 1 or N < 2:
        raise ValueError(f"need Q >= 1 and N >= 2, got Q={Q}, N={N}")
    if not materialize:
        return IndexCodebook(Q, N, None)
    size = Q ** (N - 1)
    if size > budget:
        raise CapacityExceeded(f"Q**(N-1) = {size} exceeds enumeration budget {budget}")
    free = np.array(list(itertools.product(range(Q), repeat=N - 1)), dtype=np.int64)
    free = free.reshape(size, N - 1)
    last = (-free.sum(axis=1)) % Q
    codewords = np.column_stack([free, last])
    codewords.setflags(write=False)
    return IndexCodebook(Q, N, codewords)


def bits_to_codeword(bits, cb: IndexCodebook) -> tuple[int, ...]:
    bits = list(bits)
    if len(bits) != cb.f1:
        raise LengthMismatch(f"expected {cb.f1} index bits, got {len(bits)}")
    return cb.unrank(bits_to_int(bits))


def codeword_to_bits(cw, cb: IndexCodebook) -> np.ndarray:
    r = cb.rank(cw)
    if r >= cb.used_count:
        raise UnusedCodeword(f"{tuple(cw)} has rank {r} >= {cb.used_count}")
    return int_to_bits(r, cb.f1)


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[:, None, :] != b[None, :, :]).sum(axis=-1)


def min_hamming_distance(cb: IndexCodebook) -> int:
    """Exact minimum pairwise Hamming distance by exhaustive scan."""
    if cb.size < 2:
        raise TooFewCodewords("need at least two codewords")
    words = cb.codewords
    if words is None:
        raise CapacityExceeded("exhaustive scan needs a materialized codebook")
    best = cb.N
    chunk = max(1, 2**22 // (len(words) * cb.N))
    for start in range(0, len(words), chunk):
        d = hamming_matrix(words[start:start + chunk], words)
        rows = np.arange(d.shape[0])
        d[rows, start + rows] = cb.N + 1
        best = min(best, int(d.min()))
    return best


def nearest_used_rank(cb: IndexCodebook, rank: int) -> int:
    """Used codeword closest in Hamming distance to ``rank``; lowest rank on ties."""
    if rank < cb.used_count:
        return rank
    words = cb.codewords
    if words is None:
        raise CapacityExceeded("remapping needs a materialized codebook")
    d = (words[: cb.used_count] != words[rank]).sum(axis=1)
    return int(np.argmin(d))

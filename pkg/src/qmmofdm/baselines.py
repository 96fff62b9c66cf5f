"""Reference block schemes used for comparison curves.

* conventional OFDM: Q-MM with a single mode (Q = 1),
* OFDM-IM: Ka of N subcarriers active, active set chosen by index bits,
* MM-OFDM-IM: N disjoint PSK modes, permuted over the N subcarriers.

Each builder returns a :class:`~qmmofdm.modem.BlockScheme`, so encoding and
exhaustive ML detection are shared with the main scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .constellation import ModeSet, build_psk_modes
from .errors import ConfigurationError, SearchSpaceTooLarge
from .modem import ML_MAX_BITS, BlockScheme, QmmScheme, _log2

# -- ranking helpers --------------------------------------------------------


def subset_from_rank(rank: int, N: int, K: int) -> tuple[int, ...]:
    """The ``rank``-th K-subset of range(N) in lexicographic order."""
    if not 0 <= rank < comb(N, K):
        raise IndexError(f"rank {rank} outside C({N}, {K})")
    out = []
    start = 0
    for slot in range(K, 0, -1):
        for x in range(start, N):
            block = comb(N - x - 1, slot - 1)
            if rank < block:
                out.append(x)
                start = x + 1
                break
            rank -= block
    return tuple(out)


def rank_subset(subset, N: int) -> int:
    subset = sorted(subset)
    K = len(subset)
    rank, start = 0, 0
    for i, x in enumerate(subset):
        for skipped in range(start, x):
            rank += comb(N - skipped - 1, K - i - 1)
        start = x + 1
    return rank


def permutation_from_rank(rank: int, n: int) -> tuple[int, ...]:
    """Decode a Lehmer-code (factorial number system) rank into a permutation."""
    if not 0 <= rank < factorial(n):
        raise IndexError(f"rank {rank} outside {n}!")
    pool = list(range(n))
    out = []
    for i in range(n - 1, -1, -1):
        digit, rank = divmod(rank, factorial(i))
        out.append(pool.pop(digit))
    return tuple(out)


def rank_permutation(perm) -> int:
    pool = sorted(perm)
    rank = 0
    for i, v in enumerate(perm):
        digit = pool.index(v)
        rank += digit * factorial(len(perm) - 1 - i)
        pool.pop(digit)
    return rank


# -- parameter records ------------------------------------------------------


@dataclass(frozen=True)
class OfdmImParams:
    N: int
    Ka: int
    M: int

    def __post_init__(self):
        if not 1 <= self.Ka <= self.N:
            raise ConfigurationError(f"need 1 <= Ka <= N, got Ka={self.Ka}, N={self.N}")
        _log2(self.M)

    @property
    def f1(self) -> int:
        return comb(self.N, self.Ka).bit_length() - 1

    @property
    def f2(self) -> int:
        return self.Ka * _log2(self.M)

    @property
    def f(self) -> int:
        return self.f1 + self.f2

    @property
    def eta(self) -> Fraction:
        return Fraction(self.f, self.N)


@dataclass(frozen=True)
class MmOfdmImParams:
    N: int
    M: int

    def __post_init__(self):
        if self.N < 2:
            raise ConfigurationError("MM-OFDM-IM needs N >= 2")
        _log2(self.M)

    @property
    def f1(self) -> int:
        return factorial(self.N).bit_length() - 1

    @property
    def f2(self) -> int:
        return self.N * _log2(self.M)

    @property
    def f(self) -> int:
        return self.f1 + self.f2

    @property
    def eta(self) -> Fraction:
        return Fraction(self.f, self.N)


def ofdm_eta(M: int) -> Fraction:
    return Fraction(_log2(M))


# -- scheme builders --------------------------------------------------------


def ofdm_scheme(N: int, M: int, family: str = "psk") -> QmmScheme:
    """Conventional OFDM, i.e. the Q = 1 special case of Q-MM."""
    return QmmScheme.build(1, N, M, family)


def ofdmim_scheme(p: OfdmImParams) -> BlockScheme:
    """OFDM-IM with M-PSK on the active subcarriers.

    Mode 0 is the inactive (zero) subcarrier; mode 1 is M-PSK scaled by
    sqrt(N/Ka) so a block carries the same total energy as N unit-energy
    symbols.
    """
    if p.f > ML_MAX_BITS:
        raise SearchSpaceTooLarge(f"OFDM-IM with f = {p.f} bits exceeds the ML guard")
    psk = build_psk_modes(1, p.M).by_label[0] * np.sqrt(p.N / p.Ka)
    alphabet = np.zeros((2, p.M), dtype=complex)
    alphabet[1] = psk
    patterns = np.zeros((1 << p.f1, p.N), dtype=np.int64)
    for r in range(1 << p.f1):
        patterns[r, list(subset_from_rank(r, p.N, p.Ka))] = 1
    return BlockScheme(
        name=f"ofdmim({p.N},{p.Ka},{p.M})",
        alphabet=alphabet,
        sizes=np.array([1, p.M]),
        patterns=patterns,
        f1=p.f1,
    )


def mmofdmim_scheme(p: MmOfdmImParams, ms: ModeSet | None = None) -> BlockScheme:
    if ms is None:
        ms = build_psk_modes(p.N, p.M)
    if (ms.Q, ms.M) != (p.N, p.M):
        raise ConfigurationError("MM-OFDM-IM needs N modes of M points")
    if p.f > ML_MAX_BITS:
        raise SearchSpaceTooLarge(f"MM-OFDM-IM with f = {p.f} bits exceeds the ML guard")
    patterns = np.array([permutation_from_rank(r, p.N) for r in range(1 << p.f1)], dtype=np.int64)
    return BlockScheme(
        name=f"mmofdmim-{ms.family}({p.N},{p.M})",
        alphabet=ms.by_label,
        sizes=np.full(p.N, p.M),
        patterns=patterns,
        f1=p.f1,
    )


# -- functional wrappers ---------------------------------------------------


def ofdm_encode(bits, N: int, M: int, family: str = "psk"):
    return ofdm_scheme(N, M, family).encode(bits)


def ofdm_detect(y, h, es: float, N: int, M: int, family: str = "psk"):
    return ofdm_scheme(N, M, family).detect(y, h, es)


def ofdmim_encode(bits, p: OfdmImParams):
    return ofdmim_scheme(p).encode(bits)


def ofdmim_detect(y, h, es: float, p: OfdmImParams):
    return ofdmim_scheme(p).detect(y, h, es)


def mmofdmim_encode(bits, p: MmOfdmImParams, ms: ModeSet | None = None):
    return mmofdmim_scheme(p, ms).encode(bits)


def mmofdmim_detect(y, h, es: float, p: MmOfdmImParams, ms: ModeSet | None = None):
    return mmofdmim_scheme(p, ms).detect(y, h, es)

"""Closed-form performance metrics.

Pairwise error probabilities assume i.i.d. Rayleigh fading with perfect CSI
and ML detection. Given per-subcarrier squared distances d_n between two
blocks and gamma = Es/N0, the conditional PEP is Q(sqrt(gamma/2 * sum
|h_n|^2 d_n)). Averaging over the fading either uses the two-exponential
Q-function approximation

    Q(x) ~ exp(-x^2/2)/12 + exp(-2x^2/3)/4,

which turns each exponential into a product of 1/(1 + gamma*d_n/c) terms,
or integrates Craig's form of Q numerically (``method="exact"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import e, log

import numpy as np

from .errors import DegenerateInput, SearchSpaceTooLarge
from .modem import BlockScheme, SchemeParams, ints_to_bits, qmm_block_scheme

UNION_BOUND_MAX_BITS = 14
_PAIR_CELLS = 2**21

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class SeReport:
    f1: int
    f2: int
    eta: Fraction

    def __float__(self) -> float:
        return float(self.eta)


def spectral_efficiency(p) -> SeReport:
    """Bits per subcarrier, (f1 + f2) / N, for any params with f1, f2 and N."""
    return SeReport(p.f1, p.f2, Fraction(p.f1 + p.f2, p.N))


def equivalent_q_for_benchmarks(N: int, M: int) -> tuple[float, float]:
    """Q at which index-only Q-MM matches MM-OFDM-IM and OFDM-OFSPM SE as N grows."""
    return N * M / e, N * M / (e * log(2))


def lcml_block_comparisons(p: SchemeParams) -> int:
    return p.Q * p.M * (p.N - 1) + p.M


def lcml_complexity(p: SchemeParams) -> float:
    """Squared-distance evaluations per subcarrier: QM - QM/N + M/N."""
    return p.Q * p.M - p.Q * p.M / p.N + p.M / p.N


@dataclass(frozen=True)
class PairwiseEvent:
    d: tuple[float, ...]
    bit_errors: int


def _pep_products(d: np.ndarray, gamma: float, c: float) -> np.ndarray:
    return np.prod(1.0 / (1.0 + gamma * d / c), axis=-1)


def pep_approx(d: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorised PEP over the last axis of ``d`` (squared distances)."""
    return _pep_products(d, gamma, 4.0) / 12 + _pep_products(d, gamma, 3.0) / 4


def pep_exact(d: np.ndarray, gamma: float) -> np.ndarray:
    """Craig-form PEP, 64-point Gauss-Legendre over theta in (0, pi/2)."""
    theta = (np.pi / 4) * (_GL_NODES + 1)
    weights = (np.pi / 4) * _GL_WEIGHTS
    s2 = np.sin(theta) ** 2
    d = np.asarray(d, dtype=float)[..., None, :]
    integrand = np.prod(1.0 / (1.0 + gamma * d / (4 * s2[:, None])), axis=-1)
    return integrand @ weights / np.pi


def pairwise_error_probability(ev: PairwiseEvent, es_n0: float, method: str = "approx") -> float:
    d = np.asarray(ev.d, dtype=float)
    if method == "approx":
        return float(pep_approx(d, es_n0))
    if method == "exact":
        return float(pep_exact(d, es_n0))
    raise ValueError(f"unknown PEP method {method!r}")


def _as_block_scheme(scheme) -> BlockScheme:
    return scheme.block_scheme() if hasattr(scheme, "block_scheme") else scheme


def all_blocks(scheme: BlockScheme) -> np.ndarray:
    """Symbol vectors of every transmittable block, indexed by their bit label."""
    scheme = _as_block_scheme(scheme)
    bits = ints_to_bits(np.arange(1 << scheme.f), scheme.f)
    return scheme.encode(bits).symbols


def union_bound(scheme: BlockScheme, es_n0, method: str = "approx") -> np.ndarray:
    """Union bound on BER for one or more values of Es/N0 (linear).

    Sums PEP(i -> j) * popcount(i xor j) over all ordered pairs of the 2**f
    transmittable blocks, then divides by f * 2**f.
    """
    scheme = _as_block_scheme(scheme)
    if scheme.f > UNION_BOUND_MAX_BITS:
        raise SearchSpaceTooLarge(
            f"f = {scheme.f} bits exceeds the union-bound guard of {UNION_BOUND_MAX_BITS}"
        )
    gammas = np.atleast_1d(np.asarray(es_n0, dtype=float))
    pep = pep_approx if method == "approx" else pep_exact
    S = all_blocks(scheme)
    count = len(S)
    labels = np.arange(count)
    totals = np.zeros(len(gammas))
    step = max(1, _PAIR_CELLS // (count * scheme.N))
    for start in range(0, count, step):
        rows = slice(start, start + step)
        d = np.abs(S[rows, None, :] - S[None, :, :]) ** 2
        weight = np.bitwise_count(labels[rows, None] ^ labels[None, :]).astype(float)
        for g, gamma in enumerate(gammas):
            totals[g] += np.sum(pep(d, gamma) * weight)
    out = totals / (scheme.f * count)
    return out if np.ndim(es_n0) else out[0]


def union_bound_ber(p: SchemeParams, ms, cb, es_n0, method: str = "approx"):
    return union_bound(qmm_block_scheme(p, ms, cb), es_n0, method)


def min_block_hamming_distance(scheme: BlockScheme) -> int:
    """Fewest subcarriers on which two distinct transmittable blocks differ."""
    scheme = _as_block_scheme(scheme)
    S = all_blocks(scheme)
    best = scheme.N
    step = max(1, _PAIR_CELLS // (len(S) * scheme.N))
    for start in range(0, len(S), step):
        diff = (np.abs(S[start:start + step, None, :] - S[None, :, :]) > 1e-9).sum(axis=-1)
        rows = np.arange(diff.shape[0])
        diff[rows, start + rows] = scheme.N + 1
        best = min(best, int(diff.min()))
    return best


def diversity_slope(points) -> float:
    """Empirical diversity order: minus the LS slope of log10(BER) vs SNR_dB/10."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise DegenerateInput("need at least two (snr_db, ber) points")
    snr, ber = pts[:, 0], pts[:, 1]
    if np.any(ber <= 0):
        raise DegenerateInput("all BER values must be positive")
    if snr.max() - snr.min() < 10:
        raise DegenerateInput("SNR span must be at least 10 dB")
    slope = np.polyfit(snr / 10, np.log10(ber), 1)[0]
    return float(-slope)


def snr_at_ber(points, target: float) -> float:
    """SNR (dB) where a decreasing BER curve crosses ``target``, log-linear interpolation."""
    pts = sorted((float(s), float(b)) for s, b in points)
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 >= target >= b1 and b0 > 0 and b1 > 0 and b0 != b1:
            t = (np.log10(b0) - np.log10(target)) / (np.log10(b0) - np.log10(b1))
            return s0 + t * (s1 - s0)
    raise DegenerateInput(f"curve does not cross BER {target}")

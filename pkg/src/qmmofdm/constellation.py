"""Disjoint M-ary constellations ("modes") for multi-mode index modulation.

Two families are supported:

* PSK: mode ``q`` is the M-PSK constellation rotated by ``2*pi*q/(M*Q)``,
  so the union of all modes is a (QM)-PSK constellation.
* QAM: a rectangular QM-point grid split by binary set partitioning; each
  leaf subset of M points becomes one mode.

Every :class:`ModeSet` carries a bit label for each of its points. PSK modes
are Gray labeled along the circle; QAM modes use the remaining partition-path
bits, so the full path label of a grid point is ``(q << log2(M)) | label``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedSize

DISJOINT_TOL = 1e-9
QAM_SIZES = (2, 4, 8, 16, 32, 64)


def gray_code(k):
    return k ^ (k >> 1)


def _is_power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class ModeSet:
    """Q disjoint constellations of M points each.

    ``modes[q, k]`` is the k-th point of mode q in the family's fixed point
    order and ``labels[q, k]`` its integer bit label (``log2(M)`` bits, MSB
    first). Instances are validated on construction and should be treated
    as read-only.
    """

    family: str
    Q: int
    M: int
    modes: np.ndarray
    labels: np.ndarray
    by_label: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=complex)
        labels = np.asarray(self.labels, dtype=np.int64)
        if modes.shape != (self.Q, self.M) or labels.shape != (self.Q, self.M):
            raise ValueError(f"expected ({self.Q}, {self.M}) point and label arrays")
        if not np.all(np.isfinite(modes)):
            raise ValueError("constellation points must be finite")
        for row in labels:
            if sorted(row.tolist()) != list(range(self.M)):
                raise ValueError("labels of a mode must be a permutation of 0..M-1")
        modes.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "labels", labels)
        # by_label[q, v] is the point of mode q whose label is v
        by_label = np.empty_like(modes)
        np.put_along_axis(by_label, labels, modes, axis=1)
        by_label.setflags(write=False)
        object.__setattr__(self, "by_label", by_label)

    @property
    def bits_per_symbol(self) -> int:
        return int(self.M).bit_length() - 1

    @property
    def union(self) -> np.ndarray:
        """All QM points, mode-major."""
        return self.modes.reshape(-1)

    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.union) ** 2))

    def check(self, tol: float = DISJOINT_TOL) -> None:
        """Raise ``ValueError`` if any ModeSet invariant is violated."""
        if abs(self.average_energy() - 1.0) > tol:
            raise ValueError(f"union energy {self.average_energy()!r} is not 1")
        if min_intermode_distance(self) <= tol:
            raise ValueError("modes are not disjoint")


def build_psk_modes(Q: int, M: int) -> ModeSet:
    if Q < 1 or M < 1:
        raise UnsupportedSize(f"Q and M must be positive, got Q={Q}, M={M}")
    if not _is_power_of_two(M):
        raise UnsupportedSize(f"M must be a power of two, got {M}")
    k = np.arange(M)
    q = np.arange(Q)[:, None]
    phase = 2 * np.pi * k / M + 2 * np.pi * q / (M * Q)
    modes = np.exp(1j * phase)
    # exact axes points keep Q=1 outputs clean (e.g. QPSK = {1, j, -1, -j})
    modes = np.round(modes.real, 15) + 1j * np.round(modes.imag, 15) + 0.0
    labels = np.broadcast_to(gray_code(k), (Q, M))
    return ModeSet("psk", Q, M, modes, labels)


def qam_grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Rectangular grid with ``size`` points, as integer (column, row) indices.

    Odd powers of two use a 2:1 rectangle (8 -> 4x2, 32 -> 8x4).
    """
    if size not in QAM_SIZES:
        raise UnsupportedSize(f"QAM size must be one of {QAM_SIZES}, got {size}")
    bits = size.bit_length() - 1
    cols = 1 << ((bits + 1) // 2)
    rows = size // cols
    i, k = np.meshgrid(np.arange(cols), np.arange(rows), indexing="ij")
    return i.ravel(), k.ravel()


def grid_points(i: np.ndarray, k: np.ndarray) -> np.ndarray:
    cols, rows = int(i.max()) + 1, int(k.max()) + 1
    points = (2 * i + 1 - cols) + 1j * (2 * k + 1 - rows)
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def partition_bit(i: np.ndarray, k: np.ndarray, level: int) -> np.ndarray:
    """Subset bit chosen at a given split level of the lattice partition chain.

    The chain Z^2 / D2 / 2Z^2 / 2D2 / ... alternates between a checkerboard
    split and a split of a checkerboard class into square sublattices; each
    step multiplies the minimum intra-subset distance by sqrt(2).
    """
    s = 1 << (level // 2)
    if level % 2 == 0:
        return (i // s + k // s) % 2
    return (i // s) % 2


def partition_labels(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-energy grid points and their full partition-path labels.

    Bit ``b`` of the label (counted from the MSB) is the subset chosen at
    split level ``b``.
    """
    i, k = qam_grid(size)
    points = grid_points(i, k)
    depth = size.bit_length() - 1
    labels = np.zeros(size, dtype=np.int64)
    for level in range(depth):
        labels = (labels << 1) | partition_bit(i, k, level)
    if len(np.unique(labels)) != size:  # pragma: no cover - grid construction bug
        raise AssertionError("partition labels are not unique")
    return points, labels


def build_qam_modes(Q: int, M: int) -> ModeSet:
    if not (_is_power_of_two(Q) and _is_power_of_two(M)) or Q * M not in QAM_SIZES:
        raise UnsupportedSize(
            f"QAM modes need power-of-two Q, M with QM in {QAM_SIZES}, got Q={Q}, M={M}"
        )
    points, labels = partition_labels(Q * M)
    order = np.argsort(labels)
    # sorted by path label: row q holds the q-th leaf, columns its in-mode label
    modes = points[order].reshape(Q, M)
    in_mode = np.broadcast_to(np.arange(M), (Q, M))
    return ModeSet("qam", Q, M, modes, in_mode)


def build_modes(family: str, Q: int, M: int) -> ModeSet:
    family = family.lower()
    if family == "psk":
        return build_psk_modes(Q, M)
    if family == "qam":
        return build_qam_modes(Q, M)
    raise UnsupportedSize(f"unknown constellation family {family!r}")


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a[:, None] - b[None, :])


def min_intermode_distance(ms: ModeSet) -> float:
    """Smallest distance between points of different modes (inf if Q == 1)."""
    best = np.inf
    for q in range(ms.Q):
        for r in range(q + 1, ms.Q):
            best = min(best, float(_pairwise(ms.modes[q], ms.modes[r]).min()))
    return best


def min_intramode_distance(ms: ModeSet) -> float:
    """Smallest distance between two points of the same mode (inf if M == 1)."""
    if ms.M < 2:
        return np.inf
    best = np.inf
    for row in ms.modes:
        d = _pairwise(row, row)
        best = min(best, float(d[~np.eye(ms.M, dtype=bool)].min()))
    return best

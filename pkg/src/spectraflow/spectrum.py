"""Ordered spectral functions, the arsinh metric and shift alignment.

A spectrum is stored as a finite window of a non-decreasing integer-indexed
sequence. Index 0 sits on the first eigenvalue that is >= 0, so negative
indices carry the negative eigenvalues.

Shift convention: ``window.shifted(z)`` moves every entry ``z`` indices up, so
its value at index ``j + z`` equals the original value at ``j``.
``align(u, v)`` returns the ``k`` for which ``u(j)`` best matches ``v(j + k)``.
Following a path of spectra, the per-step shifts add up to the spectral flow.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SpectralError

DISTANCE_TOL = 1e-12


def arsinh(x):
    """Inverse hyperbolic sine, ``ln(x + sqrt(x^2 + 1))``."""
    return np.arcsinh(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SpectrumWindow:
    values: tuple[float, ...]
    j_lo: int = 0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "j_lo", int(self.j_lo))
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("window values must be non-decreasing")

    def __len__(self):
        return len(self.values)

    @property
    def j_hi(self) -> int:
        return self.j_lo + len(self.values) - 1

    @property
    def indices(self) -> range:
        return range(self.j_lo, self.j_hi + 1)

    def __getitem__(self, j: int) -> float:
        if not self.j_lo <= j <= self.j_hi:
            raise IndexError(f"index {j} outside window [{self.j_lo}, {self.j_hi}]")
        return self.values[j - self.j_lo]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def is_anchored(self) -> bool:
        """True if index 0 marks the first value >= 0 (or all values are negative and j_hi = -1)."""
        if not self.values:
            return True
        n_neg = sum(1 for v in self.values if v < 0)
        return self.j_lo == -n_neg

    def shifted(self, z: int) -> "SpectrumWindow":
        return SpectrumWindow(self.values, self.j_lo + int(z))

    def negated(self) -> "SpectrumWindow":
        """The window of ``-values`` (reversed) with the index range mirrored."""
        return SpectrumWindow(tuple(-v for v in reversed(self.values)), -self.j_hi)

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "value"])
        for j, v in zip(self.indices, self.values):
            writer.writerow([j, repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SpectrumWindow":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        reader = csv.reader(lines)
        head = next(reader, None)
        if head is None or [h.strip() for h in head] != ["index", "value"]:
            raise ValueError("expected CSV header 'index,value'")
        rows = [(int(r[0]), float(r[1])) for r in reader]
        if not rows:
            return cls((), 0)
        idx = [r[0] for r in rows]
        if idx != list(range(idx[0], idx[0] + len(idx))):
            raise ValueError("window indices must be consecutive")
        return cls(tuple(r[1] for r in rows), idx[0])


@dataclass(frozen=True)
class AlignmentResult:
    shift: int
    distance: float
    overlap_count: int
    # distance of every admissible shift, kept for ambiguity checks
    candidates: dict = field(default_factory=dict, compare=False, repr=False)

    def runner_up(self) -> float:
        """Smallest distance over admissible shifts other than the chosen one."""
        others = [d for k, d in self.candidates.items() if k != self.shift]
        return min(others) if others else math.inf


def ordered_spectrum(eigs: Iterable[float]) -> SpectrumWindow:
    """Anchor a multiset of eigenvalues so that index 0 is the first value >= 0."""
    vals = np.sort(np.asarray(list(eigs), dtype=float).ravel())
    if vals.size == 0:
        raise SpectralError("empty spectrum")
    n_neg = int(np.count_nonzero(vals < 0))
    return SpectrumWindow(tuple(vals.tolist()), -n_neg)


def spectral_part(s: SpectrumWindow, interval: Sequence[float]) -> SpectrumWindow:
    """Entries of ``s`` inside the closed interval, keeping their indices."""
    a, b = float(interval[0]), float(interval[1])
    if a > b:
        raise ValueError("interval must satisfy a <= b")
    inside = [i for i, v in enumerate(s.values) if a <= v <= b]
    if not inside:
        return SpectrumWindow((), s.j_lo)
    lo, hi = inside[0], inside[-1]
    return SpectrumWindow(s.values[lo:hi + 1], s.j_lo + lo)


def _overlap(u: SpectrumWindow, v: SpectrumWindow, k: int = 0):
    """Index range of ``u`` whose partners ``j + k`` lie in ``v``."""
    lo = max(u.j_lo, v.j_lo - k)
    hi = min(u.j_hi, v.j_hi - k)
    return lo, hi


def _shift_distance(u: SpectrumWindow, v: SpectrumWindow, k: int, au=None, av=None):
    lo, hi = _overlap(u, v, k)
    if hi < lo:
        return math.inf, 0
    au = arsinh(u.as_array()) if au is None else au
    av = arsinh(v.as_array()) if av is None else av
    a = au[lo - u.j_lo:hi - u.j_lo + 1]
    b = av[lo + k - v.j_lo:hi + k - v.j_lo + 1]
    return float(np.max(np.abs(a - b))), hi - lo + 1


def arsinh_distance(u: SpectrumWindow, v: SpectrumWindow) -> float:
    """Sup of ``|arsinh u(j) - arsinh v(j)|`` over shared indices; ``inf`` if none."""
    return _shift_distance(u, v, 0)[0]


def align(u: SpectrumWindow, v: SpectrumWindow, max_shift: int, min_overlap: int = 1) -> AlignmentResult:
    """Best index shift ``k`` with ``|k| <= max_shift`` matching ``u(j)`` to ``v(j + k)``.

    Shifts whose overlap is shorter than ``min_overlap`` are skipped. Distances
    within 1e-12 of each other count as ties; ties go to the smaller ``|k|``,
    then to the negative ``k``.
    """
    if max_shift < 0 or min_overlap < 1:
        raise ValueError("need max_shift >= 0 and min_overlap >= 1")
    candidates = {}
    au, av = arsinh(u.as_array()), arsinh(v.as_array())
    for k in range(-max_shift, max_shift + 1):
        d, count = _shift_distance(u, v, k, au, av)
        if count >= min_overlap:
            candidates[k] = (d, count)
    if not candidates:
        raise SpectralError("insufficient overlap")
    best_d = min(d for d, _ in candidates.values())
    tied = [k for k, (d, _) in candidates.items() if d <= best_d + DISTANCE_TOL]
    k = min(tied, key=lambda z: (abs(z), z))
    d, count = candidates[k]
    return AlignmentResult(k, d, count, {z: dc[0] for z, dc in candidates.items()})

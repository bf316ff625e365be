"""Real Clifford algebras Cl_m with ``e_i^2 = -1``, Spin elements and their rotations.

Elements are stored as ``{bitmask: coefficient}``. Bit ``i - 1`` stands for
generator ``e_i``, with generators numbered ``1..m``. ``embed`` maps ``e_i`` to
``e_{i+1}``, so the induced inclusion SO_m -> SO_{m+1} fixes the first
coordinate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SpectralError

GRADE_TOL = 1e-10


def _reorder_sign(a: int, b: int) -> int:
    """Sign from sorting the concatenated generator word of blades ``a`` then ``b``."""
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def blade_product(a: int, b: int) -> tuple[int, int]:
    """``e_A e_B = sign * e_{A xor B}`` with each repeated generator squaring to -1."""
    sign = _reorder_sign(a, b)
    if bin(a & b).count("1") & 1:
        sign = -sign
    return sign, a ^ b


def grade(blade: int) -> int:
    return bin(blade).count("1")


class CliffordElement:
    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs: dict | None = None):
        if m < 0:
            raise ValueError("dimension must be nonnegative")
        self.m = m
        self.coeffs = {}
        for blade, c in (coeffs or {}).items():
            blade = int(blade)
            if not 0 <= blade < (1 << m):
                raise ValueError(f"blade {blade:b} outside Cl_{m}")
            if c != 0:
                self.coeffs[blade] = float(c)

    # -- construction ---------------------------------------------------------

    @classmethod
    def scalar(cls, m: int, c: float = 1.0) -> "CliffordElement":
        return cls(m, {0: c})

    @classmethod
    def generator(cls, m: int, i: int) -> "CliffordElement":
        if not 1 <= i <= m:
            raise ValueError(f"generator e{i} outside Cl_{m}")
        return cls(m, {1 << (i - 1): 1.0})

    @classmethod
    def vector(cls, v: Sequence[float]) -> "CliffordElement":
        v = list(v)
        return cls(len(v), {1 << i: c for i, c in enumerate(v)})

    @classmethod
    def blade(cls, m: int, indices: Iterable[int], c: float = 1.0) -> "CliffordElement":
        out = cls.scalar(m, c)
        for i in indices:
            out = out * cls.generator(m, i)
        return out

    # -- arithmetic -------------------------------------------------------------

    def _check(self, other: "CliffordElement"):
        if other.m != self.m:
            raise ValueError(f"dimension mismatch: Cl_{self.m} vs Cl_{other.m}")

    def __add__(self, other):
        if not isinstance(other, CliffordElement):
            other = CliffordElement.scalar(self.m, other)
        self._check(other)
        out = dict(self.coeffs)
        for b, c in other.coeffs.items():
            out[b] = out.get(b, 0.0) + c
        return CliffordElement(self.m, out)

    __radd__ = __add__

    def __neg__(self):
        return CliffordElement(self.m, {b: -c for b, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, CliffordElement):
            return CliffordElement(self.m, {b: c * other for b, c in self.coeffs.items()})
        self._check(other)
        out: dict[int, float] = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                s, blade = blade_product(a, b)
                out[blade] = out.get(blade, 0.0) + s * ca * cb
        return CliffordElement(self.m, out)

    def __rmul__(self, other):
        return self * other

    def __eq__(self, other):
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self.m == other.m and self.coeffs == other.coeffs

    def __repr__(self):
        return f"CliffordElement({self.m}, {format_element(self)!r})"

    # -- involutions and parts ------------------------------------------------------

    def reverse(self) -> "CliffordElement":
        """Reverse the order of generators in every blade."""
        return CliffordElement(self.m, {b: (c if (grade(b) // 2) % 2 == 0 else -c)
                                        for b, c in self.coeffs.items()})

    def grade_involution(self) -> "CliffordElement":
        return CliffordElement(self.m, {b: (-c if grade(b) & 1 else c) for b, c in self.coeffs.items()})

    def grade_part(self, k: int) -> "CliffordElement":
        return CliffordElement(self.m, {b: c for b, c in self.coeffs.items() if grade(b) == k})

    def scalar_part(self) -> float:
        return self.coeffs.get(0, 0.0)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def distance(self, other: "CliffordElement") -> float:
        return (self - other).max_abs()

    @property
    def is_even(self) -> bool:
        return all(grade(b) % 2 == 0 for b in self.coeffs)


def grade_split(a: CliffordElement) -> tuple[CliffordElement, CliffordElement]:
    even = CliffordElement(a.m, {b: c for b, c in a.coeffs.items() if grade(b) % 2 == 0})
    odd = CliffordElement(a.m, {b: c for b, c in a.coeffs.items() if grade(b) % 2 == 1})
    return even, odd


def clifford_mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return a * b


# -- Spin -------------------------------------------------------------------------------

@dataclass
class SpinElement:
    value: CliffordElement
    factorization: list | None = field(default=None)

    def __post_init__(self):
        if not self.value.is_even:
            raise SpectralError("not a spin element: odd blades present")
        norm = self.value * self.value.reverse()
        if (norm - 1.0).max_abs() > 1e-12:
            raise SpectralError("not a spin element: s * reverse(s) != 1")

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[float]]) -> "SpinElement":
        """Clifford product of an even number of unit vectors."""
        vs = [np.asarray(v, dtype=float) for v in vectors]
        if len(vs) % 2:
            raise SpectralError("Spin needs an even number of unit vectors")
        m = vs[0].size
        out = CliffordElement.scalar(m)
        for v in vs:
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise SpectralError("factor is not a unit vector")
            out = out * CliffordElement.vector(v)
        return cls(out, [v.copy() for v in vs])

    @property
    def m(self) -> int:
        return self.value.m

    def __mul__(self, other: "SpinElement") -> "SpinElement":
        fact = None
        if self.factorization is not None and other.factorization is not None:
            fact = self.factorization + other.factorization
        return SpinElement(self.value * other.value, fact)

    def __neg__(self):
        return SpinElement(-self.value)

    def inverse(self) -> "SpinElement":
        fact = None if self.factorization is None else [v for v in reversed(self.factorization)]
        return SpinElement(self.value.reverse(), fact)


def theta(s: SpinElement | CliffordElement) -> np.ndarray:
    """Rotation matrix of a spin element: column j is ``s e_j s^{-1}`` (grade 1 part)."""
    x = s.value if isinstance(s, SpinElement) else s
    m = x.m
    norm = (x * x.reverse()).scalar_part()
    inv = x.reverse() * (1.0 / norm)
    tw = x.grade_involution()
    out = np.zeros((m, m))
    for j in range(1, m + 1):
        y = tw * CliffordElement.generator(m, j) * inv
        rest = max((abs(c) for b, c in y.coeffs.items() if grade(b) != 1), default=0.0)
        if rest > GRADE_TOL:
            raise SpectralError("not a spin element: conjugation leaves the vectors")
        for b, c in y.coeffs.items():
            if grade(b) == 1:
                out[b.bit_length() - 1, j - 1] = c
    return out


def reflection_matrix(v: Sequence[float]) -> np.ndarray:
    """Reflection along the hyperplane orthogonal to ``v``."""
    v = np.asarray(v, dtype=float)
    return np.eye(v.size) - 2.0 * np.outer(v, v) / (v @ v)


def theta_from_factors(s: SpinElement) -> np.ndarray:
    if s.factorization is None:
        raise ValueError("spin element carries no factorization")
    out = np.eye(s.m)
    for v in s.factorization:
        out = out @ reflection_matrix(v)
    return out


def _sincos_pi(x: float) -> tuple[float, float]:
    """``(sin(pi x), cos(pi x))``, exact at multiples of 1/2."""
    r = math.fmod(x, 2.0)
    if r < 0:
        r += 2.0
    exact = {0.0: (0.0, 1.0), 0.5: (1.0, 0.0), 1.0: (0.0, -1.0), 1.5: (-1.0, 0.0), 2.0: (0.0, 1.0)}
    if r in exact:
        return exact[r]
    return math.sin(math.pi * r), math.cos(math.pi * r)


def rotation_matrix(alpha: float, m: int) -> np.ndarray:
    """Identity on the first ``m - 2`` coordinates, rotation by ``alpha`` in the last two."""
    if m < 2:
        raise ValueError("need m >= 2")
    R = np.eye(m)
    s, c = _sincos_pi(alpha / math.pi)
    R[m - 2:, m - 2:] = [[c, -s], [s, c]]
    return R


def rotation_lift(alpha: float, m: int) -> SpinElement:
    """``cos(alpha/2) + sin(alpha/2) e_{m-1} e_m``, which ``theta`` sends to ``rotation_matrix(alpha, m)``."""
    if m < 2:
        raise ValueError("need m >= 2")
    s, c = _sincos_pi(alpha / (2.0 * math.pi))
    plane = (1 << (m - 2)) | (1 << (m - 1))
    return SpinElement(CliffordElement(m, {0: c, plane: s}))


def embed(a: CliffordElement | SpinElement):
    """Algebra inclusion Cl_m -> Cl_{m+1}, ``e_i -> e_{i+1}``."""
    if isinstance(a, SpinElement):
        fact = None
        if a.factorization is not None:
            fact = [np.concatenate([[0.0], v]) for v in a.factorization]
        return SpinElement(embed(a.value), fact)
    return CliffordElement(a.m + 1, {b << 1: c for b, c in a.coeffs.items()})


def block_inclusion(A: np.ndarray) -> np.ndarray:
    """SO_m -> SO_{m+1}, fixing the first basis vector."""
    m = A.shape[0]
    out = np.eye(m + 1)
    out[1:, 1:] = A
    return out


# -- text format ------------------------------------------------------------------------

def format_element(a: CliffordElement) -> str:
    """Text form such as ``0.5 + 0.866*e1e2 - e3``; blades in increasing bitmask order."""
    if not a.coeffs:
        return "0"
    parts = []
    for b in sorted(a.coeffs):
        c = a.coeffs[b]
        gens = "".join(f"e{i + 1}" for i in range(a.m) if b >> i & 1)
        mag = abs(c)
        if not gens:
            body = repr(mag)
        elif mag == 1.0:
            body = gens
        else:
            body = f"{mag!r}*{gens}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def parse_element(text: str, m: int) -> CliffordElement:
    """Inverse of :func:`format_element`; terms may repeat or reorder generators (``e2e1``)."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty element")
    terms = re.findall(r"[+-]?[^+-]+(?:(?<=[eE])[+-][^+-]+)*", s)
    if "".join(terms) != s:
        raise ValueError(f"cannot parse {text!r}")
    out = CliffordElement(m)
    for term in terms:
        sign = -1.0 if term.startswith("-") else 1.0
        term = term.lstrip("+-")
        mt = re.fullmatch(r"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\*?((?:e\{?\d+\}?)*)", term)
        if mt is None or term == "":
            raise ValueError(f"cannot parse term {term!r}")
        coeff = float(mt.group(1)) if mt.group(1) else 1.0
        gens = [int(g) for g in re.findall(r"e\{?(\d+)\}?", mt.group(2))]
        if mt.group(1) is None and not gens:
            raise ValueError(f"cannot parse term {term!r}")
        out = out + CliffordElement.blade(m, gens, sign * coeff)
    return out

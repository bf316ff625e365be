"""Exact reference spectra and synthetic operator families for testing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpectralError
from .family import OperatorFamily
from .spectrum import SpectrumWindow, ordered_spectrum

INT64_MAX = 2**63 - 1


def sphere_multiplicity(m: int, k: int) -> int:
    """Complex multiplicity of the Dirac eigenvalues ``+-(m/2 + k)`` on the round m-sphere."""
    mu = 2 ** (m // 2) * math.comb(m + k - 1, k)
    if mu > INT64_MAX:
        raise SpectralError(f"multiplicity for m={m}, k={k} overflows 64 bits")
    return mu


def sphere_levels(m: int, levels: int) -> list[tuple[float, int]]:
    """``(eigenvalue, multiplicity)`` pairs for ``k < levels``, ascending."""
    SphereSpectrumSpec(m, levels)
    pos = [(m / 2 + k, sphere_multiplicity(m, k)) for k in range(levels)]
    return [(-lam, mu) for lam, mu in reversed(pos)] + pos


@dataclass(frozen=True)
class SphereSpectrumSpec:
    m: int
    levels: int

    def __post_init__(self):
        if self.m < 2 or self.levels < 1:
            raise SpectralError("need m >= 2 and levels >= 1")

    def window(self) -> SpectrumWindow:
        return sphere_spectrum(self.m, self.levels)


def sphere_spectrum(m: int, levels: int) -> SpectrumWindow:
    vals = []
    for lam, mu in sphere_levels(m, levels):
        vals.extend([lam] * mu)
    return ordered_spectrum(vals)


_FACTORS = {0: (1, 1), 6: (1, 1), 7: (1, 1), 1: (1, 2), 5: (1, 2), 2: (0.5, 2), 3: (0.5, 2), 4: (0.5, 2)}


def multiplicity_convert(m: int, mu_c: int) -> tuple[int, int]:
    """Spin and real multiplicity from the complex multiplicity, by ``m mod 8``."""
    r = m % 8
    if mu_c < 1:
        raise SpectralError("complex multiplicity must be positive")
    if r in (2, 3, 4) and mu_c % 2:
        raise SpectralError(f"complex multiplicity {mu_c} violates quaternionic structure (m = {r} mod 8)")
    f_spin, f_real = _FACTORS[r]
    return int(mu_c * f_spin), int(mu_c * f_real)


def _random_symmetric(rng, n, scale=1.0):
    A = rng.standard_normal((n, n))
    return scale * (A + A.T) / 2


def synthetic_family(kind: str, params: dict | None = None, seed: int | None = None) -> OperatorFamily:
    """Deterministic test families.

    kinds and params:
      ``linear-pencil``: ``T0``/``T1`` matrices, or ``dim`` and ``scale`` plus
      optional ``max_step`` (operator norm bound on ``T1 - T0``).
      ``rotating-eigenbundle``: ``base_diagonal``, ``half_turns``, ``plane``.
      ``seeded-random-path``: ``dim``, ``degree``, ``scale``, ``doubled``
      (block-duplicates the path, so every multiplicity is even).
      ``explicit-samples``: ``matrices``.
    """
    p = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "linear-pencil":
        if "T0" in p:
            return OperatorFamily.linear_pencil(np.asarray(p["T0"], float), np.asarray(p["T1"], float))
        n = int(p.get("dim", 4))
        T0 = _random_symmetric(rng, n, p.get("scale", 1.0))
        D = _random_symmetric(rng, n)
        if "max_step" in p:
            D *= float(p["max_step"]) * rng.uniform(0.1, 1.0) / np.linalg.norm(D, 2)
        else:
            D *= p.get("scale", 1.0)
        return OperatorFamily.linear_pencil(T0, T0 + D)
    if kind == "rotating-eigenbundle":
        return OperatorFamily.rotating_eigenbundle(
            p.get("base_diagonal", [1.0, -1.0]), int(p.get("half_turns", 1)), tuple(p.get("plane", (0, 1))))
    if kind == "seeded-random-path":
        n = int(p.get("dim", 3))
        degree = int(p.get("degree", 2))
        coeffs = [_random_symmetric(rng, n, p.get("scale", 1.0)) for _ in range(degree + 1)]
        if p.get("doubled"):
            coeffs = [np.kron(np.eye(2), c) for c in coeffs]
        return OperatorFamily.polynomial(coeffs, params={"dim": n, "degree": degree,
                                                         "doubled": bool(p.get("doubled"))})
    if kind == "explicit-samples":
        return OperatorFamily.explicit_samples([np.asarray(m, float) for m in p["matrices"]])
    raise SpectralError(f"unknown family kind {kind!r}")

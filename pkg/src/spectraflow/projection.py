"""Orthogonal projectors onto the spectral subspace of an open interval.

``project_direct`` sums eigenvector outer products. ``project_contour`` runs
the trapezoid rule on the resolvent over the circle through the two interval
endpoints, taken counterclockwise::

    P = (1 / 2 pi i) \\oint (z - T)^{-1} dz

For a single eigenvalue at relative position ``a = (lambda - c) / r`` the M-node
rule returns ``1 / (1 - a^M)`` (inside) or ``-a^{-M} / (1 - a^{-M})`` (outside).
The error therefore decays geometrically, at a rate set by how close the
spectrum comes to the endpoints.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import SpectralError
from .family import OperatorFamily, _check_symmetric, eigen_decompose

ENDPOINT_TOL = 1e-8


@dataclass
class IntervalProjector:
    P: np.ndarray
    rank: int
    interval: tuple[float, float]
    gap_margin: float

    def residuals(self, T) -> dict:
        P = self.P
        return {
            "idempotence": float(np.max(np.abs(P @ P - P))),
            "symmetry": float(np.max(np.abs(P - P.T))),
            "trace": float(abs(np.trace(P) - self.rank)),
            "commutator": float(np.max(np.abs(P @ T - T @ P))),
        }

    def sidecar(self) -> str:
        return json.dumps({"rank": self.rank, "interval": list(self.interval),
                           "gap_margin": self.gap_margin}, sort_keys=True)


def _interval(interval) -> tuple[float, float]:
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    return lo, hi


def gap_margin(values: np.ndarray, interval) -> float:
    lo, hi = _interval(interval)
    return float(min(np.min(np.abs(values - lo)), np.min(np.abs(values - hi))))


def _check_gap(values, interval):
    lo, hi = _interval(interval)
    for end in (lo, hi):
        d = np.abs(values - end)
        i = int(np.argmin(d))
        if d[i] <= ENDPOINT_TOL:
            raise SpectralError(f"interval endpoint hits spectrum: eigenvalue {float(values[i])!r} near {end!r}")


def project_direct(T, interval) -> IntervalProjector:
    T = _check_symmetric(T)
    es = eigen_decompose(T)
    _check_gap(es.values, interval)
    lo, hi = _interval(interval)
    sel = (es.values > lo) & (es.values < hi)
    V = es.vectors[:, sel]
    return IntervalProjector(V @ V.T, int(sel.sum()), (lo, hi), gap_margin(es.values, interval))


def project_contour(T, interval, nodes: int = 64, threads=None) -> IntervalProjector:
    """Resolvent quadrature on the circle with diameter ``interval``.

    Node solves are independent; the results are summed in node order.
    """
    if nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    T = _check_symmetric(T)
    es = eigen_decompose(T)
    _check_gap(es.values, interval)
    lo, hi = _interval(interval)
    c, r = (lo + hi) / 2, (hi - lo) / 2
    n = T.shape[0]
    eye = np.eye(n)
    w = np.exp(2j * math.pi * np.arange(nodes) / nodes)

    def node(j):
        z = c + r * w[j]
        A = z * eye - T
        try:
            R = np.linalg.solve(A, eye)
        except np.linalg.LinAlgError:
            raise SpectralError(f"singular resolvent at quadrature node {j}") from None
        if not np.all(np.isfinite(R)) or np.linalg.cond(A) > 1e14:
            raise SpectralError(f"singular resolvent at quadrature node {j}")
        return (r * w[j]) * R

    terms = ordered_map(node, range(nodes), threads)
    Pc = np.zeros((n, n), dtype=complex)
    for term in terms:
        Pc += term
    Pc /= nodes
    imag = float(np.max(np.abs(Pc.imag)))
    if imag > 1e-8:
        raise SpectralError(f"contour projector has imaginary part {imag:.3e}")
    P = Pc.real
    P = (P + P.T) / 2
    rank = int(np.count_nonzero((es.values > lo) & (es.values < hi)))
    return IntervalProjector(P, rank, (lo, hi), gap_margin(es.values, interval))


def operator_distance(P: np.ndarray, Q: np.ndarray) -> float:
    return float(np.linalg.norm(P - Q, 2))


def constant_rank_loop(fam: OperatorFamily, interval, samples: int, threads=None) -> list[IntervalProjector]:
    """Projectors at ``t_i = i / samples`` for a loop whose interval endpoints stay off the spectrum.

    Raises if the rank changes, if an endpoint comes within 1e-8 of the
    spectrum, or if two consecutive projectors are 1 or more apart in operator norm.
    """
    if not fam.is_loop or not fam.check_loop():
        raise SpectralError("family is not a loop")
    ts = fam.grid(samples)

    def one(t):
        try:
            return project_direct(fam.evaluate(t), interval)
        except SpectralError as exc:
            raise SpectralError(f"gap violated at t={t:.6g}: {exc}") from None

    projs = ordered_map(one, ts, threads)
    for i, p in enumerate(projs[1:], start=1):
        if p.rank != projs[0].rank:
            raise SpectralError(f"rank changes from {projs[0].rank} to {p.rank} at sample {i} (t={ts[i]:.6g})")
        step = operator_distance(p.P, projs[i - 1].P)
        if step >= 1:
            raise SpectralError(f"projector jump {step:.3f} >= 1 at sample {i} (t={ts[i]:.6g})")
    return projs

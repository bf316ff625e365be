"""Maps comparing two inner products G and H on the same space.

``a = G^{-1} H`` is the unique map with ``G(a v, w) = H(v, w)``.
``b = a^{-1/2}`` takes G-orthonormal frames to H-orthonormal ones, and
``f = (det H / det G)^{1/4}`` is the volume factor. ``a`` is usually not a
symmetric matrix. Its self-adjointness holds in the G and H inner products,
and the residuals below are measured there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SpectralError


@dataclass(frozen=True)
class MetricPair:
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        for name in ("G", "H"):
            M = np.asarray(getattr(self, name), dtype=float)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise SpectralError(f"{name} must be square")
            if np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
                raise SpectralError(f"{name} is not symmetric")
            if np.linalg.eigvalsh(M)[0] <= 1e-12:
                raise SpectralError(f"{name} is not positive definite")
            object.__setattr__(self, name, (M + M.T) / 2)
        if self.G.shape != self.H.shape:
            raise SpectralError("G and H differ in shape")


def _pair(p, H=None) -> MetricPair:
    return p if isinstance(p, MetricPair) else MetricPair(np.asarray(p), np.asarray(H))


def a_map(p, H=None) -> np.ndarray:
    p = _pair(p, H)
    return np.linalg.solve(p.G, p.H)


def _g_eigen(p: MetricPair):
    """Solve ``H v = l G v``; the columns of ``V`` are G-orthonormal eigenvectors of ``a``."""
    return scipy.linalg.eigh(p.H, p.G)


def b_map(p, H=None) -> np.ndarray:
    """Principal inverse square root of ``a``, built in the G-orthonormal eigenbasis."""
    p = _pair(p, H)
    lam, V = _g_eigen(p)
    return (V / np.sqrt(lam)) @ V.T @ p.G


def frame_transform(p, frame, H=None) -> np.ndarray:
    """Send a G-orthonormal frame (columns) to an H-orthonormal one via ``b``."""
    p = _pair(p, H)
    F = np.asarray(frame, dtype=float)
    k = F.shape[1]
    if np.max(np.abs(F.T @ p.G @ F - np.eye(k))) > 1e-10:
        raise SpectralError("frame is not G-orthonormal")
    return b_map(p) @ F


def volume_factor(p, H=None) -> float:
    p = _pair(p, H)
    sg, lg = np.linalg.slogdet(p.G)
    sh, lh = np.linalg.slogdet(p.H)
    return float(np.exp((lh - lg) / 4))


def self_adjoint_residual(A: np.ndarray, M: np.ndarray) -> float:
    """``max |M A - (M A)^T|``: zero iff ``A`` is self-adjoint for the inner product ``M``."""
    X = M @ A
    return float(np.max(np.abs(X - X.T)))


def identification_report(p, H=None) -> dict:
    """All maps for one pair together with the residuals of their defining identities."""
    p = _pair(p, H)
    a = a_map(p)
    b = b_map(p)
    n = p.G.shape[0]
    eye = np.eye(n)
    a_back = a_map(MetricPair(p.H, p.G))
    b_back = b_map(MetricPair(p.H, p.G))
    return {
        "a": a,
        "b": b,
        "f": volume_factor(p),
        "residuals": {
            "G_a_minus_H": float(np.max(np.abs(p.G @ a - p.H))),
            "a_G_selfadjoint": self_adjoint_residual(a, p.G),
            "a_H_selfadjoint": self_adjoint_residual(a, p.H),
            "a_inverse_pairing": float(np.max(np.abs(a @ a_back - eye))),
            "b_squared_a": float(np.max(np.abs(b @ b @ a - eye))),
            "b_G_selfadjoint": self_adjoint_residual(b, p.G),
            "b_H_selfadjoint": self_adjoint_residual(b, p.H),
            "b_inverse_pairing": float(np.max(np.abs(b @ b_back - eye))),
            "f_inverse_pairing": abs(volume_factor(p) * volume_factor(MetricPair(p.H, p.G)) - 1.0),
        },
    }

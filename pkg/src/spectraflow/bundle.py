"""Orientation sign of a vector bundle over a circle, sampled as a loop of projectors.

A frame is carried around the loop by projecting it onto the next subspace and
re-orthonormalizing symmetrically. The closure matrix ``A = Psi_0^T Psi_N``
expresses the returning frame in the starting one. ``sign(det A) = -1`` means
the bundle is non-orientable, i.e. non-trivial.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SpectralError
from .family import OperatorFamily
from .projection import constant_rank_loop, operator_distance

CLOSURE_TOL = 1e-10
DET_FLOOR = 0.5

OBSTRUCTION = (
    "the interval eigenbundle over this loop is non-orientable; any continuous "
    "extension of the family over a disk bounded by this loop must, at some interior "
    "parameter, either lose the spectral gap at the interval endpoints or change the "
    "interval eigencount"
)
NO_OBSTRUCTION = "no obstruction detected"


def lowdin(X: np.ndarray) -> np.ndarray:
    """Symmetric orthonormalization ``X (X^T X)^{-1/2}``."""
    S = X.T @ X
    w, U = np.linalg.eigh(S)
    if w[0] <= 1e-12:
        raise np.linalg.LinAlgError("frame is rank deficient")
    return X @ (U / np.sqrt(w)) @ U.T


def range_basis(P: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis of ``range(P)`` with a deterministic column sign."""
    w, V = np.linalg.eigh((P + P.T) / 2)
    B = V[:, -rank:] if rank else V[:, :0]
    for j in range(B.shape[1]):
        i = int(np.argmax(np.abs(B[:, j])))
        if B[i, j] < 0:
            B[:, j] = -B[:, j]
    return B


@dataclass
class SubspaceLoop:
    projectors: list
    rank: int
    step_gaps: list = field(default_factory=list)

    @classmethod
    def from_projectors(cls, projectors: Sequence[np.ndarray]) -> "SubspaceLoop":
        Ps = [np.asarray(p, dtype=float) for p in projectors]
        if len(Ps) < 2:
            raise SpectralError("a loop needs at least two samples")
        if np.max(np.abs(Ps[-1] - Ps[0])) > CLOSURE_TOL:
            raise SpectralError("projector loop does not close: P_N != P_0")
        ranks = [int(round(np.trace(p))) for p in Ps]
        if len(set(ranks)) != 1:
            i = next(i for i, r in enumerate(ranks) if r != ranks[0])
            raise SpectralError(f"rank changes at sample {i}")
        gaps = [operator_distance(a, b) for a, b in zip(Ps, Ps[1:])]
        return cls(Ps, ranks[0], gaps)

    @classmethod
    def from_frames(cls, frames: Sequence[np.ndarray]) -> "SubspaceLoop":
        Ps = []
        for F in frames:
            Q, _ = np.linalg.qr(np.asarray(F, dtype=float).reshape(len(F), -1))
            Ps.append(Q @ Q.T)
        return cls.from_projectors(Ps)

    def __len__(self):
        return len(self.projectors)

    def rotated(self, start: int) -> "SubspaceLoop":
        """Same loop with the base point moved to sample ``start``."""
        body = self.projectors[:-1]
        body = body[start:] + body[:start]
        return SubspaceLoop.from_projectors(body + [body[0]])

    def doubled(self) -> "SubspaceLoop":
        return SubspaceLoop.from_projectors(self.projectors[:-1] + self.projectors)


@dataclass
class SignCertificate:
    closure_matrix: np.ndarray
    det_sign: int
    min_step_gap_slack: float
    orthonormality_residual: float

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.closure_matrix))


def propagate_frame(loop: SubspaceLoop, frame0: np.ndarray | None = None) -> SignCertificate:
    if max(loop.step_gaps) >= 1:
        i = int(np.argmax(loop.step_gaps))
        raise SpectralError(f"loop sampling too coarse at step {i}")
    psi0 = range_basis(loop.projectors[0], loop.rank) if frame0 is None else np.asarray(frame0, float)
    psi = psi0
    eye = np.eye(loop.rank)
    resid = float(np.max(np.abs(psi.T @ psi - eye))) if loop.rank else 0.0
    for i, P in enumerate(loop.projectors[1:]):
        try:
            psi = lowdin(P @ psi)
        except np.linalg.LinAlgError:
            raise SpectralError(f"loop sampling too coarse at step {i}") from None
        resid = max(resid, float(np.max(np.abs(psi.T @ psi - eye))))
    A = psi0.T @ psi
    det = float(np.linalg.det(A))
    if abs(det) < DET_FLOOR:
        raise SpectralError(f"closure matrix unreliable: |det A| = {abs(det):.3f} < {DET_FLOOR}")
    return SignCertificate(A, 1 if det > 0 else -1, 1.0 - max(loop.step_gaps), resid)


@dataclass
class StabilityVerdict:
    hypothesis_holds: bool
    distance: float
    sign_a: int | None = None
    sign_b: int | None = None


def sign_stability_check(loop_a: SubspaceLoop, loop_b: SubspaceLoop) -> StabilityVerdict:
    """Two loops whose projectors stay closer than 1 in operator norm have the same sign."""
    if len(loop_a) != len(loop_b) or loop_a.rank != loop_b.rank:
        raise SpectralError("loops must share sample count and rank")
    dist = max(operator_distance(p, q) for p, q in zip(loop_a.projectors, loop_b.projectors))
    if dist >= 1:
        return StabilityVerdict(False, dist)
    sa = propagate_frame(loop_a).det_sign
    sb = propagate_frame(loop_b).det_sign
    if sa != sb:
        raise SpectralError(f"sign stability violated: {sa} vs {sb} at distance {dist:.3f}")
    return StabilityVerdict(True, dist, sa, sb)


def transported_sign(H: Sequence[np.ndarray], E0, bundle: Sequence[np.ndarray] | None = None) -> int:
    """Sign of the bundle swept out by ``H(t) E0`` when ``H(1) = s H(0)``.

    ``E0`` is a basis (n x k) of the starting subspace. When ``bundle`` projectors
    are given, each transported subspace is checked against them to 1e-8. Returns
    ``s**k`` after confirming that the closure matrix of ``H(t) Psi_0`` is ``s * I``.
    """
    H = [np.asarray(h, dtype=float) for h in H]
    for i, h in enumerate(H):
        if np.max(np.abs(h.T @ h - np.eye(h.shape[0]))) > 1e-10:
            raise SpectralError(f"H at sample {i} is not orthogonal")
    H0inv = H[0].T
    ratio = H[-1] @ H0inv
    n = ratio.shape[0]
    if np.max(np.abs(ratio - np.eye(n))) <= 1e-10:
        s = 1
    elif np.max(np.abs(ratio + np.eye(n))) <= 1e-10:
        s = -1
    else:
        raise SpectralError("H(1) is not +-H(0)")
    psi0, _ = np.linalg.qr(np.asarray(E0, dtype=float).reshape(n, -1))
    k = psi0.shape[1]
    P0 = psi0 @ psi0.T
    if np.max(np.abs(H[0] @ P0 @ H[0].T - P0)) > 1e-8:
        raise SpectralError("E0 is not invariant under H(0)")
    frames = [h @ H0inv @ psi0 for h in H]
    if bundle is not None:
        for i, (F, P) in enumerate(zip(frames, bundle)):
            if np.max(np.abs(P @ F - F)) > 1e-8:
                raise SpectralError(f"transported subspace leaves the bundle at sample {i}")
    A = psi0.T @ frames[-1]
    if np.max(np.abs(A - s * np.eye(k))) > 1e-6:
        raise SpectralError("closure matrix of the transported frame is not s * I")
    return s ** k


@dataclass
class LassoCertificate:
    sign: int
    rank: int
    samples: int
    interval: tuple
    min_gap_margin: float
    max_step_gap: float
    closure_matrix: np.ndarray

    @property
    def statement(self) -> str:
        return OBSTRUCTION if self.sign < 0 else NO_OBSTRUCTION

    def to_dict(self) -> dict:
        return {
            "sign": self.sign,
            "rank": self.rank,
            "samples": self.samples,
            "interval": [float(x) for x in self.interval],
            "min_gap_margin": self.min_gap_margin,
            "max_step_gap": self.max_step_gap,
            "closure_matrix": np.asarray(self.closure_matrix).tolist(),
            "statement": self.statement,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def lasso_certificate(fam: OperatorFamily, interval, samples: int, threads=None) -> LassoCertificate:
    projs = constant_rank_loop(fam, interval, samples, threads)
    loop = SubspaceLoop.from_projectors([p.P for p in projs])
    cert = propagate_frame(loop)
    return LassoCertificate(
        sign=cert.det_sign,
        rank=loop.rank,
        samples=samples,
        interval=tuple(projs[0].interval),
        min_gap_margin=min(p.gap_margin for p in projs),
        max_step_gap=max(loop.step_gaps),
        closure_matrix=cert.closure_matrix,
    )

"""Parametrized families of real symmetric matrices over t in [0, 1].

Everything here works on sampled grids ``t_i = i / N``, ``i = 0..N``. Samples
are eigendecomposed independently (and concurrently). Branch matching and flow
accumulation then run as sequential passes over the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from ._parallel import ordered_map
from .errors import SpectralError
from .spectrum import align, arsinh, ordered_spectrum

SYMMETRY_RTOL = 1e-12
LOOP_TOL = 1e-12
ENDPOINT_ZERO_TOL = 1e-9
COARSE_OVERLAP = 0.1
CLUSTER_TOL = 1e-9

KINDS = ("explicit-samples", "linear-pencil", "rotating-eigenbundle", "seeded-random-path", "callable")


def _check_symmetric(T: np.ndarray) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise SpectralError(f"expected a square matrix, got shape {T.shape}")
    scale = max(1.0, float(np.max(np.abs(T))) if T.size else 1.0)
    asym = float(np.max(np.abs(T - T.T))) if T.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise SpectralError(f"matrix is not symmetric (max |T - T^T| = {asym:.3e})")
    return (T + T.T) / 2


def rotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass
class OperatorFamily:
    """t -> real symmetric ``dim x dim`` matrix on [0, 1]."""

    dim: int
    kind: str
    func: Callable[[float], np.ndarray] = field(repr=False)
    is_loop: bool = False
    params: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise SpectralError("zero dimension")
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")

    def evaluate(self, t: float) -> np.ndarray:
        T = _check_symmetric(self.func(float(t)))
        if T.shape != (self.dim, self.dim):
            raise SpectralError(f"family returned shape {T.shape}, expected {(self.dim, self.dim)}")
        return T

    __call__ = evaluate

    def grid(self, samples: int) -> np.ndarray:
        if samples < 1:
            raise ValueError("need at least one grid step")
        return np.linspace(0.0, 1.0, samples + 1)

    def check_loop(self) -> bool:
        return bool(np.max(np.abs(self.evaluate(1.0) - self.evaluate(0.0))) <= LOOP_TOL)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_function(cls, func, dim: int, is_loop: bool = False) -> "OperatorFamily":
        return cls(dim, "callable", func, is_loop)

    @classmethod
    def linear_pencil(cls, T0, T1) -> "OperatorFamily":
        T0 = _check_symmetric(T0)
        T1 = _check_symmetric(T1)
        if T0.shape != T1.shape:
            raise SpectralError("pencil endpoints differ in shape")
        D = T1 - T0
        return cls(T0.shape[0], "linear-pencil", lambda t: T0 + t * D,
                   is_loop=bool(np.max(np.abs(D)) <= LOOP_TOL) if D.size else True,
                   params={"T0": T0, "T1": T1})

    @classmethod
    def rotating_eigenbundle(cls, base_diagonal: Sequence[float], half_turns: int = 1,
                             plane: tuple[int, int] = (0, 1)) -> "OperatorFamily":
        """``R(pi * half_turns * t) D R(...)^T`` with ``R`` rotating one coordinate plane.

        Any integer number of half turns closes up, since ``R(pi) = -1`` on the plane.
        """
        d = np.asarray(base_diagonal, dtype=float)
        n = d.size
        i, j = plane
        if n < 2 or not (0 <= i < n and 0 <= j < n and i != j):
            raise SpectralError("rotating eigenbundle needs dim >= 2 and a valid plane")
        D = np.diag(d)

        def func(t):
            R = np.eye(n)
            R[np.ix_([i, j], [i, j])] = rotation_2d(math.pi * half_turns * t)
            return R @ D @ R.T

        return cls(n, "rotating-eigenbundle", func, is_loop=float(half_turns).is_integer(),
                   params={"base_diagonal": d.tolist(), "half_turns": half_turns, "plane": [i, j]})

    @classmethod
    def polynomial(cls, coeffs: Sequence[np.ndarray], kind: str = "seeded-random-path",
                   params: dict | None = None) -> "OperatorFamily":
        """``sum_p coeffs[p] * t**p`` with symmetric coefficient matrices."""
        C = [_check_symmetric(c) for c in coeffs]

        def func(t):
            out = np.zeros_like(C[0])
            for c in reversed(C):
                out = out * t + c
            return out

        return cls(C[0].shape[0], kind, func, params=params or {"coeffs": C})

    @classmethod
    def explicit_samples(cls, matrices: Sequence[np.ndarray]) -> "OperatorFamily":
        """Piecewise-linear interpolation of matrices placed at ``t = i / (len - 1)``."""
        M = [_check_symmetric(m) for m in matrices]
        if len(M) < 2:
            raise SpectralError("explicit family needs at least two samples")
        N = len(M) - 1

        def func(t):
            x = min(max(t, 0.0), 1.0) * N
            i = min(int(math.floor(x)), N - 1)
            w = x - i
            return (1 - w) * M[i] + w * M[i + 1]

        is_loop = bool(np.max(np.abs(M[-1] - M[0])) <= LOOP_TOL)
        return cls(M[0].shape[0], "explicit-samples", func, is_loop, {"matrices": M})

    def concatenate(self, other: "OperatorFamily") -> "OperatorFamily":
        """Run ``self`` on [0, 1/2] and ``other`` on [1/2, 1]."""
        if other.dim != self.dim:
            raise SpectralError("cannot concatenate families of different dimension")
        if np.max(np.abs(self.evaluate(1.0) - other.evaluate(0.0))) > 1e-10:
            raise SpectralError("families do not meet at the junction")
        first, second = self, other
        return OperatorFamily(self.dim, "callable",
                              lambda t: first.func(2 * t) if t <= 0.5 else second.func(2 * t - 1))


@dataclass
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray

    def residual(self, T: np.ndarray) -> float:
        return float(np.max(np.linalg.norm(T @ self.vectors - self.vectors * self.values, axis=0)))


def eigen_decompose(T) -> EigenSystem:
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix."""
    w, V = np.linalg.eigh(_check_symmetric(T))
    return EigenSystem(w, V)


def sample_eigensystems(fam: OperatorFamily, ts, threads=None) -> list[EigenSystem]:
    return ordered_map(lambda t: eigen_decompose(fam.evaluate(t)), ts, threads)


# -- Kato growth constants ----------------------------------------------------

C1 = 0.25
R_CUT = 2.0
C0 = math.sqrt(2.0)  # sup_t (1 + |t|) / sqrt(1 + t^2), attained at |t| = 1


@dataclass(frozen=True)
class KatoConstants:
    alpha: float
    beta: float
    c: float
    r_cut: float = R_CUT
    c0: float = C0
    c1: float = C1
    c2: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "c2", min(1.0 / (self.r_cut + 1.0), 1.0 / (2.0 * self.c0)))


def _min_graph_ratio(A: np.ndarray, B: np.ndarray, starts: np.ndarray) -> float:
    """min over u != 0 of ``(|u| + |A u|) / (|u| + |B u|)``, screened over starts then refined."""
    AtA, BtB = A.T @ A, B.T @ B

    def f(u):
        nu = np.linalg.norm(u)
        Au, Bu = A @ u, B @ u
        na, nb = np.linalg.norm(Au), np.linalg.norm(Bu)
        num, den = nu + na, nu + nb
        g_nu = u / nu
        g_na = AtA @ u / na if na > 0 else np.zeros_like(u)
        g_nb = BtB @ u / nb if nb > 0 else np.zeros_like(u)
        grad = ((g_nu + g_na) * den - (g_nu + g_nb) * num) / den**2
        return num / den, grad

    vals = [f(s)[0] for s in starts.T]
    idx = int(np.argmin(vals))
    best = vals[idx]
    # refine only the best start; the other starts rarely improve on it
    res = minimize(f, starts[:, idx], jac=True, method="BFGS", options={"gtol": 1e-9, "maxiter": 100})
    if np.isfinite(res.fun):
        best = min(best, float(res.fun))
    return best


def kato_constants(fam: OperatorFamily, grid_points: int = 101, seed: int = 0) -> KatoConstants:
    """Growth constants for a linear pencil ``T0 + t (T1 - T0)``, graph norm taken at ``T0``.

    ``beta`` is the operator 2-norm of the derivative, an upper bound for its
    norm measured from the graph norm. ``alpha`` is the smallest graph-norm ratio
    found by local minimization on ``grid_points`` values of t.
    """
    if fam.kind != "linear-pencil":
        raise SpectralError("kato_constants needs a linear-pencil family")
    T0, T1 = fam.params["T0"], fam.params["T1"]
    n = fam.dim
    beta = float(np.linalg.norm(T1 - T0, 2))
    rng = np.random.default_rng(seed)
    V0 = np.linalg.eigh(T0)[1]
    alpha = math.inf
    for t in np.linspace(0.0, 1.0, grid_points):
        Dt = fam.evaluate(t)
        starts = np.hstack([V0, np.linalg.eigh(Dt)[1], rng.standard_normal((n, 4))])
        alpha = min(alpha, _min_graph_ratio(Dt, T0, starts))
    alpha = min(alpha, 1.0)  # the ratio is exactly 1 at t = 0
    return KatoConstants(alpha=alpha, beta=beta, c=beta / alpha)


def delta_for_epsilon(k: KatoConstants, eps: float) -> float:
    """Parameter radius within which every eigenvalue branch moves less than ``eps`` in arsinh."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if k.c == 0:
        return math.inf
    return math.log(min(k.c1, eps * k.c2) + 1.0) / k.c


# -- branch tracking ------------------------------------------------------------

def _clusters(values: np.ndarray, tol: float):
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol * max(1.0, abs(values[i])):
            groups.append(list(range(start, i)))
            start = i
    return groups


def _align_degenerate(values, vectors, prev):
    """Rotate eigenvectors inside each degenerate cluster towards the previous frame."""
    V = vectors.copy()
    for g in _clusters(values, CLUSTER_TOL):
        if len(g) < 2:
            continue
        Vg = V[:, g]
        M = Vg.T @ prev                                        # c x n
        weights = np.linalg.norm(M, axis=0)
        nearest = np.argsort(-weights, kind="stable")[:len(g)]
        U, _, Wt = np.linalg.svd(M[:, nearest])
        V[:, g] = Vg @ (U @ Wt)
    return V


@dataclass
class Branches:
    """Tracked eigenvalue branches: ``values[j, i]`` is branch ``j`` at ``ts[i]``."""

    ts: np.ndarray
    values: np.ndarray
    min_overlap: float


def track_branches(fam: OperatorFamily, samples: int, threads=None) -> Branches:
    """Follow eigenvalues through crossings by matching eigenvector overlaps.

    At each step the pair with the largest ``|<v_i, w_j>|`` is matched first;
    near-equal overlaps go to the pair with closer eigenvalues.
    """
    if samples < 2:
        raise ValueError("need samples >= 2")
    ts = fam.grid(samples)
    systems = sample_eigensystems(fam, ts, threads)
    n = fam.dim
    values = np.empty((n, ts.size))
    values[:, 0] = systems[0].values
    prev_vecs = systems[0].vectors
    worst = 1.0
    for i in range(1, ts.size):
        es = systems[i]
        vecs = _align_degenerate(es.values, es.vectors, prev_vecs)
        O = np.abs(prev_vecs.T @ vecs)
        gaps = np.abs(values[:, i - 1][:, None] - es.values[None, :])
        order = np.lexsort((gaps.ravel(), -np.round(O, 12).ravel()))
        used_a, used_b = set(), set()
        new_vecs = np.empty_like(prev_vecs)
        for flat in order:
            a, b = divmod(int(flat), n)
            if a in used_a or b in used_b:
                continue
            ov = O[a, b]
            if ov < COARSE_OVERLAP:
                raise SpectralError(f"grid too coarse between t={ts[i - 1]:.6g} and t={ts[i]:.6g}")
            worst = min(worst, ov)
            used_a.add(a)
            used_b.add(b)
            values[a, i] = es.values[b]
            v = vecs[:, b]
            new_vecs[:, a] = v if v @ prev_vecs[:, a] >= 0 else -v
            if len(used_a) == n:
                break
        prev_vecs = new_vecs
    return Branches(ts, values, worst)


@dataclass
class GrowthReport:
    max_ratio: float
    violations: int
    pairs_checked: int
    delta: float | None = None
    eps: float | None = None
    max_arsinh_step: float | None = None

    @property
    def ok(self) -> bool:
        arsinh_ok = self.max_arsinh_step is None or self.max_arsinh_step < self.eps
        return self.violations == 0 and arsinh_ok


def verify_growth_bound(branches: Branches, k: KatoConstants, eps: float | None = None,
                        slack: float = 1e-9) -> GrowthReport:
    """Check ``|l(t) - l(t0)| <= (1 + |l(t0)|)(exp(C |t - t0|) - 1)`` on all sample pairs.

    With ``eps`` given, also checks that pairs closer than ``delta_for_epsilon(k, eps)``
    differ by less than ``eps`` in arsinh.
    """
    ts = branches.ts
    dt = np.abs(ts[:, None] - ts[None, :])
    growth = np.expm1(k.c * dt)
    max_ratio, violations, count = 0.0, 0, 0
    max_step = None
    delta = None
    if eps is not None:
        delta = delta_for_epsilon(k, eps)
        close = dt <= delta
        max_step = 0.0
    for lam in branches.values:
        lhs = np.abs(lam[:, None] - lam[None, :])     # rows t, columns t0
        rhs = (1.0 + np.abs(lam[None, :])) * growth
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(lhs == 0, 0.0, lhs / rhs)
        max_ratio = max(max_ratio, float(np.max(ratio)))
        violations += int(np.count_nonzero(lhs > rhs + slack))
        count += lhs.size
        if eps is not None:
            a = arsinh(lam)
            diff = np.abs(a[:, None] - a[None, :])
            max_step = max(max_step, float(np.max(np.where(close, diff, 0.0))))
    return GrowthReport(max_ratio, violations, count, delta, eps, max_step)


# -- spectral flow --------------------------------------------------------------

def _check_endpoints(fam: OperatorFamily):
    for t in (0.0, 1.0):
        w = np.linalg.eigvalsh(fam.evaluate(t))
        near = w[np.abs(w) <= ENDPOINT_ZERO_TOL]
        if near.size:
            raise SpectralError(f"0 is an eigenvalue at t={t:g} (|lambda| = {abs(near[0]):.3e} <= 1e-9)")


def flow_by_alignment(fam: OperatorFamily, samples: int, threads=None) -> int:
    """Sum of per-step index shifts between consecutive ordered spectra.

    A step is refused as too coarse unless its best shift beats every other
    admissible shift by at least a factor of two in distance.
    """
    ts = fam.grid(samples)
    spectra = ordered_map(lambda t: ordered_spectrum(np.linalg.eigvalsh(fam.evaluate(t))), ts, threads)
    max_shift = max(fam.dim - 1, 0)
    total = 0
    for i in range(len(spectra) - 1):
        res = align(spectra[i], spectra[i + 1], max_shift=max_shift)
        other = res.runner_up()
        if res.distance > 1e-12 and not res.distance < 0.5 * other:
            raise SpectralError(
                f"grid too coarse: shift at t={ts[i]:.6g} is ambiguous "
                f"(best {res.distance:.3e}, runner-up {other:.3e})")
        total += res.shift
    return total


def flow_by_crossings(branches: Branches) -> int:
    """Signed count of branch sign changes; nonnegative values count as above 0."""
    neg = branches.values < 0
    up = neg[:, :-1] & ~neg[:, 1:]
    down = ~neg[:, :-1] & neg[:, 1:]
    return int(up.sum() - down.sum())


def spectral_flow(fam: OperatorFamily, samples: int, method: str = "both", threads=None) -> int:
    """Net number of eigenvalues crossing 0 upwards along the family.

    ``method`` is ``"shift-align"``, ``"zero-crossing"`` or ``"both"``. With
    ``"both"``, a disagreement between the two raises.
    """
    if method not in ("shift-align", "zero-crossing", "both"):
        raise ValueError(f"unknown method {method!r}")
    _check_endpoints(fam)
    results = {}
    if method in ("shift-align", "both"):
        results["shift-align"] = flow_by_alignment(fam, samples, threads)
    if method in ("zero-crossing", "both"):
        results["zero-crossing"] = flow_by_crossings(track_branches(fam, samples, threads))
    vals = set(results.values())
    if len(vals) != 1:
        raise SpectralError(f"spectral flow methods disagree: {results}")
    return vals.pop()


# -- variational checks -----------------------------------------------------------

@dataclass
class MinMaxReport:
    k: int
    eigenvalue: float
    eigen_subspace_max: float
    min_random_max: float
    trials: int
    violations: int

    @property
    def ok(self) -> bool:
        return abs(self.eigen_subspace_max - self.eigenvalue) <= 1e-9 and self.violations == 0


def max_rayleigh(T: np.ndarray, W: np.ndarray) -> float:
    """Largest Rayleigh quotient of ``T`` on the column span of ``W``."""
    Q, _ = np.linalg.qr(W)
    return float(np.linalg.eigvalsh(Q.T @ T @ Q)[-1])


def min_max_check(T, k: int, trials: int, rng=None) -> MinMaxReport:
    """Compare the k-th eigenvalue (1-based) with max Rayleigh quotients on k-dim subspaces."""
    T = _check_symmetric(T)
    n = T.shape[0]
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    rng = np.random.default_rng(rng)
    es = eigen_decompose(T)
    lam = float(es.values[k - 1])
    eig_max = max_rayleigh(T, es.vectors[:, :k])
    worst, bad = math.inf, 0
    for _ in range(trials):
        m = max_rayleigh(T, rng.standard_normal((n, k)))
        worst = min(worst, m)
        bad += m < lam - 1e-9
    return MinMaxReport(k, lam, eig_max, worst, trials, bad)


def eigencount_bound(T, W) -> tuple[int, float]:
    """Rayleigh bound ``L`` on ``span(W)``; at least ``rank W`` eigenvalues are <= ``L``.

    Returns the number of eigenvalues ``<= L + 1e-9`` together with ``L``.
    """
    T = _check_symmetric(T)
    L = max_rayleigh(T, np.asarray(W, dtype=float))
    return int(np.count_nonzero(np.linalg.eigvalsh(T) <= L + 1e-9)), L


@dataclass
class RayleighDistanceReport:
    distance_sq: float
    bound: float
    eps: float
    ok: bool


def rayleigh_distance_check(T, level: float, x) -> RayleighDistanceReport:
    """Distance from a unit vector to the eigenspace below ``level``.

    Needs ``T >= 0`` and ``level`` not an eigenvalue. With ``eps = max(0, <Tx, x> - level)``
    and ``l_next`` the first eigenvalue above ``level``, checks
    ``d(V, x)^2 <= (level + eps) / l_next``.
    """
    T = _check_symmetric(T)
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise SpectralError("x must be a unit vector")
    es = eigen_decompose(T)
    if es.values[0] < -1e-12:
        raise SpectralError(f"operator is not nonnegative (lowest eigenvalue {es.values[0]:.3e})")
    if np.min(np.abs(es.values - level)) <= 1e-12:
        raise SpectralError(f"level {level} is an eigenvalue")
    above = es.values > level
    if not above.any():
        raise SpectralError("no eigenvalue above level")
    lam_next = float(es.values[above][0])
    V = es.vectors[:, ~above]
    resid = x - V @ (V.T @ x)
    d2 = float(resid @ resid)
    eps = max(0.0, float(x @ T @ x) - level)
    bound = (level + eps) / lam_next
    return RayleighDistanceReport(d2, bound, eps, d2 <= bound + 1e-9)


# -- real-analytic partners ---------------------------------------------------------

@dataclass
class PairingReport:
    """Partners found for each branch (0-based), or the first sample with an odd multiplicity."""

    partners: dict = field(default_factory=dict)
    failing_t: float | None = None

    @property
    def partner(self):
        return self.partners.get(0)

    @property
    def ok(self) -> bool:
        return self.failing_t is None


def detect_paired_branches(fam: OperatorFamily, samples: int, tol: float = 1e-8) -> PairingReport:
    br = track_branches(fam, samples)
    for i, t in enumerate(br.ts):
        col = br.values[:, i]
        for v in col:
            if np.count_nonzero(np.abs(col - v) <= tol) % 2:
                return PairingReport(failing_t=float(t))
    partners = {}
    n = br.values.shape[0]
    for a in range(n):
        for b in range(n):
            if b != a and np.max(np.abs(br.values[a] - br.values[b])) <= tol:
                partners[a] = b
                break
    return PairingReport(partners)

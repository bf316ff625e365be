"""Acceptance criteria 1-10, each at its stated tolerance and time limit.

Every check prints one PASS/FAIL line; run ``pytest tests/test_acceptance.py -v``
to see them alongside the pytest verdicts.
"""

import math
import time

import numpy as np
import pytest

from spectraflow import OperatorFamily, SpectralError
from spectraflow.bundle import SubspaceLoop, lasso_certificate, propagate_frame, sign_stability_check
from spectraflow.clifford import rotation_lift, rotation_matrix, theta
from spectraflow.family import (kato_constants, min_max_check, rayleigh_distance_check, spectral_flow,
                                track_branches, verify_growth_bound)
from spectraflow.identification import a_map, b_map, frame_transform, volume_factor
from spectraflow.model_spectra import sphere_levels, sphere_spectrum, synthetic_family
from spectraflow.projection import constant_rank_loop, project_contour, project_direct
from spectraflow.spectrum import align


def crit_sphere_table():
    bad = []
    for m in range(2, 9):
        levels = sphere_levels(m, 6)
        window = sphere_spectrum(m, 6)
        for k in range(6):
            lam = m / 2 + k
            mu = 2 ** (m // 2) * math.comb(m + k - 1, k)
            if (lam, mu) not in levels or (-lam, mu) not in levels:
                bad.append((m, k))
            if window.values.count(lam) != mu or window.values.count(-lam) != mu:
                bad.append((m, k, "window"))
    return not bad, f"{7 * 6} (m, k) pairs, mismatches {bad}"


def crit_rotation_lift():
    worst = 0.0
    for m in (2, 3, 4, 8):
        for alpha in np.linspace(0, 4 * math.pi, 100):
            worst = max(worst, float(np.max(np.abs(theta(rotation_lift(alpha, m)) - rotation_matrix(alpha, m)))))
    odd = all(rotation_lift(2 * math.pi, m).value == -rotation_lift(0.0, m).value for m in (2, 3, 4, 8))
    return worst <= 1e-12 and odd, f"max entry error {worst:.2e}, lift(2pi) = -lift(0): {odd}"


def _pencils(count, start=0, **params):
    out, seed = [], start
    while len(out) < count:
        fam = synthetic_family("linear-pencil", {"dim": 2 + seed % 11, "scale": 3, **params}, seed)
        ends = np.concatenate([np.linalg.eigvalsh(fam.evaluate(0)), np.linalg.eigvalsh(fam.evaluate(1))])
        if np.min(np.abs(ends)) >= 1e-3:
            out.append(fam)
        seed += 1
    return out


def crit_flow():
    disagree, flows = 0, []
    for fam in _pencils(50):
        a = spectral_flow(fam, 200, "shift-align")
        b = spectral_flow(fam, 200, "zero-crossing")
        disagree += a != b
        flows.append(a)
    canon = OperatorFamily.from_function(lambda t: np.diag([2 * t - 1, 5, -5, 10, -10]), 5)
    c = spectral_flow(canon, 200, "both")
    return disagree == 0 and c == 1, f"50 pencils, {disagree} disagreements, flows {sorted(set(flows))}; canonical flow {c}"


def crit_kato():
    worst, worst_step, failures = 0.0, 0.0, 0
    eps = 0.1
    for fam in _pencils(20, start=1000, max_step=0.5):
        assert np.linalg.norm(fam.evaluate(1) - fam.evaluate(0), 2) < 0.5
        k = kato_constants(fam)
        rep = verify_growth_bound(track_branches(fam, 100), k, eps=eps)
        worst = max(worst, rep.max_ratio)
        worst_step = max(worst_step, rep.max_arsinh_step)
        failures += rep.max_ratio > 1 + 1e-9 or rep.max_arsinh_step >= eps
    return failures == 0, f"max growth ratio {worst:.4f}, max arsinh change within delta {worst_step:.4f} < {eps}"


def crit_projector():
    rng = np.random.default_rng(20240611)
    errs, inv = [], 0.0
    while len(errs) < 20:
        A = rng.standard_normal((8, 8))
        T = (A + A.T) / 2
        w = np.linalg.eigvalsh(T)
        interval = ((w[1] + w[2]) / 2, (w[5] + w[6]) / 2)
        radius = (interval[1] - interval[0]) / 2
        direct = project_direct(T, interval)
        if direct.gap_margin < 0.1 * radius:
            continue
        contour = project_contour(T, interval, nodes=64)
        errs.append(float(np.linalg.norm(contour.P - direct.P, "fro")))
        for p in (direct, contour):
            inv = max(inv, *p.residuals(T).values())
    worst = max(errs)
    ok = worst <= 1e-8 and inv <= 1e-8
    return ok, f"max ||P_contour - P_direct||_F = {worst:.2e} (median {np.median(errs):.2e}), max invariant residual {inv:.2e}"


def crit_lasso():
    fam = OperatorFamily.rotating_eigenbundle([1.0, -1.0])
    signs = [lasso_certificate(fam, (0.0, 2.0), n).sign for n in (32, 64, 128)]
    loop = SubspaceLoop.from_projectors([p.P for p in constant_rank_loop(fam, (0.0, 2.0), 64)])
    doubled = propagate_frame(loop.doubled()).det_sign
    T0 = fam.evaluate(0.0)
    grid = np.linspace(0, 1, 41)
    gaps = np.array([[np.diff(np.linalg.eigvalsh((1 - s) * fam.evaluate(t) + s * T0))[0] for t in grid]
                     for s in grid])
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
    near = abs(grid[i] - 0.5) <= 0.05 and abs(grid[j] - 0.5) <= 0.05
    ok = signs == [-1, -1, -1] and doubled == 1 and gaps[i, j] < 1e-6 and near
    return ok, f"signs {signs}, doubled {doubled:+d}, min gap {gaps[i, j]:.1e} at (s, t) = ({grid[i]:.3f}, {grid[j]:.3f})"


def _line_loop(phase, tilt, samples=64):
    frames = []
    for t in np.linspace(0, 1, samples + 1):
        a, b = math.pi * t + phase(t), tilt(t)
        frames.append(np.array([math.cos(a), math.sin(a) * math.cos(b), math.sin(a) * math.sin(b)]))
    return SubspaceLoop.from_frames(frames)


def crit_sign_stability():
    rng = np.random.default_rng(7)
    base = _line_loop(lambda t: 0.0, lambda t: 0.0)
    preserved, tried, worst = 0, 0, 0.0
    while tried < 100:
        ca, sa, cb, sb = rng.uniform(-0.12, 0.12, 4)
        f1, f2 = rng.integers(1, 5, 2)

        def phase(t):
            return ca * (math.cos(2 * math.pi * f1 * t) - 1) + sa * math.sin(2 * math.pi * f1 * t)

        def tilt(t):
            return cb * math.sin(2 * math.pi * f2 * t) + sb * math.sin(4 * math.pi * f2 * t)

        loop = _line_loop(phase, tilt)
        dist = max(np.linalg.norm(p - q, 2) for p, q in zip(base.projectors, loop.projectors))
        if dist >= 0.5:
            continue
        tried += 1
        worst = max(worst, dist)
        v = sign_stability_check(base, loop)
        preserved += v.hypothesis_holds and v.sign_a == v.sign_b == -1
    return preserved == 100, f"{preserved}/100 perturbed loops keep sign -1, max projector distance {worst:.3f}"


def crit_minmax_rayleigh():
    rng = np.random.default_rng(11)
    eig_err, beat, ray_fail, checked = 0.0, 0, 0, 0
    for _ in range(50):
        n = int(rng.integers(3, 11))
        A = rng.standard_normal((n, n))
        T = (A + A.T) / 2
        k = int(rng.integers(1, n))
        rep = min_max_check(T, k, 100, rng=rng)
        eig_err = max(eig_err, abs(rep.eigen_subspace_max - rep.eigenvalue))
        beat += rep.min_random_max < rep.eigenvalue - 1e-9
        w = np.linalg.eigvalsh(T)
        Tpos = T - (w[0] - 0.1) * np.eye(n)
        wp = w - (w[0] - 0.1)
        if wp[k] - wp[k - 1] < 1e-9:
            continue
        level = (wp[k - 1] + wp[k]) / 2
        for _ in range(40):
            x = rng.standard_normal(n)
            x /= np.linalg.norm(x)
            ray_fail += not rayleigh_distance_check(Tpos, level, x).ok
            checked += 1
    ok = eig_err <= 1e-9 and beat == 0 and ray_fail == 0
    return ok, f"max |max R - lambda_k| {eig_err:.1e}, random wins {beat}, Rayleigh failures {ray_fail}/{checked}"


def _spd(rng, n):
    A = rng.standard_normal((n, n))
    return A @ A.T / n + np.eye(n)


def crit_identification():
    rng = np.random.default_rng(3)
    a_res = f_res = frame_res = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 11))
        G, H, K = (_spd(rng, n) for _ in range(3))
        a_res = max(a_res, float(np.max(np.abs(a_map(G, H) @ a_map(H, K) - a_map(G, K)))))
        f_res = max(f_res, abs(volume_factor(G, H) * volume_factor(H, K) - volume_factor(G, K)))
        F = np.linalg.cholesky(np.linalg.inv(G))
        out = frame_transform(G, F, H)
        frame_res = max(frame_res, float(np.max(np.abs(out.T @ H @ out - np.eye(n)))))
    commuting = 0.0
    for _ in range(20):
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        G, H, K = (Q @ np.diag(rng.uniform(0.5, 4, 5)) @ Q.T for _ in range(3))
        commuting = max(commuting, float(np.max(np.abs(b_map(G, H) @ b_map(H, K) - b_map(G, K)))))
    R = np.array([[math.cos(0.6), -math.sin(0.6)], [math.sin(0.6), math.cos(0.6)]])
    G, H, K = np.eye(2), np.diag([1.0, 4.0]), R @ np.diag([1.0, 9.0]) @ R.T
    violation = float(np.max(np.abs(b_map(G, H) @ b_map(H, K) - b_map(G, K))))
    ok = a_res <= 1e-10 and f_res <= 1e-10 and frame_res <= 1e-10 and commuting <= 1e-10 and violation >= 1e-3
    return ok, (f"a {a_res:.1e}, f {f_res:.1e}, frame {frame_res:.1e}, b commuting {commuting:.1e}, "
                f"b non-commuting {violation:.3f}")


def crit_alignment():
    misses = []
    for m in range(2, 9):
        w = sphere_spectrum(m, 6)
        for z in range(-5, 6):
            res = align(w, w.shifted(z), max_shift=5)
            if res.shift != z or res.distance != 0.0:
                misses.append((m, z, res.shift, res.distance))
    return not misses, f"7 windows x 11 shifts, misses {misses}"


CRITERIA = [
    (1, "sphere spectrum table", crit_sphere_table, 1.0),
    (2, "rotation lift", crit_rotation_lift, 1.0),
    (3, "spectral flow", crit_flow, 10.0),
    (4, "Kato growth bound", crit_kato, 30.0),
    (5, "projector equivalence", crit_projector, 10.0),
    (6, "Lasso certificate", crit_lasso, 10.0),
    (7, "sign stability", crit_sign_stability, 10.0),
    (8, "min-max and Rayleigh", crit_minmax_rayleigh, 10.0),
    (9, "identification maps", crit_identification, 5.0),
    (10, "alignment", crit_alignment, None),
]


@pytest.mark.parametrize("number, name, check, limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, name, check, limit, capsys):
    start = time.perf_counter()
    try:
        ok, detail = check()
    except SpectralError as exc:
        ok, detail = False, f"refused: {exc}"
    elapsed = time.perf_counter() - start
    in_time = limit is None or elapsed < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    budget = "" if limit is None else f" / {limit:g} s"
    with capsys.disabled():
        print(f"\n[{verdict}] criterion {number} ({name}): {detail}; {elapsed:.2f} s{budget}")
    assert ok, detail
    assert in_time, f"took {elapsed:.2f} s, limit {limit} s"

import json
import math

import numpy as np
import pytest

from conftest import random_symmetric
from spectraflow import OperatorFamily, SpectralError
from spectraflow.bundle import (NO_OBSTRUCTION, OBSTRUCTION, SubspaceLoop, lasso_certificate, lowdin,
                                propagate_frame, range_basis, sign_stability_check, transported_sign)
from spectraflow.family import rotation_2d
from spectraflow.projection import constant_rank_loop


def loop_of(fam, interval=(0.0, 2.0), samples=64):
    return SubspaceLoop.from_projectors([p.P for p in constant_rank_loop(fam, interval, samples)])


def mobius(half_turns=1, extra=(5.0,)):
    return OperatorFamily.rotating_eigenbundle([1.0, -1.0, *extra], half_turns=half_turns)


def test_lowdin_orthonormalises(rng):
    X = rng.standard_normal((6, 3))
    Y = lowdin(X)
    assert np.allclose(Y.T @ Y, np.eye(3), atol=1e-14)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
    assert np.allclose(lowdin(Q), Q, atol=1e-14)


def test_lowdin_equivariance(rng):
    X = rng.standard_normal((5, 3))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    U, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    assert np.allclose(lowdin(X @ Q), lowdin(X) @ Q, atol=1e-13)
    assert np.allclose(lowdin(U @ X), U @ lowdin(X), atol=1e-13)


def test_lowdin_rank_deficient():
    with pytest.raises(np.linalg.LinAlgError):
        lowdin(np.array([[1.0, 2.0], [1.0, 2.0]]))


def test_range_basis(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
    B = range_basis(Q @ Q.T, 2)
    assert np.allclose(B @ B.T, Q @ Q.T, atol=1e-12)


def test_constant_loop_sign(rng):
    T = random_symmetric(rng, 4)
    w = np.linalg.eigvalsh(T)
    fam = OperatorFamily.from_function(lambda t: T, 4, is_loop=True)
    cert = propagate_frame(loop_of(fam, (w[0] - 1, (w[1] + w[2]) / 2), 8))
    assert cert.det_sign == 1
    assert np.allclose(cert.closure_matrix, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("samples", [16, 64, 256])
def test_mobius_loop_sign(samples):
    cert = propagate_frame(loop_of(mobius(), samples=samples))
    assert cert.det_sign == -1
    assert cert.closure_matrix == pytest.approx(np.array([[-1.0]]), abs=1e-12)
    assert cert.orthonormality_residual < 1e-12


def test_two_half_turns_and_doubling():
    assert propagate_frame(loop_of(mobius(half_turns=2))).det_sign == 1
    assert propagate_frame(loop_of(mobius()).doubled()).det_sign == 1
    assert propagate_frame(loop_of(mobius(half_turns=3))).det_sign == -1


def test_rank_two_loop_sign():
    # two independent Mobius planes: (-1)(-1) = +1; one plane and a fixed line: -1
    def func(t):
        R = rotation_2d(math.pi * t)
        B = R @ np.diag([1.0, -1.0]) @ R.T
        return np.block([[B, np.zeros((2, 2))], [np.zeros((2, 2)), B]])

    fam = OperatorFamily.from_function(func, 4, is_loop=True)
    assert propagate_frame(loop_of(fam)).det_sign == 1
    fam2 = OperatorFamily.rotating_eigenbundle([1.0, -1.0, 1.5, 4.0], half_turns=1)
    cert = propagate_frame(loop_of(fam2))
    assert cert.det_sign == -1 and cert.closure_matrix.shape == (2, 2)


def test_basepoint_independence():
    fam = OperatorFamily.from_function(
        lambda t: mobius().evaluate(t) + 0.3 * np.sin(2 * np.pi * t) * np.diag([0.0, 0.0, 1.0]), 3, is_loop=True)
    loop = loop_of(fam, samples=40)
    signs = {propagate_frame(loop.rotated(s)).det_sign for s in range(0, 40, 7)}
    assert signs == {-1}


def test_frame_independence(rng):
    fam = OperatorFamily.rotating_eigenbundle([1.0, -1.0, 1.5, 4.0], half_turns=1)
    loop = loop_of(fam)
    base = range_basis(loop.projectors[0], loop.rank)
    for _ in range(5):
        Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
        assert propagate_frame(loop, base @ Q).det_sign == -1


def angle_loop(phase, samples=64):
    ts = np.linspace(0, 1, samples + 1)
    return SubspaceLoop.from_frames([np.array([math.cos(math.pi * t + phase(t)), math.sin(math.pi * t + phase(t))])
                                     for t in ts])


def test_sign_stability_under_angle_noise(rng):
    base = angle_loop(lambda t: 0.0)
    for _ in range(5):
        amp, freq, shift = rng.uniform(0, 0.05), int(rng.integers(1, 4)), rng.uniform(0, 2 * math.pi)
        noisy = angle_loop(lambda t: amp * math.sin(2 * math.pi * freq * t + shift) - amp * math.sin(shift))
        v = sign_stability_check(base, noisy)
        assert v.hypothesis_holds and v.distance <= math.sin(0.1) + 1e-12
        assert v.sign_a == v.sign_b == -1


def test_sign_stability_same_loop():
    v = sign_stability_check(loop_of(mobius()), loop_of(mobius()))
    assert v.distance == 0 and v.sign_a == v.sign_b == -1


def test_sign_stability_under_matrix_noise(rng):
    base = mobius()
    for _ in range(3):
        E = random_symmetric(rng, 3, 0.1)
        noisy = OperatorFamily.from_function(lambda t, E=E: base.evaluate(t) + E, 3, is_loop=True)
        v = sign_stability_check(loop_of(base), loop_of(noisy))
        assert v.hypothesis_holds and v.sign_a == v.sign_b == -1


def test_sign_stability_no_claim_far_apart():
    a = loop_of(mobius(), samples=32)
    b = loop_of(OperatorFamily.rotating_eigenbundle([-1.0, 1.0, 5.0]), samples=32)
    v = sign_stability_check(a, b)
    assert v.distance == pytest.approx(1.0)
    assert not v.hypothesis_holds and v.sign_a is None


def test_coarse_loop_refused():
    P0 = np.diag([1.0, 0.0])
    P1 = np.diag([0.0, 1.0])
    loop = SubspaceLoop.from_frames([np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]), np.array([[1.0], [0.0]])])
    assert np.allclose(loop.projectors[1], P1) and np.allclose(loop.projectors[0], P0)
    with pytest.raises(SpectralError, match="too coarse"):
        propagate_frame(loop)


def test_open_loop_rejected():
    with pytest.raises(SpectralError, match="does not close"):
        SubspaceLoop.from_projectors([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])


def test_transported_sign_plane_rotation():
    H = [rotation_2d(math.pi * t) for t in np.linspace(0, 1, 33)]
    assert transported_sign(H, np.array([1.0, 0.0])) == -1
    assert transported_sign(H, np.eye(2)) == 1


def test_transported_sign_direct_sum():
    def H(t):
        R = rotation_2d(math.pi * t)
        return np.block([[R, np.zeros((2, 2))], [np.zeros((2, 2)), R]])

    Hs = [H(t) for t in np.linspace(0, 1, 33)]
    E0 = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    P0 = E0 @ E0.T
    bundle = [h @ P0 @ h.T for h in Hs]
    assert transported_sign(Hs, E0, bundle) == 1
    assert transported_sign(Hs, E0[:, :1]) == -1


def test_transported_sign_matches_propagation():
    Hs = [rotation_2d(math.pi * t) for t in np.linspace(0, 1, 65)]
    E0 = np.array([0.6, 0.8])
    loop = SubspaceLoop.from_frames([h @ E0 for h in Hs])
    assert transported_sign(Hs, E0) == propagate_frame(loop).det_sign == -1


def test_transported_sign_rejects_bad_input():
    H = [rotation_2d(0.5 * math.pi * t) for t in np.linspace(0, 1, 9)]
    with pytest.raises(SpectralError, match=r"not \+-H\(0\)"):
        transported_sign(H, np.array([1.0, 0.0]))
    with pytest.raises(SpectralError, match="not orthogonal"):
        transported_sign([np.eye(2), 2 * np.eye(2)], np.array([1.0, 0.0]))


def test_lasso_certificate_mobius():
    cert = lasso_certificate(mobius(), (0.0, 2.0), 64)
    assert cert.sign == -1 and cert.rank == 1
    assert cert.statement == OBSTRUCTION
    d = json.loads(cert.to_json())
    assert d["sign"] == -1 and d["samples"] == 64 and d["interval"] == [0.0, 2.0]
    assert d["min_gap_margin"] == pytest.approx(1.0)
    assert lasso_certificate(mobius(half_turns=2), (0.0, 2.0), 64).statement == NO_OBSTRUCTION


def test_homotopy_to_constant_loop_collides():
    fam = OperatorFamily.rotating_eigenbundle([1.0, -1.0])
    T0 = fam.evaluate(0.0)
    grid = np.linspace(0, 1, 21)
    gaps = np.array([[np.diff(np.linalg.eigvalsh((1 - s) * fam.evaluate(t) + s * T0))[0] for t in grid]
                     for s in grid])
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
    assert gaps[i, j] < 1e-6
    assert (grid[i], grid[j]) == (0.5, 0.5)


def test_constant_family_certificate():
    fam = OperatorFamily.from_function(lambda t: np.diag([1.0, -1.0]), 2, is_loop=True)
    cert = lasso_certificate(fam, (0.0, 2.0), 16)
    assert cert.sign == 1 and cert.statement == NO_OBSTRUCTION

import numpy as np
import pytest

import ddp


def test_fft_is_orthonormal():
    x = np.zeros((2, 2), dtype=complex)
    x[0, 0] = 1
    np.testing.assert_allclose(ddp.fft2(x), np.full((2, 2), 0.5))
    rng = np.random.default_rng(0)
    y = rng.normal(size=(6, 5)) + 1j * rng.normal(size=(6, 5))
    np.testing.assert_allclose(ddp.fft2(y), np.fft.fft2(y, norm="ortho"), atol=1e-12)
    np.testing.assert_allclose(ddp.ifft2(ddp.fft2(y)), y, atol=1e-12)


def test_phantom_and_mask():
    ph = ddp.gen_phantom(32, 32, 3)
    assert ph.magnitude.shape == (32, 32)
    assert 0.0 <= ph.magnitude.min() and ph.magnitude.max() <= 1.0
    np.testing.assert_array_equal(ph.magnitude, ddp.gen_phantom(32, 32, 3).magnitude)
    mask = ddp.gen_cartesian_mask(32, 32, 2.0, candidates=20, seed=1)
    assert len(mask.lines) == 16
    assert mask.image().shape == (32, 32)


def test_operator_adjoint():
    mask = ddp.gen_cartesian_mask(32, 32, 2.0, candidates=5, seed=2)
    op = ddp.EncodingOperator.cartesian(mask, ddp.simulate_coil_maps(32, 32, 2, seed=3))
    rng = np.random.default_rng(1)
    x = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    y = op.forward(x)
    y2 = rng.normal(size=y.shape) + 1j * rng.normal(size=y.shape)
    lhs = np.vdot(y2, op.forward(x))
    rhs = np.vdot(op.adjoint(y2), x)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_train_and_reconstruct():
    phs = [ddp.gen_phantom(32, 32, s) for s in range(2)]
    patches = ddp.extract_training_patches(phs, 8, 64, seed=1)
    assert patches.shape == (64, 64)
    model = ddp.VaeModel.initialize(8, 4, [2, 2], [2, 2], seed=0)
    losses = model.train(patches, iterations=5, batch=8)
    assert len(losses) == 5 and np.all(np.isfinite(losses))
    gt = phs[0].complex_image()
    mask = ddp.gen_cartesian_mask(32, 32, 2.0, candidates=5, seed=4)
    op = ddp.EncodingOperator.cartesian(mask, ddp.simulate_coil_maps(32, 32, 1))
    y = op.forward(gt)
    sense, _ = ddp.reconstruct(y, op, None, T=2)
    off, trace = ddp.reconstruct(y, op, model, T=2, K=2, alpha=0.0, ground_truth=gt)
    np.testing.assert_array_equal(sense, off)
    assert trace["iter"] == [1, 2]
    img, _ = ddp.reconstruct(y, op, model, T=2, K=2)
    assert np.all(np.isfinite(img))
    assert ddp.rmse(gt, gt) == 0.0


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        ddp.gen_phantom(8, 8, 0)
    with pytest.raises(ValueError):
        ddp.binary_erode(np.ones((3, 3), dtype=bool), 4)

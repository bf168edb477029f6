import numpy as np
import pytest

from gradshop.metrics import SsimConfig, rmse_aligned, ssim


def hand_ssim(x, y, L, sigma=1.5, k1=0.01, k2=0.03):
    t = np.arange(x.shape[0]) - (x.shape[0] - 1) / 2
    w = np.exp(-np.add.outer(t ** 2, t ** 2) / (2 * sigma ** 2))
    w /= w.sum()
    mx, my = np.sum(w * x), np.sum(w * y)
    vx = np.sum(w * (x - mx) ** 2)
    vy = np.sum(w * (y - my) ** 2)
    cxy = np.sum(w * (x - mx) * (y - my))
    c1, c2 = (k1 * L) ** 2, (k2 * L) ** 2
    return (2 * mx * my + c1) * (2 * cxy + c2) / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2))


def test_identity_is_exactly_one(rng):
    for _ in range(5):
        x = rng.normal(size=(30, 37)) * rng.uniform(0.01, 100)
        assert ssim(x, x) == 1.0


def test_single_window_matches_hand_computation(rng):
    for _ in range(10):
        x = rng.normal(size=(11, 11))
        y = x + 0.5 * rng.normal(size=(11, 11)) + 3.0
        xa, ya = x - x.mean(), y - y.mean()
        ref = hand_ssim(xa, ya, ya.max() - ya.min())
        assert ssim(x, y) == pytest.approx(ref, abs=1e-12)
        # without alignment the means enter the luminance term
        ref_raw = hand_ssim(x, y, y.max() - y.min())
        assert ssim(x, y, align=False) == pytest.approx(ref_raw, abs=1e-12)


def test_single_pixel_perturbation_decreases(rng):
    x = rng.normal(size=(24, 24))
    base = ssim(x, x)
    for i, j in [(0, 0), (12, 12), (23, 5)]:
        y = x.copy()
        y[i, j] += 0.1
        assert ssim(y, x) < base


def test_sign_flip_scores_low(rng):
    x = rng.normal(size=(32, 32))
    assert ssim(-x, x) < 0.5 < ssim(x + 0.3 * rng.normal(size=x.shape), x)


def test_offset_invariance_and_symmetry(rng):
    x = rng.normal(size=(20, 20))
    y = x + 0.3 * rng.normal(size=(20, 20))
    assert ssim(y + 7.0, x) == pytest.approx(ssim(y, x), abs=1e-12)
    cfg = SsimConfig(dynamic_range=2.0)
    assert ssim(x, y, cfg) == pytest.approx(ssim(y, x, cfg), abs=1e-14)


def test_flat_reference_uses_unit_range():
    x = np.zeros((11, 11))
    assert ssim(x, x) == 1.0


def test_rejects_bad_inputs(rng):
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 10)), np.zeros((10, 10)))
    with pytest.raises(ValueError):
        ssim(np.zeros((12, 12)), np.zeros((12, 13)))
    for bad in (dict(window=0), dict(sigma=0), dict(dynamic_range=-1), dict(dynamic_range="max")):
        with pytest.raises(ValueError):
            SsimConfig(**bad)


def test_rmse_aligned(rng):
    x = rng.normal(size=(9, 7))
    assert rmse_aligned(x + 4.0, x) == pytest.approx(0.0, abs=1e-14)
    d = rng.normal(size=(9, 7))
    d -= d.mean()
    assert rmse_aligned(x + d, x) == pytest.approx(np.sqrt(np.mean(d ** 2)), rel=1e-12)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradshop.fields import PatchConfig, SurfaceGrid
from gradshop.patches import (PatchMatrix, accumulate_patches, coverage_counts, dct_dictionary,
                              extract_patches, patch_indices)

CFG = PatchConfig()


def test_patch_indices_examples():
    assert patch_indices(8, 8, CFG) == [(0, 0)]
    idx = patch_indices(12, 12, CFG)
    assert len(idx) == 9
    assert sorted({r for r, _ in idx}) == [0, 2, 4]
    idx = patch_indices(11, 11, CFG)
    assert sorted({r for r, _ in idx}) == [0, 2, 3]
    assert len(idx) == 9
    assert idx == sorted(set(idx))


def test_patch_indices_without_clamp():
    idx = patch_indices(11, 11, PatchConfig(clamp_boundary=False))
    assert sorted({r for r, _ in idx}) == [0, 2]


def test_grid_smaller_than_patch():
    for f in (lambda: patch_indices(7, 8, CFG), lambda: coverage_counts(CFG, 8, 7),
              lambda: extract_patches(SurfaceGrid(np.zeros((5, 9))), CFG)):
        with pytest.raises(ValueError):
            f()


def test_extract_constant_and_single():
    pm = extract_patches(SurfaceGrid(np.full((12, 12), 3.0)), CFG)
    assert np.all(pm.data == 3.0)
    Z = np.arange(64.0).reshape(8, 8)
    pm = extract_patches(SurfaceGrid(Z), CFG)
    assert pm.count == 1
    np.testing.assert_array_equal(pm.data[:, 0], Z.reshape(-1, order="F"))
    np.testing.assert_array_equal(accumulate_patches(pm, CFG, 8, 8).values, Z)


def test_extract_matches_slicing(rng):
    Z = rng.normal(size=(12, 13))
    cfg = PatchConfig(patch_h=8, patch_w=6, stride=2)
    pm = extract_patches(SurfaceGrid(Z), cfg)
    for j, (r, c) in enumerate(patch_indices(12, 13, cfg)):
        np.testing.assert_array_equal(pm.data[:, j], Z[r:r + 8, c:c + 6].reshape(-1, order="F"))


def test_accumulate_is_adjoint(rng):
    Z = rng.normal(size=(12, 12))
    pm = extract_patches(SurfaceGrid(Z), CFG)
    M = rng.normal(size=pm.data.shape)
    lhs = np.sum(pm.data * M)
    rhs = np.sum(Z * accumulate_patches(PatchMatrix(M, 12, 12, CFG), CFG, 12, 12).values)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_accumulate_ones_gives_counts():
    pm = extract_patches(SurfaceGrid(np.ones((14, 17))), CFG)
    np.testing.assert_array_equal(accumulate_patches(pm, CFG, 14, 17).values,
                                  coverage_counts(CFG, 14, 17).values)
    with pytest.raises(ValueError):
        accumulate_patches(pm, CFG, 14, 22)


def test_coverage_counts():
    c = coverage_counts(CFG, 64, 64).values
    assert c[32, 32] == 16
    assert c[0, 0] == 1
    assert c.sum() == 64 * len(patch_indices(64, 64, CFG))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 25), st.integers(0, 25), st.data())
def test_coverage_positive_with_clamp(ph, pw, extra_r, extra_c, data):
    stride = data.draw(st.integers(1, min(ph, pw)))
    cfg = PatchConfig(ph, pw, stride)
    c = coverage_counts(cfg, ph + extra_r, pw + extra_c).values
    assert c.min() >= 1
    assert patch_indices(ph + extra_r, pw + extra_c, cfg) == patch_indices(ph + extra_r, pw + extra_c, cfg)


def test_dct_dictionary():
    D = dct_dictionary(8, 8).atoms
    np.testing.assert_allclose(D[:, 0], 1 / 8, atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(D, axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(D.T @ D, np.eye(64), atol=1e-10)


def test_dct_atoms_are_separable_cosines():
    D = dct_dictionary(4, 3).atoms
    # atom k + 4*l is cos in rows (freq k) times cos in cols (freq l), column-major
    i = np.arange(4)[:, None]
    j = np.arange(3)[None, :]
    k, l = 2, 1
    ref = np.cos(np.pi * (2 * i + 1) * k / 8) * np.cos(np.pi * (2 * j + 1) * l / 6)
    ref = ref.reshape(-1, order="F")
    ref /= np.linalg.norm(ref)
    np.testing.assert_allclose(D[:, k + 4 * l], ref, atol=1e-12)


def test_dct_dictionary_rejects_overcomplete():
    with pytest.raises(ValueError):
        dct_dictionary(8, 8, 65)
    assert dct_dictionary(8, 8, 16).natoms == 16

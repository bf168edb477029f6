"""Overlapping patch extraction and the DCT dictionary initializer.

Patches are vectorized column-major (the same layout as ``vec`` on the full
grid), so a patch matrix has shape ``(patch_h * patch_w, count)``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import fft

from .dictlearn import Dictionary
from .fields import PatchConfig, SurfaceGrid, as_values


@dataclass(frozen=True)
class PatchMatrix:
    data: np.ndarray
    rows: int
    cols: int
    cfg: PatchConfig

    @property
    def patch_dim(self):
        return self.data.shape[0]

    @property
    def count(self):
        return self.data.shape[1]


def _axis_origins(dim, size, stride, clamp):
    origins = list(range(0, dim - size + 1, stride))
    if clamp and origins[-1] < dim - size:
        origins.append(dim - size)
    return origins


def _check_fits(rows, cols, cfg):
    if rows < cfg.patch_h or cols < cfg.patch_w:
        raise ValueError(
            f"grid {rows}x{cols} is smaller than the {cfg.patch_h}x{cfg.patch_w} patch"
        )


def patch_indices(rows, cols, cfg):
    """Top-left (row, col) origins of every patch, sorted lexicographically."""
    _check_fits(rows, cols, cfg)
    ro = _axis_origins(rows, cfg.patch_h, cfg.stride, cfg.clamp_boundary)
    co = _axis_origins(cols, cfg.patch_w, cfg.stride, cfg.clamp_boundary)
    return [(r, c) for r in ro for c in co]


class PatchOperator:
    """Precomputed gather/scatter indices for one grid size and config.

    ``index[:, j]`` holds the flat (C-order) grid positions of patch j in
    column-major patch order.
    """

    def __init__(self, rows, cols, cfg):
        self.rows, self.cols, self.cfg = rows, cols, cfg
        origins = np.array(patch_indices(rows, cols, cfg))
        dr, dc = np.meshgrid(np.arange(cfg.patch_h), np.arange(cfg.patch_w), indexing="ij")
        # column-major within the patch
        dr = dr.reshape(-1, order="F")
        dc = dc.reshape(-1, order="F")
        r = origins[:, 0][None, :] + dr[:, None]
        c = origins[:, 1][None, :] + dc[:, None]
        self.origins = origins
        self.index = r * cols + c
        self._flat_index = self.index.reshape(-1)
        self.counts = self.accumulate(np.ones(self.index.shape))

    @property
    def count(self):
        return self.index.shape[1]

    def extract(self, Z):
        return Z.reshape(-1)[self.index]

    def accumulate(self, M):
        # bincount sums in a fixed order, so results are reproducible
        out = np.bincount(self._flat_index, weights=np.asarray(M).reshape(-1),
                          minlength=self.rows * self.cols)
        return out.reshape(self.rows, self.cols)


def extract_patches(z, cfg):
    Z = as_values(z)
    op = PatchOperator(Z.shape[0], Z.shape[1], cfg)
    return PatchMatrix(op.extract(Z), Z.shape[0], Z.shape[1], cfg)


def accumulate_patches(pm, cfg, rows, cols):
    """Scatter-add every patch column back onto a rows x cols grid."""
    data = pm.data if isinstance(pm, PatchMatrix) else np.asarray(pm)
    op = PatchOperator(rows, cols, cfg)
    if data.shape != op.index.shape:
        raise ValueError(f"patch matrix {data.shape} does not match {op.index.shape} for this grid")
    return SurfaceGrid(op.accumulate(data))


def coverage_counts(cfg, rows, cols):
    """Number of patches covering each pixel."""
    return SurfaceGrid(PatchOperator(rows, cols, cfg).counts)


def dct_atoms(patch_h, patch_w, natoms=None):
    """Separable orthonormal 2-D DCT-II basis, one vectorized atom per column.

    Atoms are ordered with the vertical frequency varying fastest, so atom 0
    is the constant patch.
    """
    dim = patch_h * patch_w
    if natoms is None:
        natoms = dim
    if natoms > dim:
        raise ValueError(f"overcomplete initialization ({natoms} > {dim} atoms) is not supported")
    if natoms < 1:
        raise ValueError("natoms must be positive")
    Ch = fft.idct(np.eye(patch_h), type=2, norm="ortho", axis=0)
    Cw = fft.idct(np.eye(patch_w), type=2, norm="ortho", axis=0)
    # column-major vec of Ch[:, k] outer Cw[:, l] is kron(Cw[:, l], Ch[:, k])
    return np.kron(Cw, Ch)[:, :natoms]


def dct_dictionary(patch_h, patch_w, K=None):
    """DCT-initialized dictionary (square by default)."""
    return Dictionary(dct_atoms(patch_h, patch_w, K))

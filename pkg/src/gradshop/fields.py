"""Grid-valued data types shared by every module.

Conventions: row index follows y, column index follows x, grid spacing is 1,
and ``vec`` stacks columns (Fortran order).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NZ_MIN = 1e-6


def _frozen(a, name, ndim=2):
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    arr.flags.writeable = False
    return arr


def vec(a):
    """Column-stacking vectorization."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v, rows, cols):
    return np.asarray(v).reshape((rows, cols), order="F")


@dataclass(frozen=True)
class SurfaceGrid:
    """An m x n height map."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, "values"))

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def anchored(self):
        """Copy shifted to zero mean."""
        return SurfaceGrid(self.values - self.values.mean())


@dataclass(frozen=True)
class GradientField:
    """Target x/y derivatives, both m x n."""

    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        gx = _frozen(self.gx, "gx")
        gy = _frozen(self.gy, "gy")
        if gx.shape != gy.shape:
            raise ValueError(f"gx {gx.shape} and gy {gy.shape} differ in shape")
        object.__setattr__(self, "gx", gx)
        object.__setattr__(self, "gy", gy)

    @property
    def rows(self):
        return self.gx.shape[0]

    @property
    def cols(self):
        return self.gx.shape[1]

    @property
    def shape(self):
        return self.gx.shape

    def stacked(self):
        """The data vector [vec(gx); vec(gy)]."""
        return np.concatenate([vec(self.gx), vec(self.gy)])

    def norm(self):
        return float(np.sqrt(np.sum(self.gx ** 2) + np.sum(self.gy ** 2)))


@dataclass(frozen=True)
class NormalMap:
    """Unit normals (m x n x 3) plus a mask of pixels with no usable estimate.

    Non-degenerate vectors are normalized on construction. Pixels whose vector
    is (near) zero or whose z component falls below ``nz_min`` are flagged
    degenerate and set to (0, 0, 1).
    """

    vectors: np.ndarray
    degenerate_mask: np.ndarray = None
    nz_min: float = NZ_MIN

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.float64, copy=True)
        if v.ndim != 3 or v.shape[2] != 3 or v.shape[0] == 0 or v.shape[1] == 0:
            raise ValueError(f"normals must have shape (m, n, 3), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("normals contain NaN or Inf")
        if self.degenerate_mask is None:
            mask = np.zeros(v.shape[:2], dtype=bool)
        else:
            mask = np.array(self.degenerate_mask, dtype=bool, copy=True)
            if mask.shape != v.shape[:2]:
                raise ValueError("degenerate_mask shape does not match normals")
        norms = np.linalg.norm(v, axis=2)
        mask |= norms <= 1e-12
        safe = np.where(mask, 1.0, norms)
        v = v / safe[..., None]
        mask |= v[..., 2] < self.nz_min
        v[mask] = (0.0, 0.0, 1.0)
        v.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "degenerate_mask", mask)

    @property
    def rows(self):
        return self.vectors.shape[0]

    @property
    def cols(self):
        return self.vectors.shape[1]

    @property
    def shape(self):
        return self.vectors.shape[:2]


@dataclass(frozen=True)
class PatchConfig:
    patch_h: int = 8
    patch_w: int = 8
    stride: int = 2
    clamp_boundary: bool = True

    def __post_init__(self):
        for name in ("patch_h", "patch_w", "stride"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.stride > min(self.patch_h, self.patch_w):
            raise ValueError("stride must not exceed the patch size")

    @property
    def patch_dim(self):
        return self.patch_h * self.patch_w


def validate_dims(a, b):
    """True iff the two grid-valued objects have identical (rows, cols)."""
    return tuple(a.shape) == tuple(b.shape)


def as_values(z):
    """Underlying array of a SurfaceGrid, or the input as a float array."""
    if isinstance(z, SurfaceGrid):
        return z.values
    return np.asarray(z, dtype=np.float64)

"""Calibrated Lambertian photometric stereo and normal/gradient conversion.

Sign convention: with ``p = n1/n3`` and ``q = n2/n3`` the target gradients
are ``gx = -p`` (``flip_x``) and ``gy = q`` by default.  Both flips are
configurable so external datasets with other axis conventions can be used.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import NZ_MIN, GradientField, NormalMap, as_values
from .integrate import diff_arrays


@dataclass(frozen=True)
class LightingSet:
    directions: np.ndarray

    def __post_init__(self):
        L = np.array(self.directions, dtype=np.float64, copy=True)
        if L.ndim != 2 or L.shape[1] != 3:
            raise ValueError(f"light directions must be an (L, 3) array, got {L.shape}")
        if L.shape[0] < 3:
            raise ValueError(f"at least 3 lights are needed, got {L.shape[0]}")
        if not np.all(np.isfinite(L)):
            raise ValueError("light directions contain NaN or Inf")
        norms = np.linalg.norm(L, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero-length light direction")
        L /= norms[:, None]
        if np.linalg.matrix_rank(L) < 3:
            raise ValueError("light directions are rank deficient")
        cond = np.linalg.cond(L)
        if cond > 1e6:
            warnings.warn(f"lighting is badly conditioned (cond = {cond:.3g})")
        L.flags.writeable = False
        object.__setattr__(self, "directions", L)

    @property
    def count(self):
        return self.directions.shape[0]


@dataclass(frozen=True)
class ImageStack:
    images: np.ndarray

    def __post_init__(self):
        imgs = np.array(self.images, dtype=np.float64, copy=True)
        if imgs.ndim != 3 or 0 in imgs.shape:
            raise ValueError(f"image stack must be (L, m, n), got {imgs.shape}")
        if not np.all(np.isfinite(imgs)):
            raise ValueError("image stack contains NaN or Inf")
        if np.any(imgs < 0):
            raise ValueError("image intensities must be non-negative")
        imgs.flags.writeable = False
        object.__setattr__(self, "images", imgs)

    @property
    def count(self):
        return self.images.shape[0]

    @property
    def shape(self):
        return self.images.shape[1:]


@dataclass(frozen=True)
class SignConvention:
    flip_x: bool = True
    flip_y: bool = False

    def __post_init__(self):
        if not isinstance(self.flip_x, bool) or not isinstance(self.flip_y, bool):
            raise ValueError("flip_x and flip_y must be booleans")


def estimate_normals(images, lights, nz_min=NZ_MIN, shadow_threshold=None):
    """Per-pixel least-squares normals from an image stack under known lights.

    Solves ``min_g ||L g - I||`` at each pixel; the normal is ``g / ||g||``
    and the albedo ``||g||`` is dropped.  By default every image is used.
    With ``shadow_threshold`` set, intensities at or below it are left out
    of that pixel's solve (pixels keeping fewer than 3 become degenerate).
    """
    if images.count != lights.count:
        raise ValueError(f"{images.count} images but {lights.count} lights")
    Lm = lights.directions
    nl, m, n = images.images.shape
    I = images.images.reshape(nl, -1)
    if shadow_threshold is None:
        G = np.linalg.pinv(Lm) @ I
        forced = np.zeros(m * n, dtype=bool)
    else:
        G, forced = _masked_solve(Lm, I, I > shadow_threshold)
    G = G.T.reshape(m, n, 3)
    albedo = np.linalg.norm(G, axis=2)
    mask = forced.reshape(m, n) | (albedo <= 1e-12)
    return NormalMap(G, mask, nz_min)


def _masked_solve(Lm, I, valid):
    npix = I.shape[1]
    G = np.zeros((3, npix))
    degenerate = np.zeros(npix, dtype=bool)
    patterns, inverse = np.unique(valid.T, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)
    for k, pattern in enumerate(patterns):
        pix = np.flatnonzero(inverse == k)
        if pattern.sum() < 3 or np.linalg.matrix_rank(Lm[pattern]) < 3:
            degenerate[pix] = True
            continue
        G[:, pix] = np.linalg.pinv(Lm[pattern]) @ I[np.ix_(pattern, pix)]
    return G, degenerate


def normals_to_gradients(nmap, conv=None):
    """Convert unit normals into the signed gradient field the integrators use."""
    conv = conv or SignConvention()
    v = nmap.vectors
    n3 = np.where(nmap.degenerate_mask, 1.0, v[..., 2])
    p = v[..., 0] / n3
    q = v[..., 1] / n3
    gx = -p if conv.flip_x else p
    gy = -q if conv.flip_y else q
    gx = np.where(nmap.degenerate_mask, 0.0, gx)
    gy = np.where(nmap.degenerate_mask, 0.0, gy)
    return GradientField(gx, gy)


def gradients_to_normals(g, conv=None):
    """Inverse of :func:`normals_to_gradients` under the same convention."""
    conv = conv or SignConvention()
    p = -g.gx if conv.flip_x else g.gx
    q = -g.gy if conv.flip_y else g.gy
    return NormalMap(np.stack([p, q, np.ones_like(p)], axis=2))


def render_lambertian(z, lights, albedo=1.0, conv=None):
    """Shade a height map: ``albedo * max(0, n . l)`` for each light."""
    if not albedo > 0:
        raise ValueError("albedo must be positive")
    gx, gy = diff_arrays(as_values(z))
    normals = gradients_to_normals(GradientField(gx, gy), conv).vectors
    shading = np.einsum("mnk,lk->lmn", normals, lights.directions)
    return ImageStack(albedo * np.maximum(shading, 0.0))

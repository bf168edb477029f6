"""SSIM and constant-aligned RMSE for height maps."""
from dataclasses import dataclass

import numpy as np

from .fields import as_values


@dataclass(frozen=True)
class SsimConfig:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: object = "auto"

    def __post_init__(self):
        if isinstance(self.window, bool) or not isinstance(self.window, int) or self.window < 1:
            raise ValueError("window must be a positive integer")
        for name in ("sigma", "k1", "k2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        dr = self.dynamic_range
        if dr != "auto" and not (isinstance(dr, (int, float)) and not isinstance(dr, bool) and dr > 0):
            raise ValueError("dynamic_range must be 'auto' or a positive number")


def gaussian_window(size, sigma):
    t = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-(t ** 2) / (2.0 * sigma ** 2))
    return w / w.sum()


def _filter_valid(a, w):
    """Separable 'valid' correlation with the 1-D window ``w`` on both axes."""
    k = w.size
    rows = sum(w[i] * a[i:a.shape[0] - k + 1 + i, :] for i in range(k))
    return sum(w[j] * rows[:, j:rows.shape[1] - k + 1 + j] for j in range(k))


def ssim_map(x, y, cfg=None, dynamic_range=None):
    cfg = cfg or SsimConfig()
    L = dynamic_range
    w = gaussian_window(cfg.window, cfg.sigma)
    c1 = (cfg.k1 * L) ** 2
    c2 = (cfg.k2 * L) ** 2
    mx = _filter_valid(x, w)
    my = _filter_valid(y, w)
    sxx = _filter_valid(x * x, w) - mx * mx
    syy = _filter_valid(y * y, w) - my * my
    sxy = _filter_valid(x * y, w) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return num / den


def resolve_range(reference, cfg):
    if cfg.dynamic_range != "auto":
        return float(cfg.dynamic_range)
    L = float(reference.max() - reference.min())
    # flat reference: fall back to unit range
    return L if L > 0 else 1.0


def ssim(candidate, reference, cfg=None, align=True):
    """Mean SSIM over all full-window positions.

    With ``align`` both grids are shifted to zero mean first, since an
    integrated surface is only defined up to a constant.  With
    ``dynamic_range="auto"`` the range is max - min of the reference.
    """
    cfg = cfg or SsimConfig()
    x = as_values(candidate)
    y = as_values(reference)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim != 2 or min(x.shape) < cfg.window:
        raise ValueError(f"grids must be at least {cfg.window}x{cfg.window}")
    if align:
        x = x - x.mean()
        y = y - y.mean()
    L = resolve_range(y, cfg)
    return float(np.mean(ssim_map(x, y, cfg, L)))


def rmse_aligned(candidate, reference):
    """RMS error after removing each grid's mean."""
    x = as_values(candidate)
    y = as_values(reference)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    d = (x - x.mean()) - (y - y.mean())
    return float(np.sqrt(np.mean(d * d)))

"""Synthetic ground-truth surfaces with analytic gradients, and SNR-exact noise.

Both surfaces live on ``[-1, 1]^2``: x runs along columns, y along rows.
Gradients are returned per grid step (the analytic derivative times the
sample spacing), which is the unit the difference operator works in.  Each
partial is sampled where its forward difference lives: ``gx[i, j]`` at
``(x_j + hx/2, y_i)`` and ``gy[i, j]`` at ``(x_j, y_i + hy/2)``.
"""
from dataclasses import dataclass

import numpy as np

from .fields import GradientField, SurfaceGrid

KINDS = ("tent", "vase")
MIN_DIM = 16


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    rows: int
    cols: int
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}; expected one of {KINDS}")
        for name in ("rows", "cols"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < MIN_DIM:
                raise ValueError(f"{name} must be an integer >= {MIN_DIM}, got {v!r}")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")


def tent(x, y, amplitude=1.0):
    """Square pyramid ``amplitude * max(0, 1 - max(|x|, |y|))`` and its partials.

    On the creases (|x| == |y| and the support edge) the mean of the one-sided
    derivatives is returned.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    ax, ay = np.abs(x), np.abs(y)
    m = np.maximum(ax, ay)
    z = amplitude * np.maximum(0.0, 1.0 - m)
    # weight of each axis in the active max: 1, 0, or 1/2 on the diagonal
    wx = np.where(ax > ay, 1.0, np.where(ax == ay, 0.5, 0.0))
    wy = 1.0 - wx
    # inside 1, outside 0, on the support edge 1/2
    inside = np.where(m < 1.0, 1.0, np.where(m == 1.0, 0.5, 0.0))
    dzdx = -amplitude * inside * wx * np.sign(x)
    dzdy = -amplitude * inside * wy * np.sign(y)
    return z, dzdx, dzdy


def vase_radius(y):
    r = 0.4 + 0.3 * (1.0 - y ** 2) * (1.0 + 0.5 * y)
    dr = 0.3 * (0.5 - 2.0 * y - 1.5 * y ** 2)
    return r, dr


def vase(x, y, amplitude=1.0):
    """Bulging vase profile ``amplitude * r(y) * max(0, 1 - x^2/r(y)^2)^2``.

    The squared cap keeps the surface C^1 with finite slopes at its outline.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r, dr = vase_radius(y)
    w = np.maximum(0.0, 1.0 - (x / r) ** 2)
    z = amplitude * r * w ** 2
    dzdx = -4.0 * amplitude * x * w / r
    dzdy = amplitude * dr * (w ** 2 + 4.0 * w * x ** 2 / r ** 2)
    return z, dzdx, dzdy


SURFACES = {"tent": tent, "vase": vase}


def grid_coords(rows, cols):
    y = np.linspace(-1.0, 1.0, rows)
    x = np.linspace(-1.0, 1.0, cols)
    X, Y = np.meshgrid(x, y)
    return X, Y, 2.0 / (cols - 1), 2.0 / (rows - 1)


def make_surface(spec):
    """Sample the surface and its analytic gradients on the spec's grid."""
    X, Y, hx, hy = grid_coords(spec.rows, spec.cols)
    fn = SURFACES[spec.kind]
    z, _, _ = fn(X, Y, spec.amplitude)
    _, dzdx, _ = fn(X + hx / 2, Y, spec.amplitude)
    _, _, dzdy = fn(X, Y + hy / 2, spec.amplitude)
    return SurfaceGrid(z), GradientField(dzdx * hx, dzdy * hy)


def scaled_noise(signal_norm, noise, snr_db):
    """Rescale ``noise`` so that 20 log10(signal_norm / ||noise||) == snr_db."""
    nn = np.linalg.norm(noise)
    if nn == 0:
        raise ValueError("noise draw is identically zero")
    return noise * (signal_norm * 10.0 ** (-snr_db / 20.0) / nn)


def add_noise_snr(g, snr_db, seed):
    """Add Gaussian noise to both gradient components at an exact realized SNR.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    s = g.norm()
    if s == 0:
        raise ValueError("SNR is undefined for an identically zero gradient field")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = rng.standard_normal((2,) + g.shape)
    noise = scaled_noise(s, noise, snr_db)
    return GradientField(g.gx + noise[0], g.gy + noise[1])

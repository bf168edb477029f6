"""Least-squares surface-from-gradient machinery.

The difference operator is ``A = [D_n kron I_m; I_n kron D_m]`` where ``D_k``
is the k x k forward-difference matrix whose last row is zero.  On an m x n
grid ``Z`` this means::

    gx[:, j] = Z[:, j+1] - Z[:, j]   (j < n-1),   gx[:, n-1] = 0
    gy[i, :] = Z[i+1, :] - Z[i, :]   (i < m-1),   gy[m-1, :] = 0

``A^T A`` is then the Neumann Laplacian, which the type-II DCT diagonalizes.
"""
import numpy as np
from scipy import fft

from .fields import GradientField, SurfaceGrid, as_values, validate_dims


def diff_arrays(Z):
    gx = np.zeros_like(Z)
    gy = np.zeros_like(Z)
    gx[:, :-1] = Z[:, 1:] - Z[:, :-1]
    gy[:-1, :] = Z[1:, :] - Z[:-1, :]
    return gx, gy


def diff_adjoint_arrays(gx, gy):
    out = np.zeros_like(gx)
    # D^T for a forward difference with zero last row
    out[:, :-1] -= gx[:, :-1]
    out[:, 1:] += gx[:, :-1]
    out[:-1, :] -= gy[:-1, :]
    out[1:, :] += gy[:-1, :]
    return out


def apply_diff(z):
    """Forward differences of a surface, returned as a GradientField."""
    gx, gy = diff_arrays(as_values(z))
    return GradientField(gx, gy)


def apply_diff_adjoint(g):
    """``A^T`` applied to the stacked gradient field (a negative divergence)."""
    return SurfaceGrid(diff_adjoint_arrays(g.gx, g.gy))


def _check(z, g):
    if not validate_dims(z, g):
        raise ValueError(f"surface {tuple(z.shape)} and gradients {tuple(g.shape)} differ in shape")


def ls_objective(z, g):
    """``0.5 * ||A z - v||^2``."""
    _check(z, g)
    return ls_objective_arrays(as_values(z), g.gx, g.gy)


def ls_objective_arrays(Z, gx, gy):
    dx, dy = diff_arrays(Z)
    return 0.5 * (np.sum((dx - gx) ** 2) + np.sum((dy - gy) ** 2))


def ls_gradient(z, g):
    """``A^T (A z - v)`` as a grid."""
    _check(z, g)
    return SurfaceGrid(ls_gradient_arrays(as_values(z), g.gx, g.gy))


def ls_gradient_arrays(Z, gx, gy):
    dx, dy = diff_arrays(Z)
    return diff_adjoint_arrays(dx - gx, dy - gy)


def laplacian_eigenvalues(rows, cols):
    """Eigenvalues of ``A^T A`` in the DCT-II basis, shape (rows, cols)."""
    ey = 2.0 - 2.0 * np.cos(np.pi * np.arange(rows) / rows)
    ex = 2.0 - 2.0 * np.cos(np.pi * np.arange(cols) / cols)
    return ey[:, None] + ex[None, :]


def integrate_dct_arrays(gx, gy):
    rows, cols = gx.shape
    if rows < 2 or cols < 2:
        raise ValueError(f"DCT integration needs at least a 2x2 grid, got {rows}x{cols}")
    rhs = diff_adjoint_arrays(gx, gy)
    coeffs = fft.dctn(rhs, type=2, norm="ortho")
    eig = laplacian_eigenvalues(rows, cols)
    eig[0, 0] = 1.0
    coeffs /= eig
    # constant mode is the null space; pin it to zero mean
    coeffs[0, 0] = 0.0
    Z = fft.idctn(coeffs, type=2, norm="ortho")
    return Z - Z.mean()


def integrate_dct(g):
    """Zero-mean least-squares integration of a gradient field.

    Solves the normal equations ``A^T A z = A^T v`` exactly by diagonalizing
    the Neumann Laplacian with an orthonormal type-II DCT.
    """
    return SurfaceGrid(integrate_dct_arrays(g.gx, g.gy))


def curl_noise_std(g):
    """Robust estimate of the per-entry noise std of a gradient field.

    The discrete curl of an integrable field vanishes, so on i.i.d. noise of
    std s it has std 2s; the median absolute deviation keeps sparse true
    curl (creases, occlusions) from biasing the estimate.
    """
    gx, gy = g.gx, g.gy
    curl = (gx[1:, :-1] - gx[:-1, :-1]) - (gy[:-1, 1:] - gy[:-1, :-1])
    if curl.size == 0:
        return 0.0
    mad = np.median(np.abs(curl - np.median(curl)))
    return float(mad / 0.6744897501960817 / 2.0)

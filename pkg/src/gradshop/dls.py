"""Dictionary Learning on Surfaces: joint integration and patch sparse coding.

Minimizes over (z, D, B)::

    0.5 ||A z - v||^2 + lam * (sum_j ||P_j z - D b_j||^2 + mu^2 ||B||_0)

by alternating one (D, B) block-coordinate sweep on the current patches with
a few proximal-gradient steps on z.  The prox of the patch term is a
diagonal solve because the summed patch projections are diagonal.
"""
import logging
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .dictlearn import DEFAULT_BOUND, Dictionary, SparseCodes, sweep_arrays
from .fields import GradientField, PatchConfig, SurfaceGrid, as_values, validate_dims
from .integrate import curl_noise_std, integrate_dct_arrays, ls_objective_arrays, ls_gradient_arrays
from .patches import PatchOperator, dct_atoms

log = logging.getLogger(__name__)

TAU_MAX = 0.125
RESET_POLICIES = ("keep", "dc", "random")


@dataclass(frozen=True)
class DlsConfig:
    lam: float = 0.1
    mu: float = 0.01
    bound_a: float = DEFAULT_BOUND
    tau: float = TAU_MAX
    outer_iters: int = 30
    prox_steps_per_outer: int = 5
    dl_sweeps_per_outer: int = 1
    rel_tol: float = 1e-6
    patch: PatchConfig = field(default_factory=PatchConfig)
    natoms: int = 64
    seed: int = 0
    atom_reset: str = "keep"
    sweep_order: str = "atom_first"
    allow_large_tau: bool = False
    # when set, mu = mu_noise_factor * (noise std estimated from the data)
    mu_noise_factor: float = None

    def __post_init__(self):
        for name in ("lam", "mu", "bound_a", "tau"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        for name in ("outer_iters", "prox_steps_per_outer", "dl_sweeps_per_outer", "natoms"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < (0 if name == "outer_iters" else 1):
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        f = self.mu_noise_factor
        if f is not None and not (isinstance(f, (int, float)) and not isinstance(f, bool) and f > 0):
            raise ValueError("mu_noise_factor must be a positive number or null")
        if not self.rel_tol >= 0:
            raise ValueError("rel_tol must be non-negative")
        if self.atom_reset not in RESET_POLICIES:
            raise ValueError(f"atom_reset must be one of {RESET_POLICIES}")
        if self.sweep_order not in ("atom_first", "code_first"):
            raise ValueError("sweep_order must be 'atom_first' or 'code_first'")
        if not isinstance(self.patch, PatchConfig):
            raise ValueError("patch must be a PatchConfig")
        if self.natoms > self.patch.patch_dim:
            raise ValueError("natoms larger than the patch dimension is not supported")
        if self.tau > TAU_MAX:
            if not self.allow_large_tau:
                raise ValueError(f"tau={self.tau} exceeds 1/8, the step bound for this difference operator")
            warnings.warn(f"tau={self.tau} exceeds 1/8; descent is no longer guaranteed")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown DLS config keys: {sorted(unknown)}")
        if "patch" in d and isinstance(d["patch"], dict):
            d["patch"] = PatchConfig(**d["patch"])
        return cls(**d)

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class DlsTrace:
    objective: list = field(default_factory=list)
    data_term: list = field(default_factory=list)
    patch_fit: list = field(default_factory=list)
    l0: list = field(default_factory=list)
    rel_change: list = field(default_factory=list)
    mu: float = None

    FIELDS = ("objective", "data_term", "patch_fit", "l0", "rel_change")

    def append(self, **row):
        for k in self.FIELDS:
            getattr(self, k).append(int(row[k]) if k == "l0" else float(row[k]))

    def rows(self):
        return [dict(zip(self.FIELDS, r)) for r in zip(*(getattr(self, k) for k in self.FIELDS))]

    def __len__(self):
        return len(self.objective)


def _terms(Z, gx, gy, op, D, B, mu):
    data = ls_objective_arrays(Z, gx, gy)
    R = op.extract(Z) - D @ B
    fit = float(np.sum(R * R))
    l0 = int(np.count_nonzero(B))
    return data, fit, l0


def objective_eq5(z, g, D, B, cfg):
    """Total joint objective for surface ``z`` against gradients ``g``."""
    Z = as_values(z)
    if not validate_dims(Z, g):
        raise ValueError("surface and gradient shapes differ")
    op = PatchOperator(Z.shape[0], Z.shape[1], cfg.patch)
    Dm, Bm = _mat(D), _mat(B)
    if Dm.shape[0] != cfg.patch.patch_dim or Bm.shape != (Dm.shape[1], op.count):
        raise ValueError("dictionary/codes shapes inconsistent with the patch layout")
    data, fit, l0 = _terms(Z, g.gx, g.gy, op, Dm, Bm, cfg.mu)
    return float(data + cfg.lam * (fit + cfg.mu ** 2 * l0))


def _mat(x):
    if isinstance(x, Dictionary):
        return x.atoms
    if isinstance(x, SparseCodes):
        return x.codes
    return np.asarray(x, dtype=np.float64)


def _prox_arrays(Z, gx, gy, op, DB_acc, weight, tau):
    zt = Z - tau * ls_gradient_arrays(Z, gx, gy)
    return (zt + weight * DB_acc) / (1.0 + weight * op.counts)


def z_prox_step(z, g, D, B, cfg):
    """One proximal-gradient step on z with (D, B) fixed.

    Gradient step on the data term, then the exact diagonal solve
    ``(I + 2 tau lam C) z+ = z~ + 2 tau lam sum_j P_j^T D b_j`` with C the
    coverage counts.
    """
    Z = as_values(z)
    if not validate_dims(Z, g):
        raise ValueError("surface and gradient shapes differ")
    op = PatchOperator(Z.shape[0], Z.shape[1], cfg.patch)
    Dm, Bm = _mat(D), _mat(B)
    acc = op.accumulate(Dm @ Bm)
    return SurfaceGrid(_prox_arrays(Z, g.gx, g.gy, op, acc, 2 * cfg.tau * cfg.lam, cfg.tau))


def dls_reconstruct(g, cfg=None, callback=None):
    """Reconstruct a surface from a (noisy) gradient field.

    Starts from the DCT least-squares surface, a DCT dictionary and zero
    codes, then alternates (D, B) sweeps with ``prox_steps_per_outer``
    z-steps until the relative change in z drops below ``rel_tol`` or
    ``outer_iters`` is reached.  If ``cfg.mu_noise_factor`` is set, the
    threshold mu is that factor times the curl-based noise estimate of ``g``
    (``trace.mu`` records the value used).

    Returns
    -------
    (SurfaceGrid, Dictionary, SparseCodes, DlsTrace)
        The surface is shifted to zero mean.
    """
    cfg = cfg or DlsConfig()
    if not isinstance(g, GradientField):
        raise TypeError("g must be a GradientField")
    if cfg.mu_noise_factor is not None:
        sigma = curl_noise_std(g)
        if sigma > 0:
            cfg = cfg.with_(mu=cfg.mu_noise_factor * sigma)
    rows, cols = g.shape
    op = PatchOperator(rows, cols, cfg.patch)
    gx, gy = g.gx, g.gy

    Z = integrate_dct_arrays(gx, gy)
    D = dct_atoms(cfg.patch.patch_h, cfg.patch.patch_w, cfg.natoms).copy()
    B = np.zeros((cfg.natoms, op.count))
    reset = np.random.default_rng(cfg.seed) if cfg.atom_reset == "random" else cfg.atom_reset
    weight = 2.0 * cfg.tau * cfg.lam
    trace = DlsTrace(mu=cfg.mu)

    for it in range(cfg.outer_iters):
        P = op.extract(Z)
        for _ in range(cfg.dl_sweeps_per_outer):
            sweep_arrays(P, D, B, cfg.mu, cfg.bound_a, reset, cfg.sweep_order)
        acc = op.accumulate(D @ B)
        Z_prev = Z
        for _ in range(cfg.prox_steps_per_outer):
            Z = _prox_arrays(Z, gx, gy, op, acc, weight, cfg.tau)
        denom = np.linalg.norm(Z_prev)
        change = np.linalg.norm(Z - Z_prev)
        rel = float(change / denom) if denom > 0 else float(change > 0)
        data, fit, l0 = _terms(Z, gx, gy, op, D, B, cfg.mu)
        trace.append(objective=data + cfg.lam * (fit + cfg.mu ** 2 * l0),
                     data_term=data, patch_fit=fit, l0=l0, rel_change=rel)
        log.debug("outer %d: objective %.6g, l0 %d, rel change %.3g",
                  it, trace.objective[-1], l0, rel)
        if callback is not None:
            callback(it, Z, D, B)
        if rel < cfg.rel_tol:
            break

    return (SurfaceGrid(Z - Z.mean()), Dictionary(D), SparseCodes(B, cfg.bound_a), trace)

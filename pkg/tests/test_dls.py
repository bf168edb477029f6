import numpy as np
import pytest
from conftest import dense_A, smooth_surface, vecF

from gradshop.dictlearn import Dictionary, SparseCodes
from gradshop.dls import DlsConfig, dls_reconstruct, objective_eq5, z_prox_step
from gradshop.fields import GradientField, PatchConfig, SurfaceGrid
from gradshop.integrate import apply_diff, integrate_dct, ls_gradient, ls_objective
from gradshop.metrics import ssim
from gradshop.patches import dct_dictionary, extract_patches, patch_indices
from gradshop.synthdata import SynthSpec, add_noise_snr, make_surface

SMALL = PatchConfig(patch_h=4, patch_w=4, stride=2)


def dense_patch_ops(m, n, cfg):
    """One explicit selection matrix per patch, rows in column-major patch order."""
    ops = []
    for r, c in patch_indices(m, n, cfg):
        Pj = np.zeros((cfg.patch_dim, m * n))
        k = 0
        for dc in range(cfg.patch_w):
            for dr in range(cfg.patch_h):
                Pj[k, (c + dc) * m + (r + dr)] = 1.0  # column-major grid index
                k += 1
        ops.append(Pj)
    return ops


def random_problem(rng, m, n, cfg, density=0.3):
    Z = rng.normal(size=(m, n))
    g = GradientField(rng.normal(size=(m, n)), rng.normal(size=(m, n)))
    D = dct_dictionary(cfg.patch_h, cfg.patch_w)
    c = len(patch_indices(m, n, cfg))
    B = np.where(rng.random((D.natoms, c)) < density, rng.normal(size=(D.natoms, c)), 0.0)
    return Z, g, D, SparseCodes(B)


def dense_objective(Z, g, D, B, cfg, lam, mu):
    m, n = Z.shape
    z = vecF(Z)
    total = 0.5 * np.sum((dense_A(m, n) @ z - g.stacked()) ** 2)
    fit = sum(np.sum((Pj @ z - D.atoms @ B.codes[:, j]) ** 2)
              for j, Pj in enumerate(dense_patch_ops(m, n, cfg)))
    return total + lam * (fit + mu ** 2 * np.count_nonzero(B.codes))


def test_objective_zero_fixed_point():
    cfg = DlsConfig(patch=SMALL, natoms=16)
    Z = np.zeros((8, 8))
    D = dct_dictionary(4, 4)
    B = SparseCodes.zeros(16, len(patch_indices(8, 8, SMALL)))
    assert objective_eq5(SurfaceGrid(Z), apply_diff(SurfaceGrid(Z)), D, B, cfg) == 0.0


@pytest.mark.parametrize("shape,cfg", [((8, 8), SMALL), ((7, 6), SMALL), ((8, 8), PatchConfig())])
def test_objective_matches_dense(rng, shape, cfg):
    Z, g, D, B = random_problem(rng, *shape, cfg)
    dcfg = DlsConfig(lam=0.7, mu=0.3, patch=cfg, natoms=cfg.patch_dim)
    ref = dense_objective(Z, g, D, B, cfg, 0.7, 0.3)
    assert objective_eq5(SurfaceGrid(Z), g, D, B, dcfg) == pytest.approx(ref, rel=1e-10)


def test_objective_small_lambda_limit(rng):
    Z, g, D, B = random_problem(rng, 8, 8, SMALL)
    vals = [objective_eq5(SurfaceGrid(Z), g, D, B, DlsConfig(lam=lam, patch=SMALL, natoms=16))
            for lam in (1e-3, 1e-6, 1e-9)]
    f = ls_objective(SurfaceGrid(Z), g)
    errs = [abs(v - f) for v in vals]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6 * f


def test_prox_step_keeps_own_patches(rng):
    cfg = DlsConfig(lam=0.5, patch=SMALL, natoms=16)
    Z, g, D, _ = random_problem(rng, 8, 8, SMALL)
    zt = Z - cfg.tau * ls_gradient(SurfaceGrid(Z), g).values
    # D is orthonormal, so codes D^T P reproduce the patches of z~ exactly
    B = SparseCodes(D.atoms.T @ extract_patches(SurfaceGrid(zt), SMALL).data)
    out = z_prox_step(SurfaceGrid(Z), g, D, B, cfg)
    np.testing.assert_allclose(out.values, zt, atol=1e-12)


@pytest.mark.parametrize("shape,patch", [((8, 8), PatchConfig()), ((8, 8), SMALL), ((6, 7), SMALL)])
def test_prox_step_matches_dense_solve(rng, shape, patch):
    cfg = DlsConfig(lam=0.8, patch=patch, natoms=patch.patch_dim)
    Z, g, D, B = random_problem(rng, *shape, patch)
    m, n = shape
    A = dense_A(m, n)
    zt = vecF(Z) - cfg.tau * A.T @ (A @ vecF(Z) - g.stacked())
    ops = dense_patch_ops(m, n, patch)
    w = 2 * cfg.tau * cfg.lam
    lhs = np.eye(m * n) + w * sum(Pj.T @ Pj for Pj in ops)
    rhs = zt + w * sum(Pj.T @ (D.atoms @ B.codes[:, j]) for j, Pj in enumerate(ops))
    ref = np.linalg.solve(lhs, rhs)
    out = z_prox_step(SurfaceGrid(Z), g, D, B, cfg)
    np.testing.assert_allclose(vecF(out.values), ref, atol=1e-10)
    resid = lhs @ vecF(out.values) - rhs
    assert np.linalg.norm(resid) <= 1e-10 * np.linalg.norm(rhs)


def test_prox_step_descends(rng):
    for seed in range(10):
        r = np.random.default_rng(seed)
        Z, g, D, B = random_problem(r, 12, 12, SMALL)
        cfg = DlsConfig(lam=r.uniform(0.01, 5), mu=0.1, patch=SMALL, natoms=16)
        before = objective_eq5(SurfaceGrid(Z), g, D, B, cfg)
        after = objective_eq5(z_prox_step(SurfaceGrid(Z), g, D, B, cfg), g, D, B, cfg)
        assert after <= before * (1 + 1e-12)


def test_null_data_fixed_point():
    g = GradientField(np.zeros((16, 16)), np.zeros((16, 16)))
    z, D, B, trace = dls_reconstruct(g, DlsConfig(outer_iters=3))
    assert not z.values.any()
    assert not B.codes.any()
    np.testing.assert_array_equal(D.atoms, dct_dictionary(8, 8).atoms)


def test_noiseless_not_worse_than_dct(rng):
    Z0 = smooth_surface(rng, 48, 48) * 3
    g = apply_diff(SurfaceGrid(Z0))
    z, _, _, _ = dls_reconstruct(g, DlsConfig(outer_iters=10))
    assert ssim(z, Z0) >= ssim(integrate_dct(g), Z0) - 1e-3


def test_tent_20db_beats_dctls():
    z0, g = make_surface(SynthSpec("tent", 128, 128))
    gn = add_noise_snr(g, 20, 0)
    z, _, _, trace = dls_reconstruct(gn, DlsConfig(lam=1.0, mu_noise_factor=1.5))
    assert ssim(z, z0) > ssim(integrate_dct(gn), z0)


def test_trace_monotone_and_deterministic():
    _, g = make_surface(SynthSpec("vase", 48, 48))
    gn = add_noise_snr(g, 5, 3)
    cfg = DlsConfig(outer_iters=12, mu=0.01, lam=0.5)
    z1, _, _, t1 = dls_reconstruct(gn, cfg)
    z2, _, _, t2 = dls_reconstruct(gn, cfg)
    assert t1.objective == t2.objective
    np.testing.assert_array_equal(z1.values, z2.values)
    obj = np.array(t1.objective)
    assert np.all(obj[1:] <= obj[:-1] * (1 + 1e-8))
    assert abs(z1.values.mean()) < 1e-12
    assert len(t1.rows()) == len(t1) <= 12


def test_random_reset_is_seeded():
    _, g = make_surface(SynthSpec("tent", 32, 32))
    gn = add_noise_snr(g, 1, 0)
    cfg = DlsConfig(outer_iters=4, atom_reset="random", mu=0.05, seed=9)
    a = dls_reconstruct(gn, cfg)[1].atoms
    b = dls_reconstruct(gn, cfg)[1].atoms
    np.testing.assert_array_equal(a, b)


def test_constant_offset_invariance(rng):
    Z0 = smooth_surface(rng, 32, 32)
    noise = GradientField(*(0.05 * rng.normal(size=(2, 32, 32))))
    outs = []
    for offset in (0.0, 11.0):
        g = apply_diff(SurfaceGrid(Z0 + offset))
        g = GradientField(g.gx + noise.gx, g.gy + noise.gy)
        outs.append(dls_reconstruct(g, DlsConfig(outer_iters=5))[0].values)
    assert np.max(np.abs(outs[0] - outs[1])) <= 1e-8


def test_stops_on_rel_tol():
    _, g = make_surface(SynthSpec("tent", 32, 32))
    _, _, _, trace = dls_reconstruct(g, DlsConfig(outer_iters=200, rel_tol=1e-3))
    assert len(trace) < 200
    assert trace.rel_change[-1] < 1e-3


def test_config_validation():
    with pytest.raises(ValueError):
        DlsConfig(tau=0.2)
    with pytest.warns(UserWarning):
        DlsConfig(tau=0.2, allow_large_tau=True)
    for bad in (dict(lam=0), dict(mu=-1), dict(bound_a=0), dict(natoms=65),
                dict(atom_reset="nope"), dict(mu_noise_factor=0.0), dict(outer_iters=-1)):
        with pytest.raises(ValueError):
            DlsConfig(**bad)
    with pytest.raises(ValueError):
        DlsConfig.from_dict({"lambda": 1})
    assert DlsConfig.from_dict({"lam": 2.0, "patch": {"stride": 4}}).patch.stride == 4


def test_grid_smaller_than_patch():
    g = GradientField(np.ones((6, 20)), np.zeros((6, 20)))
    with pytest.raises(ValueError):
        dls_reconstruct(g)

"""Surface reconstruction from noisy gradient fields with adaptive patch dictionaries."""
from .dictlearn import Dictionary, SparseCodes, soup_dil_sweep, sparse_code_row, update_atom
from .dls import DlsConfig, DlsTrace, dls_reconstruct, objective_eq5, z_prox_step
from .fields import GradientField, NormalMap, PatchConfig, SurfaceGrid, validate_dims
from .integrate import (apply_diff, apply_diff_adjoint, integrate_dct, ls_gradient,
                        ls_objective)
from .metrics import SsimConfig, rmse_aligned, ssim
from .patches import (accumulate_patches, coverage_counts, dct_dictionary, extract_patches,
                      patch_indices)
from .photometric import (ImageStack, LightingSet, SignConvention, estimate_normals,
                          normals_to_gradients, render_lambertian)
from .synthdata import SynthSpec, add_noise_snr, make_surface

__version__ = "0.1.0"

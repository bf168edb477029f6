"""Block coordinate descent for the dictionary / sparse-code subproblem

    min_{D,B} ||P - D B||_F^2 + mu^2 ||B||_0
    s.t. ||d_i||_2 = 1, ||b_j||_inf <= a

Each sweep visits the atoms in ascending order and, for atom i, exactly
minimizes over d_i and over row i of B, each with everything else fixed.
"""
from dataclasses import dataclass, field

import numpy as np

DEFAULT_BOUND = 1e6


@dataclass(frozen=True)
class Dictionary:
    atoms: np.ndarray

    def __post_init__(self):
        D = np.array(self.atoms, dtype=np.float64, copy=True)
        if D.ndim != 2:
            raise ValueError("atoms must be a 2-D matrix")
        norms = np.linalg.norm(D, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("dictionary atoms must be unit norm")
        D.flags.writeable = False
        object.__setattr__(self, "atoms", D)

    @property
    def atom_dim(self):
        return self.atoms.shape[0]

    @property
    def natoms(self):
        return self.atoms.shape[1]


@dataclass(frozen=True)
class SparseCodes:
    codes: np.ndarray
    bound: float = DEFAULT_BOUND

    def __post_init__(self):
        B = np.array(self.codes, dtype=np.float64, copy=True)
        if B.ndim != 2:
            raise ValueError("codes must be a 2-D matrix")
        if not self.bound > 0:
            raise ValueError("bound must be positive")
        if np.any(np.abs(B) > self.bound):
            raise ValueError("codes exceed the magnitude bound")
        B.flags.writeable = False
        object.__setattr__(self, "codes", B)

    @classmethod
    def zeros(cls, natoms, count, bound=DEFAULT_BOUND):
        return cls(np.zeros((natoms, count)), bound)

    @property
    def natoms(self):
        return self.codes.shape[0]

    @property
    def count(self):
        return self.codes.shape[1]

    def nnz(self):
        return int(np.count_nonzero(self.codes))


@dataclass
class DictLearnStats:
    objective: list = field(default_factory=list)
    sparsity: list = field(default_factory=list)
    atoms_reset: int = 0


def dc_atom(atom_dim):
    return np.full(atom_dim, 1.0 / np.sqrt(atom_dim))


def sparse_code_row(correlations, mu, bound=DEFAULT_BOUND):
    """Hard threshold at ``mu`` (ties go to zero), then clip to ``[-bound, bound]``."""
    c = np.asarray(correlations, dtype=np.float64)
    out = np.sign(c) * np.minimum(np.abs(c), bound)
    out[np.abs(c) <= mu] = 0.0
    return out + 0.0  # no negative zeros


def update_atom(weighted_residual, fallback=None):
    """Unit vector along ``weighted_residual``; ``fallback`` (DC atom) when it vanishes."""
    h = np.asarray(weighted_residual, dtype=np.float64)
    nrm = np.linalg.norm(h)
    if nrm > 1e-12:
        return h / nrm
    if fallback is None:
        return dc_atom(h.size)
    return np.asarray(fallback, dtype=np.float64)


def dl_objective(P, D, B, mu):
    R = P - D @ B
    return float(np.sum(R * R) + mu ** 2 * np.count_nonzero(B))


def sweep_arrays(P, D, B, mu, bound=DEFAULT_BOUND, reset="keep", order="atom_first", trace=None):
    """One in-place sweep over all atoms. Returns the number of atoms reset.

    For each atom i the pair (d_i, row i of B) is updated by exact block
    minimization.  With ``order="atom_first"`` the atom is fitted to the
    code row left by the previous sweep and the row is then re-thresholded
    against the new atom; ``"code_first"`` does the reverse.

    The residual ``E_i = P - D B + d_i b_i`` is never formed; the needed
    products are assembled from ``P^T d_i``, ``B^T (D^T d_i)`` and
    ``D (B b_i^T)``.

    ``reset`` picks the atom used when the code row it is fitted to is all
    zero (every unit atom is then optimal): ``"keep"`` leaves the current
    atom, ``"dc"`` uses the constant atom, and a ``numpy.random.Generator``
    draws a seeded random direction.  ``trace``, if a list, receives the
    objective after every atom's paired update (expensive; for testing).
    """
    if order not in ("atom_first", "code_first"):
        raise ValueError(f"unknown sweep order {order!r}")
    atom_dim, natoms = D.shape
    resets = 0
    fallback = dc_atom(atom_dim)

    def fit_atom(i):
        b = B[i, :]
        if np.any(b):
            # E_i b^T
            h = P @ b - D @ (B @ b) + D[:, i] * (b @ b)
            D[:, i] = update_atom(h, fallback)
            return 0
        if isinstance(reset, np.random.Generator):
            r = reset.standard_normal(atom_dim)
            D[:, i] = r / np.linalg.norm(r)
        elif reset == "dc":
            D[:, i] = fallback
        elif reset != "keep":
            raise ValueError(f"unknown reset policy {reset!r}")
        return 1

    def code_row(i):
        d = D[:, i]
        # E_i^T d_i with ||d_i|| = 1
        corr = P.T @ d - B.T @ (D.T @ d) + B[i, :]
        B[i, :] = sparse_code_row(corr, mu, bound)

    for i in range(natoms):
        if order == "atom_first":
            resets += fit_atom(i)
            code_row(i)
        else:
            code_row(i)
            resets += fit_atom(i)
        if trace is not None:
            trace.append(dl_objective(P, D, B, mu))
    return resets


def soup_dil_sweep(patches, D, B, mu, n_sweeps=1, reset="keep", order="atom_first"):
    """Run ``n_sweeps`` atom-by-atom block updates of (D, B) on a patch matrix.

    Parameters
    ----------
    patches : PatchMatrix or ndarray, shape (atom_dim, c)
    D : Dictionary
    B : SparseCodes
    mu : float
        Threshold; the l0 penalty weight is ``mu**2``.
    n_sweeps : int
    reset : {"keep", "dc"} or numpy.random.Generator
        What to do with atoms whose code row is all zero.
    order : {"atom_first", "code_first"}
        Update order within each (atom, code row) pair.

    Returns
    -------
    (Dictionary, SparseCodes, DictLearnStats)
    """
    P = np.asarray(getattr(patches, "data", patches), dtype=np.float64)
    if not mu > 0:
        raise ValueError("mu must be positive")
    Dm = np.array(D.atoms, copy=True)
    Bm = np.array(B.codes, copy=True)
    if P.shape[0] != Dm.shape[0] or Bm.shape != (Dm.shape[1], P.shape[1]):
        raise ValueError(
            f"shape mismatch: patches {P.shape}, dictionary {Dm.shape}, codes {Bm.shape}"
        )
    stats = DictLearnStats()
    for _ in range(n_sweeps):
        stats.atoms_reset += sweep_arrays(P, Dm, Bm, mu, B.bound, reset, order)
        stats.objective.append(dl_objective(P, Dm, Bm, mu))
        stats.sparsity.append(np.count_nonzero(Bm) / Bm.size)
    return Dictionary(Dm), SparseCodes(Bm, B.bound), stats

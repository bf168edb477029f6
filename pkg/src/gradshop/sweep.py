"""Synthetic benchmark sweeps: synth -> noise -> reconstruct -> evaluate.

A sweep spec is a JSON object::

    {
      "kinds": ["tent", "vase"], "rows": 128, "cols": 128,
      "snr_db": [1, 5, 10, 20], "methods": ["dls", "dctls"],
      "lambdas": [1.0], "mus": [1.5], "mu_mode": "noise",
      "seeds": [0, 1, 2, 3, 4],
      "dls": {...}, "patch": {...}, "ssim": {...}
    }

With ``"mu_mode": "noise"`` each entry of ``mus`` multiplies the noise std
estimated from the noisy gradients (``DlsConfig.mu_noise_factor``); with
``"absolute"`` (the default) it is used as is.  DCTLS has no parameters and runs once per
(kind, snr, seed).
"""
import csv
import io
import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, RunConfig
from .dls import dls_reconstruct
from .integrate import integrate_dct
from .metrics import rmse_aligned, ssim
from .synthdata import KINDS, SynthSpec, add_noise_snr, make_surface

COLUMNS = ("kind", "snr_db", "method", "lambda", "mu", "seed", "ssim", "rmse", "wall_ms")
SPEC_KEYS = {"kinds", "rows", "cols", "amplitude", "snr_db", "methods", "lambdas", "mus",
             "mu_mode", "seeds", "dls", "patch", "ssim"}


@dataclass(frozen=True)
class Cell:
    kind: str
    snr_db: float
    method: str
    lam: float
    mu: float
    seed: int


@dataclass
class SweepSpec:
    kinds: list
    rows: int
    cols: int
    amplitude: float
    snr_db: list
    methods: list
    lambdas: list
    mus: list
    mu_mode: str
    seeds: list
    run: RunConfig

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("sweep spec must be a JSON object")
        unknown = set(doc) - SPEC_KEYS
        if unknown:
            raise ConfigError(f"unknown sweep key(s): {', '.join(sorted(unknown))}")
        axes = {}
        for key, default in (("kinds", ["tent"]), ("snr_db", None), ("methods", ["dls", "dctls"]),
                             ("lambdas", [1.0]), ("mus", [0.01]), ("seeds", [0])):
            val = doc.get(key, default)
            if val is None:
                raise ConfigError(f"sweep spec needs '{key}'")
            if not isinstance(val, list) or not val:
                raise ConfigError(f"'{key}' must be a non-empty list")
            axes[key] = val
        for k in axes["kinds"]:
            if k not in KINDS:
                raise ConfigError(f"unknown surface kind {k!r}")
        for m in axes["methods"]:
            if m not in ("dls", "dctls"):
                raise ConfigError(f"unknown method {m!r}")
        for s in axes["seeds"]:
            if isinstance(s, bool) or not isinstance(s, int) or s < 0:
                raise ConfigError("seeds must be non-negative integers")
        for key in ("snr_db", "lambdas", "mus"):
            for v in axes[key]:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"'{key}' entries must be numbers")
        mu_mode = doc.get("mu_mode", "absolute")
        if mu_mode not in ("absolute", "noise"):
            raise ConfigError("mu_mode must be 'absolute' or 'noise'")
        run = RunConfig.from_dict({k: doc[k] for k in ("dls", "patch", "ssim") if k in doc})
        rows, cols = doc.get("rows", 128), doc.get("cols", 128)
        amplitude = doc.get("amplitude", 1.0)
        try:
            SynthSpec(axes["kinds"][0], rows, cols, amplitude)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        return cls(axes["kinds"], rows, cols, amplitude, axes["snr_db"], axes["methods"],
                   axes["lambdas"], axes["mus"], mu_mode, axes["seeds"], run)

    def cells(self):
        out = []
        for kind, snr, method in itertools.product(self.kinds, self.snr_db, self.methods):
            params = [(None, None)] if method == "dctls" else list(itertools.product(self.lambdas, self.mus))
            for (lam, mu), seed in itertools.product(params, self.seeds):
                out.append(Cell(kind, float(snr), method, lam, mu, seed))
        return out


def run_cell(spec, cell):
    z, g = make_surface(SynthSpec(cell.kind, spec.rows, spec.cols, spec.amplitude))
    t0 = time.perf_counter()
    gn = add_noise_snr(g, cell.snr_db, cell.seed)
    if cell.method == "dctls":
        zr = integrate_dct(gn)
    else:
        cfg = spec.run.dls.with_(lam=float(cell.lam), seed=cell.seed)
        if spec.mu_mode == "noise":
            cfg = cfg.with_(mu_noise_factor=float(cell.mu))
        else:
            cfg = cfg.with_(mu=float(cell.mu), mu_noise_factor=None)
        zr = dls_reconstruct(gn, cfg)[0]
    wall_ms = (time.perf_counter() - t0) * 1000.0
    return {"ssim": ssim(zr, z, spec.run.ssim), "rmse": rmse_aligned(zr, z), "wall_ms": wall_ms}


def thread_count(threads=None):
    if threads is None:
        threads = int(os.environ.get("GRADSHOP_THREADS", "1"))
    return max(1, threads)


def run_sweep(spec, threads=None):
    """Evaluate every cell; results come back in cell order."""
    cells = spec.cells()
    n = thread_count(threads)
    if n == 1:
        results = [run_cell(spec, c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda c: run_cell(spec, c), cells))
    return list(zip(cells, results))


def best_per_cell(rows):
    """Best (lambda, mu) per (kind, snr, method) by seed-averaged SSIM."""
    groups = {}
    for cell, res in rows:
        key = (cell.kind, cell.snr_db, cell.method)
        groups.setdefault(key, {}).setdefault((cell.lam, cell.mu), []).append(res)
    best = []
    for key, params in groups.items():
        means = {p: {k: float(np.mean([r[k] for r in rs])) for k in ("ssim", "rmse", "wall_ms")}
                 for p, rs in params.items()}
        # first maximum in insertion order, so ties resolve deterministically
        p = max(means, key=lambda q: means[q]["ssim"])
        best.append((key, p, means[p]))
    return best


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(rows, timing=True):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for cell, res in rows:
        w.writerow([cell.kind, _fmt(cell.snr_db), cell.method, _fmt(cell.lam), _fmt(cell.mu),
                    cell.seed, _fmt(res["ssim"]), _fmt(res["rmse"]),
                    _fmt(round(res["wall_ms"], 3)) if timing else ""])
    for (kind, snr, method), (lam, mu), m in best_per_cell(rows):
        w.writerow([kind, _fmt(snr), method, _fmt(lam), _fmt(mu), "best",
                    _fmt(m["ssim"]), _fmt(m["rmse"]),
                    _fmt(round(m["wall_ms"], 3)) if timing else ""])
    return buf.getvalue()

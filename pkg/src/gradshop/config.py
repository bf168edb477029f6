"""JSON run configuration for the command line.

Layout (every section and key optional, unknown keys rejected)::

    {
      "method": "dls" | "dctls",
      "dls":   {"lam": 1.0, "mu": 0.01, "outer_iters": 30, ...},
      "patch": {"patch_h": 8, "patch_w": 8, "stride": 2, "clamp_boundary": true},
      "ssim":  {"window": 11, "sigma": 1.5, "k1": 0.01, "k2": 0.03, "dynamic_range": "auto"},
      "sign":  {"flip_x": true, "flip_y": false}
    }
"""
import json
from dataclasses import dataclass, field, fields

from .dls import DlsConfig
from .fields import PatchConfig
from .metrics import SsimConfig
from .photometric import SignConvention

METHODS = ("dls", "dctls")


class ConfigError(ValueError):
    """Invalid or unparseable configuration."""


def _build(cls, data, section):
    if not isinstance(data, dict):
        raise ConfigError(f"'{section}' must be a JSON object")
    known = {f.name for f in fields(cls)} - {"patch"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {', '.join(sorted(unknown))}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid '{section}' settings: {e}") from e


@dataclass(frozen=True)
class RunConfig:
    method: str = "dls"
    dls: DlsConfig = field(default_factory=DlsConfig)
    ssim: SsimConfig = field(default_factory=SsimConfig)
    sign: SignConvention = field(default_factory=SignConvention)

    @property
    def patch(self):
        return self.dls.patch

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("run config must be a JSON object")
        unknown = set(doc) - {"method", "dls", "patch", "ssim", "sign"}
        if unknown:
            raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
        method = doc.get("method", "dls")
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
        patch = _build(PatchConfig, doc.get("patch", {}), "patch")
        dls_doc = doc.get("dls", {})
        if isinstance(dls_doc, dict) and "patch" in dls_doc:
            raise ConfigError("put patch settings in the top-level 'patch' section")
        dls = _build(DlsConfig, dls_doc, "dls")
        try:
            dls = dls.with_(patch=patch)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        return cls(
            method=method,
            dls=dls,
            ssim=_build(SsimConfig, doc.get("ssim", {}), "ssim"),
            sign=_build(SignConvention, doc.get("sign", {}), "sign"),
        )

    @classmethod
    def load(cls, path):
        with open(path) as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: {e}") from e
        return cls.from_dict(doc)

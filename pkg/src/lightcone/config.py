"""Run configuration: a single JSON file, validated strictly.

Unknown keys are rejected with the offending field path so typos in
tolerance names never silently fall back to defaults.
"""

import json
from dataclasses import dataclass, field

from . import surface as sf
from .errors import ConfigError

# default verdict thresholds; each is a constant C in a bound C * h^2
# unless stated otherwise (calibrated on the analytic surface catalog)
DEFAULT_TOLERANCES = {
    "willmore_C": 2.0,          # interior max of the Willmore residual
    "constrained_C": 2.0,       # relative multiplier-fit residual
    "isothermic_C": 1.0,        # relative smallest singular value
    "flatness_C": 20.0,         # interior max curvature of d^lambda
    "det_tol": 1e-6,            # Bäcklund determinant condition
    "factor_tol": 1e-11,        # dressing-factor algebra
    "backlund_willmore": 0.5,   # residual of the transform off its singular set
    "commute_tol": 1e-6,        # permutability / commuting-diagram defects
}


def _parse_complex(v, path):
    if isinstance(v, (int, float, complex)):
        return complex(v)
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    raise ConfigError("expected a number, [re, im] or {re, im}", field=path)


def _check_keys(d, allowed, path):
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", field=path)


@dataclass(frozen=True)
class BacklundConfig:
    alpha: complex = 2.0
    beta: complex = 3.0
    reality_mode: bool = False
    run_permutability: bool = False
    run_commute: bool = False
    commute_lambda: complex = 1j


@dataclass(frozen=True)
class RunConfig:
    surface_name: str = "clifford_torus"
    surface_params: dict = field(default_factory=dict)
    nx: int = 65
    ny: int = 65
    ambient_n: int = 3
    lambda_samples: tuple = (1j,)
    spectral_lambda: complex = None
    backlund: BacklundConfig = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    rng_seed: int = 0
    report_path: str = None
    export_formats: tuple = ()
    export_dir: str = "."

    def grid(self):
        return sf.default_grid(self.surface_name, self.nx, self.ny)

    def surface(self):
        return sf.zoo(self.surface_name, self.surface_params,
                      nx=self.nx, ny=self.ny)


def from_dict(data):
    """Validate a parsed JSON document into a RunConfig."""
    _check_keys(data, {"surface", "grid", "ambient_n", "lambda_samples",
                       "spectral", "backlund", "tolerances", "rng_seed",
                       "outputs"}, "")
    out = {}
    surf = data.get("surface", {})
    _check_keys(surf, {"name", "params"}, "surface")
    name = surf.get("name", "clifford_torus")
    if name not in sf.ZOO_NAMES:
        raise ConfigError(f"unknown surface {name!r}", field="surface.name")
    out["surface_name"] = name
    out["surface_params"] = dict(surf.get("params", {}))

    grid = data.get("grid", {})
    _check_keys(grid, {"nx", "ny"}, "grid")
    for key in ("nx", "ny"):
        v = grid.get(key, 65)
        if not isinstance(v, int) or v < 5:
            raise ConfigError(f"must be an integer >= 5, got {v!r}",
                              field=f"grid.{key}")
        out[key] = v

    n = data.get("ambient_n", 3)
    if n != 3:
        raise ConfigError("only the conformal 3-sphere is implemented",
                          field="ambient_n")
    out["ambient_n"] = n

    out["lambda_samples"] = tuple(
        _parse_complex(v, f"lambda_samples[{i}]")
        for i, v in enumerate(data.get("lambda_samples", [1j])))
    for i, lam in enumerate(out["lambda_samples"]):
        if lam == 0:
            raise ConfigError("lambda = 0 is a pole of the family",
                              field=f"lambda_samples[{i}]")

    spectral = data.get("spectral")
    if spectral is not None:
        _check_keys(spectral, {"lambda"}, "spectral")
        lam = _parse_complex(spectral.get("lambda", 1.0), "spectral.lambda")
        if lam == 0:
            raise ConfigError("lambda = 0 is a pole of the family",
                              field="spectral.lambda")
        out["spectral_lambda"] = lam

    bk = data.get("backlund")
    if bk is not None:
        _check_keys(bk, {"alpha", "beta", "reality_mode", "run_permutability",
                         "run_commute", "commute_lambda"}, "backlund")
        out["backlund"] = BacklundConfig(
            alpha=_parse_complex(bk.get("alpha", 2.0), "backlund.alpha"),
            beta=_parse_complex(bk.get("beta", 3.0), "backlund.beta"),
            reality_mode=bool(bk.get("reality_mode", False)),
            run_permutability=bool(bk.get("run_permutability", False)),
            run_commute=bool(bk.get("run_commute", False)),
            commute_lambda=_parse_complex(bk.get("commute_lambda", 1j),
                                          "backlund.commute_lambda"),
        )

    tol = dict(DEFAULT_TOLERANCES)
    overrides = data.get("tolerances", {})
    _check_keys(overrides, DEFAULT_TOLERANCES, "tolerances")
    tol.update(overrides)
    out["tolerances"] = tol

    out["rng_seed"] = int(data.get("rng_seed", 0))

    outputs = data.get("outputs", {})
    _check_keys(outputs, {"report_path", "export_formats", "export_dir"},
                "outputs")
    out["report_path"] = outputs.get("report_path")
    formats = tuple(outputs.get("export_formats", ()))
    for f in formats:
        if f not in ("obj", "ply", "csv"):
            raise ConfigError(f"unknown export format {f!r}",
                              field="outputs.export_formats")
    out["export_formats"] = formats
    out["export_dir"] = outputs.get("export_dir", ".")
    return RunConfig(**out)


def load(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top-level document must be an object")
    return from_dict(data)

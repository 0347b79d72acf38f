"""Run configuration, field persistence, and report emission.

Fields travel as raw little-endian float64 in C order next to a JSON
sidecar carrying the grid and problem metadata; configs and reports are
JSON; tables are CSV.  Everything is diff-able and language-neutral.
"""

import json
from pathlib import Path

import numpy as np

from .coxeter import CoxeterGroup, named_group
from .params import ModelParams, admissible
from .spectral import Field, Grid

_CONFIG_KEYS = {
    "problem": {"N", "s", "alpha", "p", "experimental"},
    "grid": {"M", "L"},
    "group": {"name", "generators"},
    "solver": {"tol", "max_iters", "step", "seed", "R"},
    "output": {"dir", "formats"},
}

_SOLVER_DEFAULTS = {"tol": 1e-6, "max_iters": 2000, "step": 1.0, "seed": 0, "R": None}
_OUTPUT_DEFAULTS = {"dir": "out", "formats": ["f64", "json"]}


class ConfigError(ValueError):
    pass


def _check_keys(section: str, data: dict) -> None:
    unknown = set(data) - _CONFIG_KEYS[section]
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {sorted(unknown)}")


def load_config(path, allow_s_list=False) -> dict:
    """Parse and validate a run configuration file.

    Returns a resolved dict with keys params, grid, group, solver, output;
    group resolution is deferred to resolve_group so the table command can
    accept a list of names.  With allow_s_list the problem section may give
    's' as a list (for sweeps over the fractional order); params then carries
    the first value and every listed value is checked against the norm-side
    constraints only.
    """
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    for section in ("problem", "grid"):
        if section not in raw:
            raise ConfigError(f"missing required section '{section}'")
    for section, data in raw.items():
        if not isinstance(data, dict):
            raise ConfigError(f"section '{section}' must be an object")
        _check_keys(section, data)

    prob = raw["problem"]
    for k in ("N", "s", "alpha", "p"):
        if k not in prob:
            raise ConfigError(f"problem section needs '{k}'")
    s_raw = prob["s"]
    if isinstance(s_raw, (list, tuple)):
        # Sweeps over the fractional order never form the interaction term,
        # so only the norm-side constraints apply, not the p bound.
        if not allow_s_list:
            raise ConfigError("'s' must be a single number for this command")
        if not s_raw:
            raise ConfigError("'s' list must be nonempty")
        s_values = [float(v) for v in s_raw]
        N = int(prob["N"])
        for s in s_values:
            if not (0.0 < s < 1.0 and N > 2.0 * s):
                raise ConfigError(f"s sweep values need 0 < s < 1 and N > 2s; got s={s}")
        params = ModelParams(
            N=N,
            s=s_values[0],
            alpha=float(prob["alpha"]),
            p=float(prob["p"]),
            experimental=bool(prob.get("experimental", False)),
        )
    else:
        params = ModelParams(
            N=int(prob["N"]),
            s=float(s_raw),
            alpha=float(prob["alpha"]),
            p=float(prob["p"]),
            experimental=bool(prob.get("experimental", False)),
        )
        if not admissible(params):
            raise ConfigError(
                f"inadmissible problem parameters (N={params.N}, s={params.s}, "
                f"alpha={params.alpha}, p={params.p}): need 0 < s < 1, "
                f"0 < alpha < N, N > 2s, and 2 <= p < (N + alpha)/(N - 2s)"
                + ("" if params.N != 2 else "; N = 2 needs experimental: true")
            )
    gsec = raw["grid"]
    for k in ("M", "L"):
        if k not in gsec:
            raise ConfigError(f"grid section needs '{k}'")
    grid = Grid(params.N, int(gsec["M"]), float(gsec["L"]))

    solver = dict(_SOLVER_DEFAULTS)
    solver.update(raw.get("solver", {}))
    output = dict(_OUTPUT_DEFAULTS)
    output.update(raw.get("output", {}))
    return {
        "params": params,
        "grid": grid,
        "group_spec": raw.get("group", {"name": "trivial"}),
        "solver": solver,
        "output": output,
        "raw_problem": prob,
    }


def resolve_group(group_spec: dict) -> CoxeterGroup:
    if "generators" in group_spec:
        return CoxeterGroup([np.asarray(g) for g in group_spec["generators"]])
    name = group_spec.get("name", "trivial")
    if isinstance(name, list):
        raise ConfigError("this command needs a single group name, not a list")
    return named_group(name)


def group_name_list(group_spec: dict):
    name = group_spec.get("name", [])
    return name if isinstance(name, list) else [name]


def resolved_config_dict(params, grid, group, solver: dict, output: dict) -> dict:
    """Full defaulted config echo so a run is reproducible from its report."""
    return {
        "problem": {
            "N": params.N,
            "s": params.s,
            "alpha": params.alpha,
            "p": params.p,
            "experimental": params.experimental,
        },
        "grid": {"M": grid.M, "L": grid.L},
        "group": {"name": group.name or "custom", "order": group.order},
        "solver": solver,
        "output": output,
    }


# ---------------------------------------------------------------------------
# Field files
# ---------------------------------------------------------------------------

def write_field(path, field: Field, params: ModelParams | None = None,
                description: str = "") -> None:
    """Raw float64 dump plus a JSON sidecar at <path>.json."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(field.values, dtype="<f8")
    data.tofile(path)
    meta = {
        "dims": field.grid.N_dims,
        "M": field.grid.M,
        "L": field.grid.L,
        "dtype": "<f8",
        "order": "C",
        "description": description,
    }
    if params is not None:
        meta.update({"N": params.N, "s": params.s, "alpha": params.alpha, "p": params.p})
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_field(path):
    """Load a field written by write_field; returns (Field, sidecar dict)."""
    path = Path(path)
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    grid = Grid(int(meta["dims"]), int(meta["M"]), float(meta["L"]))
    data = np.fromfile(path, dtype="<f8")
    if data.size != grid.n_nodes:
        raise ValueError(
            f"field file has {data.size} values, grid expects {grid.n_nodes}"
        )
    return Field(grid, data.reshape(grid.shape)), meta


def write_report(path, report: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def solution_report(sol, config_echo: dict) -> dict:
    slope = sol.decay_slope
    return {
        "energy": sol.energy,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "nodal_count": sol.nodal_count,
        "decay_slope": None if np.isnan(slope) else slope,
        "converged": sol.converged,
        "config": config_echo,
        "metadata": sol.metadata,
    }

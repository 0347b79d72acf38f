"""Command-line front end.

Subcommands: groundstate, saddle, table, decay, extension-check, info.
Exit codes: 0 success, 1 configuration or validation error, 2 a run that
finished but did not meet its convergence or tolerance target.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import spectral
from .analysis import (
    decay_exponent,
    energy_table,
    nodal_domains,
    sign_on_fundamental_domain,
)
from .extension import YGrid, default_y_max, energy_identity_check
from .fieldio import (
    ConfigError,
    group_name_list,
    load_config,
    read_field,
    resolve_group,
    resolved_config_dict,
    solution_report,
    write_field,
    write_report,
)
from .params import constants_for, critical_exponent
from .solver import (
    CollapseToZero,
    SolverConfig,
    init_groundstate,
    init_saddle,
    solve,
)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fracsaddle",
        description="Groundstates and reflection-symmetric saddle solutions "
        "of a nonlocal Choquard equation on a periodic box.",
    )
    ap.add_argument("--threads", type=int, default=1, help="transform worker count")
    ap.add_argument(
        "--deterministic",
        action="store_true",
        help="force single-threaded transforms for bit-reproducible runs",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--seed", type=int, default=None, help="override solver seed")
        return p

    with_config(sub.add_parser("groundstate", help="minimize without symmetry"))
    with_config(sub.add_parser("saddle", help="minimize in a signed symmetry class"))
    with_config(sub.add_parser("table", help="energy comparison table over groups"))
    dp = sub.add_parser("decay", help="re-fit the tail exponent of a saved field")
    dp.add_argument("--field", required=True, help="path to a saved .f64 field")
    dp.add_argument("--window", type=float, nargs=2, default=(0.2, 0.4),
                    metavar=("RMIN", "RMAX"), help="fit window as fractions of L")
    dp.add_argument("--out", default=None, help="write a JSON report here")
    with_config(sub.add_parser("extension-check", help="energy identity sweep over s"))
    ip = sub.add_parser("info", help="print the analytic constants for a problem")
    ip.add_argument("--config", required=True)
    return ap


def _prepare(args, allow_s_list=False):
    cfg = load_config(args.config, allow_s_list=allow_s_list)
    if args.seed is not None:
        cfg["solver"]["seed"] = int(args.seed)
    if args.out is not None:
        cfg["output"]["dir"] = args.out
    return cfg


def _solver_config(cfg, group) -> SolverConfig:
    sv = cfg["solver"]
    return SolverConfig(
        params=cfg["params"],
        grid=cfg["grid"],
        group=group,
        max_iters=int(sv["max_iters"]),
        tol=float(sv["tol"]),
        step=float(sv["step"]),
        seed=int(sv["seed"]),
    )


def _run_and_write(cfg, group, initial, extra=None) -> int:
    sc = _solver_config(cfg, group)
    sol = solve(sc, initial)
    echo = resolved_config_dict(cfg["params"], cfg["grid"], group, cfg["solver"], cfg["output"])
    report = solution_report(sol, echo)
    if extra:
        report.update(extra(sol))
    outdir = Path(cfg["output"]["dir"])
    name = group.name or "custom"
    write_field(outdir / f"{name}_solution.f64", sol.u, cfg["params"],
                description=f"converged={sol.converged} energy={sol.energy:.8g}")
    write_report(outdir / f"{name}_report.json", report)
    print(
        f"{name}: converged={sol.converged} iters={sol.iterations} "
        f"energy={sol.energy:.8g} residual={sol.residual:.3g} "
        f"nodal={sol.nodal_count}"
    )
    return 0 if sol.converged else 2


def cmd_groundstate(args) -> int:
    cfg = _prepare(args)
    group = resolve_group(cfg["group_spec"])
    if not group.is_trivial():
        raise ConfigError("groundstate runs need the trivial group")
    u0 = init_groundstate(cfg["grid"], cfg["params"])
    return _run_and_write(cfg, group, u0)


def cmd_saddle(args) -> int:
    cfg = _prepare(args)
    group = resolve_group(cfg["group_spec"])
    if group.is_trivial():
        raise ConfigError("saddle runs need a nontrivial group")
    R = cfg["solver"].get("R")
    u0 = init_saddle(cfg["grid"], group, cfg["params"], R=R)

    def extra(sol):
        rep = nodal_domains(sol.u)
        return {
            "nodal_report": {
                "count": rep.count,
                "component_sizes": rep.component_sizes,
                "threshold": rep.threshold,
            },
            "constant_sign_on_chamber": sign_on_fundamental_domain(sol.u, group),
        }

    return _run_and_write(cfg, group, u0, extra)


def cmd_table(args) -> int:
    cfg = _prepare(args)
    names = group_name_list(cfg["group_spec"])
    if not names:
        raise ConfigError("table runs need a nonempty group name list")
    configs = [_solver_config(cfg, resolve_group({"name": n})) for n in names]
    table = energy_table(configs)
    outdir = Path(cfg["output"]["dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    table.to_csv(outdir / "energy_table.csv")
    for row in table.rows:
        star = f"{row.c_star:.6g}" if np.isfinite(row.c_star) else "-"
        print(f"{row.group}: cG={row.c_G:.6g} cStar={star} verified={row.verified}")
    return 0 if all(r.verified for r in table.rows) else 2


def cmd_decay(args) -> int:
    field, meta = read_field(args.field)
    lo, hi = args.window
    slope = decay_exponent(field, lo, hi)
    print(f"decay slope over [{lo}L, {hi}L]: {slope:.4f}")
    if args.out:
        write_report(Path(args.out), {"field": str(args.field), "window": [lo, hi],
                                      "slope": slope, "sidecar": meta})
    return 0


def cmd_extension_check(args) -> int:
    cfg = _prepare(args, allow_s_list=True)
    prob = cfg["raw_problem"]
    svals = prob["s"] if isinstance(prob["s"], list) else [prob["s"]]
    grid = cfg["grid"]
    J = 256
    rng = np.random.default_rng(int(cfg["solver"]["seed"]))
    noise = rng.standard_normal(grid.shape)
    smooth = spectral.ifftn(spectral.fftn(noise) * np.exp(-0.5 * grid.freq_norm_sq())).real
    u = spectral.Field(grid, smooth)
    outdir = Path(cfg["output"]["dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    ok = True
    for s in (float(x) for x in svals):
        yg = YGrid.graded(J, default_y_max(grid))
        lhs, rhs, ratio = energy_identity_check(u, s, yg)
        rows.append((s, J, lhs, rhs, ratio))
        ok = ok and abs(ratio - 1.0) <= 0.02
        print(f"s={s}: lhs={lhs:.8g} rhs={rhs:.8g} ratio={ratio:.6f}")
    with open(outdir / "extension_check.csv", "w") as fh:
        fh.write("s,J,lhs,rhs,ratio\n")
        for r in rows:
            fh.write(f"{r[0]},{r[1]},{r[2]:.12g},{r[3]:.12g},{r[4]:.12g}\n")
    return 0 if ok else 2


def cmd_info(args) -> int:
    cfg = load_config(args.config)
    params = cfg["params"]
    c = constants_for(params)
    print(f"N={params.N} s={params.s} alpha={params.alpha} p={params.p}")
    print(f"A_alpha            = {c.A_alpha:.12g}")
    print(f"k_s                = {c.k_s:.12g}")
    print(f"critical exponent  = {critical_exponent(params):.12g}")
    return 0


_COMMANDS = {
    "groundstate": cmd_groundstate,
    "saddle": cmd_saddle,
    "table": cmd_table,
    "decay": cmd_decay,
    "extension-check": cmd_extension_check,
    "info": cmd_info,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spectral.set_threads(1 if args.deterministic else max(1, args.threads))
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CollapseToZero as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

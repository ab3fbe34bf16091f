"""``pennsfv`` command-line interface."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import config as cfgmod
from . import diagnostics as dg
from . import io
from .experiments import get_experiment, initial_state, run_study
from .geometry import GeometryError, classify_cells, shape_from_config
from .grid import GridError, build_grid
from .scheme import SchemeError, run

log = logging.getLogger("pennsfv")


def _load(path, out=None):
    cfg = cfgmod.load(path)
    return cfgmod.apply_overrides(cfg, out)


def _header(cfg: dict, extra: dict) -> dict:
    flat = {"config_hash": cfgmod.config_hash(cfg)}
    for sec, vals in cfg.items():
        if isinstance(vals, dict):
            for k, v in vals.items():
                flat[f"{sec}.{k}"] = v
    flat.update(extra)
    return flat


def cmd_run(args) -> int:
    cfg = _load(args.config, args.out)
    spec = cfgmod.grid_spec(cfg)
    grid = build_grid(spec)
    defn = get_experiment(cfg["initial"]["experiment"])
    if "shape" in cfg:
        defn = replace(defn, shape=shape_from_config(cfg["shape"]))
    params = cfgmod.fluid_params(cfg)
    solver = cfgmod.solver_params(cfg, grid.h)
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    mask = classify_cells(defn.shape, grid)
    init = initial_state(defn, grid)
    key = cfgmod.config_hash(cfg)
    every = int(cfg["output"]["snapshot_every"])
    vtk = bool(cfg["output"]["vtk"])
    records = []

    def audit(k, old, new, stats):
        records.append(dg.energy_audit(new, old, mask, params, solver.dt, shape=defn.shape))
        if every and k % every == 0:
            io.write_pnsf(out / f"{key}_k{k:05d}.pnsf", new, params)
            if vtk:
                io.write_vtk(out / f"{key}_k{k:05d}.vtk", new)

    header = _header(cfg, {"n": grid.n, "h": grid.h, "dt": solver.dt, "nsteps": solver.nsteps,
                           "nu": params.nu})
    try:
        traj = run(init, mask, params, solver, hooks=[audit], keep_states=False)
    except SchemeError as exc:
        print(f"pennsfv: solver failure at step {exc.step}: {exc}", file=sys.stderr)
        io.write_diagnostics_csv(out / f"diag_{defn.id}_{key}.csv", records, header)
        return 3
    io.write_diagnostics_csv(out / f"diag_{defn.id}_{key}.csv", records, header)
    io.write_pnsf(out / f"{key}.pnsf", traj.final, params)
    if vtk:
        io.write_vtk(out / f"{key}.vtk", traj.final)
    last = records[-1]
    print(f"{defn.id}: n={grid.n} steps={solver.nsteps} mass={last.mass:.12g} "
          f"energy={last.ekin + last.eint:.6g} max slack={max(r.slack for r in records):.2e}")
    print(f"wrote {out}")
    return 0


def cmd_study(args) -> int:
    cfg = _load(args.config, args.out)
    if "study" not in cfg:
        raise cfgmod.ConfigError(f"{args.config}: missing [study] section")
    plan = cfgmod.study_plan(cfg, paper_scale=args.paper_scale)
    defn = get_experiment(cfg["initial"]["experiment"])
    f = cfg["fluid"]
    defn = replace(defn, a=float(f["a"]), gamma=float(f["gamma"]), mu=float(f["mu"]),
                   lam=float(f["lambda"]), alpha=float(f["alpha"]), T=float(cfg["solver"]["T"]))
    out = Path(cfg["output"]["dir"])
    rows, eocs = run_study(plan, defn, out, c_t=float(cfg["solver"]["c_t"]), resume=args.resume,
                           grad_transfer=cfg["study"].get("grad_transfer", "exact"),
                           workers=args.workers)
    print(f"{'h':>10} {'eps':>12} {'E_rho':>12} {'E_u':>12} {'E_gradu':>12} {'RE':>12}")
    for r in rows:
        print(f"{r.h:10.5g} {r.eps:12.5g} {r.E_rho:12.5g} {r.E_u:12.5g} {r.E_gradu:12.5g} {r.RE:12.5g}")
    print("EOC")
    for e in eocs:
        print(f"{e['h_coarse']:10.5g} -> {e['h_fine']:<10.5g} E_rho {e['E_rho']:6.3f}  "
              f"E_u {e['E_u']:6.3f}  E_gradu {e['E_gradu']:6.3f}  RE {e['RE']:6.3f}")
    print(f"wrote {out / 'errors.csv'} and {out / 'eoc.csv'}")
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suites
    results = run_suites(args.suite, mutate=args.mutate)
    width = max(len(k) for k in results)
    for name, (ok, detail) in results.items():
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all(ok for ok, _ in results.values()) else 1


def cmd_exponents(args) -> int:
    ex = dg.exponents(args.d, args.gamma, args.alpha)
    for k in ("beta_D", "beta_R_tilde", "beta_R", "beta_M", "beta_RE"):
        print(f"{k:<13} {getattr(ex, k): .12g}")
    for note in dg.regime_notes(args.d, args.gamma, args.alpha):
        print(note)
    return 0


def cmd_info(args) -> int:
    state, hdr = io.read_pnsf(args.snapshot)
    for k, v in hdr.items():
        print(f"{k:<7} {v}")
    print(f"mass    {dg.mass(state):.15g}")
    print(f"rho     min {state.rho.min():.6g} max {state.rho.max():.6g}")
    print(f"|u|max  {float((state.u ** 2).sum(axis=0).max()) ** 0.5:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pennsfv", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a single simulation")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides output.dir)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("study", help="run a convergence study")
    s.add_argument("config")
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--paper-scale", action="store_true",
                   help="levels m=0..3 against reference m=4")
    s.add_argument("--resume", action=argparse.BooleanOptionalAction, default=True,
                   help="reuse cached cases from the output directory")
    s.set_defaults(func=cmd_study)

    v = sub.add_parser("verify", help="run built-in invariant suites")
    v.add_argument("--suite", action="append", help="suite name (repeatable)")
    v.add_argument("--mutate", choices=["pressure-sign"], help="inject a known fault")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("exponents", help="print the rate exponents for (d, gamma, alpha)")
    e.add_argument("d", type=int)
    e.add_argument("gamma", type=float)
    e.add_argument("alpha", type=float)
    e.set_defaults(func=cmd_exponents)

    i = sub.add_parser("info", help="describe a PNSF snapshot")
    i.add_argument("snapshot")
    i.set_defaults(func=cmd_info)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (cfgmod.ConfigError, GeometryError, GridError, ValueError, io.FormatError) as exc:
        print(f"pennsfv: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line entry point: ``efm {run,convergence,verify,kernel}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cache import CACHE_ENV, default_cache_dir, load_or_build
from .collision import set_fft_workers
from .config import ConfigError, RunConfig, load_config
from .diagnostics import CSV_COLUMNS, convergence_table
from .grid import GridSpec, HermitianError
from .kernel import KernelSpec
from .solver import Simulation
from .timestepper import NumericalError, TimeSpec
from .verify import verify

__all__ = ["main"]

log = logging.getLogger("entropic_fourier")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
FLOAT_FMT = "%.15e"


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return FLOAT_FMT % float(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o))


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.out or "efm_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cache_dir(cfg: RunConfig):
    return Path(cfg.cache_dir) if cfg.cache_dir else default_cache_dir()


def _setup(cfg: RunConfig, N: int | None = None, nodes: int | None = None) -> Simulation:
    """Simulation for ``cfg``; ``nodes`` overrides M (2D) or M_r (3D)."""
    d = cfg.problem_spec().d
    return Simulation.setup(
        cfg.problem_spec(),
        cfg.method,
        N if N is not None else cfg.N,
        R=cfg.R,
        T=cfg.T,
        M=nodes if nodes is not None and d == 2 else cfg.M,
        M_r=nodes if nodes is not None and d == 3 else cfg.M_r,
        init=cfg.init,
        eps=cfg.eps,
        allow_aliasing=cfg.allow_aliasing,
        cache_dir=_cache_dir(cfg),
        use_cache=cfg.use_cache,
    )


def _diag_columns(d: int):
    return [c for c in CSV_COLUMNS if not (d == 2 and c == "momentum_3")]


# ------------------------------------------------------------------- run


def _slice_rows(sim: Simulation, state):
    g = sim.grid
    F = state.values
    centre = (slice(None),) + (g.n,) * (g.d - 1)
    v1 = g.v1d
    line = F[centre]
    if sim.problem.has_exact:
        pts = np.zeros((g.N, g.d))
        pts[:, 0] = v1
        ex = sim.problem.exact(state.time, pts)
        return ["v1", "F", "exact"], list(zip(v1, line, ex))
    return ["v1", "F"], list(zip(v1, line))


def _field_rows(sim: Simulation, state):
    g = sim.grid
    F = state.values
    if g.d == 3:
        F = F[:, :, g.n]
    V1, V2 = np.meshgrid(g.v1d, g.v1d, indexing="ij")
    return ["v1", "v2", "F"], list(zip(V1.ravel(), V2.ravel(), F.ravel()))


def _due(t: float, targets, done: set, dt: float) -> list[float]:
    return [s for s in targets if s not in done and abs(t - s) <= 0.5 * dt + 1e-12]


def _tag(t: float) -> str:
    return f"{t:.4f}".replace(".", "p")


def cmd_run(args, cfg: RunConfig, raw: dict) -> int:
    out = _out_dir(args, cfg)
    sim = _setup(cfg)
    ts = TimeSpec(cfg.dt, cfg.t_end, cfg.output_every)
    slice_times = sorted(set(cfg.slice_times) | {cfg.t_end})
    field_times = sorted(set(cfg.field_times))
    written: dict[str, list] = {"slices": [], "fields": []}
    done_s, done_f = set(), set()

    def observer(state, rec):
        for s in _due(state.time, slice_times, done_s, cfg.dt):
            done_s.add(s)
            name = f"slice_t{_tag(s)}.csv"
            write_csv(out / name, *_slice_rows(sim, state))
            written["slices"].append(name)
        for s in _due(state.time, field_times, done_f, cfg.dt):
            done_f.add(s)
            name = f"field_t{_tag(s)}.csv"
            write_csv(out / name, *_field_rows(sim, state))
            written["fields"].append(name)

    try:
        result = sim.run(ts, [observer])
    except NumericalError as exc:
        np.savez(out / "failure_dump.npz", **{k: np.asarray(v) for k, v in exc.dump.items()})
        print(f"numerical failure: {exc} (state dumped to {out / 'failure_dump.npz'})", file=sys.stderr)
        return EXIT_NUMERIC
    cols = _diag_columns(sim.grid.d)
    write_csv(out / "diagnostics.csv", cols, ([r.row()[c] for c in cols] for r in result.records))
    recs = result.records
    mass0 = recs[0].mass
    eta = [r.entropy for r in recs]
    summary = {
        "version": __version__,
        "config": cfg.to_dict(),
        "grid": {"d": sim.grid.d, "N_input": sim.grid.N_input, "N": sim.grid.N, "T": sim.grid.T, "h": sim.grid.h},
        "kernel_cache": sim.kernel_status,
        "runtime_s": result.runtime,
        "steps": ts.steps,
        "collision_evaluations": result.evaluations,
        "errors": result.errors,
        "final": recs[-1].row(),
        "mass_drift_rel": max(abs(r.mass - mass0) for r in recs) / abs(mass0),
        "max_positivity_error": max(r.positivity_error for r in recs),
        "max_entropy_increase": max(np.diff(eta), default=0.0),
        "momentum_drift": max(max(abs(a - b) for a, b in zip(r.momentum, recs[0].momentum)) for r in recs),
        "energy_drift": max(abs(r.energy - recs[0].energy) for r in recs),
        "files": {"diagnostics": "diagnostics.csv", **written},
    }
    write_json(out / "summary.json", summary)
    print(json.dumps({"out": str(out), "errors": result.errors, "runtime_s": round(result.runtime, 3)}))
    return EXIT_OK


# ----------------------------------------------------------- convergence


def cmd_convergence(args, cfg: RunConfig, raw: dict) -> int:
    out = _out_dir(args, cfg)
    prob = cfg.problem_spec()
    if not prob.has_exact:
        raise ConfigError(f"convergence needs a problem with an exact solution, not {prob.name!r}")
    t_end = cfg.t_end if "t_end" in raw else 0.01
    Ms = cfg.M_list or [cfg.M if prob.d == 2 else cfg.M_r]
    rows, table = [], {}
    for M in Ms:
        errs = {"l1": {}, "l2": {}, "linf": {}}
        times = {}
        for N in cfg.N_list:
            sim = _setup(cfg, N, M)
            try:
                res = sim.run(TimeSpec(cfg.dt, t_end, max(1, math.ceil(t_end / cfg.dt))))
            except NumericalError as exc:
                print(f"numerical failure at N={N}: {exc}", file=sys.stderr)
                return EXIT_NUMERIC
            for k in errs:
                errs[k][N] = res.errors[k]
            times[N] = res.runtime
            log.info("M=%s N=%s errors=%s", M, N, res.errors)
        rates = {k: {r["N"]: r["rate"] for r in convergence_table(v)} for k, v in errs.items()}
        for N in cfg.N_list:
            g = GridSpec(prob.d, N, cfg.R, cfg.T, form="carleman" if prob.d == 2 else "classical",
                         allow_aliasing=cfg.allow_aliasing)
            rows.append([M, N, g.N, errs["l1"][N], rates["l1"][N], errs["l2"][N], rates["l2"][N],
                         errs["linf"][N], rates["linf"][N], times[N]])
        table[str(M)] = {"errors": {k: {str(n): e for n, e in v.items()} for k, v in errs.items()},
                         "rates": {k: {str(n): r for n, r in v.items()} for k, v in rates.items()}}
    header = ["M", "N", "N_eff", "l1", "rate_l1", "l2", "rate_l2", "linf", "rate_linf", "runtime_s"]
    write_csv(out / "convergence.csv", header, rows)
    write_json(out / "convergence.json", {"version": __version__, "config": cfg.to_dict(), "t_end": t_end,
                                          "quadrature_nodes": "M" if prob.d == 2 else "M_r", "table": table})
    for r in rows:
        print(" ".join(_fmt(x) if x is not None else "-" for x in r))
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args, cfg: RunConfig, raw: dict) -> int:
    seed = args.seed if args.seed is not None else cfg.seed
    rep = verify(seed, cfg.tamper, quick=getattr(args, "quick", False))
    if args.out or cfg.out:
        write_json(_out_dir(args, cfg) / "verify_report.json", rep)
    for c in rep["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} value={c['value']:.3e} bound={c['bound']:.1e}")
    print(f"{rep['n_checks'] - rep['n_failed']}/{rep['n_checks']} checks passed")
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


# ---------------------------------------------------------------- kernel


def cmd_kernel(args, cfg: RunConfig, raw: dict) -> int:
    prob = cfg.problem_spec()
    d = prob.d
    cache = _cache_dir(cfg)
    Ms = cfg.M_list or [cfg.M if d == 2 else cfg.M_r]
    Ns = cfg.N_list if "N_list" in raw or "N" not in raw else [cfg.N]
    report = []
    for N in Ns:
        g = GridSpec(d, N, cfg.R, cfg.T, form="carleman" if d == 2 else "classical",
                     allow_aliasing=cfg.allow_aliasing)
        for M in Ms:
            spec = KernelSpec.for_grid(g, M=M if d == 2 else cfg.M, M_r=M if d == 3 else cfg.M_r)
            t0 = time.perf_counter()
            _, status = load_or_build(spec, cache)
            entry = {"d": d, "N": g.N, "M" if d == 2 else "M_r": M, "status": status,
                     "seconds": time.perf_counter() - t0}
            report.append(entry)
            print(json.dumps(entry))
    if args.out or cfg.out:
        write_json(_out_dir(args, cfg) / "kernel_report.json", {"cache_dir": str(cache), "kernels": report})
    return EXIT_OK


COMMANDS = {"run": cmd_run, "convergence": cmd_convergence, "verify": cmd_verify, "kernel": cmd_kernel}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="efm", description="Spectral solvers for the space-homogeneous Boltzmann equation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "run": "integrate one configuration and write diagnostics, slices and a summary",
        "convergence": "error and rate table over an N ladder (and optional M sweep)",
        "verify": "small-N structural self-checks; exit 4 on any failure",
        "kernel": f"build and cache kernels (cache dir from config, ${CACHE_ENV}, or XDG cache)",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text, description=text)
        s.add_argument("--config", metavar="PATH", help="JSON run configuration")
        s.add_argument("--out", metavar="DIR", help="output directory")
        s.add_argument("--threads", type=int, metavar="INT", help="FFT worker threads")
        s.add_argument("--seed", type=int, metavar="INT", help="random seed for the oracle suites")
        s.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (dotted keys, JSON values); repeatable")
        s.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            s.add_argument("--quick", action="store_true", help="smaller case list")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        overrides = list(args.override)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        if args.threads is not None:
            overrides.append(f"threads={args.threads}")
        cfg, raw = load_config(args.config, overrides)
        set_fft_workers(cfg.threads)
        return COMMANDS[args.command](args, cfg, raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HermitianError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # grid / kernel constructors validate cross-field constraints
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

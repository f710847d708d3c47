"""Command-line interface.

Subcommands: single (one efficiency evaluation), sweep (disorder x dephasing
grid with ensemble averaging), bound (invariant-subspace efficiency bound),
trajectory (time series of trap observables), delta-max (disorder gain per
dephasing rate, from a sweep CSV). All quantities are in units of the
nearest-neighbour coupling V; output is plain CSV with a header row.
Every subcommand is deterministic given its flags and seed.
"""
from __future__ import annotations

import argparse
import contextlib
import sys

import numpy as np

from . import analysis, dynamics, ensemble, graph, model

SINGLE_CSV_HEADER = ("delta_eps,gamma_phi,kappa,gamma_recomb,"
                     "eta,eta_loss,residual_trace,method,horizon")
TRAJECTORY_CSV_HEADER = "t,re_rho11,im_rho12,im_rho13,trace"
PURE_CSV_HEADER = "t,re_psi1,im_psi2,im_psi3,norm_sq"
DELTA_MAX_CSV_HEADER = "gamma_phi,delta_max,best_disorder,stderr"
CLUSTER_CSV_HEADER = "cluster,energy,multiplicity,trap_overlap"


def _fmt(x) -> str:
    return repr(float(x))


@contextlib.contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _add_graph_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--graph", required=required,
                   choices=[graph.BINARY_TREE, graph.HYPERCUBE, graph.CUSTOM],
                   help="transport graph family")
    p.add_argument("--generations", type=int,
                   help="binary tree generations (g >= 1)")
    p.add_argument("--dimension", type=int, help="hypercube dimension (d >= 1)")
    p.add_argument("--edge-file",
                   help="custom graph file: first line N, then 0-based 'i j' lines")


def _add_model_args(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    # with defaults=False the values fall back to the sweep config file
    p.add_argument("--init", choices=["leaves", "uniform", "site"],
                   help="initial state: statistical mixture of tree leaves, "
                        "uniform mixture of all sites, or a single site "
                        "(default: leaves on trees, uniform otherwise)")
    p.add_argument("--init-site", type=int,
                   help="0-based site index for --init site")
    p.add_argument("--trap", default="root" if defaults else None,
                   help="trap placement: 'root' (trees) or a 0-based site index")
    p.add_argument("--kappa", type=float, default=1.0 if defaults else None,
                   help="trapping rate kappa >= 0 (units of V, default 1)")
    p.add_argument("--gamma-recomb", type=float, default=0.01 if defaults else None,
                   help="uniform recombination rate Gamma >= 0 (default 0.01)")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dephasing", type=float, default=0.0,
                   help="dephasing rate gamma_phi >= 0 (default 0)")
    p.add_argument("--disorder", type=float, default=0.0,
                   help="site-energy disorder standard deviation (default 0)")
    p.add_argument("--realization", type=int, default=0,
                   help="disorder realization index (default 0)")
    p.add_argument("--seed", type=int, default=ensemble.DEFAULT_MASTER_SEED,
                   help=f"master seed (default {ensemble.DEFAULT_MASTER_SEED})")


def _build_topology(args, parser) -> graph.Topology:
    if args.graph == graph.BINARY_TREE:
        if args.generations is None:
            parser.error("--graph binary-tree requires --generations")
        if args.generations < 1:
            parser.error("--generations must be >= 1")
        return graph.build_binary_tree(args.generations)
    if args.graph == graph.HYPERCUBE:
        if args.dimension is None:
            parser.error("--graph hypercube requires --dimension")
        if args.dimension < 1:
            parser.error("--dimension must be >= 1")
        return graph.build_hypercube(args.dimension)
    if args.edge_file is None:
        parser.error("--graph custom requires --edge-file")
    return graph.load_edge_list(args.edge_file)


def _resolve_trap(args, top: graph.Topology, parser) -> int:
    if args.trap == "root":
        if top.kind != graph.BINARY_TREE:
            parser.error("--trap root is only defined for binary trees; "
                         "give a 0-based site index")
        return graph.root(top)
    try:
        trap = int(args.trap)
    except ValueError:
        parser.error(f"--trap must be 'root' or an integer, got {args.trap!r}")
    if not 0 <= trap < top.n_sites:
        parser.error(f"--trap {trap} out of range for {top.n_sites} sites")
    return trap


def _resolve_init(args, top: graph.Topology, parser) -> tuple[str, int | None]:
    name = args.init
    if name is None:
        name = "leaves" if top.kind == graph.BINARY_TREE else "uniform"
    kind = {"leaves": model.LEAF_MIXTURE, "uniform": model.UNIFORM_MIXTURE,
            "site": model.SINGLE_SITE}[name]
    if kind == model.LEAF_MIXTURE and top.kind != graph.BINARY_TREE:
        parser.error("--init leaves requires --graph binary-tree")
    if kind == model.SINGLE_SITE:
        if args.init_site is None:
            parser.error("--init site requires --init-site")
        if not 0 <= args.init_site < top.n_sites:
            parser.error(f"--init-site {args.init_site} out of range")
    return kind, args.init_site


def _check_rates(args, parser) -> None:
    if args.kappa < 0:
        parser.error("--kappa must be >= 0")
    if args.gamma_recomb < 0:
        parser.error("--gamma-recomb must be >= 0")
    dephasing = getattr(args, "dephasing", 0.0)
    if dephasing < 0:
        parser.error("--dephasing must be >= 0")
    if getattr(args, "disorder", 0.0) < 0:
        parser.error("--disorder must be >= 0")
    if getattr(args, "seed", 0) < 0:
        parser.error("--seed must be >= 0")


def _sampled_model(top, trap, args) -> model.TransportModel:
    """Model with energies drawn exactly as the matching sweep cell would."""
    spec = model.DisorderSpec(
        std_dev=args.disorder,
        master_seed=ensemble.cell_seed(args.seed, args.disorder, args.dephasing))
    energies = model.sample_site_energies(spec, args.realization, top.n_sites)
    return model.TransportModel(
        topology=top, site_energies=tuple(energies), trap_site=trap,
        trap_rate=args.kappa, recomb_rate=args.gamma_recomb,
        dephasing_rate=args.dephasing)


def _cmd_single(args, parser) -> int:
    top = _build_topology(args, parser)
    trap = _resolve_trap(args, top, parser)
    _check_rates(args, parser)
    kind, site = _resolve_init(args, top, parser)
    mdl = _sampled_model(top, trap, args)
    rho0 = model.initial_state(top, kind, site)
    res = dynamics.compute_efficiency(
        rho0, mdl, solver=args.solver,
        **({"trace_tol": args.trace_tol} if args.solver == "timestepping" else {}))
    print(f"eta = {_fmt(res.eta)}")
    print(f"eta_loss = {_fmt(res.eta_loss)}")
    print(f"residual_trace = {_fmt(res.residual_trace)}")
    print(f"method = {res.method}")
    print(f"horizon = {_fmt(res.horizon)}")
    if args.output:
        with _open_out(args.output) as fh:
            fh.write(SINGLE_CSV_HEADER + "\n")
            fh.write(",".join([
                _fmt(args.disorder), _fmt(args.dephasing), _fmt(args.kappa),
                _fmt(args.gamma_recomb), _fmt(res.eta), _fmt(res.eta_loss),
                _fmt(res.residual_trace), res.method, _fmt(res.horizon)]) + "\n")
    return 0


def _cmd_sweep(args, parser) -> int:
    cfg = ensemble.load_sweep_config(args.config) if args.config else {}

    def pick(flag_value, key, cast, fallback):
        if flag_value is not None:
            return flag_value
        if key in cfg:
            return cast(cfg[key])
        return fallback

    args.graph = pick(args.graph, "graph", str, None)
    if args.graph is None:
        parser.error("sweep needs --graph (flag or config)")
    args.generations = pick(args.generations, "generations", int, None)
    args.dimension = pick(args.dimension, "dimension", int, None)
    args.edge_file = pick(args.edge_file, "edge_file", str, None)
    top = _build_topology(args, parser)

    args.trap = pick(args.trap, "trap", str, "root" if top.kind == graph.BINARY_TREE else "0")
    trap = _resolve_trap(args, top, parser)
    args.init = pick(args.init, "init", str, None)
    args.init_site = pick(args.init_site, "init_site", int, None)
    kind, site = _resolve_init(args, top, parser)
    args.kappa = pick(args.kappa, "kappa", float, 1.0)
    args.gamma_recomb = pick(args.gamma_recomb, "gamma_recomb", float, 0.01)
    args.seed = pick(args.seed, "seed", int, ensemble.DEFAULT_MASTER_SEED)
    _check_rates(args, parser)

    disorder = pick(args.disorder_grid, "disorder_values", str, None)
    dephasing = pick(args.dephasing_grid, "dephasing_values", str, None)
    disorder_values = (ensemble.parse_grid_values(disorder) if disorder
                       else ensemble.default_disorder_grid())
    if dephasing:
        dephasing_values = ensemble.parse_grid_values(dephasing)
    elif args.log_dephasing:
        dephasing_values = ensemble.log_dephasing_grid()
    else:
        dephasing_values = ensemble.default_dephasing_grid()
    n_real = pick(args.realizations, "n_realizations", int, 100)
    solver = pick(args.solver, "solver", str, "liouvillian")
    workers = pick(args.workers, "workers", int, 1)

    grid = ensemble.SweepGrid(
        topology=top, disorder_values=disorder_values,
        dephasing_values=dephasing_values, n_realizations=n_real,
        initial_kind=kind, initial_site=site, trap_site=trap,
        trap_rate=args.kappa, recomb_rate=args.gamma_recomb,
        master_seed=args.seed)
    table = ensemble.run_sweep(grid, n_workers=workers, solver=solver)
    with _open_out(args.output) as fh:
        table.to_csv(fh)
    if table.failures:
        print(f"{len(table.failures)} job(s) failed:", file=sys.stderr)
        for line in table.failures:
            print(f"  {line}", file=sys.stderr)
        return 1
    return 0


def _cmd_bound(args, parser) -> int:
    top = _build_topology(args, parser)
    trap = _resolve_trap(args, top, parser)
    _check_rates(args, parser)
    kind, site = _resolve_init(args, top, parser)
    spec = model.DisorderSpec(
        std_dev=args.disorder,
        master_seed=ensemble.cell_seed(args.seed, args.disorder, 0.0))
    energies = model.sample_site_energies(spec, args.realization, top.n_sites)
    h = model.assemble_system_hamiltonian(top, energies)
    sub = analysis.invariant_subspace(h, trap)
    rho0 = model.initial_state(top, kind, site)
    bound = analysis.efficiency_upper_bound(sub, rho0)
    print(f"dimension = {sub.dimension}")
    print(f"bound = {_fmt(bound)}")
    with _open_out(args.output) as fh:
        fh.write(CLUSTER_CSV_HEADER + "\n")
        for k, (energy, mult, overlap) in enumerate(sub.clusters):
            fh.write(f"{k},{_fmt(energy)},{mult},{_fmt(overlap)}\n")
    return 0


def _trajectory_observables(top, trap, args, kind, site, times):
    """Trap observables, ensemble-averaged when realizations > 1."""
    nbrs = graph.neighbors(top, trap)[:2]
    pop = np.zeros(len(times))
    im1 = np.zeros(len(times))
    im2 = np.zeros(len(times))
    trace = np.zeros(len(times))
    n_real = args.realizations
    for r in range(n_real):
        run_args = argparse.Namespace(**vars(args))
        # ensemble averages run draws 0..n-1; a single run honors --realization
        run_args.realization = r if n_real > 1 else args.realization
        mdl = _sampled_model(top, trap, run_args)
        rho0 = model.initial_state(top, kind, site)
        traj = dynamics.propagate(rho0, mdl, times[-1], times=times)
        obs = dynamics.record_trap_observables(traj, trap, nbrs)
        pop += obs.population
        if len(nbrs) > 0:
            im1 += obs.coherence_im[0]
        if len(nbrs) > 1:
            im2 += obs.coherence_im[1]
        trace += np.einsum("tii->t", traj.states).real
    return pop / n_real, im1 / n_real, im2 / n_real, trace / n_real


def _dump_full_state(path, traj) -> None:
    states = traj.states
    if traj.is_pure:
        names = [f"psi_{i}" for i in range(states.shape[1])]
        flat = states
    else:
        n = states.shape[1]
        names = [f"rho_{i}_{j}" for i in range(n) for j in range(n)]
        flat = states.reshape(states.shape[0], n * n)
    with _open_out(path) as fh:
        fh.write("t," + ",".join(f"{c}_re,{c}_im" for c in names) + "\n")
        for k, t in enumerate(traj.times):
            cells = [f"{_fmt(z.real)},{_fmt(z.imag)}" for z in flat[k]]
            fh.write(f"{_fmt(t)}," + ",".join(cells) + "\n")


def _cmd_trajectory(args, parser) -> int:
    top = _build_topology(args, parser)
    trap = _resolve_trap(args, top, parser)
    _check_rates(args, parser)
    kind, site = _resolve_init(args, top, parser)
    if args.t_final <= 0:
        parser.error("--t-final must be > 0")
    if args.points < 2:
        parser.error("--points must be >= 2")
    if args.realizations < 1:
        parser.error("--realizations must be >= 1")
    if args.full_state and args.realizations != 1:
        parser.error("--full-state requires --realizations 1")
    times = np.linspace(0.0, args.t_final, args.points)
    if args.pure:
        if args.dephasing != 0.0:
            parser.error("--pure requires --dephasing 0 "
                         "(pure states do not close under dephasing)")
        if args.realizations != 1:
            parser.error("--pure does not support ensemble averaging")
        if kind != model.SINGLE_SITE:
            parser.error("--pure requires --init site")
        mdl = _sampled_model(top, trap, args)
        psi0 = np.zeros(top.n_sites, dtype=complex)
        psi0[site] = 1.0
        traj = dynamics.propagate_pure(psi0, mdl, args.t_final, times=times)
        nbrs = graph.neighbors(top, trap)[:2]
        with _open_out(args.output) as fh:
            fh.write(PURE_CSV_HEADER + "\n")
            for k, t in enumerate(traj.times):
                psi = traj.states[k]
                a1 = psi[nbrs[0]].imag if len(nbrs) > 0 else 0.0
                a2 = psi[nbrs[1]].imag if len(nbrs) > 1 else 0.0
                fh.write(f"{_fmt(t)},{_fmt(psi[trap].real)},{_fmt(a1)},"
                         f"{_fmt(a2)},{_fmt(np.linalg.norm(psi) ** 2)}\n")
        if args.full_state:
            _dump_full_state(args.full_state, traj)
        return 0
    if args.full_state:
        mdl = _sampled_model(top, trap, args)
        rho0 = model.initial_state(top, kind, site)
        traj = dynamics.propagate(rho0, mdl, times[-1], times=times)
        _dump_full_state(args.full_state, traj)
    pop, im1, im2, trace = _trajectory_observables(top, trap, args, kind, site, times)
    with _open_out(args.output) as fh:
        fh.write(TRAJECTORY_CSV_HEADER + "\n")
        for k, t in enumerate(times):
            fh.write(f"{_fmt(t)},{_fmt(pop[k])},{_fmt(im1[k])},"
                     f"{_fmt(im2[k])},{_fmt(trace[k])}\n")
    return 0


def _cmd_delta_max(args, parser) -> int:
    with open(args.input, encoding="utf-8") as fh:
        table = ensemble.SweepTable.from_csv(fh)
    gammas = table.dephasing_values()
    with _open_out(args.output) as fh:
        fh.write(DELTA_MAX_CSV_HEADER + "\n")
        for g in gammas:
            gain = analysis.max_disorder_gain(table, g)
            fh.write(f"{_fmt(g)},{_fmt(gain.gain)},{_fmt(gain.best_disorder)},"
                     f"{_fmt(gain.stderr)}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enaqt",
        description="Energy-transport efficiency of a single excitation on "
                    "tight-binding networks with dephasing, uniform loss and "
                    "a trap. All rates and times are in units of the "
                    "nearest-neighbour coupling V (hbar = 1).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("single", help="one efficiency evaluation")
    _add_graph_args(p)
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--solver", choices=["liouvillian", "timestepping"],
                   default="liouvillian")
    p.add_argument("--trace-tol", type=float, default=dynamics.DEFAULT_TRACE_TOL,
                   help="time-stepping truncation threshold on the trace")
    p.add_argument("--output", help="also write a CSV row ('-' for stdout)")

    p = sub.add_parser("sweep", help="(disorder x dephasing) ensemble sweep")
    p.add_argument("--config", help="key = value file; flags override it")
    _add_graph_args(p, required=False)
    _add_model_args(p, defaults=False)
    p.add_argument("--disorder-grid", help="grid spec: a:b:step or comma list")
    p.add_argument("--dephasing-grid",
                   help="grid spec: a:b:step, log:a:b:count, or comma list")
    p.add_argument("--log-dephasing", action="store_true",
                   help="use the log-spaced dephasing grid 1e-2..1e2 (25 points)")
    p.add_argument("--realizations", type=int, default=None,
                   help="disorder realizations per cell (default 100)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--solver", choices=["liouvillian", "timestepping"], default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel worker processes (default 1)")
    p.add_argument("--output", default="-", help="sweep CSV path (default stdout)")

    p = sub.add_parser("bound", help="invariant-subspace efficiency bound")
    _add_graph_args(p)
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--output", default="-",
                   help="cluster-structure CSV (default stdout)")

    p = sub.add_parser("trajectory", help="time series of trap observables")
    _add_graph_args(p)
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--t-final", type=float, default=50.0,
                   help="time window in 1/V units (default 50)")
    p.add_argument("--points", type=int, default=2000,
                   help="uniform output points (default 2000)")
    p.add_argument("--pure", action="store_true",
                   help="propagate amplitudes of a pure state instead of the "
                        "density matrix (needs --init site and --dephasing 0)")
    p.add_argument("--realizations", type=int, default=1,
                   help="average observables over this many disorder draws")
    p.add_argument("--output", default="-", help="trajectory CSV (default stdout)")
    p.add_argument("--full-state",
                   help="also dump every state component to this CSV "
                        "(single realization only)")

    p = sub.add_parser("delta-max",
                       help="disorder gain per dephasing rate from a sweep CSV")
    p.add_argument("--input", required=True, help="sweep CSV produced by 'sweep'")
    p.add_argument("--output", default="-", help="output CSV (default stdout)")

    return parser


_COMMANDS = {
    "single": _cmd_single,
    "sweep": _cmd_sweep,
    "bound": _cmd_bound,
    "trajectory": _cmd_trajectory,
    "delta-max": _cmd_delta_max,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except (ValueError, KeyError, OSError, dynamics.SolverError,
            dynamics.IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

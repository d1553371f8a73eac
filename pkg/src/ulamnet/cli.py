"""Command-line front end: ``ulamnet {build,links,pagerank,spectrum,gapstudy,scan}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .analysis import (Budget, InsufficientPointsError, fit_degree_distribution, fit_pagerank,
                       gap_scaling_study, scan_par, stationary_rank, theoretical_exponents)
from .config import PRESETS, ExperimentConfig, preset_config
from .google import DenseCapError, GoogleOperator
from .maps import MapSpec
from .pagerank import pagerank_power, pagerank_trajectory
from .spectrum import (ConvergenceError, binned_par_growth, count_fast_states, dos_histogram,
                       fraction_inside, full_spectrum, leading_eigenvalues)
from .ulam import ResourceError, build_monte_carlo, degree_histogram

log = logging.getLogger("ulamnet")

EXIT_OK, EXIT_VALIDATION, EXIT_NONCONVERGED = 0, 2, 3
SIGN_NOTE = "exponents are positive for decays: y ~ x**(-exponent)"
TRAJECTORY_ABOVE_N = 20_000


class NotConverged(Exception):
    pass


def _comments(cfg: ExperimentConfig):
    return [f"config_sha256={cfg.config_hash()}", SIGN_NOTE]


def _tag(value) -> str:
    return format(float(value), "g")


def _network(cfg: ExperimentConfig, spec: MapSpec, n: int):
    if cfg.network:
        net = io.read_network(cfg.network)
        if net.n_cells != n:
            raise ValueError(f"network file has N={net.n_cells}, config asks for N={n}")
        return net
    return build_monte_carlo(spec, n, cfg.nc, cfg.seed)


def cmd_build(cfg: ExperimentConfig, out: Path) -> int:
    for n in cfg.n_values:
        t0 = time.perf_counter()
        net = build_monte_carlo(cfg.map, n, cfg.nc, cfg.seed)
        io.write_network(out / f"network_n{n}.ulam", net)
        io.write_json(out / f"network_n{n}.json", {
            "config_sha256": cfg.config_hash(), "map": cfg.map.to_dict(), "n": n,
            "nc": cfg.nc, "seed": cfg.seed, "nnz": net.nnz, "method": net.build_meta.method,
        })
        _timing(out, f"build_n{n}", time.perf_counter() - t0)
    return EXIT_OK


def cmd_links(cfg: ExperimentConfig, out: Path) -> int:
    comments = _comments(cfg)
    for n in cfg.n_values:
        net = _network(cfg, cfg.map, n)
        record = {"config_sha256": cfg.config_hash(), "sign_convention": SIGN_NOTE,
                  "theory": theoretical_exponents(cfg.map)}
        for direction in ("in", "out"):
            hist = degree_histogram(net, direction)
            io.write_histogram(out / f"links_{direction}_n{n}.csv", hist, comments)
            try:
                record[f"fit_{direction}"] = io.fit_record(fit_degree_distribution(hist))
            except InsufficientPointsError as exc:
                record[f"fit_{direction}"] = {"error": str(exc)}
        io.write_json(out / f"links_fit_n{n}.json", record)
    return EXIT_OK


def _rank(cfg: ExperimentConfig, spec: MapSpec, n: int, alpha: float, nets: dict):
    method = cfg.method
    if method == "auto":
        if alpha < 1.0:
            method = "power"
        else:
            method = "eigen" if n <= TRAJECTORY_ABOVE_N or cfg.network else "trajectory"
    if method == "trajectory":
        if alpha != 1.0:
            raise ValueError("trajectory PageRank is only defined at alpha = 1")
        return pagerank_trajectory(spec, n, cfg.t_iters, cfg.n_traj, cfg.burn_in, cfg.seed)
    key = (spec, n)
    if key not in nets:
        nets.clear()
        nets[key] = _network(cfg, spec, n)
    net = nets[key]
    if method == "power":
        return pagerank_power(GoogleOperator(net, alpha), cfg.tol, cfg.max_iter)
    if method == "eigen":
        return stationary_rank(net, alpha, Budget(cfg.nc, cfg.seed, cfg.tol, cfg.max_iter))
    raise ValueError(f"unknown PageRank method {cfg.method!r}")


def cmd_pagerank(cfg: ExperimentConfig, out: Path) -> int:
    comments = _comments(cfg)
    z1s = cfg.z1_values or [cfg.map.z1]
    nets = {}
    summary = []
    all_converged = True
    for z1 in z1s:
        spec = replace(cfg.map, z1=float(z1))
        for n in cfg.n_values:
            for alpha in cfg.alpha_values:
                t0 = time.perf_counter()
                rank = _rank(cfg, spec, n, float(alpha), nets)
                tag = f"z{_tag(z1)}_n{n}_a{_tag(alpha)}"
                io.write_rank(out / f"rank_{tag}.csv", rank, comments)
                try:
                    fit = io.fit_record(fit_pagerank(rank.probs))
                    beta = fit["exponent"]
                except InsufficientPointsError as exc:
                    fit, beta = {"error": str(exc)}, float("nan")
                meta = {k: v for k, v in rank.meta.items() if k != "residual_history"}
                io.write_json(out / f"rank_{tag}.json", {
                    "config_sha256": cfg.config_hash(), "map": spec.to_dict(), "n": n,
                    "alpha": alpha, "par": rank.par, "fit": fit, "meta": meta,
                })
                all_converged &= rank.converged
                summary.append((float(z1), n, float(alpha), meta.get("method", ""), rank.par,
                                beta, int(rank.converged)))
                _timing(out, f"pagerank_{tag}", time.perf_counter() - t0)
    io.write_csv(out / "summary.csv", ["z1", "n", "alpha", "method", "par", "beta", "converged"],
                 summary, comments)
    if len(z1s) >= 2:
        z = np.array([r[0] for r in summary])
        b = np.array([r[5] for r in summary])
        ok = np.isfinite(b)
        slope, icpt = np.polyfit(z[ok], b[ok], 1)
        io.write_json(out / "beta_vs_z1.json", {"config_sha256": cfg.config_hash(),
                                                "slope": slope, "intercept": icpt})
    if not all_converged:
        raise NotConverged("power iteration hit max_iter before reaching tol")
    return EXIT_OK


def cmd_spectrum(cfg: ExperimentConfig, out: Path) -> int:
    comments = _comments(cfg)
    for n in cfg.n_values:
        for alpha in cfg.alpha_values:
            t0 = time.perf_counter()
            op = GoogleOperator(_network(cfg, cfg.map, n), float(alpha))
            if cfg.k:
                eigs = leading_eigenvalues(op, cfg.k, tol=max(cfg.tol, 1e-10),
                                           want_vectors=cfg.vectors)
            else:
                if n > cfg.dense_cap:
                    raise DenseCapError(f"N={n} exceeds dense cap {cfg.dense_cap}; "
                                        "use --k for the leading eigenvalues")
                eigs = full_spectrum(op, cfg.vectors, cfg.dense_cap)
            tag = f"n{n}_a{_tag(alpha)}"
            io.write_spectrum(out / f"spectrum_{tag}.csv", eigs, comments)
            dos = dos_histogram(eigs, cfg.bins, cfg.gamma_max)
            io.write_dos(out / f"dos_{tag}.csv", dos, comments)
            summary = {
                "config_sha256": cfg.config_hash(), "n": n, "alpha": alpha,
                "method": eigs.method.value, "n_eigenvalues": len(eigs),
                "gap": float(1.0 - abs(eigs.eigenvalues[1])) if len(eigs) > 1 else None,
                "dos_mode": dos.mode, "n_null": dos.n_null,
                "n_gamma_above_5": count_fast_states(eigs, 5.0),
                "fraction_below_exp_minus_10": fraction_inside(eigs, np.exp(-10.0)),
            }
            if eigs.converged is not None:
                summary["converged"] = eigs.converged.tolist()
            if eigs.pars is not None and not cfg.k:
                try:
                    fit = binned_par_growth(eigs)
                    summary["par_growth_slope"] = -fit.exponent
                except InsufficientPointsError as exc:
                    summary["par_growth_slope"] = None
                    log.warning("PAR growth fit skipped: %s", exc)
            if cfg.k and eigs.eigenvectors is not None:
                cols = ["cell"] + [f"abs_psi_{m + 1}" for m in range(len(eigs))]
                mags = np.abs(eigs.eigenvectors)
                io.write_csv(out / f"eigenvectors_{tag}.csv", cols,
                             ([i] + mags[i].tolist() for i in range(n)), comments)
                summary["pars"] = eigs.pars.tolist()
            io.write_json(out / f"spectrum_{tag}.json", summary)
            _timing(out, f"spectrum_{tag}", time.perf_counter() - t0)
            if eigs.converged is not None and not eigs.converged.all():
                raise NotConverged("Arnoldi left Ritz pairs unconverged")
    return EXIT_OK


def cmd_gapstudy(cfg: ExperimentConfig, out: Path) -> int:
    study = gap_scaling_study(cfg.map, cfg.n_values, cfg.nc, cfg.seed)
    rows = [(int(n), g, g * n) for n, g in zip(study.n_values, study.gaps)]
    io.write_csv(out / "gap.csv", ["n", "gap", "gap_times_n"], rows, _comments(cfg))
    rec = {"config_sha256": cfg.config_hash(), "sign_convention": SIGN_NOTE}
    if study.fit is not None:
        rec.update(io.fit_record(study.fit), slope=study.slope)
    io.write_json(out / "gap_fit.json", rec)
    return EXIT_OK


def cmd_scan(cfg: ExperimentConfig, out: Path) -> int:
    a_values = cfg.a_values or [cfg.map.a]
    budget = Budget(cfg.nc, cfg.seed, cfg.tol, cfg.max_iter)
    grid = scan_par(cfg.map, a_values, cfg.alpha_values, cfg.n_values[0], budget)
    io.write_scan(out / "scan.csv", grid, _comments(cfg))
    for (a, al), msg in sorted(grid.errors.items()):
        log.warning("scan point a=%g alpha=%g failed: %s", a, al, msg)
    io.write_json(out / "scan.json", {
        "config_sha256": cfg.config_hash(), "n": cfg.n_values[0],
        "failures": [{"a": a, "alpha": al, "error": m} for (a, al), m in sorted(grid.errors.items())],
    })
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "links": cmd_links,
    "pagerank": cmd_pagerank,
    "spectrum": cmd_spectrum,
    "gapstudy": cmd_gapstudy,
    "scan": cmd_scan,
}


def _timing(out: Path, key: str, seconds: float) -> None:
    # wall times live apart from the reproducible outputs
    path = out / "timing.json"
    data = json.loads(path.read_text()) if path.exists() else {}
    data[key] = seconds
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ulamnet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--preset", choices=sorted(PRESETS))
        s.add_argument("--paper-scale", action="store_true",
                       help="use the preset's full-size parameters")
        s.add_argument("--config", help="JSON config file (flags override it)")
        s.add_argument("--map", choices=["f1", "f2"])
        s.add_argument("--z1", type=float, nargs="+")
        s.add_argument("--z2", type=float)
        s.add_argument("--a", type=float, nargs="+")
        s.add_argument("--n", type=int, nargs="+")
        s.add_argument("--nc", type=int)
        s.add_argument("--alpha", type=float, nargs="+")
        s.add_argument("--seed", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--max-iter", type=int)
        s.add_argument("--dense-cap", type=int)
        s.add_argument("--method", choices=["auto", "power", "eigen", "trajectory"])
        s.add_argument("--k", type=int, help="leading eigenvalues only (Arnoldi)")
        s.add_argument("--vectors", action="store_true", default=None)
        s.add_argument("--bins", type=int)
        s.add_argument("--gamma-max", type=float)
        s.add_argument("--t-iters", type=int)
        s.add_argument("--n-traj", type=int)
        s.add_argument("--burn-in", type=int)
        s.add_argument("--network", help="read the network from a ULAM v1 file")
        s.add_argument("--threads", type=int, help="worker threads for parallel kernels")
        s.add_argument("--out", default=None)
    return p


def config_from_args(args) -> ExperimentConfig:
    if args.preset:
        base = preset_config(args.preset, args.paper_scale).to_dict()
        if base["command"] != args.command:
            raise ValueError(f"preset {args.preset} belongs to '{base['command']}'")
    elif args.config:
        base = json.loads(Path(args.config).read_text())
    else:
        base = {}
    base["command"] = args.command
    spec = dict(base.get("map", MapSpec().to_dict()))
    if args.command == "scan" and "map" not in base and not args.map:
        spec["model"] = "f2"
    if args.map:
        spec["model"] = args.map
    if args.z2 is not None:
        spec["z2"] = args.z2
    if args.z1:
        spec["z1"] = args.z1[0]
        base["z1_values"] = args.z1 if len(args.z1) > 1 else None
    if args.a:
        spec["a"] = args.a[0]
        if args.command == "scan" or len(args.a) > 1:
            base["a_values"] = args.a
    base["map"] = spec
    simple = {"n": "n_values", "alpha": "alpha_values", "nc": "nc", "seed": "seed",
              "tol": "tol", "max_iter": "max_iter", "dense_cap": "dense_cap",
              "method": "method", "k": "k", "vectors": "vectors", "bins": "bins",
              "gamma_max": "gamma_max", "t_iters": "t_iters", "n_traj": "n_traj",
              "burn_in": "burn_in", "network": "network", "out": "output_dir"}
    for arg, key in simple.items():
        val = getattr(args, arg)
        if val is not None:
            base[key] = val
    return ExperimentConfig.from_dict(base)


def _set_threads(n: int) -> None:
    import numba
    from threadpoolctl import threadpool_limits

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    threadpool_limits(limits=n)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"ulamnet: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.threads:
        _set_threads(args.threads)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(
        json.dumps(dict(cfg.to_dict(), config_sha256=cfg.config_hash()), sort_keys=True, indent=2) + "\n")
    try:
        return COMMANDS[cfg.command](cfg, out)
    except (ValueError, DenseCapError, ResourceError) as exc:
        print(f"ulamnet: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NotConverged, ConvergenceError) as exc:
        print(f"ulamnet: not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())

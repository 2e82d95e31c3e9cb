"""Command-line front end: channel drops, single solves, sweeps, flop and
protocol reports, and the SISO brute-force oracle."""

import argparse
import json
import sys

from . import channel, harness, outer, parsim
from .inner import InnerOptions
from .model import SystemConfig


def _load_json(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def system_from_dict(d):
    """Build a SystemConfig from a JSON dict; dBm fields are converted here."""
    K = d.get("K", 3)
    M = d.get("M", 4)
    N = d.get("N", 1)
    M = [M] * K if isinstance(M, int) else list(M)
    N = [N] * K if isinstance(N, int) else list(N)
    if "P" in d:
        P = d["P"] if isinstance(d["P"], list) else [d["P"]] * K
    else:
        P = [harness.dbm_to_w(d.get("P_dbm", 46.0))] * K
    Pc = d["Pc"] if "Pc" in d else harness.dbm_to_w(d.get("Pc_dbm", 30.0))
    P0 = d["P0"] if "P0" in d else harness.dbm_to_w(d.get("P0_dbm", 40.0))
    if "sigma2" in d:
        sigma2 = d["sigma2"]
    elif "sigma2_dbm" in d:
        sigma2 = harness.dbm_to_w(d["sigma2_dbm"])
    else:
        sigma2 = channel.noise_power_w(d.get("bandwidth_hz", 10e6),
                                       d.get("noise_figure_db", 9.0))
    return SystemConfig(K=K, M=M, N=N, P=P, Pc=Pc, P0=P0,
                        xi=d.get("xi", 1.0), alpha=d.get("alpha", 1.0),
                        sigma2=sigma2, delta=d.get("delta", 1e-3),
                        epsilon=d.get("epsilon", 1e-5))


def geometry_from_dict(d):
    known = {k: d[k] for k in ("cell_radius_m", "min_user_distance_m",
                               "pathloss_a", "pathloss_b", "shadow_std_db",
                               "layout") if k in d}
    return channel.GeometryConfig(**known)


def _setup(args):
    raw = _load_json(args.config)
    cfg = system_from_dict(raw.get("system", {}))
    geom = geometry_from_dict(raw.get("geometry", {}))
    return raw, cfg, geom


def _channels(cfg, geom, seed):
    drop = channel.drop_users(geom, cfg, seed)
    return channel.generate_channels(geom, cfg, drop, seed)


def cmd_drop(args):
    _, cfg, geom = _setup(args)
    H = _channels(cfg, geom, args.seed)
    channel.save_channels(args.out, geom, cfg, H)
    print(f"wrote channels for seed {args.seed} to {args.out}")


def cmd_solve(args):
    _, cfg, geom = _setup(args)
    H = _channels(cfg, geom, args.seed)
    opts = outer.OuterOptions(
        epsilon=cfg.epsilon,
        inner=InnerOptions(delta=cfg.delta, restarts=args.restarts,
                           restart_seed=args.seed))
    report = outer.outer_solve(cfg, H, opts)
    print(json.dumps(report.to_dict(), indent=2))


def cmd_sweep(args):
    raw, cfg, geom = _setup(args)
    spec = harness.ExperimentSpec(
        name=raw.get("name", "sweep"),
        sweep_variable=raw.get("sweep_variable", "bs_power_dbm"),
        sweep_values=raw.get("sweep_values", [26, 30, 34, 38, 42, 46]),
        trials=args.trials if args.trials is not None else raw.get("trials", 100),
        cfg=cfg, geom=geom,
        algorithms=raw.get("algorithms", ["proposed", "wmmse"]),
        seed=args.seed if args.seed is not None else raw.get("seed", 0),
        restarts=args.restarts)
    rows = harness.run_experiment(spec, deterministic=args.deterministic)
    harness.write_results(args.out, spec, rows)
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_flops(args):
    _, cfg, _ = _setup(args)
    est = harness.estimate_flops(cfg)
    print(json.dumps(est.to_dict(), indent=2))


def cmd_parsim(args):
    _, cfg, geom = _setup(args)
    H = _channels(cfg, geom, args.seed)
    report, trace = parsim.run_parallel(cfg, H)
    if args.out:
        parsim.save_trace(args.out, trace)
    summary = {"eta_star": report.eta_star, "ee_nats_per_joule": report.ee,
               "kappa1": trace.kappa1, "kappa2": trace.kappa2,
               "total_reals": trace.total_reals,
               "closed_form_reals": trace.expected_reals()}
    print(json.dumps(summary, indent=2))


def cmd_oracle(args):
    _, cfg, geom = _setup(args)
    H = _channels(cfg, geom, args.seed)
    eta, p = harness.siso_grid_oracle(cfg, H)
    print(json.dumps({"eta_star": eta, "p_star": p}, indent=2))


def build_parser():
    ap = argparse.ArgumentParser(
        prog="eebeam",
        description="Energy-efficient coordinated multicell beamforming simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", help="JSON config file", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--restarts", type=int, default=1)

    p = sub.add_parser("drop", help="generate and save a channel realization")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_drop)

    p = sub.add_parser("solve", help="solve one instance, print the report")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run an experiment spec, write CSV")
    common(p)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--deterministic", action="store_true", default=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("flops", help="print the flop estimate")
    common(p)
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("parsim", help="run the coordination-protocol simulation")
    common(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_parsim)

    p = sub.add_parser("oracle", help="SISO brute-force grid oracle")
    common(p)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

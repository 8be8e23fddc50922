"""``invopt`` command-line interface.

Exit codes: 0 when the result is optimal, 2 when the instance is
infeasible at the model level, 1 on usage or input errors.  ``result.json``
is written on exit 0 and 2.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import config as _config
from .errors import (
    BigMViolation,
    DecompositionInfeasible,
    ForwardUnbounded,
    InfeasiblePaths,
    InverseInfeasible,
    InvOptError,
    ObservationInfeasible,
    SolverError,
)
from .model import io

RESULT_KEYS = ("method", "status", "theta", "objective", "per_obs_loss", "diagnostics", "versions")
MODEL_LEVEL = (InverseInfeasible, ObservationInfeasible, SolverError, BigMViolation, InfeasiblePaths,
               DecompositionInfeasible)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# -- serialization -------------------------------------------------------------------------
def _clean(v):
    """JSON-ready value with floats rounded to 12 significant digits."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items() if k != "runtime"}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        x = float(f"{x:.12g}")
        return 0.0 if x == 0 else x
    if v is None or isinstance(v, str):
        return v
    return str(v)


def write_result(out_dir, method, status, theta=None, objective=None, per_obs_loss=(), diagnostics=None):
    doc = {
        "method": method,
        "status": status,
        "theta": theta,
        "objective": objective,
        "per_obs_loss": list(np.asarray(per_obs_loss, dtype=float).ravel()) if per_obs_loss is not None else [],
        "diagnostics": diagnostics or {},
        "versions": {"invopt": __version__, "numpy": np.__version__},
    }
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "result.json")
    with open(path, "w") as fh:
        json.dump(_clean(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _from_estimate(out_dir, method, res):
    diag = dict(res.diagnostics)
    if res.extras:
        diag["extras"] = res.extras
    write_result(out_dir, method, res.status, res.theta_star, res.objective_value, res.per_obs_loss, diag)
    return 0 if res.ok else 2


def _vector(text):
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from exc


# -- commands ------------------------------------------------------------------------------------
def cmd_solve_forward(args, cfg):
    from .solve import solve_forward

    model = io.load("model", args.model)
    theta = _vector(args.theta) if args.theta else None
    rep = solve_forward(model, theta=theta, config=cfg, check=False)
    diag = {"primal": rep.primal, "dual": rep.dual, "residuals": rep.residuals}
    status = rep.status
    write_result(args.out, "solve-forward", status, theta, rep.objective if rep.ok else None, [], diag)
    return 0 if rep.ok else 2


def _x_hat(args):
    if args.x is not None:
        return _vector(args.x)
    if args.observation:
        doc = io.read_json(args.observation)
        return np.asarray(doc["x"] if isinstance(doc, dict) else doc, dtype=float)
    raise UsageError("an observation is required (--x or --observation)")


def cmd_classical(args, cfg):
    from . import classical as cl

    method = args.method
    if method == "mdp":
        if not args.mdp or args.policy is None:
            raise UsageError("--method mdp needs --mdp and --policy")
        mdp = io.load("mdp", args.mdp)
        space = io.load("theta_space", args.theta_space) if args.theta_space else None
        policy = [int(v) for v in args.policy.split(",")]
        return _from_estimate(args.out, method, cl.estimate_mdp_rewards(mdp, policy, space, config=cfg))
    if not args.model:
        raise UsageError(f"--method {method} needs --model")
    model = io.load("model", args.model)
    space = io.load("theta_space", args.theta_space) if args.theta_space else None

    def need_space():
        if space is None:
            raise UsageError(f"--method {method} needs --theta-space")
        return space

    if method == "lp-obj":
        res = cl.estimate_lp_objective(model, _x_hat(args), need_space(), args.mode, cfg)
    elif method == "lp-joint":
        res = cl.estimate_lp_joint(model, _x_hat(args), need_space(), args.big_m, cfg)
    elif method == "con-matrix":
        res = cl.estimate_constraint_matrix(model, _x_hat(args), None, args.p, cfg)
    elif method == "con-feas":
        res = cl.estimate_constraints_feasibility(model.A, model.b, _x_hat(args), space, args.p, args.adjustable, cfg)
    elif method == "milp-cut":
        res = cl.estimate_milp_cutting_plane(model, _x_hat(args), need_space(), config=cfg)
    elif method == "opt-value":
        if args.z_hat is None:
            raise UsageError("--method opt-value needs --z-hat")
        res = cl.estimate_inverse_optimal_value(model, args.z_hat, need_space(), cfg)
    elif method == "partial":
        if not args.fixed:
            raise UsageError("--method partial needs --fixed i=v[,i=v...]")
        fixed = {}
        for item in args.fixed.split(","):
            i, _, v = item.partition("=")
            fixed[int(i)] = float(v)
        res = cl.estimate_partial_lp(model, fixed, need_space(), args.big_m, cfg)
    elif method == "kkt":
        res = cl.estimate_convex_objective_kkt(model, _x_hat(args), need_space(), cfg)
    else:
        raise UsageError(f"unknown method {method!r}")
    return _from_estimate(args.out, method, res)


def _write_losses(out_dir, losses):
    from .apps.report import write_series

    losses = np.asarray(losses, dtype=float).ravel()
    write_series(os.path.join(out_dir, "losses.csv"), {"observation": list(range(losses.size)), "loss": list(losses)})


def cmd_datadriven(args, cfg):
    from . import datadriven as dd

    ds = io.load("dataset", args.dataset)
    space = io.load("theta_space", args.theta_space)
    risk = dd.RiskSpec.parse(args.risk)
    loss = args.loss
    if risk.kind == "var":
        if loss != "distance":
            raise UsageError("quantile risk is available for the distance loss only")
        res = dd.estimate_var(ds, space, risk.level, p=args.p, epsilon=args.epsilon, delta=args.delta,
                              big_m=args.big_m, config=cfg)
    elif loss == "distance":
        res = dd.estimate_distance(ds, space, args.epsilon, args.delta, risk, cfg)
    else:
        fn = {"aso": dd.estimate_aso, "rso": dd.estimate_rso, "vi": dd.estimate_vi, "kkt": dd.estimate_kkt}[loss]
        kw = {"risk": risk, "config": cfg}
        if loss in ("aso", "vi", "kkt"):
            kw["allow_degenerate"] = args.allow_degenerate
        res = fn(ds, space, **kw)
    code = _from_estimate(args.out, f"datadriven-{loss}", res)
    _write_losses(args.out, res.per_obs_loss)
    return code


def cmd_online(args, cfg):
    from .apps.report import write_series
    from .online import run_stream

    stream = io.load("stream", args.stream)
    space = io.load("theta_space", args.theta_space)
    T = len(stream)
    marks = [T] if args.every is None else list(range(args.every, T + 1, args.every)) + [T]
    state, regret = run_stream(stream, space, args.rule, args.eta0, args.schedule, checkpoints=marks)
    cols = {"t": [r["t"] for r in state.history]}
    for k in range(space.dim):
        cols[f"theta_{k}"] = [r["theta"][k] for r in state.history]
    cols["loss"] = [r["loss"] for r in state.history]
    cols["avg_regret"] = [r.get("avg_regret", "") for r in state.history]
    os.makedirs(args.out, exist_ok=True)
    write_series(os.path.join(args.out, "trajectory.csv"), cols)
    diag = {"rounds": T, "eta0": state.eta0, "schedule": state.schedule,
            "average_regret": {str(k): v for k, v in regret.items()}, "cumulative_loss": state.cumulative_loss}
    write_result(args.out, f"online-{args.rule}", "Optimal", state.theta, regret[T],
                 [r["loss"] for r in state.history], diag)
    return 0


def cmd_bench(args, cfg):
    from .apps import report

    os.makedirs(args.out, exist_ok=True)
    if args.bench == "pathway":
        net = io.load("network", args.network)
        paths = io.paths_from_dict(io.read_json(args.paths), net)
        est, series = report.bench_pathway(net, paths["clinical"], paths["survived"], paths["died"], args.variant)
        report.write_series(os.path.join(args.out, "omega.csv"), series)
        diag = {k: v for k, v in est.items() if k != "theta"}
        write_result(args.out, "bench-pathway", "Optimal", est["theta"], est["stage1"], est["eps_clinical"], diag)
        return 0
    if args.bench == "traffic":
        inst, flows = io.load("traffic", args.instance)
        if args.degree is not None:
            inst = type(inst)(inst.n_nodes, inst.arcs, inst.free_flow, inst.capacity, inst.demands, args.degree)
        if not flows:
            raise UsageError("the traffic instance lists no observed flows")
        kappas = sorted({args.kappa, *(args.kappa * 10.0 ** -k for k in range(1, 5))}, reverse=True)
        thetas, series = report.bench_traffic(inst, flows, kappas)
        report.write_series(os.path.join(args.out, "kappa_path.csv"), series)
        diag = {"kappa": args.kappa, "flow_error": series["flow_error"][0]}
        write_result(args.out, "bench-traffic", "Optimal", thetas[0], None, [], diag)
        return 0
    from .apps.generators import generate_instance

    inst = generate_instance(args.kind, seed=int(_config.get(cfg, "seed")), size=args.size, noise=args.noise)
    doc = {"kind": inst.kind, "theta_true": inst.theta_true}
    if inst.kind in ("lp", "knapsack"):
        doc["dataset"] = io.dataset_to_dict(inst.observations)
    elif inst.kind == "path":
        # readable both as a network and as a paths file
        doc.update(io.network_to_dict(inst.model))
        doc["clinical"] = [list(x) for x in inst.observations]
    else:
        doc.update(io.traffic_to_dict(inst.model, inst.observations))
    with open(os.path.join(args.out, "instance.json"), "w") as fh:
        json.dump(_clean(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_oracle(args, cfg):
    from . import oracles

    model = io.load("model", args.model)
    if args.what == "vertices":
        out = {"vertices": oracles.enumerate_vertices(model.A, model.b, model.senses)}
    elif args.what == "optimal-set":
        theta = _vector(args.theta) if args.theta else None
        opt = oracles.brute_force_optimal_set(model, theta)
        out = {"points": opt.points, "value": opt.value}
    else:
        ok, gap = oracles.verify_inverse_feasible(model, _vector(args.theta), _x_hat(args))
        out = {"inverse_feasible": ok, "gap": gap}
    json.dump(_clean(out), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_validate(args, cfg):
    checked = []
    for kind in ("model", "theta_space", "dataset", "stream", "mdp", "network", "traffic"):
        path = getattr(args, kind)
        if path:
            io.load(kind, path)
            checked.append(kind)
    if not checked:
        raise UsageError("nothing to validate; pass at least one input file")
    print("ok: " + ", ".join(checked))
    return 0


# -- parser ------------------------------------------------------------------------------------------
def build_parser():
    p = _Parser(prog="invopt", description="Inverse optimization toolkit.")
    p.add_argument("--version", action="version", version=f"invopt {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed (generators)")
    common.add_argument("--tol", type=float, help="LP tolerance")
    common.add_argument("--threads", type=int, help="worker threads for enumerations")
    common.add_argument("--config", help="TOML configuration file (default: ./invopt.toml if present)")
    common.add_argument("--out", default=".", help="output directory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve-forward", parents=[common], help="solve a forward model")
    s.add_argument("--model", required=True)
    s.add_argument("--theta", help="comma-separated parameter overriding the model's own")
    s.set_defaults(func=cmd_solve_forward)

    s = sub.add_parser("classical", parents=[common], help="classical inverse optimization")
    s.add_argument("--method", required=True, choices=[
        "lp-obj", "lp-joint", "con-matrix", "con-feas", "milp-cut", "mdp", "opt-value", "partial", "kkt"])
    s.add_argument("--mode", default="SD", choices=["SD", "CS"], help="duality argument for lp-obj")
    s.add_argument("--model")
    s.add_argument("--mdp")
    s.add_argument("--theta-space")
    s.add_argument("--x", help="observed decision, comma-separated")
    s.add_argument("--observation", help="JSON file with the observed decision")
    s.add_argument("--z-hat", type=float)
    s.add_argument("--fixed", help="fixed components for the partial inverse, e.g. 0=1,2=0")
    s.add_argument("--policy", help="observed action per state, comma-separated")
    s.add_argument("--big-m", type=float)
    s.add_argument("--p", type=float, default=1, choices=[1, math.inf])
    s.add_argument("--adjustable", default="both", choices=["both", "rhs", "matrix"], help="con-feas only")
    s.set_defaults(func=cmd_classical)

    s = sub.add_parser("datadriven", parents=[common], help="loss-minimizing estimation")
    s.add_argument("--loss", required=True, choices=["aso", "rso", "distance", "vi", "kkt"])
    s.add_argument("--risk", default="expected", help="expected | cvar:A | var:X")
    s.add_argument("--dataset", required=True)
    s.add_argument("--theta-space", required=True)
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--big-m", type=float)
    s.add_argument("--p", type=float, default=1, choices=[1, math.inf])
    s.add_argument("--allow-degenerate", action="store_true")
    s.set_defaults(func=cmd_datadriven)

    s = sub.add_parser("online", parents=[common], help="online estimation over a stream")
    s.add_argument("--rule", required=True, choices=["mwu", "ogd", "implicit"])
    s.add_argument("--stream", required=True)
    s.add_argument("--theta-space", required=True)
    s.add_argument("--eta0", type=float)
    s.add_argument("--schedule", default="sqrt", choices=["sqrt", "constant"])
    s.add_argument("--every", type=int, help="compute the average regret every N rounds")
    s.set_defaults(func=cmd_online)

    s = sub.add_parser("bench", parents=[common], help="reference applications")
    bsub = s.add_subparsers(dest="bench", required=True, parser_class=_Parser)
    b = bsub.add_parser("pathway", parents=[common])
    b.add_argument("--network", required=True)
    b.add_argument("--paths", required=True)
    b.add_argument("--variant", default="l1", choices=["l1", "squared"])
    b = bsub.add_parser("traffic", parents=[common])
    b.add_argument("--instance", required=True)
    b.add_argument("--kappa", type=float, default=1e-6)
    b.add_argument("--degree", type=int)
    b = bsub.add_parser("generate", parents=[common])
    b.add_argument("--kind", required=True, choices=["lp", "knapsack", "path", "traffic"])
    b.add_argument("--size", type=int)
    b.add_argument("--noise", type=float, default=0.0)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("oracle", parents=[common], help=argparse.SUPPRESS)
    s.add_argument("what", choices=["vertices", "optimal-set", "verify"])
    s.add_argument("--model", required=True)
    s.add_argument("--theta")
    s.add_argument("--x")
    s.add_argument("--observation")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("validate", parents=[common], help="check input files")
    for kind in ("model", "theta-space", "dataset", "stream", "mdp", "network", "traffic"):
        s.add_argument(f"--{kind}")
    s.set_defaults(func=cmd_validate)
    return p


def _settings(args):
    path = args.config
    if path is None and os.path.exists("invopt.toml"):
        path = "invopt.toml"
    cfg = _config.load(path) if path else {}
    overrides = {"seed": args.seed, "lp.tol": args.tol, "threads": args.threads}
    return _config.resolve(cfg, **{k: v for k, v in overrides.items() if v is not None})


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _settings(args)
        return args.func(args, cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ForwardUnbounded, *MODEL_LEVEL) as exc:
        status = "Unbounded" if isinstance(exc, ForwardUnbounded) else type(exc).__name__
        out = getattr(args, "out", ".")
        diag = {"error": str(exc)}
        if isinstance(exc, BigMViolation):
            diag["big_m"] = exc.big_m
        write_result(out, getattr(args, "command", "unknown"), status, None, None, [], diag)
        print(f"{status}: {exc}", file=sys.stderr)
        return 2
    except (InvOptError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

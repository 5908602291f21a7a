"""Command-line front end.

Subcommands: constant, reconstruct, discretize, check, suite, gcn (and
``configs`` to list the bundled configs).  Flags override the matching
config fields.  Exit codes: 0 ok, 1 check failure, 2 config error,
3 numerical error.
"""

import argparse
import csv
import json
import os
import sys
from datetime import datetime

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    build_pipeline,
    bundled_names,
    check_schema,
    digest,
    grid_from_spec,
    load_json,
    resolve_pipeline,
    validate,
)
from .discretize import discretization_study
from .groups import SingularElementError
from .numerics import parallel
from .numerics.activations import get_activation
from .numerics.quadrature import SizingError, build_grid
from .numerics.summation import NonFiniteError
from .transforms.admissibility import AdmissibilityError, admissibility_constant, resolve_activation
from .transforms.operators import reconstruct, ridgelet_apply

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

FAMILY_ALIASES = {"quad": "quadratic", "first": "fc_layer_first", "middle": "fc_layer_middle",
                  "last": "fc_layer_last", "depth2": "fc2", "lifted": "lifted_phi0"}


class _Log:
    """Optional sidecar log; the only place timestamps are written."""

    def __init__(self, path):
        self.path = path

    def __call__(self, msg):
        if self.path:
            with open(self.path, "a") as fh:
                fh.write("%s %s\n" % (datetime.now().isoformat(timespec="milliseconds"), msg))


def _emit(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=1)
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _out_dir(args, cfg):
    d = args.out or cfg.get("output", {}).get("directory")
    if d:
        os.makedirs(d, exist_ok=True)
    return d


def _pipeline_config(args):
    cfg = resolve_pipeline(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


# ----------------------------------------------------------------------------


def cmd_constant(args):
    sigma = get_activation(args.sigma)
    rho = resolve_activation(args.rho, args.dim, sigma)
    grid = build_grid([args.omega_box], args.omega_points, "trapezoid")
    value = admissibility_constant(sigma, rho, args.dim, grid, args.support_radius)
    out = {"sigma": sigma.name, "rho": rho.name, "dim": args.dim,
           "omega_grid": {"box": list(args.omega_box), "points": args.omega_points}}
    if isinstance(value, complex):
        out["constant"] = {"real": value.real, "imag": value.imag}
    else:
        out["constant"] = float(value)
    _emit(out, args.output)
    return EXIT_OK


def cmd_reconstruct(args):
    cfg = _pipeline_config(args)
    pipe = build_pipeline(cfg)
    outdir = _out_dir(args, cfg)
    summaries = []
    for i, f in enumerate(pipe.targets):
        args.log("reconstruct target %d (%s)" % (i, f.name))
        run = reconstruct(f, pipe.phi, pipe.psi, pipe.x_grid, pipe.xi_grid, pipe.eval_points,
                          pipe.reference_constant)
        s = dict(run.summary(), target=f.name)
        if outdir:
            path = os.path.join(outdir, "reconstruct_%d.csv" % i)
            run.to_csv(path)
            s["csv"] = os.path.basename(path)
        summaries.append(s)
    summary = {"config_digest": digest(cfg), "pipeline": pipe.kind, "targets": summaries}
    _emit(summary, os.path.join(outdir, "summary.json") if outdir else None)
    return EXIT_OK


def cmd_discretize(args):
    cfg = _pipeline_config(args)
    pipe = build_pipeline(cfg)
    d = cfg.get("discretize", {})
    levels = args.levels or d.get("levels", [4, 8, 16, 32])
    f = pipe.targets[d.get("target_index", 0)]
    gamma = lambda xi: ridgelet_apply(f, pipe.psi, xi, pipe.x_grid)
    test = pipe.eval_points
    if "test_points" in d:
        tp = grid_from_spec(d["test_points"])
        test = np.asarray(getattr(tp, "nodes", tp), dtype=float).reshape(-1, pipe.dim)
    box = d.get("box", pipe.xi_grid.box)
    args.log("discretize levels %s" % (levels,))
    study = discretization_study(gamma, pipe.phi, box, levels, d.get("reference_points", 256), test)
    outdir = _out_dir(args, cfg)
    rows = list(zip(study["levels"], study["errors"]))
    if outdir:
        with open(os.path.join(outdir, "discretize.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "uniform_error"])
            for n, e in rows:
                w.writerow([n, repr(float(e))])
        for n, net in zip(study["levels"], study["networks"]):
            net.save(os.path.join(outdir, "network_n%d.json" % n))
    summary = {"config_digest": digest(cfg), "levels": study["levels"], "errors": study["errors"],
               "rate_constant": study["rate_constant"], "observed_order": study["observed_order"]}
    _emit(summary, os.path.join(outdir, "discretize.json") if outdir else None)
    return EXIT_OK


def _check_spec(args):
    spec = {"kind": args.kind}
    if args.kind == "equivariance":
        spec["family"] = FAMILY_ALIASES.get(args.family, args.family)
        if args.dim is not None:
            spec["dim"] = args.dim
        if args.activation:
            spec["activation"] = args.activation
        spec["corrupt"] = bool(args.corrupt)
    elif args.kind == "unitarity":
        spec["representation"] = args.representation
        spec["measure_preserving"] = bool(args.measure_preserving)
    elif args.kind == "intertwining":
        spec["side"] = args.side
    if args.kind in ("gcn_link",):
        spec["corrupt"] = bool(args.corrupt)
    if args.kind not in ("equivariance", "unitarity"):
        default = {"intertwining": "fc2_small", "scalar_identity": "fc2_gauss", "gcn_link": "gconv",
                   "gcn_reconstruction": "gconv", "discretization": "fc2_gauss",
                   "kernel_l2": "fc2_small"}[args.kind]
        spec["pipeline"] = resolve_pipeline(args.pipeline or default)
    if args.samples is not None:
        spec["samples"] = args.samples
    if args.tolerance is not None:
        spec["tolerance"] = args.tolerance
    validate(spec, check_schema(args.kind), "check flags")
    return spec


def cmd_check(args):
    from .verify import run_check

    spec = _check_spec(args)
    seed = args.seed if args.seed is not None else 0
    with parallel.threads(args.threads):
        rep = run_check(spec, seed)
    print(rep.line(), file=sys.stderr)
    _emit(rep.to_json(), args.output)
    return EXIT_CHECK if rep.outcome == "fail" else EXIT_OK


def cmd_suite(args):
    from .verify import run_suite

    cfg = load_json(args.config)
    args.log("suite %s start" % args.config)
    result = run_suite(cfg, seed=args.seed, threads=args.threads,
                       progress=lambda r: (print(r.line(), file=sys.stderr), args.log(r.check_name)))
    text = result.dumps()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    c = result.counts
    print("suite %s: %d pass, %d fail, %d inconclusive -> %s"
          % (result.name, c["pass"], c["fail"], c["inconclusive"], "OK" if result.ok else "FAILED"),
          file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_CHECK


def cmd_gcn(args):
    from .verify import check_gcn_fcn_link, check_gcn_reconstruction

    cfg = _pipeline_config(args)
    seed = cfg.get("seed", 0)
    with parallel.threads(args.threads):
        link = check_gcn_fcn_link(cfg, args.samples, seed=seed)
        rec = check_gcn_reconstruction(cfg, seed=seed)
    for r in (link, rec):
        print(r.line(), file=sys.stderr)
    _emit({"link": link.to_json(), "reconstruction": rec.to_json()}, args.output)
    return EXIT_OK if link.outcome != "fail" and rec.outcome != "fail" else EXIT_CHECK


def cmd_configs(args):
    if args.name:
        print(json.dumps(load_json(args.name), indent=2))
    else:
        for name in bundled_names():
            print(name)
    return EXIT_OK


# ----------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for batch evaluation (results do not depend on it); "
                             "default: $RIDGELAB_THREADS or 1")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--log", default=None, help="append timestamped progress lines to this file")

    p = argparse.ArgumentParser(prog="ridgelab", description="Ridgelet-transform numerics and identity checks.")
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constant", parents=[common], help="admissibility constant of an activation pair")
    c.add_argument("--sigma", default="gauss")
    c.add_argument("--rho", default="matched", help="catalog name, 'matched', 'matched:raw' or 'matched:<sigma>:<m>'")
    c.add_argument("--dim", type=int, default=1)
    c.add_argument("--omega-box", type=float, nargs=2, default=[-40.0, 40.0], metavar=("LO", "HI"))
    c.add_argument("--omega-points", type=int, default=8192)
    c.add_argument("--support-radius", type=float, default=None,
                   help="integration radius for profiles without a closed-form transform")
    c.add_argument("--output", "-o", default=None, help="also write the JSON here")
    c.set_defaults(func=cmd_constant)

    r = sub.add_parser("reconstruct", parents=[common], help="S o R applied to the configured targets")
    r.add_argument("config", help="config path or bundled name")
    r.add_argument("--out", default=None, help="output directory (CSV per target + summary.json)")
    r.set_defaults(func=cmd_reconstruct)

    d = sub.add_parser("discretize", parents=[common], help="finite networks on refined partitions")
    d.add_argument("config")
    d.add_argument("--levels", type=int, nargs="+", default=None)
    d.add_argument("--out", default=None, help="output directory (CSV + one network JSON per level)")
    d.set_defaults(func=cmd_discretize)

    k = sub.add_parser("check", parents=[common], help="run a single check")
    k.add_argument("kind", choices=["equivariance", "unitarity", "intertwining", "scalar_identity",
                                    "gcn_link", "gcn_reconstruction", "discretization", "kernel_l2"])
    k.add_argument("--family", default="fc2")
    k.add_argument("--dim", type=int, default=None)
    k.add_argument("--activation", default=None)
    k.add_argument("--representation", choices=["pi", "pihat"], default="pi")
    k.add_argument("--measure-preserving", action="store_true")
    k.add_argument("--side", choices=["S", "R"], default="S")
    k.add_argument("--pipeline", default=None, help="pipeline config path or bundled name")
    k.add_argument("--samples", type=int, default=None)
    k.add_argument("--tolerance", type=float, default=None)
    k.add_argument("--corrupt", action="store_true", help="negative control with a wrong action")
    k.add_argument("--output", "-o", default=None)
    k.set_defaults(func=cmd_check)

    s = sub.add_parser("suite", parents=[common], help="run a suite of checks")
    s.add_argument("config", nargs="?", default="suite_default")
    s.add_argument("--output", "-o", default=None, help="write the JSON report here instead of stdout")
    s.set_defaults(func=cmd_suite)

    g = sub.add_parser("gcn", parents=[common], help="group-convolution link and reconstruction")
    g.add_argument("config", nargs="?", default="gconv")
    g.add_argument("--samples", type=int, default=10)
    g.add_argument("--output", "-o", default=None)
    g.set_defaults(func=cmd_gcn)

    l = sub.add_parser("configs", help="list bundled configs or print one")
    l.add_argument("name", nargs="?")
    l.set_defaults(func=cmd_configs)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.log = _Log(getattr(args, "log", None))
    try:
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        with parallel.threads(getattr(args, "threads", None)):
            return args.func(args)
    except (AdmissibilityError, NonFiniteError, SizingError, SingularElementError) as exc:
        print("numerical error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, KeyError, ValueError, OSError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

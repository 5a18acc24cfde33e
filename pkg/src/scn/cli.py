"""Command-line interface: ``scn <command> [options]``.

Exit status is 0 on success, 2 for invalid input and 1 for internal errors.
Every command prints JSON (floats rounded to 12 significant digits) unless
``--format csv`` is requested where a table makes sense.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analytic, phase
from .analytic import UndefinedRegimeError
from .equilibrium import br_dynamics, best_responses, enumerate_equilibria, nash_check
from .model import (HeteroParams, ModelParams, Network, build_network, canonical_2x2,
                    describe, load_network, network_to_dict)
from .montecarlo import estimate_payoffs
from .thresholds import PRINTED_LAMBDA_MIN, thresholds_2x2

SIG_DIGITS = 12


class UsageError(ValueError):
    """Invalid flags or configuration."""


def _rounded(obj):
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _rounded(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


# -- argument parsing -------------------------------------------------------

def _add_params(p: argparse.ArgumentParser, hetero: bool = True) -> None:
    g = p.add_argument_group("model parameters")
    g.add_argument("--config", help="JSON file of parameters; flags override it")
    g.add_argument("--n", type=int, help="number of retailers")
    g.add_argument("--m", type=int, help="number of suppliers")
    g.add_argument("--lambda", dest="lambda_", type=float, help="success probability")
    g.add_argument("--d", type=float, help="consumer demand per retailer")
    g.add_argument("--c", type=float, help="linking cost")
    g.add_argument("--gamma", type=float, help="congestion coefficient")
    if hetero:
        g.add_argument("--lambda-r", type=float, help="retailer success probability")
        g.add_argument("--lambda-sup", type=_floats, help="per-supplier success probabilities")
        g.add_argument("--gamma-sup", type=_floats, help="per-supplier congestion coefficients")


def _add_output(p: argparse.ArgumentParser, formats=("json",), default="json") -> None:
    p.add_argument("--format", choices=formats, default=None,
                   help=f"output format (default {default})")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.set_defaults(_default_format=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scn", description=(
        "Supply chain network formation under yield uncertainty and congestion."))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("payoff", help="closed-form expected payoffs on a network")
    p.add_argument("--net", help="network JSON file")
    _add_params(p)
    _add_output(p, ("json", "csv"))

    p = sub.add_parser("simulate", help="Monte Carlo payoff estimates (any number of tiers)")
    p.add_argument("--net", help="network JSON file")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    _add_params(p)
    _add_output(p, ("json", "csv"))

    p = sub.add_parser("equilibria", help="enumerate equilibria, check one network, or run dynamics")
    p.add_argument("--mode", choices=("enumerate", "nash", "dynamics"))
    p.add_argument("--net", help="network JSON file (nash and dynamics modes)")
    p.add_argument("--canonical", action="store_true", default=None,
                   help="report one equilibrium per supplier relabeling")
    p.add_argument("--max-rounds", type=int)
    _add_params(p)
    _add_output(p, ("json", "csv"))

    p = sub.add_parser("thresholds", help="2x2 thresholds, solved and printed, plus regime quantities")
    p.add_argument("--degree", type=_floats, help="out-degrees at which to report f_hat")
    _add_params(p)
    _add_output(p)

    p = sub.add_parser("sweep", help="2x2 phase map as CSV (or JSON with reconciliation)")
    p.add_argument("--lambda-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--n-lambda", type=int)
    p.add_argument("--gamma-range", type=float, nargs=2, metavar=("LO", "HI"),
                   help="absolute gamma range; omitted means fractions of the parallel bound")
    p.add_argument("--n-gamma", type=int)
    p.add_argument("--costs", type=_floats, help="comma-separated linking costs")
    p.add_argument("--printed", type=_names,
                   help="thresholds to take from printed formulas: fz1,z2c,pc,pz2,c_max")
    p.add_argument("--jobs", type=int)
    p.add_argument("--d", type=float, help="consumer demand per retailer")
    p.add_argument("--config", help="JSON file of options; flags override it")
    _add_output(p, ("csv", "json"), default="csv")

    p = sub.add_parser("hetero", help="heterogeneous suppliers: payoffs, lambda_hat, scans")
    p.add_argument("--net", help="network JSON file")
    p.add_argument("--scan-points", type=int)
    p.add_argument("--gamma-scan-max", type=float)
    _add_params(p)
    _add_output(p)

    p = sub.add_parser("network", help="write a network JSON file")
    p.add_argument("--canonical-net", choices=sorted(canonical_2x2()),
                   help="one of the canonical 2x2 networks")
    p.add_argument("--links", help='1-based supplier sets, e.g. "1;1,2" ("-" for none)')
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--config", help="JSON file of options; flags override it")
    _add_output(p)
    return parser


DEFAULTS = {
    "lambda_": 0.8, "d": 1.0, "c": 0.0, "gamma": 0.0, "samples": 100_000, "seed": 0,
    "jobs": 1, "mode": "enumerate", "max_rounds": 100, "canonical": False,
    "lambda_range": [0.63, 0.98], "n_lambda": 40, "n_gamma": 40, "costs": [0.0],
    "printed": [], "scan_points": 21, "gamma_scan_max": 1.0, "degree": None,
}
_CONFIG_ALIASES = {"lambda": "lambda_"}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    path = getattr(args, "config", None)
    if path:
        try:
            cfg = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(cfg, dict):
            raise UsageError(f"{path}: config must be a JSON object")
        for key, value in cfg.items():
            dest = _CONFIG_ALIASES.get(key, key.replace("-", "_"))
            if dest.startswith("_") or dest in ("command", "config") or not hasattr(args, dest):
                raise UsageError(f"{path}: unknown key {key!r} for '{args.command}'")
            if getattr(args, dest) is None:
                if dest in ("lambda_sup", "gamma_sup", "costs", "degree") and not isinstance(value, list):
                    value = _floats(value)
                if dest == "printed" and isinstance(value, str):
                    value = _names(value)
                setattr(args, dest, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    if args.format is None:
        args.format = args._default_format
    return args


def _network(args) -> Network:
    if not getattr(args, "net", None):
        raise UsageError("--net is required")
    net = load_network(args.net)
    for attr, size in (("n", net.n), ("m", net.m)):
        given = getattr(args, attr, None)
        if given is not None and given != size:
            raise UsageError(f"--{attr} {given} disagrees with the network ({size})")
    return net


def _params(args, n: int, m: int, tiers=None):
    hetero = any(getattr(args, k, None) is not None for k in ("lambda_r", "lambda_sup", "gamma_sup"))
    if hetero:
        if tiers is not None and len(tiers) > 2:
            raise UsageError("heterogeneous parameters cover two-tier networks only")
        lam_sup = args.lambda_sup if args.lambda_sup is not None else [args.lambda_] * m
        gam_sup = args.gamma_sup if args.gamma_sup is not None else [args.gamma] * m
        lam_r = args.lambda_r if args.lambda_r is not None else args.lambda_
        return HeteroParams(n=n, m=m, lambda_r=lam_r, lambda_sup=tuple(lam_sup),
                            gamma_sup=tuple(gam_sup), D=args.d, c=args.c)
    return ModelParams(n=n, m=m, D=args.d, lam=args.lambda_, c=args.c, gamma=args.gamma,
                       tiers=tuple(tiers) if tiers is not None and len(tiers) > 2 else None)


def _params_dict(p) -> dict:
    if isinstance(p, HeteroParams):
        return {"n": p.n, "m": p.m, "d": p.D, "c": p.c, "lambda_r": p.lambda_r,
                "lambda_sup": list(p.lambda_sup), "gamma_sup": list(p.gamma_sup)}
    out = {"n": p.n, "m": p.m, "d": p.D, "c": p.c, "lambda": p.lam, "gamma": p.gamma}
    if p.tiers is not None:
        out["tiers"] = list(p.tiers)
    return out


def _sets(s) -> list[int]:
    return [j + 1 for j in sorted(s)]


# -- commands ---------------------------------------------------------------

def cmd_payoff(args):
    net = _network(args)
    if net.num_tiers != 2:
        raise UsageError("closed-form payoffs need a two-tier network; use 'simulate'")
    p = _params(args, net.n, net.m)
    out = {
        "command": "payoff", "network": network_to_dict(net), "params": _params_dict(p),
        "retailers": analytic.retailer_payoffs(net, p),
        "suppliers": analytic.supplier_payoffs(net, p),
        "rho": [analytic.rho(net, i) for i in range(net.n)],
        "congestion": [analytic.congestion(net, j) for j in range(net.m)],
    }
    rows = [("retailer", i + 1, v) for i, v in enumerate(out["retailers"])]
    rows += [("supplier", j + 1, v) for j, v in enumerate(out["suppliers"])]
    return out, (("agent", "index", "payoff"), rows)


def cmd_simulate(args):
    net = _network(args)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    p = _params(args, net.n, net.m, net.tiers)
    est = estimate_payoffs(net, p, args.samples, seed=args.seed, jobs=args.jobs)
    analytic_vals = analytic.retailer_payoffs(net, p) if net.num_tiers == 2 else None
    out = {
        "command": "simulate", "network": network_to_dict(net), "params": _params_dict(p),
        "samples": est.samples, "seed": est.seed,
        "mean": [m.tolist() for m in est.mean], "stderr": [s.tolist() for s in est.stderr],
        "analytic": analytic_vals,
    }
    rows = [(t + 1, i + 1, mu, se) for t, (ms, ss) in enumerate(zip(est.mean, est.stderr))
            for i, (mu, se) in enumerate(zip(ms, ss))]
    return out, (("tier", "index", "mean", "stderr"), rows)


def _cert(c):
    if c is None:
        return None
    return {"retailer": c.retailer + 1, "original": _sets(c.original),
            "improving": _sets(c.improving), "gain": c.gain}


def cmd_equilibria(args):
    if args.mode == "enumerate":
        if args.n is None or args.m is None:
            raise UsageError("enumerate mode needs --n and --m")
        p = _params(args, args.n, args.m)
        rep = enumerate_equilibria(p, args.n, args.m, canonical=args.canonical)
        eqs = [{"network": network_to_dict(e.network), "label": e.label,
                "payoffs": list(e.payoffs)} for e in rep.equilibria]
        out = {"command": "equilibria", "mode": "enumerate", "params": _params_dict(p),
               "n": rep.n, "m": rep.m, "examined": rep.examined,
               "classes": sorted(rep.classes), "equilibria": eqs}
        rows = [(e["label"], json.dumps(e["network"]["links"])) for e in eqs]
        return out, (("label", "links"), rows)
    net = _network(args)
    p = _params(args, net.n, net.m)
    if args.mode == "nash":
        ok, cert = nash_check(net, p)
        out = {"command": "equilibria", "mode": "nash", "params": _params_dict(p),
               "network": network_to_dict(net), "label": describe(net), "is_nash": ok,
               "certificate": _cert(cert),
               "best_responses": [[_sets(s) for s in best_responses(i, net, p)]
                                  for i in range(net.n)]}
        rows = [("is_nash", ok)] + ([("certificate", str(cert))] if cert else [])
        return out, (("field", "value"), rows)
    traj = br_dynamics(net, p, args.max_rounds)
    out = {"command": "equilibria", "mode": "dynamics", "params": _params_dict(p),
           "trajectory": [network_to_dict(x) for x in traj.networks],
           "labels": [describe(x) for x in traj.networks],
           "converged": traj.converged, "rounds": traj.rounds}
    rows = [(k, out["labels"][k], json.dumps(x["links"])) for k, x in enumerate(out["trajectory"])]
    return out, (("step", "label", "links"), rows)


def _maybe(fn):
    try:
        return fn()
    except UndefinedRegimeError:
        return None


def cmd_thresholds(args):
    lam, c, D, gamma = args.lambda_, args.c, args.d, args.gamma
    th = thresholds_2x2(lam, c, D)
    n = args.n if args.n is not None else 2
    degrees = args.degree or [1.0, 2.0]
    lam_hat = None
    if args.lambda_sup is not None:
        if len(args.lambda_sup) != 2 or args.lambda_r is None:
            raise UsageError("lambda_hat needs --lambda-sup with two entries and --lambda-r")
        g = args.gamma_sup[0] if args.gamma_sup else gamma
        lam_hat = analytic.lambda_hat(args.lambda_sup[0], args.lambda_sup[1], args.lambda_r, g)
    out = {
        "command": "thresholds", "lambda": lam, "c": c, "d": D, "gamma": gamma,
        "gamma_hat": {"solved": th.gamma_hat, "solved_c0": th.gamma_hat_c0,
                      "printed": th.gamma_hat_printed, "residual": th.gamma_hat_residual,
                      "discrepancy": th.gamma_hat_discrepancy},
        "gamma_max": {"solved": th.gamma_max, "printed": th.gamma_max_printed,
                      "discrepancy": th.gamma_max_discrepancy},
        "gamma_feasible": th.gamma_feasible,
        "c_max": {"gamma": gamma, "solved": th.c_max(gamma), "printed": th.c_max_printed(gamma),
                  "discrepancy": th.c_max_discrepancy(gamma)},
        "lambda_min": {"solved": th.lambda_min, "printed": dict(PRINTED_LAMBDA_MIN),
                       "discrepancy": th.lambda_min_discrepancy},
        "ordering_holds": th.ordering_holds(),
        "regime": {
            "d_hat": _maybe(lambda: analytic.d_hat(lam, D, c)),
            "f_hat": None if gamma <= 0 else {f"{d:g}": analytic.f_hat(lam, gamma, d) for d in degrees},
            "low_gamma_threshold": analytic.low_gamma_threshold(lam, n),
            "n": n,
            "lambda_hat": lam_hat,
        },
    }
    return out, None


def cmd_sweep(args):
    lo, hi = args.lambda_range
    relative = args.gamma_range is None
    spec = phase.GridSpec.linear((lo, hi), args.n_lambda, args.gamma_range, args.n_gamma,
                                 args.costs, relative=relative, D=args.d if args.d else 1.0)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    cells = phase.sweep(spec, jobs=args.jobs, printed=args.printed)
    if args.format == "csv":
        return None, phase.cells_to_csv(cells)
    rep = phase.reconcile(cells, D=spec.D)
    cell = lambda x: {"lambda": x.lam, "gamma": x.gamma, "c": x.c,
                      "predicted": sorted(x.predicted), "enumerated": sorted(x.enumerated),
                      "agree": x.agree, "distance": x.distance}
    out = {
        "command": "sweep", "relative": relative, "printed": list(args.printed),
        "cells": [cell(x) for x in cells],
        "reconcile": {
            "cells": rep.cells,
            "disagreements": [cell(x) for x in rep.disagreements],
            "indeterminate": len(rep.indeterminate),
            "printed": {k: {"count": v.count, "band": v.band()} for k, v in rep.printed.items()},
            "contradicted": rep.contradicted,
        },
    }
    return out, None


def _trend(values: list[float], tol: float = 1e-12) -> str:
    diffs = np.diff(values)
    if np.all(np.abs(diffs) <= tol):
        return "constant"
    if np.all(diffs > tol):
        return "increasing"
    if np.all(diffs < -tol):
        return "decreasing"
    if np.all(diffs >= -tol):
        return "nondecreasing"
    if np.all(diffs <= tol):
        return "nonincreasing"
    return "nonmonotone"


def cmd_hetero(args):
    net = _network(args)
    if net.num_tiers != 2:
        raise UsageError("heterogeneous payoffs need a two-tier network")
    if args.lambda_sup is None or args.gamma_sup is None or args.lambda_r is None:
        raise UsageError("hetero needs --lambda-r, --lambda-sup and --gamma-sup")
    if args.scan_points < 2:
        raise UsageError("--scan-points must be >= 2")
    h = _params(args, net.n, net.m)
    lam_grid = np.linspace(0.01, 0.99, args.scan_points)
    gam_grid = np.linspace(0.0, args.gamma_scan_max, args.scan_points)
    scans = []
    for j in range(net.m):
        for name, grid in (("lambda", lam_grid), ("gamma", gam_grid)):
            pays = []
            for x in grid:
                arr = list(h.lambda_sup if name == "lambda" else h.gamma_sup)
                arr[j] = float(x)
                hj = HeteroParams(h.n, h.m, h.lambda_r,
                                  tuple(arr) if name == "lambda" else h.lambda_sup,
                                  tuple(arr) if name == "gamma" else h.gamma_sup, h.D, h.c)
                pays.append(analytic.retailer_payoffs(net, hj))
            per_retailer = np.array(pays).T
            scans.append({"supplier": j + 1, "parameter": name, "grid": grid.tolist(),
                          "payoffs": per_retailer.tolist(),
                          "trend": [_trend(list(r)) for r in per_retailer]})
    lam_hat = None
    if net.m == 2:
        lam_hat = analytic.lambda_hat(h.lambda_sup[0], h.lambda_sup[1], h.lambda_r, h.gamma_sup[0])
    out = {"command": "hetero", "network": network_to_dict(net), "params": _params_dict(h),
           "retailers": analytic.retailer_payoffs(net, h),
           "suppliers": analytic.supplier_payoffs(net, h),
           "lambda_hat": lam_hat, "scans": scans}
    return out, None


def cmd_network(args):
    if bool(args.canonical_net) == bool(args.links):
        raise UsageError("give exactly one of --canonical-net and --links")
    if args.canonical_net:
        net = canonical_2x2()[args.canonical_net]
    else:
        groups = [g.strip() for g in args.links.split(";")]
        try:
            links = [[int(x) - 1 for x in g.split(",")] if g not in ("", "-") else [] for g in groups]
        except ValueError as exc:
            raise UsageError(f"bad --links {args.links!r}") from exc
        n = args.n if args.n is not None else len(links)
        m = args.m if args.m is not None else max([j + 1 for s in links for j in s] or [1])
        if any(j < 0 for s in links for j in s):
            raise UsageError("supplier indices are 1-based")
        net = build_network(n, m, links)
    return network_to_dict(net), None


COMMANDS = {"payoff": cmd_payoff, "simulate": cmd_simulate, "equilibria": cmd_equilibria,
            "thresholds": cmd_thresholds, "sweep": cmd_sweep, "hetero": cmd_hetero,
            "network": cmd_network}


def _render(out, table, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_rounded(out), indent=2) + "\n"
    if table is None:
        raise UsageError("CSV output is not available for this command")
    if isinstance(table, str):
        return table
    header, rows = table
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{x:.{SIG_DIGITS}g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _merge_config(args)
        out, table = COMMANDS[args.command](args)
        text = _render(out, table, args.format)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    except (ValueError, OSError) as exc:
        print(f"scn: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"scn: internal error: {exc!r}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

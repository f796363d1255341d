"""Command-line interface.

Subcommands: ``centrality``, ``solve-shifted``, ``fit``, ``sensitivity``
and ``inverse``. The main result goes to stdout as CSV; ``--out DIR``
also writes files in the formats chosen with ``--format``.

Exit codes: 0 success, 1 usage or I/O error, 2 model infeasibility
(violated model precondition, singular system, non-convergence),
3 estimation failure. Errors print one line to stderr:
``ERROR <exit> <CODE>: <message>``.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConvergenceError,
    DisconnectedNetworkError,
    InfeasibleModelError,
    NetworkError,
    RankDeficiencyError,
    ReducibleMatrixError,
    SingularSystemError,
    StructuralError,
)
from .fitting import fit_joint, fit_weights_known_f, goodness_of_fit
from .inverse import InverseProblem, solve_inverse
from .io import csv_text, json_text, load_matrix, load_network, load_snapshots, load_vector, report_dict, report_tables
from .netgraph import apply_weights, build_matrix, shortest_path_distances
from .plots import bar_chart_svg, heatmap_svg
from .sensitivity import EigenModel, full_report, parse_parameter
from .shifted import ShiftedModel, Verdict, calibrate_mu, classify
from .spectral import perron_pair

FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    code = "USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _fail(1, "USAGE", message)


def _fail(status, code, message):
    sys.stderr.write(f"ERROR {status} {code}: {' '.join(str(message).split())}\n")
    raise SystemExit(status)


def _formats(text):
    fs = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in fs if f not in FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {', '.join(bad)}; choose from {','.join(FORMATS)}")
    return fs


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="urbancentrality", description="Shifted eigenvector centrality and occupancy models.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, network_required=True):
        sp.add_argument("--network", type=Path, required=network_required, help="network JSON file")
        sp.add_argument("--kind", choices=("adjacency", "harmonic", "gravity"), default="adjacency")
        sp.add_argument("--metric", action="store_true", help="use edge lengths for distances")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--format", type=_formats, default=["csv", "json"], help="comma list of csv,json,svg")

    def weights(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--weights", type=Path, help="per-node weight file (CSV or JSON)")
        g.add_argument("--fit", action="store_true", help="estimate weights from --snapshots")
        g.add_argument("--unit", action="store_true", help="all weights 1 (default)")
        sp.add_argument("--snapshots", type=Path)
        sp.add_argument("--forced", type=Path)

    sp = sub.add_parser("centrality", help="eigenvector centrality of B diag(w)")
    common(sp)
    weights(sp)
    sp.add_argument("--total", type=float, default=1.0, help="scale so entries sum to N")

    sp = sub.add_parser("solve-shifted", help="solve x = mu B diag(w) x + f")
    common(sp)
    weights(sp)
    sp.add_argument("--shift", type=Path, required=True, help="forced occupancy vector f")
    sp.add_argument("--total", type=float, help="calibrate mu so sum(x) = N (default: mu = 1)")

    sp = sub.add_parser("fit", help="least-squares estimation of weights (and f)")
    common(sp)
    sp.add_argument("--snapshots", type=Path)
    sp.add_argument("--forced", type=Path, help="known forced occupancy; omit to estimate a constant f")
    sp.add_argument("--constrained", action="store_true", help="nonnegative least squares")

    sp = sub.add_parser("sensitivity", help="derivatives and elasticities")
    common(sp)
    weights(sp)
    sp.add_argument("--shift", type=Path, help="forced occupancy vector f (shifted model)")
    sp.add_argument("--total", type=float, help="total occupancy N")
    sp.add_argument("--param", action="append", default=[], help="w:INDEX or f:INDEX (repeatable, 1-based)")

    sp = sub.add_parser("inverse", help="inverse eigenvector problem lam / x = M x")
    common(sp, network_required=False)
    sp.add_argument("--matrix", type=Path, help="square matrix CSV (instead of --network)")
    sp.add_argument("--distance", action="store_true", help="with --network, use the distance matrix as M")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    return p


class _Output:
    def __init__(self, args):
        self.dir = args.out
        self.formats = args.format
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name, text, fmt):
        if self.dir is not None and fmt in self.formats:
            (self.dir / name).write_text(text, encoding="utf-8", newline="\n")


def _weights(args, net, B):
    if args.weights is not None:
        return load_vector(args.weights, net.ids)
    if args.fit:
        if args.snapshots is None:
            raise UsageError("--fit needs --snapshots")
        snaps = load_snapshots(args.snapshots, net.ids, args.forced)
        fit = fit_weights_known_f(B, snaps) if snaps.forced is not None else fit_joint(B, snaps)
        if np.any(fit.w <= 0):
            raise InfeasibleModelError("fitted weights are not all positive; use the fit command with --constrained")
        return fit.w
    return np.ones(net.n)


def cmd_centrality(args):
    net = load_network(args.network)
    B = build_matrix(net, args.kind, args.metric)
    w = _weights(args, net, B)
    if not args.total > 0:
        raise UsageError("--total must be positive")
    pair = perron_pair(apply_weights(B, w), left=False, total=args.total)
    text = csv_text(["id", "label", "x"], [[i, l, float(v)] for i, l, v in zip(net.ids, net.labels, pair.right)])
    out = _Output(args)
    out.write("centrality.csv", text, "csv")
    out.write("centrality.json", json_text({
        "kind": args.kind, "N": args.total, "lambda": pair.lam, "residual": pair.residual,
        "nodes": net.ids, "x": pair.right,
    }), "json")
    return text


def cmd_solve_shifted(args):
    net = load_network(args.network)
    B = build_matrix(net, args.kind, args.metric)
    w = _weights(args, net, B)
    f = load_vector(args.shift, net.ids)
    K = np.asarray(apply_weights(B, w).entries)
    if not np.any(f > 0):
        c = classify(K, f)
        raise InfeasibleModelError(f"f = 0: {c}; use the centrality command", Verdict.EIGENVECTOR_CASE, c.rho)
    if args.total is not None:
        mu, _ = calibrate_mu(B, w, f, args.total)
    else:
        mu = 1.0
    M = mu * K
    c = classify(M, f)
    if c.verdict is not Verdict.UNIQUE_POSITIVE:
        raise InfeasibleModelError(str(c), c.verdict, c.rho)
    x = ShiftedModel(B, w, f, float(args.total or 1.0), mu).solve()
    one_Mx, one_f = float((M @ x).sum()), float(f.sum())
    text = csv_text(["id", "label", "x", "f"],
                    [[i, l, float(a), float(b)] for i, l, a, b in zip(net.ids, net.labels, x, f)])
    out = _Output(args)
    out.write("shifted.csv", text, "csv")
    out.write("shifted.json", json_text({
        "nodes": net.ids, "x": x, "f": f, "w": w, "mu": mu, "rho": c.rho, "verdict": c.verdict.name,
        "conservation": {"sum_x": x.sum(), "sum_Mx": one_Mx, "sum_f": one_f,
                         "defect": x.sum() - one_Mx - one_f},
    }), "json")
    return text


def cmd_fit(args):
    net = load_network(args.network)
    if args.snapshots is None:
        raise UsageError("fit needs --snapshots")
    B = build_matrix(net, args.kind, args.metric)
    snaps = load_snapshots(args.snapshots, net.ids, args.forced)
    if snaps.forced is not None:
        fit = fit_weights_known_f(B, snaps, args.constrained)
    else:
        fit = fit_joint(B, snaps, args.constrained)
    diag = goodness_of_fit(fit, B, snaps)
    header = ["id", "label", "w"] + (["f"] if fit.f is not None else [])
    rows = []
    for k, (i, l) in enumerate(zip(net.ids, net.labels)):
        row = [i, l, float(fit.w[k])]
        if fit.f is not None:
            row.append(float(fit.f[k]))
        rows.append(row)
    text = csv_text(header, rows)
    out = _Output(args)
    out.write("fit.csv", text, "csv")
    out.write("fit.json", json_text({
        "mode": "known-f" if snaps.forced is not None else "joint",
        "constrained": fit.constrained, "nodes": net.ids, "w": fit.w, "f": fit.f,
        "residual_norm": fit.residual_norm, "per_row_residuals": fit.per_row_residuals,
        "r_squared": diag.r_squared, "rmse": diag.rmse,
        "snapshot_residual_norms": diag.snapshot_residual_norms,
        "max_relative_error": diag.max_relative_error, "rank": fit.rank,
    }), "json")
    return text


def cmd_sensitivity(args):
    net = load_network(args.network)
    B = build_matrix(net, args.kind, args.metric)
    w = _weights(args, net, B)
    params = [parse_parameter(p, net.ids) for p in args.param]
    if args.shift is not None:
        f = load_vector(args.shift, net.ids)
        if args.total is not None:
            model = ShiftedModel.calibrated(B, w, f, args.total)
        else:
            model = ShiftedModel(B, w, f, 1.0, 1.0)
            model = ShiftedModel(B, w, f, float(model.solve().sum()), 1.0)
    else:
        model = EigenModel(B, w, 1.0 if args.total is None else args.total)
    report = full_report(model, params)
    deriv, elas = report_tables(report, net.ids)
    out = _Output(args)
    out.write("derivatives.csv", deriv, "csv")
    out.write("elasticities.csv", elas, "csv")
    out.write("base.csv", csv_text(["id", "label", "x"],
                                   [[i, l, float(v)] for i, l, v in zip(net.ids, net.labels, report.base_x)]), "csv")
    out.write("sensitivity.json", json_text(report_dict(report, net.ids)), "json")
    if params:
        rows = [f"x[{i}]" for i in net.ids]
        out.write("elasticity_heatmap.svg", heatmap_svg(report.elasticities, rows, report.headers), "svg")
        out.write("elasticity_bars.svg", bar_chart_svg(report.elasticities, rows, report.headers), "svg")
    return deriv if params else csv_text(["id", "x"], [[i, float(v)] for i, v in zip(net.ids, report.base_x)])


def cmd_inverse(args):
    if args.matrix is not None:
        M = load_matrix(args.matrix)
        ids = [str(k + 1) for k in range(M.shape[0])]
    elif args.network is not None:
        net = load_network(args.network)
        ids = net.ids
        if args.distance:
            M = shortest_path_distances(net, args.metric).entries
        else:
            M = build_matrix(net, args.kind, args.metric).entries
    else:
        raise UsageError("inverse needs --matrix or --network")
    prob = InverseProblem(M, args.lam)
    x = solve_inverse(prob)
    residual = float(np.max(np.abs(args.lam / x - prob.M @ x)))
    text = csv_text(["id", "x"], [[i, float(v)] for i, v in zip(ids, x)])
    out = _Output(args)
    out.write("inverse.csv", text, "csv")
    out.write("inverse.json", json_text({"lambda": args.lam, "nodes": ids, "x": x, "residual": residual}), "json")
    return text


COMMANDS = {
    "centrality": cmd_centrality,
    "solve-shifted": cmd_solve_shifted,
    "fit": cmd_fit,
    "sensitivity": cmd_sensitivity,
    "inverse": cmd_inverse,
}

_MODEL_ERRORS = (InfeasibleModelError, ReducibleMatrixError, DisconnectedNetworkError,
                 SingularSystemError, StructuralError, ConvergenceError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            text = COMMANDS[args.command](args)
    except (UsageError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        _fail(1, getattr(exc, "code", "IO"), exc)
    except RankDeficiencyError as exc:
        _fail(3, exc.code, exc)
    except _MODEL_ERRORS as exc:
        _fail(2, exc.code, exc)
    except (NetworkError, ValueError) as exc:
        _fail(1, getattr(exc, "code", "INPUT"), exc)
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

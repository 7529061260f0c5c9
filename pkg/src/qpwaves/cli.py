"""Command-line interface.

    qpwaves params  -b -1 -a 1 -J 0.2 -E 0.23
    qpwaves params  --family dn --k 0.9
    qpwaves compare --family dn --k 0.9 --tol 5e-3 --dump-dir runs/dn
    qpwaves metrics runs/dn/ode.csv runs/dn/flow.csv
    qpwaves atlas   --b -1 --a 1 --grid 20
    qpwaves figures --which boundary-curves --b -1 --a 1

Exit status: 0 pass, 1 tolerance failure, 2 non-convergence, 3 invalid input.
Relative output paths are resolved under $QPWAVES_OUTPUT_DIR when it is set.
"""

import argparse
import csv
from dataclasses import dataclass, field
import json
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from . import atlas
from .gradflow import (STENCILS, Constraints, FlowConfig, Grid, NonConvergenceError,
                       discrete_functionals, minimize)
from .ode import InvariantDriftError, align, integrate_profile
from .profile import (ELLIPTIC_FAMILIES, ClassificationError, Family, NoBoundedSolution,
                      ProblemParams, elliptic_family_params, profile_data)

EXIT_OK, EXIT_TOL, EXIT_NONCONV, EXIT_INVALID = 0, 1, 2, 3
OUTPUT_ENV = "QPWAVES_OUTPUT_DIR"
TARGETS = ("sample", "analytic")


class InvalidInput(ValueError):
    pass


# --- reports --------------------------------------------------------------------------


def profile_dict(pd):
    d = {
        "domain": str(pd.domain),
        "T": pd.T,
        "theta": pd.theta,
        "theta_raw": pd.theta_raw,
        "mass": pd.mass,
        "momentum": pd.momentum,
        "r1": pd.r1,
        "r2": pd.r2,
    }
    if pd.roots is not None:
        d["roots"] = [pd.roots.y1, pd.roots.y2, pd.roots.y3]
    if pd.scale is not None:
        d["family_scale"] = {"k": pd.scale.k, "amplitude": pd.scale.amplitude,
                             "beta": pd.scale.beta}
    return d


@dataclass
class RunReport:
    inputs: dict
    profile: dict
    convergence: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    passed: bool = True
    version: str = __version__

    def to_json(self):
        return json.dumps({"version": self.version, "inputs": self.inputs,
                           "profile": self.profile, "convergence": self.convergence,
                           "metrics": self.metrics, "passed": self.passed},
                          indent=2, default=_json_default)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    raise TypeError(f"not serializable: {type(v).__name__}")


def comparison_metrics(u_ode, u_min):
    """Max pointwise differences between two aligned samples.

    The complex difference is taken after the best global phase, since a
    profile through zero aligns to either sign depending on which side of the
    node the sampled minimum falls.
    """
    u_ode, u_min = np.asarray(u_ode), np.asarray(u_min)
    if u_ode.shape != u_min.shape:
        raise InvalidInput(f"sample shapes differ: {u_ode.shape} vs {u_min.shape}")
    c = np.sum(u_min.conj() * u_ode)
    phase = c / abs(c) if c != 0 else 1.0
    return {"max_modulus_diff": float(np.max(np.abs(np.abs(u_min) - np.abs(u_ode)))),
            "max_complex_diff": float(np.max(np.abs(phase * u_min - u_ode)))}


# --- sample dumps ---------------------------------------------------------------------


def write_sample(path, x, u):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re_u", "im_u", "abs_u"])
        for xi, ui in zip(x, u):
            w.writerow([format(float(v), ".17g") for v in (xi, ui.real, ui.imag, abs(ui))])


def read_sample(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


# --- drivers --------------------------------------------------------------------------


def resolve_params(b=None, a=None, J=None, E=None, family=None, k=None):
    """ProblemParams from explicit coefficients or from an elliptic family."""
    if family is not None:
        if any(v is not None for v in (b, a, J, E)):
            raise InvalidInput("give either --family/--k or -b/-a/-J/-E, not both")
        if k is None:
            raise InvalidInput("--family needs --k")
        return elliptic_family_params(Family(family.capitalize()), k)[0]
    if b is None or a is None:
        raise InvalidInput("need -b and -a (or --family and --k)")
    return ProblemParams(b=b, a=a, J=0.0 if J is None else J, E=0.0 if E is None else E)


def run_params(params):
    pd = profile_data(params)
    return RunReport(inputs=_param_inputs(params), profile=profile_dict(pd))


def _param_inputs(params):
    return {"b": params.b, "a": params.a, "J": params.J, "E": params.E}


def run_compare(params, L=1000, dt=1e-3, eps=1e-6, max_steps=200_000,
                stencil="continuous", targets="sample", tol=None, dump_dir=None):
    """Integrate the profile, run the constrained flow with matched (T, theta, m, p),
    align both and compare.  Raises NonConvergenceError from the flow."""
    if targets not in TARGETS:
        raise InvalidInput(f"targets must be one of {TARGETS}")
    pd = profile_data(params)
    sample = align(integrate_profile(params, L, pd))
    grid = Grid(pd.T, L, pd.theta_raw)
    if targets == "sample":
        m, p, _, _ = discrete_functionals(sample.u[:-1], grid, params.b)
    else:
        m, p = pd.mass, pd.momentum
    config = FlowConfig(dt=dt, eps=eps, max_steps=max_steps, b=params.b, stencil=stencil)
    flow, diag = minimize(grid, Constraints(m, p), config, params)
    metrics = comparison_metrics(sample.u, flow.u)
    inputs = dict(_param_inputs(params), L=L, dt=dt, eps=eps, max_steps=max_steps,
                  stencil=stencil, targets=targets, tol=tol)
    convergence = {
        "steps": diag.steps,
        "final_modulus_change": float(diag.dmod[-1]),
        "mass_target": m,
        "momentum_target": p,
        "mass_residual": abs(diag.final_mass - m),
        "momentum_residual": abs(diag.final_momentum - p),
        "final_energy": diag.final_energy,
        "projection_sweeps": diag.projection_sweeps,
        "degenerate_steps": int(diag.degenerate.sum()),
        "ode_substeps": sample.substeps,
        "ode_drift_J": sample.drift_J,
        "ode_drift_E": sample.drift_E,
        "ode_closure": sample.closure,
    }
    passed = tol is None or metrics["max_modulus_diff"] <= tol
    report = RunReport(inputs, profile_dict(pd), convergence, metrics, passed)
    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        write_sample(dump_dir / "ode.csv", sample.x, sample.u)
        write_sample(dump_dir / "flow.csv", flow.x, flow.u)
        (dump_dir / "report.json").write_text(report.to_json() + "\n")
    return report, sample, flow, diag


# --- argument handling ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _out_path(path):
    p = Path(path)
    base = os.environ.get(OUTPUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text, out):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    p = _out_path(out)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _add_param_args(p):
    p.add_argument("-b", "--b", type=float, help="nonlinearity coefficient")
    p.add_argument("-a", "--a", type=float, help="frequency")
    p.add_argument("-J", "--J", type=float, help="angular momentum invariant")
    p.add_argument("-E", "--E", type=float, help="ODE energy invariant")
    p.add_argument("--family", choices=[f.value.lower() for f in ELLIPTIC_FAMILIES])
    p.add_argument("--k", type=float, help="elliptic modulus for --family")


def build_parser():
    parser = _Parser(prog="qpwaves", description="Quasi-periodic standing waves of cubic NLS.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("params", help="period, Floquet phase, mass and momentum")
    _add_param_args(p)
    p.add_argument("--out")

    p = sub.add_parser("compare", help="ODE profile vs constrained gradient-flow minimizer")
    _add_param_args(p)
    p.add_argument("--L", type=int, default=1000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-steps", type=int, default=200_000)
    p.add_argument("--stencil", choices=STENCILS, default="continuous")
    p.add_argument("--targets", choices=TARGETS, default="sample",
                   help="constraint values from the sampled ODE profile or the analytic integrals")
    p.add_argument("--tol", type=float, help="pass threshold on the max modulus difference")
    p.add_argument("--dump-dir", help="write ode.csv, flow.csv and report.json here")
    p.add_argument("--out")

    p = sub.add_parser("metrics", help="recompute comparison metrics from two sample dumps")
    p.add_argument("ode_csv")
    p.add_argument("flow_csv")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("atlas", help="(J, E) sweep with finite-difference partials")
    p.add_argument("-b", "--b", type=float, required=True)
    p.add_argument("-a", "--a", type=float, required=True)
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--h", type=float, default=atlas.FD_STEP)
    p.add_argument("--e-span", type=float, default=5.0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("figures", help="tabular data behind the domain and image figures")
    p.add_argument("--which", choices=atlas.FIGURES, required=True)
    p.add_argument("-b", "--b", type=float, required=True)
    p.add_argument("-a", "--a", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    return parser


def _params_from(args):
    return resolve_params(args.b, args.a, args.J, args.E, args.family, args.k)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except NonConvergenceError as exc:
        print(f"qpwaves: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (InvalidInput, NoBoundedSolution, ClassificationError, InvariantDriftError,
            ValueError) as exc:
        print(f"qpwaves: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _dispatch(args):
    if args.command == "params":
        _emit(run_params(_params_from(args)).to_json(), args.out)
        return EXIT_OK
    if args.command == "compare":
        dump = _out_path(args.dump_dir) if args.dump_dir else None
        report = run_compare(_params_from(args), args.L, args.dt, args.eps, args.max_steps,
                             args.stencil, args.targets, args.tol, dump)[0]
        _emit(report.to_json(), args.out)
        return EXIT_OK if report.passed else EXIT_TOL
    if args.command == "metrics":
        x0, u0 = read_sample(args.ode_csv)
        x1, u1 = read_sample(args.flow_csv)
        if not np.array_equal(x0, x1):
            raise InvalidInput("the two dumps use different grids")
        m = comparison_metrics(u0, u1)
        print(json.dumps(m, indent=2))
        return EXIT_OK if args.tol is None or m["max_modulus_diff"] <= args.tol else EXIT_TOL
    if args.command == "atlas":
        recs = atlas.sweep(args.b, args.a, n=args.grid, h=args.h, e_span=args.e_span)
        text = atlas.records_csv(recs) if args.format == "csv" else atlas.records_json(recs)
        _emit(text, args.out)
        return EXIT_OK
    if args.command == "figures":
        _emit(atlas.table_csv(atlas.figures(args.which, args.b, args.a, args.n)), args.out)
        return EXIT_OK
    raise InvalidInput(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())

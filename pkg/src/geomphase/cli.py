"""Command-line entry point: ``geomphase <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import igp, uhlmann
from .errors import InvalidSpecError, NumericalError, TransportViolationError
from .scan import SweepSpec, export, find_critical, grid, sweep
from .spin import SpinJ

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

FAMILIES = ("css", "oneaxis", "twoaxis")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--j", dest="two_j", type=int, default=None, help="twice the spin, e.g. 3 for j=3/2")
    p.add_argument("--omega0", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=4096, help="Trotter / discretization steps")
    p.add_argument("--refine", action="store_true", help="double steps until the phase converges")
    p.add_argument("--method", choices=("auto", "closed", "trotter", "spectral", "numeric"), default="auto")
    p.add_argument("--jump-threshold", type=float, default=np.pi / 2)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--workers", type=int, default=1)


def _temperature_range(p: argparse.ArgumentParser, tmin=0.05, tmax=1.0, tn=200) -> None:
    p.add_argument("--tmin", type=float, default=tmin)
    p.add_argument("--tmax", type=float, default=tmax)
    p.add_argument("--tn", type=int, default=tn)
    p.add_argument("--tscale", choices=("linear", "log"), default="linear")


def _endpoint_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta-f", type=float, default=None, help="endpoint for css/twoaxis")
    p.add_argument("--Theta-f", dest="Theta_f", type=float, default=None, help="endpoint for oneaxis")
    p.add_argument("--phi", type=float, default=None)


def _endpoint_range(p: argparse.ArgumentParser) -> None:
    p.add_argument("--emin", type=float, default=0.0)
    p.add_argument("--emax", type=float, default=None)
    p.add_argument("--en", type=int, default=100)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geomphase", description="Geometric phases of thermal spin states.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("uhlmann", help="Uhlmann phase versus temperature")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--theta", type=float, default=np.pi / 2, help="latitude of the CSS loop")
    _temperature_range(p)
    _common(p)

    p = sub.add_parser("igp", help="interferometric phase versus temperature or endpoint")
    p.add_argument("family", choices=FAMILIES)
    _endpoint_args(p)
    p.add_argument("--temperature", type=float, default=None, help="fix T and sweep the endpoint instead")
    _endpoint_range(p)
    _temperature_range(p)
    _common(p)

    p = sub.add_parser("critical", help="locate a phase jump by bisection")
    p.add_argument("quantity", choices=("uhlmann", "igp"))
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--theta", type=float, default=np.pi / 2)
    p.add_argument("--temperature", type=float, default=None, help="fix T and bisect on the endpoint")
    _endpoint_args(p)
    _common(p)

    p = sub.add_parser("grid", help="IGP on a temperature x endpoint lattice")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--phi", type=float, default=None)
    _endpoint_range(p)
    _temperature_range(p, tn=50)
    _common(p)

    p = sub.add_parser("check", help="transport and convergence diagnostics")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--temperature", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=np.pi / 2)
    _endpoint_args(p)
    _common(p)
    return parser


_MAX_ENDPOINT = {"css": np.pi - 1e-6, "oneaxis": 4 * np.pi, "twoaxis": igp.TWO_AXIS_MAX_THETA}
_DEFAULT_ENDPOINT = {"css": 3 * np.pi / 4, "oneaxis": 4 * np.pi, "twoaxis": np.pi / 2}


def _endpoint(args) -> float | None:
    return args.Theta_f if args.family == "oneaxis" and args.Theta_f is not None else args.theta_f


def _base(args, quantity: str, **kw) -> dict:
    return dict(
        quantity=quantity,
        family=args.family,
        two_j=args.two_j,
        omega0=args.omega0,
        n_steps=args.steps,
        refine=args.refine,
        method=args.method,
        jump_threshold=args.jump_threshold,
        **kw,
    )


def _run_uhlmann(args) -> int:
    spec = SweepSpec(
        lo=args.tmin, hi=args.tmax, n=args.tn, scale=args.tscale, theta=args.theta, **_base(args, "uhlmann")
    )
    export(sweep(spec, args.workers), args.format, args.out)
    return EXIT_OK


def _run_igp(args) -> int:
    endpoint = _endpoint(args)
    if args.temperature is not None:
        hi = args.emax if args.emax is not None else _MAX_ENDPOINT[args.family]
        spec = SweepSpec(
            lo=args.emin, hi=hi, n=args.en, axis="endpoint", temperature=args.temperature, phi=args.phi,
            **_base(args, "igp"),
        )
    else:
        if endpoint is None:
            endpoint = _DEFAULT_ENDPOINT[args.family]
        spec = SweepSpec(
            lo=args.tmin, hi=args.tmax, n=args.tn, scale=args.tscale, endpoint=endpoint, phi=args.phi,
            **_base(args, "igp"),
        )
    export(sweep(spec, args.workers), args.format, args.out)
    return EXIT_OK


def _run_critical(args) -> int:
    if args.quantity == "igp" and args.temperature is not None:
        spec = SweepSpec(
            lo=args.lo, hi=args.hi, n=2, axis="endpoint", temperature=args.temperature, phi=args.phi,
            **_base(args, "igp"),
        )
    else:
        endpoint = _endpoint(args)
        if args.quantity == "igp" and endpoint is None:
            endpoint = _DEFAULT_ENDPOINT[args.family]
        spec = SweepSpec(
            lo=args.lo, hi=args.hi, n=2, theta=args.theta, endpoint=endpoint, phi=args.phi,
            **_base(args, args.quantity),
        )
    value = find_critical(spec, (args.lo, args.hi), args.tol)
    _write(format(value, ".12g") + "\n" if args.format == "csv" else json.dumps({"critical": value}) + "\n", args.out)
    return EXIT_OK


def _run_grid(args) -> int:
    hi = args.emax if args.emax is not None else _MAX_ENDPOINT[args.family]
    spec = SweepSpec(
        lo=args.emin, hi=hi, n=args.en, axis="endpoint", temperature=args.tmin, phi=args.phi,
        **_base(args, "igp"),
    )
    if args.tscale == "log":
        temps = np.geomspace(args.tmin, args.tmax, args.tn)
    else:
        temps = np.linspace(args.tmin, args.tmax, args.tn)
    export(grid(spec, temps, args.workers), args.format, args.out)
    return EXIT_OK


def _run_check(args) -> int:
    """Transport residuals of the IGP path and Trotter convergence of the Uhlmann loop."""
    beta = 1.0 / args.temperature
    j = SpinJ(args.two_j) if args.two_j is not None else None
    endpoint = _endpoint(args)
    if endpoint is None:
        endpoint = _DEFAULT_ENDPOINT[args.family]
    ev = igp.EvolutionSpec(args.family, endpoint, args.phi, args.steps, j)
    report = igp.transport_report(ev, beta, args.omega0)

    if args.family == "css":
        res = uhlmann.uhlmann_css(ev.j, args.theta, beta, args.omega0, args.steps, refine=True)
    elif args.family == "oneaxis":
        res = uhlmann.uhlmann_one_axis(beta, args.omega0, args.steps, refine=True)
    else:
        res = uhlmann.uhlmann_two_axis(beta, args.omega0, args.steps, refine=True)

    ok = max(report.weak_residual, report.strong_residual) < igp.TRANSPORT_TOL and abs(report.dynamic_phase) < 1e-6
    doc = {
        "family": args.family,
        "two_j": ev.j.two_j,
        "temperature": args.temperature,
        "endpoint": endpoint,
        "transport": {
            "weak_residual": report.weak_residual,
            "strong_residual": report.strong_residual,
            "dynamic_phase": report.dynamic_phase,
            "ok": ok,
        },
        "uhlmann": {"phase": res.phase, "n_steps": res.n_steps, "converged": res.converged},
    }
    _write(json.dumps(doc, indent=2) + "\n", args.out)
    if not ok:
        raise TransportViolationError("transport check failed", max(report.weak_residual, report.strong_residual))
    return EXIT_OK


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)


_COMMANDS = {
    "uhlmann": _run_uhlmann,
    "igp": _run_igp,
    "critical": _run_critical,
    "grid": _run_grid,
    "check": _run_check,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InvalidSpecError, ValueError) as exc:
        sys.stderr.write(f"geomphase: invalid input: {exc}\n")
        return EXIT_INVALID
    except (NumericalError, ArithmeticError) as exc:
        sys.stderr.write(f"geomphase: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"geomphase: I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

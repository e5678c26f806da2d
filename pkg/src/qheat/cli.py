"""Command-line front end emitting distributions, cumulant traces and
verification reports as deterministic CSV/JSON.

Exit codes: 0 ok, 1 usage error, 2 numeric failure, 3 verification failure.
All numbers are serialized with round-trip-exact decimal formatting, so
identical flags produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import QHeatError
from .heatstats import (
    asymptotic_distribution,
    classical_density,
    cumulant_trace,
    default_k_max,
    invert_charfn,
    isothermal_distribution,
    low_temperature_distribution,
)
from .model import ModelParams
from .verify import CHECKS, run_suite


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_tau(text: str) -> float:
    if text == "inf":
        return math.inf
    try:
        tau = float(text)
    except ValueError:
        raise UsageError(f"invalid --tau value {text!r}") from None
    if tau < 0 or math.isnan(tau):
        raise UsageError("--tau must be >= 0 or 'inf'")
    return tau


def _parse_kmax(text: str, params: ModelParams) -> int:
    if text == "auto":
        return default_k_max(params)
    try:
        k = int(text)
    except ValueError:
        raise UsageError(f"invalid --kmax value {text!r}") from None
    if k < 1:
        raise UsageError("--kmax must be >= 1 or 'auto'")
    return k


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _metadata(params: ModelParams, mode: str, k_max: int, truncation_error: float) -> dict:
    return {
        "tool": "qheat",
        "version": __version__,
        "mode": mode,
        "beta1": params.beta1,
        "beta2": params.beta2,
        "hbar_omega": params.hbar_omega,
        "tau": "inf" if math.isinf(params.tau) else params.tau,
        "k_max": k_max,
        "truncation_error": truncation_error,
        "sign_convention": "Q > 0 means energy gained by the oscillator",
    }


def cmd_dist(args) -> int:
    tau = _parse_tau(args.tau)
    params = ModelParams(beta1=args.beta1, beta2=args.beta2, tau=tau, hbar_omega=args.hbar_omega)
    k_max = _parse_kmax(args.kmax, params)
    mode = args.mode

    if mode == "exact":
        if tau == 0.0:
            dist = invert_charfn(params, k_max=k_max)
        elif math.isinf(tau):
            dist = asymptotic_distribution(params, k_max=k_max)  # avoids e^{-inf} churn
        else:
            dist = invert_charfn(params, k_max=k_max)
    elif mode == "asymptotic":
        dist = asymptotic_distribution(params, k_max=k_max)
    elif mode == "isothermal":
        if params.beta1 != params.beta2:
            raise UsageError("isothermal mode requires --beta1 == --beta2")
        dist = isothermal_distribution(params.beta1, k_max=k_max, hbar_omega=params.hbar_omega)
    elif mode == "lowtemp":
        dist = low_temperature_distribution(params)
    elif mode == "classical":
        dist = None
    else:  # pragma: no cover - argparse choices guard this
        raise UsageError(f"unknown mode {mode!r}")

    if mode == "classical":
        density = classical_density(params)
        rows = []
        for k in range(-k_max, k_max + 1):
            q = k * params.hbar_omega
            env = density(q)
            rows.append({"k": k, "Q": q, "P": env * params.hbar_omega, "envelope": env})
        header = "k,Q,P,envelope"
        csv_lines = [header] + [
            f"{r['k']},{_fmt(r['Q'])},{_fmt(r['P'])},{_fmt(r['envelope'])}" for r in rows
        ]
        meta = _metadata(params, mode, k_max, 0.0)
    else:
        rows = [
            {"k": k, "Q": k * params.hbar_omega, "P": p} for k, p in dist.sorted_items()
        ]
        header = "k,Q,P"
        csv_lines = [header] + [f"{r['k']},{_fmt(r['Q'])},{_fmt(r['P'])}" for r in rows]
        meta = _metadata(params, mode, k_max, dist.truncation_error)

    if args.format == "csv":
        _emit("\n".join(csv_lines) + "\n", args.out)
    else:
        _emit(json.dumps({"metadata": meta, "rows": rows}, indent=2) + "\n", args.out)
    return 0


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("--tau-grid must be start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"invalid --tau-grid {text!r}") from None
    if start < 0 or step <= 0 or stop < start:
        raise UsageError("--tau-grid must be ascending with step > 0 and start >= 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def cmd_cumulants(args) -> int:
    params = ModelParams(beta1=args.beta1, beta2=args.beta2, tau=0.0, hbar_omega=args.hbar_omega)
    grid = _parse_grid(args.tau_grid)
    trace = cumulant_trace(params, grid)
    lines = ["tau,mean,variance,mean_inf,variance_inf"]
    for i, t in enumerate(trace.tau_grid):
        lines.append(
            ",".join(
                [
                    _fmt(t),
                    _fmt(trace.mean[i]),
                    _fmt(trace.variance[i]),
                    _fmt(trace.mean_inf),
                    _fmt(trace.variance_inf),
                ]
            )
        )
    if args.format == "csv":
        _emit("\n".join(lines) + "\n", args.out)
    else:
        payload = {
            "metadata": {
                "tool": "qheat",
                "version": __version__,
                "beta1": params.beta1,
                "beta2": params.beta2,
                "hbar_omega": params.hbar_omega,
                "tau_grid": args.tau_grid,
            },
            "rows": [
                {
                    "tau": float(trace.tau_grid[i]),
                    "mean": float(trace.mean[i]),
                    "variance": float(trace.variance[i]),
                    "mean_inf": trace.mean_inf,
                    "variance_inf": trace.variance_inf,
                }
                for i in range(len(trace.tau_grid))
            ],
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    if args.suite == "all":
        names = None
    else:
        names = args.suite.split(",")
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise UsageError(
                f"unknown check name(s): {', '.join(unknown)}; "
                f"known: {', '.join(sorted(CHECKS))}"
            )
    report = run_suite(names=names, profile=args.tol_profile)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0 if report["all_pass"] else 3


def build_parser() -> _Parser:
    parser = _Parser(prog="qheat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qheat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p):
        p.add_argument("--beta1", type=float, required=True, help="beta1 * hbar * omega")
        p.add_argument("--beta2", type=float, required=True, help="beta2 * hbar * omega")
        p.add_argument("--hbar-omega", type=float, default=1.0, dest="hbar_omega")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p_dist = sub.add_parser("dist", help="emit a heat distribution")
    add_model_flags(p_dist)
    p_dist.add_argument("--tau", required=True, help="dimensionless time, or 'inf'")
    p_dist.add_argument("--kmax", default="auto", help="lattice half-width or 'auto'")
    p_dist.add_argument(
        "--mode",
        choices=("exact", "asymptotic", "isothermal", "classical", "lowtemp"),
        default="exact",
    )
    p_dist.set_defaults(func=cmd_dist)

    p_cum = sub.add_parser("cumulants", help="emit mean/variance over a tau grid")
    add_model_flags(p_cum)
    p_cum.add_argument("--tau-grid", required=True, dest="tau_grid", help="start:stop:step")
    p_cum.set_defaults(func=cmd_cumulants)

    p_ver = sub.add_parser("verify", help="run the verification suite")
    p_ver.add_argument("--suite", default="all", help="'all' or comma-separated check names")
    p_ver.add_argument(
        "--tol-profile", choices=("default", "strict"), default="default", dest="tol_profile"
    )
    p_ver.add_argument("--out", default=None)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"qheat: error: {exc}", file=sys.stderr)
        return 1
    except QHeatError as exc:
        print(f"qheat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"qheat: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

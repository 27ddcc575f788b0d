"""Command-line front end: ``lattc <command> [flags]``.

Exit codes: 0 success, 1 ``etacheck`` disagreement, 2 bad arguments
(usage on stderr), 3 numerical failure (JSON diagnostic on stdout).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import __version__
from .errors import DomainError, LatticeError, NumericFailure, UnknownLattice
from .eta import (
    EtaParams,
    casimir_delta,
    casimir_delta_bessel,
    eta_limit_experiment,
    log_eta_product,
    log_eta_series,
    rows_to_csv,
)
from .lattice import PeriodicSequence, load_lattice, named_lattice, rescale_to_covolume
from .llog import AffineGrowth, exp_sequence, log_lattice, log_sequence, pair_energy
from .optimize import (
    ModularPoint,
    default_seed,
    make_objective,
    maximize_2d,
    multistart_2d,
    optimize_sequence_1d,
    scan_2d,
)
from .special import epstein_zeta, theta

NAMED = ("zd:1", "zd:2", "zd:3", "square", "triangular", "e8")
OBJECTIVES = ("theta", "neg_theta", "llog", "pair_llog", "log_eta")


class UsageError(Exception):
    pass


# ------------------------------------------------------------ flag parsing


def _float_type(name, check, what):
    def conv(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not math.isfinite(v) or not check(v):
            raise argparse.ArgumentTypeError(f"{name} must be {what}, got {text!r}")
        return v

    conv.__name__ = name
    return conv


positive = _float_type("positive", lambda v: v > 0, "positive")
unit_open = _float_type("unit", lambda v: 0 < v < 1, "inside (0, 1)")
real = _float_type("real", lambda v: True, "finite")


def positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def float_list(text):
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    return vals


def load_lattice_flag(spec: str, covolume: float | None = None):
    """``zd:<d>``, ``square``, ``triangular``, ``e8`` or ``file:<path>``, optionally rescaled."""
    if spec.startswith("file:"):
        try:
            lat = load_lattice(spec[5:])
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read lattice {spec!r}: {exc}") from exc
    else:
        try:
            lat = named_lattice(spec)
        except UnknownLattice as exc:
            raise UsageError(f"unknown lattice {exc}; expected zd:<d>, square, triangular, e8 or file:<path>") from exc
    if covolume is not None:
        lat = rescale_to_covolume(lat, covolume)
    return lat


def _common(p: argparse.ArgumentParser, lattice: bool = True, fmt_default: str = "json"):
    if lattice:
        p.add_argument("--lattice", default="zd:2", help="zd:<d>, square, triangular, e8 or file:<path>")
    p.add_argument("--covolume", type=positive, default=None, help="rescale to this covolume")
    p.add_argument("--tol", type=positive, default=1e-10, help="tolerance for lattice sums")
    p.add_argument("--format", choices=("json", "csv", "plain"), default=fmt_default)
    p.add_argument("--threads", type=positive_int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default $LATTC_SEED or 42)")


def _eta_flags(p):
    p.add_argument("--partner", default=None, help="second lattice Lam (default: same as --lattice)")
    p.add_argument("--m", type=positive, default=1.0)
    p.add_argument("--t", type=positive, default=1.0)
    p.add_argument("--quad-tol", type=positive, default=1e-8)
    p.add_argument("--series-factor", type=real, default=0.5)


def _objective_flags(p):
    p.add_argument("--objective", choices=OBJECTIVES, required=True)
    p.add_argument("--alpha", type=positive, default=1.0)
    p.add_argument("--x", type=unit_open, default=0.5)
    p.add_argument("--a", type=positive, default=math.pi, help="pair_llog: f(r) = a + b r")
    p.add_argument("--b", type=positive, default=math.pi)
    p.add_argument("--fixed", default=None, help="pair_llog: fixed lattice L (default: tied)")
    p.add_argument("--partner", default=None, help="log_eta: fixed partner lattice (default: tied)")
    p.add_argument("--moving", choices=("lam", "lat"), default="lam")
    p.add_argument("--m", type=positive, default=1.0)
    p.add_argument("--t", type=positive, default=1.0)
    p.add_argument("--quad-tol", type=positive, default=1e-8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattc", description="Lattice special functions and shape optimisation.")
    parser.add_argument("--version", action="version", version=f"lattc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("theta", help="theta_L(alpha)")
    _common(p)
    p.add_argument("--alpha", type=positive, required=True)

    p = sub.add_parser("zeta", help="Epstein zeta_L(s), s > d")
    _common(p)
    p.add_argument("--s", type=positive, required=True)

    p = sub.add_parser("llog", help="lattice-logarithm log_L(x)")
    _common(p)
    p.add_argument("--x", type=unit_open, required=True)

    for name, xtype, helptext in (("seqlog", unit_open, "periodic-sequence logarithm"), ("seqexp", positive, "periodic-sequence exponential")):
        p = sub.add_parser(name, help=helptext)
        _common(p, lattice=False)
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--points", type=float_list, help="t_1,...,t_N (sorted, span < N)")
        g.add_argument("--N", type=positive_int, help="equidistant sequence 0, 1, ..., N-1")
        p.add_argument("--x", type=xtype, required=True)
        p.add_argument("--multiplier", type=real, default=1.0)

    p = sub.add_parser("pair", help="two-lattice energy E_f[L, Lam] with f(r) = a + b r")
    _common(p)
    p.add_argument("--partner", default=None, help="Lam (default: same as --lattice)")
    p.add_argument("--a", type=positive, default=math.pi)
    p.add_argument("--b", type=positive, default=math.pi)
    p.add_argument("--mode", choices=("swapped", "direct"), default="swapped")

    p = sub.add_parser("delta", help="Casimir exponent Delta_m(L)")
    _common(p)
    p.add_argument("--m", type=positive, required=True)
    p.add_argument("--scheme", choices=("adaptive", "panels", "bessel"), default="adaptive")
    p.add_argument("--quad-tol", type=positive, default=1e-8)

    p = sub.add_parser("eta", help="log of the deformed eta E_{L,Lam}^(m)(it)")
    _common(p)
    _eta_flags(p)
    p.add_argument("--form", choices=("product", "series"), default="product")

    p = sub.add_parser("etacheck", help="product form against series form")
    _common(p)
    _eta_flags(p)

    p = sub.add_parser("etalimit", help="(2 pi m t)^(-1/2) E_{Z,Z}^(m)(it) against eta(it)")
    _common(p, lattice=False, fmt_default="csv")
    p.add_argument("--t", type=positive, default=1.0)
    p.add_argument("--m", type=float_list, default=[0.5, 0.2, 0.1, 0.05])
    p.add_argument("--quad-tol", type=positive, default=1e-8)

    p = sub.add_parser("scan2d", help="objective over a grid of the fundamental domain")
    _common(p, lattice=False, fmt_default="csv")
    _objective_flags(p)
    p.add_argument("--grid", type=positive_int, default=40)
    p.add_argument("--y-max", type=positive, default=2.0)

    p = sub.add_parser("opt2d", help="compass search over planar lattice shapes")
    _common(p, lattice=False)
    _objective_flags(p)
    p.add_argument("--start", type=float_list, default=None, help="x,y (default: seeded random starts)")
    p.add_argument("--restarts", type=positive_int, default=10)
    p.add_argument("--opt-tol", type=positive, default=1e-6)

    p = sub.add_parser("opt1d", help="optimise a periodic sequence of period N")
    _common(p, lattice=False)
    p.add_argument("--N", type=positive_int, required=True)
    p.add_argument("--x", type=unit_open, required=True)
    p.add_argument("--restarts", type=positive_int, default=10)
    p.add_argument("--opt-tol", type=positive, default=1e-9)

    p = sub.add_parser("lattices", help="list the named lattices")
    _common(p, lattice=False)
    for name, p in sub.choices.items():
        p.set_defaults(usage=p.format_usage())
    return parser


# ---------------------------------------------------------------- output


def _flat(v):
    return json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v


def render(payload, fmt: str) -> str:
    """Deterministic text for a dict, or a list of dicts with equal keys."""
    if isinstance(payload, str):
        return payload
    if fmt == "json":
        return json.dumps(payload, sort_keys=True) + "\n"
    rows = payload if isinstance(payload, list) else [payload]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = sorted(rows[0]) if rows else []
        w.writerow(keys)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else _flat(v) for v in (r[k] for k in keys)])
        return buf.getvalue()
    lines = []
    for r in rows:
        lines.extend(f"{k}: {_flat(r[k])}" for k in sorted(r))
        if len(rows) > 1:
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


# -------------------------------------------------------------- commands


def _objective(args):
    V = args.covolume or 1.0
    k = args.objective
    if k in ("theta", "neg_theta"):
        return make_objective(k, V, args.tol, alpha=args.alpha)
    if k == "llog":
        return make_objective(k, V, args.tol, x=args.x)
    if k == "pair_llog":
        fixed = load_lattice_flag(args.fixed, args.covolume) if args.fixed else None
        if fixed is not None and fixed.dim != 2:
            raise UsageError("--fixed must be a planar lattice")
        return make_objective(k, V, args.tol, a=args.a, b=args.b, fixed=fixed)
    partner = load_lattice_flag(args.partner, args.covolume) if args.partner else None
    if partner is not None and partner.dim != 2:
        raise UsageError("--partner must be a planar lattice")
    return make_objective(k, V, args.tol, m=args.m, t=args.t, quad_tol=args.quad_tol, partner=partner, moving=args.moving)


def _sequence(args):
    if args.points is not None:
        try:
            return PeriodicSequence(tuple(args.points))
        except ValueError as exc:
            raise UsageError(f"--points: {exc}") from exc
    return PeriodicSequence.equidistant(args.N)


def _eta_pair(args):
    lat = load_lattice_flag(args.lattice, args.covolume)
    lam = load_lattice_flag(args.partner, args.covolume) if args.partner else lat
    if lam.dim != lat.dim:
        raise UsageError("--partner must have the same dimension as --lattice")
    params = EtaParams(args.m, args.t, tol=args.tol, quad_tol=args.quad_tol, series_factor=args.series_factor)
    return lat, lam, params


def dispatch(args):
    """Run a parsed command; returns ``(payload, exit_code)``."""
    cmd = args.command
    if cmd == "theta":
        lat = load_lattice_flag(args.lattice, args.covolume)
        return theta(lat, args.alpha, args.tol).to_dict(), 0
    if cmd == "zeta":
        lat = load_lattice_flag(args.lattice, args.covolume)
        if not args.s > lat.dim:
            raise UsageError(f"--s must exceed the dimension {lat.dim}")
        return epstein_zeta(lat, args.s, args.tol).to_dict(), 0
    if cmd == "llog":
        lat = load_lattice_flag(args.lattice, args.covolume)
        return log_lattice(lat, args.x, args.tol).to_dict(), 0
    if cmd == "seqlog":
        seq = _sequence(args)
        return log_sequence(seq, args.x, args.tol, args.multiplier).to_dict(), 0
    if cmd == "seqexp":
        seq = _sequence(args)
        return exp_sequence(seq, args.x, args.tol, args.multiplier).to_dict(), 0
    if cmd == "pair":
        lat = load_lattice_flag(args.lattice, args.covolume)
        lam = load_lattice_flag(args.partner, args.covolume) if args.partner else lat
        if lam.dim != lat.dim:
            raise UsageError("--partner must have the same dimension as --lattice")
        a, b = args.a, args.b
        res = pair_energy(lat, lam, lambda r: a + b * r, AffineGrowth(a, b), mode=args.mode, tol=args.tol)
        return res.to_dict(), 0
    if cmd == "delta":
        lat = load_lattice_flag(args.lattice, args.covolume)
        if args.scheme == "bessel":
            return {"value": casimir_delta_bessel(lat, args.m, args.quad_tol), "scheme": "bessel"}, 0
        out = casimir_delta(lat, args.m, args.quad_tol, scheme=args.scheme).to_dict()
        out["scheme"] = args.scheme
        return out, 0
    if cmd == "eta":
        lat, lam, params = _eta_pair(args)
        fn = log_eta_product if args.form == "product" else log_eta_series
        out = fn(lat, lam, params).to_dict()
        out["form"] = args.form
        return out, 0
    if cmd == "etacheck":
        return _etacheck(args)
    if cmd == "etalimit":
        if any(m <= 0 for m in args.m):
            raise UsageError("--m values must be positive")
        rows = eta_limit_experiment(args.t, args.m, tol=args.tol, quad_tol=args.quad_tol)
        if args.format == "csv":
            return rows_to_csv(rows), 0
        return [{"m": r.m, "normalized_value": r.normalized_value, "eta_reference": r.eta_reference, "deviation": r.deviation} for r in rows], 0
    if cmd == "scan2d":
        obj = _objective(args)
        res = scan_2d(obj, args.grid, args.y_max, workers=args.threads)
        if args.format == "csv":
            return res.to_csv(), 0
        i, j = res.best_index
        x, y = res.best_point
        return {"objective": obj.kind, "grid": args.grid, "best_index": [i, j], "best_point": {"x": x, "y": y}, "best_value": float(res.values[i, j])}, 0
    if cmd == "opt2d":
        obj = _objective(args)
        if args.start is not None:
            if len(args.start) != 2 or not args.start[1] > 0:
                raise UsageError("--start needs x,y with y > 0")
            reps = [maximize_2d(obj, ModularPoint(*args.start), tol=args.opt_tol)]
        else:
            reps = multistart_2d(obj, args.restarts, args.seed, tol=args.opt_tol)
        sign = -1.0 if obj.sense == "min" else 1.0
        best = max(reps, key=lambda r: sign * r.value)
        out = best.to_dict()
        out["starts"] = len(reps)
        out["runs"] = [r.to_dict()["argpoint"] for r in reps]
        out["seed"] = default_seed() if args.seed is None else args.seed
        return out, 0
    if cmd == "opt1d":
        rep = optimize_sequence_1d(args.N, args.x, args.restarts, args.opt_tol, seed=args.seed)
        out = rep.to_dict()
        out["seed"] = default_seed() if args.seed is None else args.seed
        return out, 0
    if cmd == "lattices":
        rows = []
        for name in NAMED:
            lat = named_lattice(name, args.covolume or 1.0)
            rows.append({"name": name, "dim": lat.dim, "covolume": lat.covolume, "first_minimum": lat.first_minimum()})
        return rows, 0
    raise UsageError(f"unknown command {cmd!r}")


def _etacheck(args):
    lat, lam, params = _eta_pair(args)
    prod = log_eta_product(lat, lam, params)
    ser = log_eta_series(lat, lam, params)
    # implied factor: the series weight that would make both forms agree
    first = math.pi * params.t ** (0.5 * (lat.dim + 1)) * casimir_delta(lat, params.m, params.quad_tol).value
    unit = log_eta_series(lat, lam, EtaParams(params.m, params.t, params.tol, params.quad_tol, 1.0))
    implied = (prod.value - first) / (unit.value - first) if unit.value != first else math.nan
    diff = prod.value - ser.value
    combined = prod.tail_bound + ser.tail_bound + 2 * params.tol
    ok = bool(abs(diff) <= combined)
    out = {
        "product": prod.value,
        "series": ser.value,
        "difference": diff,
        "combined_tolerance": combined,
        "series_factor": params.series_factor,
        "implied_factor": implied,
        "within_tolerance": ok,
    }
    return out, 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 with usage on bad flags
    try:
        payload, code = dispatch(args)
    except (UsageError, DomainError) as exc:
        sys.stderr.write(args.usage)
        print(f"lattc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        diag = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        sys.stdout.write(json.dumps(diag, sort_keys=True) + "\n")
        return 3
    except LatticeError as exc:
        sys.stderr.write(args.usage)
        print(f"lattc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render(payload, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())

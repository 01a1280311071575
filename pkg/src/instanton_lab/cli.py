"""Command-line front end: every verification as a reproducible report.

Each subcommand runs one verification suite and writes a canonical JSON
(or CSV) report: top-level keys ``command, params, results, residuals,
verdict, runtime_ms, version``, sorted keys, floats at 17 significant
digits.  Identical invocations produce byte-identical files; wall-clock
timing therefore goes to stderr and is embedded in the file only on
request (``--embed-runtime``).

Exit codes: 0 verified, 1 verification failed or inconclusive, 2 usage
errors.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import __version__
from .background import (KERR, TAUB_BOLT, Background, ChartPoint,
                         chart_regularity_probe, identification_lattice,
                         metric_eval, tetrad_gram, TETRAD_GRAM)
from .angular import angular_spectrum, fd_oracle_spectrum, operator_residual
from .np_formalism import (a1_identity_check, np_residuals, ricci_max_abs,
                           spin_coeffs_closed, spin_coeffs_numeric,
                           weyl_scalars_closed, weyl_scalars_numeric)
from .radial import (asymptotic_normal_solution, frobenius_series,
                     singular_points, smooth_exponent)
from .separation import ModeIndex, lattice_contains, mode_lattice
from .stability import mode_scan, negativity_certificate


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------


def _fmt_float(x):
    if isinstance(x, float):
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    return None


def canonical_json(obj, indent=0):
    """Deterministic JSON: sorted keys, fixed 17-significant-digit floats."""
    pad = "  " * indent
    pad_in = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj):
            items.append(f'{pad_in}"{key}": {canonical_json(obj[key], indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad_in}{canonical_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (np.floating,)):
        return _fmt_float(float(obj))
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, complex):
        return canonical_json({"re": obj.real, "im": obj.imag}, indent)
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _csv_cell(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def scan_rows_csv(report):
    header = ["m", "omega", "tilded", "lambda_index", "Lambda",
              "wronskian_abs", "wronskian_rel", "energy", "verdict", "note"]
    lines = [",".join(header)]
    for row in sorted(report.rows, key=lambda r: r.key()):
        lines.append(",".join(_csv_cell(getattr(row, h)) for h in header))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------


def _add_background_args(p):
    p.add_argument("--background", required=True, choices=["kerr", "taubbolt"])
    p.add_argument("--M", type=float, default=1.0, help="Kerr mass (default 1)")
    p.add_argument("--a", type=float, default=0.0, help="Kerr rotation (default 0)")
    p.add_argument("--N", type=float, default=1.0, help="Taub-bolt parameter (default 1)")


def _add_common_args(p):
    p.add_argument("--out", default=None, help="report file path")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embed-runtime", action="store_true",
                   help="embed wall-clock in the report file (breaks "
                        "byte-determinism of repeated runs)")


def _background(args):
    if args.background == "kerr":
        return Background.kerr(args.M, args.a)
    return Background.taub_bolt(args.N)


def _params_echo(args):
    skip = {"func", "out", "embed_runtime"}
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and not callable(v)}


def _random_points(bg, count, rng):
    pts = []
    for _ in range(count):
        r = bg.r_inner + math.exp(rng.uniform(math.log(0.05), math.log(4.0)))
        theta = rng.uniform(0.2, math.pi - 0.2)
        pts.append(ChartPoint(rng.uniform(0.0, 5.0), r, theta,
                              rng.uniform(0.0, 2.0 * math.pi)))
    return pts


# ---------------------------------------------------------------------------
# Subcommand bodies: each returns (results, residuals, verdict)
# ---------------------------------------------------------------------------


def cmd_np_check(args):
    bg = _background(args)
    rng = np.random.default_rng(args.seed)
    worst = {"coefficient_match": 0.0, "commutators": 0.0, "vacuum": 0.0,
             "bianchi": 0.0, "a1": 0.0, "extraction_fit": 0.0}
    for p in _random_points(bg, args.points, rng):
        closed = spin_coeffs_closed(bg, p)
        numeric, fit = spin_coeffs_numeric(bg, p)
        diff = max(abs(v - numeric.as_dict()[k])
                   for k, v in closed.as_dict().items())
        worst["coefficient_match"] = max(worst["coefficient_match"], diff)
        worst["extraction_fit"] = max(worst["extraction_fit"], fit)
        rep = np_residuals(bg, p)
        worst["commutators"] = max(worst["commutators"], max(rep.commutators.values()))
        worst["vacuum"] = max(worst["vacuum"], max(rep.vacuum.values()))
        worst["bianchi"] = max(worst["bianchi"], max(rep.bianchi.values()))
        worst["a1"] = max(worst["a1"], a1_identity_check(bg, p),
                          a1_identity_check(bg, p, tilded=True))
    ok = (max(worst["commutators"], worst["vacuum"], worst["bianchi"]) < 1e-8
          and worst["coefficient_match"] < 1e-8 and worst["a1"] < 1e-9)
    return {"points": args.points}, worst, "verified" if ok else "failed"


def cmd_weyl(args):
    bg = _background(args)
    rng = np.random.default_rng(args.seed)
    worst = {"psi2_match": 0.0, "extreme_weight": 0.0, "conjugation": 0.0,
             "ricci": 0.0, "gram": 0.0}
    for p in _random_points(bg, args.points, rng):
        numeric = weyl_scalars_numeric(bg, p)
        closed = weyl_scalars_closed(bg, p)
        worst["psi2_match"] = max(worst["psi2_match"],
                                  abs(numeric.psi2 - closed.psi2),
                                  abs(numeric.psi2_t - closed.psi2_t))
        worst["extreme_weight"] = max(
            worst["extreme_weight"],
            *(abs(getattr(numeric, k)) for k in
              ("psi0", "psi1", "psi3", "psi4",
               "psi0_t", "psi1_t", "psi3_t", "psi4_t")))
        worst["conjugation"] = max(
            worst["conjugation"],
            abs(np.conj(numeric.psi0) - numeric.psi4),
            abs(np.conj(numeric.psi1) - numeric.psi3),
            abs(numeric.psi2.imag))
        worst["ricci"] = max(worst["ricci"], ricci_max_abs(bg, p))
        worst["gram"] = max(worst["gram"], float(np.max(np.abs(
            tetrad_gram(bg, p) - TETRAD_GRAM))))
    ok = worst["psi2_match"] < 1e-8 and worst["extreme_weight"] < 1e-9
    return {"points": args.points}, worst, "verified" if ok else "failed"


def cmd_lattice(args):
    bg = _background(args)
    gens = identification_lattice(bg)
    convention = "paper" if args.paper_lattice else "invariance"
    results = {"generators": [list(gens.gen1), list(gens.gen2)],
               "convention": convention}
    if args.omega is not None:
        accepted = lattice_contains(bg, args.m, args.omega, convention)
        results["m"] = args.m
        results["omega"] = args.omega
        results["accepted"] = accepted
        return results, {}, "verified" if accepted else "failed"
    modes = mode_lattice(bg, [args.m], range(args.n_min, args.n_max + 1),
                         convention)
    results["modes"] = [{"m": md.m, "omega": md.omega, "n": md.n}
                        for md in modes]
    return results, {}, "verified"


def cmd_angular(args):
    bg = _background(args)
    mode = ModeIndex(bg.kind, args.m, args.omega)
    pairs = angular_spectrum(bg, mode, args.count, tilded=args.tilded)
    oracle = fd_oracle_spectrum(bg, mode, args.count, n=args.oracle_n,
                                tilded=args.tilded)
    residual = max(operator_residual(bg, mode, p) for p in pairs)
    lams = [p.Lambda for p in pairs]
    results = {"Lambda": lams, "fd_oracle": list(map(float, oracle)),
               "indices": [pairs[0].alpha, pairs[0].beta]}
    residuals = {"operator": residual,
                 "oracle_gap": float(np.max(np.abs(np.array(lams) - oracle)))}
    ok = residual < 1e-6
    return results, residuals, "verified" if ok else "failed"


def cmd_radial(args):
    bg = _background(args)
    lam = _resolve_lambda(bg, args)
    mode = ModeIndex(bg.kind, args.m, args.omega, lam)
    pts = singular_points(bg, mode, tilded=args.tilded)
    results = {"singular_points": [
        {"location": p.location, "type": p.type_tag,
         "paper_exponents": [_c2d(e) for e in p.paper_exponents],
         "oracle_exponents": [_c2d(e) for e in p.oracle_exponents]}
        for p in pts]}
    residuals = {}
    if mode.omega != 0.0:
        asym = asymptotic_normal_solution(bg, mode, -1, tilded=args.tilded)
        results["decaying_branch"] = {"rate": asym.rate, "power": asym.power,
                                      "paper_power": asym.paper_power}
        rho = smooth_exponent(bg, mode, tilded=args.tilded)
        series = frobenius_series(bg, mode, bg.r_inner, rho, tilded=args.tilded)
        r_probe = bg.r_inner + 0.01 * (bg.r_plus - bg.r_minus)
        import instanton_lab.hyperdual as hd
        from .separation import potential_u
        R, dR = series.eval(r_probe)
        h = 1e-6
        Rp, dp = series.eval(r_probe + h)
        Rm, dm = series.eval(r_probe - h)
        ode_res = abs((bg.delta(r_probe + h) * dp - bg.delta(r_probe - h) * dm)
                      / (2 * h)
                      + potential_u(bg, mode, r_probe, tilded=args.tilded) * R)
        results["inner_exponent"] = rho
        residuals["frobenius_ode"] = float(ode_res)
    return results, residuals, "verified"


def cmd_certify(args):
    bg = _background(args)
    lam = _resolve_lambda(bg, args)
    mode = ModeIndex(bg.kind, args.m, args.omega, lam)
    flags = [(mode, False)]
    if bg.kind == TAUB_BOLT:
        flags.append((mode, True))
    report = negativity_certificate(bg, flags, seed=args.seed)
    results = {"entries": [
        {"tilded": e.tilded, "sup": e.grid_sup, "margin": e.margin,
         "tail_holds": e.tail.holds, "certified": e.certified,
         "Lambda": e.Lambda}
        for e in report.entries]}
    residuals = {"identity": report.max_identity_residual}
    return results, residuals, "certified" if report.certified else "failed"


def cmd_modescan(args):
    bg = _background(args)
    m_values = _parse_m_list(bg, args)
    n_values = [n for n in range(args.n_min, args.n_max + 1)
                if not (args.skip_n_zero and n == 0)]
    report = mode_scan(bg, m_values, n_values,
                       lambda_count=args.lambda_count,
                       convention="paper" if args.paper_lattice else "invariance")
    results = report.as_dict()
    worst_rel = min((r.wronskian_rel for r in report.rows
                     if not math.isnan(r.wronskian_rel)), default=float("nan"))
    residuals = {"min_wronskian_rel": worst_rel}
    return results, residuals, report.verdict


def cmd_chart_check(args):
    bg = _background(args)
    rep = chart_regularity_probe(bg, args.which)
    results = {"which": args.which, "fitted_exponents": rep.fitted_exponents,
               "max_mismatch": rep.max_mismatch}
    ok = all(abs(v - 2.0) < 1e-3 for v in rep.fitted_exponents.values())
    if args.which == "transition":
        ok = rep.max_mismatch < 1e-10
    return results, {}, "verified" if ok else "failed"


def _c2d(z):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return {"re": z.real, "im": z.imag}


def _resolve_lambda(bg, args):
    if args.Lambda is not None:
        return args.Lambda
    mode = ModeIndex(bg.kind, args.m, args.omega)
    pairs = angular_spectrum(bg, mode, args.lambda_index + 1,
                             tilded=getattr(args, "tilded", False))
    return pairs[args.lambda_index].Lambda


def _parse_m_list(bg, args):
    if args.m_list:
        return [float(x) for x in args.m_list.split(",")]
    step = 0.5 if bg.kind == TAUB_BOLT else 1.0
    count = int(round((args.m_max - args.m_min) / step)) + 1
    return [args.m_min + i * step for i in range(count)]


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="instanton-lab",
        description="Numerical verifications for Riemannian Kerr and "
                    "Taub-bolt perturbation analysis")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("np-check", help="spin coefficients and structure equations")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_np_check)

    p = sub.add_parser("weyl", help="metric-derived Weyl scalars")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--points", type=int, default=20)
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("lattice", help="mode admissibility on the (t,phi) torus")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--n-min", type=int, default=-2)
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--paper-lattice", action="store_true",
                   help="use the stated Omega + kappa Z frequency column")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("angular", help="separation-constant spectrum")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--oracle-n", type=int, default=2000)
    p.add_argument("--tilded", action="store_true")
    p.set_defaults(func=cmd_angular)

    p = sub.add_parser("radial", help="singular points, exponents, asymptotics")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--Lambda", type=float, default=None)
    p.add_argument("--lambda-index", type=int, default=0)
    p.add_argument("--tilded", action="store_true")
    p.set_defaults(func=cmd_radial)

    p = sub.add_parser("certify", help="potential negativity certificate")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--Lambda", type=float, default=None)
    p.add_argument("--lambda-index", type=int, default=0)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("modescan", help="no-admissible-mode scan")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--m-min", type=float, default=-2.0)
    p.add_argument("--m-max", type=float, default=2.0)
    p.add_argument("--m-list", default=None,
                   help="comma-separated azimuthal numbers (overrides range)")
    p.add_argument("--n-min", type=int, default=-3)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--skip-n-zero", action="store_true")
    p.add_argument("--lambda-count", type=int, default=3)
    p.add_argument("--paper-lattice", action="store_true")
    p.set_defaults(func=cmd_modescan)

    p = sub.add_parser("chart-check", help="regularized chart probes")
    _add_background_args(p)
    _add_common_args(p)
    p.add_argument("--which", required=True,
                   choices=["axis-fixed-point", "bolt", "transition"])
    p.set_defaults(func=cmd_chart_check)
    return ap


def run(argv=None):
    """Parse, execute, and write the report; returns the exit code."""
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    results, residuals, verdict = args.func(args)
    runtime_ms = (time.perf_counter() - t0) * 1000.0

    report = {
        "command": args.command,
        "params": _params_echo(args),
        "results": results,
        "residuals": residuals,
        "verdict": verdict,
        "runtime_ms": runtime_ms if args.embed_runtime else None,
        "version": __version__,
    }
    if args.format == "csv" and args.command == "modescan":
        from .stability import ModeScanReport  # noqa: F401
        text = scan_rows_csv_from_dict(results)
    else:
        text = canonical_json(report) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"[instanton-lab] {args.command}: verdict={verdict} "
          f"({runtime_ms:.1f} ms)", file=sys.stderr)
    if verdict in ("verified", "certified", "no modes"):
        return 0
    return 1


def scan_rows_csv_from_dict(results):
    header = ["m", "omega", "tilded", "lambda_index", "Lambda",
              "wronskian_abs", "wronskian_rel", "energy", "verdict", "note"]
    lines = [",".join(header)]
    for row in results["rows"]:
        lines.append(",".join(_csv_cell(row[h]) for h in header))
    return "\n".join(lines) + "\n"


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()

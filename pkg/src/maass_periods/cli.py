"""Command-line interface: ``maass-periods <command> [options]``.

Every command prints (or writes with ``--out``) one JSON document carrying
``"schema": "maass-periods/1"``.  Options may also come from a JSON file given
by ``--config``; explicit flags override it.  Exit codes: 0 success,
1 acceptance criteria failed (``check`` only), 2 invalid input, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import SCHEMA, __version__
from .algrec import hecke_recursion_check, period_formula_check, recognize_rational, transcendental_factor
from .arith import invert_divisor_sum
from .cycles import CycleError, cycle_from_matrix, pairing
from .maass import CoeffTable, PoincareSeries, hecke_Tp, poincare_coefficients
from .merom import (FormSum, PoleError, QExpansionForm, fourier_coeffs, load_qexp, predicted_coeffs,
                    ramanujan_delta_coeffs, zeta_normalize)
from .parallel import set_threads
from .qf import HeegnerError, class_reps, heegner_divisor, heegner_point, stabilizer_order
from .specfun import ConvergenceError, PrecisionConfig
from .weil import WeilRep

log = logging.getLogger("maass_periods")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

# defaults applied after merging the config file; flags default to None so
# that an omitted flag never shadows a config value
DEFAULTS = {
    "N": 1, "k": 6, "Delta": -3, "rho": 1, "D": -1, "r": 1,
    "target_rel_error": 1e-10, "max_terms": 20000,
    "y": 1.0, "y2": 1.25, "n_max": 6, "samples": 256, "mode": "direct",
    "kappa": None, "dual": None, "s": None,
    "p": 2, "gamma": "2,1,1,1", "base_point": None, "waypoints": None, "period": False,
    "threads": 1, "seed": 0, "criteria": None, "max_den": 10**6,
}


class ValidationError(ValueError):
    pass


def _complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        parts = str(text).split(",")
        if len(parts) != 2:
            raise ValidationError(f"cannot read a complex number from {text!r}")
        return complex(float(parts[0]), float(parts[1]))


def _ints(text, n: int | None = None) -> list[int]:
    vals = text if isinstance(text, (list, tuple)) else [int(x) for x in str(text).split(",") if x.strip()]
    vals = [int(v) for v in vals]
    if n is not None and len(vals) != n:
        raise ValidationError(f"expected {n} integers, got {text!r}")
    return vals


def _cplx_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _cfg(a) -> PrecisionConfig:
    return PrecisionConfig(target_rel_error=float(a.target_rel_error), max_terms=int(a.max_terms))


def _form(a) -> FormSum:
    return FormSum(int(a.k), int(a.N), int(a.D), int(a.r), int(a.Delta), int(a.rho), _cfg(a))


def _poincare_for(a) -> PoincareSeries:
    """Maass Poincare series whose lift is ``f_{k,D,r,Delta,rho}``."""
    k, N = int(a.k), int(a.N)
    return PoincareSeries(WeilRep(N, dual=int(a.Delta) < 0), 1.5 - k, int(a.D), int(a.r), cfg=_cfg(a))


def _table_for(a, n_max: int) -> CoeffTable:
    if getattr(a, "table", None):
        with open(a.table) as fh:
            return CoeffTable.from_json(fh.read())
    ser = _poincare_for(a)
    return poincare_coefficients(ser, [abs(int(a.Delta)) * n * n for n in range(1, n_max + 1)])


def _G(a):
    if getattr(a, "G", None):
        data = load_qexp(a.G)
        if data["level"] != 1:
            raise ValidationError("only level-1 cusp forms are supported for G")
        if data["weight"] != 2 * int(a.k):
            raise ValidationError(f"G has weight {data['weight']}, expected {2 * int(a.k)}")
        return data["coeffs"]
    if int(a.k) != 6:
        raise ValidationError("the built-in G is the weight-12 form; pass --G for other weights")
    return [Fraction(c) for c in ramanujan_delta_coeffs(60)]


# ---------------------------------------------------------------------------
# commands


def cmd_heegner(a) -> dict:
    div = heegner_divisor(int(a.N), int(a.Delta), int(a.rho), int(a.D), int(a.r), int(a.k))
    return {"divisor": div.to_dict()}


def cmd_classreps(a) -> dict:
    d = int(a.D) * abs(int(a.Delta))
    b = (int(a.r) * int(a.rho)) % (2 * int(a.N))
    reps = class_reps(int(a.N), d, b)
    return {"N": int(a.N), "disc": d, "b_mod_2N": b,
            "forms": [{"form": Q.to_list(), "point": _cplx_json(heegner_point(Q)), "stabilizer": stabilizer_order(Q)}
                      for Q in reps]}


def cmd_eval(a) -> dict:
    if not a.z:
        raise ValidationError("eval needs at least one --z")
    f = _form(a)
    out = []
    for text in a.z:
        z = _complex(text)
        v = f(z)
        out.append({"z": _cplx_json(z), "value": _cplx_json(v), "error": f.last_error})
    return {"k": f.k, "N": f.N, "D": f.D, "r": f.r, "Delta": f.delta, "rho": f.rho, "values": out}


def cmd_fourier(a) -> dict:
    n_max = int(a.n_max)
    if n_max < 0:
        raise ValidationError("n_max must be nonnegative")
    k, delta, rho = int(a.k), int(a.Delta), int(a.rho)
    out = {"mode": a.mode, "k": k, "N": int(a.N), "D": int(a.D), "r": int(a.r), "Delta": delta, "rho": rho}
    if n_max == 0:
        out["coeffs"] = []
        return out
    if a.mode in ("direct", "invert", "compare"):
        f = _form(a)
        ser = fourier_coeffs(f, float(a.y), n_max, int(a.samples), y2=None if a.y2 is None else float(a.y2),
                             N=int(a.N))
    if a.mode == "direct":
        out.update(ser.to_dict())
    elif a.mode == "predicted":
        out.update(predicted_coeffs(_table_for(a, n_max), k, delta, rho, n_max).to_dict())
    elif a.mode == "invert":
        fac = transcendental_factor(k, delta)
        vals = invert_divisor_sum(ser.array() / fac, k, delta)
        N = int(a.N)
        out["cplus"] = [{"D": abs(delta) * n * n, "r": (rho * n) % (2 * N), "value": _cplx_json(v)}
                        for n, v in enumerate(vals, start=1)]
    elif a.mode == "compare":
        pred = predicted_coeffs(_table_for(a, n_max), k, delta, rho, n_max)
        rows = []
        for n in range(1, n_max + 1):
            rows.append({"n": n, "direct": _cplx_json(ser[n]), "predicted": _cplx_json(pred[n]),
                         "rel_residual": abs(ser[n] - pred[n]) / abs(pred[n]) if pred[n] else None,
                         "error": ser.error_estimates.get(n)})
        out["rows"] = rows
    else:
        raise ValidationError(f"unknown mode {a.mode!r}")
    return out


def cmd_poincare(a) -> dict:
    N = int(a.N)
    kappa = 1.5 - int(a.k) if a.kappa is None else float(a.kappa)
    dual = int(a.Delta) < 0 if a.dual is None else bool(a.dual)
    ser = PoincareSeries(WeilRep(N, dual=dual), kappa, int(a.D), int(a.r), a.s, _cfg(a))
    out = {"N": N, "kappa": kappa, "dual": dual, "D": ser.D, "r": ser.r, "s": ser.s}
    if a.tau:
        out["values"] = [{"tau": _cplx_json(_complex(t)), "value": [_cplx_json(v) for v in ser(_complex(t))],
                          "tail": ser.last_tail} for t in a.tau]
    Ds = _ints(a.coeffs) if a.coeffs else []
    if Ds:
        out["table"] = poincare_coefficients(ser, Ds).to_dict()
    return out


def cmd_hecke(a) -> dict:
    if not a.table:
        raise ValidationError("hecke needs --table (a coefficient table JSON)")
    with open(a.table) as fh:
        tab = CoeffTable.from_json(fh.read())
    p = int(a.p)
    out = hecke_Tp(tab, p)
    return {"p": p, "table": out.to_dict()}


def _cycle(a):
    cyc = cycle_from_matrix(tuple(_ints(a.gamma, 4)))
    if a.base_point is not None:
        cyc = cyc.with_base_point(_complex(a.base_point))
    if a.waypoints:
        cyc = cyc.with_waypoints([_complex(w) for w in a.waypoints])
    return cyc


def cmd_pairing(a) -> dict:
    f = _form(a)
    cyc = _cycle(a)
    div = f.heegner_divisor()
    res = pairing(f, cyc, f.k, div)
    out = {"cycle": cyc.to_dict(), "pairing": res.to_dict(), "relative": abs(res.value) / res.magnitude}
    if a.period:
        tab = _table_for(a, 1)
        c_top = tab.cplus(abs(f.delta), f.rho).real
        G = QExpansionForm(_G(a), f.k)
        mult = transcendental_factor(f.k, f.delta) * c_top

        def zeta(z):
            return f(z) - mult * G(z)

        pc = period_formula_check(zeta, G, cyc, f.k, f.delta, div, c_top)
        out["period_check"] = pc.to_dict()
    return out


def cmd_zeta(a) -> dict:
    k, delta, rho = int(a.k), int(a.Delta), int(a.rho)
    n_max = int(a.n_max)
    if n_max < 1:
        raise ValidationError("zeta needs n_max >= 1")
    f = _form(a)
    ser = fourier_coeffs(f, float(a.y), n_max, int(a.samples), y2=None if a.y2 is None else float(a.y2),
                         N=int(a.N))
    tab = _table_for(a, n_max)
    G = _G(a)
    c_top = tab.cplus(abs(delta), rho).real
    zeta = zeta_normalize(ser, G, k, delta, c_top)
    fac = transcendental_factor(k, delta)
    rows = []
    for n in range(1, n_max + 1):
        err = ser.error_estimates.get(n, 0.0) / abs(fac)
        rec = recognize_rational(zeta[n] / fac, int(a.max_den), 1e-9, error=err)
        rows.append({"n": n, "zeta": _cplx_json(zeta[n]), "normalized": _cplx_json(zeta[n] / fac),
                     "recognition": rec.to_dict(), "error": ser.error_estimates.get(n)})
    lam = {n: G[n - 1] for n in range(1, n_max + 1)}
    table_route = hecke_recursion_check(tab, lam, k, delta, rho, n_max)
    return {"k": k, "Delta": delta, "rho": rho, "c_top": c_top, "coeffs": rows, "table_route": table_route}


def cmd_check(a) -> dict:
    from .acceptance import Context, run

    crit = _ints(a.criteria) if a.criteria else None
    t0 = time.perf_counter()
    results = run(crit, Context(seed=int(a.seed)), log=lambda line: print(line, file=sys.stderr))
    return {"results": [r.to_dict() for r in results], "passed": all(r.passed for r in results),
            "seconds": time.perf_counter() - t0}


COMMANDS = {
    "heegner": cmd_heegner, "classreps": cmd_classreps, "eval": cmd_eval, "fourier": cmd_fourier,
    "poincare": cmd_poincare, "hecke": cmd_hecke, "pairing": cmd_pairing, "zeta": cmd_zeta, "check": cmd_check,
}


# ---------------------------------------------------------------------------
# argument handling


def _add_config(p):
    p.add_argument("--N", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--Delta", type=int)
    p.add_argument("--rho", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--target-rel-error", dest="target_rel_error", type=float)
    p.add_argument("--max-terms", dest="max_terms", type=int)


def _add_fourier(p):
    p.add_argument("--y", type=float, help="sampling height")
    p.add_argument("--y2", type=float, help="second height for the error estimate")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--samples", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maass-periods", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option values; flags override it")
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--threads", type=int, help="worker threads for sampling loops")
    common.add_argument("--seed", type=int, help="seed for randomised checks")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("heegner", parents=[common], help="twisted Heegner divisor")
    _add_config(p)
    p = sub.add_parser("classreps", parents=[common], help="Gamma_0(N) class representatives")
    _add_config(p)
    p = sub.add_parser("eval", parents=[common], help="evaluate f_{k,D,r,Delta,rho}")
    _add_config(p)
    p.add_argument("--z", action="append", required=False, help="point, e.g. 0.1+1.2j (repeatable)")
    p = sub.add_parser("fourier", parents=[common], help="Fourier coefficients of f")
    _add_config(p)
    _add_fourier(p)
    p.add_argument("--mode", choices=["direct", "predicted", "invert", "compare"])
    p.add_argument("--table", help="coefficient table JSON (else computed from the Poincare series)")
    p = sub.add_parser("poincare", parents=[common], help="Maass Poincare series values and coefficients")
    _add_config(p)
    p.add_argument("--kappa", type=float)
    p.add_argument("--dual", type=int, choices=[0, 1])
    p.add_argument("--s", type=float)
    p.add_argument("--tau", action="append")
    p.add_argument("--coeffs", help="comma-separated indices D for c+(D)")
    p = sub.add_parser("hecke", parents=[common], help="Hecke operator on a coefficient table")
    p.add_argument("--table")
    p.add_argument("--p", type=int)
    p = sub.add_parser("pairing", parents=[common], help="cycle pairing of f")
    _add_config(p)
    p.add_argument("--gamma", help="hyperbolic matrix a,b,c,d")
    p.add_argument("--base-point", dest="base_point")
    p.add_argument("--waypoint", dest="waypoints", action="append")
    p.add_argument("--period", action="store_true", default=None, help="also run the period formula check")
    p.add_argument("--table")
    p.add_argument("--G", help="q-expansion JSON of the cusp form")
    p = sub.add_parser("zeta", parents=[common], help="normalized form zeta and rational recognition")
    _add_config(p)
    _add_fourier(p)
    p.add_argument("--table")
    p.add_argument("--G")
    p.add_argument("--max-den", dest="max_den", type=int)
    p = sub.add_parser("check", parents=[common], help="run the acceptance suite")
    p.add_argument("--criteria", help="comma-separated criterion numbers (default all)")
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge defaults < config file < explicit flags."""
    merged = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(conf, dict):
            raise ValidationError("config file must hold a JSON object")
        merged.update({k.replace("-", "_"): v for k, v in conf.items()})
    for key, val in vars(args).items():
        if val is not None or key not in merged:
            merged[key] = val
    return argparse.Namespace(**merged)


def _dump(obj) -> str:
    def default(o):
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, tuple):
            return list(o)
        raise TypeError(f"not serialisable: {type(o).__name__}")

    def clean(x):
        if isinstance(x, dict):
            return {str(k): clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        if isinstance(x, float) and not math.isfinite(x):
            return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return x

    return json.dumps(clean(obj), indent=2, default=default, allow_nan=False)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        a = resolve(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")
    try:
        set_threads(int(a.threads))
        payload = COMMANDS[a.command](a)
    except (ConvergenceError, PoleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, HeegnerError, CycleError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    doc = {"schema": SCHEMA, "command": a.command}
    doc.update(payload)
    text = _dump(doc)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if a.command == "check" and not payload["passed"]:
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: design, check, decode, mc, sweep, table1.  Structured
output is JSON (one object) or CSV on stdout; diagnostics go to stderr.

Exit codes: 0 success, 2 usage or parameter problem, 3 infeasible
sizing or search, 4 unreadable or malformed input file.

Randomized commands (design, mc, sweep) refuse to run without --seed;
pass --entropy to draw a seed from the OS, which is then echoed in the
output so the run can be replayed.

A config file (--config PATH, lines of key=value, '#' comments) may
supply any long flag's value; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import designs, sim, theory
from .decoding import decode_eliminate, is_disjunct, is_separable
from .errors import (
    CapacityError,
    DimensionError,
    GroupTestError,
    InfeasibleError,
    MatrixParseError,
    ParameterError,
    SizeGuardError,
)
from .matrices import (
    BitMatrix,
    QaryMatrix,
    expand_qary,
    read_answers,
    read_matrix,
    or_columns,
    write_matrix,
)
from .rng import check_seed

__all__ = ["main"]

_BOOL_TRUE = ("1", "true", "yes", "on")

_CONVERTERS = {
    "model": str,
    "n": int,
    "d": int,
    "m": int,
    "delta": float,
    "p": float,
    "r": int,
    "s": int,
    "q": int,
    "seed": int,
    "entropy": lambda v: v.lower() in _BOOL_TRUE,
    "jobs": int,
    "trials": int,
    "target": float,
    "n_list": str,
    "out": str,
    "qary_out": str,
    "matrix": str,
    "answers": str,
    "defectives": str,
    "separable": lambda v: v.lower() in _BOOL_TRUE,
    "exact_utdq_sizing": lambda v: v.lower() in _BOOL_TRUE,
    "dmax": int,
    "format": str,
}


def _load_config(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ParameterError(
                        f"{path}:{lineno}: config lines are key=value")
                key, value = (part.strip() for part in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise MatrixParseError(path, 0, f"cannot read config: {exc}") from exc
    return out


def _merge_config(ns: dict, config: dict) -> None:
    for key, raw in config.items():
        if key not in ns:
            raise ParameterError(f"unknown config key {key!r}")
        if ns[key] is None:
            conv = _CONVERTERS.get(key, str)
            ns[key] = conv(raw)


def _require(ns: dict, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if ns.get(n) is None]
    if missing:
        raise ParameterError("missing required flag(s): " + ", ".join(missing))


def _resolve_seed(ns: dict) -> int:
    if ns.get("seed") is not None:
        return check_seed(ns["seed"])
    if ns.get("entropy"):
        return int.from_bytes(os.urandom(8), "big")
    raise ParameterError(
        "randomized command refuses to run without --seed "
        "(pass --entropy to draw one)")


def _parse_items(text: str) -> list:
    try:
        items = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ParameterError(f"bad item list {text!r}; expected e.g. 1,4,7")
    if not items:
        raise ParameterError("empty item list")
    return items


def _explicit_param(ns: dict, model: str):
    """The one parameter flag matching the model, if given; reject others."""
    by_model = {"rid": "p", "rrsd": "r", "rssd": "s", "utdq": "q"}
    wanted = by_model[model]
    for name in ("p", "r", "s", "q"):
        if ns.get(name) is not None and name != wanted:
            raise ParameterError(
                f"--{name} does not apply to model {model!r} (expects --{wanted})")
    return ns.get(wanted)


def _binary_matrix(path: str) -> BitMatrix:
    loaded = read_matrix(path)
    if isinstance(loaded, QaryMatrix):
        return expand_qary(loaded)
    return loaded


def _emit(obj) -> None:
    print(json.dumps(obj))


# ---------------------------------------------------------------------
# subcommands


def cmd_design(ns: dict) -> int:
    _require(ns, "model", "n", "d", "out")
    model = ns["model"]
    if model not in designs.MODELS:
        raise ParameterError(f"unknown model {model!r}")
    n, d = ns["n"], ns["d"]
    seed = _resolve_seed(ns)
    explicit = _explicit_param(ns, model)
    delta = ns.get("delta")

    sizing = None
    if ns.get("m") is not None:
        m = ns["m"]
        lam = None
    else:
        if delta is None:
            raise ParameterError("auto-sizing needs --delta (or pass --m)")
        sizing = designs.upper_bound_m(
            model, n, d, delta,
            q=explicit if model == "utdq" else None,
            exact_utdq=bool(ns.get("exact_utdq_sizing")))
        if not sizing.feasible:
            print(f"infeasible sizing: {sizing.reason}", file=sys.stderr)
            return 3
        m, lam = sizing.m, sizing.lam

    if explicit is not None:
        param = explicit
    elif model == "utdq" and sizing is not None:
        param = sizing.q
    else:
        param = designs.optimal_param(model, n, d, m_hint=m)

    spec = designs.DesignSpec(model, n, m, param)
    if model == "utdq":
        mq = designs.gen_utdq(n, m // int(param), int(param), seed)
        matrix = expand_qary(mq)
        if ns.get("qary_out"):
            write_matrix(ns["qary_out"], mq)
    else:
        matrix = designs.generate(spec, seed)
    write_matrix(ns["out"], matrix)
    _emit({
        "model": model, "n": n, "d": d, "delta": delta, "m": m,
        "param": param, "lambda": lam, "feasible": True, "seed": seed,
        "out": ns["out"],
    })
    return 0


def cmd_check(ns: dict) -> int:
    _require(ns, "matrix", "defectives")
    matrix = _binary_matrix(ns["matrix"])
    items = _parse_items(ns["defectives"])
    record = {
        "matrix": ns["matrix"],
        "defectives": sorted(items),
        "disjunct": is_disjunct(matrix, items),
        "separable": None,
        "d": None,
    }
    if ns.get("separable"):
        d = ns["d"] if ns.get("d") is not None else len(items)
        record["separable"] = is_separable(matrix, items, d)
        record["d"] = d
    _emit(record)
    return 0


def cmd_decode(ns: dict) -> int:
    _require(ns, "matrix")
    matrix = _binary_matrix(ns["matrix"])
    if (ns.get("answers") is None) == (ns.get("defectives") is None):
        raise ParameterError("pass exactly one of --answers or --defectives")
    if ns.get("answers") is not None:
        answers = read_answers(ns["answers"], expected_m=matrix.m)
    else:
        answers = or_columns(matrix, _parse_items(ns["defectives"]))
    candidates = sorted(decode_eliminate(matrix, answers))
    _emit({"matrix": ns["matrix"], "m": matrix.m, "n": matrix.n,
           "candidates": candidates})
    return 0


def cmd_mc(ns: dict) -> int:
    _require(ns, "model", "n", "d", "m", "trials")
    model = ns["model"]
    if model not in designs.MODELS:
        raise ParameterError(f"unknown model {model!r}")
    n, d, m = ns["n"], ns["d"], ns["m"]
    seed = _resolve_seed(ns)
    explicit = _explicit_param(ns, model)
    param = explicit if explicit is not None else designs.optimal_param(
        model, n, d, m_hint=m)
    spec = designs.DesignSpec(model, n, m, param)
    report = sim.run_trials(spec, d, ns["trials"], seed,
                            jobs=ns.get("jobs") or 1, delta=ns.get("delta"))
    if (ns.get("format") or "json") == "csv":
        rec = report.as_record()
        keys = list(rec)
        print(",".join(keys))
        print(",".join("" if rec[k] is None else str(rec[k]) for k in keys))
    else:
        _emit(report.as_record())
    return 0


def cmd_sweep(ns: dict) -> int:
    _require(ns, "model", "d", "n_list", "target", "trials")
    model = ns["model"]
    if model not in designs.MODELS:
        raise ParameterError(f"unknown model {model!r}")
    d = ns["d"]
    n_list = _parse_items(ns["n_list"])
    seed = _resolve_seed(ns)
    results = sim.run_sweep(model, d, n_list, ns["target"], ns["trials"],
                            seed, jobs=ns.get("jobs") or 1)
    points = [point for point, _ in results]
    slope_per_d = sim.slope_fit(points, d)
    if (ns.get("format") or "json") == "csv":
        print("n,m_star,target,trials_per_probe")
        for point in points:
            print(f"{point.n},{point.m_star},{point.target},"
                  f"{point.trials_per_probe}")
    else:
        _emit({
            "model": model, "d": d, "target": ns["target"],
            "trials_per_probe": ns["trials"], "master_seed": seed,
            "points": [
                {"n": point.n, "m_star": point.m_star,
                 "probes": search.probe_records()}
                for point, search in results
            ],
            "slope": slope_per_d * d,
            "slope_per_d": slope_per_d,
        })
    return 0


def cmd_table1(ns: dict) -> int:
    dmax = ns.get("dmax") or 10
    rows = theory.table1(dmax)
    if (ns.get("format") or "csv") == "json":
        out = []
        for row in rows:
            rec = {
                "d": row.d, "rid": row.rid, "rrsd": row.rrsd,
                "rssd": row.rssd, "rssd_alpha": row.rssd_alpha,
                "utdq": row.utdq, "utdq_q": row.utdq_q,
            }
            ref = theory.PUBLISHED_TABLE.get(row.d)
            rec["rssd_published"] = ref[0] if ref else None
            rec["utdq_published"] = ref[1] if ref else None
            rec["flags"] = theory.published_deviation_flags(row)
            out.append(rec)
        _emit({"rows": out})
        return 0
    base_lines = theory.table1_csv(rows).splitlines()
    print(base_lines[0] + ",rssd_published,utdq_published,flags")
    for row, line in zip(rows, base_lines[1:]):
        ref = theory.PUBLISHED_TABLE.get(row.d)
        pub_rssd = f"{ref[0]}" if ref else ""
        pub_utdq = f"{ref[1]}" if ref else ""
        flags = "+".join(theory.published_deviation_flags(row))
        print(f"{line},{pub_rssd},{pub_utdq},{flags}")
    return 0


# ---------------------------------------------------------------------
# wiring


def _add_common(p, *names):
    if "model" in names:
        p.add_argument("--model", choices=list(designs.MODELS))
    if "seed" in names:
        p.add_argument("--seed", type=int)
        p.add_argument("--entropy", action="store_true", default=None,
                       help="draw a seed from the OS instead of --seed")
    if "jobs" in names:
        p.add_argument("--jobs", type=int,
                       help="worker processes (results identical for any count)")
    p.add_argument("--config", help="key=value file supplying defaults")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtpool",
        description="Randomized pool designs for non-adaptive group testing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="size and write a test matrix")
    _add_common(p, "model", "seed")
    p.add_argument("--n", type=int, help="number of items")
    p.add_argument("--d", type=int, help="defective budget")
    p.add_argument("--delta", type=float, help="failure budget for auto-sizing")
    p.add_argument("--m", type=int, help="explicit test count (skips sizing)")
    p.add_argument("--p", type=float, help="rid zero-probability")
    p.add_argument("--r", type=int, help="rrsd row weight")
    p.add_argument("--s", type=int, help="rssd column weight")
    p.add_argument("--q", type=int, help="utdq alphabet size")
    p.add_argument("--exact-utdq-sizing", action="store_true", default=None,
                   dest="exact_utdq_sizing",
                   help="use the exact utdq display instead of the "
                        "transversal bound")
    p.add_argument("--out", help="matrix file to write")
    p.add_argument("--qary-out", dest="qary_out",
                   help="also write the q-ary pre-image (utdq only)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("check", help="disjunct / separable verdicts")
    _add_common(p)
    p.add_argument("--matrix", help="matrix file")
    p.add_argument("--defectives", help="comma-separated 1-based items")
    p.add_argument("--separable", action="store_true", default=None)
    p.add_argument("--d", type=int, help="candidate-set size budget for "
                                         "--separable (default: set size)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("decode", help="run the elimination decoder")
    _add_common(p)
    p.add_argument("--matrix", help="matrix file")
    p.add_argument("--answers", help="answer vector file")
    p.add_argument("--defectives",
                   help="simulate answers for these 1-based items")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("mc", help="Monte Carlo success-rate estimate")
    _add_common(p, "model", "seed", "jobs")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--delta", type=float, help="recorded for context only")
    p.add_argument("--p", type=float)
    p.add_argument("--r", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--format", choices=["json", "csv"])
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("sweep", help="minimal test count across several n")
    _add_common(p, "model", "seed", "jobs")
    p.add_argument("--d", type=int)
    p.add_argument("--n-list", dest="n_list",
                   help="comma-separated item counts, e.g. 1000,10000")
    p.add_argument("--target", type=float, help="success probability to reach")
    p.add_argument("--trials", type=int, help="trials per probe")
    p.add_argument("--format", choices=["json", "csv"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table1", help="per-model rate constants table")
    _add_common(p)
    p.add_argument("--dmax", type=int, help="largest d row (default 10)")
    p.add_argument("--format", choices=["csv", "json"])
    p.set_defaults(func=cmd_table1)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    ns = vars(args)
    try:
        if ns.get("config"):
            _merge_config(ns, _load_config(ns["config"]))
        return args.func(ns)
    except MatrixParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (ParameterError, DimensionError, CapacityError,
            SizeGuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except GroupTestError as exc:  # fallback for any future subtype
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

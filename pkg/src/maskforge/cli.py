"""Command-line interface: ``maskforge synth|verify|compose|table|bench|synth-mono``.

Exit codes: 0 ok, 1 verification failure (witness printed), 2 infeasible or
timed out, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import fields
from pathlib import Path

from . import __version__
from .circuit import CircuitError, StructureError
from .netlist import NetlistError, dump, load, serialize

OK, LEAK, INFEASIBLE, BAD_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def read_config(path: str | None) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    if not path:
        return {}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v.strip('"')
    return out


def _coerce(cls, values: dict[str, str]) -> dict:
    types = {f.name: f.type for f in fields(cls)}
    out = {}
    for k, v in values.items():
        if k not in types:
            continue
        t = str(types[k])
        if v.lower() in ("none", "null"):
            out[k] = None
        elif "float" in t:
            out[k] = float(v)
        elif "int" in t:
            out[k] = int(v)
        else:
            out[k] = v
    return out


def _load(path: str):
    try:
        return load(path)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    except (NetlistError, CircuitError) as e:
        raise InputError(f"{path}: {e}") from None


def _emit_json(args, payload) -> None:
    if not args.json:
        return
    text = json.dumps(payload, indent=2)
    if args.json == "-":
        print(text)
    else:
        Path(args.json).write_text(text + "\n")


def _write_circuit(c, out: str | None) -> None:
    if out:
        dump(c, out)
    else:
        sys.stdout.write(serialize(c))


# -- commands --------------------------------------------------------------


def cmd_verify(args, conf) -> int:
    from .verify import DEFAULT_CAP, VerificationInfeasible, verify_nlr

    c = _load(args.input)
    cap = int(conf.get("cap", DEFAULT_CAP))
    try:
        v = verify_nlr(c, args.order, prune=not args.no_prune, cap=cap, strict=not args.lenient)
    except StructureError as e:
        raise InputError(f"{e} (use --lenient to treat them as single shares)") from None
    except VerificationInfeasible as e:
        print(f"infeasible: {e}")
        _emit_json(args, {"verdict": "infeasible", "order": args.order, "reason": str(e)})
        return INFEASIBLE
    report = v.to_json()
    if v.ok:
        print(f"{c.name}: {args.order}-leakage-resilient "
              f"({v.checked_selections} selections checked, {v.pruned_selections} pruned)")
    else:
        w = v.witness
        print(f"{c.name}: leaks at order {args.order}")
        print(f"  nodes   {' '.join(w.selection)}")
        print(f"  publics {w.publics}")
        print(f"  secrets {w.secrets} vs {w.secrets_alt}")
        print(f"  dist    {list(w.dist.counts)} vs {list(w.dist_alt.counts)}")
    _emit_json(args, report)
    return OK if v.ok else LEAK


def _synth_config(args, conf):
    from .pipeline import SynthConfig

    values = _coerce(SynthConfig, conf)
    for k in ("height_bound", "mono_timeout", "max_secrets", "backend", "max_height"):
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    values["order"] = args.order
    try:
        return SynthConfig(**values)
    except (TypeError, ValueError) as e:
        raise InputError(str(e)) from None


def cmd_synth(args, conf) -> int:
    from .pipeline import synth_report

    c = _load(args.input)
    cfg = _synth_config(args, conf)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            res = synth_report(c, cfg)
        except CircuitError as e:
            raise InputError(str(e)) from None
    _write_circuit(res.circuit, args.out)
    summary = {
        "name": c.name, "order": cfg.order, "time": round(res.seconds, 4), "mtc": round(res.mtc, 4),
        "size": res.circuit.size(), "rds": len(res.circuit.randoms),
        "verified": res.verified, "infeasible": res.infeasible,
        "plan": res.plan.describe(),
        "leaves": [{"wire": r.wire, "kind": r.kind, "method": r.method, "bound": r.bound,
                    "seconds": round(r.seconds, 4)} for r in res.leaves],
    }
    print(f"{c.name}: order {cfg.order}, {summary['size']} gates, {summary['rds']} randoms, "
          f"{res.seconds:.2f}s, {'verified' if res.verified else 'NOT verified (beyond the exact cap)'}",
          file=sys.stderr)
    _emit_json(args, summary)
    return OK if res.verified else INFEASIBLE


def cmd_synth_mono(args, conf) -> int:
    from .synth.mono import MonoConfig, MonoStats, SynthesisBudgetExceeded, SynthesisTimeout, mono_synth

    c = _load(args.input)
    values = _coerce(MonoConfig, conf)
    for k in ("backend", "max_height", "timeout"):
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    stats = MonoStats()
    try:
        out = mono_synth(c, args.order, MonoConfig(**values), stats=stats)
    except (SynthesisTimeout, SynthesisBudgetExceeded) as e:
        print(f"no solution: {e}", file=sys.stderr)
        _emit_json(args, {"status": "timeout", "height": e.height, "iterations": stats.iterations})
        return INFEASIBLE
    except ValueError as e:
        raise InputError(str(e)) from None
    _write_circuit(out, args.out)
    _emit_json(args, {"status": "ok", "height": stats.height, "q": stats.q, "iterations": stats.iterations,
                      "gamma": stats.gamma, "size": out.size(), "rds": len(out.randoms)})
    return OK


def cmd_table(args, conf) -> int:
    from .tables import TableOverflow, is_safe, make_table

    c = _load(args.input)
    publics = {}
    for item in args.publics or []:
        k, _, v = item.partition("=")
        publics[k] = int(v)
    try:
        t = make_table(c, publics)
    except TableOverflow as e:
        print(f"infeasible: {e}")
        return INFEASIBLE
    except CircuitError as e:
        raise InputError(str(e)) from None
    if args.dump:
        Path(args.dump).write_text(t.to_tsv())
    else:
        sys.stdout.write(t.to_tsv())
    result = {"columns": list(t.columns), "rows": len(t.rows)}
    code = OK
    if args.check_safe:
        x, m, ell = args.check_safe
        try:
            safe = is_safe(t, x, m, ell)
        except ValueError as e:
            raise InputError(str(e)) from None
        print(f"Safe({x}, {m}, {ell}) = {str(safe).lower()}", file=sys.stderr)
        result["safe"] = safe
        code = OK if safe else LEAK
    _emit_json(args, result)
    return code


def cmd_compose(args, conf) -> int:
    from .compose import CompositionError, freshen_randoms, par_compose_all, seq_compose, share_compose

    try:
        plan = json.loads(Path(args.plan).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read plan {args.plan}: {e}") from None
    base = Path(args.plan).parent

    def circ(p):
        return _load(str(base / p))

    kind = plan.get("kind")
    try:
        if kind == "parallel":
            ops = [circ(p) for p in plan["operands"]]
            if plan.get("freshen", True):
                ops = freshen_randoms(ops)
            out = par_compose_all(ops, name=plan.get("name"), share_encoders=plan.get("share_encoders", False))
        elif kind == "sequential":
            firsts = [circ(p) for p in plan["first"]]
            second = circ(plan["second"])
            if plan.get("freshen", True):
                *firsts, second = freshen_randoms(firsts + [second])
            out = seq_compose(firsts, second, plan.get("inputs"), plan.get("permutations"), name=plan.get("name"))
        elif kind == "output-sharing":
            first = circ(plan["first"])
            consumers = [circ(p) for p in plan["consumers"]]
            if plan.get("freshen", True):
                first, *consumers = freshen_randoms([first] + consumers)
            out = share_compose(first, consumers, plan.get("inputs"), name=plan.get("name"))
        else:
            raise InputError(f"unknown composition kind {kind!r}; use parallel, sequential or output-sharing")
    except KeyError as e:
        raise InputError(f"plan is missing {e}") from None
    except CompositionError as e:
        raise InputError(str(e)) from None
    _write_circuit(out, args.out)
    _emit_json(args, {"name": out.name, "size": out.size(), "rds": len(out.randoms)})
    return OK


def cmd_bench(args, conf) -> int:
    from .bench import bench, default_suite, write_report

    cfg = _synth_config(args, conf)
    suite = args.suite or default_suite()
    if not Path(suite).exists():
        raise InputError(f"no such suite {suite}")
    orders = [int(x) for x in args.orders.split(",")] if args.orders else [args.order]
    report = bench(suite, orders, cfg)
    sys.stdout.write(report.to_text())
    if args.out:
        for p in write_report(report, args.out, plots=not args.no_plots):
            print(f"wrote {p}", file=sys.stderr)
    _emit_json(args, report.to_json())
    return OK if all(r.status == "ok" for r in report.rows) else INFEASIBLE


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", "-n", type=int, help="probing order n (default 1, or the config's order)")
    common.add_argument("--config", help="key = value file with defaults for synthesis settings")
    common.add_argument("--json", nargs="?", const="-", metavar="PATH",
                        help="write a JSON report to PATH (stdout when no path is given)")

    ap = argparse.ArgumentParser(prog="maskforge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"maskforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check n-leakage resilience")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--no-prune", action="store_true", help="check every selection, not only relevant ones")
    p.add_argument("--lenient", action="store_true", help="accept secrets used without an encoder")
    p.set_defaults(func=cmd_verify)

    def synth_flags(p):
        p.add_argument("--height-bound", type=int)
        p.add_argument("--mono-timeout", type=float)
        p.add_argument("--max-secrets", type=int)
        p.add_argument("--max-height", type=int)
        p.add_argument("--backend", help="exhaustive (default) or smtlib[:<command>]")

    p = sub.add_parser("synth", parents=[common], help="synthesize a leakage-resilient circuit")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--out", "-o")
    synth_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("synth-mono", parents=[common], help="monolithic synthesis of a single-output circuit")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--out", "-o")
    p.add_argument("--backend")
    p.add_argument("--max-height", type=int)
    p.add_argument("--timeout", type=float)
    p.set_defaults(func=cmd_synth_mono)

    p = sub.add_parser("table", parents=[common], help="dump a circuit table and check safety")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--public", dest="publics", action="append", metavar="NAME=BIT",
                   help="public input value (repeatable)")
    p.add_argument("--check-safe", nargs=3, type=int, metavar=("X", "M", "ELL"))
    p.add_argument("--dump", metavar="TSV")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("compose", parents=[common], help="compose circuits as described by a JSON plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("bench", parents=[common], help="synthesize a suite and report time, size and randoms")
    p.add_argument("--suite", help="directory of .mfc files (default: bundled desk-scale suite)")
    p.add_argument("--orders", help="comma-separated orders, overrides --order")
    p.add_argument("--out", help="directory for bench.json, bench.tsv, bench.txt and PNG plots")
    p.add_argument("--no-plots", action="store_true")
    synth_flags(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        conf = read_config(args.config)
        if args.order is None:
            args.order = int(conf.get("order", 1))
        if args.order < 1:
            raise InputError("order must be at least 1")
        return args.func(args, conf)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

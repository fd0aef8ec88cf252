"""Command-line front end.

Commands: ``check``, ``simplify``, ``run``, ``fuzz``, ``bench``, ``scale``
and ``gen-json``.  Machine-readable output is one JSON object per line
(``check`` prints text unless given ``--json``).
Exit status: 0 match / success, 1 fail / check failed, 2 usage, load or
I/O error (and a run whose oracle ran out of fuel).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .analysis import check_well_formed, compute_nullability, simplify_grammar
from .bench import BACKENDS, json_input, render_figures, run_bench, scaling
from .engine import Engine, EngineInvariantError, StepRecord
from .fuzz import MUTANTS, FuzzConfig, compare, describe_case, minimize, run_fuzz
from .grammar import Grammar, GrammarError, format_expr, format_grammar, load_grammar
from .oracle import DEFAULT_FUEL, FuelExhausted, Rest, interpret, with_deep_stack

EXIT_MATCH, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class _LoadError(Exception):
    pass


def _emit(obj: dict, out: TextIO) -> None:
    out.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _load(path: str, *, simplify: bool = True) -> Grammar:
    try:
        return load_grammar(path, simplify=simplify)
    except GrammarError as exc:
        raise _LoadError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise _LoadError(f"{path}: {exc.strerror or exc}") from exc


def _load_checked(path: str) -> Grammar:
    g = _load(path)
    wf = check_well_formed(g)
    if not wf.ok:
        cycles = "; ".join(" → ".join(c) for c in wf.cycles.values()) or "left-recursive expression"
        raise _LoadError(f"{path}: grammar is not well-formed ({cycles})")
    return g


def _read_input(path: Optional[str]) -> bytes:
    try:
        if path is None or path == "-":
            return sys.stdin.buffer.read()
        return Path(path).read_bytes()
    except OSError as exc:
        raise _LoadError(f"{path}: {exc.strerror or exc}") from exc


# --------------------------------------------------------------------------
# commands

def cmd_check(args: argparse.Namespace, out: TextIO) -> int:
    raw = _load(args.grammar, simplify=False)
    nt = compute_nullability(raw)
    g = simplify_grammar(raw)
    wf = check_well_formed(g)
    records: list[dict] = []
    for name, body in raw.rules.items():
        records.append({"rule": name, "lambda": nt.lam_of(body), "nu": nt.nu_of(body)})
    for name, body in raw.rules.items():
        after = g.rules[name]
        if after != body:
            records.append({"simplified": name, "before": format_expr(body), "after": format_expr(after)})
    verdict: dict = {"well_formed": wf.ok}
    if not wf.ok:
        verdict["cycles"] = {name: " → ".join(c) for name, c in wf.cycles.items()}
    records.append(verdict)
    if args.json:
        for rec in records:
            _emit(rec, out)
    else:
        for rec in records:
            if "rule" in rec:
                out.write(f"{rec['rule']}: lambda={int(rec['lambda'])} nu={int(rec['nu'])}\n")
            elif "simplified" in rec:
                out.write(f"simplified {rec['simplified']}: {rec['before']}  =>  {rec['after']}\n")
        if wf.ok:
            out.write("well-formed\n")
        else:
            out.write("not well-formed\n")
            for cycle in verdict["cycles"].values():
                out.write(f"  left-recursive cycle: {cycle}\n")
    return EXIT_MATCH if wf.ok else EXIT_FAIL


def cmd_simplify(args: argparse.Namespace, out: TextIO) -> int:
    out.write(format_grammar(_load(args.grammar)))
    return EXIT_MATCH


def _run_sped(g: Grammar, args: argparse.Namespace, err: TextIO) -> dict:
    hook = None
    if args.trace:
        def hook(rec: StepRecord) -> None:
            _emit(rec.as_dict(), err)
    engine = Engine(g, hash_cons=args.hash_cons)
    t0 = time.perf_counter()
    # derivatives recurse as deep as the input nests, hence the big stack
    if args.input is None or args.input == "-":
        outcome = with_deep_stack(engine.recognize, sys.stdin.buffer, stats=args.stats, on_step=hook)
    else:
        try:
            with open(args.input, "rb") as fh:
                outcome = with_deep_stack(engine.recognize, fh, stats=args.stats, on_step=hook)
        except OSError as exc:
            raise _LoadError(f"{args.input}: {exc.strerror or exc}") from exc
    elapsed = time.perf_counter() - t0
    return {
        "verdict": outcome.verdict,
        "consumed_through": outcome.consumed_through,
        "backend": "sped",
        "input_length": outcome.input_length,
        "elapsed": round(elapsed, 6),
        "peak_live_nodes": outcome.peak_live_nodes,
    }


def _run_oracle(g: Grammar, args: argparse.Namespace) -> dict:
    data = _read_input(args.input)
    t0 = time.perf_counter()
    res = with_deep_stack(interpret, g.start, g, data, 0, args.fuel)
    elapsed = time.perf_counter() - t0
    if isinstance(res, Rest):
        verdict, through = "match", res.position
    elif isinstance(res, FuelExhausted):
        verdict, through = "no-verdict", None
    else:
        verdict, through = "fail", None
    return {"verdict": verdict, "consumed_through": through, "backend": "oracle",
            "input_length": len(data), "elapsed": round(elapsed, 6)}


def cmd_run(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    g = _load_checked(args.grammar)
    if args.backend == "oracle":
        if args.trace or args.stats:
            raise _LoadError("--trace and --stats need the sped backend")
        report = _run_oracle(g, args)
    else:
        report = _run_sped(g, args, err)
    if report["consumed_through"] is None:
        del report["consumed_through"]
    _emit(report, out)
    if report["verdict"] == "match":
        return EXIT_MATCH
    return EXIT_FAIL if report["verdict"] == "fail" else EXIT_ERROR


def cmd_fuzz(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    cfg = FuzzConfig(max_rules=args.max_rules, max_depth=args.max_depth,
                     max_input=args.max_input, fuel=args.fuel)
    factory = MUTANTS[args.mutant] if args.mutant else Engine
    summary = run_fuzz(args.seed, args.count, cfg, factory=factory, stats=args.stats,
                       stop_after=args.stop_after)
    report = summary.as_dict()
    report["summary"] = f"{summary.agreed}/{summary.count} agree"
    report["seed"] = args.seed
    _emit(report, out)
    for case in summary.disagreements[:args.show]:

        def disagrees(g: Grammar, data: bytes) -> bool:
            return not compare(g, data, factory=factory, fuel=cfg.fuel).agree

        g, data = minimize(case.grammar, case.data, disagrees) if args.minimize else (case.grammar, case.data)
        res = compare(g, data, factory=factory, fuel=cfg.fuel)
        _emit({"case": case.index, "grammar": format_grammar(g), "input": data.decode("latin-1"),
               "engine": res.engine, "oracle": res.oracle}, out)
        if args.verbose:
            err.write(describe_case(g, data))
    return EXIT_MATCH if summary.ok else EXIT_FAIL


def cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    g = _load_checked(args.grammar)
    data = _read_input(args.input)
    results = []
    for backend in args.backend:
        r = run_bench(g, data, backend=backend, repeat=args.repeat, hash_cons=args.hash_cons,
                      fuel=args.fuel, keep_steps=bool(args.figures))
        results.append(r)
        _emit(r.as_dict(), out)
    if args.figures:
        for path in render_figures(results, args.figures, args.stem):
            _emit({"figure": str(path)}, out)
    return EXIT_MATCH


def cmd_scale(args: argparse.Namespace, out: TextIO) -> int:
    from .bench import json_grammar

    g = _load_checked(args.grammar) if args.grammar else json_grammar()
    report = scaling(g, args.sizes, repeat=args.repeat, keep_steps=bool(args.figures))
    for r in report.results:
        _emit(r.as_dict(), out)
    summary = report.as_dict()
    del summary["runs"]
    summary["within_factor"] = args.factor
    summary["ok"] = report.live_nodes_equal and report.within(args.factor)
    _emit(summary, out)
    if args.figures:
        for path in render_figures(report.results, args.figures, args.stem):
            _emit({"figure": str(path)}, out)
    return EXIT_MATCH if summary["ok"] else EXIT_FAIL


def cmd_gen_json(args: argparse.Namespace, out: TextIO) -> int:
    data = json_input(args.size)
    if args.output and args.output != "-":
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_MATCH


# --------------------------------------------------------------------------

def _sizes(text: str) -> list[int]:
    units = {"k": 1000, "K": 1000, "m": 1_000_000, "M": 1_000_000}
    out = []
    for part in text.split(","):
        part = part.strip().rstrip("bB")
        mult = units.get(part[-1:], 1)
        out.append(int(float(part[:-1] if mult > 1 else part) * mult))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sped", description="Derivative-based PEG recognizer.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="nullability per rule, simplification diff, well-formedness")
    c.add_argument("grammar")
    c.add_argument("--json", action="store_true", help="JSON lines instead of text")

    c = sub.add_parser("simplify", help="print the canonical simplified grammar")
    c.add_argument("grammar")

    c = sub.add_parser("run", help="recognize an input (file or stdin)")
    c.add_argument("grammar")
    c.add_argument("input", nargs="?", help="input file; stdin if omitted or '-'")
    c.add_argument("--backend", choices=BACKENDS, default="sped")
    c.add_argument("--trace", action="store_true", help="one JSON record per step on stderr")
    c.add_argument("--stats", action="store_true", help="track the peak live node count")
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="oracle nonterminal expansions")
    c.add_argument("--hash-cons", action="store_true", help="share equal nodes built in one step")

    c = sub.add_parser("fuzz", help="differential testing against the oracle")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--count", type=int, default=1000)
    c.add_argument("--max-rules", type=int, default=6)
    c.add_argument("--max-depth", type=int, default=5)
    c.add_argument("--max-input", type=int, default=12)
    c.add_argument("--fuel", type=int, default=200_000)
    c.add_argument("--stats", action="store_true", help="also measure the per-step growth constant")
    c.add_argument("--mutant", choices=sorted(MUTANTS), help="fuzz a deliberately broken engine")
    c.add_argument("--stop-after", type=int, help="stop after this many disagreements")
    c.add_argument("--show", type=int, default=1, help="disagreements to print")
    c.add_argument("--no-minimize", dest="minimize", action="store_false")
    c.add_argument("-v", "--verbose", action="store_true")

    c = sub.add_parser("bench", help="time one input; optional figures")
    c.add_argument("grammar")
    c.add_argument("input", nargs="?")
    c.add_argument("--backend", choices=BACKENDS, action="append",
                   help="repeatable; default sped")
    c.add_argument("--repeat", type=int, default=3)
    c.add_argument("--fuel", type=int, default=10**9)
    c.add_argument("--hash-cons", action="store_true")
    c.add_argument("--figures", metavar="DIR", help="write PNG figures here")
    c.add_argument("--stem", default="bench")

    c = sub.add_parser("scale", help="JSON scaling check over generated inputs")
    c.add_argument("--grammar", help="defaults to the bundled JSON-subset grammar")
    c.add_argument("--sizes", type=_sizes, default=[10_000, 100_000, 1_000_000],
                   help="comma list, e.g. 10k,100k,1m")
    c.add_argument("--repeat", type=int, default=1)
    c.add_argument("--factor", type=float, default=1.5, help="allowed deviation from linear")
    c.add_argument("--figures", metavar="DIR")
    c.add_argument("--stem", default="scale")

    c = sub.add_parser("gen-json", help="write a generated JSON input of about SIZE bytes")
    c.add_argument("size", type=lambda s: _sizes(s)[0])
    c.add_argument("-o", "--output")
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_MATCH
    if getattr(args, "backend", None) is None and args.command == "bench":
        args.backend = ["sped"]
    try:
        if args.command == "check":
            return cmd_check(args, out)
        if args.command == "simplify":
            return cmd_simplify(args, out)
        if args.command == "run":
            return cmd_run(args, out, err)
        if args.command == "fuzz":
            return cmd_fuzz(args, out, err)
        if args.command == "bench":
            return cmd_bench(args, out)
        if args.command == "scale":
            return cmd_scale(args, out)
        return cmd_gen_json(args, out)
    except _LoadError as exc:
        err.write(f"sped: {exc}\n")
        return EXIT_ERROR
    except EngineInvariantError as exc:
        err.write(f"sped: engine invariant violated: {exc}\n")
        return EXIT_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

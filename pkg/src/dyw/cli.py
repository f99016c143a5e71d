"""Command-line entry point (``dyw``)."""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import ratchet
from .engine import (
    AnalysisError, InconclusiveError, StrategySpaceError, analyze, verdict_json,
    verdict_text,
)
from .engine.explore import DEFAULT_CAP, DEFAULT_MAX_MUTATIONS
from .engine.knowledge import DEFAULT_BUDGET
from .models import load_manifest, manifest_path

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyw", description="Symbolic protocol analysis workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    limits = argparse.ArgumentParser(add_help=False)
    limits.add_argument("--strategy-cap", type=_positive, default=DEFAULT_CAP,
                        help="maximum number of explored executions")
    limits.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET,
                        help="node budget for each derivability search")
    limits.add_argument("--max-mutations", type=_positive, default=DEFAULT_MAX_MUTATIONS,
                        help="replaced slots allowed per execution")
    limits.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("analyze", parents=[limits], help="analyze .dym model files")
    p.add_argument("files", nargs="+", type=Path)
    p.add_argument("--attacker", choices=("active", "passive"),
                   help="override the attacker mode declared in the model")

    p = sub.add_parser("corpus", parents=[limits], help="check the corpus against expected verdicts")
    p.add_argument("--expect", type=Path, default=None, help="manifest (default: shipped corpus.json)")

    p = sub.add_parser("ratchet-demo", help="exercise the concrete Megolm ratchet")
    p.add_argument("--seed", help="128-byte seed as hex (random if omitted)")
    p.add_argument("--to", type=int, nargs="+", default=[], metavar="INDEX")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _limits(args) -> dict:
    return {"cap": args.strategy_cap, "budget": args.budget, "max_mutations": args.max_mutations}


def run_analyze(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    status = EXIT_OK
    documents = []
    for path in args.files:
        try:
            source = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            print(f"{path}: {exc}", file=err)
            return EXIT_INPUT
        try:
            verdicts = analyze(source, mode=args.attacker, model=path.name, **_limits(args))
        except AnalysisError as exc:
            if exc.diagnostics:
                for d in exc.diagnostics:
                    print(f"{path}:{d}", file=err)
            else:
                print(f"{path}: {exc}", file=err)
            return EXIT_INPUT
        except (InconclusiveError, StrategySpaceError) as exc:
            print(f"{path}: {exc}", file=err)
            status = EXIT_BUDGET
            continue
        if args.format == "json":
            documents.extend(verdict_json(v, path.name) for v in verdicts)
        else:
            for v in verdicts:
                print(verdict_text(v), file=out)
    if args.format == "json":
        json.dump(documents, out, indent=2)
        out.write("\n")
    return status


def _check_entry(job):
    model_path, queries, limits = job
    try:
        verdicts = analyze(Path(model_path).read_text(encoding="utf-8"),
                           model=Path(model_path).name, **limits)
    except (AnalysisError, InconclusiveError, StrategySpaceError) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    got = {str(v.query): v.result for v in verdicts}
    rows = [(q, want, got.get(q, "missing")) for q, want in queries]
    return rows, None


def worker_count() -> int:
    raw = os.environ.get("DYW_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        raise ValueError(f"DYW_THREADS must be a positive integer, got {raw!r}")
    return n


def run_corpus(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    manifest = args.expect or manifest_path()
    try:
        entries = load_manifest(manifest)
    except (OSError, ValueError, KeyError) as exc:
        print(f"{manifest}: cannot read manifest: {exc}", file=err)
        return EXIT_INPUT
    try:
        workers = worker_count()
    except ValueError as exc:
        print(str(exc), file=err)
        return EXIT_INPUT
    base = Path(manifest).parent
    jobs = []
    for e in entries:
        model = base / e.path
        if not model.is_file():
            print(f"{model}: model file not found", file=err)
            return EXIT_INPUT
        jobs.append((str(model), e.queries, _limits(args)))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_check_entry, jobs))  # keeps manifest order
    else:
        results = [_check_entry(j) for j in jobs]

    passed = 0
    report = []
    for e, (rows, error) in zip(entries, results):
        ok = error is None and all(want == got for _, want, got in rows)
        passed += ok
        report.append({"path": e.path, "pass": ok, "error": error,
                       "queries": [{"query": q, "expected": w, "got": g} for q, w, g in rows or []]})
        if args.format == "text":
            print(f"{'PASS' if ok else 'FAIL'} {e.path}", file=out)
            if error:
                print(f"    {error}", file=out)
            for q, want, got in rows or []:
                if want != got:
                    print(f"    {q}: expected {want}, got {got}", file=out)
    if args.format == "json":
        json.dump({"entries": report, "passed": passed, "total": len(entries)}, out, indent=2)
        out.write("\n")
    else:
        print(f"{len(entries)} entries: {passed} passed, {len(entries) - passed} failed", file=out)
    return EXIT_OK if passed == len(entries) else EXIT_MISMATCH


def run_ratchet_demo(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        seed = secrets.token_bytes(ratchet.SEED_SIZE) if args.seed is None else bytes.fromhex(args.seed)
        state = ratchet.init(seed)
    except ValueError as exc:
        print(f"bad seed: {exc}", file=err)
        return EXIT_INPUT
    rows = []
    for target in args.to or [0]:
        try:
            state = ratchet.advance(state, target)
        except ratchet.RatchetError as exc:
            print(f"cannot advance to {target}: {exc}", file=err)
            return EXIT_INPUT
        keys = ratchet.derive_message_keys(state)
        rows.append({
            "index": state.index,
            "hash_ops": ratchet.hash_op_count(state),
            "parts": [p.hex()[:16] for p in state.parts],
            "cipher_key": keys.cipher_key.hex(),
            "mac_key": keys.mac_key.hex(),
            "iv": keys.iv.hex(),
        })
    if args.format == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
        return EXIT_OK
    for r in rows:
        print(f"index {r['index']}: hash-op count {r['hash_ops']}", file=out)
        print(f"    parts  {' '.join(r['parts'])}", file=out)
        print(f"    cipher {r['cipher_key']}", file=out)
        print(f"    mac    {r['mac_key']}", file=out)
        print(f"    iv     {r['iv']}", file=out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    handler = {"analyze": run_analyze, "corpus": run_corpus, "ratchet-demo": run_ratchet_demo}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

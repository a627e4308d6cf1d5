"""Command-line pipeline: characterize, generate, energy, evaluate, oracle, serve.

All intermediate artifacts are JSON and every run with identical flags and
inputs produces byte-identical outputs; seeds are mandatory wherever
randomness is involved.  Files are written via a temp file and rename so a
failed run never leaves partial outputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import charact, corpus, evaluation, fitts, hexgeom, layout as layout_mod, qap

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _grid_from_args(args) -> hexgeom.HexGrid:
    return hexgeom.build_grid(args.grid_rows, args.grid_cols, args.key_width)


def _add_grid_flags(parser):
    parser.add_argument("--grid-rows", type=int, default=9)
    parser.add_argument("--grid-cols", type=int, default=9)
    parser.add_argument("--key-width", type=float, default=130.0)


def _load_user(path: str) -> tuple[evaluation.SimulatedUser, str]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return evaluation.user_from_dict(doc), doc.get("noise", "uniform")


def cmd_characterize(args) -> int:
    if bool(args.simulate) == bool(args.replay):
        print("characterize needs exactly one of --simulate or --replay", file=sys.stderr)
        return EXIT_USAGE
    if args.simulate:
        if args.seed is None:
            print("--seed is required with --simulate", file=sys.stderr)
            return EXIT_USAGE
        user, noise_kind = _load_user(args.simulate)
        session = charact.CharacterizationSession(_grid_from_args(args), args.seed)
        charact.simulate_characterization(
            session,
            user.model,
            mt_noise=user.mt_noise_sd,
            miss_rate=user.miss_rate,
            noise_kind=noise_kind,
            seed=user.seed,
        )
    else:
        session = charact.import_log(Path(args.replay).read_text(encoding="utf-8"))
    model = session.fit_model()
    _atomic_write(Path(args.out), fitts.model_to_json(model) + "\n")
    if args.log_out:
        _atomic_write(Path(args.log_out), charact.export_log(session))
    print(f"model written to {args.out} ({session.presented_count} targets presented)")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "qwerty":
        result = layout_mod.qwerty_layout(args.key_width)
    else:
        if args.corpus is None or args.seed is None:
            print("--corpus and --seed are required for optimized layouts", file=sys.stderr)
            return EXIT_USAGE
        digraphs = corpus.ingest_phrases(corpus.load_phrase_file(args.corpus))
        model = None
        if args.kind == "personalized":
            if args.model is None:
                print("--model is required for personalized layouts", file=sys.stderr)
                return EXIT_USAGE
            model = fitts.model_from_json(Path(args.model).read_text(encoding="utf-8"))
        result = layout_mod.generate_layout(
            args.kind,
            model,
            digraphs,
            _grid_from_args(args),
            seed=args.seed,
            restarts=args.restarts,
            max_iters=args.max_iters,
            tol=args.tol,
        )
    if args.flip:
        result = layout_mod.flip_vertical(result)
    _atomic_write(Path(args.out), layout_mod.layout_to_json(result) + "\n")
    print(f"{result.kind} layout written to {args.out}")
    return EXIT_OK


def cmd_energy(args) -> int:
    loaded = layout_mod.layout_from_json(Path(args.layout).read_text(encoding="utf-8"))
    digraphs = corpus.ingest_phrases(corpus.load_phrase_file(args.corpus))
    if args.model:
        model = fitts.model_from_json(Path(args.model).read_text(encoding="utf-8"))
    else:
        model = fitts.generic_model(loaded.grid.key_width)
    energy = layout_mod.fitts_digraph_energy(loaded, digraphs, model)
    print(f"{energy:.9f}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    user, _ = _load_user(args.user)
    prompts = corpus.load_phrase_file(args.prompts)
    rows = []
    for path in args.layouts.split(","):
        loaded = layout_mod.layout_from_json(Path(path).read_text(encoding="utf-8"))
        trials = evaluation.simulate_transcription(user, loaded, prompts)
        report = evaluation.compute_metrics(trials, loaded, layout_ref=path, user_ref=args.user)
        rows.append(report)
    header = f"{'layout':40s} {'acc%':>7s} {'wpm':>7s} {'wpm*':>7s} {'itr':>8s}"
    print(header)
    for r in rows:
        print(f"{r.layout_ref:40s} {r.accuracy:7.2f} {r.wpm:7.3f} {r.wpm_star:7.3f} {r.itr:8.2f}")
    if args.out:
        fieldnames = ["layout", "user", "n_trials", "accuracy_pct", "wpm", "wpm_star", "itr_bits_per_min"]
        sink = io.StringIO()
        writer = csv.DictWriter(sink, fieldnames=fieldnames)
        writer.writeheader()
        for r in rows:
            writer.writerow(evaluation.report_to_dict(r))
        _atomic_write(Path(args.out), sink.getvalue())
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.oracle_target != "qap":
        print(f"unknown oracle target {args.oracle_target!r}", file=sys.stderr)
        return EXIT_USAGE
    instance = qap.instance_from_json(Path(args.instance).read_text(encoding="utf-8"))
    fw = qap.solve_faq(instance, restarts=args.restarts, seed=args.seed)
    print(f"faq_objective={fw.objective!r} mapping={list(fw.mapping)}")
    bf = qap.brute_force(instance)
    print(f"brute_force_objective={bf.objective!r} mapping={list(bf.mapping)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    frontend = Path(args.frontend) if args.frontend else None
    app = create_app(Path(args.data_dir), frontend_dir=frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="keyfitts", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characterize", help="fit a directional movement model")
    p.add_argument("--simulate", metavar="USER_JSON", help="drive the protocol with a simulated user")
    p.add_argument("--replay", metavar="LOG_NDJSON", help="rebuild a session from an event log")
    p.add_argument("--out", required=True, metavar="MODEL_JSON")
    p.add_argument("--log-out", metavar="LOG_NDJSON", help="also export the session event log")
    p.add_argument("--seed", type=int)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("generate", help="synthesize a keyboard layout")
    p.add_argument("--kind", choices=("personalized", "generic", "qwerty"), required=True)
    p.add_argument("--model", metavar="MODEL_JSON")
    p.add_argument("--corpus", metavar="PHRASES_TXT")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, metavar="LAYOUT_JSON")
    p.add_argument("--flip", action="store_true", help="vertically flip the result")
    p.add_argument("--restarts", type=int, default=qap.DEFAULT_RESTARTS)
    p.add_argument("--max-iters", type=int, default=qap.DEFAULT_MAX_ITERS)
    p.add_argument("--tol", type=float, default=qap.DEFAULT_TOL)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("energy", help="expected seconds per keystroke of a layout")
    p.add_argument("--layout", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", help="directional model JSON; defaults to the generic constants")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("evaluate", help="simulate transcription and report metrics")
    p.add_argument("--layouts", required=True, help="comma-separated layout JSON paths")
    p.add_argument("--user", required=True, metavar="USER_JSON")
    p.add_argument("--prompts", required=True, metavar="PHRASES_TXT")
    p.add_argument("--out", metavar="REPORT_CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="cross-check solvers on an instance dump")
    p.add_argument("oracle_target", choices=("qap",))
    p.add_argument("--instance", required=True, metavar="INSTANCE_JSON")
    p.add_argument("--restarts", type=int, default=qap.DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--port", type=int, default=8070)
    p.add_argument("--host", default="127.0.0.1", help="bind address; use 0.0.0.0 for LAN access")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--frontend", help="directory of built UI files to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, charact.LogParseError, charact.ReplayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line entry point: parse, align, serialize, render, rollout,
replay, eval, folds, stats, synth, end-to-end."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .align import (
    DEFAULT_CONTEXT_RADIUS,
    align_demo,
    aligned_to_records,
    emit_aligned,
    load_aligned,
)
from .corpus import load_corpus, write_corpus
from .errors import StrokeSyncError
from .evaluation import (
    aggregate,
    corpus_stats,
    evaluate_lesson,
    folds_to_dicts,
    make_folds,
    report_to_dict,
)
from .jsonio import atomic_write_text, canonical_dumps
from .raster import fit_viewport, render, save_png
from .rollout import (
    END_BY_TOKEN,
    PredictedLesson,
    RolloutConfig,
    baseline_uniform_onset,
    lesson_from_aligned,
    lesson_to_json,
    load_lesson,
    oracle_predictor,
    replay_to_excalidraw,
    run_rollout,
    stub_predictor,
)
from .scene import parse_scene_file, scene_bounds
from .serial import END_TOKEN, encode_element
from .synth import SynthSpec, generate_corpus
from .transcript import parse_transcript_file


def _default_seed() -> int:
    return int(os.environ.get("STROKESYNC_SEED", "42"))


def _log(args: argparse.Namespace, level: str, message: str, **fields) -> None:
    if getattr(args, "json_logs", False):
        record = {"level": level, "message": message, **fields}
        print(json.dumps(record, ensure_ascii=False), file=sys.stderr)
    else:
        print(f"[{level}] {message}", file=sys.stderr)


def _write_json(path: str | Path, obj) -> None:
    atomic_write_text(Path(path), canonical_dumps(obj))


# --- subcommands ---------------------------------------------------------


def cmd_parse(args: argparse.Namespace) -> int:
    parsed = parse_scene_file(args.scene)
    for w in parsed.warnings:
        _log(args, "warning", w, file=str(args.scene))
    doc = {
        "source": str(args.scene),
        "n_elements": len(parsed.scene.elements),
        "n_deleted": parsed.n_deleted,
        "n_skipped": parsed.n_skipped,
        "elements": [
            {
                "id": e.id,
                "type": e.type.value,
                "updated_ms": e.updated_ms,
                "x": e.x,
                "y": e.y,
                "width": e.width,
                "height": e.height,
                "points": [[px, py] for px, py in e.points],
                "text": e.text,
            }
            for e in parsed.scene.elements
        ],
        "warnings": list(parsed.warnings),
    }
    if args.out:
        _write_json(args.out, doc)
    else:
        sys.stdout.write(canonical_dumps(doc))
    return 0


def cmd_align(args: argparse.Namespace) -> int:
    parsed = parse_scene_file(args.scene)
    for w in parsed.warnings:
        _log(args, "warning", w, file=str(args.scene))
    transcript = parse_transcript_file(args.transcript)
    aligned = align_demo(parsed.scene, transcript, k=args.context, band=args.band)
    emit_aligned(aligned, args.out)
    _log(args, "info", f"aligned {len(aligned)} elements -> {args.out}")
    return 0


def cmd_serialize(args: argparse.Namespace) -> int:
    aligned = load_aligned(args.aligned)
    lines = [encode_element(ae.element, ae.onset_ms) for ae in aligned]
    lines.append(END_TOKEN)
    text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    parsed = parse_scene_file(args.scene)
    frame = render(parsed.scene)
    save_png(frame, args.out)
    _log(args, "info", f"rendered {len(parsed.scene.elements)} elements -> {args.out}")
    return 0


def _build_rollout_config(args: argparse.Namespace) -> RolloutConfig:
    return RolloutConfig(
        max_elements=args.max_elements,
        include_canvas=not args.no_canvas,
        include_transcript=not args.no_transcript,
        one_shot=args.one_shot,
    )


def cmd_rollout(args: argparse.Namespace) -> int:
    cfg = _build_rollout_config(args)
    transcript = parse_transcript_file(args.transcript) if args.transcript else None
    if args.predictor in ("oracle", "uniform") and not args.aligned:
        raise StrokeSyncError(f"--aligned is required for the {args.predictor} predictor")

    if args.predictor == "uniform":
        gt = load_aligned(args.aligned)
        duration = args.duration_ms or max(ae.onset_ms for ae in gt) or 1
        pairs = baseline_uniform_onset([ae.element for ae in gt], duration)
        lesson = PredictedLesson(tuple(pairs), END_BY_TOKEN)
    else:
        if args.predictor == "oracle":
            pred = oracle_predictor(load_aligned(args.aligned), one_shot=cfg.one_shot)
        else:
            pred = stub_predictor(args.seed)
        lesson = run_rollout(pred, transcript, cfg)
    atomic_write_text(args.out, lesson_to_json(lesson))
    _log(
        args,
        "info",
        f"rollout wrote {len(lesson.elements)} elements "
        f"(terminated_by={lesson.terminated_by}) -> {args.out}",
    )
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    lesson = load_lesson(args.lesson)
    template = None
    if args.template:
        template = json.loads(Path(args.template).read_text(encoding="utf-8"))
    atomic_write_text(args.out, replay_to_excalidraw(lesson, template))
    _log(args, "info", f"replayed {len(lesson.elements)} elements -> {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    gt = lesson_from_aligned(load_aligned(args.gt))
    pred = load_lesson(args.pred)
    demo = evaluate_lesson(gt, pred.elements, demo_id=Path(args.gt).stem)
    report = report_to_dict(aggregate([demo]))
    _write_json(args.report, report)
    tae = "n/a" if report["tae_ms"] is None else f"{report['tae_ms']:.2f}"
    cham = "n/a" if report["chamfer"] is None else f"{report['chamfer']:.4f}"
    print(
        f"tae_ms={tae} chamfer={cham} "
        f"type_accuracy_pct={report['type_accuracy_pct']:.1f} "
        f"match_rate={report['match_rate']:.3f}"
    )
    return 0


def cmd_folds(args: argparse.Namespace) -> int:
    manifest = json.loads((Path(args.corpus) / "corpus.json").read_text(encoding="utf-8"))
    demos = [(d["id"], d["topic"]) for d in manifest["demos"]]
    folds = make_folds(demos, seed=args.seed)
    _write_json(args.out, folds_to_dicts(folds))
    _log(args, "info", f"wrote 5 folds over {len(demos)} demos -> {args.out}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    for demo in corpus.demos:
        for w in demo.warnings:
            _log(args, "warning", w, demo=demo.demo_id)
    stats = corpus_stats(
        [d.scene for d in corpus.demos],
        [d.transcript for d in corpus.demos if d.transcript is not None],
        topics=[d.topic for d in corpus.demos],
    )
    if args.out:
        _write_json(args.out, stats)
    else:
        sys.stdout.write(canonical_dumps(stats))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        seed=args.seed,
        n_demos=args.demos,
        clean=args.clean,
        timing_jitter_s=args.jitter,
    )
    corpus = generate_corpus(spec)
    write_corpus(corpus, args.out)
    _log(
        args,
        "info",
        f"wrote {len(corpus.demos)} synthetic demos "
        f"({corpus.recorded_stats['total_elements']} elements) -> {args.out}",
    )
    return 0


def _evaluate_demo(demo, k: int, max_elements: int):
    aligned = align_demo(demo.scene, demo.transcript, k=k)
    gt = lesson_from_aligned(aligned)
    cfg = RolloutConfig(max_elements=max_elements)
    vp = fit_viewport(scene_bounds(demo.scene))
    oracle_lesson = run_rollout(oracle_predictor(aligned), demo.transcript, cfg, vp)
    oracle_eval = evaluate_lesson(gt, oracle_lesson.elements, demo_id=demo.demo_id)
    duration = max(onset for _, onset in gt) or 1
    uniform = baseline_uniform_onset([e for e, _ in gt], duration)
    uniform_eval = evaluate_lesson(gt, uniform, demo_id=demo.demo_id)
    return demo.demo_id, oracle_eval, uniform_eval


def end_to_end(
    corpus_dir: str | Path,
    seed: int,
    k: int = DEFAULT_CONTEXT_RADIUS,
    max_elements: int = 256,
    jobs: int = 1,
    warn=lambda msg: None,
) -> dict:
    """Align every demo, roll out the oracle and uniform-onset baselines,
    and compare their TAE per fold."""
    corpus = load_corpus(corpus_dir)
    folds = make_folds(corpus.topics(), seed=seed)
    usable = []
    skipped = []
    for demo in corpus.demos:
        for w in demo.warnings:
            warn(w)
        if demo.transcript is None or len(demo.transcript.words) == 0:
            skipped.append(demo.demo_id)
            continue
        usable.append(demo)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda d: _evaluate_demo(d, k, max_elements), usable))
    else:
        results = [_evaluate_demo(d, k, max_elements) for d in usable]
    results.sort(key=lambda r: r[0])
    oracle_by_demo = {demo_id: ev for demo_id, ev, _ in results}
    uniform_by_demo = {demo_id: ev for demo_id, _, ev in results}

    fold_rows = []
    for fold in folds:
        evaluated = [d for d in fold.test_demo_ids if d in oracle_by_demo]
        row = {
            "fold_id": fold.fold_id,
            "test_topics": list(fold.test_topics),
            "test_demo_ids": list(fold.test_demo_ids),
            "evaluated_demos": evaluated,
            "oracle": None,
            "uniform": None,
        }
        if evaluated:
            row["oracle"] = report_to_dict(aggregate([oracle_by_demo[d] for d in evaluated]))
            row["uniform"] = report_to_dict(aggregate([uniform_by_demo[d] for d in evaluated]))
        fold_rows.append(row)
    return {
        "corpus": str(corpus_dir),
        "seed": seed,
        "context_radius": k,
        "skipped_demos": skipped,
        "folds": fold_rows,
    }


def cmd_end_to_end(args: argparse.Namespace) -> int:
    report = end_to_end(
        args.corpus,
        seed=args.seed,
        k=args.context,
        max_elements=args.max_elements,
        jobs=args.jobs,
        warn=lambda msg: _log(args, "warning", msg),
    )
    if args.out:
        _write_json(args.out, report)
    print(f"{'fold':>4} {'demos':>5} {'oracle TAE (ms)':>16} {'uniform TAE (ms)':>17}")
    for row in report["folds"]:
        if row["oracle"] is None:
            print(f"{row['fold_id']:>4} {0:>5} {'n/a':>16} {'n/a':>17}")
            continue
        print(
            f"{row['fold_id']:>4} {len(row['evaluated_demos']):>5} "
            f"{row['oracle']['tae_ms']:>16.2f} {row['uniform']['tae_ms']:>17.2f}"
        )
    return 0


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strokesync",
        description="Speech-synchronized whiteboard lesson toolkit",
    )
    parser.add_argument(
        "--json",
        dest="json_logs",
        action="store_true",
        help="emit machine-readable JSON logs on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse an .excalidraw scene file")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("align", help="align a scene to a transcript via DTW")
    p.add_argument("--scene", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--context", type=int, default=DEFAULT_CONTEXT_RADIUS)
    p.add_argument("--band", type=int, default=None)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("serialize", help="emit the token-grammar lines of an aligned demo")
    p.add_argument("--aligned", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_serialize)

    p = sub.add_parser("render", help="render a scene to a 640x360 PNG")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("rollout", help="run the autoregressive loop with a predictor")
    p.add_argument("--predictor", choices=("oracle", "uniform", "stub"), required=True)
    p.add_argument("--aligned", default=None, help="ground truth (oracle/uniform)")
    p.add_argument("--transcript", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--max-elements", type=int, default=256)
    p.add_argument("--no-canvas", action="store_true", help="disable visual context")
    p.add_argument("--no-transcript", action="store_true", help="disable transcript context")
    p.add_argument("--one-shot", action="store_true", help="single predictor call")
    p.add_argument("--duration-ms", type=int, default=None, help="uniform baseline span")
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("replay", help="write a predicted lesson as .excalidraw")
    p.add_argument("--lesson", required=True)
    p.add_argument("--template", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("eval", help="score a predicted lesson against ground truth")
    p.add_argument("--gt", required=True, help="aligned ground-truth file")
    p.add_argument("--pred", required=True, help="predicted lesson file")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("folds", help="build topic-stratified 5-fold splits")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_folds)

    p = sub.add_parser("stats", help="compute corpus statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--demos", type=int, default=24)
    p.add_argument("--out", required=True)
    p.add_argument("--clean", action="store_true", help="proportional timing, one word per element")
    p.add_argument("--jitter", type=float, default=0.0, help="word-timing jitter (s)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("end-to-end", help="oracle vs uniform baseline over all folds")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--context", type=int, default=DEFAULT_CONTEXT_RADIUS)
    p.add_argument("--max-elements", type=int, default=256)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_end_to_end)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StrokeSyncError as exc:
        _log(args, "error", str(exc), kind=type(exc).__name__)
        return 1
    except FileNotFoundError as exc:
        _log(args, "error", f"file not found: {exc.filename}", kind="FileNotFound")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

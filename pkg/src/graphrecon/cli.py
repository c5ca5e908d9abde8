"""Command-line front end.

Every command that writes outputs also writes a ``manifest.json`` run
manifest next to them; ``graphrecon replay MANIFEST`` reruns it.  Per-case
work is spread over ``RECON_THREADS`` worker processes (default 1).
Structured records go to stdout as JSON lines, a human summary to stderr.
Exit status: 0 ok, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .fileio import (Case, DataError, atomic_write, dumps_graph, labels_to_dict, list_cases,
                     read_case, read_graph, read_json, read_raster, write_case, write_json, write_raster)
from .labeling import label_graph, pixel_targets
from .metrics import aggregate, evaluate
from .render import render_svg
from .scoring import PROFILES, ConfidenceScorer, OracleScorer, RasterScorer, Weights
from .search import SearchConfig, explore_training, run_search
from .synth import CORRUPTION_TYPES, CorruptionSpec, Exhausted, InfeasibleParams, SynthParams, corrupt, synth
from .experiments import rectangle_count

MANIFEST = "manifest.json"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _log(record: dict) -> None:
    sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    sys.stdout.flush()


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def worker_count() -> int:
    raw = os.environ.get("RECON_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"RECON_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("RECON_THREADS must be >= 1")
    return n


def _map(fn, jobs: list) -> list:
    """Ordered map over per-case jobs, in parallel when RECON_THREADS > 1."""
    n = min(worker_count(), max(len(jobs), 1))
    if n == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, jobs))


def _weights(args) -> Weights:
    base = PROFILES[args.profile]
    return Weights(args.wj if args.wj is not None else base.w_j,
                   args.we if args.we is not None else base.w_e,
                   args.wr if args.wr is not None else base.w_r)


def _write_manifest(out_path: Path, argv: list[str], command: str, config: dict, seeds: dict,
                    inputs: list[str], outputs: list[str], started: float, evaluations: int = 0) -> None:
    manifest = {
        "command": command,
        "argv": argv,
        "config": config,
        "seeds": seeds,
        "inputs": inputs,
        "outputs": outputs,
        "wall_clock_s": round(time.perf_counter() - started, 3),
        "evaluations": evaluations,
        "threads": worker_count(),
    }
    write_json(out_path, manifest)


# ------------------------------------------------------------------- synth

def _synth_job(job):
    root, index, seed, rectangles, blur, flip, k, types, corrupt_seed = job
    s = seed + index
    params = SynthParams(rectangles=rectangles or rectangle_count(s), seed=s, blur=blur, flip=flip)
    made = synth(params)
    spec = CorruptionSpec(k=k, types=types, seed=corrupt_seed * 100003 + s)
    initial, edits = corrupt(made.gt, spec)
    case_id = f"case-{index:04d}"
    meta = {"case_id": case_id, "params": params.to_dict(), "corruption": spec.to_dict(),
            "edits": [e.to_dict() for e in edits], "rectangles": [list(r) for r in made.rects]}
    write_case(root, Case(case_id, made.gt, initial, made.corner_conf, made.edge_conf, made.region_ref, meta))
    return case_id


def cmd_synth(args, argv):
    started = time.perf_counter()
    out = Path(args.out)
    jobs = [(str(out), i, args.seed, args.rectangles, args.blur, args.flip, args.k, tuple(args.types),
             args.corrupt_seed) for i in range(args.count)]
    ids = _map(_synth_job, jobs)
    for cid in ids:
        _log({"event": "case", "case": cid})
    _write_manifest(out / MANIFEST, argv, "synth", vars_clean(args), {"seed": args.seed,
                    "corrupt_seed": args.corrupt_seed}, [], ids, started)
    _say(f"wrote {len(ids)} cases to {out}")
    return 0


# ----------------------------------------------------------------- corrupt

def _corrupt_job(job):
    path, k, types, seed, jitter = job
    case = read_case(path)
    base_seed = int(case.meta.get("params", {}).get("seed", 0))
    spec = CorruptionSpec(k=k, types=types, seed=seed * 100003 + base_seed, jitter=jitter)
    initial, edits = corrupt(case.gt, spec)
    meta = dict(case.meta, corruption=spec.to_dict(), edits=[e.to_dict() for e in edits])
    atomic_write(Path(path) / "initial.json", dumps_graph(initial))
    write_json(Path(path) / "meta.json", meta)
    return Path(path).name, len(edits)


def cmd_corrupt(args, argv):
    started = time.perf_counter()
    cases = list_cases(args.corpus)
    jobs = [(str(p), args.k, tuple(args.types), args.seed, args.jitter) for p in cases]
    done = _map(_corrupt_job, jobs)
    for cid, n in done:
        _log({"event": "corrupted", "case": cid, "edits": n})
    _write_manifest(Path(args.corpus) / "corrupt-manifest.json", argv, "corrupt", vars_clean(args),
                    {"seed": args.seed}, [str(p) for p in cases], [c for c, _ in done], started)
    _say(f"corrupted {len(done)} cases with k={args.k}")
    return 0


# ------------------------------------------------------------------ search

def _scorer_for(kind: str, case: Case, weights: Weights, scores_dir: str | None):
    if kind == "oracle":
        return OracleScorer(case.gt, weights)
    if kind == "confidence":
        return ConfidenceScorer(case.corner_conf, case.edge_conf, case.region_ref, weights)
    if scores_dir is None:
        raise UsageError("--scorer raster needs --scores-dir")
    d = Path(scores_dir) / case.case_id
    return RasterScorer(read_raster(d / "corner_scores.pgm", "scores"), read_raster(d / "edge_scores.pgm", "scores"),
                        case.region_ref, weights)


def _search_job(job):
    path, out, scorer_kind, scores_dir, cfg = job
    case = read_case(path)
    config = SearchConfig(**{**cfg, "weights": Weights(*cfg["weights"])})
    scorer = _scorer_for(scorer_kind, case, config.weights, scores_dir)
    result = run_search(case.initial, scorer, config)
    d = Path(out) / case.case_id
    atomic_write(d / "result.json", dumps_graph(result.graph))
    write_json(d / "score.json", result.breakdown.to_dict())
    atomic_write(d / "trace.jsonl", "".join(line + "\n" for line in result.trace_lines()))
    return {"event": "searched", "case": case.case_id, "total": result.total, "evaluations": result.evaluations,
            "initial_total": scorer.score(case.initial).total, "result": result.graph.digest,
            "trace": [json.loads(line) for line in result.trace_lines()]}


def cmd_search(args, argv):
    started = time.perf_counter()
    weights = _weights(args)
    config = SearchConfig(strategy=args.strategy, width=args.width, depth=args.depth,
                          addition_only_prefix=args.addition_only_prefix, temperature=args.temperature,
                          seed=args.seed, weights=weights)
    cases = list_cases(args.corpus)
    jobs = [(str(p), args.out, args.scorer, args.scores_dir, config.to_dict()) for p in cases]
    records = _map(_search_job, jobs)
    for r in records:
        _log(r)
    evals = sum(r["evaluations"] for r in records)
    _write_manifest(Path(args.out) / MANIFEST, argv, "search", {**vars_clean(args), "search": config.to_dict()},
                    {"seed": args.seed}, [str(p) for p in cases], [r["case"] for r in records], started, evals)
    gained = sum(r["total"] > r["initial_total"] for r in records)
    _say(f"searched {len(records)} cases ({args.strategy}, width {args.width}, depth {args.depth}); "
         f"{gained} improved; {evals} evaluations")
    return 0


# ----------------------------------------------------------------- explore

def _explore_job(job):
    path, out, mode, seed, weights = job
    case = read_case(path)
    w = Weights(*weights)
    scorer = OracleScorer(case.gt, w)
    base_seed = int(case.meta.get("params", {}).get("seed", 0))
    samples = explore_training(case.initial, case.gt, scorer, mode=mode, seed=seed * 100003 + base_seed)
    d = Path(out) / case.case_id
    for i, (g, labels) in enumerate(samples):
        atomic_write(d / f"sample_{i:02d}.json", dumps_graph(g))
        write_json(d / f"labels_{i:02d}.json", labels_to_dict(labels))
    return {"event": "explored", "case": case.case_id, "samples": len(samples),
            "totals": [scorer.score(g).total for g, _ in samples]}


def cmd_explore(args, argv):
    started = time.perf_counter()
    weights = _weights(args)
    cases = list_cases(args.corpus)
    jobs = [(str(p), args.out, args.mode, args.seed, weights.as_tuple()) for p in cases]
    records = _map(_explore_job, jobs)
    for r in records:
        _log(r)
    _write_manifest(Path(args.out) / MANIFEST, argv, "explore", vars_clean(args), {"seed": args.seed},
                    [str(p) for p in cases], [r["case"] for r in records], started)
    _say(f"explored {len(records)} cases ({args.mode}); {sum(r['samples'] for r in records)} samples")
    return 0


# ------------------------------------------------------------ label / score

def cmd_label(args, argv):
    started = time.perf_counter()
    pred, gt = read_graph(args.pred), read_graph(args.gt)
    if pred.canvas != gt.canvas:
        raise DataError(f"canvas mismatch: {pred.canvas} vs {gt.canvas}")
    labels = label_graph(pred, gt)
    out = Path(args.out)
    write_json(out, labels_to_dict(labels))
    outputs = [str(out)]
    if args.targets:
        for kind in ("corners", "edges"):
            p = Path(f"{args.targets}_{kind}.pgm")
            write_raster(p, pixel_targets(pred, labels, kind), "targets")
            outputs.append(str(p))
    _write_manifest(out.with_name(out.name + ".manifest.json"), argv, "label", vars_clean(args), {},
                    [args.pred, args.gt], outputs, started)
    n_ok = sum(labels.junctions.values()) + sum(labels.edges.values())
    _log({"event": "labeled", "correct": n_ok, "total": len(labels.junctions) + len(labels.edges)})
    _say(f"{n_ok}/{len(labels.junctions) + len(labels.edges)} primitives correct")
    return 0


def cmd_score(args, argv):
    started = time.perf_counter()
    case = read_case(args.case)
    graph = read_graph(args.graph) if args.graph else case.initial
    scorer = _scorer_for(args.scorer, case, _weights(args), args.scores_dir)
    breakdown = scorer.score(graph)
    record = {"event": "scored", **breakdown.to_dict()}
    if args.out:
        write_json(args.out, breakdown.to_dict())
        _write_manifest(Path(args.out + ".manifest.json"), argv, "score", vars_clean(args), {},
                        [args.case] + ([args.graph] if args.graph else []), [args.out], started, 1)
    _log(record)
    _say(f"total {breakdown.total:.4f} (region {breakdown.region:.4f})")
    return 0


# -------------------------------------------------------------------- eval

def _eval_job(job):
    path, pred_dir, pred_name = job
    case = read_case(path)
    pred = read_graph(Path(pred_dir) / case.case_id / pred_name) if pred_dir else read_graph(Path(path) / pred_name)
    return case.case_id, evaluate(pred, case.gt)


def cmd_eval(args, argv):
    started = time.perf_counter()
    cases = list_cases(args.corpus)
    jobs = [(str(p), args.pred_dir, args.pred_name) for p in cases]
    reports = _map(_eval_job, jobs)
    for cid, rep in reports:
        _log({"event": "case-metrics", "case": cid, **rep.to_dict()})
    report = aggregate([r for _, r in reports], args.average)
    _log({"event": "corpus-metrics", "average": args.average, **report.to_dict()})
    if args.out:
        out = Path(args.out)
        write_json(out.with_suffix(".json"), report.to_dict())
        atomic_write(out.with_suffix(".txt"), report.to_text())
        _write_manifest(out.with_name(out.stem + ".manifest.json"), argv, "eval", vars_clean(args), {},
                        [str(p) for p in cases], [str(out.with_suffix(".json")), str(out.with_suffix(".txt"))],
                        started)
    sys.stderr.write(report.to_text())
    return 0


# ------------------------------------------------------------------ render

def cmd_render(args, argv):
    started = time.perf_counter()
    graph = read_graph(args.graph)
    overlay = label_graph(graph, read_graph(args.gt)) if args.gt else None
    atomic_write(args.out, render_svg(graph, overlay))
    _write_manifest(Path(args.out + ".manifest.json"), argv, "render", vars_clean(args), {},
                    [args.graph] + ([args.gt] if args.gt else []), [args.out], started)
    _say(f"wrote {args.out}")
    return 0


def cmd_replay(args, argv):
    manifest = read_json(args.manifest)
    if "argv" not in manifest:
        raise DataError(f"{args.manifest}: no argv recorded")
    return main(manifest["argv"])


# ------------------------------------------------------------------ parser

def vars_clean(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and not callable(v)}


def _add_weights(p):
    p.add_argument("--profile", choices=sorted(PROFILES), default="default",
                   help="weight preset: default (1, 2, 50) or scratch (1, 1, 50)")
    p.add_argument("--wj", type=float)
    p.add_argument("--we", type=float)
    p.add_argument("--wr", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphrecon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rectangles", type=int, default=0, help="1-4; 0 draws per case")
    p.add_argument("--blur", type=int, default=2)
    p.add_argument("--flip", type=float, default=0.05)
    p.add_argument("--k", type=int, default=0, help="corruptions applied to initial.json")
    p.add_argument("--types", nargs="+", choices=CORRUPTION_TYPES, default=list(CORRUPTION_TYPES))
    p.add_argument("--corrupt-seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("corrupt", help="re-corrupt the initial graphs of a corpus in place")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--types", nargs="+", choices=CORRUPTION_TYPES, default=list(CORRUPTION_TYPES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", type=float, default=0.0)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("search", help="refine initial graphs by exploration")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=("beam", "smc", "greedy"), default="beam")
    p.add_argument("--width", type=int, default=5)
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--scorer", choices=("oracle", "confidence", "raster"), default="oracle")
    p.add_argument("--scores-dir", help="per-case corner_scores.pgm / edge_scores.pgm for --scorer raster")
    p.add_argument("--addition-only-prefix", type=int, default=0)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    _add_weights(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("explore", help="training-time exploration (data augmentation)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("scored", "random"), default="scored")
    p.add_argument("--seed", type=int, default=0)
    _add_weights(p)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("label", help="label a graph against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--targets", help="path prefix for pixel-target PGMs")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("score", help="score one graph")
    p.add_argument("--case", required=True)
    p.add_argument("--graph", help="defaults to the case's initial.json")
    p.add_argument("--scorer", choices=("oracle", "confidence", "raster"), default="oracle")
    p.add_argument("--scores-dir")
    p.add_argument("--out")
    _add_weights(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="corner/edge/region f1 over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pred-dir", help="directory of <case>/<pred-name>; defaults to the corpus itself")
    p.add_argument("--pred-name", default="result.json")
    p.add_argument("--average", choices=("micro", "macro"), default="micro")
    p.add_argument("--out", help="report path stem; writes .json and .txt")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render a graph as SVG")
    p.add_argument("--graph", required=True)
    p.add_argument("--gt", help="color primitives by their labels against this ground truth")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, argv)
    except UsageError as exc:
        _say(f"usage error: {exc}")
        return 1
    except (DataError, InfeasibleParams, Exhausted, FileNotFoundError) as exc:
        _say(f"data error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: decode, evaluate, search-errors, rank-viz, beam-curse,
random-baseline.  Every command writes a JSON results document embedding
a run manifest; histogram-shaped tables can additionally be written as
CSV for plotting.

Exit codes: 0 success, 2 usage, 3 data error, 4 budget/space error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys

from . import __version__
from .errors import BudgetError, DataError
from .harness import (
    NOT_FOUND,
    beam_curse_track,
    compare_searches,
    sampling_eval,
    top_region_eval,
)
from .model import load_scenario
from .quality import QualityFn
from .ranking import edit_rank, edit_rank_histogram, random_krg_baseline
from .search import (
    SearchStats,
    ancestral_sample,
    beam_search,
    brute_force,
    exact_top_k,
    length_normalized_score,
    min_heap_beam_search,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_BUDGET = 4

QUALITY_NAMES = {
    "edit": "edit_neg",
    "edit-sim": "edit_sim",
    "chrf": "chrf",
    "bleu": "sentence_bleu",
}


def _default_budget() -> int:
    return int(os.environ.get("HYPRANK_BUDGET", 10_000_000))


def _sig12(x: float) -> float:
    return float(f"{x:.12g}")


def _quality_fn(args) -> QualityFn:
    return QualityFn(
        kind=QUALITY_NAMES[args.quality],
        chrf_order=getattr(args, "chrf_n", 6),
        chrf_beta=getattr(args, "chrf_beta", 2.0),
        bleu_eps=getattr(args, "bleu_eps", 0.1),
    )


def _manifest(command: str, args, config: dict) -> dict:
    manifest = {
        "command": command,
        "scenario": getattr(args, "scenario", None),
        "config": config,
        "version": __version__,
    }
    if not args.no_timestamp:
        manifest["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return manifest


def _emit(args, document: dict) -> None:
    text = json.dumps(document, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [f"{v:.12g}" if isinstance(v, float) else v for v in row]
            )


def _read_scenario(path: str):
    with open(path, "rb") as f:
        return load_scenario(f.read())


def _hyp_doc(rank, hyp, vocab, alpha=None) -> dict:
    doc = {
        "rank": rank,
        "tokens": list(vocab.to_strings(hyp.tokens)),
        "logprob": hyp.logprob,
        "forced_eos": hyp.forced_eos,
    }
    if alpha is not None:
        doc["normalized_score"] = length_normalized_score(hyp, alpha)
    return doc


def cmd_decode(args) -> int:
    scenario = _read_scenario(args.scenario)
    model = scenario.model
    stats = SearchStats()
    alpha = args.alpha
    if args.method == "beam":
        hyps = beam_search(model, args.source, args.beam, args.k, alpha, stats)
    elif args.method == "heap-beam":
        hyps = min_heap_beam_search(model, args.source, args.beam, args.k, alpha, stats)
    elif args.method == "exact":
        hyps = exact_top_k(model, args.source, args.k, budget=args.budget, stats=stats)
    elif args.method == "brute":
        hyps = brute_force(model, args.source, args.k if args.k > 0 else None)
    else:  # sample
        hyps = ancestral_sample(model, args.source, args.samples, args.seed)
    payload = {
        "source": args.source,
        "method": args.method,
        "hypotheses": [
            _hyp_doc(i, h, scenario.vocab, alpha) for i, h in enumerate(hyps)
        ],
        "nodes": stats.nodes,
    }
    config = {
        "method": args.method,
        "k": args.k,
        "beam": args.beam,
        "samples": args.samples,
        "seed": args.seed,
        "alpha": args.alpha,
        "budget": args.budget,
    }
    _emit(args, {"manifest": _manifest("decode", args, config), "payload": payload})
    return EXIT_OK


def _record_doc(rec) -> dict:
    doc = {
        "source_id": rec.source_id,
        "k": rec.k,
        "krg": rec.krg,
        "kqrg": rec.kqrg,
        "duplicates": rec.duplicates,
    }
    return doc


def cmd_evaluate(args) -> int:
    scenario = _read_scenario(args.scenario)
    fn = _quality_fn(args)
    if args.mode == "top-region":
        summary = top_region_eval(scenario, args.k, fn, budget=args.budget)
    else:
        summary = sampling_eval(scenario, args.samples, args.seed, fn)
    payload = {
        "mode": args.mode,
        "records": [_record_doc(r) for r in summary.records],
        "corpus": {
            "mean_krg": summary.mean_krg,
            "mean_kqrg": summary.mean_kqrg,
            "empty_mode_rate": summary.empty_mode_rate,
            "excluded": summary.excluded,
        },
    }
    if summary.decile_histogram is not None:
        payload["decile_histogram"] = summary.decile_histogram
    config = {
        "mode": args.mode,
        "k": args.k,
        "samples": args.samples,
        "quality": args.quality,
        "seed": args.seed,
        "budget": args.budget,
    }
    _emit(args, {"manifest": _manifest("evaluate", args, config), "payload": payload})
    return EXIT_OK


def cmd_search_errors(args) -> int:
    scenario = _read_scenario(args.scenario)
    beams = args.beams
    rows = []
    for b in beams:
        comparisons = compare_searches(scenario, b, budget=args.budget)
        n = len(comparisons)
        row = {"beam": b}
        for method in ("beam", "heap-beam", "exact"):
            errors = sum(1 for c in comparisons if not c.mode_match[method])
            key = method.replace("-", "_")
            row[f"rate_{key}"] = errors / n
            row[f"nodes_{key}"] = sum(c.nodes[method] for c in comparisons)
        rows.append(row)
    if args.csv:
        header = list(rows[0].keys())
        _write_csv(args.csv, header, [[r[h] for h in header] for r in rows])
    config = {"beams": beams, "budget": args.budget}
    _emit(
        args,
        {"manifest": _manifest("search-errors", args, config), "payload": {"rows": rows}},
    )
    return EXIT_OK


def cmd_rank_viz(args) -> int:
    scenario = _read_scenario(args.scenario)
    vocab = scenario.vocab
    per_source = {}
    reports = []
    excluded = []
    for sid in scenario.source_ids:
        try:
            hyps = exact_top_k(scenario.model, sid, args.k, budget=args.budget)
        except BudgetError:
            excluded.append(sid)
            continue
        ref = scenario.references[sid]
        docs = []
        for h in hyps:
            rep = edit_rank(
                h.tokens, ref, V=vocab.size, max_len=scenario.model.max_len,
                eos_id=vocab.eos_id,
            )
            reports.append(rep)
            docs.append(
                {
                    "tokens": list(vocab.to_strings(h.tokens)),
                    "logprob": h.logprob,
                    "e": rep.e,
                    "T": rep.T,
                    "count_below": rep.count_below,
                    "total": rep.total,
                    "percentile": _sig12(float(rep.percentile)),
                    "decile": rep.decile,
                }
            )
        per_source[sid] = docs
    histogram = edit_rank_histogram(reports)
    if args.csv:
        _write_csv(args.csv, ["decile", "count"], list(enumerate(histogram)))
    payload = {
        "sources": per_source,
        "decile_histogram": histogram,
        "excluded": excluded,
    }
    config = {"k": args.k, "budget": args.budget}
    _emit(args, {"manifest": _manifest("rank-viz", args, config), "payload": payload})
    return EXIT_OK


def cmd_beam_curse(args) -> int:
    scenario = _read_scenario(args.scenario)
    fn = _quality_fn(args)
    records, histogram = beam_curse_track(scenario, args.beams, fn)
    payload = {
        "records": [
            {
                "source_id": r.source_id,
                "beam_sizes": list(r.beam_sizes),
                "qualities": list(r.qualities),
                "better_count": r.better_count,
                "worse_count": r.worse_count,
                "equal_count": r.equal_count,
                "net_change": r.net_change,
            }
            for r in records
        ],
        "histogram": {str(net): count for net, count in sorted(histogram.items())},
    }
    if args.csv:
        _write_csv(
            args.csv, ["net_change", "count"], sorted(histogram.items())
        )
    config = {"beams": args.beams, "quality": args.quality}
    _emit(args, {"manifest": _manifest("beam-curse", args, config), "payload": payload})
    return EXIT_OK


def cmd_random_baseline(args) -> int:
    mean = random_krg_baseline(
        args.k, n_perms=args.perms, seed=args.seed, exhaustive=args.exhaustive
    )
    payload = {
        "k": args.k,
        "perms": "exhaustive" if args.exhaustive else args.perms,
        "mean_krg": mean,
    }
    config = {
        "k": args.k,
        "perms": args.perms,
        "seed": args.seed,
        "exhaustive": args.exhaustive,
    }
    _emit(
        args,
        {"manifest": _manifest("random-baseline", args, config), "payload": payload},
    )
    return EXIT_OK


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyprank",
        description="Exact top-k decoding and hypothesis-ranking evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="write results document here")
        p.add_argument(
            "--no-timestamp",
            action="store_true",
            help="omit the timestamp from the manifest (golden tests)",
        )

    p = sub.add_parser("decode", help="run one decoder on one source")
    common(p)
    p.add_argument("--source", required=True)
    p.add_argument(
        "--method",
        required=True,
        choices=["beam", "heap-beam", "exact", "sample", "brute"],
    )
    p.add_argument("--k", type=int, default=1, help="outputs requested (brute: 0 = all)")
    p.add_argument("--beam", type=int, default=4)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--budget", type=int, default=_default_budget())
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("evaluate", help="corpus evaluation (top region / sampling)")
    common(p)
    p.add_argument("--mode", choices=["top-region", "sampling"], default="top-region")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--quality", choices=["edit-sim", "chrf", "bleu"], default="edit-sim")
    p.add_argument("--chrf-n", type=int, default=6)
    p.add_argument("--chrf-beta", type=float, default=2.0)
    p.add_argument("--bleu-eps", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=_default_budget())
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("search-errors", help="error rates per beam width")
    common(p)
    p.add_argument("--beams", type=_csv_ints, required=True)
    p.add_argument("--budget", type=int, default=_default_budget())
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_search_errors)

    p = sub.add_parser("rank-viz", help="edit-distance rank deciles of exact top-k")
    common(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--budget", type=int, default=_default_budget())
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_rank_viz)

    p = sub.add_parser("beam-curse", help="top-1 quality across beam sizes")
    common(p)
    p.add_argument("--beams", type=_csv_ints, required=True)
    p.add_argument(
        "--quality", choices=["edit", "edit-sim", "chrf", "bleu"], default="edit-sim"
    )
    p.add_argument("--chrf-n", type=int, default=6)
    p.add_argument("--chrf-beta", type=float, default=2.0)
    p.add_argument("--bleu-eps", type=float, default=0.1)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_beam_curse)

    p = sub.add_parser("random-baseline", help="mean kRG of random permutations")
    common(p, scenario=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--perms", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true")
    p.set_defaults(func=cmd_random_baseline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        _validate_args(parser, args)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _validate_args(parser, args) -> None:
    if args.command in ("search-errors", "beam-curse"):
        if args.command == "beam-curse" and len(args.beams) < 2:
            parser.error("need >= 2 beam sizes")
        if any(b < 1 for b in args.beams):
            parser.error("beam sizes must be >= 1")
    if args.command == "random-baseline" and args.exhaustive and args.k > 6:
        parser.error("--exhaustive supports k <= 6 only")


if __name__ == "__main__":
    sys.exit(main())

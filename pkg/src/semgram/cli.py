"""Command-line entry points.

    semgram parse          corpus + grammar -> tree dump and/or stats table
    semgram induce         scripted / interactive / served induction session
    semgram ontology       grammar -> taxonomy triple file (optional inference)
    semgram instances      tree dump -> long-tail isa triples
    semgram relex-train    fit one relation model per predicate
    semgram relex-eval     k-fold evaluation report
    semgram relex-predict  apply saved models to a corpus
    semgram stats          export a session checkpoint's iteration series
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

from . import relext
from .corpus import load_corpus
from .grammar import load_grammar, save_grammar
from .induction import (
    InductionSession, LayerPriority, StopCriteria, load_session,
    parse_decision_script, run_scripted,
)
from .ontology import (
    export_evaluation_sample, extract_instances, extract_taxonomy,
    infer_relations, load_assertions, save_assertions,
)
from .parsing.match import MatchLimits
from .parsing.parser import DEFAULT_PARAMS, parse_corpus, stats_from_outcomes
from .relext.evaluate import crossvalidate, predict
from .relext.models import KINDS, TrainConfig, load_model, save_model, train
from .treeio import load_trees, save_trees


def _params(args):
    params = DEFAULT_PARAMS
    if getattr(args, "beta", None) is not None:
        params = replace(params, beta=args.beta)
    if getattr(args, "max_plain_nonterminals", None) is not None or \
            getattr(args, "max_first_span", None) is not None:
        limits = MatchLimits(
            args.max_plain_nonterminals or 2, args.max_first_span or 3)
        params = replace(params, limits=limits)
    return params


def _priority(text: str) -> LayerPriority:
    return LayerPriority(tuple(p.strip() for p in text.split(",") if p.strip()))


def _add_parse_flags(sub):
    sub.add_argument("--beta", type=float, default=None,
                     help="reliability weight (default 0.05)")
    sub.add_argument("--max-plain-nonterminals", type=int, default=None)
    sub.add_argument("--max-first-span", type=int, default=None)
    sub.add_argument("--workers", type=int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="semgram",
        description="grammar + ontology induction from layered text")
    subs = top.add_subparsers(dest="command", required=True)

    p = subs.add_parser("parse", help="parse a corpus and report statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--grammar", required=True)
    p.add_argument("--start", default=None, help="start non-terminal")
    p.add_argument("--trees", default=None, help="write the tree dump here")
    p.add_argument("--stats", action="store_true", help="print the stats table")
    _add_parse_flags(p)
    p.set_defaults(func=_cmd_parse)

    p = subs.add_parser("induce", help="run an induction session")
    p.add_argument("--corpus", required=True)
    p.add_argument("--grammar", required=True, help="seed grammar file")
    p.add_argument("--grammar-out", default=None,
                   help="write the induced grammar here (default: overwrite input)")
    p.add_argument("--priority", type=_priority, default=None, required=False,
                   help="layer priority, comma separated (e.g. class,lexical)")
    p.add_argument("--iterations", "--max-iter", dest="iterations", type=int,
                   default=20)
    p.add_argument("--decisions", default=None, help="decision script file")
    p.add_argument("--auto", action="store_true",
                   help="assign positive to unscripted iterations")
    p.add_argument("--interactive", action="store_true",
                   help="prompt for each decision on the terminal")
    p.add_argument("--serve", nargs="?", const="", default=None,
                   metavar="HOST:PORT",
                   help="expose the session over HTTP for the review UI")
    p.add_argument("--checkpoint", default=None, help="checkpoint directory")
    p.add_argument("--resume", action="store_true",
                   help="resume from the checkpoint directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tp-sample-size", type=int, default=10_000)
    p.add_argument("--wall-clock", type=float, default=None,
                   help="stop after this many seconds")
    _add_parse_flags(p)
    p.set_defaults(func=_cmd_induce)

    p = subs.add_parser("ontology", help="map the grammar to taxonomy triples")
    p.add_argument("--grammar", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--class-layers", default="class,named-entity")
    p.add_argument("--instance-layers", default="instance")
    p.add_argument("--seed-triples", default=None)
    p.add_argument("--infer", action="store_true",
                   help="append inferred assertions (closure + isa lifting)")
    p.add_argument("--eval-sample", default=None,
                   help="write a manual-evaluation CSV sample here")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_ontology)

    p = subs.add_parser("instances", help="mine isa triples from null nodes")
    p.add_argument("--corpus", required=True)
    p.add_argument("--trees", required=True, help="tree dump from `parse`")
    p.add_argument("--out", required=True)
    p.add_argument("--min-freq", type=int, default=3)
    p.add_argument("--priority", type=_priority, default=None,
                   help="generalization priority (default: instance,lexical)")
    p.add_argument("--instance-layers", default="instance")
    p.set_defaults(func=_cmd_instances)

    p = subs.add_parser("relex-train", help="train relation models")
    p.add_argument("--corpus", required=True)
    p.add_argument("--grammar", required=True)
    p.add_argument("--relations", required=True)
    p.add_argument("--kind", choices=KINDS, default="lrcl")
    p.add_argument("--model-out", required=True,
                   help="directory for per-predicate model files")
    p.add_argument("--negative-ratio", type=int, default=10)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    _add_parse_flags(p)
    p.set_defaults(func=_cmd_relex_train)

    p = subs.add_parser("relex-eval", help="k-fold relation evaluation")
    p.add_argument("--corpus", required=True)
    p.add_argument("--grammar", required=True)
    p.add_argument("--relations", required=True)
    p.add_argument("--kind", choices=KINDS, default="lrcl")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--negative-ratio", type=int, default=10)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="write the table here too")
    _add_parse_flags(p)
    p.set_defaults(func=_cmd_relex_eval)

    p = subs.add_parser("relex-predict", help="predict relations with saved models")
    p.add_argument("--corpus", required=True)
    p.add_argument("--grammar", required=True)
    p.add_argument("--model", required=True, help="model file from relex-train")
    p.add_argument("--predicate", required=True)
    p.add_argument("--out", default=None, help="TSV output (default stdout)")
    _add_parse_flags(p)
    p.set_defaults(func=_cmd_relex_predict)

    p = subs.add_parser("stats", help="export a checkpoint's iteration series")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", default=None, help="CSV output (default stdout)")
    p.set_defaults(func=_cmd_stats)

    return top


# ---------------------------------------------------------------------------


def _load_inputs(args):
    sentences = load_corpus(args.corpus)
    grammar = load_grammar(args.grammar)
    return sentences, grammar


def _cmd_parse(args) -> int:
    sentences, grammar = _load_inputs(args)
    start = args.start or grammar.start_symbol
    outcomes = parse_corpus(sentences, start, grammar.snapshot(),
                            _params(args), workers=args.workers)
    if args.trees:
        save_trees([o.tree for o in outcomes], args.trees)
    if args.stats or not args.trees:
        print(stats_from_outcomes(outcomes).table())
    return 0


def _default_priority(sentences) -> LayerPriority:
    names = set()
    for sent in sentences:
        names.update(sent.layer_names())
    order = [n for n in ("class", "instance", "named-entity", "small-caps")
             if n in names]
    return LayerPriority(tuple(order) + ("lexical",))


def _cmd_induce(args) -> int:
    sentences = load_corpus(args.corpus)
    if args.resume:
        if not args.checkpoint:
            print("--resume needs --checkpoint", file=sys.stderr)
            return 2
        session = load_session(args.checkpoint, sentences, workers=args.workers)
    else:
        grammar = load_grammar(args.grammar)
        priority = args.priority or _default_priority(sentences)
        session = InductionSession(
            grammar, sentences, priority, params=_params(args),
            stop=StopCriteria(max_iterations=None,
                              wall_clock_seconds=args.wall_clock),
            seed=args.seed, workers=args.workers,
            tp_sample_size=args.tp_sample_size)
    if args.serve is not None:
        from .service import DEFAULT_BIND, SessionService, serve
        service = SessionService(session, iterations=args.iterations,
                                 auto=args.auto,
                                 checkpoint_dir=args.checkpoint)
        server = serve(service, args.serve or DEFAULT_BIND)
        host, port = server.server_address[:2]
        print(f"serving session on http://{host}:{port}", file=sys.stderr)
        try:
            service.join()
        except KeyboardInterrupt:
            pass
        server.shutdown()
    elif args.interactive:
        _interactive_loop(session, args.iterations, args.checkpoint)
    else:
        decisions = (parse_decision_script(args.decisions)
                     if args.decisions else {})
        run_scripted(session, decisions, args.iterations,
                     auto=args.auto, checkpoint_dir=args.checkpoint)
    out = args.grammar_out or args.grammar
    save_grammar(session.grammar, out)
    for it, rule, prop in session.decision_log:
        print(f"{it}\t{prop}\t{rule}")
    return 0


def _interactive_loop(session, iterations, checkpoint_dir) -> None:
    for _ in range(iterations):
        if session.stopped or session.should_stop():
            break
        candidate = session.run_iteration()
        if candidate is None:
            print("nothing left to induce", file=sys.stderr)
            break
        print(f"\niteration {session.iteration + 1}: {candidate.display()}"
              f"  [frequency {candidate.frequency}]")
        for ref in candidate.samples:
            sent = session.by_id[ref.sentence_id]
            words = list(sent.words)
            words.insert(ref.end, "]")
            words.insert(ref.start, "[")
            print("   " + " ".join(words))
        prop = ""
        while prop not in ("positive", "neutral", "negative", "non-inducible"):
            prop = input("property [positive/neutral/negative/non-inducible]: ").strip() or "positive"
        session.apply_decision(prop)
        if checkpoint_dir:
            session.checkpoint(checkpoint_dir)


def _cmd_ontology(args) -> int:
    grammar = load_grammar(args.grammar)
    class_layers = frozenset(args.class_layers.split(","))
    instance_layers = frozenset(args.instance_layers.split(","))
    assertions = extract_taxonomy(grammar, class_layers, instance_layers)
    if args.infer:
        seed = load_assertions(args.seed_triples) if args.seed_triples else []
        assertions = assertions + infer_relations(assertions, seed)
    save_assertions(assertions, args.out)
    if args.eval_sample:
        export_evaluation_sample(assertions, args.eval_sample, seed=args.seed)
    print(f"{len(assertions)} assertions -> {args.out}", file=sys.stderr)
    return 0


def _cmd_instances(args) -> int:
    sentences = {s.id: s for s in load_corpus(args.corpus)}
    trees = load_trees(args.trees)
    nodes = [leaf for tree in trees for leaf in tree.root.leaves()
             if leaf.is_null]
    instance_layers = frozenset(args.instance_layers.split(","))
    assertions = extract_instances(nodes, sentences, args.min_freq,
                                   priority=args.priority,
                                   instance_layers=instance_layers)
    save_assertions(assertions, args.out)
    print(f"{len(assertions)} isa assertions -> {args.out}", file=sys.stderr)
    return 0


def _relex_setup(args):
    sentences, grammar = _load_inputs(args)
    examples = relext.load_relations(args.relations)
    missing = {e.sentence_id for e in examples} - {s.id for s in sentences}
    if missing:
        print(f"relations reference unknown sentences: {sorted(missing)[:5]}",
              file=sys.stderr)
        raise SystemExit(2)
    outcomes = parse_corpus(sentences, grammar.start_symbol,
                            grammar.snapshot(), _params(args),
                            workers=args.workers)
    trees = {o.tree.sentence_id: o.tree for o in outcomes}
    by_id = {s.id: s for s in sentences}
    return examples, trees, by_id


def _cmd_relex_train(args) -> int:
    examples, trees, sentences = _relex_setup(args)
    os.makedirs(args.model_out, exist_ok=True)
    config = TrainConfig(l2=args.l2)
    by_predicate: dict[str, list] = {}
    for ex in examples:
        by_predicate.setdefault(ex.predicate, []).append(ex)
    for predicate in sorted(by_predicate):
        converted, _failed, stats = relext.convert_examples(
            by_predicate[predicate], trees, sentences)
        positives = [vt for _e, _l, vt in converted]
        if not positives:
            print(f"{predicate}: no convertible examples, skipped",
                  file=sys.stderr)
            continue
        negatives = ()
        if args.kind in ("lr", "lrc", "lrcl"):
            sids = sorted({e.sentence_id for e, _l, _v in converted})
            negatives = relext.sample_negatives(
                [(e.sentence_id, vt) for e, _l, vt in converted],
                sids, trees, sentences,
                ratio=args.negative_ratio, seed=args.seed)
        model = train(args.kind, positives, negatives, config)
        path = os.path.join(args.model_out, f"{predicate}.{args.kind}.json")
        save_model(model, path)
        print(f"{predicate}: {len(positives)} positives, "
              f"{len(negatives)} negatives -> {path}", file=sys.stderr)
    return 0


def _cmd_relex_eval(args) -> int:
    examples, trees, sentences = _relex_setup(args)
    report = crossvalidate(args.kind, examples, trees, sentences,
                           folds=args.folds, seed=args.seed,
                           negative_ratio=args.negative_ratio,
                           config=TrainConfig(l2=args.l2))
    table = report.table()
    print(table)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(table + "\n")
    return 0


def _cmd_relex_predict(args) -> int:
    sentences, grammar = _load_inputs(args)
    model = load_model(args.model)
    outcomes = parse_corpus(sentences, grammar.start_symbol,
                            grammar.snapshot(), _params(args),
                            workers=args.workers)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for sent, outcome in zip(sentences, outcomes):
            for terms in predict(model, outcome.tree, sent):
                text = " ".join(sent.words[terms[0].start:terms[0].end])
                out.write(f"{args.predicate}\t{sent.id}\t{text}\t"
                          f"{terms[0].start}:{terms[0].end}\n")
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_stats(args) -> int:
    path = os.path.join(args.checkpoint, "history.csv")
    if not os.path.exists(path):
        print(f"no history at {path}", file=sys.stderr)
        return 2
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

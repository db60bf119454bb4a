"""Subcommand front-end: index build/query, mine, lint, augment, prompt,
eval, overlap, stats.

Configuration comes from an optional key=value file (--config or
NCKIT_CONFIG), overridden by flags; environment variables supply default
paths only (NCKIT_WORDNET_DIR, NCKIT_INDEX_DIR). Every artifact carries a
provenance header with the tool version, the effective-config hash, and the
index fingerprint when one was used, and no timestamps, so identical runs
produce byte-identical outputs. Exit codes: 0 success, 1 data errors, 2 usage
errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import NCKitError, __version__
from . import curation, dataset, metrics, mining, overlap, wordnet
from .corpus import iter_documents
from .ngram_index import NGramConfig, NGramIndex, build_index, bucket_of, manifest_fingerprint
from .scorer_client import ExternalScorer, ScorerError

PROG = "nckit"

_CONFIG_KEYS = (
    "manifest",
    "index",
    "wordnet",
    "n_values",
    "cap",
    "workers",
    "threshold",
    "take",
    "examples",
    "seed",
    "catch_all_preps",
    "catch_all_verbs",
)


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    cfg: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise NCKitError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        cfg[key] = value.strip()
    return cfg


class _Run:
    """Effective settings for one invocation: flags beat config beats env."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.cfg = _load_config(args.config or os.environ.get("NCKIT_CONFIG"))

    def get(self, key: str, default=None):
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.cfg:
            return self.cfg[key]
        if key == "wordnet":
            return os.environ.get("NCKIT_WORDNET_DIR") or default
        if key == "index":
            return os.environ.get("NCKIT_INDEX_DIR") or default
        return default

    def require(self, key: str, flag: str):
        value = self.get(key)
        if value is None:
            raise ValueError(f"missing required {flag} (flag or config key {key!r})")
        return value

    def config_hash(self) -> str:
        effective = {k: str(self.get(k)) for k in _CONFIG_KEYS if self.get(k) is not None}
        blob = json.dumps(effective, sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=8).hexdigest()

    def provenance(self, fingerprint: str | None = None) -> str:
        obj = {
            "tool": f"{PROG}/{__version__}",
            "config_hash": self.config_hash(),
            "index_fingerprint": fingerprint,
        }
        return json.dumps(obj, sort_keys=True)

    def provenance_line(self, fingerprint: str | None = None) -> str:
        return f"provenance: {self.provenance(fingerprint)}"


def _parse_n_values(value) -> tuple[int, ...]:
    if isinstance(value, tuple):
        return value
    try:
        return tuple(int(v) for v in str(value).split(","))
    except ValueError as exc:
        raise ValueError(f"bad n_values {value!r}: expected comma-separated integers") from exc


def _ngram_config(run: _Run) -> NGramConfig:
    return NGramConfig(
        n_values=_parse_n_values(run.get("n_values", "3,4,5")),
        cap=int(run.get("cap", 6)),
    )


def _open_index(run: _Run) -> NGramIndex:
    directory = run.require("index", "--index")
    index = NGramIndex(directory)
    manifest = run.get("manifest")
    if manifest is not None and not index.verify_against(manifest):
        if not getattr(run.args, "force", False):
            raise NCKitError(
                f"index {directory} is stale for manifest {manifest} "
                "(corpus content changed); pass --force to use it anyway"
            )
    return index


def _catch_all_rules(run: _Run) -> curation.CatchAllRuleSet:
    kwargs = {}
    preps = run.get("catch_all_preps")
    if preps is not None:
        kwargs["prepositions"] = tuple(p.strip() for p in str(preps).split(",") if p.strip())
    verbs = run.get("catch_all_verbs")
    if verbs is not None:
        kwargs["verb_phrases"] = tuple(v.strip() for v in str(verbs).split(",") if v.strip())
    return curation.CatchAllRuleSet(**kwargs) if kwargs else curation.DEFAULT_CATCH_ALL_RULES


def _load_kb(run: _Run, required: bool = True) -> wordnet.WordNetKB | None:
    directory = run.get("wordnet")
    if directory is None:
        if required:
            raise ValueError("missing required --wordnet (or NCKIT_WORDNET_DIR)")
        return None
    return wordnet.load(directory)


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# -- subcommands ----------------------------------------------------------------


def _cmd_index_build(run: _Run) -> int:
    manifest = run.require("manifest", "--manifest")
    out_dir = Path(run.require("index", "--out"))
    config = _ngram_config(run)
    if (out_dir / "index.json").exists() and not run.args.force:
        try:
            existing = NGramIndex(out_dir)
        except NCKitError:
            existing = None
        if existing is not None and existing.verify_against(manifest) and existing.config == config:
            print(f"{out_dir}: index up to date (fingerprint {existing.fingerprint})")
            return 0
    index = build_index(manifest, out_dir, config, workers=int(run.get("workers", 1)))
    corpus_info = index.meta["corpus"]
    print(f"# {run.provenance_line(index.fingerprint)}")
    print(
        f"built {out_dir}: {corpus_info['documents']} documents, "
        f"{corpus_info['tokens']} tokens, n_values={list(config.n_values)}, cap={config.cap}"
    )
    return 0


def _cmd_index_query(run: _Run) -> int:
    index = _open_index(run)
    gram = tuple(t for t in run.args.gram.split())
    from .corpus import normalize_text

    tokens = normalize_text(" ".join(gram))
    count = index.count(tokens)
    print(f"# {run.provenance_line(index.fingerprint)}")
    print(f"count={count} bucket={bucket_of(count).value}")
    return 0


def _cmd_stats(run: _Run) -> int:
    print(f"# {run.provenance_line()}")
    reports = {}
    for path in run.args.files:
        entries = dataset.parse_dataset(path, strict=not run.args.permissive)
        report = dataset.dataset_stats(entries)
        reports[path] = report
        for split in dataset.SPLITS:
            if split not in report.splits:
                continue
            s = report.splits[split]
            sources = ", ".join(f"{k} {s.by_source[k]}" for k in dataset.SOURCES)
            labels = ", ".join(f"{k} {s.by_label[k]}" for k in dataset.LABELS)
            print(
                f"{path}: split {split}: {s.ncs} NCs, {s.paraphrases} paraphrases "
                f"({sources}; {labels})"
            )
    if run.args.json:
        obj = {
            path: {
                split: {
                    "ncs": s.ncs,
                    "paraphrases": s.paraphrases,
                    "by_source": s.by_source,
                    "by_label": s.by_label,
                }
                for split, s in report.splits.items()
            }
            for path, report in reports.items()
        }
        print(json.dumps(obj, sort_keys=True, indent=2))
    return 0


def _finding_to_json(f: curation.LintFinding) -> dict:
    return {
        "nc": f.nc.surface,
        "split": f.split,
        "paraphrase": f.paraphrase,
        "rule": f.rule,
        "action": f.action,
        "detail": f.detail,
        "fix": f.fix,
    }


def _cmd_lint(run: _Run) -> int:
    warnings: list[str] = []
    entries = []
    for path in run.args.files:
        entries.extend(dataset.parse_dataset(path, strict=False, warnings=warnings))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    findings = curation.lint(entries, _catch_all_rules(run))
    lines = [f"# {run.provenance_line()}"]
    lines += [json.dumps(_finding_to_json(f), ensure_ascii=False) for f in findings]
    _write_text(run.args.findings, "\n".join(lines) + "\n")
    if run.args.apply:
        if not run.args.out_data:
            raise ValueError("--apply requires --out-data")
        revised, summary = curation.apply_lint(entries, findings)
        dataset.write_dataset(revised, run.args.out_data, header=run.provenance_line())
        print(
            f"applied: {summary['paraphrases_fixed']} fixed, "
            f"{summary['paraphrases_removed']} paraphrases removed, "
            f"{summary['entries_removed']} entries removed, "
            f"{summary['entries_emptied']} entries emptied",
            file=sys.stderr,
        )
    return 0


def _cmd_augment(run: _Run) -> int:
    kb = _load_kb(run)
    entries = dataset.parse_dataset(run.args.file)
    queue_entries = []
    report_rows = []
    for entry in entries:
        candidates = curation.augment_entry(entry, kb)
        if not candidates:
            continue
        paraphrases = [
            dataset.Paraphrase(text=c.text, source="augmented", label="unjudged")
            for c in candidates
        ]
        queue_entries.append(
            dataset.DatasetEntry(nc=entry.nc, paraphrases=paraphrases, split=entry.split)
        )
        report_rows += [
            {"nc": entry.nc.surface, "text": c.text, "provenance": c.provenance}
            for c in candidates
        ]
    out = run.args.out
    text = dataset.serialize_entries(queue_entries, header=run.provenance_line())
    _write_text(out, text if text else f"# {run.provenance_line()}\n")
    if run.args.report:
        lines = [f"# {run.provenance_line()}"]
        lines += [json.dumps(r, ensure_ascii=False) for r in report_rows]
        _write_text(run.args.report, "\n".join(lines) + "\n")
    print(f"queued {len(report_rows)} candidates for review", file=sys.stderr)
    return 0


def _cmd_prompt(run: _Run) -> int:
    entries = dataset.parse_dataset(run.args.train)
    target = dataset.NounCompound.parse(run.args.target)
    k = int(run.get("examples", 10))
    seed = int(run.get("seed", 0))
    examples = dataset.sample_fewshot(entries, k, seed)
    prompt = dataset.build_fewshot_prompt(examples, target)
    # The prompt's byte layout is contractual (it ends with a bare "A:" and
    # no trailing newline), so provenance goes to stderr.
    print(f"# {run.provenance_line()}", file=sys.stderr)
    _write_text(run.args.out, prompt)
    return 0


def _references_map(entries, correct_only: bool) -> dict[str, list[str]]:
    refs: dict[str, list[str]] = {}
    for entry in entries:
        texts = [
            p.text
            for p in entry.paraphrases
            if not correct_only or p.label == "correct"
        ]
        if texts:
            refs.setdefault(entry.nc.surface, []).extend(texts)
    return refs


def _cmd_eval(run: _Run) -> int:
    system_entries = dataset.parse_dataset(run.args.system)
    reference_entries = dataset.parse_dataset(run.args.references)
    system = {e.nc.surface: [p.text for p in e.paraphrases] for e in system_entries}
    references = _references_map(reference_entries, run.args.correct_only)
    metric_ids = [m.strip() for m in run.args.metrics.split(",") if m.strip()]
    unknown = [m for m in metric_ids if m not in metrics.METRIC_IDS]
    if unknown:
        raise ValueError(f"unknown metrics: {', '.join(unknown)} (choose from {metrics.METRIC_IDS})")
    test_set = run.args.test_set or Path(run.args.system).stem
    notes: list[str] = []
    kb = None
    if "meteor" in metric_ids:
        kb = _load_kb(run, required=False)
        if kb is None:
            notes.append("meteor: no wordnet directory supplied; synonym stage disabled")

    results: dict[str, object] = {}
    for metric_id in metric_ids:
        if metric_id == "rouge_l":
            fn = lambda c, r: metrics.rouge_l(c, r)
        elif metric_id == "meteor":
            fn = lambda c, r: metrics.meteor(c, r, kb)
        else:
            command = run.args.scorer_cmd
            if not command:
                results["external"] = None
                notes.append("external: no scorer command supplied; metric unavailable")
                continue
            try:
                scorer = ExternalScorer(command)
                scorer.start()
            except ScorerError as exc:
                results["external"] = None
                notes.append(f"external: scorer unavailable ({exc})")
                continue
            with scorer:
                report = metrics.aggregate_score(
                    system, references, scorer.score, "external", test_set
                )
            results["external"] = _report_to_json(report)
            continue
        report = metrics.aggregate_score(system, references, fn, metric_id, test_set)
        results[metric_id] = _report_to_json(report)

    out_obj = {
        "provenance": json.loads(run.provenance()),
        "test_set": test_set,
        "metrics": results,
        "notes": notes,
    }
    _write_text(run.args.out, json.dumps(out_obj, sort_keys=True, indent=2) + "\n")
    return 0


def _report_to_json(report: metrics.EvalReport) -> dict:
    return {
        "aggregate": report.aggregate,
        "per_nc": {
            row.nc: {"mean": row.mean, "best_scores": row.best_scores} for row in report.rows
        },
    }


def _cmd_mine(run: _Run) -> int:
    kb = _load_kb(run)
    manifest = run.require("manifest", "--manifest")
    wordlist = None
    if run.args.wordlist:
        wordlist = frozenset(
            w.strip().lower()
            for w in Path(run.args.wordlist).read_text(encoding="utf-8").splitlines()
            if w.strip()
        )
    candidates = mining.extract_candidates(
        iter_documents(manifest), kb, wordlist=wordlist, permissive=run.args.permissive
    )
    threshold = int(run.get("threshold", 250))
    take = run.get("take")
    take = int(take) if take is not None else None

    fingerprint = None
    if run.args.reference_counts:
        reference: dict[str, int] = {}
        path = Path(run.args.reference_counts)
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'nc<TAB>count'")
            reference[parts[0]] = int(parts[1])
    elif run.args.reference_index:
        ref_index = NGramIndex(run.args.reference_index)
        if 2 not in ref_index.n_values:
            raise ValueError("reference index must be built with n=2 for bigram counts")
        if ref_index.config.cap <= threshold:
            raise ValueError(
                f"reference index cap {ref_index.config.cap} cannot resolve counts up to "
                f"threshold {threshold}; rebuild with cap > {threshold}"
            )
        fingerprint = ref_index.fingerprint
        reference = {
            c.nc.surface: ref_index.count((c.nc.modifier, c.nc.head)) for c in candidates
        }
    else:
        # No reference corpus: rank by the mined corpus's own counts.
        reference = {c.nc.surface: c.corpus_frequency for c in candidates}

    selected = mining.filter_by_frequency(candidates, reference, threshold, take)
    entries = [
        dataset.DatasetEntry(nc=c.nc, paraphrases=[], split="test") for c in selected
    ]
    _write_text(
        run.args.out, dataset.serialize_entries(entries, header=run.provenance_line(fingerprint))
    )
    if run.args.report:
        lines = [f"# {run.provenance_line(fingerprint)}"]
        for c in sorted(candidates, key=lambda c: c.nc.surface):
            lines.append(
                json.dumps(
                    {
                        "nc": c.nc.surface,
                        "mined_frequency": c.corpus_frequency,
                        "reference_frequency": int(reference.get(c.nc.surface, 0)),
                        "flags": sorted(c.flags),
                        "selected": any(s.nc == c.nc for s in selected),
                    },
                    ensure_ascii=False,
                )
            )
        _write_text(run.args.report, "\n".join(lines) + "\n")
    print(f"selected {len(selected)} of {len(candidates)} candidates", file=sys.stderr)
    return 0


def _cmd_overlap(run: _Run) -> int:
    index = _open_index(run)
    names = None
    if run.args.names:
        names = [n.strip() for n in run.args.names.split(",")]
        if len(names) != len(run.args.files):
            raise ValueError("--names must list one name per input file")
    labeled = []
    for i, path in enumerate(run.args.files):
        name = names[i] if names else Path(path).stem
        for entry in dataset.parse_dataset(path):
            for p in entry.paraphrases:
                if p.label in ("correct", "incorrect"):
                    labeled.append((p, p.label, name))
    stats = overlap.overlap_stats(labeled, index)
    header = run.provenance_line(index.fingerprint)
    _write_text(run.args.out_csv, overlap.overlap_csv(stats, header=header))
    _write_text(run.args.share_csv, overlap.share_csv(stats, header=header))
    return 0


# -- parser -----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Noun-compound paraphrase tooling: datasets, corpus index, metrics, overlap.",
    )
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    parser.add_argument("--config", help="key=value config file (flags win)")
    sub = parser.add_subparsers(dest="cmd", metavar="COMMAND")

    p_index = sub.add_parser("index", help="build or query the n-gram index")
    index_sub = p_index.add_subparsers(dest="index_cmd", metavar="ACTION")

    p_build = index_sub.add_parser("build", help="build the index from a corpus manifest")
    p_build.add_argument("--manifest")
    p_build.add_argument("--out", dest="index", help="index output directory")
    p_build.add_argument("--n-values", dest="n_values", help="comma list, default 3,4,5")
    p_build.add_argument("--cap", type=int)
    p_build.add_argument("--workers", type=int)
    p_build.add_argument("--force", action="store_true", help="rebuild even if up to date")
    p_build.set_defaults(func=_cmd_index_build)

    p_query = index_sub.add_parser("query", help="count one n-gram")
    p_query.add_argument("--index")
    p_query.add_argument("--gram", required=True, help='e.g. "a b c"')
    p_query.add_argument("--manifest", help="verify the index against this manifest")
    p_query.add_argument("--force", action="store_true", help="use a stale index anyway")
    p_query.set_defaults(func=_cmd_index_query)

    p_stats = sub.add_parser("stats", help="dataset statistics per split")
    p_stats.add_argument("files", nargs="+")
    p_stats.add_argument("--json", action="store_true")
    p_stats.add_argument("--permissive", action="store_true")
    p_stats.set_defaults(func=_cmd_stats)

    p_lint = sub.add_parser("lint", help="find (and optionally fix) dataset problems")
    p_lint.add_argument("files", nargs="+")
    p_lint.add_argument("--findings", help="findings JSONL output (default stdout)")
    p_lint.add_argument("--apply", action="store_true")
    p_lint.add_argument("--out-data", help="revised dataset output (with --apply)")
    p_lint.add_argument("--catch-all-preps", dest="catch_all_preps")
    p_lint.add_argument("--catch-all-verbs", dest="catch_all_verbs")
    p_lint.set_defaults(func=_cmd_lint)

    p_augment = sub.add_parser("augment", help="generate review-queue paraphrase candidates")
    p_augment.add_argument("file")
    p_augment.add_argument("--wordnet")
    p_augment.add_argument("--out", help="review queue output (default stdout)")
    p_augment.add_argument("--report", help="sidecar provenance report JSONL")
    p_augment.set_defaults(func=_cmd_augment)

    p_prompt = sub.add_parser("prompt", help="build a few-shot prompt from training data")
    p_prompt.add_argument("--train", required=True)
    p_prompt.add_argument("--target", required=True, help='target NC, e.g. "chocolate crocodile"')
    p_prompt.add_argument("--examples", type=int)
    p_prompt.add_argument("--seed", type=int)
    p_prompt.add_argument("--out")
    p_prompt.set_defaults(func=_cmd_prompt)

    p_eval = sub.add_parser("eval", help="score system paraphrases against references")
    p_eval.add_argument("--system", required=True)
    p_eval.add_argument("--references", required=True)
    p_eval.add_argument("--metrics", default="rouge_l,meteor")
    p_eval.add_argument("--wordnet")
    p_eval.add_argument("--scorer-cmd", dest="scorer_cmd", help="external scorer plugin command")
    p_eval.add_argument("--correct-only", action="store_true")
    p_eval.add_argument("--test-set", dest="test_set")
    p_eval.add_argument("--out", help="JSON report output (default stdout)")
    p_eval.set_defaults(func=_cmd_eval)

    p_mine = sub.add_parser("mine", help="mine rare noun-noun compounds from a corpus")
    p_mine.add_argument("--manifest")
    p_mine.add_argument("--wordnet")
    p_mine.add_argument("--reference-index", dest="reference_index")
    p_mine.add_argument("--reference-counts", dest="reference_counts", help="TSV nc<TAB>count")
    p_mine.add_argument("--threshold", type=int)
    p_mine.add_argument("--take", type=int)
    p_mine.add_argument("--permissive", action="store_true")
    p_mine.add_argument("--wordlist")
    p_mine.add_argument("--out", help="candidate dataset output (default stdout)")
    p_mine.add_argument("--report", help="sidecar frequency report JSONL")
    p_mine.set_defaults(func=_cmd_mine)

    p_overlap = sub.add_parser("overlap", help="bucketed n-gram overlap analysis")
    p_overlap.add_argument("files", nargs="+", help="labeled dataset files")
    p_overlap.add_argument("--index")
    p_overlap.add_argument("--manifest", help="verify the index against this manifest")
    p_overlap.add_argument("--force", action="store_true")
    p_overlap.add_argument("--names", help="comma list of test-set names (default: file stems)")
    p_overlap.add_argument("--out-csv", dest="out_csv", help="bucket table output (default stdout)")
    p_overlap.add_argument("--share-csv", dest="share_csv", help="share table output (default stdout)")
    p_overlap.set_defaults(func=_cmd_overlap)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(_Run(args))
    except ValueError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except NCKitError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: validate, score, report.

Thin shell over the library; every subcommand's behavior is reachable
through library calls with identical outputs. Exit codes: 0 ok, 1 runtime
error, 2 validation error, 3 configuration error.
"""

import argparse
import csv
import os
import sys
from pathlib import Path

from .config import Config
from .corpus import ManifestError, load_manifest
from .harness import (
    METRIC_NAMES,
    MetricReport,
    SPEAKER_LEVEL_METRICS,
    SpeakerScore,
    ScoringSession,
    aggregate_speaker,
    compare_protocols,
    pearson,
    score_utterances,
    speaker_scores_for_vsa,
    write_comparisons_csv,
    write_confounders_csv,
    write_report_csv,
    write_report_md,
    write_scores_csv,
)
from .metrics import HIGHER, POLARITY, UtteranceScore

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2
EXIT_CONFIG = 3


def _workers_default():
    env = os.environ.get("PATHMETRICS_WORKERS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser():
    p = argparse.ArgumentParser(
        prog="pathmetrics",
        description="Pathological speech intelligibility metrics and benchmark harness.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", required=True, help="path to manifest.json")

    sub.add_parser("validate", parents=[common],
                   help="check manifest invariants; exit 0 iff clean")

    runnish = argparse.ArgumentParser(add_help=False, parents=[common])
    runnish.add_argument("--protocols", default=None,
                         help="comma-separated protocol names (default: all)")
    runnish.add_argument("--metrics", default=None,
                         help=f"comma-separated metric names (default: all of {', '.join(METRIC_NAMES)})")
    runnish.add_argument("--workers", type=int, default=None,
                         help="parallel scoring workers (default: $PATHMETRICS_WORKERS or 1)")
    runnish.add_argument("--out", required=True, help="output directory")
    runnish.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="KEY=VALUE",
                         help="dotted config override, e.g. --set beam.alpha=0.7")

    sub.add_parser("score", parents=[runnish],
                   help="write one utterance-score CSV per metric")
    sub.add_parser("report", parents=[runnish],
                   help="aggregate score CSVs into correlation reports")
    return p


def _parse_config(args):
    config = Config()
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise KeyError(f"override {item!r} is not KEY=VALUE")
        config.override(key, value)
    return config


def _select_protocols(corpus, spec):
    if spec is None:
        return list(corpus.protocols)
    by_name = {p.name: p for p in corpus.protocols}
    names = [s for s in spec.split(",") if s]
    unknown = [n for n in names if n not in by_name]
    if unknown:
        raise KeyError(f"unknown protocols {unknown}; available: {sorted(by_name)}")
    return [by_name[n] for n in names]


def _select_metrics(spec):
    if spec is None:
        return list(METRIC_NAMES)
    names = [s for s in spec.split(",") if s]
    unknown = sorted(set(names) - set(METRIC_NAMES))
    if unknown:
        raise KeyError(f"unknown metrics {unknown}; registry: {list(METRIC_NAMES)}")
    return names


def cmd_validate(args):
    try:
        corpus = load_manifest(args.manifest)
    except ManifestError as e:
        for finding in e.findings:
            print(f"ERROR: {finding}")
        print(f"{len(e.findings)} finding(s)")
        return EXIT_VALIDATION
    for w in corpus.warnings:
        print(f"WARNING: {w}")
    print(f"OK: {len(corpus.records)} records, {len(corpus.protocols)} protocols, "
          f"{len(corpus.lexicon.entries)} lexicon entries")
    return EXIT_OK


def scores_csv_path(out_dir, metric, protocol=None):
    """Speaker-level metrics pool frames per protocol slice, so their score
    files are per (metric, protocol); utterance metrics get one file."""
    if protocol is None:
        return Path(out_dir) / f"scores_{metric}.csv"
    return Path(out_dir) / f"scores_{metric}@{protocol}.csv"


def cmd_score(args):
    corpus = load_manifest(args.manifest)
    config = _parse_config(args)
    protocols = _select_protocols(corpus, args.protocols)
    metric_names = _select_metrics(args.metrics)
    workers = args.workers if args.workers is not None else _workers_default()
    if workers < 1:
        raise KeyError("--workers must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    wanted_ids = sorted({uid for p in protocols for uid in p.utterance_ids})
    records = [corpus.record(uid) for uid in wanted_ids]
    speaker_of = {r.utterance_id: r.speaker_id for r in records}
    session = ScoringSession(corpus, config)

    utt_metrics = [n for n in metric_names if n not in SPEAKER_LEVEL_METRICS]
    by_metric = score_utterances(session, records, utt_metrics, workers=workers)
    for name in utt_metrics:
        rows = [
            (s.utterance_id, speaker_of[s.utterance_id], name,
             "" if s.value is None else repr(float(s.value)),
             1 if s.value is not None else 0)
            for s in sorted(by_metric[name], key=lambda s: s.utterance_id)
        ]
        write_scores_csv(scores_csv_path(out, name), rows)
        print(f"wrote {scores_csv_path(out, name)} ({len(rows)} rows)")

    for name in metric_names:
        if name not in SPEAKER_LEVEL_METRICS:
            continue
        for protocol in protocols:
            proto_records = [corpus.record(uid) for uid in protocol.utterance_ids]
            spk_scores, excluded = speaker_scores_for_vsa(session, proto_records)
            rows = [("", s.speaker_id, name, repr(float(s.value)), 1) for s in spk_scores]
            rows += [("", spk, name, "", 0) for spk in excluded]
            rows.sort(key=lambda r: r[1])
            path = scores_csv_path(out, name, protocol.name)
            write_scores_csv(path, rows)
            print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def read_scores_csv(path):
    """Returns (utterance rows as {uid: value}, speaker rows as {spk: value});
    value None when the defined flag is 0."""
    utt, spk = {}, {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            value = float(row["value"]) if row["defined_flag"] == "1" else None
            if row["utterance_id"]:
                utt[row["utterance_id"]] = value
            else:
                spk[row["speaker_id"]] = value
    return utt, spk


def report_from_scores(protocol, metric, corpus, utt_values, speaker_values,
                       wada_speaker_means, ages):
    """Build one MetricReport from previously persisted utterance scores."""
    records = [corpus.record(uid) for uid in protocol.utterance_ids]
    path_records = [r for r in records if r.group == "pathological"]
    targets = protocol.speaker_targets
    if metric in SPEAKER_LEVEL_METRICS:
        spk_scores = [SpeakerScore(s, metric, v, 1)
                      for s, v in sorted(speaker_values.items()) if v is not None]
        excluded = sorted(s for s, v in speaker_values.items() if v is None)
    else:
        scores = [UtteranceScore(r.utterance_id, metric,
                                 utt_values.get(r.utterance_id), POLARITY[metric])
                  for r in path_records]
        spk_scores, excluded = aggregate_speaker(scores, path_records)
    spk_scores = [s for s in spk_scores if s.speaker_id in targets]
    ids = [s.speaker_id for s in spk_scores]
    y = [targets[s] for s in ids]
    raw = [s.value for s in spk_scores]
    sign = 1.0 if POLARITY[metric] == HIGHER else -1.0
    adjusted = [sign * v for v in raw]
    r_adj = pearson(adjusted, y) if len(ids) >= 3 else None
    r_raw = pearson(raw, y) if len(ids) >= 3 else None

    conf = {}
    pairs = [(ages[s], targets[s]) for s in ids if ages.get(s) is not None]
    conf["age"] = pearson(*zip(*pairs)) if len(pairs) >= 3 else None
    if wada_speaker_means is not None:
        pairs = [(wada_speaker_means[s], targets[s]) for s in ids if s in wada_speaker_means]
        conf["wada_snr"] = pearson(*zip(*pairs)) if len(pairs) >= 3 else None
    else:
        conf["wada_snr"] = None
    return MetricReport(
        protocol=protocol.name, dataset=protocol.dataset, condition=protocol.condition,
        stimulus=protocol.stimulus, metric=metric, pearson_r=r_adj, raw_r=r_raw,
        n_speakers=len(ids), confounder_r=conf, excluded_speakers=tuple(excluded),
    )


def cmd_report(args):
    corpus = load_manifest(args.manifest)
    _parse_config(args)  # validates overrides even though report only reads CSVs
    protocols = _select_protocols(corpus, args.protocols)
    metric_names = _select_metrics(args.metrics)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    loaded = {}
    for name in metric_names:
        if name in SPEAKER_LEVEL_METRICS:
            for protocol in protocols:
                path = scores_csv_path(out, name, protocol.name)
                if not path.exists():
                    print(f"ERROR: missing score file {path} for metric {name!r}; "
                          f"run `pathmetrics score` first")
                    return EXIT_RUNTIME
                loaded[(name, protocol.name)] = read_scores_csv(path)
        else:
            path = scores_csv_path(out, name)
            if not path.exists():
                print(f"ERROR: missing score file {path} for metric {name!r}; "
                      f"run `pathmetrics score` first")
                return EXIT_RUNTIME
            loaded[name] = read_scores_csv(path)

    ages = {}
    for rec in corpus.records:
        if rec.group == "pathological" and rec.age is not None:
            ages[rec.speaker_id] = float(rec.age)

    wada_csv = scores_csv_path(out, "wada_snr")
    wada_utt = read_scores_csv(wada_csv)[0] if wada_csv.exists() else None

    reports = []
    for protocol in protocols:
        wada_means = None
        if wada_utt is not None:
            path_records = [corpus.record(uid) for uid in protocol.utterance_ids
                            if corpus.record(uid).group == "pathological"]
            scores = [UtteranceScore(r.utterance_id, "wada_snr",
                                     wada_utt.get(r.utterance_id), POLARITY["wada_snr"])
                      for r in path_records]
            agg, _ = aggregate_speaker(scores, path_records)
            wada_means = {s.speaker_id: s.value for s in agg}
        for name in metric_names:
            key = (name, protocol.name) if name in SPEAKER_LEVEL_METRICS else name
            utt_values, speaker_values = loaded[key]
            reports.append(report_from_scores(
                protocol, name, corpus, utt_values, speaker_values, wada_means, ages))

    write_report_csv(out / "report.csv", reports)
    write_report_md(out / "report.md", reports)
    write_confounders_csv(out / "confounders.csv", reports)

    comparisons = []
    notes = []
    by_condition = {}
    for r in reports:
        by_condition.setdefault(r.condition, []).append(r)
    if "MC" in by_condition and "EX" in by_condition:
        try:
            comparisons.append(("EX_vs_MC", compare_protocols(
                by_condition["MC"], by_condition["EX"])))
        except ValueError as e:
            notes.append(("EX_vs_MC", str(e)))
    else:
        missing = "EX" if "MC" in by_condition else "MC"
        notes.append(("EX_vs_MC", f"{missing} protocols missing"))
    by_stimulus = {}
    for r in reports:
        by_stimulus.setdefault(r.stimulus, []).append(r)
    if "word" in by_stimulus and "sentence" in by_stimulus:
        try:
            comparisons.append(("sentence_vs_word", compare_protocols(
                by_stimulus["word"], by_stimulus["sentence"],
                pair_on=("metric", "dataset", "condition"))))
        except ValueError as e:
            notes.append(("sentence_vs_word", str(e)))
    else:
        missing = "sentence" if "word" in by_stimulus else "word"
        notes.append(("sentence_vs_word", f"{missing} protocols missing"))
    for comp_name, note in notes:
        print(f"note: {comp_name} comparison skipped: {note}")
    write_comparisons_csv(out / "comparisons.csv", comparisons, notes=notes)

    print(f"wrote {out / 'report.csv'}, report.md, confounders.csv, comparisons.csv "
          f"({len(reports)} metric-protocol cells)")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "score":
            return cmd_score(args)
        if args.command == "report":
            return cmd_report(args)
        raise AssertionError(args.command)
    except ManifestError as e:
        for finding in e.findings:
            print(f"ERROR: {finding}")
        return EXIT_VALIDATION
    except KeyError as e:
        print(f"config error: {e.args[0] if e.args else e}")
        return EXIT_CONFIG
    except (OSError, ValueError) as e:
        print(f"error: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""End-to-end benchmark on the synthetic degradation corpus.

Generates the toy cohort (10 patients with monotone severity + 3 controls),
runs every metric over the Matched Content and Extended sentence protocols,
and prints the speaker-level correlation table plus the protocol comparison.

Roughly a minute on a laptop. Pass an output directory to also exercise the
CLI (validate/score/report) against the same corpus.
"""

import sys
import tempfile
import time
from pathlib import Path

from pathmetrics import load_manifest
from pathmetrics.harness import METRIC_NAMES, ScoringSession, compare_protocols, run_protocol
from pathmetrics.toycorpus import generate_toy_corpus

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
corpus_dir = out / "corpus"
print(f"generating synthetic corpus under {corpus_dir} ...")
manifest = generate_toy_corpus(corpus_dir)
corpus = load_manifest(manifest)
session = ScoringSession(corpus)
protocols = {p.name: p for p in corpus.protocols}

metrics = [m for m in METRIC_NAMES]
t0 = time.time()
mc = run_protocol(protocols["toy-sent-MC"], metrics, session)
ex = run_protocol(protocols["toy-sent-EX"], metrics, session)
print(f"scored MC+EX in {time.time() - t0:.0f}s\n")

ex_by = {r.metric: r for r in ex}
print(f"{'metric':18s} {'MC r':>8s} {'EX r':>8s}   n")
for r in sorted(mc, key=lambda r: r.metric):
    fmt = lambda v: "   --" if v is None else f"{v:+.3f}"
    print(f"{r.metric:18s} {fmt(r.pearson_r):>8s} {fmt(ex_by[r.metric].pearson_r):>8s}  {r.n_speakers:2d}")

print("\nMatched Content vs Extended (paired signed-rank on r):")
for res in compare_protocols(mc, ex):
    p = "--" if res.p_value is None else f"{res.p_value:.4f}"
    print(f"  {res.label:8s} n={res.n_pairs:2d} mean diff {res.mean_diff:+.4f}  p={p} {res.note}")

print("\nreference-free winner check:")
r = {x.metric: x.pearson_r for x in mc}
print(f"  DArtP r={r['dartp']:.3f} vs ASRIC r={r['asric']:.3f} vs confidence r={r['confidence']:.3f}")

"""Protocol runner: utterance scoring, speaker aggregation, correlations.

Runs a metric set over an evaluation protocol end to end: loads posterior /
feature / audio artifacts lazily, scores each utterance, averages defined
scores per speaker (vowel space area pools frames per speaker instead),
sign-adjusts by metric polarity, and correlates against the clinical targets
along with the age and SNR confounders. Paired protocol comparisons use the
Wilcoxon signed-rank test, exact up to n=25.

Scoring is utterance-parallel; results are merged in utterance-id order so
output bytes do not depend on the worker count.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm as _norm

from . import dsp, metrics as M
from .config import Config
from .corpus import match_parallel
from .ctc import AlignmentInfeasible, PosteriorMatrix, force_align
from .lm import parse_arpa
from .tensorfile import read_tensor

POSTERIOR_HOP = 0.02  # wav2vec2-style 20 ms frame stride

METRIC_FAMILY = {
    "speech_rate": "signal",
    "cpp": "signal",
    "f0_semitone_std": "signal",
    "vsa": "signal",
    "confidence": "model",
    "asric": "model",
    "dartp": "model",
    "per_sem": "text",
    "per_phone": "text",
    "artp": "text",
    "p_estoi": "audio",
    "nad": "audio",
    "wada_snr": "confounder",
}

METRIC_NAMES = tuple(sorted(METRIC_FAMILY))
SPEAKER_LEVEL_METRICS = ("vsa",)


@dataclass(frozen=True)
class SpeakerScore:
    speaker_id: str
    metric: str
    value: float
    n_utts: int


@dataclass
class MetricReport:
    protocol: str
    dataset: str
    condition: str
    stimulus: str
    metric: str
    pearson_r: float  # polarity-adjusted; None when undefined
    raw_r: float
    n_speakers: int
    confounder_r: dict
    excluded_speakers: tuple = ()


@dataclass
class ComparisonResult:
    label: str
    n_pairs: int
    w_statistic: float
    p_value: float
    mean_diff: float
    pairs: list = field(default_factory=list)
    note: str = ""


def pearson(x, y):
    """Sample Pearson correlation; None when either side has no variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.dot(dx, dx))
    sy = float(np.dot(dy, dy))
    if sx == 0.0 or sy == 0.0:
        return None
    return float(np.dot(dx, dy) / math.sqrt(sx * sy))


def wilcoxon_signed_rank(a, b):
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped, tied absolute differences get midranks, and
    W = min(W+, W-). The p-value is exact (distribution of W+ over all 2^n
    sign assignments, computed by convolution over doubled ranks) for
    n <= 25, and a tie- and continuity-corrected normal approximation above.
    Returns (None, None) when every difference is zero.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) != len(b):
        raise ValueError("length mismatch")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return None, None
    if n < 5:
        raise ValueError("fewer than 5 nonzero differences")

    order = np.argsort(np.abs(d), kind="stable")
    ranks = np.empty(n)
    sorted_abs = np.abs(d)[order]
    i = 0
    while i < n:
        j = i
        while j < n and sorted_abs[j] == sorted_abs[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0  # midrank of 1-based positions
        i = j

    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)

    if n <= 25:
        # Counts of achievable W+ (doubled to keep midranks integral);
        # totals stay below 2^25, well inside int64.
        doubled = np.rint(2 * ranks).astype(np.int64)
        total = int(doubled.sum())
        counts = np.zeros(total + 1, dtype=np.int64)
        counts[0] = 1
        for r in doubled:
            shifted = np.zeros_like(counts)
            shifted[r:] = counts[:len(counts) - r]
            counts = counts + shifted
        wd = int(round(2 * w_plus))
        le = int(sum(counts[: wd + 1]))
        ge = int(sum(counts[wd:]))
        p = min(1.0, 2.0 * min(le, ge) / 2 ** n)
    else:
        mu = n * (n + 1) / 4.0
        _, tie_counts = np.unique(sorted_abs, return_counts=True)
        tie_term = float(((tie_counts ** 3) - tie_counts).sum()) / 48.0
        sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term)
        z = (w_plus - mu - 0.5 * math.copysign(1.0, w_plus - mu)) / sigma
        p = float(2.0 * _norm.sf(abs(z)))
        p = min(1.0, p)
    return w, p


def aggregate_speaker(scores, records):
    """Unweighted per-speaker mean of defined utterance scores.

    Returns (speaker scores sorted by id, speakers excluded because no
    utterance produced a defined value).
    """
    names = {s.metric for s in scores}
    if len(names) > 1:
        raise ValueError(f"scores mix metrics: {sorted(names)}")
    speaker_of = {r.utterance_id: r.speaker_id for r in records}
    by_speaker = {}
    seen = set()
    for s in sorted(scores, key=lambda s: s.utterance_id):
        spk = speaker_of[s.utterance_id]
        seen.add(spk)
        if s.defined:
            by_speaker.setdefault(spk, []).append(s.value)
    out = [
        SpeakerScore(spk, next(iter(names)), float(np.mean(vals)), len(vals))
        for spk, vals in sorted(by_speaker.items())
    ]
    excluded = sorted(seen - set(by_speaker))
    return out, excluded


class ScoringSession:
    """Lazy, cached access to a corpus's audio/posterior/feature artifacts.

    All caches are filled under a per-utterance discipline so sessions can be
    shared by parallel scorers after the control pool has been primed.
    """

    def __init__(self, corpus, config=None):
        self.corpus = corpus
        self.config = config or Config()
        self._lm = None
        self._cache = {}

    @property
    def lm(self):
        if self._lm is None:
            if self.corpus.lm_path is None:
                raise FileNotFoundError("manifest declares no language model")
            self._lm = parse_arpa(self.corpus.resolve(self.corpus.lm_path))
        return self._lm

    def _memo(self, kind, rec, build):
        key = (kind, rec.utterance_id)
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def audio(self, rec):
        def build():
            if rec.audio_path is None:
                raise FileNotFoundError(f"{rec.utterance_id}: no audio_path")
            samples, rate = dsp.load_wav(self.corpus.resolve(rec.audio_path))
            return dsp.resample_to_16k(samples, rate)
        return self._memo("audio", rec, build)

    def _posteriors(self, kind, rec, path_attr, vocab):
        def build():
            rel = getattr(rec, path_attr)
            if rel is None:
                raise FileNotFoundError(f"{rec.utterance_id}: no {path_attr}")
            tensor = read_tensor(self.corpus.resolve(rel))
            return PosteriorMatrix(tensor=tensor, vocab=vocab, frame_hop=POSTERIOR_HOP)
        return self._memo(kind, rec, build)

    def sem_posteriors(self, rec):
        return self._posteriors("sem", rec, "sem_logits_path", self.corpus.vocab_sem)

    def phone_posteriors(self, rec):
        return self._posteriors("phone", rec, "phone_logits_path", self.corpus.vocab_phone)

    def features(self, rec):
        def build():
            if rec.features_path is None:
                raise FileNotFoundError(f"{rec.utterance_id}: no features_path")
            return read_tensor(self.corpus.resolve(rec.features_path))
        return self._memo("feats", rec, build)

    def alignment(self, rec):
        """Forced alignment of the reference phonemes, None if unavailable."""
        def build():
            if not rec.phonemes:
                return None
            try:
                phone_p = self.phone_posteriors(rec)
                return force_align(phone_p, list(rec.phonemes))
            except (FileNotFoundError, AlignmentInfeasible, ValueError):
                return None
        return self._memo("align", rec, build)

    def trimmed_audio(self, rec):
        def build():
            audio = self.audio(rec)
            path = self.alignment(rec)
            if path is None:
                return audio
            trimmed, _ = dsp.trim_silence(audio, path, POSTERIOR_HOP)
            return trimmed
        return self._memo("trimmed", rec, build)

    def trimmed_features(self, rec):
        def build():
            feats = self.features(rec)
            path = self.alignment(rec)
            if path is None or abs(len(path.labels) - feats.rows) > 2:
                return feats
            active = np.nonzero(path.active_mask())[0]
            if active.size == 0:
                return feats
            lo = min(int(active[0]), feats.rows - 1)
            hi = min(int(active[-1]) + 1, feats.rows)
            from .tensorfile import Tensor2D
            return Tensor2D(feats.data[lo:hi])
        return self._memo("trimmed_feats", rec, build)

    def pitch_contour(self, rec):
        def build():
            p = self.config.pitch
            return dsp.track_pitch(self.trimmed_audio(rec), p.floor_hz, p.ceil_hz,
                                   p.voicing_threshold)
        return self._memo("contour", rec, build)

    def formant_points(self, rec):
        def build():
            audio = self.trimmed_audio(rec)
            return dsp.estimate_formants(audio, self.pitch_contour(rec)).formants
        return self._memo("formants", rec, build)

    def control_pool(self, records):
        return [r for r in records if r.group == "control"]


def _score_one(session, rec, name, controls):
    """Score one metric on one utterance; never raises on missing artifacts."""
    cfg = session.config
    pol = M.POLARITY[name]

    def undef(reason):
        return M.UtteranceScore(rec.utterance_id, name, None, pol, reason=reason)

    try:
        if name == "speech_rate":
            audio = session.trimmed_audio(rec)
            v = dsp.speech_rate(audio, contour=session.pitch_contour(rec))
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
        if name == "cpp":
            audio = session.trimmed_audio(rec)
            v = dsp.cpp(audio, cfg.pitch.floor_hz, cfg.pitch.ceil_hz,
                        frame_averaged=cfg.cpp.frame_averaged)
            if v is None:
                return undef("silent signal")
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
        if name == "f0_semitone_std":
            v = dsp.f0_semitone_std(session.pitch_contour(rec))
            if v is None:
                return undef("fewer than 2 voiced frames")
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
        if name == "wada_snr":
            v = dsp.wada_snr(session.audio(rec), table_path=cfg.wada.table_path)
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
        if name == "confidence":
            return M.UtteranceScore(rec.utterance_id, name,
                                    M.confidence(session.sem_posteriors(rec)), pol)
        if name == "asric":
            sem_p = session.sem_posteriors(rec)
            phone_p = session.phone_posteriors(rec)
            sem_phones, _ = M.phonemize_words(session.corpus.lexicon, M.greedy_words(sem_p))
            v = M.asric(sem_phones, M.greedy_phones(phone_p))
            if v is None:
                return undef("empty semantic decode")
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
        if name == "dartp":
            b = cfg.beam
            score = M.dartp(session.sem_posteriors(rec), session.phone_posteriors(rec),
                            session.lm, session.corpus.lexicon,
                            alpha=b.alpha, beta=b.beta, beam_width=b.width,
                            utterance_id=rec.utterance_id)
            return score
        if name == "per_sem":
            if not rec.phonemes:
                return undef("no reference phonemes")
            v = M.per_sem(session.sem_posteriors(rec), session.corpus.lexicon,
                          list(rec.phonemes))
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
        if name == "per_phone":
            if not rec.phonemes:
                return undef("no reference phonemes")
            v = M.per_phone(session.phone_posteriors(rec), list(rec.phonemes))
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
        if name == "artp":
            if not rec.phonemes:
                return undef("no reference phonemes")
            score = M.artp(session.phone_posteriors(rec), list(rec.phonemes),
                           utterance_id=rec.utterance_id)
            return score
        if name == "p_estoi":
            refs = match_parallel(rec, controls)
            if not refs:
                return undef("no parallel controls")
            test_audio = session.trimmed_audio(rec)
            ref_audios = [session.trimmed_audio(r) for r in refs]
            v, info = M.p_estoi(test_audio, ref_audios, radius_frac=cfg.dtw.radius_frac)
            if v is None:
                return undef(info.get("reason", "undefined"))
            return M.UtteranceScore(rec.utterance_id, name, v, pol, diagnostics=info)
        if name == "nad":
            refs = match_parallel(rec, controls)
            if not refs:
                return undef("no parallel controls")
            v = M.nad(session.trimmed_features(rec),
                      [session.trimmed_features(r) for r in refs],
                      distance=cfg.nad.distance, radius_frac=cfg.dtw.radius_frac)
            if v is None:
                return undef("no parallel controls")
            return M.UtteranceScore(rec.utterance_id, name, v, pol)
    except FileNotFoundError as e:
        return undef(f"missing artifact: {e}")
    except ValueError as e:
        return undef(str(e))
    raise KeyError(f"unknown metric {name!r}")


def score_utterances(session, records, metric_names, workers=1):
    """Score every requested metric on every record; deterministic order.

    Control-pool artifacts are primed sequentially first so the parallel
    phase only reads caches it shares.
    """
    unknown = sorted(set(metric_names) - set(METRIC_NAMES))
    if unknown:
        raise KeyError(f"unknown metrics {unknown}; registry: {list(METRIC_NAMES)}")
    records = sorted(records, key=lambda r: r.utterance_id)
    controls = [r for r in records if r.group == "control"]
    targets = [r for r in records if r.group == "pathological"]
    utt_metrics = [n for n in metric_names if n not in SPEAKER_LEVEL_METRICS]

    if any(n in ("p_estoi", "nad") for n in utt_metrics):
        for r in controls:
            try:
                if "p_estoi" in utt_metrics:
                    session.trimmed_audio(r)
                if "nad" in utt_metrics:
                    session.trimmed_features(r)
            except (FileNotFoundError, ValueError):
                pass

    def work(rec):
        return [_score_one(session, rec, n, controls) for n in utt_metrics]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, targets))
    else:
        rows = [work(r) for r in targets]

    out = {n: [] for n in utt_metrics}
    for per_rec in rows:
        for s in per_rec:
            out[s.metric].append(s)
    return out


def speaker_scores_for_vsa(session, records):
    """Pool formant frames per speaker and measure the vowel polygon once."""
    cfg = session.config
    corners = cfg.vsa.corner_points()
    by_speaker = {}
    for rec in sorted(records, key=lambda r: r.utterance_id):
        if rec.group != "pathological":
            continue
        try:
            pts = session.formant_points(rec)
        except (FileNotFoundError, ValueError):
            continue
        if len(pts):
            entry = by_speaker.setdefault(rec.speaker_id, ([], 0))
            entry[0].append(pts)
            by_speaker[rec.speaker_id] = (entry[0], entry[1] + 1)
    scores = []
    excluded = []
    speakers = sorted({r.speaker_id for r in records if r.group == "pathological"})
    for spk in speakers:
        if spk not in by_speaker:
            excluded.append(spk)
            continue
        chunks, n_utts = by_speaker[spk]
        pooled = np.concatenate(chunks, axis=0)
        v = dsp.vsa(pooled, corners)
        if v is None:
            excluded.append(spk)
        else:
            scores.append(SpeakerScore(spk, "vsa", v, n_utts))
    return scores, excluded


def run_protocol(protocol, metric_names, session, workers=1):
    """Score a protocol and report speaker-level correlations per metric.

    Per metric: utterance scores, per-speaker means, polarity sign
    adjustment, Pearson r against the protocol's clinical targets;
    age and mean-WADA-SNR confounder correlations use the same speakers.
    """
    records = [session.corpus.record(uid) for uid in protocol.utterance_ids]
    metric_names = sorted(set(metric_names))
    utt_scores = score_utterances(
        session, records, [n for n in metric_names if n not in SPEAKER_LEVEL_METRICS],
        workers=workers,
    )

    path_records = [r for r in records if r.group == "pathological"]
    targets = protocol.speaker_targets
    wada_by_speaker = None

    def confounders(speaker_ids):
        nonlocal wada_by_speaker
        out = {}
        ages = {r.speaker_id: r.age for r in path_records if r.age is not None}
        pairs = [(ages[s], targets[s]) for s in speaker_ids if s in ages]
        out["age"] = _safe_pearson(pairs)
        if wada_by_speaker is None:
            wscores = [_score_one(session, r, "wada_snr", []) for r in
                       sorted(path_records, key=lambda r: r.utterance_id)]
            agg, _ = aggregate_speaker(wscores, path_records)
            wada_by_speaker = {s.speaker_id: s.value for s in agg}
        pairs = [(wada_by_speaker[s], targets[s]) for s in speaker_ids if s in wada_by_speaker]
        out["wada_snr"] = _safe_pearson(pairs)
        return out

    reports = []
    for name in metric_names:
        if name in SPEAKER_LEVEL_METRICS:
            spk_scores, excluded = speaker_scores_for_vsa(session, records)
        else:
            spk_scores, excluded = aggregate_speaker(utt_scores[name], path_records)
        spk_scores = [s for s in spk_scores if s.speaker_id in targets]
        speaker_ids = [s.speaker_id for s in spk_scores]
        y = [targets[s] for s in speaker_ids]
        raw = [s.value for s in spk_scores]
        sign = 1.0 if M.POLARITY[name] == M.HIGHER else -1.0
        adjusted = [sign * v for v in raw]
        if len(speaker_ids) >= 3:
            r_adj = pearson(adjusted, y)
            r_raw = pearson(raw, y)
        else:
            r_adj = r_raw = None
        reports.append(MetricReport(
            protocol=protocol.name,
            dataset=protocol.dataset,
            condition=protocol.condition,
            stimulus=protocol.stimulus,
            metric=name,
            pearson_r=r_adj,
            raw_r=r_raw,
            n_speakers=len(speaker_ids),
            confounder_r=confounders(speaker_ids),
            excluded_speakers=tuple(excluded),
        ))
    return reports


def _safe_pearson(pairs):
    if len(pairs) < 3:
        return None
    x, y = zip(*pairs)
    return pearson(x, y)


def compare_protocols(reports_a, reports_b, min_pairs=5,
                      pair_on=("metric", "dataset", "stimulus")):
    """Paired Wilcoxon comparison of correlations, overall and per family.

    Reports are paired on the ``pair_on`` fields (stimulus is swapped for
    condition when comparing word against sentence protocols); pairs with an
    undefined r on either side are dropped. Differences are B minus A, so a
    positive mean favors the B side.
    """
    def key(r):
        return tuple(getattr(r, f) for f in pair_on)

    index_b = {key(r): r for r in reports_b}
    pairs = []
    for ra in reports_a:
        rb = index_b.get(key(ra))
        if rb is None or ra.pearson_r is None or rb.pearson_r is None:
            continue
        pairs.append((ra.metric, ra.dataset, ra.stimulus, ra.pearson_r, rb.pearson_r))

    def result(label, subset):
        diffs = [pb - pa for (_, _, _, pa, pb) in subset]
        res = ComparisonResult(
            label=label, n_pairs=len(subset), w_statistic=None, p_value=None,
            mean_diff=float(np.mean(diffs)) if diffs else None, pairs=list(subset),
        )
        if len(subset) < min_pairs:
            res.note = f"insufficient pairs (<{min_pairs})"
            return res
        a = [pa for (_, _, _, pa, _) in subset]
        b = [pb for (_, _, _, _, pb) in subset]
        try:
            w, p = wilcoxon_signed_rank(b, a)
        except ValueError as e:
            res.note = str(e)
            return res
        if w is None:
            res.note = "all differences zero"
            return res
        res.w_statistic, res.p_value = w, p
        return res

    if len(pairs) < min_pairs:
        raise ValueError(f"only {len(pairs)} valid pairs, need {min_pairs}")
    out = [result("all", pairs)]
    families = sorted({METRIC_FAMILY[m] for (m, _, _, _, _) in pairs})
    for fam in families:
        subset = [p for p in pairs if METRIC_FAMILY[p[0]] == fam]
        out.append(result(fam, subset))
    return out


# ---------------------------------------------------------------------------
# File outputs.

def format_value(v):
    if v is None:
        return ""
    return repr(float(v))


def write_scores_csv(path, scores):
    """Long-form utterance scores; speaker-level metrics use a blank
    utterance_id column."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["utterance_id", "speaker_id", "metric", "value", "defined_flag"])
        for row in scores:
            w.writerow(row)


def write_report_csv(path, reports):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["protocol", "dataset", "condition", "stimulus", "metric",
                    "pearson_r", "raw_r", "n_speakers", "age_r", "wada_snr_r",
                    "excluded_speakers"])
        for r in sorted(reports, key=lambda r: (r.protocol, r.metric)):
            w.writerow([
                r.protocol, r.dataset, r.condition, r.stimulus, r.metric,
                format_value(r.pearson_r), format_value(r.raw_r), r.n_speakers,
                format_value(r.confounder_r.get("age")),
                format_value(r.confounder_r.get("wada_snr")),
                ";".join(r.excluded_speakers),
            ])


def write_confounders_csv(path, reports):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["protocol", "confounder", "r", "n_speakers"])
        seen = set()
        for r in sorted(reports, key=lambda r: (r.protocol, r.metric)):
            if r.protocol in seen:
                continue
            seen.add(r.protocol)
            for name in ("age", "wada_snr"):
                w.writerow([r.protocol, name, format_value(r.confounder_r.get(name)),
                            r.n_speakers])


def write_report_md(path, reports):
    """Grid of polarity-adjusted speaker-level r: metric rows, protocol
    columns (dataset/stimulus/condition), with a raw-r companion table."""
    protocols = sorted({(r.dataset, r.stimulus, r.condition, r.protocol) for r in reports})
    metric_names = sorted({r.metric for r in reports})
    cell = {(r.metric, r.protocol): r for r in reports}

    def fmt(r, attr):
        v = getattr(r, attr) if r else None
        return "--" if v is None else f"{v:.2f}"

    lines = ["# Speaker-level Pearson correlation", ""]
    for attr, title in (("pearson_r", "Polarity-adjusted r"), ("raw_r", "Raw r")):
        lines.append(f"## {title}")
        lines.append("")
        header = ["metric"] + [f"{d}/{s}/{c}" for d, s, c, _ in protocols] + ["avg"]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for m in metric_names:
            row = [m] + [fmt(cell.get((m, p)), attr) for _, _, _, p in protocols]
            # Uniform mean over the listed protocol columns with a defined r.
            vals = [getattr(cell[(m, p)], attr) for _, _, _, p in protocols
                    if (m, p) in cell and getattr(cell[(m, p)], attr) is not None]
            row.append(f"{np.mean(vals):.2f}" if vals else "--")
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines))


def write_comparisons_csv(path, comparisons, notes=()):
    """Summary and per-pair rows for each protocol comparison; comparisons
    that could not run at all appear as bare note rows."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["comparison", "stratum", "row_type", "metric", "dataset", "stimulus",
                    "r_a", "r_b", "diff", "n_pairs", "w_statistic", "p_value", "note"])
        for comp_name, note in notes:
            w.writerow([comp_name, "", "note", "", "", "", "", "", "", "", "", "", note])
        for comp_name, results in comparisons:
            for res in results:
                w.writerow([comp_name, res.label, "summary", "", "", "",
                            "", "", format_value(res.mean_diff), res.n_pairs,
                            format_value(res.w_statistic),
                            "" if res.p_value is None else f"{res.p_value:.4f}",
                            res.note])
                for metric, dataset, stimulus, ra, rb in res.pairs:
                    if res.label != "all":
                        continue
                    w.writerow([comp_name, res.label, "pair", metric, dataset, stimulus,
                                format_value(ra), format_value(rb),
                                format_value(rb - ra), "", "", "", ""])

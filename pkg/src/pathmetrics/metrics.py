"""Utterance-level intelligibility estimators.

Composes the decoding/alignment primitives into the named scorers: phoneme
error rates against references or between recognizers, aligned-posterior
articulation scores with and without ground-truth text, and the
reference-audio measures (band-spectrogram intelligibility with internal
alignment, and warped neural feature distance).

Each metric has a fixed polarity used by the harness to sign-adjust
correlations. Undefined scores are returned as None with a reason and are
excluded from aggregation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .ctc import (
    AlignmentInfeasible,
    articulatory_precision,
    beam_search_decode,
    force_align,
    greedy_decode,
    split_words,
)

HIGHER = "higher_is_better"
LOWER = "lower_is_better"

POLARITY = {
    "speech_rate": HIGHER,
    "cpp": HIGHER,
    "f0_semitone_std": HIGHER,
    "vsa": HIGHER,
    "wada_snr": HIGHER,
    "confidence": HIGHER,
    "asric": LOWER,
    "dartp": HIGHER,
    "per_sem": LOWER,
    "per_phone": LOWER,
    "artp": HIGHER,
    "p_estoi": HIGHER,
    "nad": LOWER,
}


@dataclass
class UtteranceScore:
    utterance_id: str
    metric: str
    value: float  # None when undefined
    polarity: str
    reason: str = None
    diagnostics: dict = field(default=None, repr=False)

    @property
    def defined(self):
        return self.value is not None


def levenshtein(ref, hyp):
    """Unit-cost edit distance between token sequences."""
    n, m = len(ref), len(hyp)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1)
    for i in range(1, n + 1):
        cur = np.empty(m + 1, dtype=np.int64)
        cur[0] = i
        sub = prev[:-1] + (np.array(hyp) != ref[i - 1])
        for j in range(1, m + 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, sub[j - 1])
        prev = cur
    return int(prev[m])


def per(ref, hyp):
    """Phoneme error rate: edit distance over reference length (can exceed 1)."""
    if len(ref) == 0:
        raise ValueError("empty reference")
    return levenshtein(list(ref), list(hyp)) / len(ref)


def asric(sem_phones, phone_phones):
    """Recognizer inconsistency: PER of the phonetic stream against the
    phonemized semantic stream. None when the semantic side is empty."""
    if len(sem_phones) == 0:
        return None
    return per(sem_phones, phone_phones)


def confidence(sem_p):
    return greedy_decode(sem_p)[1]


def phonemize_words(lexicon, words, sil_token=None):
    """Look up each word; returns (phoneme sequence, words missing from the
    lexicon). SIL is inserted between words when a SIL token is given."""
    phones = []
    missing = []
    for word in words:
        if word not in lexicon:
            missing.append(word)
            continue
        if phones and sil_token is not None:
            phones.append(sil_token)
        phones.extend(lexicon.phonemes(word))
    return phones, missing


def greedy_words(sem_p):
    tokens, _ = greedy_decode(sem_p)
    delim = sem_p.vocab.delimiter_index()
    if delim is None:
        return ["".join(tokens)] if tokens else []
    return split_words(tokens, sem_p.vocab.labels[delim])


def per_sem(sem_p, lexicon, ref_phones):
    """PER of the phonemized semantic greedy decode against the reference."""
    phones, _ = phonemize_words(lexicon, greedy_words(sem_p))
    return per(ref_phones, phones)


def greedy_phones(phone_p):
    """Greedy phonetic decode with SIL dropped (references carry no SIL)."""
    hyp, _ = greedy_decode(phone_p)
    sil = _sil_label(phone_p.vocab)
    return [t for t in hyp if t != sil]


def per_phone(phone_p, ref_phones):
    """Literal acoustic error rate: phonetic greedy decode vs reference."""
    return per(ref_phones, greedy_phones(phone_p))


def _sil_label(vocab):
    return vocab.labels[vocab.sil_index] if vocab.sil_index is not None else None


def _per_phone_means(phone_p, path):
    """Mean aligned posterior per phone occurrence along the path."""
    means = []
    run_label = None
    run_vals = []
    prev = None
    for t, lab in enumerate(path.labels):
        if lab == path.blank_index:
            prev = lab
            continue
        if lab != prev:
            if run_vals:
                means.append((run_label, float(np.mean(run_vals))))
            run_label, run_vals = lab, []
        run_vals.append(phone_p.probs[t, lab])
        prev = lab
    if run_vals:
        means.append((run_label, float(np.mean(run_vals))))
    return means


def dartp(sem_p, phone_p, model, lexicon, alpha=0.5, beta=1.5, beam_width=100,
          utterance_id=""):
    """Reference-free articulation score from a dual recognizer.

    The semantic recognizer plus LM hypothesizes the intended message, the
    hypothesis is phonemized (SIL between words when the phonetic vocab has
    one) and force-aligned with the phonetic recognizer, and the score is the
    mean aligned posterior over active speech.
    """
    hyp = beam_search_decode(sem_p, model, alpha=alpha, beta=beta, beam_width=beam_width)
    diag = {"hypothesis": list(hyp.words)}
    if not hyp.words:
        return UtteranceScore(utterance_id, "dartp", None, HIGHER,
                              reason="empty decoding hypothesis", diagnostics=diag)
    phones, missing = phonemize_words(lexicon, hyp.words, _sil_label(phone_p.vocab))
    diag["phones"] = phones
    if missing:
        diag["oov_words"] = missing
    if not phones:
        return UtteranceScore(utterance_id, "dartp", None, HIGHER,
                              reason="hypothesis not covered by lexicon", diagnostics=diag)
    try:
        path = force_align(phone_p, phones)
    except AlignmentInfeasible as e:
        return UtteranceScore(utterance_id, "dartp", None, HIGHER,
                              reason=f"alignment infeasible: {e}", diagnostics=diag)
    value = articulatory_precision(phone_p, path)
    if value is None:
        return UtteranceScore(utterance_id, "dartp", None, HIGHER,
                              reason="no active speech frames", diagnostics=diag)
    labels = phone_p.vocab.labels
    diag["phone_posteriors"] = [(labels[i], v) for i, v in _per_phone_means(phone_p, path)]
    return UtteranceScore(utterance_id, "dartp", value, HIGHER, diagnostics=diag)


def artp(phone_p, ref_phones, utterance_id=""):
    """Articulation score with the true transcription provided: force-align
    the reference phonemes and average raw aligned posteriors (no per-phoneme
    normalization)."""
    if not ref_phones:
        raise ValueError("empty reference phonemes")
    try:
        path = force_align(phone_p, list(ref_phones))
    except AlignmentInfeasible as e:
        return UtteranceScore(utterance_id, "artp", None, HIGHER,
                              reason=f"alignment infeasible: {e}")
    value = articulatory_precision(phone_p, path)
    if value is None:
        return UtteranceScore(utterance_id, "artp", None, HIGHER,
                              reason="no active speech frames")
    return UtteranceScore(utterance_id, "artp", value, HIGHER)


# ---------------------------------------------------------------------------
# Reference-audio machinery: band spectrograms and dynamic time warping.

def dtw_path(cost, radius_frac=0.25):
    """Min-total-cost monotone path through a cost matrix.

    Sakoe-Chiba style band: |i*m/n - j| bounded by 25% of the longer side
    (never under 2 cells, widened to cover length mismatch). Backtracking
    prefers the diagonal, so identical sequences align identity.
    Returns (total cost, path as list of (i, j)).
    """
    n, m = cost.shape
    width = max(radius_frac * max(n, m), abs(n - m) + 1, 2.0)
    slope = m / n
    D = np.full((n, m), np.inf)
    inside = np.zeros((n, m), dtype=bool)
    for i in range(n):
        lo = max(0, int(math.floor(i * slope - width)))
        hi = min(m, int(math.ceil(i * slope + width)) + 1)
        inside[i, lo:hi] = True
    D[0, 0] = cost[0, 0]
    for i in range(n):
        for j in range(m):
            if not inside[i, j] or (i == 0 and j == 0):
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = D[i - 1, j - 1]
            if i > 0 and D[i - 1, j] < best:
                best = D[i - 1, j]
            if j > 0 and D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = cost[i, j] + best

    if not np.isfinite(D[n - 1, m - 1]):
        raise ValueError("no path inside DTW band")
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        cands = []
        if i > 0 and j > 0:
            cands.append((D[i - 1, j - 1], (i - 1, j - 1)))
        if i > 0:
            cands.append((D[i - 1, j], (i - 1, j)))
        if j > 0:
            cands.append((D[i, j - 1], (i, j - 1)))
        _, (i, j) = min(cands, key=lambda c: c[0])
        path.append((i, j))
    path.reverse()
    return float(D[n - 1, m - 1]), path


def cosine_cost_matrix(a, b):
    """1 - cosine similarity between every row pair; zero rows cost 1
    against nonzero rows and 0 against each other."""
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    dots = a @ b.T
    denom = np.outer(na, nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
    cost = 1.0 - cos
    both_zero = np.outer(na == 0, nb == 0)
    cost[both_zero] = 0.0
    return cost


def euclidean_cost_matrix(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def third_octave_bands(sr=16000, nfft=512, n_bands=15, first_cf=150.0):
    """Boolean band-by-bin matrix for one-third-octave analysis."""
    freqs = np.fft.rfftfreq(nfft, 1.0 / sr)
    bands = np.zeros((n_bands, len(freqs)), dtype=bool)
    for j in range(n_bands):
        cf = first_cf * 2.0 ** (j / 3.0)
        lo, hi = cf * 2.0 ** (-1 / 6), cf * 2.0 ** (1 / 6)
        bands[j] = (freqs >= lo) & (freqs < hi)
    return bands


def band_spectrogram(audio, nfft=512):
    """One-third-octave band magnitudes (bands x frames): STFT with a 512
    Hann window at 50% overlap, then root-sum-square over each band."""
    x = np.asarray(audio.samples, dtype=np.float64)
    if len(x) < nfft:
        raise ValueError(f"audio shorter than one {nfft}-sample analysis window")
    hop = nfft // 2
    window = np.hanning(nfft)
    starts = range(0, len(x) - nfft + 1, hop)
    spec = np.stack([np.abs(np.fft.rfft(x[s:s + nfft] * window)) for s in starts], axis=1)
    bands = third_octave_bands(sr=audio.sample_rate, nfft=nfft)
    return np.sqrt(np.stack([np.square(spec[b]).sum(axis=0) for b in bands]))


def _warp_onto(source, path, target_len):
    """Average source frames (columns) mapped to each target frame by a path
    of (source, target) pairs."""
    out = np.zeros((source.shape[0], target_len))
    counts = np.zeros(target_len)
    for i, j in path:
        out[:, j] += source[:, i]
        counts[j] += 1
    return out / np.maximum(counts, 1)


def _normalize_rows(m):
    centered = m - m.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1, keepdims=True)
    return centered / np.maximum(norms, 1e-12)


def _normalize_cols(m):
    centered = m - m.mean(axis=0, keepdims=True)
    norms = np.linalg.norm(centered, axis=0, keepdims=True)
    return centered / np.maximum(norms, 1e-12)


def p_estoi(test_audio, ref_audios, radius_frac=0.25, segment=30):
    """Band-correlation intelligibility against warped control references.

    References are warped onto the longest reference (DTW, cosine cost on
    band energies) and averaged frame-wise into a template; the test signal
    is warped onto the template; correlation of row/column mean-variance
    normalized 30-frame log-band segments is averaged over a sliding window.
    Returns (score, info); score None on an empty reference pool. Fewer than
    30 aligned frames fall back to a single truncated segment, flagged in
    info.
    """
    info = {}
    if not ref_audios:
        return None, {"reason": "empty reference pool"}
    eps = 1e-12
    refs_lin = [band_spectrogram(r) for r in ref_audios]
    test_lin = band_spectrogram(test_audio)

    anchor = max(range(len(refs_lin)), key=lambda i: refs_lin[i].shape[1])
    anchor_lin = refs_lin[anchor]
    warped_lin = []
    warped_log = []
    for r in refs_lin:
        if r is anchor_lin:
            warped_lin.append(r)
            warped_log.append(np.log(r + eps))
            continue
        _, path = dtw_path(cosine_cost_matrix(r.T, anchor_lin.T), radius_frac)
        warped_lin.append(_warp_onto(r, path, anchor_lin.shape[1]))
        warped_log.append(_warp_onto(np.log(r + eps), path, anchor_lin.shape[1]))
    template_lin = np.mean(warped_lin, axis=0)
    template_log = np.mean(warped_log, axis=0)

    _, path = dtw_path(cosine_cost_matrix(test_lin.T, template_lin.T), radius_frac)
    test_log = _warp_onto(np.log(test_lin + eps), path, template_lin.shape[1])

    frames = template_log.shape[1]
    if frames < 2:
        return None, {"reason": "too few aligned frames"}
    seg_len = segment
    if frames < segment:
        seg_len = frames
        info["short_segment"] = True
    scores = []
    for s in range(frames - seg_len + 1):
        x = test_log[:, s:s + seg_len]
        y = template_log[:, s:s + seg_len]
        x = _normalize_cols(_normalize_rows(x))
        y = _normalize_cols(_normalize_rows(y))
        scores.append(float((x * y).sum(axis=0).mean()))
    info["segments"] = len(scores)
    return float(np.mean(scores)), info


def nad(test_feats, ref_feats_list, distance="cosine", radius_frac=0.25):
    """Mean per-frame warped distance between feature matrices.

    For each reference, DTW with 1 - cosine (or euclidean) frame cost; the
    total path cost is normalized by path length, and distances are averaged
    over the reference pool. None on an empty pool.
    """
    if distance not in ("cosine", "euclidean"):
        raise ValueError(f"unknown NAD distance {distance!r}")
    if not ref_feats_list:
        return None
    a = np.asarray(test_feats.data if hasattr(test_feats, "data") else test_feats, dtype=np.float64)
    cost_fn = cosine_cost_matrix if distance == "cosine" else euclidean_cost_matrix
    dists = []
    for ref in ref_feats_list:
        b = np.asarray(ref.data if hasattr(ref, "data") else ref, dtype=np.float64)
        if b.shape[1] != a.shape[1]:
            raise ValueError(f"feature dim mismatch: {a.shape[1]} vs {b.shape[1]}")
        total, path = dtw_path(cost_fn(a, b), radius_frac)
        dists.append(total / len(path))
    return float(np.mean(dists))

"""Synthetic benchmark corpus with controlled, monotone degradation.

Builds a complete manifest directory (WAVs, posterior and feature tensors,
vocabularies, lexicon, bigram LM, protocols) for a cohort of synthetic
"speakers" whose severity grows with their index: posterior mass is blended
away from the true labels, phones are substituted within confusable sets
(independently for the semantic and phonetic streams, so recognizer
inconsistency also grows), feature noise rises, and audio gains additive
noise. Clinical target scores decrease linearly with the degradation rank,
so speaker-level correlations of a working metric should approach 1.

The vocabulary is closed under single-phone confusions (pin/tin/kin,
pan/tan/kan), which keeps decoding hypotheses inside the lexicon at every
severity level.
"""

import json
import math
from collections import Counter
from pathlib import Path

import numpy as np

from .dsp import AudioBuffer, save_wav
from .tensorfile import Tensor2D, write_tensor

SR = 16000
HOP_SAMPLES = 320  # 20 ms posterior/feature frame
PHONES = ("p", "t", "k", "n", "i", "a")
# Substitutions stay inside these sets, so every corrupted word is still a
# lexicon word; "n" has no confusion partner and is never substituted.
CONFUSABLE = {"p": ("t", "k"), "t": ("p", "k"), "k": ("p", "t"),
              "i": ("a",), "a": ("i",)}
WORDS = ("pin", "tin", "kin", "pan", "tan", "kan")

SENTENCES = (
    "pin tan kan", "tin pan kin", "kan pin tan",
    "pan kin tin", "tan kan pin", "kin tin pan",
    "pin pan tan", "tan tin kan", "kan kin pin",
)
SENT_MC = SENTENCES[:3]
WORD_MC = ("pin", "tan", "kin")

PHONE_VOCAB = ("<pad>", "SIL") + PHONES
SEM_VOCAB = ("<pad>", "|") + PHONES

FRAMES_PER_PHONE = 6
FRAMES_SIL_EDGE = 6
FRAMES_SIL_GAP = 4
FRAMES_PER_CHAR = 4
FRAMES_DELIM = 2

# Synthetic production targets: burst tones for stops, formant pairs for the
# voiced phones (undershot toward the centroid as severity grows).
PHONE_TONES = {"p": 900.0, "t": 2100.0, "k": 1400.0}
PHONE_FORMANTS = {"i": (320.0, 2250.0), "a": (700.0, 1150.0), "n": (280.0, 950.0)}
FORMANT_CENTER = (500.0, 1450.0)


def _phone_base_vectors(dim=8):
    out = {}
    for idx, ph in enumerate(PHONES + ("SIL",)):
        rng = np.random.default_rng([991, idx])
        out[ph] = rng.normal(0.0, 1.0, size=dim)
    return out


_BASE_VECTORS = _phone_base_vectors()


def _frame_plan(words, gap_frames=FRAMES_SIL_GAP):
    """Per-frame phone labels ('SIL' or phone) for the phonetic stream."""
    plan = ["SIL"] * FRAMES_SIL_EDGE
    for w, word in enumerate(words):
        if w:
            plan += ["SIL"] * gap_frames
        for ph in word:
            plan += [ph] * FRAMES_PER_PHONE
    plan += ["SIL"] * FRAMES_SIL_EDGE
    return plan


def _char_plan(words):
    """Per-frame labels for the semantic stream ('<pad>' at the edges)."""
    plan = ["<pad>"] * FRAMES_DELIM
    for w, word in enumerate(words):
        if w:
            plan += ["|"] * FRAMES_DELIM
        for ch in word:
            plan += [ch] * FRAMES_PER_CHAR
    plan += ["<pad>"] * FRAMES_DELIM
    return plan


def _substitute(plan, positions_rng, rate):
    """Swap whole phone segments to a confusable phone at the given rate."""
    segments = []
    start = 0
    for i in range(1, len(plan) + 1):
        if i == len(plan) or plan[i] != plan[start]:
            if plan[start] in CONFUSABLE:
                segments.append((start, i, plan[start]))
            start = i
    out = list(plan)
    # Quota with mild jitter rather than a binomial draw: keeps the severity
    # trend well above the sampling noise at toy corpus sizes.
    quota = min(rate, 0.95) * len(segments) + positions_rng.normal(0.0, 0.35)
    n_sub = int(np.clip(round(quota), 0, len(segments)))
    for seg_idx in positions_rng.choice(len(segments), size=n_sub, replace=False):
        s, e, ph = segments[seg_idx]
        repl = CONFUSABLE[ph][positions_rng.integers(len(CONFUSABLE[ph]))]
        for i in range(s, e):
            out[i] = repl
    return out


def _posteriors(plan, vocab, blend, rng):
    """One-hot-by-plan rows with `blend` probability mass spread uniformly."""
    v = len(vocab)
    index = {lab: i for i, lab in enumerate(vocab)}
    rows = np.full((len(plan), v), blend / (v - 1), dtype=np.float64)
    for t, lab in enumerate(plan):
        rows[t, index[lab]] = 1.0 - blend
    # Small common-mode wiggle keeps rows off exact grid values.
    rows += rng.uniform(0, 1e-4, size=rows.shape)
    rows /= rows.sum(axis=1, keepdims=True)
    return Tensor2D(rows.astype(np.float32))


def _features(plan, noise_sigma, rng, dim=8):
    t_axis = np.arange(len(plan))[:, None]
    drift = 0.1 * np.sin(2 * np.pi * t_axis / max(len(plan), 1) + np.arange(dim))
    base = np.stack([_BASE_VECTORS[ph if ph in _BASE_VECTORS else "SIL"] for ph in plan])
    feats = base + drift + rng.normal(0.0, noise_sigma, size=(len(plan), dim))
    return Tensor2D(feats.astype(np.float32))


def _voiced_segment(n, t0, f0, vibrato, formants, rng, aspiration):
    """Resonator-filtered excitation: vibrato pulse train plus breath noise.

    Aspiration noise is mixed into the excitation before the resonators, so
    severity erodes harmonicity without flattening the formant structure.
    """
    from scipy.signal import lfilter

    t = t0 + np.arange(n) / SR
    f_inst = f0 * (1.0 + vibrato * np.sin(2 * np.pi * 2.7 * t))
    phase = np.cumsum(f_inst) / SR
    exc = np.zeros(n)
    exc[np.nonzero(np.diff(np.floor(phase), prepend=phase[0]) > 0)[0]] = 1.0
    exc = exc + aspiration * 0.12 * rng.normal(size=n)
    out = exc
    for f, bw in zip(formants, (70.0, 110.0)):
        r = np.exp(-np.pi * bw / SR)
        theta = 2 * np.pi * f / SR
        out = lfilter([1.0], [1.0, -2 * r * np.cos(theta), r * r], out)
    return out / max(np.abs(out).max(), 1e-9)


def _audio(plan, rng, f0=120.0, vibrato=0.04, undershoot=0.0,
           aspiration=0.0, background=0.003):
    """One synthetic segment per frame-plan phone, plus background noise.

    Voiced phones get pulse-train resonances whose formants are undershot
    toward a neutral center as severity grows; stops are plain tone bursts.
    """
    n = len(plan) * HOP_SAMPLES
    t = np.arange(n) / SR
    x = np.zeros(n)
    start = 0
    for i in range(1, len(plan) + 1):
        if i == len(plan) or plan[i] != plan[start]:
            seg = slice(start * HOP_SAMPLES, i * HOP_SAMPLES)
            ph = plan[start]
            size = seg.stop - seg.start
            wave = None
            if ph in PHONE_FORMANTS:
                f1, f2 = PHONE_FORMANTS[ph]
                f1 = f1 + (FORMANT_CENTER[0] - f1) * undershoot
                f2 = f2 + (FORMANT_CENTER[1] - f2) * undershoot
                wave = _voiced_segment(size, start * HOP_SAMPLES / SR, f0, vibrato,
                                       (f1, f2), rng, aspiration)
            elif ph in PHONE_TONES:
                wave = 0.6 * np.sin(2 * np.pi * PHONE_TONES[ph] * t[seg])
            if wave is not None:
                ramp = min(160, size // 4)
                if ramp:
                    env = np.ones(size)
                    env[:ramp] = np.linspace(0, 1, ramp)
                    env[-ramp:] = np.linspace(1, 0, ramp)
                    wave = wave * env
                x[seg] = wave
            start = i
    x = 0.55 * x / max(np.abs(x).max(), 1e-9)
    x = x + rng.normal(0.0, background, size=n)
    return AudioBuffer(samples=np.clip(x, -1.0, 1.0).astype(np.float32))


def _bigram_arpa(sentences):
    """Self-consistent absolute-discount bigram model over the toy corpus."""
    discount = 0.5
    uni = Counter()
    bi = Counter()
    for sent in sentences:
        toks = ["<s>"] + sent.split() + ["</s>"]
        for w in toks[1:]:
            uni[w] += 1
        for a, b in zip(toks, toks[1:]):
            bi[(a, b)] += 1
    total = sum(uni.values())
    p_uni = {w: c / total for w, c in uni.items()}
    ctx_tot = Counter()
    for (a, _), c in bi.items():
        ctx_tot[a] += c
    bows = {}
    for ctx, ctot in ctx_tot.items():
        seen = {w for (a, w) in bi if a == ctx}
        unseen_mass = sum(p for w, p in p_uni.items() if w not in seen)
        bows[ctx] = (discount * len(seen) / ctot) / unseen_mass

    lines = ["\\data\\", f"ngram 1={len(p_uni) + 2}", f"ngram 2={len(bi)}", "", "\\1-grams:"]
    lines.append(f"-99\t<s>\t{math.log10(bows['<s>']):.6f}")
    lines.append("-2.0\t<unk>")
    for w in sorted(p_uni):
        bow = f"\t{math.log10(bows[w]):.6f}" if w in bows else ""
        lines.append(f"{math.log10(p_uni[w]):.6f}\t{w}{bow}")
    lines += ["", "\\2-grams:"]
    for (a, b), c in sorted(bi.items()):
        lines.append(f"{math.log10((c - discount) / ctx_tot[a]):.6f}\t{a} {b}")
    lines += ["", "\\end\\", ""]
    return "\n".join(lines)


def degradation_profile(rank, jitter_rng):
    """Blend/substitution/production levels for one utterance at a rank."""
    eps = float(jitter_rng.normal(0.0, 0.012))
    return {
        "blend_phone": float(np.clip(0.05 + 0.055 * rank + eps, 0.02, 0.75)),
        "blend_sem": float(np.clip(0.04 + 0.040 * rank + eps, 0.02, 0.60)),
        "sub_rate_phone": 0.055 * rank,
        "sub_rate_sem": 0.040 * rank,
        "feat_sigma": float(np.clip(0.05 + 0.11 * rank + 2.5 * eps, 0.01, None)),
        "vibrato": float(max(0.003, 0.05 * (1 - rank / 11.0) + jitter_rng.normal(0, 0.003))),
        "undershoot": float(np.clip(0.075 * rank + 2 * eps, 0.0, 0.75)),
        "aspiration": float(np.clip(0.06 * rank + 2 * eps, 0.0, None)),
        "gap_frames": FRAMES_SIL_GAP + int(round(0.5 * rank)),
    }


def generate_toy_corpus(root, n_speakers=10, n_controls=3, seed=7):
    """Write the complete corpus under ``root``; returns the manifest path."""
    root = Path(root)
    (root / "wav").mkdir(parents=True, exist_ok=True)
    (root / "tensors").mkdir(exist_ok=True)

    speakers = [(f"S{k}", "pathological", k) for k in range(n_speakers)]
    speakers += [(f"C{k}", "control", 0) for k in range(n_controls)]
    items = [("sentence", f"sent{j}", text) for j, text in enumerate(SENTENCES)]
    items += [("word", f"word{j}", w) for j, w in enumerate(WORDS)]

    utterances = []
    for spk_idx, (spk, group, rank) in enumerate(speakers):
        age = 45 + (spk_idx * 7) % 30
        f0 = 105.0 + 6.0 * (spk_idx % 5)
        spk_rng = np.random.default_rng([seed, 17, spk_idx])
        background = float(spk_rng.uniform(0.002, 0.006))  # channel, not severity
        for item_idx, (stimulus, label, text) in enumerate(items):
            uid = f"{spk}_{label}"
            rng = np.random.default_rng([seed, spk_idx, item_idx])
            level = degradation_profile(rank if group == "pathological" else 0, rng)
            words = text.split()

            phone_plan = _frame_plan(words, gap_frames=level["gap_frames"])
            sem_plan = _char_plan(words)
            spoken_plan = _substitute(phone_plan, rng, level["sub_rate_phone"])
            heard_plan = _substitute(sem_plan, rng, level["sub_rate_sem"])

            phone_t = _posteriors(spoken_plan, PHONE_VOCAB, level["blend_phone"], rng)
            sem_t = _posteriors(heard_plan, SEM_VOCAB, level["blend_sem"], rng)
            feats_t = _features(spoken_plan, level["feat_sigma"], rng)
            audio = _audio(spoken_plan, rng, f0=f0, vibrato=level["vibrato"],
                           undershoot=level["undershoot"],
                           aspiration=level["aspiration"], background=background)

            paths = {
                "audio_path": f"wav/{uid}.wav",
                "sem_logits_path": f"tensors/{uid}_sem.pbt",
                "phone_logits_path": f"tensors/{uid}_phone.pbt",
                "features_path": f"tensors/{uid}_feat.pbt",
            }
            save_wav(root / paths["audio_path"], audio)
            write_tensor(sem_t, root / paths["sem_logits_path"])
            write_tensor(phone_t, root / paths["phone_logits_path"])
            write_tensor(feats_t, root / paths["features_path"])

            utterances.append({
                "utterance_id": uid,
                "speaker_id": spk,
                "group": group,
                "stimulus": stimulus,
                "transcript": text,
                "phonemes": [p for w in words for p in w],
                "age": age,
                **paths,
            })

    targets = {f"S{k}": 100.0 - 8.0 * k for k in range(n_speakers)}

    def proto(name, condition, stimulus, texts):
        keep = {t for t in texts}
        ids = [u["utterance_id"] for u in utterances
               if u["stimulus"] == stimulus and u["transcript"] in keep]
        return {"name": name, "dataset": "toy", "condition": condition,
                "stimulus": stimulus, "utterance_ids": ids, "speaker_targets": targets}

    protocols = [
        proto("toy-sent-MC", "MC", "sentence", SENT_MC),
        proto("toy-sent-EX", "EX", "sentence", SENTENCES),
        proto("toy-word-MC", "MC", "word", WORD_MC),
        proto("toy-word-EX", "EX", "word", WORDS),
    ]

    docs = {
        "vocab_phone.json": {"schema_version": 1, "labels": list(PHONE_VOCAB),
                             "blank_index": 0, "sil_index": 1},
        "vocab_sem.json": {"schema_version": 1, "labels": list(SEM_VOCAB),
                           "blank_index": 0, "sil_index": None, "word_delim_index": 1},
        "lexicon.json": {"schema_version": 1,
                         "entries": {w: list(w) for w in WORDS}},
        "protocols.json": {"schema_version": 1, "protocols": protocols},
    }
    for name, doc in docs.items():
        (root / name).write_text(json.dumps(doc, indent=1), encoding="utf-8")
    (root / "lm.arpa").write_text(_bigram_arpa(list(SENTENCES) + list(WORDS)), encoding="utf-8")

    manifest = {
        "schema_version": 1,
        "vocab_sem": "vocab_sem.json",
        "vocab_phone": "vocab_phone.json",
        "lexicon": "lexicon.json",
        "protocols": "protocols.json",
        "lm": "lm.arpa",
        "utterances": utterances,
    }
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return path

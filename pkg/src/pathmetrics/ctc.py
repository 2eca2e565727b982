"""CTC-space algorithms over posterior matrices.

Greedy decoding with confidence, prefix beam search with n-gram shallow
fusion, Viterbi forced alignment over the blank-interleaved state graph, and
the aligned-posterior precision score. All probability math runs in the
natural-log domain with log-sum-exp; linear posteriors are floored at 1e-10
before taking logs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .lm import BOS

PROB_FLOOR = 1e-10
NEG_INF = float("-inf")


def _lse2(a, b):
    """log(exp(a) + exp(b)) on plain floats; faster than numpy scalars."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class AlignmentInfeasible(Exception):
    """Target cannot be aligned: too few frames for the CTC topology."""


@dataclass(frozen=True)
class PosteriorMatrix:
    """Per-frame label probabilities (T x V) tied to a vocabulary."""

    tensor: "Tensor2D"
    vocab: "VocabSpec"
    frame_hop: float = 0.02

    def __post_init__(self):
        probs = self.tensor.data
        if probs.shape[1] != len(self.vocab):
            raise ValueError(
                f"posterior width {probs.shape[1]} != vocab size {len(self.vocab)}"
            )
        if probs.min() < -1e-6 or probs.max() > 1.0 + 1e-6:
            raise ValueError("posterior entries outside [0, 1]")
        sums = probs.sum(axis=1)
        bad = np.abs(sums - 1.0) > 1e-3
        if bad.any():
            t = int(np.argmax(bad))
            raise ValueError(f"posterior row {t} sums to {sums[t]:.6f}, expected 1")

    @property
    def probs(self):
        return self.tensor.data

    @property
    def num_frames(self):
        return self.tensor.rows

    def log_probs(self):
        return np.log(np.clip(self.probs.astype(np.float64), PROB_FLOOR, None))


@dataclass(frozen=True)
class AlignmentPath:
    """Per-frame vocab indices from forced alignment, with the path score."""

    labels: tuple
    score: float
    blank_index: int
    sil_index: int = None

    def __len__(self):
        return len(self.labels)

    def active_mask(self):
        """True on frames carrying actual speech (neither blank nor SIL)."""
        silent = {self.blank_index}
        if self.sil_index is not None:
            silent.add(self.sil_index)
        return np.array([lab not in silent for lab in self.labels], dtype=bool)


@dataclass(frozen=True)
class Hypothesis:
    """One decoded word sequence with its fused score breakdown."""

    words: tuple
    acoustic_lnp: float
    lm_lnp: float
    alpha: float
    beta: float
    tokens: tuple = ()

    @property
    def combined(self):
        return self.acoustic_lnp + self.alpha * self.lm_lnp + self.beta * len(self.words)


def collapse_path(labels, blank):
    """Standard CTC collapse: merge adjacent repeats, then drop blanks."""
    out = []
    prev = object()
    for lab in labels:
        if lab != prev:
            if lab != blank:
                out.append(lab)
            prev = lab
    return out


def greedy_decode(p):
    """Best-path decode with model confidence.

    Confidence is the mean argmax probability over non-blank-argmax frames;
    if every frame argmaxes to blank, it is the mean blank probability and
    the label sequence is empty.
    """
    probs = p.probs
    best = probs.argmax(axis=1)
    best_p = probs[np.arange(len(best)), best]
    blank = p.vocab.blank_index
    nonblank = best != blank
    if nonblank.any():
        confidence = float(best_p[nonblank].mean())
    else:
        confidence = float(probs[:, blank].mean())
    labels = [p.vocab.labels[i] for i in collapse_path(best.tolist(), blank)]
    return labels, confidence


def split_words(tokens, delimiter):
    """Split a collapsed token sequence into words, ignoring empty segments."""
    words = []
    current = []
    for tok in tokens:
        if tok == delimiter:
            if current:
                words.append("".join(current))
                current = []
        else:
            current.append(tok)
    if current:
        words.append("".join(current))
    return words


def beam_search_decode(p, model, alpha=0.5, beta=1.5, beam_width=100):
    """CTC prefix beam search with shallow n-gram fusion.

    Tracks blank/non-blank ending probabilities per collapsed prefix. When a
    word boundary token completes a word, alpha * ln P_LM(word | history) and
    the insertion bonus beta are added; a trailing partial word is scored the
    same way at finalization. ``beam_width=None`` (or ``math.inf``) disables
    pruning, which makes the search exact. Ties break toward the
    lexicographically smallest token sequence.

    A finite ``beam_width`` is a budget: the search runs with widths
    1, 2, 4, ... up to the largest power of two inside the budget and keeps
    the best finalized hypothesis. Iterative widening costs at most 2x one
    pass and makes "a wider beam never scores worse" hold exactly, which a
    single pruned pass cannot guarantee (pruning at one width can drop
    probability mass another width keeps).
    """
    if beam_width is None or beam_width == math.inf:
        return _beam_pass(p, model, alpha, beta, None)
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    best = None
    width = 1
    while True:
        hyp = _beam_pass(p, model, alpha, beta, width)
        if best is None or (-hyp.combined, hyp.tokens) < (-best.combined, best.tokens):
            best = hyp
        if width * 2 > beam_width:
            return best
        width *= 2


def _beam_pass(p, model, alpha, beta, beam_width):
    delim = p.vocab.delimiter_index()
    if delim is None:
        raise ValueError("semantic vocab has no word-delimiter token")
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("alpha and beta must be finite")

    lnp = p.log_probs()
    blank = p.vocab.blank_index
    labels = p.vocab.labels
    T, V = lnp.shape

    # prefix -> [ln P(paths ending in blank), ln P(paths ending in non-blank)]
    beams = {(): [0.0, NEG_INF]}
    # prefix -> (lm ln sum of completed words, completed count, partial chars, lm context)
    meta = {(): (0.0, 0, (), (BOS,))}

    def extend_meta(prefix, c):
        lm_ln, nwords, partial, ctx = meta[prefix]
        if c == delim:
            if partial:
                word = "".join(partial)
                lm_ln += model.score_word(ctx, word)
                nwords += 1
                ctx = ctx + (word,)
            partial = ()
        else:
            partial = partial + (labels[c],)
        return lm_ln, nwords, partial, ctx

    # Pruning ranks prefixes by the same fused score finalization uses
    # (trailing partial word included); a mismatched ranking would let a
    # narrow beam keep hypotheses a wider one drops.
    lookahead = {}

    def prune_score(prefix, pb_pnb):
        lm_ln, nwords, partial, ctx = meta[prefix]
        if partial:
            cached = lookahead.get(prefix)
            if cached is None:
                cached = model.score_word(ctx, "".join(partial))
                lookahead[prefix] = cached
            lm_ln += cached
            nwords += 1
        return _lse2(pb_pnb[0], pb_pnb[1]) + alpha * lm_ln + beta * nwords

    for t in range(T):
        frame = lnp[t].tolist()
        nxt = {}

        def acc(prefix, slot, value):
            cell = nxt.get(prefix)
            if cell is None:
                cell = [NEG_INF, NEG_INF]
                nxt[prefix] = cell
            cell[slot] = _lse2(cell[slot], value)

        for prefix, (pb, pnb) in beams.items():
            total = _lse2(pb, pnb)
            acc(prefix, 0, total + frame[blank])
            last = prefix[-1] if prefix else None
            for c in range(V):
                if c == blank:
                    continue
                lp = frame[c]
                if c == last:
                    # Same symbol again extends the frame run, not the prefix.
                    acc(prefix, 1, pnb + lp)
                    ext = prefix + (c,)
                    if ext not in meta:
                        meta[ext] = extend_meta(prefix, c)
                    acc(ext, 1, pb + lp)
                else:
                    ext = prefix + (c,)
                    if ext not in meta:
                        meta[ext] = extend_meta(prefix, c)
                    acc(ext, 1, total + lp)

        if beam_width is not None and len(nxt) > beam_width:
            ranked = sorted(
                nxt.items(),
                key=lambda kv: (-prune_score(kv[0], kv[1]), tuple(labels[i] for i in kv[0])),
            )
            nxt = dict(ranked[:beam_width])
        beams = nxt

    best = None
    for prefix, (pb, pnb) in beams.items():
        acoustic = _lse2(pb, pnb)
        lm_ln, nwords, partial, ctx = meta[prefix]
        lm_total = lm_ln
        words = split_words([labels[c] for c in prefix], labels[delim])
        if partial:
            # The trailing segment counts as a word too.
            lm_total += model.score_word(ctx, "".join(partial))
        hyp = Hypothesis(
            words=tuple(words),
            acoustic_lnp=acoustic,
            lm_lnp=lm_total,
            alpha=alpha,
            beta=beta,
            tokens=tuple(labels[c] for c in prefix),
        )
        key = (-hyp.combined, hyp.tokens)
        if best is None or key < best[0]:
            best = (key, hyp)
    return best[1]


def force_align(p, target):
    """Viterbi forced alignment of ``target`` phoneme tokens to ``p``.

    Runs the standard DP over the blank-interleaved state sequence
    (blank, t1, blank, t2, ..., blank) and returns the single most probable
    frame labeling that collapses to the target, with its summed
    log-probability. Raises :class:`AlignmentInfeasible` when the frame count
    cannot accommodate the target.
    """
    if not target:
        raise ValueError("alignment target is empty")
    blank = p.vocab.blank_index
    try:
        idx = [p.vocab.index(tok) for tok in target]
    except ValueError as e:
        raise ValueError(f"target token not in vocab: {e}")
    if blank in idx:
        raise ValueError("alignment target contains the blank token")

    T = p.num_frames
    L = len(idx)
    min_frames = L + sum(1 for a, b in zip(idx, idx[1:]) if a == b)
    if T < min_frames:
        raise AlignmentInfeasible(
            f"{T} frames cannot realize a {L}-token target (needs >= {min_frames})"
        )

    lnp = p.log_probs()
    states = np.empty(2 * L + 1, dtype=np.int64)
    states[0::2] = blank
    states[1::2] = idx
    S = len(states)

    emit = lnp[:, states]  # (T, S)
    score = np.full(S, NEG_INF)
    score[0] = emit[0, 0]
    score[1] = emit[0, 1]
    back = np.zeros((T, S), dtype=np.int64)
    back[0] = np.arange(S)

    # Skip from s-2 allowed only into a phone state whose phone differs from
    # the previous phone (no blank needed between distinct labels).
    can_skip = np.zeros(S, dtype=bool)
    for s in range(3, S, 2):
        can_skip[s] = states[s] != states[s - 2]

    for t in range(1, T):
        prev = score
        stay = prev
        step = np.concatenate(([NEG_INF], prev[:-1]))
        skip = np.concatenate(([NEG_INF, NEG_INF], prev[:-2]))
        skip = np.where(can_skip, skip, NEG_INF)
        choices = np.stack([stay, step, skip])  # deterministic priority order
        pick = choices.argmax(axis=0)
        score = choices[pick, np.arange(S)] + emit[t]
        back[t] = np.arange(S) - pick

    end_states = [S - 1, S - 2]
    final = max(end_states, key=lambda s: (score[s], -s))
    if score[final] == NEG_INF:
        raise AlignmentInfeasible("no feasible alignment path")

    path = np.empty(T, dtype=np.int64)
    s = final
    for t in range(T - 1, -1, -1):
        path[t] = states[s]
        s = back[t, s]
    return AlignmentPath(
        labels=tuple(int(v) for v in path),
        score=float(score[final]),
        blank_index=blank,
        sil_index=p.vocab.sil_index,
    )


def articulatory_precision(p, path):
    """Mean aligned posterior over active-speech frames, in [0, 1].

    Active frames are those whose aligned label is neither blank nor SIL;
    returns None when the path has no active frame.
    """
    if len(path) != p.num_frames:
        raise ValueError(f"path length {len(path)} != posterior frames {p.num_frames}")
    mask = path.active_mask()
    if not mask.any():
        return None
    frames = np.nonzero(mask)[0]
    labels = np.array(path.labels)[frames]
    return float(p.probs[frames, labels].mean())

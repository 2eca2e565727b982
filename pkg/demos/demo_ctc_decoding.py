#!/usr/bin/env python3
"""The CTC toolbox on a hand-built posterior matrix.

Shows greedy decoding with confidence, LM-fused beam search, forced
alignment, and the articulatory precision score, all on a tiny vocabulary
you can read by eye.
"""

import numpy as np

from pathmetrics import (
    PosteriorMatrix,
    Tensor2D,
    VocabSpec,
    articulatory_precision,
    beam_search_decode,
    force_align,
    greedy_decode,
)
from pathmetrics.lm import parse_arpa
import tempfile

SEM = VocabSpec(labels=("<pad>", "|", "h", "i", "o"), blank_index=0)
PHONE = VocabSpec(labels=("<pad>", "SIL", "h", "i", "o"), blank_index=0, sil_index=1)

ARPA = """\\data\\
ngram 1=5

\\1-grams:
-99\t<s>
-0.8\t</s>
-0.45\thi
-0.65\tho
-1.2\t<unk>

\\end\\
"""


def pm(rows, vocab):
    rows = np.asarray(rows, dtype=np.float32)
    rows = rows / rows.sum(axis=1, keepdims=True)
    return PosteriorMatrix(tensor=Tensor2D(rows), vocab=vocab, frame_hop=0.02)


with tempfile.NamedTemporaryFile("w", suffix=".arpa", delete=False) as f:
    f.write(ARPA)
    lm_path = f.name
lm = parse_arpa(lm_path)

# Frames spelling "h i | h ?" where the last char leans slightly toward "o";
# the LM knows "hi" is likelier than "ho".
rows = [
    [0.05, 0.01, 0.90, 0.02, 0.02],  # h
    [0.05, 0.01, 0.02, 0.90, 0.02],  # i
    [0.05, 0.88, 0.02, 0.03, 0.02],  # |
    [0.05, 0.01, 0.90, 0.02, 0.02],  # h
    [0.05, 0.01, 0.02, 0.43, 0.49],  # leans "o"
]
sem = pm(rows, SEM)

labels, conf = greedy_decode(sem)
print(f"greedy tokens: {labels}  confidence {conf:.3f}")

for alpha in (0.0, 2.0):
    hyp = beam_search_decode(sem, lm, alpha=alpha, beta=0.5, beam_width=16)
    print(f"beam alpha={alpha}: words={list(hyp.words)}  "
          f"acoustic={hyp.acoustic_lnp:.3f} lm={hyp.lm_lnp:.3f} combined={hyp.combined:.3f}")
print("  (acoustics alone say 'ho'; the LM flips the second word to 'hi')")

# Force-align "SIL h i SIL" to a phonetic stream with an uncertain middle
# frame; SIL frames align but are excluded from the precision average.
phone = pm(
    [
        [0.02, 0.92, 0.02, 0.02, 0.02],  # SIL
        [0.05, 0.02, 0.89, 0.02, 0.02],  # h
        [0.20, 0.02, 0.38, 0.38, 0.02],  # h or i
        [0.05, 0.02, 0.02, 0.89, 0.02],  # i
        [0.02, 0.92, 0.02, 0.02, 0.02],  # SIL
    ],
    PHONE,
)
path = force_align(phone, ["SIL", "h", "i", "SIL"])
print(f"\nalignment labels: {[PHONE.labels[i] for i in path.labels]}  score {path.score:.3f}")
ap = articulatory_precision(phone, path)
print(f"articulatory precision over active (non-SIL) frames: {ap:.3f}")

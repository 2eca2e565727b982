#!/usr/bin/env python3
"""Regenerate the bundled test WAVs (synthesized, public domain).

Three short mono 16 kHz PCM16 clips with deliberately non-multiple-of-320
sample counts so frame arithmetic is exercised.
"""

from pathlib import Path

import numpy as np
from scipy.io import wavfile

SR = 16000
HERE = Path(__file__).resolve().parent


def tone_sequence(freqs, n):
    seg = n // len(freqs)
    parts = []
    for k, f in enumerate(freqs):
        ln = seg if k < len(freqs) - 1 else n - seg * (len(freqs) - 1)
        t = np.arange(ln) / SR
        parts.append(np.sin(2 * np.pi * f * t) + 0.4 * np.sin(2 * np.pi * 2 * f * t))
    x = np.concatenate(parts)
    return 0.6 * x / np.abs(x).max()


def main():
    rng = np.random.default_rng(42)
    clips = {
        "clip_tones.wav": tone_sequence([220, 880, 440], 10400),
        "clip_vowelish.wav": tone_sequence([150, 300, 150, 600], 13003),
        "clip_noisy.wav": 0.4 * tone_sequence([330, 660], 16000) + 0.05 * rng.normal(size=16000),
    }
    for name, x in clips.items():
        pcm = np.clip(x * 32767, -32768, 32767).astype(np.int16)
        wavfile.write(HERE / name, SR, pcm)
        print(f"wrote {name} ({len(pcm)} samples)")


if __name__ == "__main__":
    main()

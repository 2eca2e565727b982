"""Offline exporter feeding the pathmetrics file formats: wav2vec2
posteriors and frame features as .pbt tensors, tokenizer-mirroring
vocabularies, and a G2P pronunciation lexicon."""

from .extract import (
    DEFAULT_MODELS,
    ExtractionJob,
    extract_features,
    extract_posteriors,
    load_audio_16k,
    vocab_from_tokenizer,
)
from .formats import read_pbt, write_pbt
from .g2p import arpa_unigrams, build_lexicon, map_symbols

__version__ = "0.1.0"

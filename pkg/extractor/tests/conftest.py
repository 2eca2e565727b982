import json
import shutil
from pathlib import Path

import pytest
import torch

DATA = Path(__file__).resolve().parent / "data"

SEM_LETTERS = ["|", "h", "i", "n", "o"]
PHONES = ["h", "i", "n", "o"]
SPECIALS = ["<pad>", "<s>", "</s>", "<unk>"]


def _save_ctc_model(dirpath, letters, hidden=32, layers=2, seed=0):
    from transformers import (
        Wav2Vec2Config,
        Wav2Vec2CTCTokenizer,
        Wav2Vec2FeatureExtractor,
        Wav2Vec2ForCTC,
        Wav2Vec2Processor,
    )

    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    vocab = {tok: i for i, tok in enumerate(SPECIALS + letters)}
    (dirpath / "vocab.json").write_text(json.dumps(vocab), encoding="utf-8")
    tokenizer = Wav2Vec2CTCTokenizer(str(dirpath / "vocab.json"),
                                     word_delimiter_token="|")
    config = Wav2Vec2Config(
        vocab_size=len(vocab), hidden_size=hidden, num_hidden_layers=layers,
        num_attention_heads=2, intermediate_size=hidden * 2,
        conv_dim=[16] * 7, num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
    )
    torch.manual_seed(seed)
    model = Wav2Vec2ForCTC(config)
    model.eval()
    fe = Wav2Vec2FeatureExtractor(feature_size=1, sampling_rate=16000,
                                  padding_value=0.0, do_normalize=True,
                                  return_attention_mask=False)
    Wav2Vec2Processor(feature_extractor=fe, tokenizer=tokenizer).save_pretrained(dirpath)
    model.save_pretrained(dirpath)
    return dirpath


def _save_encoder_model(dirpath, hidden=24, layers=12, seed=1):
    from transformers import Wav2Vec2Config, Wav2Vec2FeatureExtractor, Wav2Vec2Model

    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    config = Wav2Vec2Config(
        vocab_size=8, hidden_size=hidden, num_hidden_layers=layers,
        num_attention_heads=2, intermediate_size=hidden * 2,
        conv_dim=[16] * 7, num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
    )
    torch.manual_seed(seed)
    model = Wav2Vec2Model(config)
    model.eval()
    model.save_pretrained(dirpath)
    Wav2Vec2FeatureExtractor(feature_size=1, sampling_rate=16000, padding_value=0.0,
                             do_normalize=True,
                             return_attention_mask=False).save_pretrained(dirpath)
    return dirpath


@pytest.fixture(scope="session")
def tiny_models(tmp_path_factory):
    root = tmp_path_factory.mktemp("models")
    return {
        "semantic": str(_save_ctc_model(root / "sem", SEM_LETTERS, seed=0)),
        "phonetic": str(_save_ctc_model(root / "phone", PHONES, seed=1)),
        "features": str(_save_encoder_model(root / "feat")),
    }


UTTS = [
    ("u_tones", "S1", "pathological", "hi", ["h", "i"], "clip_tones.wav"),
    ("u_vowel", "S2", "pathological", "oh no", ["o", "n", "o"], "clip_vowelish.wav"),
    ("u_noisy", "C1", "control", "hi", ["h", "i"], "clip_noisy.wav"),
]

G2P_TABLE = {"schema_version": 1,
             "words": {"hi": ["h", "i"], "oh": ["o"], "no": ["n", "o"]}}


def write_corpus(root):
    """Manifest skeleton + bundled WAVs; vocab/lexicon appear at extraction."""
    root = Path(root)
    (root / "wav").mkdir(parents=True, exist_ok=True)
    utterances = []
    for uid, spk, group, text, phones, clip in UTTS:
        shutil.copy(DATA / clip, root / "wav" / clip)
        utterances.append({
            "utterance_id": uid, "speaker_id": spk, "group": group,
            "stimulus": "word" if " " not in text else "sentence",
            "transcript": text, "phonemes": phones,
            "audio_path": f"wav/{clip}",
        })
    protocols = {"schema_version": 1, "protocols": [{
        "name": "mini-MC", "dataset": "mini", "condition": "MC",
        "stimulus": "word",
        "utterance_ids": ["u_tones", "u_noisy"],
        "speaker_targets": {"S1": 60.0, "S2": 40.0},
    }]}
    (root / "protocols.json").write_text(json.dumps(protocols), encoding="utf-8")
    (root / "g2p_table.json").write_text(json.dumps(G2P_TABLE), encoding="utf-8")
    manifest = {
        "schema_version": 1,
        "vocab_sem": "vocab_sem.json",
        "vocab_phone": "vocab_phone.json",
        "lexicon": "lexicon.json",
        "protocols": "protocols.json",
        "utterances": utterances,
    }
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return path


@pytest.fixture
def corpus(tmp_path):
    return write_corpus(tmp_path / "corpus")

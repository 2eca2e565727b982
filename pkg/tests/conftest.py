import json
from pathlib import Path

import pytest

VOCAB_PHONE = {
    "schema_version": 1,
    "labels": ["<pad>", "SIL", "a", "b", "k", "t"],
    "blank_index": 0,
    "sil_index": 1,
}
VOCAB_SEM = {
    "schema_version": 1,
    "labels": ["<pad>", "|", "a", "b", "c", "k", "t"],
    "blank_index": 0,
    "sil_index": None,
}
LEXICON = {
    "schema_version": 1,
    "entries": {"cat": ["k", "a", "t"], "bat": ["b", "a", "t"], "at": ["a", "t"]},
}


def default_utterances():
    return [
        {
            "utterance_id": "u1",
            "speaker_id": "S1",
            "group": "pathological",
            "stimulus": "word",
            "transcript": "cat",
            "phonemes": ["k", "a", "t"],
            "age": 61,
        },
        {
            "utterance_id": "u2",
            "speaker_id": "S1",
            "group": "pathological",
            "stimulus": "word",
            "transcript": "bat",
            "phonemes": ["b", "a", "t"],
            "age": 61,
        },
        {
            "utterance_id": "c1",
            "speaker_id": "C1",
            "group": "control",
            "stimulus": "word",
            "transcript": "cat",
            "phonemes": ["k", "a", "t"],
        },
    ]


def default_protocols():
    return [
        {
            "name": "toy-word-MC",
            "dataset": "toy",
            "condition": "MC",
            "stimulus": "word",
            "utterance_ids": ["u1", "c1"],
            "speaker_targets": {"S1": 80.0},
        },
        {
            "name": "toy-word-EX",
            "dataset": "toy",
            "condition": "EX",
            "stimulus": "word",
            "utterance_ids": ["u1", "u2", "c1"],
            "speaker_targets": {"S1": 80.0},
        },
    ]


def write_manifest(root, utterances=None, protocols=None, lexicon=None,
                   vocab_sem=None, vocab_phone=None, extra=None):
    """Write a complete manifest directory and return the manifest path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    docs = {
        "vocab_sem.json": vocab_sem or VOCAB_SEM,
        "vocab_phone.json": vocab_phone or VOCAB_PHONE,
        "lexicon.json": lexicon or LEXICON,
        "protocols.json": {
            "schema_version": 1,
            "protocols": protocols if protocols is not None else default_protocols(),
        },
    }
    for name, doc in docs.items():
        (root / name).write_text(json.dumps(doc, indent=1), encoding="utf-8")
    manifest = {
        "schema_version": 1,
        "vocab_sem": "vocab_sem.json",
        "vocab_phone": "vocab_phone.json",
        "lexicon": "lexicon.json",
        "protocols": "protocols.json",
        "utterances": utterances if utterances is not None else default_utterances(),
    }
    if extra:
        manifest.update(extra)
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return path


@pytest.fixture
def toy_manifest(tmp_path):
    return write_manifest(tmp_path / "toy")


@pytest.fixture(scope="session")
def benchmark_manifest(tmp_path_factory):
    """Full synthetic degradation corpus, generated once per test session."""
    from pathmetrics.toycorpus import generate_toy_corpus

    root = tmp_path_factory.mktemp("bench")
    return generate_toy_corpus(root / "corpus")

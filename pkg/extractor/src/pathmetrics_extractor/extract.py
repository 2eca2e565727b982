"""Batch wav2vec2 inference: posteriors, frame features, vocabularies.

Runs the semantic and phonetic CTC models plus a feature model over every
utterance in a manifest, writing softmaxed posterior tensors, layer-N hidden
state tensors, and vocabulary JSONs that exactly mirror each model's
tokenizer (the CTC blank is the tokenizer pad token). The updated manifest
with tensor paths is written to the output directory.

Inference is eval-mode, no-grad, CPU-deterministic: re-running produces
byte-identical tensors.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal as sps
from scipy.io import wavfile

from .formats import vocab_doc, write_json, write_pbt

TARGET_SR = 16000

# Published checkpoints matching the benchmark's setup; any local path or hub
# id can be substituted. The semantic recognizer is language specific.
DEFAULT_MODELS = {
    "semantic": {
        "en": "jonatasgrosman/wav2vec2-large-xlsr-53-english",
        "it": "jonatasgrosman/wav2vec2-large-xlsr-53-italian",
        "es": "jonatasgrosman/wav2vec2-large-xlsr-53-spanish",
        "nl": "jonatasgrosman/wav2vec2-large-xlsr-53-dutch",
    },
    "phonetic": "facebook/wav2vec2-xlsr-53-espeak-cv-ft",
    "features": "facebook/wav2vec2-large",
}


@dataclass
class ExtractionJob:
    manifest_path: Path
    out_dir: Path
    semantic_model: str
    phonetic_model: str
    feature_model: str = None
    feature_layer: int = 10
    device: str = "cpu"
    skipped: list = field(default_factory=list)


def load_audio_16k(path):
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError("only mono WAV is supported")
    if data.dtype == np.int16:
        samples = data.astype(np.float32) / 32768.0
    elif data.dtype == np.float32:
        samples = data
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    if len(samples) == 0:
        raise ValueError("empty audio")
    if rate != TARGET_SR:
        g = math.gcd(TARGET_SR, int(rate))
        samples = sps.resample_poly(samples.astype(np.float64), TARGET_SR // g, rate // g)
        samples = samples.astype(np.float32)
    return samples


def _load_ctc(model_id, device):
    import torch
    from transformers import Wav2Vec2ForCTC, Wav2Vec2Processor

    processor = Wav2Vec2Processor.from_pretrained(model_id)
    model = Wav2Vec2ForCTC.from_pretrained(model_id).to(device)
    model.eval()
    torch.set_grad_enabled(False)
    return processor, model


def _load_encoder(model_id, device):
    import torch
    from transformers import AutoFeatureExtractor, Wav2Vec2Model

    fe = AutoFeatureExtractor.from_pretrained(model_id)
    model = Wav2Vec2Model.from_pretrained(model_id).to(device)
    model.eval()
    torch.set_grad_enabled(False)
    return fe, model


def vocab_from_tokenizer(tokenizer, logits_width=None):
    """Vocabulary JSON mirroring the tokenizer, blank = pad token id.

    Tokens the tokenizer added beyond the model's CTC head (``logits_width``)
    are dropped so the vocabulary length always matches tensor width.
    """
    items = sorted(tokenizer.get_vocab().items(), key=lambda kv: kv[1])
    labels = [tok for tok, _ in items]
    if logits_width is not None:
        if len(labels) < logits_width:
            raise ValueError(
                f"tokenizer has {len(labels)} tokens but model emits {logits_width}"
            )
        labels = labels[:logits_width]
    blank = tokenizer.pad_token_id
    if not 0 <= blank < len(labels):
        raise ValueError(f"blank index {blank} outside vocabulary of {len(labels)}")
    delim = getattr(tokenizer, "word_delimiter_token", None)
    delim_index = labels.index(delim) if delim in labels else None
    sil_index = labels.index("SIL") if "SIL" in labels else None
    return vocab_doc(labels, blank, sil_index=sil_index, word_delim_index=delim_index)


def _posteriors_for(samples, processor, model):
    import torch

    inputs = processor(samples, sampling_rate=TARGET_SR, return_tensors="pt")
    logits = model(inputs.input_values.to(model.device)).logits[0]
    return torch.softmax(logits.double(), dim=-1).cpu().numpy().astype(np.float32)


def _features_for(samples, fe, model, layer):
    inputs = fe(samples, sampling_rate=TARGET_SR, return_tensors="pt")
    out = model(inputs.input_values.to(model.device), output_hidden_states=True)
    hidden = out.hidden_states
    if not 0 <= layer < len(hidden):
        raise ValueError(f"feature layer {layer} outside 0..{len(hidden) - 1}")
    return hidden[layer][0].cpu().numpy().astype(np.float32)


def read_manifest(job):
    """Manifest document; audio paths stay relative to the original file."""
    with open(job.manifest_path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("schema_version") != 1:
        raise ValueError(f"unsupported manifest schema_version {doc.get('schema_version')!r}")
    return doc


def write_manifest(job, doc):
    """Serialize the updated manifest under out_dir, re-rooting audio paths
    (and any referenced side files) so they stay resolvable from there."""
    import copy
    import os

    out = copy.deepcopy(doc)
    base = job.manifest_path.parent.resolve()
    dest = job.out_dir.resolve()
    for utt in out["utterances"]:
        rel = utt.get("audio_path")
        if rel is not None:
            utt["audio_path"] = os.path.relpath(base / rel, dest)
    for key in ("lexicon", "protocols", "lm"):
        if key in out and not (dest / out[key]).exists():
            out[key] = os.path.relpath(base / out[key], dest)
    for key in ("vocab_sem", "vocab_phone"):
        if key in out and not (dest / out[key]).exists():
            out[key] = os.path.relpath(base / out[key], dest)
    write_json(out, job.out_dir / "manifest.json")


def extract_posteriors(job, doc=None):
    """Write semantic/phonetic posterior tensors plus both vocab JSONs.

    Undecodable audio is skipped with a log line and listed in job.skipped;
    the run still succeeds. Tensor paths are recorded into the manifest copy
    under the output directory.
    """
    if doc is None:
        doc = read_manifest(job)
    base = job.manifest_path.parent
    job.out_dir.mkdir(parents=True, exist_ok=True)
    tensor_dir = job.out_dir / "tensors"
    tensor_dir.mkdir(exist_ok=True)

    sem_proc, sem_model = _load_ctc(job.semantic_model, job.device)
    phone_proc, phone_model = _load_ctc(job.phonetic_model, job.device)
    write_json(vocab_from_tokenizer(sem_proc.tokenizer, sem_model.config.vocab_size),
               job.out_dir / "vocab_sem.json")
    write_json(vocab_from_tokenizer(phone_proc.tokenizer, phone_model.config.vocab_size),
               job.out_dir / "vocab_phone.json")
    doc["vocab_sem"] = "vocab_sem.json"
    doc["vocab_phone"] = "vocab_phone.json"

    done = 0
    for utt in doc["utterances"]:
        rel = utt.get("audio_path")
        if rel is None:
            continue
        try:
            samples = load_audio_16k(base / rel)
        except (ValueError, OSError) as e:
            print(f"skip {utt['utterance_id']}: {e}")
            job.skipped.append(utt["utterance_id"])
            continue
        uid = utt["utterance_id"]
        sem = _posteriors_for(samples, sem_proc, sem_model)
        phone = _posteriors_for(samples, phone_proc, phone_model)
        write_pbt(sem, tensor_dir / f"{uid}_sem.pbt")
        write_pbt(phone, tensor_dir / f"{uid}_phone.pbt")
        utt["sem_logits_path"] = f"tensors/{uid}_sem.pbt"
        utt["phone_logits_path"] = f"tensors/{uid}_phone.pbt"
        done += 1

    write_manifest(job, doc)
    print(f"posteriors: {done} utterances, {len(job.skipped)} skipped")
    return doc


def extract_features(job, doc=None):
    """Write layer-N hidden-state tensors for every decodable utterance."""
    if job.feature_model is None:
        raise ValueError("no feature model configured")
    if doc is None:
        doc = read_manifest(job)
    base = job.manifest_path.parent
    tensor_dir = job.out_dir / "tensors"
    tensor_dir.mkdir(parents=True, exist_ok=True)

    fe, model = _load_encoder(job.feature_model, job.device)
    done = 0
    for utt in doc["utterances"]:
        rel = utt.get("audio_path")
        if rel is None:
            continue
        try:
            samples = load_audio_16k(base / rel)
        except (ValueError, OSError) as e:
            print(f"skip {utt['utterance_id']}: {e}")
            if utt["utterance_id"] not in job.skipped:
                job.skipped.append(utt["utterance_id"])
            continue
        uid = utt["utterance_id"]
        feats = _features_for(samples, fe, model, job.feature_layer)
        write_pbt(feats, tensor_dir / f"{uid}_feat.pbt")
        utt["features_path"] = f"tensors/{uid}_feat.pbt"
        done += 1

    write_manifest(job, doc)
    print(f"features: {done} utterances (layer {job.feature_layer})")
    return doc

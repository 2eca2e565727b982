"""Dataset manifests: utterance records, vocabularies, lexicon, protocols.

All metadata lives in small UTF-8 JSON documents (schema_version 1) so that
corpora can be authored and audited by hand:

* ``manifest.json``   top-level document, points at the files below and lists
  the utterance records.
* ``vocab_sem.json`` / ``vocab_phone.json``   token inventories of the
  semantic and phonetic recognizers.
* ``lexicon.json``    word -> phoneme-sequence pronunciation table.
* ``protocols.json``  named evaluation slices with per-speaker target scores.

Everything returned by :func:`load_manifest` is immutable after load and safe
to share across parallel scoring workers.
"""

import gzip
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

GROUPS = ("pathological", "control")
STIMULI = ("word", "sentence")
CONDITIONS = ("MC", "EX", "Full")

_APOSTROPHES = {"’": "'", "ʼ": "'"}


class ManifestError(Exception):
    """Manifest failed validation; ``findings`` lists every violation."""

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("; ".join(self.findings))


def content_key(text):
    """Normalize a transcript for content matching.

    Unicode NFC, lowercased, all characters outside letters/digits/apostrophe
    replaced by whitespace, whitespace collapsed to single spaces.
    """
    text = unicodedata.normalize("NFC", text).lower()
    for variant, plain in _APOSTROPHES.items():
        text = text.replace(variant, plain)
    kept = []
    for ch in text:
        cat = unicodedata.category(ch)
        if cat.startswith("L") or cat.startswith("N") or ch == "'":
            kept.append(ch)
        else:
            kept.append(" ")
    return re.sub(r"\s+", " ", "".join(kept)).strip()


@dataclass(frozen=True)
class VocabSpec:
    """Ordered token inventory of one recognizer output space."""

    labels: tuple
    blank_index: int
    sil_index: int = None
    word_delim_index: int = None

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("vocab labels are not unique")
        if not 0 <= self.blank_index < len(self.labels):
            raise ValueError(f"blank_index {self.blank_index} out of range")
        if self.sil_index is not None and self.sil_index == self.blank_index:
            raise ValueError("sil_index must differ from blank_index")

    def __len__(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    def delimiter_index(self):
        """Index of the word-delimiter token, or None.

        Uses the explicit ``word_delim_index`` when set, otherwise looks for
        the conventional "|" or " " labels.
        """
        if self.word_delim_index is not None:
            return self.word_delim_index
        for cand in ("|", " "):
            if cand in self.labels:
                return self.labels.index(cand)
        return None


@dataclass(frozen=True)
class Lexicon:
    """Pronunciation table mapping words to phoneme token sequences."""

    entries: dict
    inventory: frozenset = field(default=None)

    def __post_init__(self):
        if self.inventory is None:
            inv = frozenset(p for phones in self.entries.values() for p in phones)
            object.__setattr__(self, "inventory", inv)

    def __contains__(self, word):
        return word in self.entries

    def phonemes(self, word):
        return self.entries[word]


@dataclass(frozen=True)
class UtteranceRecord:
    """One recording plus everything known about it."""

    utterance_id: str
    speaker_id: str
    group: str
    stimulus: str
    transcript: str
    phonemes: tuple
    content_key: str
    audio_path: str = None
    sem_logits_path: str = None
    phone_logits_path: str = None
    features_path: str = None
    age: float = None


@dataclass(frozen=True)
class ProtocolSpec:
    """A named evaluation slice with clinical target scores per speaker."""

    name: str
    dataset: str
    condition: str
    stimulus: str
    utterance_ids: tuple
    speaker_targets: dict


@dataclass(frozen=True)
class Corpus:
    """Everything load_manifest validated, plus non-fatal warnings."""

    records: tuple
    protocols: tuple
    lexicon: Lexicon
    vocab_sem: VocabSpec
    vocab_phone: VocabSpec
    base_dir: Path
    lm_path: str = None
    warnings: tuple = ()

    def record(self, utterance_id):
        return self._by_id[utterance_id]

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.utterance_id: r for r in self.records})

    def resolve(self, relpath):
        return self.base_dir / relpath


def _read_json(path):
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("schema_version") != 1:
        raise ManifestError([f"{path}: unsupported schema_version {doc.get('schema_version')!r}"])
    return doc


def _load_vocab(path):
    doc = _read_json(path)
    return VocabSpec(
        labels=tuple(doc["labels"]),
        blank_index=int(doc["blank_index"]),
        sil_index=doc.get("sil_index"),
        word_delim_index=doc.get("word_delim_index"),
    )


def load_manifest(path):
    """Load and validate a manifest; returns a :class:`Corpus`.

    Every invariant violation is collected and reported together in a
    :class:`ManifestError`; missing tensor/audio files are warnings only
    (resolution is lazy, the scorer reports them per metric).
    """
    path = Path(path)
    base = path.parent
    doc = _read_json(path)
    findings = []
    warnings = []

    vocab_sem = _load_vocab(base / doc["vocab_sem"])
    vocab_phone = _load_vocab(base / doc["vocab_phone"])

    lex_doc = _read_json(base / doc["lexicon"])
    phone_labels = set(vocab_phone.labels)
    entries = {}
    for word, phones in sorted(lex_doc["entries"].items()):
        if not phones:
            findings.append(f"lexicon: empty pronunciation for {word!r}")
            continue
        for p in phones:
            if p not in phone_labels:
                findings.append(f"lexicon: phoneme {p!r} of {word!r} not in phonetic vocab")
        entries[word] = tuple(phones)
    lexicon = Lexicon(entries=entries)

    records = []
    seen_ids = set()
    for raw in doc["utterances"]:
        uid = raw["utterance_id"]
        if uid in seen_ids:
            findings.append(f"duplicate utterance_id {uid!r}")
            continue
        seen_ids.add(uid)
        if raw["group"] not in GROUPS:
            findings.append(f"{uid}: unknown group {raw['group']!r}")
        if raw["stimulus"] not in STIMULI:
            findings.append(f"{uid}: unknown stimulus {raw['stimulus']!r}")
        transcript = raw.get("transcript", "")
        phones = tuple(raw.get("phonemes", ()))
        if transcript and not phones:
            findings.append(f"{uid}: transcript present but phonemes empty")
        for p in phones:
            if p not in phone_labels:
                findings.append(f"{uid}: phoneme {p!r} not in phonetic vocab")
        rec = UtteranceRecord(
            utterance_id=uid,
            speaker_id=raw["speaker_id"],
            group=raw["group"],
            stimulus=raw["stimulus"],
            transcript=transcript,
            phonemes=phones,
            content_key=content_key(transcript),
            audio_path=raw.get("audio_path"),
            sem_logits_path=raw.get("sem_logits_path"),
            phone_logits_path=raw.get("phone_logits_path"),
            features_path=raw.get("features_path"),
            age=raw.get("age"),
        )
        records.append(rec)
        for attr in ("audio_path", "sem_logits_path", "phone_logits_path", "features_path"):
            rel = getattr(rec, attr)
            if rel is not None and not (base / rel).exists():
                warnings.append(f"{uid}: {attr} {rel!r} not found (resolved lazily)")

    by_id = {r.utterance_id: r for r in records}

    protocols = []
    proto_doc = _read_json(base / doc["protocols"])
    for raw in proto_doc["protocols"]:
        name = raw["name"]
        if raw["condition"] not in CONDITIONS:
            findings.append(f"protocol {name}: unknown condition {raw['condition']!r}")
        spec = ProtocolSpec(
            name=name,
            dataset=raw["dataset"],
            condition=raw["condition"],
            stimulus=raw["stimulus"],
            utterance_ids=tuple(raw["utterance_ids"]),
            speaker_targets={k: float(v) for k, v in raw["speaker_targets"].items()},
        )
        protocols.append(spec)
        for uid in spec.utterance_ids:
            rec = by_id.get(uid)
            if rec is None:
                findings.append(f"protocol {name}: unknown utterance_id {uid!r}")
                continue
            if rec.group == "pathological" and rec.speaker_id not in spec.speaker_targets:
                findings.append(f"protocol {name}: no target score for speaker {rec.speaker_id!r} ({uid})")

    # MC subset-of EX subset-of Full, per dataset/stimulus pair.
    tiers = {}
    for p in protocols:
        tiers.setdefault((p.dataset, p.stimulus), {}).setdefault(p.condition, set()).update(p.utterance_ids)
    for (dataset, stimulus), conds in tiers.items():
        chain = [c for c in CONDITIONS if c in conds]
        for lo, hi in zip(chain, chain[1:]):
            missing = conds[lo] - conds[hi]
            for uid in sorted(missing):
                findings.append(
                    f"{dataset}/{stimulus}: utterance {uid!r} in {lo} but not in {hi}"
                )

    if findings:
        raise ManifestError(findings)

    return Corpus(
        records=tuple(records),
        protocols=tuple(protocols),
        lexicon=lexicon,
        vocab_sem=vocab_sem,
        vocab_phone=vocab_phone,
        base_dir=base,
        lm_path=doc.get("lm"),
        warnings=tuple(warnings),
    )


def match_parallel(target, pool):
    """All control recordings sharing the target's content key.

    The pool must contain control-group records only. Result is ordered by
    (speaker_id, utterance_id); an empty result is valid and left to the
    caller to handle.
    """
    for rec in pool:
        if rec.group != "control":
            raise ValueError(f"reference pool contains non-control record {rec.utterance_id!r}")
    matches = [rec for rec in pool if rec.content_key == target.content_key]
    return sorted(matches, key=lambda r: (r.speaker_id, r.utterance_id))

"""Pronunciation lexicon builder.

Collects every transcript word (plus the language model's unigram vocabulary
when the manifest names an ARPA file, so decoding hypotheses are covered),
runs a grapheme-to-phoneme backend, and maps the resulting symbols onto the
phonetic model's vocabulary. Words containing unmappable symbols are flagged
in an audit file, never silently dropped.

Backends: "espeak" (the phonemizer package with the espeak-ng engine) or
"table:<path>" for an explicit word -> phonemes JSON, which also serves
environments without espeak installed.
"""

import gzip
import json
import unicodedata
from pathlib import Path

from .formats import lexicon_doc, write_json

LANGUAGES = {"en": "en-us", "nl": "nl", "it": "it", "es": "es"}

# Symbols stripped before vocabulary matching: stress, length, syllabicity
# and similar diacritics that the CTC phone set does not carry.
STRIP_MARKS = set("ˈˌːˑ̥̩̯̆̃̊͡ʰʲʷˠˤ˞")


def arpa_unigrams(path):
    """Token column of the \\1-grams section; specials excluded."""
    opener = gzip.open if str(path).endswith(".gz") else open
    words = []
    section = None
    with opener(path, "rt", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line.startswith("\\") and line.endswith("-grams:"):
                section = int(line[1])
                continue
            if line in ("\\end\\", "\\data\\") or not line:
                if line == "\\end\\":
                    break
                continue
            if section == 1:
                fields = line.split()
                if len(fields) >= 2 and fields[1] not in ("<s>", "</s>", "<unk>"):
                    words.append(fields[1])
            elif section is not None and section > 1:
                break
    return words


def _espeak_backend(language):
    try:
        from phonemizer.backend import EspeakBackend
    except ImportError as e:
        raise RuntimeError(
            "espeak G2P needs the 'phonemizer' package (pip install "
            "pathmetrics-extractor[espeak]) and the espeak-ng engine; "
            "use --g2p table:<path> otherwise"
        ) from e
    backend = EspeakBackend(LANGUAGES.get(language, language), with_stress=False)

    def pronounce(word):
        ipa = backend.phonemize([word], strip=True)[0].strip()
        return [tok for tok in ipa.replace(" ", "") if not unicodedata.combining(tok)]

    return pronounce


def _table_backend(path):
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    table = doc.get("words", doc)

    def pronounce(word):
        if word not in table:
            raise KeyError(word)
        return list(table[word])

    return pronounce


def map_symbols(tokens, vocab_labels, phone_map=None):
    """Project raw G2P symbols onto the phonetic vocabulary.

    Order of attempts per symbol: explicit mapping table, identity,
    diacritic-stripped identity. Returns (mapped tokens, unmappable symbols).
    """
    labels = set(vocab_labels)
    mapped = []
    bad = []
    for tok in tokens:
        if phone_map and tok in phone_map:
            mapped.append(phone_map[tok])
            continue
        if tok in labels:
            mapped.append(tok)
            continue
        stripped = "".join(ch for ch in unicodedata.normalize("NFD", tok)
                           if not unicodedata.combining(ch) and ch not in STRIP_MARKS)
        if stripped and stripped in labels:
            mapped.append(stripped)
        else:
            bad.append(tok)
    return mapped, bad


def build_lexicon(manifest_path, out_dir, language="en", g2p="espeak", phone_map_path=None):
    """Write lexicon.json plus a g2p_audit.json describing every decision."""
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(manifest_path, "r", encoding="utf-8") as f:
        doc = json.load(f)

    base = manifest_path.parent
    vocab_path = out_dir / doc["vocab_phone"]
    if not vocab_path.exists():
        vocab_path = base / doc["vocab_phone"]
    with open(vocab_path, "r", encoding="utf-8") as f:
        vocab_labels = json.load(f)["labels"]

    words = set()
    for utt in doc["utterances"]:
        for w in utt.get("transcript", "").split():
            words.add(w.lower())
    lm_rel = doc.get("lm")
    if lm_rel:
        lm_path = out_dir / lm_rel if (out_dir / lm_rel).exists() else base / lm_rel
        if lm_path.exists():
            words.update(w.lower() for w in arpa_unigrams(lm_path))

    phone_map = None
    if phone_map_path:
        with open(phone_map_path, "r", encoding="utf-8") as f:
            phone_map = json.load(f)

    if g2p.startswith("table:"):
        pronounce = _table_backend(g2p.split(":", 1)[1])
    elif g2p == "espeak":
        pronounce = _espeak_backend(language)
    else:
        raise ValueError(f"unknown G2P backend {g2p!r}")

    entries = {}
    audit = {}
    for word in sorted(words):
        try:
            raw = pronounce(word)
        except KeyError:
            audit[word] = {"status": "no_pronunciation"}
            continue
        mapped, bad = map_symbols(raw, vocab_labels, phone_map)
        if bad or not mapped:
            audit[word] = {"status": "unmappable", "symbols": bad, "raw": raw}
            continue
        entries[word] = mapped
        audit[word] = {"status": "ok", "phones": mapped}

    write_json(lexicon_doc(entries), out_dir / "lexicon.json")
    write_json({"schema_version": 1, "language": language, "backend": g2p,
                "words": audit}, out_dir / "g2p_audit.json")
    flagged = sorted(w for w, a in audit.items() if a["status"] != "ok")
    print(f"lexicon: {len(entries)} entries, {len(flagged)} flagged "
          f"({', '.join(flagged[:5])}{'...' if len(flagged) > 5 else ''})")
    return entries, audit

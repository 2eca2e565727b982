import pytest

from pathmetrics.corpus import (
    Lexicon,
    ManifestError,
    UtteranceRecord,
    VocabSpec,
    content_key,
    load_manifest,
    match_parallel,
)
from conftest import default_protocols, default_utterances, write_manifest


class TestContentKey:
    def test_plain(self):
        assert content_key("Call my wife.") == "call my wife"

    def test_punctuation_and_whitespace(self):
        assert content_key("  Don’t stop,\tnow!! ") == "don't stop now"

    def test_digits_kept(self):
        assert content_key("Room 101") == "room 101"

    def test_empty(self):
        assert content_key("...") == ""


class TestLoadManifest:
    def test_minimal_clean(self, tmp_path):
        path = write_manifest(
            tmp_path,
            utterances=default_utterances()[:1],
            protocols=[{
                "name": "toy-word-MC", "dataset": "toy", "condition": "MC",
                "stimulus": "word", "utterance_ids": ["u1"],
                "speaker_targets": {"S1": 80.0},
            }],
        )
        corpus = load_manifest(path)
        assert len(corpus.records) == 1
        rec = corpus.record("u1")
        assert rec.content_key == "cat"
        assert corpus.vocab_phone.sil_index == 1

    def test_duplicate_utterance_id(self, tmp_path):
        utts = default_utterances()
        utts.append(dict(utts[0]))
        path = write_manifest(tmp_path, utterances=utts)
        with pytest.raises(ManifestError, match="duplicate utterance_id 'u1'"):
            load_manifest(path)

    def test_mc_not_subset_of_ex(self, tmp_path):
        protos = default_protocols()
        protos[1]["utterance_ids"] = ["u2", "c1"]  # drop u1 from EX
        path = write_manifest(tmp_path, protocols=protos)
        with pytest.raises(ManifestError, match="'u1' in MC but not in EX"):
            load_manifest(path)

    def test_lexicon_phoneme_outside_vocab(self, tmp_path):
        lex = {"schema_version": 1, "entries": {"cat": ["k", "a", "zz"]}}
        path = write_manifest(tmp_path, lexicon=lex)
        with pytest.raises(ManifestError, match="'zz'"):
            load_manifest(path)

    def test_record_phoneme_outside_vocab(self, tmp_path):
        utts = default_utterances()
        utts[0]["phonemes"] = ["k", "zz", "t"]
        path = write_manifest(tmp_path, utterances=utts)
        with pytest.raises(ManifestError, match="u1: phoneme 'zz'"):
            load_manifest(path)

    def test_missing_speaker_target(self, tmp_path):
        protos = default_protocols()
        protos[0]["speaker_targets"] = {}
        path = write_manifest(tmp_path, protocols=protos)
        with pytest.raises(ManifestError, match="no target score for speaker 'S1'"):
            load_manifest(path)

    def test_empty_pronunciation(self, tmp_path):
        lex = {"schema_version": 1, "entries": {"cat": []}}
        path = write_manifest(tmp_path, lexicon=lex)
        with pytest.raises(ManifestError, match="empty pronunciation"):
            load_manifest(path)

    def test_phonemes_required_with_transcript(self, tmp_path):
        utts = default_utterances()
        utts[0]["phonemes"] = []
        path = write_manifest(tmp_path, utterances=utts)
        with pytest.raises(ManifestError, match="phonemes empty"):
            load_manifest(path)

    def test_unknown_protocol_utterance(self, tmp_path):
        protos = default_protocols()
        protos[0]["utterance_ids"] = ["u1", "ghost", "c1"]
        protos[1]["utterance_ids"] = ["u1", "u2", "ghost", "c1"]
        path = write_manifest(tmp_path, protocols=protos)
        with pytest.raises(ManifestError, match="unknown utterance_id 'ghost'"):
            load_manifest(path)

    def test_missing_tensor_is_warning_only(self, tmp_path):
        utts = default_utterances()
        utts[0]["phone_logits_path"] = "tensors/u1_phone.pbt"
        path = write_manifest(tmp_path, utterances=utts)
        corpus = load_manifest(path)
        assert any("u1" in w and "phone_logits_path" in w for w in corpus.warnings)

    def test_all_findings_reported_together(self, tmp_path):
        utts = default_utterances()
        utts[0]["phonemes"] = ["zz"]
        utts[1]["group"] = "weird"
        path = write_manifest(tmp_path, utterances=utts)
        with pytest.raises(ManifestError) as exc:
            load_manifest(path)
        assert len(exc.value.findings) >= 2


class TestVocabSpec:
    def test_duplicate_labels(self):
        with pytest.raises(ValueError, match="unique"):
            VocabSpec(labels=("a", "a"), blank_index=0)

    def test_blank_out_of_range(self):
        with pytest.raises(ValueError, match="blank_index"):
            VocabSpec(labels=("a", "b"), blank_index=5)

    def test_sil_equals_blank(self):
        with pytest.raises(ValueError, match="sil_index"):
            VocabSpec(labels=("a", "b"), blank_index=0, sil_index=0)

    def test_delimiter_detection(self):
        v = VocabSpec(labels=("<pad>", "|", "a"), blank_index=0)
        assert v.delimiter_index() == 1
        v2 = VocabSpec(labels=("<pad>", "a"), blank_index=0)
        assert v2.delimiter_index() is None


def _rec(uid, spk, key, group="control"):
    return UtteranceRecord(
        utterance_id=uid, speaker_id=spk, group=group, stimulus="word",
        transcript=key, phonemes=("a",), content_key=key,
    )


class TestMatchParallel:
    def test_all_matching(self):
        target = _rec("t", "P1", "call my wife", group="pathological")
        pool = [_rec(f"c{i}", f"C{i}", "call my wife") for i in range(3)]
        assert match_parallel(target, pool) == sorted(pool, key=lambda r: r.speaker_id)

    def test_no_match(self):
        target = _rec("t", "P1", "nothing here", group="pathological")
        pool = [_rec("c0", "C0", "call my wife")]
        assert match_parallel(target, pool) == []

    def test_mixed_keys_equals_filter_oracle(self):
        target = _rec("t", "P1", "key a", group="pathological")
        pool = [
            _rec("c3", "C3", "key a"),
            _rec("c1", "C1", "key b"),
            _rec("c2", "C2", "key a"),
            _rec("c0", "C0", "key c"),
        ]
        oracle = sorted(
            (r for r in pool if r.content_key == target.content_key),
            key=lambda r: (r.speaker_id, r.utterance_id),
        )
        assert match_parallel(target, pool) == oracle

    def test_rejects_noncontrol_pool(self):
        target = _rec("t", "P1", "key a", group="pathological")
        pool = [_rec("x", "P2", "key a", group="pathological")]
        with pytest.raises(ValueError, match="non-control"):
            match_parallel(target, pool)

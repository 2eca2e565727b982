import gzip
import math
from collections import Counter

import pytest

from pathmetrics.lm import LN10, OOV_FLOOR_LN, ArpaParseError, parse_arpa

TOY_ARPA = """\
\\data\\
ngram 1=5
ngram 2=4

\\1-grams:
-99\t<s>\t-0.30103
-0.69897\t</s>
-0.39794\ta\t-0.30103
-0.52288\tb\t-0.22185
-0.69897\tc

\\2-grams:
-0.17609\t<s> a
-0.30103\ta b
-0.39794\tb </s>
-0.52288\tb c

\\end\\
"""


@pytest.fixture
def toy_model(tmp_path):
    path = tmp_path / "toy.arpa"
    path.write_text(TOY_ARPA, encoding="utf-8")
    return parse_arpa(path)


def test_header_echo(tmp_path):
    text = (
        "\\data\\\nngram 1=3\nngram 2=2\n\n"
        "\\1-grams:\n-0.5\t</s>\n-0.30103\thello\t-0.1\n-0.60206\tworld\t-0.2\n\n"
        "\\2-grams:\n-0.15\thello world\n-0.4\tworld </s>\n\n\\end\\\n"
    )
    path = tmp_path / "t.arpa"
    path.write_text(text)
    model = parse_arpa(path)
    assert model.order == 2
    assert len(model.tables[1]) == 3
    assert len(model.tables[2]) == 2
    # -0.30103 log10 is probability one half.
    assert math.exp(model.score_word([], "hello")) == pytest.approx(0.5, abs=1e-5)


def test_count_mismatch(tmp_path):
    text = "\\data\\\nngram 1=2\n\n\\1-grams:\n-0.5\t</s>\n\n\\end\\\n"
    path = tmp_path / "t.arpa"
    path.write_text(text)
    with pytest.raises(ArpaParseError, match="declares 2 1-grams, parsed 1"):
        parse_arpa(path)


def test_malformed_line_reports_lineno(tmp_path):
    text = "\\data\\\nngram 1=1\n\n\\1-grams:\n-0.5\t</s>\textra\tjunk\n\n\\end\\\n"
    path = tmp_path / "t.arpa"
    path.write_text(text)
    with pytest.raises(ArpaParseError, match=":5:"):
        parse_arpa(path)


def test_context_must_exist(tmp_path):
    text = (
        "\\data\\\nngram 1=1\nngram 2=1\n\n"
        "\\1-grams:\n-0.5\t</s>\n\n"
        "\\2-grams:\n-0.15\tghost </s>\n\n\\end\\\n"
    )
    path = tmp_path / "t.arpa"
    path.write_text(text)
    with pytest.raises(ArpaParseError, match="no 1-gram context"):
        parse_arpa(path)


def test_positive_unigram_rejected(tmp_path):
    text = "\\data\\\nngram 1=1\n\n\\1-grams:\n0.5\t</s>\n\n\\end\\\n"
    path = tmp_path / "t.arpa"
    path.write_text(text)
    with pytest.raises(ArpaParseError, match="positive log10"):
        parse_arpa(path)


def test_gzip_variant(tmp_path, toy_model):
    path = tmp_path / "toy.arpa.gz"
    with gzip.open(path, "wt", encoding="utf-8") as f:
        f.write(TOY_ARPA)
    model = parse_arpa(path)
    assert model.tables == toy_model.tables


class TestScoreWord:
    def test_existing_bigram_is_table_echo(self, toy_model):
        assert toy_model.score_word(["a"], "b") == pytest.approx(-0.30103 * LN10)

    def test_backoff_chain(self, toy_model):
        # (a, c) missing: bow(a) = -0.30103 plus unigram c = -0.69897.
        expected = (-0.30103 + -0.69897) * LN10
        assert toy_model.score_word(["a"], "c") == pytest.approx(expected)

    def test_context_without_entry_backs_off_free(self, toy_model):
        # (c, b) missing and c has no backoff weight: plain unigram b.
        assert toy_model.score_word(["c"], "b") == pytest.approx(-0.52288 * LN10)

    def test_oov_without_unk_hits_floor(self, toy_model):
        assert not toy_model.has_unk
        assert toy_model.score_word(["a"], "zzz") == OOV_FLOOR_LN

    def test_oov_with_unk(self, tmp_path):
        text = (
            "\\data\\\nngram 1=2\n\n"
            "\\1-grams:\n-0.5\t</s>\n-1.25\t<unk>\n\n\\end\\\n"
        )
        path = tmp_path / "t.arpa"
        path.write_text(text)
        model = parse_arpa(path)
        assert model.has_unk
        assert model.score_word([], "zzz") == pytest.approx(-1.25 * LN10)

    def test_long_context_truncated(self, toy_model):
        full = toy_model.score_word(["x", "y", "a"], "b")
        assert full == pytest.approx(toy_model.score_word(["a"], "b"))


class TestScoreSequence:
    def test_empty_sequence(self, toy_model):
        # </s> given <s>: no such bigram, bow(<s>) -0.30103 + uni(</s>) -0.69897.
        assert toy_model.score_sequence([]) == pytest.approx(-1.0 * LN10)

    def test_hand_computed_chain(self, toy_model):
        # <s>a = -0.17609, ab = -0.30103, b</s> = -0.39794.
        expected = (-0.17609 - 0.30103 - 0.39794) * LN10
        assert toy_model.score_sequence(["a", "b"]) == pytest.approx(expected)

    def test_definitional_sum(self, toy_model):
        words = ["a", "b", "c", "b"]
        total = 0.0
        history = ["<s>"]
        for w in words + ["</s>"]:
            total += toy_model.score_word(history, w)
            history.append(w)
        assert toy_model.score_sequence(words) == pytest.approx(total)


def build_bigram_arpa(sentences, discount=0.5):
    """Emit a self-consistent backoff bigram model from a tiny corpus.

    Absolute discounting with mass redistributed through the backoff weight,
    so P(.|ctx) sums to one exactly for every observed context.
    """
    uni = Counter()
    bi = Counter()
    for sent in sentences:
        toks = ["<s>"] + sent.split() + ["</s>"]
        for w in toks[1:]:
            uni[w] += 1
        for a, b in zip(toks, toks[1:]):
            bi[(a, b)] += 1
    total = sum(uni.values())
    p_uni = {w: c / total for w, c in uni.items()}

    ctx_counts = Counter()
    for (a, _), c in bi.items():
        ctx_counts[a] += c
    bows = {}
    for ctx, ctot in ctx_counts.items():
        seen = {w for (a, w) in bi if a == ctx}
        alpha = discount * len(seen) / ctot
        unseen_mass = sum(p for w, p in p_uni.items() if w not in seen)
        bows[ctx] = alpha / unseen_mass

    lines = ["\\data\\", f"ngram 1={len(p_uni) + 1}", f"ngram 2={len(bi)}", "", "\\1-grams:"]
    lines.append(f"-99\t<s>\t{math.log10(bows['<s>']):.6f}")
    for w in sorted(p_uni):
        bow = f"\t{math.log10(bows[w]):.6f}" if w in bows else ""
        lines.append(f"{math.log10(p_uni[w]):.6f}\t{w}{bow}")
    lines += ["", "\\2-grams:"]
    for (a, b), c in sorted(bi.items()):
        p = (c - discount) / ctx_counts[a]
        lines.append(f"{math.log10(p):.6f}\t{a} {b}")
    lines += ["", "\\end\\", ""]
    return "\n".join(lines), sorted(p_uni)


def test_backoff_normalization_property(tmp_path):
    text, vocab = build_bigram_arpa([
        "the cat sat",
        "the cat ran",
        "a dog sat",
        "the dog sat here",
        "a cat ran here",
    ])
    path = tmp_path / "norm.arpa"
    path.write_text(text)
    model = parse_arpa(path)
    contexts = [("<s>",)] + [(w,) for w in vocab if w != "</s>"]
    for ctx in contexts:
        mass = sum(math.exp(model.score_word(ctx, w)) for w in vocab)
        assert 0.99 <= mass <= 1.01, f"context {ctx}: mass {mass}"

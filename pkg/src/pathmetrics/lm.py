"""ARPA-format n-gram language model with Katz backoff scoring.

Scores come back in natural-log units (ARPA stores log10) so they combine
directly with acoustic log-probabilities during decoding. Models are
immutable after parsing and safe to score from multiple workers.
"""

import gzip
import math
import re

LN10 = math.log(10.0)
BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

# Words absent from a model without <unk> get this natural-log score; keeps
# beam hypotheses finite and comparable.
OOV_FLOOR_LN = -20.0

_NGRAM_HEADER = re.compile(r"ngram\s+(\d+)\s*=\s*(\d+)")
_SECTION = re.compile(r"\\(\d+)-grams:")


class ArpaParseError(Exception):
    pass


class NGramModel:
    """Backoff n-gram tables keyed by token tuples."""

    def __init__(self, order, tables, has_unk):
        self.order = order
        # tables[n] maps an n-tuple of tokens -> (log10 prob, log10 backoff)
        self.tables = tables
        self.has_unk = has_unk
        self.vocabulary = frozenset(k[0] for k in tables.get(1, ()))

    def lookup(self, ngram):
        return self.tables.get(len(ngram), {}).get(ngram)

    def score_word(self, context, word):
        """Natural-log P(word | context) with standard Katz backoff.

        Context longer than order-1 is truncated on the left; unknown words
        take the <unk> path, or the documented floor when the model has none.
        """
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        if word not in self.vocabulary:
            if not self.has_unk:
                return OOV_FLOOR_LN
            word = UNK
        return self._score(context, word) * LN10

    def _score(self, context, word):
        entry = self.lookup(context + (word,))
        if entry is not None:
            return entry[0]
        if not context:
            # Unigram miss can only happen for <unk>-less models; callers
            # were already routed to the floor above.
            return OOV_FLOOR_LN / LN10
        ctx_entry = self.lookup(context)
        backoff = ctx_entry[1] if ctx_entry is not None else 0.0
        return backoff + self._score(context[1:], word)

    def score_sequence(self, words):
        """Natural-log probability of ``words`` framed by <s> ... </s>."""
        history = [BOS]
        total = 0.0
        for w in list(words) + [EOS]:
            total += self.score_word(history, w)
            history.append(w)
        return total


def parse_arpa(path):
    """Parse a (possibly gzipped) ARPA text file into an :class:`NGramModel`.

    Entry counts must match the \\data\\ header; malformed lines are reported
    with their line number. A missing <unk> is tolerated and flagged on the
    model.
    """
    opener = gzip.open if str(path).endswith(".gz") else open
    declared = {}
    tables = {}
    current = None
    with opener(path, "rt", encoding="utf-8") as f:
        in_data = False
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if line == "\\data\\":
                in_data = True
                continue
            if line == "\\end\\":
                current = None
                continue
            m = _SECTION.fullmatch(line)
            if m:
                in_data = False
                current = int(m.group(1))
                tables[current] = {}
                continue
            if in_data:
                m = _NGRAM_HEADER.fullmatch(line)
                if m:
                    declared[int(m.group(1))] = int(m.group(2))
                    continue
                raise ArpaParseError(f"{path}:{lineno}: unrecognized data-section line {line!r}")
            if current is None:
                raise ArpaParseError(f"{path}:{lineno}: entry outside any n-gram section")
            fields = line.split()
            if len(fields) < current + 1 or len(fields) > current + 2:
                raise ArpaParseError(f"{path}:{lineno}: malformed {current}-gram line {line!r}")
            try:
                prob = float(fields[0])
                backoff = float(fields[current + 1]) if len(fields) == current + 2 else 0.0
            except ValueError:
                raise ArpaParseError(f"{path}:{lineno}: non-numeric probability in {line!r}")
            tokens = tuple(fields[1:current + 1])
            tables[current][tokens] = (prob, backoff)

    if not declared:
        raise ArpaParseError(f"{path}: missing \\data\\ header")
    for n, count in declared.items():
        have = len(tables.get(n, {}))
        if have != count:
            raise ArpaParseError(f"{path}: header declares {count} {n}-grams, parsed {have}")
    for n in tables:
        if n not in declared:
            raise ArpaParseError(f"{path}: {n}-gram section not declared in header")

    order = max(declared)
    for n in range(2, order + 1):
        for ngram in tables.get(n, ()):
            if ngram[:-1] not in tables.get(n - 1, {}):
                raise ArpaParseError(
                    f"{path}: {n}-gram {' '.join(ngram)!r} has no {n - 1}-gram context entry"
                )
    for (token,), (prob, _) in tables.get(1, {}).items():
        if prob > 0:
            raise ArpaParseError(f"{path}: unigram {token!r} has positive log10 prob {prob}")

    has_unk = (UNK,) in tables.get(1, {})
    return NGramModel(order=order, tables=tables, has_unk=has_unk)

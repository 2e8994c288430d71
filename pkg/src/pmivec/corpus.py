"""Corpus ingestion: token cleaning, vocabulary building, windowed pair counting.

Counting is a pure fold over the token stream, so shards counted separately
(split at document boundaries) can be merged with the ``merge_*`` helpers and
always reproduce the single-pass result.
"""

from __future__ import annotations

import re
import string
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .ioutil import ParseError, atomic_write

#: Emitted between documents; counting windows never cross it.
DOC_BREAK = None


@dataclass(frozen=True)
class CleaningRules:
    """How raw text becomes tokens.

    Each whitespace-separated span is lowercased (if enabled), characters in
    ``strip_chars`` are removed, and the result is kept only when it is
    nonempty and made solely of ``alphabet`` characters.  An input line equal
    to ``boundary_line`` marks a document boundary (set to None to disable).
    """

    lowercase: bool = True
    strip_chars: str = string.punctuation
    alphabet: str = string.ascii_lowercase
    boundary_line: str | None = ""


def tokenize(
    source: str | Iterable[str], rules: CleaningRules = CleaningRules()
) -> Iterator[str | None]:
    """Yield cleaned tokens from a string or an iterable of lines.

    Streams line by line in bounded memory.  Content never raises: spans that
    fail the cleaning rules are dropped.  Document boundaries are yielded as
    :data:`DOC_BREAK`.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    strip_table = str.maketrans("", "", rules.strip_chars)
    keep = re.compile("[%s]+" % re.escape(rules.alphabet)).fullmatch
    for line in lines:
        line = line.rstrip("\n")
        if rules.boundary_line is not None and line == rules.boundary_line:
            yield DOC_BREAK
            continue
        for raw in line.split():
            if rules.lowercase:
                raw = raw.lower()
            raw = raw.translate(strip_table)
            if raw and keep(raw):
                yield raw


@dataclass
class Vocabulary:
    """Words ordered by descending count (ties lexicographic) with counts.

    ``total_tokens`` is the corpus token count before any frequency
    filtering.  Word positions define the index space of every matrix row
    and column downstream.
    """

    words: list[str]
    counts: list[int]
    total_tokens: int
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.words) != len(self.counts):
            raise ValueError("words and counts differ in length")
        if self.total_tokens < 0:
            raise ValueError("total_tokens must be nonnegative")
        prev = None
        for c in self.counts:
            if c < 1:
                raise ValueError(f"count {c} is not strictly positive")
            if prev is not None and c > prev:
                raise ValueError("counts are not sorted non-increasing")
            prev = c
        self.index = {}
        for k, w in enumerate(self.words):
            if w in self.index:
                raise ValueError(f"duplicate word {w!r}")
            self.index[w] = k

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index


def tally_unigrams(tokens: Iterable[str | None]) -> tuple[Counter, int]:
    """Count occurrences per token; returns (counts, total token count)."""
    counts: Counter = Counter()
    total = 0
    for tok in tokens:
        if tok is DOC_BREAK:
            continue
        counts[tok] += 1
        total += 1
    return counts, total


def merge_unigram_tallies(tallies: Iterable[tuple[Counter, int]]) -> tuple[Counter, int]:
    """Associative, order-independent merge of sharded unigram tallies."""
    merged: Counter = Counter()
    total = 0
    for counts, n in tallies:
        merged.update(counts)
        total += n
    return merged, total


def build_vocabulary(counts: Counter, total_tokens: int, min_count: int = 1) -> Vocabulary:
    """Apply the frequency threshold and fix the word order."""
    if min_count < 1:
        raise ValueError("min_count must be at least 1")
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary([w for w, _ in kept], [c for _, c in kept], total_tokens)


def count_unigrams(tokens: Iterable[str | None], min_count: int = 1) -> Vocabulary:
    """Tally a token stream and build the frequency-thresholded vocabulary."""
    counts, total = tally_unigrams(tokens)
    return build_vocabulary(counts, total, min_count)


@dataclass
class CooccurrenceTable:
    """Sparse ordered-pair counts within a token window.

    ``rows`` maps a leading-word index to a map of context-word index to
    count.  The leading word is the earlier of the pair; each in-window
    ordered pair is counted once, with no distance weighting.
    """

    window: int
    vocab: Vocabulary
    rows: dict[int, dict[int, int]]
    total_pairs: int = field(init=False, compare=False)

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        n = len(self.vocab)
        total = 0
        for i, row in self.rows.items():
            if not 0 <= i < n:
                raise ValueError(f"leading index {i} out of range")
            for j, c in row.items():
                if not 0 <= j < n:
                    raise ValueError(f"context index {j} out of range")
                if c < 1:
                    raise ValueError(f"count {c} is not strictly positive")
                total += c
        # keep row order aligned with vocabulary order
        self.rows = {i: self.rows[i] for i in sorted(self.rows)}
        self.total_pairs = total

    def pair_count(self, i: int, j: int) -> int:
        return self.rows.get(i, {}).get(j, 0)


def count_bigrams(
    tokens: Iterable[str | None], vocab: Vocabulary, window: int
) -> CooccurrenceTable:
    """Count ordered in-vocabulary pairs within ``window`` raw positions.

    Offsets are measured over the raw stream, so out-of-vocabulary tokens
    still occupy positions.  A DOC_BREAK clears the window.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty")
    index = vocab.index
    rows: dict[int, dict[int, int]] = {}
    recent: deque = deque(maxlen=window)
    for tok in tokens:
        if tok is DOC_BREAK:
            recent.clear()
            continue
        j = index.get(tok)
        if j is not None:
            for i in recent:
                if i is not None:
                    row = rows.setdefault(i, {})
                    row[j] = row.get(j, 0) + 1
        recent.append(j)
    return CooccurrenceTable(window, vocab, rows)


def merge_cooccurrence(tables: Iterable[CooccurrenceTable]) -> CooccurrenceTable:
    """Associative merge of tables counted over shards of one corpus.

    All tables must share the window and vocabulary.  Shard boundaries must
    coincide with document boundaries for the merge to equal a single pass.
    """
    tables = list(tables)
    if not tables:
        raise ValueError("nothing to merge")
    window, vocab = tables[0].window, tables[0].vocab
    rows: dict[int, dict[int, int]] = {}
    for t in tables:
        if t.window != window or t.vocab is not vocab and t.vocab != vocab:
            raise ValueError("tables disagree on window or vocabulary")
        for i, row in t.rows.items():
            out = rows.setdefault(i, {})
            for j, c in row.items():
                out[j] = out.get(j, 0) + c
    return CooccurrenceTable(window, vocab, rows)


def save_unigrams(vocab: Vocabulary, path) -> None:
    """Write ``#total N`` then ``word<TAB>count`` per word, descending count."""
    with atomic_write(path) as fh:
        fh.write(f"#total {vocab.total_tokens}\n")
        for w, c in zip(vocab.words, vocab.counts):
            fh.write(f"{w}\t{c}\n")


def load_unigrams(path) -> Vocabulary:
    """Read a unigram count file back into a Vocabulary."""
    words: list[str] = []
    counts: list[int] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#total "):
            raise ParseError(path, 1, "expected '#total <N>' header")
        try:
            total = int(header[len("#total "):])
        except ValueError:
            raise ParseError(path, 1, "total token count is not an integer") from None
        if total < 0:
            raise ParseError(path, 1, "total token count is negative")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, line_no, "expected 'word<TAB>count'")
            word, count_text = parts
            try:
                count = int(count_text)
            except ValueError:
                raise ParseError(path, line_no, f"count {count_text!r} is not an integer") from None
            if count < 1:
                raise ParseError(path, line_no, f"count {count} is not strictly positive")
            if word in seen:
                raise ParseError(path, line_no, f"duplicate word {word!r}")
            if counts and count > counts[-1]:
                raise ParseError(path, line_no, "counts are not sorted non-increasing")
            seen.add(word)
            words.append(word)
            counts.append(count)
    return Vocabulary(words, counts, total)


def save_bigrams(table: CooccurrenceTable, path) -> None:
    """Write ``#window w`` then, per leading word in vocabulary order, one
    ``word<TAB>row_total`` record followed by ``<TAB>context:count`` lines
    with contexts in descending count."""
    words = table.vocab.words
    with atomic_write(path) as fh:
        fh.write(f"#window {table.window}\n")
        for i, row in table.rows.items():
            fh.write(f"{words[i]}\t{sum(row.values())}\n")
            for j, c in sorted(row.items(), key=lambda jc: (-jc[1], jc[0])):
                fh.write(f"\t{words[j]}:{c}\n")


def load_bigrams(path, vocab: Vocabulary) -> CooccurrenceTable:
    """Read a bigram count file back into a table over ``vocab``."""
    rows: dict[int, dict[int, int]] = {}
    current: dict[int, int] | None = None
    claimed_total = 0
    line_no = 1
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#window "):
            raise ParseError(path, 1, "expected '#window <w>' header")
        try:
            window = int(header[len("#window "):])
        except ValueError:
            raise ParseError(path, 1, "window is not an integer") from None
        if window < 1:
            raise ParseError(path, 1, "window must be at least 1")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("\t"):
                if current is None:
                    raise ParseError(path, line_no, "context line before any record")
                context_text, _, count_text = line[1:].rpartition(":")
                if not context_text:
                    raise ParseError(path, line_no, "expected '<TAB>context:count'")
                j = vocab.index.get(context_text)
                if j is None:
                    raise ParseError(path, line_no, f"unknown context word {context_text!r}")
                try:
                    c = int(count_text)
                except ValueError:
                    raise ParseError(path, line_no, f"count {count_text!r} is not an integer") from None
                if c < 1:
                    raise ParseError(path, line_no, f"count {c} is not strictly positive")
                if j in current:
                    raise ParseError(path, line_no, f"duplicate context {context_text!r}")
                current[j] = c
                claimed_total -= c
            else:
                if current is not None and claimed_total != 0:
                    raise ParseError(path, line_no, "row total does not match its context counts")
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ParseError(path, line_no, "expected 'word<TAB>row_total'")
                word, total_text = parts
                i = vocab.index.get(word)
                if i is None:
                    raise ParseError(path, line_no, f"unknown word {word!r}")
                if i in rows:
                    raise ParseError(path, line_no, f"duplicate word {word!r}")
                try:
                    claimed_total = int(total_text)
                except ValueError:
                    raise ParseError(path, line_no, f"row total {total_text!r} is not an integer") from None
                current = {}
                rows[i] = current
    if current is not None and claimed_total != 0:
        raise ParseError(path, line_no + 1, "row total does not match its context counts")
    return CooccurrenceTable(window, vocab, rows)

"""Embedding container plus word2vec-compatible text persistence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ioutil import ParseError, atomic_write


@dataclass(eq=False)
class EmbeddingSet:
    """Ordered word list with one d-dimensional row vector per word."""

    words: list[str]
    vectors: np.ndarray
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if len(self.words) != self.vectors.shape[0]:
            raise ValueError("word list and vector rows differ in length")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("vectors contain non-finite entries")
        self.index = {}
        for k, w in enumerate(self.words):
            if w in self.index:
                raise ValueError(f"duplicate word {w!r}")
            self.index[w] = k

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]


def save_vec(emb: EmbeddingSet, path) -> None:
    """Write ``n d`` then one ``word f1 .. fd`` record per word.

    Floats carry 6 significant digits, which keeps relative quantization
    error below 5e-7, comfortably inside the error budget of downstream
    cosine computations.
    """
    with atomic_write(path) as fh:
        fh.write(f"{len(emb)} {emb.dim}\n")
        for word, vec in zip(emb.words, emb.vectors):
            fh.write(word + " " + " ".join(format(x, ".6g") for x in vec) + "\n")


def load_vec(path) -> EmbeddingSet:
    """Read a .vec file; raises ParseError with a line number on any defect."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ParseError(path, 1, "expected '<word count> <dim>' header")
        try:
            n, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(path, 1, "header fields are not integers") from None
        if n < 0 or dim < 1:
            raise ParseError(path, 1, "header out of range")
        words: list[str] = []
        seen: set[str] = set()
        vectors = np.empty((n, dim))
        line_no = 1
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            if len(words) == n:
                raise ParseError(path, line_no, f"more than {n} records")
            fields = line.split()
            word = fields[0]
            if len(fields) != dim + 1:
                raise ParseError(
                    path, line_no, f"record for {word!r} has {len(fields) - 1} values, expected {dim}"
                )
            if word in seen:
                raise ParseError(path, line_no, f"duplicate word {word!r}")
            try:
                row = [float(x) for x in fields[1:]]
            except ValueError:
                raise ParseError(path, line_no, f"non-numeric value in record for {word!r}") from None
            if not all(math.isfinite(x) for x in row):
                raise ParseError(path, line_no, f"non-finite value in record for {word!r}")
            vectors[len(words)] = row
            seen.add(word)
            words.append(word)
        if len(words) != n:
            raise ParseError(path, line_no, f"header claims {n} records, found {len(words)}")
    return EmbeddingSet(words, vectors)

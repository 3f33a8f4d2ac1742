"""Tokenization, vocabulary construction, and sparse count/TF-IDF matrices.

Vocabularies grow monotonically across time slices: term ids are never
reassigned, new terms are appended at slice boundaries.  That stability is
what lets the chained LDA backend carry topic-word counts forward.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

TokenDoc = Sequence[str]


class VectorizeError(Exception):
    pass


def tokenize(
    text: str,
    stopwords: frozenset[str] | set[str] = frozenset(),
    min_token_len: int = 2,
    bigrams: bool = False,
) -> list[str]:
    """Whitespace-tokenize cleaned text, dropping stopwords and short tokens.

    With `bigrams` on, adjacent surviving tokens are additionally joined
    with "_" and appended after the unigrams.
    """
    tokens = [
        t for t in text.split() if len(t) >= min_token_len and t not in stopwords
    ]
    if bigrams and len(tokens) >= 2:
        tokens = tokens + [f"{a}_{b}" for a, b in zip(tokens, tokens[1:])]
    return tokens


@dataclass
class Vocabulary:
    """Ordered term list with exact inverse index and document frequencies.

    `n_docs` is the number of documents the vocabulary was fitted
    (and extended) over; it feeds the smoothed idf.
    """

    terms: list[str]
    index: dict[str, int] = field(repr=False)
    doc_freq: list[int]
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index


def build_vocabulary(
    docs: Sequence[TokenDoc], min_df: int = 1, max_df_ratio: float = 1.0
) -> Vocabulary:
    """Build a vocabulary over token lists.

    Retains terms with document frequency >= min_df and
    df/n_docs <= max_df_ratio; terms are sorted lexicographically so the
    ordering is deterministic.
    """
    if min_df < 1:
        raise VectorizeError("min_df must be >= 1")
    if not 0 < max_df_ratio <= 1:
        raise VectorizeError("max_df_ratio must be in (0, 1]")
    n_docs = len(docs)
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc))
    terms = sorted(
        t for t, c in df.items() if c >= min_df and c / n_docs <= max_df_ratio
    )
    if not terms:
        raise VectorizeError("vocabulary is empty after df filtering")
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        doc_freq=[df[t] for t in terms],
        n_docs=n_docs,
    )


def extend_vocabulary(
    vocab: Vocabulary,
    docs: Sequence[TokenDoc],
    min_df: int = 1,
    max_df_ratio: float = 1.0,
) -> Vocabulary:
    """Grow a vocabulary with a new batch of token lists.

    Existing term ids are preserved; qualifying new terms (df filters apply
    to the batch) are appended in sorted order.  Document frequencies
    accumulate over all batches seen so far.
    """
    if not 0 < max_df_ratio <= 1:
        raise VectorizeError("max_df_ratio must be in (0, 1]")
    batch_n = len(docs)
    batch_df: Counter[str] = Counter()
    for doc in docs:
        batch_df.update(set(doc))
    doc_freq = list(vocab.doc_freq)
    for term, count in batch_df.items():
        if term in vocab.index:
            doc_freq[vocab.index[term]] += count
    new_terms = sorted(
        t
        for t, c in batch_df.items()
        if t not in vocab.index and c >= min_df and c / batch_n <= max_df_ratio
    )
    terms = vocab.terms + new_terms
    index = dict(vocab.index)
    for offset, term in enumerate(new_terms, start=len(vocab.terms)):
        index[term] = offset
    doc_freq.extend(batch_df[t] for t in new_terms)
    return Vocabulary(terms=terms, index=index, doc_freq=doc_freq, n_docs=vocab.n_docs + batch_n)


@dataclass
class DocTermMatrix:
    """Sparse term-document matrix as (doc, term, weight) triples.

    Triples are sorted by (doc, term); all stored weights are > 0.
    Documents whose tokens are all out of vocabulary simply contribute no
    triples but still count toward `n_docs`.
    """

    n_docs: int
    n_terms: int
    entries: list[tuple[int, int, float]]
    weighting: str

    def row(self, doc_id: int) -> dict[int, float]:
        return {t: w for d, t, w in self.entries if d == doc_id}


def count_matrix(docs: Sequence[TokenDoc], vocab: Vocabulary) -> DocTermMatrix:
    """Bag-of-words counts; out-of-vocabulary tokens are ignored."""
    entries: list[tuple[int, int, float]] = []
    for d, doc in enumerate(docs):
        counts = Counter(vocab.index[t] for t in doc if t in vocab.index)
        entries.extend((d, t, float(c)) for t, c in sorted(counts.items()))
    return DocTermMatrix(len(docs), len(vocab), entries, "count")


def idf(vocab: Vocabulary, term_id: int) -> float:
    """Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1."""
    return math.log((1 + vocab.n_docs) / (1 + vocab.doc_freq[term_id])) + 1.0


def tfidf(docs: Sequence[TokenDoc], vocab: Vocabulary) -> DocTermMatrix:
    """TF-IDF weights: tf(d,t) * idf(t) with the smoothed idf above."""
    entries: list[tuple[int, int, float]] = []
    for d, doc in enumerate(docs):
        counts = Counter(vocab.index[t] for t in doc if t in vocab.index)
        entries.extend(
            (d, t, float(c) * idf(vocab, t)) for t, c in sorted(counts.items())
        )
    return DocTermMatrix(len(docs), len(vocab), entries, "tfidf")


def write_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    """Dump `term<TAB>doc_freq` lines in term order."""
    with open(path, "w", encoding="utf-8") as fh:
        for term, df in zip(vocab.terms, vocab.doc_freq):
            fh.write(f"{term}\t{df}\n")


def read_vocabulary(path: str | Path, n_docs: int = 0) -> Vocabulary:
    terms: list[str] = []
    doc_freq: list[int] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        term, df = line.rsplit("\t", 1)
        terms.append(term)
        doc_freq.append(int(df))
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        doc_freq=doc_freq,
        n_docs=n_docs or (max(doc_freq) if doc_freq else 0),
    )


def write_matrix_csv(matrix: DocTermMatrix, path: str | Path) -> None:
    """Dump sparse triples as `doc,term,weight` CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("doc,term,weight\n")
        for d, t, w in matrix.entries:
            fh.write(f"{d},{t},{w!r}\n")


class BowVectorizer(BaseEstimator, TransformerMixin):
    """Tokenizing vectorizer with a monotonically growable vocabulary.

    fit() builds the vocabulary from raw (cleaned) texts, transform()
    produces a DocTermMatrix, and extend() appends new-slice terms without
    disturbing existing ids.
    """

    def __init__(
        self,
        stopwords: frozenset[str] = frozenset(),
        min_token_len: int = 2,
        bigrams: bool = False,
        min_df: int = 1,
        max_df_ratio: float = 1.0,
        weighting: str = "count",
    ):
        self.stopwords = stopwords
        self.min_token_len = min_token_len
        self.bigrams = bigrams
        self.min_df = min_df
        self.max_df_ratio = max_df_ratio
        self.weighting = weighting

    def _tokenize_all(self, texts: Iterable[str]) -> list[list[str]]:
        return [
            tokenize(t, self.stopwords, self.min_token_len, self.bigrams)
            for t in texts
        ]

    def fit(self, texts: Sequence[str], y=None) -> "BowVectorizer":
        if self.weighting not in ("count", "tfidf"):
            raise VectorizeError(f"unknown weighting: {self.weighting!r}")
        self.vocabulary_ = build_vocabulary(
            self._tokenize_all(texts), self.min_df, self.max_df_ratio
        )
        return self

    def extend(self, texts: Sequence[str]) -> "BowVectorizer":
        if not hasattr(self, "vocabulary_"):
            return self.fit(texts)
        self.vocabulary_ = extend_vocabulary(
            self.vocabulary_, self._tokenize_all(texts), self.min_df, self.max_df_ratio
        )
        return self

    def transform(self, texts: Sequence[str]) -> DocTermMatrix:
        if not hasattr(self, "vocabulary_"):
            raise VectorizeError("vectorizer is not fitted")
        token_docs = self._tokenize_all(texts)
        if self.weighting == "tfidf":
            return tfidf(token_docs, self.vocabulary_)
        return count_matrix(token_docs, self.vocabulary_)

"""Native incremental topic-model backend: per-slice LDA via collapsed Gibbs
sampling, chained across slices by carrying decayed topic-word counts into
the next slice's sampler.

The collapsed conditional for token i of document d, word w is

    p(z_i = k) ∝ (n_dk + alpha) * (c_kw + m_kw + beta) / (c_k + m_k + V*beta)

where n/m are this slice's document-topic and topic-word counts (excluding
token i) and c is the carried-over, decay-scaled count mass from the
previous slice's state.  The carried mass is held fixed during sampling.

Sampling is deterministic for a fixed seed: all randomness comes from
pre-drawn uniform arrays, and the inner sweep is pure arithmetic (jitted
with numba when available, plain Python otherwise — both compute the
identical sequence of states).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator

from .topics import Topic, TopicSet
from .vectorize import Vocabulary, build_vocabulary, extend_vocabulary

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None


@dataclass
class LdaState:
    """Posterior count state of one (possibly chained) LDA fit.

    `topic_word` rows are real-valued because carried-over counts are
    decay-scaled; `topic_totals` always equals the row sums.
    """

    n_topics: int
    alpha: float
    beta: float
    topic_word: np.ndarray
    topic_totals: np.ndarray
    vocab_size: int
    rng_seed: int

    def validate(self) -> None:
        if self.n_topics < 1 or self.alpha <= 0 or self.beta <= 0:
            raise ValueError("need n_topics >= 1, alpha > 0, beta > 0")
        sums = self.topic_word.sum(axis=1)
        if not np.allclose(sums, self.topic_totals, rtol=1e-9, atol=1e-9):
            raise ValueError("topic_totals inconsistent with topic_word sums")

    def padded(self, vocab_size: int) -> "LdaState":
        """Return a state widened with zero columns for new vocabulary."""
        if vocab_size < self.vocab_size:
            raise ValueError("vocabulary cannot shrink")
        if vocab_size == self.vocab_size:
            return self
        widened = np.zeros((self.n_topics, vocab_size))
        widened[:, : self.vocab_size] = self.topic_word
        return replace(
            self, topic_word=widened, vocab_size=vocab_size,
            topic_totals=self.topic_totals.copy(),
        )


@dataclass
class SliceAssignment:
    """Per-document sampler output for one slice fit."""

    z: list[np.ndarray]
    doc_topic_counts: np.ndarray

    def __len__(self) -> int:
        return len(self.z)


def zero_state(n_topics: int, alpha: float, beta: float, vocab_size: int, seed: int) -> LdaState:
    return LdaState(
        n_topics=n_topics,
        alpha=alpha,
        beta=beta,
        topic_word=np.zeros((n_topics, vocab_size)),
        topic_totals=np.zeros(n_topics),
        vocab_size=vocab_size,
        rng_seed=seed,
    )


def _sweep_py(doc_ids, word_ids, z, ndk, nkw, nk, carried_kw, carried_k,
              alpha, beta, vbeta, uniforms, probs):
    n_topics = ndk.shape[1]
    for i in range(word_ids.shape[0]):
        d = doc_ids[i]
        w = word_ids[i]
        old = z[i]
        ndk[d, old] -= 1.0
        nkw[old, w] -= 1.0
        nk[old] -= 1.0
        total = 0.0
        for k in range(n_topics):
            p = (ndk[d, k] + alpha) * (carried_kw[k, w] + nkw[k, w] + beta) / (
                carried_k[k] + nk[k] + vbeta
            )
            probs[k] = p
            total += p
        target = uniforms[i] * total
        acc = 0.0
        new = n_topics - 1
        for k in range(n_topics):
            acc += probs[k]
            if target < acc:
                new = k
                break
        z[i] = new
        ndk[d, new] += 1.0
        nkw[new, w] += 1.0
        nk[new] += 1.0


_sweep = njit(cache=True)(_sweep_py) if njit is not None else _sweep_py


def gibbs_fit(
    slice_docs: list[list[str]],
    vocab: Vocabulary,
    prior_state: LdaState | None = None,
    iters: int = 100,
    seed: int = 0,
    n_topics: int | None = None,
    alpha: float = 0.1,
    beta: float = 0.01,
) -> tuple[LdaState, SliceAssignment]:
    """Fit one slice with collapsed Gibbs sampling.

    When `prior_state` is given (normally the output of `chain_update`),
    its hyper-parameters take precedence and its counts act as fixed extra
    mass in the conditional; the returned state contains carried + new
    counts.  Deterministic for fixed inputs and seed.
    """
    if prior_state is not None:
        prior_state = prior_state.padded(len(vocab))
        n_topics, alpha, beta = prior_state.n_topics, prior_state.alpha, prior_state.beta
    if n_topics is None:
        raise ValueError("n_topics required when no prior_state is given")
    if n_topics < 1 or iters < 0:
        raise ValueError("need n_topics >= 1 and iters >= 0")

    v = len(vocab)
    doc_tokens = [
        np.array([vocab.index[t] for t in doc if t in vocab.index], dtype=np.int64)
        for doc in slice_docs
    ]
    n_tokens = int(sum(len(t) for t in doc_tokens))

    carried_kw = (
        prior_state.topic_word if prior_state is not None else np.zeros((n_topics, v))
    )
    carried_k = (
        prior_state.topic_totals if prior_state is not None else np.zeros(n_topics)
    )

    if n_tokens == 0:
        state = (
            prior_state
            if prior_state is not None
            else zero_state(n_topics, alpha, beta, v, seed)
        )
        assignment = SliceAssignment(
            z=[np.empty(0, dtype=np.int64) for _ in slice_docs],
            doc_topic_counts=np.zeros((len(slice_docs), n_topics)),
        )
        return state, assignment

    if n_topics > n_tokens:
        warnings.warn(
            f"n_topics={n_topics} exceeds slice token count {n_tokens}", stacklevel=2
        )

    doc_ids = np.concatenate(
        [np.full(len(t), d, dtype=np.int64) for d, t in enumerate(doc_tokens)]
    )
    word_ids = np.concatenate(doc_tokens)

    rng = np.random.default_rng(seed)
    z = np.minimum((rng.random(n_tokens) * n_topics).astype(np.int64), n_topics - 1)

    ndk = np.zeros((len(slice_docs), n_topics))
    nkw = np.zeros((n_topics, v))
    nk = np.zeros(n_topics)
    np.add.at(ndk, (doc_ids, z), 1.0)
    np.add.at(nkw, (z, word_ids), 1.0)
    np.add.at(nk, z, 1.0)

    probs = np.empty(n_topics)
    vbeta = v * beta
    for _ in range(iters):
        _sweep(
            doc_ids, word_ids, z, ndk, nkw, nk,
            carried_kw, carried_k, alpha, beta, vbeta,
            rng.random(n_tokens), probs,
        )

    state = LdaState(
        n_topics=n_topics,
        alpha=alpha,
        beta=beta,
        topic_word=carried_kw + nkw,
        topic_totals=carried_k + nk,
        vocab_size=v,
        rng_seed=seed,
    )
    offsets = np.cumsum([0] + [len(t) for t in doc_tokens])
    assignment = SliceAssignment(
        z=[z[offsets[d] : offsets[d + 1]].copy() for d in range(len(slice_docs))],
        doc_topic_counts=ndk,
    )
    return state, assignment


def chain_update(state: LdaState, decay: float) -> LdaState:
    """Scale a state's counts by `decay` to seed the next slice's fit.

    decay=0 makes per-slice fits independent; decay=1 carries counts
    unchanged.
    """
    if not 0 <= decay <= 1:
        raise ValueError("decay must be in [0, 1]")
    carried = state.topic_word * decay
    return replace(state, topic_word=carried, topic_totals=carried.sum(axis=1))


def extract_topics(
    state: LdaState,
    vocab: Vocabulary,
    top_n: int,
    slice_index: int,
    backend_name: str = "native_lda",
) -> TopicSet:
    """Rank each topic's words by smoothed count and keep the top N.

    Weights are (count + beta) / (topic_total + V*beta); ties break
    lexicographically so reports are byte-stable.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    v = len(vocab)
    if top_n > v:
        warnings.warn(f"top_n={top_n} exceeds vocabulary size {v}; clamped", stacklevel=2)
        top_n = v
    topics = []
    for k in range(state.n_topics):
        row = state.topic_word[k]
        denom = state.topic_totals[k] + v * state.beta
        order = sorted(range(v), key=lambda w: (-row[w], vocab.terms[w]))[:top_n]
        topics.append(
            Topic(
                topic_id=k,
                top_words=tuple(
                    (vocab.terms[w], (row[w] + state.beta) / denom) for w in order
                ),
                provenance=f"{backend_name}:slice={slice_index}",
            )
        )
    return TopicSet(slice_index=slice_index, topics=tuple(topics), top_n=top_n)


def assign_documents(
    state: LdaState, assignment: SliceAssignment
) -> list[tuple[int, float]]:
    """Map each document to its maximum-probability topic.

    score = (n_dk* + alpha) / (len(d) + K*alpha); argmax ties resolve to
    the lowest topic id.  Empty documents land on topic 0 with score 1/K.
    """
    out = []
    k, alpha = state.n_topics, state.alpha
    for counts in assignment.doc_topic_counts:
        best = int(np.argmax(counts + alpha))
        length = float(counts.sum())
        out.append((best, (counts[best] + alpha) / (length + k * alpha)))
    return out


class IncrementalLda(BaseEstimator):
    """Chained per-slice LDA with a growable vocabulary.

    partial_fit() consumes one slice of token lists: the vocabulary is
    extended (term ids stable), the previous state is decayed via
    chain_update, and a collapsed Gibbs fit is run with a per-slice seed
    of `seed + slice_number`.  fit() resets and consumes a single slice.
    """

    def __init__(
        self,
        n_topics: int = 6,
        alpha: float = 0.1,
        beta: float = 0.01,
        decay: float = 0.5,
        iters: int = 200,
        seed: int = 0,
        min_df: int = 1,
        max_df_ratio: float = 1.0,
    ):
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.decay = decay
        self.iters = iters
        self.seed = seed
        self.min_df = min_df
        self.max_df_ratio = max_df_ratio

    def _reset(self) -> None:
        for attr in ("vocabulary_", "state_", "assignment_", "n_slices_"):
            if hasattr(self, attr):
                delattr(self, attr)

    def fit(self, token_docs: list[list[str]], y=None) -> "IncrementalLda":
        self._reset()
        return self.partial_fit(token_docs)

    def partial_fit(self, token_docs: list[list[str]]) -> "IncrementalLda":
        if not 0 <= self.decay <= 1:
            raise ValueError("decay must be in [0, 1]")
        has_tokens = any(token_docs) if token_docs else False
        if not hasattr(self, "n_slices_"):
            self.n_slices_ = 0
        if not hasattr(self, "vocabulary_"):
            if has_tokens:
                self.vocabulary_ = build_vocabulary(
                    token_docs, self.min_df, self.max_df_ratio
                )
        elif has_tokens:
            self.vocabulary_ = extend_vocabulary(
                self.vocabulary_, token_docs, self.min_df, self.max_df_ratio
            )
        if not hasattr(self, "vocabulary_"):
            # nothing fit yet and this slice is empty: keep waiting
            self.assignment_ = SliceAssignment(
                z=[np.empty(0, dtype=np.int64) for _ in token_docs],
                doc_topic_counts=np.zeros((len(token_docs), self.n_topics)),
            )
            self.n_slices_ += 1
            return self
        prior = (
            chain_update(self.state_, self.decay) if hasattr(self, "state_") else None
        )
        self.state_, self.assignment_ = gibbs_fit(
            token_docs,
            self.vocabulary_,
            prior_state=prior,
            iters=self.iters,
            seed=self.seed + self.n_slices_,
            n_topics=self.n_topics,
            alpha=self.alpha,
            beta=self.beta,
        )
        self.n_slices_ += 1
        return self

    def top_topics(self, top_n: int, slice_index: int) -> TopicSet:
        if not hasattr(self, "state_"):
            return TopicSet(slice_index=slice_index, topics=(), top_n=top_n)
        return extract_topics(self.state_, self.vocabulary_, top_n, slice_index)

    def doc_assignments(self) -> list[tuple[int, float]]:
        if not hasattr(self, "state_") or not hasattr(self, "assignment_"):
            return []
        return assign_documents(self.state_, self.assignment_)

"""Shared topic containers emitted by every backend and consumed by metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


@dataclass(frozen=True)
class Topic:
    """One topic: a ranked top-N word list with weights.

    `top_words` is sorted by weight descending with lexicographic
    tie-breaks; tokens within a topic are distinct.  `provenance` records
    which backend produced the topic and at which slice.
    """

    topic_id: int
    top_words: tuple[tuple[str, float], ...]
    provenance: str = ""

    def words(self) -> list[str]:
        return [w for w, _ in self.top_words]

    def word_set(self) -> frozenset[str]:
        return frozenset(w for w, _ in self.top_words)

    def to_dict(self) -> dict:
        return {"id": self.topic_id, "words": [[w, wt] for w, wt in self.top_words]}

    @classmethod
    def from_dict(cls, data: dict, provenance: str = "") -> "Topic":
        return cls(
            topic_id=int(data["id"]),
            top_words=tuple((str(w), float(wt)) for w, wt in data["words"]),
            provenance=provenance,
        )


@dataclass(frozen=True)
class TopicSet:
    """The topics a backend emitted for one increment."""

    slice_index: int
    topics: tuple[Topic, ...] = field(default_factory=tuple)
    top_n: int = 10

    def __len__(self) -> int:
        return len(self.topics)

    def __iter__(self) -> Iterable[Topic]:
        return iter(self.topics)

    def all_words(self) -> set[str]:
        words: set[str] = set()
        for topic in self.topics:
            words.update(topic.words())
        return words

    def validate(self) -> None:
        ids = [t.topic_id for t in self.topics]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate topic ids in slice {self.slice_index}")
        for topic in self.topics:
            words = topic.words()
            if len(words) != len(set(words)):
                raise ValueError(f"duplicate words in topic {topic.topic_id}")
            if len(words) > self.top_n:
                raise ValueError(
                    f"topic {topic.topic_id} has {len(words)} words, top_n={self.top_n}"
                )
            weights = [wt for _, wt in topic.top_words]
            if any(b > a for a, b in zip(weights, weights[1:])):
                raise ValueError(f"topic {topic.topic_id} words not weight-sorted")

    def to_dict(self) -> dict:
        return {
            "slice_index": self.slice_index,
            "top_n": self.top_n,
            "topics": [t.to_dict() for t in self.topics],
        }

    @classmethod
    def from_dict(cls, data: dict, provenance: str = "") -> "TopicSet":
        return cls(
            slice_index=int(data["slice_index"]),
            topics=tuple(Topic.from_dict(t, provenance) for t in data["topics"]),
            top_n=int(data.get("top_n", 10)),
        )

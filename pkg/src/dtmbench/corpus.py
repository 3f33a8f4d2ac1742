"""Corpus ingestion, cleaning, sentence splitting, time slicing, sampling.

The pipeline order used by the CLI is: ingest -> split_sentences -> clean ->
sample_without_replacement -> slice_corpus.  All functions here are pure and
operate on immutable `Document` values.
"""

from __future__ import annotations

import csv
import json
import random
import re
from dataclasses import dataclass, field, replace
from datetime import date
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence


class CorpusError(Exception):
    """Raised for unreadable inputs, bad field maps, or empty corpora."""


class Granularity(str, Enum):
    DAY = "day"
    MONTH = "month"
    QUARTER = "quarter"
    YEAR = "year"


@dataclass(frozen=True)
class Document:
    """One timestamped text unit (tweet, sentence, speech).

    `source_id` points at the original tuple when the document was produced
    by sentence splitting; otherwise it is None.
    """

    id: str
    timestamp: date
    text: str
    location: str | None = None
    source_id: str | None = None


@dataclass
class TimeSlice:
    """Ordered group of documents sharing one temporal bucket.

    `index` is 1-based and gap-free across a sliced corpus; empty calendar
    buckets inside the covered interval are kept so indices match calendar
    positions.
    """

    index: int
    label: str
    documents: list[Document] = field(default_factory=list)


@dataclass(frozen=True)
class CleaningConfig:
    strip_urls: bool = True
    strip_mentions: bool = True
    keep_hashtag_word: bool = True
    keep_digits: bool = True
    lowercase: bool = True

    def to_dict(self) -> dict:
        return {
            "strip_urls": self.strip_urls,
            "strip_mentions": self.strip_mentions,
            "keep_hashtag_word": self.keep_hashtag_word,
            "keep_digits": self.keep_digits,
            "lowercase": self.lowercase,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CleaningConfig":
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise CorpusError(f"unknown cleaning keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class IngestResult:
    documents: list[Document]
    skipped: int


_ROLES_REQUIRED = ("id", "timestamp", "text")
_ROLES_OPTIONAL = ("location", "source_id")

_URL_RE = re.compile(r"\bhttps?\S*", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_NON_WORD_RE = re.compile(r"[^\w\s]|_")
_DIGIT_RE = re.compile(r"\d+")
_WS_RE = re.compile(r"\s+")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def parse_timestamp(raw: str | date) -> date:
    """Parse a timestamp string to a day-resolution date.

    Accepts ISO dates, ISO datetimes (time part dropped), "YYYY-MM"
    (normalized to the 1st) and bare years (normalized to January 1).
    """
    if isinstance(raw, date):
        return raw
    value = str(raw).strip()
    if not value:
        raise CorpusError("empty timestamp")
    if re.fullmatch(r"\d{4}", value):
        return date(int(value), 1, 1)
    if re.fullmatch(r"\d{4}[-.]\d{1,2}", value):
        year, month = re.split(r"[-.]", value)
        return date(int(year), int(month), 1)
    value = value.replace("/", "-").replace(".", "-")
    if "T" in value:
        value = value.split("T", 1)[0]
    if " " in value:
        value = value.split(" ", 1)[0]
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise CorpusError(f"unparseable timestamp: {raw!r}") from exc


def clean(text: str, rules: CleaningConfig | None = None) -> str:
    """Normalize raw text: drop URLs/mentions/symbols, lowercase, collapse.

    Total and idempotent; may return the empty string.
    """
    rules = rules or CleaningConfig()
    out = text
    if rules.strip_urls:
        out = _URL_RE.sub(" ", out)
    if rules.strip_mentions:
        out = _MENTION_RE.sub(" ", out)
    if rules.keep_hashtag_word:
        out = out.replace("#", "")
    out = _NON_WORD_RE.sub(" ", out)
    if not rules.keep_digits:
        out = _DIGIT_RE.sub(" ", out)
    if rules.lowercase:
        out = out.lower()
    return _WS_RE.sub(" ", out).strip()


def split_sentences(doc: Document, max_tokens: int) -> list[Document]:
    """Split a long document into sentence-level documents.

    Documents at or under `max_tokens` whitespace tokens pass through
    unchanged.  Longer texts are split at terminal punctuation; texts with
    no sentence delimiters fall back to fixed-width chunks of `max_tokens`
    tokens.  Children get ids "<id>#k" and inherit timestamp/location.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be positive")
    tokens = doc.text.split()
    if len(tokens) <= max_tokens:
        return [doc]
    parts = [p.strip() for p in _SENTENCE_SPLIT_RE.split(doc.text.strip())]
    parts = [p for p in parts if p]
    if len(parts) <= 1:
        parts = [
            " ".join(tokens[i : i + max_tokens])
            for i in range(0, len(tokens), max_tokens)
        ]
    return [
        replace(doc, id=f"{doc.id}#{k}", text=part, source_id=doc.id)
        for k, part in enumerate(parts, start=1)
    ]


def _bucket_key(day: date, granularity: Granularity) -> int:
    if granularity is Granularity.DAY:
        return day.toordinal()
    if granularity is Granularity.MONTH:
        return day.year * 12 + day.month - 1
    if granularity is Granularity.QUARTER:
        return day.year * 4 + (day.month - 1) // 3
    return day.year


def _bucket_label(key: int, granularity: Granularity) -> str:
    if granularity is Granularity.DAY:
        return date.fromordinal(key).isoformat()
    if granularity is Granularity.MONTH:
        return f"{key // 12:04d}-{key % 12 + 1:02d}"
    if granularity is Granularity.QUARTER:
        return f"{key // 4:04d}-Q{key % 4 + 1}"
    return f"{key:04d}"


def bucket_label(day: date, granularity: Granularity) -> str:
    """Canonical bucket string for a date ("2020-01", "1970", ...)."""
    return _bucket_label(_bucket_key(day, granularity), granularity)


def slice_corpus(docs: Sequence[Document], granularity: Granularity) -> list[TimeSlice]:
    """Bucket documents into ordered, disjoint time slices.

    Buckets between the first and last occupied one are emitted even when
    empty, so slice indices match calendar arithmetic.
    """
    if not docs:
        raise CorpusError("cannot slice an empty corpus")
    by_key: dict[int, list[Document]] = {}
    for doc in docs:
        by_key.setdefault(_bucket_key(doc.timestamp, granularity), []).append(doc)
    lo, hi = min(by_key), max(by_key)
    return [
        TimeSlice(
            index=i,
            label=_bucket_label(key, granularity),
            documents=by_key.get(key, []),
        )
        for i, key in enumerate(range(lo, hi + 1), start=1)
    ]


def sample_without_replacement(
    docs: Sequence[Document],
    per_bucket: int,
    seed: int,
    granularity: Granularity = Granularity.MONTH,
) -> list[Document]:
    """Keep at most `per_bucket` documents per calendar bucket, uniformly.

    Deterministic for a fixed seed and input order; within a bucket the
    surviving documents keep their original relative order.
    """
    if per_bucket < 1:
        raise ValueError("per_bucket must be positive")
    by_key: dict[int, list[Document]] = {}
    for doc in docs:
        by_key.setdefault(_bucket_key(doc.timestamp, granularity), []).append(doc)
    rng = random.Random(seed)
    out: list[Document] = []
    for key in sorted(by_key):
        bucket = by_key[key]
        if len(bucket) <= per_bucket:
            out.extend(bucket)
        else:
            idx = sorted(rng.sample(range(len(bucket)), per_bucket))
            out.extend(bucket[i] for i in idx)
    return out


def _row_value(row: dict, column: str | None) -> str:
    if column is None:
        return ""
    value = row.get(column)
    return "" if value is None else str(value)


def ingest(path: str | Path, format: str, field_map: dict[str, str]) -> IngestResult:
    """Read a CSV or JSONL file into Documents.

    `field_map` maps roles to column/key names; roles id, timestamp and
    text are required, location and source_id optional.  Rows with empty
    text or an unparseable timestamp are counted and skipped.
    """
    missing = [r for r in _ROLES_REQUIRED if r not in field_map]
    if missing:
        raise CorpusError(f"field_map must cover roles {missing}")
    unknown = set(field_map) - set(_ROLES_REQUIRED) - set(_ROLES_OPTIONAL)
    if unknown:
        raise CorpusError(f"unknown roles in field_map: {sorted(unknown)}")
    if format not in ("csv", "jsonl"):
        raise CorpusError(f"unsupported format: {format!r}")

    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc

    if format == "csv":
        reader = csv.DictReader(raw.splitlines())
        header = reader.fieldnames or []
        absent = [c for c in field_map.values() if c not in header]
        if absent:
            raise CorpusError(f"mapped columns missing from CSV header: {absent}")
        rows: Iterable[dict] = reader
    else:
        rows = (json.loads(line) for line in raw.splitlines() if line.strip())

    documents: list[Document] = []
    seen_ids: set[str] = set()
    skipped = 0
    for row in rows:
        text = _row_value(row, field_map["text"]).strip()
        doc_id = _row_value(row, field_map["id"]).strip()
        try:
            ts = parse_timestamp(_row_value(row, field_map["timestamp"]))
        except CorpusError:
            skipped += 1
            continue
        if not text or not doc_id:
            skipped += 1
            continue
        if doc_id in seen_ids:
            raise CorpusError(f"duplicate document id: {doc_id!r}")
        seen_ids.add(doc_id)
        location = _row_value(row, field_map.get("location")) or None
        source_id = _row_value(row, field_map.get("source_id")) or None
        documents.append(Document(doc_id, ts, text, location, source_id))

    if not documents:
        raise CorpusError(f"no valid rows in {path}")
    return IngestResult(documents, skipped)


def write_corpus_jsonl(docs: Iterable[Document], path: str | Path) -> None:
    """Dump documents in the canonical JSONL layout."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(
                json.dumps(
                    {
                        "id": doc.id,
                        "timestamp": doc.timestamp.isoformat(),
                        "text": doc.text,
                        "location": doc.location,
                        "source_id": doc.source_id,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_corpus_jsonl(path: str | Path) -> list[Document]:
    """Load documents from the canonical JSONL dump."""
    docs = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    for line in lines:
        if not line.strip():
            continue
        row = json.loads(line)
        docs.append(
            Document(
                id=str(row["id"]),
                timestamp=parse_timestamp(row["timestamp"]),
                text=str(row["text"]),
                location=row.get("location"),
                source_id=row.get("source_id"),
            )
        )
    if not docs:
        raise CorpusError(f"no documents in {path}")
    return docs


def load_stopwords(source: str | Path) -> frozenset[str]:
    """Load a stopword set from a packaged language code ("de", "en") or a
    text file with one token per line; `#` starts a comment line."""
    source = str(source)
    if source in ("de", "en"):
        text = (
            resources.files("dtmbench.data.stopwords")
            .joinpath(f"{source}.txt")
            .read_text(encoding="utf-8")
        )
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read stopword file {source}: {exc}") from exc
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)

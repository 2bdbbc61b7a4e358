"""Corpus preparation: cleaning, filtering, statistics and splits.

Raw article/summary dumps come in as JSON-lines files.  Cleaning removes
URLs, Latin letters and control characters, then collapses whitespace.
Filtering enforces the minimum word counts (5 for articles, 3 for
summaries), drops exact duplicates and yields the standard dataset that
the rest of the pipeline consumes.
"""

from __future__ import annotations

import json
import math
import re
import unicodedata
from dataclasses import dataclass

import numpy as np

MIN_ARTICLE_WORDS = 5
MIN_SUMMARY_WORDS = 3

_URL_PREFIXES = ("http://", "https://", "www.")
_LATIN_RE = re.compile(r"[A-Za-z]")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class RawRecord:
    """One crawled record, before any cleaning."""

    article_text: str
    summary_text: str
    source_id: str | None = None


@dataclass(frozen=True)
class ArticleSummaryPair:
    """One cleaned news article and its reference summary."""

    article: str
    summary: str


@dataclass(frozen=True)
class DatasetStats:
    total_pairs: int
    max_article_words: int
    min_article_words: int
    max_summary_words: int
    min_summary_words: int


@dataclass(frozen=True)
class SplitSpec:
    """Train/validation/test ratios plus the shuffle seed."""

    train_ratio: float = 0.7
    val_ratio: float = 0.2
    test_ratio: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("train_ratio", "val_ratio", "test_ratio"):
            r = getattr(self, name)
            if not 0.0 < r < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {r}")
        total = self.train_ratio + self.val_ratio + self.test_ratio
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"split ratios must sum to 1, got {total}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def clean_text(raw: str) -> str:
    """Normalize one piece of text.

    NFC-normalizes, drops whitespace-delimited tokens that start with
    ``http://``/``https://``/``www.``, strips ASCII Latin letters and
    control characters, collapses whitespace runs and trims.  Idempotent:
    ``clean_text(clean_text(x)) == clean_text(x)``.
    """
    text = unicodedata.normalize("NFC", raw)
    text = " ".join(tok for tok in text.split() if not tok.startswith(_URL_PREFIXES))
    text = _LATIN_RE.sub("", text)
    text = "".join(ch for ch in text if unicodedata.category(ch) != "Cc")
    # Removals can expose new compositions, so normalize once more.
    text = unicodedata.normalize("NFC", text)
    return _WS_RE.sub(" ", text).strip()


def filter_pairs(records) -> list[ArticleSummaryPair]:
    """Clean and filter raw records into the standard dataset.

    Drops pairs whose cleaned article has fewer than 5 words or whose
    cleaned summary has fewer than 3, drops empty fields, and removes
    exact (article, summary) duplicates keeping the first occurrence.
    Input order is otherwise preserved.
    """
    kept: list[ArticleSummaryPair] = []
    seen: set[tuple[str, str]] = set()
    for rec in records:
        article = clean_text(rec.article_text)
        summary = clean_text(rec.summary_text)
        if not article or not summary:
            continue
        if len(article.split()) < MIN_ARTICLE_WORDS:
            continue
        if len(summary.split()) < MIN_SUMMARY_WORDS:
            continue
        key = (article, summary)
        if key in seen:
            continue
        seen.add(key)
        kept.append(ArticleSummaryPair(article, summary))
    return kept


def dataset_stats(pairs) -> DatasetStats:
    """Word-count extrema over the dataset (whitespace-delimited words)."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty dataset")
    article_lens = [len(p.article.split()) for p in pairs]
    summary_lens = [len(p.summary.split()) for p in pairs]
    return DatasetStats(
        total_pairs=len(pairs),
        max_article_words=max(article_lens),
        min_article_words=min(article_lens),
        max_summary_words=max(summary_lens),
        min_summary_words=min(summary_lens),
    )


def split_dataset(pairs, spec: SplitSpec):
    """Deterministic shuffled train/val/test split.

    Shuffles by a permutation drawn from ``spec.seed``, then cuts
    ``floor(train_ratio*N)`` / ``floor(val_ratio*N)`` / remainder.
    """
    pairs = list(pairs)
    n = len(pairs)
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    order = np.random.default_rng(spec.seed).permutation(n)
    shuffled = [pairs[i] for i in order]
    n_train = math.floor(spec.train_ratio * n)
    n_val = math.floor(spec.val_ratio * n)
    train = shuffled[:n_train]
    val = shuffled[n_train : n_train + n_val]
    test = shuffled[n_train + n_val :]
    if not train or not val or not test:
        raise ValueError("split produces empty partition")
    return train, val, test


def _load_jsonl(path, required_fields, optional_fields=()):
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: malformed record: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise ValueError(f"{path}: line {lineno}: record is not an object")
            row = {}
            for field in required_fields:
                if field not in obj:
                    raise ValueError(f"{path}: line {lineno}: missing field '{field}'")
                if not isinstance(obj[field], str):
                    raise ValueError(f"{path}: line {lineno}: field '{field}' is not text")
                row[field] = obj[field]
            for field in optional_fields:
                if field in obj:
                    if not isinstance(obj[field], str):
                        raise ValueError(f"{path}: line {lineno}: field '{field}' is not text")
                    row[field] = obj[field]
            rows.append(row)
    return rows


def save_dataset(pairs, path) -> None:
    """Write pairs as JSON lines with keys "article" and "summary"."""
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(json.dumps({"article": p.article, "summary": p.summary}, ensure_ascii=False))
            f.write("\n")


def load_dataset(path) -> list[ArticleSummaryPair]:
    """Read a dataset file written by :func:`save_dataset`.

    Malformed lines raise with the 1-based line number; a missing field
    raises naming the field.
    """
    rows = _load_jsonl(path, ("article", "summary"))
    return [ArticleSummaryPair(r["article"], r["summary"]) for r in rows]


def save_raw_dump(records, path) -> None:
    """Write raw records as JSON lines (article_text/summary_text/source_id)."""
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            obj = {"article_text": rec.article_text, "summary_text": rec.summary_text}
            if rec.source_id is not None:
                obj["source_id"] = rec.source_id
            f.write(json.dumps(obj, ensure_ascii=False))
            f.write("\n")


def load_raw_dump(path) -> list[RawRecord]:
    """Read a raw dump file written by :func:`save_raw_dump`."""
    rows = _load_jsonl(path, ("article_text", "summary_text"), optional_fields=("source_id",))
    return [RawRecord(r["article_text"], r["summary_text"], r.get("source_id")) for r in rows]

"""Tokenization, vocabulary, bucketing and batch assembly.

Token ids 0..3 are reserved: ``_PAD`` pads to bucket size, ``_GO`` starts
the decoder, ``_EOS`` terminates it, ``_UNK`` stands in for
out-of-vocabulary words.  Encoder inputs are right-padded then reversed,
so padding forms a prefix and the first source words sit next to the
decoder.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

PAD, GO, EOS, UNK = "_PAD", "_GO", "_EOS", "_UNK"
SPECIALS = (PAD, GO, EOS, UNK)
PAD_ID, GO_ID, EOS_ID, UNK_ID = 0, 1, 2, 3

# Danda plus the detachable ASCII marks and the em dash.
_TOKEN_RE = re.compile(r"[।,.!?;:\"'()\-—]|[^\s।,.!?;:\"'()\-—]+")


def tokenize(text: str) -> list[str]:
    """Split cleaned text on whitespace, detaching punctuation.

    The danda ``।`` and ``, . ! ? ; : " ' ( ) - —`` become standalone
    tokens.  Never yields empty tokens.
    """
    return _TOKEN_RE.findall(text)


@dataclass
class Vocabulary:
    """Frequency-ranked token<->id mapping with the four reserved ids."""

    id_to_token: list[str]
    token_to_id: dict[str, int] = field(repr=False)
    max_size: int = 40000

    def __len__(self) -> int:
        return len(self.id_to_token)

    def encode(self, tokens) -> list[int]:
        """Map tokens to ids; unknown tokens map to the ``_UNK`` id."""
        t2i = self.token_to_id
        return [t2i.get(tok, UNK_ID) for tok in tokens]

    def decode(self, ids) -> list[str]:
        """Map ids back to tokens, rejecting out-of-range ids."""
        n = len(self.id_to_token)
        out = []
        for i in ids:
            if not 0 <= i < n:
                raise ValueError(f"token id {i} out of range for vocabulary of size {n}")
            out.append(self.id_to_token[i])
        return out


def build_vocab(tokens, max_size: int = 40000) -> Vocabulary:
    """Build the shared vocabulary from a token stream.

    The four specials take ids 0-3; the remaining ``max_size - 4`` slots
    are filled by descending corpus frequency, ties broken by first
    occurrence in the stream.  Deterministic for a given stream.
    """
    if max_size < 5:
        raise ValueError(f"max_size must be at least 5, got {max_size}")
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    for pos, tok in enumerate(tokens):
        if tok in SPECIALS:
            continue
        counts[tok] = counts.get(tok, 0) + 1
        if tok not in first_seen:
            first_seen[tok] = pos
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    id_to_token = list(SPECIALS) + ranked[: max_size - 4]
    token_to_id = {tok: i for i, tok in enumerate(id_to_token)}
    return Vocabulary(id_to_token, token_to_id, max_size)


def save_vocab(vocab: Vocabulary, path) -> None:
    """Write one token per line; the line number (0-based) is the id."""
    for tok in vocab.id_to_token:
        if not tok or any(ch.isspace() for ch in tok):
            raise ValueError(f"token {tok!r} cannot be written to a vocabulary file")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(vocab.id_to_token))
        f.write("\n")


def load_vocab(path) -> Vocabulary:
    """Read a vocabulary file, checking the reserved first four lines."""
    with open(path, encoding="utf-8") as f:
        id_to_token = f.read().splitlines()
    if tuple(id_to_token[:4]) != SPECIALS:
        raise ValueError(f"{path}: first four vocabulary entries must be {SPECIALS}")
    token_to_id = {tok: i for i, tok in enumerate(id_to_token)}
    if len(token_to_id) != len(id_to_token):
        raise ValueError(f"{path}: vocabulary contains duplicate tokens")
    if any(not tok for tok in id_to_token):
        raise ValueError(f"{path}: vocabulary contains an empty token")
    return Vocabulary(id_to_token, token_to_id, max_size=max(40000, len(id_to_token)))


@dataclass(frozen=True)
class BucketSpec:
    """Ordered (source_len, target_len) shapes, strictly increasing."""

    buckets: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.buckets:
            raise ValueError("bucket list must be non-empty")
        prev_s, prev_t = 0, 1
        for s, t in self.buckets:
            if t < 2:
                raise ValueError(f"bucket target length {t} leaves no room for _GO/_EOS")
            if s <= prev_s or t <= prev_t:
                raise ValueError("bucket sizes must be strictly increasing in both coordinates")
            prev_s, prev_t = s, t

    def __len__(self) -> int:
        return len(self.buckets)


#: The production bucket list: five shapes, largest (50, 20).
DEFAULT_BUCKETS = BucketSpec(((10, 5), (20, 8), (30, 12), (40, 16), (50, 20)))


def assign_bucket(src_len: int, tgt_len: int, spec: BucketSpec) -> tuple[int, bool]:
    """Smallest bucket fitting both lengths (target needs _GO/_EOS room).

    Returns ``(index, truncated)``; when nothing fits, the last bucket is
    returned with ``truncated=True``.
    """
    if src_len < 0 or tgt_len < 0:
        raise ValueError("lengths must be non-negative")
    for i, (s, t) in enumerate(spec.buckets):
        if src_len <= s and tgt_len <= t - 2:
            return i, False
    return len(spec.buckets) - 1, True


@dataclass
class Batch:
    """Bucket-shaped id arrays, time-major (length x batch)."""

    bucket_index: int
    encoder_ids: np.ndarray  # (source_len, batch) int64
    decoder_ids: np.ndarray  # (target_len, batch) int64
    target_weights: np.ndarray  # (target_len, batch) float64

    @property
    def size(self) -> int:
        return self.encoder_ids.shape[1]


def make_batch(pairs, bucket_index: int, spec: BucketSpec) -> Batch:
    """Build a batch from the given (source_ids, target_ids) pairs in order.

    Sources are truncated to the bucket's source length, right-padded and
    reversed; targets are truncated to ``target_len - 2`` and framed as
    ``_GO ... _EOS`` then padded.  ``target_weights[j]`` is 1 exactly
    where the shifted target ``decoder_ids[j + 1]`` is a real token or
    ``_EOS``.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("cannot build a batch from an empty pair list")
    src_len, tgt_len = spec.buckets[bucket_index]
    n = len(pairs)
    encoder_ids = np.full((src_len, n), PAD_ID, dtype=np.int64)
    decoder_ids = np.full((tgt_len, n), PAD_ID, dtype=np.int64)
    target_weights = np.zeros((tgt_len, n), dtype=np.float64)
    for b, (src, tgt) in enumerate(pairs):
        src = list(src)[:src_len]
        tgt = list(tgt)[: tgt_len - 2]
        padded = src + [PAD_ID] * (src_len - len(src))
        encoder_ids[:, b] = padded[::-1]
        decoder_ids[: len(tgt) + 2, b] = [GO_ID] + tgt + [EOS_ID]
        target_weights[: len(tgt) + 1, b] = 1.0
    return Batch(bucket_index, encoder_ids, decoder_ids, target_weights)


def assemble_batch(pool, bucket_index: int, spec: BucketSpec, batch_size: int, rng) -> Batch:
    """Sample ``batch_size`` pairs uniformly (with replacement) from the pool."""
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    pool = list(pool)
    if not pool:
        raise ValueError(f"bucket {bucket_index} has an empty training pool")
    idx = rng.integers(0, len(pool), size=batch_size)
    return make_batch([pool[i] for i in idx], bucket_index, spec)


def encode_pairs(pairs, vocab: Vocabulary) -> list[tuple[list[int], list[int]]]:
    """Tokenize and encode (article, summary) text pairs into id pairs."""
    return [
        (vocab.encode(tokenize(p.article)), vocab.encode(tokenize(p.summary)))
        for p in pairs
    ]


def bucketize(encoded_pairs, spec: BucketSpec) -> list[list[tuple[list[int], list[int]]]]:
    """Group encoded pairs into per-bucket pools (over-long pairs go to the last)."""
    pools: list[list[tuple[list[int], list[int]]]] = [[] for _ in spec.buckets]
    for src, tgt in encoded_pairs:
        i, _ = assign_bucket(len(src), len(tgt), spec)
        pools[i].append((src, tgt))
    return pools

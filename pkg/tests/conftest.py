import numpy as np
import pytest

from banglasum.corpus import ArticleSummaryPair, RawRecord
from banglasum.seq2seq import ModelConfig
from banglasum.textproc import BucketSpec

# Common Bengali news words for synthetic corpora.
BENGALI_WORDS = [
    "আজকের", "সংবাদ", "খবর", "দেশের", "নতুন", "মানুষ", "সরকার", "শহরে",
    "আগুন", "পুলিশ", "নদীতে", "শিশুর", "মৃত্যু", "উদ্ধার", "নির্বাচন",
    "বাজারে", "দাম", "বৃষ্টি", "ঝড়ে", "ক্রিকেট", "দলের", "জয়", "হাসপাতালে",
    "চিকিৎসা", "সড়ক", "দুর্ঘটনা", "গ্রামে", "স্কুল", "শিক্ষক", "পরীক্ষা",
]


def desk_config(**overrides) -> ModelConfig:
    """Desk-scale model: vocab 50, embed 16, hidden 32, one (10, 5) bucket."""
    base = dict(
        vocab_size=50,
        embed_dim=16,
        hidden_dim=32,
        buckets=BucketSpec(((10, 5),)),
        batch_size=4,
        steps_per_checkpoint=10,
        max_steps=20,
        seed=0,
    )
    base.update(overrides)
    return ModelConfig(**base)


def random_id_pairs(n, rng, src_len=(3, 9), tgt_len=(1, 3), vocab=50):
    """Encoded (source, target) id pairs over the non-special id range."""
    pairs = []
    for _ in range(n):
        slen = int(rng.integers(src_len[0], src_len[1] + 1))
        tlen = int(rng.integers(tgt_len[0], tgt_len[1] + 1))
        src = [int(x) for x in rng.integers(4, vocab, size=slen)]
        tgt = [int(x) for x in rng.integers(4, vocab, size=tlen)]
        pairs.append((src, tgt))
    return pairs


def bengali_sentence(rng, n_words):
    return " ".join(BENGALI_WORDS[int(i)] for i in rng.integers(0, len(BENGALI_WORDS), size=n_words))


def toy_pairs(n, seed=0):
    """Already-clean article/summary pairs."""
    rng = np.random.default_rng(seed)
    return [
        ArticleSummaryPair(
            bengali_sentence(rng, int(rng.integers(5, 30))),
            bengali_sentence(rng, int(rng.integers(3, 10))),
        )
        for _ in range(n)
    ]


def toy_raw_records(n, seed=0):
    """Raw records salted with the garbage the cleaner must strip."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        art = bengali_sentence(rng, int(rng.integers(6, 30)))
        summ = bengali_sentence(rng, int(rng.integers(3, 10)))
        if i % 3 == 0:
            art = f"{art} https://bangla.example.com/{i} Sports"
        if i % 5 == 0:
            art = art.replace(" ", "   ", 1) + " \x07"
        records.append(RawRecord(art, summ, source_id=f"rec-{i}"))
    return records


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

#!/usr/bin/env python3
"""Generate a synthetic Bengali raw dump for exercising the pipeline.

The real corpus is a separate download; this produces records with the
same file shape (article_text / summary_text / source_id JSON lines),
salted with the kinds of garbage the cleaner removes: URLs, Latin
fragments, control characters and ragged whitespace.

Usage:
    python scripts/make_toy_corpus.py --n 500 --out raw.jsonl --seed 0
"""

import argparse

import numpy as np

from banglasum.corpus import RawRecord, save_raw_dump

WORDS = [
    "আজকের", "সংবাদ", "খবর", "দেশের", "নতুন", "মানুষ", "সরকার", "শহরে",
    "আগুন", "পুলিশ", "নদীতে", "শিশুর", "মৃত্যু", "উদ্ধার", "নির্বাচন",
    "বাজারে", "দাম", "বৃষ্টি", "ঝড়ে", "ক্রিকেট", "দলের", "জয়", "হাসপাতালে",
    "চিকিৎসা", "সড়ক", "দুর্ঘটনা", "গ্রামে", "স্কুল", "শিক্ষক", "পরীক্ষা",
    "বন্যা", "ত্রাণ", "অভিযান", "মামলা", "আদালত", "রায়", "প্রতিবাদ", "সভা",
]

GARBAGE = [
    " https://bangla.example.com/news/{i}",
    " Sports Update",
    " \x07\x08",
    " Read   More  www.example.com",
]


def sentence(rng, n):
    return " ".join(WORDS[int(i)] for i in rng.integers(0, len(WORDS), size=n))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=500, help="number of records")
    parser.add_argument("--out", required=True, help="output raw dump path")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    records = []
    for i in range(args.n):
        article = sentence(rng, int(rng.integers(6, 40)))
        summary = sentence(rng, int(rng.integers(3, 10)))
        if i % 3 == 0:
            article += GARBAGE[int(rng.integers(0, len(GARBAGE)))].format(i=i)
        records.append(RawRecord(article, summary, source_id=f"toy-{i}"))
    save_raw_dump(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")


if __name__ == "__main__":
    main()

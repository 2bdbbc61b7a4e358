"""ROUGE-1, ROUGE-L and BLEU over token sequences, plus corpus reports.

Scores are macro-averaged: each candidate/reference pair is scored on
its own and the report carries arithmetic means.  BLEU is sentence
level, capped at the candidate length, with add-one smoothing for the
n >= 2 precisions (summaries are short; unsmoothed 4-gram BLEU would be
zero almost everywhere) while p1 stays unsmoothed so token-disjoint
outputs score 0.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float


def _triple(precision: float, recall: float) -> ScoreTriple:
    s = precision + recall
    f1 = 2.0 * precision * recall / s if s > 0 else 0.0
    return ScoreTriple(precision, recall, f1)


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate, reference, n: int = 1) -> ScoreTriple:
    """Clipped n-gram overlap precision/recall/F1."""
    if n < 1:
        raise ValueError("n must be at least 1")
    cand = _ngram_counts(list(candidate), n)
    ref = _ngram_counts(list(reference), n)
    match = sum(min(c, ref[g]) for g, c in cand.items())
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    precision = match / cand_total if cand_total else 0.0
    recall = match / ref_total if ref_total else 0.0
    return _triple(precision, recall)


def lcs_length(a, b) -> int:
    """Longest common subsequence length by dynamic programming."""
    a, b = list(a), list(b)
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[len(b)]


def rouge_l(candidate, reference) -> ScoreTriple:
    """LCS-based precision/recall/F1."""
    cand, ref = list(candidate), list(reference)
    length = lcs_length(cand, ref)
    precision = length / len(cand) if cand else 0.0
    recall = length / len(ref) if ref else 0.0
    return _triple(precision, recall)


def bleu(candidate, reference, max_n: int = 4) -> float:
    """Sentence BLEU with brevity penalty.

    Uses N = min(max_n, |candidate|) n-gram orders; modified precision
    with reference clipping; (match+1)/(total+1) smoothing for n >= 2;
    returns 0 when the unigram precision is 0 or the candidate is empty.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    cand, ref = list(candidate), list(reference)
    if not cand:
        return 0.0
    n_orders = min(max_n, len(cand))
    log_sum = 0.0
    for n in range(1, n_orders + 1):
        counts = _ngram_counts(cand, n)
        ref_counts = _ngram_counts(ref, n)
        match = sum(min(c, ref_counts[g]) for g, c in counts.items())
        total = sum(counts.values())
        if n == 1:
            if match == 0:
                return 0.0
            p = match / total
        else:
            p = (match + 1) / (total + 1)
        log_sum += math.log(p)
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return bp * math.exp(log_sum / n_orders)


@dataclass(frozen=True)
class EvalRow:
    index: int
    rouge1: ScoreTriple
    rougeL: ScoreTriple
    bleu: float


@dataclass(frozen=True)
class EvalReport:
    n_examples: int
    rouge1: ScoreTriple  # means over examples
    rougeL: ScoreTriple
    bleu: float
    rows: tuple[EvalRow, ...]


def _mean_triple(triples) -> ScoreTriple:
    n = len(triples)
    return ScoreTriple(
        sum(t.precision for t in triples) / n,
        sum(t.recall for t in triples) / n,
        sum(t.f1 for t in triples) / n,
    )


def evaluate_corpus(candidates, references) -> EvalReport:
    """Per-example ROUGE-1 / ROUGE-L / BLEU with macro-averaged means."""
    candidates, references = list(candidates), list(references)
    if len(candidates) != len(references):
        raise ValueError(
            f"candidate/reference count mismatch: {len(candidates)} vs {len(references)}"
        )
    if not candidates:
        raise ValueError("cannot evaluate an empty corpus")
    rows = tuple(
        EvalRow(i, rouge_n(c, r, 1), rouge_l(c, r), bleu(c, r))
        for i, (c, r) in enumerate(zip(candidates, references))
    )
    return EvalReport(
        n_examples=len(rows),
        rouge1=_mean_triple([row.rouge1 for row in rows]),
        rougeL=_mean_triple([row.rougeL for row in rows]),
        bleu=sum(row.bleu for row in rows) / len(rows),
        rows=rows,
    )


_REPORT_HEADER = "# index\trouge1_p\trouge1_r\trouge1_f1\trougeL_p\trougeL_r\trougeL_f1\tbleu"


def save_report(report: EvalReport, path) -> None:
    """Write per-example rows then one "mean" row, tab-separated."""
    def fields(r1: ScoreTriple, rl: ScoreTriple, b: float) -> str:
        vals = [r1.precision, r1.recall, r1.f1, rl.precision, rl.recall, rl.f1, b]
        return "\t".join(repr(v) for v in vals)

    with open(path, "w", encoding="utf-8") as f:
        f.write(_REPORT_HEADER + "\n")
        for row in report.rows:
            f.write(f"{row.index}\t{fields(row.rouge1, row.rougeL, row.bleu)}\n")
        f.write(f"mean\t{fields(report.rouge1, report.rougeL, report.bleu)}\n")

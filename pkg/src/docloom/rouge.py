"""ROUGE-N and ROUGE-L scoring.

Texts are tokenized with the shared lowercase alphanumeric tokenizer
(no stemming, no stopword removal). ROUGE-N uses clipped n-gram match
counts; ROUGE-L uses the token-level longest common subsequence with a
recall-weighted F measure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .embed import tokenize
from .errors import InvalidParamsError

DEFAULT_BETA = 1.2  # mild recall bias


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f: float


@dataclass(frozen=True)
class RougeConfig:
    beta: float = DEFAULT_BETA
    n_values: tuple[int, ...] = (1, 2)

    def __post_init__(self):
        if self.beta <= 0:
            raise InvalidParamsError(f"beta must be > 0, got {self.beta}")
        if any(n < 1 for n in self.n_values):
            raise InvalidParamsError(f"n values must be >= 1, got {self.n_values}")


def ngrams(tokens: list[str], n: int) -> Counter:
    """All contiguous n-token windows, with multiplicity."""
    if n < 1:
        raise InvalidParamsError(f"n must be >= 1, got {n}")
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _f_measure(recall: float, precision: float, beta: float) -> float:
    denom = recall + beta * beta * precision
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * recall * precision / denom


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """Clipped n-gram overlap: recall against the reference, precision
    against the candidate, F as their harmonic mean."""
    cand_grams = ngrams(tokenize(candidate), n)
    ref_grams = ngrams(tokenize(reference), n)
    match = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
    total_ref = sum(ref_grams.values())
    total_cand = sum(cand_grams.values())
    recall = match / total_ref if total_ref else 0.0
    precision = match / total_cand if total_cand else 0.0
    return RougeScore(recall, precision, _f_measure(recall, precision, 1.0))


def lcs_length(x: list[str], y: list[str]) -> int:
    """Longest common subsequence length; O(m*n) time, O(min(m, n)) space."""
    if len(x) < len(y):
        x, y = y, x
    if not y:
        return 0
    prev = [0] * (len(y) + 1)
    for xi in x:
        cur = [0] * (len(y) + 1)
        for j, yj in enumerate(y, start=1):
            if xi == yj:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str, beta: float = DEFAULT_BETA) -> RougeScore:
    """LCS-based recall (vs reference length), precision (vs candidate
    length), and the beta-weighted F measure; beta > 1 favors recall."""
    if beta <= 0:
        raise InvalidParamsError(f"beta must be > 0, got {beta}")
    ref_tokens = tokenize(reference)
    cand_tokens = tokenize(candidate)
    if not ref_tokens or not cand_tokens:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = lcs_length(ref_tokens, cand_tokens)
    recall = lcs / len(ref_tokens)
    precision = lcs / len(cand_tokens)
    return RougeScore(recall, precision, _f_measure(recall, precision, beta))

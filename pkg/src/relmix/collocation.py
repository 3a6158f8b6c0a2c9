"""Word and word-pair frequencies from n-gram count files, and the
collocation indices built on them.

The collocation index of an ordered pair is 2#(w1w2) / (#(w1) + #(w2)).
It is not a relatedness measure (a word paired with itself does not score
1), but its high range tracks human judgments well enough to act as a
multiplicative correction. The mixed index also credits the reversed-order
bigram, scaled by xi.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional


class CollocationError(Exception):
    pass


@dataclass
class NgramTable:
    unigram: dict[str, int] = field(default_factory=dict)
    bigram: dict[tuple[str, str], int] = field(default_factory=dict)
    min_year: int = 1970

    def unigram_count(self, w: str) -> int:
        return self.unigram.get(w.lower(), 0)

    def bigram_count(self, w1: str, w2: str) -> int:
        return self.bigram.get((w1.lower(), w2.lower()), 0)


def _iter_rows(lines: Iterable[str], diagnostics: Counter):
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            diagnostics["malformed_row"] += 1
            continue
        try:
            year = int(parts[1])
            count = int(parts[2])
        except ValueError:
            diagnostics["malformed_row"] += 1
            continue
        yield parts[0], year, count


def load_ngrams(
    unigram_lines: Iterable[str],
    bigram_lines: Iterable[str],
    min_year: int = 1970,
    vocabulary: Optional[set[str]] = None,
    extra_pairs: Optional[set[tuple[str, str]]] = None,
    diagnostics: Optional[Counter] = None,
) -> NgramTable:
    """Accumulate counts from TSV rows ``ngram<TAB>year<TAB>match_count[<TAB>...]``.

    Rows are case-folded and kept only for years strictly after `min_year`.
    When a vocabulary is given, only its words (plus `extra_pairs`) are
    retained; the full bigram corpus would not fit in memory otherwise.
    Malformed rows are skipped and counted in `diagnostics`.
    """
    if diagnostics is None:
        diagnostics = Counter()
    if vocabulary is not None:
        vocabulary = {w.lower() for w in vocabulary}
        for a, b in extra_pairs or ():
            vocabulary.add(a.lower())
            vocabulary.add(b.lower())
    pair_filter = (
        {(a.lower(), b.lower()) for a, b in extra_pairs} if extra_pairs else set()
    )

    table = NgramTable(min_year=min_year)
    for gram, year, count in _iter_rows(unigram_lines, diagnostics):
        if year <= min_year:
            continue
        word = gram.lower()
        if vocabulary is not None and word not in vocabulary:
            continue
        table.unigram[word] = table.unigram.get(word, 0) + count
    for gram, year, count in _iter_rows(bigram_lines, diagnostics):
        if year <= min_year:
            continue
        words = gram.lower().split(" ")
        if len(words) != 2:
            diagnostics["malformed_row"] += 1
            continue
        pair = (words[0], words[1])
        if vocabulary is not None:
            if not (pair[0] in vocabulary and pair[1] in vocabulary) and pair not in pair_filter:
                continue
        table.bigram[pair] = table.bigram.get(pair, 0) + count
    return table


def collocation_index(table: NgramTable, w1: str, w2: str) -> float:
    """2#(w1 w2) / (#(w1) + #(w2)), in the given order."""
    denom = table.unigram_count(w1) + table.unigram_count(w2)
    if denom == 0:
        raise CollocationError(f"no frequency data for {w1!r} / {w2!r}")
    return 2.0 * table.bigram_count(w1, w2) / denom


def mixed_collocation(table: NgramTable, w1: str, w2: str, xi: float) -> float:
    """Direct collocation index plus `xi` times the reversed-order index."""
    denom = table.unigram_count(w1) + table.unigram_count(w2)
    if denom == 0:
        raise CollocationError(f"no frequency data for {w1!r} / {w2!r}")
    return (2.0 * table.bigram_count(w1, w2) + xi * 2.0 * table.bigram_count(w2, w1)) / denom


def export_counts(table: NgramTable, path: str) -> None:
    """Audit export: unigrams as ``w<TAB>count``, bigrams as ``w1 w2<TAB>count``."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(table.unigram):
            fh.write(f"{word}\t{table.unigram[word]}\n")
        for w1, w2 in sorted(table.bigram):
            fh.write(f"{w1} {w2}\t{table.bigram[(w1, w2)]}\n")

"""Evaluation against human word-pair judgments.

Spearman rank correlation is the headline statistic; the rest of the module
measures how fragile it is: leave-one-out deltas per pair, the correlation
as low-scoring pairs are progressively removed, and robust LOWESS trend
lines for score-vs-judgment scatter plots. All statistics here are pure
functions of the score/judgment lists.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class WordPair:
    w1: str
    w2: str
    gold: float


@dataclass
class EvalReport:
    pairs: list[WordPair]
    scores: list[float]
    rho: float
    stability: list[float]  # leave-one-out delta rho, aligned with pairs
    removal_curve: list[tuple[int, float]]
    skipped: list[tuple[WordPair, str]] = field(default_factory=list)


def load_test_set(path: str, dedupe: bool = False) -> list[WordPair]:
    """Read TSV rows ``word1<TAB>word2<TAB>score`` (optional header).

    Row order and duplicate pairs are preserved unless `dedupe` keeps only
    the first occurrence. Malformed rows fail with their line number.
    """
    pairs: list[WordPair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
            try:
                gold = float(parts[2])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"{path}:{lineno}: bad score {parts[2]!r}") from None
            pairs.append(WordPair(parts[0].strip(), parts[1].strip(), gold))
    if not pairs:
        raise ValueError(f"{path}: no word pairs found")
    if dedupe:
        seen = set()
        unique = []
        for p in pairs:
            key = frozenset((p.w1.lower(), p.w2.lower()))
            if key not in seen:
                seen.add(key)
                unique.append(p)
        pairs = unique
    return pairs


def duplicate_pairs(pairs: Sequence[WordPair]) -> list[tuple[str, str]]:
    """Unordered pairs that occur more than once, in first-seen order."""
    seen: dict[frozenset, int] = {}
    dupes = []
    for p in pairs:
        key = frozenset((p.w1.lower(), p.w2.lower()))
        seen[key] = seen.get(key, 0) + 1
        if seen[key] == 2:
            dupes.append((p.w1, p.w2))
    return dupes


def _ranks(values: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of fractional ranks."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("need at least two observations")
    rx = _ranks(np.asarray(xs, dtype=np.float64))
    ry = _ranks(np.asarray(ys, dtype=np.float64))
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    if denom == 0.0:
        raise ValueError("rank correlation undefined: zero rank variance")
    return float(np.dot(rx, ry) / denom)


def leave_one_out_stability(
    scores: Sequence[float], golds: Sequence[float]
) -> list[float]:
    """Per-pair change of the correlation when that pair is removed."""
    if len(scores) != len(golds):
        raise ValueError("length mismatch")
    n = len(scores)
    if n < 3:
        raise ValueError("need at least three pairs")
    base = spearman(scores, golds)
    deltas = []
    for i in range(n):
        xs = [s for j, s in enumerate(scores) if j != i]
        ys = [g for j, g in enumerate(golds) if j != i]
        deltas.append(spearman(xs, ys) - base)
    return deltas


def progressive_removal(
    scores: Sequence[float], golds: Sequence[float]
) -> list[tuple[int, float]]:
    """Correlation after dropping the k lowest-scoring pairs, k = 0..n-3.

    Ties in the score order are broken by input position.
    """
    n = len(scores)
    if n < 3:
        raise ValueError("need at least three pairs")
    order = sorted(range(n), key=lambda i: (scores[i], i))
    curve = []
    for k in range(n - 2):
        keep = sorted(order[k:])
        curve.append((k, spearman([scores[i] for i in keep], [golds[i] for i in keep])))
    return curve


def lowess(
    points: Sequence[tuple[float, float]], span: float = 2.0 / 3.0, iterations: int = 3
) -> list[float]:
    """Robust locally weighted linear regression (Cleveland's procedure).

    Fits each point from its span-nearest neighbors with tricube weights;
    `iterations` bisquare reweightings damp outliers. Returns fitted values
    aligned with the input order; the fit itself does not depend on input
    order.
    """
    if not 0.0 < span <= 1.0:
        raise ValueError("span must lie in (0, 1]")
    n = len(points)
    if n < 2:
        raise ValueError("need at least two points")
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    if np.all(xs == xs[0]):
        raise ValueError("need at least two distinct x values")

    order = np.argsort(xs, kind="stable")
    x, y = xs[order], ys[order]
    k = min(max(int(span * n + 1e-10), 2), n)
    fitted = np.zeros(n)
    robustness = np.ones(n)
    for round_ in range(iterations + 1):
        left, right = 0, k
        for i in range(n):
            while right < n and x[right] - x[i] < x[i] - x[left]:
                left += 1
                right += 1
            h = max(x[i] - x[left], x[right - 1] - x[i])
            seg = slice(left, right)
            if h <= 0.0:
                w = np.ones(right - left)
            else:
                w = (1.0 - np.minimum(np.abs(x[seg] - x[i]) / h, 1.0) ** 3) ** 3
            w = w * robustness[seg]
            sw = w.sum()
            if sw <= 0.0:
                fitted[i] = y[i]
                continue
            mx = np.dot(w, x[seg]) / sw
            my = np.dot(w, y[seg]) / sw
            sxx = np.dot(w, (x[seg] - mx) ** 2)
            if sxx <= 0.0:
                fitted[i] = my
            else:
                slope = np.dot(w, (x[seg] - mx) * (y[seg] - my)) / sxx
                fitted[i] = my + slope * (x[i] - mx)
        if round_ == iterations:
            break
        residuals = y - fitted
        s = np.median(np.abs(residuals))
        if s == 0.0:
            robustness = np.ones(n)
        else:
            t = np.clip(residuals / (6.0 * s), -1.0, 1.0)
            robustness = (1.0 - t**2) ** 2
    out = np.empty(n)
    out[order] = fitted
    return out.tolist()


def evaluate_measure(
    pairs: Sequence[WordPair],
    score_fn: Callable[[str, str], float],
    skip_failures: bool = False,
) -> EvalReport:
    """Score every pair once, then compute the correlation, the per-pair
    stability deltas and the removal curve from the assembled lists."""
    scored_pairs: list[WordPair] = []
    scores: list[float] = []
    skipped: list[tuple[WordPair, str]] = []
    for pair in pairs:
        try:
            scores.append(float(score_fn(pair.w1, pair.w2)))
            scored_pairs.append(pair)
        except Exception as exc:
            if not skip_failures:
                raise
            skipped.append((pair, str(exc)))
    golds = [p.gold for p in scored_pairs]
    rho = spearman(scores, golds)
    return EvalReport(
        pairs=scored_pairs,
        scores=scores,
        rho=rho,
        stability=leave_one_out_stability(scores, golds),
        removal_curve=progressive_removal(scores, golds),
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# CSV artifacts
# ---------------------------------------------------------------------------


def write_stability_csv(report: EvalReport, path: str, config_hash: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(["pair", "score", "gold", "delta_rho"])
        for pair, score, delta in zip(report.pairs, report.scores, report.stability):
            writer.writerow([f"{pair.w1} / {pair.w2}", repr(score), repr(pair.gold),
                             repr(delta)])


def write_removal_csv(report: EvalReport, path: str, config_hash: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(["k", "rho"])
        for k, rho in report.removal_curve:
            writer.writerow([k, repr(rho)])


def write_lowess_csv(
    points: Sequence[tuple[float, float]],
    path: str,
    span: float = 2.0 / 3.0,
    iterations: int = 3,
    config_hash: str = "",
) -> None:
    fitted = lowess(points, span=span, iterations=iterations)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write(f"# lowess span={span} iterations={iterations}\n")
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "yhat"])
        for (x, y), yhat in zip(points, fitted):
            writer.writerow([repr(x), repr(y), repr(yhat)])

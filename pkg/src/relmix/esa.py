"""Inverted tfidf index over encyclopedia pages and the concept-vector
cosine measure.

Every page is one concept. A term's concept vector holds its normalized
tfidf weight in each concept; the relatedness of two words is the cosine of
their concept vectors.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .corpus import Page
from .textpipe import PosToken, load_stopwords, normalize_pos, normalize_stemmed, tokenize

MAGIC = b"RMIX"
FORMAT_VERSION = 1


class EsaIndexError(Exception):
    """Raised for unusable index inputs or corrupt index files."""


@dataclass
class SparseVector:
    ids: np.ndarray  # concept ids, strictly increasing
    weights: np.ndarray  # positive weights, parallel to ids

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.empty(0, dtype=np.uint32), np.empty(0, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.ids)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.weights, self.weights)))

    def dot(self, other: "SparseVector") -> float:
        if not len(self) or not len(other):
            return 0.0
        common, ia, ib = np.intersect1d(self.ids, other.ids, assume_unique=True,
                                        return_indices=True)
        if not len(common):
            return 0.0
        return float(np.dot(self.weights[ia], other.weights[ib]))


def cosine(a: SparseVector, b: SparseVector) -> float:
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return a.dot(b) / (na * nb)


@dataclass
class InvertedIndex:
    postings: dict[str, SparseVector]
    df: dict[str, int]
    concept_count: int
    page_ids: list[int]
    titles: list[str]
    metadata: dict = field(default_factory=dict)

    @property
    def term_count(self) -> int:
        return len(self.postings)


@dataclass
class IndexStats:
    concept_count: int
    terms_per_concept: float
    term_count: int
    mean_document_frequency: float
    term_density: float


def _page_term_lists(
    page: Page,
    mode: str,
    stopwords,
    pos_sentences: Optional[list[list[PosToken]]],
) -> list[list[str]]:
    """One term list per sentence, in page sentence order."""
    if mode == "stemmed":
        return [normalize_stemmed(tokenize(s), stopwords) for s in page.sentences()]
    pos_mode = "noun-only" if mode == "pos-noun" else "noun-verb-adj"
    if pos_sentences is None:
        raise EsaIndexError(f"mode {mode!r} needs POS annotations for page {page.id}")
    return [normalize_pos(sent, pos_mode) for sent in pos_sentences]


def build_index(
    pages: Iterable[Page],
    stopwords=None,
    mode: str = "stemmed",
    pos_annotations: Optional[dict[int, list[list[PosToken]]]] = None,
    sentence_weights: Optional[dict[int, list[int]]] = None,
    tf_scheme: str = "raw",
    normalization: str = "concept-l2",
    top_k: int = 0,
    extra_metadata: Optional[dict] = None,
) -> InvertedIndex:
    """Build the term -> concept-vector index from already-filtered pages.

    weight(t, c) = tf(t, c) * ln(N / df(t)), with per-concept L2 normalization
    by default. tf is the raw occurrence count, multiplied by the sentence
    weight when `sentence_weights` maps the page id to per-sentence factors.
    Terms occurring in every concept get idf 0 and are not indexed.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    if tf_scheme not in ("raw", "log"):
        raise ValueError(f"unknown tf scheme: {tf_scheme!r}")
    if normalization not in ("concept-l2", "term-l2", "none"):
        raise ValueError(f"unknown normalization: {normalization!r}")

    pages = sorted(pages, key=lambda p: p.id)
    if not pages:
        raise EsaIndexError("empty corpus: no pages to index")

    tf_by_concept: list[dict[str, float]] = []
    df: dict[str, int] = {}
    for page in pages:
        pos_sentences = pos_annotations.get(page.id) if pos_annotations else None
        weights = sentence_weights.get(page.id) if sentence_weights else None
        counts: dict[str, float] = {}
        for s_idx, terms in enumerate(_page_term_lists(page, mode, stopwords, pos_sentences)):
            w = weights[s_idx] if weights is not None else 1
            for term in terms:
                counts[term] = counts.get(term, 0.0) + w
        tf_by_concept.append(counts)
        for term in counts:
            df[term] = df.get(term, 0) + 1

    n = len(pages)
    idf = {t: math.log(n / d) for t, d in df.items() if d < n}

    term_cids: dict[str, list[int]] = {}
    term_ws: dict[str, list[float]] = {}
    for cid, counts in enumerate(tf_by_concept):
        column = {}
        for term, tf in counts.items():
            if term not in idf:
                continue
            if tf_scheme == "log":
                tf = 1.0 + math.log(tf)
            column[term] = tf * idf[term]
        if normalization == "concept-l2":
            norm = math.sqrt(sum(w * w for w in column.values()))
            if norm > 0.0:
                column = {t: w / norm for t, w in column.items()}
        for term, w in column.items():
            term_cids.setdefault(term, []).append(cid)
            term_ws.setdefault(term, []).append(w)

    postings: dict[str, SparseVector] = {}
    for term in sorted(term_cids):
        ids = np.asarray(term_cids[term], dtype=np.uint32)
        ws = np.asarray(term_ws[term], dtype=np.float64)
        if normalization == "term-l2":
            norm = float(np.sqrt(np.dot(ws, ws)))
            if norm > 0.0:
                ws = ws / norm
        if top_k and len(ids) > top_k:
            keep = np.sort(np.argsort(ws, kind="stable")[-top_k:])
            ids, ws = ids[keep], ws[keep]
        postings[term] = SparseVector(ids, ws)

    metadata = {
        "mode": mode,
        "tf_scheme": tf_scheme,
        "normalization": normalization,
        "top_k": top_k,
        "tokenizer": "lowercase-letter-runs",
        "idf": "natural-log",
    }
    if extra_metadata:
        metadata.update(extra_metadata)
    return InvertedIndex(
        postings=postings,
        df={t: df[t] for t in postings},
        concept_count=n,
        page_ids=[p.id for p in pages],
        titles=[p.title for p in pages],
        metadata=metadata,
    )


def normalize_query_word(index: InvertedIndex, word: str) -> Optional[str]:
    """Apply the index's own pipeline to a query word; None when it
    normalizes away (stop word, too short)."""
    if index.metadata.get("mode", "stemmed") == "stemmed":
        terms = normalize_stemmed(tokenize(word))
        return terms[0] if terms else None
    lemma = word.strip().lower()
    return lemma if lemma and lemma not in load_stopwords() else None


def concept_vector(index: InvertedIndex, word: str) -> SparseVector:
    """The stored sparse vector for a word; empty when unknown."""
    term = normalize_query_word(index, word)
    if term is None:
        return SparseVector.empty()
    return index.postings.get(term, SparseVector.empty())


def esa(index: InvertedIndex, w1: str, w2: str) -> float:
    """Cosine of the two words' concept vectors; 0 when either is empty."""
    return cosine(concept_vector(index, w1), concept_vector(index, w2))


def index_stats(index: InvertedIndex) -> IndexStats:
    n_terms = index.term_count
    total_df = sum(index.df.values())
    mean_df = total_df / n_terms if n_terms else 0.0
    return IndexStats(
        concept_count=index.concept_count,
        terms_per_concept=total_df / index.concept_count,
        term_count=n_terms,
        mean_document_frequency=mean_df,
        term_density=mean_df / index.concept_count if index.concept_count else 0.0,
    )


def format_stats(stats: IndexStats) -> str:
    rows = [
        ("concepts", f"{stats.concept_count:,}"),
        ("terms/concept", f"{stats.terms_per_concept:.4f}"),
        ("terms", f"{stats.term_count:,}"),
        ("mean df", f"{stats.mean_document_frequency:.4f}"),
        ("term density", f"{stats.term_density:.5f}"),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


# ---------------------------------------------------------------------------
# Persistence: little-endian binary file plus a text export for diffing
# ---------------------------------------------------------------------------


def save_index(index: InvertedIndex, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        meta = json.dumps(index.metadata, sort_keys=True, ensure_ascii=False).encode("utf-8")
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)
        fh.write(struct.pack("<I", index.concept_count))
        for pid, title in zip(index.page_ids, index.titles):
            raw = title.encode("utf-8")
            fh.write(struct.pack("<QH", pid, len(raw)))
            fh.write(raw)
        fh.write(struct.pack("<I", index.term_count))
        for term in sorted(index.postings):
            vec = index.postings[term]
            raw = term.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", index.df[term], len(vec)))
            fh.write(vec.ids.astype("<u4").tobytes())
            fh.write(vec.weights.astype("<f8").tobytes())


def load_index(path: str) -> InvertedIndex:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise EsaIndexError(f"{path}: not an index file (bad magic)")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != FORMAT_VERSION:
            raise EsaIndexError(f"{path}: unsupported index version {version}")
        (meta_len,) = struct.unpack("<I", fh.read(4))
        metadata = json.loads(fh.read(meta_len).decode("utf-8"))
        (concept_count,) = struct.unpack("<I", fh.read(4))
        page_ids, titles = [], []
        for _ in range(concept_count):
            pid, tlen = struct.unpack("<QH", fh.read(10))
            page_ids.append(pid)
            titles.append(fh.read(tlen).decode("utf-8"))
        (term_count,) = struct.unpack("<I", fh.read(4))
        postings, df = {}, {}
        for _ in range(term_count):
            (tlen,) = struct.unpack("<H", fh.read(2))
            term = fh.read(tlen).decode("utf-8")
            d, n = struct.unpack("<II", fh.read(8))
            ids = np.frombuffer(fh.read(4 * n), dtype="<u4").astype(np.uint32)
            ws = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(np.float64)
            postings[term] = SparseVector(ids, ws)
            df[term] = d
    return InvertedIndex(postings, df, concept_count, page_ids, titles, metadata)


def export_index_text(index: InvertedIndex, path: str) -> None:
    """Debug export: ``term<TAB>conceptId:weight,...`` with full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for term in sorted(index.postings):
            vec = index.postings[term]
            cells = ",".join(f"{c}:{w!r}" for c, w in zip(vec.ids.tolist(),
                                                          vec.weights.tolist()))
            fh.write(f"{term}\t{cells}\n")

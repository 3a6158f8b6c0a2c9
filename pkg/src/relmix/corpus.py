"""Encyclopedia dump ingestion: streaming XML parsing, wikitext cleaning,
link statistics, page filtering, sentence weighting and section pruning.

The dump is read once, page by page, in constant memory. Cleaning and
filtering operate on independent pages; link statistics need the full page
set plus the redirect map.
"""

from __future__ import annotations

import html
import json
import re
import xml.etree.ElementTree as etree
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, NamedTuple, Optional, Union

from .textpipe import PosToken, normalize_stemmed, tokenize


class DumpError(Exception):
    """Malformed or truncated dump input."""


class FilterCriteria(NamedTuple):
    min_terms: int
    min_links: int


@dataclass
class Section:
    heading: str  # empty for the lead section
    sentences: list[str] = field(default_factory=list)
    past_tense_ratio: Optional[float] = None


@dataclass
class Page:
    id: int
    title: str
    namespace: int = 0
    redirect_target: Optional[str] = None
    text: Optional[str] = None  # raw markup until cleaned
    sections: list[Section] = field(default_factory=list)
    link_targets: list[tuple[str, str]] = field(default_factory=list)
    anchors_in: list[str] = field(default_factory=list)
    links_in: int = 0
    links_out: int = 0

    @property
    def is_redirect(self) -> bool:
        return self.redirect_target is not None

    def sentences(self) -> Iterator[str]:
        for section in self.sections:
            yield from section.sentences

    def plain_text(self) -> str:
        return " ".join(self.sentences())


class _CountingReader:
    """Wraps a binary stream and remembers how many bytes were handed out."""

    def __init__(self, raw: IO[bytes]):
        self.raw = raw
        self.bytes_read = 0

    def read(self, size: int = -1) -> bytes:
        chunk = self.raw.read(size)
        self.bytes_read += len(chunk)
        return chunk


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_dump(source: Union[str, IO[bytes]]) -> Iterator[Page]:
    """Stream pages out of a MediaWiki XML export.

    Yields one raw (uncleaned) Page per ``<page>`` element, redirects included
    and flagged. Memory use is bounded by the largest single page. Malformed
    XML raises DumpError with the approximate byte offset; a truncated dump
    raises after the last complete page.
    """
    if isinstance(source, str):
        with open(source, "rb") as fh:
            yield from parse_dump(fh)
        return

    reader = _CountingReader(source)
    root = None
    current: Optional[Page] = None
    in_revision = False
    try:
        for event, elem in etree.iterparse(reader, events=("start", "end")):
            tag = _local(elem.tag)
            if event == "start":
                if root is None:
                    root = elem
                if tag == "page":
                    current = Page(id=-1, title="")
                elif tag == "revision":
                    in_revision = True
                continue
            if current is None:
                continue
            if tag == "title":
                current.title = elem.text or ""
            elif tag == "ns":
                current.namespace = int(elem.text or 0)
            elif tag == "id" and not in_revision and current.id < 0:
                current.id = int(elem.text)
            elif tag == "redirect":
                current.redirect_target = elem.get("title") or (elem.text or "")
            elif tag == "text":
                current.text = elem.text or ""
            elif tag == "revision":
                in_revision = False
            elif tag == "page":
                if current.redirect_target is None and current.text:
                    m = _REDIRECT_RE.match(current.text)
                    if m:
                        current.redirect_target = m.group(1).split("|")[0].strip()
                yield current
                current = None
                if root is not None:
                    root.clear()
    except etree.ParseError as exc:
        raise DumpError(
            f"malformed or truncated XML near byte {reader.bytes_read}: {exc}"
        ) from exc


_REDIRECT_RE = re.compile(r"\s*#REDIRECT\s*\[\[([^\]]+)\]\]", re.IGNORECASE)


# ---------------------------------------------------------------------------
# Wikitext cleaning
# ---------------------------------------------------------------------------

_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_REF_RE = re.compile(r"<ref[^>/]*/\s*>|<ref[^>]*>.*?</ref\s*>", re.DOTALL | re.IGNORECASE)
_DROP_TAG_RE = re.compile(
    r"<(nowiki|math|code|source|gallery|timeline|pre|syntaxhighlight)[^>]*>.*?</\1\s*>",
    re.DOTALL | re.IGNORECASE,
)
_TEMPLATE_RE = re.compile(r"\{\{[^{}]*\}\}", re.DOTALL)
_TABLE_RE = re.compile(r"\{\|(?:(?!\{\|).)*?\|\}", re.DOTALL)
_EXTLINK_RE = re.compile(r"\[(?:https?|ftp)://[^\s\]]*\s*([^\]]*)\]")
_HTML_TAG_RE = re.compile(r"</?[a-zA-Z][^>]*>")
_HEADING_RE = re.compile(r"^(={2,6})\s*(.*?)\s*=+\s*$")
_QUOTES_RE = re.compile(r"''+")
_MAGIC_RE = re.compile(r"__[A-Z]+__")
_LIST_MARKER_RE = re.compile(r"^[*#:;]+\s*", re.MULTILINE)

_MEDIA_PREFIXES = ("file:", "image:", "media:")
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def normalize_title(target: str) -> str:
    target = target.split("#", 1)[0].replace("_", " ").strip()
    if not target:
        return ""
    return target[0].upper() + target[1:]


def _replace_internal_links(text: str, links: list[tuple[str, str]], diagnostics: Counter) -> str:
    """Resolve ``[[target|anchor]]`` constructs, innermost first."""
    out = []
    pos = 0
    n = len(text)
    while True:
        start = text.find("[[", pos)
        if start < 0:
            out.append(text[pos:])
            break
        out.append(text[pos:start])
        depth = 1
        i = start + 2
        while i < n and depth:
            if text.startswith("[[", i):
                depth += 1
                i += 2
            elif text.startswith("]]", i):
                depth -= 1
                i += 2
            else:
                i += 1
        if depth:  # unbalanced: drop the opener and continue
            diagnostics["unbalanced_link"] += 1
            pos = start + 2
            continue
        inner = text[start + 2 : i - 2]
        lowered = inner.strip().lower()
        if lowered.startswith(_MEDIA_PREFIXES) or lowered.startswith("category:"):
            pos = i  # media and category links leave no running text or links
            continue
        if "[[" in inner:
            inner = _replace_internal_links(inner, links, diagnostics)
        target, _, anchor = inner.partition("|")
        anchor = anchor.rsplit("|", 1)[-1]
        if ":" in target:
            if anchor:
                out.append(anchor)
        else:
            display = anchor or target
            out.append(display)
            norm = normalize_title(target)
            if norm:
                links.append((norm, display))
        pos = i
    return "".join(out)


def clean_wikitext(markup: str, diagnostics: Optional[Counter] = None) -> tuple[
    list[Section], list[tuple[str, str]]
]:
    """Strip markup down to plain text split into sections.

    Returns (sections, outgoing links) where each link is (target title,
    anchor text). Templates, tables, references, categories and media
    inclusions are removed; unbalanced constructs are recovered from
    best-effort and counted in `diagnostics`.
    """
    if diagnostics is None:
        diagnostics = Counter()
    text = html.unescape(markup)
    text = _COMMENT_RE.sub("", text)
    text = _DROP_TAG_RE.sub(" ", text)
    text = _REF_RE.sub(" ", text)
    for pattern in (_TEMPLATE_RE, _TABLE_RE):
        for _ in range(40):
            text, n = pattern.subn(" ", text)
            if not n:
                break
    for leftover in ("{{", "}}", "{|", "|}"):
        if leftover in text:
            diagnostics["unbalanced_braces"] += 1
            text = text.replace(leftover, " ")

    links: list[tuple[str, str]] = []
    text = _replace_internal_links(text, links, diagnostics)
    text = _EXTLINK_RE.sub(lambda m: m.group(1), text)
    text = _QUOTES_RE.sub("", text)
    text = _HTML_TAG_RE.sub(" ", text)
    text = _MAGIC_RE.sub("", text)
    text = _LIST_MARKER_RE.sub("", text)

    sections = [Section(heading="")]
    for line in text.split("\n"):
        m = _HEADING_RE.match(line.strip())
        if m:
            sections.append(Section(heading=m.group(2)))
        else:
            stripped = " ".join(line.split())
            if stripped:
                sections[-1].sentences.extend(
                    s for s in _SENTENCE_RE.split(stripped) if s.strip()
                )
    sections = [s for s in sections if s.sentences or s.heading]
    if not sections:
        sections = [Section(heading="")]
    return sections, links


def clean_page(page: Page, diagnostics: Optional[Counter] = None) -> Page:
    """Fill sections and outgoing links from the raw markup, then drop it."""
    sections, links = clean_wikitext(page.text or "", diagnostics)
    page.sections = sections
    page.link_targets = links
    page.text = None
    return page


# ---------------------------------------------------------------------------
# Link statistics and filtering
# ---------------------------------------------------------------------------

_REDIRECT_DEPTH = 3


def resolve_redirects(redirects: dict[str, str], title: str) -> Optional[str]:
    """Follow a redirect chain up to depth 3; longer chains are abandoned."""
    seen = 0
    while title in redirects:
        title = normalize_title(redirects[title])
        seen += 1
        if seen > _REDIRECT_DEPTH:
            return None
    return title


def link_stats(pages: Iterable[Page], redirects: dict[str, str]) -> list[Page]:
    """Resolve links and fill links_in / links_out / anchors_in on every page.

    Only links whose resolved target exists among the given pages count, and
    self-links are ignored, so total links_out equals total links_in.
    """
    pages = list(pages)
    by_title = {p.title: p for p in pages}
    for page in pages:
        page.links_in = 0
        page.links_out = 0
        page.anchors_in = []
    for page in pages:
        for target, anchor in page.link_targets:
            resolved = resolve_redirects(redirects, target)
            if resolved is None or resolved == page.title:
                continue
            hit = by_title.get(resolved)
            if hit is None:
                continue
            page.links_out += 1
            hit.links_in += 1
            hit.anchors_in.append(anchor)
    return pages


def distinct_term_count(page: Page, stopwords=None) -> int:
    return len(set(normalize_stemmed(tokenize(page.plain_text()), stopwords)))


def filter_pages(
    pages: Iterable[Page], criteria: FilterCriteria, stopwords=None
) -> list[Page]:
    """Keep pages with at least `min_terms` distinct stemmed terms and at
    least `min_links` links (incoming plus outgoing)."""
    kept = []
    for page in pages:
        if page.links_in + page.links_out < criteria.min_links:
            continue
        if distinct_term_count(page, stopwords) < criteria.min_terms:
            continue
        kept.append(page)
    return kept


# ---------------------------------------------------------------------------
# Sentence weighting and section pruning
# ---------------------------------------------------------------------------


def weight_sentences(page: Page, factor: int, stopwords=None) -> list[int]:
    """Per-sentence weights, aligned with page.sentences() order.

    A sentence weighs `factor` when, after stemming, it contains any term of
    the page title or the full term sequence of any incoming anchor text;
    all other sentences weigh 1.
    """
    title_terms = normalize_stemmed(tokenize(page.title), stopwords)
    title_set = set(title_terms)
    anchor_seqs = []
    for anchor in set(page.anchors_in):
        seq = normalize_stemmed(tokenize(anchor), stopwords)
        if seq:
            anchor_seqs.append(seq)

    def contains_run(terms: list[str], run: list[str]) -> bool:
        k = len(run)
        return any(terms[i : i + k] == run for i in range(len(terms) - k + 1))

    weights = []
    for sentence in page.sentences():
        terms = normalize_stemmed(tokenize(sentence), stopwords)
        selected = bool(title_set.intersection(terms)) or any(
            contains_run(terms, seq) for seq in anchor_seqs
        )
        weights.append(factor if selected else 1)
    return weights


DEFAULT_BANNED_HEADINGS = frozenset(
    {"History", "External links", "References", "See also", "Further reading", "Bibliography"}
)


def _past_tense_ratio(sentences_tags: list[list[PosToken]]) -> Optional[float]:
    verbs = past = 0
    for sent in sentences_tags:
        for tok in sent:
            if tok.tag.startswith("VB"):
                verbs += 1
                if tok.tag == "VBD":
                    past += 1
    return past / verbs if verbs else None


def prune_sections(
    page: Page,
    pos_sentences: list[list[PosToken]],
    threshold: float = 0.8,
    banned_headings: frozenset[str] = DEFAULT_BANNED_HEADINGS,
) -> Page:
    """Drop past-tense-heavy sections and sections with banned headings.

    `pos_sentences` must align with page.sentences() order. A section is
    removed when its past-tense verb ratio reaches `threshold` while the
    page-wide ratio stays below it, or when its heading is banned. Sections
    without verbs have no ratio and are never pruned by the ratio rule; the
    lead section has an empty heading and is never pruned by the heading rule.
    """
    counts = [len(s.sentences) for s in page.sections]
    if sum(counts) != len(pos_sentences):
        raise ValueError(
            f"annotation mismatch: page has {sum(counts)} sentences, "
            f"annotations cover {len(pos_sentences)}"
        )
    page_ratio = _past_tense_ratio(pos_sentences)
    kept = []
    offset = 0
    for section, n in zip(page.sections, counts):
        tags = pos_sentences[offset : offset + n]
        offset += n
        section.past_tense_ratio = _past_tense_ratio(tags)
        if section.heading in banned_headings and section.heading:
            continue
        if (
            section.past_tense_ratio is not None
            and section.past_tense_ratio >= threshold
            and page_ratio is not None
            and page_ratio < threshold
        ):
            continue
        kept.append(section)
    out = Page(
        id=page.id,
        title=page.title,
        namespace=page.namespace,
        sections=kept,
        link_targets=page.link_targets,
        anchors_in=page.anchors_in,
        links_in=page.links_in,
        links_out=page.links_out,
    )
    return out


# ---------------------------------------------------------------------------
# Intermediate page store (one JSON object per line)
# ---------------------------------------------------------------------------

_PAGE_FIELDS = ("id", "title", "ns", "redirect", "sections", "links", "anchors_in",
                "links_in", "links_out")


def write_page_store(pages: Iterable[Page], path: str) -> int:
    """Write cleaned pages as newline-delimited JSON, UTF-8, fixed field order:
    id, title, ns, redirect, sections, links, anchors_in, links_in, links_out."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for p in pages:
            record = {
                "id": p.id,
                "title": p.title,
                "ns": p.namespace,
                "redirect": p.redirect_target,
                "sections": [{"heading": s.heading, "sentences": s.sentences}
                             for s in p.sections],
                "links": [[t, a] for t, a in p.link_targets],
                "anchors_in": p.anchors_in,
                "links_in": p.links_in,
                "links_out": p.links_out,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_page_store(path: str) -> Iterator[Page]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                yield Page(
                    id=rec["id"],
                    title=rec["title"],
                    namespace=rec["ns"],
                    redirect_target=rec["redirect"],
                    sections=[Section(s["heading"], s["sentences"]) for s in rec["sections"]],
                    link_targets=[(t, a) for t, a in rec["links"]],
                    anchors_in=rec["anchors_in"],
                    links_in=rec["links_in"],
                    links_out=rec["links_out"],
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DumpError(f"{path}:{lineno}: bad page record: {exc!r}") from exc

"""Text normalization: tokenizing, stop-word removal, stemming and POS filtering.

Two normalization routes produce index terms. The default route drops stop
words and short tokens, then applies the Porter stemmer three times. The
alternative route consumes externally produced Penn-Treebank annotations and
keeps lemmas of selected word classes.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from importlib import resources
from typing import Iterable, NamedTuple, Optional, Sequence

_WORD_RE = re.compile(r"[a-z]+")

MIN_TERM_LENGTH = 3


class Token(NamedTuple):
    surface: str
    position: int


class PosToken(NamedTuple):
    surface: str
    lemma: str
    tag: str


# The 36 Penn Treebank word classes plus punctuation/symbol tags.
PENN_TAGS = frozenset(
    """CC CD DT EX FW IN JJ JJR JJS LS MD NN NNS NNP NNPS PDT POS PRP PRP$
    RB RBR RBS RP SYM TO UH VB VBD VBG VBN VBP VBZ WDT WP WP$ WRB
    . , : ( ) `` '' $ # -LRB- -RRB-""".split()
)

NOUN_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS"})
_POS_ALL_PREFIXES = ("NN", "VB", "JJ")

_stopwords_cache: Optional[frozenset[str]] = None


def load_stopwords() -> frozenset[str]:
    """Bundled English stop-word list (one lowercase word per line)."""
    global _stopwords_cache
    if _stopwords_cache is None:
        text = resources.files("relmix.data").joinpath("stopwords_en.txt").read_text("utf-8")
        _stopwords_cache = frozenset(text.split())
    return _stopwords_cache


def stopword_list_id() -> str:
    """Identity of the bundled list, recorded in index metadata."""
    text = resources.files("relmix.data").joinpath("stopwords_en.txt").read_text("utf-8")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    return f"en-{len(text.split())}-{digest}"


def tokenize(text: str) -> list[Token]:
    """Lowercase alphabetic tokens, split on any non-letter. Digits are dropped."""
    return [Token(m.group(), i) for i, m in enumerate(_WORD_RE.finditer(text.lower()))]


def _surfaces(tokens: Sequence[Token | str]) -> Iterable[str]:
    for tok in tokens:
        yield tok if isinstance(tok, str) else tok.surface


def normalize_stemmed(
    tokens: Sequence[Token | str], stopwords: Optional[frozenset[str]] = None
) -> list[str]:
    """Stop words and tokens under three letters removed, survivors triple-stemmed.

    Stems that come out shorter than three letters or equal to a stop word are
    dropped as well, so output terms always satisfy the term constraints.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    out = []
    for surface in _surfaces(tokens):
        if len(surface) < MIN_TERM_LENGTH or surface in stopwords:
            continue
        term = stem_term(surface)
        if len(term) >= MIN_TERM_LENGTH and term not in stopwords:
            out.append(term)
    return out


def normalize_pos(
    tokens: Sequence[PosToken],
    mode: str = "noun-only",
    diagnostics: Optional[Counter] = None,
) -> list[str]:
    """Keep lemmas of selected Penn word classes.

    ``noun-only`` keeps NN, NNS, NNP, NNPS; ``noun-verb-adj`` keeps every tag
    starting with NN, VB or JJ. Tags outside the Penn set are dropped and
    counted under ``unknown_tag`` in `diagnostics`.
    """
    if mode not in ("noun-only", "noun-verb-adj"):
        raise ValueError(f"unknown POS mode: {mode!r}")
    stopwords = load_stopwords()
    out = []
    for tok in tokens:
        if tok.tag not in PENN_TAGS:
            if diagnostics is not None:
                diagnostics["unknown_tag"] += 1
            continue
        if mode == "noun-only":
            keep = tok.tag in NOUN_TAGS
        else:
            keep = tok.tag.startswith(_POS_ALL_PREFIXES)
        if keep:
            lemma = tok.lemma.lower()
            if lemma and lemma not in stopwords:
                out.append(lemma)
    return out


def parse_pos_file(lines: Iterable[str]) -> list[list[PosToken]]:
    """Parse token-per-line annotations: ``surface<TAB>tag<TAB>lemma``.

    A blank line ends a sentence. Returns one token list per sentence.
    """
    sentences: list[list[PosToken]] = []
    current: list[PosToken] = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 tab-separated columns, got {len(parts)}")
        surface, tag, lemma = parts
        current.append(PosToken(surface, lemma, tag))
    if current:
        sentences.append(current)
    return sentences


def parse_pos_sidecar(lines: Iterable[str]) -> dict[int, list[list[PosToken]]]:
    """Parse per-page annotations. A ``#page<TAB><id>`` line starts a page block;
    the block body uses the token-per-line format of `parse_pos_file`."""
    pages: dict[int, list[str]] = {}
    page_id = None
    for line in lines:
        if line.startswith("#page\t"):
            page_id = int(line.split("\t", 1)[1])
            pages[page_id] = []
        elif page_id is not None:
            pages[page_id].append(line)
        elif line.strip():
            raise ValueError("annotation data before the first #page header")
    return {pid: parse_pos_file(body) for pid, body in pages.items()}


# ---------------------------------------------------------------------------
# Porter stemmer (Porter 1980, "An algorithm for suffix stripping").
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return True if i == 0 else not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in [C](VC)^m[V]."""
    m = 0
    i = 0
    n = len(stem)
    while i < n and _is_cons(stem, i):
        i += 1
    while i < n:
        while i < n and not _is_cons(stem, i):
            i += 1
        if i >= n:
            break
        m += 1
        while i < n and _is_cons(stem, i):
            i += 1
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_cons(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (_is_cons(word, len(word) - 3) and not _is_cons(word, len(word) - 2)
            and _is_cons(word, len(word) - 1)):
        return False
    return word[-1] not in "wxy"


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        # if the measure condition fails the step ends; ED is not retried
        return w[:-1] if _measure(w[:-3]) > 0 else w
    if w.endswith("ed") and _has_vowel(w[:-2]):
        w = w[:-2]
    elif w.endswith("ing") and _has_vowel(w[:-3]):
        w = w[:-3]
    else:
        return w
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _ends_double_cons(w) and not w.endswith(("l", "s", "z")):
        return w[:-1]
    if _measure(w) == 1 and _ends_cvc(w):
        return w + "e"
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


_STEP2 = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _longest_suffix(w: str, table) -> Optional[tuple[str, str]]:
    best = None
    for suffix, repl in table:
        if w.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    return best


def _step2(w: str) -> str:
    hit = _longest_suffix(w, _STEP2)
    if hit and _measure(w[: -len(hit[0])]) > 0:
        return w[: -len(hit[0])] + hit[1]
    return w


def _step3(w: str) -> str:
    hit = _longest_suffix(w, _STEP3)
    if hit and _measure(w[: -len(hit[0])]) > 0:
        return w[: -len(hit[0])] + hit[1]
    return w


def _step4(w: str) -> str:
    best = None
    for suffix in _STEP4:
        if not w.endswith(suffix):
            continue
        if suffix == "ion" and w[-4:-3] not in ("s", "t"):
            continue
        if best is None or len(suffix) > len(best):
            best = suffix
    if best and _measure(w[: -len(best)]) > 1:
        return w[: -len(best)]
    return w


def _step5(w: str) -> str:
    if w.endswith("e"):
        m = _measure(w[:-1])
        if m > 1 or (m == 1 and not _ends_cvc(w[:-1])):
            w = w[:-1]
    if w.endswith("ll") and _measure(w) > 1:
        w = w[:-1]
    return w


def porter_stem(word: str) -> str:
    """One pass of the Porter suffix-stripping algorithm (lowercase input)."""
    if len(word) <= 2:
        return word
    for step in (_step1a, _step1b, _step1c, _step2, _step3, _step4, _step5):
        word = step(word)
    return word


_stem_cache: dict[str, str] = {}


def stem_term(word: str) -> str:
    """Three consecutive Porter passes; this is the index term of a token."""
    cached = _stem_cache.get(word)
    if cached is None:
        cached = porter_stem(porter_stem(porter_stem(word)))
        if len(_stem_cache) < 2_000_000:
            _stem_cache[word] = cached
    return cached

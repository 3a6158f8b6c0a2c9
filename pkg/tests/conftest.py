import os
import random
import sys
from xml.sax.saxutils import escape

import pytest

sys.path.insert(0, os.path.dirname(__file__))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

_SYLLABLES = ["ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu",
              "ra", "se", "ti", "vo", "zu"]


def pseudo_vocabulary(size: int) -> list[str]:
    words = []
    for i in range(size):
        a, rest = divmod(i, len(_SYLLABLES) ** 2)
        b, c = divmod(rest, len(_SYLLABLES))
        words.append(_SYLLABLES[a % len(_SYLLABLES)] + _SYLLABLES[b] + _SYLLABLES[c])
    return words


def make_dump_pages(n_pages: int, seed: int = 0, vocab_size: int = 300,
                    redirect_every: int = 10):
    """Deterministic synthetic corpus: (title, markup) pairs, some redirects."""
    rng = random.Random(seed)
    vocab = pseudo_vocabulary(vocab_size)
    pages = []
    for i in range(n_pages):
        title = f"Article {i}"
        if redirect_every and i % redirect_every == redirect_every - 1:
            target = f"Article {rng.randrange(n_pages)}"
            pages.append((title, f"#REDIRECT [[{target}]]"))
            continue
        n_sentences = rng.randint(4, 10)
        lines = []
        for s in range(n_sentences):
            words = [rng.choice(vocab) for _ in range(rng.randint(5, 12))]
            if rng.random() < 0.7:
                j = rng.randrange(n_pages)
                words.append(f"see [[Article {j}|{rng.choice(vocab)}]]")
            lines.append(" ".join(words).capitalize() + ".")
        pages.append((title, "\n".join(lines)))
    return pages


def dump_xml(pages) -> str:
    chunks = ["<mediawiki>"]
    for i, (title, text) in enumerate(pages):
        chunks.append(
            "<page>"
            f"<title>{escape(title)}</title>"
            "<ns>0</ns>"
            f"<id>{i + 1}</id>"
            f"<revision><id>{100000 + i}</id>"
            f"<text>{escape(text)}</text></revision>"
            "</page>"
        )
    chunks.append("</mediawiki>")
    return "\n".join(chunks)


@pytest.fixture
def small_dump(tmp_path):
    path = tmp_path / "dump.xml"
    path.write_text(dump_xml(make_dump_pages(40, seed=3)), encoding="utf-8")
    return str(path)


def write_wordnet_fixture(directory, synsets):
    """Write WordNet-format data files.

    synsets: list of (offset, pos, lemmas, hypernym_offsets). Offsets refer
    to same-pos synsets.
    """
    os.makedirs(directory, exist_ok=True)
    by_pos = {}
    for offset, pos, lemmas, hypernyms in synsets:
        by_pos.setdefault(pos, []).append((offset, lemmas, hypernyms))
    names = {"n": "data.noun", "v": "data.verb", "a": "data.adj", "r": "data.adv"}
    for pos, rows in by_pos.items():
        lines = []
        for offset, lemmas, hypernyms in sorted(rows):
            words = " ".join(f"{lemma.replace(' ', '_')} 0" for lemma in lemmas)
            pointers = " ".join(f"@ {h:08d} {pos} 0000" for h in hypernyms)
            line = f"{offset:08d} 03 {pos} {len(lemmas):02x} {words} {len(hypernyms):03d}"
            if pointers:
                line += f" {pointers}"
            line += " | synthetic gloss"
            lines.append(line)
        with open(os.path.join(directory, names[pos]), "w", encoding="utf-8") as fh:
            fh.write("  1 license header line\n")
            fh.write("\n".join(lines) + "\n")
    return directory


# A small noun hierarchy with known pairwise distances:
#   entity
#     organism
#       animal
#         bird
#           cock            (bird/cock distance 1)
#       person
#         leader
#           priest
#             bishop        (bishop..rabbi distance 3 via clergyman? see below)
#     time_period
#       century             (century/year distance 2 via time_period)
#       year
# wood/forest share one synset (distance 0).
WORDNET_FIXTURE = [
    (1, "n", ["entity"], []),
    (10, "n", ["organism"], [1]),
    (20, "n", ["animal"], [10]),
    (30, "n", ["bird"], [20]),
    (40, "n", ["cock"], [30]),
    (50, "n", ["person"], [10]),
    (60, "n", ["clergyman"], [50]),
    (70, "n", ["priest"], [60]),
    (80, "n", ["bishop"], [70]),
    (90, "n", ["rabbi"], [60]),
    (100, "n", ["time_period"], [1]),
    (110, "n", ["century"], [100]),
    (120, "n", ["year"], [100]),
    (130, "n", ["wood", "forest"], [1]),
    (140, "n", ["tiger", "big_cat"], [20]),
    (150, "n", ["cock", "faucet"], [1]),  # second sense of cock
]


@pytest.fixture
def wordnet_dir(tmp_path):
    return write_wordnet_fixture(str(tmp_path / "wn"), WORDNET_FIXTURE)

"""WordNet 3.0 loading and synset/word relatedness measures.

Measures over the hypernym graph: the path measure (1 / (1 + shortest
path)), Wu-Palmer, Leacock-Chodorow, and the information-content family
(Resnik, Lin, Jiang-Conrath). Word-level values take the best pair of
senses. A virtual root joins the hierarchy roots of each part of speech so
least-common-subsumer lookups are total.
"""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .textpipe import stem_term

SynsetKey = tuple[str, int]  # (pos, byte offset in the data file)

MEASURES = ("WNP", "WUP", "LCH", "RES", "JCN", "LIN")
_IC_MEASURES = frozenset({"RES", "JCN", "LIN"})
_HYPERNYM_POINTERS = ("@", "@i")
_HIERARCHICAL_POS = ("n", "v")

DEFAULT_JCN_CEILING = 1e6


class WordnetError(Exception):
    pass


@dataclass
class Synset:
    pos: str
    offset: int
    lemmas: tuple[str, ...]
    hypernyms: list[SynsetKey] = field(default_factory=list)

    @property
    def key(self) -> SynsetKey:
        return (self.pos, self.offset)


@dataclass
class WordnetGraph:
    synsets: dict[SynsetKey, Synset]
    lemma_index: dict[str, list[SynsetKey]]
    children: dict[SynsetKey, list[SynsetKey]]
    depth: dict[SynsetKey, int]
    roots: dict[str, SynsetKey]
    max_depth: dict[str, int]
    ic: Optional[dict[SynsetKey, float]] = None

    def lookup(self, word: str) -> list[SynsetKey]:
        word = word.strip().lower().replace(" ", "_")
        return self.lemma_index.get(word, [])


def synset_id(key: SynsetKey) -> str:
    return f"{key[1]:08d}-{key[0]}"


def parse_synset_id(text: str) -> SynsetKey:
    offset, _, pos = text.partition("-")
    return (pos, int(offset))


_POS_FILES = {"n": "data.noun", "v": "data.verb", "a": "data.adj", "r": "data.adv"}


def _parse_data_line(line: str, pos_hint: str, path: str, lineno: int) -> Synset:
    body = line.split("|", 1)[0].rstrip()
    fields = body.split(" ")
    try:
        offset = int(fields[0])
        ss_type = fields[2]
        w_cnt = int(fields[3], 16)
        lemmas = tuple(fields[4 + 2 * i].lower() for i in range(w_cnt))
        p_start = 4 + 2 * w_cnt
        p_cnt = int(fields[p_start])
        hypernyms = []
        for i in range(p_cnt):
            sym, tgt_offset, tgt_pos, _src = fields[p_start + 1 + 4 * i : p_start + 5 + 4 * i]
            if sym in _HYPERNYM_POINTERS:
                hypernyms.append((tgt_pos, int(tgt_offset)))
    except (IndexError, ValueError) as exc:
        raise WordnetError(f"{path}:{lineno}: corrupt synset record: {exc}") from exc
    pos = "a" if ss_type == "s" else ss_type
    if pos not in _POS_FILES:
        raise WordnetError(f"{path}:{lineno}: unknown synset type {ss_type!r}")
    return Synset(pos=pos, offset=offset, lemmas=lemmas, hypernyms=hypernyms)


def load_wordnet(directory: str) -> WordnetGraph:
    """Load the flat database files (data.noun, data.verb, data.adj, data.adv)
    found in `directory`; at least one must exist."""
    synsets: dict[SynsetKey, Synset] = {}
    found = False
    for pos, name in _POS_FILES.items():
        path = os.path.join(directory, name)
        if not os.path.exists(path):
            continue
        found = True
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip() or line.startswith(" "):
                    continue  # license header lines are indented
                syn = _parse_data_line(line, pos, path, lineno)
                synsets[syn.key] = syn
    if not found:
        raise WordnetError(f"no WordNet data files found in {directory!r}")

    # satellite adjectives are stored under pos 'a'; remap pointer targets
    for syn in synsets.values():
        syn.hypernyms = [("a" if p == "s" else p, off) for p, off in syn.hypernyms]
        missing = [k for k in syn.hypernyms if k not in synsets]
        if missing:
            raise WordnetError(
                f"synset {synset_id(syn.key)} points to unknown hypernym "
                f"{synset_id(missing[0])}"
            )

    roots: dict[str, SynsetKey] = {}
    for pos in _HIERARCHICAL_POS:
        members = [s for s in synsets.values() if s.pos == pos]
        if not members:
            continue
        root_key = (pos, 0)
        roots[pos] = root_key
        synsets[root_key] = Synset(pos=pos, offset=0, lemmas=())
        for syn in members:
            if not syn.hypernyms:
                syn.hypernyms.append(root_key)

    lemma_index: dict[str, list[SynsetKey]] = {}
    for key in sorted(synsets):
        for lemma in synsets[key].lemmas:
            lemma_index.setdefault(lemma, []).append(key)

    children: dict[SynsetKey, list[SynsetKey]] = {}
    for key in sorted(synsets):
        for parent in synsets[key].hypernyms:
            children.setdefault(parent, []).append(key)

    depth: dict[SynsetKey, int] = {}
    for root in roots.values():
        depth[root] = 0
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for child in children.get(node, ()):
                if child not in depth:
                    depth[child] = depth[node] + 1
                    queue.append(child)

    max_depth = {}
    for pos, root in roots.items():
        pos_depths = [d for k, d in depth.items() if k[0] == pos]
        max_depth[pos] = max(pos_depths) if pos_depths else 0
    return WordnetGraph(synsets, lemma_index, children, depth, roots, max_depth)


def path_length(g: WordnetGraph, s1: SynsetKey, s2: SynsetKey) -> float:
    """Fewest hypernym edges (followed in either direction) between two
    synsets; 0 for identical synsets, inf when disconnected."""
    if s1 == s2:
        return 0
    if s1 not in g.synsets or s2 not in g.synsets:
        return math.inf
    if s1[0] != s2[0]:
        return math.inf  # separate hierarchies
    dist = {s1: 0}
    queue = deque([s1])
    while queue:
        node = queue.popleft()
        d = dist[node]
        for nxt in g.synsets[node].hypernyms + g.children.get(node, []):
            if nxt in dist:
                continue
            if nxt == s2:
                return d + 1
            dist[nxt] = d + 1
            queue.append(nxt)
    return math.inf


def _ancestors(g: WordnetGraph, key: SynsetKey) -> set[SynsetKey]:
    out = {key}
    stack = [key]
    while stack:
        node = stack.pop()
        for parent in g.synsets[node].hypernyms:
            if parent not in out:
                out.add(parent)
                stack.append(parent)
    return out


def deepest_common_hypernym(g: WordnetGraph, s1: SynsetKey, s2: SynsetKey) -> Optional[SynsetKey]:
    if s1 not in g.synsets or s2 not in g.synsets or s1[0] != s2[0]:
        return None
    common = _ancestors(g, s1) & _ancestors(g, s2)
    if not common:
        return None
    return max(common, key=lambda k: (g.depth.get(k, -1), k))


def synset_measure(
    kind: str,
    g: WordnetGraph,
    s1: SynsetKey,
    s2: SynsetKey,
    jcn_ceiling: float = DEFAULT_JCN_CEILING,
) -> float:
    """One relatedness value for a synset pair. Disconnected pairs score 0;
    a zero Jiang-Conrath distance returns the configured ceiling."""
    if kind not in MEASURES:
        raise ValueError(f"unknown measure kind: {kind!r}")
    if kind in _IC_MEASURES:
        if g.ic is None:
            raise WordnetError(f"measure {kind} needs an information-content table")
        ic1, ic2 = g.ic.get(s1), g.ic.get(s2)
        if ic1 is None or ic2 is None:
            return 0.0
        lcs = deepest_common_hypernym(g, s1, s2)
        ic_lcs = g.ic.get(lcs, 0.0) if lcs is not None else 0.0
        if kind == "RES":
            return ic_lcs
        if kind == "LIN":
            denom = ic1 + ic2
            return 2.0 * ic_lcs / denom if denom > 0.0 else 0.0
        denom = ic1 + ic2 - 2.0 * ic_lcs
        return 1.0 / denom if denom > 1.0 / jcn_ceiling else jcn_ceiling

    if kind == "WNP":
        d = path_length(g, s1, s2)
        return 0.0 if math.isinf(d) else 1.0 / (1.0 + d)
    if kind == "WUP":
        if s1 == s2:
            return 1.0
        lcs = deepest_common_hypernym(g, s1, s2)
        if lcs is None:
            return 0.0
        denom = g.depth.get(s1, 0) + g.depth.get(s2, 0)
        return 2.0 * g.depth.get(lcs, 0) / denom if denom else 0.0
    # LCH, node-counted path against twice the taxonomy depth
    d = path_length(g, s1, s2)
    if math.isinf(d):
        return 0.0
    max_nodes = g.max_depth.get(s1[0], 0) + 1
    return -math.log((d + 1) / (2.0 * max_nodes))


def word_measure(
    kind: str,
    g: WordnetGraph,
    w1: str,
    w2: str,
    jcn_ceiling: float = DEFAULT_JCN_CEILING,
) -> float:
    """Best synset-pair value over all senses of the two words; 0 when either
    word is absent. Senses from different parts of speech score 0 together."""
    keys1, keys2 = g.lookup(w1), g.lookup(w2)
    if not keys1 or not keys2:
        return 0.0
    best = 0.0
    for s1 in keys1:
        for s2 in keys2:
            if s1[0] != s2[0]:
                continue
            best = max(best, synset_measure(kind, g, s1, s2, jcn_ceiling))
    return best


# ---------------------------------------------------------------------------
# Information content
# ---------------------------------------------------------------------------


def compute_ic(g: WordnetGraph, corpus_counts: dict[str, float]) -> dict[SynsetKey, float]:
    """Corpus-derived information content per synset.

    A lemma's corpus count (looked up by its stemmed form) is split evenly
    across its senses; every synset's mass also feeds each of its hypernym
    ancestors. Synsets with no observed mass get one smoothing count.
    IC(s) = -ln(mass(s) / mass(root)) within the synset's hierarchy.
    """
    if not corpus_counts:
        raise WordnetError("empty corpus counts")
    base: dict[SynsetKey, float] = {}
    for lemma, keys in g.lemma_index.items():
        if "_" in lemma:
            continue  # multiword lemmas are outside the term space
        count = corpus_counts.get(stem_term(lemma), 0.0)
        if count <= 0.0:
            continue
        share = count / len(keys)
        for key in keys:
            base[key] = base.get(key, 0.0) + share
    for key, syn in g.synsets.items():
        if key[0] in g.roots and key not in base and syn.lemmas:
            base[key] = 1.0  # add-one smoothing for unseen synsets

    totals: dict[SynsetKey, float] = {}
    for key, mass in base.items():
        if key[0] not in g.roots:
            continue
        for ancestor in _ancestors(g, key):
            totals[ancestor] = totals.get(ancestor, 0.0) + mass

    ic: dict[SynsetKey, float] = {}
    for key, total in totals.items():
        root_total = totals.get(g.roots[key[0]], 0.0)
        if root_total <= 0.0:
            continue
        ic[key] = -math.log(total / root_total)
    return ic


def save_ic(ic: dict[SynsetKey, float], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(ic):
            fh.write(f"{synset_id(key)}\t{ic[key]!r}\n")


def load_ic(path: str) -> dict[SynsetKey, float]:
    ic = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                sid, value = line.rstrip("\n").split("\t")
                ic[parse_synset_id(sid)] = float(value)
            except ValueError as exc:
                raise WordnetError(f"{path}:{lineno}: bad IC row: {exc}") from exc
    return ic

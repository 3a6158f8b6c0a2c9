"""Independent reference implementations used only to verify the package.

Everything here is deliberately written on a different code path from the
library: table-driven where the library is procedural, dense where the
library is sparse, brute-force where the library is incremental.
"""

import re

import numpy as np


# ---------------------------------------------------------------------------
# Porter stemmer, table-driven transcription of the published algorithm
# ---------------------------------------------------------------------------


def _cv_pattern(word: str) -> str:
    pattern = []
    for i, ch in enumerate(word):
        if ch in "aeiou":
            pattern.append("v")
        elif ch == "y":
            # y after a consonant acts as a vowel, otherwise as a consonant
            pattern.append("v" if (i > 0 and pattern[i - 1] == "c") else "c")
        else:
            pattern.append("c")
    return "".join(pattern)


def _m_correct(stem: str) -> int:
    pattern = re.sub("c+", "C", _cv_pattern(stem))
    pattern = re.sub("v+", "V", pattern)
    return pattern.count("VC")


def _contains_vowel(stem: str) -> bool:
    return "v" in _cv_pattern(stem)


def _double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _cv_pattern(word)[-1] == "c"


def _cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return _cv_pattern(word)[-3:] == "cvc" and word[-1] not in "wxy"


def porter_reference(word: str) -> str:
    """One pass of the suffix-stripping algorithm, rule tables throughout."""
    if len(word) <= 2:
        return word

    # step 1a
    for suffix, repl in (("sses", "ss"), ("ies", "i"), ("ss", "ss"), ("s", "")):
        if word.endswith(suffix):
            word = word[: len(word) - len(suffix)] + repl
            break

    # step 1b
    if word.endswith("eed"):
        if _m_correct(word[:-3]) > 0:
            word = word[:-1]
    else:
        stripped = None
        if word.endswith("ed") and _contains_vowel(word[:-2]):
            stripped = word[:-2]
        elif word.endswith("ing") and _contains_vowel(word[:-3]):
            stripped = word[:-3]
        if stripped is not None:
            word = stripped
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _m_correct(word) == 1 and _cvc(word):
                word += "e"

    # step 1c
    if word.endswith("y") and _contains_vowel(word[:-1]):
        word = word[:-1] + "i"

    # steps 2-4: longest matching suffix, then one condition test
    step2 = (("ational", "ate"), ("tional", "tion"), ("enci", "ence"),
             ("anci", "ance"), ("izer", "ize"), ("abli", "able"), ("alli", "al"),
             ("entli", "ent"), ("eli", "e"), ("ousli", "ous"), ("ization", "ize"),
             ("ation", "ate"), ("ator", "ate"), ("alism", "al"), ("iveness", "ive"),
             ("fulness", "ful"), ("ousness", "ous"), ("aliti", "al"),
             ("iviti", "ive"), ("biliti", "ble"))
    step3 = (("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
             ("ical", "ic"), ("ful", ""), ("ness", ""))
    for table, threshold in ((step2, 0), (step3, 0)):
        matches = [(s, r) for s, r in table if word.endswith(s)]
        if matches:
            suffix, repl = max(matches, key=lambda t: len(t[0]))
            if _m_correct(word[: len(word) - len(suffix)]) > threshold:
                word = word[: len(word) - len(suffix)] + repl

    step4 = ("al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
             "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize")
    matches = []
    for suffix in step4:
        if word.endswith(suffix):
            if suffix == "ion" and not word[: -3].endswith(("s", "t")):
                continue
            matches.append(suffix)
    if matches:
        suffix = max(matches, key=len)
        if _m_correct(word[: len(word) - len(suffix)]) > 1:
            word = word[: len(word) - len(suffix)]

    # step 5a
    if word.endswith("e"):
        m = _m_correct(word[:-1])
        if m > 1 or (m == 1 and not _cvc(word[:-1])):
            word = word[:-1]
    # step 5b
    if word.endswith("ll") and _m_correct(word) > 1:
        word = word[:-1]
    return word


# ---------------------------------------------------------------------------
# Dense tfidf + cosine oracle
# ---------------------------------------------------------------------------


def dense_esa_oracle(page_term_lists, tf_weights=None):
    """(vocabulary, matrix) with matrix[t, c] the normalized tfidf weight.

    page_term_lists: per page, a list of terms (repeats included).
    tf_weights: optional per-page list of per-term-occurrence multipliers,
    aligned with the term lists.
    """
    vocab = sorted({t for terms in page_term_lists for t in terms})
    t_index = {t: i for i, t in enumerate(vocab)}
    n_pages = len(page_term_lists)
    tf = np.zeros((len(vocab), n_pages))
    for c, terms in enumerate(page_term_lists):
        weights = tf_weights[c] if tf_weights is not None else [1] * len(terms)
        for term, w in zip(terms, weights):
            tf[t_index[term], c] += w
    df = (tf > 0).sum(axis=1)
    idf = np.where(df < n_pages, np.log(n_pages / df), 0.0)
    mat = tf * idf[:, None]
    norms = np.sqrt((mat**2).sum(axis=0))
    norms[norms == 0.0] = 1.0
    mat = mat / norms[None, :]
    return vocab, mat


def dense_cosine(mat, i, j):
    a, b = mat[i], mat[j]
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


# ---------------------------------------------------------------------------
# Brute-force rank statistics
# ---------------------------------------------------------------------------


def average_ranks_bruteforce(values):
    """Rank each value as 1 + count(smaller) + (count(equal) - 1) / 2."""
    out = []
    for v in values:
        smaller = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        out.append(1.0 + smaller + (equal - 1) / 2.0)
    return out


def spearman_bruteforce(xs, ys):
    rx = average_ranks_bruteforce(xs)
    ry = average_ranks_bruteforce(ys)
    n = len(xs)
    mx = sum(rx) / n
    my = sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / (vx * vy) ** 0.5


# ---------------------------------------------------------------------------
# SVR dual via a generic QP solver
# ---------------------------------------------------------------------------


def svr_dual_qp_oracle(kernel, y, c, epsilon):
    """Solve the stacked (alpha, alpha*) dual with cvxopt; returns the
    minimal objective value."""
    from cvxopt import matrix, solvers

    n = len(y)
    k2 = np.tile(kernel, (2, 2))
    signs = np.concatenate([np.ones(n), -np.ones(n)])
    p_mat = (signs[:, None] * signs[None, :]) * k2 + 1e-9 * np.eye(2 * n)
    q = np.concatenate([epsilon - y, epsilon + y])
    g = np.vstack([-np.eye(2 * n), np.eye(2 * n)])
    h = np.concatenate([np.zeros(2 * n), np.full(2 * n, c)])
    a_eq = signs.reshape(1, -1)
    solvers.options["show_progress"] = False
    sol = solvers.qp(matrix(p_mat), matrix(q), matrix(g), matrix(h),
                     matrix(a_eq), matrix(np.zeros(1)))
    a = np.asarray(sol["x"]).ravel()
    signed = (signs[:, None] * signs[None, :]) * k2
    return float(0.5 * a @ signed @ a + q @ a)

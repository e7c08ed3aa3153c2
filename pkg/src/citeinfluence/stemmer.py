"""Porter suffix-stripping stemmer.

This follows the reference implementation distributed by Martin Porter
(the one that produced the published ``voc.txt``/``output.txt`` word
lists), including its two departures from the 1980 description:
``bli -> ble`` replaces ``abli -> able`` and ``logi -> log`` is added
to step 2.  Rules within a step use first-match semantics: once a
suffix matches, no shorter alternative is tried even when the measure
condition rejects the replacement.
"""

from __future__ import annotations

from functools import lru_cache

__all__ = ["stem"]

_VOWELS = frozenset("aeiou")


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in ``stem`` ([C](VC){m}[V])."""
    m = 0
    n = len(stem)
    i = 0
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


def _double_cons(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_cons(word, len(word) - 1)


def _cvc(word: str) -> bool:
    n = len(word)
    if n < 3:
        return False
    return (
        _is_cons(word, n - 1)
        and not _is_cons(word, n - 2)
        and _is_cons(word, n - 3)
        and word[-1] not in "wxy"
    )


_STEP2 = (
    ("ational", "ate"), ("tional", "tion"),
    ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"),
    ("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous"),
    ("ization", "ize"), ("ation", "ate"), ("ator", "ate"),
    ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous"),
    ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
    ("logi", "log"),
)

_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""),
    ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible",
    "ant", "ement", "ment", "ent",
    "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _replace_first(word: str, rules, min_measure: int) -> str:
    for suffix, repl in rules:
        if word.endswith(suffix):
            base = word[: len(word) - len(suffix)]
            if _measure(base) > min_measure:
                return base + repl
            return word
    return word


def _step1ab(w: str) -> str:
    if w.endswith("s"):
        if w.endswith("sses"):
            w = w[:-2]
        elif w.endswith("ies"):
            w = w[:-2]
        elif len(w) >= 2 and w[-2] != "s":
            w = w[:-1]

    stripped = False
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            w = w[:-1]
    elif w.endswith("ed") and _has_vowel(w[:-2]):
        w = w[:-2]
        stripped = True
    elif w.endswith("ing") and _has_vowel(w[:-3]):
        w = w[:-3]
        stripped = True

    if stripped:
        if w.endswith(("at", "bl", "iz")):
            w += "e"
        elif _double_cons(w):
            if w[-1] not in "lsz":
                w = w[:-1]
        elif _measure(w) == 1 and _cvc(w):
            w += "e"
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _step4(w: str) -> str:
    for suffix in _STEP4:
        if not w.endswith(suffix):
            continue
        base = w[: len(w) - len(suffix)]
        if suffix == "ion" and not (base and base[-1] in "st"):
            # the C reference falls through to "ou", which cannot match a word ending in "n"
            return w
        return base if _measure(base) > 1 else w
    return w


def _step5(w: str) -> str:
    if w.endswith("e"):
        a = _measure(w[:-1])
        if a > 1 or (a == 1 and not _cvc(w[:-1])):
            w = w[:-1]
    if w.endswith("l") and _double_cons(w) and _measure(w) > 1:
        w = w[:-1]
    return w


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Return the Porter stem of a lowercase ``token``.

    >>> stem("caresses"), stem("relational"), stem("sky")
    ('caress', 'relat', 'sky')
    """
    w = token
    if len(w) <= 2:
        return w
    w = _step1ab(w)
    w = _step1c(w)
    w = _replace_first(w, _STEP2, 0)
    w = _replace_first(w, _STEP3, 0)
    w = _step4(w)
    w = _step5(w)
    return w

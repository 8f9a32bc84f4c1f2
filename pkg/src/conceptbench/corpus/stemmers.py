"""Suffix-stripping stemmers for the three supported languages.

No stemming package is available in this environment, so the classic
algorithms are implemented here and frozen: the analyzer version recorded in
every index bumps whenever these rules change.

english: Porter (1980). dutch / russian: snowball-style suffix removal over
the usual R1/R2/RV regions.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# English: Porter stemmer
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_cons(word: str, i: int) -> bool:
    c = word[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_cons(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_cons(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (_is_cons(word, len(word) - 3)
            and not _is_cons(word, len(word) - 2)
            and _is_cons(word, len(word) - 1)):
        return False
    return word[-1] not in "wxy"


def stem_english(word: str) -> str:
    if len(word) <= 2:
        return word
    w = word

    # step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif w.endswith("ss"):
        pass
    elif w.endswith("s"):
        w = w[:-1]

    # step 1b
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            w = w[:-1]
    else:
        cleanup = False
        if w.endswith("ed") and _has_vowel(w[:-2]):
            w = w[:-2]
            cleanup = True
        elif w.endswith("ing") and _has_vowel(w[:-3]):
            w = w[:-3]
            cleanup = True
        if cleanup:
            if w.endswith(("at", "bl", "iz")):
                w += "e"
            elif _ends_double_cons(w) and w[-1] not in "lsz":
                w = w[:-1]
            elif _measure(w) == 1 and _ends_cvc(w):
                w += "e"

    # step 1c
    if w.endswith("y") and _has_vowel(w[:-1]):
        w = w[:-1] + "i"

    # step 2
    for suffix, replacement in (
        ("ational", "ate"), ("tional", "tion"), ("enci", "ence"),
        ("anci", "ance"), ("izer", "ize"), ("abli", "able"), ("alli", "al"),
        ("entli", "ent"), ("eli", "e"), ("ousli", "ous"), ("ization", "ize"),
        ("ation", "ate"), ("ator", "ate"), ("alism", "al"),
        ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous"),
        ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"), ("logi", "log"),
    ):
        if w.endswith(suffix):
            if _measure(w[: -len(suffix)]) > 0:
                w = w[: -len(suffix)] + replacement
            break

    # step 3
    for suffix, replacement in (
        ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
        ("ical", "ic"), ("ful", ""), ("ness", ""),
    ):
        if w.endswith(suffix):
            if _measure(w[: -len(suffix)]) > 0:
                w = w[: -len(suffix)] + replacement
            break

    # step 4
    for suffix in (
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    ):
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and not stem.endswith(("s", "t")):
                    break
                w = stem
            break

    # step 5a
    if w.endswith("e"):
        m = _measure(w[:-1])
        if m > 1 or (m == 1 and not _ends_cvc(w[:-1])):
            w = w[:-1]

    # step 5b
    if _measure(w) > 1 and _ends_double_cons(w) and w.endswith("l"):
        w = w[:-1]

    return w


# ---------------------------------------------------------------------------
# Dutch
# ---------------------------------------------------------------------------

_NL_VOWELS = "aeiouyè"

_NL_ACCENT_MAP = str.maketrans("äëïöüáéíóú", "aeiouaeiou")


def _nl_is_vowel(word: str, i: int) -> bool:
    return word[i] in _NL_VOWELS


def _region_after_first_nonvowel_after_vowel(word: str, vowels: str,
                                             start: int = 0) -> int:
    """Start of the region following the first non-vowel after a vowel."""
    n = len(word)
    i = start
    while i < n and word[i] not in vowels:
        i += 1
    while i < n and word[i] in vowels:
        i += 1
    return min(i + 1, n) if i < n else n


def _nl_undouble(word: str) -> str:
    if word.endswith(("kk", "dd", "tt")):
        return word[:-1]
    return word


def stem_dutch(word: str) -> str:
    if len(word) <= 2:
        return word
    w = word.translate(_NL_ACCENT_MAP)

    # treat some i/y occurrences as consonants by uppercasing them
    chars = list(w)
    for i, c in enumerate(chars):
        if c == "y" and (i == 0 or chars[i - 1] in _NL_VOWELS):
            chars[i] = "Y"
        elif (c == "i" and 0 < i < len(chars) - 1
              and chars[i - 1] in _NL_VOWELS and chars[i + 1] in _NL_VOWELS):
            chars[i] = "I"
    w = "".join(chars)

    r1 = _region_after_first_nonvowel_after_vowel(w, _NL_VOWELS)
    r1 = max(r1, min(3, len(w)))
    r2 = _region_after_first_nonvowel_after_vowel(w, _NL_VOWELS, r1)

    def in_r1(pos: int) -> bool:
        return pos >= r1

    def in_r2(pos: int) -> bool:
        return pos >= r2

    # step 1
    if w.endswith("heden"):
        if in_r1(len(w) - 5):
            w = w[:-5] + "heid"
    elif w.endswith("ene") or w.endswith("en"):
        cut = 3 if w.endswith("ene") else 2
        stem = w[:-cut]
        if (in_r1(len(w) - cut) and stem and stem[-1] not in _NL_VOWELS
                and not stem.endswith("gem")):
            w = _nl_undouble(stem)
    elif w.endswith("se") or w.endswith("s"):
        cut = 2 if w.endswith("se") else 1
        stem = w[:-cut]
        if (in_r1(len(w) - cut) and stem
                and stem[-1] not in _NL_VOWELS and stem[-1] != "j"):
            w = stem

    # step 2
    e_found = False
    if w.endswith("e") and in_r1(len(w) - 1):
        if len(w) >= 2 and w[-2] not in _NL_VOWELS:
            e_found = True
            w = _nl_undouble(w[:-1])

    # step 3a
    if w.endswith("heid") and in_r2(len(w) - 4) and not w.endswith("cheid"):
        w = w[:-4]
        if w.endswith("en"):
            stem = w[:-2]
            if (in_r1(len(w) - 2) and stem and stem[-1] not in _NL_VOWELS
                    and not stem.endswith("gem")):
                w = _nl_undouble(stem)

    # step 3b
    if w.endswith(("end", "ing")):
        if in_r2(len(w) - 3):
            w = w[:-3]
            if w.endswith("ig") and in_r2(len(w) - 2) and not w.endswith("eig"):
                w = w[:-2]
            else:
                w = _nl_undouble(w)
    elif w.endswith("ig"):
        if in_r2(len(w) - 2) and not w.endswith("eig"):
            w = w[:-2]
    elif w.endswith("lijk"):
        if in_r2(len(w) - 4):
            w = w[:-4]
            if w.endswith("e") and in_r1(len(w) - 1):
                if len(w) >= 2 and w[-2] not in _NL_VOWELS:
                    w = _nl_undouble(w[:-1])
    elif w.endswith("baar"):
        if in_r2(len(w) - 4):
            w = w[:-4]
    elif w.endswith("bar"):
        if in_r2(len(w) - 3) and e_found:
            w = w[:-3]

    # step 4: undouble vowel in C vv d endings
    if len(w) >= 4:
        c, v1, v2, d = w[-4], w[-3], w[-2], w[-1]
        if (c not in _NL_VOWELS and d not in _NL_VOWELS and d != "I"
                and v1 == v2 and v1 in "aeou"):
            w = w[:-2] + w[-1]

    return w.lower()


# ---------------------------------------------------------------------------
# Russian
# ---------------------------------------------------------------------------

_RU_VOWELS = "аеиоуыэюя"

_RU_PERFECTIVE_GERUND_1 = ("вшись", "вши", "в")
_RU_PERFECTIVE_GERUND_2 = ("ившись", "ывшись", "ивши", "ывши", "ив", "ыв")
_RU_ADJECTIVE = (
    "ими", "ыми", "его", "ого", "ему", "ому", "ее", "ие", "ые", "ое", "ей",
    "ий", "ый", "ой", "ем", "им", "ым", "ом", "их", "ых", "ую", "юю", "ая",
    "яя", "ою", "ею",
)
_RU_PARTICIPLE_1 = ("ем", "нн", "вш", "ющ", "щ")
_RU_PARTICIPLE_2 = ("ивш", "ывш", "ующ")
_RU_VERB_1 = (
    "ешь", "нно", "ете", "йте", "ла", "на", "ли", "ем", "ло", "но", "ет",
    "ют", "ны", "ть", "й", "л", "н",
)
_RU_VERB_2 = (
    "ейте", "уйте", "ила", "ыла", "ена", "ите", "или", "ыли", "ило", "ыло",
    "ено", "ует", "уют", "ены", "ить", "ыть", "ишь", "ей", "уй", "ил", "ыл",
    "им", "ым", "ен", "ят", "ит", "ыт", "ую", "ю",
)
_RU_NOUN = (
    "иями", "ями", "ами", "ией", "иям", "ием", "иях", "ев", "ов", "ие", "ье",
    "еи", "ии", "ей", "ой", "ий", "ям", "ем", "ам", "ом", "ах", "ях", "ию",
    "ью", "ия", "ья", "а", "е", "и", "й", "о", "у", "ы", "ь", "ю", "я",
)
_RU_SUPERLATIVE = ("ейше", "ейш")


def _ru_strip(word: str, rv: int, suffixes: tuple[str, ...],
              require_aja: bool = False) -> tuple[str, bool]:
    """Remove the longest matching suffix lying inside RV."""
    for suffix in sorted(suffixes, key=len, reverse=True):
        if not word.endswith(suffix):
            continue
        cut = len(word) - len(suffix)
        if cut < rv:
            continue
        if require_aja:
            if cut == 0 or word[cut - 1] not in "ая" or cut - 1 < rv:
                continue
        return word[:cut], True
    return word, False


def stem_russian(word: str) -> str:
    w = word.replace("ё", "е")
    if len(w) <= 2 or not any(c in _RU_VOWELS for c in w):
        return w

    rv = 0
    for i, c in enumerate(w):
        if c in _RU_VOWELS:
            rv = i + 1
            break
    else:
        return w
    r1 = _region_after_first_nonvowel_after_vowel(w, _RU_VOWELS)
    r2 = _region_after_first_nonvowel_after_vowel(w, _RU_VOWELS, r1)

    # step 1
    w, done = _ru_strip(w, rv, _RU_PERFECTIVE_GERUND_2)
    if not done:
        w, done = _ru_strip(w, rv, _RU_PERFECTIVE_GERUND_1, require_aja=True)
    if not done:
        w, _ = _ru_strip(w, rv, ("ся", "сь"))
        w, adj = _ru_strip(w, rv, _RU_ADJECTIVE)
        if adj:
            w, done2 = _ru_strip(w, rv, _RU_PARTICIPLE_2)
            if not done2:
                w, _ = _ru_strip(w, rv, _RU_PARTICIPLE_1, require_aja=True)
        else:
            w, verb = _ru_strip(w, rv, _RU_VERB_2)
            if not verb:
                w, verb = _ru_strip(w, rv, _RU_VERB_1, require_aja=True)
            if not verb:
                w, _ = _ru_strip(w, rv, _RU_NOUN)

    # step 2
    if w.endswith("и") and len(w) - 1 >= rv:
        w = w[:-1]

    # step 3
    for suffix in ("ость", "ост"):
        if w.endswith(suffix) and len(w) - len(suffix) >= r2:
            w = w[: -len(suffix)]
            break

    # step 4
    if w.endswith("нн") and len(w) - 1 >= rv:
        w = w[:-1]
    else:
        w, done = _ru_strip(w, rv, _RU_SUPERLATIVE)
        if done and w.endswith("нн") and len(w) - 1 >= rv:
            w = w[:-1]
        elif not done and w.endswith("ь") and len(w) - 1 >= rv:
            w = w[:-1]

    return w

"""Language analyzers: lowercasing, tokenization, stop words, stemming.

Each language ships one fixed stop-word list and one stemmer; together they
form a versioned analyzer whose id is recorded in every index built with it,
so an index produced by a stale analyzer is detectable.
"""

from __future__ import annotations

import re

from ..errors import ConfigurationError
from .stemmers import stem_dutch, stem_english, stem_russian

ANALYZER_VERSION = 1

SUPPORTED_LANGUAGES = ("english", "dutch", "russian")

#: XML `language` attribute values for each supported analyzer language.
LANGUAGE_CODES = {"en": "english", "nl": "dutch", "ru": "russian"}
CODES_BY_LANGUAGE = {v: k for k, v in LANGUAGE_CODES.items()}

# classic Lucene English stop set
_STOP_ENGLISH = frozenset("""
a an and are as at be but by for if in into is it no not of on or such that
the their then there these they this to was will with
""".split())

# snowball Dutch stop set
_STOP_DUTCH = frozenset("""
de en van ik te dat die in een hij het niet zijn is was op aan met als voor
had er maar om hem dan zou of wat mijn men dit zo door over ze zich bij ook
tot je mij uit der daar haar naar heb hoe heeft hebben deze u want nog zal me
zij nu ge geen omdat iets worden toch al waren veel meer doen toen moet ben
zonder kan hun dus alles onder ja eens hier wie werd altijd doch wordt wezen
kunnen ons zelf tegen na reeds wil kon niets uw iemand geweest
""".split())

# snowball Russian stop set
_STOP_RUSSIAN = frozenset("""
и в во не что он на я с со как а то все она так его но да ты к у же вы за бы
по только ее мне было вот от меня еще нет о из ему теперь когда даже ну вдруг
ли если уже или ни быть был него до вас нибудь опять уж вам ведь там потом
себя ничего ей может они тут где есть надо ней для мы тебя их чем была сам
чтоб без будто чего раз тоже себе под будет ж тогда кто этот того потому
этого какой совсем ним здесь этом один почти мой тем чтобы нее сейчас были
куда зачем всех никогда можно при наконец два об другой хоть после над больше
тот через эти нас про всего них какая много разве три эту моя впрочем хорошо
свою этой перед иногда лучше чуть том нельзя такой им более всегда конечно
всю между
""".split())

STOP_WORDS = {
    "english": _STOP_ENGLISH,
    "dutch": _STOP_DUTCH,
    "russian": _STOP_RUSSIAN,
}

STEMMERS = {
    "english": stem_english,
    "dutch": stem_dutch,
    "russian": stem_russian,
}

# letter runs only: digits and underscores are token boundaries
_TOKEN_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


def require_language(language: str) -> str:
    if language not in SUPPORTED_LANGUAGES:
        raise ConfigurationError(
            f"unsupported language: {language!r} "
            f"(supported: {', '.join(SUPPORTED_LANGUAGES)})")
    return language


def analyzer_id(language: str) -> str:
    require_language(language)
    return f"{language}.v{ANALYZER_VERSION}"


def language_of_analyzer(analyzer: str) -> str:
    language = analyzer.split(".", 1)[0]
    return require_language(language)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def analyze(text: str, language: str) -> list[str]:
    """Normalize raw text to the ordered token list used everywhere else.

    The pipeline is deterministic: lowercase, split on non-letter boundaries,
    drop the language's stop words, stem.
    """
    require_language(language)
    stop = STOP_WORDS[language]
    stem = STEMMERS[language]
    return [stem(token) for token in tokenize(text) if token not in stop]

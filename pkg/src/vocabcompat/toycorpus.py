"""Deterministic English-like synthetic corpus.

Used by the bundled demos and the acceptance suite: a Zipf-distributed
lexicon of pronounceable syllable words, emitted as verse-like tab-separated
units. Generation is fully determined by the seed, so the corpus does not
need to be checked in.
"""

from __future__ import annotations

import random

from .corpus import Corpus

_ONSETS = ["b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r",
           "s", "t", "v", "w", "y", "z", "br", "ch", "cl", "cr", "dr", "fl",
           "fr", "gr", "pl", "pr", "sh", "sl", "sp", "st", "str", "th", "tr"]
_NUCLEI = ["a", "e", "i", "o", "u", "ai", "ea", "ee", "ie", "oa", "ou", "oo"]
_CODAS = ["", "", "", "b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t",
          "x", "ck", "ll", "nd", "ng", "nt", "rd", "rk", "rt", "ss", "st"]
_FUNCTION_WORDS = ["the", "and", "of", "to", "a", "in", "that", "he", "it",
                   "was", "for", "with", "his", "they", "on", "be", "not",
                   "is", "you", "but", "this", "she", "we", "or", "from"]

DEFAULT_TOY_SEED = 1337
DEFAULT_TOY_LINES = 25_000


def _make_lexicon(rng: random.Random, size: int) -> list[str]:
    words: set[str] = set(_FUNCTION_WORDS)
    lexicon = list(_FUNCTION_WORDS)
    while len(lexicon) < size:
        n_syllables = rng.choices([1, 2, 3, 4], weights=[30, 45, 20, 5])[0]
        word = "".join(
            rng.choice(_ONSETS) + rng.choice(_NUCLEI) + rng.choice(_CODAS)
            for _ in range(n_syllables)
        )
        if 2 <= len(word) <= 18 and word not in words:
            words.add(word)
            lexicon.append(word)
    return lexicon


def make_toy_corpus(
    n_lines: int = DEFAULT_TOY_LINES,
    seed: int = DEFAULT_TOY_SEED,
    language_id: str = "toy-english",
    lexicon_size: int = 7000,
    zipf_s: float = 1.07,
) -> Corpus:
    rng = random.Random(seed)
    lexicon = _make_lexicon(rng, lexicon_size)
    weights = [1.0 / (rank + 1) ** zipf_s for rank in range(len(lexicon))]
    units = []
    for i in range(n_lines):
        n_words = rng.randint(6, 16)
        words = rng.choices(lexicon, weights=weights, k=n_words)
        words[0] = words[0].capitalize()
        words[-1] += rng.choice([".", ".", ".", "?", ";"])
        units.append((f"{40_000_000 + i}", " ".join(words)))
    return Corpus(language_id=language_id, units=tuple(units))

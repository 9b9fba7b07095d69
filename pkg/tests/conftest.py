import random

import pytest

from vocabcompat.corpus import Corpus
from vocabcompat.toycorpus import make_toy_corpus


def corpus_of(*texts, language_id="test"):
    return Corpus(
        language_id=language_id,
        units=tuple((str(i + 1), t) for i, t in enumerate(texts)),
    )


def random_corpus(seed, min_words=100, max_words=5000, min_alpha=2, max_alpha=50):
    """Synthetic corpus with a random alphabet and random word lengths."""
    rng = random.Random(seed)
    asz = rng.randint(min_alpha, max_alpha)
    alphabet = [chr(ord("a") + i) if i < 26 else chr(0x3B1 + i - 26)
                for i in range(asz)]
    n_words = rng.randint(min_words, max_words)
    words = ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8)))
             for _ in range(n_words)]
    units = []
    i = 0
    while i < len(words):
        j = min(len(words), i + rng.randint(5, 12))
        units.append((str(len(units)), " ".join(words[i:j])))
        i = j
    return Corpus(language_id=f"rand{seed}", units=tuple(units))


@pytest.fixture(scope="session")
def toy_corpus():
    return make_toy_corpus()


@pytest.fixture(scope="session")
def small_toy():
    return make_toy_corpus(n_lines=1200, lexicon_size=1500, language_id="toy-small")

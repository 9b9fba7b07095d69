"""Verse-aligned corpora: loading, alignment, splits and the fake-language transform.

A corpus file is UTF-8 text with one unit per line, formatted as
``unit_id<TAB>text``. Unit ids must be unique and texts non-empty after
whitespace trimming. Corpus values are immutable once constructed.
"""

from __future__ import annotations

import logging
import random
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

log = logging.getLogger(__name__)

DEFAULT_FAKE_MARKER = "0en0"
FAKE_SUFFIX = "-fake"

_WORD_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class Corpus:
    """An ordered sequence of (unit_id, text) pairs for one language edition."""

    language_id: str
    units: tuple[tuple[str, str], ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.units:
            raise DataError(f"empty corpus for {self.language_id!r}")
        index = {}
        for uid, text in self.units:
            if uid in index:
                raise DataError(f"duplicate unit_id {uid!r} in {self.language_id!r}")
            if not text.strip():
                raise DataError(f"empty text for unit {uid!r} in {self.language_id!r}")
            index[uid] = text
        object.__setattr__(self, "_index", index)

    def ids(self) -> list[str]:
        return [uid for uid, _ in self.units]

    def texts(self) -> list[str]:
        return [text for _, text in self.units]

    def text_of(self, unit_id: str) -> str:
        return self._index[unit_id]

    def __len__(self) -> int:
        return len(self.units)

    def word_count(self) -> int:
        """Total number of whitespace-delimited words across all units."""
        return sum(len(text.split()) for text in self.texts())


@dataclass(frozen=True)
class AlignedPair:
    left: Corpus
    right: Corpus
    common_ids: tuple[str, ...]

    def __post_init__(self):
        if not self.common_ids:
            raise DataError("aligned pair has no common unit ids")


def load_corpus(path: str | Path, language_id: str, nfc: bool = False) -> Corpus:
    """Load an ``id<TAB>text`` corpus file.

    With ``nfc=True`` texts are NFC-normalized; normalization changes
    code-point counts, so it is off by default and logged when enabled.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DataError(f"cannot read corpus file {path}: {e}") from e
    try:
        content = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DataError(f"corpus file {path} is not valid UTF-8: {e}") from e

    units = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise DataError(f"{path}:{lineno}: malformed line (missing tab)")
        uid, text = line.split("\t", 1)
        if nfc:
            text = unicodedata.normalize("NFC", text)
        units.append((uid, text))
    if not units:
        raise DataError(f"empty corpus: {path}")
    if nfc:
        log.info("applied NFC normalization to %s", path)
    return Corpus(language_id=language_id, units=tuple(units))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for uid, text in corpus.units:
            f.write(f"{uid}\t{text}\n")


def align(left: Corpus, right: Corpus) -> AlignedPair:
    """Intersect two corpora on unit ids, preserving the left corpus order."""
    right_ids = set(right.ids())
    common = tuple(uid for uid in left.ids() if uid in right_ids)
    if not common:
        raise DataError(
            f"no common unit ids between {left.language_id!r} and {right.language_id!r}"
        )
    dropped = (len(left) - len(common)) + (len(right) - len(common))
    if dropped:
        log.warning(
            "align(%s, %s): dropped %d unaligned units",
            left.language_id, right.language_id, dropped,
        )
    return AlignedPair(left=left, right=right, common_ids=common)


def fake_language(corpus: Corpus, marker: str = DEFAULT_FAKE_MARKER) -> Corpus:
    """Re-script a corpus by prefixing every whitespace-delimited word with ``marker``.

    The transform is deterministic and invertible (see :func:`unfake_language`):
    whitespace structure, unit ids and word counts are all preserved, while the
    resulting vocabulary is forced to be disjoint from the original script.
    """
    if not marker:
        raise DataError("fake-language marker must be non-empty")
    for uid, text in corpus.units:
        if marker in text:
            raise DataError(f"marker {marker!r} occurs in unit {uid!r}")
    units = tuple(
        (uid, _WORD_RE.sub(lambda m: marker + m.group(0), text))
        for uid, text in corpus.units
    )
    return Corpus(language_id=corpus.language_id + FAKE_SUFFIX, units=units)


def unfake_language(corpus: Corpus, marker: str = DEFAULT_FAKE_MARKER) -> Corpus:
    """Invert :func:`fake_language`, restoring the original texts exactly."""
    if not marker:
        raise DataError("fake-language marker must be non-empty")

    def strip_word(m: re.Match) -> str:
        word = m.group(0)
        if not word.startswith(marker):
            raise DataError(f"word {word!r} does not carry marker {marker!r}")
        return word[len(marker):]

    units = tuple((uid, _WORD_RE.sub(strip_word, text)) for uid, text in corpus.units)
    language_id = corpus.language_id
    if language_id.endswith(FAKE_SUFFIX):
        language_id = language_id[: -len(FAKE_SUFFIX)]
    return Corpus(language_id=language_id, units=units)


def is_fake_of(fake_id: str, base_id: str) -> bool:
    return fake_id == base_id + FAKE_SUFFIX


def split(
    pair: AlignedPair, dev_n: int, test_n: int, seed: int
) -> tuple[tuple[Corpus, Corpus | None, Corpus | None], tuple[Corpus, Corpus | None, Corpus | None]]:
    """Draw shared dev/test ids from the common ids; train keeps everything else.

    Dev/test are drawn from ``common_ids`` only, so they are parallel across
    both sides; the train split of each side keeps all of its remaining units
    (including unaligned ones). Deterministic for a fixed seed.
    """
    if dev_n < 0 or test_n < 0:
        raise DataError("dev_n and test_n must be non-negative")
    if dev_n + test_n >= len(pair.common_ids):
        raise DataError(
            f"cannot draw {dev_n}+{test_n} units from {len(pair.common_ids)} common ids"
        )
    rng = random.Random(seed)
    drawn = rng.sample(list(pair.common_ids), dev_n + test_n)
    dev_ids = set(drawn[:dev_n])
    test_ids = set(drawn[dev_n:])

    def carve(side: Corpus) -> tuple[Corpus, Corpus | None, Corpus | None]:
        train_units, dev_units, test_units = [], [], []
        for uid, text in side.units:
            if uid in dev_ids:
                dev_units.append((uid, text))
            elif uid in test_ids:
                test_units.append((uid, text))
            else:
                train_units.append((uid, text))
        mk = lambda units: Corpus(side.language_id, tuple(units)) if units else None
        return mk(train_units), mk(dev_units), mk(test_units)

    return carve(pair.left), carve(pair.right)

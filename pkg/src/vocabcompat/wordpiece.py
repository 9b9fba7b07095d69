"""WordPiece vocabulary training and greedy longest-match encoding.

Training starts from the doubled alphabet (every corpus code point once bare
and once with the continuation prefix) and greedily merges the adjacent pair
with the highest score ``freq(ab) / (freq(a) * freq(b))``, ties broken by the
(left id, right id) of the pair. Because a vocabulary of size n is exactly the
first n entries of the full merge order, vocabularies of different sizes
trained on the same corpus are nested.

Pretokenization is a plain Unicode whitespace split. An optional punctuation
isolation step is available for encoding only (it mirrors the behavior of
BERT-style pretokenizers); it is never used when measuring compression.
"""

from __future__ import annotations

import heapq
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus
from .errors import DataError

UNK = "[UNK]"
CONTINUATION_PREFIX = "##"
DEFAULT_WORD_CAP = 100


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token list; token id equals position in ``tokens``."""

    tokens: tuple[str, ...]
    continuation_prefix: str = CONTINUATION_PREFIX
    specials: tuple[str, ...] = (UNK,)
    word_cap: int = DEFAULT_WORD_CAP
    _enc: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise DataError("vocabulary tokens are not unique")
        missing = [s for s in self.specials if s not in self.tokens]
        if missing:
            raise DataError(f"special tokens missing from vocabulary: {missing}")

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def index(self, token: str) -> int:
        return self._encoder().ids[token]

    def _encoder(self) -> "_Encoder":
        enc = self._enc.get("enc")
        if enc is None:
            enc = _Encoder(self)
            self._enc["enc"] = enc
        return enc


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[int, ...]
    source_unit: str = ""


class _Encoder:
    """Greedy longest-match segmenter with a per-word memo."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.ids = {tok: i for i, tok in enumerate(vocab.tokens)}
        prefix = vocab.continuation_prefix
        self.prefix = prefix
        specials = set(vocab.specials)
        self.bare = set()
        self.cont = set()
        for tok in vocab.tokens:
            if tok in specials:
                continue
            if tok.startswith(prefix):
                self.cont.add(tok[len(prefix):])
            else:
                self.bare.add(tok)
        self.max_bare = max(map(len, self.bare), default=0)
        self.max_cont = max(map(len, self.cont), default=0)
        self.unk = UNK if UNK in self.ids else vocab.specials[0]
        self._memo: dict[str, tuple[str, ...]] = {}

    def encode_word(self, word: str) -> tuple[str, ...]:
        cached = self._memo.get(word)
        if cached is not None:
            return cached
        pieces = self._segment(word)
        self._memo[word] = pieces
        return pieces

    def _segment(self, word: str) -> tuple[str, ...]:
        if not word:
            return ()
        if len(word) > self.vocab.word_cap:
            return (self.unk,)
        pieces = []
        i = 0
        n = len(word)
        while i < n:
            pool = self.bare if i == 0 else self.cont
            limit = self.max_bare if i == 0 else self.max_cont
            j = min(n, i + limit)
            while j > i and word[i:j] not in pool:
                j -= 1
            if j == i:
                return (self.unk,)
            pieces.append(word[i:j] if i == 0 else self.prefix + word[i:j])
            i = j
        return tuple(pieces)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def pretokenize(text: str, isolate_punctuation: bool = False) -> list[str]:
    """Split text into words on Unicode whitespace.

    With ``isolate_punctuation=True``, punctuation code points additionally
    become single-character words (BERT-style). Compression measurements must
    use the default whitespace-only behavior.
    """
    words = text.split()
    if not isolate_punctuation:
        return words
    out = []
    for word in words:
        buf = ""
        for ch in word:
            if _is_punct(ch):
                if buf:
                    out.append(buf)
                    buf = ""
                out.append(ch)
            else:
                buf += ch
        if buf:
            out.append(buf)
    return out


def corpus_alphabet(corpus: Corpus) -> list[str]:
    """Sorted distinct non-whitespace code points of a corpus."""
    cps = {ch for text in corpus.texts() for ch in text if not ch.isspace()}
    return sorted(cps)


def min_vocab_size(corpus: Corpus, specials: tuple[str, ...] = (UNK,)) -> int:
    """Floor vocabulary size: specials plus the doubled alphabet."""
    return len(specials) + 2 * len(corpus_alphabet(corpus))


class MergeModel:
    """Full merge order for a corpus; any prefix of it is a valid vocabulary."""

    def __init__(
        self,
        corpus: Corpus,
        max_size: int | None = None,
        min_frequency: int = 1,
        specials: tuple[str, ...] = (UNK,),
        word_cap: int = DEFAULT_WORD_CAP,
    ):
        self.corpus = corpus
        self.specials = specials
        self.word_cap = word_cap
        self.min_frequency = min_frequency
        alphabet = corpus_alphabet(corpus)
        if not alphabet:
            raise DataError("corpus has no non-whitespace code points")
        base = list(specials) + alphabet + [CONTINUATION_PREFIX + c for c in alphabet]
        self.n_min = len(base)
        if max_size is not None and max_size < self.n_min:
            raise DataError(
                f"target size {max_size} below alphabet floor {self.n_min}"
            )
        self.token_order = base + self._learn_merges(max_size)

    @property
    def ceiling(self) -> int:
        """Largest trainable vocabulary size (floor plus all learnable merges)."""
        return len(self.token_order)

    def vocab_at(self, n: int) -> Vocabulary:
        if n < self.n_min:
            raise DataError(f"target size {n} below alphabet floor {self.n_min}")
        n = min(n, len(self.token_order))
        return Vocabulary(
            tokens=tuple(self.token_order[:n]),
            specials=self.specials,
            word_cap=self.word_cap,
        )

    def _learn_merges(self, max_size: int | None) -> list[str]:
        word_counts = Counter()
        for text in self.corpus.texts():
            word_counts.update(text.split())
        seqs, wcounts = [], []
        for word, cnt in word_counts.items():
            if cnt < self.min_frequency or len(word) < 2:
                continue
            seqs.append([word[0]] + [CONTINUATION_PREFIX + c for c in word[1:]])
            wcounts.append(cnt)

        token_id = {tok: i for i, tok in enumerate(
            list(self.specials)
            + corpus_alphabet(self.corpus)
            + [CONTINUATION_PREFIX + c for c in corpus_alphabet(self.corpus)]
        )}
        merged_tokens: list[str] = []
        sym_freq = Counter()
        pair_count = Counter()
        pair_words: dict[tuple[str, str], set[int]] = {}
        sym_pairs: dict[str, set[tuple[str, str]]] = {}

        def register(pair):
            for part in pair:
                sym_pairs.setdefault(part, set()).add(pair)

        for widx, seq in enumerate(seqs):
            wc = wcounts[widx]
            for sym in seq:
                sym_freq[sym] += wc
            for a, b in zip(seq, seq[1:]):
                pair_count[(a, b)] += wc
                pair_words.setdefault((a, b), set()).add(widx)
                register((a, b))

        heap: list[tuple[float, int, int, str, str]] = []
        # best (smallest-key) heap entry currently alive per pair; lets push()
        # skip pairs whose score only dropped, which pop-time revalidation
        # already handles
        best_entry: dict[tuple[str, str], tuple] = {}

        def push(pair):
            c = pair_count.get(pair, 0)
            if c <= 0:
                return
            l, r = pair
            fl, fr = sym_freq[l], sym_freq[r]
            if fl <= 0 or fr <= 0:
                return
            score = c / (fl * fr)
            item = (-score, token_id[l], token_id[r], l, r)
            best = best_entry.get(pair)
            if best is not None and best <= item:
                return
            best_entry[pair] = item
            heapq.heappush(heap, item)

        for pair in pair_count:
            push(pair)

        budget = None if max_size is None else max_size - self.n_min
        while heap and (budget is None or len(merged_tokens) < budget):
            item = heapq.heappop(heap)
            neg, lid, rid, l, r = item
            pair = (l, r)
            if best_entry.get(pair) == item:
                del best_entry[pair]
            c = pair_count.get(pair, 0)
            if c <= 0:
                continue
            score = c / (sym_freq[l] * sym_freq[r])
            if -neg != score:
                push(pair)
                continue

            new = l + r[len(CONTINUATION_PREFIX):]
            if new not in token_id:
                token_id[new] = len(token_id)
                merged_tokens.append(new)

            for widx in sorted(pair_words.get(pair, ())):
                seq = seqs[widx]
                wc = wcounts[widx]
                merged_seq = []
                i = 0
                while i < len(seq):
                    if i + 1 < len(seq) and seq[i] == l and seq[i + 1] == r:
                        merged_seq.append(new)
                        i += 2
                    else:
                        merged_seq.append(seq[i])
                        i += 1
                old_pairs = Counter(zip(seq, seq[1:]))
                new_pairs = Counter(zip(merged_seq, merged_seq[1:]))
                for p, k in old_pairs.items():
                    pair_count[p] -= k * wc
                for p, k in new_pairs.items():
                    pair_count[p] += k * wc
                    pair_words.setdefault(p, set()).add(widx)
                    register(p)
                for p in old_pairs:
                    if p not in new_pairs:
                        pair_words[p].discard(widx)
                old_syms = Counter(seq)
                new_syms = Counter(merged_seq)
                for s, k in old_syms.items():
                    sym_freq[s] -= k * wc
                for s, k in new_syms.items():
                    sym_freq[s] += k * wc
                seqs[widx] = merged_seq

            # Only pairs sharing a part with l, r or the new token can have
            # changed score (through their count or a part frequency); refresh
            # their heap entries. Score decreases alone would also be caught
            # lazily at pop time, but increases must be re-pushed eagerly.
            for part in (l, r, new):
                stale = sym_pairs.get(part)
                if stale:
                    live = {p for p in stale if pair_count.get(p, 0) > 0}
                    sym_pairs[part] = live
                    for p in live:
                        push(p)
        return merged_tokens


def train(
    corpus: Corpus,
    target_size: int,
    min_frequency: int = 1,
    specials: tuple[str, ...] = (UNK,),
    word_cap: int = DEFAULT_WORD_CAP,
) -> Vocabulary:
    """Train a WordPiece vocabulary of (at most) ``target_size`` tokens.

    The result has ``min(target_size, learnable ceiling)`` tokens; training is
    deterministic for a fixed corpus.
    """
    model = MergeModel(
        corpus, max_size=target_size, min_frequency=min_frequency,
        specials=specials, word_cap=word_cap,
    )
    return model.vocab_at(target_size)


def encode_pieces(
    vocab: Vocabulary, text: str, isolate_punctuation: bool = False
) -> list[str]:
    """Encode text into subword piece strings."""
    enc = vocab._encoder()
    pieces = []
    for word in pretokenize(text, isolate_punctuation):
        pieces.extend(enc.encode_word(word))
    return pieces


def encode(
    vocab: Vocabulary, text: str, source_unit: str = "",
    isolate_punctuation: bool = False,
) -> TokenSequence:
    """Encode text into vocabulary indices."""
    enc = vocab._encoder()
    return TokenSequence(
        tokens=tuple(enc.ids[p] for p in encode_pieces(vocab, text, isolate_punctuation)),
        source_unit=source_unit,
    )


def decode_words(vocab: Vocabulary, pieces: list[str]) -> list[str]:
    """Rejoin pieces into words: a bare piece starts a word, continuation
    pieces extend it. Lossless when no [UNK] was emitted."""
    prefix = vocab.continuation_prefix
    words: list[str] = []
    for piece in pieces:
        if piece.startswith(prefix) and words:
            words[-1] += piece[len(prefix):]
        else:
            words.append(piece)
    return words


def token_count(vocab: Vocabulary, corpus: Corpus) -> int:
    """Total encoded length of all corpus units under ``vocab``."""
    enc = vocab._encoder()
    total = 0
    for text in corpus.texts():
        for word in text.split():
            total += len(enc.encode_word(word))
    return total


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    """One token per line; line number is the token id."""
    Path(path).write_text(
        "".join(tok + "\n" for tok in vocab.tokens), encoding="utf-8", newline="\n"
    )


def load_vocab(
    path: str | Path,
    specials: tuple[str, ...] = (UNK,),
    word_cap: int = DEFAULT_WORD_CAP,
) -> Vocabulary:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    tokens = tuple(line for line in lines if line)
    present = tuple(s for s in specials if s in tokens)
    if not present:
        raise DataError(f"vocabulary file {path} carries no special tokens")
    return Vocabulary(tokens=tokens, specials=present, word_cap=word_cap)


def fake_aligned_vocab(vocab: Vocabulary, marker: str) -> Vocabulary:
    """Map a vocabulary through the fake-language word bijection.

    Bare tokens get the marker prefix; continuation pieces and specials are
    unchanged. Encoding the fake corpus with the mapped vocabulary yields a
    token stream identical (id by id) to encoding the original corpus with
    ``vocab``, which is what makes the fake language an exact end-to-end
    oracle.
    """
    if not marker:
        raise DataError("marker must be non-empty")
    specials = set(vocab.specials)
    mapped = []
    for tok in vocab.tokens:
        if tok in specials or tok.startswith(vocab.continuation_prefix):
            mapped.append(tok)
        else:
            mapped.append(marker + tok)
    return Vocabulary(
        tokens=tuple(mapped),
        continuation_prefix=vocab.continuation_prefix,
        specials=vocab.specials,
        # fake words are longer by the marker; keep the cap isomorphic
        word_cap=vocab.word_cap + len(marker),
    )

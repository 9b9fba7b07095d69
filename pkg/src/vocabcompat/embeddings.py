"""Static subword embeddings: skip-gram with negative sampling.

The trainer operates on the WordPiece token stream of each corpus unit;
context windows never cross unit boundaries. The inner loop is a numba
kernel driven by a self-contained xorshift generator, so single-threaded
training is bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from numba import njit

from .corpus import Corpus
from .errors import DataError
from .wordpiece import Vocabulary, encode

MAGIC = b"VCEM"
FORMAT_VERSION = 1

_EXP_TABLE_SIZE = 1000
_MAX_EXP = 6.0
_NEG_TABLE_SIZE = 1 << 21


@dataclass(frozen=True)
class EmbedConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    subsample: float = 1e-4
    neg_power: float = 0.75

    def __post_init__(self):
        if self.dim < 40:
            raise DataError("embedding dim must be >= 40 (spectral gap needs 40 values)")

    def cache_token(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class EmbeddingMatrix:
    language_id: str
    vocab_size: int
    dim: int
    rows: np.ndarray
    seed: int
    epoch_losses: tuple[float, ...] = ()

    def __post_init__(self):
        if self.rows.shape != (self.vocab_size, self.dim):
            raise DataError(
                f"embedding shape {self.rows.shape} != ({self.vocab_size}, {self.dim})"
            )
        if not np.all(np.isfinite(self.rows)):
            raise DataError("embedding matrix contains non-finite entries")


@njit(cache=True, nogil=True)
def _xorshift(state):
    state ^= state >> np.uint64(12)
    state ^= state << np.uint64(25)
    state &= np.uint64(0xFFFFFFFFFFFFFFFF)
    state ^= state >> np.uint64(27)
    return state & np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, nogil=True)
def _sgns_kernel(stream, offsets, syn0, syn1, neg_table, keep_prob,
                 window, negatives, epochs, lr0, exp_table, seed):
    dim = syn0.shape[1]
    state = np.uint64(seed) | np.uint64(1)
    total = np.int64(len(stream)) * np.int64(epochs)
    processed = np.int64(0)
    grad = np.empty(dim, dtype=np.float32)
    epoch_losses = np.zeros(epochs, dtype=np.float64)
    min_lr = lr0 * 1e-4
    mult = np.uint64(0x2545F4914F6CDD1D)
    inv53 = 1.0 / 9007199254740992.0

    for epoch in range(epochs):
        loss = 0.0
        loss_terms = np.int64(0)
        for u in range(len(offsets) - 1):
            start, end = offsets[u], offsets[u + 1]
            for pos in range(start, end):
                processed += 1
                center = stream[pos]
                state = _xorshift(state)
                r = np.float64((state * mult) >> np.uint64(11)) * inv53
                if r > keep_prob[center]:
                    continue
                lr = lr0 * (1.0 - processed / (total + 1.0))
                if lr < min_lr:
                    lr = min_lr
                state = _xorshift(state)
                shrink = np.int64((state * mult) % np.uint64(window))
                span = window - shrink
                lo = pos - span
                hi = pos + span
                if lo < start:
                    lo = start
                if hi > end - 1:
                    hi = end - 1
                for cpos in range(lo, hi + 1):
                    if cpos == pos:
                        continue
                    context = stream[cpos]
                    # predict the context token from the center token
                    for i in range(dim):
                        grad[i] = 0.0
                    for k in range(negatives + 1):
                        if k == 0:
                            target = context
                            label = 1.0
                        else:
                            state = _xorshift(state)
                            target = neg_table[
                                np.int64((state * mult) % np.uint64(len(neg_table)))
                            ]
                            if target == context:
                                continue
                            label = 0.0
                        dot = 0.0
                        for i in range(dim):
                            dot += syn0[center, i] * syn1[target, i]
                        if dot > _MAX_EXP:
                            sig = 1.0
                        elif dot < -_MAX_EXP:
                            sig = 0.0
                        else:
                            sig = exp_table[
                                np.int64((dot + _MAX_EXP)
                                         * (_EXP_TABLE_SIZE / (2.0 * _MAX_EXP)))
                            ]
                        p = sig if label > 0.5 else 1.0 - sig
                        if p < 1e-10:
                            p = 1e-10
                        loss -= np.log(p)
                        loss_terms += 1
                        g = np.float32(lr * (label - sig))
                        for i in range(dim):
                            grad[i] += g * syn1[target, i]
                        for i in range(dim):
                            syn1[target, i] += g * syn0[center, i]
                    for i in range(dim):
                        syn0[center, i] += grad[i]
        if loss_terms > 0:
            epoch_losses[epoch] = loss / loss_terms
    return epoch_losses


def _build_exp_table() -> np.ndarray:
    x = (np.arange(_EXP_TABLE_SIZE) / _EXP_TABLE_SIZE * 2.0 - 1.0) * _MAX_EXP
    e = np.exp(x)
    return (e / (e + 1.0)).astype(np.float64)


def _build_neg_table(counts: np.ndarray, power: float) -> np.ndarray:
    weights = counts.astype(np.float64) ** power
    total = weights.sum()
    if total <= 0:
        raise DataError("corpus produces no training tokens")
    table = np.zeros(_NEG_TABLE_SIZE, dtype=np.int32)
    cum = np.cumsum(weights) / total
    idx = 0
    for i in range(_NEG_TABLE_SIZE):
        table[i] = idx
        if (i + 1) / _NEG_TABLE_SIZE > cum[idx] and idx < len(counts) - 1:
            idx += 1
    return table


def tokenize_stream(corpus: Corpus, vocab: Vocabulary) -> tuple[np.ndarray, np.ndarray]:
    """Token-id stream plus unit-boundary offsets for a corpus."""
    ids: list[int] = []
    offsets = [0]
    for uid, text in corpus.units:
        ids.extend(encode(vocab, text, source_unit=uid).tokens)
        offsets.append(len(ids))
    return np.asarray(ids, dtype=np.int32), np.asarray(offsets, dtype=np.int64)


def train_embeddings(
    corpus: Corpus, vocab: Vocabulary, config: EmbedConfig = EmbedConfig(),
    seed: int = 0,
) -> EmbeddingMatrix:
    """Train skip-gram/negative-sampling embeddings over the tokenized corpus.

    Deterministic (bit-identical matrices) for fixed corpus, vocabulary,
    config and seed. Tokens never observed keep their uniform initialization.
    """
    stream, offsets = tokenize_stream(corpus, vocab)
    if len(stream) < 2:
        raise DataError("corpus produces no skip-gram training pairs")
    n = len(vocab)
    counts = np.bincount(stream, minlength=n).astype(np.float64)

    rng = np.random.default_rng(seed)
    syn0 = rng.uniform(-0.5 / config.dim, 0.5 / config.dim,
                       size=(n, config.dim)).astype(np.float32)
    syn1 = np.zeros((n, config.dim), dtype=np.float32)

    observed = counts[counts > 0]
    freq = counts / counts.sum()
    keep_prob = np.ones(n, dtype=np.float64)
    if config.subsample > 0:
        mask = freq > 0
        ratio = np.zeros(n)
        ratio[mask] = config.subsample / freq[mask]
        keep_prob[mask] = np.minimum(1.0, np.sqrt(ratio[mask]) + ratio[mask])

    neg_counts = counts.copy()
    if len(observed) == 0:
        raise DataError("corpus produces no training tokens")
    neg_table = _build_neg_table(neg_counts, config.neg_power)

    losses = _sgns_kernel(
        stream, offsets, syn0, syn1, neg_table, keep_prob,
        config.window, config.negatives, config.epochs,
        config.learning_rate, _build_exp_table(), np.uint64(seed & (2**64 - 1)),
    )
    return EmbeddingMatrix(
        language_id=corpus.language_id,
        vocab_size=n,
        dim=config.dim,
        rows=syn0,
        seed=seed,
        epoch_losses=tuple(float(x) for x in losses),
    )


def vocab_hash(vocab: Vocabulary) -> str:
    h = hashlib.sha256()
    for tok in vocab.tokens:
        h.update(tok.encode("utf-8") + b"\n")
    return h.hexdigest()


def save_embeddings(em: EmbeddingMatrix, path: str | Path,
                    vocab: Vocabulary | None = None) -> None:
    """Binary format: header {magic, version u32, n u64, d u64, seed u64}
    followed by n*d little-endian float32 row-major values. A ``.meta.json``
    sidecar carries the language id and vocab hash."""
    path = Path(path)
    with path.open("wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQQQ", FORMAT_VERSION, em.vocab_size, em.dim,
                            em.seed & (2**64 - 1)))
        f.write(np.ascontiguousarray(em.rows, dtype="<f4").tobytes())
    meta = {"language_id": em.language_id}
    if vocab is not None:
        meta["vocab_hash"] = vocab_hash(vocab)
    path.with_suffix(path.suffix + ".meta.json").write_text(
        json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{path}: bad magic, not an embedding file")
    version, n, d, seed = struct.unpack("<IQQQ", raw[4:32])
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    rows = np.frombuffer(raw[32:], dtype="<f4").reshape(n, d).copy()
    meta_path = path.with_suffix(path.suffix + ".meta.json")
    language_id = ""
    if meta_path.exists():
        language_id = json.loads(meta_path.read_text(encoding="utf-8")).get(
            "language_id", ""
        )
    return EmbeddingMatrix(language_id=language_id, vocab_size=int(n),
                           dim=int(d), rows=rows, seed=int(seed))

"""Compression-rate measures, the exponential rate model and size selection.

The modeled absolute compression rate is

    r(n) = (1 - a) * (n / n_min)^beta + a

where ``a`` is the whitespace asymptote (word count over floor token count)
and ``beta`` is fitted by linear regression without intercept on the
log-transformed samples.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus
from .errors import DataError, NumericError
from .wordpiece import UNK, MergeModel, token_count

DEFAULT_N_MAX = 100_000
MARK_STEP = 0.1


@dataclass(frozen=True)
class FitResult:
    beta: float
    n_used: int
    n_excluded: int


@dataclass(frozen=True)
class CompressionCurve:
    language_id: str
    n_min: int
    asymptote_a: float
    samples: tuple[tuple[int, float], ...]
    beta: float
    selected: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        ns = [n for n, _ in self.samples]
        if ns != sorted(ns):
            raise DataError("curve samples must be sorted by n ascending")


class CompressionAnalyzer:
    """Measures compression rates of one corpus across vocabulary sizes.

    Trains the merge order once (to the largest size requested) and reuses
    nested prefix vocabularies for every size, so sampling a curve costs a
    single tokenizer training.
    """

    def __init__(self, corpus: Corpus, min_frequency: int = 1,
                 specials: tuple[str, ...] = (UNK,), max_size: int | None = None):
        self.corpus = corpus
        self.min_frequency = min_frequency
        self.specials = specials
        self.max_size = max_size
        self._model: MergeModel | None = None
        self._counts: dict[int, int] = {}

    @property
    def model(self) -> MergeModel:
        if self._model is None:
            self._model = MergeModel(
                self.corpus, max_size=self.max_size,
                min_frequency=self.min_frequency, specials=self.specials,
            )
        return self._model

    @property
    def n_min(self) -> int:
        return self.model.n_min

    def token_count_at(self, n: int) -> int:
        if self.max_size is not None and n > self.max_size:
            raise DataError(f"size {n} beyond analyzer training cap {self.max_size}")
        n_eff = min(n, self.model.ceiling)
        if n_eff not in self._counts:
            self._counts[n_eff] = token_count(self.model.vocab_at(n_eff), self.corpus)
        return self._counts[n_eff]

    def acr(self, n: int) -> float:
        """Absolute compression rate: token count at n over the floor count."""
        if n < self.n_min:
            raise DataError(f"size {n} below floor {self.n_min}")
        floor = self.token_count_at(self.n_min)
        if floor == 0:
            raise DataError("empty corpus: zero floor token count")
        return self.token_count_at(n) / floor

    def rcr(self, n: int) -> float:
        """Relative compression rate: ACR scaled by n_min / n."""
        return self.acr(n) * self.n_min / n

    def asymptote(self) -> float:
        """Lower bound on ACR: whitespace word count over floor token count."""
        floor = self.token_count_at(self.n_min)
        if floor == 0:
            raise DataError("empty corpus: zero floor token count")
        return self.corpus.word_count() / floor

    def sample_curve(
        self, k: int, n_max: int = DEFAULT_N_MAX, seed: int = 0
    ) -> list[tuple[int, float]]:
        """Measure ACR at k sizes drawn uniformly from [n_min, n_max].

        n_min is always included; sizes are distinct and the result is sorted
        by n ascending. Deterministic for a fixed seed.
        """
        if k < 2:
            raise DataError("need k >= 2 sample sizes")
        if n_max <= self.n_min:
            raise DataError(f"n_max {n_max} must exceed n_min {self.n_min}")
        if k - 1 > n_max - self.n_min:
            raise DataError(
                f"cannot draw {k} distinct sizes from [{self.n_min}, {n_max}]"
            )
        rng = random.Random(seed)
        sizes = {self.n_min}
        while len(sizes) < k:
            sizes.add(rng.randint(self.n_min + 1, n_max))
        return [(n, self.acr(n)) for n in sorted(sizes)]

    def build_curve(
        self, k: int, n_max: int = DEFAULT_N_MAX, seed: int = 0,
        floor_r: float | None = None,
    ) -> CompressionCurve:
        samples = self.sample_curve(k, n_max=n_max, seed=seed)
        a = self.asymptote()
        fit = fit_beta(samples, a, self.n_min)
        curve = CompressionCurve(
            language_id=self.corpus.language_id,
            n_min=self.n_min,
            asymptote_a=a,
            samples=tuple(samples),
            beta=fit.beta,
        )
        selected = select_sizes(curve, floor_r=floor_r)
        return CompressionCurve(
            language_id=curve.language_id, n_min=curve.n_min,
            asymptote_a=curve.asymptote_a, samples=curve.samples,
            beta=curve.beta, selected=tuple(selected),
        )


def fit_beta(
    samples: list[tuple[int, float]] | tuple[tuple[int, float], ...],
    a: float, n_min: int,
) -> FitResult:
    """Least-squares slope of log((r - a)/(1 - a)) against log(n / n_min).

    Points at n == n_min carry no leverage and points at or below the
    asymptote are outside the log domain; both are excluded (the latter are
    counted in ``n_excluded``).
    """
    if not 0 < a < 1:
        raise NumericError(f"asymptote must lie in (0, 1), got {a}")
    num = 0.0
    den = 0.0
    used = 0
    excluded = 0
    for n, r in samples:
        if n <= n_min:
            continue
        if r <= a + 1e-9:
            excluded += 1
            continue
        u = math.log(n / n_min)
        v = math.log((r - a) / (1 - a))
        num += u * v
        den += u * u
        used += 1
    if used == 0:
        raise NumericError("no usable samples above the asymptote to fit beta")
    return FitResult(beta=num / den, n_used=used, n_excluded=excluded)


def model_acr(beta: float, a: float, n_min: int, n: float) -> float:
    """Forward model r(n) = (1 - a) (n / n_min)^beta + a."""
    return (1 - a) * (n / n_min) ** beta + a


def invert_model_exact(beta: float, a: float, n_min: int, target_r: float) -> float:
    """Unrounded inverse of the fitted model."""
    if not beta < 0:
        raise NumericError(f"beta must be negative, got {beta}")
    if target_r <= a:
        raise NumericError(f"target rate {target_r} at or below asymptote {a}")
    if target_r > 1.0:
        raise NumericError(f"target rate {target_r} above 1.0")
    return n_min * ((target_r - a) / (1 - a)) ** (1.0 / beta)


def invert_model(beta: float, a: float, n_min: int, target_r: float) -> int:
    """Vocabulary size whose modeled ACR equals ``target_r`` (rounded, >= n_min)."""
    return max(n_min, round(invert_model_exact(beta, a, n_min, target_r)))


def _next_mark_above(x: float) -> float:
    """Smallest two-decimal rate strictly greater than x."""
    return (math.floor(round(x * 100, 9)) + 1) / 100


def select_sizes(
    curve: CompressionCurve, floor_r: float | None = None
) -> list[tuple[int, float]]:
    """Vocabulary sizes at 0.1-mark compression rates (1.0, 0.9, ...).

    Marks stop above the asymptote (or ``floor_r`` if higher). When further
    0.1 marks are unreachable, one final size is added at the smallest
    two-decimal rate above the bound, mirroring trailing non-mark rates such
    as a curve ending at rate 0.29 just above an asymptote of 0.28x. If no
    mark below 1.0 is reachable the floor vocabulary alone is returned.
    """
    a = curve.asymptote_a
    bound = max(a, floor_r) if floor_r is not None else a
    if bound >= 1.0:
        raise NumericError("no reachable compression marks")
    marks = []
    m = 1.0
    while m > bound + 1e-12:
        marks.append(round(m, 1))
        m = round(m - MARK_STEP, 1)
    if not marks:
        raise NumericError("no reachable compression marks")
    if len(marks) == 1:
        return [(curve.n_min, 1.0)]
    tail = _next_mark_above(bound)
    if tail < marks[-1] - 1e-12:
        marks.append(tail)

    out: list[tuple[int, float]] = []
    for r in marks:
        if r >= 1.0:
            n = curve.n_min
        else:
            n = invert_model(curve.beta, a, curve.n_min, r)
        # after rounding two marks can land on the same size; keep the
        # earlier (larger-rate) entry
        if out and n <= out[-1][0]:
            continue
        out.append((n, r))
    return out


def curve_to_dict(curve: CompressionCurve) -> dict:
    return {
        "language_id": curve.language_id,
        "n_min": curve.n_min,
        "a": curve.asymptote_a,
        "beta": curve.beta,
        "samples": [[n, r] for n, r in curve.samples],
        "selected": [[n, r] for n, r in curve.selected],
    }


def curve_from_dict(d: dict) -> CompressionCurve:
    return CompressionCurve(
        language_id=d["language_id"],
        n_min=int(d["n_min"]),
        asymptote_a=float(d["a"]),
        samples=tuple((int(n), float(r)) for n, r in d["samples"]),
        beta=float(d["beta"]),
        selected=tuple((int(n), float(r)) for n, r in d.get("selected", [])),
    )


def save_curve(curve: CompressionCurve, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(curve_to_dict(curve), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_curve(path: str | Path) -> CompressionCurve:
    return curve_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

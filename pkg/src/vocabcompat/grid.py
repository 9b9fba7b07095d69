"""Cartesian vocabulary-size grids of spectral compatibility.

Per (language, size) the pipeline trains a tokenizer, tokenizes, trains
embeddings and extracts the singular spectrum exactly once; grid cells only
combine cached spectra, so an m x n grid costs m + n trainings. Artifacts are
cached on disk keyed by corpus content, trainer configuration and seed.

When the second language is the fake twin of the first (language id suffix
``-fake``), its vocabulary at each size is derived from the first language's
vocabulary through the marker bijection instead of being trained on the fake
corpus. This keeps the two token streams identical id-by-id, which is what
makes the fake pair an exact diagonal oracle.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compression import (
    CompressionAnalyzer, CompressionCurve, invert_model_exact,
)
from .corpus import DEFAULT_FAKE_MARKER, Corpus, is_fake_of
from .embeddings import EmbedConfig, train_embeddings
from .errors import DataError
from .spectral import SVG_TOP_K, SingularSpectrum, singular_values, svg
from .wordpiece import MergeModel, Vocabulary, fake_aligned_vocab, token_count

SCHEMA_VERSION = 1
CACHE_ENV_VAR = "VC_CACHE_DIR"
DEFAULT_CONTOUR_MARKS = tuple(round(1.0 - 0.1 * i, 1) for i in range(10))


@dataclass(frozen=True)
class GridConfig:
    sizes_e: tuple[int, ...]
    sizes_f: tuple[int, ...]
    embed: EmbedConfig = EmbedConfig()
    seed: int = 0
    cache_dir: str | None = None
    fake_marker: str = DEFAULT_FAKE_MARKER
    svg_k: int = SVG_TOP_K
    min_frequency: int = 1

    def __post_init__(self):
        for name, sizes in (("sizes_e", self.sizes_e), ("sizes_f", self.sizes_f)):
            if not sizes:
                raise DataError(f"{name} must be non-empty")
            if list(sizes) != sorted(set(sizes)):
                raise DataError(f"{name} must be strictly increasing")


@dataclass(frozen=True)
class CompatGrid:
    language_e: str
    language_f: str
    sizes_e: tuple[tuple[int, float], ...]  # (n, acr)
    sizes_f: tuple[tuple[int, float], ...]
    cells: tuple[tuple[float, ...], ...]  # rows follow sizes_e, cols sizes_f
    contour: tuple[tuple[float, float], ...] = ()
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if len(self.cells) != len(self.sizes_e) or any(
            len(row) != len(self.sizes_f) for row in self.cells
        ):
            raise DataError("grid cell matrix does not match the size axes")
        for row in self.cells:
            for v in row:
                if not np.isfinite(v):
                    raise DataError("grid contains non-finite cells")


def corpus_hash(corpus: Corpus) -> str:
    h = hashlib.sha256()
    h.update(corpus.language_id.encode("utf-8") + b"\x00")
    for uid, text in corpus.units:
        h.update(uid.encode("utf-8") + b"\t" + text.encode("utf-8") + b"\n")
    return h.hexdigest()


def job_seed(root_seed: int, n: int) -> int:
    """Per-size seed shared by both sides, so matched sizes get matched seeds."""
    return int(np.random.SeedSequence([root_seed, n]).generate_state(1, np.uint64)[0])


class GridRunner:
    """Runs one language pair's grid with per-(language, size) caching."""

    def __init__(self, corpus_e: Corpus, corpus_f: Corpus, config: GridConfig):
        self.corpus_e = corpus_e
        self.corpus_f = corpus_f
        self.config = config
        self.stats = {"trainings": 0, "cache_hits": 0}
        self._mem_cache: dict[str, SingularSpectrum] = {}
        self._models: dict[str, MergeModel] = {}
        self.fake_pair = is_fake_of(corpus_f.language_id, corpus_e.language_id)
        cache_dir = config.cache_dir or os.environ.get(CACHE_ENV_VAR)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    def _model(self, corpus: Corpus) -> MergeModel:
        model = self._models.get(corpus.language_id)
        if model is None:
            # the grid never needs merges beyond its largest size
            cap = max(self.config.sizes_e + self.config.sizes_f)
            model = MergeModel(corpus, max_size=cap,
                               min_frequency=self.config.min_frequency)
            self._models[corpus.language_id] = model
        return model

    def _vocab(self, side: str, n: int) -> Vocabulary:
        if side == "f" and self.fake_pair:
            return fake_aligned_vocab(
                self._model(self.corpus_e).vocab_at(n), self.config.fake_marker
            )
        corpus = self.corpus_e if side == "e" else self.corpus_f
        return self._model(corpus).vocab_at(n)

    def _floor_vocab(self, side: str) -> Vocabulary:
        model = self._model(self.corpus_e if side == "e" or self.fake_pair
                            else self.corpus_f)
        return self._vocab(side, model.n_min)

    def _cache_key(self, side: str, n: int) -> str:
        corpus = self.corpus_e if side == "e" else self.corpus_f
        parts = [
            corpus_hash(corpus),
            str(n),
            self.config.embed.cache_token(),
            str(job_seed(self.config.seed, n)),
            f"minfreq={self.config.min_frequency}",
            "fake-aligned" if (side == "f" and self.fake_pair) else "native",
        ]
        return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()

    def spectrum(self, side: str, n: int) -> SingularSpectrum:
        key = self._cache_key(side, n)
        spec = self._mem_cache.get(key)
        if spec is not None:
            self.stats["cache_hits"] += 1
            return spec
        if self.cache_dir:
            path = self.cache_dir / f"{key}.spectrum.json"
            if path.exists():
                d = json.loads(path.read_text(encoding="utf-8"))
                spec = SingularSpectrum(values=tuple(d["values"]),
                                        source=tuple(d["source"]))
                self._mem_cache[key] = spec
                self.stats["cache_hits"] += 1
                return spec
        spec = self._train_job(side, n)
        self._mem_cache[key] = spec
        if self.cache_dir:
            path = self.cache_dir / f"{key}.spectrum.json"
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(
                {"values": list(spec.values), "source": list(spec.source)}
            ), encoding="utf-8")
            tmp.replace(path)
        return spec

    def _train_job(self, side: str, n: int) -> SingularSpectrum:
        corpus = self.corpus_e if side == "e" else self.corpus_f
        vocab = self._vocab(side, n)
        em = train_embeddings(corpus, vocab, self.config.embed,
                              seed=job_seed(self.config.seed, n))
        self.stats["trainings"] += 1
        return singular_values(em)

    def acr_at(self, side: str, n: int) -> float:
        corpus = self.corpus_e if side == "e" else self.corpus_f
        floor = token_count(self._floor_vocab(side), corpus)
        return token_count(self._vocab(side, n), corpus) / floor

    def run(self, curve_e: CompressionCurve | None = None,
            curve_f: CompressionCurve | None = None,
            contour_marks: tuple[float, ...] = DEFAULT_CONTOUR_MARKS) -> CompatGrid:
        spectra_e = {n: self.spectrum("e", n) for n in self.config.sizes_e}
        spectra_f = {n: self.spectrum("f", n) for n in self.config.sizes_f}
        cells = tuple(
            tuple(svg(spectra_e[ne], spectra_f[nf], k=self.config.svg_k)
                  for nf in self.config.sizes_f)
            for ne in self.config.sizes_e
        )
        contour = ()
        if curve_e is not None and curve_f is not None:
            contour = tuple(equal_acr_contour(curve_e, curve_f, contour_marks))
        return CompatGrid(
            language_e=self.corpus_e.language_id,
            language_f=self.corpus_f.language_id,
            sizes_e=tuple((n, self.acr_at("e", n)) for n in self.config.sizes_e),
            sizes_f=tuple((n, self.acr_at("f", n)) for n in self.config.sizes_f),
            cells=cells,
            contour=contour,
        )


def run_grid(corpus_e: Corpus, corpus_f: Corpus, config: GridConfig,
             curve_e: CompressionCurve | None = None,
             curve_f: CompressionCurve | None = None) -> CompatGrid:
    return GridRunner(corpus_e, corpus_f, config).run(curve_e, curve_f)


def equal_acr_contour(
    curve_e: CompressionCurve, curve_f: CompressionCurve,
    marks: tuple[float, ...] = DEFAULT_CONTOUR_MARKS,
) -> list[tuple[float, float]]:
    """Size pairs at which both fitted models hit the same compression rate.

    Marks unreachable for either curve (at or below its asymptote, or above
    1.0) are skipped. Coordinates are the exact (unrounded) model inverses so
    the two modeled rates agree identically at each point.
    """
    points = []
    for r in marks:
        if r > 1.0:
            continue
        if r <= max(curve_e.asymptote_a, curve_f.asymptote_a):
            continue
        if r >= 1.0:
            points.append((float(curve_e.n_min), float(curve_f.n_min)))
            continue
        points.append((
            invert_model_exact(curve_e.beta, curve_e.asymptote_a, curve_e.n_min, r),
            invert_model_exact(curve_f.beta, curve_f.asymptote_a, curve_f.n_min, r),
        ))
    return points


def grid_to_dict(grid: CompatGrid) -> dict:
    return {
        "schema_version": grid.schema_version,
        "language_e": grid.language_e,
        "language_f": grid.language_f,
        "sizes_e": [[n, r] for n, r in grid.sizes_e],
        "sizes_f": [[n, r] for n, r in grid.sizes_f],
        "cells": [list(row) for row in grid.cells],
        "contour": [[x, y] for x, y in grid.contour],
    }


def grid_from_dict(d: dict) -> CompatGrid:
    return CompatGrid(
        language_e=d["language_e"],
        language_f=d["language_f"],
        sizes_e=tuple((int(n), float(r)) for n, r in d["sizes_e"]),
        sizes_f=tuple((int(n), float(r)) for n, r in d["sizes_f"]),
        cells=tuple(tuple(float(v) for v in row) for row in d["cells"]),
        contour=tuple((float(x), float(y)) for x, y in d.get("contour", [])),
        schema_version=int(d.get("schema_version", SCHEMA_VERSION)),
    )


def export_grid(grid: CompatGrid, fmt: str, path: str | Path) -> None:
    """Write a grid as json (full structure), csv (long form) or pgm
    (nearest-neighbor grayscale heatmap, min-max normalized)."""
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(grid_to_dict(grid), indent=2, sort_keys=True)
                        + "\n", encoding="utf-8")
    elif fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as f:
            w = csv.writer(f)
            w.writerow(["n_e", "n_f", "acr_e", "acr_f", "svg"])
            for (ne, acr_e), row in zip(grid.sizes_e, grid.cells):
                for (nf, acr_f), value in zip(grid.sizes_f, row):
                    w.writerow([ne, nf, f"{acr_e:.10g}", f"{acr_f:.10g}",
                                f"{value:.10g}"])
    elif fmt == "pgm":
        cells = np.array(grid.cells, dtype=np.float64)
        lo, hi = cells.min(), cells.max()
        if hi > lo:
            img = np.rint((cells - lo) / (hi - lo) * 255).astype(int)
        else:
            img = np.full(cells.shape, 128, dtype=int)  # constant grid: mid-gray
        lines = [f"P2", f"# rows: sizes_e ascending; cols: sizes_f ascending",
                 f"{img.shape[1]} {img.shape[0]}", "255"]
        lines += [" ".join(str(v) for v in row) for row in img]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise DataError(f"unknown export format {fmt!r}")

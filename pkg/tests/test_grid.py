import json

import numpy as np
import pytest

from conftest import random_corpus
from vocabcompat.compression import CompressionCurve
from vocabcompat.corpus import fake_language
from vocabcompat.embeddings import EmbedConfig
from vocabcompat.errors import DataError
from vocabcompat.grid import (
    CompatGrid, GridConfig, GridRunner, corpus_hash, equal_acr_contour,
    export_grid, grid_from_dict, grid_to_dict, job_seed,
)
from vocabcompat.wordpiece import min_vocab_size

FAST_EMBED = EmbedConfig(dim=40, window=3, negatives=3, epochs=1)


def fake_pair_setup(seed=0, deltas=(0, 8, 24)):
    c = random_corpus(seed, min_words=300, max_words=800)
    fake = fake_language(c)
    sizes = tuple(min_vocab_size(c) + d for d in deltas)
    return c, fake, sizes


def curve(a, beta, n_min, lang="x"):
    return CompressionCurve(language_id=lang, n_min=n_min, asymptote_a=a,
                            samples=((n_min, 1.0),), beta=beta)


class TestConfig:
    def test_rejects_unsorted_sizes(self):
        with pytest.raises(DataError, match="increasing"):
            GridConfig(sizes_e=(10, 5), sizes_f=(5,))

    def test_rejects_empty(self):
        with pytest.raises(DataError, match="non-empty"):
            GridConfig(sizes_e=(), sizes_f=(5,))


class TestJobSeed:
    def test_deterministic(self):
        assert job_seed(0, 100) == job_seed(0, 100)

    def test_varies_with_size_and_root(self):
        assert job_seed(0, 100) != job_seed(0, 101)
        assert job_seed(0, 100) != job_seed(1, 100)


class TestCorpusHash:
    def test_sensitive_to_text(self):
        a = random_corpus(0, max_words=200)
        b = random_corpus(1, max_words=200)
        assert corpus_hash(a) != corpus_hash(b)
        assert corpus_hash(a) == corpus_hash(a)


class TestRunner:
    def test_training_count_is_sum_not_product(self):
        c, fake, sizes = fake_pair_setup()
        config = GridConfig(sizes_e=sizes, sizes_f=sizes, embed=FAST_EMBED)
        runner = GridRunner(c, fake, config)
        grid = runner.run()
        assert runner.stats["trainings"] == len(sizes) * 2
        assert len(grid.cells) == len(sizes)
        assert all(len(row) == len(sizes) for row in grid.cells)

    def test_fake_diagonal_is_zero(self):
        c, fake, sizes = fake_pair_setup(seed=1)
        config = GridConfig(sizes_e=sizes, sizes_f=sizes, embed=FAST_EMBED)
        grid = GridRunner(c, fake, config).run()
        cells = np.array(grid.cells)
        for i in range(len(sizes)):
            assert cells[i, i] < 1e-12
            off = np.concatenate([cells[i, :i], cells[i, i + 1:]])
            assert np.all(off > cells[i, i])

    def test_fake_acr_axes_match(self):
        c, fake, sizes = fake_pair_setup(seed=2)
        config = GridConfig(sizes_e=sizes, sizes_f=sizes, embed=FAST_EMBED)
        grid = GridRunner(c, fake, config).run()
        for (ne, re_), (nf, rf) in zip(grid.sizes_e, grid.sizes_f):
            assert ne == nf and re_ == pytest.approx(rf, abs=1e-12)
        assert grid.sizes_e[0][1] == 1.0

    def test_disk_cache_eliminates_retraining(self, tmp_path):
        c, fake, sizes = fake_pair_setup(seed=3, deltas=(0, 10))
        config = GridConfig(sizes_e=sizes, sizes_f=sizes, embed=FAST_EMBED,
                            cache_dir=str(tmp_path))
        first = GridRunner(c, fake, config)
        g1 = first.run()
        assert first.stats["trainings"] == 4
        second = GridRunner(c, fake, config)
        g2 = second.run()
        assert second.stats["trainings"] == 0
        assert second.stats["cache_hits"] > 0
        assert g1.cells == g2.cells

    def test_cache_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("VC_CACHE_DIR", str(tmp_path))
        c, fake, sizes = fake_pair_setup(seed=4, deltas=(0, 6))
        config = GridConfig(sizes_e=sizes, sizes_f=sizes, embed=FAST_EMBED)
        GridRunner(c, fake, config).run()
        assert list(tmp_path.glob("*.spectrum.json"))

    def test_cache_key_separates_configs(self, tmp_path):
        c, fake, sizes = fake_pair_setup(seed=5, deltas=(0,))
        base = dict(sizes_e=sizes, sizes_f=sizes, cache_dir=str(tmp_path))
        GridRunner(c, fake, GridConfig(embed=FAST_EMBED, **base)).run()
        other = GridRunner(
            c, fake, GridConfig(embed=EmbedConfig(dim=41, epochs=1), **base))
        other.run()
        assert other.stats["trainings"] == 2


class TestContour:
    def test_identical_curves_diagonal(self):
        ce = curve(0.25, -0.6, 120)
        points = equal_acr_contour(ce, ce)
        assert points[0] == (120.0, 120.0)
        for x, y in points:
            assert x == pytest.approx(y)

    def test_skips_unreachable_marks(self):
        ce = curve(0.45, -0.6, 100)
        cf = curve(0.25, -0.6, 100)
        rates = [1.0 - 0.1 * i for i in range(10)]
        points = equal_acr_contour(ce, cf, tuple(rates))
        # marks at or below the larger asymptote (0.45) are dropped
        assert len(points) == 6

    def test_modeled_rates_agree(self):
        from vocabcompat.compression import model_acr
        ce = curve(0.2, -0.5, 100)
        cf = curve(0.3, -0.9, 250)
        for x, y in equal_acr_contour(ce, cf):
            re_ = model_acr(ce.beta, ce.asymptote_a, ce.n_min, x)
            rf = model_acr(cf.beta, cf.asymptote_a, cf.n_min, y)
            assert abs(re_ - rf) < 1e-6


def small_grid():
    return CompatGrid(
        language_e="e", language_f="f",
        sizes_e=((10, 1.0), (20, 0.8)),
        sizes_f=((12, 1.0), (24, 0.7), (48, 0.5)),
        cells=((0.0, 1.0, 2.0), (1.5, 0.5, 3.0)),
        contour=((10.0, 12.0),),
    )


class TestSerialization:
    def test_dict_round_trip(self):
        g = small_grid()
        assert grid_from_dict(grid_to_dict(g)) == g

    def test_shape_validation(self):
        with pytest.raises(DataError, match="axes"):
            CompatGrid(language_e="e", language_f="f",
                       sizes_e=((10, 1.0),), sizes_f=((12, 1.0),),
                       cells=((0.0, 1.0),))

    def test_non_finite_rejected(self):
        with pytest.raises(DataError, match="non-finite"):
            CompatGrid(language_e="e", language_f="f",
                       sizes_e=((10, 1.0),), sizes_f=((12, 1.0),),
                       cells=((float("nan"),),))


class TestExport:
    def test_json(self, tmp_path):
        export_grid(small_grid(), "json", tmp_path / "g.json")
        d = json.loads((tmp_path / "g.json").read_text())
        assert grid_from_dict(d) == small_grid()

    def test_csv(self, tmp_path):
        export_grid(small_grid(), "csv", tmp_path / "g.csv")
        lines = (tmp_path / "g.csv").read_text().strip().splitlines()
        assert lines[0] == "n_e,n_f,acr_e,acr_f,svg"
        assert len(lines) == 1 + 2 * 3
        assert lines[1].startswith("10,12,")

    def test_pgm(self, tmp_path):
        export_grid(small_grid(), "pgm", tmp_path / "g.pgm")
        lines = (tmp_path / "g.pgm").read_text().splitlines()
        assert lines[0] == "P2"
        assert lines[2] == "3 2" and lines[3] == "255"
        pixels = [int(v) for row in lines[4:] for v in row.split()]
        assert min(pixels) == 0 and max(pixels) == 255

    def test_pgm_constant(self, tmp_path):
        g = CompatGrid(language_e="e", language_f="f",
                       sizes_e=((10, 1.0),), sizes_f=((12, 1.0),),
                       cells=((2.5,),))
        export_grid(g, "pgm", tmp_path / "c.pgm")
        assert (tmp_path / "c.pgm").read_text().splitlines()[4] == "128"

    def test_unknown_format(self, tmp_path):
        with pytest.raises(DataError, match="format"):
            export_grid(small_grid(), "bmp", tmp_path / "g.bmp")

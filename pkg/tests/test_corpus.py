import pytest
from hypothesis import given, strategies as st

from conftest import corpus_of
from vocabcompat.corpus import (
    Corpus, align, fake_language, load_corpus, save_corpus, split,
    unfake_language,
)
from vocabcompat.errors import DataError


def write(tmp_path, content, name="c.tsv"):
    path = tmp_path / name
    path.write_bytes(content if isinstance(content, bytes) else content.encode())
    return path


class TestLoad:
    def test_two_units(self, tmp_path):
        path = write(tmp_path, "40001001\tIn the beginning\n40001002\tAnd the earth\n")
        c = load_corpus(path, "eng")
        assert len(c) == 2
        assert c.text_of("40001001") == "In the beginning"
        assert c.ids() == ["40001001", "40001002"]

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError, match="empty corpus"):
            load_corpus(write(tmp_path, ""), "eng")

    def test_duplicate_id(self, tmp_path):
        path = write(tmp_path, "40001001\ta\n40001001\tb\n")
        with pytest.raises(DataError, match="duplicate"):
            load_corpus(path, "eng")

    def test_missing_tab(self, tmp_path):
        with pytest.raises(DataError, match="missing tab"):
            load_corpus(write(tmp_path, "40001001 no tab here\n"), "eng")

    def test_invalid_utf8(self, tmp_path):
        with pytest.raises(DataError, match="UTF-8"):
            load_corpus(write(tmp_path, b"1\t\xff\xfe\n"), "eng")

    def test_roundtrip(self, tmp_path):
        c = corpus_of("purple haze", "all in  my brain")
        save_corpus(c, tmp_path / "out.tsv")
        again = load_corpus(tmp_path / "out.tsv", c.language_id)
        assert again.units == c.units


class TestAlign:
    def test_intersection_keeps_left_order(self):
        left = Corpus("l", (("a", "x"), ("b", "y"), ("c", "z")))
        right = Corpus("r", (("c", "q"), ("b", "p"), ("d", "r")))
        assert align(left, right).common_ids == ("b", "c")

    def test_identity(self):
        c = corpus_of("one", "two", "three")
        assert list(align(c, c).common_ids) == c.ids()

    def test_disjoint(self):
        left = Corpus("l", (("a", "x"),))
        right = Corpus("r", (("b", "y"),))
        with pytest.raises(DataError, match="no common"):
            align(left, right)


class TestFakeLanguage:
    def test_marker_prefix(self):
        c = corpus_of("purple haze")
        assert fake_language(c, "0en0").units[0][1] == "0en0purple 0en0haze"

    def test_whitespace_preserved(self):
        c = corpus_of("a  b\tc")
        assert fake_language(c, "Q").units[0][1] == "Qa  Qb\tQc"

    def test_language_id_suffix(self):
        assert fake_language(corpus_of("x")).language_id == "test-fake"

    def test_round_trip(self):
        c = corpus_of("In the beginning", "And  the earth")
        assert unfake_language(fake_language(c)).units == c.units

    def test_marker_collision(self):
        with pytest.raises(DataError, match="marker"):
            fake_language(corpus_of("contains 0en0 already"))

    @given(st.lists(
        st.text(alphabet=st.characters(min_codepoint=0x61, max_codepoint=0x7A),
                min_size=1, max_size=30).filter(lambda s: s.strip()),
        min_size=1, max_size=10,
    ))
    def test_bijection_and_word_counts(self, texts):
        c = corpus_of(*texts)
        fake = fake_language(c)
        assert unfake_language(fake).units == c.units
        for (_, orig), (_, faked) in zip(c.units, fake.units):
            assert len(orig.split()) == len(faked.split())


class TestSplit:
    def make_pair(self, n=30):
        texts = [f"unit text {i}" for i in range(n)]
        c = corpus_of(*texts)
        return align(c, c)

    def test_sizes(self):
        pair = self.make_pair(30)
        (train, dev, test), _ = split(pair, dev_n=5, test_n=3, seed=1)
        assert len(dev) == 5 and len(test) == 3 and len(train) == 22

    def test_empty_dev_test(self):
        pair = self.make_pair(10)
        (train, dev, test), _ = split(pair, dev_n=0, test_n=0, seed=1)
        assert dev is None and test is None
        assert train.units == pair.left.units

    def test_deterministic(self):
        pair = self.make_pair(40)
        a = split(pair, dev_n=10, test_n=5, seed=9)
        b = split(pair, dev_n=10, test_n=5, seed=9)
        assert a[0][1].units == b[0][1].units
        assert a[0][2].units == b[0][2].units

    def test_disjoint_and_cover(self):
        pair = self.make_pair(25)
        (train, dev, test), _ = split(pair, dev_n=6, test_n=4, seed=3)
        ids = [set(part.ids()) for part in (train, dev, test)]
        assert not (ids[0] & ids[1]) and not (ids[0] & ids[2]) and not (ids[1] & ids[2])
        assert ids[0] | ids[1] | ids[2] == set(pair.left.ids())

    def test_shared_across_sides(self):
        pair = self.make_pair(25)
        left_parts, right_parts = split(pair, dev_n=6, test_n=4, seed=3)
        assert left_parts[1].ids() == right_parts[1].ids()
        assert left_parts[2].ids() == right_parts[2].ids()

    def test_insufficient(self):
        pair = self.make_pair(5)
        with pytest.raises(DataError, match="cannot draw"):
            split(pair, dev_n=3, test_n=2, seed=0)

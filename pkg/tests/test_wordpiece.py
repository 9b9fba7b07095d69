import pytest
from hypothesis import given, settings, strategies as st

from conftest import corpus_of, random_corpus
from vocabcompat.corpus import fake_language
from vocabcompat.errors import DataError
from vocabcompat.wordpiece import (
    UNK, MergeModel, Vocabulary, decode_words, encode, encode_pieces,
    fake_aligned_vocab, load_vocab, min_vocab_size, pretokenize, save_vocab,
    token_count, train,
)

ABAB = corpus_of("ab ab ab")


class TestMinVocabSize:
    def test_two_codepoints(self):
        assert min_vocab_size(corpus_of("ab ab")) == 1 + 2 * 2

    def test_single_codepoint(self):
        assert min_vocab_size(corpus_of("aaaa")) == 1 + 2

    def test_whitespace_not_counted(self):
        assert min_vocab_size(corpus_of("a b", "a\tb")) == 1 + 2 * 2


class TestTrain:
    def test_single_merge(self):
        vocab = train(ABAB, min_vocab_size(ABAB) + 1)
        assert vocab.tokens[-1] == "ab"

    def test_floor_is_doubled_alphabet(self):
        vocab = train(ABAB, min_vocab_size(ABAB))
        assert vocab.tokens == (UNK, "a", "b", "##a", "##b")

    def test_deterministic_files(self, tmp_path):
        c = random_corpus(7, max_words=400)
        for name in ("v1.txt", "v2.txt"):
            save_vocab(train(c, min_vocab_size(c) + 50), tmp_path / name)
        assert (tmp_path / "v1.txt").read_bytes() == (tmp_path / "v2.txt").read_bytes()

    def test_below_floor_rejected(self):
        with pytest.raises(DataError, match="floor"):
            train(ABAB, 3)

    def test_size_capped_at_ceiling(self):
        vocab = train(ABAB, 10_000)
        assert len(vocab) < 10_000
        assert "ab" in vocab.tokens

    def test_merge_score_prefers_rare_parts(self):
        # "xy" merges first: score 3/(3*3) beats "aa" at 5/(5*5)
        c = corpus_of("xy xy xy aa aa aa aa aa")
        model = MergeModel(c, max_size=min_vocab_size(c) + 1)
        assert model.token_order[-1] == "xy"


class TestEncode:
    def fixture_vocab(self):
        return Vocabulary(tokens=(UNK, "Ex", "##ception", "##al", "weather", "."))

    def test_bert_example(self):
        pieces = encode_pieces(self.fixture_vocab(), "Exceptional weather.",
                               isolate_punctuation=True)
        assert pieces == ["Ex", "##ception", "##al", "weather", "."]

    def test_floor_is_per_character(self):
        vocab = train(ABAB, min_vocab_size(ABAB))
        assert encode_pieces(vocab, "ab ba") == ["a", "##b", "b", "##a"]

    def test_oov_word_is_unk(self):
        vocab = train(ABAB, min_vocab_size(ABAB) + 1)
        assert encode_pieces(vocab, "ab zz ab") == ["ab", UNK, "ab"]

    def test_word_cap(self):
        vocab = train(ABAB, min_vocab_size(ABAB))
        assert encode_pieces(vocab, "a" * 101) == [UNK]
        assert encode_pieces(vocab, "a" * 100) != [UNK]

    def test_indices(self):
        vocab = train(ABAB, min_vocab_size(ABAB) + 1)
        seq = encode(vocab, "ab ab", source_unit="u1")
        assert seq.tokens == (vocab.index("ab"), vocab.index("ab"))
        assert seq.source_unit == "u1"
        assert all(i < len(vocab) for i in seq.tokens)

    def test_pretokenize_punct(self):
        assert pretokenize("a.b c!", isolate_punctuation=True) == \
            ["a", ".", "b", "c", "!"]
        assert pretokenize("a.b c!") == ["a.b", "c!"]


class TestTokenCount:
    def test_floor_count(self):
        assert token_count(train(ABAB, min_vocab_size(ABAB)), ABAB) == 6

    def test_merged_count(self):
        assert token_count(train(ABAB, min_vocab_size(ABAB) + 1), ABAB) == 3

    def test_empty_text_contributes_zero(self):
        vocab = train(ABAB, min_vocab_size(ABAB))
        assert encode_pieces(vocab, "") == []


class TestProperties:
    @pytest.mark.parametrize("seed", range(6))
    def test_monotone_under_vocab_growth(self, seed):
        c = random_corpus(seed, max_words=600)
        model = MergeModel(c, max_size=min_vocab_size(c) + 64)
        counts = [
            token_count(model.vocab_at(min(model.n_min + d, model.ceiling)), c)
            for d in (0, 2, 8, 32, 64)
        ]
        assert counts == sorted(counts, reverse=True)

    @pytest.mark.parametrize("seed", range(4))
    def test_lossless_round_trip(self, seed):
        c = random_corpus(seed, max_words=500)
        vocab = train(c, min_vocab_size(c) + 40)
        for text in c.texts():
            pieces = encode_pieces(vocab, text)
            assert UNK not in pieces
            assert decode_words(vocab, pieces) == text.split()

    @given(st.text(alphabet="abc", min_size=1, max_size=20).filter(str.strip))
    @settings(max_examples=60, deadline=None)
    def test_piece_count_bounds(self, word):
        c = corpus_of("abc cab bca a b c aa bb cc")
        vocab = train(c, min_vocab_size(c) + 3)
        word = word.strip()
        pieces = encode_pieces(vocab, word)
        assert 1 <= len(pieces) <= len(word)

    def test_deterministic_token_lists(self):
        c = random_corpus(11, max_words=500)
        v1 = train(c, min_vocab_size(c) + 30)
        v2 = train(c, min_vocab_size(c) + 30)
        assert v1.tokens == v2.tokens


class TestVocabFile:
    def test_round_trip_bit_exact(self, tmp_path):
        c = random_corpus(3, max_words=300)
        vocab = train(c, min_vocab_size(c) + 20)
        save_vocab(vocab, tmp_path / "v.txt")
        again = load_vocab(tmp_path / "v.txt")
        assert again.tokens == vocab.tokens
        save_vocab(again, tmp_path / "v2.txt")
        assert (tmp_path / "v.txt").read_bytes() == (tmp_path / "v2.txt").read_bytes()

    def test_missing_specials(self, tmp_path):
        (tmp_path / "bad.txt").write_text("a\nb\n", encoding="utf-8")
        with pytest.raises(DataError, match="special"):
            load_vocab(tmp_path / "bad.txt")


class TestFakeAlignedVocab:
    def test_stream_isomorphism(self):
        c = corpus_of("purple haze all in my brain", "purple rain all over")
        fake = fake_language(c)
        vocab = train(c, min_vocab_size(c) + 10)
        mapped = fake_aligned_vocab(vocab, "0en0")
        for (_, text), (_, ftext) in zip(c.units, fake.units):
            assert encode(vocab, text).tokens == encode(mapped, ftext).tokens

    def test_specials_and_continuations_unchanged(self):
        vocab = Vocabulary(tokens=(UNK, "ab", "##cd"))
        mapped = fake_aligned_vocab(vocab, "Q")
        assert mapped.tokens == (UNK, "Qab", "##cd")

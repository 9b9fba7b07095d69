"""Cross-lingual subword vocabulary compatibility toolkit."""

from .corpus import (
    AlignedPair, Corpus, align, fake_language, load_corpus, save_corpus,
    split, unfake_language,
)
from .wordpiece import (
    TokenSequence, Vocabulary, encode, encode_pieces, load_vocab,
    min_vocab_size, save_vocab, token_count, train,
)
from .compression import (
    CompressionAnalyzer, CompressionCurve, fit_beta, invert_model,
    model_acr, select_sizes,
)
from .embeddings import EmbedConfig, EmbeddingMatrix, train_embeddings
from .spectral import (
    SingularSpectrum, compatibility_ratio, pearson, singular_values, svg,
)
from .grid import CompatGrid, GridConfig, GridRunner, equal_acr_contour, export_grid
from .errors import DataError, NumericError, VocabCompatError

__version__ = "0.1.0"

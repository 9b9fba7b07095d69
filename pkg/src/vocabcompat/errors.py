"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: DataError -> 3, NumericError -> 4,
usage problems -> 2 (argparse).
"""


class VocabCompatError(Exception):
    """Base class for all package errors."""


class DataError(VocabCompatError):
    """Malformed or inconsistent input data (corpora, vocab files, CSVs)."""


class NumericError(VocabCompatError):
    """A numeric procedure cannot proceed (unfittable curve, unreachable rate)."""

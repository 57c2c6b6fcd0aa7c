from unfab import exceptions
from unfab.pipeline import derive
from unfab.pipeline import prepare
from unfab.pipeline import uncompute
from unfab.textfmt import parse_program
from unfab.version import __version__


__all__ = [
    "__version__",
    "derive",
    "exceptions",
    "parse_program",
    "prepare",
    "uncompute",
]

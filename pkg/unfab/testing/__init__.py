from unfab.testing._corpus import CORPUS
from unfab.testing._corpus import CorpusCase
from unfab.testing._corpus import load_program
from unfab.testing._corpus import program_names
from unfab.testing._corpus import program_text
from unfab.testing._random import random_corpus
from unfab.testing._random import random_function


__all__ = [
    "CORPUS",
    "CorpusCase",
    "load_program",
    "program_names",
    "program_text",
    "random_corpus",
    "random_function",
]

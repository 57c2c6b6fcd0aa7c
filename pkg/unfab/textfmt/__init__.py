from unfab.textfmt._lexer import tokenize
from unfab.textfmt._parser import parse_function
from unfab.textfmt._parser import parse_program
from unfab.textfmt._printer import format_function
from unfab.textfmt._printer import format_operation
from unfab.textfmt._printer import format_statement
from unfab.textfmt._printer import print_program


__all__ = [
    "format_function",
    "format_operation",
    "format_statement",
    "parse_function",
    "parse_program",
    "print_program",
    "tokenize",
]

"""JavaScript front end: parsing and printing for the supported subset."""

from . import ast
from .lexer import JsSyntaxError
from .parser import parse_js
from .printer import print_js

__all__ = ["ast", "JsSyntaxError", "parse_js", "print_js"]

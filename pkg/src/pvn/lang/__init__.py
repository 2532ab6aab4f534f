"""The ``.pvn`` policy language: parser, binder and printer."""

from .ast import Document
from .binder import Binding, BoundQuery, bind, load
from .parser import parse
from .printer import pretty, print_document, print_snapshot

__all__ = ["Binding", "BoundQuery", "Document", "bind", "load", "parse", "pretty", "print_document", "print_snapshot"]

"""Lexer and recursive-descent parser for ``.pvn`` policy documents.

Keywords are contextual: any identifier may name a member, group or content
node, and words like ``group`` or ``allow`` are only special where the
grammar expects them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import Location, PvnSyntaxError
from . import ast

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[<,;{}:/\[\]])
    """,
    re.VERBOSE,
)

NAME = "name"
EOF = "end of input"

PROTOCOLS = ("optimistic", "pessimistic", "cautious")


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, EOF, or the punctuation character itself
    text: str
    loc: Location

    def describe(self) -> str:
        if self.kind == EOF:
            return EOF
        return repr(self.text)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PvnSyntaxError(Location(line, pos - line_start + 1), {"token"}, repr(text[pos]))
        kind = m.lastgroup
        value = m.group()
        if kind == "name":
            tokens.append(Token(NAME, value, Location(line, pos - line_start + 1)))
        elif kind == "punct":
            tokens.append(Token(value, value, Location(line, pos - line_start + 1)))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token(EOF, "", Location(line, pos - line_start + 1)))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        # alternatives tried at the current position, reported on failure
        self.expected: set[str] = set()

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        self.expected = set()
        return t

    def fail(self):
        raise PvnSyntaxError(self.tok.loc, self.expected or {"statement"}, self.tok.describe())

    def at(self, kind: str) -> bool:
        self.expected.add(kind)
        return self.tok.kind == kind

    def at_word(self, *words: str) -> bool:
        self.expected.update(words)
        return self.tok.kind == NAME and self.tok.text in words

    def accept(self, kind: str) -> Token | None:
        return self._advance() if self.at(kind) else None

    def accept_word(self, *words: str) -> str | None:
        return self._advance().text if self.at_word(*words) else None

    def expect(self, kind: str) -> Token:
        if not self.at(kind):
            self.fail()
        return self._advance()

    def expect_word(self, *words: str) -> str:
        if not self.at_word(*words):
            self.fail()
        return self._advance().text

    def name(self) -> str:
        return self.expect(NAME).text

    def names(self) -> tuple[str, ...]:
        out = [self.name()]
        while self.accept(","):
            out.append(self.name())
        return tuple(out)

    def path(self) -> tuple[str, ...]:
        self.expect("/")
        out = [self.name()]
        while self.accept("/"):
            out.append(self.name())
        return tuple(out)

    # -- statements ---------------------------------------------------------

    def document(self) -> ast.Document:
        stmts = []
        while not self.at(EOF):
            stmts.append(self.statement())
        return ast.Document(tuple(stmts))

    def statement(self) -> ast.Statement:
        loc = self.tok.loc
        if self.accept_word("group"):
            return self.group_decl(loc)
        if self.accept_word("member"):
            name = self.name()
            groups = self.names() if self.accept_word("in") else ()
            self.expect(";")
            return ast.MemberDecl(name, groups, loc)
        if self.accept_word("content"):
            owner = self.name()
            self.expect("{")
            root = self.tree()
            self.expect("}")
            return ast.ContentDecl(owner, root, loc)
        if self.accept_word("policy"):
            return self.policy(loc)
        if self.at_word("can", "show", "audience", "explain"):
            return self.query()
        if self.accept_word("whatif"):
            self.expect("{")
            muts = []
            while not self.at("}"):
                muts.append(self.mutation())
                self.expect(";")
            self.expect("}")
            self.expect_word("diff")
            owner = self.name()
            self.expect(";")
            return ast.WhatIf(tuple(muts), owner, loc)
        if self.at_word(*MUTATION_WORDS):
            m = self.mutation()
            self.expect(";")
            return m
        self.fail()

    def group_decl(self, loc: Location) -> ast.GroupDecl:
        name = self.name()
        parents = self.names() if self.accept("<") else ()
        owner = self.name() if self.accept_word("owner") else None
        self.expect(";")
        return ast.GroupDecl(name, parents, owner, loc)

    def tree(self) -> ast.TreeNode:
        loc = self.tok.loc
        name = self.name()
        if self.accept(";"):
            return ast.TreeNode(name, None, loc)
        self.expect("{")
        kids = []
        while not self.at("}"):
            kids.append(self.tree())
        self.expect("}")
        return ast.TreeNode(name, tuple(kids), loc)

    def protocol(self) -> str:
        return self.expect_word(*PROTOCOLS)

    def policy(self, loc: Location) -> ast.PolicyBlock:
        owner = self.name()
        default = self.protocol() if self.accept_word("default") else None
        self.expect("{")
        rules = []
        while not self.at("}"):
            rloc = self.tok.loc
            effect = self.expect_word("allow", "deny")
            subject = self.name()
            self.expect(":")
            path = self.path()
            proto = None
            if self.accept("["):
                proto = self.protocol()
                self.expect("]")
            self.expect(";")
            rules.append(ast.Rule(effect, subject, path, proto, rloc))
        self.expect("}")
        return ast.PolicyBlock(owner, default, tuple(rules), loc)

    def query(self) -> ast.Query:
        loc = self.tok.loc
        word = self._advance().text
        if word == "show":
            viewer = self.name()
            self.expect_word("for")
            owner = self.name()
            self.expect(";")
            return ast.ShowQuery(viewer, owner, loc)
        if word == "audience":
            owner = self.name()
            self.expect(":")
            path = self.path()
            self.expect(";")
            return ast.AudienceQuery(owner, path, loc)
        viewer = self.name()
        self.expect_word("see")
        owner = self.name()
        self.expect(":")
        path = self.path()
        self.expect(";")
        cls = ast.CanQuery if word == "can" else ast.ExplainQuery
        return cls(viewer, owner, path, loc)

    def mutation(self) -> ast.MutationStmt:
        loc = self.tok.loc
        word = self.expect_word(*MUTATION_WORDS)
        if word == "create":
            self.expect_word("group")
            name = self.name()
            parent = self.name() if self.accept("<") else None
            owner = self.name() if self.accept_word("owner") else None
            return ast.CreateGroupStmt(name, parent, owner, loc)
        if word == "delete":
            self.expect_word("group")
            return ast.DeleteGroupStmt(self.name(), loc)
        if word in ("link", "unlink"):
            child = self.name()
            self.expect("<")
            cls = ast.LinkStmt if word == "link" else ast.UnlinkStmt
            return cls(child, self.name(), loc)
        if word == "join":
            return ast.JoinStmt(self.name(), self.name(), loc)
        if word == "leave":
            return ast.LeaveStmt(self.name(), self.name(), loc)
        if word == "move":
            member = self.name()
            self.expect_word("to")
            return ast.MoveStmt(member, self.name(), loc)
        # add / remove
        if word == "add" and self.accept_word("member"):
            return ast.AddMemberStmt(self.name(), loc)
        self.expect_word("content")
        owner = self.name()
        self.expect(":")
        path = self.path()
        cls = ast.AddContentStmt if word == "add" else ast.RemoveContentStmt
        return cls(owner, path, loc)


MUTATION_WORDS = ("create", "delete", "link", "unlink", "join", "leave", "move", "add", "remove")


def parse(text: str) -> ast.Document:
    """Parse a whole document; raises :class:`PvnSyntaxError` at the first error."""
    return Parser(text).document()

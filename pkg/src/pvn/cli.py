"""``pvn`` command-line interface.

Exit status: 0 success, 1 semantic or query failure, 2 syntax error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import TextIO

from .errors import PvnError, PvnSyntaxError
from .evolution import VisibilityDiff, DiffEntry, apply_batch, diff_visibility
from .lang import ast
from .lang.binder import BoundQuery, bind, to_mutation
from .lang.parser import parse
from .lang.printer import print_snapshot
from .model import NetworkSnapshot
from .resolution import PathVerdict, ResolutionTrace, audience, explain, resolve, visible_set

EXIT_OK = 0
EXIT_SEMANTIC = 1
EXIT_SYNTAX = 2
EXIT_IO = 3


def exit_status(exc: BaseException) -> int:
    if isinstance(exc, PvnSyntaxError):
        return EXIT_SYNTAX
    if isinstance(exc, PvnError):
        return EXIT_SEMANTIC
    if isinstance(exc, (OSError, UnicodeDecodeError)):
        return EXIT_IO
    raise exc


class Renderer:
    def __init__(self, out: TextIO, machine: bool = False, color: bool = False):
        self.out = out
        self.machine = machine
        self.color = color

    def line(self, text: str = "") -> None:
        self.out.write(text + "\n")

    def record(self, **fields) -> None:
        self.line(" ".join(f"{k}={'-' if v is None else v}" for k, v in fields.items()))

    def verdict_word(self, visible: bool) -> str:
        word = "VISIBLE" if visible else "INVISIBLE"
        if self.color:
            return f"\033[{'32' if visible else '31'}m{word}\033[0m"
        return word

    # -- queries ------------------------------------------------------------

    def can(self, snap: NetworkSnapshot, trace: ResolutionTrace) -> None:
        if not self.machine:
            self.line(self.verdict_word(trace.visible))
            return
        deciding = trace.deciding()
        a, proto = deciding if deciding else (None, None)
        self.record(
            query="can",
            viewer=trace.viewer,
            owner=trace.owner,
            path=snap.content_path(trace.content),
            verdict=trace.verdict,
            winner_subject=a.subject if a else None,
            winner_content=snap.content_path(a.content) if a else None,
            protocol=proto,
        )

    def show(self, snap: NetworkSnapshot, viewer, owner) -> None:
        paths = sorted(snap.content_path(c) for c in visible_set(snap, viewer, owner))
        if self.machine:
            for p in paths:
                self.record(query="show", viewer=viewer, owner=owner, path=p, verdict="visible")
        elif paths:
            for p in paths:
                self.line(p)
        else:
            self.line("(none)")

    def audience(self, snap: NetworkSnapshot, owner, content) -> None:
        names = sorted(m.name for m in audience(snap, owner, content))
        path = snap.content_path(content)
        for n in names:
            if self.machine:
                self.record(query="audience", viewer=n, owner=owner, path=path, verdict="visible")
            else:
                self.line(n)

    def explain(self, snap: NetworkSnapshot, trace: ResolutionTrace) -> None:
        path = snap.content_path(trace.content)
        if self.machine:
            for pv in trace.paths:
                self._path_record(snap, trace, pv)
            self.record(
                query="explain",
                viewer=trace.viewer,
                owner=trace.owner,
                path=path,
                verdict=trace.verdict,
                rule=trace.rule,
            )
            return
        self.line(f"explain {trace.viewer} see {trace.owner}:{path}")
        if trace.owner_bypass:
            self.line("  owner sees own content (no paths evaluated)")
        for pv in trace.paths:
            via = " > ".join(n.name for n in pv.path)
            if pv.winner is None:
                self.line(f"  {via}: undefined")
            else:
                a = pv.winner
                effect = "allow" if a.mode.value == "visible" else "deny"
                self.line(
                    f"  {via}: {pv.mode} by {effect} {a.subject} : {snap.content_path(a.content)} [{pv.protocol}]"
                )
        self.line(f"combination: {trace.rule}")
        self.line(self.verdict_word(trace.visible))

    def _path_record(self, snap, trace: ResolutionTrace, pv: PathVerdict) -> None:
        a = pv.winner
        self.record(
            query="explain-path",
            viewer=trace.viewer,
            owner=trace.owner,
            path=snap.content_path(trace.content),
            verdict=pv.mode or "undefined",
            winner_subject=a.subject if a else None,
            winner_content=snap.content_path(a.content) if a else None,
            protocol=pv.protocol,
            via=">".join(n.name for n in pv.path),
        )

    def diff(self, d: VisibilityDiff) -> None:
        if self.machine:
            for e in d.entries:
                self.record(
                    query="diff",
                    owner=d.owner,
                    viewer=e.viewer,
                    path=e.path,
                    old=DiffEntry.label(e.old),
                    new=DiffEntry.label(e.new),
                )
            return
        if not d.entries:
            self.line("no changes")
            return
        vw = max(len(e.viewer) for e in d.entries)
        pw = max(len(e.path) for e in d.entries)
        for e in d.entries:
            self.line(f"{e.viewer:<{vw}}  {e.path:<{pw}}  {DiffEntry.label(e.old)}→{DiffEntry.label(e.new)}")


def run_query(r: Renderer, q: BoundQuery) -> None:
    snap, s = q.snapshot, q.statement
    if isinstance(s, ast.CanQuery):
        r.can(snap, resolve(snap, q.viewer, q.owner, q.content))
    elif isinstance(s, ast.ShowQuery):
        r.show(snap, q.viewer, q.owner)
    elif isinstance(s, ast.AudienceQuery):
        r.audience(snap, q.owner, q.content)
    elif isinstance(s, ast.ExplainQuery):
        r.explain(snap, explain(snap, q.viewer, q.owner, q.content))
    elif isinstance(s, ast.WhatIf):
        r.diff(diff_visibility(snap, apply_batch(snap, q.mutations), q.owner))
    else:
        raise TypeError(s)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load(path: str) -> NetworkSnapshot:
    return bind(parse(_read(path))).snapshot


def _report(err: TextIO, exc: BaseException) -> int:
    code = exit_status(exc)
    err.write(f"error: {exc}\n")
    return code


def cmd_check(args, out: TextIO, err: TextIO) -> int:
    snap = _load(args.file)
    out.write(f"ok: {len(snap.groups)} groups, {len(snap.members)} members, {len(snap.assignments)} assignments\n")
    return EXIT_OK


def cmd_eval(args, out: TextIO, err: TextIO) -> int:
    r = Renderer(out, args.machine, _color(out))
    binding = bind(parse(_read(args.file)))
    if args.expr is not None:
        binding = bind(parse(args.expr), binding.snapshot)
    for q in binding.queries:
        run_query(r, q)
    return EXIT_OK


def _mutation_statements(text: str) -> list[ast.MutationStmt]:
    doc = parse(text)
    for s in doc.statements:
        if not isinstance(s, ast.MUTATION_TYPES):
            raise PvnError(f"{s.loc}: only mutation statements are allowed here")
    return list(doc.statements)


def cmd_diff(args, out: TextIO, err: TextIO) -> int:
    r = Renderer(out, args.machine, _color(out))
    snap = _load(args.file)
    text = args.inline if args.inline is not None else _read(args.mutations)
    mutations = [to_mutation(m) for m in _mutation_statements(text)]
    snap.require_member(args.owner)
    after = apply_batch(snap, mutations)
    r.diff(diff_visibility(snap, after, args.owner))
    if args.commit:
        Path(args.commit).write_text(print_snapshot(after), encoding="utf-8")
    return EXIT_OK


class Repl:
    """Line-oriented session over an in-memory snapshot."""

    def __init__(self, snap: NetworkSnapshot, out: TextIO, err: TextIO, machine: bool = False, color: bool = False):
        self.snap = snap
        self.out = out
        self.err = err
        self.renderer = Renderer(out, machine, color)
        self.watching: str | None = None
        self.pending = ""

    def handle(self, line: str) -> bool:
        """Process one input line; returns False when the session should end."""
        words = line.split()
        if words and words[0] in ("quit", "watch", "save") and len(words) <= 2:
            if self.pending:
                self.err.write("error: incomplete statement discarded\n")
                self.pending = ""
            if words[0] == "quit" and len(words) == 1:
                return False
            if words[0] == "watch" and len(words) == 2:
                try:
                    self.snap.require_member(words[1])
                except PvnError as exc:
                    _report(self.err, exc)
                    return True
                self.watching = words[1]
                self.out.write(f"watching {words[1]}\n")
                return True
            if words[0] == "save" and len(words) == 2:
                try:
                    Path(words[1]).write_text(print_snapshot(self.snap), encoding="utf-8")
                    self.out.write(f"saved {words[1]}\n")
                except OSError as exc:
                    _report(self.err, exc)
                return True
        text = self.pending + line + "\n"
        try:
            doc = parse(text)
        except PvnSyntaxError as exc:
            if exc.found != "end of input" or not text.strip():
                self.pending = ""
                _report(self.err, exc)
                return True
            doc = None
            if ";" in exc.expected:
                # a lone statement may omit its final semicolon
                try:
                    doc = parse(text + ";")
                except PvnSyntaxError:
                    pass
            if doc is None:
                self.pending = text  # statement continues on the next line
                return True
        self.pending = ""
        try:
            binding = bind(doc, self.snap)
            before = self.snap
            for q in binding.queries:
                run_query(self.renderer, q)
        except PvnError as exc:
            _report(self.err, exc)
            return True
        if any(not isinstance(s, ast.QUERY_TYPES) for s in doc.statements):
            self.snap = binding.snapshot
            if self.watching is not None:
                try:
                    self.renderer.diff(diff_visibility(before, self.snap, self.watching))
                except PvnError as exc:
                    _report(self.err, exc)
        return True


def cmd_repl(args, out: TextIO, err: TextIO, stdin: TextIO) -> int:
    repl = Repl(_load(args.file), out, err, args.machine, _color(out))
    interactive = stdin.isatty()
    while True:
        if interactive:
            out.write("... " if repl.pending else "pvn> ")
            out.flush()
        line = stdin.readline()
        if not line:
            break
        if not repl.handle(line.rstrip("\n")):
            break
    return EXIT_OK


def _color(out: TextIO) -> bool:
    return os.environ.get("PVN_COLOR", "1") != "0" and hasattr(out, "isatty") and out.isatty()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", action="store_true", default=argparse.SUPPRESS, help="line-oriented key=value output")

    p = argparse.ArgumentParser(prog="pvn", description="Privacy policy engine for evolving social networks.")
    p.add_argument("--machine", action="store_true", help="line-oriented key=value output")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="parse and bind a policy file")
    c.add_argument("file")

    e = sub.add_parser("eval", parents=[common], help="run queries against a policy file")
    e.add_argument("file")
    e.add_argument("-e", "--expr", help="query text; defaults to the queries in FILE")

    d = sub.add_parser("diff", parents=[common], help="visibility changes a batch of mutations would cause")
    d.add_argument("file")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--mutations", metavar="FILE2")
    src.add_argument("-e", "--inline", metavar="TEXT", help="mutation statements given inline")
    d.add_argument("--owner", required=True)
    d.add_argument("--commit", metavar="OUT", help="write the canonical post-mutation network to OUT")

    r = sub.add_parser("repl", parents=[common], help="interactive session")
    r.add_argument("file")
    return p


def main(argv: list[str] | None = None, stdin: TextIO | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args, out, err)
        if args.command == "eval":
            return cmd_eval(args, out, err)
        if args.command == "diff":
            return cmd_diff(args, out, err)
        return cmd_repl(args, out, err, stdin)
    except (PvnError, OSError, UnicodeDecodeError) as exc:
        return _report(err, exc)


if __name__ == "__main__":
    sys.exit(main())

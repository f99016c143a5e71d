"""Lexer and recursive-descent parser for ``.dym`` models."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..term import PRIMITIVES
from .ast import (
    Assignment, Authentication, Call, Confidentiality, Diagnostic, Generates,
    Generator, Knows, Leaks, MessageLine, ModelAST, Name, PhaseMarker, Power,
    PrincipalBlock, Slot,
)


class ParseError(Exception):
    """Lexical or syntax error.  ``diagnostics`` holds at least one entry."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<arrow>->)
  | (?P<punct>[\[\](),:=^?])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            ch = source[pos]
            raise ParseError([Diagnostic(line, col, f"unexpected character {ch!r}")])
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("ident", text, line, col))
        elif kind == "int":
            tokens.append(Token("int", text, line, col))
        elif kind in ("arrow", "punct"):
            tokens.append(Token(text, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.open_blocks: list[tuple[str, Token]] = []

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        if tok.kind == "eof" and self.open_blocks:
            what, opener = self.open_blocks[-1]
            message = f"unclosed {what} block opened at line {opener.line}; {message}"
        return ParseError([Diagnostic(tok.line, tok.col, message)])

    def describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what or repr(kind)}, found {self.describe(self.tok)}")
        return self.advance()

    def expect_word(self, *words: str) -> Token:
        if self.tok.kind != "ident" or self.tok.text not in words:
            wanted = " or ".join(repr(w) for w in words)
            raise self.error(f"expected {wanted}, found {self.describe(self.tok)}")
        return self.advance()

    def at_word(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    def ident(self) -> Token:
        return self.expect("ident", "identifier")

    def ident_list(self) -> tuple[str, ...]:
        names = [self.ident().text]
        while self.tok.kind == ",":
            self.advance()
            names.append(self.ident().text)
        return tuple(names)

    # -- grammar
    def model(self) -> ModelAST:
        self.expect_word("attacker")
        self.open_bracket("attacker")
        mode = self.expect_word("active", "passive").text
        self.close_bracket()
        items = []
        queries = ()
        while self.tok.kind != "eof":
            if self.at_word("principal"):
                items.append(self.principal())
            elif self.at_word("phase"):
                items.append(self.phase())
            elif self.at_word("queries"):
                if queries:
                    raise self.error("duplicate queries block")
                queries = self.queries()
            elif self.tok.kind == "ident":
                items.append(self.message())
            else:
                raise self.error(f"unexpected {self.describe(self.tok)}")
        return ModelAST(mode, tuple(items), queries)

    def open_bracket(self, what: str) -> None:
        tok = self.expect("[", "'['")
        self.open_blocks.append((what, tok))

    def close_bracket(self) -> None:
        self.expect("]", "']'")
        self.open_blocks.pop()

    def principal(self) -> PrincipalBlock:
        start = self.advance()
        name = self.ident().text
        self.open_bracket(f"principal {name}")
        stmts = []
        while self.tok.kind != "]":
            stmts.append(self.statement())
        self.close_bracket()
        return PrincipalBlock(name, tuple(stmts), (start.line, start.col))

    def statement(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.at_word("generates"):
            self.advance()
            return Generates(self.ident_list(), pos)
        if self.at_word("knows"):
            self.advance()
            vis = self.expect_word("public", "private").text
            return Knows(vis, self.ident_list(), pos)
        if self.at_word("leaks"):
            self.advance()
            return Leaks(self.ident_list(), pos)
        if tok.kind == "ident":
            targets = self.ident_list()
            self.expect("=", "'='")
            expr = self.expr()
            if self.tok.kind == "?":
                self.advance()
            return Assignment(targets, expr, pos)
        raise self.error(f"expected a statement, found {self.describe(tok)}")

    def expr(self):
        node = self.primary()
        while self.tok.kind == "^":
            self.advance()
            rhs = self.primary()
            node = Power(node, rhs, node.pos)
        return node

    def primary(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind != "ident":
            raise self.error(f"expected an expression, found {self.describe(tok)}")
        if tok.text == "G" and self.peek().kind != "(":
            self.advance()
            return Generator(pos)
        if self.peek().kind == "(":
            if tok.text not in PRIMITIVES:
                raise self.error(f"unknown primitive {tok.text!r}")
            self.advance()
            self.advance()
            self.open_blocks.append((f"{tok.text}(", tok))
            args = [self.expr()]
            while self.tok.kind == ",":
                self.advance()
                args.append(self.expr())
            self.expect(")", "')' or ','")
            self.open_blocks.pop()
            return Call(tok.text, tuple(args), pos)
        self.advance()
        return Name(tok.text, pos)

    def phase(self) -> PhaseMarker:
        start = self.advance()
        self.open_bracket("phase")
        n = self.expect("int", "phase number")
        self.close_bracket()
        return PhaseMarker(int(n.text), (start.line, start.col))

    def message(self) -> MessageLine:
        start = self.ident()
        self.expect("->", "'->'")
        receiver = self.ident().text
        self.expect(":", "':'")
        slots = [self.slot()]
        while self.tok.kind == ",":
            self.advance()
            slots.append(self.slot())
        return MessageLine(start.text, receiver, tuple(slots), (start.line, start.col))

    def slot(self) -> Slot:
        tok = self.tok
        if tok.kind == "[":
            self.open_bracket("guard")
            name = self.ident().text
            self.close_bracket()
            return Slot(name, True, (tok.line, tok.col))
        return Slot(self.ident().text, False, (tok.line, tok.col))

    def queries(self):
        self.advance()
        self.open_bracket("queries")
        out = []
        while self.tok.kind != "]":
            tok = self.tok
            pos = (tok.line, tok.col)
            kind = self.expect_word("confidentiality", "authentication").text
            self.expect("?", "'?'")
            if kind == "confidentiality":
                out.append(Confidentiality(self.ident().text, pos))
            else:
                sender = self.ident().text
                self.expect("->", "'->'")
                receiver = self.ident().text
                self.expect(":", "':'")
                out.append(Authentication(sender, receiver, self.ident().text, pos))
        self.close_bracket()
        return tuple(out)


def parse(source: str | bytes) -> ModelAST:
    """Parse model text, raising :class:`ParseError` with a located diagnostic."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = source[: exc.start]
            line = prefix.count(b"\n") + 1
            col = exc.start - (prefix.rfind(b"\n") + 1) + 1
            raise ParseError([Diagnostic(line, col, "input is not valid UTF-8")]) from None
    return _Parser(tokenize(source)).model()

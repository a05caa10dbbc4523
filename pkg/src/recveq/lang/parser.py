"""Recursive-descent parser for ``.mrc`` sources (a C subset)."""
from __future__ import annotations

import re

from ..errors import ParseError
from .ast import (RESERVED_PREFIX, Assert, Assign, Assume, Binary, Block, Call, Decl,
                  Extern, ExprStmt, FunctionDef, If, IntLit, Return, SourceUnit, Unary,
                  Var, While, renumber_calls)

KEYWORDS = {"int", "if", "else", "while", "return", "assume", "assert", "true", "false"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[-+*/%&<>=!(){};,])
""", re.VERBOSE | re.DOTALL)

# binary precedence, loosest first (C ordering)
_LEVELS = [("||",), ("&&",), ("&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"),
           ("*", "/", "%")]


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def tokenize(text: str):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and s in KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class Parser:
    def __init__(self, text: str, allow_reserved: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.allow_reserved = allow_reserved

    # token plumbing
    @property
    def tok(self):
        return self.toks[self.i]

    def _err(self, msg, tok=None):
        tok = tok or self.tok
        shown = tok.text or "end of input"
        raise ParseError(f"{msg} at {shown!r}", tok.line, tok.col)

    def at(self, text):
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def eat(self, text):
        if not self.at(text):
            self._err(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self):
        t = self.tok
        if t.kind != "ident":
            self._err("expected identifier")
        if t.text.startswith(RESERVED_PREFIX) and not self.allow_reserved:
            self._err(f"identifiers starting with {RESERVED_PREFIX!r} are reserved")
        self.i += 1
        return t

    # grammar
    def unit(self) -> SourceUnit:
        funcs, externs = [], []
        while self.tok.kind != "eof":
            item = self.function()
            (externs if isinstance(item, Extern) else funcs).append(item)
        return SourceUnit(tuple(funcs), tuple(externs))

    def function(self):
        start = self.eat("int")
        name = self.ident().text
        self.eat("(")
        params = []
        if not self.at(")"):
            while True:
                self.eat("int")
                params.append(self.ident().text)
                if not self.at(","):
                    break
                self.eat(",")
        self.eat(")")
        pos = (start.line, start.col)
        if self.at(";"):
            self.eat(";")
            return Extern(name, len(params), pos=pos)
        body = self.block()
        return renumber_calls(FunctionDef(name, tuple(params), body, pos=pos))

    def block(self) -> Block:
        start = self.eat("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self._err("unterminated block")
            stmts.append(self.stmt())
        self.eat("}")
        return Block(tuple(stmts), pos=(start.line, start.col))

    def stmt(self):
        t = self.tok
        pos = (t.line, t.col)
        if self.at("{"):
            return self.block()
        if self.at("int"):
            self.eat("int")
            name = self.ident().text
            init = None
            if self.at("="):
                self.eat("=")
                init = self.expr()
            self.eat(";")
            return Decl(name, init, pos=pos)
        if self.at("if"):
            self.eat("if")
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            then = self.stmt()
            orelse = None
            if self.at("else"):
                self.eat("else")
                orelse = self.stmt()
            return If(cond, then, orelse, pos=pos)
        if self.at("while"):
            self.eat("while")
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            return While(cond, self.stmt(), pos=pos)
        if self.at("return"):
            self.eat("return")
            value = self.expr()
            self.eat(";")
            return Return(value, pos=pos)
        if self.at("assume") or self.at("assert"):
            kw = self.tok.text
            self.i += 1
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            self.eat(";")
            return Assume(cond, pos=pos) if kw == "assume" else Assert(cond, pos=pos)
        if t.kind == "ident" and self.toks[self.i + 1].text == "=":
            name = self.ident().text
            self.eat("=")
            value = self.expr()
            self.eat(";")
            return Assign(name, value, pos=pos)
        e = self.expr()
        self.eat(";")
        return ExprStmt(e, pos=pos)

    def expr(self, level=0):
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _LEVELS[level]:
            t = self.tok
            self.i += 1
            if self.tok.kind in ("eof",) or self.tok.text in (")", ";", "}", ",", "{"):
                self._err(f"missing right operand of {t.text!r}", t)
            right = self.expr(level + 1)
            left = Binary(t.text, left, right, pos=(t.line, t.col))
        return left

    def unary(self):
        t = self.tok
        if self.at("-") or self.at("!"):
            self.i += 1
            operand = self.unary()
            if t.text == "-" and isinstance(operand, IntLit):
                return IntLit(-operand.value, pos=(t.line, t.col))
            return Unary(t.text, operand, pos=(t.line, t.col))
        return self.primary()

    def primary(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "num":
            self.i += 1
            return IntLit(int(t.text), pos=pos)
        if self.at("true") or self.at("false"):
            self.i += 1
            return IntLit(1 if t.text == "true" else 0, pos=pos)
        if self.at("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        if t.kind == "ident":
            name = self.ident().text
            if self.at("("):
                self.eat("(")
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.at(","):
                            break
                        self.eat(",")
                self.eat(")")
                return Call(name, tuple(args), pos=pos)
            return Var(name, pos=pos)
        self._err("expected expression")


def parse(text: str, allow_reserved: bool = False) -> SourceUnit:
    """Parse a whole source text.  Empty input gives an empty unit."""
    return Parser(text, allow_reserved).unit()


def parse_expr(text: str, allow_reserved: bool = True):
    p = Parser(text, allow_reserved)
    e = p.expr()
    if p.tok.kind != "eof":
        p._err("trailing input")
    return e

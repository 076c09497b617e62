"""Tokenizer and recursive-descent parser for ``.gm`` sources.

Labels are allocated in program order as elimination nodes are built, each
carrying the span of the construct responsible for it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    App,
    Arrow,
    Assign,
    BASE_NAMES,
    Base,
    CAbs,
    CApp,
    CElim,
    CIntro,
    CLam,
    CodeApp,
    CodePrim,
    Const,
    Constrained,
    CVar,
    Deref,
    EPS,
    Forall,
    LabelSource,
    Lam,
    Let,
    Named,
    Prim,
    Quote,
    QuoteT,
    RefNew,
    RefT,
    STAR,
    Sequence,
    Span,
    Splice,
    Var,
)


class ParseError(Exception):
    def __init__(self, message: str, span: Span | None = None):
        super().__init__(f"{span}: {message}" if span else message)
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, sym, eof
    text: str
    span: Span
    ws_before: bool
    ws_after: bool


KEYWORDS = {
    "fun", "let", "in", "cfun", "ref", "clam", "true", "false", "forall", "Ref", "Code", "eps",
    *BASE_NAMES,
}
_SYMS = [":=", "->", "=>", "<:", "(", ")", ":", ";", "+", "-", "*", "!", "[", "]", ".", "@",
         "~", "`", "{", "}", "=", "?", "<", ">"]
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+|#[^\n]*)|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>"
    + "|".join(re.escape(s) for s in _SYMS) + ")"
)


def tokenize(src: str, file: str = "<input>") -> list[Token]:
    raw: list[tuple[str, str, Span, int, int]] = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", Span(file, line, col))
        text = m.group(0)
        if m.lastgroup != "ws":
            raw.append((m.lastgroup, text, Span(file, line, col), pos, m.end()))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    toks = []
    for i, (kind, text, span, start, end) in enumerate(raw):
        before = start == 0 or i == 0 or raw[i - 1][4] != start
        after = i + 1 == len(raw) or raw[i + 1][3] != end
        toks.append(Token(kind, text, span, before, after))
    toks.append(Token("eof", "", Span(file, line, col), True, True))
    return toks


class Parser:
    def __init__(self, src: str, file: str = "<input>"):
        self.toks = tokenize(src, file)
        self.i = 0
        self.labels = LabelSource()
        self.idents = {t.text for t in self.toks if t.kind == "ident"}
        self._auto = 0
        self.cls_binders: set[str] = set()

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.span)
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise ParseError(f"expected identifier, found {t.text or 'end of input'!r}", t.span)
        return self.advance()

    def label(self, span: Span):
        return self.labels.fresh(span)

    def bind_cls(self, name: str, span: Span) -> None:
        if name in self.cls_binders:
            raise ParseError(f"classifier binder {name!r} is bound twice", span)
        self.cls_binders.add(name)

    def auto_cls(self) -> str:
        while True:
            name = f"_c{self._auto}"
            self._auto += 1
            if name not in self.idents and name not in self.cls_binders:
                return name

    # -- classifiers and types --------------------------------------------

    def classifier(self, allow_star: bool = False):
        t = self.tok
        if t.kind == "sym" and t.text == "?":
            if not allow_star:
                raise ParseError("the unknown classifier is not allowed here", t.span)
            self.advance()
            return STAR
        if t.kind == "ident" and t.text == "eps":
            self.advance()
            return EPS
        return Named(self.ident().text)

    def type(self):
        if self.at("forall"):
            self.advance()
            v = self.ident().text
            self.expect(".")
            return Forall(v, self.type())
        if self.at("["):
            self.advance()
            lo = self.classifier()
            self.expect("<:")
            hi = self.classifier()
            self.expect("]")
            self.expect("=>")
            return Constrained(lo, hi, self.type())
        dom = self.type_atom()
        if self.at("->"):
            self.advance()
            return Arrow(dom, self.type())
        return dom

    def type_atom(self):
        t = self.tok
        if t.kind == "sym" and t.text == "?":
            self.advance()
            return STAR
        if t.kind == "sym" and t.text == "(":
            self.advance()
            ty = self.type()
            self.expect(")")
            return ty
        if t.kind == "ident" and t.text in BASE_NAMES:
            self.advance()
            return Base(t.text)
        if self.at("Ref"):
            self.advance()
            return RefT(self.type_atom())
        if self.at("Code"):
            self.advance()
            self.expect("<")
            code = self.code_type()
            self.expect(">")
            self.expect("@")
            return QuoteT(code, self.classifier(allow_star=True))
        raise ParseError(f"expected a type, found {t.text or 'end of input'!r}", t.span)

    def code_type(self):
        t = self.tok
        if t.kind == "sym" and t.text == "?":
            self.advance()
            dom = STAR
        elif t.kind == "sym" and t.text == "(":
            self.advance()
            dom = self.code_type()
            self.expect(")")
        elif t.kind == "ident" and t.text in BASE_NAMES:
            self.advance()
            dom = Base(t.text)
        else:
            raise ParseError(f"expected a code type, found {t.text or 'end of input'!r}", t.span)
        if self.at("->"):
            self.advance()
            return Arrow(dom, self.code_type())
        return dom

    def static_code_type(self):
        start = self.tok.span
        ty = self.code_type()
        from .syntax import has_star

        if has_star(ty):
            raise ParseError("code lambda annotations must be static", start)
        return ty

    # -- meta terms ---------------------------------------------------------

    def program(self):
        m = self.seq()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.span)
        return m

    def seq(self):
        start = self.tok
        first = self.assign()
        if self.at(";"):
            semi = self.advance()
            if self.tok.kind == "eof" or self.at(")") or self.at("in") or self.at("}"):
                return first
            lab = self.label(start.span if start else semi.span)
            return Sequence(first, self.seq(), lab)
        return first

    def assign(self):
        start = self.tok
        if self.is_keyword_start():
            return self.keyword_form()
        target = self.additive()
        if self.at(":="):
            self.advance()
            lab = self.label(start.span)
            if self.is_keyword_start():
                return Assign(target, self.keyword_form(), lab)
            return Assign(target, self.additive(), lab)
        return target

    def is_keyword_start(self) -> bool:
        return self.at("fun") or self.at("let") or self.at("cfun") or \
            (self.at("[") and self.tok.kind == "sym")

    def keyword_form(self):
        t = self.tok
        if self.at("fun"):
            self.advance()
            self.expect("(")
            x = self.ident().text
            self.expect(":")
            ty = self.type()
            self.expect(")")
            return Lam(x, ty, self.seq())
        if self.at("let"):
            self.advance()
            lab = self.label(t.span)
            x = self.ident().text
            if not self.at(":"):
                raise ParseError("let bindings need a type annotation", self.tok.span)
            self.advance()
            ty = self.type()
            self.expect("=")
            bound = self.seq()
            self.expect("in")
            return Let(x, ty, bound, self.seq(), lab)
        if self.at("cfun"):
            self.advance()
            v = self.ident()
            self.bind_cls(v.text, v.span)
            self.expect(".")
            return CAbs(v.text, self.seq())
        self.expect("[")
        lo = self.classifier()
        self.expect("<:")
        hi = self.classifier()
        self.expect("]")
        self.expect("=>")
        return CIntro(lo, hi, self.seq())

    def additive(self):
        left = self.multiplicative()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.multiplicative()
            left = Prim(op.text, left, right, self.label(op.span))
        return left

    def multiplicative(self):
        left = self.application()
        while self.at("*"):
            op = self.advance()
            right = self.application()
            left = Prim(op.text, left, right, self.label(op.span))
        return left

    def starts_arg(self) -> bool:
        t = self.tok
        if t.kind == "int":
            return True
        if t.kind == "ident":
            return t.text not in KEYWORDS or t.text in ("true", "false", "ref")
        return t.kind == "sym" and t.text in ("(", "`", "!")

    def application(self):
        start = self.tok
        fn = self.prefix()
        while self.starts_arg():
            arg = self.prefix()
            fn = App(fn, arg, self.label(start.span))
        return fn

    def prefix(self):
        t = self.tok
        if self.at("!"):
            self.advance()
            lab = self.label(t.span)
            return Deref(self.prefix(), lab)
        if self.at("ref"):
            self.advance()
            return RefNew(self.prefix())
        return self.postfix()

    def postfix(self):
        m = self.atom()
        while True:
            t = self.tok
            if t.kind == "sym" and t.text == "[":
                self.advance()
                lab = self.label(t.span)
                cls = self.classifier()
                self.expect("]")
                m = CApp(m, cls, lab)
            elif t.kind == "sym" and t.text == "!" and (not t.ws_before or t.ws_after):
                self.advance()
                m = CElim(m, self.label(t.span))
            else:
                return m

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Const(int(t.text))
        if self.at("true") or self.at("false"):
            self.advance()
            return Const(t.text == "true")
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.advance()
            return Var(t.text)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return Const(None)
            m = self.seq()
            self.expect(")")
            return m
        if self.at("`"):
            self.advance()
            cls = self.classifier()
            self.expect("{")
            body = self.code()
            self.expect("}")
            return Quote(body, cls)
        raise ParseError(f"expected an expression, found {t.text or 'end of input'!r}", t.span)

    # -- code terms -----------------------------------------------------------

    def code(self):
        if self.at("clam"):
            self.advance()
            self.expect("(")
            x = self.ident().text
            self.expect(":")
            ty = self.static_code_type()
            self.expect(")")
            if self.at("@"):
                self.advance()
                v = self.ident()
                name = v.text
                self.bind_cls(name, v.span)
            else:
                name = self.auto_cls()
                self.cls_binders.add(name)
            self.expect(".")
            return CLam(x, ty, Named(name), self.code())
        return self.code_additive()

    def code_additive(self):
        left = self.code_mul()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = CodePrim(op, left, self.code_mul())
        return left

    def code_mul(self):
        left = self.code_app()
        while self.at("*"):
            self.advance()
            left = CodePrim("*", left, self.code_app())
        return left

    def code_starts_arg(self) -> bool:
        t = self.tok
        if t.kind == "int":
            return True
        if t.kind == "ident":
            return t.text not in KEYWORDS or t.text in ("true", "false")
        return t.kind == "sym" and t.text in ("(", "~")

    def code_app(self):
        fn = self.code_atom()
        while self.code_starts_arg():
            fn = CodeApp(fn, self.code_atom())
        return fn

    def code_atom(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Const(int(t.text))
        if self.at("true") or self.at("false"):
            self.advance()
            return Const(t.text == "true")
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.advance()
            return CVar(t.text)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return Const(None)
            m = self.code()
            self.expect(")")
            return m
        if self.at("~"):
            self.advance()
            lab = self.label(t.span)
            if self.at("("):
                self.advance()
                m = self.seq()
                self.expect(")")
                return Splice(m, lab)
            return Splice(Var(self.ident().text), lab)
        raise ParseError(f"expected code, found {t.text or 'end of input'!r}", t.span)


def parse_program(src: str, file: str = "<input>"):
    """Parse a whole program."""
    return Parser(src, file).program()


def parse_type(src: str):
    p = Parser(src)
    ty = p.type()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.span)
    return ty


def parse_file(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read(), path)


__all__ = ["ParseError", "Parser", "parse_file", "parse_program", "parse_type", "tokenize"]

"""Typing contexts shared by the static and gradual checkers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from .subtyping import EMPTY_ENV, SubtypeEnv
from .syntax import (
    Arrow,
    Base,
    Constrained,
    Eps,
    Forall,
    Gen,
    Named,
    QuoteT,
    RefT,
    Span,
    Star,
)


class TypeCheckError(Exception):
    """A rejected program; ``span`` locates the offending construct."""

    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        return f"{self.span}: {self.message}" if self.span else self.message


@dataclass(frozen=True)
class Binding:
    name: str
    kind: str  # "meta" or "code"
    ty: Any
    cls: Any = None  # classifier of a code binding
    parent: "Binding | None" = None


@dataclass(frozen=True)
class Ctx:
    """Linked bindings (nearest first), classifier variables and assumptions."""

    vars: Binding | None = None
    classifiers: frozenset = frozenset()
    theta: SubtypeEnv = field(default=EMPTY_ENV)
    store: tuple = ()  # element types of allocated cells, for typing run-time states

    def lookup(self, name: str) -> Binding | None:
        b = self.vars
        while b is not None:
            if b.name == name:
                return b
            b = b.parent
        return None

    def bind_meta(self, name: str, ty: Any) -> "Ctx":
        return replace(self, vars=Binding(name, "meta", ty, None, self.vars))

    def bind_code(self, name: str, ty: Any, cls: Any) -> "Ctx":
        return replace(self, vars=Binding(name, "code", ty, cls, self.vars))

    def add_classifier(self, name: str) -> "Ctx":
        return replace(self, classifiers=self.classifiers | {name})

    def assume(self, lo: Any, hi: Any) -> "Ctx":
        return replace(self, theta=self.theta.extend(lo, hi))


EMPTY_CTX = Ctx()


def check_classifier(ctx: Ctx, e: Any, span: Span | None = None, allow_star: bool = False) -> None:
    if isinstance(e, Eps):
        return
    if isinstance(e, Star):
        if allow_star:
            return
        raise TypeCheckError("the unknown classifier is not allowed here", span)
    if isinstance(e, Named):
        if e.name not in ctx.classifiers:
            raise TypeCheckError(f"classifier {e.name} is not in scope", span)
        return
    if isinstance(e, Gen):
        return
    raise TypeCheckError(f"not a classifier: {e!r}", span)


def check_type(ctx: Ctx, t: Any, span: Span | None = None, gradual: bool = True) -> None:
    """Well-formedness: classifiers in scope, unknowns only when gradual."""

    def go(t: Any, c: Ctx) -> None:
        if isinstance(t, Star):
            if not gradual:
                raise TypeCheckError("the unknown type is not allowed in the static language", span)
            return
        if isinstance(t, Base):
            return
        if isinstance(t, Arrow):
            go(t.dom, c)
            go(t.cod, c)
            return
        if isinstance(t, RefT):
            go(t.elem, c)
            return
        if isinstance(t, QuoteT):
            go_code(t.code)
            check_classifier(c, t.cls, span, allow_star=gradual)
            return
        if isinstance(t, Forall):
            go(t.body, c.add_classifier(t.var))
            return
        if isinstance(t, Constrained):
            check_classifier(c, t.lo, span)
            check_classifier(c, t.hi, span)
            go(t.body, c)
            return
        raise TypeCheckError(f"not a type: {t!r}", span)

    def go_code(t: Any) -> None:
        if isinstance(t, Star):
            if not gradual:
                raise TypeCheckError("the unknown type is not allowed in the static language", span)
            return
        if isinstance(t, Base):
            return
        if isinstance(t, Arrow):
            go_code(t.dom)
            go_code(t.cod)
            return
        raise TypeCheckError(f"not a code type: {t}", span)

    go(t, ctx)

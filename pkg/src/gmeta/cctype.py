"""Typing for the cast calculus, used on elaborated terms and machine states.

A lexical environment carries meta variables, classifier assumptions and
code-variable bindings per classifier.  The global environment holds the
runtime classifier forest, the bindings of generated classifiers and the
heap typing.  Blame and failed casts type at anything (``None``).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

from . import coercions as K
from .subtyping import EMPTY_ENV, SubtypeEnv
from .syntax import (
    INT,
    STAR,
    UNIT,
    Addr,
    App,
    Arrow,
    Assign,
    Blame,
    CAbs,
    CApp,
    CElim,
    CIntro,
    CLam,
    Cast,
    CodeApp,
    CodePrim,
    Const,
    Constrained,
    CVar,
    Deref,
    DynElim,
    Eps,
    Forall,
    Gen,
    Lam,
    Named,
    Prim,
    Quote,
    QuoteT,
    RefNew,
    RefT,
    Splice,
    Star,
    Var,
    alpha_eq,
    subst_classifier,
)


class CCTypeError(Exception):
    pass


@dataclass
class GlobalEnv:
    """Runtime structures: classifiers, forest, generated bindings, heap typing."""

    delta: set = field(default_factory=set)
    theta: SubtypeEnv = field(default_factory=SubtypeEnv)
    bindings: dict = field(default_factory=dict)  # Gen -> (name, code type)
    sigma: list = field(default_factory=list)


EMPTY_GLOBAL = GlobalEnv()


@dataclass(frozen=True)
class Lexical:
    meta: dict = field(default_factory=dict)
    theta: SubtypeEnv = EMPTY_ENV
    code: dict = field(default_factory=dict)  # classifier -> (name, code type)

    def bind_meta(self, x: str, t: Any) -> "Lexical":
        return Lexical({**self.meta, x: t}, self.theta, self.code)

    def bind_code(self, cls: Any, x: str, t: Any) -> "Lexical":
        return Lexical(self.meta, self.theta, {**self.code, cls: (x, t)})

    def assume(self, lo: Any, hi: Any) -> "Lexical":
        return Lexical(self.meta, self.theta.extend(lo, hi), self.code)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise CCTypeError(msg)


def _teq(a: Any, b: Any) -> bool:
    return a is None or b is None or alpha_eq(a, b)


def _wf_cls(delta: frozenset, e: Any) -> None:
    if isinstance(e, (Eps, Star)):
        return
    _need(e in delta, f"classifier {e} is not in scope")


def lookup_code(x: str, e: Any, lex: Lexical) -> Any:
    """Nearest binding of ``x`` walking up from ``e`` through ``lex.theta``."""
    seen = {e}
    queue = deque([e])
    while queue:
        c = queue.popleft()
        b = lex.code.get(c)
        if b is not None and b[0] == x:
            return b[1]
        for p in lex.theta.parents(c):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    raise CCTypeError(f"code variable {x} is not bound at classifier {e}")


@dataclass
class Checker:
    g: GlobalEnv

    # meta terms ---------------------------------------------------------

    def meta(self, delta: frozenset, lex: Lexical, m: Any) -> Any:
        if isinstance(m, Const):
            return m.type
        if isinstance(m, Var):
            _need(m.name in lex.meta, f"unbound variable {m.name}")
            return lex.meta[m.name]
        if isinstance(m, Addr):
            _need(0 <= m.n < len(self.g.sigma), f"dangling address {m.n}")
            return RefT(self.g.sigma[m.n])
        if isinstance(m, Blame):
            return None
        if isinstance(m, Lam):
            return Arrow(m.ty, self.meta(delta, lex.bind_meta(m.var, m.ty), m.body))
        if isinstance(m, App):
            f = self.meta(delta, lex, m.fn)
            a = self.meta(delta, lex, m.arg)
            if f is None:
                return None
            _need(isinstance(f, Arrow), f"application of {f}")
            _need(_teq(a, f.dom), f"argument {a} where {f.dom} expected")
            return f.cod
        if isinstance(m, Prim):
            for side in (m.left, m.right):
                _need(_teq(self.meta(delta, lex, side), INT), "non-integer operand")
            return INT
        if isinstance(m, RefNew):
            t = self.meta(delta, lex, m.expr)
            _need(m.ty is not None, "reference allocation without element type")
            _need(_teq(t, m.ty), f"ref of {t} annotated {m.ty}")
            return RefT(m.ty)
        if isinstance(m, Assign):
            r = self.meta(delta, lex, m.target)
            v = self.meta(delta, lex, m.value)
            if r is not None:
                _need(isinstance(r, RefT), f"assignment to {r}")
                _need(_teq(v, r.elem), f"storing {v} in Ref {r.elem}")
            return UNIT
        if isinstance(m, Deref):
            r = self.meta(delta, lex, m.expr)
            if r is None:
                return None
            _need(isinstance(r, RefT), f"dereference of {r}")
            return r.elem
        if isinstance(m, Quote):
            _wf_cls(delta, m.cls)
            _need(not isinstance(m.cls, Star), "quotation at the unknown classifier")
            if m.finished:
                glex = Lexical(lex.meta, self.g.theta, dict(self.g.bindings))
                c = self.code(delta, glex, m.cls, m.body)
            else:
                c = self.code(delta, lex, m.cls, m.body)
            return None if c is None else QuoteT(c, m.cls)
        if isinstance(m, CAbs):
            return Forall(m.var, self.meta(delta | {Named(m.var)}, lex, m.body))
        if isinstance(m, CApp):
            _wf_cls(delta, m.cls)
            t = self.meta(delta, lex, m.expr)
            if t is None:
                return None
            _need(isinstance(t, Forall), f"instantiation of {t}")
            return subst_classifier(t.body, t.var, m.cls)
        if isinstance(m, CIntro):
            _wf_cls(delta, m.lo)
            _wf_cls(delta, m.hi)
            return Constrained(m.lo, m.hi, self.meta(delta, lex.assume(m.lo, m.hi), m.body))
        if isinstance(m, CElim):
            t = self.meta(delta, lex, m.expr)
            if t is None:
                return None
            _need(isinstance(t, Constrained), f"constraint elimination on {t}")
            _need(lex.theta.ec_subtype(t.lo, t.hi), f"constraint {t.lo} <: {t.hi} not derivable")
            return t.body
        if isinstance(m, DynElim):
            _need(_teq(self.meta(delta, lex, m.expr), STAR), "dynamic elimination of non-?")
            return STAR
        if isinstance(m, Cast):
            t = self.meta(delta, lex, m.expr)
            _need(_teq(t, m.src), f"cast source {m.src} but term has {t}")
            c = m.coercion
            from .hyper import Hyper, from_hyper
            if isinstance(c, Hyper):
                c = from_hyper(c)
            try:
                K.check(c, m.src, m.dst, lex.theta)
            except K.CoercionTypeError as err:
                raise CCTypeError(f"ill-typed coercion: {err}") from err
            return m.dst
        raise CCTypeError(f"unexpected meta term {type(m).__name__}")

    # code terms ---------------------------------------------------------

    def code(self, delta: frozenset, lex: Lexical, e: Any, m: Any) -> Any:
        if isinstance(m, Const):
            return m.type
        if isinstance(m, CVar):
            return lookup_code(m.name, e, lex)
        if isinstance(m, CLam):
            a = m.cls
            if m.runtime:
                _need(a in delta, f"generated classifier {a} unknown")
                _need(self.g.bindings.get(a) == (m.var, m.ty)
                      or _binding_eq(self.g.bindings.get(a), m.var, m.ty),
                      f"generated classifier {a} does not bind {m.var}")
                inner = lex.bind_code(a, m.var, m.ty)
                body = self.code(delta, inner, a, m.body)
            else:
                _need(isinstance(a, Named) and a not in delta, f"classifier {a} already in scope")
                inner = lex.assume(e, a).bind_code(a, m.var, m.ty)
                body = self.code(delta | {a}, inner, a, m.body)
            return None if body is None else Arrow(m.ty, body)
        if isinstance(m, CodeApp):
            f = self.code(delta, lex, e, m.fn)
            a = self.code(delta, lex, e, m.arg)
            if f is None:
                return None
            _need(isinstance(f, Arrow), f"code application of {f}")
            _need(_teq(a, f.dom), f"code argument {a} where {f.dom} expected")
            return f.cod
        if isinstance(m, CodePrim):
            for side in (m.left, m.right):
                _need(_teq(self.code(delta, lex, e, side), INT), "non-integer code operand")
            return INT
        if isinstance(m, Splice):
            t = self.meta(delta, lex, m.expr)
            if t is None:
                return None
            _need(isinstance(t, QuoteT) and t.cls == e,
                  f"splice of {t} at classifier {e}")
            return t.code
        raise CCTypeError(f"unexpected code term {type(m).__name__}")


def _binding_eq(b: Any, x: str, t: Any) -> bool:
    return b is not None and b[0] == x and alpha_eq(b[1], t)


def runtime_lexical(g: GlobalEnv) -> Lexical:
    """The lexical environment of a top-level machine state."""
    return Lexical({}, g.theta, {})


def cc_typecheck(m: Any, g: GlobalEnv = EMPTY_GLOBAL, lex: Lexical | None = None) -> Any:
    """Type of a cast-calculus meta term; raises CCTypeError."""
    if lex is None:
        lex = runtime_lexical(g)
    return Checker(g).meta(frozenset(g.delta), lex, m)


def cc_typecheck_code(m: Any, e: Any, g: GlobalEnv, lex: Lexical | None = None) -> Any:
    if lex is None:
        lex = runtime_lexical(g)
    return Checker(g).code(frozenset(g.delta), lex, e, m)


def check_closed_code(v: Any, g: GlobalEnv) -> Any:
    """A code value in an empty lexical context, read as: no lexical bindings,
    assumptions from the runtime forest.  Raises CCTypeError on a free variable."""
    return Checker(g).code(frozenset(g.delta), Lexical({}, g.theta, {}), Eps(), v)


def check_heap(heap: list, g: GlobalEnv) -> None:
    chk = Checker(g)
    lex = runtime_lexical(g)
    for i, v in enumerate(heap):
        t = chk.meta(frozenset(g.delta), lex, v)
        _need(_teq(t, g.sigma[i]), f"heap cell {i} holds {t}, typed {g.sigma[i]}")


__all__ = [
    "CCTypeError", "GlobalEnv", "Lexical", "cc_typecheck", "cc_typecheck_code",
    "check_closed_code", "check_heap", "lookup_code",
]

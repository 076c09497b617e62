"""Gradual typing with simultaneous elaboration into the cast calculus.

Every function returns the elaborated term together with its type.  Casts
are inserted wherever consistent subtyping was used; a cast between
syntactically equal types is omitted.
"""

from __future__ import annotations

import itertools
from typing import Any

from .coercions import coerce
from .context import EMPTY_CTX, Ctx, TypeCheckError, check_classifier, check_type
from .printer import render_type
from .static import _span
from .subtyping import consistent_code, consistent_subtype
from .syntax import (
    INT,
    STAR,
    UNIT,
    Addr,
    App,
    Arrow,
    Assign,
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
    Forall,
    Lam,
    Let,
    Named,
    Prim,
    Quote,
    QuoteT,
    RefNew,
    RefT,
    Sequence,
    Splice,
    Star,
    Var,
    alpha_eq,
    has_star,
    subst_classifier,
)

STAR_ARROW = Arrow(STAR, STAR)
STAR_REF = RefT(STAR)
STAR_FORALL = Forall("_", STAR)

_seq_names = itertools.count()


def cast(m: Any, a: Any, b: Any, label: Any) -> Any:
    """``m<coerce(a, b)>``, or ``m`` itself when the types coincide."""
    if alpha_eq(a, b):
        return m
    return Cast(m, coerce(a, b, label), a, b)


def _relate(ctx: Ctx, a: Any, b: Any, what: str, span: Any) -> None:
    if not consistent_subtype(ctx.theta, a, b):
        raise TypeCheckError(
            f"{what} has type {render_type(a)}, which is not consistent with "
            f"{render_type(b)}", span)


def _located(fn):
    def wrapper(ctx, *args):
        try:
            return fn(ctx, *args)
        except TypeCheckError as err:
            if err.span is None:
                node = args[0] if fn.__name__.endswith("meta") else args[1]
                err.span = _span(node)
            raise

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_located
def elaborate_meta(ctx: Ctx, m: Any) -> tuple[Any, Any]:
    """Typecheck a gradual meta term and elaborate it; returns (term, type)."""
    if isinstance(m, Const):
        return m, m.type
    if isinstance(m, Var):
        b = ctx.lookup(m.name)
        if b is None:
            raise TypeCheckError(f"unbound variable {m.name}")
        if b.kind != "meta":
            raise TypeCheckError(f"code variable {m.name} used outside a quotation")
        return m, b.ty
    if isinstance(m, Lam):
        check_type(ctx, m.ty)
        body, t = elaborate_meta(ctx.bind_meta(m.var, m.ty), m.body)
        return Lam(m.var, m.ty, body), Arrow(m.ty, t)
    if isinstance(m, App):
        span = _span(m)
        fn, f = elaborate_meta(ctx, m.fn)
        arg, a = elaborate_meta(ctx, m.arg)
        if isinstance(f, Star):
            return App(cast(fn, STAR, STAR_ARROW, m.label), cast(arg, a, STAR, m.label),
                       m.label), STAR
        if not isinstance(f, Arrow):
            raise TypeCheckError(f"applying a non-function of type {render_type(f)}", span)
        _relate(ctx, a, f.dom, "the argument", span)
        return App(fn, cast(arg, a, f.dom, m.label), m.label), f.cod
    if isinstance(m, Prim):
        sides = []
        for side in (m.left, m.right):
            s, t = elaborate_meta(ctx, side)
            _relate(ctx, t, INT, f"an operand of {m.op}", _span(m))
            sides.append(cast(s, t, INT, m.label))
        return Prim(m.op, sides[0], sides[1], m.label), INT
    if isinstance(m, RefNew):
        e, t = elaborate_meta(ctx, m.expr)
        return RefNew(e, t), RefT(t)
    if isinstance(m, Assign):
        span = _span(m)
        tgt, r = elaborate_meta(ctx, m.target)
        val, v = elaborate_meta(ctx, m.value)
        if isinstance(r, Star):
            return Assign(cast(tgt, STAR, STAR_REF, m.label), cast(val, v, STAR, m.label),
                          m.label), UNIT
        if not isinstance(r, RefT):
            raise TypeCheckError(f"assigning to a non-reference of type {render_type(r)}", span)
        _relate(ctx, v, r.elem, "the stored value", span)
        return Assign(tgt, cast(val, v, r.elem, m.label), m.label), UNIT
    if isinstance(m, Deref):
        e, r = elaborate_meta(ctx, m.expr)
        if isinstance(r, Star):
            return Deref(cast(e, STAR, STAR_REF, m.label), m.label), STAR
        if not isinstance(r, RefT):
            raise TypeCheckError(f"dereferencing a non-reference of type {render_type(r)}",
                                 _span(m))
        return Deref(e, m.label), r.elem
    if isinstance(m, Quote):
        check_classifier(ctx, m.cls)
        body, c = elaborate_code_synth(ctx, m.cls, m.body)
        return Quote(body, m.cls), QuoteT(c, m.cls)
    if isinstance(m, CAbs):
        if m.var in ctx.classifiers:
            raise TypeCheckError(f"classifier {m.var} is already bound")
        body, t = elaborate_meta(ctx.add_classifier(m.var), m.body)
        return CAbs(m.var, body), Forall(m.var, t)
    if isinstance(m, CApp):
        e, t = elaborate_meta(ctx, m.expr)
        check_classifier(ctx, m.cls, _span(m))
        if isinstance(t, Star):
            return CApp(cast(e, STAR, STAR_FORALL, m.label), m.cls, m.label), STAR
        if not isinstance(t, Forall):
            raise TypeCheckError(f"classifier application to type {render_type(t)}", _span(m))
        return CApp(e, m.cls, m.label), subst_classifier(t.body, t.var, m.cls)
    if isinstance(m, CIntro):
        check_classifier(ctx, m.lo)
        check_classifier(ctx, m.hi)
        body, t = elaborate_meta(ctx.assume(m.lo, m.hi), m.body)
        return CIntro(m.lo, m.hi, body), Constrained(m.lo, m.hi, t)
    if isinstance(m, CElim):
        e, t = elaborate_meta(ctx, m.expr)
        if isinstance(t, Star):
            return DynElim(e, m.label), STAR
        if not isinstance(t, Constrained):
            raise TypeCheckError(f"constraint elimination on type {render_type(t)}", _span(m))
        if not ctx.theta.ec_subtype(t.lo, t.hi):
            raise TypeCheckError(f"constraint {render_type(t)} does not hold here", _span(m))
        return CElim(e, m.label), t.body
    if isinstance(m, Let):
        span = _span(m)
        check_type(ctx, m.ty, span)
        bound, a = elaborate_meta(ctx, m.bound)
        _relate(ctx, a, m.ty, f"the definition of {m.var}", span)
        body, t = elaborate_meta(ctx.bind_meta(m.var, m.ty), m.body)
        return App(Lam(m.var, m.ty, body), cast(bound, a, m.ty, m.label), m.label), t
    if isinstance(m, Sequence):
        first, a = elaborate_meta(ctx, m.first)
        second, t = elaborate_meta(ctx, m.second)
        name = f"%seq{next(_seq_names)}"
        return App(Lam(name, a, second), first, m.label), t
    if isinstance(m, Addr):
        raise TypeCheckError("addresses do not appear in source programs")
    raise TypeCheckError(f"not a meta term: {type(m).__name__}")


@_located
def elaborate_code_synth(ctx: Ctx, e: Any, m: Any) -> tuple[Any, Any]:
    """Synthesize and elaborate code ``m`` at enclosing classifier ``e``."""
    if isinstance(m, Const):
        return m, m.type
    if isinstance(m, CVar):
        b = ctx.lookup(m.name)
        if b is None:
            raise TypeCheckError(f"unbound code variable {m.name}")
        if b.kind != "code":
            raise TypeCheckError(f"meta variable {m.name} used inside a quotation")
        if not ctx.theta.ec_subtype(b.cls, e):
            raise TypeCheckError(f"code variable {m.name} is not in scope at this classifier")
        return m, b.ty
    if isinstance(m, CLam):
        check_type(ctx, m.ty, gradual=False)
        if not isinstance(m.cls, Named):
            raise TypeCheckError("code lambdas bind a classifier name")
        if m.cls.name in ctx.classifiers:
            raise TypeCheckError(f"classifier {m.cls.name} is already bound")
        inner = ctx.add_classifier(m.cls.name).assume(e, m.cls).bind_code(m.var, m.ty, m.cls)
        body, c = elaborate_code_synth(inner, m.cls, m.body)
        return CLam(m.var, m.ty, m.cls, body), Arrow(m.ty, c)
    if isinstance(m, CodeApp):
        fn, f = elaborate_code_synth(ctx, e, m.fn)
        if not isinstance(f, Arrow):
            raise TypeCheckError(f"applying code of non-function type {render_type(f)}")
        return CodeApp(fn, gradual_check_code(ctx, e, m.arg, f.dom)), f.cod
    if isinstance(m, CodePrim):
        return CodePrim(m.op, gradual_check_code(ctx, e, m.left, INT),
                        gradual_check_code(ctx, e, m.right, INT)), INT
    if isinstance(m, Splice):
        inner, t = elaborate_meta(ctx, m.expr)
        if not isinstance(t, QuoteT) or has_star(t.code):
            raise TypeCheckError(
                f"cannot infer the code type of a splice of type {render_type(t)}", _span(m))
        want = QuoteT(t.code, e)
        _relate(ctx, t, want, "the spliced expression", _span(m))
        return Splice(cast(inner, t, want, m.label), m.label), t.code
    raise TypeCheckError(f"not a code term: {type(m).__name__}")


@_located
def gradual_check_code(ctx: Ctx, e: Any, m: Any, c: Any) -> Any:
    """Check code ``m`` against static code type ``c``; returns the elaborated code."""
    if isinstance(m, Splice):
        inner, t = elaborate_meta(ctx, m.expr)
        want = QuoteT(c, e)
        _relate(ctx, t, want, "the spliced expression", _span(m))
        return Splice(cast(inner, t, want, m.label), m.label)
    out, got = elaborate_code_synth(ctx, e, m)
    if not alpha_eq(got, c):
        raise TypeCheckError(f"code has type {render_type(got)}, expected {render_type(c)}")
    return out


def elaborate_code(ctx: Ctx, e: Any, m: Any, expected: Any) -> Any:
    """Elaborate code ``m`` checked against ``expected`` at classifier ``e``."""
    return gradual_check_code(ctx, e, m, expected)


def gradual_synth_meta(ctx: Ctx, m: Any) -> Any:
    """The gradual type of ``m`` (elaboration discarded)."""
    return elaborate_meta(ctx, m)[1]


def gradual_typecheck(m: Any) -> Any:
    return gradual_synth_meta(EMPTY_CTX, m)


def elaborate_program(m: Any) -> tuple[Any, Any]:
    """Elaborate a closed program; returns (cast-calculus term, type)."""
    return elaborate_meta(EMPTY_CTX, m)


__all__ = [
    "cast", "consistent_code", "elaborate_code", "elaborate_code_synth", "elaborate_meta",
    "elaborate_program", "gradual_check_code", "gradual_synth_meta", "gradual_typecheck",
]

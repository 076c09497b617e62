"""The static sister language: algorithmic typing and direct reduction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .context import EMPTY_CTX, Ctx, TypeCheckError, check_classifier, check_type
from .subtyping import meta_subtype
from .syntax import (
    INT,
    Addr,
    App,
    Arrow,
    Assign,
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
    Var,
    alpha_eq,
    is_static_code_value,
    subst_classifier,
    subst_term,
)
from .printer import render_type


def _span(m: Any):
    lab = getattr(m, "label", None)
    return getattr(lab, "span", None)


def _located(fn):
    # attach the nearest labelled node's span to errors raised without one
    def wrapper(ctx, *args):
        try:
            return fn(ctx, *args)
        except TypeCheckError as err:
            if err.span is None:
                node = args[-1] if fn.__name__.endswith("meta") else args[1]
                err.span = _span(node)
            raise

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _sub(ctx: Ctx, a: Any, b: Any) -> bool:
    return meta_subtype(ctx.theta, a, b)


@_located
def static_synth_meta(ctx: Ctx, m: Any) -> Any:
    """Synthesize the type of a static meta term."""
    if isinstance(m, Const):
        return m.type
    if isinstance(m, Var):
        b = ctx.lookup(m.name)
        if b is None:
            raise TypeCheckError(f"unbound variable {m.name}")
        if b.kind != "meta":
            raise TypeCheckError(f"code variable {m.name} used outside a quotation")
        return b.ty
    if isinstance(m, Lam):
        check_type(ctx, m.ty, gradual=False)
        return Arrow(m.ty, static_synth_meta(ctx.bind_meta(m.var, m.ty), m.body))
    if isinstance(m, App):
        f = static_synth_meta(ctx, m.fn)
        if not isinstance(f, Arrow):
            raise TypeCheckError(f"applying a non-function of type {render_type(f)}", _span(m))
        a = static_synth_meta(ctx, m.arg)
        if not _sub(ctx, a, f.dom):
            raise TypeCheckError(
                f"argument of type {render_type(a)} is not a subtype of {render_type(f.dom)}",
                _span(m))
        return f.cod
    if isinstance(m, Prim):
        for side in (m.left, m.right):
            t = static_synth_meta(ctx, side)
            if not _sub(ctx, t, INT):
                raise TypeCheckError(f"operand of {m.op} has type {render_type(t)}, expected Int",
                                     _span(m))
        return INT
    if isinstance(m, RefNew):
        return RefT(static_synth_meta(ctx, m.expr))
    if isinstance(m, Assign):
        r = static_synth_meta(ctx, m.target)
        if not isinstance(r, RefT):
            raise TypeCheckError(f"assigning to a non-reference of type {render_type(r)}", _span(m))
        v = static_synth_meta(ctx, m.value)
        if not _sub(ctx, v, r.elem):
            raise TypeCheckError(
                f"cannot store a value of type {render_type(v)} in a reference to "
                f"{render_type(r.elem)}", _span(m))
        return Const(None).type
    if isinstance(m, Deref):
        r = static_synth_meta(ctx, m.expr)
        if not isinstance(r, RefT):
            raise TypeCheckError(f"dereferencing a non-reference of type {render_type(r)}",
                                 _span(m))
        return r.elem
    if isinstance(m, Quote):
        check_classifier(ctx, m.cls)
        return QuoteT(static_synth_code(ctx, m.cls, m.body), m.cls)
    if isinstance(m, CAbs):
        if m.var in ctx.classifiers:
            raise TypeCheckError(f"classifier {m.var} is already bound")
        return Forall(m.var, static_synth_meta(ctx.add_classifier(m.var), m.body))
    if isinstance(m, CApp):
        t = static_synth_meta(ctx, m.expr)
        check_classifier(ctx, m.cls, _span(m))
        if not isinstance(t, Forall):
            raise TypeCheckError(f"classifier application to type {render_type(t)}", _span(m))
        return subst_classifier(t.body, t.var, m.cls)
    if isinstance(m, CIntro):
        check_classifier(ctx, m.lo)
        check_classifier(ctx, m.hi)
        return Constrained(m.lo, m.hi, static_synth_meta(ctx.assume(m.lo, m.hi), m.body))
    if isinstance(m, CElim):
        t = static_synth_meta(ctx, m.expr)
        if not isinstance(t, Constrained):
            raise TypeCheckError(f"constraint elimination on type {render_type(t)}", _span(m))
        if not ctx.theta.ec_subtype(t.lo, t.hi):
            raise TypeCheckError(f"constraint {render_type(t)} does not hold here", _span(m))
        return t.body
    if isinstance(m, Let):
        check_type(ctx, m.ty, _span(m), gradual=False)
        a = static_synth_meta(ctx, m.bound)
        if not _sub(ctx, a, m.ty):
            raise TypeCheckError(
                f"{m.var} is bound to a value of type {render_type(a)}, not a subtype of "
                f"{render_type(m.ty)}", _span(m))
        return static_synth_meta(ctx.bind_meta(m.var, m.ty), m.body)
    if isinstance(m, Sequence):
        static_synth_meta(ctx, m.first)
        return static_synth_meta(ctx, m.second)
    if isinstance(m, Addr):
        if 0 <= m.n < len(ctx.store):
            return RefT(ctx.store[m.n])
        raise TypeCheckError("addresses do not appear in source programs")
    raise TypeCheckError(f"not a meta term: {type(m).__name__}")


@_located
def static_synth_code(ctx: Ctx, e: Any, m: Any) -> Any:
    """Synthesize the code type of ``m`` at enclosing classifier ``e``."""
    if isinstance(m, Const):
        return m.type
    if isinstance(m, CVar):
        b = ctx.lookup(m.name)
        if b is None:
            raise TypeCheckError(f"unbound code variable {m.name}")
        if b.kind != "code":
            raise TypeCheckError(f"meta variable {m.name} used inside a quotation")
        if not ctx.theta.ec_subtype(b.cls, e):
            raise TypeCheckError(f"code variable {m.name} is not in scope at this classifier")
        return b.ty
    if isinstance(m, CLam):
        check_type(ctx, m.ty, gradual=False)
        if not isinstance(m.cls, Named):
            raise TypeCheckError("code lambdas bind a classifier name")
        a = m.cls.name
        if a in ctx.classifiers:
            raise TypeCheckError(f"classifier {a} is already bound")
        inner = ctx.add_classifier(a).assume(e, m.cls).bind_code(m.var, m.ty, m.cls)
        return Arrow(m.ty, static_synth_code(inner, m.cls, m.body))
    if isinstance(m, CodeApp):
        f = static_synth_code(ctx, e, m.fn)
        if not isinstance(f, Arrow):
            raise TypeCheckError(f"applying code of non-function type {render_type(f)}")
        static_check_code(ctx, e, m.arg, f.dom)
        return f.cod
    if isinstance(m, CodePrim):
        static_check_code(ctx, e, m.left, INT)
        static_check_code(ctx, e, m.right, INT)
        return INT
    if isinstance(m, Splice):
        t = static_synth_meta(ctx, m.expr)
        if not isinstance(t, QuoteT):
            raise TypeCheckError(f"splicing a non-code value of type {render_type(t)}", _span(m))
        if not ctx.theta.ec_subtype(t.cls, e):
            raise TypeCheckError(
                f"code of type {render_type(t)} cannot be spliced at this classifier", _span(m))
        return t.code
    raise TypeCheckError(f"not a code term: {type(m).__name__}")


@_located
def static_check_code(ctx: Ctx, e: Any, m: Any, c: Any) -> None:
    """Check ``m`` against code type ``c`` at enclosing classifier ``e``."""
    if isinstance(m, Splice):
        t = static_synth_meta(ctx, m.expr)
        want = QuoteT(c, e)
        if not _sub(ctx, t, want):
            raise TypeCheckError(
                f"spliced expression has type {render_type(t)}, not a subtype of "
                f"{render_type(want)}", _span(m))
        return
    got = static_synth_code(ctx, e, m)
    if not alpha_eq(got, c):
        raise TypeCheckError(f"code has type {render_type(got)}, expected {render_type(c)}")


def static_typecheck(m: Any) -> Any:
    """Type a closed static program."""
    return static_synth_meta(EMPTY_CTX, m)


# ---------------------------------------------------------------------------
# direct reduction


class StaticStuck(Exception):
    pass


@dataclass
class StaticState:
    heap: list = field(default_factory=list)
    store: list = field(default_factory=list)  # cell types, fixed at allocation
    steps: int = 0

    def ctx(self) -> Ctx:
        """The context that types terms of this state."""
        return Ctx(store=tuple(self.store))


def is_static_value(m: Any) -> bool:
    if isinstance(m, (Const, Lam, Addr, CAbs, CIntro)):
        return True
    return isinstance(m, Quote) and m.finished


def static_step(state: StaticState, m: Any) -> Any:
    """One left-to-right call-by-value step; code reduces under code lambdas."""
    if isinstance(m, Let):
        if not is_static_value(m.bound):
            return Let(m.var, m.ty, static_step(state, m.bound), m.body, m.label)
        return subst_term(m.body, m.var, m.bound)
    if isinstance(m, Sequence):
        if not is_static_value(m.first):
            return Sequence(static_step(state, m.first), m.second, m.label)
        return m.second
    if isinstance(m, App):
        if not is_static_value(m.fn):
            return App(static_step(state, m.fn), m.arg, m.label)
        if not is_static_value(m.arg):
            return App(m.fn, static_step(state, m.arg), m.label)
        if isinstance(m.fn, Lam):
            return subst_term(m.fn.body, m.fn.var, m.arg)
        raise StaticStuck(f"applying {type(m.fn).__name__}")
    if isinstance(m, Prim):
        if not is_static_value(m.left):
            return Prim(m.op, static_step(state, m.left), m.right, m.label)
        if not is_static_value(m.right):
            return Prim(m.op, m.left, static_step(state, m.right), m.label)
        return Const(_arith(m.op, m.left.value, m.right.value))
    if isinstance(m, RefNew):
        if not is_static_value(m.expr):
            return RefNew(static_step(state, m.expr), m.ty)
        state.store.append(static_synth_meta(state.ctx(), m.expr))
        state.heap.append(m.expr)
        return Addr(len(state.heap) - 1)
    if isinstance(m, Assign):
        if not is_static_value(m.target):
            return Assign(static_step(state, m.target), m.value, m.label)
        if not is_static_value(m.value):
            return Assign(m.target, static_step(state, m.value), m.label)
        state.heap[m.target.n] = m.value
        return Const(None)
    if isinstance(m, Deref):
        if not is_static_value(m.expr):
            return Deref(static_step(state, m.expr), m.label)
        return state.heap[m.expr.n]
    if isinstance(m, Quote):
        if is_static_code_value(m.body):
            return Quote(m.body, m.cls, True)
        return Quote(_code_step(state, m.body), m.cls)
    if isinstance(m, CApp):
        if not is_static_value(m.expr):
            return CApp(static_step(state, m.expr), m.cls, m.label)
        return subst_classifier(m.expr.body, m.expr.var, m.cls)
    if isinstance(m, CElim):
        if not is_static_value(m.expr):
            return CElim(static_step(state, m.expr), m.label)
        return m.expr.body
    raise StaticStuck(f"no rule for {type(m).__name__}")


def _code_step(state: StaticState, m: Any) -> Any:
    if isinstance(m, Splice):
        if isinstance(m.expr, Quote) and m.expr.finished:
            return m.expr.body
        return Splice(static_step(state, m.expr), m.label)
    if isinstance(m, CLam):
        return CLam(m.var, m.ty, m.cls, _code_step(state, m.body), m.runtime)
    if isinstance(m, CodeApp):
        if not is_static_code_value(m.fn):
            return CodeApp(_code_step(state, m.fn), m.arg)
        return CodeApp(m.fn, _code_step(state, m.arg))
    if isinstance(m, CodePrim):
        if not is_static_code_value(m.left):
            return CodePrim(m.op, _code_step(state, m.left), m.right)
        return CodePrim(m.op, m.left, _code_step(state, m.right))
    raise StaticStuck(f"no code rule for {type(m).__name__}")


def _arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise StaticStuck(f"unknown operator {op}")


def static_eval(m: Any, step_limit: int = 1_000_000) -> tuple[Any, StaticState]:
    state = StaticState()
    while not is_static_value(m):
        if state.steps >= step_limit:
            raise StaticStuck("step limit reached")
        m = static_step(state, m)
        state.steps += 1
    return m, state

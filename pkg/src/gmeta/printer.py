"""Pretty printing of types, terms, coercions and values.

Surface terms print in the concrete syntax accepted by :mod:`gmeta.parser`.
Cast-calculus forms (casts, blame, addresses) print in a debug notation that
the parser does not read back.
"""

from __future__ import annotations

from typing import Any

from .syntax import (
    Addr,
    App,
    Arrow,
    Assign,
    Base,
    Blame,
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
    DynElim,
    Eps,
    Forall,
    Gen,
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
    Cast,
)

# ---------------------------------------------------------------------------
# classifiers and types


def render_cls(e: Any, star: str = "?") -> str:
    if isinstance(e, Star):
        return star
    if isinstance(e, Eps):
        return "eps"
    if isinstance(e, Named):
        return e.name
    if isinstance(e, Gen):
        return f"{e.hint}#{e.id}"
    raise TypeError(f"not a classifier: {e!r}")


def render_type(t: Any, star: str = "?") -> str:
    return _ty(t, 0, star)


def _ty(t: Any, prec: int, star: str) -> str:
    # prec 0: anything; 1: arrow domain; 2: Ref argument
    if isinstance(t, Star):
        return star
    if isinstance(t, Base):
        return t.name
    if isinstance(t, QuoteT):
        return f"Code<{_ty(t.code, 0, star)}>@{render_cls(t.cls, star)}"
    if isinstance(t, RefT):
        s = f"Ref {_ty(t.elem, 2, star)}"
        return f"({s})" if prec >= 2 else s
    if isinstance(t, Arrow):
        s = f"{_ty(t.dom, 1, star)} -> {_ty(t.cod, 0, star)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, Forall):
        s = f"forall {t.var}. {_ty(t.body, 0, star)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, Constrained):
        s = f"[{render_cls(t.lo, star)} <: {render_cls(t.hi, star)}] => {_ty(t.body, 0, star)}"
        return f"({s})" if prec >= 1 else s
    raise TypeError(f"not a type: {t!r}")


# ---------------------------------------------------------------------------
# coercions (debug notation, ``*`` for the unknown)


def render_coercion(c: Any) -> str:
    from . import coercions as K

    if isinstance(c, K.Id):
        return "id"
    if isinstance(c, K.Fail):
        return f"fail {c.label}"
    if isinstance(c, K.Inj):
        return f"{_ground(c.ground)}!"
    if isinstance(c, K.Proj):
        return f"{_ground(c.ground)}?{c.label}"
    if isinstance(c, K.Sub):
        return f"{render_cls(c.lo, '*')}^{render_cls(c.hi, '*')}"
    if isinstance(c, K.Seq):
        return ";".join(_coercion_item(x) for x in c.items)
    if isinstance(c, K.Arr):
        return f"({_coercion_item(c.dom)} -> {_coercion_item(c.cod)})"
    if isinstance(c, K.RefC):
        return f"Ref({render_coercion(c.write)}, {render_coercion(c.read)})"
    if isinstance(c, K.QuoteC):
        return f"Code<{render_coercion(c.code)}>@({render_coercion(c.ec)})"
    if isinstance(c, K.ForallC):
        return f"forall {c.var}.({render_coercion(c.body)})"
    if isinstance(c, K.ConstrC):
        return f"[{render_cls(c.lo, '*')} <: {render_cls(c.hi, '*')}] => ({render_coercion(c.body)})"
    from .hyper import Hyper, render

    if isinstance(c, Hyper):
        return render(c)
    raise TypeError(f"not a coercion: {c!r}")


def _coercion_item(c: Any) -> str:
    from . import coercions as K

    s = render_coercion(c)
    return f"({s})" if isinstance(c, K.Seq) else s


def _ground(g: Any) -> str:
    if isinstance(g, (Eps, Named, Gen)):
        return render_cls(g, "*")
    s = render_type(g, "*")
    return s if isinstance(g, (Base, Star)) else f"({s})"


# ---------------------------------------------------------------------------
# terms

SEQ, ASSIGN, ADD, MUL, APP, PREFIX, POSTFIX, ATOM = range(8)
_OP_PREC = {"+": ADD, "-": ADD, "*": MUL}


def render_term(m: Any) -> str:
    return _tm(m, SEQ)


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _const(v: Any) -> str:
    if v is None:
        return "()"
    if v is True:
        return "true"
    if v is False:
        return "false"
    return str(v)


def _tm(m: Any, prec: int) -> str:
    if isinstance(m, Const):
        return _const(m.value)
    if isinstance(m, Var):
        return m.name
    if isinstance(m, Addr):
        return f"#a{m.n}"
    if isinstance(m, Blame):
        return f"blame {m.label}"
    if isinstance(m, Lam):
        return _paren(f"fun ({m.var} : {render_type(m.ty)}) {_tm(m.body, SEQ)}", prec > SEQ)
    if isinstance(m, Let):
        s = f"let {m.var} : {render_type(m.ty)} = {_tm(m.bound, SEQ)} in {_tm(m.body, SEQ)}"
        return _paren(s, prec > SEQ)
    if isinstance(m, CAbs):
        return _paren(f"cfun {m.var} . {_tm(m.body, SEQ)}", prec > SEQ)
    if isinstance(m, CIntro):
        s = f"[{render_cls(m.lo)} <: {render_cls(m.hi)}] => {_tm(m.body, SEQ)}"
        return _paren(s, prec > SEQ)
    if isinstance(m, Sequence):
        return _paren(f"{_tm(m.first, ASSIGN)}; {_tm(m.second, SEQ)}", prec > SEQ)
    if isinstance(m, Assign):
        return _paren(f"{_tm(m.target, ADD)} := {_tm(m.value, ADD)}", prec > ASSIGN)
    if isinstance(m, Prim):
        p = _OP_PREC[m.op]
        return _paren(f"{_tm(m.left, p)} {m.op} {_tm(m.right, p + 1)}", prec > p)
    if isinstance(m, App):
        return _paren(f"{_tm(m.fn, APP)} {_tm(m.arg, PREFIX)}", prec > APP)
    if isinstance(m, RefNew):
        return _paren(f"ref {_tm(m.expr, PREFIX)}", prec > PREFIX)
    if isinstance(m, Deref):
        return _paren(f"!{_tm(m.expr, PREFIX)}", prec > PREFIX)
    if isinstance(m, CApp):
        return _paren(f"{_tm(m.expr, POSTFIX)} [{render_cls(m.cls)}]", prec > POSTFIX)
    if isinstance(m, CElim):
        return _paren(f"{_tm(m.expr, POSTFIX)}!", prec > POSTFIX)
    if isinstance(m, DynElim):
        return _paren(f"{_tm(m.expr, POSTFIX)}!?{m.label}", prec > POSTFIX)
    if isinstance(m, Cast):
        return _paren(f"{_tm(m.expr, POSTFIX)}<{render_coercion(m.coercion)}>", prec > POSTFIX)
    if isinstance(m, Quote):
        if m.finished:
            return f"code{{ {render_code(m.body)} }}@{render_cls(m.cls)}"
        return f"`{render_cls(m.cls)}{{ {render_code(m.body)} }}"
    raise TypeError(f"cannot render meta term {m!r}")


# code terms: 0 lambda/any, 1 add, 2 mul, 3 app, 4 atom
C_ANY, C_ADD, C_MUL, C_APP, C_ATOM = range(5)
_COP_PREC = {"+": C_ADD, "-": C_ADD, "*": C_MUL}


def render_code(m: Any) -> str:
    return _code(m, C_ANY)


def _code(m: Any, prec: int) -> str:
    if isinstance(m, Const):
        return _const(m.value)
    if isinstance(m, CVar):
        return m.name
    if isinstance(m, CLam):
        if m.runtime:
            head = f"clam ({m.var} : {render_type(m.ty)})"
        else:
            head = f"clam ({m.var} : {render_type(m.ty)}) @ {render_cls(m.cls)}"
        return _paren(f"{head} . {_code(m.body, C_ANY)}", prec > C_ANY)
    if isinstance(m, CodePrim):
        p = _COP_PREC[m.op]
        return _paren(f"{_code(m.left, p)} {m.op} {_code(m.right, p + 1)}", prec > p)
    if isinstance(m, CodeApp):
        return _paren(f"{_code(m.fn, C_APP)} {_code(m.arg, C_ATOM)}", prec > C_APP)
    if isinstance(m, Splice):
        if isinstance(m.expr, Var):
            return f"~{m.expr.name}"
        return f"~({_tm(m.expr, SEQ)})"
    raise TypeError(f"cannot render code term {m!r}")


def render_value(v: Any) -> str:
    """Render a machine result; code values print as ``code{ ... }@e``.

    Generated code variables print under their source name when that
    captures nothing.
    """
    return render_term(display_names(v))


def _base(name: str) -> str:
    return name.split("#")[0]


def display_names(m: Any) -> Any:
    from .syntax import Node, Term, free_cvars, rebuild

    def code(n: Any, env: dict) -> Any:
        if isinstance(n, CVar):
            return CVar(env.get(n.name, n.name))
        if isinstance(n, CLam):
            b = _base(n.var)
            shown = {env.get(u, u) for u in free_cvars(n.body) - {n.var}}
            d = b if b not in shown else n.var
            return CLam(d, n.ty, n.cls, code(n.body, {**env, n.var: d}), n.runtime)
        if isinstance(n, Term):
            return rebuild(n, lambda c: code(c, env) if isinstance(c, Node) else c)
        return n

    def meta(n: Any) -> Any:
        if isinstance(n, Quote) and n.finished:
            return Quote(code(n.body, {}), n.cls, True)
        if isinstance(n, Term):
            return rebuild(n, lambda c: meta(c) if isinstance(c, Node) else c)
        return n

    return meta(m)


def render_code_value(v: Any) -> str:
    return render_code(v)


__all__ = [
    "render_cls", "render_code", "render_coercion", "render_term", "render_type", "render_value",
]

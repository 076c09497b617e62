"""Hypercoercions: canonical ``head; middle; tail`` triples and their composition.

Middles reuse the structural coercion classes of :mod:`gmeta.coercions`, with
hypercoercion children, plus ``MidId`` for identities at ``?`` and at base
types.  Three kinds share one representation and are told apart by the
``kind`` argument: ``"meta"``, ``"code"`` and ``"ec"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .coercions import (
    ID,
    Arr,
    ConstrC,
    Fail,
    ForallC,
    Id,
    Inj,
    Proj,
    QuoteC,
    RefC,
    Sub,
    is_ec_ground,
    items_of,
    normalize,
)
from .subtyping import EMPTY_ENV, SubtypeEnv
from .syntax import (
    Arrow,
    Base,
    Constrained,
    Forall,
    Named,
    Node,
    QuoteT,
    RefT,
    STAR,
    Star,
    alpha_eq,
    subst_classifier,
)

META, CODE, EC = "meta", "code", "ec"


@dataclass(frozen=True)
class MidId(Node):
    """Identity middle at ``?`` or at a base type."""

    ty: Any


@dataclass(frozen=True)
class Hyper(Node):
    head: Any  # None or Proj
    mid: Any
    tail: Any  # None or Inj

    def __str__(self) -> str:
        return render(self)


def is_fail(h: Hyper) -> bool:
    return isinstance(h.mid, Fail)


def _fail(head: Any, f: Fail) -> Hyper:
    # failing triples drop their tail so each failure has one representation
    return Hyper(head, f, None)


# ---------------------------------------------------------------------------
# composition


def _tail_head(t: Any, h: Any, env: SubtypeEnv) -> Any:
    """``t ; h``: None (identity), an Inj, a Proj, a Sub or a Fail."""
    if t is None:
        return h
    if h is None:
        return t
    if is_ec_ground(t.ground):
        return Sub(t.ground, h.ground) if env.ec_subtype(t.ground, h.ground) else Fail(h.label)
    return None if alpha_eq(t.ground, h.ground) else Fail(h.label)


def compose(c1: Hyper, c2: Hyper, env: SubtypeEnv = EMPTY_ENV, kind: str = META) -> Hyper:
    """Compose two hypercoercions of the same kind."""
    if isinstance(c1.mid, Fail):
        return _fail(c1.head, c1.mid)
    th = _tail_head(c1.tail, c2.head, env)
    if isinstance(c2.mid, Fail):
        if isinstance(th, Fail):
            return _fail(c1.head, th)
        if isinstance(th, Proj):
            # c1 is the identity at ?, so the projection survives
            return _fail(th, c2.mid)
        return _fail(c1.head, c2.mid)
    if isinstance(th, Fail):
        return _fail(c1.head, th)
    if isinstance(th, Inj):
        return Hyper(c1.head, c1.mid, th)
    if isinstance(th, Proj):
        return Hyper(th, c2.mid, c2.tail)
    if isinstance(th, Sub):
        m = compose_mid(c1.mid, compose_mid(th, c2.mid, env, kind), env, kind)
    else:
        m = compose_mid(c1.mid, c2.mid, env, kind)
    if isinstance(m, Fail):
        return _fail(c1.head, m)
    return Hyper(c1.head, m, c2.tail)


def compose_mid(m1: Any, m2: Any, env: SubtypeEnv = EMPTY_ENV, kind: str = META) -> Any:
    if isinstance(m1, Fail):
        return m1
    if isinstance(m2, Fail):
        return m2
    if isinstance(m2, MidId):
        return m1
    if isinstance(m1, MidId):
        return m2
    if isinstance(m1, Sub) and isinstance(m2, Sub):
        return Sub(m1.lo, m2.hi)
    if isinstance(m1, Arr) and isinstance(m2, Arr):
        d = compose(m2.dom, m1.dom, env, kind)
        r = compose(m1.cod, m2.cod, env, kind)
        if kind == CODE:
            if is_fail(d):
                return d.mid
            if is_fail(r):
                return r.mid
        return Arr(d, r)
    if isinstance(m1, RefC) and isinstance(m2, RefC):
        return RefC(compose(m2.write, m1.write, env), compose(m1.read, m2.read, env))
    if isinstance(m1, QuoteC) and isinstance(m2, QuoteC):
        cc = compose(m1.code, m2.code, env, CODE)
        if is_fail(cc):
            return cc.mid
        ce = compose(m1.ec, m2.ec, env, EC)
        if is_fail(ce):
            return ce.mid
        return QuoteC(cc, ce)
    if isinstance(m1, ForallC) and isinstance(m2, ForallC):
        body2 = m2.body if m2.var == m1.var else subst_classifier(m2.body, m2.var, Named(m1.var))
        return ForallC(m1.var, compose(m1.body, body2, env))
    if isinstance(m1, ConstrC) and isinstance(m2, ConstrC):
        return ConstrC(m1.lo, m1.hi, compose(m1.body, m2.body, env.extend(m1.lo, m1.hi)))
    raise ValueError(f"ill-typed middle composition {m1!r} ; {m2!r}")


def compose_meta(env: SubtypeEnv, c1: Hyper, c2: Hyper) -> Hyper:
    return compose(c1, c2, env, META)


def compose_ec(env: SubtypeEnv, c1: Hyper, c2: Hyper) -> Hyper:
    return compose(c1, c2, env, EC)


def compose_code(c1: Hyper, c2: Hyper) -> Hyper:
    return compose(c1, c2, EMPTY_ENV, CODE)


# ---------------------------------------------------------------------------
# height


def height(c: Any) -> int:
    if isinstance(c, Hyper):
        return height(c.mid)
    if isinstance(c, (MidId, Fail, Sub)):
        return 1
    if isinstance(c, Arr):
        return 1 + max(height(c.dom), height(c.cod))
    if isinstance(c, RefC):
        return 1 + max(height(c.write), height(c.read))
    if isinstance(c, QuoteC):
        return 1 + max(height(c.code), height(c.ec))
    if isinstance(c, (ForallC, ConstrC)):
        return 1 + height(c.body)
    raise ValueError(f"not a hypercoercion: {c!r}")


def size(c: Any) -> int:
    if isinstance(c, Hyper):
        return (c.head is not None) + (c.tail is not None) + size(c.mid)
    if isinstance(c, (MidId, Fail, Sub)):
        return 1
    if isinstance(c, Arr):
        return 1 + size(c.dom) + size(c.cod)
    if isinstance(c, RefC):
        return 1 + size(c.write) + size(c.read)
    if isinstance(c, QuoteC):
        return 1 + size(c.code) + size(c.ec)
    return 1 + size(c.body)


# ---------------------------------------------------------------------------
# translation from sequence form


def identity(ty: Any, kind: str = META) -> Hyper:
    """The identity hypercoercion at ``ty``, expanded structurally."""
    return Hyper(None, _id_mid(ty, kind), None)


def _id_mid(ty: Any, kind: str) -> Any:
    if isinstance(ty, Star):
        return MidId(STAR)
    if kind == EC:
        return Sub(ty, ty)
    if isinstance(ty, Base):
        return MidId(ty)
    if isinstance(ty, Arrow):
        return Arr(identity(ty.dom, kind), identity(ty.cod, kind))
    if isinstance(ty, RefT):
        return RefC(identity(ty.elem), identity(ty.elem))
    if isinstance(ty, QuoteT):
        return QuoteC(identity(ty.code, CODE), identity(ty.cls, EC))
    if isinstance(ty, Forall):
        return ForallC(ty.var, identity(ty.body))
    if isinstance(ty, Constrained):
        return ConstrC(ty.lo, ty.hi, identity(ty.body))
    raise ValueError(f"no identity middle at {ty!r}")


def to_hyper(c: Any, src: Any, dst: Any, env: SubtypeEnv = EMPTY_ENV, kind: str = META) -> Hyper:
    """Translate a sequence coercion ``c : src => dst`` into a hypercoercion."""
    return _read_off(normalize(c, env, kind == CODE), src, dst, env, kind)


def _read_off(c: Any, src: Any, dst: Any, env: SubtypeEnv, kind: str) -> Hyper:
    items = items_of(c)
    head = items.pop(0) if items and isinstance(items[0], Proj) else None
    if items and isinstance(items[-1], Fail):
        return _fail(head, items[-1])
    tail = items.pop() if items and isinstance(items[-1], Inj) else None
    msrc = head.ground if head is not None else src
    mdst = tail.ground if tail is not None else dst
    if not items:
        return Hyper(head, _id_mid(msrc, kind), tail)
    if len(items) != 1:
        raise ValueError(f"not a normal form: {c!r}")
    return Hyper(head, _mid(items[0], msrc, mdst, env, kind), tail)


def _mid(m: Any, src: Any, dst: Any, env: SubtypeEnv, kind: str) -> Any:
    if isinstance(m, Sub):
        return m
    if isinstance(m, Arr):
        return Arr(_read_off(m.dom, dst.dom, src.dom, env, kind),
                   _read_off(m.cod, src.cod, dst.cod, env, kind))
    if isinstance(m, RefC):
        return RefC(_read_off(m.write, dst.elem, src.elem, env, kind),
                    _read_off(m.read, src.elem, dst.elem, env, kind))
    if isinstance(m, QuoteC):
        return QuoteC(_read_off(m.code, src.code, dst.code, env, CODE),
                      _read_off(m.ec, src.cls, dst.cls, env, EC))
    if isinstance(m, ForallC):
        # canonical binder: the source type's
        v = src.var
        body = m.body if m.var == v else subst_classifier(m.body, m.var, Named(v))
        dbody = dst.body if dst.var == v else subst_classifier(dst.body, dst.var, Named(v))
        return ForallC(v, _read_off(body, src.body, dbody, env, kind))
    if isinstance(m, ConstrC):
        return ConstrC(m.lo, m.hi, _read_off(m.body, src.body, dst.body, env.extend(m.lo, m.hi), kind))
    raise ValueError(f"unexpected middle {m!r}")


def from_hyper(c: Hyper) -> Any:
    """Back to sequence form (used by tests and rendering)."""
    from .coercions import seq

    return seq(c.head or ID, _from_mid(c.mid), c.tail or ID)


def _from_mid(m: Any) -> Any:
    if isinstance(m, MidId):
        return ID
    if isinstance(m, (Fail, Sub)):
        return m
    if isinstance(m, Arr):
        return Arr(from_hyper(m.dom), from_hyper(m.cod))
    if isinstance(m, RefC):
        return RefC(from_hyper(m.write), from_hyper(m.read))
    if isinstance(m, QuoteC):
        return QuoteC(from_hyper(m.code), from_hyper(m.ec))
    if isinstance(m, ForallC):
        return ForallC(m.var, from_hyper(m.body))
    return ConstrC(m.lo, m.hi, from_hyper(m.body))


def is_identity(c: Hyper) -> bool:
    """True for ``id; id; id`` at ``?`` or a base type."""
    return c.head is None and c.tail is None and isinstance(c.mid, MidId)


def is_identity_like(c: Any) -> bool:
    """True when ``c`` is an identity at its type, expanded structurally."""
    if isinstance(c, Hyper):
        return c.head is None and c.tail is None and is_identity_like(c.mid)
    if isinstance(c, MidId):
        return True
    if isinstance(c, Sub):
        return c.lo == c.hi
    if isinstance(c, Arr):
        return is_identity_like(c.dom) and is_identity_like(c.cod)
    if isinstance(c, RefC):
        return is_identity_like(c.write) and is_identity_like(c.read)
    if isinstance(c, QuoteC):
        return is_identity_like(c.code) and is_identity_like(c.ec)
    if isinstance(c, (ForallC, ConstrC)):
        return is_identity_like(c.body)
    return False


def is_inert(c: Hyper) -> bool:
    if c.head is not None or isinstance(c.mid, Fail):
        return False
    if c.tail is not None:
        return True
    return not isinstance(c.mid, MidId)


# ---------------------------------------------------------------------------
# rendering


def render(c: Any) -> str:
    from .printer import render_coercion

    if isinstance(c, Hyper):
        h = render_coercion(c.head) if c.head is not None else "id"
        t = render_coercion(c.tail) if c.tail is not None else "id"
        return f"{h};{render(c.mid)};{t}"
    if isinstance(c, MidId):
        return f"id[{c.ty}]"
    if isinstance(c, Arr):
        return f"({render(c.dom)} -> {render(c.cod)})"
    if isinstance(c, RefC):
        return f"Ref({render(c.write)}, {render(c.read)})"
    if isinstance(c, QuoteC):
        return f"Code<{render(c.code)}>@({render(c.ec)})"
    if isinstance(c, ForallC):
        return f"forall {c.var}.({render(c.body)})"
    if isinstance(c, ConstrC):
        return f"[{c.lo} <: {c.hi}] => ({render(c.body)})"
    from .printer import render_coercion

    return render_coercion(c)


__all__ = [
    "CODE", "EC", "META", "Hyper", "MidId", "compose", "compose_code", "compose_ec",
    "compose_meta", "compose_mid", "from_hyper", "height", "identity", "is_identity",
    "is_inert", "render", "size", "to_hyper",
]

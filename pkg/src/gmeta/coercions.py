"""Sequence-form coercions for classifiers, code types and meta types.

The three kinds share one set of node classes.  ``Inj``/``Proj`` carry a
ground, and the ground's class tells the kinds apart: classifier grounds are
classifiers, code and meta grounds are types.  The only kind-dependent rule
is eager failure under a code arrow, so normalization takes a ``code`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .subtyping import EMPTY_ENV, SubtypeEnv, consistent_classifier, consistent_code, consistent_subtype
from .syntax import (
    Arrow,
    Base,
    Classifier,
    Constrained,
    Eps,
    Forall,
    Gen,
    Label,
    Named,
    Node,
    QuoteT,
    RefT,
    STAR,
    Star,
    Type,
    _fresh_name,
    alpha_eq,
    free_classifiers,
    subst_classifier,
)


class Coercion(Node):
    __slots__ = ()


@dataclass(frozen=True)
class Id(Coercion):
    pass


ID = Id()


@dataclass(frozen=True)
class Fail(Coercion):
    label: Label


@dataclass(frozen=True)
class Inj(Coercion):
    ground: Any  # Type ground or Classifier


@dataclass(frozen=True)
class Proj(Coercion):
    ground: Any
    label: Label


@dataclass(frozen=True)
class Seq(Coercion):
    items: tuple


@dataclass(frozen=True)
class Sub(Coercion):
    """Classifier subtyping evidence ``lo`` up to ``hi``."""

    lo: Classifier
    hi: Classifier


@dataclass(frozen=True)
class Arr(Coercion):
    dom: Any
    cod: Any


@dataclass(frozen=True)
class RefC(Coercion):
    write: Any
    read: Any


@dataclass(frozen=True)
class QuoteC(Coercion):
    code: Any
    ec: Any


@dataclass(frozen=True)
class ForallC(Coercion):
    var: str
    body: Any


@dataclass(frozen=True)
class ConstrC(Coercion):
    lo: Classifier
    hi: Classifier
    body: Any


STRUCTURAL = (Arr, RefC, QuoteC, ForallC, ConstrC)


class CoercionError(Exception):
    """Raised when coercions are requested between unrelated types."""


# ---------------------------------------------------------------------------
# grounds


def is_ec_ground(g: Any) -> bool:
    return isinstance(g, (Eps, Named, Gen))


def ground_of(t: Type) -> Type:
    """The ground type sharing ``t``'s head constructor."""
    if isinstance(t, Base):
        return t
    if isinstance(t, Arrow):
        return Arrow(STAR, STAR)
    if isinstance(t, RefT):
        return RefT(STAR)
    if isinstance(t, QuoteT):
        return QuoteT(STAR, STAR)
    if isinstance(t, Forall):
        return Forall(t.var, STAR)
    if isinstance(t, Constrained):
        return Constrained(t.lo, t.hi, STAR)
    raise CoercionError(f"no ground for {t}")


def is_ground(t: Any) -> bool:
    if isinstance(t, Base):
        return True
    if isinstance(t, Arrow):
        return isinstance(t.dom, Star) and isinstance(t.cod, Star)
    if isinstance(t, RefT):
        return isinstance(t.elem, Star)
    if isinstance(t, QuoteT):
        return isinstance(t.code, Star) and isinstance(t.cls, Star)
    if isinstance(t, (Forall, Constrained)):
        return isinstance(t.body, Star)
    return False


def ground_eq(g: Any, h: Any) -> bool:
    return alpha_eq(g, h)


# ---------------------------------------------------------------------------
# sequencing helpers


def seq(*cs: Any) -> Coercion:
    """Flat sequence, dropping syntactic identities."""
    items: list = []
    for c in cs:
        if isinstance(c, Seq):
            items.extend(c.items)
        elif not isinstance(c, Id):
            items.append(c)
    if not items:
        return ID
    if len(items) == 1:
        return items[0]
    return Seq(tuple(items))


def items_of(c: Any) -> list:
    if isinstance(c, Seq):
        return list(c.items)
    if isinstance(c, Id):
        return []
    return [c]


def split_last(c: Any) -> tuple[Any, Any]:
    """Split a sequence into its initial part and its final atomic coercion."""
    if isinstance(c, Seq):
        items = c.items
        return seq(*items[:-1]), items[-1]
    return ID, c


# ---------------------------------------------------------------------------
# normalization


def _collapse(c: Any) -> Any:
    """Structural identities collapse to Id."""
    if isinstance(c, Arr) and isinstance(c.dom, Id) and isinstance(c.cod, Id):
        return ID
    if isinstance(c, RefC) and isinstance(c.write, Id) and isinstance(c.read, Id):
        return ID
    if isinstance(c, QuoteC) and isinstance(c.code, Id) and isinstance(c.ec, Id):
        return ID
    if isinstance(c, (ForallC, ConstrC)) and isinstance(c.body, Id):
        return ID
    if isinstance(c, Sub) and c.lo == c.hi:
        return ID
    return c


def failure_of(c: Any) -> Fail | None:
    """The failure a normal form ends in (``Fail`` or ``H?l; Fail``)."""
    if isinstance(c, Fail):
        return c
    if isinstance(c, Seq) and isinstance(c.items[-1], Fail):
        return c.items[-1]
    return None


def _norm_struct(c: Any, env: SubtypeEnv, code: bool) -> Any:
    if isinstance(c, Arr):
        d = normalize(c.dom, env, code)
        r = normalize(c.cod, env, code)
        if code:
            # eager: a failing code arrow component fails the whole coercion
            f = failure_of(d) or failure_of(r)
            if f is not None:
                return f
        return _collapse(Arr(d, r))
    if isinstance(c, RefC):
        return _collapse(RefC(normalize(c.write, env), normalize(c.read, env)))
    if isinstance(c, QuoteC):
        cc = normalize(c.code, env, code=True)
        f = failure_of(cc)
        if f is not None:
            return f
        ce = normalize(c.ec, env)
        f = failure_of(ce)
        if f is not None:
            return f
        return _collapse(QuoteC(cc, ce))
    if isinstance(c, ForallC):
        return _collapse(ForallC(c.var, normalize(c.body, env)))
    if isinstance(c, ConstrC):
        return _collapse(ConstrC(c.lo, c.hi, normalize(c.body, env.extend(c.lo, c.hi))))
    return _collapse(c)


def _pair(a: Any, b: Any, env: SubtypeEnv, code: bool) -> list | None:
    """One reduction of the adjacent pair ``a; b``; None when no rule applies."""
    if isinstance(a, Fail):
        return [a]
    if isinstance(b, Fail):
        return None if isinstance(a, Proj) else [b]
    if isinstance(a, Inj) and isinstance(b, Proj):
        if is_ec_ground(a.ground):
            if env.ec_subtype(a.ground, b.ground):
                return [x for x in [_collapse(Sub(a.ground, b.ground))] if not isinstance(x, Id)]
            return [Fail(b.label)]
        return [] if ground_eq(a.ground, b.ground) else [Fail(b.label)]
    if isinstance(a, Sub) and isinstance(b, Sub):
        return [x for x in [_collapse(Sub(a.lo, b.hi))] if not isinstance(x, Id)]
    if isinstance(a, Arr) and isinstance(b, Arr):
        r = _norm_struct(Arr(seq(b.dom, a.dom), seq(a.cod, b.cod)), env, code)
        return [] if isinstance(r, Id) else [r]
    if isinstance(a, RefC) and isinstance(b, RefC):
        r = _norm_struct(RefC(seq(b.write, a.write), seq(a.read, b.read)), env, code)
        return [] if isinstance(r, Id) else [r]
    if isinstance(a, QuoteC) and isinstance(b, QuoteC):
        r = _norm_struct(QuoteC(seq(a.code, b.code), seq(a.ec, b.ec)), env, code)
        return [] if isinstance(r, Id) else [r]
    if isinstance(a, ForallC) and isinstance(b, ForallC):
        body_b = b.body if b.var == a.var else subst_classifier(b.body, b.var, Named(a.var))
        r = _norm_struct(ForallC(a.var, seq(a.body, body_b)), env, code)
        return [] if isinstance(r, Id) else [r]
    if isinstance(a, ConstrC) and isinstance(b, ConstrC) and a.lo == b.lo and a.hi == b.hi:
        r = _norm_struct(ConstrC(a.lo, a.hi, seq(a.body, b.body)), env, code)
        return [] if isinstance(r, Id) else [r]
    return None


def normalize(c: Any, env: SubtypeEnv = EMPTY_ENV, code: bool = False) -> Any:
    """Reduce a coercion to its normal form under ``env``.

    Children are normalized first; the flattened sequence is then rewritten
    pairwise, leftmost redex first, until no rule applies.
    """
    if isinstance(c, (Id, Fail, Inj, Proj)):
        return c
    if not isinstance(c, Seq):
        return _norm_struct(c, env, code)
    items: list = []
    for x in c.items:
        items.extend(items_of(normalize(x, env, code)))
    i = 0
    while i < len(items) - 1:
        r = _pair(items[i], items[i + 1], env, code)
        if r is None:
            i += 1
            continue
        items[i:i + 2] = r
        i = max(i - 1, 0)
    return seq(*items)


def is_normal(c: Any, env: SubtypeEnv = EMPTY_ENV, code: bool = False) -> bool:
    return normalize(c, env, code) == c


def is_inert(c: Any) -> bool:
    return not isinstance(c, (Id, Fail))


# ---------------------------------------------------------------------------
# generation


def coerce_ec(a: Classifier, b: Classifier, label: Label) -> Coercion:
    if isinstance(a, Star) and isinstance(b, Star):
        return ID
    if isinstance(b, Star):
        return Inj(a)
    if isinstance(a, Star):
        return Proj(b, label)
    return Sub(a, b)


def coerce_code(a: Type, b: Type, label: Label) -> Coercion:
    if isinstance(a, Star) and isinstance(b, Star):
        return ID
    if isinstance(a, Base) and isinstance(b, Base):
        if a.name != b.name:
            raise CoercionError(f"inconsistent code types {a} and {b}")
        return ID
    if isinstance(a, Star):
        if is_ground(b):
            return Proj(b, label)
        g = ground_of(b)
        return seq(Proj(g, label), coerce_code(g, b, label))
    if isinstance(b, Star):
        if is_ground(a):
            return Inj(a)
        g = ground_of(a)
        return seq(coerce_code(a, g, label), Inj(g))
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return Arr(coerce_code(b.dom, a.dom, label), coerce_code(a.cod, b.cod, label))
    raise CoercionError(f"inconsistent code types {a} and {b}")


def coerce(a: Type, b: Type, label: Label) -> Coercion:
    """Coercion between gradual meta types related by consistent subtyping."""
    if isinstance(a, Star) and isinstance(b, Star):
        return ID
    if isinstance(a, Star):
        if is_ground(b):
            return Proj(b, label)
        g = ground_of(b)
        return seq(Proj(g, label), coerce(g, b, label))
    if isinstance(b, Star):
        if is_ground(a):
            return Inj(a)
        g = ground_of(a)
        return seq(coerce(a, g, label), Inj(g))
    if isinstance(a, Base) and isinstance(b, Base) and a.name == b.name:
        return ID
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return Arr(coerce(b.dom, a.dom, label), coerce(a.cod, b.cod, label))
    if isinstance(a, RefT) and isinstance(b, RefT):
        return RefC(coerce(b.elem, a.elem, label), coerce(a.elem, b.elem, label))
    if isinstance(a, QuoteT) and isinstance(b, QuoteT):
        return QuoteC(coerce_code(a.code, b.code, label), coerce_ec(a.cls, b.cls, label))
    if isinstance(a, Forall) and isinstance(b, Forall):
        body_b = b.body if b.var == a.var else subst_classifier(b.body, b.var, Named(a.var))
        return ForallC(a.var, coerce(a.body, body_b, label))
    if isinstance(a, Constrained) and isinstance(b, Constrained) and a.lo == b.lo and a.hi == b.hi:
        return ConstrC(a.lo, a.hi, coerce(a.body, b.body, label))
    raise CoercionError(f"inconsistent types {a} and {b}")


# ---------------------------------------------------------------------------
# typing


class CoercionTypeError(Exception):
    pass


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise CoercionTypeError(msg)


def _teq(a: Any, b: Any) -> bool:
    return a is None or b is None or alpha_eq(a, b)


def target(c: Any, src: Any, env: SubtypeEnv = EMPTY_ENV) -> Any:
    """Target type of ``c`` applied at ``src``; None when it cannot be known."""
    if src is None:
        return None
    if isinstance(c, Id):
        return src
    if isinstance(c, Fail):
        return None
    if isinstance(c, Inj):
        return STAR
    if isinstance(c, Proj):
        return c.ground
    if isinstance(c, Sub):
        return c.hi
    if isinstance(c, Seq):
        t = src
        for x in c.items:
            t = target(x, t, env)
            if t is None:
                return None
        return t
    if isinstance(c, Arr) and isinstance(src, Arrow):
        d = source(c.dom, src.dom, env)
        r = target(c.cod, src.cod, env)
        return None if d is None or r is None else Arrow(d, r)
    if isinstance(c, RefC) and isinstance(src, RefT):
        return RefT(target(c.read, src.elem, env)) if target(c.read, src.elem, env) else None
    if isinstance(c, QuoteC) and isinstance(src, QuoteT):
        cc = target(c.code, src.code, env)
        ce = target(c.ec, src.cls, env)
        return None if cc is None or ce is None else QuoteT(cc, ce)
    if isinstance(c, ForallC) and isinstance(src, Forall):
        b = target(c.body, subst_classifier(src.body, src.var, Named(c.var)), env)
        return None if b is None else Forall(c.var, b)
    if isinstance(c, ConstrC) and isinstance(src, Constrained):
        b = target(c.body, src.body, env)
        return None if b is None else Constrained(c.lo, c.hi, b)
    return None


def source(c: Any, dst: Any, env: SubtypeEnv = EMPTY_ENV) -> Any:
    """Source type of ``c`` given its target; None when it cannot be known."""
    if dst is None:
        return None
    if isinstance(c, Id):
        return dst
    if isinstance(c, Fail):
        return None
    if isinstance(c, Inj):
        return c.ground
    if isinstance(c, Proj):
        return STAR
    if isinstance(c, Sub):
        return c.lo
    if isinstance(c, Seq):
        t = dst
        for x in reversed(c.items):
            t = source(x, t, env)
            if t is None:
                return None
        return t
    if isinstance(c, Arr) and isinstance(dst, Arrow):
        d = target(c.dom, dst.dom, env)
        r = source(c.cod, dst.cod, env)
        return None if d is None or r is None else Arrow(d, r)
    if isinstance(c, RefC) and isinstance(dst, RefT):
        s = target(c.write, dst.elem, env)
        return None if s is None else RefT(s)
    if isinstance(c, QuoteC) and isinstance(dst, QuoteT):
        cc = source(c.code, dst.code, env)
        ce = source(c.ec, dst.cls, env)
        return None if cc is None or ce is None else QuoteT(cc, ce)
    if isinstance(c, ForallC) and isinstance(dst, Forall):
        b = source(c.body, subst_classifier(dst.body, dst.var, Named(c.var)), env)
        return None if b is None else Forall(c.var, b)
    if isinstance(c, ConstrC) and isinstance(dst, Constrained):
        b = source(c.body, dst.body, env)
        return None if b is None else Constrained(c.lo, c.hi, b)
    return None


def check(c: Any, src: Any, dst: Any, env: SubtypeEnv = EMPTY_ENV) -> None:
    """Raise CoercionTypeError unless ``c : src => dst`` under ``env``.

    ``None`` on either side is a wildcard, used around failures.
    """
    if isinstance(c, Fail):
        return
    if isinstance(c, Id):
        _need(_teq(src, dst), f"id between {src} and {dst}")
        return
    if isinstance(c, Inj):
        _need(_teq(src, c.ground) and _teq(dst, STAR), f"{c} at {src} => {dst}")
        if not is_ec_ground(c.ground):
            _need(is_ground(c.ground), f"injection from non-ground {c.ground}")
        return
    if isinstance(c, Proj):
        _need(_teq(src, STAR) and _teq(dst, c.ground), f"{c} at {src} => {dst}")
        if not is_ec_ground(c.ground):
            _need(is_ground(c.ground), f"projection to non-ground {c.ground}")
        return
    if isinstance(c, Sub):
        _need(_teq(src, c.lo) and _teq(dst, c.hi), f"{c} at {src} => {dst}")
        _need(env.ec_subtype(c.lo, c.hi), f"{c.lo} is not below {c.hi}")
        return
    if isinstance(c, Seq):
        items = c.items
        n = len(items)
        fwd = [src] + [None] * n
        for i, x in enumerate(items):
            fwd[i + 1] = target(x, fwd[i], env)
        bwd = [None] * n + [dst]
        for i in range(n - 1, -1, -1):
            bwd[i] = source(items[i], bwd[i + 1], env)
        for i in range(1, n):
            if fwd[i] is not None and bwd[i] is not None:
                _need(alpha_eq(fwd[i], bwd[i]), f"sequence mismatch {fwd[i]} vs {bwd[i]}")
        for i, x in enumerate(items):
            left = fwd[i] if fwd[i] is not None else bwd[i]
            right = bwd[i + 1] if bwd[i + 1] is not None else fwd[i + 1]
            if i == 0:
                left = src
            if i == n - 1:
                right = dst
            check(x, left, right, env)
        return
    if src is None or dst is None:
        return
    if isinstance(c, Arr):
        _need(isinstance(src, Arrow) and isinstance(dst, Arrow), f"arrow coercion at {src} => {dst}")
        check(c.dom, dst.dom, src.dom, env)
        check(c.cod, src.cod, dst.cod, env)
        return
    if isinstance(c, RefC):
        _need(isinstance(src, RefT) and isinstance(dst, RefT), f"ref coercion at {src} => {dst}")
        check(c.write, dst.elem, src.elem, env)
        check(c.read, src.elem, dst.elem, env)
        return
    if isinstance(c, QuoteC):
        _need(isinstance(src, QuoteT) and isinstance(dst, QuoteT), f"quote coercion at {src} => {dst}")
        check(c.code, src.code, dst.code, env)
        check(c.ec, src.cls, dst.cls, env)
        return
    if isinstance(c, ForallC):
        _need(isinstance(src, Forall) and isinstance(dst, Forall), f"forall coercion at {src} => {dst}")
        avoid = free_classifiers(c) | free_classifiers(src) | free_classifiers(dst) | env.names()
        v = c.var if c.var not in (free_classifiers(src) | free_classifiers(dst) | env.names()) \
            else _fresh_name(c.var, avoid)
        body = c.body if v == c.var else subst_classifier(c.body, c.var, Named(v))
        check(body, subst_classifier(src.body, src.var, Named(v)),
              subst_classifier(dst.body, dst.var, Named(v)), env)
        return
    if isinstance(c, ConstrC):
        _need(isinstance(src, Constrained) and isinstance(dst, Constrained)
              and src.lo == c.lo and src.hi == c.hi and dst.lo == c.lo and dst.hi == c.hi,
              f"constraint coercion at {src} => {dst}")
        check(c.body, src.body, dst.body, env.extend(c.lo, c.hi))
        return
    raise CoercionTypeError(f"unknown coercion {c!r}")


def well_typed(c: Any, src: Any, dst: Any, env: SubtypeEnv = EMPTY_ENV) -> bool:
    try:
        check(c, src, dst, env)
        return True
    except CoercionTypeError:
        return False


def consistent(env: SubtypeEnv, a: Any, b: Any) -> bool:
    """Consistent subtyping dispatched on the kind of its arguments."""
    def is_cls(x: Any) -> bool:
        return isinstance(x, Classifier) and not isinstance(x, Type)

    if is_cls(a) or is_cls(b):
        return consistent_classifier(env, a, b)
    return consistent_subtype(env, a, b)


def reduce_ec(env: SubtypeEnv, c: Any) -> Any:
    """Normal form of an environment-classifier coercion."""
    return normalize(c, env)


def reduce_code(c: Any) -> Any:
    """Normal form of a code coercion."""
    return normalize(c, EMPTY_ENV, code=True)


def reduce_meta(env: SubtypeEnv, c: Any) -> Any:
    """Normal form of a meta coercion."""
    return normalize(c, env)


coerce_meta = coerce


__all__ = [
    "Arr", "Coercion", "CoercionError", "CoercionTypeError", "ConstrC", "Fail", "ForallC", "ID",
    "Id", "Inj", "Proj", "QuoteC", "RefC", "Seq", "Sub", "check", "coerce", "coerce_code",
    "coerce_ec", "coerce_meta", "consistent_code", "ground_of", "is_ground", "normalize",
    "reduce_code", "reduce_ec", "reduce_meta", "seq", "source", "split_last", "target", "well_typed",
]

"""Classifier subtyping, static meta subtyping and consistent subtyping."""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .syntax import (
    Arrow,
    Base,
    Classifier,
    Constrained,
    Eps,
    Forall,
    Named,
    QuoteT,
    RefT,
    Star,
    Type,
    _fresh_name,
    free_classifiers,
    subst_classifier,
)


class SubtypeEnv:
    """An immutable set of edges ``lo <: hi`` with memoized reachability."""

    __slots__ = ("edges", "_up", "_cache")

    def __init__(self, edges: Iterable[tuple[Classifier, Classifier]] = ()):
        seen: dict[tuple, None] = {}
        for e in edges:
            seen.setdefault(tuple(e), None)
        self.edges: tuple[tuple[Classifier, Classifier], ...] = tuple(seen)
        self._up: dict | None = None
        self._cache: dict = {}

    def extend(self, lo: Classifier, hi: Classifier) -> "SubtypeEnv":
        if (lo, hi) in self.edges:
            return self
        return SubtypeEnv(self.edges + ((lo, hi),))

    def _adjacency(self) -> dict:
        if self._up is None:
            up: dict = {}
            for lo, hi in self.edges:
                up.setdefault(lo, []).append(hi)
            self._up = up
        return self._up

    def parents(self, c: Classifier) -> list[Classifier]:
        return [lo for lo, hi in self.edges if hi == c]

    def ec_subtype(self, lo: Classifier, hi: Classifier) -> bool:
        if lo == hi or isinstance(lo, Eps):
            return True
        if isinstance(lo, Star) or isinstance(hi, Star):
            return False
        key = (lo, hi)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        up = self._adjacency()
        seen = {lo}
        todo = deque([lo])
        found = False
        while todo:
            cur = todo.popleft()
            if cur == hi or isinstance(cur, Eps):
                found = True
                break
            for nxt in up.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        self._cache[key] = found
        return found

    def names(self) -> set[str]:
        out = set()
        for lo, hi in self.edges:
            for c in (lo, hi):
                if isinstance(c, Named):
                    out.add(c.name)
        return out

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{a}<:{b}" for a, b in self.edges) + "}"


EMPTY_ENV = SubtypeEnv()


def ec_subtype(env: SubtypeEnv, lo: Classifier, hi: Classifier) -> bool:
    return env.ec_subtype(lo, hi)


def _open_binders(env: SubtypeEnv, a: Forall, b: Forall) -> tuple[Type, Type]:
    """Rename both bodies to one binder name that captures nothing."""
    avoid = env.names() | free_classifiers(a) | free_classifiers(b)
    name = a.var if a.var not in avoid else _fresh_name(a.var, avoid)
    return (subst_classifier(a.body, a.var, Named(name)),
            subst_classifier(b.body, b.var, Named(name)))


def code_equal(a: Type, b: Type) -> bool:
    return a == b


def meta_subtype(env: SubtypeEnv, a: Type, b: Type) -> bool:
    """Static subtyping between meta types without the unknown type."""
    if isinstance(a, Base) and isinstance(b, Base):
        return a.name == b.name
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return meta_subtype(env, b.dom, a.dom) and meta_subtype(env, a.cod, b.cod)
    if isinstance(a, RefT) and isinstance(b, RefT):
        return meta_subtype(env, a.elem, b.elem) and meta_subtype(env, b.elem, a.elem)
    if isinstance(a, QuoteT) and isinstance(b, QuoteT):
        if isinstance(a.cls, Star) or isinstance(b.cls, Star):
            return False
        return code_equal(a.code, b.code) and env.ec_subtype(a.cls, b.cls)
    if isinstance(a, Forall) and isinstance(b, Forall):
        x, y = _open_binders(env, a, b)
        return meta_subtype(env, x, y)
    if isinstance(a, Constrained) and isinstance(b, Constrained):
        if a.lo != b.lo or a.hi != b.hi:
            return False
        return meta_subtype(env.extend(a.lo, a.hi), a.body, b.body)
    return False


def consistent_classifier(env: SubtypeEnv, a: Classifier, b: Classifier) -> bool:
    if isinstance(a, Star) or isinstance(b, Star):
        return True
    return env.ec_subtype(a, b)


def consistent_code(a: Type, b: Type) -> bool:
    """Gradual code-type consistency; no classifiers occur in code types."""
    if isinstance(a, Star) or isinstance(b, Star):
        return True
    if isinstance(a, Base) and isinstance(b, Base):
        return a.name == b.name
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return consistent_code(b.dom, a.dom) and consistent_code(a.cod, b.cod)
    return False


def consistent_subtype(env: SubtypeEnv, a: Type, b: Type) -> bool:
    """Consistent subtyping between gradual meta types."""
    if isinstance(a, Star) or isinstance(b, Star):
        return True
    if isinstance(a, Base) and isinstance(b, Base):
        return a.name == b.name
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return consistent_subtype(env, b.dom, a.dom) and consistent_subtype(env, a.cod, b.cod)
    if isinstance(a, RefT) and isinstance(b, RefT):
        return (consistent_subtype(env, a.elem, b.elem)
                and consistent_subtype(env, b.elem, a.elem))
    if isinstance(a, QuoteT) and isinstance(b, QuoteT):
        return consistent_code(a.code, b.code) and consistent_classifier(env, a.cls, b.cls)
    if isinstance(a, Forall) and isinstance(b, Forall):
        x, y = _open_binders(env, a, b)
        return consistent_subtype(env, x, y)
    if isinstance(a, Constrained) and isinstance(b, Constrained):
        if a.lo != b.lo or a.hi != b.hi:
            return False
        return consistent_subtype(env.extend(a.lo, a.hi), a.body, b.body)
    return False

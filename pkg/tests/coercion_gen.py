"""Coercion generators shared by the property and acceptance tests.

Random generation is type-directed: draw a chain of types related by
consistent subtyping and sequence the coercions between neighbours, so every
generated coercion is well-typed by construction.  Enumeration builds every
well-typed coercion over a small type universe bottom-up by size.
"""

from __future__ import annotations

import random
from collections import defaultdict
from itertools import product

from gmeta.coercions import (
    Arr,
    ConstrC,
    Fail,
    ForallC,
    ID,
    Inj,
    Proj,
    QuoteC,
    RefC,
    Seq,
    Sub,
    coerce,
    coerce_code,
    coerce_ec,
    seq,
)
from gmeta.subtyping import SubtypeEnv, consistent_classifier, consistent_code, consistent_subtype
from gmeta.syntax import (
    BOOL,
    EPS,
    INT,
    STAR,
    Arrow,
    Constrained,
    Forall,
    Label,
    Named,
    QuoteT,
    RefT,
    Star,
)

A, B = Named("a"), Named("b")
ENV = SubtypeEnv().extend(EPS, A).extend(A, B)
CLASSIFIERS = (EPS, A, B)
META, EC, CODE = "meta", "ec", "code"


# ---------------------------------------------------------------------------
# random types and related pairs


def rand_cls(r: random.Random, pool=CLASSIFIERS, gradual: bool = True):
    if gradual and r.random() < 0.25:
        return STAR
    return r.choice(pool)


def rand_code(r: random.Random, depth: int = 2, gradual: bool = True):
    k = r.random()
    if gradual and k < 0.2:
        return STAR
    if depth <= 0 or k < 0.6:
        return r.choice((INT, BOOL))
    return Arrow(rand_code(r, depth - 1, gradual), rand_code(r, depth - 1, gradual))


def rand_meta(r: random.Random, depth: int = 3, gradual: bool = True, pool=CLASSIFIERS):
    k = r.random()
    if gradual and k < 0.15:
        return STAR
    if depth <= 0 or k < 0.3:
        return r.choice((INT, BOOL))
    d = depth - 1
    k = r.random()
    if k < 0.3:
        return Arrow(rand_meta(r, d, gradual, pool), rand_meta(r, d, gradual, pool))
    if k < 0.45:
        return RefT(rand_meta(r, d, gradual, pool))
    if k < 0.75:
        return QuoteT(rand_code(r, 2, gradual), rand_cls(r, pool, gradual))
    if k < 0.88:
        return Forall("c", rand_meta(r, d, gradual, pool + (Named("c"),)))
    return Constrained(EPS, A, rand_meta(r, d, gradual, pool))


def _up(r: random.Random, e, polarity: int):
    """A classifier above (polarity 1), below (-1) or consistent with (0) ``e``."""
    if r.random() < 0.3:
        return STAR
    if isinstance(e, Star):
        return r.choice(CLASSIFIERS)
    if polarity == 0 or e not in CLASSIFIERS:
        return e
    i = CLASSIFIERS.index(e)
    return r.choice(CLASSIFIERS[i:] if polarity > 0 else CLASSIFIERS[:i + 1])


def relate_code(r: random.Random, t):
    """A code type consistent with ``t``."""
    if r.random() < 0.2:
        return STAR
    if isinstance(t, Star):
        return rand_code(r, 1)
    if isinstance(t, Arrow):
        return Arrow(relate_code(r, t.dom), relate_code(r, t.cod))
    return t


def relate_meta(r: random.Random, t, polarity: int = 1, pool=CLASSIFIERS):
    """A type related to ``t``: above it (1), below it (-1) or consistent (0)."""
    if r.random() < 0.15:
        return STAR
    if isinstance(t, Star):
        return rand_meta(r, 2, pool=pool)
    if isinstance(t, Arrow):
        return Arrow(relate_meta(r, t.dom, -polarity, pool), relate_meta(r, t.cod, polarity, pool))
    if isinstance(t, RefT):
        return RefT(relate_meta(r, t.elem, 0, pool))
    if isinstance(t, QuoteT):
        return QuoteT(relate_code(r, t.code), _up(r, t.cls, polarity))
    if isinstance(t, Forall):
        return Forall(t.var, relate_meta(r, t.body, polarity, pool + (Named(t.var),)))
    if isinstance(t, Constrained):
        return Constrained(t.lo, t.hi, relate_meta(r, t.body, polarity, pool))
    return t


def _related(kind: str, a, b) -> bool:
    if kind == EC:
        return consistent_classifier(ENV, a, b)
    if kind == CODE:
        return consistent_code(a, b)
    return consistent_subtype(ENV, a, b)


def rand_start(r: random.Random, kind: str):
    if kind == EC:
        return rand_cls(r)
    if kind == CODE:
        return rand_code(r)
    return rand_meta(r)


def rand_next(r: random.Random, kind: str, t):
    """A type ``u`` with ``t`` consistently below ``u``."""
    for _ in range(50):
        if kind == EC:
            u = _up(r, t, 1)
        elif kind == CODE:
            u = relate_code(r, t)
        else:
            u = relate_meta(r, t)
        if _related(kind, t, u):
            return u
    return STAR


_labels = iter(range(1, 10**9))


def fresh_label() -> Label:
    return Label(next(_labels))


def coercion_between(kind: str, a, b, label: Label | None = None):
    label = fresh_label() if label is None else label
    if kind == EC:
        return coerce_ec(a, b, label)
    if kind == CODE:
        return coerce_code(a, b, label)
    return coerce(a, b, label)


def rand_chain(r: random.Random, kind: str, start, hops: int):
    """A sequence of coercions along ``hops`` related types; returns (c, dst)."""
    cs, t = [], start
    for _ in range(hops):
        u = rand_next(r, kind, t)
        cs.append(coercion_between(kind, t, u))
        t = u
    return seq(*cs), t


def rand_pair(r: random.Random, kind: str):
    """Two composable coercions ``c1 : s => m`` and ``c2 : m => d``."""
    s = rand_start(r, kind)
    c1, m = rand_chain(r, kind, s, r.randint(1, 3))
    c2, d = rand_chain(r, kind, m, r.randint(1, 3))
    return (c1, s, m), (c2, m, d)


# ---------------------------------------------------------------------------
# exhaustive enumeration over a small universe

LABEL = Label(1)

UC = (INT, BOOL, STAR, Arrow(STAR, STAR), Arrow(INT, INT))
UE = (EPS, A, STAR)
UM = (
    INT, BOOL, STAR, Arrow(STAR, STAR), Arrow(INT, INT), Arrow(BOOL, INT), RefT(STAR),
    RefT(INT), QuoteT(STAR, STAR), QuoteT(INT, EPS), QuoteT(INT, A), QuoteT(INT, STAR),
    Forall("c", STAR), Forall("c", INT), Constrained(EPS, A, STAR), Constrained(EPS, A, INT),
)
GROUNDS = {
    META: (INT, BOOL, Arrow(STAR, STAR), RefT(STAR), QuoteT(STAR, STAR), Forall("c", STAR),
           Constrained(EPS, A, STAR)),
    CODE: (INT, BOOL, Arrow(STAR, STAR)),
    EC: (EPS, A),
}
UNIVERSE = {META: UM, CODE: UC, EC: UE}


class Enumeration:
    """All well-typed coercions of each kind by exact size, keyed by (src, dst).

    Size counts nodes: atoms are 1, a structural coercion is 1 plus its
    children, and a sequence is the sum of its items.
    """

    def __init__(self, max_size: int):
        self.max_size = max_size
        self.table = {k: defaultdict(lambda: defaultdict(list)) for k in (META, CODE, EC)}
        for n in range(1, max_size + 1):
            for kind in (EC, CODE, META):
                self._fill(kind, n)

    def at(self, kind: str, n: int):
        return self.table[kind][n]

    def _add(self, kind: str, n: int, src, dst, c) -> None:
        u = UNIVERSE[kind]
        if src in u and dst in u:
            self.table[kind][n][(src, dst)].append(c)

    def _fill(self, kind: str, n: int) -> None:
        u = UNIVERSE[kind]
        if n == 1:
            for t in u:
                self._add(kind, 1, t, t, ID)
                for d in u:
                    self._add(kind, 1, t, d, Fail(LABEL))
            for g in GROUNDS[kind]:
                self._add(kind, 1, g, STAR, Inj(g))
                self._add(kind, 1, STAR, g, Proj(g, LABEL))
            if kind == EC:
                for lo, hi in product((EPS, A), repeat=2):
                    if ENV.ec_subtype(lo, hi):
                        self._add(kind, 1, lo, hi, Sub(lo, hi))
        self._structural(kind, n)
        self._sequences(kind, n)

    def _splits(self, k1: str, k2: str, total: int):
        for i in range(1, total):
            for (s1, d1), cs1 in list(self.at(k1, i).items()):
                for (s2, d2), cs2 in list(self.at(k2, total - i).items()):
                    for c1, c2 in product(cs1, cs2):
                        yield s1, d1, s2, d2, c1, c2

    def _structural(self, kind: str, n: int) -> None:
        if n < 2:
            return
        if kind in (META, CODE):
            for s1, d1, s2, d2, c1, c2 in self._splits(kind, kind, n - 1):
                # c1 : d1' <= s1' contravariant, so the arrow runs from d1 -> s2
                self._add(kind, n, Arrow(d1, s2), Arrow(s1, d2), Arr(c1, c2))
        if kind != META:
            return
        for s1, d1, s2, d2, c1, c2 in self._splits(META, META, n - 1):
            if s1 == d2 and d1 == s2:
                self._add(META, n, RefT(d1), RefT(d2), RefC(c1, c2))
        for s1, d1, s2, d2, c1, c2 in self._splits(CODE, EC, n - 1):
            self._add(META, n, QuoteT(s1, s2), QuoteT(d1, d2), QuoteC(c1, c2))
        for (s, d), cs in list(self.at(META, n - 1).items()):
            for c in cs:
                if isinstance(s, (Forall, Constrained)) or isinstance(d, (Forall, Constrained)):
                    continue
                self._add(META, n, Forall("c", s), Forall("c", d), ForallC("c", c))
                self._add(META, n, Constrained(EPS, A, s), Constrained(EPS, A, d),
                          ConstrC(EPS, A, c))

    def _sequences(self, kind: str, n: int) -> None:
        for i in range(1, n):
            left = self.at(kind, i)
            right = self.at(kind, n - i)
            by_src = defaultdict(list)
            for (s, d), cs in list(right.items()):
                by_src[s].append((d, cs))
            for (s, m), cs1 in list(left.items()):
                for d, cs2 in by_src.get(m, ()):
                    for c1 in cs1:
                        if isinstance(c1, (Seq, Fail)):
                            # flat sequences are built once, head first; a
                            # failure absorbs whatever follows it
                            continue
                        for c2 in cs2:
                            if c2 is ID or c1 is ID:
                                continue  # identities in sequences add nothing
                            items = (c1,) + (c2.items if isinstance(c2, Seq) else (c2,))
                            self._add(kind, n, s, d, Seq(items))

    def static_meta(self):
        """Every enumerated meta coercion between fully static types."""
        from gmeta.syntax import has_star

        for n in range(1, self.max_size + 1):
            for (s, d), cs in self.at(META, n).items():
                if not has_star(s) and not has_star(d):
                    for c in cs:
                        yield c, s, d


def erase_labels(x):
    """``x`` with every blame label replaced by one fixed label."""
    from dataclasses import fields, is_dataclass, replace

    if isinstance(x, Label):
        return LABEL
    if isinstance(x, tuple):
        return tuple(erase_labels(y) for y in x)
    if is_dataclass(x) and not isinstance(x, type):
        return replace(x, **{f.name: erase_labels(getattr(x, f.name)) for f in fields(x)
                             if f.init})
    return x

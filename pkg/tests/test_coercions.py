import random
from functools import lru_cache

from hypothesis import given, strategies as st

from coercion_gen import (
    A,
    B,
    CODE,
    EC,
    ENV,
    META,
    erase_labels,
    rand_chain,
    rand_meta,
    rand_pair,
    rand_start,
)
from gmeta.coercions import (
    ID,
    Arr,
    Fail,
    Inj,
    Proj,
    QuoteC,
    RefC,
    Seq,
    Sub,
    _pair,
    coerce,
    coerce_code,
    coerce_ec,
    coerce_meta,
    normalize,
    reduce_code,
    reduce_ec,
    reduce_meta,
    seq,
    split_last,
    well_typed,
)
from gmeta.syntax import BOOL, EPS, INT, STAR, Arrow, Label, QuoteT, RefT, has_star

L = Label(3)
L2 = Label(4)
STAR_ARROW = Arrow(STAR, STAR)


# ---------------------------------------------------------------------------
# reduction examples


def test_ec_injection_projection_collapses_to_sub():
    assert reduce_ec(ENV, seq(Inj(EPS), Proj(A, L))) == Sub(EPS, A)


def test_ec_injection_projection_fails_when_not_below():
    assert reduce_ec(ENV, seq(Inj(B), Proj(A, L))) == Fail(L)


def test_ec_reflexive_sub_is_identity():
    assert reduce_ec(ENV, seq(Inj(A), Proj(A, L))) == ID


def test_identity_is_left_unit():
    c = seq(Inj(INT), Proj(INT, L))
    assert reduce_meta(ENV, Seq((ID, Inj(INT)))) == Inj(INT)
    assert reduce_meta(ENV, c) == ID


def test_code_ground_mismatch_fails():
    assert reduce_code(seq(Inj(INT), Proj(STAR_ARROW, L))) == Fail(L)


def test_code_identity_arrow_collapses():
    assert reduce_code(Arr(ID, ID)) == ID


def test_meta_arrow_distribution():
    c1, c2 = Inj(INT), Proj(INT, L)
    d1, d2 = Proj(INT, L2), Inj(INT)
    got = reduce_meta(ENV, Seq((Arr(c1, c2), Arr(d1, d2))))
    assert got == normalize(Arr(seq(d1, c1), seq(c2, d2)), ENV)
    assert got == Arr(seq(Proj(INT, L2), Inj(INT)), seq(Proj(INT, L), Inj(INT)))


def test_quote_with_failing_code_part_fails():
    inner = seq(Inj(INT), Proj(STAR_ARROW, L))
    assert reduce_meta(ENV, QuoteC(inner, ID)) == Fail(L)


def test_quote_with_failing_classifier_part_fails():
    assert reduce_meta(ENV, QuoteC(ID, seq(Inj(B), Proj(EPS, L)))) == Fail(L)


def test_code_arrow_fails_eagerly():
    bad = seq(Inj(INT), Proj(BOOL, L))
    assert reduce_code(Arr(ID, bad)) == Fail(L)
    # meta arrows stay lazy
    assert reduce_meta(ENV, Arr(ID, bad)) == Arr(ID, Fail(L))


# ---------------------------------------------------------------------------
# generation


def test_coerce_ec_examples():
    assert coerce_ec(A, STAR, L) == Inj(A)
    assert coerce_ec(STAR, A, L) == Proj(A, L)
    assert coerce_ec(EPS, A, L) == Sub(EPS, A)


def test_coerce_code_examples():
    assert coerce_code(INT, INT, L) == ID
    assert coerce_code(STAR, Arrow(INT, INT), L) == seq(Proj(STAR_ARROW, L),
                                                        Arr(Inj(INT), Proj(INT, L)))


def test_coerce_ref_is_invariant_pair():
    a, b = QuoteT(INT, EPS), QuoteT(INT, STAR)
    assert coerce_meta(RefT(a), RefT(b), L) == RefC(coerce(b, a, L), coerce(a, b, L))


def test_coerce_through_ground():
    t = Arrow(INT, INT)
    assert coerce(t, STAR, L) == seq(coerce(t, STAR_ARROW, L), Inj(STAR_ARROW))


@given(st.randoms(use_true_random=False))
def test_coerce_reflexive_static_is_identity(r):
    t = rand_meta(r, gradual=False)
    assert reduce_meta(ENV, coerce(t, t, L)) == ID


@given(st.randoms(use_true_random=False), st.sampled_from((META, CODE, EC)))
def test_generated_coercions_are_well_typed(r, kind):
    s = rand_start(r, kind)
    c, d = rand_chain(r, kind, s, r.randint(1, 4))
    assert well_typed(c, s, d, ENV)


# ---------------------------------------------------------------------------
# normalization properties


@given(st.randoms(use_true_random=False), st.sampled_from((META, CODE, EC)))
def test_normalize_is_idempotent(r, kind):
    (c1, _, _), (c2, _, _) = rand_pair(r, kind)
    n = normalize(seq(c1, c2), ENV, code=kind == CODE)
    assert normalize(n, ENV, code=kind == CODE) == n


@given(st.randoms(use_true_random=False))
def test_normalize_preserves_meta_typing(r):
    (c1, s, _), (c2, _, d) = rand_pair(r, META)
    assert well_typed(normalize(seq(c1, c2), ENV), s, d, ENV)


@given(st.randoms(use_true_random=False), st.sampled_from((META, CODE, EC)))
def test_association_does_not_matter_up_to_labels(r, kind):
    (a, _, _), (b, _, _) = rand_pair(r, kind)
    code = kind == CODE
    flat = normalize(seq(a, b), ENV, code)
    nested = normalize(Seq((a, b)), ENV, code)
    assert erase_labels(flat) == erase_labels(nested)


def _normal_forms(items: tuple, code: bool) -> set:
    """Every normal form reachable by firing top-level redexes in any order."""

    @lru_cache(maxsize=None)
    def go(xs: tuple) -> frozenset:
        out = set()
        for i in range(len(xs) - 1):
            r = _pair(xs[i], xs[i + 1], ENV, code)
            if r is not None:
                out |= go(xs[:i] + tuple(r) + xs[i + 2:])
        return frozenset(out) if out else frozenset([seq(*xs)])

    return set(go(items))


@given(st.randoms(use_true_random=False), st.sampled_from((META, CODE, EC)))
def test_every_reduction_order_agrees_up_to_labels(r, kind):
    (a, _, _), (b, _, _) = rand_pair(r, kind)
    code = kind == CODE
    items = tuple(x for c in (a, b) for x in (c.items if isinstance(c, Seq) else (c,))
                  if x != ID)
    items = tuple(normalize(x, ENV, code) for x in items)
    forms = {erase_labels(f) for f in _normal_forms(items, code)}
    assert len(forms) == 1


# ---------------------------------------------------------------------------
# split-last


def test_split_last_examples():
    a, b, c = Inj(INT), Proj(INT, L), Inj(BOOL)
    assert split_last(seq(a, seq(b, c))) == (seq(a, b), c)
    assert split_last(a) == (ID, a)


@given(st.randoms(use_true_random=False))
def test_split_last_resequences_to_same_normal_form(r):
    (c, _, _), _ = rand_pair(r, META)
    init, last = split_last(c)
    assert reduce_meta(ENV, seq(init, last)) == reduce_meta(ENV, c)


# ---------------------------------------------------------------------------
# static endpoints


def _identity_like(c) -> bool:
    if c == ID or isinstance(c, Sub):
        return True
    if isinstance(c, Arr):
        return _identity_like(c.dom) and _identity_like(c.cod)
    if isinstance(c, RefC):
        return _identity_like(c.write) and _identity_like(c.read)
    if isinstance(c, QuoteC):
        return _identity_like(c.code) and _identity_like(c.ec)
    if hasattr(c, "body"):
        return _identity_like(c.body)
    return False


def _contains_fail(c) -> bool:
    if isinstance(c, Fail):
        return True
    if isinstance(c, Seq):
        return any(_contains_fail(x) for x in c.items)
    return any(_contains_fail(getattr(c, f)) for f in ("dom", "cod", "write", "read", "code",
                                                       "ec", "body") if hasattr(c, f))


def test_static_code_coercions_are_id_or_fail(enumeration6):
    for n in range(1, 7):
        for (s, d), cs in enumeration6.at(CODE, n).items():
            if has_star(s) or has_star(d):
                continue
            for c in cs:
                assert reduce_code(c) == ID or isinstance(reduce_code(c), Fail)


def test_static_meta_coercions_act_like_identity_or_fail(enumeration6):
    for c, s, d in enumeration6.static_meta():
        n = reduce_meta(ENV, c)
        assert _identity_like(n) or _contains_fail(n), (c, n)

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CORPUS
from gmeta.fuzz import random_program
from gmeta.parser import ParseError, parse_program, parse_type
from gmeta.printer import render_term, render_type
from gmeta.syntax import (
    EPS,
    INT,
    STAR,
    Arrow,
    CElim,
    Deref,
    Named,
    Quote,
    QuoteT,
    RefT,
    Splice,
    strip_labels,
)

CORPUS_FILES = sorted(CORPUS.glob("*.gm"))


def roundtrip(src: str) -> None:
    ast = parse_program(src, "<a>")
    again = parse_program(render_term(ast), "<b>")
    assert strip_labels(again) == strip_labels(ast)


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_roundtrip(path):
    roundtrip(path.read_text())


@given(st.integers(0, 10**6))
def test_fuzzed_programs_roundtrip(seed):
    roundtrip(random_program(random.Random(seed), 4))


def test_types_parse():
    assert parse_type("Int -> Int -> Int") == Arrow(INT, Arrow(INT, INT))
    assert parse_type("Ref Code<Int>@?") == RefT(QuoteT(INT, STAR))
    assert parse_type("Code<Int>@eps") == QuoteT(INT, EPS)
    t = parse_type("forall a. [eps <: a] => Code<Int>@a")
    assert render_type(t) == "forall a. [eps <: a] => Code<Int>@a"


def test_quote_and_splice():
    m = parse_program("`a{ ~(c) }")
    assert isinstance(m, Quote) and m.cls == Named("a")
    assert isinstance(m.body, Splice)


def test_prefix_deref_and_postfix_elim():
    assert isinstance(parse_program("!r"), Deref)
    assert isinstance(parse_program("f !"), CElim)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_program("let x : Int = in x", "bad.gm")
    assert err.value.span is not None
    assert (err.value.span.line, err.value.span.col) == (1, 15)

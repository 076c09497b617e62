import random

import pytest

from helpers import load, observe, run_corpus, run_source
from gmeta.cctype import cc_typecheck
from gmeta.corpus_gen import tail_casts
from gmeta.deep import run_deep
from gmeta.fuzz import random_program
from gmeta.gradual import elaborate_program
from gmeta.machine import (
    NONCAST,
    StepLimitExceeded,
    canonical_value,
    closed_code_check,
    eval_program,
    make_machine,
    run_cc,
    step_code,
)
from gmeta.printer import render_value
from gmeta.se_machine import SpaceEfficientMachine, se_step
from gmeta.coercions import coerce
from gmeta.syntax import INT, STAR, Arrow, Blame, Cast, Label, Named, QuoteT, alpha_eq

from conftest import CORPUS

MODES = ("naive", "space-efficient")
RUNNABLE = sorted(p.stem for p in CORPUS.glob("*.gm") if p.stem != "extrusion_static")

EXPECTED = {
    "constraint_dyn": "value",
    "dyn_arith": "value",
    "dyn_bad_arg": "blame",
    "escape_via_function": "blame",
    "extrusion_gradual": "blame",
    "lambda_splice": "value",
    "nested_subtyping": "value",
    "poly_dyn": "value",
    "quote_add": "value",
    "wrap_body": "value",
}


def value_text(outcome) -> str:
    return render_value(canonical_value(outcome.term))


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("name", RUNNABLE)
def test_corpus_outcome(name, mode):
    assert run_corpus(name, mode).status == EXPECTED[name]


@pytest.mark.parametrize("name", RUNNABLE)
def test_machines_agree_on_corpus(name):
    assert observe(run_corpus(name, "naive")) == observe(run_corpus(name, "space-efficient"))


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("name", RUNNABLE)
def test_corpus_preserves_types_at_every_step(name, mode):
    run_corpus(name, mode, check_steps=True)


def test_golden_values():
    assert value_text(run_corpus("quote_add")) == "code{ 4 + 3 }@eps"
    assert value_text(run_corpus("lambda_splice")) == "code{ clam (x : Int) . x }@eps"
    assert value_text(run_corpus("wrap_body")) == \
        "code{ clam (u : Int) . clam (x : Int) . u + x }@eps"
    assert value_text(run_corpus("dyn_arith")) == "42"


def test_extrusion_blames_at_the_reference_cast_and_raises_at_the_write():
    out = run_corpus("extrusion_gradual")
    assert out.label.span.line == 2
    assert (out.raised_at.span.line, out.raised_at.span.col) == (3, 30)


def test_constants_evaluate_to_themselves():
    assert value_text(run_source("7\n")) == "7"


def test_eval_program_checks_closed_code():
    out = eval_program(load("nested_subtyping"))
    assert out.status == "value"
    assert closed_code_check(out) == Arrow(INT, Arrow(INT, INT))


def test_eval_program_on_surface_term():
    assert value_text(eval_program(load("quote_add"))) == "code{ 4 + 3 }@eps"


def test_step_limit_raises():
    with pytest.raises(StepLimitExceeded):
        run_source(tail_casts(20), step_limit=5)


@pytest.mark.parametrize("name", RUNNABLE)
def test_elaborated_corpus_typechecks(name):
    term, ty = elaborate_program(load(name))
    assert alpha_eq(cc_typecheck(term), ty)


@pytest.mark.parametrize("src", [INT, Arrow(INT, INT), QuoteT(INT, STAR)])
def test_blame_has_any_type(src):
    cast = Cast(Blame(Label(1)), coerce(src, STAR, Label(2)), src, STAR)
    assert cc_typecheck(cast) == STAR


def _rules(name: str, mode: str = "naive") -> list[str]:
    seen: list[str] = []
    term, ty = elaborate_program(load(name))
    m = make_machine(term, ty, mode, trace=lambda mach: seen.append(mach.rule))
    run_deep(m.run)
    return seen


def test_code_lambda_generates_a_classifier_and_splices_cancel():
    rules = _rules("lambda_splice")
    assert "clam-generate" in rules
    assert "splice-cancel" in rules


def test_generated_classifiers_get_one_parent_each():
    term, ty = elaborate_program(load("nested_subtyping"))
    m = make_machine(term, ty)
    run_deep(m.run)
    g = m.g
    assert len(g.delta) == 2
    for a in g.delta:
        assert len([p for p in g.theta.edges if p[1] == a]) == 1


def test_step_code_generates_fresh_classifier():
    from gmeta.parser import parse_program

    term, ty = elaborate_program(parse_program("`eps{ clam (x : Int) @ a . x }"))
    m = make_machine(term, ty)
    body = step_code(m, term.body, term.cls)
    assert len(m.g.delta) == 1
    assert body.cls in m.g.delta and body.cls != Named("a")


def test_se_step_composes_adjacent_casts():
    term, ty = elaborate_program(load("dyn_arith"))
    m = SpaceEfficientMachine(term, ty)
    while not m.done():
        se_step(NONCAST, m)
    assert m.max_adjacent_casts <= 2
    assert value_text(m.run()) == "42"


def test_tail_casts_space_efficiency():
    src = tail_casts(200)
    naive = run_source(src, "naive")
    se = run_source(src, "space-efficient")
    assert observe(naive) == observe(se) == ("value", None, "0<Int!>")
    assert se.max_adjacent_casts <= 2
    assert naive.max_adjacent_casts > 100


def _elaboration_height(term) -> int:
    from gmeta.hyper import height, to_hyper
    from gmeta.syntax import Node

    best = 0

    def walk(n):
        nonlocal best
        if isinstance(n, Cast):
            best = max(best, height(to_hyper(n.coercion, n.src, n.dst)))
        for f in getattr(n, "__dataclass_fields__", {}):
            v = getattr(n, f)
            if isinstance(v, Node):
                walk(v)

    walk(term)
    return best


@pytest.mark.parametrize("name", RUNNABLE)
def test_se_heights_do_not_exceed_elaboration(name):
    term, ty = elaborate_program(load(name))
    out = run_deep(lambda: run_cc(term, ty, "space-efficient"))
    # the recorded maximum includes load time, so equality means no growth
    assert out.max_hyper_height == _elaboration_height(term)


@pytest.mark.parametrize("seed", range(40))
def test_fuzzed_programs_agree_and_stay_closed(seed):
    from gmeta.parser import parse_program

    src = random_program(random.Random(seed))
    term, ty = elaborate_program(parse_program(src, "<fuzz>"))
    assert isinstance(ty, QuoteT)
    naive = run_deep(lambda: run_cc(term, ty, "naive", check_steps=True))
    se = run_deep(lambda: run_cc(term, ty, "space-efficient"))
    assert observe(naive) == observe(se)
    assert se.max_adjacent_casts <= 2
    assert se.max_hyper_height == _elaboration_height(term)
    if naive.status == "value":
        run_deep(lambda: closed_code_check(naive))

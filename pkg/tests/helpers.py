"""Small pipeline helpers for tests."""

from __future__ import annotations

from conftest import corpus_file
from gmeta.deep import run_deep
from gmeta.gradual import elaborate_program
from gmeta.machine import canonical_value, run_cc
from gmeta.parser import parse_file, parse_program
from gmeta.printer import render_value


def load(name: str):
    return parse_file(str(corpus_file(name)))


def run_source(src: str, mode: str = "naive", **kw):
    def go():
        term, ty = elaborate_program(parse_program(src, "<test>"))
        return run_cc(term, ty, mode, **kw)

    return run_deep(go)


def run_corpus(name: str, mode: str = "naive", **kw):
    def go():
        term, ty = elaborate_program(load(name))
        return run_cc(term, ty, mode, **kw)

    return run_deep(go)


def observe(outcome) -> tuple:
    """What two runs must agree on: status, blame label, rendered value."""
    if outcome.status == "value":
        return ("value", None, render_value(canonical_value(outcome.term)))
    return (outcome.status, outcome.label, None)

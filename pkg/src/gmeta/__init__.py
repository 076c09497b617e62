"""An interpreter for a gradually typed multi-stage language with environment classifiers."""

from .cctype import CCTypeError, GlobalEnv, Lexical, cc_typecheck, check_closed_code
from .coercions import (
    coerce_code,
    coerce_ec,
    coerce_meta,
    normalize,
    reduce_code,
    reduce_ec,
    reduce_meta,
    split_last,
)
from .context import EMPTY_CTX, Ctx, TypeCheckError
from .gradual import (
    elaborate_code,
    elaborate_meta,
    elaborate_program,
    gradual_check_code,
    gradual_synth_meta,
    gradual_typecheck,
)
from .hyper import compose_code, compose_ec, compose_meta, height, to_hyper
from .machine import (
    MachineError,
    Outcome,
    StepLimitExceeded,
    canonical_value,
    closed_code_check,
    eval_program,
    make_machine,
    run_cc,
    step_code,
    step_meta,
)
from .parser import ParseError, parse_file, parse_program
from .printer import render_term, render_type, render_value
from .se_machine import SpaceEfficientMachine, se_step
from .static import static_check_code, static_step, static_synth_code, static_synth_meta
from .subtyping import SubtypeEnv, consistent_subtype, ec_subtype, meta_subtype
from .syntax import fresh_classifier, subst_classifier, subst_term

__all__ = [
    "CCTypeError", "Ctx", "EMPTY_CTX", "GlobalEnv", "Lexical", "MachineError", "Outcome",
    "ParseError", "SpaceEfficientMachine", "StepLimitExceeded", "SubtypeEnv", "TypeCheckError",
    "canonical_value", "cc_typecheck", "check_closed_code", "closed_code_check", "coerce_code",
    "coerce_ec", "coerce_meta", "compose_code", "compose_ec", "compose_meta",
    "consistent_subtype", "ec_subtype", "elaborate_code", "elaborate_meta",
    "elaborate_program", "eval_program", "fresh_classifier", "gradual_check_code",
    "gradual_synth_meta", "gradual_typecheck", "height", "make_machine", "meta_subtype",
    "normalize", "parse_file", "parse_program", "reduce_code", "reduce_ec", "reduce_meta",
    "render_term", "render_type", "render_value", "run_cc", "se_step", "split_last",
    "static_check_code", "static_step", "static_synth_code", "static_synth_meta", "step_code",
    "step_meta", "subst_classifier", "subst_term", "to_hyper",
]

"""Elaboration of gradual programs into the cast calculus.

Typechecking and cast insertion happen in one pass; see :mod:`gmeta.gradual`.
"""

from .gradual import cast, elaborate_code, elaborate_code_synth, elaborate_meta, elaborate_program

__all__ = ["cast", "elaborate_code", "elaborate_code_synth", "elaborate_meta", "elaborate_program"]

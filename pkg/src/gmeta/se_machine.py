"""The space-efficient machine: casts carry hypercoercions.

A cast directly under another cast is composed before anything else runs, so
the evaluation path never holds more than two adjacent casts.  The reduction
context records whether the current position sits directly under a cast
(``ANY``) or not (``NONCAST``); cast-specific rules only fire at ``NONCAST``.
"""

from __future__ import annotations

from typing import Any

from . import coercions as K
from .hyper import META, Hyper, compose, height, is_identity_like, is_inert, to_hyper
from .machine import ANY, NONCAST, MachineError, NaiveMachine, is_uncoerced_value
from .subtyping import EMPTY_ENV
from .syntax import Blame, Cast, Label, Node, Quote, Term, rebuild


class SpaceEfficientMachine(NaiveMachine):
    mode = "space-efficient"

    def load(self, term: Any) -> Any:
        """Translate every coercion in the program into a hypercoercion."""

        def go(n: Any) -> Any:
            if isinstance(n, Cast):
                h = to_hyper(n.coercion, n.src, n.dst, EMPTY_ENV, META)
                self._note_height(h)
                return Cast(go(n.expr), h, n.src, n.dst)
            if isinstance(n, Term):
                return rebuild(n, lambda c: go(c) if isinstance(c, Node) else c)
            return n

        return go(term)

    def _note_height(self, h: Hyper) -> None:
        n = height(h)
        if n > self.max_hyper_height:
            self.max_hyper_height = n

    def is_value(self, m: Any) -> bool:
        if isinstance(m, Cast):
            h = m.coercion
            return (is_uncoerced_value(m.expr) and is_inert(h)
                    and not is_identity_like(h))
        return is_uncoerced_value(m)

    def view(self, h: Any) -> Any:
        if isinstance(h, Hyper) and h.head is None and h.tail is None \
                and isinstance(h.mid, K.STRUCTURAL):
            return h.mid
        return None

    def mk_cast(self, m: Any, c: Any, src: Any, dst: Any) -> Any:
        return Cast(m, c, src, dst)

    def cast_step(self, m: Cast, ctx: str, depth: int, where: Label | None) -> Any:
        if ctx != NONCAST:
            raise MachineError("a cast directly under a cast should have been composed")
        inner = m.expr
        if isinstance(inner, Cast):
            self._note_chain(depth + 2)
            self.fire("cast-compose", m)
            h = compose(inner.coercion, m.coercion, self.g.theta, META)
            self._note_height(h)
            return Cast(inner.expr, h, inner.src, m.dst)
        self._note_chain(depth + 1)
        if isinstance(inner, Blame):
            self.fire("blame-cast", m)
            return inner
        if is_uncoerced_value(inner):
            h = m.coercion
            if isinstance(h.mid, K.Fail):
                self.fire("cast-fail", m)
                return self._blame(h.mid.label, where)
            if is_identity_like(h):
                self.fire("cast-id", m)
                return inner
            raise MachineError(f"cast of a value by a non-inert hypercoercion {h}")
        return Cast(self.meta(inner, ANY, depth + 1, where), m.coercion, m.src, m.dst)

    def dyn_split(self, h: Hyper) -> tuple[Any, Any]:
        if h.tail is None:
            return None, None
        return Hyper(h.head, h.mid, None), h.tail

    def rest_cast(self, u: Any, rest: Any, src: Any, dst: Any) -> Any:
        return Cast(u, rest, src, dst)

    def cancel_quote(self, m: Any) -> Any:
        if isinstance(m, Quote) and m.finished:
            return m.body
        if isinstance(m, Cast) and isinstance(m.expr, Quote) and m.expr.finished:
            mid = self.view(m.coercion)
            if isinstance(mid, K.QuoteC):
                code, ec = mid.code, mid.ec
                if code.head is None and code.tail is None and ec.head is None \
                        and ec.tail is None and isinstance(ec.mid, K.Sub):
                    return m.expr.body
        return None


def se_step(ctx: str, machine: SpaceEfficientMachine) -> Any:
    """One step of the focus under reduction context ``ctx``; returns the new term."""
    if machine.done():
        return machine.term
    machine.term = machine.meta(machine.term, ctx, 0, None)
    machine.steps += 1
    return machine.term


__all__ = ["SpaceEfficientMachine", "se_step"]

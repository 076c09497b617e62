"""Abstract machines for the cast calculus.

``NaiveMachine`` keeps coercions in sequence form and composes them only when
a cast meets a value.  ``SpaceEfficientMachine`` (in :mod:`gmeta.se_machine`)
shares the frame and eliminator rules and overrides the cast rules.

A state is the global environment (classifiers, forest, generated bindings,
heap typing), the heap and the current term.  Each call to :meth:`step`
performs one reduction, found by descending the evaluation path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Any, Callable

from . import coercions as K
from .cctype import CCTypeError, GlobalEnv, cc_typecheck, check_closed_code, check_heap
from .syntax import (
    Addr,
    App,
    Arrow,
    Assign,
    Blame,
    CAbs,
    CApp,
    CElim,
    CIntro,
    CLam,
    Cast,
    CodeApp,
    CodePrim,
    Const,
    Constrained,
    Deref,
    DynElim,
    FreshClassifiers,
    Gen,
    Label,
    Lam,
    Prim,
    Quote,
    RefNew,
    Splice,
    STAR,
    is_code_value,
    rename_cvar,
    subst_classifier,
    subst_term,
)

NONCAST, ANY = "noncast", "any"

DEFAULT_STEP_LIMIT = 1_000_000


def default_step_limit() -> int:
    return int(os.environ.get("GM_STEP_LIMIT", DEFAULT_STEP_LIMIT))


class MachineError(Exception):
    """A stuck state; indicates a bug, never a user error."""


class StepLimitExceeded(Exception):
    pass


class StepCheckError(Exception):
    """A preservation or monotonicity check failed after a step."""


@dataclass
class Outcome:
    status: str  # "value" or "blame"
    term: Any
    label: Label | None = None
    raised_at: Label | None = None
    steps: int = 0
    max_adjacent_casts: int = 0
    max_hyper_height: int = 0
    machine: Any = field(default=None, repr=False)

    @property
    def value(self) -> Any:
        return self.term if self.status == "value" else None


def is_uncoerced_value(m: Any) -> bool:
    if isinstance(m, (Const, Lam, Addr, CAbs, CIntro)):
        return True
    return isinstance(m, Quote) and m.finished


_FRAMES: dict[type, tuple[str, ...]] = {
    App: ("fn", "arg"),
    Prim: ("left", "right"),
    RefNew: ("expr",),
    Assign: ("target", "value"),
    Deref: ("expr",),
    CApp: ("expr",),
    CElim: ("expr",),
    DynElim: ("expr",),
}


def _arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise MachineError(f"unknown operator {op}")


class NaiveMachine:
    """Reduction with coercions composed lazily in sequence form."""

    mode = "naive"

    def __init__(self, term: Any, ty: Any = None, *, check_steps: bool = False,
                 step_limit: int | None = None, trace: Callable[[Any], None] | None = None):
        self.g = GlobalEnv()
        self.heap: list = []
        self.fresh = FreshClassifiers()
        self.ty = ty
        self.check_steps = check_steps
        self.step_limit = default_step_limit() if step_limit is None else step_limit
        self.trace = trace
        self.steps = 0
        self.max_adjacent_casts = 0
        self.max_hyper_height = 0
        self.raised_at: Label | None = None
        self.rule = ""  # name of the last rule fired, for traces
        self.focus: Any = None
        self.term = self.load(term)

    # hooks overridden by the space-efficient machine ----------------------

    def load(self, term: Any) -> Any:
        return term

    def is_value(self, m: Any) -> bool:
        if isinstance(m, Cast):
            return m.normal and is_uncoerced_value(m.expr)
        return is_uncoerced_value(m)

    def view(self, c: Any) -> Any:
        """The structural coercion an eliminator can act on, else None."""
        return c if isinstance(c, K.STRUCTURAL) else None

    def mk_cast(self, m: Any, c: Any, src: Any, dst: Any) -> Any:
        return Cast(m, c, src, dst)

    def cast_step(self, m: Cast, ctx: str, depth: int, where: Label | None) -> Any:
        self._note_chain(depth + 1)
        inner = m.expr
        if isinstance(inner, Blame):
            self.fire("blame-cast", m)
            return inner
        if not self.is_value(inner):
            inner = self.meta(inner, ANY, depth + 1, where)
            return Cast(inner, m.coercion, m.src, m.dst, m.normal)
        if isinstance(inner, Cast):
            self.fire("cast-seq", m)
            return Cast(inner.expr, K.seq(inner.coercion, m.coercion), inner.src, m.dst)
        c = K.normalize(m.coercion, self.g.theta)
        if isinstance(c, K.Id):
            self.fire("cast-id", m)
            return inner
        f = K.failure_of(c)
        if f is not None:
            self.fire("cast-fail", m)
            return self._blame(f.label, where)
        self.fire("cast-normalize", m)
        return Cast(inner, c, m.src, m.dst, normal=True)

    def dyn_split(self, c: Any) -> tuple[Any, Any]:
        """Split an inert coercion into (rest, final injection)."""
        return K.split_last(c)

    def rest_cast(self, u: Any, rest: Any, src: Any, dst: Any) -> Any:
        if isinstance(rest, K.Id):
            return u
        return Cast(u, rest, src, dst, normal=True)

    def cancel_quote(self, m: Any) -> Any:
        """The code inside a spliced quotation value that may cancel, else None."""
        if isinstance(m, Quote) and m.finished:
            return m.body
        if isinstance(m, Cast) and isinstance(m.expr, Quote) and m.expr.finished:
            c = m.coercion
            if isinstance(c, K.QuoteC) and isinstance(c.code, K.Id) and isinstance(c.ec, K.Sub):
                return m.expr.body
        return None

    # driver ---------------------------------------------------------------

    def fire(self, rule: str, focus: Any) -> None:
        self.rule, self.focus = rule, focus

    def _note_chain(self, n: int) -> None:
        if n > self.max_adjacent_casts:
            self.max_adjacent_casts = n

    def _blame(self, label: Label, where: Label | None) -> Blame:
        self.raised_at = where if where is not None else label
        return Blame(label)

    def done(self) -> bool:
        return isinstance(self.term, Blame) or self.is_value(self.term)

    def step(self) -> None:
        if self.steps >= self.step_limit:
            raise StepLimitExceeded(f"step limit {self.step_limit} reached")
        before = self._snapshot() if self.check_steps else None
        self.term = self.meta(self.term, NONCAST, 0, None)
        self.steps += 1
        if self.trace is not None:
            self.trace(self)
        if before is not None:
            self._check_after(before)

    def run(self) -> Outcome:
        if self.check_steps:
            self._check_state()
        while not self.done():
            self.step()
        if isinstance(self.term, Blame):
            return Outcome("blame", self.term, self.term.label, self.raised_at, self.steps,
                           self.max_adjacent_casts, self.max_hyper_height, self)
        return Outcome("value", self.term, None, None, self.steps, self.max_adjacent_casts,
                       self.max_hyper_height, self)

    # meta reduction -------------------------------------------------------

    def meta(self, m: Any, ctx: str, depth: int, where: Label | None) -> Any:
        if isinstance(m, Cast):
            return self.cast_step(m, ctx, depth, where)
        if isinstance(m, Quote):
            if m.finished:
                raise MachineError("stepping a value")
            if isinstance(m.body, Splice) and isinstance(m.body.expr, Blame):
                self.fire("blame-quote", m)
                return m.body.expr
            if is_code_value(m.body):
                self.fire("quote-finish", m)
                return Quote(m.body, m.cls, True)
            return Quote(self.code(m.body, m.cls, where), m.cls)
        fields = _FRAMES.get(type(m))
        if fields is None:
            raise MachineError(f"no rule for {type(m).__name__}")
        here = getattr(m, "label", None) or where
        for f in fields:
            c = getattr(m, f)
            if isinstance(c, Blame):
                self.fire("blame-frame", m)
                return c
            if not self.is_value(c):
                return replace(m, **{f: self.meta(c, NONCAST, 0, here)})
        self.fire(type(m).__name__.lower(), m)
        return self.reduce(m, here)

    def reduce(self, m: Any, where: Label | None) -> Any:
        """Apply the rule for ``m`` whose subterms are all values."""
        if isinstance(m, App):
            fn, arg = m.fn, m.arg
            if isinstance(fn, Lam):
                return subst_term(fn.body, fn.var, arg)
            c = self._elim(fn, K.Arr)
            src, dst = fn.src, fn.dst
            inner = App(fn.expr, self.mk_cast(arg, c.dom, dst.dom, src.dom), m.label)
            return self.mk_cast(inner, c.cod, src.cod, dst.cod)
        if isinstance(m, Prim):
            return Const(_arith(m.op, m.left.value, m.right.value))
        if isinstance(m, RefNew):
            self.heap.append(m.expr)
            self.g.sigma.append(m.ty)
            return Addr(len(self.heap) - 1)
        if isinstance(m, Assign):
            tgt = m.target
            if isinstance(tgt, Addr):
                self.heap[tgt.n] = m.value
                return Const(None)
            c = self._elim(tgt, K.RefC)
            return Assign(tgt.expr, self.mk_cast(m.value, c.write, tgt.dst.elem, tgt.src.elem),
                          m.label)
        if isinstance(m, Deref):
            r = m.expr
            if isinstance(r, Addr):
                return self.heap[r.n]
            c = self._elim(r, K.RefC)
            return self.mk_cast(Deref(r.expr, m.label), c.read, r.src.elem, r.dst.elem)
        if isinstance(m, CApp):
            v = m.expr
            if isinstance(v, CAbs):
                return subst_classifier(v.body, v.var, m.cls)
            c = self._elim(v, K.ForallC)
            src = subst_classifier(v.src.body, v.src.var, m.cls)
            dst = subst_classifier(v.dst.body, v.dst.var, m.cls)
            return self.mk_cast(CApp(v.expr, m.cls, m.label),
                                subst_classifier(c.body, c.var, m.cls), src, dst)
        if isinstance(m, CElim):
            v = m.expr
            if isinstance(v, CIntro):
                return v.body
            c = self._elim(v, K.ConstrC)
            return self.mk_cast(CElim(v.expr, m.label), c.body, v.src.body, v.dst.body)
        if isinstance(m, DynElim):
            v = m.expr
            if not isinstance(v, Cast):
                raise MachineError("dynamic constraint elimination on an uncoerced value")
            rest, last = self.dyn_split(v.coercion)
            g = getattr(last, "ground", None)
            if isinstance(last, K.Inj) and isinstance(g, Constrained):
                if self.g.theta.ec_subtype(g.lo, g.hi):
                    return CElim(self.rest_cast(v.expr, rest, v.src, g), m.label)
            return self._blame(m.label, m.label)
        raise MachineError(f"no rule for {type(m).__name__}")

    def _elim(self, v: Any, kind: type) -> Any:
        if not isinstance(v, Cast):
            raise MachineError(f"eliminating {type(v).__name__}")
        c = self.view(v.coercion)
        if not isinstance(c, kind):
            raise MachineError(f"expected a {kind.__name__} coercion, found {c!r}")
        return c

    # code reduction -------------------------------------------------------

    def code(self, m: Any, e: Any, where: Label | None) -> Any:
        if isinstance(m, Splice):
            v = m.expr
            if isinstance(v, Blame):
                raise MachineError("spliced blame should have propagated")
            if self.is_value(v):
                body = self.cancel_quote(v)
                if body is None:
                    raise MachineError(f"splice of a non-code value {type(v).__name__}")
                self.fire("splice-cancel", m)
                return body
            return Splice(self.meta(v, NONCAST, 0, m.label), m.label)
        if isinstance(m, CLam):
            if not m.runtime:
                self.fire("clam-generate", m)
                return self.generate(m, e)
            if _spliced_blame(m.body):
                self.fire("blame-code", m)
                return m.body
            return replace(m, body=self.code(m.body, m.cls, where))
        if isinstance(m, (CodeApp, CodePrim)):
            a, b = ("fn", "arg") if isinstance(m, CodeApp) else ("left", "right")
            for f in (a, b):
                c = getattr(m, f)
                if _spliced_blame(c):
                    self.fire("blame-code", m)
                    return c
                if not is_code_value(c):
                    return replace(m, **{f: self.code(c, e, where)})
        raise MachineError(f"no code rule for {type(m).__name__}")

    def generate(self, m: CLam, e: Any) -> CLam:
        """A code lambda gets a fresh classifier below ``e`` and a fresh variable."""
        beta = self.fresh.fresh(m.cls.name if hasattr(m.cls, "name") else "a")
        var = f"{m.var.split('#')[0]}#{beta.id}"
        self.g.delta.add(beta)
        self.g.theta = self.g.theta.extend(e, beta)
        self.g.bindings[beta] = (var, m.ty)
        body = subst_classifier(m.body, m.cls.name, beta)
        body = rename_cvar(body, m.var, var)
        return CLam(var, m.ty, beta, body, runtime=True)

    # step checking --------------------------------------------------------

    def _snapshot(self) -> tuple:
        g = self.g
        return (set(g.delta), g.theta.edges, dict(g.bindings), list(g.sigma))

    def _check_state(self) -> None:
        try:
            t = cc_typecheck(self.term, self.g)
            check_heap(self.heap, self.g)
        except CCTypeError as err:
            raise StepCheckError(f"after step {self.steps}: {err}") from err
        if self.ty is not None and t is not None and not _same_type(t, self.ty):
            raise StepCheckError(f"after step {self.steps}: type changed to {t}")
        parents: dict = {}
        for lo, hi in self.g.theta.edges:
            if isinstance(hi, Gen):
                parents[hi] = parents.get(hi, 0) + 1
        for gen in self.g.delta:
            if isinstance(gen, Gen) and parents.get(gen) != 1:
                raise StepCheckError(f"classifier {gen} has {parents.get(gen, 0)} parents")

    def _check_after(self, before: tuple) -> None:
        delta, edges, bindings, sigma = before
        g = self.g
        if not delta <= g.delta:
            raise StepCheckError("classifier set shrank")
        if g.theta.edges[:len(edges)] != edges:
            raise StepCheckError("classifier forest lost an edge")
        if any(g.bindings.get(k) != v for k, v in bindings.items()):
            raise StepCheckError("a generated binding changed")
        if g.sigma[:len(sigma)] != sigma:
            raise StepCheckError("heap typing changed")
        self._check_state()


def _spliced_blame(m: Any) -> bool:
    return isinstance(m, Splice) and isinstance(m.expr, Blame)


def _same_type(a: Any, b: Any) -> bool:
    from .syntax import alpha_eq

    return alpha_eq(a, b)


def closed_code_check(outcome: Outcome) -> Any:
    """Type a final code value in the empty lexical context; raises on failure."""
    v = outcome.term
    if isinstance(v, Cast):
        v = v.expr
    if not (isinstance(v, Quote) and v.finished):
        raise ValueError("not a code value")
    return check_closed_code(v.body, outcome.machine.g)


def step_meta(machine: NaiveMachine) -> Any:
    """One machine step; returns the new term."""
    machine.step()
    return machine.term


def step_code(machine: NaiveMachine, m: Any, e: Any) -> Any:
    """One code step of ``m`` at enclosing classifier ``e``."""
    return machine.code(m, e, None)


split_last = K.split_last


__all__ = [
    "ANY", "NONCAST", "MachineError", "NaiveMachine", "Outcome", "StepCheckError",
    "StepLimitExceeded", "closed_code_check", "eval_program", "is_uncoerced_value",
    "canonical_value", "make_machine", "run_cc", "split_last",
    "step_code", "step_meta",
]


def make_machine(term: Any, ty: Any = None, mode: str = "naive", **kw: Any) -> NaiveMachine:
    if mode == "naive":
        return NaiveMachine(term, ty, **kw)
    if mode in ("space-efficient", "se"):
        from .se_machine import SpaceEfficientMachine

        return SpaceEfficientMachine(term, ty, **kw)
    raise ValueError(f"unknown machine mode {mode!r}")


def run_cc(term: Any, ty: Any = None, mode: str = "naive", **kw: Any) -> Outcome:
    """Run an elaborated program to a value or blame."""
    return make_machine(term, ty, mode, **kw).run()


def eval_program(m: Any, mode: str = "naive", **kw: Any) -> Outcome:
    """Elaborate a closed surface program and run it.

    A code value produced at the empty classifier is checked to be closed.
    """
    from .gradual import elaborate_program
    from .syntax import Eps, QuoteT

    term, ty = elaborate_program(m)
    out = run_cc(term, ty, mode, **kw)
    if out.status == "value" and isinstance(ty, QuoteT) and isinstance(ty.cls, Eps):
        closed_code_check(out)
    return out


def canonical_value(m: Any) -> Any:
    """Casts in sequence normal form, so both machines' results compare equal."""
    from .hyper import Hyper, from_hyper
    from .syntax import Node, Term, rebuild

    def go(n: Any) -> Any:
        if isinstance(n, Cast):
            c = n.coercion
            if isinstance(c, Hyper):
                c = K.normalize(from_hyper(c))
            return Cast(go(n.expr), c, n.src, n.dst)
        if isinstance(n, Term):
            return rebuild(n, lambda x: go(x) if isinstance(x, Node) else x)
        return n

    return go(m)

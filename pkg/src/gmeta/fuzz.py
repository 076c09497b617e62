"""Type-directed random programs of type ``Code<C>@eps``.

Programs are produced as source text so that they go through the parser and
receive labels like hand-written ones.  The generator mixes quotations,
nested code lambdas, splices of outer code, references holding code at the
unknown classifier, and values routed through the unknown type, so that both
successful runs and scope-extrusion blame are common.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

INT = "Int"


def arrow(d: Any, c: Any) -> tuple:
    return ("->", d, c)


def code_t(c: Any, e: str) -> tuple:
    return ("Code", c, e)


def ref_t(t: Any) -> tuple:
    return ("Ref", t)


def show(t: Any) -> str:
    if t == INT:
        return "Int"
    if t[0] == "->":
        d = show(t[1])
        return f"({d}) -> {show(t[2])}" if isinstance(t[1], tuple) and t[1][0] == "->" \
            else f"{d} -> {show(t[2])}"
    if t[0] == "Code":
        return f"Code<{show(t[1])}>@{t[2]}"
    if t[0] == "Ref":
        inner = show(t[1])
        return f"Ref ({inner})" if t[1][0] == "->" else f"Ref {inner}"
    raise ValueError(t)


def blur(t: Any) -> Any:
    """The type with every classifier replaced by the unknown one."""
    if t == INT:
        return t
    if t[0] == "Code":
        return code_t(t[1], "?")
    if t[0] == "Ref":
        return ref_t(blur(t[1]))
    return arrow(blur(t[1]), blur(t[2]))


@dataclass(frozen=True)
class Env:
    meta: tuple = ()  # (name, type)
    code: tuple = ()  # (name, code type, classifier)
    parents: tuple = ()  # (classifier, parent) for every bound classifier

    def chain(self, e: str) -> list[str]:
        """``e`` and its ancestors, nearest first."""
        up = dict(self.parents)
        out = [e]
        while e in up:
            e = up[e]
            out.append(e)
        return out


@dataclass
class Generator:
    rng: random.Random
    max_depth: int = 5
    counter: int = 0

    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def code_type(self, depth: int = 2) -> Any:
        if depth <= 0 or self.rng.random() < 0.7:
            return INT
        return arrow(INT, self.code_type(depth - 1))

    # meta terms ---------------------------------------------------------

    def meta(self, t: Any, env: Env, d: int) -> str:
        r = self.rng
        choices = [self._meta_base]
        if d > 0:
            choices += [self._meta_let, self._meta_dyn, self._meta_beta]
            if t != INT and t[0] == "Code":
                choices += [self._meta_ref, self._meta_ref]
                if self._cells(env):
                    choices += [self._meta_write] * 3
        fits = [x for x, xt in env.meta if self._meta_fits(xt, t, env)]
        if fits and r.random() < 0.35:
            return self._use(r.choice(fits), env, t)
        return r.choice(choices)(t, env, d)

    def _meta_fits(self, have: Any, want: Any, env: Env) -> bool:
        if have == want:
            return True
        if have != INT and want != INT and have[0] == want[0] == "Code" and have[1] == want[1]:
            return have[2] == "?" or have[2] in env.chain(want[2])
        return False

    def _use(self, x: str, env: Env, t: Any) -> str:
        xt = dict(env.meta)[x]
        if xt == t:
            return x
        # route through an annotation so the checker inserts the cast
        w = self.fresh("w")
        return f"(let {w} : {show(t)} = {x} in {w})"

    def _meta_base(self, t: Any, env: Env, d: int) -> str:
        r = self.rng
        if t == INT:
            if d > 0 and r.random() < 0.3:
                return f"({self.meta(INT, env, d - 1)} + {self.meta(INT, env, d - 1)})"
            return str(r.randrange(10))
        if t[0] == "Code":
            e = t[2]
            # code written at any classifier that e may use
            src = r.choice(env.chain(e)) if e != "?" else "eps"
            return f"`{src}{{ {self.code(t[1], src, env, d - 1)} }}" \
                if src == e else self._widen(t[1], src, e, env, d)
        if t[0] == "Ref":
            return f"(ref {self.meta(t[1], env, d - 1)})"
        x = self.fresh("v")
        return f"(fun ({x} : {show(t[1])}) {self.meta(t[2], self._bind(env, x, t[1]), d - 1)})"

    def _widen(self, c: Any, src: str, e: str, env: Env, d: int) -> str:
        w = self.fresh("w")
        body = f"`{src}{{ {self.code(c, src, env, d - 1)} }}"
        return f"(let {w} : {show(code_t(c, e))} = {body} in {w})"

    def _bind(self, env: Env, x: str, t: Any) -> Env:
        return Env(env.meta + ((x, t),), env.code, env.parents)

    def _meta_let(self, t: Any, env: Env, d: int) -> str:
        a = self._some_type(env)
        x = self.fresh("m")
        bound = self.meta(a, env, d - 1)
        return f"(let {x} : {show(a)} = {bound} in {self.meta(t, self._bind(env, x, a), d - 1)})"

    def _meta_dyn(self, t: Any, env: Env, d: int) -> str:
        x, w = self.fresh("u"), self.fresh("w")
        return (f"(let {x} : ? = {self.meta(t, env, d - 1)} in "
                f"let {w} : {show(t)} = {x} in {w})")

    def _meta_beta(self, t: Any, env: Env, d: int) -> str:
        a = self._some_type(env)
        p = blur(a) if self.rng.random() < 0.5 else a
        x = self.fresh("p")
        body = self.meta(t, self._bind(env, x, p), d - 1)
        return f"((fun ({x} : {show(p)}) {body}) {self.meta(a, env, d - 1)})"

    def _meta_ref(self, t: Any, env: Env, d: int) -> str:
        """A cell holding code at the unknown classifier, written and read back."""
        r_name = self.fresh("r")
        c0 = t[1] if self.rng.random() < 0.5 else self.code_type(1)
        cell = ref_t(code_t(c0, "?"))
        init = self.meta(code_t(c0, "eps"), env, d - 1)
        inner = self._bind(env, r_name, cell)
        w = self.fresh("w")
        here = t[2] if t[2] != "?" else "eps"
        read = f"(let {w} : {show(code_t(c0, here))} = !{r_name} in {w})"
        if c0 != t[1]:
            read = f"({read}; {self.meta(t, env, d - 1)})"
        k = self.rng.random()
        if k < 0.15:
            # a write from under a code lambda: the classic extrusion pattern
            read = f"({self._open_write(here, inner, d - 1)}; {read})"
        elif k < 0.8:
            read = f"({self.meta(t, inner, d - 1)}; {read})"
        return f"(let {r_name} : {show(cell)} = ref {init} in {read})"

    def _open_write(self, e: str, env: Env, d: int) -> str:
        """A quotation at ``e`` whose code lambda body splices a cell write."""
        x, a = self.fresh("x"), self.fresh("a")
        inner = Env(env.meta, env.code + ((x, INT, a),), env.parents + ((a, e),))
        body = self._meta_write(code_t(INT, a), inner, d)
        return f"`{e}{{ clam ({x} : Int) @ {a} . ~({body}) }}"

    def _cells(self, env: Env) -> list[tuple[str, Any]]:
        return [(x, xt[1][1]) for x, xt in env.meta
                if xt != INT and xt[0] == "Ref" and xt[1][0] == "Code" and xt[1][2] == "?"]

    def _meta_write(self, t: Any, env: Env, d: int) -> str:
        """Store code from the current position into an enclosing cell."""
        r_name, c0 = self.rng.choice(self._cells(env))
        here = t[2] if t[2] != "?" else "eps"
        val = self.meta(code_t(c0, here), env, d - 1)
        return f"(({r_name} := {val}); {self.meta(t, env, d - 1)})"

    def _some_type(self, env: Env) -> Any:
        r = self.rng
        k = r.random()
        if k < 0.4:
            return INT
        e = r.choice([c for c, _ in env.parents] + ["eps"])
        if k < 0.85:
            return code_t(self.code_type(1), e)
        return arrow(INT, INT)

    # code terms ---------------------------------------------------------

    def code(self, c: Any, e: str, env: Env, d: int) -> str:
        r = self.rng
        visible = set(env.chain(e))
        vars_ = [x for x, xt, a in env.code if xt == c and a in visible]
        if c != INT:
            if d > 0 and r.random() < 0.2:
                return f"~({self.meta(code_t(c, e), env, d - 1)})"
            return self._clam(c, e, env, d)
        if d > 0 and self._cells(env) and r.random() < 0.5:
            return f"~({self._meta_write(code_t(c, e), env, d - 1)})"
        k = r.random()
        if vars_ and k < 0.35:
            return r.choice(vars_)
        if d > 0 and k < 0.6:
            return f"~({self.meta(code_t(c, e), env, d - 1)})"
        if d > 0 and k < 0.75:
            return f"{self.code(INT, e, env, d - 1)} + {self._atom(INT, e, env, d - 1)}"
        if d > 0 and k < 0.85:
            fn = self._clam(arrow(INT, INT), e, env, d - 1)
            return f"({fn}) {self._atom(INT, e, env, d - 1)}"
        return str(r.randrange(10))

    def _atom(self, c: Any, e: str, env: Env, d: int) -> str:
        s = self.code(c, e, env, d)
        return s if s.isidentifier() or s.isdigit() or s.startswith("~(") else f"({s})"

    def _clam(self, c: Any, e: str, env: Env, d: int) -> str:
        x, a = self.fresh("x"), self.fresh("a")
        inner = Env(env.meta, env.code + ((x, c[1], a),), env.parents + ((a, e),))
        return f"clam ({x} : {show(c[1])}) @ {a} . {self.code(c[2], a, inner, d - 1)}"


def random_program(rng: random.Random, max_depth: int = 5) -> str:
    """Source text of a random closed program of type ``Code<C>@eps``."""
    g = Generator(rng, max_depth)
    c = arrow(INT, g.code_type(1)) if rng.random() < 0.7 else INT
    t = code_t(c, "eps")
    if rng.random() < 0.5:
        return g._meta_ref(t, Env(), max_depth) + "\n"
    return g.meta(t, Env(), max_depth) + "\n"


__all__ = ["Generator", "random_program"]

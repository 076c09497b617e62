"""Generated benchmark programs."""


def tail_casts(n: int) -> str:
    """A chain of ``n`` functions typed ``?``, each calling the previous in tail position."""
    lines = ["let f0 : ? = fun (x : Int) x in"]
    for k in range(1, n + 1):
        lines.append(f"let f{k} : ? = fun (x : Int) f{k - 1} x in")
    lines.append(f"f{n} 0")
    return "\n".join(lines) + "\n"

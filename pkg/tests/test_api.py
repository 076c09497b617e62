import gmeta


def test_every_exported_name_resolves():
    assert all(hasattr(gmeta, n) for n in gmeta.__all__)


def test_readme_example():
    src = "let c : Code<Int>@eps = `eps{ 3 } in `eps{ 4 + ~c }"
    out = gmeta.eval_program(gmeta.parse_program(src))
    assert gmeta.render_value(gmeta.canonical_value(out.term)) == "code{ 4 + 3 }@eps"

"""
Tests for the theory description language
"""

import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest
import sympy

from corpus import Mechanics
from dsl import DslError, format_form, parse, parse_file, print_document, tokenize
from testkit import run_all

FIXTURES = Path(__file__).parent / "fixtures"

BASE = """theory p {
    base 1 coords [t];
    fields q[1];
    lagrangian = q_t^2;
}
"""

WITH_ACTION = BASE + """algebra R { basis [e]; }
action shift of R on p { e -> (q: 1); }
"""

EXPECTED_COUNTS = {
    "mechanics.jet": {"theory": 1, "algebra": 3, "action": 3, "momap": 3, "field": 4, "check": 8},
    "harmonic.jet": {"theory": 1, "algebra": 3, "action": 3, "momap": 3, "field": 1, "check": 4},
    "potential.jet": {"theory": 1, "algebra": 1, "action": 1, "momap": 1, "field": 0, "check": 2},
    "phase_space.jet": {"theory": 1, "algebra": 1, "action": 1, "momap": 1, "field": 0, "check": 2},
    "chern_simons_abelian.jet": {"theory": 1, "algebra": 1, "action": 1, "momap": 1, "field": 0,
                                 "check": 3},
}

# (document, line of the diagnostic, fragment of its message)
MALFORMED = [
    ("theory p { base 2 coords [t]; fields q[1]; lagrangian = 0; }", 1,
     "base dimension 2 but 1 coordinates"),
    ("check el(nothing);", 1, "unknown theory 'nothing'"),
    (BASE + "check foo(p);", 6, "unknown check 'foo'"),
    (BASE.replace("q_t^2", "q_t^x"), 4, "malformed power"),
    (BASE.replace("q_t^2", "q_t^2.5"), 4, "unexpected character '.'"),
    (BASE.replace("q_t^2", "r1"), 4, "undeclared name 'r1'"),
    (BASE + BASE, 6, "duplicate name 'p'"),
    ("theory p { base 1 coords [t] fields q[1]; lagrangian = 0; }", 1, "unexpected 'fields'"),
    ("thoery p {}", 1, "unexpected 'thoery'"),
    (BASE.replace("q_t^2", "q ^^ q"), 4, "wedge outside a form expression"),
    (WITH_ACTION + "momap m for shift { mu 1: e -> d(t)^2; }", 8,
     "powers of forms are not defined"),
    (WITH_ACTION + "momap m for shift { mu 2: e ^ e -> 0; }", 8, "arity 2 outside 1..1"),
    (WITH_ACTION + "momap m for shift { mu 1: f -> 0; }", 8, "'f' is not a basis element of R"),
    (WITH_ACTION + "momap m for shift { mu 1: e -> d(t); }", 8,
     "mu 1 must take values of degree 0, got 1"),
    (BASE + "field f on p { }", 6, "field f leaves q undefined"),
    (BASE + "field f on p { r = 1; }", 6, "'r' is not a field component of p"),
    (BASE + "field f on p { grid [[0, 1]] points 3; q = t; }", 6,
     "at least 7 points needed for jet order 4"),
    (BASE + "check el(p, p);", 6, "el takes (theory)"),
    ("algebra g { basis [a, b]; brackets { [a, b] = a*b; } }", 1,
     "bracket values must be rational combinations"),
    ("algebra g { basis [a]; brackets { [a, c] = a; } }", 1, "'c' is not a basis element"),
    (BASE.replace("q_t^2", "q/0"), 4, "division by zero"),
    (BASE + "algebra R { basis [e]; }\naction bad of R on p { e -> (t: q); }", 7,
     "depends on jet variables"),
    (BASE.rstrip().rstrip("}").rstrip(), 4, "unexpected end of input"),
    (BASE.replace("lagrangian", "order -1;\n    lagrangian"), 4, "unexpected '-'"),
    (BASE + "check zero_locus(p);", 6, "unknown momap 'p'"),
]


def test_fixtures_parse_with_expected_counts():
    for name, counts in EXPECTED_COUNTS.items():
        doc = parse_file(FIXTURES / name)
        assert doc.counts() == counts, name


def test_fixtures_round_trip_through_printer():
    for name in EXPECTED_COUNTS:
        doc = parse_file(FIXTURES / name)
        text = print_document(doc)
        again = parse(text)
        assert again.counts() == doc.counts(), name
        assert print_document(again) == text, name


def test_mechanics_fixture_matches_corpus():
    doc = parse_file(FIXTURES / "mechanics.jet")
    mech = Mechanics("free")
    theory = doc.theories["particle"]
    assert sympy.expand(theory.density - mech.density) == 0
    assert theory.space.order == 4
    assert doc.theory_of("energy") is theory
    assert doc.theory_of("line") is theory
    assert [c.name for c in doc.checks][:2] == ["el(particle)", "symmetry(particle, translation)"]
    assert doc.fields["line_grid"].box is not None
    phi = doc.fields["line_grid"].sample(theory.space)
    assert phi.shape == (41,)


def test_jet_order_override():
    assert parse(BASE).theories["p"].space.order == 4
    assert parse(BASE, jet_order=2).theories["p"].space.order == 2
    doc = parse_file(FIXTURES / "chern_simons_abelian.jet", jet_order=2)
    assert doc.theories["chern_simons"].space.order == 2


def random_document(rng) -> str:
    dim = int(rng.integers(1, 3))
    coords = ["x", "y"][:dim]
    k = int(rng.integers(2, 4))
    order = int(rng.integers(2, 5))
    variables = [f"u{a + 1}" for a in range(k)]
    variables += [f"u{a + 1}_{c}" for a in range(k) for c in coords]
    terms = []
    for _ in range(int(rng.integers(1, 5))):
        num = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        den = int(rng.integers(1, 4))
        var = variables[int(rng.integers(len(variables)))]
        power = int(rng.integers(1, 4))
        terms.append(f"{num}/{den}*{var}^{power}")
    lines = [
        "theory T {",
        f"    base {dim} coords [{', '.join(coords)}];",
        f"    fields u[{k}];",
        f"    order {order};",
        f"    lagrangian = {' + '.join(terms)};",
        "}",
    ]
    m = int(rng.integers(1, 4))
    basis = [f"e{i + 1}" for i in range(m)]
    lines.append(f"algebra A {{ basis [{', '.join(basis)}]; }}")
    lines.append("action shift of A on T {")
    for i, b in enumerate(basis):
        lines.append(f"    {b} -> (u{i % k + 1}: {int(rng.integers(1, 5))});")
    lines.append("}")
    value = "u1_x" if dim == 1 else "u1 * d(y)"
    lines.append(f"momap m for shift {{ mu 1: e1 -> {value}; }}")
    lines.append("field f on T {")
    if rng.random() < 0.5:
        box = ", ".join("[0, 1]" for _ in coords)
        lines.append(f"    grid [{box}] points {order + 3 + int(rng.integers(0, 5))};")
    for a in range(k):
        c = coords[int(rng.integers(dim))]
        lines.append(f"    u{a + 1} = {int(rng.integers(-3, 4))}*{c}^{int(rng.integers(0, 3))} + 1;")
    lines.append("}")
    lines.append("check el(T);")
    lines.append("check verify_momap(m);")
    return "\n".join(lines) + "\n"


def test_fuzzed_documents_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(100):
        text = random_document(rng)
        doc = parse(text)
        printed = print_document(doc)
        again = parse(printed)
        assert again.counts() == doc.counts()
        assert print_document(again) == printed, text


def test_malformed_documents_are_diagnosed():
    for text, line, fragment in MALFORMED:
        with pytest.raises(DslError) as info:
            parse(text)
        diagnostic = info.value.diagnostics[0]
        assert diagnostic.line == line, (text, str(info.value))
        assert fragment in diagnostic.message, (text, str(info.value))
        assert diagnostic.column >= 1


def test_diagnostic_positions():
    with pytest.raises(DslError) as info:
        parse("check el(nothing);")
    d = info.value.diagnostics[0]
    assert (d.line, d.column) == (1, 10)
    assert str(info.value).startswith("1:10: unknown theory 'nothing'")
    with pytest.raises(DslError) as info:
        parse(BASE.replace("q_t^2", "q_t^2.5"))
    assert (info.value.diagnostics[0].line, info.value.diagnostics[0].column) == (4, 23)


def test_expected_tokens_listed():
    with pytest.raises(DslError) as info:
        parse("thoery p {}")
    assert "theory" in info.value.diagnostics[0].expected


def test_tokenizer_skips_comments():
    tokens = tokenize("# header\nalgebra R { basis [e]; } # trailing\n")
    assert [t.text for t in tokens[:3]] == ["algebra", "R", "{"]
    assert tokens[0].line == 2
    assert tokens[-1].kind == "eof"


def test_form_printing():
    doc = parse_file(FIXTURES / "phase_space.jet")
    theory = next(iter(doc.theories.values()))
    text = format_form(theory.space, theory.omega)
    assert "^^" in text
    assert "v(q1)" in text and "v(p1)" in text


def test_non_utf8_file():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "bad.jet"
        path.write_bytes(b"\xff\xfe theory")
        with pytest.raises(DslError):
            parse_file(path)


if __name__ == "__main__":
    sys.exit(0 if run_all(globals(), "DSL TESTS") else 1)

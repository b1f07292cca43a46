import pytest

from artifact import formula as F
from artifact import frege as G
from artifact.interpret import Atom, Const, NegAtom, SBin, S1, std_parse
from conftest import PROOFS, read

P = F.parse
WORKED = read("worked.frege")


def test_round_trip():
    p = G.parse_proof(WORKED)
    assert G.parse_proof(G.show_proof(p)) == p
    assert (p.h, p.w) == (3, 13)


@pytest.mark.parametrize("path", PROOFS, ids=lambda p: p.stem)
def test_corpus_checks(path):
    p = G.parse_proof(path.read_text())
    assert G.check_frege(p).ok
    assert G.parse_proof(G.show_proof(p)) == p


def test_axiom_instances():
    a, b = Atom("a"), Atom("b")
    assert G.axiom_instance("F1", {"A": a, "B": b}) == std_parse("~a | (b | a)")
    assert G.axiom_instance("F3", {"A": a, "B": b}) == std_parse("(~a & b) | (~b | a)")
    assert G.axiom_instance("F4", {}) == S1


def test_non_unit_substitution_only_in_general_mode():
    text = "1: ~a | (b | a) ; axiom F1 [A:=a, B:=b]\n2: ~c | (b | c) ; sub 1 {a:=c}\n"
    p = G.parse_proof(text)
    rep = G.check_frege(p)
    assert not rep.ok and rep.errors[0][0] == 2 and "unit" in rep.errors[0][1]
    assert G.check_frege(p, "sf").ok


@pytest.mark.parametrize("text", [
    "1: ~a | (b | a) ; axiom F1 [A:=a, B:=a]\n",
    "1: ~a | (b | a) ; axiom F1 [A:=a]\n",
    "1: ~a | (b | a) ; axiom F1 [A:=a, B:=b]\n2: b ; mp 1 1\n",
    "1: ~a | (b | a) ; axiom F1 [A:=a, B:=b]\n2: b ; mp 2 1\n",
    "1: ~a | (b | a) ; axiom F1 [A:=a, B:=b]\n2: ~a | (1 | a) ; sub 1 {b:=0}\n",
])
def test_bad_lines_rejected(text):
    assert not G.check_frege(G.parse_proof(text)).ok


@pytest.mark.parametrize("text", ["1: a ; axiom F9 []\n", "1 a ; mp 1 2\n", "1: a | ; axiom F4 []\n"])
def test_parse_errors(text):
    with pytest.raises(G.FregeError):
        G.parse_proof(text)


def test_enumeration_is_first_occurrence():
    enum = G.enumerate_vars(G.parse_proof(WORKED), ["w", "x"])
    assert enum.atoms == ("a", "b")
    assert enum.var_for("a") == "w" and enum.var_for("b", True) == "~x"
    assert enum.literal_of("~w") == ("a", True) and enum.literal_of("v1") is None


def test_translation_of_example_lines():
    p = G.parse_proof(WORKED)
    enum = G.enumerate_vars(p, ["w", "x"])
    fresh = F.Fresh()
    q1, eta1, a1 = G.translate_line(p.formula(1), enum, fresh)
    assert q1 == P("~w | (x | w)")
    assert a1 == P("v1 | (v2 | v3)")
    assert eta1 == {"v1": P("~w"), "v2": P("x"), "v3": P("w")}
    _, eta2, a2 = G.translate_line(p.formula(2), enum, fresh)
    assert a2 == P("(v4 & (v5 & v6)) | ((v7 | v8) | (v9 | v10))")
    assert [F.show(eta2[f"v{k}"]) for k in range(4, 11)] == ["w", "~x", "~w", "w", "x", "~w", "w"]


@pytest.mark.parametrize("path", PROOFS, ids=lambda p: p.stem)
def test_close_translation_round_trip(path):
    p = G.parse_proof(path.read_text())
    enum = G.enumerate_vars(p)
    fresh = F.Fresh()
    for ln in p.lines:
        q, eta, a = G.translate_line(ln.formula, enum, fresh)
        assert G.close_translation(q, enum) == ln.formula
        assert G.close_translation(a, enum, eta) == ln.formula


def test_close_translation_rejects_foreign_variables():
    enum = G.enumerate_vars(["a"])
    with pytest.raises(G.FregeError):
        G.close_translation(P("v1"), enum)


def test_brute_force():
    enum = G.enumerate_vars(["a", "b"], ["w", "x"])
    assert G.brute_force_semantic(P("0 | ((x & 0) | (~w | w))"), enum) == G.TAUTOLOGICAL
    assert G.brute_force_semantic(P("0"), enum) == G.CONTRADICTORY
    assert G.brute_force_semantic(P("w"), enum) == G.NEITHER
    assert G.brute_force_semantic(P("[w / y](y & ~w)"), enum) == G.CONTRADICTORY


def test_std_substitute_negates_images():
    f = std_parse("~a | b")
    out = G.std_substitute({"a": std_parse("b & 1")}, f)
    assert out == SBin("|", std_parse("~b | 0"), Atom("b"))
    assert G.std_substitute({"b": Const(0)}, NegAtom("b")) == Const(1)

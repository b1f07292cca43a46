import random

import pytest

from artifact import compiler as K
from artifact import constructions as C
from artifact import derivation as D
from artifact import formula as F
from artifact import frege as G
from artifact.derivation import Exp, Inf
from artifact.interpret import std_parse
from conftest import PROOFS, read
from generators import _put, vertical_nodes

P = F.parse


@pytest.fixture(scope="module")
def worked():
    p = G.parse_proof(read("worked.frege"))
    enum = G.enumerate_vars(p, ["w", "x"])
    return p, K.phase1(p, K.translate_proof(p, enum))


def test_phase_one_translations(worked):
    _, arts = worked
    assert [a.kind for a in arts] == ["F1", "F2", "MP"]
    assert arts[0].A == P("v1 | (v2 | v3)")
    assert arts[1].A == P("(v4 & (v5 & v6)) | ((v7 | v8) | (v9 | v10))")
    assert arts[2].A == P("(v11 | v12) | (v13 | v14)")
    assert [(a.z, a.y) for a in arts] == [("z1", "y1"), ("z2", "y2"), ("z3", "y3")]


def test_phase_one_values(worked):
    _, arts = worked
    assert arts[0].tau == arts[1].tau == P("0")
    assert arts[2].tau == P("(z1 | z2) | ((~w & w) | (((x | 0) & ~x) | (w & ~w)))")
    assert arts[0].mu == {"v2": P("v2 | 0")}
    assert arts[1].mu == {"v9": P("v9 | v9")}
    assert arts[2].mu == {"v13": P("v13 | v13")}
    assert all(a.rho == a.eta and a.sigma == [] for a in arts)
    assert arts[0].B == P("0 | ((x & 0) | (~w | w))")
    assert arts[1].B == P("0 | ((w | ~w) & ((w | ~w) & ((~x | x) & (~w | w))))")
    assert arts[2].B == P("y1 & y2")


def test_phase_one_psi_check(worked):
    _, arts = worked
    for a in arts:
        assert D.check_derivation(a.psi, D.TBLSCF).ok
        prior = {b.y: F.Bin("|", F.Var(b.z), b.R) for b in arts[:a.i - 1]}
        assert D.premise(a.psi) == F.substitute(prior, a.B)
        assert D.conclusion(a.psi) == a.conclusion


def test_phase_one_assembly(worked):
    _, arts = worked
    d = K.phase1_assemble(arts)
    t3 = arts[2].tau
    want = F.explicit([("z1", P("0")), ("z2", P("0")), ("z3", t3)],
                      P("z3 | ((w | x) | ((~w | ~w) | w))"))
    assert F.actualize(D.conclusion(d)) == F.actualize(want)
    assert D.premise(d) == K.b_chain(arts)
    rep = D.check_derivation(d, D.TBLSCF)
    assert rep.ok and (rep.width, rep.height) == (36, 32)


def test_example_compile():
    p = G.parse_proof(read("worked.frege"))
    r = K.compile_proof(p, G.enumerate_vars(p, ["w", "x"]))
    assert all(r.verified.values()), r.verified
    assert r.conclusion_value == std_parse("(a | b) | (~a | a)")
    assert (r.stats["width"], r.stats["height"]) == (112, 107)
    assert r.stats["cutFree"]


def test_phase_two_fragment():
    eg = C.EnumGuards(("a", "b"), (("w", "~w"), ("x", "~x")), ("l_a", "l_b"), ("r_a", "r_b"))
    d = K.phase2_merges(P("z3 | (w & x)"), "y", eg, {"w": 1, "x": 2}.get)
    rep = D.check_derivation(d, D.TBLSCF)
    assert rep.ok and (rep.width, rep.height) == (42, 21)
    assert F.show(D.premise(d)) == (
        "[(z3 | (w & x)) / y] [(y{l_a} <a> y{r_a}) / y] [(y{l_b} <b> y{r_b}) / y] y")
    assert F.show(D.conclusion(d)) == (
        "([(z3{l_a} <a> z3{r_a}) / z3] [(z3{l_b} <b> z3{r_b}) / z3] z3 | "
        "(([(w{l_a,l_b} <b> w{l_a,r_b}) / w] w <a> [(w{l_b,r_a} <b> w{r_a,r_b}) / w] w) & "
        "([(x{l_a,l_b} <a> x{l_b,r_a}) / x] x <b> [(x{l_a,r_b} <a> x{r_a,r_b}) / x] x)))")


def test_substitution_lines_carry_sigma():
    p = G.parse_proof(read("proofs/subchain4.frege"))
    r = K.compile_proof(p, verify=False)
    assert [len(a.sigma) for a in r.arts] == [0, 2, 2, 2]
    assert r.arts[1].sigma == [("x1", P("0"), "g.2"), ("~x1", P("1"), "g.2")]
    assert [g for _, _, g in K.sigma_vector(r.arts)] == ["g.4"] * 2 + ["g.3"] * 2 + ["g.2"] * 2
    want = {"v13": "1", "v14": "(1 | 0)", "v15": "(0 | 0)", "v16": "0"}
    for v, c in want.items():
        d = K.sigma_application(v, 4, r.arts)
        assert D.check_derivation(d).ok
        assert F.show(D.conclusion(d)) == c


def test_unit_axiom_compile():
    r = K.compile_verified(G.parse_proof("1: 1 ; axiom F4 []\n"))
    assert r.stats["n"] == 0
    assert F.show(D.conclusion(r.xi)) == "([0 / z1] z1 | 1)"


@pytest.mark.parametrize("path", PROOFS, ids=lambda p: p.stem)
def test_corpus_compiles(path):
    r = K.compile_proof(G.parse_proof(path.read_text()))
    assert all(r.verified.values()), (r.verified, r.notes)


def test_invalid_proof_is_refused():
    with pytest.raises(K.CompileError):
        K.compile_proof(G.parse_proof("1: a | b ; axiom F4 []\n"))


def test_enumeration_clash_is_refused():
    p = G.parse_proof(read("worked.frege"))
    with pytest.raises(K.CompileError):
        K.compile_proof(p, G.enumerate_vars(p, ["v1", "v2"]))


def test_fault_in_xi_is_caught():
    p = G.parse_proof(read("worked.frege"))
    r = K.compile_proof(p, verify=False)
    nodes = [(pth, n) for pth, n in vertical_nodes(r.xi) if isinstance(n, Inf)]
    rng = random.Random(3)
    for pth, n in rng.sample(nodes, min(20, len(nodes))):
        # a rule step passed off as an expansion step
        bad = _put(r.xi, pth, Exp(n.top, n.bottom))
        assert not D.check_derivation(bad, D.TBLSCF).ok


def test_wrong_target_is_caught():
    p = G.parse_proof(read("worked.frege"))
    r = K.compile_proof(p, verify=False)
    lines = p.lines[:-1] + (G.Line(std_parse("(a | b) | (~a | b)"), p.lines[-1].just),)
    K.verify_compiled(r, G.FregeProof(lines))
    assert r.verified["kernelOk"] and not r.verified["conclusionMatches"]


AXIOM_CASES = [
    ("F1", {"A": "a", "B": "b"}),
    ("F1", {"A": "a & ~b", "B": "1"}),
    ("F2", {"A": "a", "B": "b", "C": "~a"}),
    ("F2", {"A": "0", "B": "a | b", "C": "b"}),
    ("F3", {"A": "a", "B": "b"}),
    ("F3", {"A": "a | 0", "B": "~a & b"}),
]


@pytest.mark.parametrize("name, m", AXIOM_CASES)
def test_single_axiom_compiles(name, m):
    inst = {k: std_parse(v) for k, v in m.items()}
    f = G.axiom_instance(name, inst)
    p = G.FregeProof((G.Line(f, G.Axiom(name, tuple(inst.items()))),))
    r = K.compile_verified(p)
    assert r.conclusion_value == f or r.notes


def test_family_specs():
    assert K.parse_family("subchain:h=2,4,w=8..9") == ("subchain", [(2, 8), (2, 9), (4, 8), (4, 9)])
    with pytest.raises(ValueError):
        K.parse_family("nope:h=2")


@pytest.mark.parametrize("fam, h, w", [("subchain", 3, 8), ("mpchain", 4, 8)])
def test_family_members_compile_within_bounds(fam, h, w):
    p = K.FAMILIES[fam](h, w)
    assert G.check_frege(p).ok and p.h == h
    r = K.compile_verified(p)
    assert all(K.size_bounds(r.stats).values())

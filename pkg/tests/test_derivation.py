import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import derivation as D
from artifact import formula as F
from artifact.derivation import DBin, DESub, Exp, Inf, Leaf
from conftest import read
from generators import CONNS, ATOMS, closed_flat, inject_fault, leaf_units, random_derivation, vertical_nodes

P = F.parse


@pytest.fixture(scope="module")
def phi():
    return D.parse_derivation(read("phi.sad"))


@pytest.fixture(scope="module")
def psi():
    return D.parse_derivation(read("psi.sad"))


def test_phi_endpoints_and_dimensions(phi):
    assert D.premise(phi) == P("(x <a> z) & [w & x / y](y{p} <a> y{q})")
    assert D.conclusion(phi) == P("(x & (w{p} | x{p})) <a> (z & (w{q} | x{q}))")
    assert D.width_height(phi) == (10, 4)
    rep = D.check_derivation(phi)
    assert rep.ok and set(rep.labels()) == {"mix", "<a>^&"}


def test_psi_endpoints_and_dimensions(psi):
    assert D.premise(psi) == P("(0<a>1) & ((w&1)<a>(w&0))")
    assert D.conclusion(psi) == P("(0 & (w|1)) <a> (1 & (w|0))")
    assert D.width_height(psi) == (6, 3)
    assert D.check_derivation(psi).ok


def test_leaf_dimensions():
    # heights count formula rows: a lone formula is one row
    assert D.width_height(Leaf(P("x{p}"))) == (2, 1)
    assert D.endpoints(Leaf(P("0"))) == (P("0"), P("0"))


def test_cut_is_recognised_and_excluded():
    p, c = P("((0<a>1)&(1<a>0))"), P("((0&1)<a>(1&0))")
    assert D.match_rule(p, c, D.TBLS) == "<a>^&"
    assert D.is_cut_label("<a>^&")
    with pytest.raises(D.RuleExcluded):
        D.match_rule(p, c, D.TBLSCF)


def test_mix_and_unsound_step():
    assert D.match_rule(P("1 & 0"), P("1 | 0")) == "mix"
    with pytest.raises(D.NoRuleMatches):
        D.match_rule(P("0 & 1"), P("0 & 0"))
    rep = D.check_derivation(Inf(Leaf(P("0 & 1")), Leaf(P("0 & 0"))))
    assert not rep.ok and "NoRuleMatches" in rep.errors()[0]["error"]


@pytest.mark.parametrize("top, bottom", [
    ("[B/x](y & x)", "([B/x]y & [B/x]x)"),
    ("[0/x]^p (x{p} | x)", "(0 | x)"),
    ("[0/z1] z1 | C", "0 | C"),
    ("0 | C", "[0/z1] z1 | C"),
    ("[1/x]^p y{p}", "y{p}"),
])
def test_expansion_steps(top, bottom):
    D.check_expansion_step(P(top), P(bottom))


def test_guard_firing_is_one_way():
    with pytest.raises(D.NoExpansionApplies):
        D.check_expansion_step(P("(0 | x)"), P("[0/x]^p (x{p} | x)"))


def test_equal_sides_rejected():
    with pytest.raises(D.IdenticalFormulas):
        D.check_expansion_step(P("x"), P("x"))
    with pytest.raises(D.NoExpansionApplies):
        D.check_expansion_step(P("x | y"), P("y | x"))


def test_cut_freeness(phi, psi):
    assert not D.is_cut_free(phi)
    assert not D.is_cut_free(psi)
    assert D.is_cut_free(Inf(Leaf(P("1 & 0")), Leaf(P("1 | 0"))))


def test_report_json(phi):
    rep = json.loads(D.check_derivation(phi).to_json())
    assert rep["ok"] and rep["width"] == 10 and rep["height"] == 4
    assert {s["kind"] for s in rep["steps"]} == {"inference", "expansion"}


def test_sexpr_round_trip(phi, psi):
    for d in (phi, psi):
        text = D.show_derivation(d)
        assert D.parse_derivation(text) == d


def test_sexpr_errors():
    with pytest.raises(F.ParseError):
        D.parse_derivation('(leaf "x"')
    with pytest.raises(F.ParseError):
        D.parse_derivation('(frob (leaf "x"))')


def test_guarded_node():
    d = D.parse_derivation('(gsub 0 x p (exp (leaf "(x{p} | y)") (leaf "(0 | y)")))')
    assert D.premise(d) == P("[0/x]^p (x{p} | y)")
    # the guarded substitution has not fired inside, so the body's step is not an expansion
    assert not D.check_derivation(d).ok


# ---------------------------------------------------------------- properties

def _recompute(d):
    """Independent premise/conclusion/width/height by direct recursion."""
    if isinstance(d, Leaf):
        return d.f, d.f, F.size(d.f), 1
    if isinstance(d, DBin):
        a, b = _recompute(d.left), _recompute(d.right)
        return (F.Bin(d.conn, a[0], b[0]), F.Bin(d.conn, a[1], b[1]), a[2] + b[2], max(a[3], b[3]))
    if isinstance(d, DESub):
        a, b = _recompute(d.arg), _recompute(d.body)
        return (F.ESub(a[0], d.var, b[0]), F.ESub(a[1], d.var, b[1]), a[2] + b[2], max(a[3], b[3]))
    t, b = _recompute(d.top), _recompute(d.bottom)
    return t[0], b[1], max(t[2], b[2]), t[3] + b[3]


def test_dimensions_match_recomputation():
    rng = random.Random(11)
    for _ in range(1000):
        d = random_derivation(rng)
        p, c, w, h = _recompute(d)
        assert (D.premise(d), D.conclusion(d)) == (p, c)
        assert D.width_height(d) == (w, h)


SCHEMES = [(fam, a, b) for fam in D.FAMILIES for a in CONNS + ATOMS for b in CONNS + ATOMS]


@settings(max_examples=300)
@given(st.sampled_from(SCHEMES), closed_flat, closed_flat, closed_flat, closed_flat)
def test_every_scheme_instance_matches(scheme, x, y, z, w):
    fam, alpha, beta = scheme
    p, c = D.instantiate(fam, alpha, beta, x, y, z, w)
    if p != c:
        D.match_rule(p, c, D.TBLS)


@settings(max_examples=200)
@given(st.sampled_from(["s", "assoc|", "assoc&", "mix", "com|", "com&"]), closed_flat, closed_flat, closed_flat)
def test_every_algebraic_instance_matches(name, x, y, z):
    p, c = D.instantiate_algebraic(name, x, y, z)
    if p != c:
        D.match_rule(p, c, D.TBLS)


def test_faults_are_rejected():
    rng = random.Random(12)
    for _ in range(300):
        d = random_derivation(rng)
        bad = inject_fault(rng, d)
        assert not D.check_derivation(bad).ok


def test_fault_oracle_is_independent():
    # the injected faults change the unit multiset across a step, which no linear rule does
    rng = random.Random(13)
    for _ in range(200):
        d = random_derivation(rng)
        for _, n in vertical_nodes(d):
            if isinstance(n, Inf) and F.is_flat(D.conclusion(n.top)):
                assert leaf_units(D.conclusion(n.top)) == leaf_units(D.premise(n.bottom))


@given(closed_flat)
def test_reversed_guard_firing_fails(f):
    g = F.GSub(F.ZERO, "x", "p", F.Bin("|", F.var("x", "p"), f))
    fired = F.Bin("|", F.ZERO, f)
    D.check_expansion_step(g, fired)
    with pytest.raises(D.KernelError):
        D.check_expansion_step(fired, g)

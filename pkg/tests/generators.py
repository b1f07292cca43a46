"""Random formulae, rule steps and derivations shared by the property suites."""
import random

from artifact import derivation as D
from artifact import formula as F
from artifact.derivation import DBin, DESub, Exp, Inf, Leaf
from artifact.formula import AND, OR, Bin, ESub, Unit, Var

CONNS = (AND, OR)
ATOMS = ("a", "b")


def flat(rng, size, leaves, conns=CONNS + ATOMS):
    """Random flat formula with `size` nodes; leaves drawn from `leaves`."""
    if size <= 2:
        return leaves(rng) if callable(leaves) else rng.choice(leaves)
    k = rng.randrange(1, size - 1)
    return Bin(rng.choice(conns), flat(rng, k, leaves, conns), flat(rng, size - 1 - k, leaves, conns))


def var_leaf(names):
    return lambda rng: Var(rng.choice(names))


def unit_leaf(rng):
    return Unit(rng.randrange(2))


def open_formula(rng, size, names, depth=0):
    """Open formula with occasional explicit substitutions."""
    if size >= 5 and rng.random() < 0.3:
        y = f"y{depth}"
        k = rng.randrange(1, size - 2)
        arg = flat(rng, k, var_leaf(names))
        body = open_formula(rng, size - 1 - k, names + [y], depth + 1)
        return ESub(arg, y, body)
    return flat(rng, size, var_leaf(names))


# ---------------------------------------------------------------- rule steps

def _schemes():
    conns = CONNS + ATOMS
    for fam in D.FAMILIES:
        for alpha in conns:
            for beta in conns:
                yield fam, alpha, beta


def root_steps(p):
    """Every conclusion reachable from p by one rule instance at the root,
    computed by instantiating the schemes and algebraic rules forward."""
    out = []
    if isinstance(p, Bin) and isinstance(p.left, Bin) and isinstance(p.right, Bin):
        x, y, z, w = p.left.left, p.left.right, p.right.left, p.right.right
        for fam, alpha, beta in _schemes():
            prem, conc = D.instantiate(fam, alpha, beta, x, y, z, w)
            if prem == p and conc != p:
                out.append(conc)
    if isinstance(p, Bin):
        x, r = p.left, p.right
        cands = [("mix", x, r, None), ("com|", x, r, None), ("com&", x, r, None)]
        if isinstance(r, Bin):
            cands += [("s", x, r.left, r.right), ("assoc|", x, r.left, r.right),
                      ("assoc&", x, r.left, r.right)]
        for name, a, b, c in cands:
            prem, conc = D.instantiate_algebraic(name, a, b, c)
            if prem == p and conc != p:
                out.append(conc)
    return out


def _positions(f, path=()):
    yield path
    if isinstance(f, Bin):
        yield from _positions(f.left, path + ("L",))
        yield from _positions(f.right, path + ("R",))


def _replace(f, path, g):
    if not path:
        return g
    if path[0] == "L":
        return Bin(f.conn, _replace(f.left, path[1:], g), f.right)
    return Bin(f.conn, f.left, _replace(f.right, path[1:], g))


def _at(f, path):
    for p in path:
        f = f.left if p == "L" else f.right
    return f


def step_in_context(f, path, g):
    """Derivation of one step at `path`, the rest of f kept as leaves."""
    if not path:
        return Inf(Leaf(f), Leaf(g))
    inner = step_in_context(_at(f, path[:1]), path[1:], g)
    sib = Leaf(f.right if path[0] == "L" else f.left)
    return DBin(f.conn, inner, sib) if path[0] == "L" else DBin(f.conn, sib, inner)


def random_chain(rng, f, steps):
    """Vertical chain of up to `steps` random rule applications from f."""
    parts = []
    for _ in range(steps):
        opts = [(pth, g) for pth in _positions(f) for g in root_steps(_at(f, pth))]
        if not opts:
            break
        pth, g = rng.choice(opts)
        nxt = _replace(f, pth, g)
        parts.append(step_in_context(f, pth, g))
        f = nxt
    return D.seq(*parts) if parts else Leaf(f)


def random_derivation(rng, size=None):
    """Closed TBLS derivation over units; sometimes under an explicit substitution."""
    size = size or rng.randrange(5, 14)
    d = Leaf(None)
    while isinstance(d, Leaf):
        d = random_chain(rng, flat(rng, size, unit_leaf), rng.randrange(1, 5))
    r = rng.random()
    if r < 0.2:
        e = flat(rng, rng.randrange(3, 7), unit_leaf)
        d = DBin(rng.choice(CONNS + ATOMS), d, random_chain(rng, e, 2))
    elif r < 0.35:
        # abstract the derivation behind a variable and substitute it back
        body = Bin(rng.choice(CONNS), Var("x"), flat(rng, 3, unit_leaf))
        d = DESub(d, "x", Leaf(body))
    return d


# ---------------------------------------------------------------- faults

def _flip_unit(f, rng):
    paths = [p for p in _positions(f) if isinstance(_at(f, p), Unit)]
    p = rng.choice(paths)
    return _replace(f, p, Unit(1 - _at(f, p).value))


def vertical_nodes(d, path=()):
    if isinstance(d, (Inf, Exp)):
        yield path, d
        yield from vertical_nodes(d.top, path + ("t",))
        yield from vertical_nodes(d.bottom, path + ("b",))
    elif isinstance(d, DBin):
        yield from vertical_nodes(d.left, path + ("L",))
        yield from vertical_nodes(d.right, path + ("R",))
    elif isinstance(d, DESub):
        yield from vertical_nodes(d.arg, path + ("A",))
        yield from vertical_nodes(d.body, path + ("B",))


def _put(d, path, new):
    if not path:
        return new
    h, rest = path[0], path[1:]
    if h == "t":
        return type(d)(_put(d.top, rest, new), d.bottom, *([d.label] if isinstance(d, Inf) else []))
    if h == "b":
        return type(d)(d.top, _put(d.bottom, rest, new), *([d.label] if isinstance(d, Inf) else []))
    if h == "L":
        return DBin(d.conn, _put(d.left, rest, new), d.right)
    if h == "R":
        return DBin(d.conn, d.left, _put(d.right, rest, new))
    if h == "A":
        return DESub(_put(d.arg, rest, new), d.var, d.body)
    return DESub(d.arg, d.var, _put(d.body, rest, new))


def inject_fault(rng, d):
    """A derivation that cannot be correct.  Every rule is linear, so a step
    whose endpoints have different unit multisets is never an instance; an
    expansion step between distinct flat formulae is never valid either."""
    nodes = [(p, n) for p, n in vertical_nodes(d)
             if isinstance(n, Inf) and F.is_flat(D.conclusion(n.top))]
    path, node = rng.choice(nodes)
    if rng.random() < 0.5:
        bad = _flip_unit(D.premise(node.bottom), rng)
        return _put(d, path, Inf(node.top, Leaf(bad)))
    return _put(d, path, Exp(node.top, node.bottom))


def leaf_units(f):
    if isinstance(f, Unit):
        return (f.value,)
    if isinstance(f, Bin):
        return tuple(sorted(leaf_units(f.left) + leaf_units(f.right)))
    return ()


def new_rng(seed):
    return random.Random(seed)


# ---------------------------------------------------------------- hypothesis strategies

from hypothesis import strategies as st  # noqa: E402

NAMES = ("x", "y", "z", "w")
GUARDS = ("p", "q", "r")

ranges = st.frozensets(st.sampled_from(GUARDS), max_size=2)
units = st.builds(Unit, st.integers(0, 1))
variables = st.builds(Var, st.sampled_from(NAMES), ranges)


def flat_formulae(leaves=st.one_of(units, variables), conns=CONNS + ATOMS, max_leaves=12):
    return st.recursive(leaves, lambda kids: st.builds(Bin, st.sampled_from(conns), kids, kids),
                        max_leaves=max_leaves)


open_flat = flat_formulae(variables)
closed_flat = flat_formulae(units)

"""Substitution-Frege proofs: text format, checking, enumerations and translations."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from . import formula as F
from .formula import AND, OR, Bin, BudgetExceeded, Unit, Var
from .interpret import (Atom, Const, NegAtom, SBin, S1, interpret_formula, std_atoms,
                        std_negate, std_parse, std_show)

AXIOMS = ("F1", "F2", "F3", "F4")
AXIOM_METAVARS = {"F1": ("A", "B"), "F2": ("A", "B", "C"), "F3": ("A", "B"), "F4": ()}
MAX_ATOMS = 20


class FregeError(Exception):
    pass


class FregeParseError(FregeError):
    pass


# ---------------------------------------------------------------- proof objects

@dataclass(frozen=True)
class Axiom:
    name: str
    inst: tuple  # ((metavar, StdFormula), ...)

    def mapping(self):
        return dict(self.inst)


@dataclass(frozen=True)
class MP:
    k: int
    l: int


@dataclass(frozen=True)
class Sub:
    k: int
    rho: tuple  # ((atom, StdFormula), ...)

    def mapping(self):
        return dict(self.rho)


@dataclass(frozen=True)
class Line:
    formula: object
    just: object


@dataclass(frozen=True)
class FregeProof:
    lines: tuple

    @property
    def h(self):
        return len(self.lines)

    def line(self, i):
        return self.lines[i - 1]

    def formula(self, i):
        return self.lines[i - 1].formula

    @property
    def w(self):
        return max((std_size(ln.formula) for ln in self.lines), default=0)


def std_size(f):
    if isinstance(f, SBin):
        return 1 + std_size(f.left) + std_size(f.right)
    return 1


def axiom_instance(name, m):
    if name == "F4":
        return S1
    n = std_negate
    if name == "F1":
        A, B = m["A"], m["B"]
        return SBin(OR, n(A), SBin(OR, B, A))
    if name == "F2":
        A, B, C = m["A"], m["B"], m["C"]
        return SBin(OR, SBin(AND, A, SBin(AND, B, n(C))),
                    SBin(OR, SBin(OR, A, n(B)), SBin(OR, n(A), C)))
    if name == "F3":
        A, B = m["A"], m["B"]
        return SBin(OR, SBin(AND, n(A), B), SBin(OR, n(B), A))
    raise FregeError(f"unknown axiom {name}")


def std_substitute(rho, f):
    if isinstance(f, Atom):
        return rho.get(f.name, f)
    if isinstance(f, NegAtom):
        return std_negate(rho[f.name]) if f.name in rho else f
    if isinstance(f, SBin):
        return SBin(f.conn, std_substitute(rho, f.left), std_substitute(rho, f.right))
    return f


# ---------------------------------------------------------------- text format

_LINE = re.compile(r"^\s*(\d+)\s*:\s*(.*?)\s*;\s*(.*?)\s*$")


def _bindings(text, open_, close_):
    text = text.strip()
    if not (text.startswith(open_) and text.endswith(close_)):
        raise FregeParseError(f"expected {open_}...{close_}: {text}")
    body = text[1:-1].strip()
    out = []
    if not body:
        return tuple(out)
    for part in body.split(","):
        if ":=" not in part:
            raise FregeParseError(f"expected NAME:=FORMULA, got {part.strip()}")
        k, v = part.split(":=", 1)
        out.append((k.strip(), std_parse(v)))
    return tuple(out)


def parse_justification(text):
    words = text.split(None, 1)
    if not words:
        raise FregeParseError("missing justification")
    kind, rest = words[0], (words[1] if len(words) > 1 else "")
    if kind == "axiom":
        name, _, inst = rest.partition(" ")
        name = name.strip()
        if name not in AXIOMS:
            raise FregeParseError(f"unknown axiom {name}")
        return Axiom(name, _bindings(inst, "[", "]") if inst.strip() else ())
    if kind == "mp":
        nums = rest.split()
        if len(nums) != 2 or not all(x.isdigit() for x in nums):
            raise FregeParseError(f"mp needs two line numbers: {rest}")
        return MP(int(nums[0]), int(nums[1]))
    if kind == "sub":
        num, _, rho = rest.strip().partition(" ")
        if not num.isdigit():
            raise FregeParseError(f"sub needs a line number: {rest}")
        return Sub(int(num), _bindings(rho, "{", "}"))
    raise FregeParseError(f"unknown justification {kind}")


def parse_proof(text) -> FregeProof:
    lines = []
    for raw in text.splitlines():
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        m = _LINE.match(s)
        if not m:
            raise FregeParseError(f"malformed line: {raw}")
        i = int(m.group(1))
        if i != len(lines) + 1:
            raise FregeParseError(f"line {i} out of order")
        try:
            f = std_parse(m.group(2))
        except F.ParseError as e:
            raise FregeParseError(f"line {i}: {e}") from e
        lines.append(Line(f, parse_justification(m.group(3))))
    return FregeProof(tuple(lines))


def _show_bindings(bs):
    return ", ".join(f"{k}:={std_show(v)}" for k, v in bs)


def show_justification(j):
    if isinstance(j, Axiom):
        return f"axiom {j.name}" + (f" [{_show_bindings(j.inst)}]" if j.inst else "")
    if isinstance(j, MP):
        return f"mp {j.k} {j.l}"
    return f"sub {j.k} {{{_show_bindings(j.rho)}}}"


def show_proof(p: FregeProof):
    return "".join(f"{i}: {std_show(ln.formula)} ; {show_justification(ln.just)}\n"
                   for i, ln in enumerate(p.lines, 1))


# ---------------------------------------------------------------- checking

@dataclass
class FregeReport:
    ok: bool
    errors: list = field(default_factory=list)  # (line, message)

    def as_dict(self):
        return {"ok": self.ok, "errors": [{"line": i, "message": m} for i, m in self.errors]}


def _ref_ok(i, k):
    return 1 <= k < i


def check_frege(p: FregeProof, mode="sf01") -> FregeReport:
    if mode not in ("sf", "sf01"):
        raise ValueError(mode)
    errs = []
    for i, ln in enumerate(p.lines, 1):
        j, P = ln.just, ln.formula
        if isinstance(j, Axiom):
            m = j.mapping()
            need = AXIOM_METAVARS[j.name]
            if set(m) != set(need):
                errs.append((i, f"{j.name} instantiates {', '.join(need) or 'nothing'}"))
            elif axiom_instance(j.name, m) != P:
                errs.append((i, f"not the {j.name} instance: expected "
                                f"{std_show(axiom_instance(j.name, m))}"))
        elif isinstance(j, MP):
            if not (_ref_ok(i, j.k) and _ref_ok(i, j.l)):
                errs.append((i, f"mp premises must precede line {i}"))
                continue
            expect = SBin(OR, std_negate(p.formula(j.k)), P)
            if p.formula(j.l) != expect:
                errs.append((i, f"line {j.l} is not the negation of line {j.k} or line {i}"))
        elif isinstance(j, Sub):
            if not _ref_ok(i, j.k):
                errs.append((i, f"sub premise must precede line {i}"))
                continue
            rho = j.mapping()
            bad = [a for a, u in j.rho if not isinstance(u, Const)]
            if mode == "sf01" and bad:
                errs.append((i, f"substitution image of {', '.join(bad)} is not a unit; only "
                                "0/1 images are allowed here (general substitution Frege "
                                "proofs are p-equivalent to unit-substitution ones)"))
                continue
            if std_substitute(rho, p.formula(j.k)) != P:
                errs.append((i, f"not the substitution instance of line {j.k}"))
    return FregeReport(not errs, errs)


# ---------------------------------------------------------------- enumeration

@dataclass(frozen=True)
class VarEnumeration:
    atoms: tuple
    xs: tuple  # ((x_j, ~x_j), ...)

    @property
    def n(self):
        return len(self.atoms)

    def index(self, atom):
        return self.atoms.index(atom) + 1

    def var_for(self, atom, negated=False):
        x, xb = self.xs[self.index(atom) - 1]
        return xb if negated else x

    def literal_of(self, name):
        """(atom, negated) for an enumeration variable, or None."""
        for a, (x, xb) in zip(self.atoms, self.xs):
            if name == x:
                return a, False
            if name == xb:
                return a, True
        return None

    def as_dict(self):
        out = {}
        for a, (x, xb) in zip(self.atoms, self.xs):
            out[a], out["~" + a] = x, xb
        return out


def proof_atoms(p: FregeProof):
    out = []
    for ln in p.lines:
        std_atoms(ln.formula, out)
    return out


def enumerate_vars(p, names=None) -> VarEnumeration:
    """First-occurrence enumeration of the atoms, each paired with (x, ~x)."""
    atoms = proof_atoms(p) if isinstance(p, FregeProof) else list(p)
    if names is None:
        names = [f"x{j}" for j in range(1, len(atoms) + 1)]
    if len(names) < len(atoms):
        raise FregeError("not enough variable names")
    return VarEnumeration(tuple(atoms), tuple((x, "~" + x) for x in names[:len(atoms)]))


# ---------------------------------------------------------------- translations

def open_translation(P, enum: VarEnumeration):
    if isinstance(P, Const):
        return Unit(P.value)
    if isinstance(P, Atom):
        return Var(enum.var_for(P.name))
    if isinstance(P, NegAtom):
        return Var(enum.var_for(P.name, True))
    return Bin(P.conn, open_translation(P.left, enum), open_translation(P.right, enum))


def translate_line(P, enum: VarEnumeration, fresh: F.Fresh | None = None):
    """(open translation, eta, factorised A); pass a shared Fresh to keep lines disjoint."""
    q = open_translation(P, enum)
    eta, a = F.factorise(q, fresh or F.Fresh())
    return q, eta, a


def close_translation(q, enum: VarEnumeration, eta=None):
    if eta is not None:
        q = F.substitute(eta, q)
    if isinstance(q, Unit):
        return Const(q.value)
    if isinstance(q, Var):
        lit = enum.literal_of(q.name)
        if lit is None:
            raise FregeError(f"{q.name} is not an enumeration variable")
        return NegAtom(lit[0]) if lit[1] else Atom(lit[0])
    if isinstance(q, Bin) and not F.is_atom(q.conn):
        return SBin(q.conn, close_translation(q.left, enum), close_translation(q.right, enum))
    raise FregeError(f"not an open translation: {F.show(q)}")


# ---------------------------------------------------------------- semantic oracle

TAUTOLOGICAL, CONTRADICTORY, NEITHER = "tautological", "contradictory", "neither"


def _eval(f, env):
    if isinstance(f, Unit):
        return f.value
    if isinstance(f, Var):
        return env[f.name]
    l, r = _eval(f.left, env), _eval(f.right, env)
    return (l & r) if f.conn == AND else (l | r)


def brute_force_semantic(f, enum: VarEnumeration, budget=10**6):
    """Classify f over every dualising assignment of the enumeration pairs, with
    any other free variables ranging over all unit values."""
    if enum.n > MAX_ATOMS:
        raise BudgetExceeded(f"{enum.n} atoms exceeds the brute-force limit of {MAX_ATOMS}")
    flat = F.actualize(f, budget)
    pair_vars = {v for x in enum.xs for v in x}
    others = sorted(F.free_vars(flat) - pair_vars)
    if enum.n + len(others) > MAX_ATOMS:
        raise BudgetExceeded("too many free variables for brute force")
    has_atoms = bool(F.atoms(flat))
    seen = set()
    for bits in itertools.product((0, 1), repeat=enum.n + len(others)):
        env = {}
        for (x, xb), b in zip(enum.xs, bits):
            env[x], env[xb] = b, 1 - b
        env.update(zip(others, bits[enum.n:]))
        if has_atoms:
            g = F.substitute({k: Unit(b) for k, b in env.items()}, flat)
            val = interpret_formula(g, budget)
            seen.add(1 if val == S1 else 0 if val == Const(0) else None)
        else:
            seen.add(_eval(flat, env))
        if len(seen) > 1:
            return NEITHER
    if seen == {1}:
        return TAUTOLOGICAL
    if seen == {0}:
        return CONTRADICTORY
    return NEITHER

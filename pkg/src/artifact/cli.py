"""Command-line front end."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import compiler as K
from . import constructions as C
from . import derivation as D
from . import formula as F
from . import frege as G
from . import interpret as I

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_BUDGET = 0, 1, 2, 3


def _read(path):
    return Path(path).read_text()


_DER_HEADS = ("leaf", "and", "or", "atom", "esub", "gsub", "inf", "exp")


def _load_sa(path):
    """A derivation (S-expression) or a bare formula."""
    text = _read(path).strip()
    words = text[1:].split(None, 1) if text.startswith("(") else []
    if words and words[0] in _DER_HEADS:
        return D.parse_derivation(text)
    return F.parse(text)


def _emit(obj, as_json, text=None):
    if as_json or text is None:
        print(json.dumps(obj, indent=2))
    else:
        print(text)


def cmd_check_sa(a):
    d = D.parse_derivation(_read(a.file))
    rep = D.check_derivation(d, D.RULESETS[a.system])
    print(rep.to_json(indent=2))
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_check_sks(a):
    d = I.parse_std_derivation(_read(a.file))
    rep = I.check_sks(d)
    print(rep.to_json(indent=2))
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_check_frege(a):
    p = G.parse_proof(_read(a.file))
    rep = G.check_frege(p, a.mode)
    out = rep.as_dict()
    _emit(out, a.json, "ok" if rep.ok else "\n".join(f"line {i}: {m}" for i, m in rep.errors))
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_interpret(a):
    x = _load_sa(a.file)
    if isinstance(x, (D.Leaf, D.DBin, D.DESub, D.DGSub, D.Inf, D.Exp)):
        res = I.interpret(x, a.budget, literal=a.literal)
        if res is None:
            print("undefined", file=sys.stderr)
            return EXIT_FAIL
        text = I.std_to_sexpr(res)
        _emit({"interpretation": text, "sks": I.check_sks(res).ok if not I.is_formula(res) else True},
              a.json, text)
        return EXIT_OK
    res = I.interpret_formula(x, a.budget)
    if res is None:
        print("undefined", file=sys.stderr)
        return EXIT_FAIL
    _emit({"interpretation": I.std_show(res)}, a.json, I.std_show(res))
    return EXIT_OK


def cmd_project(a):
    x = _load_sa(a.file)
    try:
        if isinstance(x, (D.Leaf, D.DBin, D.DESub, D.DGSub, D.Inf, D.Exp)):
            text = D.show_derivation(C.project(x, a.atom, a.side))
        else:
            text = F.show(C.project_formula(x, a.atom, a.side))
    except C.NotFlat as e:
        print(f"projection needs flat, substitution-free input: {e}", file=sys.stderr)
        return EXIT_FAIL
    _emit({"projection": text}, a.json, text)
    return EXIT_OK


def cmd_compile(a):
    p = G.parse_proof(_read(a.file))
    enum = G.enumerate_vars(p, a.names.split(",")) if a.names else None
    try:
        r = K.compile_proof(p, enum, True, a.budget)
    except K.CompileError as e:
        print(f"compile failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    rec = r.record()
    if a.out:
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(a.file).stem
        (out / f"{stem}.xi.sad").write_text(D.show_derivation(r.xi) + "\n")
        (out / f"{stem}.verify.json").write_text(json.dumps(rec, indent=2) + "\n")
        (out / f"{stem}.stats.csv").write_text(_csv([r.stats]))
    text = "\n".join([f"{k}: {v}" for k, v in r.verified.items()]
                     + [f"conclusion: {rec['conclusion']}", _csv([r.stats]).rstrip()])
    _emit(rec, a.json, text)
    return EXIT_OK if all(r.verified.values()) else EXIT_FAIL


STAT_COLS = ("family", "h", "w", "n", "width", "height", "size", "cutFree", "verified",
             "heightOk", "widthOk")


def _csv(rows, cols=None):
    cols = cols or [c for c in STAT_COLS if c in rows[0]]
    lines = [",".join(cols)]
    lines += [",".join(str(r.get(c, "")) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


def _family_member(args):
    name, h, w, budget = args
    p = K.FAMILIES[name](h, w)
    r = K.compile_proof(p, None, True, budget)
    s = dict(r.stats, family=name, param_w=w, verified=all(r.verified.values()))
    return s


def cmd_stats(a):
    name, params = K.parse_family(a.family)
    jobs = [(name, h, w, a.budget) for h, w in params]
    if a.jobs > 1:
        with ProcessPoolExecutor(a.jobs) as ex:
            rows = list(ex.map(_family_member, jobs))
    else:
        rows = [_family_member(j) for j in jobs]
    rep = K.size_report(rows)
    ok = all(r["verified"] and r["heightOk"] and r["widthOk"] for r in rep["rows"])
    _emit(rep, a.json, _csv(rep["rows"]) + "slopes vs h: " + json.dumps(rep["slopes"]))
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    ap = argparse.ArgumentParser(prog="artifact", description="Subatomic proof toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, file=True):
        sp = sub.add_parser(name)
        if file:
            sp.add_argument("file")
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--budget", type=int, default=10**6)
        sp.set_defaults(fn=fn)
        return sp

    add("check-sa", cmd_check_sa).add_argument("--system", choices=sorted(D.RULESETS), default="tbls")
    add("check-sks", cmd_check_sks)
    add("check-frege", cmd_check_frege).add_argument("--mode", choices=("sf01", "sf"), default="sf01")
    add("interpret", cmd_interpret).add_argument("--literal", action="store_true")
    sp = add("project", cmd_project)
    sp.add_argument("--atom", required=True)
    sp.add_argument("--side", choices=("left", "right"), required=True)
    sp = add("compile", cmd_compile)
    sp.add_argument("--mode", choices=("sf01",), default="sf01")
    sp.add_argument("--names", help="comma-separated enumeration variable names")
    sp.add_argument("--out", help="directory for the derivation, record and stats files")
    sp = add("stats", cmd_stats, file=False)
    sp.add_argument("--family", required=True, help="e.g. subchain:h=2..16,w=8")
    sp.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    try:
        return a.fn(a)
    except (F.ParseError, G.FregeParseError, ValueError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except F.BudgetExceeded as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

"""JSON schema ``tkindex/1``: problem files, generalized characters, classes and verdicts.

Rationals are written as ``"p/q"`` strings (integers as plain ``"p"``).
Weights are ``{"free": [...], "torsion": [...]}``; a bare list is accepted on
input as a torsion-free shorthand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .charring import FiniteCharacter
from .errors import InvariantError, SchemaError, TKError
from .genchar import (
    GenChar,
    PolarizedTerm,
    Verdict,
    delta_series,
    index_thom,
    induction,
    mul_finite,
    mul_genchar,
    polarized_inverse,
    sigma_dbar_index,
)
from .lattice import CharacterGroup, Flag, GModule, PolarizingVector, Subspace, Weight, quotient_by_character

SCHEMA = "tkindex/1"


# ------------------------------------------------------------------ atoms


def rat_to_json(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rat_from_json(s, where):
    if isinstance(s, bool) or not isinstance(s, (int, str)):
        raise SchemaError("expected integer or 'p/q' string", location=where)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise SchemaError("malformed rational", location=where, value=s) from None


def group_to_json(G):
    return {"rank": G.free_rank, "torsion": list(G.torsion_orders)}


def group_from_json(obj, where="group"):
    _require_dict(obj, where, ("rank",))
    rank, tors = obj["rank"], obj.get("torsion", [])
    if not isinstance(rank, int) or not isinstance(tors, list) or not all(isinstance(d, int) for d in tors):
        raise SchemaError("group needs integer rank and integer torsion list", location=where)
    return CharacterGroup(rank, tuple(tors))


def weight_to_json(w):
    return {"free": list(w.free), "torsion": list(w.torsion)}


def weight_from_json(obj, G, where):
    if isinstance(obj, list):
        obj = {"free": obj}
    _require_dict(obj, where, ("free",))
    free, tors = obj["free"], obj.get("torsion", [0] * len(G.torsion_orders))
    if not _intlist(free) or not _intlist(tors):
        raise SchemaError("weight entries must be integer lists", location=where)
    w = Weight(tuple(free), tuple(tors))
    try:
        return G.check(w)
    except InvariantError as e:
        e.context["location"] = where
        raise


def beta_to_json(b):
    return [rat_to_json(c) for c in b.coords]


def beta_from_json(obj, n, where):
    if isinstance(obj, (int, str)):
        obj = [obj]
    if not isinstance(obj, list) or len(obj) != n:
        raise SchemaError("polarizing vector must have one entry per free coordinate", location=where)
    return PolarizingVector(tuple(rat_from_json(c, where) for c in obj))


def finite_to_json(p):
    return [{"weight": weight_to_json(w), "coeff": c} for w, c in p.items()]


def finite_from_json(obj, G, where):
    if not isinstance(obj, list):
        raise SchemaError("finite character must be a list of {weight, coeff}", location=where)
    out = FiniteCharacter.zero(G)
    for i, item in enumerate(obj):
        _require_dict(item, f"{where}[{i}]", ("weight", "coeff"))
        if not isinstance(item["coeff"], int):
            raise SchemaError("coefficient must be an integer", location=f"{where}[{i}]")
        out = out + FiniteCharacter.monomial(G, weight_from_json(item["weight"], G, f"{where}[{i}].weight"), item["coeff"])
    return out


def module_to_json(V):
    return {"weights": [weight_to_json(w) for w in V.weights], "trivial_real_dim": V.trivial_real_dim}


def module_from_json(obj, G, where):
    _require_dict(obj, where, ("weights",))
    ws = obj["weights"]
    if not isinstance(ws, list):
        raise SchemaError("weights must be a list", location=where)
    trd = obj.get("trivial_real_dim", 0)
    if not isinstance(trd, int):
        raise SchemaError("trivial_real_dim must be an integer", location=where)
    weights = tuple(weight_from_json(w, G, f"{where}.weights[{i}]") for i, w in enumerate(ws))
    try:
        return GModule(G, weights, trd)
    except InvariantError as e:
        e.context["location"] = where
        raise


def subspace_to_json(h):
    return {"perp": [list(r) for r in h.perp_basis]}


def subspace_from_json(obj, n, where):
    _require_dict(obj, where, ("perp",))
    rows = obj["perp"]
    if not isinstance(rows, list) or not all(_intlist(r) and len(r) == n for r in rows):
        raise SchemaError("perp must be a list of integer vectors of length rank", location=where)
    return Subspace.from_perp([tuple(r) for r in rows], n)


def genchar_to_json(phi):
    return {
        "group": group_to_json(phi.group),
        "terms": [
            {
                "coeff": t.coeff,
                "numerator": weight_to_json(t.numerator),
                "denominators": [weight_to_json(a) for a in t.denominators],
                "witness": list(t.witness),
            }
            for t in phi.terms
        ],
        "finite_part": finite_to_json(phi.finite_part),
    }


def genchar_from_json(obj, G=None, where="genchar"):
    _require_dict(obj, where, ("terms",))
    if G is None:
        G = group_from_json(obj.get("group"), f"{where}.group")
    terms = []
    for i, t in enumerate(obj["terms"]):
        loc = f"{where}.terms[{i}]"
        _require_dict(t, loc, ("coeff", "numerator", "denominators"))
        terms.append(
            PolarizedTerm(
                t["coeff"],
                weight_from_json(t["numerator"], G, loc + ".numerator"),
                tuple(weight_from_json(a, G, loc + ".denominators") for a in t["denominators"]),
                tuple(t.get("witness", ())),
            )
        )
    return GenChar.from_terms(G, terms, finite_from_json(obj.get("finite_part", []), G, where + ".finite_part"))


def flag_to_json(f):
    return {"blocks": [[weight_to_json(w) for w in b] for b in f.blocks], "betas": [beta_to_json(b) for b in f.betas]}


def flag_from_json(obj, G, where):
    _require_dict(obj, where, ("blocks", "betas"))
    blocks = tuple(tuple(weight_from_json(w, G, where + ".blocks") for w in b) for b in obj["blocks"])
    betas = tuple(beta_from_json(b, G.n, where + ".betas") for b in obj["betas"])
    return Flag(blocks, betas)


def kclass_to_json(k):
    from .ktheory import ThomGen

    combo = []
    for tag, coeff in k.combo:
        tj = {"thom": beta_to_json(tag.gamma)} if isinstance(tag, ThomGen) else {"flag": flag_to_json(tag.flag)}
        combo.append({"tag": tj, "coeff": finite_to_json(coeff)})
    return {"module": module_to_json(k.module), "combo": combo}


def kclass_from_json(obj, G, where="kclass"):
    from .ktheory import FlagGen, KClass, ThomGen

    _require_dict(obj, where, ("module", "combo"))
    V = module_from_json(obj["module"], G, where + ".module")
    combo = []
    for i, item in enumerate(obj["combo"]):
        loc = f"{where}.combo[{i}]"
        _require_dict(item, loc, ("tag", "coeff"))
        tag = item["tag"]
        if "thom" in tag:
            t = ThomGen(beta_from_json(tag["thom"], G.n, loc))
        elif "flag" in tag:
            t = FlagGen(flag_from_json(tag["flag"], G, loc))
        else:
            raise SchemaError("tag must be thom or flag", location=loc)
        combo.append((t, finite_from_json(item["coeff"], G, loc + ".coeff")))
    return KClass(V, tuple(combo))


def verdict_to_json(v: Verdict):
    out = {"verdict": v.kind}
    if v.witness is not None:
        out["witness"] = jsonable(v.witness)
    if v.reason:
        out["reason"] = v.reason
    return out


def jsonable(x):
    """Best-effort JSON rendering of library values for reports."""
    if isinstance(x, Weight):
        return weight_to_json(x)
    if isinstance(x, Subspace):
        return subspace_to_json(x)
    if isinstance(x, PolarizingVector):
        return beta_to_json(x)
    if isinstance(x, Verdict):
        return verdict_to_json(x)
    if isinstance(x, FiniteCharacter):
        return finite_to_json(x)
    if isinstance(x, GModule):
        return module_to_json(x)
    if isinstance(x, CharacterGroup):
        return group_to_json(x)
    if isinstance(x, Flag):
        return flag_to_json(x)
    if isinstance(x, GenChar):
        return genchar_to_json(x)
    if isinstance(x, Fraction):
        return rat_to_json(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


# ------------------------------------------------------------------ expressions

_EXPR_KINDS = (
    "ref",
    "finite",
    "literal",
    "polarized_inverse",
    "index_thom",
    "sigma_dbar",
    "flag",
    "delta",
    "induction",
    "mul_finite",
    "mul",
    "add",
    "neg",
    "scale",
)


def canon_expr(e, G, modules, names, where):
    """Validate an expression tree and return it in canonical form."""
    if not isinstance(e, dict) or len(e) != 1 or next(iter(e)) not in _EXPR_KINDS:
        raise SchemaError(f"expression must be a single-key object with key in {list(_EXPR_KINDS)}", location=where)
    (kind, arg), = e.items()
    loc = f"{where}.{kind}"

    def module_ref(name):
        if name not in modules:
            raise InvariantError("unknown module name", name=name, location=loc)
        return name

    if kind == "ref":
        if arg not in names:
            raise InvariantError("unknown gen_char reference", name=arg, location=loc)
        return {"ref": arg}
    if kind == "finite":
        return {"finite": finite_to_json(finite_from_json(arg, G, loc))}
    if kind == "literal":
        return {"literal": _strip_group(genchar_to_json(genchar_from_json(arg, G, loc)))}
    if kind in ("polarized_inverse", "index_thom", "sigma_dbar"):
        _require_dict(arg, loc, ("module", "beta"))
        return {kind: {"module": module_ref(arg["module"]), "beta": beta_to_json(beta_from_json(arg["beta"], G.n, loc))}}
    if kind == "flag":
        _require_dict(arg, loc, ("module",))
        name = module_ref(arg["module"])
        if "index" in arg:
            if not isinstance(arg["index"], int) or arg["index"] < 0:
                raise SchemaError("flag index must be a nonnegative integer", location=loc)
            return {"flag": {"module": name, "index": arg["index"]}}
        return {"flag": {"module": name, **flag_to_json(flag_from_json(arg, G, loc))}}
    if kind == "delta":
        return {"delta": weight_to_json(weight_from_json(arg, G, loc))}
    if kind == "induction":
        _require_dict(arg, loc, ("chi", "phi"))
        chi = weight_from_json(arg["chi"], G, loc + ".chi")
        H = quotient_by_character(G, chi).target
        return {"induction": {"chi": weight_to_json(chi), "phi": canon_expr(arg["phi"], H, {}, {}, loc + ".phi")}}
    if kind == "mul_finite":
        _require_dict(arg, loc, ("p", "phi"))
        return {"mul_finite": {"p": finite_to_json(finite_from_json(arg["p"], G, loc + ".p")), "phi": canon_expr(arg["phi"], G, modules, names, loc + ".phi")}}
    if kind in ("mul", "add"):
        if not isinstance(arg, list) or not arg:
            raise SchemaError("expected a nonempty list of expressions", location=loc)
        return {kind: [canon_expr(x, G, modules, names, f"{loc}[{i}]") for i, x in enumerate(arg)]}
    if kind == "neg":
        return {"neg": canon_expr(arg, G, modules, names, loc)}
    _require_dict(arg, loc, ("k", "phi"))
    if not isinstance(arg["k"], int):
        raise SchemaError("scale factor must be an integer", location=loc)
    return {"scale": {"k": arg["k"], "phi": canon_expr(arg["phi"], G, modules, names, loc + ".phi")}}


def _strip_group(obj):
    return {k: v for k, v in obj.items() if k != "group"}


def eval_expr(e, G, modules, values):
    """Evaluate a canonical expression tree to a :class:`GenChar`."""
    from .ktheory import flag_generators, flag_index

    (kind, arg), = e.items()
    if kind == "ref":
        return values[arg]
    if kind == "finite":
        return GenChar.finite(finite_from_json(arg, G, kind))
    if kind == "literal":
        return genchar_from_json(arg, G)
    if kind in ("polarized_inverse", "index_thom", "sigma_dbar"):
        V = modules[arg["module"]]
        beta = beta_from_json(arg["beta"], G.n, kind)
        fn = {"polarized_inverse": polarized_inverse, "index_thom": index_thom, "sigma_dbar": sigma_dbar_index}[kind]
        return fn(V, beta)
    if kind == "flag":
        V = modules[arg["module"]]
        if "index" in arg:
            flags = flag_generators(V, limit=arg["index"] + 1)
            if arg["index"] >= len(flags):
                raise InvariantError("module has fewer enumerated flags", index=arg["index"], available=len(flags))
            f = flags[arg["index"]]
        else:
            f = flag_from_json(arg, G, kind)
        return flag_index(V, f)
    if kind == "delta":
        return delta_series(G, weight_from_json(arg, G, kind))
    if kind == "induction":
        q = quotient_by_character(G, weight_from_json(arg["chi"], G, kind))
        return induction(eval_expr(arg["phi"], q.target, {}, {}), q)
    if kind == "mul_finite":
        return mul_finite(finite_from_json(arg["p"], G, kind), eval_expr(arg["phi"], G, modules, values))
    if kind == "mul":
        out = eval_expr(arg[0], G, modules, values)
        for x in arg[1:]:
            out = mul_genchar(out, eval_expr(x, G, modules, values))
        return out
    if kind == "add":
        out = GenChar.zero(G)
        for x in arg:
            out = out + eval_expr(x, G, modules, values)
        return out
    if kind == "neg":
        return -eval_expr(arg, G, modules, values)
    return eval_expr(arg["phi"], G, modules, values).scale(arg["k"])


# ------------------------------------------------------------------ problem files


@dataclass
class ProblemFile:
    group: CharacterGroup
    modules: dict = field(default_factory=dict)
    gen_chars: dict = field(default_factory=dict)
    queries: list = field(default_factory=list)
    def evaluate(self):
        """Evaluate every gen_char, references first."""
        values = {}
        for name in _dependency_order(self.gen_chars):
            values[name] = eval_expr(self.gen_chars[name], self.group, self.modules, values)
        return values


def _refs(e):
    if isinstance(e, dict):
        if set(e) == {"ref"}:
            yield e["ref"]
        else:
            for v in e.values():
                yield from _refs(v)
    elif isinstance(e, list):
        for v in e:
            yield from _refs(v)


def _dependency_order(exprs):
    """Names ordered so that references come before their users; cycles are rejected."""
    order, state = [], {}

    def visit(name, path):
        if state.get(name) == "done":
            return
        if state.get(name) == "open":
            raise InvariantError("cyclic gen_char references", name=name, cycle=" -> ".join(path + [name]))
        state[name] = "open"
        for r in _refs(exprs[name]):
            visit(r, path + [name])
        state[name] = "done"
        order.append(name)

    for name in exprs:
        visit(name, [])
    return order


def parse_problem(source) -> ProblemFile:
    """Parse a problem from a path, a text stream, a JSON string or an already-decoded dict."""
    if isinstance(source, dict):
        obj = source
    else:
        if hasattr(source, "read"):
            text = source.read()
        elif isinstance(source, str) and source.lstrip().startswith("{"):
            text = source
        else:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError("invalid JSON", location=f"line {e.lineno} column {e.colno}") from None
    _require_dict(obj, "$", ("group",))
    version = obj.get("version", SCHEMA)
    if version != SCHEMA:
        raise SchemaError("unsupported schema version", location="$.version", version=version)
    G = group_from_json(obj["group"], "$.group")
    mods = obj.get("modules", {})
    if not isinstance(mods, dict):
        raise SchemaError("modules must be an object", location="$.modules")
    modules = {name: module_from_json(m, G, f"$.modules.{name}") for name, m in mods.items()}
    gcs = obj.get("gen_chars", {})
    if not isinstance(gcs, dict):
        raise SchemaError("gen_chars must be an object", location="$.gen_chars")
    gen_chars = {name: canon_expr(e, G, modules, gcs, f"$.gen_chars.{name}") for name, e in gcs.items()}
    _dependency_order(gen_chars)
    queries = obj.get("queries", [])
    if not isinstance(queries, list) or not all(isinstance(q, dict) and isinstance(q.get("cmd"), str) for q in queries):
        raise SchemaError("queries must be a list of objects with a 'cmd' string", location="$.queries")
    return ProblemFile(G, modules, gen_chars, [dict(q) for q in queries])


def problem_to_json(p: ProblemFile):
    return {
        "version": SCHEMA,
        "group": group_to_json(p.group),
        "modules": {k: module_to_json(v) for k, v in p.modules.items()},
        "gen_chars": dict(p.gen_chars),
        "queries": list(p.queries),
    }


def dumps(obj):
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def error_to_json(e: TKError, query=None):
    out = {"error": e.as_dict()}
    if query is not None:
        out["query"] = query
    return out


# ------------------------------------------------------------------ helpers


def _require_dict(obj, where, keys):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", location=where)
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaError(f"missing field(s) {missing}", location=where)


def _intlist(x):
    return isinstance(x, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in x)

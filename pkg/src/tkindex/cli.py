"""``tkindex`` command-line front end.

Exit status: 0 ok, 2 parse error, 3 computation error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .charring import render_auto
from .errors import InvariantError, SchemaError, TKError
from .genchar import Window, coefficient_at, index_thom, induction, invert_induction, truncate
from .ktheory import decomposition_map, flag_generators, flag_index, in_DM, in_F, restrict_index
from .lattice import CharacterGroup, GModule, Subspace, delta_set, quotient_by_character
from .serialize import (
    ProblemFile,
    beta_from_json,
    canon_expr,
    dumps,
    eval_expr,
    flag_to_json,
    genchar_to_json,
    jsonable,
    parse_problem,
    subspace_from_json,
    subspace_to_json,
    verdict_to_json,
    weight_from_json,
    weight_to_json,
)

EXIT_OK, EXIT_PARSE, EXIT_COMPUTE, EXIT_VERIFY = 0, 2, 3, 4
WINDOW_ENV = "TKINDEX_WINDOW_DEFAULT"
FALLBACK_WINDOW = "-12..12"
_VALUE_OPTS = {"--window", "--beta", "--at", "--chi", "--assign", "--gamma"}


class Context:
    """Problem data plus lazily evaluated gen_chars."""

    def __init__(self, problem: ProblemFile, window=None, seed=0, limit=None):
        self.problem = problem
        self.window = window
        self.seed = seed
        self.limit = limit
        self._values = None

    @property
    def group(self):
        return self.problem.group

    @property
    def values(self):
        if self._values is None:
            self._values = self.problem.evaluate()
        return self._values

    def module(self, ref, where="module"):
        if isinstance(ref, str) and ref in self.problem.modules:
            return self.problem.modules[ref]
        if isinstance(ref, str):
            return _inline_module(ref, self.group, where)
        raise SchemaError("module reference must be a name or inline weight list", location=where)

    def genchar(self, ref, group=None, where="phi"):
        G = group or self.group
        if isinstance(ref, str) and group is None and ref in self.problem.gen_chars:
            return self.values[ref]
        if isinstance(ref, str):
            try:
                ref = json.loads(ref)
            except json.JSONDecodeError:
                raise InvariantError("unknown gen_char name", name=ref, location=where) from None
        names = self.problem.gen_chars if group is None else {}
        mods = self.problem.modules if group is None else {}
        e = canon_expr(ref, G, mods, names, where)
        return eval_expr(e, G, mods, self.values if group is None else {})

    def window_for(self, query, n):
        text = query.get("window") or self.window or os.environ.get(WINDOW_ENV) or FALLBACK_WINDOW
        try:
            return Window.parse(text, n)
        except (ValueError, IndexError):
            raise SchemaError("malformed window", location="window", value=text) from None


def _inline_module(text, G, where):
    """``"1,0;0,1;1,1"`` (``|t`` suffix for torsion, ``+k`` suffix for trivial real dim)."""
    trd = 0
    if "+" in text:
        text, extra = text.rsplit("+", 1)
        trd = int(extra)
    weights = []
    for chunk in filter(None, text.split(";")):
        free, _, tors = chunk.partition("|")
        try:
            f = [int(x) for x in free.split(",") if x.strip()]
            t = [int(x) for x in tors.split(",") if x.strip()] if tors else [0] * len(G.torsion_orders)
        except ValueError:
            raise SchemaError("malformed inline module", location=where, value=text) from None
        weights.append(weight_from_json({"free": f, "torsion": t}, G, where))
    return GModule(G, tuple(weights), trd)


def _weight_arg(value, G, where):
    if isinstance(value, str):
        free, _, tors = value.partition("|")
        value = {"free": [int(x) for x in free.split(",") if x.strip()]}
        if tors:
            value["torsion"] = [int(x) for x in tors.split(",")]
    return weight_from_json(value, G, where)


def _beta_arg(value, n, where):
    if isinstance(value, str):
        value = value.split(",")
    return beta_from_json(value, n, where)


def _subspace_arg(value, n, where):
    """``"g"`` for the full algebra; else rows ``"1,0;0,1"`` of the annihilator."""
    if isinstance(value, dict):
        return subspace_from_json(value, n, where)
    if value in ("", "g"):
        return Subspace.full(n)
    rows = [[int(x) for x in r.split(",")] for r in value.split(";")]
    return subspace_from_json({"perp": rows}, n, where)


# ------------------------------------------------------------------ execution


def _series_result(phi, w):
    tr = truncate(phi, w)
    obj = {"window": str(w), "truncation": jsonable(tr), "series": genchar_to_json(phi)}
    return obj, render_auto(tr)


def _verdict_text(v):
    out = v.kind
    if isinstance(v.witness, dict) and "at" in v.witness:
        out += f" at h^perp={list(map(list, v.witness['at'].perp_basis))} ({v.witness['verdict'].kind})"
    elif v.witness is not None:
        out += f" witness={jsonable(v.witness)}"
    return out


def execute(ctx: Context, q: dict):
    """Run one query; returns ``(json_obj, text, failed_verification)``."""
    cmd = q["cmd"]
    G = ctx.group
    if cmd == "delta":
        V = ctx.module(q["module"])
        ds = delta_set(V)
        return {"stabilizers": [dict(subspace_to_json(h), dim=h.dim) for h in ds]}, "\n".join(
            f"dim {h.dim}: perp {list(map(list, h.perp_basis))}" for h in ds
        ), False
    if cmd == "index-thom":
        V = ctx.module(q["module"])
        phi = index_thom(V, _beta_arg(q["beta"], G.n, "beta"))
        obj, text = _series_result(phi, ctx.window_for(q, G.n))
        return obj, text, False
    if cmd == "index-flag":
        V = ctx.module(q["module"])
        flags = flag_generators(V, ctx.limit or q.get("limit", 16))
        pick = q.get("flag")
        chosen = list(enumerate(flags)) if pick is None else [(int(pick), flags[int(pick)])]
        w = ctx.window_for(q, G.n)
        objs, texts = [], []
        for k, f in chosen:
            obj, text = _series_result(flag_index(V, f), w)
            objs.append({"flag": k, "data": flag_to_json(f), **obj})
            texts.append(f"flag {k}: {text}")
        return {"flags": objs}, "\n".join(texts), False
    if cmd == "coeff":
        phi = ctx.genchar(q["phi"])
        c = coefficient_at(phi, _weight_arg(q["at"], G, "at"))
        return {"coefficient": c}, str(c), False
    if cmd == "truncate":
        obj, text = _series_result(ctx.genchar(q["phi"]), ctx.window_for(q, G.n))
        return obj, text, False
    if cmd in ("check-dm", "check-f"):
        V = ctx.module(q["module"])
        v = (in_DM if cmd == "check-dm" else in_F)(ctx.genchar(q["phi"]), V)
        return verdict_to_json(v), _verdict_text(v), False
    if cmd == "decompose":
        V = ctx.module(q["module"])
        assigns = {}
        for item in q.get("assignments", []):
            h = _subspace_arg(item["perp"] if isinstance(item, dict) else item[0], G.n, "assignments")
            assigns[h] = ctx.genchar(item["phi"] if isinstance(item, dict) else item[1])
        gammas = {}
        for item in q.get("gammas", []):
            h = _subspace_arg(item["perp"] if isinstance(item, dict) else item[0], G.n, "gammas")
            gammas[h] = _beta_arg(item["beta"] if isinstance(item, dict) else item[1], G.n, "gammas")
        phi = decomposition_map(assigns, V, gammas)
        obj, text = _series_result(phi, ctx.window_for(q, G.n))
        v = in_F(phi, V)
        obj["in_F"] = verdict_to_json(v)
        return obj, f"{text}\nin_F: {_verdict_text(v)}", False
    if cmd == "restrict":
        V = ctx.module(q["module"])
        W = ctx.module(q["submodule"], "submodule")
        obj, text = _series_result(restrict_index(ctx.genchar(q["phi"]), V, W), ctx.window_for(q, G.n))
        return obj, text, False
    if cmd == "induce":
        chi = _weight_arg(q["chi"], G, "chi")
        qt = quotient_by_character(G, chi)
        from .serialize import group_to_json

        if q.get("invert"):
            psi = invert_induction(ctx.genchar(q["phi"]), qt)
            obj, text = _series_result(psi, ctx.window_for(q, qt.target.n))
            obj["quotient_group"] = group_to_json(qt.target)
            return obj, text, False
        phi = ctx.genchar(q["phi"], group=qt.target)
        obj, text = _series_result(induction(phi, qt), ctx.window_for(q, G.n))
        obj["quotient_group"] = group_to_json(qt.target)
        return obj, text, False
    if cmd == "verify":
        return _run_verify(ctx, q)
    raise SchemaError("unknown command", location="cmd", value=cmd)


def _run_verify(ctx, q):
    from . import verify

    suite = q.get("suite")
    if suite != "all" and suite not in verify.SUITES:
        raise SchemaError(f"unknown suite; choose from {list(verify.SUITES)}", location="suite", value=suite)
    seed = q.get("seed", ctx.seed)
    chi = None
    if q.get("chi") is not None:
        raw = q["chi"]
        rank = len(str(raw).split("|")[0].split(",")) if isinstance(raw, str) else len(raw.get("free", raw) if isinstance(raw, dict) else raw)
        chi = _weight_arg(raw, CharacterGroup(rank), "chi")
    module = ctx.module(q["module"]) if q.get("module") is not None else None
    window = None
    if q.get("window") or ctx.window:
        window = max(abs(int(x)) for x in (q.get("window") or ctx.window).split(",")[0].split(".."))
    if suite == "all":
        reports = verify.run_battery(seed)
    else:
        reports = verify.run_suite(
            suite,
            seed=seed,
            trials=q.get("trials"),
            window=window,
            chi=chi,
            module=module,
            limit=ctx.limit or q.get("limit"),
        )
    lines = [line for r in reports for line in r.lines(timing=q.get("timing", False))]
    text = "\n".join(f"{r.suite} {c['check']}: {c['verdict']}" for r in reports for c in r.checks)
    return {"reports": [json.loads(line) for line in lines], "lines": lines}, text, verify.any_fail(reports)


# ------------------------------------------------------------------ argument parsing


def _common(p):
    p.add_argument("--problem", help="problem file (schema tkindex/1)")
    p.add_argument("--window", help="lo..hi[,lo..hi...]; default from $" + WINDOW_ENV)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int)
    p.add_argument("--parallel", action="store_true", help="evaluate independent queries concurrently")
    p.add_argument("--timing", action="store_true", help="include per-instance seconds in verify reports")


def build_parser():
    ap = argparse.ArgumentParser(prog="tkindex", description="Indices of transversally elliptic generator classes.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add(name, *positionals, **opts):
        p = sub.add_parser(name)
        for pos in positionals:
            p.add_argument(pos)
        for opt, kw in opts.items():
            p.add_argument("--" + opt.replace("_", "-"), **kw)
        _common(p)
        return p

    add("run", "file")
    add("delta", "module")
    add("index-thom", "module", beta={"required": True})
    add("index-flag", "module", flag={"type": int})
    add("coeff", "phi", at={"required": True})
    add("truncate", "phi")
    add("check-dm", "module", "phi")
    add("check-f", "module", "phi")
    add("decompose", "module", assign={"action": "append", "default": [], "help": "PERP=PHI"}, gamma={"action": "append", "default": [], "help": "PERP=BETA"})
    add("restrict", "phi", "module", "submodule")
    add("induce", "phi", chi={"required": True}, invert={"action": "store_true"})
    add("verify", "suite", chi={}, trials={"type": int}, module={})
    return ap


def _glue_values(argv):
    """Join ``--opt -5..5`` into ``--opt=-5..5`` so negative ranges are not read as flags."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def _query_from_args(args):
    q = {"cmd": args.cmd}
    for key in ("module", "phi", "beta", "at", "flag", "submodule", "chi", "suite", "trials"):
        val = getattr(args, key, None)
        if val is not None:
            q[key] = val
    if args.window:
        q["window"] = args.window
    if args.cmd == "decompose":
        q["assignments"] = [dict(zip(("perp", "phi"), a.split("=", 1))) for a in args.assign]
        q["gammas"] = [dict(zip(("perp", "beta"), g.split("=", 1))) for g in args.gamma]
    if args.cmd == "induce":
        q["invert"] = args.invert
    if args.cmd == "verify":
        q["seed"] = args.seed
        q["timing"] = args.timing
    return q


def _default_problem(args):
    """Problem for ad-hoc commands without ``--problem``: torus rank inferred from inline weights."""
    probe = args.module if getattr(args, "module", None) else None
    rank = 1
    if probe:
        first = probe.split("+")[0].split(";")[0].split("|")[0]
        rank = len([x for x in first.split(",") if x.strip()]) or 1
    return ProblemFile(CharacterGroup(rank))


def main(argv=None, out=None):
    out = out or sys.stdout
    argv = _glue_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    try:
        if args.cmd == "run":
            problem = parse_problem(args.file)
            queries = problem.queries
        else:
            problem = parse_problem(args.problem) if args.problem else _default_problem(args)
            queries = [_query_from_args(args)]
    except (SchemaError, InvariantError) as e:
        _emit_error(out, args, e, None)
        return EXIT_PARSE
    except OSError as e:
        _emit_error(out, args, SchemaError(str(e), location="file"), None)
        return EXIT_PARSE
    ctx = Context(problem, args.window, args.seed, args.limit)

    def job(iq):
        i, q = iq
        try:
            return i, q, execute(ctx, q), None
        except TKError as e:
            return i, q, None, e
        except (KeyError, ValueError, IndexError, TypeError) as e:
            return i, q, None, SchemaError(f"malformed query: {e}", location=f"queries[{i}]")

    if args.parallel and len(queries) > 1:
        ctx.values  # evaluate shared definitions once before fanning out
        with ThreadPoolExecutor() as ex:
            results = list(ex.map(job, enumerate(queries)))
    else:
        results = [job(iq) for iq in enumerate(queries)]

    status = EXIT_OK
    for i, q, res, err in results:
        if err is not None:
            _emit_error(out, args, err, i)
            if isinstance(err, SchemaError):
                status = EXIT_PARSE
            elif status != EXIT_PARSE:
                status = EXIT_COMPUTE
            continue
        obj, text, failed = res
        if failed and status == EXIT_OK:
            status = EXIT_VERIFY
        if args.format == "json":
            if q["cmd"] == "verify":
                for line in obj["lines"]:
                    out.write(line + "\n")
            else:
                out.write(dumps({"query": i, "cmd": q["cmd"], "result": jsonable(obj)}) + "\n")
        else:
            out.write(text + "\n")
    return status


def _emit_error(out, args, err, index):
    payload = {"error": err.as_dict()}
    if index is not None:
        payload["query"] = index
    if getattr(args, "format", "text") == "json":
        out.write(dumps(payload) + "\n")
    else:
        where = f"query {index}: " if index is not None else ""
        sys.stderr.write(f"error: {where}{err.code}: {err}\n")


if __name__ == "__main__":
    sys.exit(main())

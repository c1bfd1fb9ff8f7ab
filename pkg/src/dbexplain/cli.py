"""Command-line front end.  Every command prints one JSON report (or program
text for ``emit-asp``).  Exit status: 0 on success, 1 on a domain error,
2 on a usage error."""
import argparse
import json
import os
import sys
from decimal import Decimal, localcontext
from fractions import Fraction

from . import asp, causality, classifier, repairs, scores
from .errors import DBExplainError, PreconditionError
from .query import CQ, UCQ, DenialConstraint, InclusionDependency, parse
from .relational import eval_query, load_database

DATA_ENV = "DBEXPLAIN_DATA"


class _Usage(Exception):
    pass


def _rational(x, decimal=False):
    if x is None:
        return None
    x = Fraction(x)
    if not decimal:
        return f"{x.numerator}/{x.denominator}"
    with localcontext() as ctx:
        ctx.prec = 28
        return str((Decimal(x.numerator) / Decimal(x.denominator)).normalize())


def _read(path):
    with open(path) as fh:
        return fh.read()


def _db(args):
    data = args.data or os.environ.get(DATA_ENV)
    if not data:
        raise _Usage(f"--data is required (or set {DATA_ENV})")
    return load_database(data)


def _query(args, boolean=True):
    if not args.query:
        raise _Usage("--query is required")
    items = [x for x in parse(_read(args.query)) if isinstance(x, (CQ, UCQ))]
    if args.name:
        items = [x for x in items if x.name == args.name]
    if not items:
        raise _Usage(f"no query{' named ' + args.name if args.name else ''} in {args.query}")
    q = items[0]
    if args.answer is not None:
        q = q.instantiate(tuple(v.strip() for v in args.answer.split(",")) if args.answer else ())
        if q is None:
            raise PreconditionError(f"answer {args.answer} does not match the query head", "cli")
    elif boolean and not q.is_boolean:
        raise _Usage(f"query {q.name} has free variables; pass --answer")
    return q


def _constraints(path, kinds=(DenialConstraint,)):
    items = parse(_read(path)) if path else []
    bad = [x for x in items if not isinstance(x, kinds)]
    if bad:
        raise PreconditionError(f"{path}: unexpected {type(bad[0]).__name__}", "cli")
    return items


def _dcs(args):
    if not args.dcs:
        raise _Usage("--dcs is required")
    return _constraints(args.dcs)


def _classifier(args):
    if bool(args.tree) == bool(args.labels):
        raise _Usage("give exactly one of --tree or --labels")
    c = classifier.DecisionTree.from_json(args.tree) if args.tree else classifier.LabelTable.from_csv(args.labels)
    if not args.entity:
        raise _Usage("--entity is required")
    return c, c.space.entity(args.entity)


def _dist(args, space):
    kind = args.dist.upper()
    if kind == classifier.UNIFORM:
        return classifier.Distribution()
    if not args.sample:
        raise _Usage(f"--sample is required for the {args.dist} distribution")
    return classifier.Distribution.from_csv(kind, args.sample, space)


def _feature(args):
    if not args.feature:
        raise _Usage("--feature is required")
    return args.feature


def _tid(args):
    if args.tid is None:
        raise _Usage("--tid is required")
    return args.tid


# commands


def cmd_ingest_check(args, r):
    db = _db(args)
    return {
        "size": db.size,
        "relations": {rel.name: {"arity": rel.arity, "tuples": len(rel)} for rel in db.relations.values()},
        "tids": list(db.tids),
    }


def cmd_query(args, r):
    db = _db(args)
    q = _query(args, boolean=False)
    res = eval_query(db, q)
    if q.is_boolean:
        return {"query": q.name, "result": res}
    return {"query": q.name, "answers": sorted(list(a) for a in res)}


def _cause_json(rep, db, r):
    out = rep.to_json(db)
    out["responsibility"] = r(rep.responsibility)
    return out


def cmd_causes(args, r):
    db = _db(args)
    q = _query(args)
    return {"query": q.name, "causes": [_cause_json(c, db, r) for c in causality.actual_causes(db, q)]}


def cmd_resp(args, r):
    db = _db(args)
    return _cause_json(causality.cause_report(db, _query(args), _tid(args)), db, r)


def cmd_attr_causes(args, r):
    db = _db(args)
    q = _query(args)
    return {"query": q.name, "causes": [_cause_json(c, db, r) for c in causality.attr_causes(db, q)]}


def cmd_causes_ics(args, r):
    db = _db(args)
    q = _query(args)
    hard = _constraints(args.ics, (DenialConstraint, InclusionDependency))
    return {"query": q.name, "causes": [_cause_json(c, db, r) for c in causality.causes_under_ics(db, q, hard)]}


def _prob(args):
    try:
        return scores.TupleProbability(default=Fraction(args.p))
    except (ValueError, ZeroDivisionError) as exc:
        raise _Usage(f"bad probability {args.p!r}: {exc}") from None


def cmd_causal_effect(args, r):
    db = _db(args)
    tid = _tid(args)
    return {"tid": tid, "causal_effect": r(scores.causal_effect(db, _query(args), tid, _prob(args)))}


def _score_report(args, r, tid, db, q):
    hier = scores.hierarchy_flag(q)
    if args.sampled:
        if args.seed is None:
            raise _Usage("--seed is required with --sampled")
        est = scores.shapley_sampled(db, q, tid, Fraction(args.eps), Fraction(args.delta), args.seed)
        return {
            "tid": tid, "shapley": r(est.estimate), "banzhaf": None, "causal_effect": None,
            "hierarchical": hier, "method": "sampled", "samples": est.samples,
            "guarantee": f"additive: |error| <= {args.eps} with probability >= 1 - {args.delta}",
        }
    return {
        "tid": tid, "shapley": r(scores.shapley(db, q, tid)), "banzhaf": r(scores.banzhaf(db, q, tid)),
        "causal_effect": r(scores.causal_effect(db, q, tid)), "hierarchical": hier,
        "method": "exact", "samples": None,
    }


def _players(args, db, q):
    if args.tid is not None:
        return [args.tid]
    if args.support_only:
        return scores.lineage(db, q).variables
    return list(db.tids)


def cmd_shapley(args, r):
    db = _db(args)
    q = _query(args)
    reports = [_score_report(args, r, t, db, q) for t in _players(args, db, q)]
    return reports[0] if args.tid is not None else {"query": q.name, "scores": reports}


def cmd_banzhaf(args, r):
    args.sampled = False
    return cmd_shapley(args, r)


def cmd_inc_degree(args, r):
    return {"inc_degree": r(repairs.inc_degree(_db(args), _dcs(args)).value)}


def cmd_repairs(args, r):
    db, dcs = _db(args), _dcs(args)
    if args.attr:
        sem = repairs.CARDINALITY if args.semantics == "C" else repairs.SUBSET
        return {"semantics": sem, "interventions": [i.to_json() for i in repairs.attr_repairs(db, dcs, sem)]}
    found = repairs.c_repairs(db, dcs) if args.semantics == "C" else repairs.s_repairs(db, dcs)
    return {"semantics": "C" if args.semantics == "C" else "S", "repairs": [x.to_json() for x in found]}


def cmd_xresp(args, r):
    c, e = _classifier(args)
    res = classifier.x_resp(c, e, _feature(args), detail=True)
    return {"feature": args.feature, "x_resp": r(res.value), "contingency": res.contingency, "flip_value": res.flip_value}


def cmd_counter(args, r):
    c, e = _classifier(args)
    return {"feature": args.feature, "counter": r(classifier.counter_score(c, e, _feature(args), _dist(args, c.space)))}


def cmd_resp_score(args, r):
    c, e = _classifier(args)
    res = classifier.resp_score(
        c, e, _feature(args), _dist(args, c.space), args.max_contingency, args.exclude_original
    )
    return {"feature": args.feature, "resp": r(res.value), "contingency": list(res.contingency), "values": list(res.values)}


def cmd_shap(args, r):
    c, e = _classifier(args)
    dist = _dist(args, c.space)
    if args.feature:
        return {"feature": args.feature, "shap": r(classifier.shap_score(c, e, args.feature, dist))}
    return {"shap": {f: r(v) for f, v in classifier.shap_all(c, e, dist).items()}}


def cmd_emit_asp(args, r):
    fam = args.family
    if fam == "cip":
        if not args.tree:
            raise _Usage("--tree is required for CIPs")
        c, e = _classifier(args)
        return asp.emit_cip(c, e, weak=args.weak, forbid=args.forbid)
    db, dcs = _db(args), _dcs(args)
    if fam == "repair":
        return asp.emit_repair_program(db, dcs, args.weak, args.causes, args.responsibility)
    if fam == "attr":
        return asp.emit_attr_repair_program(db, dcs)
    return asp.emit_inc_measure_program(db, dcs)


COMMANDS = {
    "ingest-check": (cmd_ingest_check, "load a CSV directory and summarize it"),
    "query": (cmd_query, "evaluate a query"),
    "causes": (cmd_causes, "actual causes with responsibility"),
    "resp": (cmd_resp, "responsibility of one tuple"),
    "attr-causes": (cmd_attr_causes, "attribute-level causes via null-based repairs"),
    "causes-ics": (cmd_causes_ics, "causes under hard integrity constraints"),
    "causal-effect": (cmd_causal_effect, "causal effect of a tuple"),
    "shapley": (cmd_shapley, "Shapley value of tuples (exact or sampled)"),
    "banzhaf": (cmd_banzhaf, "Banzhaf index of tuples"),
    "inc-degree": (cmd_inc_degree, "inconsistency degree w.r.t. denial constraints"),
    "repairs": (cmd_repairs, "S-/C-repairs or null-based attribute repairs"),
    "xresp": (cmd_xresp, "x-Resp score of a feature value"),
    "counter": (cmd_counter, "Counter score of a feature value"),
    "resp-score": (cmd_resp_score, "generalized Resp score of a feature value"),
    "shap": (cmd_shap, "Shap score of feature values"),
    "emit-asp": (cmd_emit_asp, "emit an answer-set program"),
}


def build_parser():
    p = argparse.ArgumentParser(prog="dbexplain", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text, description=help_text)
        s.add_argument("--data", help=f"CSV directory (default: ${DATA_ENV})")
        s.add_argument("--query", help="query file")
        s.add_argument("--name", help="query name when the file holds several")
        s.add_argument("--answer", help="comma-separated answer for an open query")
        s.add_argument("--dcs", help="denial constraint file")
        s.add_argument("--ics", help="hard constraints file (DCs and INDs)")
        s.add_argument("--tid", type=int)
        s.add_argument("--p", default="1/2", help="tuple probability (default 1/2)")
        s.add_argument("--sampled", action="store_true", help="permutation sampling instead of enumeration")
        s.add_argument("--eps", default="1/20")
        s.add_argument("--delta", default="1/20")
        s.add_argument("--seed", type=int)
        s.add_argument("--support-only", action="store_true", help="report only tuples on some witness")
        s.add_argument("--semantics", choices=["S", "C"], default="S")
        s.add_argument("--attr", action="store_true", help="null-based attribute repairs")
        s.add_argument("--tree", help="decision tree JSON")
        s.add_argument("--labels", help="label table CSV (black-box classifier)")
        s.add_argument("--entity", help="comma-separated feature values")
        s.add_argument("--feature")
        s.add_argument("--dist", choices=["uniform", "product", "empirical"], default="uniform")
        s.add_argument("--sample", help="CSV sample for product/empirical distributions")
        s.add_argument("--max-contingency", type=int)
        s.add_argument("--exclude-original", action="store_true")
        s.add_argument("--family", choices=["repair", "attr", "inc", "cip"], default="repair")
        s.add_argument("--weak", action="store_true")
        s.add_argument("--causes", action="store_true")
        s.add_argument("--responsibility", action="store_true")
        s.add_argument("--forbid", action="append", default=[], help="e.g. 'rain,strong' (repeatable)")
        s.add_argument("--decimal", action="store_true", help="render rationals as decimals")
        s.add_argument("--output", help="write the report here instead of stdout")
    return p


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    handler = COMMANDS[args.command][0]
    r = lambda x: _rational(x, args.decimal)
    try:
        out = handler(args, r)
    except _Usage as exc:
        parser.print_usage(stderr)
        print(f"dbexplain {args.command}: error: {exc}", file=stderr)
        return 2
    except DBExplainError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: cli: {exc}", file=stderr)
        return 1
    text = out.text() if isinstance(out, asp.AspProgram) else json.dumps(out, indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

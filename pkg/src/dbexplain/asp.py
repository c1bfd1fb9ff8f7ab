"""Text generation of answer-set programs in DLV syntax.

Four families are emitted: tuple-deletion repair programs (optionally with
cause, contingency and responsibility rules, and weak constraints),
null-based attribute repair programs, inconsistency-measure programs, and
counterfactual intervention programs (CIPs) for decision trees.  Nothing
here runs a solver; ``dbexplain.stable`` checks small repair programs.
"""
from dataclasses import dataclass, field
from itertools import permutations, product
from math import ceil

from .classifier import DecisionTree
from .errors import PreconditionError
from .query import Const, DenialConstraint, Var, format_constant
from .relational import NULL
from .repairs import c_repairs, has_nulls

MODULE = "asp-emitter"


@dataclass
class AspProgram:
    """Ordered blocks of program lines; ``kind`` is one of fact, rule,
    directive, hard, weak, comment."""

    blocks: list = field(default_factory=list)

    def add(self, kind, lines):
        lines = list(lines)
        if lines:
            self.blocks.append((kind, lines))
        return self

    def _of(self, kind):
        return [line for k, lines in self.blocks if k == kind for line in lines]

    @property
    def facts(self):
        return self._of("fact")

    @property
    def rules(self):
        return self._of("rule")

    @property
    def directives(self):
        return self._of("directive")

    @property
    def hard_constraints(self):
        return self._of("hard")

    @property
    def weak_constraints(self):
        return self._of("weak")

    def text(self):
        return "\n\n".join("\n".join(lines) for _, lines in self.blocks) + "\n"

    __str__ = text


def _const(v):
    return "null" if v is NULL else format_constant(v)


def _vars(k, first="X"):
    """Generic variable names for ``k`` positions: X,Y,Z or X1..Xk."""
    if k <= 3:
        letters = "XYZ" if first == "X" else "UVW"
        return list(letters[:k])
    return [f"{first}{i}" for i in range(1, k + 1)]


def _atom(pred, args):
    return f"{pred}({','.join(args)})"


def _facts(db):
    lines, current, name = [], [], None
    for tid in db.tids:
        rel, values = db.fact(tid)
        if rel != name and current:
            lines.append(" ".join(current))
            current = []
        name = rel
        current.append(_atom(rel, [str(tid)] + [_const(v) for v in values]) + ".")
    if current:
        lines.append(" ".join(current))
    return lines


def _check_dcs(dcs):
    dcs = list(dcs)
    for dc in dcs:
        if not isinstance(dc, DenialConstraint):
            raise PreconditionError(f"expected denial constraints, got {type(dc).__name__}", MODULE)
    return dcs


def _dc_relations(db, dcs):
    seen = []
    for dc in dcs:
        for a in dc.body:
            if a.relation not in seen:
                seen.append(a.relation)
    return [(r, db.relation(r).arity) for r in seen]


def _term(t):
    return t.name if isinstance(t, Var) else format_constant(t.value)


def _tid_prefix(dcs):
    names = {v for dc in dcs for a in dc.body for v in a.variables()}
    prefix = "T"
    while any(n.startswith(prefix) and n[len(prefix):].isdigit() for n in names):
        prefix += "T"
    return prefix


def _repair_rules(db, dcs):
    prefix = _tid_prefix(dcs)
    rules = []
    for dc in dcs:
        tids = [f"{prefix}{i}" for i in range(1, len(dc.body) + 1)]
        head = " v ".join(
            _atom(f"{a.relation}_a", [t] + [_term(x) for x in a.terms] + ["d"]) for a, t in zip(dc.body, tids)
        )
        body = ", ".join(_atom(a.relation, [t] + [_term(x) for x in a.terms]) for a, t in zip(dc.body, tids))
        rules.append(f"{head} :- {body}.")
    return rules


def _collection_rules(rels):
    out = []
    for rel, k in rels:
        args = ["T"] + _vars(k)
        out.append(f"{_atom(rel + '_a', args + ['s'])} :- {_atom(rel, args)}, not {_atom(rel + '_a', args + ['d'])}.")
    return out


def _deleted(rel, k, tid="T", first="X"):
    return _atom(f"{rel}_a", [tid] + _vars(k, first) + ["d"])


def _cause_rules(rels):
    out = [f"cause(T) :- {_deleted(rel, k)}." for rel, k in rels]
    for rel, k in rels:
        out.append(f"cauCont(T,TC) :- {_deleted(rel, k)}, {_deleted(rel, k, 'TC', 'U')}, T != TC.")
    for (r1, k1), (r2, k2) in permutations(rels, 2):
        out.append(f"cauCont(T,TC) :- {_deleted(r1, k1)}, {_deleted(r2, k2, 'TC', 'U')}.")
    return out


CONTINGENCY_RULES = [
    "preCont(T,{TC}) :- cauCont(T,TC).",
    "preCont(T,#union(C,{TC})) :- cauCont(T,TC), preCont(T,C), not #member(TC,C).",
    "cont(T,C) :- preCont(T,C), not HoleIn(T,C).",
    "HoleIn(T,C) :- preCont(T,C), cauCont(T,TC), not #member(TC,C).",
    "tmpCont(T) :- cont(T,C), not #card(C,0).",
    "cont(T,{}) :- cause(T), not tmpCont(T).",
]
PRE_RHO_RULE = "preRho(T,N + 1) :- cause(T), #int(N), #count{TC: cauCont(T,TC)} = N."


def maxint(db):
    """Twice the largest tid, rounded up to a multiple of 100."""
    top = max(db.tids, default=0)
    return max(100, ceil(2 * top / 100) * 100)


def emit_repair_program(db, dcs, weak=False, causes=False, responsibility=False):
    """Repair program whose stable models are the S-repairs of ``db``
    (C-repairs with ``weak``).  ``responsibility`` implies ``causes``."""
    dcs = _check_dcs(dcs)
    prog = AspProgram().add("fact", _facts(db))
    if not dcs:
        return prog
    rels = _dc_relations(db, dcs)
    prog.add("rule", _repair_rules(db, dcs))
    prog.add("rule", _collection_rules(rels))
    if causes or responsibility:
        prog.add("rule", _cause_rules(rels))
    if responsibility:
        prog.add("rule", CONTINGENCY_RULES)
        prog.add("directive", [f"#maxint = {maxint(db)}."])
        prog.add("rule", [PRE_RHO_RULE])
    if weak:
        prog.add("weak", [f":~ {_deleted(rel, k)}." for rel, k in rels])
    return prog


def emit_inc_measure_program(db, dcs):
    """C-repair program plus ``Del``/``NumDel`` rules; ``NumDel(n)`` holds in
    every best model with n = |D| minus the size of a C-repair."""
    dcs = _check_dcs(dcs)
    prog = emit_repair_program(db, dcs, weak=True)
    rels = _dc_relations(db, dcs)
    prog.add("rule", [f"Del(T) :- {_deleted(rel, k)}." for rel, k in rels] + ["NumDel(N) :- #count{T : Del(T)} = N."])
    best = max((len(r.kept) for r in c_repairs(db, dcs)), default=0) if dcs else db.size
    prog.add("comment", [f"% intended answer: NumDel({db.size - best})"])
    return prog


def _join_vars(body):
    counts = {}
    for a in body:
        for v in a.variables():
            counts[v] = counts.get(v, 0) + 1
    order = []
    for a in body:
        for v in a.variables():
            if counts[v] > 1 and v not in order:
                order.append(v)
    return order


def _eligible(body):
    joins = set(_join_vars(body))
    return [
        (i, p)
        for i, a in enumerate(body)
        for p, t in enumerate(a.terms)
        if isinstance(t, Const) or t.name in joins
    ]


def _attr_update_rules(dcs):
    out = []
    for dc in dcs:
        body = dc.body
        tids = ["T"] + [f"T{j}" for j in range(2, len(body) + 1)]
        cells = _eligible(body)
        guards = [f"{v} != null" for v in _join_vars(body)]
        for i, p in cells:
            order = [i] + [j for j in range(len(body)) if j != i]
            tid_of = {j: tids[k] for k, j in enumerate(order)}

            def nulled(j, q):
                a = body[j]
                terms = ["null" if r == q else _term(t) for r, t in enumerate(a.terms)]
                return _atom(f"{a.relation}_a", [tid_of[j]] + terms + ["u"])

            lits = [_atom(f"{body[j].relation}_a", [tid_of[j]] + [_term(t) for t in body[j].terms] + ["tr"]) for j in order]
            lits += guards
            lits += [f"not {nulled(j, q)}" for j, q in cells if (j, q) != (i, p)]
            out.append(f"{nulled(i, p)} :- {', '.join(lits)}.")
    return out


def emit_attr_repair_program(db, dcs):
    """Null-based attribute repair program: transition (tr), update (u),
    final update (fu) and stays (s) rules, plus ``cause(T,pos,val)`` rules."""
    dcs = _check_dcs(dcs)
    prog = AspProgram().add("fact", _facts(db))
    rels = _dc_relations(db, dcs)
    trans = []
    for rel, k in rels:
        args = ["T"] + _vars(k)
        trans.append(f"{_atom(rel + '_a', args + ['tr'])} :- {_atom(rel, args)}.")
        trans.append(f"{_atom(rel + '_a', args + ['tr'])} :- {_atom(rel + '_a', args + ['u'])}.")
    prog.add("rule", trans)
    prog.add("rule", _attr_update_rules(dcs))
    final = []
    for rel, k in rels:
        xs = _vars(k)
        args = ["T"] + xs
        auxes = [f"aux{rel}{p}" for p in range(1, k + 1)]
        nots = ", ".join(f"not {_atom(a, args)}" for a in auxes)
        final.append(f"{_atom(rel + '_a', args + ['fu'])} :- {_atom(rel + '_a', args + ['u'])}, {nots}.")
        for p, aux in enumerate(auxes):
            nulled = ["T"] + ["null" if q == p else x for q, x in enumerate(xs)] + ["u"]
            final.append(f"{_atom(aux, args)} :- {_atom(rel, args)}, {_atom(rel + '_a', nulled)}, {xs[p]} != null.")
    prog.add("rule", final)
    stays = []
    for rel, k in rels:
        args = ["T"] + _vars(k)
        stays.append(f"{_atom(rel + '_a', args + ['s'])} :- {_atom(rel + '_a', args + ['fu'])}.")
        stays.append(f"{_atom(rel + '_a', args + ['s'])} :- {_atom(rel, args)}, not aux{rel}(T).")
        stays.append(f"aux{rel}(T) :- {_atom(rel + '_a', args + ['u'])}.")
    prog.add("rule", stays)
    guard = has_nulls(db)
    causes = []
    for rel, k in sorted(rels):
        xs = _vars(k)
        fresh = ["Z"] if k <= 2 else [f"Z{j}" for j in range(1, k)]
        for p in range(k):
            it = iter(fresh)
            other = ["T"] + ["null" if q == p else next(it) for q in range(k)] + ["s"]
            lits = [_atom(rel, ["T"] + xs), _atom(rel + "_a", other)]
            if guard:
                lits.append(f"{xs[p]} != null")
            causes.append(f"cause(T,{p + 1},{xs[p]}) :- {', '.join(lits)}.")
    prog.add("rule", causes)
    return prog


def _cip_vars(n):
    names = _vars(n)
    return names, [v + "p" for v in names]


def parse_forbid(spec, space):
    """Partial assignment from ``rain,strong`` (each value names its feature
    through the domains), ``outlook=rain,wind=strong``, or a mapping."""
    if isinstance(spec, dict):
        return {space.names[space.index(f)]: v for f, v in spec.items()}
    out = {}
    for part in spec.split(","):
        part = part.strip()
        if "=" in part:
            f, v = (s.strip() for s in part.split("=", 1))
        else:
            matches = [n for n, dom in space.features if part in dom]
            if len(matches) != 1:
                raise PreconditionError(f"cannot tell which feature value {part!r} belongs to", MODULE)
            f, v = matches[0], part
        out[space.names[space.index(f)]] = v
    return out


def emit_cip(tree, e, weak=False, forbid=()):
    """Counterfactual intervention program for ``tree`` and entity ``e``.

    ``forbid`` is a list of partial assignments (feature -> value) that
    intervened entities may not take.
    """
    if not isinstance(tree, DecisionTree):
        raise PreconditionError("CIPs are emitted for decision trees only", MODULE)
    space = tree.space
    e = space.entity(e)
    n = len(space)
    xs, ps = _cip_vars(n)
    label = tree.label(e)
    flip = 1 - label
    doms = [f"dom{k}" for k in range(1, n + 1)]
    prog = AspProgram()
    prog.add("fact", [
        " ".join(f"{d}({format_constant(v)})." for v in dom) for d, dom in zip(doms, space.domains)
    ] + [_atom("ent", ["e"] + [format_constant(v) for v in e] + ["o"]) + "."])

    ent = lambda args, ann: _atom("ent", ["E"] + list(args) + [ann])
    cls = lambda args, lab: _atom("cls", list(args) + [str(lab)])

    rules = []
    for conds, lab in tree.paths():
        if lab != 1:
            continue
        fixed = {i for i, _ in conds}
        for values in product(*[vals for _, vals in reversed(conds)]):
            eqs = [f"{xs[i]} = {format_constant(v)}" for (i, _), v in zip(reversed(conds), values)]
            free = [f"{doms[i]}({xs[i]})" for i in range(n) if i not in fixed]
            rules.append(f"{cls(xs, 1)} :- {', '.join(eqs + free)}.")
    alld = ", ".join(f"{doms[i]}({xs[i]})" for i in range(n))
    rules.append(f"{cls(xs, 0)} :- {alld}, not {cls(xs, 1)}.")
    prog.add("rule", rules)

    prog.add("rule", [f"{ent(xs, 'tr')} :- {ent(xs, 'o')}.", f"{ent(xs, 'tr')} :- {ent(xs, 'do')}."])

    heads = [ent(xs[:i] + [ps[i]] + xs[i + 1:], "do") for i in range(n)]
    body = [ent(xs, "tr"), cls(xs, label)]
    body += [f"{doms[i]}({ps[i]})" for i in range(n)]
    body += [f"{xs[i]} != {ps[i]}" for i in range(n)]
    body += [_atom(f"chosen{i + 1}", xs + [ps[i]]) for i in range(n)]
    prog.add("rule", [f"{' v '.join(heads)} :- {', '.join(body)}."])

    choice = []
    for i in range(n):
        k = i + 1
        choice.append(
            f"{_atom(f'chosen{k}', xs + ['U'])} :- {ent(xs, 'tr')}, {cls(xs, label)}, {doms[i]}(U), U != {xs[i]}, "
            f"not {_atom(f'diffchoice{k}', xs + ['U'])}."
        )
        choice.append(f"{_atom(f'diffchoice{k}', xs + ['U'])} :- {_atom(f'chosen{k}', xs + ['Up'])}, U != Up, {doms[i]}(U).")
    prog.add("rule", choice)
    prog.add("hard", [f":- {ent(xs, 'do')}, {ent(xs, 'o')}."])
    prog.add("rule", [f"{ent(xs, 's')} :- {ent(xs, 'do')}, {cls(xs, flip)}."])
    prog.add("rule", [
        f"expl(E,{format_constant(name)},{xs[i]}) :- {ent(xs, 'o')}, {ent(ps, 's')}, {xs[i]} != {ps[i]}."
        for i, name in enumerate(space.names)
    ])
    prog.add("rule", [f"entAux(E) :- {ent(xs, 's')}."])
    prog.add("hard", [f":- {ent(xs, 'o')}, not entAux(E)."])
    prog.add("rule", ["invResp(E,M) :- #count{I: expl(E,I,_)} = M, #int(M), E = e."])
    if weak:
        prog.add("weak", [f":~ {ent(xs, 'o')}, {ent(ps, 's')}, {xs[i]} != {ps[i]}." for i in range(n)])
    forbids = []
    for spec in forbid or ():
        fixed = parse_forbid(spec, space)
        for f, v in fixed.items():
            if v not in space.domains[space.index(f)]:
                raise PreconditionError(f"value {v!r} is not in the domain of {f}", MODULE)
        free = iter(_vars(n))
        args = [format_constant(fixed[name]) if name in fixed else next(free) for name in space.names]
        forbids.append(f":- {ent(args, 'tr')}.")
    prog.add("hard", forbids)
    return prog

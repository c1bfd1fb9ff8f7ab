"""Brute-force stable-model checker for small disjunctive programs.

Covers the fragment used by repair programs: facts, rules with disjunctive
heads, positive and ``not`` body atoms, ``=``/``!=`` comparisons, hard
constraints and weak constraints.  Rules using aggregates or sets
(``#count``, ``#union``, ``{...}``) and directives are skipped.

Candidate models are generated by guessing which ground head atoms of the
disjunctive rules are true; each guess is closed under the normal rules and
kept when it passes the reduct-minimality test.
"""
import re
from dataclasses import dataclass
from itertools import combinations

from .errors import CapExceeded, ParseError, PreconditionError

MAX_CHOICE_ATOMS = 16
MODULE = "asp-emitter"


@dataclass(frozen=True)
class Lit:
    kind: str  # pos, neg, eq, ne
    pred: str = ""
    args: tuple = ()


@dataclass(frozen=True)
class Rule:
    head: tuple  # atoms (pred, args); empty for constraints
    body: tuple
    weak: bool = False


def _is_var(t):
    return t[:1].isupper() or t[:1] == "_"


def _split_top(text, sep):
    parts, depth, quote, cur = [], 0, False, []
    i = 0
    while i < len(text):
        ch = text[i]
        if quote:
            cur.append(ch)
            if ch == "\\":
                cur.append(text[i + 1])
                i += 1
            elif ch == "'":
                quote = False
        elif ch == "'":
            quote = True
            cur.append(ch)
        elif ch in "({":
            depth += 1
            cur.append(ch)
        elif ch in ")}":
            depth -= 1
            cur.append(ch)
        elif depth == 0 and text.startswith(sep, i):
            parts.append("".join(cur))
            cur = []
            i += len(sep)
            continue
        else:
            cur.append(ch)
        i += 1
    parts.append("".join(cur))
    return parts


_ATOM = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$", re.S)


def _atom(text):
    m = _ATOM.match(text)
    if not m:
        raise ParseError(f"cannot read atom {text.strip()!r}")
    return m.group(1), tuple(a.strip() for a in _split_top(m.group(2), ","))


def _literal(text):
    text = text.strip()
    if text.startswith("not "):
        return Lit("neg", *_atom(text[4:]))
    for op, kind in (("!=", "ne"), ("=", "eq")):
        if op in text and "(" not in text:
            a, b = (s.strip() for s in text.split(op, 1))
            return Lit(kind, "", (a, b))
    return Lit("pos", *_atom(text))


def _statements(text):
    text = str(text)
    lines = [line.split("%", 1)[0] for line in text.splitlines()]
    body = " ".join(lines)
    return [s.strip() for s in _split_top(body, ".") if s.strip()]


def parse_program(text):
    """Rules of the supported fragment; unsupported statements are skipped."""
    rules = []
    for st in _statements(text):
        if "#" in st or "{" in st:
            continue
        weak = st.startswith(":~")
        if weak or st.startswith(":-"):
            body = st[2:]
            rules.append(Rule((), tuple(_literal(x) for x in _split_top(body, ",")), weak))
            continue
        head, _, body = st.partition(":-")
        heads = tuple(_atom(h) for h in _split_top(head, " v "))
        lits = tuple(_literal(x) for x in _split_top(body, ",")) if body.strip() else ()
        rules.append(Rule(heads, lits))
    return rules


def _subst(args, env):
    return tuple(env.get(a, a) if _is_var(a) else a for a in args)


def _matches(body, facts, env=None, neg_ref=None):
    """Substitutions making the positive atoms true in ``facts``, the
    comparisons hold, and (when ``neg_ref`` is given) the negated atoms
    false in ``neg_ref``."""
    pos = [l for l in body if l.kind == "pos"]
    rest = [l for l in body if l.kind != "pos"]
    by_pred = {}
    for p, a in facts:
        by_pred.setdefault(p, []).append(a)

    def go(i, env):
        if i == len(pos):
            for l in rest:
                a, b = _subst(l.args, env) if l.kind in ("eq", "ne") else (None, None)
                if l.kind == "eq" and a != b:
                    return
                if l.kind == "ne" and a == b:
                    return
                if l.kind == "neg" and neg_ref is not None and (l.pred, _subst(l.args, env)) in neg_ref:
                    return
            yield env
            return
        lit = pos[i]
        for cand in by_pred.get(lit.pred, ()):
            if len(cand) != len(lit.args):
                continue
            new = dict(env)
            ok = True
            for t, v in zip(lit.args, cand):
                if t == "_":
                    continue
                if _is_var(t):
                    if new.setdefault(t, v) != v:
                        ok = False
                        break
                elif t != v:
                    ok = False
                    break
            if ok:
                yield from go(i + 1, new)

    yield from go(0, dict(env or {}))


def _closure(rules, base, neg_ref):
    """Least set containing ``base`` closed under the single-head rules of
    the reduct w.r.t. ``neg_ref``."""
    model = set(base)
    changed = True
    while changed:
        changed = False
        for r in rules:
            if len(r.head) != 1 or r.weak:
                continue
            for env in list(_matches(r.body, model, neg_ref=neg_ref)):
                atom = (r.head[0][0], _subst(r.head[0][1], env))
                if atom not in model:
                    model.add(atom)
                    changed = True
    return frozenset(model)


def _satisfies(rules, model, neg_ref):
    for r in rules:
        if r.weak:
            continue
        for env in _matches(r.body, model, neg_ref=neg_ref):
            if not any((p, _subst(a, env)) in model for p, a in r.head):
                return False
    return True


@dataclass(frozen=True)
class StableModel:
    atoms: frozenset
    cost: int


def _check_negation(rules):
    """Negation must be stratified, except on predicates that are guessed
    through disjunctive heads."""
    guessed = {p for r in rules if len(r.head) > 1 for p, _ in r.head}
    edges = {}
    for r in rules:
        for h, _ in r.head:
            edges.setdefault(h, set()).update(l.pred for l in r.body if l.kind in ("pos", "neg"))

    def depends(a, b):
        seen, todo = set(), [a]
        while todo:
            x = todo.pop()
            if x == b:
                return True
            if x not in seen:
                seen.add(x)
                todo.extend(edges.get(x, ()))
        return False

    for r in rules:
        for l in r.body:
            if l.kind == "neg" and l.pred not in guessed and any(depends(l.pred, h) for h, _ in r.head):
                raise PreconditionError(
                    f"negation on {l.pred} is not stratified; the checker only guesses disjunctive heads",
                    MODULE,
                )


def stable_models(text, max_choice=MAX_CHOICE_ATOMS):
    rules = parse_program(text)
    _check_negation(rules)
    facts = {r.head[0] for r in rules if len(r.head) == 1 and not r.body}
    proper = [r for r in rules if r.body or len(r.head) != 1]
    disj = [r for r in proper if len(r.head) > 1]
    # ground disjunctive heads against everything derivable when all of them hold
    choice = set()
    for r in disj:
        for env in _matches([l for l in r.body if l.kind in ("pos", "eq", "ne")], _closure(proper, facts, None)):
            choice.update((p, _subst(a, env)) for p, a in r.head)
    choice = sorted(choice)
    if len(choice) > max_choice:
        raise CapExceeded(f"{len(choice)} disjunctive head atoms exceed the checker cap of {max_choice}", MODULE)
    models = []
    for k in range(len(choice) + 1):
        for guess in combinations(choice, k):
            base = facts | set(guess)
            model = _closure(proper, base, base)
            for _ in range(len(proper) + 2):
                nxt = _closure(proper, base, model)
                if nxt == model:
                    break
                model = nxt
            if model & set(choice) != set(guess):
                continue
            if not _satisfies(proper, model, model):
                continue
            if any(_satisfies(proper, m2, model) and m2 < model for m2 in _smaller(proper, facts, guess, model)):
                continue
            models.append(StableModel(model, _cost(rules, model)))
    return models


def _smaller(rules, facts, guess, ref):
    for k in range(len(guess) + 1):
        for sub in combinations(guess, k):
            yield _closure(rules, facts | set(sub), ref)


def _cost(rules, model):
    cost = 0
    for r in rules:
        if r.weak:
            cost += len({tuple(sorted(env.items())) for env in _matches(r.body, model, neg_ref=model)})
    return cost


def best_models(text, max_choice=MAX_CHOICE_ATOMS):
    models = stable_models(text, max_choice)
    if not models:
        return []
    low = min(m.cost for m in models)
    return [m for m in models if m.cost == low]


def deleted_tids(model):
    """Tids annotated ``d`` in a repair-program model."""
    return frozenset(int(a[0]) for p, a in model.atoms if p.endswith("_a") and a and a[-1] == "d")

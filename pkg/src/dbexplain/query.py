"""Conjunctive queries, unions of them, denial constraints and inclusion
dependencies: AST, parser, printer and structural analyses.

Grammar (one statement per rule, each ending in ``.``, ``%`` starts a comment)::

    q(X) :- Dep(Y,X), Course(Z,X,Y).      % conjunctive query
    q() :- S(X), R(X,Y), S(Y).            % Boolean query
    :- P(X), Q(X,Y).                      % denial constraint
    Dep(X,Y) -> exists U: Course(U,Y,X).  % inclusion dependency

Variables start with an uppercase letter or ``_``; constants are lowercase
identifiers, digit strings, or single-quoted strings.  Rules sharing a head
name form a union.
"""
import re
from dataclasses import dataclass, field

from .errors import ParseError, QueryError


@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple = field(default=None, compare=False, repr=False)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: str
    pos: tuple = field(default=None, compare=False, repr=False)

    def __str__(self):
        return format_constant(self.value)


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple
    pos: tuple = field(default=None, compare=False, repr=False)

    @property
    def arity(self):
        return len(self.terms)

    def variables(self):
        return [t.name for t in self.terms if isinstance(t, Var)]

    def __str__(self):
        return f"{self.relation}({','.join(map(str, self.terms))})"


@dataclass(frozen=True)
class CQ:
    name: str
    head: tuple
    body: tuple
    pos: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.body:
            raise QueryError(f"query {self.name} has an empty body")
        bound = {v for a in self.body for v in a.variables()}
        for t in self.head:
            if isinstance(t, Var) and t.name not in bound:
                raise QueryError(f"unbound head variable {t.name} in {self.name}")

    @property
    def is_boolean(self):
        return len(self.head) == 0

    @property
    def disjuncts(self):
        return (self,)

    def variables(self):
        seen = []
        for a in self.body:
            for v in a.variables():
                if v not in seen:
                    seen.append(v)
        return seen

    def existential_variables(self):
        free = {t.name for t in self.head if isinstance(t, Var)}
        return [v for v in self.variables() if v not in free]

    def instantiate(self, answer):
        """Bind the head variables to ``answer`` and return a Boolean query."""
        if len(answer) != len(self.head):
            raise QueryError(f"{self.name} has {len(self.head)} head terms, answer has {len(answer)}")
        sub = {}
        for t, value in zip(self.head, answer):
            if isinstance(t, Var):
                if t.name in sub and sub[t.name] != value:
                    return None
                sub[t.name] = value
            elif t.value != value:
                return None
        body = tuple(
            Atom(a.relation, tuple(Const(sub[t.name]) if isinstance(t, Var) and t.name in sub else t for t in a.terms))
            for a in self.body
        )
        return CQ(self.name, (), body, self.pos)

    def __str__(self):
        return f"{self.name}({','.join(map(str, self.head))}) :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class UCQ:
    disjuncts: tuple

    def __post_init__(self):
        if not self.disjuncts:
            raise QueryError("a union needs at least one disjunct")
        arities = {len(d.head) for d in self.disjuncts}
        if len(arities) != 1:
            raise QueryError("all disjuncts of a union must share the head arity")

    @property
    def name(self):
        return self.disjuncts[0].name

    @property
    def is_boolean(self):
        return self.disjuncts[0].is_boolean

    @property
    def head(self):
        return self.disjuncts[0].head

    def instantiate(self, answer):
        parts = [d.instantiate(answer) for d in self.disjuncts]
        parts = tuple(p for p in parts if p is not None)
        if not parts:
            raise QueryError(f"answer {answer} cannot match any disjunct of {self.name}")
        return UCQ(parts)

    def __str__(self):
        return "\n".join(str(d) for d in self.disjuncts)


@dataclass(frozen=True)
class DenialConstraint:
    body: tuple
    pos: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.body:
            raise QueryError("denial constraint with empty body")

    def as_query(self, name="q"):
        return CQ(name, (), self.body, self.pos)

    def variables(self):
        return self.as_query().variables()

    def __str__(self):
        return f":- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class InclusionDependency:
    source: Atom
    target: Atom
    existential: tuple = ()
    pos: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        src = set(self.source.variables())
        for v in self.target.variables():
            if v not in src and v not in self.existential:
                raise QueryError(f"variable {v} of the IND target is neither shared nor existential")

    def __str__(self):
        ex = f"exists {', '.join(self.existential)}: " if self.existential else ""
        return f"{self.source} -> {ex}{self.target}."


_BARE = re.compile(r"^[a-z0-9][A-Za-z0-9_]*$")


def format_constant(value):
    if _BARE.match(value) and value != "exists":
        return value
    return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"


# -------------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|%[^\n]*)
  | (?P<nl>\n)
  | (?P<arrow>->)
  | (?P<if>:-)
  | (?P<colon>:)
  | (?P<punct>[(),.])
  | (?P<string>'(?:[^'\\]|\\.)*')
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<const>[a-z0-9][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    line, col0, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - col0 + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind != "ws":
            value = m.group()
            if kind == "string":
                value = re.sub(r"\\(.)", r"\1", value[1:-1])
            elif kind in ("punct", "arrow", "if", "colon"):
                kind = value
            tokens.append((kind, value, line, i - col0 + 1))
        i = m.end()
    tokens.append(("eof", "", line, i - col0 + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind, what=None):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {what or kind!r}, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        return tok

    def fail(self, message):
        tok = self.peek()
        raise ParseError(message, tok[2], tok[3])

    def statements(self):
        out = []
        while self.peek()[0] != "eof":
            out.append(self.statement())
        return out

    def statement(self):
        tok = self.peek()
        pos = (tok[2], tok[3])
        if tok[0] == ":-":
            self.next()
            body = self.body()
            self.expect(".", "'.'")
            return DenialConstraint(body, pos)
        if tok[0] not in ("var", "const"):
            self.fail(f"expected a rule, found {tok[1] or 'end of input'!r}")
        name = self.next()[1]
        terms = ()
        if self.peek()[0] == "(":
            terms = self.terms(allow_empty=True)
        nxt = self.peek()
        if nxt[0] == ":-":
            self.next()
            body = self.body()
            self.expect(".", "'.'")
            try:
                return CQ(name, terms, body, pos)
            except QueryError as exc:
                raise ParseError(str(exc.args[0]), *pos) from None
        if nxt[0] == "->":
            self.next()
            if not terms:
                self.fail("inclusion dependency source needs terms")
            existential = ()
            if self.peek()[0] == "const" and self.peek()[1] == "exists":
                self.next()
                names = [self.expect("var", "variable")[1]]
                while self.peek()[0] == ",":
                    self.next()
                    names.append(self.expect("var", "variable")[1])
                self.expect(":", "':'")
                existential = tuple(names)
            target = self.atom()
            self.expect(".", "'.'")
            try:
                return InclusionDependency(Atom(name, terms, pos), target, existential, pos)
            except QueryError as exc:
                raise ParseError(str(exc.args[0]), *pos) from None
        self.fail(f"expected ':-' or '->', found {nxt[1] or 'end of input'!r}")

    def body(self):
        if self.peek()[0] == ".":
            self.fail("empty body")
        atoms = [self.atom()]
        while self.peek()[0] == ",":
            self.next()
            atoms.append(self.atom())
        return tuple(atoms)

    def atom(self):
        tok = self.next()
        if tok[0] not in ("var", "const"):
            raise ParseError(f"expected an atom, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        terms = self.terms(allow_empty=False)
        return Atom(tok[1], terms, (tok[2], tok[3]))

    def terms(self, allow_empty):
        self.expect("(", "'('")
        out = []
        if self.peek()[0] == ")":
            if not allow_empty:
                self.fail("atoms need at least one term")
            self.next()
            return ()
        while True:
            tok = self.next()
            pos = (tok[2], tok[3])
            if tok[0] == "var":
                out.append(Var(tok[1], pos))
            elif tok[0] in ("const", "string"):
                out.append(Const(tok[1], pos))
            else:
                raise ParseError(f"expected a term, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
            if self.peek()[0] == ",":
                self.next()
                continue
            self.expect(")", "')'")
            return tuple(out)


def parse(text):
    """Parse ``text`` into a list of CQ / UCQ / DenialConstraint /
    InclusionDependency.  Rules with the same head name are merged into one
    UCQ placed where the name first appears."""
    raw = _Parser(text).statements()
    out, groups = [], {}
    for st in raw:
        if isinstance(st, CQ):
            if st.name in groups:
                groups[st.name].append(st)
                continue
            groups[st.name] = [st]
            out.append(("query", st.name))
        else:
            out.append(st)
    result = []
    for item in out:
        if isinstance(item, tuple) and item and item[0] == "query":
            rules = groups[item[1]]
            try:
                result.append(rules[0] if len(rules) == 1 else UCQ(tuple(rules)))
            except QueryError as exc:
                raise ParseError(str(exc.args[0]), *(rules[0].pos or (None, None))) from None
        else:
            result.append(item)
    return result


def parse_one(text, kind=None):
    """Parse text expected to hold exactly one statement (optionally of ``kind``)."""
    items = parse(text)
    if len(items) != 1:
        raise ParseError(f"expected one statement, found {len(items)}")
    if kind is not None and not isinstance(items[0], kind):
        raise ParseError(f"expected {kind.__name__}, found {type(items[0]).__name__}")
    return items[0]


def to_text(items):
    """Canonical one-rule-per-line rendering of a list of AST items."""
    if not isinstance(items, (list, tuple)):
        items = [items]
    return "\n".join(str(i) for i in items) + "\n"


# ------------------------------------------------------------------ analyses


def negate_to_dc(q):
    """The denial constraint forbidding what Boolean query ``q`` asserts."""
    if isinstance(q, UCQ):
        if len(q.disjuncts) != 1:
            raise QueryError("negate_to_dc needs a single conjunctive query; use dcs_for on unions")
        q = q.disjuncts[0]
    if not q.is_boolean:
        raise QueryError(f"query {q.name} is not Boolean; instantiate it with an answer first")
    return DenialConstraint(q.body, q.pos)


def dcs_for(q):
    """One denial constraint per disjunct of a Boolean (U)CQ."""
    return [negate_to_dc(d) for d in q.disjuncts]


def has_self_join(q):
    names = [a.relation for a in q.body]
    return len(names) != len(set(names))


def is_hierarchical(q):
    """Return ``(True, None)`` or ``(False, (x, y))`` for the first offending
    pair of existential variables."""
    if isinstance(q, UCQ):
        if len(q.disjuncts) != 1:
            raise QueryError("hierarchicality is tested on single conjunctive queries")
        q = q.disjuncts[0]
    if not q.is_boolean:
        raise QueryError("hierarchicality is only tested on Boolean queries")
    if has_self_join(q):
        raise QueryError("dichotomy precondition violated: query has a self-join")
    atoms = {v: {i for i, a in enumerate(q.body) if v in a.variables()} for v in q.existential_variables()}
    names = list(atoms)
    for i, x in enumerate(names):
        for y in names[i + 1:]:
            ax, ay = atoms[x], atoms[y]
            if not (ax <= ay or ay <= ax or not (ax & ay)):
                return False, (x, y)
    return True, None


def path_ucq(relation, source, target, k, name="q"):
    """Boolean union of the path queries of length 1..k from ``source`` to
    ``target`` over a binary ``relation`` (bounded stand-in for reachability)."""
    if k < 1:
        raise QueryError("path length bound must be at least 1")
    rules = []
    for length in range(1, k + 1):
        nodes = [Const(source)] + [Var(f"Z{i}") for i in range(1, length)] + [Const(target)]
        body = tuple(Atom(relation, (nodes[i], nodes[i + 1])) for i in range(length))
        rules.append(CQ(name, (), body))
    return UCQ(tuple(rules))

"""In-memory relational instances with global tuple ids, CSV ingestion, and
nested-loop evaluation of (unions of) conjunctive queries."""
import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import LoadError, SchemaError
from .query import CQ, UCQ, Const, DenialConstraint, InclusionDependency, Var


class _Null:
    """SQL-style null: binds to a lone variable but never satisfies an equality."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NULL"

    def __reduce__(self):
        return (_Null, ())


NULL = _Null()


def _same(a, b):
    return a is not NULL and b is not NULL and a == b


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: tuple = ()

    def __len__(self):
        return len(self.tuples)


@dataclass(frozen=True)
class Witness:
    tids: frozenset
    binding: dict = field(compare=False, hash=False)


class DatabaseInstance:
    """Immutable set of relations whose tuples carry instance-unique tids."""

    def __init__(self, relations):
        self._relations = {}
        self._index = {}
        for rel in relations:
            if rel.name in self._relations:
                raise SchemaError(f"relation {rel.name} declared twice")
            for tid, values in rel.tuples:
                if not isinstance(tid, int) or tid < 1:
                    raise SchemaError(f"tid {tid!r} is not a positive integer")
                if len(values) != rel.arity:
                    raise SchemaError(f"tuple {tid} of {rel.name} has {len(values)} values, arity is {rel.arity}")
                if tid in self._index:
                    raise SchemaError(f"duplicate tid {tid}")
                self._index[tid] = (rel.name, tuple(values))
            self._relations[rel.name] = rel
        self._tids = tuple(sorted(self._index))

    # construction helpers
    @classmethod
    def from_facts(cls, facts, arities=None):
        """``facts`` maps relation name to a list of value tuples; tids are
        assigned 1, 2, ... in the given order."""
        relations, tid = [], 1
        for name, rows in facts.items():
            rows = [tuple(r) for r in rows]
            arity = (arities or {}).get(name) or (len(rows[0]) if rows else 1)
            tuples = []
            for row in rows:
                tuples.append((tid, row))
                tid += 1
            relations.append(Relation(name, arity, tuple(tuples)))
        return cls(relations)

    @classmethod
    def from_tid_facts(cls, facts, arities=None):
        """``facts`` maps tid to ``(relation, values)``."""
        grouped = {}
        for tid in sorted(facts):
            name, values = facts[tid]
            grouped.setdefault(name, []).append((tid, tuple(values)))
        for name, arity in (arities or {}).items():
            grouped.setdefault(name, [])
        rels = []
        for name, tuples in grouped.items():
            arity = (arities or {}).get(name) or (len(tuples[0][1]) if tuples else 1)
            rels.append(Relation(name, arity, tuple(tuples)))
        return cls(rels)

    # accessors
    @property
    def relations(self):
        return dict(self._relations)

    @property
    def schema(self):
        return {name: rel.arity for name, rel in self._relations.items()}

    @property
    def size(self):
        return len(self._index)

    def __len__(self):
        return len(self._index)

    @property
    def tids(self):
        return self._tids

    def __contains__(self, tid):
        return tid in self._index

    def fact(self, tid):
        try:
            return self._index[tid]
        except KeyError:
            raise SchemaError(f"unknown tid {tid}") from None

    def relation(self, name):
        try:
            return self._relations[name]
        except KeyError:
            raise SchemaError(f"unknown relation {name}") from None

    def format_fact(self, tid):
        name, values = self.fact(tid)
        return f"{name}({','.join('NULL' if v is NULL else v for v in values)})"

    # derived instances
    def restrict(self, tids):
        keep = set(tids)
        return DatabaseInstance(
            Relation(r.name, r.arity, tuple(t for t in r.tuples if t[0] in keep)) for r in self._relations.values()
        )

    def without(self, tids):
        drop = set(tids)
        return self.restrict(t for t in self._tids if t not in drop)

    def with_nulls(self, cells):
        """Replace the 1-based positions ``(tid, pos)`` in ``cells`` by NULL."""
        by_tid = {}
        for tid, pos in cells:
            name, values = self.fact(tid)
            if not 1 <= pos <= len(values):
                raise SchemaError(f"position {pos} out of range for tuple {tid}")
            by_tid.setdefault(tid, set()).add(pos)
        rels = []
        for r in self._relations.values():
            tuples = []
            for tid, values in r.tuples:
                if tid in by_tid:
                    values = tuple(NULL if i + 1 in by_tid[tid] else v for i, v in enumerate(values))
                tuples.append((tid, values))
            rels.append(Relation(r.name, r.arity, tuple(tuples)))
        return DatabaseInstance(rels)

    def __eq__(self, other):
        return isinstance(other, DatabaseInstance) and self._index == other._index and self.schema == other.schema

    def __hash__(self):
        return hash(tuple(sorted(self._index.items(), key=lambda kv: kv[0])))

    def __repr__(self):
        return f"DatabaseInstance({', '.join(self.format_fact(t) for t in self._tids)})"


# ------------------------------------------------------------------- loading


def _read_schema(path):
    schema = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            name, arity = line.split("/")
            schema[name.strip()] = int(arity)
        except ValueError:
            raise LoadError(f"{path.name}:{lineno}: expected 'name/arity', got {line!r}") from None
    return schema


def load_database(source):
    """Load every ``*.csv`` file in directory ``source`` as one relation.

    A leading ``tid`` column supplies explicit tids; other rows get the
    smallest unused tids in (sorted file name, row) order.  A cell holding
    exactly ``NULL`` is read as the null value.  ``schema.txt``, when present,
    declares ``name/arity`` per line and is checked against the files.
    """
    source = Path(source)
    if not source.is_dir():
        raise LoadError(f"{source} is not a directory")
    manifest = source / "schema.txt"
    schema = _read_schema(manifest) if manifest.exists() else None
    files = sorted(source.glob("*.csv"))
    parsed, explicit = [], {}
    for path in files:
        name = path.stem
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise LoadError(f"{path.name}: missing header row")
        header = [h.strip() for h in rows[0]]
        has_tid = bool(header) and header[0] == "tid"
        arity = len(header) - (1 if has_tid else 0)
        if arity < 1:
            raise LoadError(f"{path.name}: relation needs at least one column")
        if schema is not None and name in schema and schema[name] != arity:
            raise LoadError(f"{path.name}: {arity} columns but schema.txt declares {name}/{schema[name]}")
        body = []
        for lineno, row in enumerate(rows[1:], 2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise LoadError(f"{path.name}:{lineno}: expected {len(header)} fields, found {len(row)}")
            cells = [c.strip() for c in row]
            tid = None
            if has_tid:
                try:
                    tid = int(cells[0])
                except ValueError:
                    raise LoadError(f"{path.name}:{lineno}: tid {cells[0]!r} is not an integer") from None
                if tid < 1:
                    raise LoadError(f"{path.name}:{lineno}: tid {tid} is not positive")
                if tid in explicit:
                    raise LoadError(f"duplicate tid {tid} ({explicit[tid]} and {path.name}:{lineno})")
                explicit[tid] = f"{path.name}:{lineno}"
                cells = cells[1:]
            values = tuple(NULL if c == "NULL" else c for c in cells)
            body.append((tid, values))
        parsed.append((name, arity, body))
    relations, next_tid = [], 1
    for name, arity, body in parsed:
        tuples = []
        for tid, values in body:
            if tid is None:
                while next_tid in explicit:
                    next_tid += 1
                tid = next_tid
                next_tid += 1
            tuples.append((tid, values))
        relations.append(Relation(name, arity, tuple(tuples)))
    if schema is not None:
        loaded = {r.name for r in relations}
        for name, arity in schema.items():
            if name not in loaded:
                relations.append(Relation(name, arity, ()))
    return DatabaseInstance(relations)


# ---------------------------------------------------------------- evaluation


def _check_atoms(db, atoms):
    if not db.schema:
        return False  # schema-less empty instance: every atom is unsatisfiable
    for a in atoms:
        rel = db.relation(a.relation)
        if rel.arity != a.arity:
            raise SchemaError(f"atom {a} has arity {a.arity}, relation {a.relation} has arity {rel.arity}")
    return True


def valuations(db, atoms, binding=None):
    """Yield ``(binding, tids)`` for every satisfying valuation of ``atoms``,
    joining atoms left to right (nested loops, no indexes)."""
    atoms = tuple(atoms)
    if not _check_atoms(db, atoms):
        return
    yield from _join(db, atoms, 0, dict(binding or {}), ())


def _join(db, atoms, i, binding, tids):
    if i == len(atoms):
        yield dict(binding), tids
        return
    atom = atoms[i]
    for tid, values in db.relation(atom.relation).tuples:
        added = []
        ok = True
        for term, value in zip(atom.terms, values):
            if isinstance(term, Const):
                if value is NULL or value != term.value:
                    ok = False
                    break
            elif term.name in binding:
                if not _same(binding[term.name], value):
                    ok = False
                    break
            else:
                binding[term.name] = value
                added.append(term.name)
        if ok:
            yield from _join(db, atoms, i + 1, binding, tids + (tid,))
        for name in added:
            del binding[name]


def _disjuncts(q):
    if isinstance(q, (CQ, UCQ)):
        return q.disjuncts
    if isinstance(q, DenialConstraint):
        return (q.as_query(),)
    raise TypeError(f"cannot evaluate {type(q).__name__}")


def eval_query(db, q):
    """Answers of ``q`` on ``db``: a bool for Boolean queries, otherwise the
    set of head-value tuples."""
    parts = _disjuncts(q)
    if parts[0].is_boolean:
        return any(next(valuations(db, d.body), None) is not None for d in parts)
    answers = set()
    for d in parts:
        for binding, _ in valuations(db, d.body):
            answers.add(tuple(binding[t.name] if isinstance(t, Var) else t.value for t in d.head))
    return answers


def minimize_sets(sets):
    """Inclusion-minimal members of ``sets``, deduplicated, in (size, sorted) order."""
    ordered = sorted({frozenset(s) for s in sets}, key=lambda s: (len(s), sorted(s)))
    kept = []
    for s in ordered:
        if not any(k <= s for k in kept):
            kept.append(s)
    return kept


def witnesses(db, q):
    """Inclusion-minimal tid-sets supporting a satisfying valuation of Boolean ``q``."""
    parts = _disjuncts(q)
    if not parts[0].is_boolean:
        raise SchemaError("witnesses are defined for Boolean queries")
    found = {}
    for d in parts:
        for binding, tids in valuations(db, d.body):
            found.setdefault(frozenset(tids), binding)
    return [Witness(s, found[s]) for s in minimize_sets(found)]


def witness_sets(db, q):
    return [w.tids for w in witnesses(db, q)]


def satisfies(db, constraint):
    """True when ``db`` satisfies a denial constraint or inclusion dependency."""
    if isinstance(constraint, DenialConstraint):
        return not eval_query(db, constraint)
    if isinstance(constraint, InclusionDependency):
        for binding, _ in valuations(db, (constraint.source,)):
            shared = {v: binding[v] for v in constraint.target.variables() if v in binding}
            if any(val is NULL for val in shared.values()):
                continue  # a null in a referencing position is not checked
            if next(valuations(db, (constraint.target,), shared), None) is None:
                return False
        return True
    raise TypeError(f"not a constraint: {constraint!r}")


def satisfies_all(db, constraints):
    return all(satisfies(db, c) for c in constraints)

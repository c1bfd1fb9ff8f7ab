"""Repairs under denial constraints: conflict hypergraph, subset and
cardinality repairs by tuple deletion, null-based attribute repairs, and the
repair-based inconsistency degree."""
from dataclasses import dataclass
from fractions import Fraction

from . import kernels
from .errors import CapExceeded, QueryError
from .query import Const, DenialConstraint, Var
from .relational import NULL, minimize_sets, valuations, witness_sets

MAX_CHG_NODES = 24

SUBSET = "SUBSET"
CARDINALITY = "CARDINALITY"


@dataclass(frozen=True)
class ConflictHypergraph:
    nodes: frozenset
    hyperedges: tuple

    @property
    def active_nodes(self):
        """Nodes lying on at least one hyperedge."""
        return frozenset().union(*self.hyperedges) if self.hyperedges else frozenset()


@dataclass(frozen=True)
class Repair:
    kept: frozenset
    deleted: frozenset

    def to_json(self):
        return {"kept": sorted(self.kept), "deleted": sorted(self.deleted)}


@dataclass(frozen=True)
class AttrIntervention:
    changes: frozenset

    def to_json(self):
        return [list(c) for c in sorted(self.changes)]


@dataclass(frozen=True)
class IncDegree:
    value: Fraction
    subset_value: Fraction


def _check_dcs(dcs):
    dcs = list(dcs)
    for dc in dcs:
        if not isinstance(dc, DenialConstraint):
            raise QueryError(f"expected denial constraints, got {type(dc).__name__}")
    return dcs


def conflict_hypergraph(db, dcs):
    edges = []
    for dc in _check_dcs(dcs):
        edges.extend(witness_sets(db, dc))
    return ConflictHypergraph(frozenset(db.tids), tuple(minimize_sets(edges)))


def minimal_hitting_sets(edges, module="repair-engine"):
    """All inclusion-minimal hitting sets of ``edges`` (sets of hashable,
    sortable items), ordered by size then sorted members."""
    edges = [frozenset(e) for e in edges]
    if not edges:
        return [frozenset()]
    universe = sorted(frozenset().union(*edges))
    if len(universe) > MAX_CHG_NODES:
        raise CapExceeded(
            f"{len(universe)} nodes lie on conflict hyperedges; exhaustive search is capped at {MAX_CHG_NODES}",
            module,
        )
    bit = {x: 1 << i for i, x in enumerate(universe)}
    masks = [sum(bit[x] for x in e) for e in edges]
    found = []
    for m in kernels.hitting_sets(masks, len(universe)):
        m = int(m)
        found.append(frozenset(x for i, x in enumerate(universe) if m >> i & 1))
    found.sort(key=lambda s: (len(s), sorted(s)))
    return found


def s_repairs(db, dcs):
    chg = conflict_hypergraph(db, dcs)
    everything = frozenset(db.tids)
    return [Repair(everything - h, h) for h in minimal_hitting_sets(chg.hyperedges)]


def c_repairs(db, dcs):
    reps = s_repairs(db, dcs)
    best = min(len(r.deleted) for r in reps)
    return [r for r in reps if len(r.deleted) == best]


def inc_degree(db, dcs):
    if db.size == 0:
        return IncDegree(Fraction(0), Fraction(0))
    reps = s_repairs(db, dcs)
    best_s = max(len(r.kept) for r in reps)
    best_c = max(len(r.kept) for r in c_repairs(db, dcs))
    return IncDegree(Fraction(db.size - best_c, db.size), Fraction(db.size - best_s, db.size))


def eligible_cells(atoms, tids):
    """Cells of one valuation whose nulling kills it: positions holding a
    constant or a variable that occurs more than once in the body."""
    counts = {}
    for a in atoms:
        for t in a.terms:
            if isinstance(t, Var):
                counts[t.name] = counts.get(t.name, 0) + 1
    cells = set()
    for a, tid in zip(atoms, tids):
        for pos, t in enumerate(a.terms, 1):
            if isinstance(t, Const) or counts[t.name] > 1:
                cells.add((tid, pos))
    return frozenset(cells)


def cell_hyperedges(db, dcs):
    """One hyperedge per violating valuation: its eligible cells.  ``None``
    marks a valuation that no null update can break."""
    edges = []
    for dc in _check_dcs(dcs):
        for _, tids in valuations(db, dc.body):
            edges.append(eligible_cells(dc.body, tids))
    return edges


def attr_repairs(db, dcs, semantics=SUBSET):
    """Minimal sets of cells whose replacement by NULL satisfies ``dcs``.

    Returns an empty list when some violation cannot be broken by nulls
    (e.g. ``:- S(X).``).
    """
    if semantics not in (SUBSET, CARDINALITY):
        raise ValueError(f"unknown semantics {semantics!r}")
    edges = cell_hyperedges(db, dcs)
    if any(not e for e in edges):
        return []
    found = [AttrIntervention(h) for h in minimal_hitting_sets(minimize_sets(edges))]
    if semantics == CARDINALITY:
        best = min(len(i.changes) for i in found)
        found = [i for i in found if len(i.changes) == best]
    return found


def has_nulls(db):
    return any(v is NULL for tid in db.tids for v in db.fact(tid)[1])

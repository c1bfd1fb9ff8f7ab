"""Actual and counterfactual causes for Boolean query answers, with
contingency sets and responsibility, at tuple level, at attribute level, and
under hard integrity constraints."""
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import CapExceeded, PreconditionError, QueryError
from .query import UCQ, dcs_for
from .relational import eval_query, satisfies_all, witness_sets
from .repairs import attr_repairs, minimal_hitting_sets

COUNTERFACTUAL = "COUNTERFACTUAL"
ACTUAL = "ACTUAL"
NONE = "NONE"

MAX_CONTINGENCY_POOL = 24


@dataclass(frozen=True)
class CauseReport:
    cause: object  # tid, or (tid, position) at attribute level
    kind: str
    min_contingencies: tuple
    responsibility: Fraction

    def to_json(self, db=None):
        out = {}
        if isinstance(self.cause, tuple):
            out["cell"] = list(self.cause)
        else:
            out["tid"] = self.cause
            if db is not None:
                out["fact"] = db.format_fact(self.cause)
        out["kind"] = self.kind
        out["responsibility"] = f"{self.responsibility.numerator}/{self.responsibility.denominator}"
        out["min_contingencies"] = [
            [list(c) if isinstance(c, tuple) else c for c in sorted(g)] for g in self.min_contingencies
        ]
        return out


def _boolean(q):
    if not q.is_boolean:
        raise QueryError(f"query {q.name} is not Boolean; instantiate it with an answer first")
    return q


def _require_true(db, q):
    if not eval_query(db, _boolean(q)):
        raise PreconditionError("nothing to explain: the query is false in the instance", "causality-engine")


def _report(item, deletion_sets):
    """Report for ``item`` from the minimal deletion sets (hitting sets) that
    contain it."""
    containing = [h for h in deletion_sets if item in h]
    if not containing:
        return CauseReport(item, NONE, (), Fraction(0))
    best = min(len(h) for h in containing)
    gammas = tuple(sorted((h - {item} for h in containing if len(h) == best), key=lambda g: sorted(g)))
    kind = COUNTERFACTUAL if best == 1 else ACTUAL
    return CauseReport(item, kind, gammas, Fraction(1, best))


def _deletion_sets(db, q):
    # minimal sets whose removal falsifies q = complements of S-repairs for the negated query
    return minimal_hitting_sets(witness_sets(db, q), "causality-engine")


def actual_causes(db, q):
    """Reports for every actual cause of Boolean ``q``, ordered by tid."""
    _require_true(db, q)
    sets = _deletion_sets(db, q)
    members = sorted(frozenset().union(*sets))
    return [_report(t, sets) for t in members]


def cause_report(db, q, tid):
    db.fact(tid)
    _require_true(db, q)
    return _report(tid, _deletion_sets(db, q))


def responsibility(db, q, tid):
    return cause_report(db, q, tid).responsibility


def causes_under_ics(db, q, hard):
    """Causes of ``q`` where every contingency must keep ``hard`` satisfied
    both before and after removing the cause."""
    hard = list(hard)
    if not satisfies_all(db, hard):
        raise PreconditionError("instance violates the hard constraints", "causality-engine")
    _require_true(db, q)
    reports = []
    for tid in db.tids:
        pool = [t for t in db.tids if t != tid]
        if len(pool) > MAX_CONTINGENCY_POOL:
            raise CapExceeded(
                f"contingency pool of {len(pool)} tuples exceeds {MAX_CONTINGENCY_POOL}; "
                "without hard constraints use actual_causes (repair duality)",
                "causality-engine",
            )
        found = []
        for k in range(len(pool) + 1):
            for gamma in combinations(pool, k):
                rest = db.without(gamma)
                if not (eval_query(rest, q) and satisfies_all(rest, hard)):
                    continue
                after = rest.without((tid,))
                if not eval_query(after, q) and satisfies_all(after, hard):
                    found.append(frozenset(gamma))
            if found:
                break
        if found:
            kind = COUNTERFACTUAL if not found[0] else ACTUAL
            reports.append(CauseReport(tid, kind, tuple(found), Fraction(1, 1 + len(found[0]))))
    return reports


def attr_causes(db, q):
    """Attribute-level causes: cells appearing in some minimal null-based
    repair of the query's negation."""
    _require_true(db, q)
    dcs = dcs_for(q if isinstance(q, UCQ) else UCQ((q,)))
    sets = [i.changes for i in attr_repairs(db, dcs)]
    if not sets:
        return []
    members = sorted(frozenset().union(*sets))
    return [_report(cell, sets) for cell in members]

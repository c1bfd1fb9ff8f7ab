"""Lineage-based scores for tuples: exact probability over tuple-independent
instances, causal effect under do-interventions, Shapley and Banzhaf values
of the query game, and a seeded permutation sampler for Shapley."""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from . import kernels
from .errors import CapExceeded, QueryError
from .query import UCQ, is_hierarchical
from .relational import minimize_sets, witness_sets

MAX_PROB_VARIABLES = 24
MAX_SHAPLEY_PLAYERS = 22
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class LineageFormula:
    """Positive DNF over tuple variables; each disjunct is a set of tids.

    ``frozenset()`` as a disjunct means the formula is constantly true; no
    disjuncts means constantly false.
    """

    disjuncts: tuple
    pinned: tuple = field(default=(), compare=False)

    @classmethod
    def of(cls, sets, pinned=()):
        sets = minimize_sets(sets)
        if frozenset() in sets:
            sets = [frozenset()]
        return cls(tuple(sets), tuple(sorted(pinned)))

    @property
    def is_true(self):
        return self.disjuncts == (frozenset(),)

    @property
    def is_false(self):
        return not self.disjuncts

    @property
    def variables(self):
        return sorted(frozenset().union(*self.disjuncts)) if self.disjuncts else []

    def __str__(self):
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        parts = []
        for d in self.disjuncts:
            names = [f"X{t}" for t in sorted(d)]
            parts.append(names[0] if len(names) == 1 else "(" + " & ".join(names) + ")")
        return " | ".join(parts)


class TupleProbability:
    """Per-tuple marginal probabilities, defaulting to ``default`` (1/2)."""

    def __init__(self, probs=None, default=HALF):
        self.default = Fraction(default)
        self.probs = {t: Fraction(p) for t, p in (probs or {}).items()}
        for t, p in [(None, self.default), *self.probs.items()]:
            if not 0 <= p <= 1:
                raise ValueError(f"probability {p} of tuple {t} outside [0, 1]")

    def __getitem__(self, tid):
        return self.probs.get(tid, self.default)


def _as_probability(p):
    if p is None:
        return TupleProbability()
    if isinstance(p, TupleProbability):
        return p
    if isinstance(p, dict):
        return TupleProbability(p)
    return TupleProbability(default=p)


def lineage(db, q):
    if not q.is_boolean:
        raise QueryError(f"query {q.name} is not Boolean; instantiate it with an answer first")
    return LineageFormula.of(witness_sets(db, q))


def intervene(f, tid, bit):
    """Pin ``X_tid`` to ``bit`` and simplify."""
    if tid not in f.variables:
        return f
    if bit:
        sets = [d - {tid} for d in f.disjuncts]
    else:
        sets = [d for d in f.disjuncts if tid not in d]
    return LineageFormula.of(sets, f.pinned + ((tid, int(bool(bit))),))


def prob_true(f, p=None):
    """Exact probability that ``f`` is true when each free variable ``X_t``
    is independently true with probability ``p[t]``."""
    p = _as_probability(p)
    if f.is_false:
        return Fraction(0)
    if f.is_true:
        return Fraction(1)
    names = f.variables
    m = len(names)
    if m > MAX_PROB_VARIABLES:
        raise CapExceeded(
            f"lineage has {m} variables, exact summation is capped at {MAX_PROB_VARIABLES}; use sampling",
            "score-engine",
        )
    index = {t: i for i, t in enumerate(names)}
    masks = [sum(1 << index[t] for t in d) for d in f.disjuncts]
    table = kernels.game_table(masks, m)
    probs = [p[t] for t in names]
    if len(set(probs)) == 1:
        q = probs[0]
        counts = kernels.size_counts(table, m)
        return sum((int(c) * q**k * (1 - q) ** (m - k) for k, c in enumerate(counts)), Fraction(0))
    # fold one variable at a time over a common-denominator integer table
    arr = table.astype(object)
    denom = 1
    for q in probs:
        a, b = q.numerator, q.denominator
        pairs = arr.reshape(-1, 2)
        arr = pairs[:, 0] * (b - a) + pairs[:, 1] * a
        denom *= b
    return Fraction(int(arr[0]), denom)


def causal_effect(db, q, tid, p=None):
    db.fact(tid)
    f = lineage(db, q)
    return prob_true(intervene(f, tid, 1), p) - prob_true(intervene(f, tid, 0), p)


@dataclass
class _Game:
    players: list
    table: np.ndarray

    def marginal_counts(self, tid):
        return kernels.marginal_counts(self.table, len(self.players), self.players.index(tid))


def _game(db, q):
    """Query game restricted to the tuples on some witness (all others are
    null players and leave Shapley and Banzhaf values unchanged)."""
    f = lineage(db, q)
    players = f.variables
    if len(players) > MAX_SHAPLEY_PLAYERS:
        raise CapExceeded(
            f"{len(players)} non-dummy tuples exceed the exact cap of {MAX_SHAPLEY_PLAYERS}; use shapley_sampled",
            "score-engine",
        )
    index = {t: i for i, t in enumerate(players)}
    masks = [sum(1 << index[t] for t in d) for d in f.disjuncts]
    return _Game(players, kernels.game_table(masks, len(players)))


def _shapley_from_counts(counts, n):
    return sum((Fraction(int(c) * factorial(k) * factorial(n - k - 1), factorial(n)) for k, c in enumerate(counts)),
               Fraction(0))


def shapley(db, q, tid):
    db.fact(tid)
    game = _game(db, q)
    if tid not in game.players:
        return Fraction(0)
    return _shapley_from_counts(game.marginal_counts(tid), len(game.players))


def banzhaf(db, q, tid):
    db.fact(tid)
    game = _game(db, q)
    if tid not in game.players:
        return Fraction(0)
    return Fraction(int(game.marginal_counts(tid).sum()), 2 ** (len(game.players) - 1))


def shapley_all(db, q):
    """Shapley value of every tuple of ``db`` (dummies get 0)."""
    game = _game(db, q)
    n = len(game.players)
    out = {t: Fraction(0) for t in db.tids}
    for t in game.players:
        out[t] = _shapley_from_counts(game.marginal_counts(t), n)
    return out


def banzhaf_all(db, q):
    game = _game(db, q)
    n = len(game.players)
    out = {t: Fraction(0) for t in db.tids}
    for t in game.players:
        out[t] = Fraction(int(game.marginal_counts(t).sum()), 2 ** (n - 1))
    return out


@dataclass(frozen=True)
class SampledShapley:
    estimate: Fraction
    samples: int
    eps: float
    delta: float
    guarantee: str = "additive"


def sample_size(eps, delta):
    """Hoeffding sample count for an additive ``eps`` error with confidence ``1 - delta``."""
    eps, delta = float(eps), float(delta)
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    return math.ceil(math.log(2 / delta) / (2 * eps * eps))


def shapley_sampled(db, q, tid, eps, delta, seed):
    """Mean marginal contribution of ``tid`` over random player orders.

    Sample ``i`` draws its permutation from ``default_rng([seed, i])``, so the
    estimate depends only on ``(seed, samples)``.
    """
    db.fact(tid)
    m = sample_size(eps, delta)
    f = lineage(db, q)
    players = f.variables
    if tid not in players:
        return SampledShapley(Fraction(0), m, float(eps), float(delta))
    index = {t: i for i, t in enumerate(players)}
    indptr, indices = kernels.csr([[index[t] for t in sorted(d)] for d in f.disjuncts])
    perms = np.empty((m, len(players)), dtype=np.int64)
    for i in range(m):
        perms[i] = np.random.default_rng([seed, i]).permutation(len(players))
    marg = kernels.permutation_marginals(perms, indptr, indices, index[tid])
    return SampledShapley(Fraction(int(marg.sum()), m), m, float(eps), float(delta))


def hierarchy_flag(q):
    """``True``/``False`` from the hierarchical test, or ``None`` when the
    dichotomy does not apply (unions, self-joins)."""
    if isinstance(q, UCQ):
        if len(q.disjuncts) != 1:
            return None
        q = q.disjuncts[0]
    try:
        return is_hierarchical(q)[0]
    except QueryError:
        return None

"""Finite-domain classifiers and score-based explanations of their outcomes:
counterfactual versions, x-Resp, Counter, the generalized Resp score and
Shap.

Labels are 0/1.  Entities are tuples of feature values in feature order.
"""
import csv
import json
from collections import Counter as Multiset
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import factorial, prod
from pathlib import Path

from .errors import CapExceeded, LoadError, PreconditionError

MODULE = "classifier-explain"
MAX_SPACE = 2**20
MAX_SHAP_FEATURES = 16

UNIFORM = "UNIFORM"
PRODUCT = "PRODUCT"
EMPIRICAL = "EMPIRICAL"


def _fail(message):
    raise PreconditionError(message, MODULE)


class FeatureSpace:
    def __init__(self, features):
        self.features = [(name, tuple(dom)) for name, dom in features]
        names = self.names
        if len(set(names)) != len(names):
            _fail("feature names must be unique")
        for name, dom in self.features:
            if not dom:
                _fail(f"feature {name} has an empty domain")
            if len(set(dom)) != len(dom):
                _fail(f"feature {name} lists a domain value twice")

    @property
    def names(self):
        return [name for name, _ in self.features]

    @property
    def domains(self):
        return [dom for _, dom in self.features]

    def __len__(self):
        return len(self.features)

    @property
    def size(self):
        return prod(len(d) for d in self.domains)

    def index(self, feature):
        if isinstance(feature, int):
            if not 0 <= feature < len(self):
                _fail(f"feature index {feature} out of range")
            return feature
        try:
            return self.names.index(feature)
        except ValueError:
            _fail(f"unknown feature {feature!r}; features are {', '.join(self.names)}")

    def entity(self, values):
        """Validate ``values`` (a sequence or a comma-separated string)."""
        if isinstance(values, str):
            values = [v.strip() for v in values.split(",")]
        values = tuple(values)
        if len(values) != len(self):
            _fail(f"entity has {len(values)} values, the feature space has {len(self)}")
        for (name, dom), v in zip(self.features, values):
            if v not in dom:
                _fail(f"value {v!r} is not in the domain of {name}")
        return values

    def entities(self):
        if self.size > MAX_SPACE:
            raise CapExceeded(f"entity space of size {self.size} exceeds {MAX_SPACE}", MODULE)
        return product(*self.domains)


class DecisionTree:
    """Internal nodes test one feature and have one child per value or
    ``|``-separated value set; leaves carry a label name."""

    def __init__(self, space, root, positive="yes"):
        self.space = space
        self.root = root
        self.positive = positive
        self._check(root)

    @classmethod
    def from_json(cls, data):
        if isinstance(data, (str, Path)):
            with open(data) as fh:
                data = json.load(fh)
        try:
            space = FeatureSpace([(f["name"], f["domain"]) for f in data["features"]])
            return cls(space, data["tree"], data.get("positive", "yes"))
        except (KeyError, TypeError) as exc:
            raise LoadError(f"malformed decision tree file: missing {exc}") from None

    def _check(self, node):
        if "leaf" in node:
            return
        i = self.space.index(node["feature"])
        seen = []
        for key, child in node["branches"].items():
            seen.extend(key.split("|"))
            self._check(child)
        if sorted(seen) != sorted(self.space.domains[i]):
            _fail(f"branches of {node['feature']} must cover its domain exactly once")

    def label(self, e):
        node = self.root
        while "leaf" not in node:
            v = e[self.space.index(node["feature"])]
            node = next(c for k, c in node["branches"].items() if v in k.split("|"))
        return int(node["leaf"] == self.positive)

    def paths(self):
        """Root-to-leaf paths as ``([(feature index, values), ...], label)``."""
        out = []

        def walk(node, conds):
            if "leaf" in node:
                out.append((conds, int(node["leaf"] == self.positive)))
                return
            i = self.space.index(node["feature"])
            for key, child in node["branches"].items():
                walk(child, conds + [(i, tuple(key.split("|")))])

        walk(self.root, [])
        return out


class LabelTable:
    """Black-box classifier given as an exhaustive entity -> label table."""

    def __init__(self, space, labels):
        self.space = space
        self.labels = dict(labels)
        missing = [e for e in space.entities() if e not in self.labels]
        if missing:
            _fail(f"label table is not total: no label for {','.join(missing[0])}")

    @classmethod
    def from_csv(cls, path, label_column="label"):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or label_column not in rows[0]:
            raise LoadError(f"{path}: header must name the feature columns and {label_column!r}")
        header = rows[0]
        j = header.index(label_column)
        names = [h for k, h in enumerate(header) if k != j]
        domains = {n: [] for n in names}
        labels = {}
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise LoadError(f"{path}:{lineno}: expected {len(header)} cells, found {len(row)}")
            e = tuple(v for k, v in enumerate(row) if k != j)
            for n, v in zip(names, e):
                if v not in domains[n]:
                    domains[n].append(v)
            labels[e] = int(row[j])
        return cls(FeatureSpace([(n, domains[n]) for n in names]), labels)

    def label(self, e):
        return self.labels[tuple(e)]


def load_classifier(path):
    path = Path(path)
    if path.suffix == ".json":
        return DecisionTree.from_json(path)
    return LabelTable.from_csv(path)


def classify(c, e):
    return c.label(c.space.entity(e))


class Distribution:
    """Distribution over the entity population.

    UNIFORM is the product of uniform marginals, PRODUCT multiplies the
    per-feature marginals of a sample, EMPIRICAL uses sample frequencies.
    """

    def __init__(self, kind=UNIFORM, sample=None):
        if kind not in (UNIFORM, PRODUCT, EMPIRICAL):
            raise ValueError(f"unknown distribution kind {kind!r}")
        if kind != UNIFORM and not sample:
            _fail(f"{kind} distribution needs a nonempty sample")
        self.kind = kind
        self.sample = [tuple(s) for s in sample or ()]

    @classmethod
    def from_csv(cls, kind, path, space):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != space.names:
            raise LoadError(f"{path}: header must be {','.join(space.names)}")
        return cls(kind, [space.entity(r) for r in rows[1:]])

    def _marginals(self, space):
        if self.kind == UNIFORM:
            return [{v: Fraction(1, len(dom)) for v in dom} for dom in space.domains]
        n = len(self.sample)
        return [
            {v: Fraction(c, n) for v, c in Multiset(s[i] for s in self.sample).items()}
            for i in range(len(space))
        ]

    def expectation(self, c, fixed, exclude=None):
        """E[L(e') | e' agrees with ``fixed``] where ``fixed`` maps feature
        indices to values; ``exclude`` removes the given values from the
        free features.  Returns None when the event has probability 0."""
        space = c.space
        exclude = exclude or {}
        if self.kind == EMPIRICAL:
            hits = [
                s for s in self.sample
                if all(s[i] == v for i, v in fixed.items()) and all(s[i] != v for i, v in exclude.items())
            ]
            if not hits:
                return None
            return Fraction(sum(c.label(s) for s in hits), len(hits))
        marg = self._marginals(space)
        free = [i for i in range(len(space)) if i not in fixed]
        choices = []
        for i in free:
            opts = [(v, p) for v, p in marg[i].items() if p and v != exclude.get(i, object())]
            if not opts:
                return None
            choices.append(opts)
        if prod(len(o) for o in choices) > MAX_SPACE:
            raise CapExceeded(f"expectation over more than {MAX_SPACE} entities", MODULE)
        total = weight = Fraction(0)
        e = [None] * len(space)
        for i, v in fixed.items():
            e[i] = v
        for combo in product(*choices):
            w = Fraction(1)
            for i, (v, p) in zip(free, combo):
                e[i] = v
                w *= p
            weight += w
            total += w * c.label(tuple(e))
        return total / weight


@dataclass(frozen=True)
class CounterfactualVersion:
    entity: tuple
    changed: tuple
    distance: int


def counterfactual_versions(c, e, max_distance=None):
    """Label-flipping entities within Hamming distance ``max_distance``,
    ordered by distance, then by domain position of the values."""
    space = c.space
    e = space.entity(e)
    if max_distance is None:
        max_distance = len(space)
    if max_distance > len(space):
        _fail(f"max distance {max_distance} exceeds the feature count {len(space)}")
    base = c.label(e)
    found = []
    for x in space.entities():
        changed = tuple(space.names[i] for i in range(len(space)) if x[i] != e[i])
        if 0 < len(changed) <= max_distance and c.label(x) != base:
            key = (len(changed), tuple(space.domains[i].index(v) for i, v in enumerate(x)))
            found.append((key, CounterfactualVersion(x, changed, len(changed))))
    return [v for _, v in sorted(found, key=lambda kv: kv[0])]


def _alternatives(space, e, idxs):
    return product(*[[v for v in space.domains[i] if v != e[i]] for i in idxs])


def _assign(e, idxs, values):
    out = list(e)
    for i, v in zip(idxs, values):
        out[i] = v
    return tuple(out)


@dataclass(frozen=True)
class XResp:
    value: Fraction
    contingency: dict  # feature name -> new value
    flip_value: object


def x_resp(c, e, feature, detail=False):
    """1/(1+|Y|) for a minimum contingency set Y that keeps the label while
    a further change of ``feature`` flips it; 0 if there is none."""
    space = c.space
    e = space.entity(e)
    f = space.index(feature)
    base = c.label(e)
    others = [i for i in range(len(space)) if i != f]
    for k in range(len(others) + 1):
        for ys in combinations(others, k):
            for yv in _alternatives(space, e, ys):
                e1 = _assign(e, ys, yv)
                if c.label(e1) != base:
                    continue
                for xv in space.domains[f]:
                    if xv != e[f] and c.label(_assign(e1, (f,), (xv,))) != base:
                        res = XResp(Fraction(1, k + 1), {space.names[i]: v for i, v in zip(ys, yv)}, xv)
                        return res if detail else res.value
    res = XResp(Fraction(0), {}, None)
    return res if detail else res.value


def counter_score(c, e, feature, dist=None):
    """L(e) - E[L(e') | e' agrees with e off ``feature``]."""
    dist = dist or Distribution()
    space = c.space
    e = space.entity(e)
    f = space.index(feature)
    ex = dist.expectation(c, {i: e[i] for i in range(len(space)) if i != f})
    if ex is None:
        _fail(f"conditioning event for {space.names[f]} has probability 0 under the {dist.kind} distribution")
    return c.label(e) - ex


@dataclass(frozen=True)
class RespResult:
    value: Fraction
    contingency: tuple  # feature names in Gamma
    values: tuple  # the new values w for Gamma


def resp_score(c, e, feature, dist=None, max_contingency=None, exclude_original=False):
    """Generalized responsibility of ``e[feature]``.

    Contingency sets Gamma are tried by increasing size; at the first size
    where some value vector w keeps the label and gives a positive local
    numerator L(e') - E[L(e'') | e'' agrees with e' off ``feature``], the
    best local score over that size is returned.  With
    ``exclude_original`` the expectation leaves out ``e[feature]``.
    """
    dist = dist or Distribution()
    space = c.space
    e = space.entity(e)
    f = space.index(feature)
    base = c.label(e)
    others = [i for i in range(len(space)) if i != f]
    if max_contingency is None:
        max_contingency = len(others)
    if max_contingency >= len(space):
        _fail(f"max contingency {max_contingency} must be below the feature count {len(space)}")
    for k in range(max_contingency + 1):
        best = None
        for gamma in combinations(others, k):
            for w in _alternatives(space, e, gamma):
                e1 = _assign(e, gamma, w)
                if c.label(e1) != base:
                    continue
                fixed = {i: e1[i] for i in range(len(space)) if i != f}
                ex = dist.expectation(c, fixed, {f: e[f]} if exclude_original else None)
                if ex is None:
                    continue
                num = c.label(e1) - ex
                if num > 0:
                    local = num / (1 + k)
                    if best is None or local > best.value:
                        best = RespResult(local, tuple(space.names[i] for i in gamma), w)
        if best is not None:
            return best
    return RespResult(Fraction(0), (), ())


def _shap_game(c, e, dist):
    n = len(c.space)
    if n > MAX_SHAP_FEATURES:
        raise CapExceeded(f"{n} features exceed the Shap cap of {MAX_SHAP_FEATURES}", MODULE)
    game = {}
    for mask in range(1 << n):
        fixed = {i: e[i] for i in range(n) if mask >> i & 1}
        val = dist.expectation(c, fixed)
        if val is None:
            _fail(f"entity agrees with no sampled entity on {sorted(c.space.names[i] for i in fixed)}")
        game[mask] = val
    return game


def _shap_from_game(game, n, f):
    total = Fraction(0)
    for mask in range(1 << n):
        if mask >> f & 1:
            continue
        k = bin(mask).count("1")
        total += Fraction(factorial(k) * factorial(n - k - 1), factorial(n)) * (game[mask | 1 << f] - game[mask])
    return total


def shap_score(c, e, feature, dist=None):
    dist = dist or Distribution()
    e = c.space.entity(e)
    return _shap_from_game(_shap_game(c, e, dist), len(c.space), c.space.index(feature))


def shap_all(c, e, dist=None):
    """Shap score of every feature, sharing one game table."""
    dist = dist or Distribution()
    e = c.space.entity(e)
    game = _shap_game(c, e, dist)
    n = len(c.space)
    return {name: _shap_from_game(game, n, i) for i, name in enumerate(c.space.names)}


def expected_label(c, dist=None):
    return (dist or Distribution()).expectation(c, {})

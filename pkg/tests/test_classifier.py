from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbexplain.classifier import (
    EMPIRICAL,
    PRODUCT,
    UNIFORM,
    DecisionTree,
    Distribution,
    FeatureSpace,
    LabelTable,
    classify,
    counter_score,
    counterfactual_versions,
    expected_label,
    load_classifier,
    resp_score,
    shap_all,
    shap_score,
    x_resp,
)
from dbexplain.errors import LoadError, PreconditionError

from conftest import fixture

E = ("sunny", "normal", "weak")


@pytest.fixture
def tree():
    return load_classifier(fixture("tennis/tree.json"))


def test_tree_labels(tree):
    assert classify(tree, "sunny,normal,weak") == 1
    assert classify(tree, ("sunny", "high", "weak")) == 0
    assert classify(tree, ("rain", "normal", "strong")) == 0
    assert classify(tree, ("overcast", "high", "strong")) == 1


def test_tree_paths(tree):
    paths = tree.paths()
    assert len(paths) == 5
    assert ([(0, ("overcast",))], 1) in paths


def test_bad_entity(tree):
    with pytest.raises(PreconditionError, match="domain of outlook"):
        classify(tree, ("snow", "high", "weak"))
    with pytest.raises(PreconditionError):
        classify(tree, ("sunny", "high"))


def test_tree_must_cover_domain():
    data = {
        "features": [{"name": "a", "domain": ["0", "1"]}],
        "tree": {"feature": "a", "branches": {"0": {"leaf": "yes"}}},
    }
    with pytest.raises(PreconditionError, match="cover"):
        DecisionTree.from_json(data)
    with pytest.raises(LoadError):
        DecisionTree.from_json({"tree": {}})


def test_counterfactual_versions(tree):
    versions = counterfactual_versions(tree, E, 2)
    assert versions[0].entity == ("sunny", "high", "weak") and versions[0].changed == ("humidity",)
    assert {v.entity for v in versions if v.distance == 2} == {("sunny", "high", "strong"), ("rain", "normal", "strong")}
    assert [v.entity for v in counterfactual_versions(tree, E, 1)] == [("sunny", "high", "weak")]


def test_x_resp(tree):
    assert x_resp(tree, E, "humidity") == 1
    assert x_resp(tree, E, "outlook") == Fraction(1, 2)
    assert x_resp(tree, E, "wind") == Fraction(1, 2)
    d = x_resp(tree, E, "outlook", detail=True)
    assert d.contingency == {"wind": "strong"} and d.flip_value == "rain"


def test_counter_and_resp(tree):
    assert [counter_score(tree, E, f) for f in ("outlook", "humidity", "wind")] == [0, Fraction(1, 2), 0]
    r = resp_score(tree, E, "wind")
    assert r.value == Fraction(1, 4) and r.contingency == ("outlook",) and r.values == ("rain",)
    assert resp_score(tree, E, "humidity").value == Fraction(1, 2)
    # without the original value the expectation only sees "high"
    assert resp_score(tree, E, "humidity", exclude_original=True).value == 1
    assert resp_score(tree, E, "outlook", max_contingency=0).value == 0


def test_shap(tree):
    got = shap_all(tree, E)
    assert got == {"outlook": Fraction(-1, 12), "humidity": Fraction(1, 3), "wind": Fraction(1, 12)}
    assert sum(got.values()) == classify(tree, E) - expected_label(tree)
    assert shap_score(tree, E, "wind") == Fraction(1, 12)


def test_distributions(tree):
    sample = [("sunny", "high", "weak"), ("rain", "normal", "strong"), ("sunny", "normal", "weak")]
    emp = Distribution(EMPIRICAL, sample)
    assert expected_label(tree, emp) == Fraction(1, 3)
    assert emp.expectation(tree, {0: "overcast"}) is None
    prod_ = Distribution(PRODUCT, sample)
    # P(outlook=sunny)=2/3, P(humidity=normal)=2/3, P(wind=weak)=2/3
    assert expected_label(tree, prod_) == Fraction(2, 3) * Fraction(2, 3) + Fraction(1, 3) * Fraction(2, 3)
    got = shap_all(tree, E, prod_)
    assert sum(got.values()) == 1 - expected_label(tree, prod_)
    with pytest.raises(PreconditionError):
        Distribution(PRODUCT, [])


def test_label_table_csv(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b,label\n0,0,0\n0,1,1\n1,0,1\n1,1,1\n")
    c = load_classifier(path)
    assert classify(c, "0,1") == 1
    assert shap_all(c, ("1", "1")) == {"a": Fraction(1, 8), "b": Fraction(1, 8)}
    path.write_text("a,b,label\n0,0,0\n1,1,1\n")
    with pytest.raises(PreconditionError, match="not total"):
        load_classifier(path)


# property suites on random label tables


@st.composite
def tables(draw):
    sizes = draw(st.lists(st.integers(2, 3), min_size=2, max_size=3))
    space = FeatureSpace([(f"f{i}", [str(v) for v in range(k)]) for i, k in enumerate(sizes)])
    ents = list(product(*space.domains))
    labels = draw(st.lists(st.integers(0, 1), min_size=len(ents), max_size=len(ents)))
    e = draw(st.sampled_from(ents))
    return LabelTable(space, dict(zip(ents, labels))), e


def brute_x_resp(c, e, f):
    n = len(c.space)
    others = [i for i in range(n) if i != f]
    base = c.label(e)
    best = Fraction(0)
    for x in product(*c.space.domains):
        if x[f] != e[f] and c.label(x) != base:
            ys = [i for i in others if x[i] != e[i]]
            mid = tuple(e[f] if i == f else x[i] for i in range(n))
            if c.label(mid) == base:
                best = max(best, Fraction(1, 1 + len(ys)))
    return best


@settings(max_examples=200, deadline=None)
@given(tables())
def test_classifier_scores_invariants(ce):
    c, e = ce
    names = c.space.names
    shap = shap_all(c, e)
    assert sum(shap.values()) == c.label(e) - expected_label(c)
    for v in counterfactual_versions(c, e):
        assert c.label(v.entity) != c.label(e)
        assert v.distance == sum(a != b for a, b in zip(v.entity, e))
    for i, f in enumerate(names):
        assert x_resp(c, e, f) == brute_x_resp(c, e, i)
        counter = counter_score(c, e, f)
        r = resp_score(c, e, f)
        if counter > 0:
            # the empty contingency already gives a positive numerator
            assert r.contingency == () and r.value == counter
        if r.value > 0 and r.contingency:
            k = len(r.contingency)
            assert resp_score(c, e, f, max_contingency=k - 1).value == 0

"""Score-based explanations for query answers and classifier outcomes."""
from .asp import AspProgram, emit_attr_repair_program, emit_cip, emit_inc_measure_program, emit_repair_program
from .causality import CauseReport, actual_causes, attr_causes, cause_report, causes_under_ics, responsibility
from .classifier import (
    DecisionTree,
    Distribution,
    FeatureSpace,
    LabelTable,
    classify,
    counter_score,
    counterfactual_versions,
    resp_score,
    shap_score,
    x_resp,
)
from .errors import CapExceeded, DBExplainError, LoadError, ParseError, PreconditionError, QueryError, SchemaError
from .query import CQ, UCQ, DenialConstraint, InclusionDependency, dcs_for, is_hierarchical, negate_to_dc, parse
from .relational import NULL, DatabaseInstance, eval_query, load_database, witnesses
from .repairs import attr_repairs, c_repairs, conflict_hypergraph, inc_degree, s_repairs
from .scores import (
    LineageFormula,
    TupleProbability,
    banzhaf,
    causal_effect,
    intervene,
    lineage,
    prob_true,
    shapley,
    shapley_sampled,
)

__version__ = "0.1.0"

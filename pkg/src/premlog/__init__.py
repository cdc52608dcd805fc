"""Datalog with min/max/count aggregates and PreM-based aggregate pushdown."""
from .analysis import analyze, build_graph, classify_rules, inline_condition_rules, safety_check, stratify
from .engine.evaluate import (
    DEFAULT_CAP,
    FixpointStats,
    apply_gamma,
    apply_T,
    eval_constrained,
    eval_seminaive,
    eval_stratified,
)
from .engine.foreign import ForeignPredicate, LinearRegression, eval_foreign
from .engine.relation import Interpretation, Relation
from .errors import *  # noqa: F401,F403
from .facts import load_facts
from .parser import parse_atom, parse_program
from .pipeline import eval_query, load_program, prepare, run_query
from .prem.certify import CertificationReport, certify_program, certify_step
from .prem.classify import classify_prem
from .prem.gamma import ConstraintGamma, PremClass, Selection
from .prem.rewrite import demand_rewrite, negation_rewrite, push_aggregate, push_constant
from .syntax import AggregateSpec, Atom, Program, Rule, pretty_print

__version__ = "0.1.0"

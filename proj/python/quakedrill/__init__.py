"""Earthquake drill scenario engine and pre/post training statistics."""

import json as _json

from . import _quakedrill as _core
from ._quakedrill import (
    AssessmentError,
    CohortError,
    KnowledgeError,
    LogFormatError,
    ParseError,
    ScriptError,
    SessionError,
    StatsError,
    merge_coders,
    render,
    score_knowledge,
    simulate_cohort,
    wilcoxon_exact_p,
)

__all__ = [
    "AssessmentError",
    "CohortError",
    "KnowledgeError",
    "LogFormatError",
    "ParseError",
    "ScriptError",
    "SessionError",
    "StatsError",
    "analyze",
    "assess_log",
    "descriptives",
    "factor_scores",
    "merge_coders",
    "render",
    "run_agent",
    "score_knowledge",
    "shapiro_wilk",
    "simulate_cohort",
    "validate",
    "wilcoxon",
    "wilcoxon_exact_p",
]


def validate(source):
    """Validation report of a .drill source as a dict."""
    return _json.loads(_core.validate(source))


def run_agent(source, agent="optimal", seed=0, stall=0.0, script=None, participant="agent"):
    """Play a scenario with a scripted agent. Returns (event log text, report dict)."""
    log, report = _core.run_agent(source, agent, seed, stall, script, participant)
    return log, _json.loads(report)


def assess_log(source, log, session_id=""):
    """Assessment report for a finished session log."""
    return _json.loads(_core.assess_log(source, log, session_id))


def wilcoxon(pre, post, continuity_correction=True):
    return _json.loads(_core.wilcoxon(pre, post, continuity_correction))


def shapiro_wilk(samples):
    return _json.loads(_core.shapiro_wilk(samples))


def descriptives(samples):
    return _json.loads(_core.descriptives(samples))


def factor_scores(rows):
    """One-factor regression scores for a respondents-by-items table. Returns (scores, loadings)."""
    return _core.factor_scores(rows)


def analyze(csv, as_text=False):
    """Pre/post comparison of a cohort CSV, as a dict or as rendered text."""
    out = _core.analyze(csv, as_text)
    return out if as_text else _json.loads(out)

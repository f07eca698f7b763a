"""Scenario generation, out-of-sample evaluation, sweeps and model comparison."""
from .compare import ModelComparison, compare_models, possible_unfeasible, worst_hours
from .evaluate import AssessmentReport, Histogram, RecourseError, histogram, out_of_sample_evaluate
from .scenarios import GENERATORS, THREE_POINT, WEIBULL, ScenarioSet, case_bands, case_scenarios, generate_scenarios
from .sweep import CASES, SweepError, SweepResult, SweepRow, parse_grid, saturation_point, sweep_budgets

__all__ = [
    "CASES", "GENERATORS", "THREE_POINT", "WEIBULL", "AssessmentReport", "Histogram", "ModelComparison",
    "RecourseError", "ScenarioSet", "SweepError", "SweepResult", "SweepRow", "case_bands", "case_scenarios",
    "compare_models", "generate_scenarios", "histogram", "out_of_sample_evaluate", "parse_grid",
    "possible_unfeasible", "saturation_point", "sweep_budgets", "worst_hours",
]

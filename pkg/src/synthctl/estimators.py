"""Estimator variants and donor-pool trimming.

Four ways to produce a counterfactual path for the treated unit:

* :func:`estimate_standard` -- simplex-constrained weights on predictors.
* :func:`estimate_constant_shift` -- the same fit after removing each
  unit's own pre-treatment mean, which is equivalent to adding a free
  intercept to the criterion while keeping the weight constraints.
* :func:`estimate_unrestricted` -- ordinary least squares with intercept
  and sign-unrestricted weights; underdetermined systems take the
  minimum-norm solution, which fits the pre-period exactly.
* :func:`trim_donor_pool` -- restrict the donor pool to the units nearest
  the treated unit in predictor space before fitting.

Each added degree of freedom can only improve pre-treatment fit, so
pre-RMSE is ordered unrestricted <= constant-shift <= standard on every
input; out-of-sample accuracy routinely orders the other way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecificationError, NumericInputError
from .evaluation import window_rmse
from .panel import (
    EstimationResult,
    Panel,
    PredictorSet,
    PredictorSpec,
    WeightVector,
    build_predictors,
)
from .solver import DEFAULT_CONFIG, SolverConfig, solve_simplex_ls

__all__ = [
    "TrimSpec",
    "EstimatorSpec",
    "estimate_standard",
    "estimate_constant_shift",
    "estimate_unrestricted",
    "trim_donor_pool",
    "run_estimator",
]

ESTIMATOR_KINDS = ("standard", "constant_shift", "unrestricted")


@dataclass(frozen=True)
class TrimSpec:
    """Keep only the donors nearest the treated unit.

    Exactly one of ``keep_count`` and ``keep_fraction`` must be given.
    Distance is plain Euclidean on the predictor columns; ties resolve by
    original unit order, and the nearest donor is always retained.
    """

    keep_count: int | None = None
    keep_fraction: float | None = None

    def __post_init__(self):
        if (self.keep_count is None) == (self.keep_fraction is None):
            raise InvalidSpecificationError("give exactly one of keep_count / keep_fraction")
        if self.keep_count is not None and self.keep_count < 1:
            raise InvalidSpecificationError("keep_count must be at least 1")
        if self.keep_fraction is not None and not 0 < self.keep_fraction <= 1:
            raise InvalidSpecificationError("keep_fraction must lie in (0, 1]")

    def resolve(self, n_donors: int) -> int:
        if self.keep_count is not None:
            if self.keep_count > n_donors:
                raise InvalidSpecificationError(
                    f"keep_count {self.keep_count} exceeds donor pool size {n_donors}"
                )
            return self.keep_count
        return max(1, min(n_donors, round(self.keep_fraction * n_donors)))


@dataclass(frozen=True)
class EstimatorSpec:
    """Complete recipe: estimator kind, optional trimming, predictors, solver."""

    kind: str = "standard"
    trim: TrimSpec | None = None
    predictor_spec: PredictorSpec = field(default_factory=PredictorSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise InvalidSpecificationError(
                f"estimator kind must be one of {ESTIMATOR_KINDS}, got {self.kind!r}"
            )


def _finish(panel: Panel, weights: WeightVector, counterfactual: np.ndarray) -> EstimationResult:
    effect = panel.treated - counterfactual
    return EstimationResult(
        weights=weights,
        counterfactual=counterfactual,
        effect=effect,
        pre_rmse=window_rmse(effect, 0, panel.t0),
        post_rmse=window_rmse(effect, panel.t0, panel.n_periods),
        donor_ids=panel.donor_ids,
    )


def estimate_standard(
    panel: Panel, predictors: PredictorSet, solver: SolverConfig = DEFAULT_CONFIG
) -> EstimationResult:
    """Simplex-weighted counterfactual from the given predictor set."""
    if predictors.n_donors != panel.n_donors:
        raise InvalidSpecificationError("predictors and panel disagree on donor count")
    weights = solve_simplex_ls(predictors, solver)
    counterfactual = panel.donors.T @ weights.w
    return _finish(panel, weights, counterfactual)


def estimate_constant_shift(
    panel: Panel, predictors: PredictorSet, solver: SolverConfig = DEFAULT_CONFIG
) -> EstimationResult:
    """Simplex weights plus a constant shift.

    Fits the standard problem on outcomes measured as deviations from
    their own pre-treatment means, then sets the intercept so the shifted
    combination reproduces the treated unit's pre-treatment level:
    ``alpha = mean_pre(treated) - sum_j w_j mean_pre(donor_j)``.

    Requires an outcome-only predictor set (the variant is defined on
    pre-treatment outcomes); the predictor importance vector v is passed
    through unchanged.
    """
    if predictors.n_donors != panel.n_donors:
        raise InvalidSpecificationError("predictors and panel disagree on donor count")
    if not predictors.outcome_only:
        raise InvalidSpecificationError(
            "constant-shift estimation requires outcome-only predictors"
        )
    pre_means = panel.outcomes[:, : panel.t0].mean(axis=1)
    demeaned = PredictorSet(
        predictors.x1 - pre_means[0],
        predictors.x0 - pre_means[1:][None, :],
        predictors.v,
        predictors.labels,
        predictors.periods,
        predictors.n_outcome_rows,
    )
    fitted = solve_simplex_ls(demeaned, solver)
    alpha = float(pre_means[0] - pre_means[1:] @ fitted.w)
    weights = WeightVector(fitted.w, intercept=alpha, constrained=True)
    counterfactual = alpha + panel.donors.T @ weights.w
    return _finish(panel, weights, counterfactual)


def estimate_unrestricted(panel: Panel, predictors: PredictorSet) -> EstimationResult:
    """Unrestricted regression of treated on donor pre-period outcomes.

    Solves ordinary least squares with an intercept and free weights.
    When the system is underdetermined (J + 1 > number of fitted periods)
    the minimum-norm coefficient vector is returned, which reproduces the
    pre-treatment trajectory exactly.
    """
    if predictors.n_donors != panel.n_donors:
        raise InvalidSpecificationError("predictors and panel disagree on donor count")
    if not predictors.outcome_only:
        raise InvalidSpecificationError("unrestricted estimation requires outcome-only predictors")
    if not (np.all(np.isfinite(predictors.x0)) and np.all(np.isfinite(predictors.x1))):
        raise NumericInputError("predictor matrices contain non-finite values")
    design = np.column_stack([np.ones(predictors.k), predictors.x0])
    beta = np.linalg.lstsq(design, predictors.x1, rcond=None)[0]
    alpha = float(beta[0])
    weights = WeightVector(beta[1:], intercept=alpha, constrained=False)
    counterfactual = alpha + panel.donors.T @ weights.w
    return _finish(panel, weights, counterfactual)


def trim_donor_pool(
    panel: Panel, predictors: PredictorSet, trim: TrimSpec
) -> tuple[Panel, PredictorSet]:
    """Restrict panel and predictors to the donors nearest the treated unit.

    Distance is the Euclidean norm ||x1 - x0[:, j]|| on predictor columns.
    The retained donors keep their original panel order and identities, so
    downstream results can be reported against original units.
    """
    n = predictors.n_donors
    if n != panel.n_donors:
        raise InvalidSpecificationError("predictors and panel disagree on donor count")
    keep_n = trim.resolve(n)
    if keep_n == n:
        return panel, predictors
    dist = np.sqrt(((predictors.x0 - predictors.x1[:, None]) ** 2).sum(axis=0))
    nearest = np.argsort(dist, kind="stable")[:keep_n]
    keep = np.sort(nearest)
    outcome_rows = np.concatenate([[0], keep + 1])
    trimmed = Panel(
        panel.outcomes[outcome_rows],
        panel.t0,
        unit_ids=tuple(panel.unit_ids[i] for i in outcome_rows),
        baseline=panel.baseline,
    )
    return trimmed, predictors.restrict_donors(keep)


def run_estimator(
    panel: Panel, spec: EstimatorSpec, covariates: np.ndarray | None = None
) -> EstimationResult:
    """Build predictors, apply optional trimming, and run the chosen estimator."""
    predictors = build_predictors(panel, covariates, spec.predictor_spec)
    if spec.trim is not None:
        panel, predictors = trim_donor_pool(panel, predictors, spec.trim)
    if spec.kind == "standard":
        return estimate_standard(panel, predictors, spec.solver)
    if spec.kind == "constant_shift":
        return estimate_constant_shift(panel, predictors, spec.solver)
    return estimate_unrestricted(panel, predictors)

"""Fit metrics and the backdating validation exercise.

Pre-RMSE is the root-mean-square gap between the treated and synthetic
paths over periods 1..t0; post-RMSE is the same over t0+1..T. Under a
null treatment effect the post-RMSE measures pure estimation error.

:func:`backdate` refits the weights as if the treatment had happened at an
earlier period t0_b, leaving the true pre-treatment periods t0_b+1..t0 as
a holdout window. Holdout accuracy can be inspected before any
post-treatment data exists, which is what makes the exercise usable for
study design. The backdated fit provably never touches data after t0_b:
the refit runs on a copy of the panel whose treatment date is moved to
t0_b, so period selection is validated against that earlier date.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecificationError
from .panel import EstimationResult, Panel, WeightVector

__all__ = ["window_rmse", "pre_rmse", "post_rmse", "backdate", "BackdateReport"]


def window_rmse(effect: np.ndarray, start: int, stop: int) -> float:
    """RMSE of an effect/gap path over the half-open period window [start, stop)."""
    if stop <= start:
        raise InvalidSpecificationError("empty RMSE window")
    seg = np.asarray(effect, dtype=np.float64)[start:stop]
    return float(np.sqrt(np.mean(seg * seg)))


def pre_rmse(panel: Panel, result: EstimationResult) -> float:
    """Root-mean-square treated-minus-synthetic gap over periods 1..t0."""
    return window_rmse(panel.treated - result.counterfactual, 0, panel.t0)


def post_rmse(panel: Panel, result: EstimationResult) -> float:
    """Root-mean-square treated-minus-synthetic gap over periods t0+1..T."""
    return window_rmse(panel.treated - result.counterfactual, panel.t0, panel.n_periods)


@dataclass(frozen=True)
class BackdateReport:
    """Outcome of one backdating run.

    ``holdout_rmse`` measures the backdated fit on the held-out true
    pre-treatment periods t0_b+1..t0; ``post_rmse`` measures it on the
    actual post-treatment periods; ``effect_path`` is the full
    treated-minus-synthetic path under the backdated weights. ``pre_rmse``
    covers the whole true pre-treatment window 1..t0 (fitted plus holdout
    periods) for comparability with un-backdated fits.
    """

    t0_backdated: int
    weights_backdated: WeightVector
    holdout_rmse: float
    post_rmse: float
    effect_path: np.ndarray
    pre_rmse: float
    counterfactual: np.ndarray
    donor_ids: tuple = ()


def backdate(
    panel: Panel, spec, t0_backdated: int, covariates: np.ndarray | None = None
) -> BackdateReport:
    """Refit with the treatment date moved back to ``t0_backdated``.

    The estimator spec is applied to the panel as if treatment started at
    t0_b, so weights are fitted on periods 1..t0_b only; outcomes at
    t > t0_b influence nothing but the reported paths and metrics.
    """
    from .estimators import run_estimator

    t0b = int(t0_backdated)
    if not 1 <= t0b < panel.t0:
        raise InvalidSpecificationError(
            f"backdated treatment date must satisfy 1 <= t0_b < t0, got {t0b} vs t0={panel.t0}"
        )
    result = run_estimator(panel.with_t0(t0b), spec, covariates)
    effect = result.effect
    return BackdateReport(
        t0_backdated=t0b,
        weights_backdated=result.weights,
        holdout_rmse=window_rmse(effect, t0b, panel.t0),
        post_rmse=window_rmse(effect, panel.t0, panel.n_periods),
        effect_path=effect,
        pre_rmse=window_rmse(effect, 0, panel.t0),
        counterfactual=result.counterfactual,
        donor_ids=result.donor_ids,
    )

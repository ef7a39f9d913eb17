"""Panel, predictor, and result types shared by the whole package.

A :class:`Panel` is a balanced rectangular outcome array for 1 treated unit
plus J donors over T periods, split at ``t0`` into pre- and post-treatment
windows. :func:`build_predictors` turns a panel (and optional covariates)
into the matching-variable matrices the weight solver consumes.

All types are immutable after construction (frozen dataclasses holding
read-only arrays) and safe to share across worker processes or threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidSpecificationError, NumericInputError, PanelFormatError

__all__ = [
    "Panel",
    "PredictorSpec",
    "PredictorSet",
    "WeightVector",
    "EstimationResult",
    "build_predictors",
    "read_panel_csv",
    "write_panel_csv",
]

#: Numerical slack allowed on simplex feasibility of constrained weights.
EPS_FEASIBLE = 1e-8


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Panel:
    """Outcome panel for one treated unit and J donor units.

    Parameters
    ----------
    outcomes
        Array of shape (J+1, T). Row 0 is the treated unit; rows 1..J are
        the donor pool. Periods are labelled 1..T in user-facing output.
    t0
        Number of pre-treatment periods (1 <= t0 < T). The intervention
        takes effect at period t0 + 1.
    unit_ids
        Identity labels, one per row. Defaults to 1..J+1, matching the
        usual j = 1..J+1 indexing convention. Preserved by donor trimming
        so weights can always be reported against original units.
    baseline
        Optional length-T path of the treated unit's untreated potential
        outcome. Set by the simulation generators (where it is known by
        construction) and used to measure estimation error; ``None`` for
        real data.
    """

    outcomes: np.ndarray
    t0: int
    treated_index: int = 0
    unit_ids: tuple = ()
    baseline: np.ndarray | None = None

    def __post_init__(self):
        out = np.asarray(self.outcomes, dtype=np.float64)
        if out.ndim != 2:
            raise InvalidSpecificationError("outcomes must be a 2-D (units x periods) array")
        if not np.all(np.isfinite(out)):
            raise NumericInputError("panel outcomes contain non-finite values")
        n_units, n_periods = out.shape
        if n_units < 2:
            raise InvalidSpecificationError("panel needs at least one donor (J >= 1)")
        if not 1 <= int(self.t0) < n_periods:
            raise InvalidSpecificationError(
                f"t0 must satisfy 1 <= t0 < T, got t0={self.t0} with T={n_periods}"
            )
        if self.treated_index != 0:
            raise InvalidSpecificationError("the treated unit must be stored first (index 0)")
        ids = tuple(self.unit_ids) if self.unit_ids else tuple(range(1, n_units + 1))
        if len(ids) != n_units:
            raise InvalidSpecificationError("unit_ids length must match the unit count")
        object.__setattr__(self, "outcomes", _freeze(out))
        object.__setattr__(self, "t0", int(self.t0))
        object.__setattr__(self, "unit_ids", ids)
        if self.baseline is not None:
            base = np.asarray(self.baseline, dtype=np.float64)
            if base.shape != (n_periods,):
                raise InvalidSpecificationError("baseline must have length T")
            object.__setattr__(self, "baseline", _freeze(base))

    @property
    def n_units(self) -> int:
        return self.outcomes.shape[0]

    @property
    def n_donors(self) -> int:
        """J, the donor-pool size."""
        return self.outcomes.shape[0] - 1

    @property
    def n_periods(self) -> int:
        return self.outcomes.shape[1]

    @property
    def treated(self) -> np.ndarray:
        """Observed outcome path of the treated unit, length T."""
        return self.outcomes[0]

    @property
    def donors(self) -> np.ndarray:
        """Donor outcome matrix of shape (J, T)."""
        return self.outcomes[1:]

    @property
    def donor_ids(self) -> tuple:
        return self.unit_ids[1:]

    def with_t0(self, t0: int) -> "Panel":
        """Same panel with the treatment date moved to ``t0`` (backdating)."""
        return Panel(self.outcomes, t0, 0, self.unit_ids, self.baseline)


@dataclass(frozen=True)
class PredictorSpec:
    """Selection rule for building matching variables from a panel.

    ``periods`` lists 1-based pre-treatment periods whose outcomes enter
    the predictor vector (default: all of 1..t0).  ``covariate_columns``
    selects 0-based columns of the covariate matrix (default: all columns
    of the matrix passed to :func:`build_predictors`, none if absent).
    ``weighting`` sets the predictor-importance vector v: the default
    ``"inverse_variance"`` standardizes each predictor row by its sample
    variance across donors (rows with zero variance fall back to v = 1);
    ``"uniform"`` gives v = 1 everywhere, which makes the objective the
    plain pre-period least-squares criterion used by the outcome-only
    simulation designs.
    """

    periods: tuple[int, ...] | None = None
    covariate_columns: tuple[int, ...] | None = None
    weighting: str = "inverse_variance"

    def __post_init__(self):
        if self.weighting not in ("uniform", "inverse_variance"):
            raise InvalidSpecificationError(
                f"weighting must be 'uniform' or 'inverse_variance', got {self.weighting!r}"
            )
        if self.periods is not None:
            object.__setattr__(self, "periods", tuple(int(p) for p in self.periods))
        if self.covariate_columns is not None:
            object.__setattr__(
                self, "covariate_columns", tuple(int(c) for c in self.covariate_columns)
            )


@dataclass(frozen=True)
class PredictorSet:
    """Matching variables for the weight selector.

    ``x1`` (length k) holds the treated unit's predictor values, ``x0``
    (k x J) the donors', and ``v`` the non-negative importance weight of
    each predictor row. ``n_outcome_rows`` counts how many leading rows
    are pre-treatment outcomes (the rest are covariates).
    """

    x1: np.ndarray
    x0: np.ndarray
    v: np.ndarray
    labels: tuple[str, ...] = ()
    periods: tuple[int, ...] = ()
    n_outcome_rows: int = 0

    def __post_init__(self):
        x1 = np.asarray(self.x1, dtype=np.float64)
        x0 = np.asarray(self.x0, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if x1.ndim != 1 or x0.ndim != 2 or x0.shape[0] != x1.shape[0]:
            raise InvalidSpecificationError("x1 must be length k and x0 shape (k, J)")
        if x0.shape[1] < 1:
            raise InvalidSpecificationError("x0 needs at least one donor column")
        if v.shape != x1.shape:
            raise InvalidSpecificationError("v must have one entry per predictor row")
        if np.any(v < 0) or not np.any(v > 0):
            raise InvalidSpecificationError("v entries must be >= 0 with at least one > 0")
        labels = tuple(self.labels) if self.labels else tuple(f"p{i+1}" for i in range(len(x1)))
        if len(labels) != len(x1):
            raise InvalidSpecificationError("labels length must be k")
        object.__setattr__(self, "x1", _freeze(x1))
        object.__setattr__(self, "x0", _freeze(x0))
        object.__setattr__(self, "v", _freeze(v))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "periods", tuple(self.periods))

    @property
    def k(self) -> int:
        return self.x1.shape[0]

    @property
    def n_donors(self) -> int:
        return self.x0.shape[1]

    @property
    def outcome_only(self) -> bool:
        return self.n_outcome_rows == self.k

    def restrict_donors(self, keep: Sequence[int]) -> "PredictorSet":
        """Predictor set restricted to the given donor column positions."""
        keep = np.asarray(keep, dtype=np.intp)
        return PredictorSet(
            self.x1, self.x0[:, keep], self.v, self.labels, self.periods, self.n_outcome_rows
        )


@dataclass(frozen=True)
class WeightVector:
    """Donor weights, optionally with an intercept shift.

    When ``constrained`` is true the weights satisfy the simplex
    constraints (non-negative, summing to one) up to 1e-8 slack, and the
    intercept is absent unless produced by the constant-shift estimator.
    """

    w: np.ndarray
    intercept: float | None = None
    constrained: bool = True

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1:
            raise InvalidSpecificationError("weights must be a 1-D vector")
        if not np.all(np.isfinite(w)):
            raise NumericInputError("weights contain non-finite values")
        if self.constrained:
            if np.any(w < -EPS_FEASIBLE):
                raise InvalidSpecificationError("constrained weights must be non-negative")
            if abs(float(w.sum()) - 1.0) > EPS_FEASIBLE:
                raise InvalidSpecificationError("constrained weights must sum to one")
        object.__setattr__(self, "w", _freeze(w))
        if self.intercept is not None:
            object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def n_donors(self) -> int:
        return self.w.shape[0]

    def nonzero_count(self, threshold: float = 0.0) -> int:
        return int(np.sum(self.w > threshold))


@dataclass(frozen=True)
class EstimationResult:
    """Fitted weights plus the paths and fit metrics derived from them.

    ``effect[t]`` is exactly ``observed treated outcome - counterfactual[t]``
    for every period. ``donor_ids`` maps weight positions back to original
    unit identities, which matters after donor trimming.
    """

    weights: WeightVector
    counterfactual: np.ndarray
    effect: np.ndarray
    pre_rmse: float
    post_rmse: float
    donor_ids: tuple = ()

    def __post_init__(self):
        cf = np.asarray(self.counterfactual, dtype=np.float64)
        eff = np.asarray(self.effect, dtype=np.float64)
        if cf.shape != eff.shape or cf.ndim != 1:
            raise InvalidSpecificationError("counterfactual and effect must be equal-length vectors")
        object.__setattr__(self, "counterfactual", _freeze(cf))
        object.__setattr__(self, "effect", _freeze(eff))
        object.__setattr__(self, "pre_rmse", float(self.pre_rmse))
        object.__setattr__(self, "post_rmse", float(self.post_rmse))
        object.__setattr__(self, "donor_ids", tuple(self.donor_ids))

    def weight_for_unit(self, unit_id) -> float:
        """Weight assigned to a donor by original identity (0.0 if absent)."""
        try:
            pos = self.donor_ids.index(unit_id)
        except ValueError:
            return 0.0
        return float(self.weights.w[pos])


def build_predictors(
    panel: Panel,
    covariates: np.ndarray | None = None,
    spec: PredictorSpec | None = None,
) -> PredictorSet:
    """Assemble the predictor matrices X1 and X0 from a panel.

    Selected pre-treatment outcome rows come first, then selected covariate
    columns. Post-treatment outcomes can never enter: period selections are
    validated against ``panel.t0`` to rule out look-ahead leakage.

    Parameters
    ----------
    panel
        Source panel.
    covariates
        Optional (J+1, m) matrix of time-invariant covariates, rows aligned
        with panel units.
    spec
        Row-selection and weighting rule; defaults to all pre-treatment
        periods, all covariate columns, inverse-variance v.
    """
    spec = spec or PredictorSpec()
    t0, n_units = panel.t0, panel.n_units

    periods = spec.periods if spec.periods is not None else tuple(range(1, t0 + 1))
    if len(periods) == 0 and covariates is None:
        raise InvalidSpecificationError("predictor spec selects no rows")
    for p in periods:
        if not 1 <= p <= t0:
            raise InvalidSpecificationError(
                f"predictor period {p} outside the pre-treatment window 1..{t0}"
            )

    rows_x1 = [panel.treated[p - 1] for p in periods]
    rows_x0 = [panel.donors[:, p - 1] for p in periods]
    labels = [f"Y_pre_t{p}" for p in periods]

    n_cov = 0
    if covariates is not None:
        cov = np.asarray(covariates, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != n_units:
            raise InvalidSpecificationError("covariates must have one row per panel unit")
        if not np.all(np.isfinite(cov)):
            raise NumericInputError("covariates contain non-finite values")
        cols = (
            spec.covariate_columns
            if spec.covariate_columns is not None
            else tuple(range(cov.shape[1]))
        )
        for c in cols:
            if not 0 <= c < cov.shape[1]:
                raise InvalidSpecificationError(f"covariate column {c} does not exist")
        for c in cols:
            rows_x1.append(cov[0, c])
            rows_x0.append(cov[1:, c])
            labels.append(f"Z_{c + 1}")
        n_cov = len(cols)
    elif spec.covariate_columns:
        raise InvalidSpecificationError("covariate columns selected but no covariates given")

    x1 = np.array(rows_x1, dtype=np.float64)
    x0 = np.vstack([np.atleast_1d(r) for r in rows_x0]).reshape(len(rows_x0), -1)

    if spec.weighting == "inverse_variance":
        var = x0.var(axis=1, ddof=1) if x0.shape[1] > 1 else np.zeros(x0.shape[0])
        v = np.where(var > 0, 1.0 / np.where(var > 0, var, 1.0), 1.0)
    else:
        v = np.ones(len(x1))

    return PredictorSet(x1, x0, v, tuple(labels), periods, n_outcome_rows=len(periods))


def read_panel_csv(path, t0: int, treated=None) -> Panel:
    """Load a wide-format panel CSV.

    Expected layout: header row ``unit,t1,t2,...,tT``; one data row per
    unit. The treated unit is the first data row unless ``treated`` names
    another unit id, in which case that row is moved to the front.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelFormatError("empty panel file", line=1) from None
        if len(header) < 2 or header[0].strip().lower() != "unit":
            raise PanelFormatError("header must be 'unit,t1,...,tT'", line=1, column=1)

        ids: list[str] = []
        rows: list[list[float]] = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise PanelFormatError(
                    f"expected {len(header)} fields, found {len(rec)}", line=lineno
                )
            values = []
            for col, cell in enumerate(rec[1:], start=2):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise PanelFormatError(
                        f"could not parse {cell!r} as a number", line=lineno, column=col
                    ) from None
            ids.append(rec[0].strip())
            rows.append(values)

    if len(rows) < 2:
        raise PanelFormatError("panel needs a treated unit and at least one donor")

    if treated is not None:
        treated = str(treated)
        if treated not in ids:
            raise PanelFormatError(f"treated unit {treated!r} not found in panel")
        pos = ids.index(treated)
        ids.insert(0, ids.pop(pos))
        rows.insert(0, rows.pop(pos))

    return Panel(np.array(rows, dtype=np.float64), t0, unit_ids=tuple(ids))


def write_panel_csv(path, panel: Panel) -> None:
    """Write a panel in the wide CSV format accepted by :func:`read_panel_csv`."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("unit," + ",".join(f"t{t}" for t in range(1, panel.n_periods + 1)) + "\n")
        for uid, row in zip(panel.unit_ids, panel.outcomes):
            fh.write(str(uid) + "," + ",".join(repr(float(x)) for x in row) + "\n")

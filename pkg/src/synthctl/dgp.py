"""Synthetic panel generators.

Three families of data-generating processes, each producing a
:class:`~synthctl.panel.Panel` whose first unit is treated:

* :func:`gen_grouped_factor` -- units load exclusively on one group factor
  following an AR(1) (optionally with a group-specific linear drift), plus
  white noise; the treated unit shares its factor with exactly one donor.
* :func:`gen_covariate_factor` -- outcomes driven by random-walk
  coefficients on uniform covariates, a subset of which is revealed to the
  estimator as observed covariates.
* :func:`gen_ar` -- a multiplicative AR(1) with group-shared, time-varying
  autoregressive coefficients.

Randomness comes from the counter-based Philox generator with documented
stream splitting: the stream for replication ``r`` is keyed by
``(seed, config digest, r)`` (see :func:`seed_sequence_for`), so any
replication can be regenerated independently of how many replications run
or in what order, on any platform. Within a generator the draw order is
fixed and documented in its docstring; changing it is a breaking change.

Generated panels carry the treated unit's untreated potential-outcome path
in ``Panel.baseline``, so estimation error is measurable even when an
artificial treatment effect is injected.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidSpecificationError
from .panel import Panel

__all__ = [
    "EffectSpec",
    "GroupedFactorConfig",
    "CovariateFactorConfig",
    "ArConfig",
    "gen_grouped_factor",
    "gen_covariate_factor",
    "gen_ar",
    "generate",
    "seed_sequence_for",
    "config_digest",
]


@dataclass(frozen=True)
class EffectSpec:
    """Artificial treatment effect added to the treated unit after t0.

    ``shape`` is one of ``"none"``, ``"constant"`` (adds ``magnitude`` to
    every post period), or ``"linear_ramp"`` (grows linearly from zero at
    t0, reaching ``magnitude`` at the final period).
    """

    shape: str = "none"
    magnitude: float = 0.0

    def __post_init__(self):
        if self.shape not in ("none", "constant", "linear_ramp"):
            raise InvalidSpecificationError(f"unknown effect shape {self.shape!r}")
        object.__setattr__(self, "magnitude", float(self.magnitude))

    def path(self, t0: int, t_total: int) -> np.ndarray:
        """Length-T effect path; zero in all pre-treatment periods."""
        out = np.zeros(t_total)
        if self.shape == "constant":
            out[t0:] = self.magnitude
        elif self.shape == "linear_ramp":
            steps = np.arange(1, t_total - t0 + 1, dtype=np.float64)
            out[t0:] = self.magnitude * steps / (t_total - t0)
        return out


NULL_EFFECT = EffectSpec()


@dataclass(frozen=True)
class GroupedFactorConfig:
    """Grouped-factor design: Y_it = delta + lambda_{f(i),t} + eps_it.

    ``n_groups`` groups of ``units_per_group`` units each; unit 1 (treated)
    and unit 2 share group 1, so exactly one donor tracks the treated
    unit's factor. Factors follow an AR(1) with coefficient ``rho`` and
    standard Gaussian innovations, started from a standard Gaussian draw.
    With ``trend="stochastic_trend"`` each group factor additionally gains
    a linear drift b_f * t with b_f ~ N(0, trend_drift_sd**2), creating
    heterogeneous trending behaviour across groups.
    """

    n_groups: int
    t0: int
    rho: float
    sigma: float
    units_per_group: int = 2
    t_total: int = 30
    trend: str = "none"
    trend_drift_sd: float = 0.2
    delta: float = 0.0

    def __post_init__(self):
        if self.n_groups < 1:
            raise InvalidSpecificationError("need at least one group")
        if self.units_per_group < 2:
            raise InvalidSpecificationError("groups need at least two units")
        if not 1 <= self.t0 < self.t_total:
            raise InvalidSpecificationError("need 1 <= t0 < t_total")
        if self.sigma < 0:
            raise InvalidSpecificationError("sigma must be non-negative")
        if abs(self.rho) > 1:
            raise InvalidSpecificationError("|rho| must be <= 1")
        if self.trend not in ("none", "stochastic_trend"):
            raise InvalidSpecificationError(f"unknown trend {self.trend!r}")

    @property
    def n_units(self) -> int:
        return self.n_groups * self.units_per_group

    @property
    def n_donors(self) -> int:
        return self.n_units - 1

    def table_row(self) -> dict:
        return {"J": self.n_donors, "T0": self.t0, "sigma": self.sigma, "rho": self.rho}


@dataclass(frozen=True)
class CovariateFactorConfig:
    """Covariate factor design with random-walk coefficient paths.

    Outcomes follow Y_jt = delta + sum_c coef_ct * C_jc + eps_jt where the
    per-covariate coefficient paths are independent random walks with
    standard Gaussian innovations (started from a standard Gaussian draw),
    the covariates C are uniform on [covariate_low, covariate_high], and
    eps is Gaussian noise with scale ``sigma``.

    Of the ``n_observed + n_unobserved`` covariates, the first
    ``n_observed`` columns are revealed to the estimator; the rest act as
    unobserved factors. The observed/unobserved split does not enter the
    RNG stream key, so designs differing only in the split draw the
    identical world -- the split purely changes what is revealed.
    """

    n_observed: int
    n_unobserved: int
    n_donors: int = 1000
    t_total: int = 30
    t0: int = 4
    delta: float = 100.0
    covariate_low: float = 0.0
    covariate_high: float = 20.0
    sigma: float = 5.0

    def __post_init__(self):
        if self.n_observed < 0 or self.n_unobserved < 0 or self.n_covariates < 1:
            raise InvalidSpecificationError("need a non-negative split with >= 1 covariate")
        if self.n_donors < 1:
            raise InvalidSpecificationError("need at least one donor")
        if not 1 <= self.t0 < self.t_total:
            raise InvalidSpecificationError("need 1 <= t0 < t_total")
        if self.covariate_high <= self.covariate_low:
            raise InvalidSpecificationError("covariate_high must exceed covariate_low")
        if self.sigma < 0:
            raise InvalidSpecificationError("sigma must be non-negative")

    @property
    def n_covariates(self) -> int:
        return self.n_observed + self.n_unobserved

    @property
    def n_units(self) -> int:
        return self.n_donors + 1

    def stream_fields(self) -> dict:
        # Everything defining the drawn world; the observability split is
        # deliberately excluded (only the total number of covariates counts).
        return {
            "n_covariates": self.n_covariates,
            "n_donors": self.n_donors,
            "t_total": self.t_total,
            "t0": self.t0,
            "delta": self.delta,
            "covariate_low": self.covariate_low,
            "covariate_high": self.covariate_high,
            "sigma": self.sigma,
        }

    def table_row(self) -> dict:
        return {"J": self.n_donors, "T0": self.t0, "sigma": self.sigma, "rho": 1.0}


@dataclass(frozen=True)
class ArConfig:
    """Multiplicative AR(1) design: Y_jt = alpha_{g(j),t} * Y_{j,t-1} + eps_jt.

    Initial levels are Gaussian(y_init_mean, y_init_sd**2) per unit. The
    autoregressive coefficients are shared within each of ``n_groups``
    equally-sized groups and drawn independently over time and groups as
    Gaussian(alpha_mean, alpha_sd**2). No treatment effect is injected.
    """

    n_units: int = 50
    n_groups: int = 5
    t_total: int = 30
    t0: int = 20
    y_init_mean: float = 100.0
    y_init_sd: float = 20.0
    alpha_mean: float = 1.0
    alpha_sd: float = 0.1
    eps_sd: float = 1.0

    def __post_init__(self):
        if self.n_units < 2 or self.n_groups < 1 or self.n_units % self.n_groups:
            raise InvalidSpecificationError("n_units must be a positive multiple of n_groups")
        if not 1 <= self.t0 < self.t_total:
            raise InvalidSpecificationError("need 1 <= t0 < t_total")
        if min(self.y_init_sd, self.alpha_sd, self.eps_sd) < 0:
            raise InvalidSpecificationError("scale parameters must be non-negative")

    @property
    def n_donors(self) -> int:
        return self.n_units - 1

    def table_row(self) -> dict:
        return {"J": self.n_donors, "T0": self.t0, "sigma": self.eps_sd, "rho": None}


AnyDgpConfig = GroupedFactorConfig | CovariateFactorConfig | ArConfig


def config_digest(config) -> bytes:
    """Stable 16-byte digest of a DGP config's world-defining fields."""
    if hasattr(config, "stream_fields"):
        fields = config.stream_fields()
    else:
        fields = asdict(config)
    payload = json.dumps([type(config).__name__, fields], sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).digest()[:16]


def seed_sequence_for(seed: int, config, replication: int = 0) -> np.random.SeedSequence:
    """Entropy for one replication: (user seed, config digest, index).

    Pure function of its arguments, so replication streams are mutually
    independent and reproducible regardless of scheduling or worker count.
    """
    d = config_digest(config)
    words = (int.from_bytes(d[:8], "little"), int.from_bytes(d[8:], "little"))
    return np.random.SeedSequence((int(seed), *words, int(replication)))


def _rng(seed, config, replication) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = seed_sequence_for(int(seed), config, replication)
    return np.random.Generator(np.random.Philox(ss))


def _grouped_factor_components(config: GroupedFactorConfig, rng: np.random.Generator):
    # Draw order (fixed): factor innovations (F, T) row-major, then drift
    # slopes (F,) when trending, then unit noise (J+1, T) row-major.
    F, T = config.n_groups, config.t_total
    innov = rng.standard_normal((F, T))
    lam = np.empty((F, T))
    lam[:, 0] = innov[:, 0]
    for t in range(1, T):
        lam[:, t] = config.rho * lam[:, t - 1] + innov[:, t]
    if config.trend == "stochastic_trend":
        drift = rng.standard_normal(F) * config.trend_drift_sd
        lam = lam + drift[:, None] * np.arange(1, T + 1)[None, :]
    eps = rng.standard_normal((config.n_units, T)) * config.sigma
    return lam, eps


def gen_grouped_factor(
    config: GroupedFactorConfig,
    effect: EffectSpec = NULL_EFFECT,
    seed: int | np.random.SeedSequence = 0,
    replication: int = 0,
) -> Panel:
    """Generate one grouped-factor panel.

    Unit ordering fixes f(1) = f(2): consecutive blocks of
    ``units_per_group`` units share a group, and the treated unit is the
    first unit of the first group. The returned panel's ``baseline`` holds
    the treated unit's untreated path; with a null effect the observed
    treated series equals it exactly, so any non-zero estimated effect is
    pure estimation error.
    """
    rng = _rng(seed, config, replication)
    lam, eps = _grouped_factor_components(config, rng)
    groups = np.arange(config.n_units) // config.units_per_group
    outcomes = config.delta + lam[groups] + eps
    baseline = outcomes[0].copy()
    outcomes[0] += effect.path(config.t0, config.t_total)
    return Panel(outcomes, config.t0, baseline=baseline)


def gen_covariate_factor(
    config: CovariateFactorConfig,
    effect: EffectSpec = NULL_EFFECT,
    seed: int | np.random.SeedSequence = 0,
    replication: int = 0,
) -> tuple[Panel, np.ndarray]:
    """Generate one covariate-factor panel plus its observed covariates.

    Draw order (fixed): covariates (J+1, n_covariates) row-major, then
    coefficient innovations (n_covariates, T) row-major, then unit noise
    (J+1, T). Returns ``(panel, observed)`` where ``observed`` is the
    (J+1, n_observed) matrix of revealed covariate columns (possibly with
    zero columns when every covariate is unobserved).
    """
    rng = _rng(seed, config, replication)
    m, T, n_units = config.n_covariates, config.t_total, config.n_units
    cov = rng.uniform(config.covariate_low, config.covariate_high, size=(n_units, m))
    innov = rng.standard_normal((m, T))
    coef = np.cumsum(innov, axis=1)
    eps = rng.standard_normal((n_units, T)) * config.sigma
    outcomes = config.delta + cov @ coef + eps
    baseline = outcomes[0].copy()
    outcomes[0] += effect.path(config.t0, T)
    observed = cov[:, : config.n_observed].copy()
    return Panel(outcomes, config.t0, baseline=baseline), observed


def gen_ar(
    config: ArConfig,
    effect: EffectSpec = NULL_EFFECT,
    seed: int | np.random.SeedSequence = 0,
    replication: int = 0,
) -> Panel:
    """Generate one grouped auto-regressive panel.

    Draw order (fixed): initial levels (J+1,), then the shared coefficient
    paths (n_groups, T-1) row-major, then unit noise (J+1, T-1).
    """
    rng = _rng(seed, config, replication)
    n, T = config.n_units, config.t_total
    y0 = rng.normal(config.y_init_mean, config.y_init_sd, size=n)
    alpha = rng.normal(config.alpha_mean, config.alpha_sd, size=(config.n_groups, T - 1))
    eps = rng.standard_normal((n, T - 1)) * config.eps_sd
    groups = np.arange(n) // (n // config.n_groups)
    outcomes = np.empty((n, T))
    outcomes[:, 0] = y0
    for t in range(1, T):
        outcomes[:, t] = alpha[groups, t - 1] * outcomes[:, t - 1] + eps[:, t - 1]
    baseline = outcomes[0].copy()
    outcomes[0] += effect.path(config.t0, T)
    return Panel(outcomes, config.t0, baseline=baseline)


def generate(config, effect: EffectSpec = NULL_EFFECT, seed=0, replication: int = 0):
    """Dispatch on config type; returns ``(panel, covariates_or_None)``."""
    if isinstance(config, GroupedFactorConfig):
        return gen_grouped_factor(config, effect, seed, replication), None
    if isinstance(config, CovariateFactorConfig):
        return gen_covariate_factor(config, effect, seed, replication)
    if isinstance(config, ArConfig):
        return gen_ar(config, effect, seed, replication), None
    raise InvalidSpecificationError(f"unknown DGP config type {type(config).__name__}")

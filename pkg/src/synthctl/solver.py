"""Simplex-constrained weighted least squares.

Minimizes the weighted squared objective

    f(W) = sum_h v_h * (x1[h] - sum_j W_j * x0[h, j])**2

over the probability simplex {W >= 0, sum W = 1}. The problem is a convex
QP; the solver runs away-step Frank-Wolfe from uniform weights to shrink
the active set, then fully-corrective active-set descent (exact KKT solves
on the support, with pricing over the full donor pool) down to the duality
gap tolerance. Iterates stay vertex-sparse, matching the geometry of the
estimator: at most k active donors when x1 lies strictly outside the
convex hull of the donor columns and the columns are in general position.

The hot kernel is a single numba-compatible function; see
:mod:`synthctl._accel` for backend selection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import jit_kernel
from .errors import ConvergenceError, InvalidSpecificationError, NumericInputError
from .panel import PredictorSet, WeightVector

__all__ = ["SolverConfig", "solve_simplex_ls", "objective_value", "duality_gap"]


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs.

    ``tolerance`` bounds the suboptimality of the squared objective via the
    Frank-Wolfe duality gap. It is an absolute bound with a small
    scale-relative floor (and, when exact active-set steps can make no
    further floating-point progress, a relative fallback of 1e-6*(1+f) that
    matches the solver's published optimality certificate). Weights below
    ``zero_clip`` are snapped to zero and the vector renormalized, so
    reported weights are exactly feasible.
    """

    max_iterations: int = 100_000
    tolerance: float = 1e-10
    zero_clip: float = 1e-9

    def __post_init__(self):
        if self.tolerance <= 0:
            raise InvalidSpecificationError("tolerance must be positive")
        if self.zero_clip < 0:
            raise InvalidSpecificationError("zero_clip must be non-negative")
        if self.max_iterations < 1:
            raise InvalidSpecificationError("max_iterations must be at least 1")


DEFAULT_CONFIG = SolverConfig()

# Kernel status codes.
_CONVERGED = 0
_ITER_CAP = 1


def _simplex_ls_kernel(A, At, y, max_iterations, tol_abs):
    # A: (k, J) scaled predictors, At: contiguous A.T, y: (k,) scaled target.
    # Returns (w, f2, gap2, iterations, status). Written for numba nopython
    # mode; the identical source runs under plain NumPy.
    k, J = A.shape

    w = np.full(J, 1.0 / J)
    z = A @ w
    r = z - y
    f2 = r @ r
    g = 2.0 * (At @ r)
    gw = g @ w
    best_w = w.copy()
    best_f2 = f2
    best_gap = gw - g[int(np.argmin(g))]
    iters = 0
    status = _ITER_CAP

    # Support size below which exact KKT correction takes over from
    # Frank-Wolfe. Small enough to keep the (s+1)x(s+1) solves cheap.
    cap = k + 3
    if cap > J:
        cap = J
    phase1_budget = 8 * J + 512
    if phase1_budget > max_iterations:
        phase1_budget = max_iterations

    # --- Phase 1: Frank-Wolfe with paired toward/away (transfer) steps ---
    # Each step moves mass from the worst active donor onto the best one;
    # saturated steps zero the away donor exactly, shedding support fast.
    while iters < phase1_budget:
        support = np.where(w > 0.0)[0]
        if support.shape[0] <= cap:
            break
        iters += 1

        r = z - y
        f2 = r @ r
        g = 2.0 * (At @ r)

        s = int(np.argmin(g))
        gw = g @ w
        gap2 = gw - g[s]
        if f2 < best_f2:
            best_f2 = f2
            best_gap = gap2
            best_w = w.copy()
        if gap2 <= tol_abs + 4e-13 * (1.0 + f2 + abs(gw) + abs(g[s])):
            status = _CONVERGED
            break

        a = support[0]
        ga = -1e300
        for idx in support:
            if g[idx] > ga:
                ga = g[idx]
                a = idx
        if a == s:
            break

        dz = A[:, s] - A[:, a]
        den = dz @ dz
        if den <= 0.0:
            break
        gamma = -(r @ dz) / den
        if gamma <= 0.0:
            break
        if gamma >= w[a]:
            gamma = w[a]
            w[s] += gamma
            w[a] = 0.0
        else:
            w[s] += gamma
            w[a] -= gamma
        z = z + gamma * dz

        if iters % 256 == 0:
            z = A @ w

    # --- Phase 2: fully-corrective active-set descent ---------------------
    if status != _CONVERGED:
        sup = np.where(w > 0.0)[0]
        ws = w[sup].copy()
        b = At @ y

        while iters < max_iterations:
            iters += 1
            sn = sup.shape[0]

            As = At[sup]  # (sn, k): rows are the active donor columns
            M = np.zeros((sn + 1, sn + 1))
            M[:sn, :sn] = As @ np.ascontiguousarray(As.T)
            M[:sn, sn] = 1.0
            M[sn, :sn] = 1.0
            rhs = np.zeros(sn + 1)
            rhs[:sn] = b[sup]
            rhs[sn] = 1.0
            sol = np.linalg.lstsq(M, rhs)[0]
            cand = sol[:sn]

            if np.min(cand) < -1e-12:
                # Blocked: step toward the KKT point until a weight hits
                # zero, drop that donor (ties resolve to the lowest index).
                alpha = 1e300
                blocker = -1
                for i in range(sn):
                    if cand[i] < 0.0 and ws[i] > cand[i]:
                        step = ws[i] / (ws[i] - cand[i])
                        if step < alpha:
                            alpha = step
                            blocker = i
                if blocker < 0:
                    break
                if alpha > 1.0:
                    alpha = 1.0
                for i in range(sn):
                    ws[i] += alpha * (cand[i] - ws[i])
                    if ws[i] < 0.0:
                        ws[i] = 0.0
                ws[blocker] = 0.0
                keep = np.ones(sn, dtype=np.bool_)
                keep[blocker] = False
                sup = sup[keep]
                ws = ws[keep]
                continue

            ws = cand.copy()
            for i in range(sn):
                if ws[i] < 0.0:
                    ws[i] = 0.0

            z = ws @ As
            r = z - y
            f2 = r @ r
            g = 2.0 * (At @ r)
            gw = 0.0
            for i in range(sn):
                gw += g[sup[i]] * ws[i]
            s = int(np.argmin(g))
            gap2 = gw - g[s]
            if gap2 < 0.0:
                gap2 = 0.0

            if f2 < best_f2:
                best_f2 = f2
                best_gap = gap2
                full = np.zeros(J)
                for i in range(sn):
                    full[sup[i]] = ws[i]
                best_w = full

            if gap2 <= tol_abs + 4e-13 * (1.0 + f2 + abs(gw) + abs(g[s])):
                status = _CONVERGED
                break

            already = False
            for i in range(sn):
                if sup[i] == s:
                    already = True
                    break
            if already:
                # The most improving vertex is already active: no further
                # floating-point progress. Accept at certificate precision.
                if gap2 <= 1e-6 * (1.0 + f2):
                    status = _CONVERGED
                break
            extra = np.empty(1, dtype=np.int64)
            extra[0] = s
            sup = np.concatenate((sup, extra))
            ws = np.concatenate((ws, np.zeros(1)))

    return best_w, best_f2, best_gap, iters, status


_kernel = jit_kernel(_simplex_ls_kernel)


def _scaled_problem(predictors: PredictorSet):
    sv = np.sqrt(predictors.v)
    A = np.ascontiguousarray(predictors.x0 * sv[:, None])
    y = predictors.x1 * sv
    return A, np.ascontiguousarray(A.T), y


def solve_simplex_ls(
    predictors: PredictorSet, config: SolverConfig = DEFAULT_CONFIG
) -> WeightVector:
    """Solve for the simplex-constrained weights minimizing the objective.

    Deterministic for fixed inputs and config: the descent starts from
    uniform weights and every tie breaks toward the lowest donor index,
    so when the minimizer is not unique (x1 inside the convex hull with
    donor columns not in general position) the returned solution is the
    reproducible one this path reaches.

    Raises
    ------
    NumericInputError
        If predictors contain non-finite values.
    ConvergenceError
        If the iteration cap is hit before the duality gap closes; the
        error carries the best iterate and its gap.
    """
    if not (np.all(np.isfinite(predictors.x0)) and np.all(np.isfinite(predictors.x1))):
        raise NumericInputError("predictor matrices contain non-finite values")

    J = predictors.n_donors
    if J == 1:
        return WeightVector(np.ones(1), None, True)

    A, At, y = _scaled_problem(predictors)
    w, f2, gap2, iters, status = _kernel(
        A, At, y, int(config.max_iterations), float(config.tolerance)
    )

    w = np.where(w < config.zero_clip, 0.0, w)
    total = float(w.sum())
    if total <= 0.0:
        raise NumericInputError("all weights collapsed to zero; inputs are degenerate")
    w = w / total

    if status != _CONVERGED:
        raise ConvergenceError(
            f"simplex solver stopped after {iters} iterations with duality gap {gap2:.3e}",
            weights=w,
            gap=float(gap2),
        )
    return WeightVector(w, None, True)


def objective_value(predictors: PredictorSet, weights: WeightVector) -> float:
    """The v-weighted norm ||x1 - x0 w|| (square root of the fit criterion)."""
    w = weights.w
    if w.shape[0] != predictors.n_donors:
        raise InvalidSpecificationError(
            f"weight vector has {w.shape[0]} entries for {predictors.n_donors} donors"
        )
    r = predictors.x1 - predictors.x0 @ w
    return float(np.sqrt(np.sum(predictors.v * r * r)))


def duality_gap(predictors: PredictorSet, weights: WeightVector) -> float:
    """Frank-Wolfe gap of the squared objective at ``weights``.

    ``max_j grad(f)(w) . (w - e_j)``; non-negative, zero exactly at a
    minimizer, and an upper bound on the squared-objective suboptimality.
    Usable as an optimality certificate without knowing the true optimum.
    """
    w = weights.w
    if w.shape[0] != predictors.n_donors:
        raise InvalidSpecificationError("weight/donor dimension mismatch")
    r = predictors.x0 @ w - predictors.x1
    g = 2.0 * (predictors.x0.T @ (predictors.v * r))
    return float(max(g @ w - g.min(), 0.0))

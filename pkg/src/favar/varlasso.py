"""Row-wise l1-penalised least squares on the Gram system, with CV for lambda.

Each row problem minimises  b' Gamma b - 2 b' gamma_j + lambda |b|_1  by
cyclic coordinate descent. Because the smooth part carries no 1/2, its
gradient is 2(Gamma b - gamma_j) and the soft threshold sits at lambda / 2;
keeping that factor explicit here avoids the classic off-by-two.

A solution is only returned once both the sweep-to-sweep coordinate changes
are below ``tol`` and the first-order optimality (KKT) gap is below
``10 * tol``; the KKT gap is the solver-independent correctness certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .moments import GramSystem, build_gram
from .panel import PanelSeries, _frozen


class ConvergenceError(RuntimeError):
    """Sweep budget exhausted; carries the last iterate and its KKT gap."""

    def __init__(self, message, beta, kkt_gap, iterations):
        super().__init__(message)
        self.beta = beta
        self.kkt_gap = kkt_gap
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class VarFit:
    """Estimated transition matrices, one p x p block per lag."""

    A: np.ndarray                  # p x (p d), row j solves the j-th problem
    A_blocks: tuple[np.ndarray, ...]
    lam: float
    d: int
    active_set: tuple[np.ndarray, ...]
    iterations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(self.A))
        object.__setattr__(self, "A_blocks", tuple(_frozen(b) for b in self.A_blocks))
        object.__setattr__(self, "iterations", _frozen(np.asarray(self.iterations)))

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def nonzeros(self) -> int:
        return int(np.count_nonzero(self.A))


@dataclass(frozen=True, eq=False)
class LambdaCvReport:
    """Penalty path (decreasing), per-fold validation scores, chosen index.

    ``chosen`` minimises the mean validation score; ``one_se`` is the largest
    penalty whose score stays within one standard error of that minimum, the
    familiar sparser selection rule.
    """

    grid: np.ndarray
    fold_scores: np.ndarray        # n_folds x n_lambda
    mean_scores: np.ndarray
    chosen: int
    one_se: int

    def __post_init__(self):
        object.__setattr__(self, "grid", _frozen(self.grid))
        object.__setattr__(self, "fold_scores", _frozen(self.fold_scores))
        object.__setattr__(self, "mean_scores", _frozen(self.mean_scores))

    @property
    def lam(self) -> float:
        return float(self.grid[self.chosen])

    @property
    def lam_one_se(self) -> float:
        return float(self.grid[self.one_se])


def _soft(x: np.ndarray, s: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - s, 0.0)


def kkt_gap(Gamma: np.ndarray, gamma_col: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Worst violation of the subgradient optimality conditions."""
    grad = 2.0 * (Gamma @ beta - gamma_col)
    return _gap_from_grad(grad, beta, lam)


def _gap_from_grad(grad: np.ndarray, beta: np.ndarray, lam: float) -> float:
    active = beta != 0.0
    gap = 0.0
    if np.any(active):
        gap = float(np.max(np.abs(grad[active] + lam * np.sign(beta[active]))))
    if not np.all(active):
        slack = np.abs(grad[~active]) - lam
        gap = max(gap, float(max(np.max(slack), 0.0)))
    return gap


def _objectives(Gamma, gamma, B, lam, Q=None):
    if Q is None:
        Q = Gamma @ B
    quad = np.einsum("km,km->m", B, Q)
    lin = np.einsum("km,km->m", B, gamma)
    return quad - 2.0 * lin + lam * np.sum(np.abs(B), axis=0)


def _column_objective(Gamma_cols, gamma_col, beta_active, active, lam):
    q = Gamma_cols @ beta_active
    return float(
        beta_active @ q[active] - 2.0 * beta_active @ gamma_col[active]
        + lam * np.abs(beta_active).sum()
    )


def _refine_columns(Gamma, gamma, B, Q, lam, cols):
    """Jump columns to the exact solution of their current sign pattern.

    A cyclic sweep that crosses no thresholds is a Gauss-Seidel sweep on the
    pattern's linear system, so the pattern's exact solution is the fixed
    point the sweeps crawl toward; solving for it directly skips the long
    tail of sweeps on ill-conditioned problems. Coordinates whose solved sign
    disagrees with the pattern are pruned and the system re-solved a few
    times. A jump is only accepted when it lowers the objective, and the
    ordinary sweeps plus the KKT certificate still decide convergence, so a
    wrongly guessed pattern costs time, not correctness.
    """
    half = 0.5 * lam
    for j in cols:
        beta = B[:, j]
        active = np.flatnonzero(beta)
        if active.size == 0:
            continue
        signs = np.sign(beta[active])
        z = None
        for _ in range(6):
            system = Gamma[np.ix_(active, active)]
            rhs = gamma[active, j] - half * signs
            try:
                z = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError:
                z = None
            if z is None or not np.all(np.isfinite(z)):
                # singular pattern (flat directions): take the min-norm solution
                z = np.linalg.lstsq(system, rhs, rcond=None)[0]
            keep = np.sign(z) == signs
            if keep.all():
                break
            if not keep.any():
                z = None
                break
            active, signs, z = active[keep], signs[keep], None
        if z is None:
            continue
        Gamma_cols = Gamma[:, active]
        old_active = np.flatnonzero(beta)
        old_obj = _column_objective(
            Gamma[:, old_active], gamma[:, j], beta[old_active], old_active, lam
        )
        new_obj = _column_objective(Gamma_cols, gamma[:, j], z, active, lam)
        if new_obj > old_obj - 1e-15 * (1.0 + abs(old_obj)):
            continue
        B[:, j] = 0.0
        B[active, j] = z
        Q[:, j] = Gamma_cols @ z


def _cd_solve(
    Gamma: np.ndarray,
    gamma: np.ndarray,
    lam: float,
    tol: float,
    max_iter: int,
    beta0: np.ndarray | None = None,
    order: str = "forward",
    check_objective: bool = False,
    accelerate: bool = True,
):
    """Cyclic coordinate descent run jointly over every column of ``gamma``.

    Columns are independent problems sharing one Gamma; each is frozen the
    first time its sweep delta and KKT gap both clear their tolerances.
    ``accelerate`` lets columns whose support and signs were stable across a
    full sweep jump to the frozen pattern's exact solution (see
    ``_refine_stable_columns``); with it off the iteration is plain textbook
    coordinate descent.
    """
    if lam < 0.0:
        raise ValueError("lambda must be non-negative")
    pd_, m = gamma.shape
    diag = np.diag(Gamma).copy()
    dead = diag <= 0.0
    if np.any(dead):
        offending = np.argwhere(gamma[dead] != 0.0)
        if offending.size:
            k = int(np.flatnonzero(dead)[offending[0, 0]])
            raise ValueError(
                f"Gamma[{k},{k}] = 0 but gamma[{k},{int(offending[0, 1])}] != 0: "
                "coordinate problem is unbounded"
            )
    B = np.zeros((pd_, m)) if beta0 is None else np.array(beta0, dtype=float, copy=True)
    Q = Gamma @ B
    half = 0.5 * lam
    target_gap = 10.0 * tol
    sequence = range(pd_) if order == "forward" else range(pd_ - 1, -1, -1)
    sequence = [k for k in sequence if not dead[k]]
    thresh = np.full(m, tol)
    remaining = np.ones(m, dtype=bool)
    iters = np.zeros(m, dtype=int)
    prev_obj = _objectives(Gamma, gamma, B, lam, Q) if check_objective else None
    for sweep in range(1, max_iter + 1):
        maxdelta = np.zeros(m)
        for k in sequence:
            dk = diag[k]
            rk = gamma[k] - (Q[k] - dk * B[k])
            delta = _soft(rk, half) / dk - B[k]
            delta[~remaining] = 0.0
            changed = np.flatnonzero(delta)
            if changed.size:
                B[k, changed] += delta[changed]
                Q[:, changed] += np.outer(Gamma[:, k], delta[changed])
                maxdelta[changed] = np.maximum(maxdelta[changed], np.abs(delta[changed]))
        if check_objective:
            obj = _objectives(Gamma, gamma, B, lam, Q)
            slack = 1e-10 * (1.0 + np.abs(prev_obj))
            if np.any(obj > prev_obj + slack):
                raise AssertionError("objective increased across a sweep")
            prev_obj = obj
        settled = np.flatnonzero(remaining & (maxdelta <= thresh))
        for j in settled:
            gap = _gap_from_grad(2.0 * (Q[:, j] - gamma[:, j]), B[:, j], lam)
            if gap <= target_gap:
                remaining[j] = False
                iters[j] = sweep
            else:
                # scale the sweep threshold toward the gap target instead of
                # stair-stepping; the gap shrinks roughly linearly with it
                shrink = min(0.25, 0.5 * target_gap / gap)
                thresh[j] = max(thresh[j] * shrink, 1e-300)
        if not remaining.any():
            return B, iters
        if accelerate and not check_objective and remaining.any():
            _refine_columns(Gamma, gamma, B, Q, lam, np.flatnonzero(remaining))
    gaps = np.array(
        [
            _gap_from_grad(2.0 * (Q[:, j] - gamma[:, j]), B[:, j], lam) if remaining[j] else 0.0
            for j in range(m)
        ]
    )
    iters[remaining] = max_iter
    raise ConvergenceError(
        f"{int(remaining.sum())} of {m} problems unconverged after {max_iter} sweeps "
        f"(worst KKT gap {gaps.max():.3e})",
        beta=B,
        kkt_gap=float(gaps.max()),
        iterations=iters,
    )


def lasso_row(
    G: GramSystem,
    j: int,
    lam: float,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    order: str = "forward",
    check_objective: bool = False,
) -> np.ndarray:
    """Solve the j-th row problem; returns the pd coefficient vector."""
    if not 0 <= j < G.p:
        raise ValueError(f"row index {j} outside 0..{G.p - 1}")
    B, _ = _cd_solve(
        G.Gamma,
        G.gamma[:, [j]],
        lam,
        tol,
        max_iter,
        order=order,
        check_objective=check_objective,
    )
    return B[:, 0]


def fit_var(
    G: GramSystem,
    lam: float,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    check_objective: bool = False,
) -> VarFit:
    """Solve all p row problems and assemble the lag blocks."""
    try:
        B, iters = _cd_solve(
            G.Gamma, G.gamma, lam, tol, max_iter, check_objective=check_objective
        )
    except ConvergenceError as e:
        bad = np.flatnonzero(e.iterations >= max_iter)
        raise ConvergenceError(
            f"rows {bad.tolist()} failed to converge: {e}",
            beta=e.beta,
            kkt_gap=e.kkt_gap,
            iterations=e.iterations,
        ) from None
    A = B.T
    blocks = tuple(A[:, ell * G.p : (ell + 1) * G.p] for ell in range(G.d))
    active = tuple(np.flatnonzero(A[i]) for i in range(G.p))
    return VarFit(A=A, A_blocks=blocks, lam=float(lam), d=G.d, active_set=active, iterations=iters)


def _segment_gram(values: np.ndarray, segments, d: int):
    """Pooled design/response cross-products over contiguous index segments."""
    p = values.shape[1]
    xtx = np.zeros((p * d, p * d))
    xty = np.zeros((p * d, p))
    rows = 0
    for lo, hi in segments:
        m = hi - lo
        if m < d + 1:
            continue
        seg = values[lo:hi]
        design = np.concatenate([seg[d - ell : m - ell] for ell in range(1, d + 1)], axis=1)
        response = seg[d:]
        xtx += design.T @ design
        xty += design.T @ response
        rows += m - d
    return xtx, xty, rows


def cv_lambda(
    xi_hat,
    d: int,
    n_lambda: int = 50,
    n_folds: int = 5,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    lambda_min_ratio: float = 1e-3,
    path_tol: float = 1e-5,
) -> LambdaCvReport:
    """Choose lambda by one-step-ahead prediction over contiguous time folds.

    The path starts at the smallest lambda that zeroes the fit on the full
    data and on every training fold, and decreases geometrically down to
    ``lambda_min_ratio`` times that. Solutions are warm-started along the
    path. Held-out points are predicted from the observed lags immediately
    preceding them; the score is the mean squared prediction error.

    Path solves feed nothing but those validation errors, so they run at
    ``path_tol`` scaled by the moment magnitude; refit at the chosen penalty
    with ``fit_var`` (tolerance ``tol``) for a certified solution.
    """
    values = xi_hat.values if isinstance(xi_hat, PanelSeries) else np.asarray(xi_hat, float)
    n, p = values.shape
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if n_lambda < 1:
        raise ValueError("need at least one lambda")
    full = build_gram(values, d)
    blocks = np.array_split(np.arange(n), n_folds)
    if any(b.size == 0 for b in blocks):
        raise ValueError(f"{n_folds} folds over {n} observations leaves an empty fold")
    folds = []
    lam_max = 2.0 * float(np.max(np.abs(full.gamma)))
    for b in blocks:
        lo, hi = int(b[0]), int(b[-1]) + 1
        xtx, xty, rows = _segment_gram(values, [(0, lo), (hi, n)], d)
        if rows == 0:
            raise ValueError("a training fold is too short to form any lagged row")
        Gamma = 0.5 * (xtx + xtx.T) / rows
        gamma = xty / rows
        val_t = b[b >= d]
        if val_t.size == 0:
            raise ValueError("a validation fold has no point with d observed lags")
        va_design = np.concatenate(
            [values[val_t - ell] for ell in range(1, d + 1)], axis=1
        )
        va_resp = values[val_t]
        folds.append((Gamma, gamma, va_design, va_resp))
        lam_max = max(lam_max, 2.0 * float(np.max(np.abs(gamma))))
    grid = np.geomspace(lam_max, lam_max * lambda_min_ratio, n_lambda)
    fold_scores = np.empty((n_folds, n_lambda))
    for k, (Gamma, gamma, va_design, va_resp) in enumerate(folds):
        B = np.zeros_like(gamma)
        tol_fold = max(tol, path_tol)
        for i, lam in enumerate(grid):
            B, _ = _cd_solve(Gamma, gamma, float(lam), tol_fold, max_iter, beta0=B)
            resid = va_resp - va_design @ B
            fold_scores[k, i] = float(np.mean(resid**2))
    mean_scores = fold_scores.mean(axis=0)
    chosen = int(np.argmin(mean_scores))  # first minimum, i.e. the largest lambda
    if n_folds > 1:
        se = float(fold_scores[:, chosen].std(ddof=1) / math.sqrt(n_folds))
    else:
        se = 0.0
    one_se = int(np.flatnonzero(mean_scores <= mean_scores[chosen] + se)[0])
    return LambdaCvReport(
        grid=grid,
        fold_scores=fold_scores,
        mean_scores=mean_scores,
        chosen=chosen,
        one_se=one_se,
    )

"""Dense two-phase tableau simplex.

Solves ``max c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``
and ``x >= 0``.  Pivoting uses the largest reduced cost and switches to
Bland's smallest-index rule after a run of degenerate pivots, which rules
out cycling while keeping the pivot count low on well-behaved problems.
The ratio test is Harris's two-pass rule, which favours large pivots,
and the tableau is rebuilt from the original data every few hundred
pivots and before optimality is declared, so round-off cannot pile up.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg.blas import dger

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_REPAIRS = 5


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    slack: np.ndarray | None
    iterations: int


class _Tableau:
    """Rows ``B^-1 [A | rhs]`` over the basis, plus a reduced-cost row for ``max obj @ x``."""

    def __init__(self, A, rhs, basis, tol, max_degenerate, refactor_every):
        self.A = A
        self.rhs = rhs
        self.m, self.n_cols = A.shape
        # column-major so the rank-1 update below runs in place
        self.T = np.zeros((self.m + 1, self.n_cols + 1), order="F")
        self.T[:self.m, :-1] = A
        self.T[:self.m, -1] = rhs
        self.basis = basis
        self.obj = np.zeros(self.n_cols)
        self.tol = tol
        self.max_degenerate = max_degenerate
        self.refactor_every = refactor_every
        self.iterations = 0

    def set_objective(self, obj):
        self.obj = obj
        T, m = self.T, self.m
        T[-1, :-1] = obj[self.basis] @ T[:m, :-1] - obj
        T[-1, -1] = obj[self.basis] @ T[:m, -1]

    def refactor(self):
        try:
            lu = np.linalg.solve(self.A[:, self.basis], np.column_stack([self.A, self.rhs]))
        except np.linalg.LinAlgError:
            return
        if np.all(np.isfinite(lu)):
            self.T[:self.m] = lu
            self.T[:self.m, self.basis] = np.eye(self.m)
            self.set_objective(self.obj)

    def pivot(self, row, col):
        T = self.T
        T[row] /= T[row, col]
        colvec = T[:, col].copy()
        colvec[row] = 0.0
        dger(-1.0, colvec, T[row].copy(), a=T, overwrite_a=True)
        self.basis[row] = col
        self.iterations += 1
        if self.iterations % self.refactor_every == 0:
            self.refactor()

    def _entering(self, n_cols, bland):
        reduced = self.T[-1, :n_cols]
        if bland:
            candidates = np.flatnonzero(reduced < -self.tol)
            return int(candidates[0]) if candidates.size else None
        col = int(np.argmin(reduced))
        return col if reduced[col] < -self.tol else None

    def _dual_step(self, n_cols):
        """One dual simplex pivot on the most negative basic value.

        Returns False when the basis is primal feasible and None when the
        row proves the problem infeasible.
        """
        T, tol = self.T, self.tol
        if self.m == 0:
            return False
        r = int(np.argmin(T[:-1, -1]))
        if T[r, -1] >= -tol:
            return False
        row = T[r, :n_cols]
        neg = np.flatnonzero(row < -tol)
        if neg.size == 0:
            return None
        ratios = np.maximum(T[-1, neg], 0.0) / -row[neg]
        self.pivot(r, int(neg[np.argmin(ratios)]))
        return True

    def run(self, n_cols, max_iter):
        """Optimize over the first ``n_cols`` columns.

        Optimality is only declared on a freshly rebuilt tableau; if the
        rebuild exposes negative basic values, dual pivots restore them.
        After ``MAX_REPAIRS`` such rounds the basis is accepted as is and
        callers are expected to clip round-off infeasibility.
        """
        T, tol = self.T, self.tol
        degenerate_run = 0
        confirmed = False
        dual_steps = 0
        repairs = 0
        while self.iterations < max_iter:
            col = self._entering(n_cols, degenerate_run >= self.max_degenerate)
            if col is None:
                if not confirmed:
                    self.refactor()
                    confirmed = True
                    continue
                step = self._dual_step(n_cols) if repairs < MAX_REPAIRS else False
                if step is None:
                    return INFEASIBLE
                if step:
                    dual_steps += 1
                    continue
                if dual_steps:
                    dual_steps = 0
                    repairs += 1
                    confirmed = False
                    continue
                return OPTIMAL
            confirmed = False
            column = T[:-1, col]
            pos = column > tol
            if not pos.any():
                return UNBOUNDED
            # Harris ratio test: bound the step with a little slack, then take the largest pivot under it
            values = np.maximum(T[:-1, -1], 0.0)
            ratios = np.full(column.shape, np.inf)
            ratios[pos] = values[pos] / column[pos]
            bound = ((values[pos] + tol) / column[pos]).min()
            ties = np.flatnonzero(ratios <= bound)
            if degenerate_run < self.max_degenerate:
                ties = ties[column[ties] >= 0.5 * column[ties].max()]
            row = int(ties[np.argmin(self.basis[ties])])
            degenerate_run = degenerate_run + 1 if ratios[row] <= tol else 0
            self.pivot(row, col)
        raise RuntimeError(f"simplex did not converge in {max_iter} iterations")


def linprog_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol=1e-9, max_iter=None,
                max_degenerate=50, refactor_every=256) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    # rows with negative right-hand side are negated; inequality rows then need an artificial
    rows = np.vstack([A_ub, A_eq])
    rhs = np.concatenate([b_ub, b_eq])
    slack_sign = np.concatenate([np.ones(m_ub), np.zeros(m_eq)])
    flip = rhs < 0
    rows[flip] *= -1
    rhs[flip] *= -1
    slack_sign[flip] *= -1
    needs_art = np.ones(m, dtype=bool)
    needs_art[:m_ub] = flip[:m_ub]
    n_art = int(needs_art.sum())

    n_cols = n + m_ub + n_art
    A = np.zeros((m, n_cols))
    A[:, :n] = rows
    A[np.arange(m_ub), n + np.arange(m_ub)] = slack_sign[:m_ub]
    art_rows = np.flatnonzero(needs_art)
    art_cols = n + m_ub + np.arange(n_art)
    A[art_rows, art_cols] = 1.0
    basis = np.empty(m, dtype=int)
    basis[:m_ub] = n + np.arange(m_ub)
    basis[art_rows] = art_cols

    tab = _Tableau(A, rhs, basis, tol, max_degenerate, refactor_every)
    T = tab.T
    if n_art:
        # phase 1: maximize minus the sum of artificials
        obj = np.zeros(n_cols)
        obj[art_cols] = -1.0
        tab.set_objective(obj)
        tab.run(n_cols, max_iter)
        scale = max(1.0, np.abs(rhs).max(initial=0.0))
        if -T[-1, -1] > tol * scale:
            return LPResult(INFEASIBLE, None, None, None, tab.iterations)
        # drive artificials out of the basis where possible
        for r in range(m):
            if basis[r] >= n + m_ub:
                candidates = np.flatnonzero(np.abs(T[r, :n + m_ub]) > tol)
                if candidates.size:
                    tab.pivot(r, int(candidates[0]))

    obj = np.zeros(n_cols)
    obj[:n] = c
    tab.set_objective(obj)
    status = tab.run(n + m_ub, max_iter)
    if status != OPTIMAL:
        return LPResult(status, None, None, None, tab.iterations)
    full = np.zeros(n_cols)
    full[basis] = np.clip(T[:m, -1], 0.0, None)
    x = full[:n]
    slack = b_ub - A_ub @ x
    return LPResult(OPTIMAL, x, float(c @ x), slack, tab.iterations)


def equilibrate(A, rounds: int = 10, rows: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Row and column scale factors bringing the non-zeros of ``A`` close to 1.

    Each round divides rows, then columns, by the geometric mean of their
    largest and smallest non-zero magnitudes.  With ``rows=False`` only
    columns are scaled, which keeps an absolute feasibility tolerance
    meaning the same thing on every row.
    """
    A = np.abs(np.asarray(A, dtype=float))
    r, c = np.ones(A.shape[0]), np.ones(A.shape[1])
    M = np.where(A > 0, A, np.nan)
    for _ in range(rounds):
        with np.errstate(all="ignore"), warnings.catch_warnings():
            # all-zero rows or columns give NaN scales, replaced by 1 below
            warnings.simplefilter("ignore", RuntimeWarning)
            rs = 1.0 / np.sqrt(np.nanmax(M, axis=1) * np.nanmin(M, axis=1))
        rs = np.where(np.isfinite(rs), rs, 1.0) if rows else np.ones_like(r)
        M *= rs[:, None]
        r *= rs
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cs = 1.0 / np.sqrt(np.nanmax(M, axis=0) * np.nanmin(M, axis=0))
        cs = np.where(np.isfinite(cs), cs, 1.0)
        M *= cs[None, :]
        c *= cs
    return r, c

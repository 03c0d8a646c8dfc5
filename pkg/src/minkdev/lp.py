"""Dense two-phase simplex solver for small linear programs.

Solves ``max c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``,
``x >= 0`` on a dense tableau with Bland's anti-cycling rule.  Problem sizes
in this package are tiny (tens of variables and constraints), so no effort
is spent on sparsity or revised-simplex bookkeeping; the point is exact
control of tolerances and a certificate for every exit status:

* ``optimal``: primal point and objective value,
* ``unbounded``: a feasible point plus an improving ray (``A_ub d <= 0``,
  ``A_eq d = 0``, ``c.d > 0``),
* ``infeasible``: phase one terminated with positive artificial residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Entries smaller than this are never used as pivots.
PIVOT_TOL = 1e-11

#: Reduced-cost threshold for declaring optimality.
OPT_TOL = 1e-9

#: Iteration cap across both phases.
MAX_ITER = 10_000


class LPError(RuntimeError):
    """Raised when the solver exceeds its iteration budget."""


@dataclass(frozen=True)
class LPOutcome:
    """Terminal state of one solve."""

    status: str  # "optimal" | "unbounded" | "infeasible"
    value: float | None = None
    point: np.ndarray | None = None
    ray: np.ndarray | None = None
    iterations: int = 0


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and abs(T[r, col]) > 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run_simplex(T: np.ndarray, basis: np.ndarray, n_cols: int, start_iter: int):
    """Drive the tableau to optimality or detect an unbounded column.

    The objective row is the last row of ``T`` (stored as reduced costs for a
    maximisation: positive entries can still improve).  Returns
    ``(status, iterations, unbounded_col)``.
    """
    it = start_iter
    m = T.shape[0] - 1
    while True:
        if it >= MAX_ITER:
            raise LPError(f"simplex exceeded {MAX_ITER} iterations")
        # Bland's rule: smallest-index column with strictly positive reduced cost.
        col = -1
        for j in range(n_cols):
            if T[m, j] > OPT_TOL:
                col = j
                break
        if col < 0:
            return "optimal", it, -1
        # Ratio test, smallest index breaking ties (Bland).
        row = -1
        best = np.inf
        for r in range(m):
            a = T[r, col]
            if a > PIVOT_TOL:
                ratio = T[r, -1] / a
                if ratio < best - 1e-15:
                    best = ratio
                    row = r
                elif row >= 0 and abs(ratio - best) <= 1e-15 and basis[row] > basis[r]:
                    row = r
        if row < 0:
            return "unbounded", it, col
        _pivot(T, basis, row, col)
        it += 1


def solve_lp(
    c: np.ndarray,
    A_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    A_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
) -> LPOutcome:
    """Maximise ``c.x`` over ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    kinds = []  # "ub" or "eq"
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        for r, b in zip(A_ub, np.atleast_1d(b_ub)):
            rows.append(np.asarray(r, float))
            rhs.append(float(b))
            kinds.append("ub")
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        for r, b in zip(A_eq, np.atleast_1d(b_eq)):
            rows.append(np.asarray(r, float))
            rhs.append(float(b))
            kinds.append("eq")
    m = len(rows)
    if m == 0:
        if np.any(c > OPT_TOL):
            j = int(np.argmax(c))
            ray = np.zeros(n)
            ray[j] = 1.0
            return LPOutcome(status="unbounded", point=np.zeros(n), ray=ray)
        return LPOutcome(status="optimal", value=0.0, point=np.zeros(n))

    n_slack = sum(1 for k in kinds if k == "ub")
    # Columns: structural | slacks | artificials | rhs.
    A = np.zeros((m, n + n_slack))
    b = np.zeros(m)
    s = 0
    for i, (row, bi, kind) in enumerate(zip(rows, rhs, kinds)):
        A[i, :n] = row
        b[i] = bi
        if kind == "ub":
            A[i, n + s] = 1.0
            s += 1
    # Normalise to b >= 0 so artificials give an identity start basis.
    for i in range(m):
        if b[i] < 0.0:
            A[i] *= -1.0
            b[i] *= -1.0

    # Rows whose slack column survived the sign flip with +1 can start basic.
    basis = -np.ones(m, dtype=int)
    need_artificial = []
    for i in range(m):
        slack_cols = np.nonzero(A[i, n:])[0]
        if slack_cols.size == 1 and A[i, n + slack_cols[0]] == 1.0:
            col = n + int(slack_cols[0])
            if all(basis[r] != col for r in range(m)):
                basis[i] = col
                continue
        need_artificial.append(i)

    n_art = len(need_artificial)
    total = n + n_slack + n_art
    T = np.zeros((m + 1, total + 1))
    T[:m, : n + n_slack] = A
    T[:m, -1] = b
    for k, i in enumerate(need_artificial):
        T[i, n + n_slack + k] = 1.0
        basis[i] = n + n_slack + k

    iterations = 0
    if n_art:
        # Phase one: maximise -(sum of artificials).
        T[m, n + n_slack : n + n_slack + n_art] = -1.0
        for i in need_artificial:
            T[m] += T[i]
        status, iterations, _ = _run_simplex(T, basis, total, 0)
        # The stored rhs tracks the negated phase-one objective: a positive
        # residual means some artificial variable could not be driven to 0.
        if T[m, -1] > OPT_TOL:
            return LPOutcome(status="infeasible", iterations=iterations)
        # Drive any artificial still basic out of the basis.
        for i in range(m):
            if basis[i] >= n + n_slack:
                pivot_col = -1
                for j in range(n + n_slack):
                    if abs(T[i, j]) > PIVOT_TOL:
                        pivot_col = j
                        break
                if pivot_col >= 0:
                    _pivot(T, basis, i, pivot_col)
        # Remove artificial columns from play.
        T[:, n + n_slack : n + n_slack + n_art] = 0.0

    # Phase two objective.
    T[m, :] = 0.0
    T[m, :n] = c
    for i in range(m):
        if basis[i] < n + n_slack and abs(T[m, basis[i]]) > 0.0:
            T[m] -= T[m, basis[i]] * T[i]
    status, iterations, unb_col = _run_simplex(T, basis, n + n_slack, iterations)

    point = np.zeros(n + n_slack)
    for i in range(m):
        if basis[i] < n + n_slack:
            point[basis[i]] = T[i, -1]
    x = point[:n]

    if status == "unbounded":
        ray = np.zeros(n + n_slack)
        ray[unb_col] = 1.0
        for i in range(m):
            if basis[i] < n + n_slack:
                ray[basis[i]] = -T[i, unb_col]
        return LPOutcome(status="unbounded", point=x, ray=ray[:n], iterations=iterations)

    return LPOutcome(status="optimal", value=float(c @ x), point=x, iterations=iterations)

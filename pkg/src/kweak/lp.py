"""Linear programs in a small standard form and their solvers.

``solve_lp`` runs a dense bounded-variable primal simplex (two phases,
Bland's rule) for small problems and hands large ones to HiGHS through
``scipy.optimize.linprog``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
REPORT_TOL = 1e-6
SIMPLEX_SIZE_LIMIT = 400_000     # rows * columns handled by the dense simplex


@dataclass
class LPProblem:
    """``maximize c @ x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub``,
    ``0 <= x <= upper``."""

    c: np.ndarray
    A_eq: sparse.csr_matrix
    b_eq: np.ndarray
    A_ub: sparse.csr_matrix
    b_ub: np.ndarray
    upper: np.ndarray
    var_names: list = field(default_factory=list)
    eq_names: list = field(default_factory=list)
    ub_names: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.c)
        self.c = np.asarray(self.c, dtype=float)
        self.A_eq = sparse.csr_matrix(self.A_eq, shape=(len(self.b_eq), n), dtype=float)
        self.A_ub = sparse.csr_matrix(self.A_ub, shape=(len(self.b_ub), n), dtype=float)
        self.b_eq = np.asarray(self.b_eq, dtype=float)
        self.b_ub = np.asarray(self.b_ub, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        for arr in (self.c, self.b_eq, self.b_ub, self.A_eq.data, self.A_ub.data):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP entries must be finite")

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b_eq) + len(self.b_ub)


@dataclass
class LPSolution:
    x: np.ndarray
    objective: float
    status: str                      # optimal | infeasible | unbounded
    method: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def residuals(problem: LPProblem, x: np.ndarray) -> float:
    """Largest primal infeasibility of ``x``."""
    r = 0.0
    if problem.A_eq.shape[0]:
        r = max(r, float(np.abs(problem.A_eq @ x - problem.b_eq).max()))
    if problem.A_ub.shape[0]:
        r = max(r, float(np.maximum(problem.A_ub @ x - problem.b_ub, 0).max()))
    if len(x):
        r = max(r, float(np.maximum(-x, 0).max()), float(np.maximum(x - problem.upper, 0).max()))
    return r


def solve_lp(problem: LPProblem, method: str = "auto") -> LPSolution:
    if method == "auto":
        method = "simplex" if problem.n_rows * (problem.n_vars + problem.n_rows) <= SIMPLEX_SIZE_LIMIT else "highs"
    if method == "simplex":
        return simplex(problem)
    if method == "highs":
        return _highs(problem)
    raise ValueError(f"unknown LP method {method!r}")


def _highs(problem: LPProblem) -> LPSolution:
    n = problem.n_vars
    if n == 0:
        ok = np.all(np.abs(problem.b_eq) <= FEAS_TOL) and np.all(problem.b_ub >= -FEAS_TOL)
        return LPSolution(np.zeros(0), 0.0, "optimal" if ok else "infeasible", "highs")
    ub = np.where(np.isfinite(problem.upper), problem.upper, None)
    res = linprog(-problem.c,
                  A_ub=problem.A_ub if problem.A_ub.shape[0] else None,
                  b_ub=problem.b_ub if problem.A_ub.shape[0] else None,
                  A_eq=problem.A_eq if problem.A_eq.shape[0] else None,
                  b_eq=problem.b_eq if problem.A_eq.shape[0] else None,
                  bounds=list(zip([0.0] * n, ub)), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status == 2:
        return LPSolution(np.zeros(n), math.nan, "infeasible", "highs")
    if res.status == 3:
        return LPSolution(np.zeros(n), math.inf, "unbounded", "highs")
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    x = np.clip(res.x, 0.0, None)
    return LPSolution(x, float(problem.c @ x), "optimal", "highs")


def simplex(problem: LPProblem) -> LPSolution:
    """Dense two-phase bounded-variable primal simplex with Bland's rule."""
    n = problem.n_vars
    A_eq = problem.A_eq.toarray()
    A_ub = problem.A_ub.toarray()
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m = m_eq + m_ub
    # columns: structural | slacks (ub rows) | artificials (all rows)
    A = np.zeros((m, n + m_ub))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([problem.b_eq, problem.b_ub]).astype(float)
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    ncols = n + m_ub + m
    T = np.zeros((m, ncols))
    T[:, :n + m_ub] = A
    T[:, n + m_ub:] = np.eye(m)
    upper = np.concatenate([problem.upper, np.full(m_ub, np.inf), np.full(m, np.inf)])
    at_upper = np.zeros(ncols, dtype=bool)
    basis = list(range(n + m_ub, ncols))
    xb = b.copy()
    art = np.arange(n + m_ub, ncols)

    c1 = np.zeros(ncols)
    c1[art] = -1.0
    status = _iterate(T, xb, basis, at_upper, upper, c1)
    if status == "unbounded":        # cannot happen in phase one
        raise RuntimeError("phase one unbounded")
    if -float(c1[basis] @ xb) > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)) * 10:
        return LPSolution(np.zeros(n), math.nan, "infeasible", "simplex")
    # drive zero-valued artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= n + m_ub:
            cand = np.flatnonzero(np.abs(T[r, :n + m_ub]) > PIVOT_TOL)
            cand = [j for j in cand if j not in basis]
            if cand:
                j = cand[0]
                _pivot(T, basis, r, j)
                xb[r] = upper[j] if at_upper[j] else 0.0
                at_upper[j] = False
    upper[art] = 0.0
    c2 = np.zeros(ncols)
    c2[:n] = problem.c
    status = _iterate(T, xb, basis, at_upper, upper, c2)
    x_full = np.where(at_upper, upper, 0.0)
    x_full[~np.isfinite(x_full)] = 0.0
    for r, j in enumerate(basis):
        x_full[j] = xb[r]
    x = np.clip(x_full[:n], 0.0, None)
    if status == "unbounded":
        return LPSolution(x, math.inf, "unbounded", "simplex")
    return LPSolution(x, float(problem.c @ x), "optimal", "simplex")


def _pivot(T, basis, r, j):
    # basic values are tracked by the caller; only the tableau changes here
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if len(nz):
        T[nz] -= np.outer(col[nz], T[r])
    basis[r] = j


def _iterate(T, xb, basis, at_upper, upper, c, max_iter: int = 100_000) -> str:
    """Bland-rule bounded simplex on tableau ``T`` (rows = basic variables).

    ``xb`` holds basic values with nonbasic variables at their current bound.
    """
    m, ncols = T.shape
    for _ in range(max_iter):
        in_basis = np.zeros(ncols, dtype=bool)
        in_basis[basis] = True
        d = c - c[basis] @ T
        up = (~at_upper) & (d > PIVOT_TOL) & (upper > 0.0)
        down = at_upper & (d < -PIVOT_TOL)
        cand = np.flatnonzero((up | down) & ~in_basis)
        enter = int(cand[0]) if len(cand) else -1
        if enter < 0:
            return "optimal"
        sign = 1.0 if not at_upper[enter] else -1.0
        delta = -sign * T[:, enter]          # change of each basic var per unit step
        theta = upper[enter] if np.isfinite(upper[enter]) else math.inf
        leave, leave_to_upper = -1, False
        for r in range(m):
            dr = delta[r]
            if dr < -PIVOT_TOL:
                lim = max(xb[r], 0.0) / -dr
                to_up = False
            elif dr > PIVOT_TOL and np.isfinite(upper[basis[r]]):
                lim = max(upper[basis[r]] - xb[r], 0.0) / dr
                to_up = True
            else:
                continue
            if lim < theta - 1e-15 or (leave >= 0 and abs(lim - theta) <= 1e-15 and basis[r] < basis[leave]):
                theta, leave, leave_to_upper = lim, r, to_up
        if not np.isfinite(theta):
            return "unbounded"
        xb += theta * delta
        if leave < 0:
            at_upper[enter] = not at_upper[enter]       # bound flip
            continue
        entering_value = (upper[enter] - theta) if at_upper[enter] else theta
        old = basis[leave]
        _pivot(T, basis, leave, enter)
        xb[leave] = entering_value
        at_upper[enter] = False
        at_upper[old] = leave_to_upper
    raise RuntimeError("simplex iteration limit reached")


def write_lp_file(problem: LPProblem, path) -> None:
    """CPLEX-LP text dump for cross-checking with an external solver."""
    names = problem.var_names or [f"x{j}" for j in range(problem.n_vars)]

    def row_expr(row):
        terms = []
        for j, v in zip(row.indices.tolist(), row.data.tolist()):
            if v == 0:
                continue
            sign = "-" if v < 0 else "+"
            mag = abs(v)
            coef = "" if mag == 1 else f"{mag:.12g} "
            terms.append(f"{sign} {coef}{names[j]}")
        return " ".join(terms) if terms else f"0 {names[0]}"

    obj = sparse.csr_matrix(problem.c.reshape(1, -1))
    lines = ["\\ kweak max-flow LP", "Maximize", f" obj: {row_expr(obj[0])}", "Subject To"]
    for i in range(problem.A_eq.shape[0]):
        nm = problem.eq_names[i] if problem.eq_names else f"e{i}"
        lines.append(f" {nm}: {row_expr(problem.A_eq[i])} = {problem.b_eq[i]:.12g}")
    for i in range(problem.A_ub.shape[0]):
        nm = problem.ub_names[i] if problem.ub_names else f"u{i}"
        lines.append(f" {nm}: {row_expr(problem.A_ub[i])} <= {problem.b_ub[i]:.12g}")
    lines.append("Bounds")
    for j, u in enumerate(problem.upper.tolist()):
        lines.append(f" 0 <= {names[j]} <= {u:.12g}" if np.isfinite(u) else f" {names[j]} >= 0")
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")

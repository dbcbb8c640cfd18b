"""Dense bounded-variable primal simplex, plus a vertex-enumeration oracle.

Problems have the form::

    minimize    c @ x
    subject to  lo <= A @ x <= up
                lb <=     x <= ub

Each range row gets one bounded slack ``s_i = a_i @ x`` with
``lo_i <= s_i <= up_i``, so box and range limits are handled by the ratio
test instead of extra rows. Phase 1 minimises the sum of artificials added
for rows violated at the starting point.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import TooLargeError

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
OPT_TOL = 1e-9
REFACTOR_EVERY = 64
DEGENERATE_SWITCH = 50


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    lo: np.ndarray
    up: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        A = np.asarray(self.A, dtype=float).reshape(-1, n)
        m = A.shape[0]
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (m,)).copy()
        up = np.broadcast_to(np.asarray(self.up, dtype=float), (m,)).copy()
        lb = np.broadcast_to(np.asarray(self.lb, dtype=float), (n,)).copy()
        ub = np.broadcast_to(np.asarray(self.ub, dtype=float), (n,)).copy()
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(A)):
            raise ValueError("objective and constraint coefficients must be finite")
        if np.any(lb > ub) or np.any(lo > up):
            raise ValueError("inconsistent bounds (lower > upper)")
        if np.any(lb == np.inf) or np.any(ub == -np.inf) or np.any(lo == np.inf) or np.any(up == -np.inf):
            raise ValueError("bounds must not exclude every real value")
        for name, val in dict(c=c, A=A, lo=lo, up=up, lb=lb, ub=ub).items():
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def from_rows(cls, c, constraints=(), bounds=None) -> "LpProblem":
        """Build from ``[(a, lo, up), ...]`` and per-variable ``[(lb, ub), ...]``.

        ``None`` stands for an infinite bound.
        """
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        inf = np.inf
        rows = [np.asarray(a, dtype=float).ravel() for a, _, _ in constraints]
        lo = [(-inf if l is None else l) for _, l, _ in constraints]
        up = [(inf if u is None else u) for _, _, u in constraints]
        if bounds is None:
            bounds = [(0.0, None)] * n
        lb = [(-inf if b[0] is None else b[0]) for b in bounds]
        ub = [(inf if b[1] is None else b[1]) for b in bounds]
        A = np.array(rows).reshape(len(rows), n)
        return cls(c, A, lo, up, lb, ub)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        ax = self.A @ x
        v = [np.maximum(self.lb - x, 0), np.maximum(x - self.ub, 0),
             np.maximum(self.lo - ax, 0), np.maximum(ax - self.up, 0)]
        return float(max((a.max() if a.size else 0.0) for a in v))


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    status: LpStatus
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Revised simplex state with an explicit basis inverse.

    The constraint matrix is kept in CSC form; only the basis inverse is dense.
    """

    def __init__(self, M, lb, ub, x, basis):
        self.M = sparse.csc_matrix(M)
        self.MT = self.M.T.tocsr()
        self.lb = lb
        self.ub = ub
        self.x = x
        self.basis = basis
        self.is_basic = np.zeros(M.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.iterations = 0
        self.refactor()

    def refactor(self):
        B = self.M[:, self.basis].toarray()
        self.Binv = np.linalg.inv(B)
        nb = ~self.is_basic
        self.x[self.basis] = -self.Binv @ (self.M[:, nb] @ self.x[nb])

    def run(self, cost, max_iter):
        M, MT, lb, ub, x = self.M, self.MT, self.lb, self.ub, self.x
        bland = False
        degenerate = 0
        since_refactor = 0
        while True:
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            basis = self.basis
            y = self.Binv.T @ cost[basis]
            d = cost - MT @ y
            nb = ~self.is_basic
            eligible = nb & (((d < -OPT_TOL) & (x < ub)) | ((d > OPT_TOL) & (x > lb)))
            if not eligible.any():
                return LpStatus.OPTIMAL
            if bland:
                j = int(np.argmax(eligible))
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if d[j] < 0 else -1.0

            lo_, hi_ = M.indptr[j], M.indptr[j + 1]
            w = self.Binv[:, M.indices[lo_:hi_]] @ M.data[lo_:hi_]
            delta = direction * w  # basic values move by -t * delta
            xb = x[basis]
            lbb, ubb = lb[basis], ub[basis]
            ratios = np.full(delta.size, np.inf)
            dec = delta > PIVOT_TOL
            inc = delta < -PIVOT_TOL
            with np.errstate(invalid="ignore"):
                ratios[dec] = (xb[dec] - lbb[dec]) / delta[dec]
                ratios[inc] = (ubb[inc] - xb[inc]) / -delta[inc]
            ratios = np.maximum(np.where(np.isnan(ratios), np.inf, ratios), 0.0)
            t_basic = ratios.min() if ratios.size else np.inf
            t_flip = ub[j] - lb[j]
            if t_flip <= t_basic:
                if not np.isfinite(t_flip):
                    return LpStatus.UNBOUNDED
                x[j] = ub[j] if direction > 0 else lb[j]
                x[basis] = xb - t_flip * delta
                self.iterations += 1
                degenerate, bland = 0, False
                continue

            ties = np.flatnonzero(ratios <= t_basic + 1e-12 * max(1.0, t_basic))
            if bland:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(delta[ties]))])
            t = t_basic
            leaving = int(basis[r])
            x[basis] = xb - t * delta
            x[j] = x[j] + direction * t
            x[leaving] = lb[leaving] if delta[r] > 0 else ub[leaving]

            row = self.Binv[r] / w[r]
            nz = np.flatnonzero(w)
            self.Binv[nz] -= w[nz, None] * row
            self.Binv[r] = row
            basis[r] = j
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            self.iterations += 1
            since_refactor += 1

            if t <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_SWITCH:
                    bland = True
            else:
                degenerate, bland = 0, False


def solve_lp(p: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Two-phase bounded simplex.

    Entering variables follow the largest reduced cost; after 50 consecutive
    degenerate pivots both entering and leaving choices switch to Bland's
    lowest-index rule until progress resumes, which rules out cycling.
    """
    n, m = p.n, p.m
    A = np.array(p.A)
    lb, ub = p.lb, p.ub
    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    r = A @ x0 if m else np.zeros(0)

    art_rows, art_sign = [], []
    slack_val = r.copy()
    for i in range(m):
        if r[i] < p.lo[i]:
            slack_val[i] = p.lo[i]
        elif r[i] > p.up[i]:
            slack_val[i] = p.up[i]
        else:
            continue
        art_rows.append(i)
        art_sign.append(1.0 if slack_val[i] > r[i] else -1.0)
    k = len(art_rows)

    Art = np.zeros((m, k))
    Art[art_rows, np.arange(k)] = art_sign
    M = sparse.hstack([sparse.csc_matrix(A), -sparse.identity(m), sparse.csc_matrix(Art)],
                      format="csc")
    LB = np.concatenate([lb, p.lo, np.zeros(k)])
    UB = np.concatenate([ub, p.up, np.full(k, np.inf)])
    x = np.concatenate([x0, slack_val, np.abs(slack_val[art_rows] - r[art_rows])])
    basis = np.array([n + i for i in range(m)], dtype=np.int64)
    for col, i in enumerate(art_rows):
        basis[i] = n + m + col
    if max_iter is None:
        max_iter = 100 * (n + m + k) + 1000

    tab = _Tableau(M, LB, UB, x, basis)
    if k:
        cost1 = np.zeros(n + m + k)
        cost1[n + m:] = 1.0
        tab.run(cost1, max_iter)
        tab.refactor()
        infeas = float(np.sum(np.maximum(tab.x[n + m:], 0.0)))
        scale = max(1.0, float(np.max(np.abs(slack_val))) if m else 1.0)
        if infeas > FEAS_TOL * scale:
            return LpSolution(np.full(n, np.nan), float("nan"), LpStatus.INFEASIBLE, tab.iterations)
        UB[n + m:] = 0.0
        nb_art = ~tab.is_basic[n + m:]
        tab.x[n + m:][nb_art] = 0.0

    cost2 = np.concatenate([p.c, np.zeros(m + k)])
    status = tab.run(cost2, max_iter)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(np.full(n, np.nan), float("-inf"), status, tab.iterations)
    tab.refactor()
    xs = np.clip(tab.x[:n], lb, ub)
    return LpSolution(xs, float(p.c @ xs), LpStatus.OPTIMAL, tab.iterations)


def _inequality_rows(p: LpProblem):
    G, h = [], []
    for i in range(p.m):
        if np.isfinite(p.up[i]):
            G.append(p.A[i]); h.append(p.up[i])
        if np.isfinite(p.lo[i]):
            G.append(-p.A[i]); h.append(-p.lo[i])
    eye = np.eye(p.n)
    for j in range(p.n):
        if np.isfinite(p.ub[j]):
            G.append(eye[j]); h.append(p.ub[j])
        if np.isfinite(p.lb[j]):
            G.append(-eye[j]); h.append(-p.lb[j])
    return np.array(G).reshape(len(G), p.n), np.array(h)


def vertex_enumeration_oracle(p: LpProblem, tol: float = 1e-9) -> LpSolution:
    """Exact optimum by enumerating basic feasible points and extreme rays.

    For testing only. Requires a pointed feasible region (the inequality
    rows must have full column rank), at most 10 variables and at most 14
    finite inequality rows counting box bounds.
    """
    G, h = _inequality_rows(p)
    n = p.n
    if n > 10 or G.shape[0] > 14:
        raise TooLargeError(f"oracle limited to 10 variables / 14 rows (got {n} / {G.shape[0]})")
    if G.shape[0] < n or np.linalg.matrix_rank(G) < n:
        raise ValueError("oracle needs a pointed feasible region (rank-deficient rows)")

    def feasible(z, slack):
        return np.all(G @ z <= h + slack)

    best_x, best = None, np.inf
    for subset in itertools.combinations(range(G.shape[0]), n):
        S = list(subset)
        Gs = G[S]
        if abs(np.linalg.det(Gs)) < 1e-12 or np.linalg.cond(Gs) > 1e12:
            continue
        z = np.linalg.solve(Gs, h[S])
        if feasible(z, tol * (1 + np.abs(h))):
            val = float(p.c @ z)
            if val < best - 1e-15:
                best, best_x = val, z
    if best_x is None:
        return LpSolution(np.full(n, np.nan), float("nan"), LpStatus.INFEASIBLE)

    cnorm = max(1.0, float(np.linalg.norm(p.c)))
    for subset in itertools.combinations(range(G.shape[0]), n - 1):
        Gs = G[list(subset)].reshape(n - 1, n)
        _, sv, vt = np.linalg.svd(np.vstack([Gs, np.zeros((1, n))]))
        if n > 1 and sv[n - 2] < 1e-10:
            continue
        d = vt[-1]
        for ray in (d, -d):
            if np.all(G @ ray <= tol) and p.c @ ray < -tol * cnorm:
                return LpSolution(np.full(n, np.nan), float("-inf"), LpStatus.UNBOUNDED)
    return LpSolution(best_x, best, LpStatus.OPTIMAL)

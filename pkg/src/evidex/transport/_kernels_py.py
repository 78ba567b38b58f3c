"""NumPy reference kernels for the transport solvers.

Selected when the compiled extension is absent (or EVIDEX_PURE_PYTHON is
set). Both backends implement identical pivot and update rules, so they
produce the same plans: Dantzig pricing with first-minimum tie-break,
lowest-flat-index leaving arc, and a switch to Bland's rule after a run
of degenerate pivots so the solve always terminates.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Statuses shared with the compiled twin.
STATUS_OK = 0
STATUS_PIVOT_LIMIT = 1
STATUS_UNDERFLOW = 2


def _northwest_corner(a, b, X, row_adj, col_adj):
    """Staircase initial basis: exactly m+n-1 cells forming a spanning tree."""
    m, n = X.shape
    ra = a.copy()
    rb = b.copy()
    i = j = 0
    for _ in range(m + n - 1):
        t = min(ra[i], rb[j])
        X[i, j] = t
        row_adj[i].add(j)
        col_adj[j].add(i)
        ra[i] -= t
        rb[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if ra[i] == 0.0 and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1


def _duals(C, row_adj, col_adj):
    """Solve u_i + v_j = c_ij over the basis tree, rooted at row 0."""
    m, n = C.shape
    u = np.empty(m)
    v = np.empty(n)
    have_u = np.zeros(m, dtype=bool)
    have_v = np.zeros(n, dtype=bool)
    u[0] = 0.0
    have_u[0] = True
    stack = [(0, True)]
    while stack:
        k, is_row = stack.pop()
        if is_row:
            for j in row_adj[k]:
                if not have_v[j]:
                    v[j] = C[k, j] - u[k]
                    have_v[j] = True
                    stack.append((j, False))
        else:
            for i in col_adj[k]:
                if not have_u[i]:
                    u[i] = C[i, k] - v[k]
                    have_u[i] = True
                    stack.append((i, True))
    return u, v


def _tree_path(ei, ej, m, row_adj, col_adj):
    """Vertex path row ei -> col ej through the basis tree.

    Rows are encoded 0..m-1, columns m..m+n-1.
    """
    target = m + ej
    parent = {ei: -1}
    stack = [ei]
    while stack:
        node = stack.pop()
        if node == target:
            break
        if node < m:
            for j in row_adj[node]:
                nxt = m + j
                if nxt not in parent:
                    parent[nxt] = node
                    stack.append(nxt)
        else:
            for i in col_adj[node - m]:
                if i not in parent:
                    parent[i] = node
                    stack.append(i)
    seq = [target]
    while parent[seq[-1]] != -1:
        seq.append(parent[seq[-1]])
    seq.reverse()
    return seq


def emd_kernel(a, b, C, max_pivots=0):
    """Transportation simplex for balanced marginals a, b and cost C.

    Returns (plan, u, v, pivots, status). Inputs are trusted: positive
    weights with equal sums, finite costs; validation lives in the wrapper.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    m, n = C.shape
    if max_pivots <= 0:
        max_pivots = 10000 + 10 * m * n
    X = np.zeros((m, n))
    row_adj = [set() for _ in range(m)]
    col_adj = [set() for _ in range(n)]
    _northwest_corner(a, b, X, row_adj, col_adj)

    enter_tol = 1e-11 * max(1.0, float(C.max(initial=0.0)))
    pivots = 0
    degenerate_run = 0
    bland = False
    status = STATUS_OK
    while True:
        u, v = _duals(C, row_adj, col_adj)
        R = C - u[:, None] - v[None, :]
        if bland:
            violating = np.flatnonzero(R.ravel() < -enter_tol)
            if violating.size == 0:
                break
            flat = int(violating[0])
        else:
            flat = int(np.argmin(R))
            if R.flat[flat] >= -enter_tol:
                break
        if pivots >= max_pivots:
            status = STATUS_PIVOT_LIMIT
            break
        ei, ej = divmod(flat, n)

        seq = _tree_path(ei, ej, m, row_adj, col_adj)
        cycle = [(ei, ej)]
        for k in range(len(seq) - 1):
            x, y = seq[k], seq[k + 1]
            cycle.append((x, y - m) if x < m else (y, x - m))
        minus = cycle[1::2]
        plus = cycle[0::2]

        theta = min(X[c] for c in minus)
        leave = min(
            (c for c in minus if X[c] <= theta), key=lambda c: c[0] * n + c[1]
        )
        for c in plus:
            X[c] += theta
        for c in minus:
            X[c] -= theta
        X[leave] = 0.0
        row_adj[leave[0]].discard(leave[1])
        col_adj[leave[1]].discard(leave[0])
        row_adj[ei].add(ej)
        col_adj[ej].add(ei)
        pivots += 1
        if theta == 0.0:
            degenerate_run += 1
            if degenerate_run > 3 * (m + n):
                bland = True
        else:
            degenerate_run = 0
            bland = False

    u, v = _duals(C, row_adj, col_adj)
    return X, u, v, pivots, status


def _logsumexp_rows(M):
    mx = M.max(axis=1)
    return mx + np.log(np.exp(M - mx[:, None]).sum(axis=1))


def _logsumexp_cols(M):
    mx = M.max(axis=0)
    return mx + np.log(np.exp(M - mx[None, :]).sum(axis=0))


def sinkhorn_log_kernel(a, b, C, eps, tol, max_iter):
    """Log-domain alternating scaling; immune to exp underflow.

    Returns (plan, iterations, converged). The plan is the raw coupling
    exp((f+g-C)/eps); the wrapper rounds it onto the marginal polytope.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    loga = np.log(a)
    logb = np.log(b)
    Ce = C / eps
    f = np.zeros(len(a))
    g = np.zeros(len(b))
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        f = eps * (loga - _logsumexp_rows(g[None, :] / eps - Ce))
        g = eps * (logb - _logsumexp_cols(f[:, None] / eps - Ce))
        P = np.exp((f[:, None] + g[None, :]) / eps - Ce)
        viol_rows = np.abs(P.sum(axis=1) - a).sum()
        viol_cols = np.abs(P.sum(axis=0) - b).sum()
        if viol_rows < tol and viol_cols < tol:
            converged = True
            break
    P = np.exp((f[:, None] + g[None, :]) / eps - Ce)
    return P, it, converged


def sinkhorn_plain_kernel(a, b, C, eps, tol, max_iter):
    """Classic scaling on the Gibbs kernel K = exp(-C/eps).

    Returns (plan, iterations, converged, status); status is
    STATUS_UNDERFLOW when K degenerates, which the wrapper maps to a
    typed error advising larger epsilon or log-domain mode.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    K = np.exp(-C / eps)
    if (K.sum(axis=1) == 0.0).any() or (K.sum(axis=0) == 0.0).any():
        return None, 0, False, STATUS_UNDERFLOW
    u = np.ones(len(a))
    v = np.ones(len(b))
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        Kv = K @ v
        if (Kv == 0.0).any() or not np.isfinite(Kv).all():
            return None, it, False, STATUS_UNDERFLOW
        u = a / Kv
        Ku = K.T @ u
        if (Ku == 0.0).any() or not np.isfinite(Ku).all():
            return None, it, False, STATUS_UNDERFLOW
        v = b / Ku
        P = u[:, None] * K * v[None, :]
        viol_rows = np.abs(P.sum(axis=1) - a).sum()
        viol_cols = np.abs(P.sum(axis=0) - b).sum()
        if viol_rows < tol and viol_cols < tol:
            converged = True
            break
    P = u[:, None] * K * v[None, :]
    return P, it, converged, STATUS_OK

# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled transport kernels.

Pivot and update rules mirror the NumPy twin exactly (Dantzig pricing
with first-minimum tie-break, lowest-flat-index leaving arc, Bland
switch after a degenerate run), so both backends yield the same plans.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, log

cnp.import_array()

BACKEND_NAME = "compiled"

STATUS_OK = 0
STATUS_PIVOT_LIMIT = 1
STATUS_UNDERFLOW = 2


def emd_kernel(object a_in, object b_in, object C_in, int max_pivots=0):
    """Transportation simplex; returns (plan, u, v, pivots, status)."""
    cdef const double[::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef const double[:, ::1] C = np.ascontiguousarray(C_in, dtype=np.float64)
    cdef Py_ssize_t m = C.shape[0], n = C.shape[1]
    cdef Py_ssize_t N = m + n

    if max_pivots <= 0:
        max_pivots = 10000 + 10 * m * n

    plan_arr = np.zeros((m, n), dtype=np.float64)
    u_arr = np.zeros(m, dtype=np.float64)
    v_arr = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] X = plan_arr
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr

    # Adjacency of the basis tree; degrees are small (< m+n).
    row_adj_arr = np.empty((m, n), dtype=np.intp)
    col_adj_arr = np.empty((n, m), dtype=np.intp)
    row_deg_arr = np.zeros(m, dtype=np.intp)
    col_deg_arr = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t[:, ::1] row_adj = row_adj_arr
    cdef Py_ssize_t[:, ::1] col_adj = col_adj_arr
    cdef Py_ssize_t[::1] row_deg = row_deg_arr
    cdef Py_ssize_t[::1] col_deg = col_deg_arr

    cdef double[::1] ra = np.array(a_in, dtype=np.float64, copy=True)
    cdef double[::1] rb = np.array(b_in, dtype=np.float64, copy=True)

    cdef Py_ssize_t i = 0, j = 0, k, step
    cdef double t
    for step in range(N - 1):
        t = ra[i] if ra[i] < rb[j] else rb[j]
        X[i, j] = t
        row_adj[i, row_deg[i]] = j
        row_deg[i] += 1
        col_adj[j, col_deg[j]] = i
        col_deg[j] += 1
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

    # Scratch used by the dual solve, path search and cycle updates.
    have_arr = np.zeros(N, dtype=np.uint8)
    stack_arr = np.empty(N, dtype=np.intp)
    parent_arr = np.empty(N, dtype=np.intp)
    path_arr = np.empty(N, dtype=np.intp)
    cyc_r_arr = np.empty(N, dtype=np.intp)
    cyc_c_arr = np.empty(N, dtype=np.intp)
    cdef unsigned char[::1] have = have_arr
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef Py_ssize_t[::1] path = path_arr
    cdef Py_ssize_t[::1] cyc_r = cyc_r_arr
    cdef Py_ssize_t[::1] cyc_c = cyc_c_arr

    cdef double cmax = 0.0
    for i in range(m):
        for j in range(n):
            if C[i, j] > cmax:
                cmax = C[i, j]
    cdef double enter_tol = 1e-11 * (cmax if cmax > 1.0 else 1.0)

    cdef int pivots = 0, status = STATUS_OK
    cdef int degenerate_run = 0
    cdef bint bland = False
    cdef Py_ssize_t top, node, ei, ej, plen, clen, best_flat, lr, lc, d
    cdef double rmin, red, theta
    cdef Py_ssize_t leave_r, leave_c, leave_flat

    while True:
        # Duals over the basis tree, rooted at row 0.
        for k in range(N):
            have[k] = 0
        u[0] = 0.0
        have[0] = 1
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            if node < m:
                for d in range(row_deg[node]):
                    k = row_adj[node, d]
                    if not have[m + k]:
                        v[k] = C[node, k] - u[node]
                        have[m + k] = 1
                        stack[top] = m + k
                        top += 1
            else:
                for d in range(col_deg[node - m]):
                    k = col_adj[node - m, d]
                    if not have[k]:
                        u[k] = C[k, node - m] - v[node - m]
                        have[k] = 1
                        stack[top] = k
                        top += 1

        # Entering arc.
        best_flat = -1
        if bland:
            for i in range(m):
                for j in range(n):
                    if C[i, j] - u[i] - v[j] < -enter_tol:
                        best_flat = i * n + j
                        break
                if best_flat >= 0:
                    break
            if best_flat < 0:
                break
        else:
            rmin = 0.0
            for i in range(m):
                for j in range(n):
                    red = C[i, j] - u[i] - v[j]
                    if red < rmin:
                        rmin = red
                        best_flat = i * n + j
            if best_flat < 0 or rmin >= -enter_tol:
                break
        if pivots >= max_pivots:
            status = STATUS_PIVOT_LIMIT
            break
        ei = best_flat // n
        ej = best_flat - ei * n

        # Path from row ei to column ej through the tree (DFS).
        for k in range(N):
            parent[k] = -2
        parent[ei] = -1
        stack[0] = ei
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            if node == m + ej:
                break
            if node < m:
                for d in range(row_deg[node]):
                    k = m + row_adj[node, d]
                    if parent[k] == -2:
                        parent[k] = node
                        stack[top] = k
                        top += 1
            else:
                for d in range(col_deg[node - m]):
                    k = col_adj[node - m, d]
                    if parent[k] == -2:
                        parent[k] = node
                        stack[top] = k
                        top += 1
        plen = 0
        node = m + ej
        while node != -1:
            path[plen] = node
            plen += 1
            node = parent[node]
        # path currently target..source; reverse in place.
        for k in range(plen // 2):
            node = path[k]
            path[k] = path[plen - 1 - k]
            path[plen - 1 - k] = node

        # Cycle cells: entering first, then the path edges.
        cyc_r[0] = ei
        cyc_c[0] = ej
        clen = 1
        for k in range(plen - 1):
            if path[k] < m:
                cyc_r[clen] = path[k]
                cyc_c[clen] = path[k + 1] - m
            else:
                cyc_r[clen] = path[k + 1]
                cyc_c[clen] = path[k] - m
            clen += 1

        # theta = min allocation on the odd (leaving-side) cells;
        # lowest flat index wins ties.
        theta = INFINITY
        leave_flat = -1
        leave_r = -1
        leave_c = -1
        for k in range(1, clen, 2):
            if X[cyc_r[k], cyc_c[k]] < theta:
                theta = X[cyc_r[k], cyc_c[k]]
        for k in range(1, clen, 2):
            if X[cyc_r[k], cyc_c[k]] <= theta:
                if leave_flat < 0 or cyc_r[k] * n + cyc_c[k] < leave_flat:
                    leave_flat = cyc_r[k] * n + cyc_c[k]
                    leave_r = cyc_r[k]
                    leave_c = cyc_c[k]
        for k in range(0, clen, 2):
            X[cyc_r[k], cyc_c[k]] += theta
        for k in range(1, clen, 2):
            X[cyc_r[k], cyc_c[k]] -= theta
        X[leave_r, leave_c] = 0.0

        # Swap the leaving arc out of the adjacency, the entering one in.
        for d in range(row_deg[leave_r]):
            if row_adj[leave_r, d] == leave_c:
                row_adj[leave_r, d] = row_adj[leave_r, row_deg[leave_r] - 1]
                row_deg[leave_r] -= 1
                break
        for d in range(col_deg[leave_c]):
            if col_adj[leave_c, d] == leave_r:
                col_adj[leave_c, d] = col_adj[leave_c, col_deg[leave_c] - 1]
                col_deg[leave_c] -= 1
                break
        row_adj[ei, row_deg[ei]] = ej
        row_deg[ei] += 1
        col_adj[ej, col_deg[ej]] = ei
        col_deg[ej] += 1

        pivots += 1
        if theta == 0.0:
            degenerate_run += 1
            if degenerate_run > 3 * N:
                bland = True
        else:
            degenerate_run = 0
            bland = False

    # Final duals for the certificate.
    for k in range(N):
        have[k] = 0
    u[0] = 0.0
    have[0] = 1
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if node < m:
            for d in range(row_deg[node]):
                k = row_adj[node, d]
                if not have[m + k]:
                    v[k] = C[node, k] - u[node]
                    have[m + k] = 1
                    stack[top] = m + k
                    top += 1
        else:
            for d in range(col_deg[node - m]):
                k = col_adj[node - m, d]
                if not have[k]:
                    u[k] = C[k, node - m] - v[node - m]
                    have[k] = 1
                    stack[top] = k
                    top += 1

    return plan_arr, u_arr, v_arr, pivots, status


def sinkhorn_log_kernel(object a_in, object b_in, object C_in,
                        double eps, double tol, int max_iter):
    """Log-domain alternating scaling; returns (plan, iterations, converged)."""
    cdef const double[::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef const double[:, ::1] C = np.ascontiguousarray(C_in, dtype=np.float64)
    cdef Py_ssize_t m = C.shape[0], n = C.shape[1]

    loga_arr = np.log(np.asarray(a_in, dtype=np.float64))
    logb_arr = np.log(np.asarray(b_in, dtype=np.float64))
    cdef double[::1] loga = loga_arr
    cdef double[::1] logb = logb_arr

    f_arr = np.zeros(m, dtype=np.float64)
    g_arr = np.zeros(n, dtype=np.float64)
    plan_arr = np.empty((m, n), dtype=np.float64)
    cdef double[::1] f = f_arr
    cdef double[::1] g = g_arr
    cdef double[:, ::1] P = plan_arr

    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef bint converged = False
    cdef double mx, acc, term, viol_r, viol_c, s

    while it < max_iter:
        it += 1
        for i in range(m):
            mx = -INFINITY
            for j in range(n):
                term = (g[j] - C[i, j]) / eps
                if term > mx:
                    mx = term
            acc = 0.0
            for j in range(n):
                acc += exp((g[j] - C[i, j]) / eps - mx)
            f[i] = eps * (loga[i] - (mx + log(acc)))
        for j in range(n):
            mx = -INFINITY
            for i in range(m):
                term = (f[i] - C[i, j]) / eps
                if term > mx:
                    mx = term
            acc = 0.0
            for i in range(m):
                acc += exp((f[i] - C[i, j]) / eps - mx)
            g[j] = eps * (logb[j] - (mx + log(acc)))
        viol_r = 0.0
        viol_c = 0.0
        for i in range(m):
            s = 0.0
            for j in range(n):
                P[i, j] = exp((f[i] + g[j] - C[i, j]) / eps)
                s += P[i, j]
            viol_r += fabs(s - a[i])
        for j in range(n):
            s = 0.0
            for i in range(m):
                s += P[i, j]
            viol_c += fabs(s - b[j])
        if viol_r < tol and viol_c < tol:
            converged = True
            break

    for i in range(m):
        for j in range(n):
            P[i, j] = exp((f[i] + g[j] - C[i, j]) / eps)
    return plan_arr, it, converged


def sinkhorn_plain_kernel(object a_in, object b_in, object C_in,
                          double eps, double tol, int max_iter):
    """Scaling on K = exp(-C/eps); returns (plan, iters, converged, status)."""
    cdef const double[::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef const double[:, ::1] C = np.ascontiguousarray(C_in, dtype=np.float64)
    cdef Py_ssize_t m = C.shape[0], n = C.shape[1]

    K_arr = np.exp(-np.asarray(C_in, dtype=np.float64) / eps)
    cdef double[:, ::1] K = K_arr
    if (K_arr.sum(axis=1) == 0.0).any() or (K_arr.sum(axis=0) == 0.0).any():
        return None, 0, False, STATUS_UNDERFLOW

    u_arr = np.ones(m, dtype=np.float64)
    v_arr = np.ones(n, dtype=np.float64)
    plan_arr = np.empty((m, n), dtype=np.float64)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[:, ::1] P = plan_arr

    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef bint converged = False
    cdef double s, viol_r, viol_c

    while it < max_iter:
        it += 1
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += K[i, j] * v[j]
            if s == 0.0 or s != s:
                return None, it, False, STATUS_UNDERFLOW
            u[i] = a[i] / s
        for j in range(n):
            s = 0.0
            for i in range(m):
                s += K[i, j] * u[i]
            if s == 0.0 or s != s:
                return None, it, False, STATUS_UNDERFLOW
            v[j] = b[j] / s
        viol_r = 0.0
        viol_c = 0.0
        for i in range(m):
            s = 0.0
            for j in range(n):
                P[i, j] = u[i] * K[i, j] * v[j]
                s += P[i, j]
            viol_r += fabs(s - a[i])
        for j in range(n):
            s = 0.0
            for i in range(m):
                s += P[i, j]
            viol_c += fabs(s - b[j])
        if viol_r < tol and viol_c < tol:
            converged = True
            break

    for i in range(m):
        for j in range(n):
            P[i, j] = u[i] * K[i, j] * v[j]
    return plan_arr, it, converged, STATUS_OK

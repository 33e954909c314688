# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled recurrent sequence kernels.

Same contracts as ``pyref``: time-major (T, B, G*H) projections, packed
recurrent weights, zero initial state. Per-step matrix products go through
BLAS dgemm; gate nonlinearities run in tight C loops.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

NAME = "compiled"


cdef inline double _sigmoid(double x) nogil:
    return 1.0 / (1.0 + exp(-x))


cdef void _mm_nn(double *a, double *b, double *c, int m, int k, int n,
                 int lda, int ldb, int ldc, double beta) nogil:
    # row-major C(m,n) = A(m,k) @ B(k,n) + beta*C
    cdef double alpha = 1.0
    dgemm("N", "N", &n, &m, &k, &alpha, b, &ldb, a, &lda, &beta, c, &ldc)


cdef void _mm_nt(double *a, double *b, double *c, int m, int k, int n,
                 int lda, int ldb, int ldc, double beta) nogil:
    # row-major C(m,n) = A(m,k) @ B(n,k)^T + beta*C
    cdef double alpha = 1.0
    dgemm("T", "N", &n, &m, &k, &alpha, b, &ldb, a, &lda, &beta, c, &ldc)


cdef void _mm_tn(double *a, double *b, double *c, int m, int k, int n,
                 int lda, int ldb, int ldc, double beta) nogil:
    # row-major C(m,n) = A(k,m)^T @ B(k,n) + beta*C
    cdef double alpha = 1.0
    dgemm("N", "T", &n, &m, &k, &alpha, b, &ldb, a, &lda, &beta, c, &ldc)


def gru_seq_forward(xp, u):
    xp = np.ascontiguousarray(xp, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[:, :, ::1] xpv = xp
    cdef double[:, ::1] uv = u
    cdef int steps = xpv.shape[0]
    cdef int batch = xpv.shape[1]
    cdef int h3 = xpv.shape[2]
    cdef int hsz = h3 // 3
    h_all_arr = np.zeros((steps + 1, batch, hsz))
    gates_arr = np.empty((steps, batch, h3))
    rh_arr = np.empty((batch, hsz))
    cdef double[:, :, ::1] h_all = h_all_arr
    cdef double[:, :, ::1] gates = gates_arr
    cdef double[:, ::1] rh = rh_arr
    cdef int t, i, j
    cdef double z, r, cand
    with nogil:
        for t in range(steps):
            # z, r pre-activations
            for i in range(batch):
                for j in range(2 * hsz):
                    gates[t, i, j] = xpv[t, i, j]
            _mm_nn(&h_all[t, 0, 0], &uv[0, 0], &gates[t, 0, 0],
                   batch, hsz, 2 * hsz, hsz, h3, h3, 1.0)
            for i in range(batch):
                for j in range(hsz):
                    gates[t, i, j] = _sigmoid(gates[t, i, j])
                    gates[t, i, hsz + j] = _sigmoid(gates[t, i, hsz + j])
                    rh[i, j] = gates[t, i, hsz + j] * h_all[t, i, j]
            # candidate pre-activation
            for i in range(batch):
                for j in range(hsz):
                    gates[t, i, 2 * hsz + j] = xpv[t, i, 2 * hsz + j]
            _mm_nn(&rh[0, 0], &uv[0, 2 * hsz], &gates[t, 0, 2 * hsz],
                   batch, hsz, hsz, hsz, h3, h3, 1.0)
            for i in range(batch):
                for j in range(hsz):
                    z = gates[t, i, j]
                    cand = tanh(gates[t, i, 2 * hsz + j])
                    gates[t, i, 2 * hsz + j] = cand
                    h_all[t + 1, i, j] = (1.0 - z) * h_all[t, i, j] + z * cand
    return h_all_arr, gates_arr


def gru_seq_backward(u, h_all, gates, dh_seq):
    u = np.ascontiguousarray(u, dtype=np.float64)
    h_all = np.ascontiguousarray(h_all, dtype=np.float64)
    gates = np.ascontiguousarray(gates, dtype=np.float64)
    dh_seq = np.ascontiguousarray(dh_seq, dtype=np.float64)
    cdef double[:, ::1] uv = u
    cdef double[:, :, ::1] hv = h_all
    cdef double[:, :, ::1] gv = gates
    cdef double[:, :, ::1] dhs = dh_seq
    cdef int steps = gv.shape[0]
    cdef int batch = gv.shape[1]
    cdef int h3 = gv.shape[2]
    cdef int hsz = h3 // 3
    dxp_arr = np.empty((steps, batch, h3))
    du_arr = np.zeros_like(u)
    dh_arr = np.zeros((batch, hsz))
    dh_prev_arr = np.empty((batch, hsz))
    drh_arr = np.empty((batch, hsz))
    rh_arr = np.empty((batch, hsz))
    cdef double[:, :, ::1] dxp = dxp_arr
    cdef double[:, ::1] du = du_arr
    cdef double[:, ::1] dh = dh_arr
    cdef double[:, ::1] dh_prev = dh_prev_arr
    cdef double[:, ::1] drh = drh_arr
    cdef double[:, ::1] rh = rh_arr
    cdef int t, i, j
    cdef double z, r, cand, hp, dhv, dz, dcand, dr
    with nogil:
        for t in range(steps - 1, -1, -1):
            for i in range(batch):
                for j in range(hsz):
                    dhv = dh[i, j] + dhs[t, i, j]
                    z = gv[t, i, j]
                    r = gv[t, i, hsz + j]
                    cand = gv[t, i, 2 * hsz + j]
                    hp = hv[t, i, j]
                    dz = dhv * (cand - hp)
                    dcand = dhv * z
                    dh_prev[i, j] = dhv * (1.0 - z)
                    dxp[t, i, 2 * hsz + j] = dcand * (1.0 - cand * cand)
                    dxp[t, i, j] = dz * z * (1.0 - z)  # still missing dr term
                    rh[i, j] = r * hp
            # drh = da_c @ u_c^T
            _mm_nt(&dxp[t, 0, 2 * hsz], &uv[0, 2 * hsz], &drh[0, 0],
                   batch, hsz, hsz, h3, h3, hsz, 0.0)
            # du_c += rh^T @ da_c
            _mm_tn(&rh[0, 0], &dxp[t, 0, 2 * hsz], &du[0, 2 * hsz],
                   hsz, batch, hsz, hsz, h3, h3, 1.0)
            for i in range(batch):
                for j in range(hsz):
                    r = gv[t, i, hsz + j]
                    hp = hv[t, i, j]
                    dr = drh[i, j] * hp
                    dh_prev[i, j] += drh[i, j] * r
                    dxp[t, i, hsz + j] = dr * r * (1.0 - r)
            # dh_prev += [daz, dar] @ u_zr^T
            _mm_nt(&dxp[t, 0, 0], &uv[0, 0], &dh_prev[0, 0],
                   batch, 2 * hsz, hsz, h3, h3, hsz, 1.0)
            # du_zr += h_prev^T @ [daz, dar]
            _mm_tn(&hv[t, 0, 0], &dxp[t, 0, 0], &du[0, 0],
                   hsz, batch, 2 * hsz, hsz, h3, h3, 1.0)
            for i in range(batch):
                for j in range(hsz):
                    dh[i, j] = dh_prev[i, j]
    return dxp_arr, du_arr, dh_arr


def lstm_seq_forward(xp, u):
    xp = np.ascontiguousarray(xp, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[:, :, ::1] xpv = xp
    cdef double[:, ::1] uv = u
    cdef int steps = xpv.shape[0]
    cdef int batch = xpv.shape[1]
    cdef int h4 = xpv.shape[2]
    cdef int hsz = h4 // 4
    h_all_arr = np.zeros((steps + 1, batch, hsz))
    c_all_arr = np.zeros((steps + 1, batch, hsz))
    gates_arr = np.empty((steps, batch, h4))
    cdef double[:, :, ::1] h_all = h_all_arr
    cdef double[:, :, ::1] c_all = c_all_arr
    cdef double[:, :, ::1] gates = gates_arr
    cdef int t, i, j
    cdef double ig, fg, gg, og, c
    with nogil:
        for t in range(steps):
            for i in range(batch):
                for j in range(h4):
                    gates[t, i, j] = xpv[t, i, j]
            _mm_nn(&h_all[t, 0, 0], &uv[0, 0], &gates[t, 0, 0],
                   batch, hsz, h4, hsz, h4, h4, 1.0)
            for i in range(batch):
                for j in range(hsz):
                    ig = _sigmoid(gates[t, i, j])
                    fg = _sigmoid(gates[t, i, hsz + j])
                    gg = tanh(gates[t, i, 2 * hsz + j])
                    og = _sigmoid(gates[t, i, 3 * hsz + j])
                    gates[t, i, j] = ig
                    gates[t, i, hsz + j] = fg
                    gates[t, i, 2 * hsz + j] = gg
                    gates[t, i, 3 * hsz + j] = og
                    c = fg * c_all[t, i, j] + ig * gg
                    c_all[t + 1, i, j] = c
                    h_all[t + 1, i, j] = og * tanh(c)
    return h_all_arr, c_all_arr, gates_arr


def lstm_seq_backward(u, h_all, c_all, gates, dh_seq):
    u = np.ascontiguousarray(u, dtype=np.float64)
    h_all = np.ascontiguousarray(h_all, dtype=np.float64)
    c_all = np.ascontiguousarray(c_all, dtype=np.float64)
    gates = np.ascontiguousarray(gates, dtype=np.float64)
    dh_seq = np.ascontiguousarray(dh_seq, dtype=np.float64)
    cdef double[:, ::1] uv = u
    cdef double[:, :, ::1] hv = h_all
    cdef double[:, :, ::1] cv = c_all
    cdef double[:, :, ::1] gv = gates
    cdef double[:, :, ::1] dhs = dh_seq
    cdef int steps = gv.shape[0]
    cdef int batch = gv.shape[1]
    cdef int h4 = gv.shape[2]
    cdef int hsz = h4 // 4
    dxp_arr = np.empty((steps, batch, h4))
    du_arr = np.zeros_like(u)
    dh_arr = np.zeros((batch, hsz))
    dc_arr = np.zeros((batch, hsz))
    cdef double[:, :, ::1] dxp = dxp_arr
    cdef double[:, ::1] du = du_arr
    cdef double[:, ::1] dh = dh_arr
    cdef double[:, ::1] dc = dc_arr
    cdef int t, i, j
    cdef double ig, fg, gg, og, tc, dhv, do, dct, di, dg, df
    with nogil:
        for t in range(steps - 1, -1, -1):
            for i in range(batch):
                for j in range(hsz):
                    dhv = dh[i, j] + dhs[t, i, j]
                    ig = gv[t, i, j]
                    fg = gv[t, i, hsz + j]
                    gg = gv[t, i, 2 * hsz + j]
                    og = gv[t, i, 3 * hsz + j]
                    tc = tanh(cv[t + 1, i, j])
                    do = dhv * tc
                    dct = dc[i, j] + dhv * og * (1.0 - tc * tc)
                    di = dct * gg
                    dg = dct * ig
                    df = dct * cv[t, i, j]
                    dc[i, j] = dct * fg
                    dxp[t, i, j] = di * ig * (1.0 - ig)
                    dxp[t, i, hsz + j] = df * fg * (1.0 - fg)
                    dxp[t, i, 2 * hsz + j] = dg * (1.0 - gg * gg)
                    dxp[t, i, 3 * hsz + j] = do * og * (1.0 - og)
            # dh_prev = da @ u^T
            _mm_nt(&dxp[t, 0, 0], &uv[0, 0], &dh[0, 0],
                   batch, h4, hsz, h4, h4, hsz, 0.0)
            # du += h_prev^T @ da
            _mm_tn(&hv[t, 0, 0], &dxp[t, 0, 0], &du[0, 0],
                   hsz, batch, h4, hsz, h4, h4, 1.0)
    return dxp_arr, du_arr, dh_arr

"""Pure-NumPy recurrent sequence kernels (reference backend).

Layouts are time-major for the sequence dimension so per-step slices are
contiguous:

* ``xp``     (T, B, G*H)  input projections ``x @ W + b`` for all steps
* ``u``      (H, G*H)     packed recurrent weights
* ``h_all``  (T+1, B, H)  hidden states, row 0 is the (zero) initial state

Gate packing order is ``(z, r, candidate)`` for the GRU (G=3) and
``(i, f, g, o)`` for the LSTM (G=4). The compiled backend in ``_speedups``
implements the same contracts.
"""
import numpy as np

NAME = "python"


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gru_step(xp_t, h_prev, u):
    """One GRU step. xp_t: (B, 3H) precomputed x-projection, h_prev: (B, H)."""
    hsz = h_prev.shape[1]
    zr = xp_t[:, :2 * hsz] + h_prev @ u[:, :2 * hsz]
    z = sigmoid(zr[:, :hsz])
    r = sigmoid(zr[:, hsz:])
    cand = np.tanh(xp_t[:, 2 * hsz:] + (r * h_prev) @ u[:, 2 * hsz:])
    h = (1.0 - z) * h_prev + z * cand
    return h, z, r, cand


def lstm_step(xp_t, h_prev, c_prev, u):
    """One LSTM step. xp_t: (B, 4H), h_prev/c_prev: (B, H)."""
    hsz = h_prev.shape[1]
    a = xp_t + h_prev @ u
    i = sigmoid(a[:, :hsz])
    f = sigmoid(a[:, hsz:2 * hsz])
    g = np.tanh(a[:, 2 * hsz:3 * hsz])
    o = sigmoid(a[:, 3 * hsz:])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c, i, f, g, o


def gru_seq_forward(xp, u):
    steps, batch, h3 = xp.shape
    hsz = h3 // 3
    h_all = np.zeros((steps + 1, batch, hsz))
    gates = np.empty((steps, batch, h3))
    for t in range(steps):
        h, z, r, cand = gru_step(xp[t], h_all[t], u)
        h_all[t + 1] = h
        gates[t, :, :hsz] = z
        gates[t, :, hsz:2 * hsz] = r
        gates[t, :, 2 * hsz:] = cand
    return h_all, gates


def gru_seq_backward(u, h_all, gates, dh_seq):
    steps, batch, h3 = gates.shape
    hsz = h3 // 3
    u_zr = u[:, :2 * hsz]
    u_c = u[:, 2 * hsz:]
    dxp = np.empty((steps, batch, h3))
    du = np.zeros_like(u)
    dh = np.zeros((batch, hsz))
    for t in range(steps - 1, -1, -1):
        dh = dh + dh_seq[t]
        z = gates[t, :, :hsz]
        r = gates[t, :, hsz:2 * hsz]
        cand = gates[t, :, 2 * hsz:]
        h_prev = h_all[t]
        dz = dh * (cand - h_prev)
        dcand = dh * z
        dh_prev = dh * (1.0 - z)
        da_c = dcand * (1.0 - cand * cand)
        drh = da_c @ u_c.T
        du[:, 2 * hsz:] += (r * h_prev).T @ da_c
        dr = drh * h_prev
        dh_prev = dh_prev + drh * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        dazr = np.concatenate([daz, dar], axis=1)
        dh_prev = dh_prev + dazr @ u_zr.T
        du[:, :2 * hsz] += h_prev.T @ dazr
        dxp[t, :, :2 * hsz] = dazr
        dxp[t, :, 2 * hsz:] = da_c
        dh = dh_prev
    return dxp, du, dh


def lstm_seq_forward(xp, u):
    steps, batch, h4 = xp.shape
    hsz = h4 // 4
    h_all = np.zeros((steps + 1, batch, hsz))
    c_all = np.zeros((steps + 1, batch, hsz))
    gates = np.empty((steps, batch, h4))
    for t in range(steps):
        h, c, i, f, g, o = lstm_step(xp[t], h_all[t], c_all[t], u)
        h_all[t + 1] = h
        c_all[t + 1] = c
        gates[t, :, :hsz] = i
        gates[t, :, hsz:2 * hsz] = f
        gates[t, :, 2 * hsz:3 * hsz] = g
        gates[t, :, 3 * hsz:] = o
    return h_all, c_all, gates


def lstm_seq_backward(u, h_all, c_all, gates, dh_seq):
    steps, batch, h4 = gates.shape
    hsz = h4 // 4
    dxp = np.empty((steps, batch, h4))
    du = np.zeros_like(u)
    dh = np.zeros((batch, hsz))
    dc = np.zeros((batch, hsz))
    for t in range(steps - 1, -1, -1):
        dh = dh + dh_seq[t]
        i = gates[t, :, :hsz]
        f = gates[t, :, hsz:2 * hsz]
        g = gates[t, :, 2 * hsz:3 * hsz]
        o = gates[t, :, 3 * hsz:]
        tc = np.tanh(c_all[t + 1])
        do = dh * tc
        dct = dc + dh * o * (1.0 - tc * tc)
        di = dct * g
        dg = dct * i
        df = dct * c_all[t]
        dc = dct * f
        da = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        dxp[t] = da
        dh = da @ u.T
        du += h_all[t].T @ da
    return dxp, du, dh

"""Recurrent sequence runners built on the kernel backends.

Weights are packed per cell: ``W`` (C, G*H), ``U`` (H, G*H), ``b`` (G*H,)
with gate order (z, r, candidate) for GRU and (i, f, g, o) for LSTM. All
runs fold left from a zero initial state.
"""
import numpy as np

from .. import kernels
from ..kernels import pyref

CELL_KINDS = ("GRU", "LSTM")
GATES = {"GRU": 3, "LSTM": 4}


def gru_cell(x_t, h_prev, w, u, b):
    """Single GRU step; accepts (C,)/(H,) vectors or (B, C)/(B, H) batches."""
    x_t, h_prev, squeeze = _promote(x_t, h_prev)
    h, _, _, _ = pyref.gru_step(x_t @ w + b, h_prev, u)
    return h[0] if squeeze else h


def lstm_cell(x_t, h_prev, c_prev, w, u, b):
    """Single LSTM step; returns (h_t, c_t)."""
    x_t, h_prev, squeeze = _promote(x_t, h_prev)
    c_prev = np.atleast_2d(np.asarray(c_prev, dtype=np.float64))
    h, c, *_ = pyref.lstm_step(x_t @ w + b, h_prev, c_prev, u)
    return (h[0], c[0]) if squeeze else (h, c)


def _promote(x_t, h_prev):
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    squeeze = x_t.ndim == 1
    return np.atleast_2d(x_t), np.atleast_2d(h_prev), squeeze


def run_recurrent(kind, x, w, u, b, direction="forward", backend=None):
    """Run a packed GRU/LSTM over x: (B, T, C).

    Returns (h_seq (B, T, H), final (B, H), cache). ``direction="backward"``
    processes the time-reversed input and reports its own final state; its
    ``h_seq`` is in processing order.
    """
    if kind not in CELL_KINDS:
        raise ValueError(f"unknown recurrent cell kind {kind!r}")
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    if x.ndim != 3 or x.shape[1] < 1:
        raise ValueError(f"input must be (B, T, C) with T >= 1, got {x.shape}")
    backend = backend or kernels.active
    xs = x[:, ::-1] if direction == "backward" else x
    xp = np.ascontiguousarray((xs @ w + b).transpose(1, 0, 2))
    if kind == "GRU":
        h_all, gates = backend.gru_seq_forward(xp, u)
        cache = (kind, xs, w, u, h_all, None, gates, direction, backend)
    else:
        h_all, c_all, gates = backend.lstm_seq_forward(xp, u)
        cache = (kind, xs, w, u, h_all, c_all, gates, direction, backend)
    h_seq = h_all[1:].transpose(1, 0, 2)
    return h_seq, h_all[-1], cache


def recurrent_backward(cache, dfinal):
    """Backprop from a final-state gradient.

    Returns (dx (B, T, C), dw, du, db) with dx in the caller's time order.
    """
    kind, xs, w, u, h_all, c_all, gates, direction, backend = cache
    steps, batch = gates.shape[0], gates.shape[1]
    hsz = u.shape[0]
    dh_seq = np.zeros((steps, batch, hsz))
    dh_seq[-1] = dfinal
    if kind == "GRU":
        dxp, du, _ = backend.gru_seq_backward(u, h_all, gates, dh_seq)
    else:
        dxp, du, _ = backend.lstm_seq_backward(u, h_all, c_all, gates, dh_seq)
    dxp_bt = dxp.transpose(1, 0, 2)  # (B, T, G*H)
    dw = np.einsum("btc,btg->cg", xs, dxp_bt)
    db = dxp_bt.sum(axis=(0, 1))
    dx = dxp_bt @ w.T
    if direction == "backward":
        dx = dx[:, ::-1]
    return dx, dw, du, db


def run_bidirectional(kind, x, params_fwd, params_bwd, backend=None):
    """Concatenated final states of independent forward and backward runs.

    Each params tuple is (w, u, b). Returns (final (B, 2H), cache).
    """
    _, final_f, cache_f = run_recurrent(kind, x, *params_fwd,
                                        direction="forward", backend=backend)
    _, final_b, cache_b = run_recurrent(kind, x, *params_bwd,
                                        direction="backward", backend=backend)
    return np.concatenate([final_f, final_b], axis=1), (cache_f, cache_b)


def bidirectional_backward(cache, dfinal):
    """Returns (dx, (dw_f, du_f, db_f), (dw_b, du_b, db_b))."""
    cache_f, cache_b = cache
    hsz = cache_f[3].shape[0]
    dx_f, dw_f, du_f, db_f = recurrent_backward(cache_f, dfinal[:, :hsz])
    dx_b, dw_b, du_b, db_b = recurrent_backward(cache_b, dfinal[:, hsz:])
    return dx_f + dx_b, (dw_f, du_f, db_f), (dw_b, du_b, db_b)

"""Feed-forward layer primitives with exact backward passes.

Every ``*_forward`` returns ``(output, cache)`` and the matching
``*_backward`` consumes that cache plus the upstream gradient. Batches are
leading: dense operates on (B, D), sequence layers on (B, T, C).
"""
import numpy as np


def dense_forward(x, w, b):
    """x: (B, D), w: (D, K), b: (K,) -> x @ w + b."""
    if x.shape[-1] != w.shape[0]:
        raise ValueError(f"dense shape mismatch: x {x.shape} vs w {w.shape}")
    return x @ w + b, (x, w)


def dense_backward(cache, dout):
    x, w = cache
    dx = dout @ w.T
    dw = x.T @ dout
    db = dout.sum(axis=0)
    return dx, dw, db


def relu_forward(x):
    return np.maximum(x, 0.0), (x > 0.0)


def relu_backward(cache, dout):
    return dout * cache


def conv1d_forward(x, kernels, bias):
    """Same-padded cross-correlation along time.

    x: (B, T, C), kernels: (K, C, k) with odd k, bias: (K,) -> (B, T, K).
    """
    n_out, n_in, width = kernels.shape
    if width % 2 != 1:
        raise ValueError(f"kernel width must be odd, got {width}")
    if x.shape[-1] != n_in:
        raise ValueError(f"conv shape mismatch: x {x.shape} vs kernels {kernels.shape}")
    pad = (width - 1) // 2
    xpad = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
    windows = np.lib.stride_tricks.sliding_window_view(xpad, width, axis=1)
    # windows: (B, T, C, k); contract channel and tap axes
    out = np.tensordot(windows, kernels, axes=([2, 3], [1, 2])) + bias
    return out, (xpad, kernels, x.shape)


def conv1d_backward(cache, dout):
    xpad, kernels, x_shape = cache
    _, n_in, width = kernels.shape
    steps = x_shape[1]
    pad = (width - 1) // 2
    windows = np.lib.stride_tricks.sliding_window_view(xpad, width, axis=1)
    dk = np.tensordot(dout, windows, axes=([0, 1], [0, 1]))  # (K, C, k)
    db = dout.sum(axis=(0, 1))
    dxpad = np.zeros_like(xpad)
    for j in range(width):
        dxpad[:, j:j + steps, :] += dout @ kernels[:, :, j]
    dx = dxpad[:, pad:pad + steps, :]
    return dx, dk, db


def maxpool1d_forward(x):
    """Width-2, stride-2 max pooling; an odd final step passes through.

    x: (B, T, K) -> (B, ceil(T/2), K). Ties route the gradient to the
    earlier element.
    """
    b, steps, k = x.shape
    even = steps - (steps % 2)
    pairs = x[:, :even].reshape(b, even // 2, 2, k)
    winners = pairs.argmax(axis=2)  # first max wins ties
    out = np.take_along_axis(pairs, winners[:, :, None, :], axis=2)[:, :, 0, :]
    if steps % 2:
        out = np.concatenate([out, x[:, -1:, :]], axis=1)
    return out, (winners, x.shape)


def maxpool1d_backward(cache, dout):
    winners, x_shape = cache
    b, steps, k = x_shape
    even = steps - (steps % 2)
    dx = np.zeros(x_shape)
    dpairs = dx[:, :even].reshape(b, even // 2, 2, k)
    np.put_along_axis(dpairs, winners[:, :, None, :],
                      dout[:, :even // 2, None, :], axis=2)
    dx[:, :even] = dpairs.reshape(b, even, k)
    if steps % 2:
        dx[:, -1] = dout[:, -1]
    return dx


def time_mean_forward(x):
    """Mean over the time axis: (B, T, C) -> (B, C)."""
    return x.mean(axis=1), x.shape


def time_mean_backward(cache, dout):
    b, steps, c = cache
    return np.broadcast_to(dout[:, None, :] / steps, (b, steps, c)).copy()


def softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def self_attention_forward(x, wq, wk, wv):
    """Single-head scaled dot-product self-attention.

    x: (B, T, C), wq/wk/wv: (C, H) -> (B, T, H).
    """
    if x.shape[-1] != wq.shape[0]:
        raise ValueError(f"attention shape mismatch: x {x.shape} vs wq {wq.shape}")
    h = wq.shape[1]
    q = x @ wq
    key = x @ wk
    v = x @ wv
    scores = q @ key.transpose(0, 2, 1) / np.sqrt(h)
    attn = softmax(scores)
    out = attn @ v
    return out, (x, wq, wk, wv, q, key, v, attn)


def self_attention_backward(cache, dout):
    x, wq, wk, wv, q, key, v, attn, = cache
    h = wq.shape[1]
    dattn = dout @ v.transpose(0, 2, 1)
    dv = attn.transpose(0, 2, 1) @ dout
    dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
    dscores /= np.sqrt(h)
    dq = dscores @ key
    dkey = dscores.transpose(0, 2, 1) @ q
    dwq = np.einsum("btc,bth->ch", x, dq)
    dwk = np.einsum("btc,bth->ch", x, dkey)
    dwv = np.einsum("btc,bth->ch", x, dv)
    dx = dq @ wq.T + dkey @ wk.T + dv @ wv.T
    return dx, dwq, dwk, dwv


def softmax_cross_entropy(logits, labels):
    """Mean cross entropy over the batch, with the matching logit gradient.

    logits: (B, n), labels: (B,) ints -> (loss, dlogits) where
    dlogits = (softmax - onehot) / B.
    """
    labels = np.asarray(labels)
    b, n = logits.shape
    if labels.shape != (b,):
        raise ValueError(f"labels shape {labels.shape} does not match batch {b}")
    if labels.min() < 0 or labels.max() >= n:
        raise ValueError(f"label out of range 0..{n - 1}")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_z - shifted[np.arange(b), labels]))
    probs = np.exp(shifted - log_z[:, None])
    probs[np.arange(b), labels] -= 1.0
    return loss, probs / b

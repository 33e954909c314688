"""The six classifier architectures with exact backpropagation.

Wiring:

* CNN    -- conv(k, ch) > ReLU > maxpool > conv(k-2, 2ch) > ReLU > maxpool
            > time-mean > dense(3)
* GRU    -- packed GRU over time > final state > dense(3)
* LSTM   -- packed LSTM over time > final state > dense(3)
* BIGRU  -- independent forward+backward GRUs > concat finals > dense(3)
* BILSTM -- same with LSTM cells
* ATTN   -- time-distributed embed C>H > single-head self-attention >
            time-mean > dense(3)

Parameters live in plain name->ndarray dicts; ``model_forward`` returns the
logits plus a single-use trace that ``model_backward`` consumes.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ..util import make_rng
from . import layers
from .recurrent import (bidirectional_backward, recurrent_backward,
                        run_bidirectional, run_recurrent)

MODEL_KINDS = ("CNN", "GRU", "LSTM", "ATTN", "BIGRU", "BILSTM")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    input_T: int
    input_C: int
    hidden: int = 64
    conv_channels: int = 16
    kernel: int = 7
    classes: int = 3

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if self.kernel % 2 != 1:
            raise ValueError("kernel width must be odd")
        if self.classes != 3:
            raise ValueError("this workbench classifies exactly 3 classes")
        if self.input_T < 1 or self.input_C < 1:
            raise ValueError("input_T and input_C must be >= 1")

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("kind", "input_T", "input_C", "hidden", "conv_channels",
                 "kernel", "classes")}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in
                      ("kind", "input_T", "input_C", "hidden", "conv_channels",
                       "kernel", "classes")})


class TraceReuseError(RuntimeError):
    """A ForwardTrace was consumed by a second backward call."""


@dataclass
class ForwardTrace:
    spec: ModelSpec
    caches: dict
    consumed: bool = False


def second_kernel(kernel: int) -> int:
    return max(kernel - 2, 1)


def param_shapes(spec: ModelSpec) -> dict:
    """Ordered name -> shape map for every trainable tensor."""
    h, c = spec.hidden, spec.input_C
    if spec.kind == "CNN":
        ch = spec.conv_channels
        k2 = second_kernel(spec.kernel)
        return {
            "conv1.kernels": (ch, c, spec.kernel),
            "conv1.bias": (ch,),
            "conv2.kernels": (2 * ch, ch, k2),
            "conv2.bias": (2 * ch,),
            "head.W": (2 * ch, spec.classes),
            "head.b": (spec.classes,),
        }
    if spec.kind in ("GRU", "LSTM"):
        g = 3 if spec.kind == "GRU" else 4
        p = spec.kind.lower()
        return {
            f"{p}.W": (c, g * h),
            f"{p}.U": (h, g * h),
            f"{p}.b": (g * h,),
            "head.W": (h, spec.classes),
            "head.b": (spec.classes,),
        }
    if spec.kind in ("BIGRU", "BILSTM"):
        g = 3 if spec.kind == "BIGRU" else 4
        p = spec.kind[2:].lower()
        shapes = {}
        for d in ("fwd", "bwd"):
            shapes[f"{p}_{d}.W"] = (c, g * h)
            shapes[f"{p}_{d}.U"] = (h, g * h)
            shapes[f"{p}_{d}.b"] = (g * h,)
        shapes["head.W"] = (2 * h, spec.classes)
        shapes["head.b"] = (spec.classes,)
        return shapes
    # ATTN
    return {
        "embed.W": (c, h),
        "embed.b": (h,),
        "attn.Wq": (h, h),
        "attn.Wk": (h, h),
        "attn.Wv": (h, h),
        "head.W": (h, spec.classes),
        "head.b": (spec.classes,),
    }


def glorot_bound(shape) -> float:
    """Uniform init half-width sqrt(6 / (fan_in + fan_out))."""
    if len(shape) == 2:
        fan_in, fan_out = shape
    elif len(shape) == 3:  # (K, C, k) conv kernels
        out_ch, in_ch, width = shape
        fan_in, fan_out = in_ch * width, out_ch * width
    else:
        raise ValueError(f"no fan rule for shape {shape}")
    return math.sqrt(6.0 / (fan_in + fan_out))


def init_params(spec: ModelSpec, seed: int) -> dict:
    """Glorot-uniform weights, zero biases; LSTM forget-gate bias set to 1."""
    rng = make_rng(seed, 7)
    params = {}
    for name, shape in param_shapes(spec).items():
        if len(shape) == 1:
            params[name] = np.zeros(shape)
        else:
            a = glorot_bound(shape)
            params[name] = rng.uniform(-a, a, size=shape)
    h = spec.hidden
    for name in params:
        if name.endswith(".b") and name.split(".")[0].startswith("lstm"):
            params[name][h:2 * h] = 1.0  # forget gate block of (i, f, g, o)
    return params


def _cell_params(params, prefix):
    return params[f"{prefix}.W"], params[f"{prefix}.U"], params[f"{prefix}.b"]


def model_forward(spec: ModelSpec, params: dict, batch: np.ndarray,
                  backend=None):
    """Logits (B, 3) plus a single-use ForwardTrace for the backward pass."""
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 3 or x.shape[1:] != (spec.input_T, spec.input_C):
        raise ValueError(
            f"batch shape {x.shape} does not match spec "
            f"(B, {spec.input_T}, {spec.input_C})")
    caches = {}
    if spec.kind == "CNN":
        out, caches["conv1"] = layers.conv1d_forward(
            x, params["conv1.kernels"], params["conv1.bias"])
        out, caches["relu1"] = layers.relu_forward(out)
        out, caches["pool1"] = layers.maxpool1d_forward(out)
        out, caches["conv2"] = layers.conv1d_forward(
            out, params["conv2.kernels"], params["conv2.bias"])
        out, caches["relu2"] = layers.relu_forward(out)
        out, caches["pool2"] = layers.maxpool1d_forward(out)
        out, caches["mean"] = layers.time_mean_forward(out)
    elif spec.kind in ("GRU", "LSTM"):
        _, out, caches["rnn"] = run_recurrent(
            spec.kind, x, *_cell_params(params, spec.kind.lower()),
            backend=backend)
    elif spec.kind in ("BIGRU", "BILSTM"):
        cell = spec.kind[2:]
        p = cell.lower()
        out, caches["birnn"] = run_bidirectional(
            cell, x, _cell_params(params, f"{p}_fwd"),
            _cell_params(params, f"{p}_bwd"), backend=backend)
    else:  # ATTN
        flat = x.reshape(-1, spec.input_C)
        emb, caches["embed"] = layers.dense_forward(
            flat, params["embed.W"], params["embed.b"])
        emb = emb.reshape(x.shape[0], spec.input_T, spec.hidden)
        out, caches["attn"] = layers.self_attention_forward(
            emb, params["attn.Wq"], params["attn.Wk"], params["attn.Wv"])
        out, caches["mean"] = layers.time_mean_forward(out)
    logits, caches["head"] = layers.dense_forward(
        out, params["head.W"], params["head.b"])
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("model produced non-finite logits")
    return logits, ForwardTrace(spec, caches)


def model_backward(trace: ForwardTrace, dlogits: np.ndarray) -> dict:
    """Gradients for every parameter tensor, keyed like the ParamSet."""
    if trace.consumed:
        raise TraceReuseError("forward trace already consumed by a backward call")
    trace.consumed = True
    spec, caches = trace.spec, trace.caches
    grads = {}
    dout, grads["head.W"], grads["head.b"] = layers.dense_backward(
        caches["head"], dlogits)
    if spec.kind == "CNN":
        dout = layers.time_mean_backward(caches["mean"], dout)
        dout = layers.maxpool1d_backward(caches["pool2"], dout)
        dout = layers.relu_backward(caches["relu2"], dout)
        dout, grads["conv2.kernels"], grads["conv2.bias"] = \
            layers.conv1d_backward(caches["conv2"], dout)
        dout = layers.maxpool1d_backward(caches["pool1"], dout)
        dout = layers.relu_backward(caches["relu1"], dout)
        _, grads["conv1.kernels"], grads["conv1.bias"] = \
            layers.conv1d_backward(caches["conv1"], dout)
    elif spec.kind in ("GRU", "LSTM"):
        p = spec.kind.lower()
        _, grads[f"{p}.W"], grads[f"{p}.U"], grads[f"{p}.b"] = \
            recurrent_backward(caches["rnn"], dout)
    elif spec.kind in ("BIGRU", "BILSTM"):
        p = spec.kind[2:].lower()
        _, gf, gb = bidirectional_backward(caches["birnn"], dout)
        grads[f"{p}_fwd.W"], grads[f"{p}_fwd.U"], grads[f"{p}_fwd.b"] = gf
        grads[f"{p}_bwd.W"], grads[f"{p}_bwd.U"], grads[f"{p}_bwd.b"] = gb
    else:  # ATTN
        dout = layers.time_mean_backward(caches["mean"], dout)
        dout, grads["attn.Wq"], grads["attn.Wk"], grads["attn.Wv"] = \
            layers.self_attention_backward(caches["attn"], dout)
        dflat = dout.reshape(-1, spec.hidden)
        _, grads["embed.W"], grads["embed.b"] = layers.dense_backward(
            caches["embed"], dflat)
    return grads


def count_params(params: dict) -> int:
    return sum(int(np.prod(v.shape)) for v in params.values())


def grad_check(spec: ModelSpec, seed: int, eps: float = 1e-5,
               batch_size: int = 3, backend=None) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error per entry is |a - n| / max(1e-8, |a| + |n|).
    """
    rng = make_rng(seed, 13)
    params = init_params(spec, seed)
    if count_params(params) > 10_000:
        raise ValueError("spec too large for finite-difference checking")
    x = rng.normal(size=(batch_size, spec.input_T, spec.input_C))
    labels = rng.integers(0, spec.classes, size=batch_size)

    def loss_value():
        logits, _ = model_forward(spec, params, x, backend=backend)
        return layers.softmax_cross_entropy(logits, labels)[0]

    logits, trace = model_forward(spec, params, x, backend=backend)
    _, dlogits = layers.softmax_cross_entropy(logits, labels)
    analytic = model_backward(trace, dlogits)

    worst = 0.0
    for name, tensor in params.items():
        flat = tensor.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        for j in range(flat.size):
            keep = flat[j]
            flat[j] = keep + eps
            up = loss_value()
            flat[j] = keep - eps
            down = loss_value()
            flat[j] = keep
            numeric = (up - down) / (2.0 * eps)
            err = abs(a_flat[j] - numeric) / max(1e-8, abs(a_flat[j]) + abs(numeric))
            worst = max(worst, err)
    return worst

"""Dense numeric kernels with hand-written backward passes.

All arithmetic is 64-bit float on numpy arrays.  Batched quantities are
row-major ``(batch, dim)``; every forward op returns whatever its
backward counterpart needs as an opaque cache.  Gate order inside the
stacked LSTM weights is input, forget, output, candidate (i, f, o, g).

Everything here is deterministic: the same operands in the same order
give bit-identical results across runs of the same build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class ParamTensor:
    """A trainable array paired with its gradient accumulator."""

    name: str
    value: np.ndarray
    grad: np.ndarray

    @classmethod
    def of(cls, name: str, value: np.ndarray) -> "ParamTensor":
        value = np.asarray(value, dtype=np.float64)
        return cls(name, value, np.zeros_like(value))

    @property
    def size(self) -> int:
        return self.value.size


@dataclass
class LstmParams:
    """Stacked 4-gate LSTM weights: W (4H, D), U (4H, H), b (4H,)."""

    W: ParamTensor
    U: ParamTensor
    b: ParamTensor
    input_dim: int
    hidden_dim: int

    def tensors(self) -> list[ParamTensor]:
        return [self.W, self.U, self.b]


@dataclass
class LstmState:
    h: np.ndarray  # (batch, hidden)
    c: np.ndarray  # (batch, hidden)

    @classmethod
    def zeros(cls, batch: int, hidden_dim: int) -> "LstmState":
        return cls(np.zeros((batch, hidden_dim)), np.zeros((batch, hidden_dim)))


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; rows sum to 1."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, targets: np.ndarray, weights: np.ndarray):
    """Weighted mean negative log-likelihood and its logit gradient.

    loss = sum_i w_i * (-log softmax(logits_i)[target_i]) / sum_i w_i
    dlogits_i = w_i * (softmax(logits_i) - onehot(target_i)) / sum_i w_i

    Rows with weight 0 contribute nothing to either.  Raises when every
    weight is zero.
    """
    targets = np.asarray(targets, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    n, cols = logits.shape
    if targets.min(initial=0) < 0 or targets.max(initial=0) >= cols:
        raise ValueError("target id out of range for the logit columns")
    wsum = float(weights.sum())
    if wsum == 0.0:
        raise ValueError("no weighted targets")
    m = logits.max(axis=1)
    lse = m + np.log(np.exp(logits - m[:, None]).sum(axis=1))
    rows = np.arange(n)
    nll = lse - logits[rows, targets]
    loss = float((weights * nll).sum() / wsum)
    dlogits = np.exp(logits - lse[:, None])
    dlogits[rows, targets] -= 1.0
    dlogits *= (weights / wsum)[:, None]
    return loss, dlogits


def lstm_cell_forward(x: np.ndarray, state: LstmState, p: LstmParams):
    """One LSTM step.

    i = sig(Wi x + Ui h + bi), f = sig(...), o = sig(...), g = tanh(...)
    c' = f*c + i*g, h' = o*tanh(c')
    """
    if x.shape[1] != p.input_dim or state.h.shape[1] != p.hidden_dim:
        raise ValueError(
            f"lstm dimensions mismatch: x {x.shape}, h {state.h.shape}, "
            f"expected input_dim={p.input_dim}, hidden_dim={p.hidden_dim}"
        )
    hd = p.hidden_dim
    gates = x @ p.W.value.T + state.h @ p.U.value.T + p.b.value
    i = sigmoid(gates[:, 0 * hd : 1 * hd])
    f = sigmoid(gates[:, 1 * hd : 2 * hd])
    o = sigmoid(gates[:, 2 * hd : 3 * hd])
    g = np.tanh(gates[:, 3 * hd : 4 * hd])
    c_new = f * state.c + i * g
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    cache = (x, state.h, state.c, i, f, o, g, tanh_c)
    return LstmState(h_new, c_new), cache


def lstm_cell_backward(dh: np.ndarray, dc: np.ndarray, cache, p: LstmParams):
    """Backward through one LSTM step, accumulating into the param grads.

    Returns (dx, dh_prev, dc_prev).
    """
    x, h_prev, c_prev, i, f, o, g, tanh_c = cache
    do = dh * tanh_c
    dc_total = dc + dh * o * (1.0 - tanh_c * tanh_c)
    da = np.concatenate(
        [
            dc_total * g * i * (1.0 - i),
            dc_total * c_prev * f * (1.0 - f),
            do * o * (1.0 - o),
            dc_total * i * (1.0 - g * g),
        ],
        axis=1,
    )
    p.W.grad += da.T @ x
    p.U.grad += da.T @ h_prev
    p.b.grad += da.sum(axis=0)
    dx = da @ p.W.value
    dh_prev = da @ p.U.value
    dc_prev = dc_total * f
    return dx, dh_prev, dc_prev


def attention_forward(query: np.ndarray, memory: np.ndarray, mask: np.ndarray | None = None):
    """Dot-product attention over encoder states.

    query: (batch, hidden); memory: (positions, batch, hidden);
    mask: optional (positions, batch) booleans, False positions are
    excluded from the softmax.  Returns (context, weights, cache); the
    weights over unmasked positions sum to 1.
    """
    if memory.shape[0] == 0:
        raise ValueError("attention over empty memory")
    scores = np.einsum("sbh,bh->sb", memory, query)
    if mask is not None:
        if not mask.any(axis=0).all():
            raise ValueError("attention memory fully masked for some batch column")
        scores = np.where(mask, scores, -np.inf)
    z = scores - scores.max(axis=0, keepdims=True)
    e = np.exp(z)
    weights = e / e.sum(axis=0, keepdims=True)
    context = np.einsum("sb,sbh->bh", weights, memory)
    return context, weights, (query, memory, weights)


def attention_backward(dcontext: np.ndarray, cache):
    """Backward through dot-product attention; returns (dquery, dmemory)."""
    query, memory, weights = cache
    dweights = np.einsum("bh,sbh->sb", dcontext, memory)
    dmemory = weights[:, :, None] * dcontext[None, :, :]
    # Softmax backward; masked positions have weight 0 and stay at 0.
    dscores = weights * (dweights - (weights * dweights).sum(axis=0, keepdims=True))
    dquery = np.einsum("sb,sbh->bh", dscores, memory)
    dmemory += dscores[:, :, None] * query[None, :, :]
    return dquery, dmemory


def clip_global_norm(tensors, max_norm: float) -> tuple[float, float]:
    """Scale every gradient by max_norm/||g|| when the joint norm exceeds it.

    Returns (scale applied, global norm before scaling).  Zero gradients
    pass through untouched.
    """
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    tensors = list(tensors)
    total = 0.0
    for t in tensors:
        total += float(np.sum(t.grad * t.grad))
    global_norm = math.sqrt(total)
    scale = 1.0
    if global_norm > max_norm:
        scale = max_norm / global_norm
        for t in tensors:
            t.grad *= scale
    return scale, global_norm


def sgd_step(tensors, lr: float) -> None:
    """Plain SGD: value <- value - lr * grad, then zero the grads."""
    for t in tensors:
        t.value -= lr * t.grad
        t.grad[...] = 0.0


def init_uniform(shape, scale: float = 0.08, rng=None) -> np.ndarray:
    """Entries independently uniform in [-scale, +scale]."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if rng is None:
        raise ValueError("an explicit generator is required for reproducibility")
    return rng.uniform(-scale, scale, size=shape).astype(np.float64)


def gradient_check(
    loss_fn,
    tensors,
    epsilon: float = 1e-5,
    tolerance: float | None = None,
    entries_per_tensor: int | None = 16,
    rng=None,
) -> float:
    """Compare analytic gradients against central finite differences.

    ``tensors`` must carry analytic gradients in ``.grad`` (populated by
    the caller's backward pass); ``loss_fn()`` re-evaluates the loss at
    the current parameter values.  For a sampled subset of entries per
    tensor (all of them when ``entries_per_tensor`` is None or the tensor
    is small), the relative error

        |analytic - numeric| / max(|analytic|, |numeric|, 1e-12)

    is computed and the maximum over all probed entries returned.  When
    ``tolerance`` is given, exceeding it raises instead of returning.
    """
    base = float(loss_fn())
    if not math.isfinite(base):
        raise ValueError("loss is not finite at the evaluation point")
    if rng is None:
        rng = np.random.default_rng(0)
    max_rel = 0.0
    for t in tensors:
        flat = t.value.reshape(-1)
        gflat = t.grad.reshape(-1)
        n = flat.size
        if entries_per_tensor is None or n <= entries_per_tensor:
            indices = range(n)
        else:
            indices = sorted(rng.choice(n, size=entries_per_tensor, replace=False))
        for k in indices:
            orig = flat[k]
            flat[k] = orig + epsilon
            loss_plus = float(loss_fn())
            flat[k] = orig - epsilon
            loss_minus = float(loss_fn())
            flat[k] = orig
            if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
                raise ValueError("loss is not finite near the evaluation point")
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            analytic = float(gflat[k])
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
            if rel > max_rel:
                max_rel = rel
            if tolerance is not None and rel > tolerance:
                raise ValueError(
                    f"gradient mismatch in {t.name}[{k}]: analytic {analytic:.6e}, "
                    f"numeric {numeric:.6e}, relative error {rel:.3e} > {tolerance:g}"
                )
    return max_rel


def assert_all_finite(tensors) -> None:
    """Debug validation: raise if any parameter or gradient is NaN/Inf."""
    for t in tensors:
        if not np.isfinite(t.value).all():
            raise FloatingPointError(f"non-finite values in parameter {t.name}")
        if not np.isfinite(t.grad).all():
            raise FloatingPointError(f"non-finite gradient in parameter {t.name}")

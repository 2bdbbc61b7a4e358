"""Attention LSTM encoder-decoder: model, training loop, greedy decoding.

One shared embedding feeds both sides.  The encoder consumes the
reversed, padded source and hands its final state to the decoder.  The
decoder is input-fed: at step t the cell input is the concatenation of
the current token embedding and the previous attentional hidden state
h~(t-1) (zero at t=0).  After each cell step, dot-product attention over
the encoder states (PAD positions masked) yields a context vector c_t,
combined as h~(t) = tanh(Wc [c_t; h_t]), which the output projection
maps to vocabulary logits.

All bucket shapes share one parameter set.  Training state is fully
determined by (seed, data, config): step number s uses a generator
seeded by (seed, s), so a run resumed from a checkpoint is bit-identical
to an uninterrupted one.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .corpus import clean_text
from .nnkernel import (
    LstmParams,
    LstmState,
    ParamTensor,
    attention_backward,
    attention_forward,
    clip_global_norm,
    cross_entropy,
    init_uniform,
    lstm_cell_backward,
    lstm_cell_forward,
    sgd_step,
)
from .textproc import (
    EOS_ID,
    GO_ID,
    PAD_ID,
    Batch,
    BucketSpec,
    DEFAULT_BUCKETS,
    Vocabulary,
    assign_bucket,
    bucketize,
    make_batch,
    assemble_batch,
    tokenize,
)

CHECKPOINT_MAGIC = b"BANS"
CHECKPOINT_FORMAT_VERSION = 1


class CheckpointError(Exception):
    """Raised for unreadable, corrupt or incompatible checkpoint files."""


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int = 40000
    embed_dim: int = 512
    hidden_dim: int = 512
    num_layers: int = 1
    buckets: BucketSpec = DEFAULT_BUCKETS
    batch_size: int = 64
    learning_rate: float = 0.5
    lr_decay_factor: float = 0.99
    max_grad_norm: float = 5.0
    steps_per_checkpoint: int = 350
    max_steps: int = 700
    seed: int = 0

    def __post_init__(self) -> None:
        if self.vocab_size < 5:
            raise ValueError(f"vocab_size must be at least 5, got {self.vocab_size}")
        if self.embed_dim < 1:
            raise ValueError(f"embed_dim must be at least 1, got {self.embed_dim}")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be at least 1, got {self.hidden_dim}")
        if self.num_layers != 1:
            raise ValueError(f"num_layers is fixed at 1, got {self.num_layers}")
        if not isinstance(self.buckets, BucketSpec):
            raise ValueError("buckets must be a BucketSpec")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 < self.lr_decay_factor <= 1:
            raise ValueError(f"lr_decay_factor must lie in (0, 1], got {self.lr_decay_factor}")
        if self.max_grad_norm <= 0:
            raise ValueError(f"max_grad_norm must be positive, got {self.max_grad_norm}")
        if self.steps_per_checkpoint < 1:
            raise ValueError(f"steps_per_checkpoint must be at least 1, got {self.steps_per_checkpoint}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be at least 1, got {self.max_steps}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    def to_json_dict(self) -> dict:
        d = {
            "vocab_size": self.vocab_size,
            "embed_dim": self.embed_dim,
            "hidden_dim": self.hidden_dim,
            "num_layers": self.num_layers,
            "buckets": [list(b) for b in self.buckets.buckets],
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "lr_decay_factor": self.lr_decay_factor,
            "max_grad_norm": self.max_grad_norm,
            "steps_per_checkpoint": self.steps_per_checkpoint,
            "max_steps": self.max_steps,
            "seed": self.seed,
        }
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["buckets"] = BucketSpec(tuple(tuple(b) for b in d["buckets"]))
        return cls(**d)


@dataclass
class ModelParams:
    """All trainable weights; ``tensors()`` fixes the canonical order."""

    embedding: ParamTensor  # (vocab, embed)
    encoder: LstmParams  # input: embed
    decoder: LstmParams  # input: embed + hidden (input feeding)
    attn_combine_w: ParamTensor  # (hidden, 2*hidden)
    attn_combine_b: ParamTensor  # (hidden,)
    out_w: ParamTensor  # (vocab, hidden)
    out_b: ParamTensor  # (vocab,)

    def tensors(self) -> list[ParamTensor]:
        return [
            self.embedding,
            self.encoder.W,
            self.encoder.U,
            self.encoder.b,
            self.decoder.W,
            self.decoder.U,
            self.decoder.b,
            self.attn_combine_w,
            self.attn_combine_b,
            self.out_w,
            self.out_b,
        ]

    def n_params(self) -> int:
        return sum(t.size for t in self.tensors())

    def zero_grads(self) -> None:
        for t in self.tensors():
            t.grad[...] = 0.0

    def copy(self) -> "ModelParams":
        arrays = {t.name: t.value.copy() for t in self.tensors()}
        return _params_from_arrays(arrays, _shape_table_from(self))


@dataclass(frozen=True)
class TrainLogEntry:
    step: int
    learning_rate: float  # rate in effect for the steps since the last entry
    train_loss: float
    perplexity: float
    val_losses: tuple[float, ...]  # per bucket; NaN for buckets with no validation pairs


@dataclass
class Checkpoint:
    format_version: int
    step: int
    config: ModelConfig
    params: ModelParams
    learning_rate: float  # rate to continue training with
    val_losses: list[float]  # one weighted validation loss per checkpoint so far


def _shape_table(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    v, e, h = config.vocab_size, config.embed_dim, config.hidden_dim
    dec_in = e + h
    return {
        "embedding": (v, e),
        "encoder_W": (4 * h, e),
        "encoder_U": (4 * h, h),
        "encoder_b": (4 * h,),
        "decoder_W": (4 * h, dec_in),
        "decoder_U": (4 * h, h),
        "decoder_b": (4 * h,),
        "attn_combine_W": (h, 2 * h),
        "attn_combine_b": (h,),
        "out_W": (v, h),
        "out_b": (v,),
    }


def _shape_table_from(params: ModelParams) -> dict[str, tuple[int, ...]]:
    return {t.name: t.value.shape for t in params.tensors()}


def _params_from_arrays(arrays: dict[str, np.ndarray], shapes: dict[str, tuple[int, ...]]) -> ModelParams:
    for name, shape in shapes.items():
        if name not in arrays:
            raise CheckpointError(f"checkpoint is missing tensor '{name}'")
        if tuple(arrays[name].shape) != tuple(shape):
            raise CheckpointError(
                f"checkpoint tensor '{name}' has shape {arrays[name].shape}, expected {tuple(shape)}"
            )
    extra = set(arrays) - set(shapes)
    if extra:
        raise CheckpointError(f"checkpoint contains unknown tensors {sorted(extra)}")
    t = {name: ParamTensor.of(name, arrays[name]) for name in shapes}
    hidden = shapes["encoder_U"][1]
    embed = shapes["embedding"][1]
    encoder = LstmParams(t["encoder_W"], t["encoder_U"], t["encoder_b"], embed, hidden)
    decoder = LstmParams(t["decoder_W"], t["decoder_U"], t["decoder_b"], embed + hidden, hidden)
    return ModelParams(
        t["embedding"], encoder, decoder,
        t["attn_combine_W"], t["attn_combine_b"], t["out_W"], t["out_b"],
    )


def build_model(config: ModelConfig, seed: int | None = None) -> ModelParams:
    """Initialize all weights from one seeded generator.

    Draw order: embedding, encoder W, encoder U, decoder W, decoder U,
    attention-combine W, output W — each uniform in [-0.08, 0.08].
    Biases start at zero except the LSTM forget-gate block, which is 1.
    """
    if seed is None:
        seed = config.seed
    rng = np.random.default_rng(seed)
    shapes = _shape_table(config)
    h = config.hidden_dim
    arrays: dict[str, np.ndarray] = {}
    for name in ("embedding", "encoder_W", "encoder_U", "decoder_W", "decoder_U", "attn_combine_W", "out_W"):
        arrays[name] = init_uniform(shapes[name], scale=0.08, rng=rng)
    for name in ("encoder_b", "decoder_b", "attn_combine_b", "out_b"):
        arrays[name] = np.zeros(shapes[name])
    for name in ("encoder_b", "decoder_b"):
        arrays[name][h : 2 * h] = 1.0
    return _params_from_arrays(arrays, shapes)


@dataclass
class ForwardCache:
    """Everything the backward pass needs from one forward run."""

    batch: Batch
    mask: np.ndarray  # (S, B) True at real source positions
    memory: np.ndarray  # (S, B, H)
    enc_caches: list
    dec_caches: list
    att_caches: list
    combine_ins: list  # (B, 2H) per step
    htildes: list  # (B, H) per step
    dlogits: np.ndarray  # (T, B, V)


def _run_encoder(encoder_ids: np.ndarray, params: ModelParams, config: ModelConfig):
    """Consume the reversed source; returns final state, memory and caches."""
    s_len, batch = encoder_ids.shape
    mask = encoder_ids != PAD_ID
    state = LstmState.zeros(batch, config.hidden_dim)
    memory = np.zeros((s_len, batch, config.hidden_dim))
    caches = []
    emb = params.embedding.value
    for t in range(s_len):
        state, cache = lstm_cell_forward(emb[encoder_ids[t]], state, params.encoder)
        caches.append(cache)
        memory[t] = state.h
    return state, memory, mask, caches


def _combine(context: np.ndarray, h: np.ndarray, params: ModelParams):
    """Attentional hidden state h~ = tanh(Wc [context; h] + bc)."""
    comb_in = np.concatenate([context, h], axis=1)
    htilde = np.tanh(comb_in @ params.attn_combine_w.value.T + params.attn_combine_b.value)
    return comb_in, htilde


def forward_batch(batch: Batch, params: ModelParams, config: ModelConfig):
    """Teacher-forced forward pass.

    Returns (loss, logits of shape (target_len, batch, vocab), cache).
    The loss is the weighted mean cross-entropy over all steps, targets
    being the decoder ids shifted left by one (the final position
    targets _PAD and always has weight 0).
    """
    t_len, batch_n = batch.decoder_ids.shape
    vocab = config.vocab_size
    if batch.encoder_ids.max(initial=0) >= vocab or batch.decoder_ids.max(initial=0) >= vocab:
        raise ValueError("batch contains token ids outside the model vocabulary")

    state, memory, mask, enc_caches = _run_encoder(batch.encoder_ids, params, config)

    emb = params.embedding.value
    htilde_prev = np.zeros((batch_n, config.hidden_dim))
    dec_caches, att_caches, combine_ins, htildes = [], [], [], []
    logits = np.zeros((t_len, batch_n, vocab))
    for t in range(t_len):
        x = np.concatenate([emb[batch.decoder_ids[t]], htilde_prev], axis=1)
        state, cache = lstm_cell_forward(x, state, params.decoder)
        dec_caches.append(cache)
        context, _, att_cache = attention_forward(state.h, memory, mask)
        att_caches.append(att_cache)
        comb_in, htilde = _combine(context, state.h, params)
        combine_ins.append(comb_in)
        htildes.append(htilde)
        logits[t] = htilde @ params.out_w.value.T + params.out_b.value
        htilde_prev = htilde

    targets = np.full((t_len, batch_n), PAD_ID, dtype=np.int64)
    targets[: t_len - 1] = batch.decoder_ids[1:]
    loss, dlogits = cross_entropy(
        logits.reshape(t_len * batch_n, vocab),
        targets.reshape(-1),
        batch.target_weights.reshape(-1),
    )
    cache = ForwardCache(
        batch, mask, memory, enc_caches, dec_caches, att_caches,
        combine_ins, htildes, dlogits.reshape(t_len, batch_n, vocab),
    )
    return loss, logits, cache


def backward_batch(params: ModelParams, cache: ForwardCache, config: ModelConfig) -> None:
    """Backpropagation through time over decoder and encoder, accumulating grads."""
    batch = cache.batch
    t_len, batch_n = batch.decoder_ids.shape
    s_len = batch.encoder_ids.shape[0]
    hd = config.hidden_dim
    ed = config.embed_dim

    dmemory = np.zeros_like(cache.memory)
    dh_rec = np.zeros((batch_n, hd))
    dc_rec = np.zeros((batch_n, hd))
    dhtilde_carry = np.zeros((batch_n, hd))
    for t in reversed(range(t_len)):
        dl = cache.dlogits[t]
        params.out_w.grad += dl.T @ cache.htildes[t]
        params.out_b.grad += dl.sum(axis=0)
        dhtilde = dl @ params.out_w.value + dhtilde_carry
        da = dhtilde * (1.0 - cache.htildes[t] * cache.htildes[t])
        params.attn_combine_w.grad += da.T @ cache.combine_ins[t]
        params.attn_combine_b.grad += da.sum(axis=0)
        dcomb = da @ params.attn_combine_w.value
        dcontext, dh = dcomb[:, :hd], dcomb[:, hd:].copy()
        dquery, dmem = attention_backward(dcontext, cache.att_caches[t])
        dmemory += dmem
        dh += dquery + dh_rec
        dx, dh_rec, dc_rec = lstm_cell_backward(dh, dc_rec, cache.dec_caches[t], params.decoder)
        np.add.at(params.embedding.grad, batch.decoder_ids[t], dx[:, :ed])
        dhtilde_carry = dx[:, ed:]

    # The decoder's initial state is the encoder's final state.
    dh_enc, dc_enc = dh_rec, dc_rec
    for t in reversed(range(s_len)):
        dh_enc = dh_enc + dmemory[t]
        dx, dh_enc, dc_enc = lstm_cell_backward(dh_enc, dc_enc, cache.enc_caches[t], params.encoder)
        np.add.at(params.embedding.grad, batch.encoder_ids[t], dx)


def train_step(batch: Batch, params: ModelParams, config: ModelConfig, lr: float) -> float:
    """Forward, BPTT, clip, SGD update; returns the pre-update loss."""
    loss, _, cache = forward_batch(batch, params, config)
    if not math.isfinite(loss):
        raise FloatingPointError(f"training loss is not finite ({loss}); halting before corrupting params")
    backward_batch(params, cache, config)
    clip_global_norm(params.tensors(), config.max_grad_norm)
    sgd_step(params.tensors(), lr)
    return loss


def _bucket_val_losses(val_pools, params: ModelParams, config: ModelConfig) -> list[float]:
    """Mean per-token validation loss per bucket (NaN for empty buckets)."""
    out = []
    for bi, pool in enumerate(val_pools):
        if not pool:
            out.append(math.nan)
            continue
        nll_sum, w_sum = 0.0, 0.0
        for start in range(0, len(pool), config.batch_size):
            chunk = pool[start : start + config.batch_size]
            b = make_batch(chunk, bi, config.buckets)
            loss, _, _ = forward_batch(b, params, config)
            w = float(b.target_weights.sum())
            nll_sum += loss * w
            w_sum += w
        out.append(nll_sum / w_sum)
    return out


def _weighted_val_loss(per_bucket: list[float], val_pools) -> float:
    num = sum(len(p) * l for p, l in zip(val_pools, per_bucket) if p)
    den = sum(len(p) for p in val_pools)
    return num / den


def _replay_lr(history, base_lr: float, factor: float) -> float:
    """Decay once for every run of 3 checkpoints without a new best loss."""
    lr = base_lr
    best = math.inf
    streak = 0
    for v in history:
        if v < best:
            best = v
            streak = 0
        else:
            streak += 1
            if streak >= 3:
                lr *= factor
                streak = 0
    return lr


def _pick_bucket(pools, cum: np.ndarray, r: float) -> int:
    i = min(int(np.searchsorted(cum, r, side="right")), len(pools) - 1)
    while not pools[i]:
        i -= 1
    return i


def train_loop(
    train_set,
    val_set,
    config: ModelConfig,
    checkpoint_dir=None,
    resume: Checkpoint | None = None,
    progress=None,
):
    """Run training to ``config.max_steps``.

    Each step samples a bucket with probability proportional to its
    training-pair count, assembles a batch and applies one SGD update.
    Every ``steps_per_checkpoint`` steps the per-bucket validation loss
    is computed, a log entry appended and a checkpoint written (when
    ``checkpoint_dir`` is given).  The learning rate decays by
    ``lr_decay_factor`` after every 3 consecutive checkpoints without a
    new best validation loss.

    Returns (checkpoints, log entries).  ``resume`` continues from a
    checkpoint bit-exactly, as if the run had never stopped.
    """
    train_pools = bucketize(train_set, config.buckets)
    val_pools = bucketize(val_set, config.buckets)
    counts = np.array([len(p) for p in train_pools], dtype=np.float64)
    if counts.sum() == 0:
        raise ValueError("training set is empty")
    if sum(len(p) for p in val_pools) == 0:
        raise ValueError("validation set is empty")
    cum = np.cumsum(counts / counts.sum())

    if resume is not None:
        # max_steps is a run-length knob; every other field must match for
        # the resumed trajectory to be the same training run.
        if dataclasses.replace(resume.config, max_steps=config.max_steps) != config:
            raise ValueError("resume checkpoint config differs from the requested config")
        params = resume.params.copy()
        start_step = resume.step
        lr = resume.learning_rate
        history = list(resume.val_losses)
    else:
        params = build_model(config)
        start_step = 0
        lr = config.learning_rate
        history = []

    checkpoints: list[Checkpoint] = []
    log: list[TrainLogEntry] = []
    loss_sum, n_since = 0.0, 0
    for step in range(start_step + 1, config.max_steps + 1):
        rng = np.random.default_rng([config.seed, step])
        bucket = _pick_bucket(train_pools, cum, rng.random())
        batch = assemble_batch(train_pools[bucket], bucket, config.buckets, config.batch_size, rng)
        loss_sum += train_step(batch, params, config, lr)
        n_since += 1
        if step % config.steps_per_checkpoint == 0:
            per_bucket = _bucket_val_losses(val_pools, params, config)
            history.append(_weighted_val_loss(per_bucket, val_pools))
            mean_loss = loss_sum / n_since
            try:
                perplexity = math.exp(mean_loss)
            except OverflowError:
                perplexity = math.inf
            entry = TrainLogEntry(step, lr, mean_loss, perplexity, tuple(per_bucket))
            log.append(entry)
            loss_sum, n_since = 0.0, 0
            lr = _replay_lr(history, config.learning_rate, config.lr_decay_factor)
            ckpt = Checkpoint(
                CHECKPOINT_FORMAT_VERSION, step, config, params.copy(), lr, list(history)
            )
            checkpoints.append(ckpt)
            if checkpoint_dir is not None:
                checkpoint_save(os.path.join(checkpoint_dir, f"checkpoint-{step:06d}.bin"), ckpt)
            if progress is not None:
                progress(entry)
    return checkpoints, log


def greedy_decode(src_ids, params: ModelParams, config: ModelConfig) -> list[int]:
    """Argmax decoding of one source; returns ids without _GO/_EOS.

    The source is truncated/padded/reversed for its assigned bucket; the
    decoder starts from _GO, runs at most ``target_len - 1`` steps,
    stops on _EOS, and the output is capped at ``target_len - 2`` tokens
    so it always fits the bucket's GO/EOS framing.  Ties in the argmax
    resolve to the lowest token id.
    """
    bucket_index, _ = assign_bucket(len(src_ids), 0, config.buckets)
    s_len, t_len = config.buckets.buckets[bucket_index]
    src = list(src_ids)[:s_len]
    column = (src + [PAD_ID] * (s_len - len(src)))[::-1]
    encoder_ids = np.array(column, dtype=np.int64)[:, None]

    state, memory, mask, _ = _run_encoder(encoder_ids, params, config)
    emb = params.embedding.value
    htilde_prev = np.zeros((1, config.hidden_dim))
    token = GO_ID
    out: list[int] = []
    for _ in range(t_len - 1):
        x = np.concatenate([emb[[token]], htilde_prev], axis=1)
        state, _ = lstm_cell_forward(x, state, params.decoder)
        context, _, _ = attention_forward(state.h, memory, mask)
        _, htilde = _combine(context, state.h, params)
        logits = htilde @ params.out_w.value.T + params.out_b.value
        token = int(np.argmax(logits[0]))
        if token == EOS_ID:
            break
        out.append(token)
        htilde_prev = htilde
    return out[: t_len - 2]


def summarize_text(raw: str, vocab: Vocabulary, params: ModelParams, config: ModelConfig) -> str:
    """End-to-end inference: clean, tokenize, encode, decode, join."""
    tokens = tokenize(clean_text(raw))
    if not tokens:
        raise ValueError("empty input")
    ids = vocab.encode(tokens)
    out_ids = greedy_decode(ids, params, config)
    return " ".join(vocab.decode(out_ids))


def _config_to_json_bytes(config: ModelConfig) -> bytes:
    return json.dumps(config.to_json_dict(), sort_keys=True).encode("utf-8")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated checkpoint file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]


def checkpoint_save(path, ckpt: Checkpoint) -> None:
    """Write the documented binary layout atomically (temp file + rename).

    Layout, all little-endian: magic "BANS"; u32 format version; u32
    JSON-config length + bytes; u32 tensor count; per tensor u32 name
    length + UTF-8 name, u32 rank, u64 dims, float64 row-major payload;
    u64 step; float64 learning rate; u32 count + float64 validation-loss
    history; final 8 bytes = leading 8 bytes of the SHA-256 of everything
    before them.
    """
    buf = bytearray()
    buf += CHECKPOINT_MAGIC
    buf += struct.pack("<I", ckpt.format_version)
    cfg = _config_to_json_bytes(ckpt.config)
    buf += struct.pack("<I", len(cfg))
    buf += cfg
    tensors = ckpt.params.tensors()
    buf += struct.pack("<I", len(tensors))
    for t in tensors:
        name = t.name.encode("utf-8")
        buf += struct.pack("<I", len(name))
        buf += name
        buf += struct.pack("<I", t.value.ndim)
        for d in t.value.shape:
            buf += struct.pack("<Q", d)
        buf += np.ascontiguousarray(t.value, dtype="<f8").tobytes()
    buf += struct.pack("<Q", ckpt.step)
    buf += struct.pack("<d", ckpt.learning_rate)
    buf += struct.pack("<I", len(ckpt.val_losses))
    for v in ckpt.val_losses:
        buf += struct.pack("<d", v)
    buf += hashlib.sha256(bytes(buf)).digest()[:8]
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(bytes(buf))
    os.replace(tmp, path)


def checkpoint_load(path) -> Checkpoint:
    """Read a checkpoint, with distinct errors for bad magic, version,
    truncation and checksum failure."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(CHECKPOINT_MAGIC) + 4 + 8:
        raise CheckpointError("truncated checkpoint file")
    if data[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    body, stored = data[:-8], data[-8:]
    r = _Reader(body)
    r.take(len(CHECKPOINT_MAGIC))
    version = r.u32()
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format version {version} (expected {CHECKPOINT_FORMAT_VERSION})"
        )
    cfg_blob = r.take(r.u32())
    try:
        config = ModelConfig.from_json_dict(json.loads(cfg_blob.decode("utf-8")))
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"corrupt checkpoint config block: {exc}") from exc
    arrays: dict[str, np.ndarray] = {}
    n_tensors = r.u32()
    for _ in range(n_tensors):
        name = r.take(r.u32()).decode("utf-8")
        rank = r.u32()
        dims = tuple(r.u64() for _ in range(rank))
        count = int(np.prod(dims, dtype=np.int64)) if dims else 1
        raw = r.take(count * 8)
        arrays[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(dims)
    step = r.u64()
    lr = r.f64()
    val_losses = [r.f64() for _ in range(r.u32())]
    if r.pos != len(body):
        raise CheckpointError("trailing bytes in checkpoint file")
    if hashlib.sha256(body).digest()[:8] != stored:
        raise CheckpointError("checkpoint checksum mismatch")
    params = _params_from_arrays(arrays, _shape_table(config))
    return Checkpoint(version, step, config, params, lr, val_losses)

"""Command-line pipeline: prepare | stats | split | build-vocab | train |
summarize | evaluate.

Configuration is a flat ``key = value`` UTF-8 file with ``#`` comments;
any key can also be given as a ``--key`` flag, which overrides the file.
Unknown keys are rejected.  Exit status is 0 on success, 1 with a
one-line diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from .corpus import (
    SplitSpec,
    dataset_stats,
    filter_pairs,
    load_dataset,
    load_raw_dump,
    save_dataset,
    split_dataset,
)
from .metrics import evaluate_corpus, save_report
from .seq2seq import (
    CheckpointError,
    ModelConfig,
    checkpoint_load,
    greedy_decode,
    summarize_text,
    train_loop,
)
from .textproc import (
    BucketSpec,
    DEFAULT_BUCKETS,
    build_vocab,
    encode_pairs,
    load_vocab,
    save_vocab,
    tokenize,
)

_PATH_KEYS = (
    "raw_path",
    "dataset_path",
    "train_path",
    "val_path",
    "test_path",
    "vocab_path",
    "checkpoint_dir",
    "report_path",
)


@dataclass
class CliConfig:
    raw_path: str | None = None
    dataset_path: str | None = None
    train_path: str | None = None
    val_path: str | None = None
    test_path: str | None = None
    vocab_path: str | None = None
    checkpoint_dir: str | None = None
    report_path: str | None = None
    train_ratio: float = 0.7
    val_ratio: float = 0.2
    test_ratio: float = 0.1
    split_seed: int = 0
    vocab_size: int = 40000
    embed_dim: int = 512
    hidden_dim: int = 512
    batch_size: int = 64
    learning_rate: float = 0.5
    lr_decay_factor: float = 0.99
    max_grad_norm: float = 5.0
    steps_per_checkpoint: int = 350
    max_steps: int = 700
    seed: int = 0
    eval_samples: int = 100
    buckets: BucketSpec = DEFAULT_BUCKETS

    def model_config(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(
            vocab_size=vocab_size,
            embed_dim=self.embed_dim,
            hidden_dim=self.hidden_dim,
            buckets=self.buckets,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            lr_decay_factor=self.lr_decay_factor,
            max_grad_norm=self.max_grad_norm,
            steps_per_checkpoint=self.steps_per_checkpoint,
            max_steps=self.max_steps,
            seed=self.seed,
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_ratio, self.val_ratio, self.test_ratio, self.split_seed)


def _parse_buckets(text: str) -> BucketSpec:
    pairs = []
    for part in text.split(","):
        try:
            s, t = part.split(":")
            pairs.append((int(s), int(t)))
        except ValueError as exc:
            raise ValueError(f"invalid bucket entry {part!r} (expected src:tgt)") from exc
    return BucketSpec(tuple(pairs))


def _coerce(key: str, text: str, target_type):
    if target_type is BucketSpec:
        return _parse_buckets(text)
    if target_type is int:
        try:
            return int(text)
        except ValueError as exc:
            raise ValueError(f"invalid integer for config key '{key}': {text!r}") from exc
    if target_type is float:
        try:
            return float(text)
        except ValueError as exc:
            raise ValueError(f"invalid number for config key '{key}': {text!r}") from exc
    return text


def _key_types() -> dict[str, type]:
    types: dict[str, type] = {}
    for f in fields(CliConfig):
        if f.name in _PATH_KEYS:
            types[f.name] = str
        elif f.name == "buckets":
            types[f.name] = BucketSpec
        else:
            types[f.name] = type(getattr(CliConfig(), f.name))
    return types


def parse_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines, skipping blanks and ``#`` comments."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip()
    return values


def resolve_config(config_path: str | None, overrides: dict[str, str]) -> CliConfig:
    """Merge defaults < config file < command-line flags."""
    types = _key_types()
    merged: dict[str, object] = {}
    file_vals = parse_config_file(config_path) if config_path else {}
    for source in (file_vals, overrides):
        for key, text in source.items():
            if key not in types:
                raise ValueError(f"unknown config key '{key}'")
            merged[key] = _coerce(key, text, types[key])
    return CliConfig(**merged)


def _require(cfg: CliConfig, key: str, must_exist: bool = False) -> str:
    value = getattr(cfg, key)
    if value is None:
        raise ValueError(f"config key '{key}' is required for this command")
    if must_exist and not os.path.exists(value):
        raise ValueError(f"{key} does not exist: {value}")
    return value


def _cmd_prepare(args, cfg: CliConfig) -> int:
    raw_path = _require(cfg, "raw_path", must_exist=True)
    dataset_path = _require(cfg, "dataset_path")
    records = load_raw_dump(raw_path)
    pairs = filter_pairs(records)
    save_dataset(pairs, dataset_path)
    print(f"kept {len(pairs)} of {len(records)} records -> {dataset_path}")
    return 0


def _cmd_stats(args, cfg: CliConfig) -> int:
    dataset_path = _require(cfg, "dataset_path", must_exist=True)
    s = dataset_stats(load_dataset(dataset_path))
    rows = [
        ("total pairs", s.total_pairs),
        ("article words max", s.max_article_words),
        ("article words min", s.min_article_words),
        ("summary words max", s.max_summary_words),
        ("summary words min", s.min_summary_words),
    ]
    width = max(len(label) for label, _ in rows)
    for label, value in rows:
        print(f"{label:<{width}}  {value:>8}")
    return 0


def _cmd_split(args, cfg: CliConfig) -> int:
    dataset_path = _require(cfg, "dataset_path", must_exist=True)
    out_paths = [_require(cfg, k) for k in ("train_path", "val_path", "test_path")]
    parts = split_dataset(load_dataset(dataset_path), cfg.split_spec())
    for part, path in zip(parts, out_paths):
        save_dataset(part, path)
    print("split sizes: " + " / ".join(str(len(p)) for p in parts))
    return 0


def _cmd_build_vocab(args, cfg: CliConfig) -> int:
    train_path = _require(cfg, "train_path", must_exist=True)
    vocab_path = _require(cfg, "vocab_path")
    pairs = load_dataset(train_path)

    def stream():
        for p in pairs:
            yield from tokenize(p.article)
            yield from tokenize(p.summary)

    vocab = build_vocab(stream(), cfg.vocab_size)
    save_vocab(vocab, vocab_path)
    print(f"vocabulary of {len(vocab)} tokens -> {vocab_path}")
    return 0


def _format_val(values) -> str:
    return " ".join("-" if math.isnan(v) else f"{v:.4f}" for v in values)


def _cmd_train(args, cfg: CliConfig) -> int:
    train_path = _require(cfg, "train_path", must_exist=True)
    val_path = _require(cfg, "val_path", must_exist=True)
    vocab_path = _require(cfg, "vocab_path", must_exist=True)
    checkpoint_dir = _require(cfg, "checkpoint_dir")
    os.makedirs(checkpoint_dir, exist_ok=True)
    vocab = load_vocab(vocab_path)
    train_set = encode_pairs(load_dataset(train_path), vocab)
    val_set = encode_pairs(load_dataset(val_path), vocab)
    mcfg = cfg.model_config(vocab_size=len(vocab))

    def progress(entry):
        print(
            f"step {entry.step:>6}  lr {entry.learning_rate:.6f}  "
            f"loss {entry.train_loss:.4f}  ppl {entry.perplexity:.3f}  "
            f"val {_format_val(entry.val_losses)}"
        )

    _, log = train_loop(train_set, val_set, mcfg, checkpoint_dir=checkpoint_dir, progress=progress)
    log_path = os.path.join(checkpoint_dir, "training_log.txt")
    with open(log_path, "w", encoding="utf-8") as f:
        f.write("# step\tlearning_rate\ttrain_loss\tperplexity\tval_loss_per_bucket\n")
        for e in log:
            vals = "\t".join(repr(v) for v in e.val_losses)
            f.write(f"{e.step}\t{e.learning_rate!r}\t{e.train_loss!r}\t{e.perplexity!r}\t{vals}\n")
    print(f"trained {mcfg.max_steps} steps; {len(log)} checkpoints in {checkpoint_dir}")
    return 0


def _latest_checkpoint(cfg: CliConfig, explicit: str | None) -> str:
    if explicit:
        if not os.path.exists(explicit):
            raise ValueError(f"checkpoint does not exist: {explicit}")
        return explicit
    checkpoint_dir = _require(cfg, "checkpoint_dir", must_exist=True)
    names = sorted(
        n for n in os.listdir(checkpoint_dir) if n.startswith("checkpoint-") and n.endswith(".bin")
    )
    if not names:
        raise ValueError(f"no checkpoint files in {checkpoint_dir}")
    return os.path.join(checkpoint_dir, names[-1])


def _load_model(cfg: CliConfig, explicit_checkpoint: str | None):
    ckpt = checkpoint_load(_latest_checkpoint(cfg, explicit_checkpoint))
    vocab = load_vocab(_require(cfg, "vocab_path", must_exist=True))
    if len(vocab) != ckpt.config.vocab_size:
        raise ValueError(
            f"vocabulary size {len(vocab)} does not match checkpoint vocab_size {ckpt.config.vocab_size}"
        )
    return ckpt, vocab


def _cmd_summarize(args, cfg: CliConfig) -> int:
    ckpt, vocab = _load_model(cfg, args.checkpoint)
    if not os.path.exists(args.input):
        raise ValueError(f"input file does not exist: {args.input}")
    with open(args.input, encoding="utf-8") as f:
        for line in f:
            print(summarize_text(line.rstrip("\n"), vocab, ckpt.params, ckpt.config))
    return 0


def _cmd_evaluate(args, cfg: CliConfig) -> int:
    test_path = _require(cfg, "test_path", must_exist=True)
    report_path = _require(cfg, "report_path")
    ckpt, vocab = _load_model(cfg, args.checkpoint)
    pairs = load_dataset(test_path)
    if args.full:
        chosen = list(range(len(pairs)))
    else:
        n = min(cfg.eval_samples, len(pairs))
        rng = np.random.default_rng(cfg.seed)
        chosen = sorted(int(i) for i in rng.choice(len(pairs), size=n, replace=False))
    candidates, references = [], []
    for i in chosen:
        src_ids = vocab.encode(tokenize(pairs[i].article))
        candidates.append(vocab.decode(greedy_decode(src_ids, ckpt.params, ckpt.config)))
        references.append(tokenize(pairs[i].summary))
    report = evaluate_corpus(candidates, references)
    save_report(report, report_path)
    print(
        f"evaluated {report.n_examples} examples: "
        f"rouge1-f1 {report.rouge1.f1:.4f}  rougeL-f1 {report.rougeL.f1:.4f}  "
        f"bleu {report.bleu:.4f} -> {report_path}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value configuration file")
    for f in fields(CliConfig):
        common.add_argument(
            "--" + f.name.replace("_", "-"),
            dest=f.name,
            metavar="VALUE",
            help=f"override config key {f.name}",
        )

    parser = argparse.ArgumentParser(prog="banglasum", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("prepare", parents=[common], help="raw dump -> cleaned dataset").set_defaults(func=_cmd_prepare)
    sub.add_parser("stats", parents=[common], help="print dataset statistics").set_defaults(func=_cmd_stats)
    sub.add_parser("split", parents=[common], help="dataset -> train/val/test files").set_defaults(func=_cmd_split)
    sub.add_parser("build-vocab", parents=[common], help="train split -> vocabulary file").set_defaults(
        func=_cmd_build_vocab
    )
    sub.add_parser("train", parents=[common], help="train the model, writing checkpoints").set_defaults(
        func=_cmd_train
    )

    p = sub.add_parser("summarize", parents=[common], help="summarize articles, one per input line")
    p.add_argument("input", help="text file with one article per line")
    p.add_argument("--checkpoint", help="checkpoint file (default: latest in checkpoint_dir)")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("evaluate", parents=[common], help="score the test split")
    p.add_argument("--checkpoint", help="checkpoint file (default: latest in checkpoint_dir)")
    p.add_argument("--full", action="store_true", help="use the whole test split, not a sample")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(CliConfig)
        if getattr(args, f.name, None) is not None
    }
    try:
        cfg = resolve_config(args.config, overrides)
        return args.func(args, cfg)
    except (ValueError, OSError, CheckpointError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()

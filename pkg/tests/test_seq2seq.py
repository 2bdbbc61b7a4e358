import math
import os

import numpy as np
import pytest

from banglasum.nnkernel import gradient_check, init_uniform
from banglasum.seq2seq import (
    CheckpointError,
    ModelConfig,
    _replay_lr,
    backward_batch,
    build_model,
    checkpoint_load,
    checkpoint_save,
    forward_batch,
    greedy_decode,
    summarize_text,
    train_loop,
    train_step,
)
from banglasum.textproc import BucketSpec, EOS_ID, build_vocab, make_batch
from conftest import desk_config, random_id_pairs


class TestModelConfig:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("vocab_size", 4),
            ("embed_dim", 0),
            ("hidden_dim", 0),
            ("num_layers", 2),
            ("batch_size", 0),
            ("learning_rate", 0.0),
            ("lr_decay_factor", 1.5),
            ("max_grad_norm", 0.0),
            ("steps_per_checkpoint", 0),
            ("max_steps", 0),
            ("seed", -1),
        ],
    )
    def test_invalid_fields_named(self, field, value):
        with pytest.raises(ValueError, match=field):
            desk_config(**{field: value})

    def test_defaults_follow_training_setup(self):
        cfg = ModelConfig()
        assert cfg.vocab_size == 40000
        assert cfg.hidden_dim == 512
        assert cfg.learning_rate == 0.5
        assert cfg.steps_per_checkpoint == 350
        assert cfg.buckets.buckets[-1] == (50, 20)

    def test_json_round_trip(self):
        cfg = desk_config(max_steps=123)
        assert ModelConfig.from_json_dict(cfg.to_json_dict()) == cfg


class TestBuildModel:
    def test_deterministic(self):
        cfg = desk_config()
        a, b = build_model(cfg), build_model(cfg)
        for ta, tb in zip(a.tensors(), b.tensors()):
            assert np.array_equal(ta.value, tb.value)

    def test_desk_parameter_count(self):
        params = build_model(desk_config())
        expected = (
            50 * 16
            + 4 * (32 * 16 + 32 * 32 + 32)
            + 4 * (32 * (16 + 32) + 32 * 32 + 32)
            + 32 * 64 + 32
            + 50 * 32 + 50
        )
        assert params.n_params() == expected == 21170

    def test_forget_gate_bias_one_other_biases_zero(self):
        p = build_model(desk_config())
        h = 32
        for b in (p.encoder.b.value, p.decoder.b.value):
            assert np.all(b[h : 2 * h] == 1.0)
            assert np.all(b[:h] == 0.0) and np.all(b[2 * h :] == 0.0)
        assert np.all(p.attn_combine_b.value == 0.0)
        assert np.all(p.out_b.value == 0.0)

    def test_weights_within_init_range(self):
        p = build_model(desk_config())
        for t in (p.embedding, p.encoder.W, p.out_w):
            assert np.all(np.abs(t.value) <= 0.08)

    def test_different_seeds_differ(self):
        a = build_model(desk_config(), seed=1)
        b = build_model(desk_config(), seed=2)
        assert not np.array_equal(a.embedding.value, b.embedding.value)


class TestForwardBatch:
    def test_single_token_target_uses_two_weighted_steps(self):
        cfg = desk_config()
        params = build_model(cfg)
        batch = make_batch([([5, 6, 7], [9])], 0, cfg.buckets)
        assert batch.target_weights.sum() == 2.0  # predict the token, then _EOS
        loss, logits, _ = forward_batch(batch, params, cfg)
        # independent recomputation from the returned logits
        expect = 0.0
        for j, target in [(0, 9), (1, EOS_ID)]:
            row = logits[j, 0]
            expect += -(row[target] - math.log(np.exp(row - row.max()).sum()) - row.max())
        assert abs(loss - expect / 2.0) < 1e-12

    def test_loss_finite_and_nonnegative_on_random_input(self, rng):
        cfg = desk_config()
        params = build_model(cfg, seed=4)
        batch = make_batch(random_id_pairs(6, rng), 0, cfg.buckets)
        loss, _, _ = forward_batch(batch, params, cfg)
        assert math.isfinite(loss) and loss >= 0.0

    def test_out_of_vocab_ids_rejected(self):
        cfg = desk_config()
        params = build_model(cfg)
        batch = make_batch([([60], [5])], 0, cfg.buckets)
        with pytest.raises(ValueError, match="vocabulary"):
            forward_batch(batch, params, cfg)

    def test_attention_never_lands_on_padding(self, rng):
        cfg = desk_config()
        params = build_model(cfg, seed=6)
        batch = make_batch([([5, 6], [9]), ([7, 8, 10, 11], [12, 13])], 0, cfg.buckets)
        _, _, cache = forward_batch(batch, params, cfg)
        pad_rows = batch.encoder_ids == 0
        for _, _, weights in cache.att_caches:
            assert np.all(weights[pad_rows] == 0.0)
            assert np.all(np.abs(weights.sum(axis=0) - 1.0) < 1e-12)

    def test_gradients_pass_spot_check(self, rng):
        cfg = desk_config()
        params = build_model(cfg, seed=2)
        for t in params.tensors():
            t.value[...] = init_uniform(t.value.shape, 0.5, rng)
        batch = make_batch(random_id_pairs(2, rng, tgt_len=(3, 3)), 0, cfg.buckets)
        _, _, cache = forward_batch(batch, params, cfg)
        params.zero_grads()
        backward_batch(params, cache, cfg)
        err = gradient_check(
            lambda: forward_batch(batch, params, cfg)[0],
            params.tensors(),
            entries_per_tensor=6,
            rng=np.random.default_rng(0),
        )
        assert err < 1e-4


class TestTrainStep:
    def test_repeated_single_pair_batch_learns(self):
        cfg = desk_config(batch_size=1)
        params = build_model(cfg)
        batch = make_batch([([5, 6, 7, 8], [9, 10])], 0, cfg.buckets)
        first = train_step(batch, params, cfg, lr=0.5)
        loss = first
        for _ in range(49):
            loss = train_step(batch, params, cfg, lr=0.5)
        assert loss < first

    def test_zero_lr_keeps_params(self, rng):
        cfg = desk_config()
        params = build_model(cfg)
        before = [t.value.copy() for t in params.tensors()]
        batch = make_batch(random_id_pairs(3, rng), 0, cfg.buckets)
        l1 = train_step(batch, params, cfg, lr=0.0)
        l2 = train_step(batch, params, cfg, lr=0.0)
        assert l1 == l2
        for t, b in zip(params.tensors(), before):
            assert np.array_equal(t.value, b)

    def test_identical_runs_identical_trajectories(self, rng):
        cfg = desk_config()
        batch = make_batch(random_id_pairs(3, rng), 0, cfg.buckets)
        losses = []
        for _ in range(2):
            params = build_model(cfg)
            losses.append([train_step(batch, params, cfg, lr=0.3) for _ in range(5)])
        assert losses[0] == losses[1]

    def test_non_finite_loss_halts(self):
        cfg = desk_config()
        params = build_model(cfg)
        params.embedding.value[5, 0] = math.nan
        batch = make_batch([([5], [6])], 0, cfg.buckets)
        before = params.out_w.value.copy()
        with pytest.raises(FloatingPointError, match="not finite"):
            train_step(batch, params, cfg, lr=0.5)
        assert np.array_equal(params.out_w.value, before)  # no partial update


class TestLrDecayRule:
    def test_three_non_improving_checkpoints_decay_once(self):
        # first checkpoint sets the best; three non-improving ones follow
        assert _replay_lr([1.0, 1.0, 1.0, 1.0], 0.5, 0.99) == pytest.approx(0.495)

    def test_improvement_resets_the_streak(self):
        assert _replay_lr([1.0, 0.9, 1.1, 1.2], 0.5, 0.99) == 0.5

    def test_two_decays(self):
        history = [1.0] + [1.0] * 6
        assert _replay_lr(history, 0.5, 0.99) == pytest.approx(0.5 * 0.99 * 0.99)

    def test_empty_history_keeps_base(self):
        assert _replay_lr([], 0.5, 0.99) == 0.5


class TestTrainLoop:
    def make_sets(self, rng):
        return random_id_pairs(24, rng), random_id_pairs(8, rng)

    def test_checkpoint_cadence(self, rng, tmp_path):
        train, val = self.make_sets(rng)
        cfg = desk_config(steps_per_checkpoint=10, max_steps=20)
        ckpts, log = train_loop(train, val, cfg, checkpoint_dir=tmp_path)
        assert [c.step for c in ckpts] == [10, 20]
        assert sorted(os.listdir(tmp_path)) == ["checkpoint-000010.bin", "checkpoint-000020.bin"]
        assert [e.step for e in log] == [10, 20]

    def test_log_perplexity_matches_loss(self, rng):
        train, val = self.make_sets(rng)
        cfg = desk_config(steps_per_checkpoint=5, max_steps=10)
        _, log = train_loop(train, val, cfg)
        for e in log:
            assert abs(e.perplexity - math.exp(e.train_loss)) < 1e-12
            assert len(e.val_losses) == len(cfg.buckets)

    def test_empty_sets_rejected(self, rng):
        cfg = desk_config()
        with pytest.raises(ValueError, match="training set"):
            train_loop([], random_id_pairs(2, rng), cfg)
        with pytest.raises(ValueError, match="validation set"):
            train_loop(random_id_pairs(2, rng), [], cfg)

    def test_unwritable_checkpoint_dir_errors(self, rng):
        train, val = self.make_sets(rng)
        cfg = desk_config(steps_per_checkpoint=5, max_steps=5)
        with pytest.raises(OSError):
            train_loop(train, val, cfg, checkpoint_dir="/nonexistent/dir/nowhere")

    def test_resume_matches_uninterrupted(self, rng, tmp_path):
        train, val = self.make_sets(rng)
        cfg_half = desk_config(steps_per_checkpoint=10, max_steps=10, seed=3)
        cfg_full = desk_config(steps_per_checkpoint=10, max_steps=20, seed=3)
        half_dir, full_dir, res_dir = [tmp_path / x for x in "hfr"]
        for d in (half_dir, full_dir, res_dir):
            d.mkdir()
        train_loop(train, val, cfg_half, checkpoint_dir=half_dir)
        train_loop(train, val, cfg_full, checkpoint_dir=full_dir)
        mid = checkpoint_load(half_dir / "checkpoint-000010.bin")
        train_loop(train, val, cfg_full, checkpoint_dir=res_dir, resume=mid)
        full_bytes = (full_dir / "checkpoint-000020.bin").read_bytes()
        res_bytes = (res_dir / "checkpoint-000020.bin").read_bytes()
        assert full_bytes == res_bytes

    def test_resume_with_different_config_rejected(self, rng):
        train, val = self.make_sets(rng)
        cfg = desk_config(steps_per_checkpoint=5, max_steps=5)
        ckpts, _ = train_loop(train, val, cfg)
        other = desk_config(steps_per_checkpoint=5, max_steps=10, seed=99)
        with pytest.raises(ValueError, match="config differs"):
            train_loop(train, val, other, resume=ckpts[-1])


class TestGreedyDecode:
    def test_deterministic(self, rng):
        cfg = desk_config()
        params = build_model(cfg, seed=11)
        src = [5, 6, 7, 8]
        assert greedy_decode(src, params, cfg) == greedy_decode(src, params, cfg)

    def test_length_cap(self):
        cfg = desk_config()
        for seed in range(5):
            params = build_model(cfg, seed=seed)
            out = greedy_decode([5, 6, 7], params, cfg)
            assert len(out) <= cfg.buckets.buckets[0][1] - 2

    def test_overfit_two_pairs_reproduces_targets(self):
        cfg = desk_config(batch_size=2, max_steps=400, steps_per_checkpoint=400)
        pairs = [([5, 6, 7], [10, 11]), ([8, 9], [12, 13, 14])]
        ckpts, _ = train_loop(pairs, pairs, cfg)
        params = ckpts[-1].params
        assert greedy_decode(pairs[0][0], params, cfg) == pairs[0][1]
        assert greedy_decode(pairs[1][0], params, cfg) == pairs[1][1]

    def test_long_source_uses_last_bucket(self):
        cfg = desk_config(buckets=BucketSpec(((4, 5), (8, 7))))
        params = build_model(cfg)
        out = greedy_decode(list(range(4, 24)), params, cfg)
        assert len(out) <= 5  # last bucket target 7 minus GO/EOS


class TestSummarizeText:
    def setup_method(self):
        # model vocabulary must match the vocab file: 4 specials + 4 words
        self.vocab = build_vocab(["আজকের", "সংবাদ", "খবর", "দেশ"], max_size=50)
        self.cfg = desk_config(vocab_size=len(self.vocab))
        self.params = build_model(self.cfg, seed=8)

    def test_empty_after_cleaning_errors(self):
        with pytest.raises(ValueError, match="empty input"):
            summarize_text("Breaking http://x.y", self.vocab, self.params, self.cfg)

    def test_all_oov_input_decodes(self):
        out = summarize_text("অচেনা শব্দমালা এখানে", self.vocab, self.params, self.cfg)
        assert isinstance(out, str)

    def test_output_word_cap_with_default_buckets(self):
        cfg = desk_config(vocab_size=len(self.vocab), buckets=ModelConfig().buckets)
        params = build_model(cfg, seed=1)
        text = " ".join(["সংবাদ"] * 60)  # truncated to the largest bucket
        out = summarize_text(text, self.vocab, params, cfg)
        assert len(out.split()) <= 18


class TestCheckpointIo:
    def roundtrip_setup(self, tmp_path, rng):
        cfg = desk_config(steps_per_checkpoint=5, max_steps=5)
        train, val = random_id_pairs(10, rng), random_id_pairs(4, rng)
        ckpts, _ = train_loop(train, val, cfg)
        path = tmp_path / "ck.bin"
        checkpoint_save(path, ckpts[-1])
        return ckpts[-1], path

    def test_round_trip_bit_exact(self, tmp_path, rng):
        ckpt, path = self.roundtrip_setup(tmp_path, rng)
        loaded = checkpoint_load(path)
        assert loaded.step == ckpt.step
        assert loaded.config == ckpt.config
        assert loaded.learning_rate == ckpt.learning_rate
        assert loaded.val_losses == ckpt.val_losses
        for a, b in zip(loaded.params.tensors(), ckpt.params.tensors()):
            assert a.name == b.name and np.array_equal(a.value, b.value)
        # saving the loaded checkpoint reproduces the file byte for byte
        path2 = tmp_path / "ck2.bin"
        checkpoint_save(path2, loaded)
        assert path.read_bytes() == path2.read_bytes()

    def test_version_bump_rejected(self, tmp_path, rng):
        _, path = self.roundtrip_setup(tmp_path, rng)
        data = bytearray(path.read_bytes())
        data[4] = 99  # format version field
        body = bytes(data[:-8])
        import hashlib

        path.write_bytes(body + hashlib.sha256(body).digest()[:8])
        with pytest.raises(CheckpointError, match="version"):
            checkpoint_load(path)

    def test_truncated_file_rejected(self, tmp_path, rng):
        _, path = self.roundtrip_setup(tmp_path, rng)
        path.write_bytes(path.read_bytes()[:200])
        with pytest.raises(CheckpointError, match="truncated"):
            checkpoint_load(path)

    def test_corrupt_payload_fails_checksum(self, tmp_path, rng):
        _, path = self.roundtrip_setup(tmp_path, rng)
        data = bytearray(path.read_bytes())
        data[len(data) // 2] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="checksum"):
            checkpoint_load(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"JUNKJUNKJUNKJUNKJUNK")
        with pytest.raises(CheckpointError, match="magic"):
            checkpoint_load(path)

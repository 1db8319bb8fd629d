"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
PASS/FAIL lines. The desk-scale model (K=16, L=4, two decoder iterations,
32 channels) is trained once in a session fixture and shared by the
criteria that need a trained codec.
"""

import json
import math
from contextlib import contextmanager

import numpy as np
import pytest
import torch

import listae.codec as codec_module
from listae.channel import SNRRange, awgn_noise, ebsigma_from_snr
from listae.cli import main
from listae.codec import CodecConfig, count_parameters, new_codec
from listae.crc import CRC8_DEFAULT, CRCSpec, attach_crc_many, crc_check_many, crc_compute_many
from listae.evaluation import EvalConfig, FrozenCodec, baseline_uncoded, evaluate
from listae.loss import batch_list_loss, list_loss
from listae.selection import CRC_PASS, harden, is_block_error, select_ca, select_ga
from listae.training import TrainConfig, run_schedule

from oracles import crc_oracle, list_loss_oracle

SPEC8 = CRCSpec.from_string(CRC8_DEFAULT)

SMOKE_SEED = 20260809
SMOKE_CODEC = CodecConfig(block_len=16, list_size=4, iterations=2,
                          variant="ir_ae", channels=32)
SMOKE_TRAIN = TrainConfig(
    codec=SMOKE_CODEC,
    t_enc=10,
    t_dec=50,
    enc_snr_db=1.0,
    dec_snr=SNRRange(-1.5, 2.0),
    schedule=((1e-3, 256),),
    max_epochs=20,
    seed=SMOKE_SEED,
)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


class NormRecorder:
    """Wraps normalize_batch to record moments of every normalized batch."""

    def __init__(self, wrapped):
        self.wrapped = wrapped
        self.records = []

    def __call__(self, symbols):
        out, stats = self.wrapped(symbols)
        x = np.asarray(out.detach() if isinstance(out, torch.Tensor) else out,
                       dtype=np.float64)
        self.records.append((x.mean(), x.std(), float((x**2).sum()), x.size))
        return out, stats


@pytest.fixture(scope="session")
def smoke():
    """Train the desk-scale model once, recording normalization behavior."""
    recorder = NormRecorder(codec_module.normalize_batch)
    codec_module.normalize_batch = recorder
    try:
        result = run_schedule(SMOKE_TRAIN)
    finally:
        codec_module.normalize_batch = recorder.wrapped
    return result, recorder.records


@pytest.fixture(scope="session")
def smoke_ga_report(smoke):
    result, _ = smoke
    frozen = FrozenCodec(result.codec, result.norm_stats)
    cfg = EvalConfig(snr_db=(2.0, 4.0), mode="GA", prefix_sizes=(1, 2, 4),
                     min_block_errors=100, max_trials=4000, batch=500,
                     seed=SMOKE_SEED)
    return evaluate(frozen, cfg)


class TestCrcOracleEquivalence:
    def test_crc_oracle_equivalence(self):
        with criterion("CRC oracle equivalence"):
            rng = np.random.default_rng(101)

            # 10^4 random 92-bit payloads match the long-division oracle exactly.
            payloads = rng.integers(0, 2, size=(10_000, 92)).astype(np.uint8)
            got = crc_compute_many(payloads, SPEC8)
            for row, crc in zip(payloads, got):
                assert crc.tolist() == crc_oracle(row.tolist(), list(SPEC8.coefficients))

            # 100% single-bit-flip detection over full flip sweeps.
            words = attach_crc_many(rng.integers(0, 2, size=(100, 92)).astype(np.uint8), SPEC8)
            for pos in range(100):
                flipped = words.copy()
                flipped[:, pos] ^= 1
                assert not crc_check_many(flipped, SPEC8).any()

            # Random 100-bit words pass at 2^-8 within 3 sigma over 10^6 trials.
            trials = 1_000_000
            randoms = rng.integers(0, 2, size=(trials, 100)).astype(np.uint8)
            rate = crc_check_many(randoms, SPEC8).mean()
            p = 2.0**-8
            assert abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / trials)


class TestLossCorrectness:
    def test_loss_correctness(self):
        with criterion("Loss correctness"):
            rng = np.random.default_rng(202)

            # 10^3 random instances with L <= 64, K <= 128 match the oracle to 1e-9.
            for _ in range(1000):
                l = int(rng.integers(1, 65))
                k = int(rng.integers(2, 129))
                cands = rng.uniform(1e-4, 1 - 1e-4, size=(l, k))
                target = rng.integers(0, 2, size=k)
                expect, _ = list_loss_oracle(cands.tolist(), target.tolist())
                assert abs(float(list_loss(cands, target).value) - expect) <= 1e-9

            # Analytic gradients vs central finite differences at 100 non-tie
            # points, 64-bit precision, relative error < 1e-4.
            h = 1e-6
            checked = 0
            while checked < 100:
                l = int(rng.integers(2, 9))
                k = int(rng.integers(2, 33))
                cands = rng.uniform(0.05, 0.95, size=(1, l, k))
                targets = rng.integers(0, 2, size=(1, k))
                row_losses = sorted(
                    float(list_loss(cands[0][i:i + 1], targets[0]).value) for i in range(l)
                )
                if l > 1 and row_losses[1] - row_losses[0] < 1e-3:
                    continue  # too close to a tie for a clean probe
                t = torch.tensor(cands, requires_grad=True)
                batch_list_loss(t, targets).backward()
                li, ki = int(rng.integers(l)), int(rng.integers(k))
                up, down = cands.copy(), cands.copy()
                up[0, li, ki] += h
                down[0, li, ki] -= h
                fd = (float(batch_list_loss(up, targets)) - float(batch_list_loss(down, targets))) / (2 * h)
                an = float(t.grad[0, li, ki])
                assert abs(an - fd) <= 1e-4 * max(abs(fd), 1e-8)
                checked += 1


class TestMonotonicity:
    def test_list_loss_append_monotone(self):
        with criterion("Monotonicity: list extension"):
            rng = np.random.default_rng(303)
            for _ in range(1000):
                l = int(rng.integers(1, 9))
                k = int(rng.integers(2, 33))
                cands = rng.uniform(1e-4, 1 - 1e-4, size=(l, k))
                target = rng.integers(0, 2, size=k)
                extra = rng.uniform(1e-4, 1 - 1e-4, size=(1, k))
                before = float(list_loss(cands, target).value)
                after = float(list_loss(np.vstack([cands, extra]), target).value)
                assert after <= before

    def test_ga_bler_prefix_monotone(self, smoke_ga_report):
        with criterion("Monotonicity: GA BLER over prefixes"):
            for snr in {row.snr_db for row in smoke_ga_report.rows}:
                by_prefix = sorted(
                    (row.prefix, row.bler)
                    for row in smoke_ga_report.rows
                    if row.snr_db == snr
                )
                blers = [b for _, b in by_prefix]
                assert all(a >= b for a, b in zip(blers, blers[1:]))


class TestNormalization:
    def test_normalization(self, smoke):
        with criterion("Normalization"):
            result, records = smoke
            assert records, "no batches recorded"
            for mean, std, sum_sq, n in records:
                assert abs(mean) < 1e-6
                assert abs(std - 1.0) < 1e-6
                assert abs(sum_sq - n) <= 1e-3 * n

            # Frozen stats applied to 10^4 fresh words keep the moments tight.
            fresh = np.random.default_rng(404).integers(0, 2, size=(10_000, 16))
            x = result.codec.encode(fresh, stats=result.norm_stats)
            assert abs(x.mean()) < 0.01
            assert abs(x.std() - 1.0) < 0.01


class TestCodecGradientsAndShapes:
    def test_codec_gradients_and_shapes(self):
        with criterion("Codec gradient/shape checks"):
            rng = np.random.default_rng(505)
            codec = new_codec(SMOKE_CODEC, seed=1).double()

            y = rng.standard_normal((3, 16))
            out = codec.decode_list(y)
            assert out.shape == (4, 16)
            assert (out > 0).all() and (out < 1).all()

            u = rng.integers(0, 2, size=(4, 16))
            noise = awgn_noise((4, 3, 16), 0.8912509381337456, rng)

            def forward():
                x = codec.encode(torch.from_numpy(u))
                return batch_list_loss(
                    codec.decode_list(x + torch.from_numpy(noise)), u
                )

            loss = forward()
            params = list(codec.parameters())
            grads = torch.autograd.grad(loss, params)
            h = 1e-5
            # Central differences bottom out around 5e-12 here (f64 round-off
            # of an O(1) loss over 2h), so gradients below that floor are
            # checked absolutely; meaningful ones at 1e-3 relative.
            meaningful = 0
            attempts = 0
            while meaningful < 10 and attempts < 60:
                attempts += 1
                pi = int(rng.integers(len(params)))
                fi = int(rng.integers(params[pi].numel()))
                flat = params[pi].view(-1)
                with torch.no_grad():
                    orig = flat[fi].item()
                    flat[fi] = orig + h
                up = float(forward().detach())
                with torch.no_grad():
                    flat[fi] = orig - h
                down = float(forward().detach())
                with torch.no_grad():
                    flat[fi] = orig
                fd = (up - down) / (2 * h)
                an = float(grads[pi].view(-1)[fi])
                assert abs(an - fd) <= max(1e-3 * abs(fd), 1e-8)
                if abs(fd) >= 1e-6:
                    meaningful += 1
            assert meaningful >= 10


class TestDeskScaleLearning:
    def test_desk_scale_learning_signal(self, smoke, smoke_ga_report):
        with criterion("Desk-scale learning signal"):
            result, _ = smoke
            history = result.history
            assert len(history) == 20
            assert history[-1].test_loss <= 0.5 * history[0].test_loss

            # GA BLER at 4 dB beats closed-form uncoded BPSK at equal Eb.
            (row,) = [
                r for r in smoke_ga_report.rows
                if r.snr_db == 4.0 and r.prefix == 4
            ]
            eb = ebsigma_from_snr(4.0, smoke_ga_report.rate)
            base = baseline_uncoded(
                EvalConfig(snr_db=(eb,), seed=0), block_len=16
            ).rows[0].bler
            print(f"  GA BLER@4dB={row.bler:.4g} vs uncoded baseline {base:.4g} "
                  f"(test loss {history[0].test_loss:.3g} -> {history[-1].test_loss:.3g})")
            assert row.bler < base


class TestArchitectureSize:
    def test_ir_decoder_more_than_twice_turbo(self):
        with criterion("Architecture-size claim"):
            for k, l, i, ch in [(16, 4, 2, 32), (100, 8, 6, 100), (64, 64, 6, 100)]:
                ir = new_codec(
                    CodecConfig(block_len=k, list_size=l, iterations=i,
                                variant="ir_ae", channels=ch), 0)
                turbo = new_codec(
                    CodecConfig(block_len=k, list_size=l, iterations=i,
                                variant="turbo_ae", channels=ch), 0)
                assert count_parameters(ir.decoder) > 2 * count_parameters(turbo.decoder)


class TestCaConsistency:
    def test_ca_consistency(self, smoke):
        with criterion("CA consistency"):
            result, _ = smoke
            frozen = FrozenCodec(result.codec, result.norm_stats)
            rng = np.random.default_rng(606)
            l = SMOKE_CODEC.list_size
            bound = 4 * l * 2.0**-8
            for snr in (1.0, 2.5, 4.0):
                sigma = 10 ** (-snr / 20)
                ga_errors = ca_errors = 0
                n_pass = undetected = 0
                trials = 2500
                for _ in range(trials // 500):
                    payloads = rng.integers(0, 2, size=(500, 8)).astype(np.uint8)
                    words = attach_crc_many(payloads, SPEC8)
                    x = frozen.encode_batch(words)
                    y = x + awgn_noise(x.shape, sigma, rng)
                    hard = harden(frozen.decode_batch(y))
                    for t in range(500):
                        ga = select_ga(hard[t], words[t], rng)
                        ca = select_ca(hard[t], SPEC8, rng)
                        ga_errors += is_block_error(ga, words[t])
                        ca_errors += is_block_error(ca, words[t])
                        if ca.status == CRC_PASS:
                            n_pass += 1
                            undetected += not np.array_equal(ca.word, words[t])
                # Same trials, so the genie bound is exact, not statistical.
                assert ca_errors >= ga_errors
                assert n_pass > 0
                sigma_hat = math.sqrt(bound * (1 - bound) / n_pass)
                assert undetected / n_pass <= bound + 3 * sigma_hat


class TestDeterminism:
    def test_cli_rerun_bit_identical(self, tmp_path):
        with criterion("Determinism"):
            raw = {
                "name": "det",
                "seed": 11,
                "model": {"block_len": 8, "list_size": 2, "iterations": 1,
                          "channels": 8, "kernel": 3, "layers": 2},
                "crc": None,
                "train": {
                    "t_enc": 1, "t_dec": 2,
                    "encoder_snr_db": 1.0,
                    "decoder_snr_db": [-1.5, 2.0],
                    "schedule": [[0.001, 16]],
                    "max_epochs": 2,
                    "calib_words": 1000,
                },
                "eval": {
                    "snr_db": [0.0, 4.0], "mode": "GA", "prefix_sizes": [1, 2],
                    "min_block_errors": 10, "max_trials": 80, "batch": 40,
                },
            }
            cfg = tmp_path / "det.json"
            cfg.write_text(json.dumps(raw))

            # Rerun the train command with identical config and seed.
            a, b = tmp_path / "a", tmp_path / "b"
            for out in (a, b):
                assert main(["train", "--config", str(cfg), "--out-dir", str(out)]) == 0
            assert (a / "det_train_log.csv").read_bytes() == (b / "det_train_log.csv").read_bytes()
            with np.load(a / "det.ckpt.npz") as fa, np.load(b / "det.ckpt.npz") as fb:
                assert sorted(fa.files) == sorted(fb.files)
                for name in fa.files:
                    assert np.array_equal(fa[name], fb[name]), name

            # Rerun the eval command on one checkpoint.
            ckpt = str(a / "det.ckpt.npz")
            e1, e2 = tmp_path / "e1", tmp_path / "e2"
            for out in (e1, e2):
                assert main(["eval", "--checkpoint", ckpt,
                             "--config", str(cfg), "--out-dir", str(out)]) == 0
            assert (e1 / "det_report.csv").read_bytes() == (e2 / "det_report.csv").read_bytes()

            def normalized(path):
                report = json.loads(path.read_text())
                for row in report["rows"]:
                    row.pop("wall_time_s")  # timing is the one non-deterministic field
                return report

            assert normalized(e1 / "det_report.json") == normalized(e2 / "det_report.json")

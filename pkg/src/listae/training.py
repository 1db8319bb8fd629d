"""Alternating encoder/decoder training schedule.

Every epoch runs t_enc encoder-only Adam steps at a fixed SNR while the
decoder weights stay frozen, then t_dec decoder-only steps with one SNR
drawn per noise vector from the decoder range. Fresh random message
batches are drawn for every step, and the held-out test loss is computed
per epoch on a new batch at the encoder training SNR. The (lr, batch)
schedule advances one stage whenever the test loss has not improved for
`patience` epochs; the best-test-loss weights are kept and frozen
normalization statistics are calibrated on them at the end.
"""

import copy
from dataclasses import dataclass, field

import numpy as np
import torch

from .channel import SNRRange, awgn_noise, sample_training_snrs, snr_to_sigma
from .codec import CodecConfig, ListAE, NormStats, new_codec
from .errors import TrainingDivergedError
from .loss import CLAMP_EPS, batch_list_loss

ENC_PHASE = "enc"
DEC_PHASE = "dec"


@dataclass(frozen=True)
class TrainConfig:
    codec: CodecConfig
    t_enc: int
    t_dec: int
    enc_snr_db: float
    dec_snr: SNRRange
    schedule: tuple[tuple[float, int], ...]  # (learning rate, batch size) stages
    max_epochs: int
    seed: int
    patience: int = 10
    clamp_eps: float = CLAMP_EPS
    calib_words: int = 10_000

    def __post_init__(self):
        if self.t_enc < 1 or self.t_dec < 1:
            raise ValueError("t_enc and t_dec must be >= 1")
        if not self.schedule:
            raise ValueError("schedule must contain at least one (lr, batch) stage")
        for lr, batch in self.schedule:
            if lr <= 0:
                raise ValueError(f"learning rate must be positive, got {lr}")
            if batch < 2:
                raise ValueError(f"batch size must be >= 2, got {batch}")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class EpochResult:
    epoch: int
    stage: int
    lr: float
    batch: int
    enc_loss: float
    dec_loss: float
    test_loss: float


@dataclass
class TrainState:
    """Mutable state owned by one training loop (single writer)."""

    codec: ListAE
    opt_enc: torch.optim.Optimizer
    opt_dec: torch.optim.Optimizer
    data_rng: np.random.Generator
    test_rng: np.random.Generator
    epoch: int = 0
    stage: int = 0
    epochs_since_improve: int = 0
    best_test_loss: float = float("inf")
    best_epoch: int = -1
    best_state: dict | None = None
    history: list = field(default_factory=list)


def _set_requires_grad(module: torch.nn.Module, flag: bool) -> None:
    for p in module.parameters():
        p.requires_grad_(flag)


def _set_lr(optimizer: torch.optim.Optimizer, lr: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = lr


def _snapshot(module: torch.nn.Module) -> dict:
    return copy.deepcopy(module.state_dict())


def _training_step(codec, u_bits, sigma, rng, eps):
    """One forward pass: encode with batch stats, add noise, decode, loss."""
    u = torch.from_numpy(u_bits)
    x = codec.encode(u)
    noise = awgn_noise(tuple(x.shape), sigma, rng)
    y = x + torch.from_numpy(noise).to(x.dtype)
    candidates = codec.decode_list(y)
    return batch_list_loss(candidates, u_bits, eps)


def _check_finite(loss, cfg, state, phase, step):
    value = float(loss.detach())
    if not np.isfinite(value):
        raise TrainingDivergedError(
            f"non-finite loss {value} at epoch {state.epoch} {phase} step {step} "
            f"(stage {state.stage}, lr {cfg.schedule[state.stage][0]})",
            epoch=state.epoch,
            phase=phase,
            step=step,
            loss=value,
        )
    return value


def run_phase(state: TrainState, cfg: TrainConfig, phase: str, batch: int) -> list:
    """Run one training phase (t_enc encoder or t_dec decoder steps).

    The other network's weights are frozen for the duration: gradients
    still flow through it to reach the trained one, but its parameters
    receive no update. Returns the per-step losses.
    """
    codec = state.codec
    k = cfg.codec.block_len
    if phase == ENC_PHASE:
        frozen, optimizer, steps = codec.decoder, state.opt_enc, cfg.t_enc
    elif phase == DEC_PHASE:
        frozen, optimizer, steps = codec.encoder, state.opt_dec, cfg.t_dec
    else:
        raise ValueError(f"unknown phase {phase!r}")
    _set_requires_grad(frozen, False)
    losses = []
    try:
        for step in range(steps):
            u = state.data_rng.integers(0, 2, size=(batch, k), dtype=np.int64)
            if phase == ENC_PHASE:
                sigma = snr_to_sigma(cfg.enc_snr_db)
            else:
                snrs = sample_training_snrs(cfg.dec_snr, batch, state.data_rng)
                sigma = np.array([snr_to_sigma(s) for s in snrs])
            loss = _training_step(codec, u, sigma, state.data_rng, cfg.clamp_eps)
            losses.append(_check_finite(loss, cfg, state, phase, step))
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
    finally:
        _set_requires_grad(frozen, True)
    return losses


def held_out_loss(state: TrainState, cfg: TrainConfig, batch: int) -> float:
    """Loss on a fresh batch at the encoder training SNR (no updates)."""
    state.codec.eval()
    u = state.test_rng.integers(0, 2, size=(batch, cfg.codec.block_len), dtype=np.int64)
    with torch.no_grad():
        loss = _training_step(
            state.codec, u, snr_to_sigma(cfg.enc_snr_db), state.test_rng, cfg.clamp_eps
        )
    state.codec.train()
    return float(loss)


def train_epoch(state: TrainState, cfg: TrainConfig) -> EpochResult:
    """Run one alternating epoch and return its losses."""
    lr, batch = cfg.schedule[state.stage]
    _set_lr(state.opt_enc, lr)
    _set_lr(state.opt_dec, lr)
    state.codec.train()
    state.epoch += 1
    enc_losses = run_phase(state, cfg, ENC_PHASE, batch)
    dec_losses = run_phase(state, cfg, DEC_PHASE, batch)
    result = EpochResult(
        epoch=state.epoch,
        stage=state.stage,
        lr=lr,
        batch=batch,
        enc_loss=float(np.mean(enc_losses)),
        dec_loss=float(np.mean(dec_losses)),
        test_loss=held_out_loss(state, cfg, batch),
    )
    state.history.append(result)
    return result


@dataclass
class TrainResult:
    codec: ListAE
    norm_stats: NormStats
    history: list
    best_epoch: int
    best_test_loss: float


def init_state(cfg: TrainConfig, codec: ListAE | None = None) -> TrainState:
    """Build the training state; all randomness derives from cfg.seed."""
    ss = np.random.SeedSequence(cfg.seed)
    init_seed, data_seed, test_seed = (
        int(s) for s in ss.generate_state(3, dtype=np.uint64)
    )
    if codec is None:
        codec = new_codec(cfg.codec, init_seed)
    lr0 = cfg.schedule[0][0]
    return TrainState(
        codec=codec,
        opt_enc=torch.optim.Adam(codec.encoder.parameters(), lr=lr0),
        opt_dec=torch.optim.Adam(codec.decoder.parameters(), lr=lr0),
        data_rng=np.random.default_rng(data_seed),
        test_rng=np.random.default_rng(test_seed),
    )


def run_schedule(cfg: TrainConfig, log=None, codec: ListAE | None = None) -> TrainResult:
    """Train through the (lr, batch) schedule and return the best codec.

    `log` is called with every EpochResult as it completes (the CLI flushes
    it to the training log CSV). Passing a codec resumes from its weights
    instead of a fresh initialization.
    """
    state = init_state(cfg, codec=codec)
    for _ in range(cfg.max_epochs):
        result = train_epoch(state, cfg)
        if log is not None:
            log(result)
        if result.test_loss < state.best_test_loss:
            state.best_test_loss = result.test_loss
            state.best_epoch = result.epoch
            state.best_state = _snapshot(state.codec)
            state.epochs_since_improve = 0
        else:
            state.epochs_since_improve += 1
        if (
            state.epochs_since_improve >= cfg.patience
            and state.stage < len(cfg.schedule) - 1
        ):
            state.stage += 1
            state.epochs_since_improve = 0

    if state.best_state is not None:
        state.codec.load_state_dict(state.best_state)
    state.codec.eval()
    calib_seed = int(
        np.random.SeedSequence(cfg.seed).generate_state(4, dtype=np.uint64)[3]
    )
    stats = state.codec.calibrate_norm(
        cfg.calib_words, np.random.default_rng(calib_seed)
    )
    return TrainResult(
        codec=state.codec,
        norm_stats=stats,
        history=state.history,
        best_epoch=state.best_epoch,
        best_test_loss=state.best_test_loss,
    )

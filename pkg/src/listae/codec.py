"""Trainable rate-1/3 encoder and iterative list decoder.

The encoder maps a length-K binary word to three length-K real streams
(the third from the interleaved word) and power-normalizes the result.
The decoder runs I iterations; each iteration is a serial chain of
decoding blocks that consume a subset of the received streams plus the
current K x L list matrix and emit an updated list matrix. The final
list matrix passes through a sigmoid, giving L soft candidate rows.

Two architecture variants share the encoder:
  * turbo_ae - two rate-1/2 blocks per iteration, inputs {y1,y2}, {y1,y3};
  * ir_ae    - four blocks of non-increasing rates (1/2, 1/2, 1/2, 1/3),
               inputs {y1,y2}, {y1,y3}, {y2,y3}, {y1,y2,y3}.

Stream 3 is encoded from the interleaved word, so any block whose input
set includes y3 operates in the interleaved domain: its other received
streams and its incoming list matrix are permuted before the block and
its output list matrix is deinterleaved after. List matrices are
therefore always in natural order at block boundaries.
"""

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .interleaver import Permutation, generate

TURBO_AE = "turbo_ae"
IR_AE = "ir_ae"

# Received-stream subsets per decoding block (0-based stream indices).
_BLOCK_STREAMS = {
    TURBO_AE: ((0, 1), (0, 2)),
    IR_AE: ((0, 1), (0, 2), (1, 2), (0, 1, 2)),
}


class DegenerateBatchError(ValueError):
    """Raised when a batch of code symbols has zero variance."""


@dataclass(frozen=True)
class NormStats:
    """Power-normalization statistics: x = (b - mu) / gamma."""

    mu: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class CodecConfig:
    """Architecture hyperparameters shared by encoder and decoder."""

    block_len: int  # K
    list_size: int  # L
    iterations: int  # I
    variant: str = IR_AE
    channels: int = 100
    kernel: int = 5
    layers: int = 5
    branches: int = 3  # n, fixed rate-1/3

    def __post_init__(self):
        if self.block_len < 2:
            raise ValueError(f"block_len must be >= 2, got {self.block_len}")
        if self.list_size < 1:
            raise ValueError(f"list_size must be >= 1, got {self.list_size}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.variant not in _BLOCK_STREAMS:
            raise ValueError(f"variant must be one of {sorted(_BLOCK_STREAMS)}, got {self.variant!r}")
        if self.channels < 1 or self.layers < 1:
            raise ValueError("channels and layers must be positive")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError(f"kernel must be odd for same-length padding, got {self.kernel}")
        if self.branches != 3:
            raise ValueError("only rate-1/3 (three branches) is supported")

    @property
    def code_len(self) -> int:
        return self.branches * self.block_len

    @property
    def rate(self) -> float:
        return 1.0 / self.branches

    def to_dict(self) -> dict:
        return {
            "block_len": self.block_len,
            "list_size": self.list_size,
            "iterations": self.iterations,
            "variant": self.variant,
            "channels": self.channels,
            "kernel": self.kernel,
            "layers": self.layers,
            "branches": self.branches,
        }


def normalize_batch(symbols):
    """Normalize a batch of code symbols to zero mean and unit power.

    Statistics are taken over all entries (population std), so the output
    satisfies sum(x^2) == numel exactly up to rounding. Returns the
    normalized symbols (same array type as the input) and the NormStats
    used. Gradients flow through the statistics when the input carries
    autograd state.
    """
    b = torch.as_tensor(np.asarray(symbols)) if not isinstance(symbols, torch.Tensor) else symbols
    if b.numel() < 2:
        raise ValueError(f"need at least 2 symbols to normalize, got {b.numel()}")
    b64 = b.double()
    mu = b64.mean()
    var = (b64 - mu).square().mean()
    if var.detach().item() == 0.0:
        raise DegenerateBatchError("zero-variance symbol batch cannot be normalized")
    gamma = var.sqrt()
    x = ((b64 - mu) / gamma).to(b.dtype if b.dtype.is_floating_point else torch.float64)
    stats = NormStats(mu=float(mu.detach()), gamma=float(gamma.detach()))
    if not isinstance(symbols, torch.Tensor):
        return x.numpy(), stats
    return x, stats


class _ConvBlock(nn.Module):
    """Same-length 1-D conv stack (Elu) with a position-wise linear head."""

    def __init__(self, in_channels: int, out_channels: int, cfg: CodecConfig):
        super().__init__()
        layers = []
        for i in range(cfg.layers):
            layers.append(
                nn.Conv1d(
                    in_channels if i == 0 else cfg.channels,
                    cfg.channels,
                    kernel_size=cfg.kernel,
                    padding=cfg.kernel // 2,
                )
            )
            layers.append(nn.ELU())
        self.stack = nn.Sequential(*layers)
        self.head = nn.Conv1d(cfg.channels, out_channels, kernel_size=1)

    def forward(self, x):
        return self.head(self.stack(x))


class EncoderNet(nn.Module):
    """Three encoding branches; branch 3 consumes the interleaved word."""

    def __init__(self, cfg: CodecConfig):
        super().__init__()
        self.cfg = cfg
        self.blocks = nn.ModuleList(_ConvBlock(1, 1, cfg) for _ in range(cfg.branches))

    def forward(self, symbols: torch.Tensor, mapping: torch.Tensor) -> torch.Tensor:
        """(B, K) +/-1 symbols -> (B, 3, K) un-normalized branch streams."""
        interleaved = symbols[:, mapping]
        streams = [
            self.blocks[0](symbols.unsqueeze(1)),
            self.blocks[1](symbols.unsqueeze(1)),
            self.blocks[2](interleaved.unsqueeze(1)),
        ]
        return torch.cat(streams, dim=1)


class DecoderNet(nn.Module):
    """I iterations of serially-chained decoding blocks with own weights."""

    def __init__(self, cfg: CodecConfig):
        super().__init__()
        self.cfg = cfg
        self.block_streams = _BLOCK_STREAMS[cfg.variant]
        rates = [1.0 / len(s) for s in self.block_streams]
        if any(r2 > r1 for r1, r2 in zip(rates, rates[1:])):
            raise AssertionError("block rates within an iteration must be non-increasing")
        self.stages = nn.ModuleList(
            nn.ModuleList(
                _ConvBlock(len(streams) + cfg.list_size, cfg.list_size, cfg)
                for streams in self.block_streams
            )
            for _ in range(cfg.iterations)
        )

    def forward(self, y: torch.Tensor, mapping: torch.Tensor, inverse: torch.Tensor) -> torch.Tensor:
        """(B, 3, K) received word -> (B, L, K) soft candidates in (0, 1)."""
        batch, _, k = y.shape
        p = y.new_zeros((batch, self.cfg.list_size, k))
        for stage in self.stages:
            for block, streams in zip(stage, self.block_streams):
                in_interleaved = 2 in streams
                feats = []
                for s in streams:
                    ys = y[:, s]
                    if in_interleaved and s != 2:
                        ys = ys[:, mapping]
                    feats.append(ys.unsqueeze(1))
                feats.append(p[:, :, mapping] if in_interleaved else p)
                out = block(torch.cat(feats, dim=1))
                p = out[:, :, inverse] if in_interleaved else out
        return torch.sigmoid(p)


class ListAE(nn.Module):
    """Encoder, list decoder, and the fixed interleaver tying them together."""

    def __init__(self, cfg: CodecConfig, permutation: Permutation):
        super().__init__()
        if permutation.size != cfg.block_len:
            raise ValueError(
                f"permutation size {permutation.size} != block length {cfg.block_len}"
            )
        self.cfg = cfg
        self.permutation = permutation
        self.encoder = EncoderNet(cfg)
        self.decoder = DecoderNet(cfg)
        self._mapping = torch.from_numpy(permutation.mapping)
        self._inverse = torch.from_numpy(permutation.inverse)

    @property
    def dtype(self):
        return next(self.parameters()).dtype

    def _as_batch(self, arr, name: str, width: int) -> tuple[torch.Tensor, bool]:
        t = torch.as_tensor(np.asarray(arr)) if not isinstance(arr, torch.Tensor) else arr
        single = t.ndim == width - 1
        if single:
            t = t.unsqueeze(0)
        if t.ndim != width:
            raise ValueError(
                f"{name} must be {width - 1}-D or batched {width}-D, got shape {tuple(t.shape)}"
            )
        return t, single

    def encode(self, bits, stats: NormStats | None = None):
        """Encode message bits to power-normalized (.., 3, K) codewords.

        With stats=None the batch's own statistics are used (training
        mode); passing frozen NormStats reproduces single-word test-time
        encoding. Returns what the input type was: numpy in, numpy out.
        """
        u, single = self._as_batch(bits, "message bits", 2)
        if u.shape[1] != self.cfg.block_len:
            raise ValueError(f"message length {u.shape[1]} != K={self.cfg.block_len}")
        symbols = 2.0 * u.to(self.dtype) - 1.0
        b = self.encoder(symbols, self._mapping)
        if stats is None:
            x, _ = normalize_batch(b)
        else:
            x = (b - stats.mu) / stats.gamma
        if single:
            x = x.squeeze(0)
        if not isinstance(bits, torch.Tensor):
            return x.detach().numpy()
        return x

    def decode_list(self, received):
        """Decode (.., 3, K) received words to (.., L, K) soft candidates."""
        y, single = self._as_batch(received, "received word", 3)
        if y.shape[1:] != (self.cfg.branches, self.cfg.block_len):
            raise ValueError(
                f"received word shape {tuple(y.shape[1:])} != "
                f"({self.cfg.branches}, {self.cfg.block_len})"
            )
        if not torch.isfinite(y.detach()).all():
            raise ValueError("received word contains non-finite entries")
        out = self.decoder(y.to(self.dtype), self._mapping, self._inverse)
        if single:
            out = out.squeeze(0)
        if not isinstance(received, torch.Tensor):
            return out.detach().numpy()
        return out

    def calibrate_norm(self, num_words: int, rng: np.random.Generator, batch: int = 2000) -> NormStats:
        """Freeze power-normalization statistics from encoded random words."""
        if num_words < 1000:
            raise ValueError(f"calibration needs >= 1000 words, got {num_words}")
        count, total, total_sq = 0, 0.0, 0.0
        with torch.no_grad():
            remaining = num_words
            while remaining > 0:
                n = min(batch, remaining)
                u = rng.integers(0, 2, size=(n, self.cfg.block_len))
                symbols = torch.as_tensor(2.0 * u - 1.0, dtype=self.dtype)
                b = self.encoder(symbols, self._mapping).double()
                count += b.numel()
                total += float(b.sum())
                total_sq += float(b.square().sum())
                remaining -= n
        mu = total / count
        var = total_sq / count - mu * mu
        if var <= 0.0:
            raise DegenerateBatchError("calibration batch has zero variance")
        return NormStats(mu=mu, gamma=math.sqrt(var))


def count_parameters(net: nn.Module) -> int:
    """Total trainable scalar parameter count."""
    return sum(p.numel() for p in net.parameters() if p.requires_grad)


def new_codec(cfg: CodecConfig, seed: int) -> ListAE:
    """Construct a codec with seed-derived weight init and interleaver."""
    ss = np.random.SeedSequence(seed)
    torch_seed, perm_seed = (int(s) for s in ss.generate_state(2, dtype=np.uint64))
    torch.manual_seed(torch_seed)
    return ListAE(cfg, generate(cfg.block_len, perm_seed))

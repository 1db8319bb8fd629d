"""Monte-Carlo BER/BLER evaluation harness.

For every SNR grid point: draw random payloads (with a CRC tail in CA
mode), encode with frozen normalization statistics, push through the AWGN
channel, decode the candidate list, harden, and select one candidate per
requested list-prefix size. Trials accumulate until every prefix has
min_block_errors block errors or max_trials is reached. Each SNR point
runs on its own seed derived from the report seed, so points are
independent and order-insensitive.
"""

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
import torch

from . import __version__
from .channel import ChannelSpec, ebsigma_from_snr, snr_to_sigma, transmit
from .codec import ListAE, NormStats
from .crc import CRCSpec, attach_crc_many
from .errors import ConfigError
from .selection import CA, GA, harden, is_block_error, select_ca, select_ga

UNCODED = "UNCODED"


@dataclass(frozen=True)
class EvalConfig:
    snr_db: tuple[float, ...]
    mode: str = GA
    prefix_sizes: tuple[int, ...] | None = None  # None: full list only
    min_block_errors: int = 100
    max_trials: int = 10_000_000
    batch: int = 500
    seed: int = 0
    crc: CRCSpec | None = None
    rate: float | None = None  # None: computed from payload bits / code length
    trace_trials: int = 0

    def __post_init__(self):
        if not self.snr_db:
            raise ConfigError("SNR grid must be non-empty")
        if self.mode not in (GA, CA):
            raise ConfigError(f"mode must be GA or CA, got {self.mode!r}")
        if self.min_block_errors < 1:
            raise ConfigError("min_block_errors must be >= 1")
        if self.max_trials < 1 or self.batch < 1:
            raise ConfigError("max_trials and batch must be >= 1")
        if self.prefix_sizes is not None and any(p < 1 for p in self.prefix_sizes):
            raise ConfigError("prefix sizes must be >= 1")


@dataclass
class EvalRow:
    snr_db: float
    eb_db: float
    prefix: int
    trials: int
    bit_errors: int
    block_errors: int
    ber: float
    bler: float
    seed: int
    wall_time_s: float
    status_counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "snr_db": self.snr_db,
            "eb_db": self.eb_db,
            "prefix_L": self.prefix,
            "trials": self.trials,
            "bit_errors": self.bit_errors,
            "block_errors": self.block_errors,
            "ber": self.ber,
            "bler": self.bler,
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
            "status_counts": self.status_counts,
        }


CSV_FIELDS = (
    "snr_db",
    "eb_db",
    "prefix_L",
    "trials",
    "bit_errors",
    "block_errors",
    "ber",
    "bler",
    "seed",
)


@dataclass
class EvalReport:
    mode: str
    rate: float
    payload_bits: int
    seed: int
    config: dict
    rows: list
    trace: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "generated_by": f"listae {__version__}",
            "mode": self.mode,
            "rate": self.rate,
            "payload_bits": self.payload_bits,
            "seed": self.seed,
            "config": self.config,
            "rows": [row.to_dict() for row in self.rows],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_FIELDS)
            for row in self.rows:
                d = row.to_dict()
                writer.writerow([repr(d[k]) if isinstance(d[k], float) else d[k] for k in CSV_FIELDS])

    def write_trace_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["snr_db", "trial", "prefix_L", "status", "block_error"])
            writer.writerows(self.trace)


class FrozenCodec:
    """Inference-only wrapper: trained nets plus frozen normalization stats."""

    def __init__(self, codec: ListAE, norm_stats: NormStats):
        self.codec = codec
        self.norm_stats = norm_stats
        codec.eval()

    @property
    def block_len(self) -> int:
        return self.codec.cfg.block_len

    @property
    def list_size(self) -> int:
        return self.codec.cfg.list_size

    @property
    def code_len(self) -> int:
        return self.codec.cfg.code_len

    def encode_batch(self, words: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            return np.asarray(self.codec.encode(words, stats=self.norm_stats), dtype=np.float64)

    def decode_batch(self, received: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            return np.asarray(self.codec.decode_list(received), dtype=np.float64)


def _resolve(cfg: EvalConfig, codec) -> tuple[tuple[int, ...], int, float]:
    k, n = codec.block_len, codec.code_len
    prefixes = cfg.prefix_sizes if cfg.prefix_sizes is not None else (codec.list_size,)
    prefixes = tuple(sorted(set(int(p) for p in prefixes)))
    if prefixes[-1] > codec.list_size:
        raise ConfigError(
            f"prefix size {prefixes[-1]} exceeds the decoder list size {codec.list_size}"
        )
    if cfg.mode == CA:
        if cfg.crc is None:
            raise ConfigError("CA mode requires a CRC polynomial")
        if cfg.crc.degree >= k:
            raise ConfigError(
                f"CRC degree {cfg.crc.degree} must be smaller than block length {k}"
            )
        payload_bits = k - cfg.crc.degree
    else:
        payload_bits = k
    rate = cfg.rate if cfg.rate is not None else payload_bits / n
    if not 0.0 < rate <= 1.0:
        raise ConfigError(f"rate must be in (0, 1], got {rate}")
    return prefixes, payload_bits, rate


def _point_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def evaluate(codec, cfg: EvalConfig) -> EvalReport:
    """Run the Monte-Carlo sweep for one codec and eval config."""
    prefixes, payload_bits, rate = _resolve(cfg, codec)
    rows = []
    trace = []
    for i, snr in enumerate(cfg.snr_db):
        point_seed = _point_seed(cfg.seed, i)
        rng = np.random.default_rng(point_seed)
        spec = ChannelSpec(snr)
        start = time.perf_counter()
        trials = 0
        block_errors = {p: 0 for p in prefixes}
        bit_errors = {p: 0 for p in prefixes}
        statuses = {p: {} for p in prefixes}
        while trials < cfg.max_trials and (
            min(block_errors.values()) < cfg.min_block_errors
        ):
            bsize = min(cfg.batch, cfg.max_trials - trials)
            payloads = rng.integers(0, 2, size=(bsize, payload_bits), dtype=np.int64)
            if cfg.mode == CA:
                words = attach_crc_many(payloads.astype(np.uint8), cfg.crc)
            else:
                words = payloads.astype(np.uint8)
            x = codec.encode_batch(words)
            y = transmit(x, spec, rng)
            hard = harden(codec.decode_batch(y))
            for t in range(bsize):
                for p in prefixes:
                    if cfg.mode == CA:
                        outcome = select_ca(hard[t, :p], cfg.crc, rng)
                    else:
                        outcome = select_ga(hard[t, :p], words[t], rng)
                    err = is_block_error(outcome, words[t])
                    block_errors[p] += err
                    bit_errors[p] += int(
                        np.count_nonzero(
                            outcome.word[:payload_bits] != words[t, :payload_bits]
                        )
                    )
                    counts = statuses[p]
                    counts[outcome.status] = counts.get(outcome.status, 0) + 1
                    if trials + t < cfg.trace_trials:
                        trace.append((snr, trials + t, p, outcome.status, int(err)))
            trials += bsize
        wall = time.perf_counter() - start
        eb = ebsigma_from_snr(snr, rate)
        for p in prefixes:
            rows.append(
                EvalRow(
                    snr_db=float(snr),
                    eb_db=eb,
                    prefix=p,
                    trials=trials,
                    bit_errors=bit_errors[p],
                    block_errors=block_errors[p],
                    ber=bit_errors[p] / (trials * payload_bits),
                    bler=block_errors[p] / trials,
                    seed=point_seed,
                    wall_time_s=wall,
                    status_counts=statuses[p],
                )
            )
    return EvalReport(
        mode=cfg.mode,
        rate=rate,
        payload_bits=payload_bits,
        seed=cfg.seed,
        config={},
        rows=rows,
        trace=trace,
    )


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def baseline_uncoded(cfg: EvalConfig, block_len: int) -> EvalReport:
    """Closed-form uncoded BPSK-over-AWGN reference, no simulation.

    Per-bit error Q(1/sigma); block error over block_len independent bits.
    Rate 1, so the Eb axis equals the SNR axis.
    """
    rows = []
    for snr in cfg.snr_db:
        sigma = snr_to_sigma(snr)
        p = 0.0 if sigma == 0.0 else q_function(1.0 / sigma)
        rows.append(
            EvalRow(
                snr_db=float(snr),
                eb_db=float(snr),
                prefix=1,
                trials=0,
                bit_errors=0,
                block_errors=0,
                ber=p,
                bler=1.0 - (1.0 - p) ** block_len,
                seed=cfg.seed,
                wall_time_s=0.0,
            )
        )
    return EvalReport(
        mode=UNCODED,
        rate=1.0,
        payload_bits=block_len,
        seed=cfg.seed,
        config={},
        rows=rows,
    )

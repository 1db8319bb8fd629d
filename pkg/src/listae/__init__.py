"""List autoencoders for channel coding over AWGN.

Neural rate-1/3 encoders and iterative list decoders (Turbo-AE and IR-AE
variants), trained with a min-over-list BCE objective and evaluated with
genie-aided or CRC-aided candidate selection on a Monte-Carlo BER/BLER
harness.
"""

__version__ = "0.1.0"

from .crc import CRCSpec, MessageWord, attach_crc, crc_check, crc_compute
from .channel import ChannelSpec, SNRRange, ebsigma_from_snr, snr_to_sigma, transmit
from .interleaver import Permutation, inverse_permute, permute
from .codec import CodecConfig, ListAE, NormStats, count_parameters, normalize_batch
from .loss import batch_list_loss, bce_avg, list_loss
from .selection import SelectionOutcome, harden, is_block_error, select_ca, select_ga

__all__ = [
    "CRCSpec",
    "MessageWord",
    "attach_crc",
    "crc_check",
    "crc_compute",
    "ChannelSpec",
    "SNRRange",
    "ebsigma_from_snr",
    "snr_to_sigma",
    "transmit",
    "Permutation",
    "inverse_permute",
    "permute",
    "CodecConfig",
    "ListAE",
    "NormStats",
    "count_parameters",
    "normalize_batch",
    "batch_list_loss",
    "bce_avg",
    "list_loss",
    "SelectionOutcome",
    "harden",
    "is_block_error",
    "select_ca",
    "select_ga",
]

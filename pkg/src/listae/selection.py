"""Candidate selection: genie-aided and CRC-aided list decoding.

The genie-aided (GA) selector returns the transmitted word whenever it
appears among the hardened candidate rows, otherwise a uniformly random
row; a block error is counted iff the transmitted word is absent from the
list. The CRC-aided (CA) selector picks uniformly among rows that pass
the CRC check, falling back to a uniformly random row when none passes;
a block error is counted iff the chosen word differs from the
transmitted one.
"""

from dataclasses import dataclass

import numpy as np

from .crc import CRCSpec, MessageWord, crc_check_many

GA = "GA"
CA = "CA"

HIT = "HIT"
MISS_RANDOM = "MISS_RANDOM"
CRC_PASS = "CRC_PASS"
CRC_NONE_PASSED = "CRC_NONE_PASSED"


@dataclass(eq=False)
class SelectionOutcome:
    """Chosen word plus how it was chosen; word is always a row of the list."""

    word: np.ndarray
    mode: str
    status: str
    index: int


def harden(candidates) -> np.ndarray:
    """Round soft candidates at 0.5 (exactly 0.5 rounds to 1)."""
    soft = np.asarray(candidates)
    return (soft >= 0.5).astype(np.uint8)


def _bits_of(u) -> np.ndarray:
    if isinstance(u, MessageWord):
        return u.bits
    return np.asarray(u, dtype=np.uint8)


def select_ga(hard_list: np.ndarray, u, rng: np.random.Generator) -> SelectionOutcome:
    """Genie-aided selection: u if present in the list, else a random row."""
    hard_list = np.asarray(hard_list, dtype=np.uint8)
    bits = _bits_of(u)
    if hard_list.ndim != 2 or hard_list.shape[1] != bits.shape[0]:
        raise ValueError(
            f"list shape {hard_list.shape} incompatible with word length {bits.shape[0]}"
        )
    matches = np.nonzero((hard_list == bits).all(axis=1))[0]
    if matches.size:
        return SelectionOutcome(bits.copy(), GA, HIT, int(matches[0]))
    r = int(rng.integers(hard_list.shape[0]))
    return SelectionOutcome(hard_list[r].copy(), GA, MISS_RANDOM, r)


def select_ca(hard_list: np.ndarray, spec: CRCSpec, rng: np.random.Generator) -> SelectionOutcome:
    """CRC-aided selection: uniform among CRC-passing rows, random fallback."""
    hard_list = np.asarray(hard_list, dtype=np.uint8)
    if hard_list.ndim != 2 or hard_list.shape[1] <= spec.degree:
        raise ValueError(
            f"list rows of length {hard_list.shape[-1]} need K > Z={spec.degree}"
        )
    passing = np.nonzero(crc_check_many(hard_list, spec))[0]
    if passing.size:
        idx = int(passing[rng.integers(passing.size)])
        return SelectionOutcome(hard_list[idx].copy(), CA, CRC_PASS, idx)
    r = int(rng.integers(hard_list.shape[0]))
    return SelectionOutcome(hard_list[r].copy(), CA, CRC_NONE_PASSED, r)


def is_block_error(outcome: SelectionOutcome, u) -> bool:
    """GA: error iff u was absent from the list. CA: error iff chosen != u."""
    bits = _bits_of(u)
    if outcome.word.shape != bits.shape:
        raise ValueError(
            f"outcome word length {outcome.word.shape[0]} != message length {bits.shape[0]}"
        )
    if outcome.mode == GA:
        return outcome.status != HIT
    return not np.array_equal(outcome.word, bits)

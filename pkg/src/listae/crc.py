"""Binary message handling and CRC generation/checking over GF(2).

Bit convention: position 0 of a payload or word carries the highest-power
coefficient (MSB-first long division). A generator polynomial is described
by its coefficients g_0..g_Z in ascending power order, e.g. "101010111"
for g(x) = 1 + x^2 + x^4 + x^6 + x^7 + x^8. No initial register value and
no final XOR are applied: the CRC is the plain polynomial remainder of
payload(x) * x^Z modulo g(x).
"""

from dataclasses import dataclass

import numpy as np

RAW = "RAW"
PAYLOAD_CRC = "PAYLOAD_CRC"

# 8-bit polynomial used by the default CRC-aided configs: 1+x^2+x^4+x^6+x^7+x^8.
CRC8_DEFAULT = "101010111"


@dataclass(frozen=True)
class CRCSpec:
    """Degree-Z generator polynomial, coefficients ordered by ascending power."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        g = self.coefficients
        if len(g) < 2:
            raise ValueError("generator polynomial must have degree >= 1")
        if any(b not in (0, 1) for b in g):
            raise ValueError("polynomial coefficients must be 0/1")
        if g[0] != 1 or g[-1] != 1:
            raise ValueError("g_0 and g_Z must both be 1 for a proper degree-Z polynomial")

    @classmethod
    def from_string(cls, bits: str) -> "CRCSpec":
        """Parse an ascending-power bit string such as "101010111"."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not an ascending-power bit string: {bits!r}")
        return cls(tuple(int(b) for b in bits))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def _poly_low(self) -> int:
        # Register image of g(x) minus its x^Z term; bit j holds g_j.
        return sum(b << j for j, b in enumerate(self.coefficients[:-1]))


@dataclass(eq=False)
class MessageWord:
    """Length-K binary word, either all information (RAW) or payload + CRC tail."""

    bits: np.ndarray
    layout: str = RAW

    def __post_init__(self):
        self.bits = _as_bits(self.bits, "bits")
        if self.layout not in (RAW, PAYLOAD_CRC):
            raise ValueError(f"unknown layout {self.layout!r}")

    def __len__(self) -> int:
        return self.bits.shape[0]


def _as_bits(x, name: str) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D bit vector, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 entries")
    return arr.astype(np.uint8)


def _remainders(rows: np.ndarray, spec: CRCSpec) -> np.ndarray:
    """MSB-first division registers for each row; returns remainder ints."""
    z = spec.degree
    mask = np.uint32((1 << z) - 1)
    poly = np.uint32(spec._poly_low)
    reg = np.zeros(rows.shape[0], dtype=np.uint32)
    for k in range(rows.shape[1]):
        top = (reg >> (z - 1)) & 1
        reg = ((reg << 1) & mask) | rows[:, k]
        reg ^= np.where(top.astype(bool), poly, np.uint32(0))
    return reg


def _register_to_bits(reg: np.ndarray, z: int) -> np.ndarray:
    # Remainder bits MSB first, matching the word bit convention.
    shifts = np.arange(z - 1, -1, -1, dtype=np.uint32)
    return ((reg[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def crc_compute(payload, spec: CRCSpec) -> np.ndarray:
    """CRC bits of one payload: remainder of payload(x) * x^Z modulo g(x)."""
    payload = _as_bits(payload, "payload")
    if payload.size == 0:
        raise ValueError("payload must be non-empty")
    return crc_compute_many(payload[None, :], spec)[0]


def crc_compute_many(payloads: np.ndarray, spec: CRCSpec) -> np.ndarray:
    """Row-wise crc_compute on a (B, K-Z) bit matrix; returns (B, Z) bits."""
    payloads = np.asarray(payloads, dtype=np.uint8)
    if payloads.ndim != 2 or payloads.shape[1] == 0:
        raise ValueError(f"payload matrix must be (B, >=1), got {payloads.shape}")
    z = spec.degree
    padded = np.concatenate(
        [payloads, np.zeros((payloads.shape[0], z), dtype=np.uint8)], axis=1
    )
    return _register_to_bits(_remainders(padded, spec), z)


def crc_check(word, spec: CRCSpec) -> bool:
    """True iff word(x) is divisible by g(x), i.e. the CRC tail is consistent."""
    word = _as_bits(word, "word")
    if word.size < spec.degree + 1:
        raise ValueError(
            f"word of length {word.size} too short for a degree-{spec.degree} CRC"
        )
    return bool(crc_check_many(word[None, :], spec)[0])


def crc_check_many(words: np.ndarray, spec: CRCSpec) -> np.ndarray:
    """Row-wise crc_check on a (B, K) bit matrix; returns boolean (B,)."""
    words = np.asarray(words, dtype=np.uint8)
    if words.ndim != 2 or words.shape[1] < spec.degree + 1:
        raise ValueError(f"word matrix must be (B, >={spec.degree + 1}), got {words.shape}")
    return _remainders(words, spec) == 0


def attach_crc(payload, spec: CRCSpec) -> MessageWord:
    """Append the CRC tail: returns payload || crc_compute(payload)."""
    payload = _as_bits(payload, "payload")
    if payload.size == 0:
        raise ValueError("payload must be non-empty")
    word = np.concatenate([payload, crc_compute(payload, spec)])
    return MessageWord(word, layout=PAYLOAD_CRC)


def attach_crc_many(payloads: np.ndarray, spec: CRCSpec) -> np.ndarray:
    """Row-wise attach_crc; returns the (B, K) bit matrix of full words."""
    payloads = np.asarray(payloads, dtype=np.uint8)
    return np.concatenate([payloads, crc_compute_many(payloads, spec)], axis=1)

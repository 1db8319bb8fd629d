"""Fixed random permutation of the message positions and its inverse.

A permutation maps output position i to input position mapping[i]; it is
generated once per model, kept fixed through training and testing, and
serialized in the checkpoint as the explicit index vector.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class Permutation:
    """Bijection on {0..K-1} stored as an explicit index vector."""

    mapping: np.ndarray
    seed: int | None = None
    inverse: np.ndarray = field(init=False)

    def __post_init__(self):
        mapping = np.asarray(self.mapping, dtype=np.int64)
        if mapping.ndim != 1 or mapping.shape[0] < 2:
            raise ValueError(f"mapping must be a 1-D index vector of length >= 2")
        if not np.array_equal(np.sort(mapping), np.arange(mapping.shape[0])):
            raise ValueError("mapping is not a bijection on {0..K-1}")
        self.mapping = mapping
        inverse = np.empty_like(mapping)
        inverse[mapping] = np.arange(mapping.shape[0])
        self.inverse = inverse

    @property
    def size(self) -> int:
        return self.mapping.shape[0]


def generate(k: int, seed: int) -> Permutation:
    """Uniformly random permutation of size k, deterministic in the seed."""
    if k < 2:
        raise ValueError(f"permutation size must be >= 2, got {k}")
    mapping = np.random.default_rng(seed).permutation(k)
    return Permutation(mapping, seed=int(seed))


def _apply(x, indices: np.ndarray):
    x = np.asarray(x)
    if x.shape[0] != indices.shape[0]:
        raise ValueError(
            f"leading dimension {x.shape[0]} does not match permutation size {indices.shape[0]}"
        )
    return x[indices]


def permute(x, p: Permutation):
    """Reorder along the leading axis: out[i] = x[p.mapping[i]].

    Works on length-K vectors and on K x L matrices (every column is
    permuted identically).
    """
    return _apply(x, p.mapping)


def inverse_permute(x, p: Permutation):
    """Inverse reordering, so inverse_permute(permute(x)) == x."""
    return _apply(x, p.inverse)

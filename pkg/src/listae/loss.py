"""Min-over-list binary cross-entropy training objective.

The list loss of an L x K candidate matrix against the transmitted word is
the smallest per-candidate average BCE. Gradients therefore flow only
through the best candidate row; ties occur with probability zero under
continuous perturbations and are broken toward the lowest index.

All computation is done in float64 regardless of the input dtype so that
the clamp epsilon (default 1e-12) is representable; float32 inputs are
upcast inside the autograd graph.
"""

from typing import NamedTuple

import numpy as np
import torch

CLAMP_EPS = 1e-12


class LossValue(NamedTuple):
    value: torch.Tensor  # 0-dim float64 tensor
    argmin: int  # row index of the best candidate


def _as_candidates(candidates, rows: int) -> torch.Tensor:
    c = torch.as_tensor(candidates)
    if c.ndim != rows:
        raise ValueError(f"expected a {rows}-D candidate array, got shape {tuple(c.shape)}")
    return c.double()


def _as_targets(bits, dims: int) -> torch.Tensor:
    t = torch.as_tensor(np.asarray(bits))
    if t.ndim != dims:
        raise ValueError(f"expected a {dims}-D bit array, got shape {tuple(t.shape)}")
    return t.double()


def _row_bce(candidates: torch.Tensor, targets: torch.Tensor, eps: float) -> torch.Tensor:
    """Average BCE along the last axis; candidates clamped to [eps, 1-eps]."""
    c = candidates.clamp(eps, 1.0 - eps)
    return -(targets * c.log() + (1.0 - targets) * (1.0 - c).log()).mean(dim=-1)


def bce_avg(candidate, target_bits, eps: float = CLAMP_EPS) -> torch.Tensor:
    """Average binary cross-entropy of one length-K soft candidate."""
    c = _as_candidates(candidate, 1)
    t = _as_targets(target_bits, 1)
    if c.shape != t.shape:
        raise ValueError(f"candidate shape {tuple(c.shape)} != target shape {tuple(t.shape)}")
    return _row_bce(c, t, eps)


def list_loss(candidates, target_bits, eps: float = CLAMP_EPS) -> LossValue:
    """Minimum average BCE over the L candidate rows, with the argmin index."""
    c = _as_candidates(candidates, 2)
    if c.shape[0] < 1:
        raise ValueError("candidate list is empty")
    t = _as_targets(target_bits, 1)
    if c.shape[1] != t.shape[0]:
        raise ValueError(f"candidate width {c.shape[1]} != target length {t.shape[0]}")
    losses = _row_bce(c, t[None, :], eps)
    idx = int(np.argmin(losses.detach().numpy()))  # first minimum wins at ties
    return LossValue(losses[idx], idx)


def batch_list_loss(candidates, target_bits, eps: float = CLAMP_EPS) -> torch.Tensor:
    """Mean per-example list loss over a (B, L, K) batch against (B, K) bits."""
    c = _as_candidates(candidates, 3)
    t = _as_targets(target_bits, 2)
    if c.shape[0] != t.shape[0]:
        raise ValueError(f"candidate batch {c.shape[0]} != target batch {t.shape[0]}")
    if c.shape[2] != t.shape[1]:
        raise ValueError(f"candidate width {c.shape[2]} != target length {t.shape[1]}")
    losses = _row_bce(c, t[:, None, :], eps)  # (B, L)
    idx = torch.from_numpy(np.argmin(losses.detach().numpy(), axis=1))
    return losses.gather(1, idx[:, None]).mean()

"""Single-file checkpoint archive for trained codecs.

Layout (numpy .npz, no pickling): a "meta" JSON string with the format
version, architecture config, seeds, normalization statistics and a
training-history summary; an "interleaver" int64 index vector; a
float64 "norm" pair [mu, gamma]; and one float32 array per trainable
parameter under "param::<name>". Weights round-trip bit-exactly.
"""

import io
import json
from dataclasses import dataclass

import numpy as np
import torch

from .codec import CodecConfig, ListAE, NormStats
from .interleaver import Permutation

FORMAT_VERSION = 1


@dataclass
class CheckpointBundle:
    codec: ListAE
    norm_stats: NormStats
    meta: dict


def save_checkpoint(path, codec: ListAE, norm_stats: NormStats, meta: dict | None = None) -> None:
    """Write codec weights, interleaver, and normalization stats to path."""
    meta = dict(meta or {})
    meta["format_version"] = FORMAT_VERSION
    meta["codec"] = codec.cfg.to_dict()
    meta["norm_stats"] = {"mu": norm_stats.mu, "gamma": norm_stats.gamma}
    if codec.permutation.seed is not None:
        meta.setdefault("interleaver_seed", codec.permutation.seed)
    arrays = {
        "meta": np.asarray(json.dumps(meta, sort_keys=True)),
        "interleaver": codec.permutation.mapping,
        "norm": np.asarray([norm_stats.mu, norm_stats.gamma], dtype=np.float64),
    }
    for name, tensor in codec.state_dict().items():
        arrays["param::" + name] = tensor.detach().cpu().numpy().astype(np.float32)
    buf = io.BytesIO()
    np.savez_compressed(buf, **arrays)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_checkpoint(path) -> CheckpointBundle:
    """Rebuild the codec from a checkpoint written by save_checkpoint."""
    with np.load(path, allow_pickle=False) as archive:
        meta = json.loads(str(archive["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported checkpoint format {meta.get('format_version')!r}"
            )
        mapping = archive["interleaver"]
        mu, gamma = (float(v) for v in archive["norm"])
        params = {
            name[len("param::"):]: archive[name]
            for name in archive.files
            if name.startswith("param::")
        }
    cfg = CodecConfig(**meta["codec"])
    perm = Permutation(mapping, seed=meta.get("interleaver_seed"))
    with torch.random.fork_rng():  # throwaway init must not disturb global RNG
        codec = ListAE(cfg, perm)
    state = {name: torch.from_numpy(arr.copy()) for name, arr in params.items()}
    codec.load_state_dict(state)
    codec.eval()
    return CheckpointBundle(codec, NormStats(mu=mu, gamma=gamma), meta)

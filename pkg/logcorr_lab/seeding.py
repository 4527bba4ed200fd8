"""Deterministic per-replicate random streams.

Replicate r of experiment E under master seed S draws from
default_rng(SeedSequence(sha256("S:E:r")[:16])). Trials are cut into blocks of
a fixed size and block r only ever sees stream r, so results do not depend on
how many workers evaluate the blocks.
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import List

import numpy as np

logger = logging.getLogger(__name__)


def replicate_entropy(master_seed: int, experiment: str, replicate: int) -> int:
    digest = hashlib.sha256(f"{master_seed}:{experiment}:{replicate}".encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


def replicate_rng(master_seed: int, experiment: str, replicate: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=replicate_entropy(master_seed, experiment, replicate)))


@dataclass(frozen=True)
class Block:
    replicate: int
    size: int


def replicate_blocks(trials: int, block_size: int, first_replicate: int = 0) -> List[Block]:
    """Split `trials` into consecutive blocks numbered from `first_replicate`."""
    if trials < 0:
        raise ValueError(f"trials must be >= 0, got {trials}")
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    blocks = []
    replicate = first_replicate
    for start in range(0, trials, block_size):
        blocks.append(Block(replicate=replicate, size=min(block_size, trials - start)))
        replicate += 1
    return blocks


class ReplicateStreams:
    """Hands out consecutive replicate indices for one run so no two blocks share a stream."""

    def __init__(self, master_seed: int, experiment: str):
        self.master_seed = master_seed
        self.experiment = experiment
        self.next_replicate = 0

    def blocks(self, trials: int, block_size: int) -> List[Block]:
        blocks = replicate_blocks(trials, block_size, self.next_replicate)
        self.next_replicate += len(blocks)
        return blocks

    def rng(self, block: Block) -> np.random.Generator:
        return replicate_rng(self.master_seed, self.experiment, block.replicate)

"""resampling/seeding.py — Per-replicate, scheduling-independent random streams.

A Seed is a 64-bit root plus (experiment, replicate, purpose) labels.  The
stream for a Seed is a Philox counter-based generator keyed by
SeedSequence(entropy=root, spawn_key=(h(experiment), replicate..., h(purpose))),
so replicate r of experiment e draws the same numbers whether it runs first,
last, or on another thread.

Usage
-----
    seed = Seed(root=42, experiment="clt")
    rng  = seed.child(outer, inner).purpose("data").generator()
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from core.errors import InvalidArgumentError

_U64 = 2**64


def label_hash(label: str) -> int:
    """Stable 32-bit digest of a text label (Python's hash() is salted per process)."""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class Seed:
    """Root seed plus stream labels.

    Identical (root, experiment, indices, tag) always yields the identical
    draw sequence.
    """

    root: int
    experiment: str = "default"
    indices: tuple[int, ...] = field(default=())
    tag: str = "main"

    def __post_init__(self) -> None:
        if not (0 <= self.root < _U64):
            raise InvalidArgumentError(f"seed root must be an unsigned 64-bit integer, got {self.root}")
        if any(i < 0 for i in self.indices):
            raise InvalidArgumentError(f"replicate indices must be non-negative, got {self.indices}")

    def child(self, *indices: int) -> "Seed":
        """Append replicate indices (outer, inner, b, ...)."""
        return replace(self, indices=self.indices + tuple(int(i) for i in indices))

    def purpose(self, tag: str) -> "Seed":
        """Same replicate, different purpose ("data", "weights", ...)."""
        return replace(self, tag=tag)

    def for_experiment(self, experiment: str) -> "Seed":
        return replace(self, experiment=experiment, indices=(), tag="main")

    def sequence(self) -> np.random.SeedSequence:
        spawn_key = (label_hash(self.experiment), *self.indices, label_hash(self.tag))
        return np.random.SeedSequence(entropy=self.root, spawn_key=spawn_key)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.sequence()))

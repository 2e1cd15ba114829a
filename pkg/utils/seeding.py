"""
Named random streams derived from one master seed

Each component draws from its own stream so that enabling or disabling one
component never shifts the numbers another component sees.
"""
from typing import Dict

import numpy as np


STREAM_IDS: Dict[str, int] = {
    'init': 0,
    'env': 1,
    'mutation': 2,
    'selection': 3,
    'ou-noise': 4,
    'replay-sampling': 5,
    'champion': 6,
    'rl-env': 7,
    'crossover': 8,
}


class RandomStreams:
    """
    Factory of independent numpy Generators

    A stream is addressed by a name plus an optional integer key
    (generation, member index, ...). The same (seed, name, key) always
    yields the same Generator state.
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"Seed must be non-negative, got {seed}")
        self.seed = int(seed)

    def generator(self, name: str, *key: int) -> np.random.Generator:
        """
        Build the Generator for a named stream

        Args:
            name: One of STREAM_IDS
            *key: Non-negative integers further identifying the draw site

        Returns:
            Fresh numpy Generator
        """
        if name not in STREAM_IDS:
            raise KeyError(f"Unknown random stream: {name}")
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=(STREAM_IDS[name], *[int(k) for k in key])
        )
        return np.random.default_rng(sequence)

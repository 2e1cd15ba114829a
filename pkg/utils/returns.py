"""
Scalar return definitions shared by metrics and tests
"""
from dataclasses import dataclass, field
from typing import List, Sequence, Union

import math


@dataclass
class RewardTrace:
    """Rewards of one episode plus the discount used to fold them"""
    rewards: List[float] = field(default_factory=list)
    gamma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if not all(math.isfinite(r) for r in self.rewards):
            raise ValueError("Reward trace contains non-finite entries")


def discounted_return(trace: RewardTrace, t: int) -> float:
    """
    Discounted return from step t to the end of the episode

    Sum over k >= 0 of gamma^k * r[t + k].

    Raises:
        IndexError: t outside the trace
    """
    if not 0 <= t < len(trace.rewards):
        raise IndexError(f"Step {t} outside trace of length {len(trace.rewards)}")
    total = 0.0
    discount = 1.0
    # Accumulate front to back so gamma=1 reproduces episode_fitness bit for bit
    for reward in trace.rewards[t:]:
        total += discount * reward
        discount *= trace.gamma
    return total


def episode_fitness(trace: Union[RewardTrace, Sequence[float]]) -> float:
    """Undiscounted episode-total reward (the EA fitness signal)"""
    rewards = trace.rewards if isinstance(trace, RewardTrace) else trace
    total = 0.0
    for reward in rewards:
        total += reward
    return total

"""
Ornstein-Uhlenbeck exploration noise

Discrete-time process with unit step:
    x <- x + theta * (mu - x) + sigma * N(0, 1)
"""
from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class OUProcess:
    """
    Temporally correlated action noise

    Attributes:
        mu: Long-run mean
        theta: Mean-reversion rate
        sigma: Noise scale
        state: Current value, one entry per action dimension
    """
    action_dim: int
    mu: float = 0.0
    theta: float = 0.15
    sigma: float = 0.2
    state: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.state is None:
            self.reset()

    def reset(self):
        """Return to mu; called at the start of every episode"""
        self.state = np.full(self.action_dim, self.mu, dtype=np.float64)


def ou_sample(proc: OUProcess, rng: np.random.Generator) -> np.ndarray:
    """Advance the process one step and return the new state (a copy)"""
    proc.state = proc.state + proc.theta * (proc.mu - proc.state) \
        + proc.sigma * rng.standard_normal(proc.action_dim)
    return proc.state.copy()

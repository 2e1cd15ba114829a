"""
Base environment class - unified interface for all episodic tasks
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.errors import InputError


@dataclass(frozen=True)
class EnvSpec:
    """Shape and bounds metadata of an environment"""
    state_dim: int
    action_dim: int
    action_low: Tuple[float, ...]
    action_high: Tuple[float, ...]
    max_episode_steps: int

    def __post_init__(self):
        object.__setattr__(self, 'action_low', tuple(float(x) for x in self.action_low))
        object.__setattr__(self, 'action_high', tuple(float(x) for x in self.action_high))
        if self.state_dim < 1 or self.action_dim < 1:
            raise InputError("state_dim and action_dim must be >= 1")
        if len(self.action_low) != self.action_dim or len(self.action_high) != self.action_dim:
            raise InputError("Action bounds must have action_dim entries")
        if any(lo >= hi for lo, hi in zip(self.action_low, self.action_high)):
            raise InputError("action_low must be below action_high elementwise")
        if self.max_episode_steps < 1:
            raise InputError("max_episode_steps must be >= 1")


@dataclass(frozen=True)
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool


@dataclass(frozen=True, eq=False)
class Transition:
    """One (s, a, r, s', done) experience tuple; actions are in policy space [-1, 1]"""
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool


class BaseEnvironment(ABC):
    """
    Abstract base class for all environments

    All environments (Pendulum, sparse wrappers, ...) must inherit from this
    class and implement the required methods. Instances are single-owner:
    parallel evaluation creates one instance per worker.
    """

    def __init__(self, env_name: str):
        """
        Initialize environment

        Args:
            env_name: Registry name of this environment (e.g. 'pendulum')
        """
        self.env_name = env_name

    @property
    @abstractmethod
    def spec(self) -> EnvSpec:
        """Shape and bounds metadata"""

    @abstractmethod
    def reset(self, rng: np.random.Generator) -> np.ndarray:
        """
        Start a new episode

        Args:
            rng: Generator for the initial-state distribution

        Returns:
            Initial observation of length spec.state_dim
        """

    @abstractmethod
    def step(self, action: np.ndarray) -> StepResult:
        """
        Advance one tick

        Args:
            action: Action in env units, within [action_low, action_high]

        Returns:
            StepResult; done is True at the last step of the episode

        Raises:
            UsageError: step called before reset or after done
        """

    def scale_action(self, policy_action: np.ndarray) -> np.ndarray:
        """
        Map a policy-space action in [-1, 1] onto [action_low, action_high]

        Args:
            policy_action: Actor output (possibly noisy)

        Returns:
            Clipped action in env units
        """
        low = np.asarray(self.spec.action_low)
        high = np.asarray(self.spec.action_high)
        clipped = np.clip(np.asarray(policy_action, dtype=np.float64), -1.0, 1.0)
        return low + (clipped + 1.0) * 0.5 * (high - low)

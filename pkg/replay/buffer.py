"""
Cyclic replay buffer shared by the population and the RL learner
"""
from dataclasses import dataclass
from typing import Iterable, Iterator, List

import numpy as np

from environments.base_env import Transition
from utils.errors import InputError, StateError


@dataclass(eq=False)
class TransitionBatch:
    """Minibatch of transitions as stacked arrays; iterates as Transition objects"""
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, i: int) -> Transition:
        return Transition(self.states[i], self.actions[i], float(self.rewards[i]),
                          self.next_states[i], bool(self.dones[i]))

    def __iter__(self) -> Iterator[Transition]:
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_transitions(cls, transitions: List[Transition]) -> 'TransitionBatch':
        if not transitions:
            raise InputError("Cannot build an empty batch")
        return cls(
            states=np.stack([t.state for t in transitions]).astype(np.float64),
            actions=np.stack([t.action for t in transitions]).astype(np.float64),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            next_states=np.stack([t.next_state for t in transitions]).astype(np.float64),
            dones=np.array([t.done for t in transitions], dtype=bool),
        )


class ReplayBuffer:
    """
    Fixed-capacity ring of transitions

    Once full, each push overwrites the oldest entry. Arrays are
    preallocated so pushes never allocate.
    """

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise InputError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.state_dim = state_dim
        self.action_dim = action_dim

        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity, dtype=bool)

        self.write_cursor = 0
        self.size = 0
        self.total_pushed = 0

    def __len__(self) -> int:
        return self.size

    def push(self, t: Transition):
        """
        Append one transition, overwriting the oldest when full

        Raises:
            InputError: state/action widths differ from the buffer's
        """
        state = np.asarray(t.state, dtype=np.float64).reshape(-1)
        next_state = np.asarray(t.next_state, dtype=np.float64).reshape(-1)
        action = np.asarray(t.action, dtype=np.float64).reshape(-1)
        if state.shape[0] != self.state_dim or next_state.shape[0] != self.state_dim:
            raise InputError(f"Transition state width {state.shape[0]} != buffer state_dim {self.state_dim}")
        if action.shape[0] != self.action_dim:
            raise InputError(f"Transition action width {action.shape[0]} != buffer action_dim {self.action_dim}")

        idx = self.write_cursor
        self.states[idx] = state
        self.actions[idx] = action
        self.rewards[idx] = t.reward
        self.next_states[idx] = next_state
        self.dones[idx] = t.done

        self.write_cursor = (idx + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.total_pushed += 1

    def extend(self, transitions: Iterable[Transition]):
        for t in transitions:
            self.push(t)

    def sample(self, batch_size: int, rng: np.random.Generator) -> TransitionBatch:
        """
        Uniform minibatch drawn with replacement

        Raises:
            StateError: buffer is empty
        """
        if self.size == 0:
            raise StateError("Cannot sample from an empty replay buffer")
        if batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {batch_size}")
        indices = rng.integers(0, self.size, size=batch_size)
        return TransitionBatch(
            states=self.states[indices],
            actions=self.actions[indices],
            rewards=self.rewards[indices],
            next_states=self.next_states[indices],
            dones=self.dones[indices],
        )

    def contents(self) -> List[Transition]:
        """Stored transitions, oldest first"""
        start = self.write_cursor if self.size == self.capacity else 0
        order = [(start + i) % self.capacity for i in range(self.size)]
        return [
            Transition(self.states[i].copy(), self.actions[i].copy(), float(self.rewards[i]),
                       self.next_states[i].copy(), bool(self.dones[i]))
            for i in order
        ]


class TransitionLog(list):
    """Plain list with push(); collects a worker's transitions before they are merged"""

    def push(self, t: Transition):
        self.append(t)

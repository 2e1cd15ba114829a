"""
Single pendulum swing-up

State (cos th, sin th, th_dot); th = 0 is upright. One scalar torque in
[-2, 2]. Semi-implicit Euler integration, fixed 200-step horizon, no early
termination.
"""
from typing import Optional

import numpy as np

from environments.base_env import BaseEnvironment, EnvSpec, StepResult
from utils.errors import InputError, UsageError


def angle_normalize(x: float) -> float:
    """Wrap an angle into [-pi, pi)"""
    return ((x + np.pi) % (2 * np.pi)) - np.pi


class Pendulum(BaseEnvironment):
    """
    Dense-reward pendulum swing-up

    Dynamics: th_ddot = 3g/(2l) * sin(th) + 3/(m l^2) * a
    Reward:   -(angle_normalize(th)^2 + 0.1 * th_dot^2 + 0.001 * a^2)
    """

    GRAVITY = 10.0
    MASS = 1.0
    LENGTH = 1.0
    DT = 0.05
    MAX_SPEED = 8.0
    MAX_TORQUE = 2.0
    EPISODE_STEPS = 200

    def __init__(self, max_episode_steps: int = EPISODE_STEPS):
        super().__init__('pendulum')
        self._spec = EnvSpec(
            state_dim=3,
            action_dim=1,
            action_low=(-self.MAX_TORQUE,),
            action_high=(self.MAX_TORQUE,),
            max_episode_steps=max_episode_steps,
        )
        self.theta: Optional[float] = None
        self.theta_dot: Optional[float] = None
        self.steps = 0
        self.done = True

    @property
    def spec(self) -> EnvSpec:
        return self._spec

    def _observe(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta), self.theta_dot])

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        """theta ~ U[-pi, pi], theta_dot ~ U[-1, 1]"""
        self.theta = float(rng.uniform(-np.pi, np.pi))
        self.theta_dot = float(rng.uniform(-1.0, 1.0))
        self.steps = 0
        self.done = False
        return self._observe()

    def set_state(self, theta: float, theta_dot: float) -> np.ndarray:
        """Start an episode from an exact state (used by tests and analysis)"""
        self.theta = float(theta)
        self.theta_dot = float(np.clip(theta_dot, -self.MAX_SPEED, self.MAX_SPEED))
        self.steps = 0
        self.done = False
        return self._observe()

    def step(self, action: np.ndarray) -> StepResult:
        if self.done:
            raise UsageError("step() called on a finished episode; call reset() first")
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.shape != (1,):
            raise InputError(f"Pendulum expects a single torque, got shape {action.shape}")
        torque = float(np.clip(action[0], -self.MAX_TORQUE, self.MAX_TORQUE))

        th, th_dot = self.theta, self.theta_dot
        reward = -(angle_normalize(th) ** 2 + 0.1 * th_dot ** 2 + 0.001 * torque ** 2)

        th_ddot = (3 * self.GRAVITY / (2 * self.LENGTH)) * np.sin(th) \
            + (3.0 / (self.MASS * self.LENGTH ** 2)) * torque
        new_th_dot = float(np.clip(th_dot + th_ddot * self.DT, -self.MAX_SPEED, self.MAX_SPEED))
        self.theta = float(th + new_th_dot * self.DT)
        self.theta_dot = new_th_dot

        self.steps += 1
        self.done = self.steps >= self.spec.max_episode_steps
        return StepResult(self._observe(), float(reward), self.done)

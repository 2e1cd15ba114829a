"""
Delayed-reward wrapper

The wrapped environment pays 0 on every step except the last, where the
cumulative reward of the whole episode is disbursed at once. Dynamics and
spec are untouched, so an episode-total fitness is identical on both.
"""
import numpy as np

from environments.base_env import BaseEnvironment, EnvSpec, StepResult


class SparseRewardWrapper(BaseEnvironment):
    """Withhold reward until the terminal step"""

    def __init__(self, env: BaseEnvironment):
        super().__init__(f"sparse-{env.env_name}")
        self.env = env
        self._accumulated = 0.0

    @property
    def spec(self) -> EnvSpec:
        return self.env.spec

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._accumulated = 0.0
        return self.env.reset(rng)

    def set_state(self, *args, **kwargs) -> np.ndarray:
        self._accumulated = 0.0
        return self.env.set_state(*args, **kwargs)

    def step(self, action: np.ndarray) -> StepResult:
        result = self.env.step(action)
        self._accumulated += result.reward
        reward = self._accumulated if result.done else 0.0
        return StepResult(result.next_state, reward, result.done)


def wrap_sparse(env: BaseEnvironment) -> BaseEnvironment:
    return SparseRewardWrapper(env)

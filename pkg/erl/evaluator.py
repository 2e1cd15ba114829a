"""
Episode rollouts: fitness evaluation and champion testing
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ddpg.noise import OUProcess, ou_sample
from environments.base_env import BaseEnvironment, Transition
from evolution.population import Population
from neural.network import Parameters, forward_actor
from utils.errors import InputError
from utils.returns import episode_fitness


@dataclass
class FitnessRecord:
    """Outcome of evaluating one actor over xi episodes"""
    index: int
    fitness: float
    steps_consumed: int
    episode_returns: List[float] = field(default_factory=list)


def run_episode(actor: Parameters, env: BaseEnvironment, rng: np.random.Generator,
                buffer=None, noise: Optional[OUProcess] = None,
                noise_rng: Optional[np.random.Generator] = None) -> Tuple[float, int]:
    """
    Play one full episode

    Args:
        actor: Policy parameters
        env: Environment (reset here)
        rng: Generator for the initial state
        buffer: Anything with push(Transition); None stores nothing
        noise: OU process added to the policy output
        noise_rng: Generator for the noise (defaults to rng)

    Returns:
        (episode-total reward, steps taken)
    """
    state = env.reset(rng)
    if noise is not None:
        noise.reset()
    rewards = []
    done = False
    while not done:
        action = forward_actor(actor, state)
        if noise is not None:
            action = action + ou_sample(noise, noise_rng if noise_rng is not None else rng)
        action = np.clip(action, -1.0, 1.0)
        result = env.step(env.scale_action(action))
        if buffer is not None:
            buffer.push(Transition(state, action, result.reward, result.next_state, result.done))
        rewards.append(result.reward)
        state = result.next_state
        done = result.done
    return episode_fitness(rewards), len(rewards)


def evaluate(actor: Parameters, env: BaseEnvironment, buffer, noise: Optional[OUProcess] = None,
             xi: int = 1, rng: Optional[np.random.Generator] = None, index: int = 0,
             noise_rng: Optional[np.random.Generator] = None) -> FitnessRecord:
    """
    Fitness of one actor: mean episode-total reward over xi episodes

    Every transition is pushed to buffer.
    """
    if xi < 1:
        raise InputError(f"xi must be >= 1, got {xi}")
    rng = rng if rng is not None else np.random.default_rng()
    returns = []
    steps = 0
    for _ in range(xi):
        total, length = run_episode(actor, env, rng, buffer, noise, noise_rng)
        returns.append(total)
        steps += length
    return FitnessRecord(index, episode_fitness(returns) / xi, steps, returns)


def champion_index(pop: Population) -> int:
    """Highest-fitness member, lowest index on ties"""
    fitness = pop.fitnesses()
    return min(range(pop.k), key=lambda i: (-fitness[i], i))


def champion_eval(pop: Optional[Population], rl_actor: Parameters, env: BaseEnvironment,
                  rng: np.random.Generator, episodes: int = 5) -> float:
    """
    Noiseless test score of the current champion

    The champion is the best population member, or rl_actor when there is no
    population. Nothing is stored and no steps are counted.
    """
    actor = pop[champion_index(pop)].params if pop is not None and pop.k else rl_actor
    returns = [run_episode(actor, env, rng)[0] for _ in range(episodes)]
    return episode_fitness(returns) / episodes

"""
Environment registry

Environments are selected by name in the experiment config. Each entry maps
to a factory so parallel evaluation can build one instance per worker.
"""
from typing import Callable, Dict, List

from loguru import logger

from environments.base_env import BaseEnvironment
from environments.pendulum import Pendulum
from environments.sparse import wrap_sparse
from utils.errors import InputError


ENVIRONMENTS: Dict[str, Dict] = {
    'pendulum': {
        'name': 'Pendulum swing-up',
        'factory': lambda: Pendulum(),
        'description': 'Dense reward every step',
    },
    'sparse-pendulum': {
        'name': 'Sparse pendulum swing-up',
        'factory': lambda: wrap_sparse(Pendulum()),
        'description': 'Episode reward disbursed only on the final step',
    },
}


def available_environments() -> List[str]:
    """Get list of registered environment names"""
    return list(ENVIRONMENTS.keys())


def env_factory(name: str) -> Callable[[], BaseEnvironment]:
    """
    Look up the factory for a registered environment

    Raises:
        InputError: unknown environment name
    """
    entry = ENVIRONMENTS.get(name)
    if entry is None:
        raise InputError(f"Unknown environment '{name}', expected one of {available_environments()}")
    return entry['factory']


def make_env(name: str) -> BaseEnvironment:
    env = env_factory(name)()
    logger.debug(f"Created environment {name}: {env.spec}")
    return env

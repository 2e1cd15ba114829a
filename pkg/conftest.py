import hypothesis
import numpy as np
import pytest

from neural.network import NetworkSpec, actor_spec, critic_spec, init_network

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile("fast")


@pytest.fixture
def small_actor_spec() -> NetworkSpec:
    return actor_spec(3, 1, hidden=(8, 6))


@pytest.fixture
def small_critic_spec() -> NetworkSpec:
    return critic_spec(3, 1, split_widths=(5, 3), hidden=(6,))


@pytest.fixture
def small_actor(small_actor_spec):
    return init_network(small_actor_spec, np.random.default_rng(11))


@pytest.fixture
def small_critic(small_critic_spec):
    return init_network(small_critic_spec, np.random.default_rng(12))

"""
DDPG learner

Actor/critic pair with slowly tracking target copies. The critic minimizes
the mean squared TD error against bootstrapped targets; the actor ascends
the sampled deterministic policy gradient dQ/da * dpi/dtheta.
"""
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from config.erl_config import ErlConfig
from neural.network import (
    Parameters, actor_spec, backward, critic_spec, forward, forward_actor,
    forward_critic, init_network,
)
from neural.optim import AdamState, adam_step, soft_update
from replay.buffer import TransitionBatch
from utils.errors import InputError, NumericError


class DdpgLearner:
    """
    Off-policy gradient learner

    Features:
    - Target networks initialized as exact copies of actor and critic
    - Terminal transitions bootstrap nothing (y = r)
    - Separate Adam states with gradient clipping for actor and critic
    """

    def __init__(self, actor: Parameters, critic: Parameters, gamma: float = 0.99,
                 tau: float = 1e-3, actor_lr: float = 5e-5, critic_lr: float = 5e-4,
                 **adam_options):
        """
        Initialize learner

        Args:
            actor: Actor parameters (tanh output)
            critic: Critic parameters (split input, scalar output)
            gamma: Discount in [0, 1]
            tau: Soft target update rate in (0, 1]
            actor_lr: Actor learning rate
            critic_lr: Critic learning rate
            **adam_options: beta1, beta2, eps, clip_norm, clip_mode
        """
        if not 0.0 <= gamma <= 1.0:
            raise InputError(f"gamma must be in [0, 1], got {gamma}")
        if critic.spec.critic_split is None:
            raise InputError("Critic spec must split state and action inputs")
        self.actor = actor
        self.critic = critic
        self.target_actor = actor.copy()
        self.target_critic = critic.copy()
        self.actor_opt = AdamState.for_parameters(actor, actor_lr, **adam_options)
        self.critic_opt = AdamState.for_parameters(critic, critic_lr, **adam_options)
        self.gamma = gamma
        self.tau = tau

    @classmethod
    def from_config(cls, config: ErlConfig, state_dim: int, action_dim: int,
                    actor_rng: np.random.Generator,
                    critic_rng: Optional[np.random.Generator] = None) -> 'DdpgLearner':
        """Build actor and critic from the config's architecture and hyperparameters"""
        net = config.network
        actor = init_network(actor_spec(state_dim, action_dim, net.actor_hidden, net.layer_norm), actor_rng)
        critic = init_network(
            critic_spec(state_dim, action_dim, net.critic_split_widths, net.critic_hidden, net.layer_norm),
            critic_rng or actor_rng,
        )
        return cls(actor, critic, gamma=config.gamma, tau=config.tau,
                   actor_lr=config.actor_lr, critic_lr=config.critic_lr,
                   **config.adam.model_dump())

    def act(self, state: np.ndarray) -> np.ndarray:
        return forward_actor(self.actor, state)

    def compute_targets(self, batch: TransitionBatch) -> np.ndarray:
        """y = r + gamma * Q'(s', pi'(s')) for non-terminal transitions, y = r otherwise"""
        if len(batch) == 0:
            raise InputError("compute_targets needs a non-empty batch")
        next_actions = forward_actor(self.target_actor, batch.next_states)
        q_next = forward_critic(self.target_critic, batch.next_states, next_actions)
        return batch.rewards + self.gamma * np.where(batch.dones, 0.0, q_next)

    def critic_gradient(self, batch: TransitionBatch) -> Tuple[float, np.ndarray]:
        """Mean squared TD error and its gradient w.r.t. the critic parameters"""
        y = self.compute_targets(batch)
        q, cache = forward(self.critic, batch.states, batch.actions)
        td = y - q[:, 0]
        loss = float(np.mean(td * td))
        if not np.isfinite(loss):
            raise NumericError(f"Critic loss is not finite: {loss}")
        grad, _ = backward(self.critic, cache, (-2.0 / len(batch)) * td[:, None])
        return loss, grad

    def critic_update(self, batch: TransitionBatch) -> float:
        """One Adam step on the critic; returns the pre-step loss"""
        loss, grad = self.critic_gradient(batch)
        self.critic, self.critic_opt = adam_step(self.critic, grad, self.critic_opt)
        return loss

    def action_value_gradient(self, states: np.ndarray, actions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Q(s, a) and dQ/da for a batch, through the current critic"""
        q, cache = forward(self.critic, states, actions)
        _, (_, d_action) = backward(self.critic, cache, np.ones_like(q))
        return q[:, 0], d_action

    def actor_gradient(self, batch: TransitionBatch) -> Tuple[float, np.ndarray]:
        """
        Objective -(1/T) * sum Q(s_i, pi(s_i)) and its gradient w.r.t. the actor

        The critic is only read, never updated.
        """
        actions, cache = forward(self.actor, batch.states)
        q, d_action = self.action_value_gradient(batch.states, actions)
        objective = -float(np.mean(q))
        if not np.isfinite(objective):
            raise NumericError(f"Actor objective is not finite: {objective}")
        grad, _ = backward(self.actor, cache, -d_action / len(batch))
        return objective, grad

    def actor_update(self, batch: TransitionBatch) -> float:
        """One Adam step along the sampled policy gradient; returns the pre-step objective"""
        objective, grad = self.actor_gradient(batch)
        self.actor, self.actor_opt = adam_step(self.actor, grad, self.actor_opt)
        return objective

    def update_targets(self):
        self.target_actor = soft_update(self.target_actor, self.actor, self.tau)
        self.target_critic = soft_update(self.target_critic, self.critic, self.tau)

    def train_step(self, batch: TransitionBatch) -> float:
        """Critic update, actor update, target soft-update; returns the critic loss"""
        loss = self.critic_update(batch)
        self.actor_update(batch)
        self.update_targets()
        logger.trace(f"critic loss {loss:.6f}")
        return loss

"""
Experiment configuration

Every hyperparameter of a run lives in one validated ErlConfig. Configs are
JSON files; an empty file yields the defaults listed below (population 10,
gamma 0.99, tau 1e-3, batch 128, actor/critic learning rates 5e-5/5e-4,
mutation 0.9/0.1/0.1, super-mutation and reset 0.05).
"""
from pathlib import Path
from typing import Dict, List, Literal, Union

import json

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from utils.errors import ConfigError


ARMS = ('erl', 'ddpg', 'ea', 'erl-ns')


class MutationParams(BaseModel):
    """Constants of the mutation operator"""
    model_config = ConfigDict(extra='forbid', frozen=True)

    mut_prob: float = Field(0.9, ge=0.0, le=1.0)
    mut_frac: float = Field(0.1, ge=0.0, le=1.0)
    mut_strength: float = Field(0.1, gt=0.0)
    supermut_prob: float = Field(0.05, ge=0.0, le=1.0)
    reset_prob: float = Field(0.05, ge=0.0, le=1.0)
    mode: Literal['proportional_additive', 'literal_multiplicative'] = 'proportional_additive'


class NetworkConfig(BaseModel):
    """Layer widths of the actor and critic"""
    model_config = ConfigDict(extra='forbid', frozen=True)

    actor_hidden: List[int] = Field(default_factory=lambda: [128, 128])
    critic_split_widths: List[int] = Field(default_factory=lambda: [200, 200])
    critic_hidden: List[int] = Field(default_factory=lambda: [300])
    layer_norm: bool = True

    @model_validator(mode='after')
    def _check_widths(self):
        if len(self.critic_split_widths) != 2:
            raise ValueError("critic_split_widths needs exactly two entries")
        if any(w < 1 for w in [*self.actor_hidden, *self.critic_split_widths, *self.critic_hidden]):
            raise ValueError("layer widths must be >= 1")
        return self


class AdamConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    clip_norm: float = Field(10.0, gt=0.0)
    clip_mode: Literal['norm', 'value'] = 'norm'


class OUConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    mu: float = 0.0
    theta: float = Field(0.15, ge=0.0)
    sigma: float = Field(0.2, ge=0.0)


class ErlConfig(BaseModel):
    """
    All hyperparameters of one run

    k, psi, xi and omega are the population size, elite fraction, trials
    per fitness evaluation and synchronization period.
    """
    model_config = ConfigDict(extra='forbid', frozen=True)

    env: str = 'pendulum'
    seed: int = Field(0, ge=0)
    step_budget: int = Field(300_000, ge=1)

    k: int = Field(10, ge=2)
    psi: float = Field(0.1, gt=0.0, lt=1.0)
    xi: int = Field(1, ge=1)
    omega: int = Field(10, ge=1)
    tournament_size: int = Field(3, ge=1)
    selection_mode: Literal['tournament', 'random_ns'] = 'tournament'
    mutation: MutationParams = Field(default_factory=MutationParams)

    gamma: float = Field(0.99, gt=0.0, le=1.0)
    tau: float = Field(1e-3, gt=0.0, le=1.0)
    batch_size: int = Field(128, ge=1)
    buffer_capacity: int = Field(100_000, ge=1)
    actor_lr: float = Field(5e-5, gt=0.0)
    critic_lr: float = Field(5e-4, gt=0.0)
    update_ratio: float = Field(1.0, ge=0.0)
    update_mode: Literal['per_step', 'literal'] = 'per_step'
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    adam: AdamConfig = Field(default_factory=AdamConfig)
    ou: OUConfig = Field(default_factory=OUConfig)

    sync_enabled: bool = True
    population_enabled: bool = True

    champion_episodes: int = Field(5, ge=1)
    solve_threshold: float = -200.0
    eval_workers: int = Field(1, ge=1)

    @model_validator(mode='after')
    def _check_batch(self):
        if self.batch_size > self.buffer_capacity:
            raise ValueError("batch_size must not exceed buffer_capacity")
        return self

    @property
    def learner_enabled(self) -> bool:
        """The RL actor only runs when it can update or reach the population"""
        return self.update_ratio > 0 or (self.sync_enabled and self.population_enabled)


# Elite fraction, trials and sync period used for the Mujoco benchmarks
TASK_PRESETS: Dict[str, Dict] = {
    'halfcheetah': {'psi': 0.1, 'xi': 1, 'omega': 10},
    'swimmer': {'psi': 0.1, 'xi': 1, 'omega': 10},
    'reacher': {'psi': 0.2, 'xi': 5, 'omega': 10},
    'ant': {'psi': 0.3, 'xi': 1, 'omega': 1},
    'hopper': {'psi': 0.3, 'xi': 5, 'omega': 1},
    'walker2d': {'psi': 0.2, 'xi': 3, 'omega': 10},
}


def _error_key(exc: ValidationError) -> str:
    first = exc.errors()[0]
    return '.'.join(str(part) for part in first['loc']) or '<root>'


def build_config(data: Dict) -> ErlConfig:
    """
    Validate a raw mapping into an ErlConfig

    Raises:
        ConfigError: naming the first offending key
    """
    try:
        return ErlConfig.model_validate(data)
    except ValidationError as e:
        key = _error_key(e)
        raise ConfigError(f"Invalid config key '{key}': {e.errors()[0]['msg']}", key=key) from e


def load_config(path: Union[str, Path]) -> ErlConfig:
    """
    Load and validate a JSON config file

    An empty file gives the full default config.

    Raises:
        ConfigError: missing file, bad JSON, unknown key or out-of-range value
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}", key='<file>')
    text = path.read_text(encoding='utf-8').strip()
    if not text:
        return ErlConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}", key='<file>') from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object", key='<root>')
    return build_config(data)


def save_config(config: ErlConfig, path: Union[str, Path]):
    """Write a config as JSON; load_config(path) returns an equal config"""
    Path(path).write_text(json.dumps(config.model_dump(mode='json'), indent=2), encoding='utf-8')


def apply_preset(config: ErlConfig, preset: str) -> ErlConfig:
    """Overlay one of TASK_PRESETS on a config"""
    if preset not in TASK_PRESETS:
        raise ConfigError(f"Unknown preset '{preset}', expected one of {list(TASK_PRESETS)}", key='preset')
    return build_config({**config.model_dump(), **TASK_PRESETS[preset]})


def apply_arm(config: ErlConfig, arm: str) -> ErlConfig:
    """
    Specialize a config to one algorithm arm

    - erl: unchanged
    - erl-ns: selection operator replaced by uniform random choice
    - ddpg: population disabled, learner only
    - ea: no gradient updates and no synchronization
    """
    if arm not in ARMS:
        raise ConfigError(f"Unknown algorithm arm '{arm}', expected one of {list(ARMS)}", key='algo')
    overrides = {
        'erl': {},
        'erl-ns': {'selection_mode': 'random_ns'},
        'ddpg': {'population_enabled': False},
        'ea': {'update_ratio': 0.0, 'sync_enabled': False},
    }[arm]
    return build_config({**config.model_dump(), **overrides})

"""
Adam with gradient clipping, and soft target updates
"""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from neural.network import Parameters, require_congruent, require_finite
from utils.errors import InputError, NumericError


CLIP_MODES = ('norm', 'value')


@dataclass(eq=False)
class AdamState:
    """
    Optimizer state for one Parameters vector

    Attributes:
        first_moment: Running mean of gradients
        second_moment: Running mean of squared gradients
        step_count: Updates applied so far
        learning_rate: Step size
        clip_norm: Threshold for gradient clipping
        clip_mode: 'norm' (global L2 norm) or 'value' (elementwise)
    """
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    learning_rate: float = 1e-3
    clip_norm: float = 10.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_mode: str = 'norm'

    def __post_init__(self):
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            raise InputError("learning_rate and clip_norm must be positive")
        if self.clip_mode not in CLIP_MODES:
            raise InputError(f"Unknown clip mode: {self.clip_mode}")

    @classmethod
    def for_parameters(cls, p: Parameters, learning_rate: float, **kwargs) -> 'AdamState':
        """Fresh state with zero moments congruent with p"""
        return cls(np.zeros_like(p.values), np.zeros_like(p.values),
                   learning_rate=learning_rate, **kwargs)


def clip_gradient(grad: np.ndarray, clip_norm: float, mode: str = 'norm') -> np.ndarray:
    """Clip by global L2 norm (default) or elementwise by value"""
    if mode == 'value':
        return np.clip(grad, -clip_norm, clip_norm)
    norm = float(np.linalg.norm(grad))
    if norm > clip_norm:
        return grad * (clip_norm / norm)
    return grad


def adam_step(p: Parameters, grad: np.ndarray, opt: AdamState) -> Tuple[Parameters, AdamState]:
    """
    One clipped Adam descent step

    Returns new Parameters and AdamState; the inputs are not modified.

    Raises:
        InputError: grad not congruent with p
        NumericError: non-finite gradient or update
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != p.values.shape or opt.first_moment.shape != p.values.shape:
        raise InputError(f"Gradient shape {grad.shape} does not match parameters {p.values.shape}")
    require_finite(grad, "gradient")

    g = clip_gradient(grad, opt.clip_norm, opt.clip_mode)
    step = opt.step_count + 1
    m = opt.beta1 * opt.first_moment + (1.0 - opt.beta1) * g
    v = opt.beta2 * opt.second_moment + (1.0 - opt.beta2) * g * g
    m_hat = m / (1.0 - opt.beta1 ** step)
    v_hat = v / (1.0 - opt.beta2 ** step)
    values = p.values - opt.learning_rate * m_hat / (np.sqrt(v_hat) + opt.eps)
    if not np.all(np.isfinite(values)):
        raise NumericError("Adam update produced non-finite parameters")

    return p.with_values(values), replace(opt, first_moment=m, second_moment=v, step_count=step)


def soft_update(target: Parameters, source: Parameters, tau: float) -> Parameters:
    """target <- tau * source + (1 - tau) * target, as a new Parameters"""
    require_congruent(target, source)
    if not 0.0 < tau <= 1.0:
        raise InputError(f"tau must be in (0, 1], got {tau}")
    if tau == 1.0:
        return source.copy()
    return target.with_values(tau * source.values + (1.0 - tau) * target.values)

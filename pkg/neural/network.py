"""
Feed-forward networks stored as one flat parameter vector

Two topologies are supported:
- actor: state -> [linear -> layer norm -> tanh]* -> linear -> tanh
- critic: state and action each feed their own sub-layer, the two
  sub-layers are concatenated into the first hidden layer, then
  [linear -> layer norm -> elu]* -> linear (identity)

Weight matrices are stored (fan_out, fan_in) so that row r holds the
incoming weights of neuron r.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import json
import numpy as np

from utils.errors import InputError, NumericError


LN_EPS = 1e-5

ACTIVATIONS = ('tanh', 'elu')
OUTPUT_ACTIVATIONS = ('tanh', 'identity')


@dataclass(frozen=True)
class NetworkSpec:
    """
    Shape description of one network

    Args:
        input_dim: Total input width (state_dim + action_dim for a critic)
        hidden_dims: Widths of the hidden layers
        output_dim: Output width
        activation: Hidden activation ('tanh' or 'elu')
        output_activation: 'tanh' for actors, 'identity' for critics
        layer_norm: Normalize each hidden pre-activation
        critic_split: (state_dim, action_dim) when state and action feed
            separate sub-layers that form the first hidden layer
        split_widths: Widths of the two sub-layers; defaults to halves of
            hidden_dims[0]
    """
    input_dim: int
    hidden_dims: Tuple[int, ...]
    output_dim: int
    activation: str = 'tanh'
    output_activation: str = 'tanh'
    layer_norm: bool = True
    critic_split: Optional[Tuple[int, int]] = None
    split_widths: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, 'hidden_dims', tuple(int(h) for h in self.hidden_dims))
        if self.critic_split is not None:
            object.__setattr__(self, 'critic_split', tuple(int(d) for d in self.critic_split))
        if self.split_widths is not None:
            object.__setattr__(self, 'split_widths', tuple(int(w) for w in self.split_widths))

        dims = [self.input_dim, self.output_dim, *self.hidden_dims]
        if any(d < 1 for d in dims):
            raise InputError(f"All network dims must be >= 1, got {dims}")
        if self.activation not in ACTIVATIONS:
            raise InputError(f"Unknown activation: {self.activation}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise InputError(f"Unknown output activation: {self.output_activation}")

        if self.critic_split is None:
            if self.split_widths is not None:
                raise InputError("split_widths given without critic_split")
            return

        if not self.hidden_dims:
            raise InputError("A split network needs at least one hidden layer")
        state_dim, action_dim = self.critic_split
        if state_dim < 1 or action_dim < 1 or state_dim + action_dim != self.input_dim:
            raise InputError(
                f"critic_split {self.critic_split} does not add up to input_dim {self.input_dim}"
            )
        if self.split_widths is None:
            first = self.hidden_dims[0]
            if first < 2:
                raise InputError("First hidden layer too narrow to split")
            object.__setattr__(self, 'split_widths', (first // 2, first - first // 2))
        if min(self.split_widths) < 1 or sum(self.split_widths) != self.hidden_dims[0]:
            raise InputError(
                f"split_widths {self.split_widths} must sum to hidden_dims[0]={self.hidden_dims[0]}"
            )

    def to_dict(self) -> Dict:
        return {
            'input_dim': self.input_dim,
            'hidden_dims': list(self.hidden_dims),
            'output_dim': self.output_dim,
            'activation': self.activation,
            'output_activation': self.output_activation,
            'layer_norm': self.layer_norm,
            'critic_split': list(self.critic_split) if self.critic_split else None,
            'split_widths': list(self.split_widths) if self.split_widths else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'NetworkSpec':
        return cls(**data)


def actor_spec(state_dim: int, action_dim: int, hidden: Sequence[int] = (128, 128),
               layer_norm: bool = True) -> NetworkSpec:
    """Actor topology: tanh hidden layers, tanh output"""
    return NetworkSpec(
        input_dim=state_dim,
        hidden_dims=tuple(hidden),
        output_dim=action_dim,
        activation='tanh',
        output_activation='tanh',
        layer_norm=layer_norm,
    )


def critic_spec(state_dim: int, action_dim: int, split_widths: Sequence[int] = (200, 200),
                hidden: Sequence[int] = (300,), layer_norm: bool = True) -> NetworkSpec:
    """Critic topology: split first layer, elu hidden layers, scalar identity output"""
    split_widths = tuple(split_widths)
    return NetworkSpec(
        input_dim=state_dim + action_dim,
        hidden_dims=(sum(split_widths), *hidden),
        output_dim=1,
        activation='elu',
        output_activation='identity',
        layer_norm=layer_norm,
        critic_split=(state_dim, action_dim),
        split_widths=split_widths,
    )


@dataclass(frozen=True)
class DenseBlock:
    """One weight matrix plus bias feeding neurons [start, start + fan_out) of a layer"""
    weight: str
    bias: str
    fan_out: int
    fan_in: int
    start: int


@dataclass(frozen=True)
class Layer:
    blocks: Tuple[DenseBlock, ...]
    width: int
    hidden: bool
    gain: Optional[str] = None
    shift: Optional[str] = None


Layout = Dict[str, Tuple[int, Tuple[int, ...]]]


@lru_cache(maxsize=None)
def network_layers(spec: NetworkSpec) -> Tuple[Layer, ...]:
    """Ordered layer structure implied by a spec"""
    layers = []
    fan_in = spec.input_dim
    for index, width in enumerate(spec.hidden_dims):
        prefix = f"h{index}"
        if index == 0 and spec.critic_split is not None:
            state_w, action_w = spec.split_widths
            blocks = (
                DenseBlock(f"{prefix}.state.W", f"{prefix}.state.b", state_w, spec.critic_split[0], 0),
                DenseBlock(f"{prefix}.action.W", f"{prefix}.action.b", action_w, spec.critic_split[1], state_w),
            )
        else:
            blocks = (DenseBlock(f"{prefix}.W", f"{prefix}.b", width, fan_in, 0),)
        norm = (f"{prefix}.ln_gain", f"{prefix}.ln_shift") if spec.layer_norm else (None, None)
        layers.append(Layer(blocks, width, True, *norm))
        fan_in = width
    out = DenseBlock("out.W", "out.b", spec.output_dim, fan_in, 0)
    layers.append(Layer((out,), spec.output_dim, False))
    return tuple(layers)


@lru_cache(maxsize=None)
def _layout(spec: NetworkSpec) -> Tuple[Tuple[Tuple[str, int, Tuple[int, ...]], ...], int]:
    entries = []
    offset = 0

    def add(name: str, shape: Tuple[int, ...]):
        nonlocal offset
        entries.append((name, offset, shape))
        offset += int(np.prod(shape))

    for layer in network_layers(spec):
        for block in layer.blocks:
            add(block.weight, (block.fan_out, block.fan_in))
            add(block.bias, (block.fan_out,))
        if layer.gain:
            add(layer.gain, (layer.width,))
            add(layer.shift, (layer.width,))
    return tuple(entries), offset


def build_layout(spec: NetworkSpec) -> Layout:
    """Map each named tensor to (offset, shape) inside the flat vector"""
    entries, _ = _layout(spec)
    return {name: (offset, shape) for name, offset, shape in entries}


def parameter_count(spec: NetworkSpec) -> int:
    return _layout(spec)[1]


@dataclass(eq=False)
class Parameters:
    """
    Flat parameter vector of one network

    Attributes:
        values: 1-D float64 array holding every weight, bias and norm parameter
        spec: Network shape
        layout: name -> (offset, shape) into values
    """
    values: np.ndarray
    spec: NetworkSpec
    layout: Layout = field(repr=False)

    def __post_init__(self):
        expected = parameter_count(self.spec)
        if self.values.ndim != 1 or self.values.shape[0] != expected:
            raise InputError(
                f"Parameter vector has shape {self.values.shape}, spec implies ({expected},)"
            )

    @classmethod
    def from_values(cls, values: np.ndarray, spec: NetworkSpec) -> 'Parameters':
        return cls(np.asarray(values, dtype=np.float64), spec, build_layout(spec))

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def view(self, name: str) -> np.ndarray:
        """Writable shaped view of one named tensor"""
        offset, shape = self.layout[name]
        return self.values[offset:offset + int(np.prod(shape))].reshape(shape)

    def weight_names(self) -> List[str]:
        return [name for name in self.layout if name.endswith('.W')]

    def copy(self) -> 'Parameters':
        return Parameters(self.values.copy(), self.spec, self.layout)

    def with_values(self, values: np.ndarray) -> 'Parameters':
        return Parameters(values, self.spec, self.layout)

    def is_congruent(self, other: 'Parameters') -> bool:
        return self.spec == other.spec

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def require_congruent(a: Parameters, b: Parameters):
    if not a.is_congruent(b):
        raise InputError(f"Parameter layouts differ: {a.spec} vs {b.spec}")


def require_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        raise NumericError(f"Non-finite values in {what}")


def init_network(spec: NetworkSpec, rng: np.random.Generator) -> Parameters:
    """
    Fan-in scaled uniform initialization

    Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0, layer-norm gain 1
    and shift 0. Draws happen in layout order so the result depends only on
    the topology and the generator state.
    """
    params = Parameters(np.zeros(parameter_count(spec)), spec, build_layout(spec))
    for layer in network_layers(spec):
        for block in layer.blocks:
            bound = 1.0 / np.sqrt(block.fan_in)
            params.view(block.weight)[:] = rng.uniform(-bound, bound, size=(block.fan_out, block.fan_in))
        if layer.gain:
            params.view(layer.gain)[:] = 1.0
    return params


def _activate(name: str, u: np.ndarray) -> np.ndarray:
    if name == 'tanh':
        return np.tanh(u)
    if name == 'elu':
        return np.where(u > 0, u, np.expm1(np.minimum(u, 0.0)))
    return u


def _activation_grad(name: str, u: np.ndarray, h: np.ndarray) -> np.ndarray:
    if name == 'tanh':
        return 1.0 - h * h
    if name == 'elu':
        return np.where(u > 0, 1.0, h + 1.0)
    return np.ones_like(u)


@dataclass
class LayerRecord:
    inputs: List[np.ndarray]
    z: np.ndarray
    u: np.ndarray
    h: np.ndarray
    zhat: Optional[np.ndarray] = None
    inv_std: Optional[np.ndarray] = None


@dataclass
class ForwardCache:
    """Intermediate activations recorded by forward() for backward()"""
    records: List[LayerRecord]
    output: np.ndarray
    batched: bool


def _prepare_inputs(spec: NetworkSpec, inputs: Sequence[np.ndarray]) -> Tuple[List[np.ndarray], bool]:
    arrays = [np.asarray(x, dtype=np.float64) for x in inputs]
    if not arrays:
        raise InputError("forward() needs at least one input")
    batched = arrays[0].ndim == 2
    arrays = [np.atleast_2d(x) for x in arrays]
    if any(x.ndim != 2 for x in arrays) or len({x.shape[0] for x in arrays}) != 1:
        raise InputError(f"Inconsistent input shapes: {[x.shape for x in arrays]}")

    if spec.critic_split is not None:
        expected = list(spec.critic_split)
        if len(arrays) != 2 or [x.shape[1] for x in arrays] != expected:
            raise InputError(
                f"Critic expects inputs of widths {expected}, got {[x.shape[1] for x in arrays]}"
            )
        return arrays, batched

    if len(arrays) > 1:
        arrays = [np.concatenate(arrays, axis=1)]
    if arrays[0].shape[1] != spec.input_dim:
        raise InputError(f"Expected input width {spec.input_dim}, got {arrays[0].shape[1]}")
    return arrays, batched


def forward(p: Parameters, *inputs: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Forward pass recording everything backward() needs

    Args:
        p: Network parameters
        *inputs: One array for plain networks, (state, action) for split
            critics. 1-D arrays are treated as a batch of one.

    Returns:
        (output, cache); output is 2-D (batch, output_dim)
    """
    spec = p.spec
    current, batched = _prepare_inputs(spec, inputs)
    records = []

    for layer in network_layers(spec):
        parts = [
            x @ p.view(block.weight).T + p.view(block.bias)
            for block, x in zip(layer.blocks, current)
        ]
        z = parts[0] if len(parts) == 1 else np.concatenate(parts, axis=1)

        if not layer.hidden:
            h = _activate(spec.output_activation, z)
            records.append(LayerRecord(current, z, z, h))
            break

        zhat = inv_std = None
        if layer.gain:
            centered = z - z.mean(axis=1, keepdims=True)
            inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=1, keepdims=True) + LN_EPS)
            zhat = centered * inv_std
            u = zhat * p.view(layer.gain) + p.view(layer.shift)
        else:
            u = z
        h = _activate(spec.activation, u)
        records.append(LayerRecord(current, z, u, h, zhat, inv_std))
        current = [h]

    output = records[-1].h
    return output, ForwardCache(records, output, batched)


def backward(p: Parameters, cache: ForwardCache,
             upstream: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Reverse-mode gradient of sum(upstream * output)

    Args:
        p: Parameters used for the recorded forward pass
        cache: Cache returned by forward()
        upstream: dObjective/dOutput, same number of elements as the output

    Returns:
        (gradient congruent with p.values, gradients w.r.t. each forward input)
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.size != cache.output.size:
        raise InputError(
            f"Upstream gradient has {upstream.size} elements, output has {cache.output.size}"
        )
    spec = p.spec
    grad = np.zeros_like(p.values)
    layers = network_layers(spec)

    def put(name: str, value: np.ndarray):
        offset, shape = p.layout[name]
        grad[offset:offset + value.size] = value.ravel()

    delta = upstream.reshape(cache.output.shape)
    input_grads: List[np.ndarray] = []

    for layer, record in zip(reversed(layers), reversed(cache.records)):
        if not layer.hidden:
            dz = delta * _activation_grad(spec.output_activation, record.z, record.h)
        else:
            du = delta * _activation_grad(spec.activation, record.u, record.h)
            if layer.gain:
                put(layer.gain, (du * record.zhat).sum(axis=0))
                put(layer.shift, du.sum(axis=0))
                dzhat = du * p.view(layer.gain)
                dz = record.inv_std * (
                    dzhat
                    - dzhat.mean(axis=1, keepdims=True)
                    - record.zhat * (dzhat * record.zhat).mean(axis=1, keepdims=True)
                )
            else:
                dz = du

        input_grads = []
        for block, x in zip(layer.blocks, record.inputs):
            dz_block = dz[:, block.start:block.start + block.fan_out]
            put(block.weight, dz_block.T @ x)
            put(block.bias, dz_block.sum(axis=0))
            input_grads.append(dz_block @ p.view(block.weight))
        delta = input_grads[0]

    if not cache.batched:
        input_grads = [g[0] for g in input_grads]
    return grad, input_grads


def forward_actor(p: Parameters, state: np.ndarray) -> np.ndarray:
    """Deterministic policy output in [-1, 1]"""
    if p.spec.output_activation != 'tanh':
        raise InputError("forward_actor needs a tanh output layer")
    out, cache = forward(p, state)
    return out if cache.batched else out[0]


def forward_critic(p: Parameters, state: np.ndarray, action: np.ndarray) -> Union[float, np.ndarray]:
    """Q(s, a); a float for single inputs, a (batch,) array for batches"""
    if p.spec.critic_split is None:
        raise InputError("forward_critic needs a split critic spec")
    out, cache = forward(p, state, action)
    return out[:, 0] if cache.batched else float(out[0, 0])


def save_parameters(p: Parameters, path: Union[str, Path], **extra: Parameters):
    """
    Write parameters (and optional named companions) to a .npz snapshot

    Args:
        p: Main parameters, stored under 'main'
        path: Destination file
        **extra: Further Parameters stored under their keyword
    """
    arrays = {}
    specs = {}
    for key, params in {'main': p, **extra}.items():
        arrays[key] = params.values
        specs[key] = params.spec.to_dict()
    arrays['__specs__'] = np.frombuffer(json.dumps(specs).encode('utf-8'), dtype=np.uint8)
    np.savez(Path(path), **arrays)


def load_parameters(path: Union[str, Path]) -> Dict[str, Parameters]:
    """Read every Parameters stored by save_parameters, keyed by name"""
    with np.load(Path(path)) as data:
        specs = json.loads(bytes(data['__specs__']).decode('utf-8'))
        return {
            key: Parameters.from_values(data[key].copy(), NetworkSpec.from_dict(spec))
            for key, spec in specs.items()
        }

"""
Tests for the network library: layout, forward, backward, Adam and soft updates
"""
import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from neural.network import (
    LN_EPS, NetworkSpec, Parameters, actor_spec, backward, build_layout, critic_spec, forward,
    forward_actor, forward_critic, init_network, load_parameters, parameter_count, save_parameters,
)
from neural.optim import AdamState, adam_step, clip_gradient, soft_update
from utils.errors import InputError, NumericError


TINY = NetworkSpec(input_dim=2, hidden_dims=(4,), output_dim=1)


def _zeros(spec: NetworkSpec) -> Parameters:
    return Parameters.from_values(np.zeros(parameter_count(spec)), spec)


def _layer_norm(z, gain, shift):
    centered = z - z.mean()
    return gain * centered / np.sqrt((centered ** 2).mean() + LN_EPS) + shift


def _elu(x):
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0)))


def _numeric_gradient(f, x, h=1e-5):
    grad = np.zeros_like(x)
    for i in range(x.size):
        old = x[i]
        x[i] = old + h
        up = f()
        x[i] = old - h
        down = f()
        x[i] = old
        grad[i] = (up - down) / (2 * h)
    return grad


# ----------------------------------------------------------------------
# init / layout
# ----------------------------------------------------------------------

def test_init_is_deterministic():
    a = init_network(TINY, np.random.default_rng(7))
    b = init_network(TINY, np.random.default_rng(7))
    assert_array_equal(a.values, b.values)


def test_parameter_count_by_hand():
    # 2*4 + 4 weights/biases, 4 + 4 layer-norm, 4*1 + 1 output
    assert parameter_count(TINY) == 2 * 4 + 4 + 4 * 1 + 1 + 8 == 25
    assert init_network(TINY, np.random.default_rng(0)).size == 25


@pytest.mark.parametrize("spec", [
    TINY,
    actor_spec(3, 1),
    actor_spec(5, 2, hidden=(7,), layer_norm=False),
    critic_spec(3, 1),
    critic_spec(4, 2, split_widths=(3, 5), hidden=(6, 2)),
])
def test_layout_covers_values_exactly(spec):
    layout = build_layout(spec)
    covered = sum(int(np.prod(shape)) for _, shape in layout.values())
    assert covered == parameter_count(spec)
    offsets = sorted(offset for offset, _ in layout.values())
    assert offsets[0] == 0


def test_init_bounds_and_constants():
    p = init_network(critic_spec(3, 1, split_widths=(5, 3), hidden=(6,)), np.random.default_rng(1))
    assert p.is_finite()
    for name in p.weight_names():
        matrix = p.view(name)
        assert np.all(np.abs(matrix) <= 1.0 / np.sqrt(matrix.shape[1]))
    for name in p.layout:
        if name.endswith('.b') or name.endswith('ln_shift'):
            assert_array_equal(p.view(name), 0.0)
        if name.endswith('ln_gain'):
            assert_array_equal(p.view(name), 1.0)


def test_spec_rejects_inconsistent_split():
    with pytest.raises(InputError):
        NetworkSpec(input_dim=4, hidden_dims=(6,), output_dim=1, critic_split=(2, 1))
    with pytest.raises(InputError):
        NetworkSpec(input_dim=3, hidden_dims=(6,), output_dim=1, critic_split=(2, 1), split_widths=(2, 2))
    with pytest.raises(InputError):
        NetworkSpec(input_dim=0, hidden_dims=(6,), output_dim=1)


# ----------------------------------------------------------------------
# forward
# ----------------------------------------------------------------------

def test_zero_actor_outputs_zero():
    assert_array_equal(forward_actor(_zeros(actor_spec(3, 2)), np.array([0.4, -1.0, 2.0])), [0.0, 0.0])


def test_zero_critic_outputs_zero():
    assert forward_critic(_zeros(critic_spec(3, 1)), np.ones(3), np.ones(1)) == 0.0


@given(st.integers(0, 2**32 - 1), st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_actor_output_bounded(seed, state):
    p = init_network(actor_spec(3, 2, hidden=(6, 6)), np.random.default_rng(seed))
    p = p.with_values(p.values * 20.0)
    action = forward_actor(p, np.array(state))
    assert np.all(np.abs(action) <= 1.0)


def test_actor_matches_straight_line_oracle():
    p = init_network(TINY, np.random.default_rng(7))
    state = np.array([0.1, -0.2])

    z = p.view('h0.W') @ state + p.view('h0.b')
    h = np.tanh(_layer_norm(z, p.view('h0.ln_gain'), p.view('h0.ln_shift')))
    expected = np.tanh(p.view('out.W') @ h + p.view('out.b'))

    assert_allclose(forward_actor(p, state), expected, rtol=1e-12, atol=1e-12)


def test_critic_matches_straight_line_oracle(small_critic):
    p = small_critic
    s, a = np.array([0.3, -0.5, 0.9]), np.array([0.2])

    z = np.concatenate([p.view('h0.state.W') @ s + p.view('h0.state.b'),
                        p.view('h0.action.W') @ a + p.view('h0.action.b')])
    h0 = _elu(_layer_norm(z, p.view('h0.ln_gain'), p.view('h0.ln_shift')))
    z1 = p.view('h1.W') @ h0 + p.view('h1.b')
    h1 = _elu(_layer_norm(z1, p.view('h1.ln_gain'), p.view('h1.ln_shift')))
    expected = (p.view('out.W') @ h1 + p.view('out.b'))[0]

    assert forward_critic(p, s, a) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_critic_split_symmetry():
    spec = critic_spec(2, 2, split_widths=(3, 3), hidden=(4,))
    p = init_network(spec, np.random.default_rng(5))
    swapped = p.copy()
    swapped.view('h0.state.W')[:] = p.view('h0.action.W')
    swapped.view('h0.state.b')[:] = p.view('h0.action.b')
    swapped.view('h0.action.W')[:] = p.view('h0.state.W')
    swapped.view('h0.action.b')[:] = p.view('h0.state.b')
    perm = [3, 4, 5, 0, 1, 2]
    swapped.view('h0.ln_gain')[:] = p.view('h0.ln_gain')[perm]
    swapped.view('h0.ln_shift')[:] = p.view('h0.ln_shift')[perm]
    swapped.view('h1.W')[:] = p.view('h1.W')[:, perm]

    s, a = np.array([0.7, -0.1]), np.array([0.4, 0.25])
    assert forward_critic(swapped, a, s) == pytest.approx(forward_critic(p, s, a), rel=1e-9, abs=1e-12)


def test_batched_forward_matches_single(small_critic):
    rng = np.random.default_rng(3)
    states, actions = rng.normal(size=(5, 3)), rng.uniform(-1, 1, size=(5, 1))
    batch = forward_critic(small_critic, states, actions)
    assert batch.shape == (5,)
    for i in range(5):
        assert batch[i] == pytest.approx(forward_critic(small_critic, states[i], actions[i]), rel=1e-9, abs=1e-12)


def test_forward_dimension_mismatch(small_actor, small_critic):
    with pytest.raises(InputError):
        forward_actor(small_actor, np.ones(4))
    with pytest.raises(InputError):
        forward_critic(small_critic, np.ones(3), np.ones(2))
    with pytest.raises(InputError):
        forward_actor(small_critic, np.ones(4))


# ----------------------------------------------------------------------
# backward
# ----------------------------------------------------------------------

def test_zero_output_layer_blocks_gradient(small_actor):
    p = small_actor.copy()
    p.view('out.W')[:] = 0.0
    _, cache = forward(p, np.array([0.2, 0.1, -0.3]))
    grad, (d_input,) = backward(p, cache, np.ones(1))
    upstream_names = [n for n in p.layout if not n.startswith('out.')]
    for name in upstream_names:
        offset, shape = p.layout[name]
        assert_array_equal(grad[offset:offset + int(np.prod(shape))], 0.0)
    assert_array_equal(d_input, 0.0)


GRADIENT_DRAWS = 100


@pytest.mark.parametrize("spec", [
    TINY,
    actor_spec(3, 2, hidden=(5, 4)),
    actor_spec(3, 2, hidden=(6,), layer_norm=False),
    critic_spec(3, 1, split_widths=(4, 3), hidden=(5,)),
    critic_spec(2, 2, split_widths=(3, 3), hidden=(4, 3), layer_norm=False),
])
def test_parameter_gradient_matches_finite_differences(spec):
    rng = np.random.default_rng(2024)
    for _ in range(GRADIENT_DRAWS):
        p = init_network(spec, rng)
        p.values[:] += rng.normal(scale=0.1, size=p.size)
        if spec.critic_split:
            inputs = [rng.normal(size=(3, spec.critic_split[0])), rng.uniform(-1, 1, size=(3, spec.critic_split[1]))]
        else:
            inputs = [rng.normal(size=(3, spec.input_dim))]
        upstream = rng.normal(size=(3, spec.output_dim))

        def objective():
            out, _ = forward(p, *inputs)
            return float(np.sum(out * upstream))

        _, cache = forward(p, *inputs)
        analytic, _ = backward(p, cache, upstream)
        numeric = _numeric_gradient(objective, p.values)
        assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-7)


def test_action_gradient_matches_finite_differences(small_critic):
    rng = np.random.default_rng(21)
    state, action = rng.normal(size=3), rng.uniform(-1, 1, size=1)

    _, cache = forward(small_critic, state, action)
    _, (d_state, d_action) = backward(small_critic, cache, np.ones(1))
    numeric = _numeric_gradient(lambda: forward_critic(small_critic, state, action), action)
    assert d_action.shape == (1,)
    assert_allclose(d_action, numeric, rtol=1e-4, atol=1e-7)
    numeric_state = _numeric_gradient(lambda: forward_critic(small_critic, state, action), state)
    assert_allclose(d_state, numeric_state, rtol=1e-4, atol=1e-7)


def test_backward_rejects_wrong_upstream(small_actor):
    _, cache = forward(small_actor, np.ones(3))
    with pytest.raises(InputError):
        backward(small_actor, cache, np.ones(3))


# ----------------------------------------------------------------------
# Adam
# ----------------------------------------------------------------------

def _scalar_like_params():
    spec = NetworkSpec(input_dim=1, hidden_dims=(1,), output_dim=1, layer_norm=False)
    return Parameters.from_values(np.full(parameter_count(spec), 0.5), spec)


def test_adam_zero_gradient_keeps_parameters():
    p = _scalar_like_params()
    opt = AdamState.for_parameters(p, 0.1)
    p2, opt2 = adam_step(p, np.zeros(p.size), opt)
    assert_array_equal(p2.values, p.values)
    assert opt2.step_count == opt.step_count + 1


def test_adam_matches_hand_recurrence():
    p = _scalar_like_params()
    opt = AdamState.for_parameters(p, 0.1)
    for _ in range(2):
        p, opt = adam_step(p, np.ones(p.size), opt)

    x, m, v = 0.5, 0.0, 0.0
    for t in (1, 2):
        m = 0.9 * m + 0.1 * 1.0
        v = 0.999 * v + 0.001 * 1.0
        x -= 0.1 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)

    assert_allclose(p.values, x, rtol=1e-12)
    assert opt.step_count == 2


def test_clip_to_norm_ten():
    grad = np.zeros(4)
    grad[0] = 100.0
    clipped = clip_gradient(grad, 10.0)
    assert np.linalg.norm(clipped) == pytest.approx(10.0, rel=1e-12)
    small = np.array([1.0, 2.0])
    assert clip_gradient(small, 10.0) is small
    assert_array_equal(clip_gradient(np.array([30.0, -0.5]), 10.0, 'value'), [10.0, -0.5])


def test_adam_rejects_non_finite_gradient():
    p = _scalar_like_params()
    before = p.values.copy()
    grad = np.ones(p.size)
    grad[1] = np.nan
    with pytest.raises(NumericError):
        adam_step(p, grad, AdamState.for_parameters(p, 0.1))
    assert_array_equal(p.values, before)


def test_adam_rejects_wrong_shape():
    p = _scalar_like_params()
    with pytest.raises(InputError):
        adam_step(p, np.ones(p.size + 1), AdamState.for_parameters(p, 0.1))


# ----------------------------------------------------------------------
# soft update
# ----------------------------------------------------------------------

def test_soft_update_tau_one_copies_source(small_actor, small_actor_spec):
    target = init_network(small_actor_spec, np.random.default_rng(99))
    updated = soft_update(target, small_actor, 1.0)
    assert_array_equal(updated.values, small_actor.values)
    assert updated.values is not small_actor.values


def test_soft_update_arithmetic():
    source = Parameters.from_values(np.ones(parameter_count(TINY)), TINY)
    target = _zeros(TINY)
    assert_allclose(soft_update(target, source, 1e-3).values, 0.001)


@given(st.floats(0.01, 0.9), st.integers(0, 1000))
def test_soft_update_contracts(tau, seed):
    rng = np.random.default_rng(seed)
    source = init_network(TINY, rng)
    target = init_network(TINY, rng)
    gap = np.max(np.abs(target.values - source.values))
    for _ in range(5):
        target = soft_update(target, source, tau)
        new_gap = np.max(np.abs(target.values - source.values))
        assert new_gap < gap or gap == 0.0
        gap = new_gap
    assert target.is_finite()


def test_soft_update_layout_mismatch(small_actor):
    with pytest.raises(InputError):
        soft_update(init_network(TINY, np.random.default_rng(0)), small_actor, 0.5)


# ----------------------------------------------------------------------
# snapshots
# ----------------------------------------------------------------------

def test_snapshot_restores_parameters(tmp_path, small_actor, small_critic):
    path = tmp_path / "params.npz"
    save_parameters(small_actor, path, critic=small_critic)
    loaded = load_parameters(path)
    assert set(loaded) == {'main', 'critic'}
    assert loaded['main'].spec == small_actor.spec
    assert_array_equal(loaded['main'].values, small_actor.values)
    assert_array_equal(loaded['critic'].values, small_critic.values)

"""
Tests for ranking, selection, crossover, mutation and the generation step
"""
import numpy as np
import pytest
from scipy import stats

from config.erl_config import MutationParams
from evolution.operators import (
    NORMAL, RESET, SUPER, MutationEvents, _apply_events, crossover, elite_count, mutate,
    mutation_event_count, next_generation, rank, sample_mutation_events, select_elites,
    tournament_select,
)
from evolution.population import Individual, Population, Tag
from neural.network import NetworkSpec, actor_spec, init_network
from utils.errors import InputError, StateError


SPEC = actor_spec(3, 1, hidden=(6, 5))


def _population(fitness, spec=SPEC, seed=0):
    rng = np.random.default_rng(seed)
    members = [Individual(init_network(spec, rng), fitness=f) for f in fitness]
    return Population(members)


def _three_sigma(n, p):
    return 3 * np.sqrt(n * p * (1 - p))


# ----------------------------------------------------------------------
# ranking and elites
# ----------------------------------------------------------------------

def test_rank_orders_by_fitness():
    assert rank(_population([3.0, 1.0, 2.0])) == [0, 2, 1]
    assert rank(_population([5.0] * 4)) == [0, 1, 2, 3]
    assert rank(_population([1.0, 2.0, 3.0])) == [2, 1, 0]
    assert rank(_population([3.0, 2.0, 1.0])) == [0, 1, 2]


def test_rank_needs_fitness():
    pop = _population([1.0, 2.0])
    pop[1].fitness = None
    with pytest.raises(StateError):
        rank(pop)


@pytest.mark.parametrize("k, psi, expected", [(10, 0.1, 1), (10, 0.3, 3), (3, 0.1, 1), (10, 0.2, 2), (5, 0.99, 4)])
def test_elite_count(k, psi, expected):
    assert elite_count(k, psi) == expected


def test_select_elites_takes_top():
    assert select_elites(_population([0.0, 9.0, 4.0, 7.0, 1.0, 2.0, 3.0, 5.0, 6.0, 8.0]), 0.3) == [1, 9, 3]


# ----------------------------------------------------------------------
# tournament
# ----------------------------------------------------------------------

def test_large_tournament_finds_best():
    pop = _population([0.5, 2.0, 1.0])
    winners = tournament_select(pop, 200, 60, np.random.default_rng(0))
    assert set(winners) == {1}


def test_two_member_tournament_probability():
    pop = _population([1.0, 0.0])
    n = 100_000
    winners = tournament_select(pop, n, 2, np.random.default_rng(1))
    better = winners.count(0)
    assert abs(better - 0.75 * n) < _three_sigma(n, 0.75)


def test_size_one_tournament_is_uniform():
    pop = _population([4.0, 3.0, 2.0, 1.0])
    winners = tournament_select(pop, 20_000, 1, np.random.default_rng(2))
    counts = np.bincount(winners, minlength=4)
    assert stats.chisquare(counts).pvalue > 1e-4


def test_selection_pressure_is_monotone_in_rank():
    pop = _population([0.3, 0.9, 0.1, 0.7, 0.5])
    winners = tournament_select(pop, 10_000, 3, np.random.default_rng(3))
    counts = np.bincount(winners, minlength=5)
    by_rank = [counts[i] for i in rank(pop)]
    assert all(a >= b for a, b in zip(by_rank, by_rank[1:]))


# ----------------------------------------------------------------------
# crossover
# ----------------------------------------------------------------------

def test_crossover_identical_parents():
    p = init_network(SPEC, np.random.default_rng(4))
    child = crossover(p, p.copy(), np.random.default_rng(5))
    np.testing.assert_array_equal(child.values, p.values)


def test_crossover_rows_come_from_a_parent():
    rng = np.random.default_rng(6)
    a, b = init_network(SPEC, rng), init_network(SPEC, rng)
    a.values[:] += 1.0
    child = crossover(a, b, rng)
    for name in child.weight_names():
        for row, row_a, row_b in zip(child.view(name), a.view(name), b.view(name)):
            assert np.array_equal(row, row_a) or np.array_equal(row, row_b)

    # bias and layer-norm entries travel with their neuron's weight row
    for i, row in enumerate(child.view('h0.W')):
        source = a if np.array_equal(row, a.view('h0.W')[i]) else b
        assert child.view('h0.b')[i] == source.view('h0.b')[i]
        assert child.view('h0.ln_gain')[i] == source.view('h0.ln_gain')[i]
        assert child.view('h0.ln_shift')[i] == source.view('h0.ln_shift')[i]


def test_crossover_row_source_frequency():
    spec = NetworkSpec(input_dim=2, hidden_dims=(4,), output_dim=1)
    rng = np.random.default_rng(7)
    a, b = init_network(spec, rng), init_network(spec, rng)
    b.values[:] += 1.0
    from_a = total = 0
    for _ in range(10_000):
        child = crossover(a, b, rng)
        rows = child.view('h0.W')
        from_a += int(np.sum(np.all(rows == a.view('h0.W'), axis=1)))
        total += rows.shape[0]
    assert abs(from_a - 0.5 * total) < _three_sigma(total, 0.5)


def test_crossover_layout_mismatch():
    a = init_network(SPEC, np.random.default_rng(0))
    b = init_network(actor_spec(3, 1, hidden=(4,)), np.random.default_rng(0))
    with pytest.raises(InputError):
        crossover(a, b, np.random.default_rng(0))


# ----------------------------------------------------------------------
# mutation
# ----------------------------------------------------------------------

def test_event_count_for_128_square():
    mp = MutationParams()
    assert mutation_event_count(128 * 128, mp) == 1638
    assert len(sample_mutation_events((128, 128), mp, np.random.default_rng(0))) == 1638


def test_zero_fraction_changes_nothing():
    p = init_network(SPEC, np.random.default_rng(8))
    child = mutate(p, MutationParams(mut_frac=0.0), np.random.default_rng(9))
    np.testing.assert_array_equal(child.values, p.values)


def test_event_type_frequencies():
    n = 10_000
    events = sample_mutation_events((10, 10), MutationParams(), np.random.default_rng(10), n_events=n)
    for kind, p in ((SUPER, 0.05), (RESET, 0.0475), (NORMAL, 0.9025)):
        count = int(np.sum(events.kinds == kind))
        assert abs(count - p * n) < _three_sigma(n, p)


def test_mutation_is_local_to_weights():
    p = init_network(SPEC, np.random.default_rng(11))
    mp = MutationParams()
    child = mutate(p, mp, np.random.default_rng(12))
    for name in p.layout:
        before, after = p.view(name), child.view(name)
        if name in p.weight_names():
            assert np.sum(before != after) <= mutation_event_count(before.size, mp)
        else:
            np.testing.assert_array_equal(before, after)
    assert not np.array_equal(child.values, p.values)


def test_mutation_modes():
    events = MutationEvents(rows=np.array([0, 0, 1]), cols=np.array([0, 1, 0]),
                            kinds=np.array([NORMAL, SUPER, RESET]), noise=np.array([0.5, 0.2, -1.5]))
    matrix = np.full((2, 2), 2.0)
    _apply_events(matrix, events, MutationParams())
    np.testing.assert_allclose(matrix, [[2.0 * 1.05, 2.0 * 3.0], [-1.5, 2.0]])

    matrix = np.full((2, 2), 2.0)
    _apply_events(matrix, events, MutationParams(mode='literal_multiplicative'))
    np.testing.assert_allclose(matrix, [[2.0 * 0.05, 2.0 * 2.0], [-1.5, 2.0]])


# ----------------------------------------------------------------------
# generation step
# ----------------------------------------------------------------------

def test_next_generation_structure():
    pop = _population([float(i) for i in range(10)])
    originals = [m.params.values.copy() for m in pop.members]
    new = next_generation(pop, 0.1, MutationParams(), np.random.default_rng(13),
                          mutation_rng=np.random.default_rng(14))

    assert new.k == 10
    assert new.generation == pop.generation + 1
    assert all(m.fitness is None for m in new.members)
    np.testing.assert_array_equal(new[9].params.values, originals[9])
    assert new[9].params.values is not pop[9].params.values

    tags = [m.tag for m in pop.members]
    assert tags.count(Tag.ELITE) == 1 and pop[9].tag is Tag.ELITE
    assert Tag.NONE not in tags
    assert tags.count(Tag.SELECTED) + tags.count(Tag.DISCARDED) == 9


def test_elites_survive_many_generations():
    rng = np.random.default_rng(15)
    pop = _population([0.0] * 6)
    for g in range(100):
        for i, m in enumerate(pop.members):
            m.fitness = float(np.sin(i + g))
        best = rank(pop)[:2]
        kept = {i: pop[i].params.values.copy() for i in best}
        pop = next_generation(pop, 0.34, MutationParams(), rng)
        for i, values in kept.items():
            np.testing.assert_array_equal(pop[i].params.values, values)
        assert pop.k == 6


def test_identical_parents_without_mutation_converge():
    p = init_network(SPEC, np.random.default_rng(16))
    pop = Population([Individual(p.copy(), fitness=float(i)) for i in range(5)])
    new = next_generation(pop, 0.2, MutationParams(mut_prob=0.0), np.random.default_rng(17))
    for m in new.members:
        np.testing.assert_array_equal(m.params.values, p.values)


def test_random_ns_has_no_elites():
    pop = _population([float(i) for i in range(6)])
    new = next_generation(pop, 0.5, MutationParams(), np.random.default_rng(18), selection_mode='random_ns')
    assert new.k == 6
    assert all(m.tag in (Tag.SELECTED, Tag.DISCARDED) for m in pop.members)


def test_initialize_is_seeded_per_member():
    a = Population.initialize(SPEC, 3, lambda i: np.random.default_rng(100 + i))
    b = Population.initialize(SPEC, 3, lambda i: np.random.default_rng(100 + i))
    for x, y in zip(a.members, b.members):
        np.testing.assert_array_equal(x.params.values, y.params.values)
    assert not np.array_equal(a[0].params.values, a[1].params.values)


def test_tag_assigned_once():
    member = Individual(init_network(SPEC, np.random.default_rng(0)))
    member.assign_tag(Tag.ELITE)
    with pytest.raises(StateError):
        member.assign_tag(Tag.DISCARDED)


def test_crossover_has_its_own_stream():
    def build(crossover_seed):
        pop = _population([float(i) for i in range(6)])
        new = next_generation(pop, 0.2, MutationParams(mut_prob=0.0), np.random.default_rng(19), tournament_size=1,
                              crossover_rng=np.random.default_rng(crossover_seed))
        return pop, new

    pop_a, new_a = build(0)
    pop_b, new_b = build(1)
    # parent choice is untouched by the crossover stream
    assert [m.tag for m in pop_a.members] == [m.tag for m in pop_b.members]
    np.testing.assert_array_equal(new_a[5].params.values, new_b[5].params.values)
    assert any(not np.array_equal(a.params.values, b.params.values)
               for a, b in zip(new_a.members[:5], new_b.members[:5]))

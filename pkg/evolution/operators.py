"""
Evolutionary operators

Ranking, elitism, tournament selection, per-neuron crossover and sparse
weight mutation. Every operator takes an explicit numpy Generator and is
otherwise pure; next_generation is the only one that writes selection tags.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import math
import numpy as np

from config.erl_config import MutationParams
from evolution.population import Individual, Population, Tag
from neural.network import Parameters, network_layers, require_congruent


SUPER, RESET, NORMAL = 0, 1, 2


def rank(pop: Population) -> List[int]:
    """
    Member indices sorted by fitness, best first; ties keep the lower index first

    Raises:
        StateError: some member has no fitness
    """
    fitness = pop.fitnesses()
    return sorted(range(pop.k), key=lambda i: (-fitness[i], i))


def elite_count(k: int, psi: float) -> int:
    """e = max(1, floor(psi * k)); the epsilon absorbs float error in psi * k"""
    return max(1, int(math.floor(psi * k + 1e-9)))


def select_elites(pop: Population, psi: float) -> List[int]:
    """Indices of the top max(1, floor(psi * k)) members"""
    return rank(pop)[:elite_count(pop.k, psi)]


def tournament_select(pop: Population, n: int, tournament_size: int,
                      rng: np.random.Generator) -> List[int]:
    """
    n tournament winners (member indices)

    Each tournament draws tournament_size members uniformly with replacement
    and keeps the best ranked one.
    """
    position = {idx: pos for pos, idx in enumerate(rank(pop))}
    winners = []
    for _ in range(n):
        contenders = rng.integers(0, pop.k, size=tournament_size)
        winners.append(int(min(contenders, key=lambda i: position[int(i)])))
    return winners


def crossover(parent_a: Parameters, parent_b: Parameters, rng: np.random.Generator) -> Parameters:
    """
    Per-neuron uniform crossover

    For every neuron the child takes the incoming weight row, the bias entry
    and the layer-norm gain/shift entries from one parent, chosen with
    probability 1/2.
    """
    require_congruent(parent_a, parent_b)
    child = parent_a.copy()
    for layer in network_layers(parent_a.spec):
        for block in layer.blocks:
            from_b = rng.random(block.fan_out) < 0.5
            if not from_b.any():
                continue
            child.view(block.weight)[from_b] = parent_b.view(block.weight)[from_b]
            child.view(block.bias)[from_b] = parent_b.view(block.bias)[from_b]
            if layer.gain:
                neurons = np.arange(block.start, block.start + block.fan_out)[from_b]
                child.view(layer.gain)[neurons] = parent_b.view(layer.gain)[neurons]
                child.view(layer.shift)[neurons] = parent_b.view(layer.shift)[neurons]
    return child


@dataclass
class MutationEvents:
    """Perturbation events drawn for one weight matrix"""
    rows: np.ndarray
    cols: np.ndarray
    kinds: np.ndarray
    noise: np.ndarray

    def __len__(self) -> int:
        return self.kinds.shape[0]


def mutation_event_count(size: int, mp: MutationParams) -> int:
    return int(mp.mut_frac * size)


def sample_mutation_events(shape: Tuple[int, int], mp: MutationParams,
                           rng: np.random.Generator,
                           n_events: Optional[int] = None) -> MutationEvents:
    """
    Draw event positions and types for one matrix

    Super-mutation with probability supermut_prob, otherwise reset with
    probability reset_prob, otherwise a normal mutation.
    """
    if n_events is None:
        n_events = mutation_event_count(shape[0] * shape[1], mp)
    rows = rng.integers(0, shape[0], size=n_events)
    cols = rng.integers(0, shape[1], size=n_events)
    is_super = rng.random(n_events) < mp.supermut_prob
    is_reset = rng.random(n_events) < mp.reset_prob
    kinds = np.where(is_super, SUPER, np.where(is_reset, RESET, NORMAL))
    return MutationEvents(rows, cols, kinds, rng.standard_normal(n_events))


def _apply_events(matrix: np.ndarray, events: MutationEvents, mp: MutationParams):
    literal = mp.mode == 'literal_multiplicative'
    for i, j, kind, z in zip(events.rows, events.cols, events.kinds, events.noise):
        if kind == RESET:
            matrix[i, j] = z
            continue
        scale = 100.0 * mp.mut_strength if kind == SUPER else mp.mut_strength
        if literal:
            matrix[i, j] = matrix[i, j] * (scale * z)
        else:
            matrix[i, j] = matrix[i, j] * (1.0 + scale * z)


def mutate(p: Parameters, mp: MutationParams, rng: np.random.Generator) -> Parameters:
    """
    Sparse Gaussian mutation of the weight matrices

    Each matrix M receives int(mut_frac * |M|) events; biases and layer-norm
    parameters are left alone.
    """
    child = p.copy()
    for name in child.weight_names():
        matrix = child.view(name)
        events = sample_mutation_events(matrix.shape, mp, rng)
        if len(events):
            _apply_events(matrix, events, mp)
    return child


def next_generation(pop: Population, psi: float, mp: MutationParams, rng: np.random.Generator,
                    tournament_size: int = 3, selection_mode: str = 'tournament',
                    mutation_rng: Optional[np.random.Generator] = None,
                    crossover_rng: Optional[np.random.Generator] = None) -> Population:
    """
    Build generation g+1 from an evaluated generation g

    Elites keep their slots unchanged. Every other slot receives
    crossover(random elite, tournament winner), mutated with probability
    mut_prob. In 'random_ns' mode there are no elites and both parents are
    drawn uniformly at random.

    Tags of the input members are set as a side effect:
    elite / selected (parented an offspring) / discarded.

    Args:
        pop: Population with every fitness set
        psi: Elite fraction
        mp: Mutation constants
        rng: Generator for parent selection
        tournament_size: Contenders per tournament
        selection_mode: 'tournament' or 'random_ns'
        mutation_rng: Generator for the mutation gate and events (defaults to rng)
        crossover_rng: Generator for crossover row choices (defaults to rng)

    Returns:
        New Population of the same size with unset fitness
    """
    if mutation_rng is None:
        mutation_rng = rng
    if crossover_rng is None:
        crossover_rng = rng
    order = rank(pop)
    k = pop.k

    if selection_mode == 'random_ns':
        elites: List[int] = []
        slots = list(range(k))
        pairs = [(int(rng.integers(0, k)), int(rng.integers(0, k))) for _ in slots]
    else:
        elites = order[:elite_count(k, psi)]
        elite_set = set(elites)
        slots = [i for i in range(k) if i not in elite_set]
        winners = tournament_select(pop, len(slots), tournament_size, rng)
        pairs = [(elites[int(rng.integers(0, len(elites)))], w) for w in winners]

    members: List[Optional[Individual]] = [None] * k
    for i in elites:
        members[i] = Individual(pop[i].params.copy())

    parents = set()
    for slot, (a, b) in zip(slots, pairs):
        child = crossover(pop[a].params, pop[b].params, crossover_rng)
        if mutation_rng.random() < mp.mut_prob:
            child = mutate(child, mp, mutation_rng)
        members[slot] = Individual(child)
        parents.update((a, b))

    _tag_members(pop, elites, parents)
    return Population(members, pop.generation + 1)


def _tag_members(pop: Population, elites: Sequence[int], parents: set):
    for member in pop.members:
        member.tag = Tag.NONE
    elite_set = set(elites)
    for i, member in enumerate(pop.members):
        if i in elite_set:
            member.assign_tag(Tag.ELITE)
        elif i in parents:
            member.assign_tag(Tag.SELECTED)
        else:
            member.assign_tag(Tag.DISCARDED)

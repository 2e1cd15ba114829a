"""
Population of actor networks
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional

import numpy as np

from neural.network import NetworkSpec, Parameters, init_network
from utils.errors import StateError


class Tag(str, Enum):
    """Fate of an individual at a selection step"""
    ELITE = 'elite'
    SELECTED = 'selected'
    DISCARDED = 'discarded'
    NONE = 'none'


@dataclass(eq=False)
class Individual:
    """One actor: parameters, fitness from the latest evaluation, selection tag"""
    params: Parameters
    fitness: Optional[float] = None
    tag: Tag = Tag.NONE

    def assign_tag(self, tag: Tag):
        if self.tag is not Tag.NONE:
            raise StateError(f"Individual already tagged '{self.tag.value}' this generation")
        self.tag = tag


@dataclass(eq=False)
class Population:
    members: List[Individual] = field(default_factory=list)
    generation: int = 0

    @property
    def k(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> Individual:
        return self.members[i]

    def fitnesses(self) -> List[float]:
        if any(m.fitness is None for m in self.members):
            raise StateError("Population has members without fitness")
        return [m.fitness for m in self.members]

    @classmethod
    def initialize(cls, spec: NetworkSpec, k: int,
                   rng_for: Callable[[int], np.random.Generator]) -> 'Population':
        """
        Random population of k actors

        Args:
            spec: Actor topology
            k: Population size
            rng_for: Member index -> Generator used for that member's weights
        """
        return cls([Individual(init_network(spec, rng_for(i))) for i in range(k)])

"""
Per-generation reports and synchronized-actor bookkeeping
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

from evolution.population import Tag
from utils.errors import StateError


@dataclass
class GenerationReport:
    generation: int
    cumulative_steps: int
    best_fitness: float
    mean_fitness: float
    champion_score: float
    sync_classification: Optional[Tag] = None
    steps_this_generation: int = 0
    updates: int = 0
    critic_loss: Optional[float] = None


@dataclass
class SyncTracker:
    """
    Remembers where the RL actor was inserted and how selection treated it

    pending is the population slot of the last synchronized actor until the
    next selection step classifies it.
    """
    pending: Optional[int] = None
    counts: Dict[Tag, int] = field(default_factory=lambda: {
        Tag.ELITE: 0, Tag.SELECTED: 0, Tag.DISCARDED: 0,
    })

    def record(self, tag: Tag):
        if tag not in self.counts:
            raise StateError(f"Cannot record classification '{tag.value}'")
        self.counts[tag] += 1
        self.pending = None

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def rates(self) -> Dict[str, float]:
        """Percentages per tag; all zero before the first classification"""
        total = self.total
        return {
            tag.value: (100.0 * count / total if total else 0.0)
            for tag, count in self.counts.items()
        }

"""
ERL Trainer - runs the hybrid training loop one generation at a time

Each generation:
1. Evaluate every population actor without noise, feeding the shared buffer
2. Build the next population (elitism, selection, crossover, mutation)
3. Roll out the RL actor once with OU noise
4. Run critic/actor updates on buffer samples
5. Every omega generations copy the RL actor over the weakest member
6. Report
"""
from typing import Callable, Dict, Iterable, List, Optional, Tuple
import threading

import numpy as np
from loguru import logger

from config import settings
from config.erl_config import ErlConfig
from ddpg.learner import DdpgLearner
from ddpg.noise import OUProcess
from environments.base_env import BaseEnvironment
from environments.registry import env_factory
from erl.evaluator import FitnessRecord, champion_eval, champion_index, evaluate
from erl.reports import GenerationReport, SyncTracker
from evolution.operators import next_generation
from evolution.population import Individual, Population, Tag
from neural.network import Parameters, actor_spec
from replay.buffer import ReplayBuffer, TransitionLog
from utils.errors import ConfigError, ErlError, NumericError, StateError
from utils.seeding import RandomStreams


def weakest_index(pop: Population, exclude: Iterable[int] = ()) -> int:
    """Lowest-fitness member outside exclude; lowest index on ties"""
    skip = set(exclude)
    fitness = pop.fitnesses()
    candidates = [i for i in range(pop.k) if i not in skip]
    if not candidates:
        raise StateError("No population slot available for synchronization")
    return min(candidates, key=lambda i: (fitness[i], i))


def synchronize(pop: Population, rl_actor: Parameters, slot: Optional[int] = None) -> int:
    """
    Copy the RL actor into the population

    Args:
        pop: Target population
        rl_actor: Learner's actor; it keeps its own parameters
        slot: Member to overwrite; defaults to the weakest by current fitness

    Returns:
        Index of the overwritten member
    """
    if slot is None:
        slot = weakest_index(pop)
    pop.members[slot] = Individual(rl_actor.copy())
    return slot


def classify_synced_actor(pop_after_selection: Population, synced_index: Optional[int]) -> Tag:
    """
    Tag the synchronized actor received at the latest selection step

    Raises:
        StateError: no sync since the last selection, or selection not run yet
    """
    if synced_index is None:
        raise StateError("No synchronized actor awaiting classification")
    tag = pop_after_selection[synced_index].tag
    if tag is Tag.NONE:
        raise StateError(f"Member {synced_index} has not been through selection")
    return tag


class ErlTrainer:
    """
    Owns the population, the learner and the shared replay buffer

    Features:
    - Cumulative step accounting over population and RL rollouts
    - Optional threaded population evaluation, merged in index order
    - Tracks how selection treats the synchronized actor
    - Degenerates to plain DDPG (no population) or plain EA (no learner)
    """

    def __init__(self, config: ErlConfig,
                 make_env: Optional[Callable[[], BaseEnvironment]] = None):
        """
        Initialize trainer

        Args:
            config: Run configuration
            make_env: Environment factory (defaults to the registry entry for config.env)
        """
        if not config.population_enabled and not config.learner_enabled:
            raise ConfigError("Neither the population nor the learner is enabled", key='population_enabled')

        self.config = config
        self.streams = RandomStreams(config.seed)
        self.make_env = make_env or env_factory(config.env)
        self.env = self.make_env()
        spec = self.env.spec

        net = config.network
        self.actor_spec = actor_spec(spec.state_dim, spec.action_dim, net.actor_hidden, net.layer_norm)
        self.buffer = ReplayBuffer(config.buffer_capacity, spec.state_dim, spec.action_dim)
        self.learner = DdpgLearner.from_config(
            config, spec.state_dim, spec.action_dim,
            self.streams.generator('init', 0), self.streams.generator('init', 1),
        )
        self.noise = OUProcess(spec.action_dim, **config.ou.model_dump())

        if config.population_enabled:
            self.population = Population.initialize(
                self.actor_spec, config.k, lambda i: self.streams.generator('init', 2, i)
            )
        else:
            self.population = Population([])

        self.workers = settings.EVAL_WORKERS or config.eval_workers
        self.sync_tracker = SyncTracker()
        self.generation = 0
        self.cumulative_steps = 0
        self.champion: Optional[Parameters] = None
        self.reports: List[GenerationReport] = []

    # ------------------------------------------------------------------
    # Collection phase
    # ------------------------------------------------------------------

    def _evaluate_member(self, index: int, env: BaseEnvironment) -> Tuple[FitnessRecord, TransitionLog]:
        log = TransitionLog()
        record = evaluate(
            self.population[index].params, env, log, None, self.config.xi,
            self.streams.generator('env', self.generation, index), index=index,
        )
        return record, log

    def evaluate_population(self) -> List[FitnessRecord]:
        """
        Noiseless fitness evaluation of every member

        Transitions reach the shared buffer in member-index order whatever
        the number of workers.
        """
        k = self.population.k
        results: Dict[int, Tuple[FitnessRecord, TransitionLog]] = {}

        if self.workers > 1 and k > 1:
            results = self._evaluate_parallel(min(self.workers, k))
        else:
            for i in range(k):
                results[i] = self._evaluate_member(i, self.env)

        records = []
        for i in range(k):
            record, log = results[i]
            self.buffer.extend(log)
            self.population[i].fitness = record.fitness
            records.append(record)
        return records

    def _evaluate_parallel(self, workers: int) -> Dict[int, Tuple[FitnessRecord, TransitionLog]]:
        """
        Evaluate members on worker threads, one environment per worker

        Worker w handles members w, w + workers, ...
        """
        results = {}
        errors: List[BaseException] = []
        threads = []

        def evaluate_thread(worker: int):
            env = self.make_env()
            try:
                for i in range(worker, self.population.k, workers):
                    results[i] = self._evaluate_member(i, env)
            except Exception as e:
                logger.error(f"Worker {worker} failed: {e}")
                errors.append(e)

        for w in range(workers):
            thread = threading.Thread(target=evaluate_thread, args=(w,))
            threads.append(thread)
            thread.start()

        for thread in threads:
            thread.join()

        if errors:
            raise errors[0]
        return results

    def evaluate_rl_actor(self) -> FitnessRecord:
        """One OU-noise episode of the learner's actor straight into the buffer"""
        return evaluate(
            self.learner.actor, self.env, self.buffer, self.noise, 1,
            self.streams.generator('rl-env', self.generation),
            index=-1, noise_rng=self.streams.generator('ou-noise', self.generation),
        )

    # ------------------------------------------------------------------
    # Learning phase
    # ------------------------------------------------------------------

    def update_count(self, steps: int) -> int:
        """Gradient updates owed for the steps collected this generation"""
        if self.config.update_ratio <= 0:
            return 0
        if self.config.update_mode == 'literal':
            return 1
        return int(round(self.config.update_ratio * steps))

    def learn(self, n_updates: int) -> Optional[float]:
        """
        Run n_updates learner steps on uniform buffer samples

        Returns:
            Mean critic loss, None when nothing ran
        """
        if n_updates == 0 or len(self.buffer) == 0:
            return None
        rng = self.streams.generator('replay-sampling', self.generation)
        losses = []
        for u in range(n_updates):
            batch = self.buffer.sample(self.config.batch_size, rng)
            try:
                losses.append(self.learner.train_step(batch))
            except NumericError as e:
                last = f"{losses[-1]:.6g}" if losses else "n/a"
                logger.error(f"✗ generation {self.generation}, update {u}: {e} (last critic loss {last})")
                raise
        logger.debug(f"generation {self.generation}: {n_updates} updates, mean critic loss {np.mean(losses):.6g}")
        return float(np.mean(losses))

    # ------------------------------------------------------------------
    # Generation
    # ------------------------------------------------------------------

    def run_generation(self) -> GenerationReport:
        """Advance by one generation and return its report"""
        cfg = self.config
        self.generation += 1
        steps = 0
        classification: Optional[Tag] = None
        sync_slot: Optional[int] = None
        best = mean = None

        if cfg.population_enabled:
            records = self.evaluate_population()
            steps += sum(r.steps_consumed for r in records)
            evaluated = self.population
            fitness = evaluated.fitnesses()
            best, mean = max(fitness), float(np.mean(fitness))
            self.champion = evaluated[champion_index(evaluated)].params

            self.population = next_generation(
                evaluated, cfg.psi, cfg.mutation,
                rng=self.streams.generator('selection', self.generation),
                tournament_size=cfg.tournament_size,
                selection_mode=cfg.selection_mode,
                mutation_rng=self.streams.generator('mutation', self.generation),
                crossover_rng=self.streams.generator('crossover', self.generation),
            )
            if self.sync_tracker.pending is not None:
                classification = classify_synced_actor(evaluated, self.sync_tracker.pending)
                self.sync_tracker.record(classification)
            elites = [i for i, m in enumerate(evaluated.members) if m.tag is Tag.ELITE]
            sync_slot = weakest_index(evaluated, exclude=elites) if len(elites) < evaluated.k else None

        critic_loss = None
        n_updates = 0
        if cfg.learner_enabled:
            rl_record = self.evaluate_rl_actor()
            steps += rl_record.steps_consumed
            n_updates = self.update_count(steps)
            critic_loss = self.learn(n_updates)

            if not cfg.population_enabled:
                best = mean = rl_record.fitness
                self.champion = self.learner.actor

            if (cfg.sync_enabled and cfg.population_enabled and sync_slot is not None
                    and self.generation % cfg.omega == 0):
                synchronize(self.population, self.learner.actor, sync_slot)
                self.sync_tracker.pending = sync_slot
                logger.debug(f"Generation {self.generation}: RL actor copied into slot {sync_slot}")

        self.cumulative_steps += steps
        score = champion_eval(
            None, self.champion, self.env,
            self.streams.generator('champion', self.generation), cfg.champion_episodes,
        )

        report = GenerationReport(
            generation=self.generation,
            cumulative_steps=self.cumulative_steps,
            best_fitness=float(best),
            mean_fitness=float(mean),
            champion_score=score,
            sync_classification=classification,
            steps_this_generation=steps,
            updates=n_updates,
            critic_loss=critic_loss,
        )
        self.reports.append(report)
        logger.info(
            f"gen {report.generation} | steps {report.cumulative_steps} | "
            f"best {report.best_fitness:.2f} | mean {report.mean_fitness:.2f} | "
            f"champion {report.champion_score:.2f}"
            + (f" | sync {classification.value}" if classification else "")
        )
        return report

    def train(self, step_budget: Optional[int] = None,
              on_report: Optional[Callable[[GenerationReport], None]] = None) -> List[GenerationReport]:
        """
        Run generations until cumulative steps reach the budget

        Args:
            step_budget: Environment steps to consume (defaults to config.step_budget)
            on_report: Called with every GenerationReport

        Returns:
            Reports of the generations run by this call
        """
        budget = step_budget or self.config.step_budget
        reports = []
        while self.cumulative_steps < budget:
            try:
                report = self.run_generation()
            except ErlError as e:
                logger.error(f"Generation {self.generation} aborted: {e}")
                raise
            reports.append(report)
            if on_report is not None:
                on_report(report)
        return reports

    def selection_rates(self) -> Dict[str, float]:
        return self.sync_tracker.rates()

"""
Experiment runner

Runs one algorithm arm for one seed and writes the run directory:
curve.csv, manifest.json, config.json, final_params.npz and, for the ERL
arms, selection_rates.txt.
"""
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import csv

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from config import settings
from config.erl_config import ARMS, ErlConfig, apply_arm, build_config, load_config, save_config
from erl.reports import GenerationReport
from erl.trainer import ErlTrainer
from neural.network import save_parameters
from storage.database import RunDatabaseManager
from utils.errors import InputError
from utils.helpers import format_float


CURVE_COLUMNS = ('generation', 'cumulative_steps', 'champion_score', 'best_fitness', 'mean_fitness')
SELECTION_ARMS = ('erl', 'erl-ns')


class RunManifest(BaseModel):
    """Everything needed to reproduce a run, plus how it ended"""
    model_config = ConfigDict(extra='forbid')

    config: ErlConfig
    arm: str = 'erl'
    seed: int = Field(0, ge=0)
    code_version: str = settings.CODE_VERSION
    started_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None
    status: str = 'pending'
    error: Optional[str] = None
    generations: int = 0
    cumulative_steps: int = 0

    def run_config(self) -> ErlConfig:
        """Config specialized to the arm with the manifest's seed"""
        if self.arm not in ARMS:
            raise InputError(f"Unknown algorithm arm '{self.arm}'")
        return apply_arm(self.config.model_copy(update={'seed': self.seed}), self.arm)


class CurvePoint(BaseModel):
    generation: int
    cumulative_steps: int
    champion_score: float
    best_fitness: float
    mean_fitness: float

    @classmethod
    def from_report(cls, report: GenerationReport) -> 'CurvePoint':
        return cls(
            generation=report.generation,
            cumulative_steps=report.cumulative_steps,
            champion_score=report.champion_score,
            best_fitness=report.best_fitness,
            mean_fitness=report.mean_fitness,
        )

    def row(self) -> List[str]:
        return [str(self.generation), str(self.cumulative_steps), format_float(self.champion_score),
                format_float(self.best_fitness), format_float(self.mean_fitness)]


def make_manifest(config_path: Optional[Union[str, Path]] = None, arm: str = 'erl', seed: int = 0,
                  step_budget: Optional[int] = None, config: Optional[ErlConfig] = None) -> RunManifest:
    """Build a manifest from a config file (or object) and CLI-style overrides"""
    if config is None:
        config = load_config(config_path) if config_path else ErlConfig()
    if step_budget is not None:
        config = build_config({**config.model_dump(), 'step_budget': step_budget})
    return RunManifest(config=config, arm=arm, seed=seed)


def write_manifest(manifest: RunManifest, run_dir: Path):
    path = run_dir / settings.RUN_FILES['manifest']
    path.write_text(manifest.model_dump_json(indent=2), encoding='utf-8')


def read_manifest(run_dir: Union[str, Path]) -> RunManifest:
    path = Path(run_dir) / settings.RUN_FILES['manifest']
    if not path.exists():
        raise InputError(f"No manifest in {run_dir}")
    return RunManifest.model_validate_json(path.read_text(encoding='utf-8'))


def read_curve(run_dir: Union[str, Path]) -> List[CurvePoint]:
    """Curve points of a run directory, in file order"""
    path = Path(run_dir) / settings.RUN_FILES['curve']
    if not path.exists():
        raise InputError(f"No curve file in {run_dir}")
    with open(path, newline='', encoding='utf-8') as f:
        return [CurvePoint(**row) for row in csv.DictReader(f)]


def write_selection_rates(rates: Dict[str, float], total: int, path: Path):
    lines = [f"{tag}={format_float(value)}" for tag, value in rates.items()]
    lines.append(f"classified={total}")
    path.write_text("\n".join(lines) + "\n", encoding='utf-8')


def run_experiment(manifest: RunManifest, out_dir: Union[str, Path],
                   db: Optional[RunDatabaseManager] = None) -> Path:
    """
    Execute one run until its step budget

    Curve rows are written as generations complete, so a failed run keeps
    its partial outputs. Failures are recorded in the manifest (and the
    registry when given) and re-raised.

    Args:
        manifest: Run description
        out_dir: Run directory (created if missing)
        db: Optional run registry

    Returns:
        The run directory
    """
    run_dir = Path(out_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    config = manifest.run_config()
    save_config(config, run_dir / settings.RUN_FILES['config'])

    sink_id = logger.add(run_dir / settings.RUN_FILES['log'], level='DEBUG', enqueue=False)
    manifest = manifest.model_copy(update={
        'started_at': datetime.utcnow(), 'status': 'running', 'error': None,
        'finished_at': None, 'generations': 0, 'cumulative_steps': 0,
    })
    write_manifest(manifest, run_dir)

    registry_id = db.start_run(str(run_dir), manifest.arm, config.env, manifest.seed).id if db else None
    logger.info(f"Run {run_dir.name}: arm={manifest.arm} env={config.env} seed={manifest.seed} "
                f"budget={config.step_budget}")

    trainer = None
    curve_file = open(run_dir / settings.RUN_FILES['curve'], 'w', newline='', encoding='utf-8')
    try:
        writer = csv.writer(curve_file)
        writer.writerow(CURVE_COLUMNS)

        def on_report(report: GenerationReport):
            writer.writerow(CurvePoint.from_report(report).row())
            curve_file.flush()
            if db:
                db.record_generation(registry_id, report)

        trainer = ErlTrainer(config)
        trainer.train(config.step_budget, on_report)

        save_parameters(trainer.champion, run_dir / settings.RUN_FILES['snapshot'],
                        rl_actor=trainer.learner.actor, critic=trainer.learner.critic)
        if manifest.arm in SELECTION_ARMS:
            write_selection_rates(trainer.selection_rates(), trainer.sync_tracker.total,
                                  run_dir / settings.RUN_FILES['selection'])
        manifest = _finish(manifest, trainer, 'success')
        logger.info(f"✓ Run {run_dir.name} finished after {manifest.generations} generations")

    except Exception as e:
        manifest = _finish(manifest, trainer, 'failed', f"{type(e).__name__}: {e}")
        logger.error(f"✗ Run {run_dir.name} failed: {e}")
        raise

    finally:
        curve_file.close()
        write_manifest(manifest, run_dir)
        if db:
            last = trainer.reports[-1].champion_score if trainer and trainer.reports else None
            db.finish_run(registry_id, manifest.status, manifest.cumulative_steps, last, manifest.error)
        logger.remove(sink_id)

    return run_dir


def _finish(manifest: RunManifest, trainer: Optional[ErlTrainer], status: str,
            error: Optional[str] = None) -> RunManifest:
    return manifest.model_copy(update={
        'finished_at': datetime.utcnow(),
        'status': status,
        'error': error,
        'generations': trainer.generation if trainer else 0,
        'cumulative_steps': trainer.cumulative_steps if trainer else 0,
    })


def checkpoint_grid(curves: Sequence[List[CurvePoint]], interval: int) -> List[int]:
    """Checkpoints every interval steps, up to the shortest run's last point"""
    if interval < 1:
        raise InputError(f"interval must be >= 1, got {interval}")
    first = max(curve[0].cumulative_steps for curve in curves)
    last = min(curve[-1].cumulative_steps for curve in curves)
    start = -(-first // interval) * interval
    return list(range(start, last + 1, interval))


def value_at(curve: List[CurvePoint], steps: int) -> float:
    """Champion score of the last point at or before steps"""
    value = None
    for point in curve:
        if point.cumulative_steps > steps:
            break
        value = point.champion_score
    if value is None:
        raise InputError(f"Curve has no point at or before {steps} steps")
    return value


def aggregate_runs(run_dirs: Sequence[Union[str, Path]], interval: int = 10_000,
                   out_path: Optional[Union[str, Path]] = None) -> List[Dict]:
    """
    Mean and standard deviation of champion scores across runs per checkpoint

    Args:
        run_dirs: Runs to combine (typically one arm, several seeds)
        interval: Checkpoint spacing in cumulative steps
        out_path: Optional CSV destination

    Returns:
        Rows with cumulative_steps, mean, std and n
    """
    if not run_dirs:
        raise InputError("aggregate_runs needs at least one run directory")
    curves = [read_curve(d) for d in run_dirs]
    if any(not c for c in curves):
        raise InputError("Cannot aggregate a run with an empty curve")

    rows = []
    for steps in checkpoint_grid(curves, interval):
        values = np.array([value_at(c, steps) for c in curves])
        rows.append({
            'cumulative_steps': steps,
            'mean': float(values.mean()),
            'std': float(values.std()),
            'n': len(values),
        })

    if out_path is not None:
        with open(out_path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=['cumulative_steps', 'mean', 'std', 'n'])
            writer.writeheader()
            writer.writerows(rows)
        logger.info(f"✓ Aggregated {len(run_dirs)} runs into {out_path}")
    return rows

"""
Run registry operations
"""
from datetime import datetime
from typing import List, Optional

from config import settings
from erl.reports import GenerationReport
from storage.models import ExperimentRun, GenerationRecord, init_db, get_session


class RunDatabaseManager:
    """Record runs and their per-generation reports"""

    def __init__(self, database_url: Optional[str] = None):
        self.engine = init_db(database_url or settings.DATABASE_URL)
        self.session = get_session(self.engine)

    def start_run(self, run_dir: str, arm: str, env: str, seed: int) -> ExperimentRun:
        """Start tracking a run"""
        run = ExperimentRun(
            run_dir=run_dir,
            arm=arm,
            env=env,
            seed=seed,
            status='running',
            started_at=datetime.utcnow()
        )
        self.session.add(run)
        self.session.commit()
        return run

    def record_generation(self, run_id: int, report: GenerationReport) -> GenerationRecord:
        record = GenerationRecord(
            run_id=run_id,
            generation=report.generation,
            cumulative_steps=report.cumulative_steps,
            champion_score=report.champion_score,
            best_fitness=report.best_fitness,
            mean_fitness=report.mean_fitness,
            sync_classification=report.sync_classification.value if report.sync_classification else None,
        )
        self.session.add(record)
        self.session.commit()
        return record

    def finish_run(self, run_id: int, status: str = 'success', cumulative_steps: int = 0,
                   final_champion_score: Optional[float] = None, error: Optional[str] = None):
        """Finish tracking a run"""
        run = self.session.query(ExperimentRun).filter_by(id=run_id).first()
        if run:
            run.status = status
            run.finished_at = datetime.utcnow()
            run.cumulative_steps = cumulative_steps
            run.final_champion_score = final_champion_score
            run.error_message = error
            self.session.commit()

    def get_runs(self, limit: int = 20, arm: Optional[str] = None) -> List[ExperimentRun]:
        """Get recent runs"""
        query = self.session.query(ExperimentRun).order_by(ExperimentRun.started_at.desc())
        if arm:
            query = query.filter_by(arm=arm)
        return query.limit(limit).all()

    def get_generations(self, run_id: int) -> List[GenerationRecord]:
        return (self.session.query(GenerationRecord)
                .filter_by(run_id=run_id)
                .order_by(GenerationRecord.generation)
                .all())

    def close(self):
        """Close database session"""
        self.session.close()

"""
Database models for the experiment run registry
"""
from datetime import datetime
from sqlalchemy import create_engine, Column, Integer, String, Text, DateTime, Float, ForeignKey
from sqlalchemy.orm import declarative_base, relationship, sessionmaker

Base = declarative_base()


class ExperimentRun(Base):
    """One training run (arm + seed) and how it ended"""
    __tablename__ = 'experiment_runs'

    id = Column(Integer, primary_key=True)
    run_dir = Column(String(1000), index=True)
    arm = Column(String(20))  # 'erl', 'ddpg', 'ea', 'erl-ns'
    env = Column(String(50))
    seed = Column(Integer)
    status = Column(String(20))  # 'running', 'success', 'failed'
    started_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime, nullable=True)
    cumulative_steps = Column(Integer, default=0)
    final_champion_score = Column(Float, nullable=True)
    error_message = Column(Text, nullable=True)

    generations = relationship("GenerationRecord", back_populates="run",
                               cascade="all, delete-orphan", order_by="GenerationRecord.generation")

    def __repr__(self):
        return f"<ExperimentRun {self.arm}/seed={self.seed} {self.status}>"


class GenerationRecord(Base):
    """One GenerationReport of a run"""
    __tablename__ = 'generation_records'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('experiment_runs.id'), index=True)
    generation = Column(Integer)
    cumulative_steps = Column(Integer)
    champion_score = Column(Float)
    best_fitness = Column(Float)
    mean_fitness = Column(Float)
    sync_classification = Column(String(20), nullable=True)  # 'elite', 'selected', 'discarded'

    run = relationship("ExperimentRun", back_populates="generations")

    def __repr__(self):
        return f"<GenerationRecord run={self.run_id} gen={self.generation}>"


# Database initialization
def init_db(database_url='sqlite:///data/experiments.db'):
    """Initialize database and create tables"""
    engine = create_engine(database_url, echo=False)
    Base.metadata.create_all(engine)
    return engine


def get_session(engine):
    """Get database session"""
    Session = sessionmaker(bind=engine)
    return Session()

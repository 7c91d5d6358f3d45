"""Database schema for the run ledger using SQLAlchemy ORM"""

from sqlalchemy import Column, DateTime, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship
from sqlalchemy.sql import func

Base = declarative_base()


class ExperimentRun(Base):
    """One CLI invocation with its config hash and outcome"""

    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(50), nullable=False, index=True)
    system = Column(String(100))  # preset name or spec file
    depth = Column(Integer)
    config_hash = Column(String(64), nullable=False, index=True)
    config_json = Column(Text)
    status = Column(String(30), nullable=False)  # success, precondition, depth_exhausted, failed
    exit_code = Column(Integer, nullable=False)
    error_type = Column(String(100))
    error_message = Column(Text)
    output_path = Column(String(500))
    created_at = Column(DateTime, default=func.now())

    # Relationships
    steps = relationship("StepRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<ExperimentRun(id={self.id}, command='{self.command}', status='{self.status}')>"


class StepRecord(Base):
    """Uniformizer step recorded for a run"""

    __tablename__ = "step_records"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("experiment_runs.id"), nullable=False)
    step = Column(Integer, nullable=False)
    d_increment = Column(String(100), nullable=False)  # exact rational as p/q
    tolerance = Column(String(100), nullable=False)
    bad_columns = Column(Integer, default=0)
    floor = Column(Integer)

    run = relationship("ExperimentRun", back_populates="steps")

    def __repr__(self):
        return f"<StepRecord(run={self.run_id}, step={self.step}, d='{self.d_increment}')>"

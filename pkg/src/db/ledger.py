"""Recording and querying CLI runs in the ledger"""

from typing import List, Optional, Sequence

from loguru import logger
from sqlalchemy.orm import Session

from src.db.connection import get_db_session, init_database
from src.db.schema import ExperimentRun, StepRecord
from src.errors import TowerForgeError
from src.models.enums import RunStatus
from src.models.schemas import ExperimentConfig


def status_for(error: Optional[BaseException]) -> tuple[RunStatus, int]:
    """Ledger status and exit code for an outcome"""
    if error is None:
        return RunStatus.SUCCESS, 0
    if isinstance(error, TowerForgeError):
        status = RunStatus.DEPTH_EXHAUSTED if error.exit_code == 3 else RunStatus.PRECONDITION
        return status, error.exit_code
    return RunStatus.FAILED, 1


def add_run(
    session: Session,
    config: ExperimentConfig,
    error: Optional[BaseException] = None,
    output_path: Optional[str] = None,
    steps: Sequence = (),
) -> ExperimentRun:
    """Add a run (and its uniformizer steps) to an open session"""
    status, exit_code = status_for(error)
    run = ExperimentRun(
        command=config.command.value,
        system=config.preset or config.spec_file,
        depth=config.depth,
        config_hash=config.config_hash(),
        config_json=config.model_dump_json(),
        status=status.value,
        exit_code=exit_code,
        error_type=type(error).__name__ if error else None,
        error_message=str(error) if error else None,
        output_path=output_path,
    )
    for log in steps:
        run.steps.append(
            StepRecord(
                step=log.step,
                d_increment=str(log.d_increment),
                tolerance=str(log.tolerance),
                bad_columns=log.bad_columns,
                floor=log.floor,
            )
        )
    session.add(run)
    session.flush()
    return run


def record_run(
    config: ExperimentConfig,
    error: Optional[BaseException] = None,
    output_path: Optional[str] = None,
    steps: Sequence = (),
) -> Optional[int]:
    """Persist a run in the configured ledger; failures are logged, never raised"""
    try:
        init_database()
        with get_db_session() as session:
            run = add_run(session, config, error, output_path, steps)
            run_id = run.id
        logger.debug(f"Recorded run {run_id} ({config.command.value})")
        return run_id
    except Exception as e:
        logger.warning(f"Could not record run in ledger: {e}")
        return None


def list_runs(session: Session, command: Optional[str] = None, limit: int = 20) -> List[ExperimentRun]:
    query = session.query(ExperimentRun)
    if command:
        query = query.filter(ExperimentRun.command == command)
    return query.order_by(ExperimentRun.id.desc()).limit(limit).all()


def runs_with_hash(session: Session, config_hash: str) -> List[ExperimentRun]:
    return session.query(ExperimentRun).filter(ExperimentRun.config_hash == config_hash).all()

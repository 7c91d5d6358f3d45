"""Database connection and session management for the run ledger"""

from contextlib import contextmanager
from pathlib import Path
from typing import Generator

from loguru import logger
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from src.config.settings import settings
from src.db.schema import Base

# Database configuration
DB_PATH = Path(settings.database_path)

# Create engine
engine = create_engine(
    settings.get_database_url(),
    echo=False,  # Set to True for SQL query logging
    connect_args={"check_same_thread": False},  # Needed for SQLite
)

# Create session factory
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def init_database(force_recreate: bool = False) -> None:
    """
    Create the ledger tables.

    Args:
        force_recreate: If True, drop the existing database file first.
    """
    DB_PATH.parent.mkdir(parents=True, exist_ok=True)

    if force_recreate and DB_PATH.exists():
        logger.warning(f"Dropping existing ledger at {DB_PATH}")
        DB_PATH.unlink()

    Base.metadata.create_all(bind=engine)
    logger.debug(f"Ledger tables ready at {DB_PATH}")


@contextmanager
def get_db_session() -> Generator[Session, None, None]:
    """
    Context manager for database sessions.

    Yields:
        SQLAlchemy Session instance

    Example:
        with get_db_session() as session:
            runs = session.query(ExperimentRun).all()
    """
    session = SessionLocal()
    try:
        yield session
        session.commit()
    except Exception as e:
        session.rollback()
        logger.error(f"Database error: {e}")
        raise
    finally:
        session.close()


def reset_database() -> None:
    """Drop all tables and recreate the ledger schema"""
    logger.warning("Resetting ledger - all runs will be lost!")
    Base.metadata.drop_all(bind=engine)
    Base.metadata.create_all(bind=engine)


def check_database_exists() -> bool:
    return DB_PATH.exists()

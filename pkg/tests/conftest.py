"""Shared pytest fixtures for all tests"""

from fractions import Fraction

import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from src.config.settings import settings
from src.db.schema import Base
from src.partitions.partition import Partition
from src.rankone.spec import preset
from src.sets.intervals import IntervalSet
from src.towers.surgery import build_K_standard


# ========================
# Database Fixtures
# ========================


@pytest.fixture(scope="function")
def test_db():
    """
    Create an in-memory SQLite ledger.

    Each test gets an isolated database to prevent conflicts.
    """
    engine = create_engine(
        "sqlite:///:memory:",
        connect_args={"check_same_thread": False},
        echo=False,
    )
    Base.metadata.create_all(bind=engine)
    TestSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

    yield engine, TestSessionLocal

    Base.metadata.drop_all(bind=engine)
    engine.dispose()


@pytest.fixture(scope="function")
def db_session(test_db):
    """Session on the in-memory ledger, rolled back after the test"""
    engine, TestSessionLocal = test_db
    session = TestSessionLocal()

    yield session

    session.rollback()
    session.close()


# ========================
# Settings Fixtures
# ========================


@pytest.fixture(scope="function")
def isolated_settings(tmp_path, monkeypatch):
    """Point outputs, logs and the ledger at a temporary directory"""
    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "artifacts"))
    monkeypatch.setattr(settings, "log_dir", str(tmp_path / "logs"))
    monkeypatch.setattr(settings, "log_to_file", False)
    monkeypatch.setattr(settings, "ledger_enabled", False)
    return tmp_path


# ========================
# System Fixtures
# ========================


@pytest.fixture(scope="session")
def hk():
    """Hajian-Kakutani preset with stages up to the configured maximum"""
    return preset("hajian-kakutani")


@pytest.fixture(scope="session")
def chacon():
    return preset("chacon-infinite")


@pytest.fixture(scope="session")
def unit():
    """K = [0, 1), the stage-1 base"""
    return IntervalSet.of((0, 1))


@pytest.fixture(scope="session")
def half():
    return IntervalSet.of((0, Fraction(1, 2)))


@pytest.fixture(scope="session")
def alpha0(unit):
    """α0 = {complement, [0, 1)}"""
    return Partition((unit,))


@pytest.fixture(scope="session")
def alpha_halves(unit):
    """Two finite atoms splitting [0, 1) in halves"""
    return Partition((IntervalSet.of((0, Fraction(1, 2))), IntervalSet.of((Fraction(1, 2), 1))))


@pytest.fixture(scope="session")
def hk_tower_n3(hk, unit):
    """K-standard HK tower with heights 3 or 4 at depth 6"""
    return build_K_standard(hk, unit, 3, 6)

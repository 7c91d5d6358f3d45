"""Tests for the run ledger schema and recording helpers"""

from fractions import Fraction

import pytest
from sqlalchemy import create_engine, inspect
from sqlalchemy.orm import sessionmaker

import src.db.connection as connection
from src.db.ledger import add_run, list_runs, record_run, runs_with_hash, status_for
from src.db.schema import ExperimentRun, StepRecord
from src.errors import NeedsDeeperStage, NotRepresentable
from src.models.enums import CommandName, RunStatus
from src.models.schemas import ExperimentConfig
from src.uniformizer.steps import StepLog


def make_config(command=CommandName.BUILD_TOWER, **params):
    return ExperimentConfig(
        command=command,
        preset="hajian-kakutani",
        depth=6,
        params=params or {"K": "0:1", "N": "3"},
        out_dir="artifacts",
    )


class TestLedgerSchema:
    """Tables and relationships"""

    def test_tables_created(self, test_db):
        engine, _ = test_db
        tables = inspect(engine).get_table_names()
        assert "experiment_runs" in tables
        assert "step_records" in tables

    def test_step_relationship(self, db_session):
        run = ExperimentRun(
            command="uniformize", config_hash="x" * 64, status="success", exit_code=0
        )
        run.steps.append(StepRecord(step=1, d_increment="0", tolerance="1/8"))
        db_session.add(run)
        db_session.commit()

        stored = db_session.query(ExperimentRun).one()
        assert len(stored.steps) == 1
        assert stored.steps[0].run is stored
        assert "uniformize" in repr(stored)

    def test_cascade_delete(self, db_session):
        run = ExperimentRun(command="uniformize", config_hash="y" * 64, status="success", exit_code=0)
        run.steps.append(StepRecord(step=1, d_increment="0", tolerance="1/8"))
        db_session.add(run)
        db_session.commit()
        db_session.delete(run)
        db_session.commit()
        assert db_session.query(StepRecord).count() == 0


class TestStatus:
    """Outcome classification"""

    def test_success(self):
        assert status_for(None) == (RunStatus.SUCCESS, 0)

    def test_precondition(self):
        assert status_for(NotRepresentable("no")) == (RunStatus.PRECONDITION, 2)

    def test_depth_exhausted(self):
        assert status_for(NeedsDeeperStage("deeper")) == (RunStatus.DEPTH_EXHAUSTED, 3)

    def test_unexpected(self):
        assert status_for(RuntimeError("boom")) == (RunStatus.FAILED, 1)


class TestRecording:
    def test_add_run(self, db_session):
        config = make_config()
        run = add_run(db_session, config, output_path="artifacts")
        assert run.id is not None
        assert run.status == "success"
        assert run.system == "hajian-kakutani"
        assert run.config_hash == config.config_hash()

    def test_add_failed_run(self, db_session):
        run = add_run(db_session, make_config(), NeedsDeeperStage("orbit leaves the column"))
        assert run.exit_code == 3
        assert run.error_type == "NeedsDeeperStage"
        assert "orbit" in run.error_message

    def test_steps_recorded(self, db_session):
        logs = [
            StepLog(step=1, d_increment=Fraction(0), bad_mass=Fraction(0), tolerance=Fraction(1, 8),
                    floor=4, escalations=0, columns=12, bad_columns=0),
            StepLog(step=2, d_increment=Fraction(1, 64), bad_mass=Fraction(1, 64), tolerance=Fraction(1, 16),
                    floor=64, escalations=1, columns=40, bad_columns=3),
        ]
        run = add_run(db_session, make_config(CommandName.UNIFORMIZE, alpha="0:1", eps="1/2"), steps=logs)
        assert [s.d_increment for s in run.steps] == ["0", "1/64"]
        assert run.steps[1].bad_columns == 3

    def test_queries(self, db_session):
        first = make_config()
        add_run(db_session, first)
        add_run(db_session, first)
        add_run(db_session, make_config(CommandName.STATS, C="0:1/2", K="0:1"))
        assert len(list_runs(db_session)) == 3
        assert [r.command for r in list_runs(db_session, command="stats")] == ["stats"]
        assert len(runs_with_hash(db_session, first.config_hash())) == 2
        assert len(list_runs(db_session, limit=1)) == 1


class TestConfigHash:
    def test_hash_ignores_output_dir(self):
        a = make_config()
        b = a.model_copy(update={"out_dir": "elsewhere"})
        assert a.config_hash() == b.config_hash()

    def test_hash_tracks_params(self):
        assert make_config(K="0:1", N="3").config_hash() != make_config(K="0:1", N="4").config_hash()

    @pytest.mark.parametrize("depth", [4, 8])
    def test_hash_tracks_depth(self, depth):
        assert make_config().model_copy(update={"depth": depth}).config_hash() != make_config().config_hash()


class TestConnection:
    """Session helpers against a temporary ledger file"""

    @pytest.fixture
    def ledger_file(self, tmp_path, monkeypatch):
        path = tmp_path / "ledger" / "runs.db"
        engine = create_engine(f"sqlite:///{path}", connect_args={"check_same_thread": False})
        monkeypatch.setattr(connection, "DB_PATH", path)
        monkeypatch.setattr(connection, "engine", engine)
        monkeypatch.setattr(connection, "SessionLocal", sessionmaker(autocommit=False, autoflush=False, bind=engine))
        yield connection
        engine.dispose()

    def test_init_creates_file(self, ledger_file):
        assert not ledger_file.check_database_exists()
        ledger_file.init_database()
        assert ledger_file.check_database_exists()

    def test_record_run_commits(self, ledger_file):
        run_id = record_run(make_config(), output_path="out")
        assert run_id is not None
        with ledger_file.get_db_session() as session:
            assert [r.id for r in list_runs(session)] == [run_id]

    def test_session_rolls_back_on_error(self, ledger_file):
        ledger_file.init_database()
        with pytest.raises(RuntimeError):
            with ledger_file.get_db_session() as session:
                add_run(session, make_config())
                raise RuntimeError("abort")
        with ledger_file.get_db_session() as session:
            assert list_runs(session) == []

    def test_reset_drops_runs(self, ledger_file):
        ledger_file.init_database()
        with ledger_file.get_db_session() as session:
            add_run(session, make_config())
        ledger_file.reset_database()
        with ledger_file.get_db_session() as session:
            assert list_runs(session) == []

"""Basic tests for the project"""

from pathlib import Path

from src import TOOL_NAME, __version__
from src.config.settings import Settings
from src.errors import DepthBudgetError, NeedsDeeperStage, PreconditionError, TowerForgeError


def test_project_structure():
    """Test that project structure is correct"""
    project_root = Path(__file__).parent.parent
    expected_dirs = ["src", "tests"]

    for dir_name in expected_dirs:
        assert (project_root / dir_name).exists(), f"Missing directory: {dir_name}"


def test_version():
    assert TOOL_NAME == "towerforge"
    assert __version__.count(".") == 2


def test_settings_from_environment(monkeypatch):
    """TOWERFORGE_* variables override defaults"""
    monkeypatch.setenv("TOWERFORGE_MAX_DEPTH", "7")
    monkeypatch.setenv("TOWERFORGE_LEDGER_ENABLED", "false")
    s = Settings()
    assert s.max_depth == 7
    assert s.ledger_enabled is False
    assert s.get_database_url().startswith("sqlite:///")


def test_error_exit_codes():
    assert issubclass(PreconditionError, ValueError)
    assert PreconditionError("x").exit_code == 2
    assert NeedsDeeperStage("x").exit_code == 3
    assert issubclass(NeedsDeeperStage, DepthBudgetError)
    err = NeedsDeeperStage("leaves column", index=5)
    assert err.to_dict() == {
        "error": "NeedsDeeperStage",
        "message": "leaves column",
        "exit_code": 3,
        "details": {"index": "5"},
    }
    assert isinstance(err, TowerForgeError)

"""Application configuration settings"""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from TOWERFORGE_* environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="TOWERFORGE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Depth Configuration
    max_depth: int = Field(
        default=10,
        description="Largest stage depth any construction may build",
    )
    default_depth: int = Field(
        default=6,
        description="Stage depth used when a command does not pass --depth",
    )

    # Sampling Configuration
    sample_count: int = Field(
        default=64,
        description="Number of deterministic sample points in K",
    )
    m_schedule: list[int] = Field(
        default=[1, 2, 4, 8, 16, 32, 64, 128],
        description="Hit-count thresholds tried by uniformity tests",
    )
    stall_budget: int = Field(
        default=64,
        description="Horizons without new K hits before an orbit counts as bounded",
    )

    # Uniformizer Configuration
    floor_growth: int = Field(
        default=4,
        description="Factor applied to a step's tower floor on escalation",
    )
    max_escalations: int = Field(
        default=6,
        description="Tower floor escalations allowed per uniformizer step",
    )

    # Output Configuration
    output_dir: str = Field(
        default="artifacts",
        description="Directory for JSON/CSV reports and plot data",
    )
    plot_precision: int = Field(
        default=12,
        description="Decimal digits written to plot-data files",
    )

    # Database Configuration
    database_path: str = Field(
        default="data/towerforge.db",
        description="Path to SQLite run ledger",
    )
    ledger_enabled: bool = Field(
        default=True,
        description="Record every CLI run in the ledger",
    )

    # Logging Configuration
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )
    log_dir: str = Field(
        default="logs",
        description="Directory for the rotating log file",
    )
    log_to_file: bool = Field(
        default=True,
        description="Also write DEBUG logs to a file",
    )

    # Application Configuration
    app_name: str = Field(
        default="towerforge",
        description="Application name",
    )

    def get_database_url(self) -> str:
        """Get SQLAlchemy database URL"""
        db_path = Path(self.database_path)
        return f"sqlite:///{db_path}"

    def get_output_path(self) -> Path:
        """Get report output directory"""
        return Path(self.output_dir)


# Global settings instance
settings = Settings()

"""towerforge package."""

__version__ = "0.1.0"
TOOL_NAME = "towerforge"

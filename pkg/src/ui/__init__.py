"""UI components for the towerforge CLI"""

from .console import (
    make_console,
    print_error,
    print_status,
    print_table,
    show_spinner,
)

__all__ = [
    "make_console",
    "print_error",
    "print_status",
    "print_table",
    "show_spinner",
]

#!/usr/bin/env python3
"""
MALab CLI - runs the boundary-behaviour experiments from a run config.
"""

import sys
from typing import List, Optional
from pathlib import Path

from malab.utils.exceptions import (
    CommandError, CommandNotFoundError,
    ConfigurationError
)
from malab.utils import (
    import_module_from
)
from malab.cli.commands import (
    CommandRegistry, CommandParser,
    BaseCommand
)

__all__ = [
    'CommandRegistry',
    'CommandParser',
    'BaseCommand',
    'MALabCLI'
]

EXPERIMENT_COMMANDS = ('solve', 'sections', 'scaling', 'barriers', 'liouville', 'maxsection')


####
##      MALAB CLI ENTRY POINT
#####
class MALabCLI:
    """
    Main CLI class that handles command routing and execution.
    """

    def __init__(self):
        # Import all command modules to trigger registration
        self._discover_commands()

    def _discover_commands(self):
        """Discover and import all command modules."""

        commands_dir = Path(__file__).parent / "commands"

        for file_path in sorted(commands_dir.glob("*.py")):
            if file_path.name != "__init__.py" and file_path.name != "base.py":
                module_name = file_path.stem
                try:
                    import_module_from(f"malab.cli.commands.{module_name}")
                except ImportError as e:
                    print(
                        f"Warning: Could not import command module '{module_name}': {e}"
                    )

    def execute_from_command_line(
        self,
        argv: Optional[List[str]] = None
    ) -> int:
        """
        Execute a command from the command line arguments.

        Args:
            argv: List of command line arguments. If None, uses sys.argv.

        Returns:
            The exit status: 0 pass, 1 experiment fail, 2 error.
        """

        if argv is None:
            argv = sys.argv[1:]

        if not argv:
            self.print_help()
            return 0

        command_name = argv[0]
        command_args = argv[1:]

        try:
            # Special handling for help command
            if command_name in ['-h', '--help', 'help']:
                if command_args:
                    return self.print_command_help(command_args[0])
                self.print_help()
                return 0

            elif command_name in ['-v', '--version', 'version']:
                self.print_version()
                return 0

            # Get and execute the command
            command_class = CommandRegistry.get(command_name)
            command_instance = command_class()
            return command_instance.run_from_argv(command_args)

        # Command not found
        except CommandNotFoundError:
            print(f"Error: Unknown command '{command_name}'")
            print("Type 'malab help' for usage information.")
            return 2

        # Invalid run config: every issue with its line
        except ConfigurationError as e:
            print("Error: invalid run config")
            for issue in e.issues:
                print(f"  {issue}")
            return 2

        # Command Error
        except CommandError as e:
            print(str(e))
            return e.returncode

        # argparse exits on bad options
        except SystemExit as e:
            return e.code if isinstance(e.code, int) else 2

        # Keyboard Interuption
        except KeyboardInterrupt:
            print("\nOperation cancelled by user.")
            return 2

        # Unexpected Errors
        except Exception as e:
            print(f"Unexpected error: {type(e).__name__}: {e}")
            return 2

    def print_help(self):
        """Print the main help message."""

        print("MALab - boundary behaviour of degenerate Monge-Ampere equations")
        print()
        print("Usage:")
        print("     malab <command> --config <path> [--out <dir>] [--jobs N] [--seed-free]")
        print()
        print("Available commands:")

        commands = CommandRegistry.all()
        if not commands:
            print("     No commands available.")
            return

        experiment_commands = []
        utility_commands = []

        for command_class in commands:
            command_name = getattr(command_class, 'command_name', '')
            description = self._get_short_description(command_class)

            if command_name in EXPERIMENT_COMMANDS:
                experiment_commands.append((command_name, description))
            else:
                utility_commands.append((command_name, description))

        if experiment_commands:
            print("\n  Experiments:")
            for name, desc in sorted(experiment_commands):
                print(f"    {name:<15} {desc}")

        if utility_commands:
            print("\n  Utilities:")
            for name, desc in sorted(utility_commands):
                print(f"    {name:<15} {desc}")

        print()
        print("Exit status: 0 pass, 1 experiment fail, 2 runtime or config error.")
        print()
        print("For help on a specific command, use:")
        print("  malab <command> --help")
        print("  malab help <command>")

    def print_version(self):
        """Print current malab version"""
        from malab import __version__

        print(f'MALab v{__version__}')

    def print_command_help(self, command_name: str) -> int:
        """Print help for a specific command."""

        try:
            command_class = CommandRegistry.get(command_name)
            command_instance = command_class()
            command_instance.print_help()
            return 0
        except CommandNotFoundError:
            print(f"Error: Unknown command '{command_name}'")
            print("Type 'malab help' for a list of available commands.")
            return 2

    def _get_short_description(self, command_class) -> str:
        """Extract a short description from the command's docstring."""

        doc = command_class.__doc__ or ""
        lines = doc.strip().split('\n')
        return lines[0].strip() if lines else "No description available"

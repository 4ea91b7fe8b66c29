from argparse import (
    Namespace, ArgumentParser
)
from functools import partial
from abc import ABC
from typing import Any, ClassVar, Dict, Optional, Type, List

from malab.utils.exceptions import (
    CommandError, CommandNotFoundError
)


####
##    COMMAND REGISTRY
#####
class CommandRegistry:
    """
    Registry for all commands in the MALab CLI.
    Commands register themselves when their class is defined.
    """

    _commands: ClassVar[Dict[str, Type["BaseCommand"]]] = {}

    @classmethod
    def register(cls, name: str, command_cls: Type["BaseCommand"]) -> None:
        """Register a new command class."""
        cls._commands[name] = command_cls

    @classmethod
    def get(cls, name: str) -> Type["BaseCommand"]:
        """Get a command class by its name."""

        if name not in cls._commands:
            raise CommandNotFoundError(f"Command '{name}' not found.")
        return cls._commands[name]

    @classmethod
    def all(cls) -> List[Type["BaseCommand"]]:
        """Get all registered command classes."""
        return list(cls._commands.values())


####
##    COMMAND PARSER
#####
class CommandParser(ArgumentParser):
    """
    ArgumentParser that raises CommandError instead of exiting when a
    command is called programmatically.
    """

    def __init__(
        self, *,
        missing_args_message = None,
        called_from_command_line = None,
        **kwargs
    ):
        self.missing_args_message = missing_args_message
        self.called_from_command_line = called_from_command_line
        super().__init__(**kwargs)

    def parse_args(self, args = None, namespace = None):
        """Parse the command line arguments and return a Namespace object."""

        # Catch missing arguments for a better error message
        if self.missing_args_message and not args:
            self.error(self.missing_args_message)
        return super().parse_args(args, namespace)

    def error(self, message):
        """
        From the command line argparse prints usage and exits with status 2;
        otherwise a CommandError carries the message to the caller.
        """

        if self.called_from_command_line:
            super().error(message)
        else:
            raise CommandError(f"Error: {message}")

    def add_subparsers(self, **kwargs):
        """Subparsers inherit the command-line flag of their parent."""

        parser_class = kwargs.get("parser_class", type(self))
        if issubclass(parser_class, CommandParser):
            kwargs["parser_class"] = partial(
                parser_class,
                called_from_command_line = self.called_from_command_line,
            )
        return super().add_subparsers(**kwargs)


####
##    COMMAND BASE CLASS
#####
class BaseCommand(ABC):
    """
    Base class for all commands in the MALab CLI.
    Subclasses set `command_name`, declare their options in
    `add_arguments` and implement `handle`, which returns the exit status.
    """

    command_name: str = ""

    def __init_subclass__(cls, *args, **kwargs):

        # Automatically register the command class in the registry
        if cls.command_name:
            CommandRegistry.register(cls.command_name, cls)

        super().__init_subclass__(**kwargs)

    def __init__(self, called_from_command_line: bool = True):
        self.called_from_command_line = called_from_command_line

    def run_from_argv(self, argv: List[str]) -> int:
        """Parses `argv` and executes the command."""

        parser = self.create_parser()
        args = parser.parse_args(argv)
        return self.execute(args)

    def create_parser(self) -> CommandParser:
        """Parser with the command's description and arguments."""

        parser = CommandParser(
            prog = f"malab {self.command_name}",
            description = self.get_description(),
            missing_args_message = self.get_missing_args_message(),
            called_from_command_line = self.called_from_command_line,
        )
        self.add_arguments(parser)
        return parser

    def add_arguments(self, parser: CommandParser) -> None:
        """Add the command's arguments; overridden by subclasses."""

        pass

    def execute(self, args: Namespace) -> int:
        """Calls handle with the parsed arguments; None counts as success."""

        status = self.handle(**vars(args))
        return 0 if status is None else int(status)

    def handle(self, *args, **kwargs) -> Optional[int]:
        """Command logic; returns the exit status."""

        raise NotImplementedError("You must implement the 'handle' method.")

    def print_help(self) -> None:
        """Print the help message for the command."""

        parser = self.create_parser()
        parser.print_help()

    def get_description(self) -> str:
        """ Get the command description. """
        return self.__class__.__doc__ or ""

    def get_missing_args_message(self) -> Optional[str]:
        return "Missing required arguments for this command."


####
##      EXPERIMENT COMMAND CLASS
#####
class ExperimentCommand(BaseCommand):
    """
    Base class for the config-driven experiment commands.
    `malab <command> --config <path> [--out <dir>] [--jobs N] [--seed-free]`
    """

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument(
            "--config",
            required = True,
            help = "Path of the run config (INI-style text)"
        )
        parser.add_argument(
            "--out",
            default = None,
            help = "Output directory (overrides [output] dir)"
        )
        parser.add_argument(
            "--jobs",
            type = int,
            default = 1,
            help = "Number of jobs of an alpha matrix run side by side"
        )
        parser.add_argument(
            "--seed-free",
            action = "store_true",
            help = "Omit wall-clock fields so repeated runs are byte-identical"
        )

    def handle(self, **kwargs: Any) -> int:
        # Imported here so that `malab help` does not load the numerical stack
        from malab.cli.config import load_config
        from malab.cli.runner import run

        if kwargs.get("jobs", 1) < 1:
            raise CommandError("--jobs must be at least 1")
        config = load_config(kwargs["config"], command = self.command_name)
        return run(config, out_dir = kwargs.get("out"), jobs = kwargs.get("jobs", 1),
                   seed_free = kwargs.get("seed_free", False))

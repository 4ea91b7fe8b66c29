"""
Command to check that the installed numerical stack satisfies MALab's requirements.
"""

import json
from typing import Optional

from malab.cli.commands.base import (
    BaseCommand, CommandParser
)
from malab.utils.version_checker import (
    VersionChecker, CompatibilityResult
)


class CheckCommand(BaseCommand):
    """Check the installed numpy, scipy and pydantic against MALab's requirements."""

    command_name = "check"

    def add_arguments(self, parser: CommandParser) -> None:
        """Add arguments specific to the check command."""
        parser.add_argument(
            "--json",
            action = "store_true",
            help = "Output results in JSON format"
        )
        parser.add_argument(
            "--quiet",
            action = "store_true",
            help = "Only output errors and warnings"
        )
        parser.add_argument(
            "--exit-code",
            action = "store_true",
            help = "Exit with status 2 if a requirement is not satisfied"
        )

    def handle(self, **kwargs) -> int:
        """Handle the check command."""

        json_output = kwargs.get("json", False)
        quiet = kwargs.get("quiet", False)
        exit_code = kwargs.get("exit_code", False)

        try:
            result = VersionChecker().check_compatibility()

            if json_output:
                self._output_json(result)
            else:
                self._output_human_readable(result, quiet)

            if exit_code and not result.is_compatible:
                return 2

        except Exception as e:
            error_msg = f"Failed to check the installed stack: {e}"
            if json_output:
                self._output_json_error(error_msg)
            else:
                print(f"[ERROR] {error_msg}")

            if exit_code:
                return 2
        return 0

    def _output_human_readable(self, result: CompatibilityResult, quiet: bool) -> None:
        """Output results in human-readable format."""

        if not quiet:
            print("MALab Requirements Check")
            print("=" * 40)
            print()

        if result.is_compatible:
            print(f"[OK] {result}")
        else:
            print(f"[ERROR] {result}")

        if result.message:
            print(f"\n[INFO] {result.message}")

        if result.suggestions:
            if not quiet:
                print("\n[SUGGESTIONS]")
            for suggestion in result.suggestions:
                print(f"   - {suggestion}")

        if not quiet:
            print("\nVersion Details:")
            print(f"   MALab: {result.malab_version.version_str}")
            for check in result.checks:
                mark = "ok" if check.is_compatible else "!!"
                print(f"   [{mark}] {check.info.package_name}: {check.info.version_str} ({check.requirement})")

    def _output_json(self, result: CompatibilityResult) -> None:
        """Output results in JSON format."""

        output = {
            "compatible": result.is_compatible,
            "malab_version": result.malab_version.version_str,
            "python_version": result.python_version.version_str,
            "packages": {
                check.info.package_name: {
                    "version": check.info.version_str,
                    "requirement": check.requirement,
                    "compatible": check.is_compatible,
                }
                for check in result.checks
            },
            "message": result.message,
            "suggestions": result.suggestions,
        }
        print(json.dumps(output, indent = 2))

    def _output_json_error(self, error_msg: str) -> None:
        """Output error in JSON format."""

        output = {
            "compatible": False,
            "error": error_msg,
            "malab_version": "unknown",
            "python_version": "unknown",
        }
        print(json.dumps(output, indent = 2))

    def get_missing_args_message(self) -> Optional[str]:
        """Check command doesn't require arguments."""
        return None

"""
Tests for the malab check command.
"""

import json
from unittest.mock import patch, MagicMock

import pytest

from malab.cli.commands.check import CheckCommand
from malab.utils.version_checker import (
    VersionChecker, CompatibilityResult, PackageCheck, VersionInfo
)


def _result(numpy_version: str = "1.26.4") -> CompatibilityResult:
    checks = [
        PackageCheck(VersionInfo(numpy_version, "numpy"), ">=1.24"),
        PackageCheck(VersionInfo("1.11.4", "scipy"), ">=1.10"),
    ]
    result = CompatibilityResult(
        malab_version = VersionInfo("0.1.0", "MALab"),
        python_version = VersionInfo("3.11.4", "Python"),
        checks = checks,
    )
    result.message = "All requirements are satisfied" if result.is_compatible else "1 requirement(s) not satisfied"
    if not result.is_compatible:
        result.suggestions = [f"numpy {numpy_version} does not satisfy >=1.24"]
    return result


class TestCheckCommand:
    """Test cases for the CheckCommand class."""

    def setup_method(self):
        """Set up test fixtures."""
        self.command = CheckCommand()

    def test_command_name(self):
        """Test that the command has the correct name."""
        assert self.command.command_name == "check"

    def test_command_description(self):
        """Test that the command has a proper description."""
        description = self.command.get_description().lower()
        assert "malab" in description
        assert "numpy" in description

    def test_missing_args_message(self):
        """Test that no missing args message is returned."""
        assert self.command.get_missing_args_message() is None

    @patch('malab.cli.commands.check.VersionChecker')
    def test_handle_compatible_versions(self, mock_checker_class, capsys):
        """Test handling of a satisfied stack."""
        mock_checker = MagicMock()
        mock_checker_class.return_value = mock_checker
        mock_checker.check_compatibility.return_value = _result()

        assert self.command.handle() == 0
        mock_checker.check_compatibility.assert_called_once()
        out = capsys.readouterr().out
        assert "MALab Requirements Check" in out
        assert "[ok] numpy: 1.26.4 (>=1.24)" in out

    @patch('malab.cli.commands.check.VersionChecker')
    def test_handle_incompatible_versions(self, mock_checker_class, capsys):
        """Test handling of an unsatisfied requirement."""
        mock_checker = MagicMock()
        mock_checker_class.return_value = mock_checker
        mock_checker.check_compatibility.return_value = _result("1.20.0")

        assert self.command.handle() == 0
        out = capsys.readouterr().out
        assert "[ERROR]" in out
        assert "[!!] numpy: 1.20.0 (>=1.24)" in out
        assert "does not satisfy" in out

    @patch('malab.cli.commands.check.VersionChecker')
    def test_handle_json_output(self, mock_checker_class, capsys):
        """Test JSON output format."""
        mock_checker = MagicMock()
        mock_checker_class.return_value = mock_checker
        mock_checker.check_compatibility.return_value = _result()

        self.command.handle(json = True)
        data = json.loads(capsys.readouterr().out)
        assert data["compatible"] is True
        assert data["malab_version"] == "0.1.0"
        assert data["packages"]["scipy"] == {"version": "1.11.4", "requirement": ">=1.10", "compatible": True}

    @patch('malab.cli.commands.check.VersionChecker')
    def test_handle_quiet_mode(self, mock_checker_class, capsys):
        """Test quiet mode output."""
        mock_checker = MagicMock()
        mock_checker_class.return_value = mock_checker
        mock_checker.check_compatibility.return_value = _result()

        self.command.handle(quiet = True)
        out = capsys.readouterr().out
        assert "[OK]" in out
        assert "Version Details" not in out

    @pytest.mark.parametrize("numpy_version, expected", [("1.26.4", 0), ("1.20.0", 2)])
    @patch('malab.cli.commands.check.VersionChecker')
    def test_handle_exit_code(self, mock_checker_class, numpy_version, expected):
        """Test exit status with --exit-code."""
        mock_checker = MagicMock()
        mock_checker_class.return_value = mock_checker
        mock_checker.check_compatibility.return_value = _result(numpy_version)

        with patch('sys.stdout'):
            assert self.command.handle(exit_code = True) == expected

    @patch('malab.cli.commands.check.VersionChecker')
    def test_handle_exception(self, mock_checker_class, capsys):
        """Test handling of exceptions."""
        mock_checker = MagicMock()
        mock_checker_class.return_value = mock_checker
        mock_checker.check_compatibility.side_effect = Exception("Test error")

        assert self.command.handle() == 0
        assert "Test error" in capsys.readouterr().out
        assert self.command.handle(json = True, exit_code = True) == 2
        assert json.loads(capsys.readouterr().out)["compatible"] is False

    def test_add_arguments(self):
        """Test that arguments are properly added to the parser."""
        from malab.cli.commands import CommandParser

        parser = CommandParser()
        self.command.add_arguments(parser)

        actions = [action.dest for action in parser._actions]
        assert 'json' in actions
        assert 'quiet' in actions
        assert 'exit_code' in actions


class TestVersionChecker:
    """Test cases for the VersionChecker class."""

    def setup_method(self):
        """Set up test fixtures."""
        self.checker = VersionChecker()

    def test_requirements_structure(self):
        """Every requirement is a valid specifier."""
        from packaging.specifiers import SpecifierSet

        for name, requirement in VersionChecker.REQUIREMENTS.items():
            assert isinstance(name, str)
            SpecifierSet(requirement)
        assert set(VersionChecker.REQUIREMENTS) >= {"numpy", "scipy", "pydantic"}

    def test_version_info_creation(self):
        """Test VersionInfo object creation."""
        version_info = VersionInfo("1.2.3", "TestPackage")

        assert version_info.version_str == "1.2.3"
        assert version_info.package_name == "TestPackage"
        assert str(version_info) == "TestPackage v1.2.3"

    def test_unknown_version(self):
        """Missing packages have no parsed version and never satisfy a requirement."""
        info = VersionInfo("unknown", "ghost")
        assert info.version is None
        assert not PackageCheck(info, ">=1.0").is_compatible

    def test_compatibility_result(self):
        """A result is compatible only when every check passes."""
        assert _result().is_compatible
        assert not _result("1.20.0").is_compatible
        empty = CompatibilityResult(VersionInfo("0.1.0", "MALab"), VersionInfo("3.11.4", "Python"))
        assert not empty.is_compatible

    def test_missing_package(self):
        """Packages that are not installed report 'unknown'."""
        assert self.checker.get_package_version("surely-not-installed-malab-pkg").version_str == "unknown"

    def test_check_compatibility(self):
        """The installed stack is checked package by package, Python included."""
        with patch.object(VersionChecker, "get_package_version",
                          side_effect = lambda name: VersionInfo("0.1", name)):
            result = self.checker.check_compatibility()
        names = [check.info.package_name for check in result.checks]
        assert names[:-1] == list(VersionChecker.REQUIREMENTS)
        assert names[-1] == "Python"
        assert not result.is_compatible
        assert len(result.suggestions) == len(VersionChecker.REQUIREMENTS)

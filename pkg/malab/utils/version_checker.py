"""
Version checks for the numerical stack MALab runs on.
"""

import sys
from importlib import metadata
from typing import Dict, List, Optional

from packaging import version
from packaging.specifiers import SpecifierSet


class VersionInfo:
    """Container for version information."""

    def __init__(self, version_str: str, package_name: str):
        self.version_str = version_str
        self.package_name = package_name
        self.version = version.parse(version_str) if version_str != "unknown" else None

    def __str__(self) -> str:
        return f"{self.package_name} v{self.version_str}"

    def __repr__(self) -> str:
        return f"VersionInfo({self.package_name}, {self.version_str})"


class PackageCheck:
    """One installed package against its declared requirement."""

    def __init__(self, info: VersionInfo, requirement: str):
        self.info = info
        self.requirement = requirement

    @property
    def is_compatible(self) -> bool:
        return self.info.version is not None and self.info.version in SpecifierSet(self.requirement)


class CompatibilityResult:
    """Result of a compatibility check."""

    def __init__(self, malab_version: VersionInfo, python_version: VersionInfo,
                 checks: Optional[List[PackageCheck]] = None, message: str = "",
                 suggestions: Optional[List[str]] = None):
        self.malab_version = malab_version
        self.python_version = python_version
        self.checks = checks or []
        self.message = message
        self.suggestions = suggestions or []

    @property
    def is_compatible(self) -> bool:
        return bool(self.checks) and all(c.is_compatible for c in self.checks)

    def __str__(self) -> str:
        status = "compatible" if self.is_compatible else "incompatible"
        return f"{self.malab_version} is {status} with the installed stack"


class VersionChecker:
    """Checks the installed numerical stack against MALab's requirements."""

    REQUIREMENTS: Dict[str, str] = {
        "numpy": ">=1.24",
        "scipy": ">=1.10",
        "pydantic": ">=2.5,<3",
        "packaging": ">=21.0",
    }
    PYTHON = ">=3.10"

    def get_malab_version(self) -> VersionInfo:
        from malab import __version__

        return VersionInfo(__version__, "MALab")

    def get_python_version(self) -> VersionInfo:
        info = sys.version_info
        return VersionInfo(f"{info.major}.{info.minor}.{info.micro}", "Python")

    def get_package_version(self, package_name: str) -> VersionInfo:
        try:
            return VersionInfo(metadata.version(package_name), package_name)
        except metadata.PackageNotFoundError:
            return VersionInfo("unknown", package_name)

    def check_compatibility(self) -> CompatibilityResult:
        """Compares every required package and the interpreter with the declared specifiers."""

        python_version = self.get_python_version()
        checks = [PackageCheck(self.get_package_version(name), spec)
                  for name, spec in self.REQUIREMENTS.items()]
        checks.append(PackageCheck(python_version, self.PYTHON))

        suggestions = []
        for check in checks:
            if check.info.version is None:
                suggestions.append(f"Install {check.info.package_name} ({check.requirement})")
            elif not check.is_compatible:
                suggestions.append(
                    f"{check.info.package_name} {check.info.version_str} does not satisfy {check.requirement}"
                )
        result = CompatibilityResult(
            malab_version = self.get_malab_version(),
            python_version = python_version,
            checks = checks,
            suggestions = suggestions,
        )
        result.message = "All requirements are satisfied" if result.is_compatible else \
            f"{len(suggestions)} requirement(s) not satisfied"
        return result

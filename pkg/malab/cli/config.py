"""
Run configuration.
Flat INI-style text: an optional top-level `command = ...` line and the
blocks [domain], [problem], [solver], [experiment] and [output].
Every block is validated by a pydantic model; all problems found in a
file are collected and raised together as one ConfigurationError.
"""

import re
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import (
    BaseModel, ConfigDict, Field, ValidationError,
    field_validator, model_validator
)

from malab.core.domain import DomainSpec
from malab.core.problem import ProblemSpec, ScaleFunction, make_boundary_data
from malab.core.solver import SolverOptions
from malab.core.stencil import DEFAULT_WIDTH, Stencil
from malab.core.types import (
    BarrierFamily, DomainKind, RhsQuadrature, SlopeMethod, Weight
)
from malab.utils import get_logger
from malab.utils.exceptions import ConfigIssue, ConfigurationError, MALabError

logger = get_logger("MALab.Config")

_SECTION = re.compile(r"^\[\s*([A-Za-z_]\w*)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_]\w*)\s*=\s*(.*)$")
_FRACTION = re.compile(r"^[+-]?\d+\s*/\s*\d+$")
_COMMENT = ("#", ";")


####
##      COMMANDS
#####
class Command(str, Enum):
    """Experiment commands driven by a run config"""

    SOLVE = "solve"
    SECTIONS = "sections"
    SCALING = "scaling"
    BARRIERS = "barriers"
    LIOUVILLE = "liouville"
    MAXSECTION = "maxsection"


# -- value parsing -------------------------------------------------------

def parse_scalar(text: str) -> Union[bool, int, float, str]:
    """true/false, integers, floats and fractions like 1/64; anything else stays a tag."""

    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if _FRACTION.match(text):
        num, den = (part.strip() for part in text.split("/"))
        if int(den) == 0:
            return text
        return float(Fraction(int(num), int(den)))
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_value(text: str) -> Any:
    """A scalar, or a list of scalars when the value contains commas."""

    if "," in text:
        return [parse_scalar(part) for part in text.split(",") if part.strip()]
    return parse_scalar(text)


def _listify(value):
    if value is None or isinstance(value, (list, tuple)):
        return value
    return [value]


# -- blocks --------------------------------------------------------------

class _Block(BaseModel):
    model_config = ConfigDict(extra = "forbid", frozen = True, use_enum_values = False)


####
##      DOMAIN BLOCK
#####
class DomainBlock(_Block):
    """[domain]"""

    kind: DomainKind
    dim: int = Field(2, ge = 1, le = 3)
    rho: float = Field(0.5, gt = 0)
    center: Tuple[float, ...] = ()
    radius: float = Field(1.0, gt = 0)
    axes: Tuple[float, ...] = (1.0, 1.0)
    coefficients: Tuple[float, ...] = ()
    height: float = Field(1.0, gt = 0)
    base_radius: float = Field(1.0, gt = 0)
    length: float = Field(1.0, gt = 0)

    @model_validator(mode = "before")
    @classmethod
    def default_interval_dim(cls, data):
        if isinstance(data, dict) and data.get("kind") == "interval" and "dim" not in data:
            data = {**data, "dim": 1}
        return data

    @field_validator("center", "axes", "coefficients", mode = "before")
    @classmethod
    def as_tuple(cls, value):
        return _listify(value)


####
##      PROBLEM BLOCK
#####
class ProblemBlock(_Block):
    """[problem]"""

    alpha: float
    weight: Weight = Weight.GRAPH
    scale: float = Field(1.0, gt = 0)
    scale_amplitude: float = Field(0.0, gt = -1, lt = 1)
    phi: Literal["zero", "half_quadratic", "full_quadratic", "quadratic", "liouville"] = "half_quadratic"
    phi_matrix: Optional[Tuple[float, ...]] = None
    mu: Optional[float] = Field(None, gt = 0)

    @field_validator("alpha")
    @classmethod
    def check_alpha(cls, value: float) -> float:
        if not 0 < value < 2:
            raise ValueError("alpha must be in (0,2)")
        return value

    @field_validator("phi_matrix", mode = "before")
    @classmethod
    def as_tuple(cls, value):
        return _listify(value)


####
##      SOLVER BLOCK
#####
class SolverBlock(_Block):
    """[solver]"""

    spacing: Optional[float] = Field(None, gt = 0, le = 0.5)
    stencil_width: int = Field(DEFAULT_WIDTH, ge = 1, le = 4)
    tol: float = Field(1e-8, gt = 0)
    max_iter: int = Field(200, ge = 1)
    damping: int = Field(30, ge = 0)
    continuation_step: float = Field(0.25, gt = 0)
    rhs_quadrature: RhsQuadrature = RhsQuadrature.NODE
    clearance: float = Field(0.01, ge = 0, lt = 0.5)


####
##      EXPERIMENT BLOCK
#####
class ExperimentBlock(_Block):
    """[experiment]"""

    x0: Optional[Tuple[float, ...]] = None
    h: Union[Literal["auto"], Tuple[float, ...]] = "auto"
    slope_method: SlopeMethod = SlopeMethod.EXTRAPOLATED
    tolerance: float = Field(0.08, gt = 0)
    y0_top: float = Field(0.05, gt = 0)
    y0_bottom: float = Field(0.005, gt = 0)
    y0_count: int = Field(6, ge = 2)
    families: Tuple[BarrierFamily, ...] = ()
    search: bool = True
    constants: Dict[str, float] = Field(default_factory = dict)
    cap: Optional[float] = Field(None, gt = 0)
    source: Literal["solve", "radial"] = "solve"
    residual_tol: float = Field(0.02, gt = 0)
    box: Optional[Tuple[float, float, float]] = None
    expansion: bool = False
    alphas: Tuple[float, ...] = ()

    @field_validator("x0", "families", "box", "alphas", mode = "before")
    @classmethod
    def as_tuple(cls, value):
        return _listify(value)

    @field_validator("h", mode = "before")
    @classmethod
    def auto_or_tuple(cls, value):
        return value if value == "auto" else _listify(value)

    @field_validator("h")
    @classmethod
    def check_heights(cls, value):
        if value != "auto" and any(h <= 0 for h in value):
            raise ValueError("heights must be positive")
        return value

    @field_validator("alphas")
    @classmethod
    def check_alphas(cls, value):
        if any(not 0 < a < 2 for a in value):
            raise ValueError("alpha must be in (0,2)")
        return value

    @field_validator("constants", mode = "before")
    @classmethod
    def parse_pairs(cls, value):
        if isinstance(value, dict):
            return value
        pairs = {}
        for item in _listify(value) or []:
            name, sep, number = str(item).partition(":")
            if not sep:
                raise ValueError("constants must be name:value pairs")
            parsed = parse_scalar(number)
            if isinstance(parsed, (str, bool)):
                raise ValueError(f"constant '{name.strip()}' is not a number")
            pairs[name.strip()] = float(parsed)
        return pairs

    @model_validator(mode = "after")
    def check_ray(self):
        if self.y0_bottom >= self.y0_top:
            raise ValueError("y0_bottom must be smaller than y0_top")
        return self


####
##      OUTPUT BLOCK
#####
class OutputBlock(_Block):
    """[output]"""

    dir: str = "out"


_BLOCKS = {
    "domain": DomainBlock,
    "problem": ProblemBlock,
    "solver": SolverBlock,
    "experiment": ExperimentBlock,
    "output": OutputBlock,
}


####
##      RUN CONFIG
#####
class RunConfig(BaseModel):
    """A fully validated run configuration."""

    model_config = ConfigDict(frozen = True)

    command: Command
    problem: ProblemBlock
    domain: Optional[DomainBlock] = None
    solver: SolverBlock = SolverBlock()
    experiment: ExperimentBlock = ExperimentBlock()
    output: OutputBlock = OutputBlock()

    @property
    def alphas(self) -> List[float]:
        """The alpha matrix: [experiment] alphas, else the problem alpha."""

        return list(self.experiment.alphas) or [self.problem.alpha]

    def spacing(self, default: float = 1.0 / 64) -> float:
        return self.solver.spacing if self.solver.spacing is not None else default

    def stencil(self) -> Stencil:
        dim = self.domain.dim if self.domain is not None else 2
        return Stencil(dim, self.solver.stencil_width)

    def solver_options(self) -> SolverOptions:
        block = self.solver
        return SolverOptions(
            tol = block.tol, max_iter = block.max_iter, damping = block.damping,
            continuation_step = block.continuation_step,
            rhs_quadrature = block.rhs_quadrature, clearance = block.clearance,
        )

    def build_domain(self) -> DomainSpec:
        if self.domain is None:
            raise ConfigurationError([ConfigIssue(0, "missing required block [domain]")])
        return DomainSpec(**self.domain.model_dump())

    def build_problem(self, alpha: Optional[float] = None) -> ProblemSpec:
        block = self.problem
        alpha = block.alpha if alpha is None else alpha
        domain = self.build_domain()
        phi = make_boundary_data(
            block.phi, domain, matrix = block.phi_matrix,
            alpha = alpha if block.phi == "liouville" else None,
        )
        return ProblemSpec(
            domain = domain, alpha = alpha, weight = block.weight,
            scale = ScaleFunction(block.scale, block.scale_amplitude),
            phi = phi, mu = block.mu,
        )


# -- tokenizer -------------------------------------------------------------

class _Raw:
    """Tokenized config: values keep the line they came from."""

    def __init__(self):
        self.top: Dict[str, Tuple[str, int]] = {}
        self.blocks: Dict[str, Dict[str, Tuple[str, int]]] = {}
        self.block_lines: Dict[str, int] = {}
        self.issues: List[ConfigIssue] = []

    def line_of(self, block: str, key: Optional[str] = None) -> int:
        entries = self.blocks.get(block, {})
        if key is not None and key in entries:
            return entries[key][1]
        return self.block_lines.get(block, 0)


def tokenize(text: str) -> _Raw:
    raw = _Raw()
    current: Optional[str] = None
    for number, line in enumerate(text.splitlines(), start = 1):
        stripped = line.strip()
        if not stripped or stripped.startswith(_COMMENT):
            continue
        header = _SECTION.match(stripped)
        if header:
            current = header.group(1).lower()
            if current not in _BLOCKS:
                raw.issues.append(ConfigIssue(number, f"unknown block [{current}]"))
            elif current in raw.blocks:
                raw.issues.append(ConfigIssue(number, f"duplicate block [{current}]"))
            else:
                raw.blocks[current] = {}
                raw.block_lines[current] = number
            continue
        entry = _ENTRY.match(stripped)
        if not entry:
            raw.issues.append(ConfigIssue(number, f"expected 'key = value', got '{stripped}'"))
            continue
        key, value = entry.group(1), entry.group(2).strip()
        if current is None:
            if key != "command":
                raw.issues.append(ConfigIssue(number, f"unknown key '{key}' outside a block"))
            else:
                raw.top[key] = (value, number)
            continue
        if current not in _BLOCKS:
            continue
        target = raw.blocks[current]
        if key in target:
            raw.issues.append(ConfigIssue(number, f"duplicate key '{key}' in [{current}]"))
            continue
        target[key] = (value, number)
    return raw


def _clean(message: str) -> str:
    for prefix in ("Value error, ", "Assertion failed, "):
        if message.startswith(prefix):
            return message[len(prefix):]
    return message


def _translate(block: str, error: ValidationError, raw: _Raw) -> List[ConfigIssue]:
    issues = []
    for err in error.errors():
        loc = [str(part) for part in err.get("loc", ())]
        key = loc[0] if loc else None
        line = raw.line_of(block, key)
        if err.get("type") == "extra_forbidden":
            message = f"[{block}] unknown key '{key}'"
        elif err.get("type") == "missing":
            message = f"[{block}] missing required key '{key}'"
        elif key:
            message = f"[{block}] {key}: {_clean(err.get('msg', 'invalid value'))}"
        else:
            message = f"[{block}] {_clean(err.get('msg', 'invalid block'))}"
        issues.append(ConfigIssue(line, message))
    return issues


def required_blocks(command: Command) -> Tuple[str, ...]:
    if command == Command.LIOUVILLE:
        return ("problem",)
    return ("domain", "problem")


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    """
    Parses and validates a run config. `command` (from the command line)
    takes precedence over a `command = ...` line in the text.
    Raises ConfigurationError listing every issue found.
    """

    raw = tokenize(text)
    issues = list(raw.issues)

    name = command
    if name is None and "command" in raw.top:
        name = raw.top["command"][0]
    parsed_command: Optional[Command] = None
    if name is None:
        issues.append(ConfigIssue(0, "no command given"))
    else:
        try:
            parsed_command = Command(str(name).strip())
        except ValueError:
            line = raw.top["command"][1] if "command" in raw.top else 0
            issues.append(ConfigIssue(line, f"unknown command '{name}'"))

    if parsed_command is not None:
        for block in required_blocks(parsed_command):
            if block not in raw.blocks:
                issues.append(ConfigIssue(0, f"missing required block [{block}]"))

    models: Dict[str, BaseModel] = {}
    for block, entries in raw.blocks.items():
        data = {key: parse_value(value) for key, (value, _) in entries.items()}
        try:
            models[block] = _BLOCKS[block].model_validate(data)
        except ValidationError as e:
            issues.extend(_translate(block, e, raw))

    config = None
    if not issues:
        config = RunConfig(command = parsed_command, **models)
        issues.extend(_semantic_issues(config, raw))
    if issues:
        raise ConfigurationError(issues)
    logger.debug(f"parsed {config.command.value} config with blocks {sorted(models)}")
    return config


def _semantic_issues(config: RunConfig, raw: _Raw) -> List[ConfigIssue]:
    """Cross-block checks: the built domain and problem must be admissible."""

    issues = []
    if config.command == Command.LIOUVILLE:
        if any(not a < 1 for a in config.alphas):
            issues.append(ConfigIssue(raw.line_of("problem", "alpha"),
                                      "[problem] alpha: the Liouville solution needs alpha in (0,1)"))
        return issues
    try:
        domain = config.build_domain()
    except MALabError as e:
        return [ConfigIssue(raw.line_of("domain"), f"[domain] {e}")]
    for alpha in config.alphas:
        try:
            config.build_problem(alpha)
        except MALabError as e:
            issues.append(ConfigIssue(raw.line_of("problem"), f"[problem] {e}"))
            break
    block = config.problem
    if config.experiment.source == "radial" and (
            domain.kind != DomainKind.DISK or domain.dim != 2 or block.phi != "zero"
            or block.weight != Weight.DISTANCE or block.scale_amplitude != 0):
        issues.append(ConfigIssue(raw.line_of("experiment", "source"),
                                  "[experiment] source: the radial oracle needs a 2D disk with "
                                  "phi = zero, weight = distance and a constant scale"))
    x0 = config.experiment.x0
    if x0 is not None and len(x0) != domain.dim:
        issues.append(ConfigIssue(raw.line_of("experiment", "x0"),
                                  "[experiment] x0: expected one coordinate per dimension"))
    return issues


def load_config(path: Union[str, Path], command: Optional[str] = None) -> RunConfig:
    """Reads a UTF-8 config file and parses it."""

    path = Path(path)
    try:
        text = path.read_text(encoding = "utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError([ConfigIssue(0, f"cannot read {path}: {e}")]) from e
    return parse_config(text, command = command)

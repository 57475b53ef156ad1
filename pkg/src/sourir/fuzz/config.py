"""Generator configuration."""

from __future__ import annotations

import dataclasses
import tomllib
from pathlib import Path
from typing import TYPE_CHECKING, Any, Final

from sourir.errors import InvalidConfigError, ParseError
from sourir.ir.expressions import FALSE, NIL, TRUE, IntLit
from sourir.text.parser import parse_inputs

if TYPE_CHECKING:
    from collections.abc import Mapping

    from sourir.ir.expressions import Literal

INSTRUCTION_KINDS = (
    "var",
    "assign",
    "drop",
    "array",
    "store",
    "branch",
    "loop",
    "print",
    "read",
    "call",
)
"""Statement kinds the program generator draws from."""

PIPELINE_STAGES = (
    "insert-assume",
    "inject-predicate",
    "constant-propagate",
    "fold-branches",
    "remove-unreachable",
    "remove-dead-vars",
    "snapshot-move",
    "hoist-predicate",
    "compose-assume",
    "remove-trivial-assume",
    "inline",
)
"""Stages the pipeline generator draws from after the initial `create-version`."""

_DEFAULT_WEIGHTS: Final = {
    "var": 4.0,
    "assign": 3.0,
    "drop": 1.0,
    "array": 1.0,
    "store": 1.0,
    "branch": 1.5,
    "loop": 0.7,
    "print": 3.0,
    "read": 1.0,
    "call": 1.0,
}
_DEFAULT_STAGE_WEIGHTS: Final = dict.fromkeys(PIPELINE_STAGES, 1.0)
_DEFAULT_POOL: tuple[Literal, ...] = (IntLit(-1), IntLit(0), IntLit(1), IntLit(2), IntLit(3), TRUE, FALSE, NIL)


@dataclasses.dataclass(frozen=True, slots=True)
class GenConfig:
    """Bounds and weights of the random program, input and pipeline generators. Every draw derives from `seed`."""

    seed: int = 0
    max_functions: int = 3
    max_versions: int = 2
    max_instructions: int = 24
    max_array_length: int = 4
    max_call_depth: int = 2
    max_stages: int = 8
    input_slack: int = 2
    literal_pool: tuple[Literal, ...] = _DEFAULT_POOL
    weights: dict[str, float] = dataclasses.field(default_factory=lambda: dict(_DEFAULT_WEIGHTS))
    stage_weights: dict[str, float] = dataclasses.field(default_factory=lambda: dict(_DEFAULT_STAGE_WEIGHTS))

    def __post_init__(self) -> None:
        for field in (
            "max_functions",
            "max_versions",
            "max_instructions",
            "max_call_depth",
            "max_stages",
            "input_slack",
        ):
            if getattr(self, field) < 1:
                raise InvalidConfigError(field=field, reason="must be at least 1")
        if self.max_array_length < 0:
            raise InvalidConfigError(field="max_array_length", reason="must not be negative")
        if not self.literal_pool:
            raise InvalidConfigError(field="literal_pool", reason="must not be empty")
        self._check_weights("weights", self.weights, INSTRUCTION_KINDS)
        self._check_weights("stage_weights", self.stage_weights, PIPELINE_STAGES)

    @staticmethod
    def _check_weights(field: str, weights: Mapping[str, float], known: tuple[str, ...]) -> None:
        unknown = set(weights) - set(known)
        if unknown:
            raise InvalidConfigError(field=field, reason=f"unknown kinds {sorted(unknown)}")
        if any(weight < 0 for weight in weights.values()):
            raise InvalidConfigError(field=field, reason="weights must be nonnegative")
        if field == "weights" and not any(weights.values()):
            raise InvalidConfigError(field=field, reason="weights must not all be zero")

    def weight(self, kind: str) -> float:
        """
        Weight of an instruction kind; kinds absent from `weights` weigh zero.

        Args:
            kind (str): One of `INSTRUCTION_KINDS`.

        Returns:
            float: Weight.
        """
        return self.weights.get(kind, 0.0)

    def stage_weight(self, stage: str) -> float:
        """
        Weight of a pipeline stage; stages absent from `stage_weights` weigh zero.

        Args:
            stage (str): One of `PIPELINE_STAGES`.

        Returns:
            float: Weight.
        """
        return self.stage_weights.get(stage, 0.0)

    def with_seed(self, seed: int) -> GenConfig:
        """
        Copy with another seed.

        Args:
            seed (int): New seed.

        Returns:
            GenConfig: New configuration.
        """
        return dataclasses.replace(self, seed=seed)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> GenConfig:
        """
        Build a configuration from parsed TOML data.

        Keys mirror the field names. `literal_pool` is a string in the input script format, `[weights]` and
        `[stage_weights]` are tables replacing the default tables entirely.

        Args:
            data (Mapping[str, Any]): Configuration data.

        Returns:
            GenConfig: Validated configuration.

        Raises:
            InvalidConfigError: If a key is unknown or a value is out of range.
        """
        known = {field.name for field in dataclasses.fields(cls)}
        values: dict[str, Any] = {}
        for key, value in data.items():
            if key not in known:
                raise InvalidConfigError(field=key, reason="unknown key")
            match key:
                case "literal_pool":
                    try:
                        values[key] = tuple(parse_inputs(str(value)))
                    except ParseError as e:
                        raise InvalidConfigError(field=key, reason=str(e)) from e
                case "weights" | "stage_weights":
                    if not isinstance(value, dict):
                        raise InvalidConfigError(field=key, reason="must be a table")
                    values[key] = {str(k): float(v) for k, v in value.items()}
                case _:
                    if not isinstance(value, int) or isinstance(value, bool):
                        raise InvalidConfigError(field=key, reason="must be an integer")
                    values[key] = value
        return cls(**values)

    @classmethod
    def from_toml(cls, path: Path | str) -> GenConfig:
        """
        Read a configuration from a TOML file.

        Args:
            path (Path | str): Path to the file.

        Returns:
            GenConfig: Validated configuration.

        Raises:
            InvalidConfigError: If the file is not valid TOML or holds invalid values.
        """
        try:
            data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as e:
            raise InvalidConfigError(field="<file>", reason=str(e)) from e
        return cls.from_mapping(data)

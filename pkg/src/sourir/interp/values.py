from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING, Final

from sourir.errors import ExecutionError, RuntimeErrorKind
from sourir.ir.expressions import BoolLit, IntLit, NilLit

if TYPE_CHECKING:
    from collections.abc import Iterable

MAX_ARRAY_LENGTH: Final[int] = 1_000_000


@dataclasses.dataclass(frozen=True, slots=True)
class FunValue:
    """A function as a first-class value."""

    name: str


@dataclasses.dataclass(frozen=True, slots=True)
class Address:
    """Address of a heap block. Equality is identity of the block."""

    index: int


type Value = IntLit | BoolLit | NilLit | FunValue | Address

type Environment = dict[str, Value]


def describe(value: Value) -> str:
    """
    Short description of a value kind, used in error messages.

    Args:
        value (Value): Value to describe.

    Returns:
        str: Kind name.
    """
    match value:
        case IntLit():
            return "integer"
        case BoolLit():
            return "boolean"
        case NilLit():
            return "nil"
        case FunValue(name):
            return f"function &{name}"
        case Address():
            return "array"


class Heap:
    """
    Blocks of values addressed by `Address`.

    Addresses are handed out in increasing order and never reused within a run.
    """

    def __init__(self) -> None:
        self._blocks: list[list[Value]] = []

    def __len__(self) -> int:
        return len(self._blocks)

    def allocate(self, values: Iterable[Value]) -> Address:
        """
        Allocate a new block.

        Args:
            values (Iterable[Value]): Initial content.

        Returns:
            Address: Address of the new block.
        """
        self._blocks.append(list(values))
        return Address(len(self._blocks) - 1)

    def block(self, address: Address) -> list[Value]:
        """
        Get the block stored at an address.

        Args:
            address (Address): Address of the block.

        Returns:
            list[Value]: The live block.
        """
        return self._blocks[address.index]

    def length(self, address: Address) -> int:
        """
        Number of cells of a block.

        Args:
            address (Address): Address of the block.

        Returns:
            int: Block length.
        """
        return len(self._blocks[address.index])

    def load(self, address: Address, index: int) -> Value:
        """
        Read a cell.

        Args:
            address (Address): Address of the block.
            index (int): Cell index.

        Returns:
            Value: Cell content.

        Raises:
            ExecutionError: If the index is out of bounds.
        """
        block = self._blocks[address.index]
        if not 0 <= index < len(block):
            msg = f"index {index} is out of bounds for an array of length {len(block)}"
            raise ExecutionError(kind=RuntimeErrorKind.INDEX_OUT_OF_BOUNDS, message=msg)
        return block[index]

    def store(self, address: Address, index: int, value: Value) -> None:
        """
        Write a cell.

        Args:
            address (Address): Address of the block.
            index (int): Cell index.
            value (Value): New content.

        Raises:
            ExecutionError: If the index is out of bounds.
        """
        block = self._blocks[address.index]
        if not 0 <= index < len(block):
            msg = f"index {index} is out of bounds for an array of length {len(block)}"
            raise ExecutionError(kind=RuntimeErrorKind.INDEX_OUT_OF_BOUNDS, message=msg)
        block[index] = value

    def snapshot(self) -> tuple[tuple[Value, ...], ...]:
        """
        Immutable copy of the whole heap, used to assert that deoptimization leaves it untouched.

        Returns:
            tuple[tuple[Value, ...], ...]: Content of every block.
        """
        return tuple(tuple(block) for block in self._blocks)

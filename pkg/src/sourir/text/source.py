from __future__ import annotations

from io import BytesIO
from pathlib import Path
from typing import TYPE_CHECKING

from sourir.text.parser import parse, parse_inputs
from sourir.text.printer import render_program

if TYPE_CHECKING:
    from sourir.ir.expressions import Literal
    from sourir.ir.program import Program


class SourceFile:
    """
    A `.sourir` program bound to its textual representation.

    Responsible for loading programs from text or disk and writing them back in canonical form. The program is parsed
    once; rendering always goes through the canonical printer, so comments and synthesized labels of the original
    text are not preserved.
    """

    def __init__(self, program: Program, *, encoding: str = "utf-8", path: Path | None = None) -> None:
        """
        Args:
            program (Program): Program held by the file.
            encoding (str): Encoding used when writing bytes. Default is UTF-8.
            path (Path | None): Where the program was read from, if anywhere.
        """  # noqa: D205
        self._program = program
        self._encoding = encoding
        self._path = path

    @classmethod
    def from_text(cls, text: str) -> SourceFile:
        """
        Parse a program from source text.

        Args:
            text (str): Program source.

        Returns:
            SourceFile: File holding the parsed program.
        """
        return cls(parse(text))

    @classmethod
    def read(cls, path: Path | str, *, encoding: str = "utf-8") -> SourceFile:
        """
        Parse a program from a file on disk.

        Args:
            path (Path | str): Path to the `.sourir` file.
            encoding (str): Encoding of the file. Default is UTF-8.

        Returns:
            SourceFile: File holding the parsed program.
        """
        if isinstance(path, str):
            path = Path(path)
        return cls(parse(path.read_text(encoding=encoding)), encoding=encoding, path=path)

    @property
    def program(self) -> Program:
        """
        Get the program held by the file.

        Returns:
            Program: Parsed program.
        """
        return self._program

    @property
    def path(self) -> Path | None:
        """
        Get the path the program was read from.

        Returns:
            Path | None: Source path, or None for programs built in memory.
        """
        return self._path

    @property
    def encoding(self) -> str:
        """
        Get the encoding of the file content.

        Returns:
            str: Encoding of the file content.
        """
        return self._encoding

    def as_str(self) -> str:
        """
        Render the program canonically.

        Returns:
            str: Program source.
        """
        return render_program(self._program)

    def as_stream(self) -> BytesIO:
        """
        Render the program into a bytes stream.

        Returns:
            BytesIO: Bytes stream with the encoded program source.
        """
        return BytesIO(self.as_str().encode(self._encoding))

    def to_file(self, path: Path | str) -> Path:
        """
        Write the program to a file.

        Args:
            path (Path | str): Destination path.

        Returns:
            Path: Path to the written file.
        """
        if isinstance(path, str):
            path = Path(path)
        with path.open("wb") as file:
            file.write(self.as_stream().getvalue())
        return path


def read_inputs(path: Path | str, *, encoding: str = "utf-8") -> list[Literal]:
    """
    Read an input script from disk.

    Args:
        path (Path | str): Path to the script.
        encoding (str): Encoding of the file. Default is UTF-8.

    Returns:
        list[Literal]: Literals in order.
    """
    return parse_inputs(Path(path).read_text(encoding=encoding))

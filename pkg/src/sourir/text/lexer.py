from __future__ import annotations

import dataclasses
import enum
import re
from typing import Final

from sourir.errors import ParseError


class TokenKind(enum.Enum):
    """Lexical categories of the sourir surface syntax."""

    NUMBER = enum.auto()
    IDENT = enum.auto()
    SYMBOL = enum.auto()


@dataclasses.dataclass(frozen=True, slots=True)
class Token:
    """A lexeme with its 1-based position."""

    kind: TokenKind
    text: str
    line: int
    column: int

    @property
    def end(self) -> int:
        """
        Column right after the token.

        Returns:
            int: 1-based column following the last character.
        """
        return self.column + len(self.text)

    def is_symbol(self, text: str) -> bool:
        """
        Check for a specific punctuation or operator token.

        Args:
            text (str): Symbol text.

        Returns:
            bool: True if the token is that symbol.
        """
        return self.kind is TokenKind.SYMBOL and self.text == text

    def is_keyword(self, text: str) -> bool:
        """
        Check for a specific keyword token.

        Args:
            text (str): Keyword text.

        Returns:
            bool: True if the token is that keyword.
        """
        return self.kind is TokenKind.IDENT and self.text == text


KEYWORDS: Final[frozenset[str]] = frozenset(
    {
        "array",
        "assume",
        "branch",
        "call",
        "drop",
        "else",
        "false",
        "func",
        "goto",
        "length",
        "nil",
        "print",
        "read",
        "ret",
        "return",
        "stop",
        "true",
        "var",
        "version",
    },
)

_TOKEN_RE: Final = re.compile(
    r"""
    (?P<space>[ \t\r]+)
    | (?P<comment>\#.*)
    | (?P<number>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<symbol><-|==|!=|<=|>=|&&|\|\||[-+*/<>!=()\[\],.:&])
    """,
    re.VERBOSE,
)


def tokenize_line(text: str, line: int) -> list[Token]:
    """
    Split one source line into tokens, dropping whitespace and comments.

    Args:
        text (str): Line content without the trailing newline.
        line (int): 1-based line number used in positions.

    Returns:
        list[Token]: Tokens in order.

    Raises:
        ParseError: If a character does not start any token.
    """
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if match is None:
            raise ParseError(line=line, column=position + 1, reason=f"unexpected character {text[position]!r}")
        kind = match.lastgroup
        if kind == "number":
            tokens.append(Token(TokenKind.NUMBER, match.group(), line, position + 1))
        elif kind == "ident":
            tokens.append(Token(TokenKind.IDENT, match.group(), line, position + 1))
        elif kind == "symbol":
            tokens.append(Token(TokenKind.SYMBOL, match.group(), line, position + 1))
        position = match.end()
    return tokens

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Collection


def fresh_name(base: str, used: Collection[str]) -> str:
    """
    Return `base` if unused, otherwise `base_k` with the smallest `k >= 1` that does not collide.

    Args:
        base (str): Preferred name.
        used (Collection[str]): Names already taken.

    Returns:
        str: A name not contained in `used`.
    """
    if base not in used:
        return base
    suffix = 1
    while f"{base}_{suffix}" in used:
        suffix += 1
    return f"{base}_{suffix}"


class NameSupply:
    """
    Stateful wrapper around `fresh_name` that remembers every name it hands out.

    Used by passes that need several fresh names in a row, for example when renaming a whole inlinee.
    """

    def __init__(self, used: Collection[str] = ()) -> None:
        self._used = set(used)

    def fresh(self, base: str) -> str:
        """
        Return a fresh name and reserve it.

        Args:
            base (str): Preferred name.

        Returns:
            str: Reserved name.
        """
        name = fresh_name(base, self._used)
        self._used.add(name)
        return name

    def reserve(self, name: str) -> None:
        """
        Mark a name as taken.

        Args:
            name (str): Name to reserve.
        """
        self._used.add(name)

    def __contains__(self, name: object) -> bool:
        return name in self._used

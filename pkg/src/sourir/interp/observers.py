"""
Execution observers asserting static facts against the running machine.

Kept out of `sourir.interp`'s exports since they depend on the analyses of `sourir.passes`.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from sourir.analysis.scope import scope_at
from sourir.interp.machine import FrameOrigin
from sourir.interp.values import FunValue
from sourir.ir.expressions import FunRef
from sourir.passes.constprop import AbstractEnv, Const, NotConst, analyze_constants

if TYPE_CHECKING:
    from sourir.analysis.scope import ScopeMap
    from sourir.interp.machine import Configuration
    from sourir.interp.values import Value
    from sourir.ir.program import Location, Program

logger = logging.getLogger(__name__)


class ScopeAgreementObserver:
    """Records every step where the environment's variables differ from the static scope of the label."""

    def __init__(self, program: Program) -> None:
        self._program = program
        self._scopes: dict[tuple[str, str], ScopeMap] = {}
        self.violations: list[str] = []

    def before_step(self, config: Configuration) -> None:
        location = config.location
        if location is None:
            return
        key = (location.function, location.version)
        if key not in self._scopes:
            self._scopes[key] = scope_at(self._program, *key)
        expected = self._scopes[key].get(location.label)
        if expected is not None and frozenset(config.env) != expected:
            message = f"{location}: environment {sorted(config.env)} but scope {sorted(expected)}"
            logger.warning("Scope disagreement at %s", message)
            self.violations.append(message)

    def after_deopt(self, site: Location, config: Configuration) -> None:
        self.before_step(config)


def _holds(fact: Const | NotConst, value: Value | None) -> bool:
    if value is None:
        return False
    if isinstance(fact, NotConst):
        return value != fact.value
    if isinstance(fact.value, FunRef):
        return value == FunValue(fact.value.name)
    return value == fact.value


class ConstantFactObserver:
    """
    Records every step where a fact of the constant analysis does not hold in the running frame.

    Only frames entered at the start or by a call are checked; frames built by deoptimization are entered through
    labels the analysis treats as unknown anyway.
    """

    def __init__(self, program: Program) -> None:
        self._program = program
        self._facts: dict[tuple[str, str], dict[str, AbstractEnv]] = {}
        self.violations: list[str] = []
        self.checked = 0

    def before_step(self, config: Configuration) -> None:
        location = config.location
        if location is None or config.origin is FrameOrigin.DEOPT:
            return
        key = (location.function, location.version)
        if key not in self._facts:
            self._facts[key] = analyze_constants(self._program, *key)
        env = self._facts[key].get(location.label)
        if env is None:
            return
        for name, fact in env.items():
            self.checked += 1
            if not _holds(fact, config.env.get(name)):
                message = f"{location}: {name} is {config.env.get(name)!r}, expected {fact!r}"
                logger.warning("Constant fact violated at %s", message)
                self.violations.append(message)

    def after_deopt(self, site: Location, config: Configuration) -> None:
        """Deoptimization lands in a frame this observer does not check."""

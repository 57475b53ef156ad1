"""
Random pass pipelines with valid arguments.

A pipeline always starts by copying the active version of one function; every later stage works on that copy.
Candidate stages are simulated on the current program and only kept when they succeed, so a generated pipeline
replays without error on the program it was generated for.
"""

from __future__ import annotations

import logging
import random
from typing import TYPE_CHECKING

from sourir.analysis.scope import scope_at
from sourir.errors import PipelineAbortedError
from sourir.fuzz.config import PIPELINE_STAGES
from sourir.fuzz.generator import random_predicate
from sourir.ir.expressions import FunRef
from sourir.ir.instructions import Assume, Call
from sourir.ir.names import fresh_name
from sourir.passes.pipeline import PassInvocation, default_registry, run_pipeline
from sourir.text.printer import render_expr

if TYPE_CHECKING:
    from collections.abc import Iterator

    from sourir.fuzz.config import GenConfig
    from sourir.ir.program import Program
    from sourir.passes.base import PassRegistry

logger = logging.getLogger(__name__)

_ATTEMPTS = 8
_SIMPLE_STAGES = frozenset({"constant-propagate", "fold-branches", "remove-unreachable", "remove-dead-vars"})


class _Candidates:
    """Draws candidate invocations for one stage kind against the current program."""

    def __init__(self, rng: random.Random, cfg: GenConfig, registry: PassRegistry, function: str, version: str) -> None:
        self._rng = rng
        self._cfg = cfg
        self._registry = registry
        self._function = function
        self._version = version

    def _of(self, name: str, **arguments: str) -> PassInvocation:
        return PassInvocation.of(name, fn=self._function, version=self._version, **arguments)

    def _assumes(self, program: Program) -> list[tuple[str, Assume]]:
        instrs = program.stream(self._function, self._version)
        return [(label, instr) for label, instr in instrs if isinstance(instr, Assume)]

    def _shuffled[T](self, items: list[T]) -> list[T]:
        self._rng.shuffle(items)
        return items[:_ATTEMPTS]

    def draw(self, kind: str, program: Program) -> Iterator[list[PassInvocation]]:  # noqa: C901
        """
        Candidate stage sequences for a stage kind, most of them single invocations.

        Args:
            kind (str): One of `PIPELINE_STAGES`.
            program (Program): Current program.

        Yields:
            list[PassInvocation]: Invocations to try together.
        """
        rng = self._rng
        instrs = program.stream(self._function, self._version)
        if kind in _SIMPLE_STAGES:
            yield [self._of(kind)]
            return
        match kind:
            case "insert-assume":
                for label in self._shuffled(list(instrs.labels)):
                    yield [self._of(kind, at=label)]
            case "inject-predicate":
                scopes = scope_at(program, self._function, self._version)
                for label, _ in self._shuffled(self._assumes(program)):
                    scope = sorted(scopes.get(label, frozenset()))
                    if scope:
                        predicate = render_expr(random_predicate(rng, self._cfg, scope))
                        yield [self._of(kind, at=label, pred=predicate)]
            case "snapshot-move":
                yield from self._snapshot_moves(program)
            case "hoist-predicate":
                assumes = self._assumes(program)
                pairs = [(a, b) for a in assumes for b in assumes if a[0] != b[0] and a[1].predicates]
                for (source, assume), (destination, _) in self._shuffled(pairs):
                    index = str(rng.randrange(len(assume.predicates)))
                    yield [self._of(kind, **{"from": source, "to": destination, "index": index})]
            case "compose-assume":
                for label, _ in self._shuffled(self._assumes(program)):
                    yield [self._of(kind, at=label)]
            case "remove-trivial-assume":
                trivial = [(label, assume) for label, assume in self._assumes(program) if assume.is_trivial]
                for label, _ in self._shuffled(trivial):
                    yield [self._of(kind, at=label)]
            case "inline":
                direct = [
                    label for label, instr in instrs if isinstance(instr, Call) and isinstance(instr.callee, FunRef)
                ]
                for label in self._shuffled(direct):
                    yield [self._of(kind, at=label)]

    def _snapshot_moves(self, program: Program) -> Iterator[list[PassInvocation]]:
        scopes = scope_at(program, self._function, self._version)
        for label, assume in self._shuffled(self._assumes(program)):
            mentioned = sorted(assume.target.varmap.uses() & scopes.get(label, frozenset()))
            if not mentioned:
                yield [self._of("move-assume", at=label)]
                continue
            snapshot = self._of("snapshot-var", at=label, var=self._rng.choice(mentioned))
            try:
                after, _ = run_pipeline(program, [snapshot], registry=self._registry)
            except PipelineAbortedError:
                continue
            moved = after.stream(self._function, self._version).next_label(label)
            yield [snapshot, self._of("move-assume", at=moved)]
            yield [snapshot]


def gen_pipeline(cfg: GenConfig, program: Program) -> list[PassInvocation]:
    """
    Generate a random pipeline that applies without error to `program`.

    Args:
        cfg (GenConfig): Stage weights, stage bound and seed.
        program (Program): Well-formed program the pipeline is generated for.

    Returns:
        list[PassInvocation]: Stages, starting with `create-version`.
    """
    rng = random.Random(f"{cfg.seed}:pipeline")
    registry = default_registry()
    function = rng.choice(program.function_names)
    version = fresh_name("Vopt", program.function(function).version_labels)
    stages = [PassInvocation.of("create-version", fn=function, version=version)]
    current, _ = run_pipeline(program, stages, registry=registry)
    candidates = _Candidates(rng, cfg, registry, function, version)
    kinds = [kind for kind in PIPELINE_STAGES if cfg.stage_weight(kind) > 0]
    if not kinds:
        return stages
    for _ in range(rng.randint(0, cfg.max_stages - 1)):
        kind = rng.choices(kinds, weights=[cfg.stage_weight(kind) for kind in kinds])[0]
        for attempt in candidates.draw(kind, current):
            try:
                current, _ = run_pipeline(current, attempt, registry=registry)
            except PipelineAbortedError as e:
                logger.debug("Rejected %s: %s", " | ".join(stage.render() for stage in attempt), e)
                continue
            stages += attempt
            break
    logger.debug("Generated %d stage pipeline for seed %d", len(stages), cfg.seed)
    return stages

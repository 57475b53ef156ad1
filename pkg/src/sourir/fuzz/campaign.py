"""
End-to-end fuzz campaign.

One case per seed: generate a program, check it, generate and run a pipeline, then compare the original and the
optimized program on several input scripts, check transparency of the optimized program and assert the static facts
during a run. Cases are independent and run on a process pool; results come back in seed order.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import logging
import multiprocessing
from pathlib import Path
from typing import TYPE_CHECKING

from std_utils.more_str.generators import random_string
from tqdm import tqdm

from sourir.analysis.checker import check_program, render_diagnostics
from sourir.equivalence.diff import Verdict, check_transparency, diff_programs
from sourir.equivalence.report import render_diff, render_script
from sourir.errors import PipelineAbortedError
from sourir.fuzz.generator import gen_inputs, gen_program
from sourir.fuzz.pipelines import gen_pipeline
from sourir.interp.observers import ConstantFactObserver, ScopeAgreementObserver
from sourir.interp.runner import DEFAULT_FUEL, run
from sourir.passes.pipeline import render_pipeline, run_pipeline
from sourir.text.printer import render_program

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

    from sourir.fuzz.config import GenConfig

logger = logging.getLogger(__name__)

DEFAULT_SCRIPTS = 3


class CaseStage(enum.StrEnum):
    """Step of a fuzz case that failed, or `PASSED`."""

    GENERATE = "generate"
    PIPELINE = "pipeline"
    DIFF = "diff"
    TRANSPARENCY = "transparency"
    SOUNDNESS = "soundness"
    PASSED = "passed"


@dataclasses.dataclass(frozen=True, slots=True)
class CaseResult:
    """Outcome of one fuzz case, with everything needed to replay it as text."""

    seed: int
    stage: CaseStage
    program: str
    pipeline: str = ""
    scripts: tuple[str, ...] = ()
    verdicts: tuple[Verdict, ...] = ()
    report: str = ""

    @property
    def passed(self) -> bool:
        """
        Whether every check of the case passed.

        Returns:
            bool: True if the case reached the end.
        """
        return self.stage is CaseStage.PASSED


def run_case(cfg: GenConfig, seed: int, *, fuel: int = DEFAULT_FUEL, scripts: int = DEFAULT_SCRIPTS) -> CaseResult:
    """
    Run one fuzz case.

    Args:
        cfg (GenConfig): Generator configuration; its seed is replaced by `seed`.
        seed (int): Case seed.
        fuel (int): Step bound per run. Default is `DEFAULT_FUEL`.
        scripts (int): Number of input scripts to compare on. Default is `DEFAULT_SCRIPTS`.

    Returns:
        CaseResult: Outcome of the first failing step, or a passed result.
    """
    cfg = cfg.with_seed(seed)
    program = gen_program(cfg)
    text = render_program(program)
    diagnostics = check_program(program)
    if diagnostics:
        return CaseResult(seed, CaseStage.GENERATE, text, report=render_diagnostics(diagnostics))
    pipeline = gen_pipeline(cfg, program)
    pipeline_text = render_pipeline(pipeline)
    try:
        optimized, _ = run_pipeline(program, pipeline)
    except PipelineAbortedError as e:
        return CaseResult(seed, CaseStage.PIPELINE, text, pipeline_text, report=str(e))

    rendered: list[str] = []
    verdicts: list[Verdict] = []

    def failed(stage: CaseStage, report: str) -> CaseResult:
        return CaseResult(seed, stage, text, pipeline_text, tuple(rendered), tuple(verdicts), report)

    for variant in range(scripts):
        inputs = gen_inputs(cfg, program, variant=variant)
        rendered.append(render_script(inputs))
        diff = diff_programs(program, optimized, inputs, fuel)
        verdicts.append(diff.verdict)
        if not diff.passed:
            return failed(CaseStage.DIFF, render_diff(diff))
        transparency = check_transparency(optimized, inputs, fuel)
        if not transparency.passed:
            return failed(CaseStage.TRANSPARENCY, render_diff(transparency))
        scope, facts = ScopeAgreementObserver(optimized), ConstantFactObserver(optimized)
        run(optimized, inputs, fuel, observers=(scope, facts))
        if scope.violations or facts.violations:
            return failed(CaseStage.SOUNDNESS, "".join(f"{v}\n" for v in (*scope.violations, *facts.violations)))
    return CaseResult(seed, CaseStage.PASSED, text, pipeline_text, tuple(rendered), tuple(verdicts))


def write_reproducer(directory: Path, result: CaseResult) -> Path:
    """
    Write a failing case as `case-<seed>/` holding the program, pipeline, input scripts and report.

    Args:
        directory (Path): Parent directory, created if missing.
        result (CaseResult): Case to write.

    Returns:
        Path: The case directory.
    """
    case = directory / f"case-{result.seed}"
    case.mkdir(parents=True, exist_ok=True)
    (case / "program.sourir").write_text(result.program, encoding="utf-8")
    (case / "pipeline.txt").write_text(result.pipeline, encoding="utf-8")
    (case / "inputs.txt").write_text("".join(f"{script}\n" for script in result.scripts), encoding="utf-8")
    (case / "report.txt").write_text(f"stage: {result.stage}\n{result.report}", encoding="utf-8")
    return case


@dataclasses.dataclass(frozen=True, slots=True)
class CampaignSummary:
    """Aggregated results of a campaign, in seed order."""

    results: tuple[CaseResult, ...]
    output: Path | None = None

    @property
    def failures(self) -> tuple[CaseResult, ...]:
        """
        Failing cases.

        Returns:
            tuple[CaseResult, ...]: Cases that did not pass.
        """
        return tuple(result for result in self.results if not result.passed)

    def verdict_count(self, verdict: Verdict) -> int:
        """
        Count diff verdicts over every script of every case.

        Args:
            verdict (Verdict): Verdict to count.

        Returns:
            int: Number of comparisons with this verdict.
        """
        return sum(result.verdicts.count(verdict) for result in self.results)

    def render(self) -> str:
        """
        Render a summary line per failing case and a totals line.

        Returns:
            str: Summary text.
        """
        lines = [f"case-{failure.seed}: {failure.stage}" for failure in self.failures]
        lines.append(
            f"cases={len(self.results)} failed={len(self.failures)} "
            f"equal={self.verdict_count(Verdict.EQUAL)} inconclusive={self.verdict_count(Verdict.INCONCLUSIVE)}",
        )
        return "".join(f"{line}\n" for line in lines)


def default_output() -> Path:
    """
    Fresh directory name for reproducers in the working directory.

    Returns:
        Path: Directory path; not created.
    """
    return Path(random_string(prefix="sourir-fuzz-"))


def _results(
    cfg: GenConfig,
    seeds: Iterable[int],
    fuel: int,
    scripts: int,
    workers: int,
) -> Iterator[CaseResult]:
    worker = functools.partial(run_case, cfg, fuel=fuel, scripts=scripts)
    if workers <= 1:
        yield from map(worker, seeds)
        return
    with multiprocessing.Pool(processes=workers) as pool:
        yield from pool.imap(worker, seeds)


def run_campaign(  # noqa: PLR0913
    cfg: GenConfig,
    count: int,
    *,
    fuel: int = DEFAULT_FUEL,
    scripts: int = DEFAULT_SCRIPTS,
    workers: int = 1,
    output: Path | None = None,
    stop_on_failure: bool = False,
    progress: bool = False,
) -> CampaignSummary:
    """
    Run `count` fuzz cases with seeds `cfg.seed`, `cfg.seed + 1`, and so on.

    Args:
        cfg (GenConfig): Generator configuration.
        count (int): Number of cases.
        fuel (int): Step bound per run. Default is `DEFAULT_FUEL`.
        scripts (int): Input scripts per case. Default is `DEFAULT_SCRIPTS`.
        workers (int): Worker processes; 1 runs in the calling process. Default is 1.
        output (Path | None): Directory for reproducers of failing cases. Default writes none.
        stop_on_failure (bool): Stop at the first failing case. Default is False.
        progress (bool): Show a progress bar on standard error. Default is False.

    Returns:
        CampaignSummary: Results in seed order.
    """
    seeds = range(cfg.seed, cfg.seed + count)
    results: list[CaseResult] = []
    bar = tqdm(_results(cfg, seeds, fuel, scripts, workers), total=count, disable=not progress, unit="case")
    for result in bar:
        results.append(result)
        logger.debug("Case %d: %s", result.seed, result.stage)
        if result.passed:
            continue
        logger.error("Counterexample for seed %d at stage %s", result.seed, result.stage)
        if output is not None:
            logger.info("Reproducer written to %s", write_reproducer(output, result))
        if stop_on_failure:
            break
    bar.close()
    summary = CampaignSummary(tuple(results), output)
    logger.info(
        "Campaign of %d cases: %d failed, %d equal, %d inconclusive",
        len(results),
        len(summary.failures),
        summary.verdict_count(Verdict.EQUAL),
        summary.verdict_count(Verdict.INCONCLUSIVE),
    )
    return summary

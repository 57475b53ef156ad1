__all__ = [
    "BASE_VERSION",
    "DEFAULT_SCRIPTS",
    "INSTRUCTION_KINDS",
    "PIPELINE_STAGES",
    "CampaignSummary",
    "CaseResult",
    "CaseStage",
    "GenConfig",
    "Kind",
    "count_reads",
    "default_output",
    "gen_inputs",
    "gen_pipeline",
    "gen_program",
    "random_predicate",
    "run_campaign",
    "run_case",
    "write_reproducer",
]

from .campaign import (
    DEFAULT_SCRIPTS,
    CampaignSummary,
    CaseResult,
    CaseStage,
    default_output,
    run_campaign,
    run_case,
    write_reproducer,
)
from .config import INSTRUCTION_KINDS, PIPELINE_STAGES, GenConfig
from .generator import BASE_VERSION, Kind, count_reads, gen_inputs, gen_program, random_predicate
from .pipelines import gen_pipeline

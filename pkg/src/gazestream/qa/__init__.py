"""Streaming QA generation: ten task families over verified scanpaths."""

from .items import (
    MCQ_TASKS,
    PAST_TASKS,
    PRESENT_TASKS,
    PROACTIVE_TASKS,
    ActionAnnotation,
    ProactiveItem,
    QAItem,
    Skip,
    assemble_options,
    item_seed,
    read_actions,
    read_items,
    write_items,
)
from .proactive import DEFAULT_OFFSETS, denylist_filter, export_finetune, gen_gta, gen_oaa, oracle_static_filter
from .tasks import gen_fap, gen_gsm, gen_nfi, gen_oar, gen_oi, gen_otp, gen_sr, normalize_text

__all__ = [
    "ActionAnnotation",
    "DEFAULT_OFFSETS",
    "MCQ_TASKS",
    "PAST_TASKS",
    "PRESENT_TASKS",
    "PROACTIVE_TASKS",
    "ProactiveItem",
    "QAItem",
    "Skip",
    "assemble_options",
    "denylist_filter",
    "export_finetune",
    "gen_fap",
    "gen_gsm",
    "gen_gta",
    "gen_nfi",
    "gen_oaa",
    "gen_oar",
    "gen_oi",
    "gen_otp",
    "gen_sr",
    "item_seed",
    "normalize_text",
    "oracle_static_filter",
    "read_actions",
    "read_items",
    "write_items",
]

# SPDX-License-Identifier: Apache-2.0
"""Grammar-driven MAP-Elites search over LLM prompt structures.

The heavy lifting lives in the compiled extension; this package re-exports
its surface. See the project README for the CLI and file formats.
"""

from ._core import (  # noqa: F401
    Archive,
    BinConfig,
    GenericTables,
    Genotype,
    Grammar,
    Individual,
    IterationRecord,
    Phenotype,
    PromptElitesError,
    PromptTemplate,
    RunResult,
    StatResult,
    StructureSummary,
    TaskDataset,
    TaskInstance,
    archive_from_json_text,
    bin_key,
    chi_square_2x2_yates,
    cot_category,
    coverage_contingency,
    cramers_v,
    expand,
    extract,
    instantiate,
    load_archive,
    load_task,
    match_answer,
    mock_fitness,
    mutate,
    random_genotype,
    reference_prompt_text,
    run,
    sample_eval_instances,
    shot_category,
    spearman,
    task_from_json_text,
    two_proportion_z,
    type_token_ratio,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

"""Latency benchmark harness: corpus generation, load driving, reporting."""

from .corpus import (
    CorpusEntry,
    CorpusSpec,
    REFERENCE_DISTRIBUTION,
    generate_corpus,
    load_manifest,
    reference_buckets_with_total,
    scaled_reference_buckets,
)
from .report import BenchReport, ModeStats, REFERENCE_RATIOS, combined_text_table
from .runner import (
    BenchClient,
    LogRow,
    NonSuccessThresholdExceeded,
    TargetUnreachable,
    provision_profile,
    run_scenario,
)
from .scenario import Scenario, UserProfile, load_scenario

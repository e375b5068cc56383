"""Concurrent find-or-insert hash tables with a benchmark harness.

Two table designs over 32-bit words share one seeded hash family: a cuckoo
table with bounded eviction chains and a stash, and a bucketed table that
stores fixed-width vectors in 32-word buckets with no relocation.  The
bench module times find-or-insert sequences against either table, and the
trace module generates non-random sequences by exploring networks of
synchronizing automata.
"""

from .bench import (
    BenchReport,
    InternalConsistencyError,
    Workload,
    gen_random,
    load_workload,
    run,
    sweep,
)
from .bucket import BucketOutcome, BucketTable, fingerprint
from .cuckoo import CuckooTable, InsertOutcome, RebuildError
from .hashing import HashFamily, HashParams, generate
from .trace import (
    EXAMPLE_MODELS,
    Automaton,
    Model,
    ModelParseError,
    Trace,
    encode,
    example_model,
    explore,
    load_model,
    parse_model,
    read_trace,
    write_trace,
)
from .words import CLAIMED_WORD, EMPTY_WORD, FOUND, INSERTED, TABLE_FULL

__version__ = "0.1.0"

__all__ = [
    "Automaton",
    "BenchReport",
    "BucketOutcome",
    "BucketTable",
    "CLAIMED_WORD",
    "CuckooTable",
    "EMPTY_WORD",
    "EXAMPLE_MODELS",
    "FOUND",
    "HashFamily",
    "HashParams",
    "INSERTED",
    "InsertOutcome",
    "InternalConsistencyError",
    "Model",
    "ModelParseError",
    "RebuildError",
    "TABLE_FULL",
    "Trace",
    "Workload",
    "encode",
    "example_model",
    "explore",
    "fingerprint",
    "gen_random",
    "generate",
    "load_model",
    "load_workload",
    "parse_model",
    "read_trace",
    "run",
    "sweep",
    "write_trace",
]

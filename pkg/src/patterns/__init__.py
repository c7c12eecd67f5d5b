"""TDTdb construction and frequent sequence pattern mining."""

from .tdtdb import (
    Outcome,
    TransactionRecord,
    TDTdb,
    DuplicateEntry,
    TDTdbFormatError,
    build_tdtdb,
    extract_sequences,
    tumbling_windows,
    export_jsonl,
    import_jsonl,
)
from .prefixspan import (
    SequencePattern,
    MiningRun,
    absolute_min_sup,
    mine_frequent,
    run_mining,
    mining_metrics,
)
from .knowledge import (
    PatternClass,
    PatternKnowledge,
    classify_patterns,
    mine_knowledge,
    pattern_report,
    save_knowledge,
    load_knowledge,
)

__all__ = [
    "Outcome",
    "TransactionRecord",
    "TDTdb",
    "DuplicateEntry",
    "TDTdbFormatError",
    "build_tdtdb",
    "extract_sequences",
    "tumbling_windows",
    "export_jsonl",
    "import_jsonl",
    "SequencePattern",
    "MiningRun",
    "absolute_min_sup",
    "mine_frequent",
    "run_mining",
    "mining_metrics",
    "PatternClass",
    "PatternKnowledge",
    "classify_patterns",
    "mine_knowledge",
    "pattern_report",
    "save_knowledge",
    "load_knowledge",
]

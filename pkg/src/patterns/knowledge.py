"""Supportive / non-supportive pattern knowledge derived from the TDTdb."""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

import pandas as pd

from .prefixspan import SequencePattern, absolute_min_sup, mine_frequent
from .tdtdb import ItemsetSequence, Outcome, TDTdb, extract_sequences, tumbling_windows

logger = logging.getLogger(__name__)

KNOWLEDGE_VERSION = 1


class PatternClass(Enum):
    """Decision class of a mined pattern."""

    NF = "Nf"
    SF = "Sf"


@dataclass
class PatternKnowledge:
    """
    Classified patterns for placement guidance.

    nf: patterns frequent among failed co-assignments (avoid)
    sf: patterns frequent among successful co-assignments (prefer)
    persistence: canonical pattern -> number of windows it was frequent in
    """

    fsp: list[ItemsetSequence] = field(default_factory=list)
    ssp: list[ItemsetSequence] = field(default_factory=list)
    nf: list[SequencePattern] = field(default_factory=list)
    sf: list[SequencePattern] = field(default_factory=list)
    min_sup: int = 1
    persistence: dict[str, int] = field(default_factory=dict)

    def _co_residency(self, patterns: list[SequencePattern]) -> list[frozenset[str]]:
        return [
            frozenset(p.elements[0])
            for p in patterns
            if len(p.elements) == 1 and len(p.elements[0]) >= 2
        ]

    @property
    def nf_itemsets(self) -> list[frozenset[str]]:
        """Task groups that failed together on one server."""
        return self._co_residency(self.nf)

    @property
    def sf_itemsets(self) -> list[frozenset[str]]:
        """Task groups that ran together successfully."""
        return self._co_residency(self.sf)

    def is_non_supportive(self, group: Iterable[str]) -> bool:
        """True if the group contains a non-supportive co-residency pattern."""
        members = set(group)
        return any(itemset <= members for itemset in self.nf_itemsets)

    def supportive_score(self, group: Iterable[str]) -> int:
        """Number of supportive co-residency patterns contained in the group."""
        members = set(group)
        return sum(1 for itemset in self.sf_itemsets if itemset <= members)

    def classified(self) -> list[tuple[SequencePattern, PatternClass]]:
        return [(p, PatternClass.NF) for p in self.nf] + [(p, PatternClass.SF) for p in self.sf]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "pattern": p.canonical(),
                "support": p.support,
                "class": cls.value,
                "windows": self.persistence.get(p.canonical(), 1),
            }
            for p, cls in self.classified()
        ]
        return pd.DataFrame(rows, columns=["pattern", "support", "class", "windows"])


def classify_patterns(
    fsp_patterns: list[SequencePattern],
    ssp_patterns: list[SequencePattern],
    min_sup: int,
    fsp: Optional[list[ItemsetSequence]] = None,
    ssp: Optional[list[ItemsetSequence]] = None,
) -> PatternKnowledge:
    """
    Split mined patterns into Nf and Sf.

    Patterns below min_sup are insignificant and dropped. A pattern frequent
    among both failures and successes is kept in Nf only.
    """
    nf = sorted(
        (p for p in fsp_patterns if p.support >= min_sup),
        key=SequencePattern.sort_key,
    )
    failing = {p.elements for p in nf}
    overlap = [p for p in ssp_patterns if p.support >= min_sup and p.elements in failing]
    sf = sorted(
        (p for p in ssp_patterns if p.support >= min_sup and p.elements not in failing),
        key=SequencePattern.sort_key,
    )
    if overlap:
        logger.info(f"{len(overlap)} patterns frequent in both outcomes assigned to Nf")
    return PatternKnowledge(
        fsp=list(fsp or []),
        ssp=list(ssp or []),
        nf=nf,
        sf=sf,
        min_sup=min_sup,
    )


def _merge_windows(runs: list[list[SequencePattern]]) -> tuple[list[SequencePattern], Counter]:
    best: dict[tuple, SequencePattern] = {}
    seen: Counter = Counter()
    for patterns in runs:
        for p in patterns:
            seen[p.canonical()] += 1
            current = best.get(p.elements)
            if current is None or p.support > current.support:
                best[p.elements] = p
    return sorted(best.values(), key=SequencePattern.sort_key), seen


def mine_knowledge(
    db: TDTdb,
    min_sup: float,
    window_length: Optional[int] = None,
    max_itemsets: Optional[int] = None,
    max_itemset_size: Optional[int] = None,
) -> PatternKnowledge:
    """
    Mine Nf/Sf knowledge over tumbling windows of the TDTdb timestamps.

    A pattern is kept if it is frequent in any window; its support is the
    highest window support and `persistence` counts the windows.

    Args:
        db: Transaction database
        min_sup: Relative minSup in (0, 1], converted per window sequence database
        window_length: Timestamps per window (None = the whole history)
        max_itemsets: Pattern length cap
        max_itemset_size: Itemset size cap
    """
    fsp_runs, ssp_runs = [], []
    fsp_all: list[ItemsetSequence] = []
    ssp_all: list[ItemsetSequence] = []
    thresholds = []
    for start, end in tumbling_windows(db.timestamps, window_length):
        for outcome, runs, store in (
            (Outcome.FAILED, fsp_runs, fsp_all),
            (Outcome.SUCCEEDED, ssp_runs, ssp_all),
        ):
            seqdb = extract_sequences(db, outcome, start, end)
            store.extend(seqdb)
            if not seqdb:
                continue
            threshold = absolute_min_sup(min_sup, len(seqdb))
            thresholds.append(threshold)
            runs.append(mine_frequent(seqdb, threshold, max_itemsets, max_itemset_size))

    fsp_patterns, fsp_seen = _merge_windows(fsp_runs)
    ssp_patterns, ssp_seen = _merge_windows(ssp_runs)
    knowledge = classify_patterns(fsp_patterns, ssp_patterns, 1, fsp_all, ssp_all)
    knowledge.min_sup = max(thresholds, default=1)
    knowledge.persistence = {
        p.canonical(): (fsp_seen if cls is PatternClass.NF else ssp_seen)[p.canonical()]
        for p, cls in knowledge.classified()
    }
    return knowledge


def pattern_report(knowledge: PatternKnowledge, path: Path) -> None:
    """Write the (pattern, support, class, windows) CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    knowledge.to_frame().to_csv(path, index=False)


def save_knowledge(knowledge: PatternKnowledge, path: Path) -> None:
    """JSON dump of the classified patterns (sequence databases are not stored)."""
    payload = {
        "version": KNOWLEDGE_VERSION,
        "min_sup": knowledge.min_sup,
        "nf": [{"elements": [list(e) for e in p.elements], "support": p.support} for p in knowledge.nf],
        "sf": [{"elements": [list(e) for e in p.elements], "support": p.support} for p in knowledge.sf],
        "persistence": knowledge.persistence,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)


def load_knowledge(path: Path) -> PatternKnowledge:
    """Read knowledge written by save_knowledge."""
    with open(path) as f:
        payload = json.load(f)
    if payload.get("version") != KNOWLEDGE_VERSION:
        raise ValueError(f"Unsupported pattern knowledge version {payload.get('version')}")

    def patterns(rows: list[dict]) -> list[SequencePattern]:
        return [
            SequencePattern(tuple(tuple(e) for e in row["elements"]), int(row["support"]))
            for row in rows
        ]

    return PatternKnowledge(
        nf=patterns(payload["nf"]),
        sf=patterns(payload["sf"]),
        min_sup=int(payload["min_sup"]),
        persistence={k: int(v) for k, v in payload["persistence"].items()},
    )

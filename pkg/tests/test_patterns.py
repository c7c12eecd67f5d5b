"""Unit tests for the TDTdb, sequence mining and pattern knowledge."""

import itertools

import numpy as np
import pytest

from src.config import RunConfig
from src.domain.resources import ResourceVector
from src.patterns.knowledge import (
    PatternClass,
    classify_patterns,
    load_knowledge,
    mine_knowledge,
    pattern_report,
    save_knowledge,
)
from src.patterns.prefixspan import (
    SequencePattern,
    absolute_min_sup,
    mine_frequent,
    mining_metrics,
    run_mining,
)
from src.patterns.tdtdb import (
    DuplicateEntry,
    Outcome,
    TDTdbFormatError,
    TransactionRecord,
    build_tdtdb,
    export_jsonl,
    extract_sequences,
    import_jsonl,
    tumbling_windows,
)

ALPHABET = ("a", "b", "c", "d")
USAGE = ResourceVector(cpu_pe=0.5, cpu_mips=250, mem_gb=0.2)


def record(ts: int, task: str, server: str, outcome: Outcome = Outcome.FAILED) -> TransactionRecord:
    return TransactionRecord(
        timestamp=ts,
        task_id=task,
        vm_id=f"vm-{server}",
        server_id=server,
        usage=USAGE,
        outcome=outcome,
    )


def random_seqdb(rng: np.random.Generator) -> list[tuple]:
    """Up to 6 sequences of up to 4 itemsets, each of up to 4 items."""
    seqdb = []
    for _ in range(int(rng.integers(1, 7))):
        sequence = []
        for _ in range(int(rng.integers(1, 5))):
            size = int(rng.integers(1, 5))
            sequence.append(tuple(sorted(str(x) for x in rng.choice(ALPHABET, size=size, replace=False))))
        seqdb.append(tuple(sequence))
    return seqdb


def occurs_in(elements: tuple, sequence: tuple) -> bool:
    """Earliest-match subsequence test with itemset inclusion."""
    position = 0
    for element in elements:
        while position < len(sequence) and not set(element) <= set(sequence[position]):
            position += 1
        if position == len(sequence):
            return False
        position += 1
    return True


def subpatterns(sequence: tuple):
    """Every pattern contained in the sequence."""
    options = [
        [()] + [c for size in range(1, len(e) + 1) for c in itertools.combinations(e, size)]
        for e in sequence
    ]
    for choice in itertools.product(*options):
        elements = tuple(c for c in choice if c)
        if elements:
            yield elements


def brute_force(seqdb: list[tuple], min_sup: int) -> dict[tuple, int]:
    """Support of every pattern that occurs in at least one sequence."""
    candidates = {p for seq in seqdb for p in subpatterns(seq)}
    found = {}
    for elements in candidates:
        support = sum(1 for seq in seqdb if occurs_in(elements, seq))
        if support >= min_sup:
            found[elements] = support
    return found


def random_tdtdb(seed: int, ticks: int = 8, tasks: int = 6, servers: int = 40):
    rng = np.random.default_rng(seed)
    records = []
    for tick in range(ticks):
        for k in range(tasks):
            server = f"S{int(rng.integers(1, servers + 1))}"
            outcome = Outcome.FAILED if rng.random() < 0.3 else Outcome.SUCCEEDED
            records.append(record(tick * 5, f"t{k}", server, outcome))
    return build_tdtdb(records)


class TestTDTdb:
    """Tests for the transaction database."""

    def test_duplicate_rejected(self):
        with pytest.raises(DuplicateEntry):
            build_tdtdb([record(0, "a", "S1"), record(0, "a", "S2")])

    def test_indexes(self):
        db = build_tdtdb([record(5, "a", "S1"), record(0, "a", "S1"), record(0, "b", "S2")])
        assert len(db) == 3
        assert db.servers == ["S1", "S2"]
        assert db.timestamps == [0, 5]
        assert [r.timestamp for r in db.for_task("a")] == [0, 5]
        assert db.failure_count() == 3

    def test_extract_sequences(self):
        db = build_tdtdb([
            record(0, "b", "S1"),
            record(0, "a", "S1"),
            record(5, "a", "S1"),
            record(5, "b", "S1", Outcome.SUCCEEDED),
            record(0, "c", "S2", Outcome.SUCCEEDED),
        ])
        assert extract_sequences(db, Outcome.FAILED) == [(("a", "b"), ("a",))]
        assert extract_sequences(db, Outcome.SUCCEEDED) == [(("b",),), (("c",),)]
        assert extract_sequences(db, Outcome.FAILED, start=5) == [(("a",),)]

    def test_tumbling_windows(self):
        assert tumbling_windows([0, 5, 10, 15], 2) == [(0, 10), (10, 16)]
        assert tumbling_windows([0, 5, 10, 15], None) == [(0, 16)]
        assert tumbling_windows([], 3) == []

    def test_jsonl_file(self, tmp_path):
        db = build_tdtdb([record(0, "a", "S1"), record(5, "b", "S2", Outcome.SUCCEEDED)])
        path = tmp_path / "tdtdb.jsonl"
        export_jsonl(db, path)
        loaded = import_jsonl(path)
        assert list(loaded) == list(db)

    def test_bad_line(self, tmp_path):
        path = tmp_path / "tdtdb.jsonl"
        path.write_text('{"timestamp": 0}\n')
        with pytest.raises(TDTdbFormatError, match="Line 1"):
            import_jsonl(path)


class TestMining:
    """Tests for frequent sequence mining."""

    def test_absolute_min_sup(self):
        assert absolute_min_sup(0.1, 25) == 3
        assert absolute_min_sup(0.5, 4) == 2
        assert absolute_min_sup(0.009, 10) == 1
        with pytest.raises(ValueError):
            absolute_min_sup(0.0, 10)

    def test_containment(self):
        pattern = SequencePattern((("a",), ("b", "c")))
        assert pattern.contained_in((("a", "x"), ("y",), ("b", "c")))
        assert not pattern.contained_in((("b", "c"), ("a",)))

    def test_small_example(self):
        seqdb = [(("a", "b"), ("c",)), (("a",), ("c",)), (("b",),)]
        patterns = {p.elements: p.support for p in mine_frequent(seqdb, 2)}
        assert patterns == {
            (("a",),): 2,
            (("b",),): 2,
            (("c",),): 2,
            (("a",), ("c",)): 2,
        }

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        seqdb = random_seqdb(rng)
        min_sup = int(rng.integers(1, len(seqdb) + 1))
        mined = {p.elements: p.support for p in mine_frequent(seqdb, min_sup)}
        assert mined == brute_force(seqdb, min_sup)

    def test_caps(self):
        seqdb = [(("a", "b"), ("a", "b"))] * 2
        patterns = mine_frequent(seqdb, 1, max_itemsets=1, max_itemset_size=1)
        assert [p.elements for p in patterns] == [(("a",),), (("b",),)]

    def test_canonical_order(self):
        seqdb = [(("a", "b"), ("c",))]
        lengths = [p.sort_key() for p in mine_frequent(seqdb, 1)]
        assert lengths == sorted(lengths)

    def test_raising_min_sup_never_adds_patterns(self):
        rng = np.random.default_rng(11)
        seqdb = [s for _ in range(4) for s in random_seqdb(rng)]
        previous = None
        for min_sup in range(1, len(seqdb) + 1):
            current = {p.elements for p in mine_frequent(seqdb, min_sup)}
            if previous is not None:
                assert current <= previous
            previous = current

    def test_run_mining_metrics(self):
        run = run_mining([(("a",),), (("a",),)], 1)
        metrics = mining_metrics(run)
        assert metrics["pattern_count"] == 1
        assert metrics["runtime_ms"] >= 0
        assert run.sequence_count == 2


class TestKnowledge:
    """Tests for Nf / Sf classification."""

    @pytest.fixture
    def db(self):
        return build_tdtdb([
            record(0, "a", "S1"),
            record(0, "b", "S1"),
            record(5, "a", "S2"),
            record(5, "b", "S2"),
            record(0, "c", "S3", Outcome.SUCCEEDED),
            record(0, "d", "S3", Outcome.SUCCEEDED),
            record(5, "c", "S4", Outcome.SUCCEEDED),
            record(5, "d", "S4", Outcome.SUCCEEDED),
        ])

    def test_classification(self, db):
        knowledge = mine_knowledge(db, min_sup=0.5)
        assert frozenset({"a", "b"}) in knowledge.nf_itemsets
        assert frozenset({"c", "d"}) in knowledge.sf_itemsets
        assert knowledge.is_non_supportive(["a", "b", "x"])
        assert not knowledge.is_non_supportive(["a", "c"])
        assert knowledge.supportive_score(["c", "d"]) == 1

    def test_overlap_goes_to_nf(self):
        pattern = SequencePattern((("a",),), 3)
        knowledge = classify_patterns([pattern], [pattern], min_sup=1)
        assert knowledge.nf == [pattern]
        assert knowledge.sf == []

    def test_below_min_sup_dropped(self):
        knowledge = classify_patterns([SequencePattern((("a",),), 1)], [], min_sup=2)
        assert knowledge.nf == []

    def test_persistence_counts_windows(self, db):
        knowledge = mine_knowledge(db, min_sup=0.5, window_length=1)
        assert knowledge.persistence["<{a,b}>"] == 2
        assert (knowledge.nf[0], PatternClass.NF) in knowledge.classified()

    def test_save_and_load(self, db, tmp_path):
        knowledge = mine_knowledge(db, min_sup=0.5)
        path = tmp_path / "knowledge.json"
        save_knowledge(knowledge, path)
        loaded = load_knowledge(path)
        assert loaded.nf == knowledge.nf
        assert loaded.sf == knowledge.sf
        assert loaded.persistence == knowledge.persistence

    def test_report_columns(self, db, tmp_path):
        path = tmp_path / "patterns.csv"
        pattern_report(mine_knowledge(db, min_sup=0.5), path)
        header = path.read_text().splitlines()[0]
        assert header == "pattern,support,class,windows"


class TestMinSupSweep:
    """Raising minSup over the configured sweep only ever removes patterns."""

    CAPS = {"max_itemsets": 2, "max_itemset_size": 2}

    @pytest.mark.parametrize("seed", range(5))
    def test_raw_mining_shrinks(self, seed):
        db = random_tdtdb(seed)
        for outcome in (Outcome.FAILED, Outcome.SUCCEEDED):
            seqdb = extract_sequences(db, outcome)
            previous = None
            for relative in sorted(RunConfig().minsup_sweep):
                run = run_mining(seqdb, absolute_min_sup(relative, len(seqdb)), **self.CAPS)
                current = {p.elements for p in run.patterns}
                if previous is not None:
                    assert current <= previous, f"{outcome} at {relative}"
                previous = current

    @pytest.mark.parametrize("seed", range(5))
    def test_knowledge_shrinks(self, seed):
        db = random_tdtdb(seed)
        previous_nf = previous_all = None
        for relative in sorted(RunConfig().minsup_sweep):
            knowledge = mine_knowledge(db, min_sup=relative, **self.CAPS)
            nf = {p.elements for p in knowledge.nf}
            everything = nf | {p.elements for p in knowledge.sf}
            if previous_nf is not None:
                assert nf <= previous_nf
                assert everything <= previous_all
            previous_nf, previous_all = nf, everything

    def test_sweep_thresholds_are_distinct(self):
        seqdb = extract_sequences(random_tdtdb(0), Outcome.FAILED)
        thresholds = [absolute_min_sup(v, len(seqdb)) for v in sorted(RunConfig().minsup_sweep)]
        assert thresholds == sorted(thresholds)
        assert thresholds[0] < thresholds[-1]

import os
import random
import sys
from pathlib import Path

import pytest

from coref_meter.corpus import EntityPartition

TESTS = Path(__file__).resolve().parent
FIXTURES = TESTS / "fixtures"
sys.path.insert(0, str(FIXTURES))


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture(autouse=True)
def _no_thread_env(monkeypatch):
    monkeypatch.delenv("COREF_METER_THREADS", raising=False)


def random_partition_pair(rng: random.Random, max_mentions=8, max_entities=4):
    """Gold and predicted partitions over up to ``max_mentions`` spans.

    The predicted side drops some gold mentions and adds spurious ones, so
    both the unmatched and the regrouped cases are exercised.
    """
    n = rng.randint(1, max_mentions)
    universe = [(i, i + rng.randint(0, 1)) for i in range(0, 3 * (n + 3), 3)]
    gold_mentions = rng.sample(universe, n)
    k = rng.randint(1, max_entities)
    gold = {}
    for m in gold_mentions:
        gold.setdefault(rng.randrange(k), []).append(m)
    pool = [m for m in gold_mentions if rng.random() < 0.8] + [m for m in universe if m not in gold_mentions and rng.random() < 0.2]
    pool = pool[:max_mentions]
    k2 = rng.randint(1, max_entities)
    pred = {}
    for m in pool:
        pred.setdefault(rng.randrange(k2), []).append(m)
    return EntityPartition.from_clusters(gold.values()), EntityPartition.from_clusters(pred.values())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])

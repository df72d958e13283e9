from pathlib import Path

import numpy as np
import pytest

from manifoldwalk.graphs import knn_adjacency

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


def random_knn_adjacency(rng, n_max=200, symmetrize=None):
    n = int(rng.integers(5, n_max + 1))
    d = int(rng.integers(1, 4))
    k = int(rng.integers(1, min(n - 1, 12) + 1))
    sym = bool(rng.integers(2)) if symmetrize is None else symmetrize
    return knn_adjacency(rng.normal(size=(n, d)), k, sym)


def random_pair(rng, n_max=200):
    n = int(rng.integers(5, n_max + 1))
    d = int(rng.integers(1, 4))
    k = int(rng.integers(1, min(n - 1, 12) + 1))
    sym = bool(rng.integers(2))
    X = rng.normal(size=(n, d))
    Y = X + rng.normal(scale=0.5, size=X.shape)
    return knn_adjacency(X, k, sym), knn_adjacency(Y, k, sym)


CRITERIA = {
    1: "identity/symmetry on 100 random k-NN graphs",
    2: "walk matrix equals truncated Neumann series",
    3: "two-node closed form d = 0.143562",
    4: "mean distance strictly increasing in noise (Spearman 1.0)",
    5: "Swiss roll TL >= 75% and >= no-TL + 20 points",
    6: "banknotes TL >= 90% and >= no-TL",
    7: "banknotes TL advantage shrinks from (10, 1) to (40, 4)",
    8: "TL accuracy non-increasing in noise (Spearman <= -0.9)",
    9: "k-NN graph equals brute-force oracle",
    10: "superpixel grid, N=1 and coarse/medium ordering",
    11: "baselines zero on identical inputs and symmetric",
    12: "tables --quick --seed 42 byte-identical",
}


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    for status in ("passed", "failed", "skipped", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            if status == "passed" and rep.when != "call":
                continue
            number = int(nodeid.split("test_criterion_")[1][:2])
            outcomes.setdefault(number, set()).add(status)
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, text in CRITERIA.items():
        seen = outcomes.get(number, {"not run"})
        if seen & {"failed", "error"}:
            label = "FAIL"
        elif "skipped" in seen:
            label = "SKIP"
        elif "passed" in seen:
            label = "PASS"
        else:
            label = "NOT RUN"
        terminalreporter.write_line(f"criterion {number:2d}: {label:7s} {text}")

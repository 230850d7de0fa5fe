import numpy as np
import pytest
from hypothesis import settings
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def csgraph_distances(graph):
    """All-pairs hop distances computed independently with scipy."""
    rows = [u for u, v, _, _ in graph.edges]
    cols = [v for u, v, _, _ in graph.edges]
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(graph.n, graph.n)).tocsr()
    return shortest_path(adj, directed=False, unweighted=True)


def random_world(n, max_degree, seed):
    """Random connected graph with a random non-empty landmark subset."""
    from landmap import gen_random_landmark_graph, partition_from_landmarks
    graph, _ = gen_random_landmark_graph(n, max_degree, n, 0, seed)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
    return graph, partition_from_landmarks(graph, chosen.tolist())


@pytest.fixture(scope="session")
def grid5():
    from landmap import gen_grid
    return gen_grid(5, 5, "all")


ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(number, ok, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

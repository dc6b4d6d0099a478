import numpy as np
import pytest

from biview import kg as kgmod


def nid(i: int) -> str:
    # zero padding keeps canonical (sorted) order equal to numeric order
    return f"v{i:03d}"


def graph(edges, n=None, labels=None, weights=None):
    """Graph over nodes v000.. with ``edges`` as (i, j) index pairs."""
    n = n if n is not None else (max(max(e) for e in edges) + 1 if edges else 0)
    triples = []
    for k, (i, j) in enumerate(edges):
        w = 1.0 if weights is None else weights[k]
        triples.append((nid(i), "r", nid(j), w))
    lab = {nid(i): c for i, c in (labels or {}).items()}
    return kgmod.from_triples(triples, lab, extra_nodes=[nid(i) for i in range(n)])


def adjacency(edges, n=None, mode=kgmod.UNDIRECTED, weights=None):
    return kgmod.build_adjacency(graph(edges, n, weights=weights), mode)


TRIANGLE = [(0, 1), (1, 2), (2, 0)]
PATH3 = [(0, 1), (1, 2)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting ----------------------------------------------------

import contextlib
import time

_CRITERIA: dict[int, tuple[str, str, str]] = {}


class _Outcome:
    detail = ""


@pytest.fixture
def criterion():
    """Record one acceptance criterion; a summary line per criterion is printed at session end."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        out = _Outcome()
        start = time.perf_counter()
        try:
            yield out
        except pytest.skip.Exception as exc:
            _CRITERIA[number] = ("SKIP", title, str(exc))
            raise
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _CRITERIA[number] = ("FAIL", title, msg)
            raise
        took = time.perf_counter() - start
        _CRITERIA[number] = ("PASS", title, f"{out.detail} [{took:.1f}s]".strip())

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}: {title} -- {detail}")

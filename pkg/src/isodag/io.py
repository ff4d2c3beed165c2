"""Instance file formats.

Graph file:   header "n m", then m lines "tail head [length]".
Obs file:     n lines "vertex y [w]", each vertex exactly once (w defaults 1).

Parsing is strict and bit-exact; every error carries its 1-based line number.
"""

import numpy as np

from .dag import Dag
from .errors import ParseError


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield lineno, line.split()


def parse_graph(text):
    it = _tokens(text)
    try:
        lineno, head = next(it)
    except StopIteration:
        raise ParseError(1, "empty graph file") from None
    if len(head) != 2:
        raise ParseError(lineno, "header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(lineno, "header must be two integers") from None
    edges = []
    for lineno, tok in it:
        if len(edges) == m:
            raise ParseError(lineno, "more edge lines than the header announced")
        if len(tok) not in (2, 3):
            raise ParseError(lineno, "edge line must be 'tail head [length]'")
        try:
            tail, headv = int(tok[0]), int(tok[1])
            length = float(tok[2]) if len(tok) == 3 else 1.0
        except ValueError:
            raise ParseError(lineno, f"malformed edge line: {' '.join(tok)}") from None
        edges.append((tail, headv, length))
    if len(edges) != m:
        raise ParseError(lineno if edges else 1, f"expected {m} edges, got {len(edges)}")
    return Dag(n, edges)


def parse_obs(text, n):
    y = np.full(n, np.nan)
    w = np.ones(n)
    seen = np.zeros(n, dtype=bool)
    for lineno, tok in _tokens(text):
        if len(tok) not in (2, 3):
            raise ParseError(lineno, "observation line must be 'vertex y [w]'")
        try:
            v = int(tok[0])
            yv = float(tok[1])
            wv = float(tok[2]) if len(tok) == 3 else 1.0
        except ValueError:
            raise ParseError(lineno, f"malformed observation line: {' '.join(tok)}") from None
        if not 0 <= v < n:
            raise ParseError(lineno, f"vertex {v} out of range")
        if seen[v]:
            raise ParseError(lineno, f"duplicate vertex row for {v}")
        seen[v] = True
        y[v] = yv
        w[v] = wv
    if not seen.all():
        missing = int(np.nonzero(~seen)[0][0])
        raise ParseError(0, f"no observation row for vertex {missing}")
    return y, w


def parse_instance(graph_path, obs_path):
    """Read (Dag, y, w) from the two files; raises ParseError/CycleError."""
    with open(graph_path) as fh:
        dag = parse_graph(fh.read())
    with open(obs_path) as fh:
        y, w = parse_obs(fh.read(), dag.n)
    return dag, y, w


def serialize_instance(dag, y, w=None):
    """Inverse of parse_instance: returns (graph_text, obs_text)."""
    w = np.ones(dag.n) if w is None else np.asarray(w)
    lines = [f"{dag.n} {dag.m}"]
    for k in range(dag.m):
        lines.append(f"{dag.tails[k]} {dag.heads[k]} {float(dag.lengths[k])!r}")
    graph_text = "\n".join(lines) + "\n"
    obs = [f"{v} {float(y[v])!r} {float(w[v])!r}" for v in range(dag.n)]
    return graph_text, "\n".join(obs) + "\n"

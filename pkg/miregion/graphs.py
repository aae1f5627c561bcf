"""Combinatorial structure of the support of p(x,y)."""

import logging
from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from .errors import GraphTooLarge
from .probability import SUPPORT_TOL, JointPmf, deterministic_channel, entropy, Channel

logger = logging.getLogger(__name__)


def xnode(i: int) -> tuple[str, int]:
    return ("x", i)


def ynode(j: int) -> tuple[str, int]:
    return ("y", j)


@dataclass(frozen=True)
class ComponentLabeling:
    """Gacs-Korner components: each support symbol mapped to its component id."""

    x_component: tuple[int, ...]  # -1 for zero-mass symbols
    y_component: tuple[int, ...]
    masses: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.masses)

    def cell_labels(self) -> np.ndarray:
        """Component id of every cell (x, y); zero-mass cells get 0."""
        labels = np.array(self.x_component)[:, None].repeat(len(self.y_component), axis=1)
        return np.where(labels < 0, 0, labels)


@dataclass(frozen=True)
class SupportPath:
    """x1 - y1 - x2 plus the edge x1 - y2: p(x1,y1), p(x1,y2), p(x2,y1) > 0."""

    x1: int
    y1: int
    x2: int
    y2: int

    def labels(self, p: JointPmf) -> tuple[str, str, str, str]:
        return (p.x_alphabet[self.x1], p.y_alphabet[self.y1],
                p.x_alphabet[self.x2], p.y_alphabet[self.y2])


@dataclass(frozen=True)
class SupportCycle:
    """Alternating cycle y1, x1, y2, x2, ..., ya, xa, y1.

    Edges are (xs[i], ys[i]) and (xs[i], ys[i+1 mod a]).
    """

    ys: tuple[int, ...]
    xs: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.xs)

    def cells(self) -> list[tuple[int, int]]:
        a = self.length
        out = []
        for i in range(a):
            out.append((self.xs[i], self.ys[i]))
            out.append((self.xs[i], self.ys[(i + 1) % a]))
        return out

    def labels(self, p: JointPmf) -> list[str]:
        seq = []
        for y, x in zip(self.ys, self.xs):
            seq += [p.y_alphabet[y], p.x_alphabet[x]]
        return seq + [p.y_alphabet[self.ys[0]]]


def build_bipartite(p: JointPmf) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(xnode(i) for i in range(p.nx))
    g.add_nodes_from(ynode(j) for j in range(p.ny))
    for i, j in zip(*np.nonzero(p.p > SUPPORT_TOL)):
        g.add_edge(xnode(int(i)), ynode(int(j)), weight=float(p.p[i, j]))
    return g


def gacs_korner(p: JointPmf) -> tuple[float, ComponentLabeling]:
    """K(X;Y): entropy of the connected-component masses of the support graph."""
    g = build_bipartite(p)
    xcomp = [-1] * p.nx
    ycomp = [-1] * p.ny
    masses: list[float] = []
    # alphabet order of first appearance fixes component ids
    for start in [xnode(i) for i in range(p.nx)] + [ynode(j) for j in range(p.ny)]:
        if g.degree(start) == 0:
            continue
        kind, idx = start
        if (xcomp if kind == "x" else ycomp)[idx] >= 0:
            continue
        cid = len(masses)
        mass = 0.0
        for node in nx.node_connected_component(g, start):
            if node[0] == "x":
                xcomp[node[1]] = cid
                mass += float(p.p[node[1]].sum())
            else:
                ycomp[node[1]] = cid
        masses.append(mass)
    labeling = ComponentLabeling(tuple(xcomp), tuple(ycomp), tuple(masses))
    return entropy(masses), labeling


def gacs_korner_channel(p: JointPmf) -> Channel:
    _, labeling = gacs_korner(p)
    return deterministic_channel(labeling.cell_labels(), u_size=labeling.count)


def has_path_length_3(p: JointPmf) -> tuple[bool, Optional[SupportPath]]:
    """True iff some component of the support graph is not a star."""
    s = p.p > SUPPORT_TOL
    for x1 in range(p.nx):
        ys = np.flatnonzero(s[x1])
        if len(ys) < 2:
            continue
        for y1 in ys:
            others = [x for x in np.flatnonzero(s[:, y1]) if x != x1]
            if others:
                y2 = next(y for y in ys if y != y1)
                return True, SupportPath(x1, int(y1), int(others[0]), int(y2))
    return False, None


def find_cycle(p: JointPmf) -> Optional[SupportCycle]:
    g = build_bipartite(p)
    sources = [ynode(j) for j in range(p.ny) if g.degree(ynode(j)) > 0]
    if not sources:
        return None
    try:
        edges = nx.find_cycle(g, source=sources)
    except nx.NetworkXNoCycle:
        return None
    walk = [u for u, _ in edges]
    k = next(i for i, node in enumerate(walk) if node[0] == "y")
    walk = walk[k:] + walk[:k]
    ys = tuple(node[1] for node in walk[0::2])
    xs = tuple(node[1] for node in walk[1::2])
    return SupportCycle(ys, xs)


def confusability_graph(p: JointPmf) -> nx.Graph:
    """Vertices are x symbols; x1 ~ x2 when some y has p(x1,y) p(x2,y) > 0."""
    s = p.p > SUPPORT_TOL
    g = nx.Graph()
    g.add_nodes_from(range(p.nx))
    shared = (s.astype(int) @ s.T.astype(int)) > 0
    for i in range(p.nx):
        for j in range(i + 1, p.nx):
            if shared[i, j]:
                g.add_edge(i, j)
    return g


def independent_sets(g: nx.Graph, max_vertices: int = 20) -> list[tuple[int, ...]]:
    """All maximal independent sets, each sorted, in lexicographic order."""
    if g.number_of_nodes() > max_vertices:
        raise GraphTooLarge(f"{g.number_of_nodes()} vertices exceeds the cap of {max_vertices}")
    if g.number_of_nodes() == 0:
        return []
    sets = [tuple(sorted(c)) for c in nx.find_cliques(nx.complement(g))]
    return sorted(sets)


def max_condition_check(p: JointPmf, tol: float = 1e-9) -> bool:
    """p(x) = p(y) on every support pair and H(X) = H(Y)."""
    if abs(entropy(p.px) - entropy(p.py)) > tol:
        return False
    xs, ys = np.nonzero(p.p > SUPPORT_TOL)
    return bool(np.all(np.abs(p.px[xs] - p.py[ys]) <= tol))


def is_forest(g: nx.Graph) -> bool:
    active = g.subgraph([v for v in g if g.degree(v) > 0])
    return active.number_of_nodes() == 0 or nx.is_forest(active)


def describe(p: JointPmf, max_vertices: int = 20) -> dict:
    """Plain-dict summary of every structural predicate, for reports."""
    k, labeling = gacs_korner(p)
    path_found, path = has_path_length_3(p)
    cycle = find_cycle(p)
    conf = confusability_graph(p)
    out = {
        "support_edges": [[p.x_alphabet[i], p.y_alphabet[j]]
                          for i, j in zip(*np.nonzero(p.p > SUPPORT_TOL))],
        "gacs_korner_bits": k,
        "components": {
            "x": {p.x_alphabet[i]: c for i, c in enumerate(labeling.x_component) if c >= 0},
            "y": {p.y_alphabet[j]: c for j, c in enumerate(labeling.y_component) if c >= 0},
            "masses": list(labeling.masses),
        },
        "has_path_length_3": path_found,
        "path": list(path.labels(p)) if path else None,
        "cycle": cycle.labels(p) if cycle else None,
        "max_condition": max_condition_check(p),
        "confusability_edges": [[p.x_alphabet[a], p.x_alphabet[b]] for a, b in conf.edges()],
    }
    if p.nx <= max_vertices:
        out["maximal_independent_sets"] = [[p.x_alphabet[i] for i in s]
                                           for s in independent_sets(conf, max_vertices)]
    return out

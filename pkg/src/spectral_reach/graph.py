"""State graphs of grid mazes and the Laplacian pseudo-inverse.

Nodes are floor cells in row-major order; edges connect cells one move
apart.  The combinatorial Laplacian is L = D - A with D the diagonal
degree matrix and A the 0/1 adjacency matrix.  Wall-bump self
transitions never become edges, which leaves L unchanged whether or not
a transition log records them (a self loop adds the same unit to both D
and A).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .envgrid import ACTIONS, MazeSpec, StateIndex, step
from .errors import DimensionMismatch, GraphDisconnected, InvalidState

#: eigenvalues at or below this threshold count as zero modes
ZERO_EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True)
class StateGraph:
    """Undirected state graph with its Laplacian.  Immutable."""

    n_states: int
    adjacency: np.ndarray        # (n, n) 0/1 ints
    degrees: np.ndarray          # (n,) ints
    volume: int                  # sum of degrees = 2 * edge count
    laplacian: np.ndarray        # (n, n) float64, L = D - A
    coords: tuple[tuple[int, int], ...] = field(default=())

    def check_state(self, s: int) -> None:
        if not 0 <= s < self.n_states:
            raise InvalidState(f"state {s} out of range [0, {self.n_states})")

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edge list, each pair (i, j) with i < j, sorted."""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(i.tolist(), j.tolist()))

    def neighbor_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Padded neighbor matrix and degree vector for fast random walks."""
        max_deg = int(self.degrees.max()) if self.n_states else 0
        table = np.zeros((self.n_states, max(max_deg, 1)), dtype=np.int64)
        for s in range(self.n_states):
            nbrs = np.nonzero(self.adjacency[s])[0]
            table[s, : len(nbrs)] = nbrs
        return table, self.degrees.astype(np.int64)


@dataclass(frozen=True)
class PseudoInverse:
    """Moore-Penrose pseudo-inverse of a connected graph Laplacian."""

    matrix: np.ndarray
    source: str


def build_graph(maze: MazeSpec, index: StateIndex | None = None) -> StateGraph:
    """State graph of a maze: nodes are floor cells, edges are legal moves."""
    if index is None:
        index = maze.state_index()
    n = len(index)
    adj = np.zeros((n, n), dtype=np.int64)
    for i, (x, y) in enumerate(index.coords):
        for a in ACTIONS:
            nxt = step(maze, (x, y), a)
            if nxt != (x, y):
                adj[i, index.of(nxt)] = 1
    deg = adj.sum(axis=1)
    lap = np.diag(deg).astype(np.float64) - adj.astype(np.float64)
    return StateGraph(
        n_states=n,
        adjacency=adj,
        degrees=deg,
        volume=int(deg.sum()),
        laplacian=lap,
        coords=tuple(index.coords),
    )


def connected_components(g: StateGraph) -> tuple[tuple[int, ...], ...]:
    """Connected components, each sorted, ordered by smallest member."""
    seen = np.zeros(g.n_states, dtype=bool)
    comps = []
    for s in range(g.n_states):
        if seen[s]:
            continue
        comp = []
        queue = deque([s])
        seen[s] = True
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in np.nonzero(g.adjacency[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(int(v))
        comps.append(tuple(sorted(comp)))
    return tuple(comps)


def is_connected(g: StateGraph) -> bool:
    return len(connected_components(g)) == 1


def require_connected(g: StateGraph) -> None:
    comps = connected_components(g)
    if len(comps) != 1:
        sizes = sorted((len(c) for c in comps), reverse=True)
        raise GraphDisconnected(
            f"state graph has {len(comps)} components (sizes {sizes})"
        )


def bfs_distances(g: StateGraph, source: int) -> np.ndarray:
    """Geodesic (shortest-path) distances from one state; -1 if unreachable."""
    g.check_state(source)
    dist = np.full(g.n_states, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in np.nonzero(g.adjacency[u])[0]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(int(v))
    return dist


def geodesic_matrix(g: StateGraph) -> np.ndarray:
    """All-pairs geodesic distances via repeated breadth-first search."""
    return np.stack([bfs_distances(g, s) for s in range(g.n_states)])


def pseudo_inverse(g: StateGraph, basis) -> PseudoInverse:
    """L+ from the spectral side: sum of (1/lambda_i) v_i v_i^T over i >= 2.

    Requires a connected graph (exactly one zero eigenvalue).
    """
    lam = basis.eigenvalues
    vec = basis.eigenvectors
    if vec.shape[0] != g.n_states:
        raise DimensionMismatch(
            f"basis has {vec.shape[0]} states, graph has {g.n_states}"
        )
    if g.n_states > 1 and lam[1] <= ZERO_EIGENVALUE_TOL:
        raise GraphDisconnected(
            f"second-smallest eigenvalue {lam[1]:.3e} is numerically zero"
        )
    tail = vec[:, 1:]
    plus = (tail / lam[1:]) @ tail.T
    return PseudoInverse(matrix=plus, source=f"spectral:{basis.sign_convention}")


def export_graph_json(g: StateGraph) -> dict:
    """Plain-data form: node count, undirected edge list, cell coordinates."""
    return {
        "n": g.n_states,
        "edges": [[int(i), int(j)] for i, j in g.edges()],
        "coords": [[int(x), int(y)] for x, y in g.coords],
    }

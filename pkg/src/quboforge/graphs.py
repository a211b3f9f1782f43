"""Chimera-style hardware connectivity graphs and subgraph compatibility checks.

A Chimera graph is a rows x cols grid of unit cells; each cell is a complete
bipartite K_{shore,shore} between a "side 0" and a "side 1" group of qubits.
Inter-cell wiring follows the standard convention: vertically adjacent cells
couple corresponding side-0 qubits, horizontally adjacent cells couple
corresponding side-1 qubits.

Node numbering is deterministic: row-major over cells, side-major within a
cell, so node id = ((row * cols + col) * 2 + side) * shore + k.

Note: one published description of the 128-qubit topology states 256
couplers; the standard construction used here yields 352 edges for the
4x4x4 graph (256 intra-cell + 96 inter-cell). The generator follows the
standard construction; the discrepancy is documented, not resolved.
"""

from __future__ import annotations

from dataclasses import dataclass

from .models import IsingModel


@dataclass(frozen=True, eq=False)
class HardwareGraph:
    rows: int
    cols: int
    shore: int
    nodes: int
    edges: frozenset[tuple[int, int]]

    def node_id(self, row: int, col: int, side: int, k: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"cell ({row}, {col}) out of range")
        if side not in (0, 1) or not 0 <= k < self.shore:
            raise ValueError(f"(side={side}, k={k}) out of range")
        return ((row * self.cols + col) * 2 + side) * self.shore + k

    def cell_of(self, node: int) -> tuple[int, int, int, int]:
        """Inverse of node_id: node -> (row, col, side, k)."""
        if not 0 <= node < self.nodes:
            raise ValueError(f"node {node} out of range for {self.nodes} nodes")
        k = node % self.shore
        rest = node // self.shore
        side = rest % 2
        cell = rest // 2
        return cell // self.cols, cell % self.cols, side, k

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges in deterministic ascending order."""
        return sorted(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


def chimera_graph(rows: int, cols: int, shore: int = 4) -> HardwareGraph:
    """Build the standard Chimera topology for a rows x cols cell grid."""
    if rows < 1 or cols < 1 or shore < 1:
        raise ValueError("rows, cols, and shore must all be >= 1")
    nodes = rows * cols * 2 * shore

    def nid(r: int, c: int, side: int, k: int) -> int:
        return ((r * cols + c) * 2 + side) * shore + k

    edges: set[tuple[int, int]] = set()
    for r in range(rows):
        for c in range(cols):
            # Intra-cell complete bipartite between side 0 and side 1.
            for k0 in range(shore):
                for k1 in range(shore):
                    edges.add((nid(r, c, 0, k0), nid(r, c, 1, k1)))
            # Vertical neighbor couples corresponding side-0 qubits.
            if r + 1 < rows:
                for k in range(shore):
                    edges.add((nid(r, c, 0, k), nid(r + 1, c, 0, k)))
            # Horizontal neighbor couples corresponding side-1 qubits.
            if c + 1 < cols:
                for k in range(shore):
                    edges.add((nid(r, c, 1, k), nid(r, c + 1, 1, k)))
    return HardwareGraph(
        rows=rows, cols=cols, shore=shore, nodes=nodes, edges=frozenset(edges)
    )


def check_compatible(m: IsingModel, g: HardwareGraph) -> list[tuple[int, int]]:
    """Couplings of ``m`` that the hardware graph cannot realize.

    Returns an empty list iff every nonzero J key is an edge of ``g`` and
    ``m.num_spins <= g.nodes``. Spins beyond the node count are reported as
    (i, i) self-pairs so a single return value captures both conditions.
    """
    violations: list[tuple[int, int]] = []
    for (i, j) in m.J:
        if not g.has_edge(i, j):
            violations.append((i, j))
    for i in range(g.nodes, m.num_spins):
        violations.append((i, i))
    return violations

"""Built-in network fixtures used by the tests, demos, and shipped files.

All fixtures are interval maps (one expanding direction, no stable one).
The two-piece formulas the worked networks are usually written with are
discontinuous at a seam lying strictly between the h-sets; each fixture
therefore inserts a linear bridge across the gap so the local map is
globally continuous while agreeing exactly with the usual formulas on
every h-set.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import AffineChart, CenterScale, HSet, PiecewiseAffineMap, UnifiedSet
from .network import CouplingSpec, Graph, NetworkSpec, NodeSystem, TYPE_I, TYPE_II
from .symbolic import TransitionMatrix


def _interval_hset(name: str, shift: float) -> HSet:
    return HSet(name, AffineChart.shift_1d(shift))


def _unified_pair(chart_shift: float, ids: tuple[str, ...]) -> UnifiedSet:
    chart = AffineChart.shift_1d(chart_shift)
    members = tuple((mid, CenterScale(np.array([3.0 * i]), np.zeros(0), 1.0))
                    for i, mid in enumerate(ids))
    return UnifiedSet(chart, members)


def _fib_node(local_map: PiecewiseAffineMap, hset_shifts: tuple[float, float],
              bits, unified_shift: float, ids: tuple[str, str]) -> NodeSystem:
    hsets = tuple(_interval_hset(mid, sh) for mid, sh in zip(ids, hset_shifts))
    return NodeSystem(local_map, hsets, TransitionMatrix(np.array(bits)),
                      unified=_unified_pair(unified_shift, ids))


def _diffusive(alpha: float) -> np.ndarray:
    return np.array([[1.0 - alpha, alpha], [alpha, 1.0 - alpha]])


def example1(alpha: float | None = None) -> NetworkSpec:
    """Two coupled interval maps over a complete 2-node graph.

    Node 1 follows the golden-mean transition structure [[1,1],[1,0]] on
    [-1,1] and [2,4]; node 2 follows [[0,1],[1,1]] on the same intervals.
    ``alpha`` selects the diffusive interaction [[1-a, a], [a, 1-a]];
    None gives the identity matrix (uncoupled).
    """
    t1 = PiecewiseAffineMap.from_breakpoints(
        [1.0, 2.0], [(3.5, 1.5), (-7.0, 12.0), (2.0, -6.0)])
    t2 = PiecewiseAffineMap.from_breakpoints(
        [1.0, 2.0], [(2.0, 3.0), (-7.0, 12.0), (3.5, -9.0)])
    node1 = _fib_node(t1, (0.0, -3.0), [[1, 1], [1, 0]], 0.0, ("M11", "M12"))
    node2 = _fib_node(t2, (0.0, -3.0), [[0, 1], [1, 1]], 0.0, ("M21", "M22"))
    matrix = np.eye(2) if alpha is None else _diffusive(alpha)
    coupling = CouplingSpec(TYPE_II, matrix)
    return NetworkSpec(Graph.complete(2), (node1, node2), coupling)


def example2(alpha: float = 0.05) -> NetworkSpec:
    """Shifted variant of :func:`example1` whose interaction is affine but
    not equal to its own linear model.

    The h-sets sit at [0,2], [3,5] (node 1) and [1,3], [4,6] (node 2); the
    interaction recenters around (1, 2), so it matches the Kronecker model
    only after the unified charts are applied.  Chart coordinates, and
    hence the verdict and the entropy bound, are identical to
    :func:`example1` at the same ``alpha``.
    """
    t1 = PiecewiseAffineMap.from_breakpoints(
        [2.0, 3.0], [(3.5, -1.0), (-7.0, 20.0), (2.0, -7.0)])
    t2 = PiecewiseAffineMap.from_breakpoints(
        [3.0, 4.0], [(2.0, 1.0), (-7.0, 28.0), (3.5, -14.0)])
    n1 = NodeSystem(t1, (_interval_hset("M11", -1.0), _interval_hset("M12", -4.0)),
                    TransitionMatrix(np.array([[1, 1], [1, 0]])),
                    unified=_unified_pair(-1.0, ("M11", "M12")))
    n2 = NodeSystem(t2, (_interval_hset("M21", -2.0), _interval_hset("M22", -5.0)),
                    TransitionMatrix(np.array([[0, 1], [1, 1]])),
                    unified=_unified_pair(-2.0, ("M21", "M22")))
    a = _diffusive(alpha)
    center = np.array([1.0, 2.0])
    ambient = PiecewiseAffineMap.affine(a, center - a @ center)
    coupling = CouplingSpec(TYPE_II, a, ambient=ambient)
    return NetworkSpec(Graph.complete(2), (n1, n2), coupling)


def example1_node1() -> NetworkSpec:
    """Single-node reduction of :func:`example1` (node 1 alone)."""
    t1 = PiecewiseAffineMap.from_breakpoints(
        [1.0, 2.0], [(3.5, 1.5), (-7.0, 12.0), (2.0, -6.0)])
    node = _fib_node(t1, (0.0, -3.0), [[1, 1], [1, 0]], 0.0, ("M11", "M12"))
    return NetworkSpec(Graph(1, frozenset()), (node,),
                       CouplingSpec(TYPE_II, np.eye(1)))


def theorem1_perm23(scale: float = 1.0) -> NetworkSpec:
    """Permutation-transition fixture: a 2-swap node and a 3-cycle node.

    Every local branch expands by at least 1.25 and the h-set images keep
    strictly apart from the non-target sets, so the locally-linear-coupling
    structure holds with interval arithmetic.  ``scale`` multiplies the
    identity interaction; values below 1/1.25 defeat the coupled rows.
    """
    t1 = PiecewiseAffineMap.from_breakpoints(
        [1.0, 2.0], [(1.5, 3.0), (-6.25, 10.75), (1.5, -4.75)])
    n1 = NodeSystem(t1, (_interval_hset("P11", 0.0), _interval_hset("P12", -3.0)),
                    TransitionMatrix(np.array([[0, 1], [1, 0]])))
    t2 = PiecewiseAffineMap.from_breakpoints(
        [1.0, 2.0, 4.0, 5.0],
        [(1.5, 3.0), (0.25, 4.25), (1.5, 1.75), (-9.05, 43.95), (1.3, -7.8)])
    n2 = NodeSystem(t2, (_interval_hset("P21", 0.0), _interval_hset("P22", -3.0),
                         _interval_hset("P23", -6.0)),
                    TransitionMatrix(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])))
    coupling = CouplingSpec(TYPE_I, scale * np.eye(2))
    return NetworkSpec(Graph.complete(2), (n1, n2), coupling)


def write_fixture_files(directory) -> list:
    """Write the shipped fixture specs as readable JSON files."""
    from .specio import serialize_spec

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "example1.json": example1(),
        "example1_alpha_0.2.json": example1(alpha=0.2),
        "example2.json": example2(),
        "example1_node1.json": example1_node1(),
        "theorem1_perm23.json": theorem1_perm23(),
    }
    written = []
    for name, spec in files.items():
        path = out / name
        path.write_text(json.dumps(serialize_spec(spec), indent=2, sort_keys=True)
                        + "\n", encoding="utf-8")
        written.append(path)
    return written


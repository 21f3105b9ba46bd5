"""Coupled map networks: assembly, validation, and the hypothesis checkers.

A network couples per-node piecewise-affine local dynamics through an
affine interaction whose restriction to the relevant image sets is
conjugate to a Kronecker model [a_lm] (x) I.  The two checkers certify,
for every nonzero entry of the Kronecker product of the node transition
matrices, a coupled crossing inequality made diagonally dominant by a node
reassignment tau, found as a bipartite perfect matching.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .covering import STRICT_MARGIN, CoveringCertificate, ProductFormMap, persistence_bound
from .degree import DegreeUndefinedError, DegreeValue, degree_for_map
from .geometry import (AffineChart, GeometryError, HSet, PiecewiseAffineMap, UnifiedSet,
                       max_stretch, min_stretch, split_product, unified_validate)
from .symbolic import TransitionMatrix, lcm_period, spectral_radius

TYPE_I = "type1"
TYPE_II = "type2"


class SpecError(ValueError):
    """Network data violates a structural precondition."""


@dataclass(frozen=True)
class Graph:
    """Directed graph on nodes 1..d; edge (m, l) lets node m influence node l."""

    d: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "edges",
                           frozenset((int(a), int(b)) for a, b in self.edges))
        if self.d < 1:
            raise SpecError("graph needs at least one node")
        for a, b in self.edges:
            if not (1 <= a <= self.d and 1 <= b <= self.d):
                raise SpecError(f"edge ({a},{b}) outside nodes 1..{self.d}")

    def weakly_connected(self) -> bool:
        if self.d == 1:
            return True
        adj: dict[int, set[int]] = {k: set() for k in range(1, self.d + 1)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {1}
        stack = [1]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == self.d

    @staticmethod
    def complete(d: int, self_loops: bool = False) -> "Graph":
        edges = {(a, b) for a in range(1, d + 1) for b in range(1, d + 1)
                 if self_loops or a != b}
        return Graph(d, frozenset(edges))


@dataclass(frozen=True)
class NodeSystem:
    """One node: local map, h-set family, transition structure, chart forms.

    ``chart_forms`` may be declared explicitly (keyed by source symbol for a
    unified family, by (source, target) otherwise); when absent the forms
    are derived exactly by composing the local map with the affine charts.
    """

    local_map: PiecewiseAffineMap
    hsets: tuple[HSet, ...]
    transition: TransitionMatrix
    unified: UnifiedSet | None = None
    chart_forms: dict | None = None

    def __post_init__(self):
        if not self.hsets:
            raise SpecError("node needs at least one h-set")
        object.__setattr__(self, "hsets", tuple(self.hsets))

    @property
    def count(self) -> int:
        return len(self.hsets)

    @property
    def dim_u(self) -> int:
        return self.hsets[0].dim_u

    @property
    def dim_s(self) -> int:
        return self.hsets[0].dim_s

    @property
    def dim(self) -> int:
        return self.dim_u + self.dim_s

    def member_chart(self, symbol: int) -> AffineChart:
        """Chart taking h-set ``symbol`` (1-based) onto the unit box."""
        if self.unified is not None:
            return self.unified.member_chart(symbol - 1)
        return self.hsets[symbol - 1].chart

    def transitions(self) -> list[tuple[int, int]]:
        return [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(self.transition.bits))]


@dataclass(frozen=True)
class CouplingSpec:
    """Interaction data: kind, Kronecker-model matrix, optional ambient map.

    Type I may override the matrix per Kronecker entry.  When no ambient
    map is declared the interaction is the linear model itself.
    """

    kind: str
    matrix: np.ndarray
    ambient: PiecewiseAffineMap | None = None
    per_entry: tuple[tuple[tuple[int, ...], tuple[int, ...], np.ndarray], ...] | None = None

    def __post_init__(self):
        if self.kind not in (TYPE_I, TYPE_II):
            raise SpecError(f"coupling kind must be '{TYPE_I}' or '{TYPE_II}'")
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def matrix_for(self, i_idx: tuple[int, ...], j_idx: tuple[int, ...]) -> np.ndarray:
        if self.per_entry:
            for pi, pj, m in self.per_entry:
                if tuple(pi) == tuple(i_idx) and tuple(pj) == tuple(j_idx):
                    return np.asarray(m, dtype=float)
        return self.matrix

    def lipschitz(self) -> float:
        """Operator max-norm of the Kronecker model (max absolute row sum)."""
        mats = [self.matrix] + ([np.asarray(m, float) for _, _, m in self.per_entry]
                                if self.per_entry else [])
        return max(float(np.max(np.sum(np.abs(m), axis=1))) for m in mats)

    def ambient_map(self, block_dim: int) -> PiecewiseAffineMap:
        if self.ambient is not None:
            return self.ambient
        kron = np.kron(self.matrix, np.eye(block_dim))
        return PiecewiseAffineMap.affine(kron, np.zeros(kron.shape[0]))


@dataclass(frozen=True)
class NetworkSpec:
    """A coupled map network ready for validation and certification."""

    graph: Graph
    nodes: tuple[NodeSystem, ...]
    coupling: CouplingSpec

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) != self.graph.d:
            raise SpecError(f"{len(self.nodes)} nodes for a {self.graph.d}-node graph")
        if self.coupling.matrix.shape != (self.graph.d, self.graph.d):
            raise SpecError("coupling matrix must be d x d")

    @property
    def d(self) -> int:
        return self.graph.d

    @property
    def block_dim(self) -> int:
        return self.nodes[0].dim

    @property
    def state_dim(self) -> int:
        return self.d * self.block_dim

    def dims(self) -> tuple[int, ...]:
        return tuple(node.transition.n for node in self.nodes)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    warnings: tuple[str, ...]
    inconclusive: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def _resolve_forms(node: NodeSystem, kind: str) -> dict:
    """Chart-coordinate product forms, declared or derived by composition."""
    if node.chart_forms is not None:
        return node.chart_forms
    forms: dict = {}
    u = node.dim_u
    if kind == TYPE_II:
        if node.unified is None:
            raise SpecError("unified family required to derive chart forms")
        outer = node.unified.chart
        for i in range(1, node.count + 1):
            inner = node.member_chart(i)
            composed = (node.local_map
                        .compose_affine_inner(inner.inverse_linear,
                                              -inner.inverse_linear @ inner.offset)
                        .compose_affine_outer(outer.linear, outer.offset))
            U, V = split_product(composed, u)
            forms[i] = ProductFormMap(U, V)
    else:
        for i, j in node.transitions():
            inner = node.hsets[i - 1].chart
            outer = node.hsets[j - 1].chart
            composed = (node.local_map
                        .compose_affine_inner(inner.inverse_linear,
                                              -inner.inverse_linear @ inner.offset)
                        .compose_affine_outer(outer.linear, outer.offset))
            U, V = split_product(composed, u)
            forms[(i, j)] = ProductFormMap(U, V)
    return forms


def _box_grid(dim: int, per_axis: int = 5) -> np.ndarray:
    axis = np.linspace(-1.0, 1.0, per_axis)
    return np.array(list(itertools.product(axis, repeat=dim)))


def _image_interval(node: NodeSystem, symbol: int) -> tuple[float, float]:
    """Exact image interval of a 1-d h-set under the local map."""
    lo, hi = node.hsets[symbol - 1].bounding_box()
    composed = node.local_map  # 1-d: evaluate at endpoints and interior breakpoints
    xs = {float(lo[0]), float(hi[0])}
    for p in composed.pieces:
        for nrm, b in zip(p.normals[:, 0], p.bounds):
            if abs(nrm) > 0:
                t = b / nrm
                if lo[0] < t < hi[0]:
                    xs.add(t)
    vals = [float(composed.apply([t])[0]) for t in sorted(xs)]
    return min(vals), max(vals)


def _image_bbox(node: NodeSystem, symbol: int) -> tuple[np.ndarray, np.ndarray]:
    """Conservative bounding box of the image of an h-set under the local map."""
    if node.dim == 1:
        lo, hi = _image_interval(node, symbol)
        return np.array([lo]), np.array([hi])
    corners = node.hsets[symbol - 1].vertices()
    # box hull of the set, then exact piecewise image box of that hull
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    pts = np.array(list(itertools.product(*zip(lo, hi))))
    grid = _box_grid(node.dim, 4) * (hi - lo) / 2 + (hi + lo) / 2
    vals = node.local_map.apply_batch(np.vstack([pts, grid]))
    pad = node.local_map.lipschitz() * float(np.max(hi - lo)) / 6.0
    return vals.min(axis=0) - pad, vals.max(axis=0) + pad


def _boxes_disjoint(a: tuple[np.ndarray, np.ndarray],
                    b: tuple[np.ndarray, np.ndarray], tol: float = 1e-12) -> bool:
    return bool(np.any(a[1] < b[0] - tol) or np.any(b[1] < a[0] - tol))


def validate_spec(spec: NetworkSpec) -> ValidationReport:
    """Structural audit: graph, coupling pattern, h-sets, transition data.

    Reports every violation rather than stopping at the first.  Overlap
    checks that rest on bounding boxes report "inconclusive" when the boxes
    intersect but the exact sets might not.
    """
    errors: list[str] = []
    warnings: list[str] = []
    unclear: list[str] = []

    if not spec.graph.weakly_connected():
        errors.append("graph is not weakly connected")

    a = spec.coupling.matrix
    d = spec.d
    ours = [(l, m) for l in range(1, d + 1) for m in range(1, d + 1)
            if l != m and abs(a[l - 1, m - 1]) > 1e-15 and (m, l) not in spec.graph.edges]
    for l, m in ours:
        errors.append(f"coupling entry a[{l},{m}] is nonzero but edge ({m},{l}) is absent")
    if ours:
        flipped = [(l, m) for l in range(1, d + 1) for m in range(1, d + 1)
                   if l != m and abs(a[l - 1, m - 1]) > 1e-15
                   and (l, m) not in spec.graph.edges]
        if not flipped:
            warnings.append("coupling pattern matches the transposed edge convention "
                            "(influence read as (l,m) instead of (m,l)); the spec file "
                            "may have its edges written backwards")

    mats = [("coupling", a)]
    if spec.coupling.per_entry:
        if spec.coupling.kind == TYPE_II:
            warnings.append("per-entry coupling matrices are ignored by the "
                            "unified-family checker (shared model only)")
        mats += [(f"per-entry {tuple(pi)}->{tuple(pj)}", np.asarray(m, float))
                 for pi, pj, m in spec.coupling.per_entry]
    for name, m in mats:
        if m.shape != (d, d):
            errors.append(f"{name} matrix is not {d}x{d}")
        elif abs(np.linalg.det(m)) < 1e-10:
            errors.append(f"{name} matrix is numerically singular")

    block = spec.nodes[0].dim
    for k, node in enumerate(spec.nodes, start=1):
        if node.dim != block:
            errors.append(f"node {k}: ambient dimension {node.dim} != {block}")
        if node.dim_u < 1:
            errors.append(f"node {k}: needs at least one expanding direction")
        if any(h.dim_u != node.dim_u or h.dim_s != node.dim_s for h in node.hsets):
            errors.append(f"node {k}: h-sets disagree on the (u, s) split")
        if node.transition.n != node.count:
            errors.append(f"node {k}: transition matrix is {node.transition.n}x"
                          f"{node.transition.n} for {node.count} h-sets")
        if node.local_map.dim_in != node.dim or node.local_map.dim_out != node.dim:
            errors.append(f"node {k}: local map acts on R^{node.local_map.dim_in}, "
                          f"h-sets live in R^{node.dim}")

        for i, j in itertools.combinations(range(node.count), 2):
            bi, bj = node.hsets[i].bounding_box(), node.hsets[j].bounding_box()
            if not _boxes_disjoint(bi, bj):
                msg = (f"node {k}: h-sets {node.hsets[i].id} and {node.hsets[j].id} "
                       "are not disjoint")
                (errors if node.dim == 1 else unclear).append(msg)

        if spec.coupling.kind == TYPE_II:
            if node.unified is None:
                errors.append(f"node {k}: unified family required for this coupling kind")
            else:
                rep = unified_validate(node.unified)
                errors.extend(f"node {k}: {v}" for v in rep.violations)
                if node.unified.count != node.count:
                    errors.append(f"node {k}: unified family has {node.unified.count} "
                                  f"members for {node.count} h-sets")
                else:
                    _check_member_charts(node, k, errors, warnings)

        if node.chart_forms is not None:
            _audit_declared_forms(spec.coupling.kind, node, k, errors)

    if spec.coupling.kind == TYPE_I:
        _check_non_overlap(spec, errors, unclear)

    return ValidationReport(tuple(errors), tuple(warnings), tuple(unclear))


def _check_member_charts(node: NodeSystem, k: int, errors: list[str],
                         warnings: list[str]) -> None:
    """The unified member charts must carve out the same physical sets."""
    for i, hset in enumerate(node.hsets, start=1):
        q = node.member_chart(i)
        lin = q.linear @ hset.chart.inverse_linear
        off = q.offset - lin @ hset.chart.offset
        if np.max(np.abs(lin - np.eye(node.dim))) <= 1e-9 and np.max(np.abs(off)) <= 1e-9:
            continue
        signed_perm = (np.max(np.abs(off)) <= 1e-9
                       and np.all(np.isclose(np.abs(lin), 0, atol=1e-9)
                                  | np.isclose(np.abs(lin), 1, atol=1e-9))
                       and np.all(np.sum(np.abs(lin) > 0.5, axis=1) == 1))
        if signed_perm:
            warnings.append(f"node {k}: member chart of {hset.id} differs from the "
                            "declared h-set chart by a box symmetry")
        else:
            errors.append(f"node {k}: unified member {i} and h-set {hset.id} "
                          "describe different sets")


def _audit_declared_forms(kind: str, node: NodeSystem, k: int, errors: list[str]) -> None:
    """Sampled consistency of declared chart forms with the composed map."""
    grid = _box_grid(node.dim, 5)
    u = node.dim_u
    for key, form in node.chart_forms.items():
        if kind == TYPE_II:
            if not isinstance(key, int) or not 1 <= key <= node.count:
                errors.append(f"node {k}: chart forms must be keyed by source "
                              f"symbol for a unified family, got {key!r}")
                continue
            inner = node.member_chart(key)
            outer = node.unified.chart
        else:
            if (not isinstance(key, tuple) or len(key) != 2
                    or not all(1 <= t <= node.count for t in key)):
                errors.append(f"node {k}: chart forms must be keyed by "
                              f"(source, target) pairs, got {key!r}")
                continue
            i, j = key
            inner = node.hsets[i - 1].chart
            outer = node.hsets[j - 1].chart
        ambient = inner.invert_batch(grid)
        want = outer.apply_batch(node.local_map.apply_batch(ambient))
        got = form.U.apply_batch(grid[:, :u])
        if form.V is not None:
            got = np.hstack([got, form.V.apply_batch(grid[:, u:])])
        resid = float(np.max(np.abs(want - got)))
        if resid > 1e-9:
            errors.append(f"node {k}: declared chart form {key} disagrees with the "
                          f"composed map (residual {resid:.3e})")


def _check_non_overlap(spec: NetworkSpec, errors: list[str], unclear: list[str]) -> None:
    """Image-separation condition for locally linear coupling.

    The image of each source h-set must avoid every non-target h-set and
    every other source's image.  Intervals decide exactly; higher
    dimensions fall back to conservative boxes.
    """
    for k, node in enumerate(spec.nodes, start=1):
        pairs = node.transitions()
        images = {i: _image_bbox(node, i) for i in {i for i, _ in pairs}}
        exact = node.dim == 1
        for i, j in pairs:
            for jp in range(1, node.count + 1):
                if jp == j:
                    continue
                if not _boxes_disjoint(images[i], node.hsets[jp - 1].bounding_box()):
                    msg = (f"node {k}: image of {node.hsets[i - 1].id} meets "
                           f"{node.hsets[jp - 1].id} (targets may not overlap)")
                    (errors if exact else unclear).append(msg)
            for ip in images:
                if ip != i and not _boxes_disjoint(images[i], images[ip]):
                    msg = (f"node {k}: images of {node.hsets[i - 1].id} and "
                           f"{node.hsets[ip - 1].id} overlap")
                    (errors if exact else unclear).append(msg)


# ---------------------------------------------------------------------------
# Kronecker structure and the tau matching


def kronecker(mats: list[TransitionMatrix] | tuple[TransitionMatrix, ...]) -> TransitionMatrix:
    """0/1 Kronecker product, first factor outermost."""
    if not mats:
        raise SpecError("need at least one transition matrix")
    bits = mats[0].bits
    for w in mats[1:]:
        bits = np.kron(bits, w.bits)
    return TransitionMatrix(bits)


def tau_search(row_feasibility) -> tuple[int, ...] | None:
    """Perfect matching on the row-to-node feasibility graph.

    Returns the lexicographically smallest assignment (row-major greedy with
    an augmenting-path completion check), 1-based, or None when no perfect
    matching exists.
    """
    feas = np.asarray(row_feasibility, dtype=bool)
    if feas.ndim != 2 or feas.shape[0] != feas.shape[1]:
        raise SpecError("feasibility matrix must be square")
    d = feas.shape[0]

    def can_complete(start: int, used: set[int]) -> bool:
        match: dict[int, int] = {}

        def augment(row: int, seen: set[int]) -> bool:
            for col in range(d):
                if feas[row, col] and col not in used and col not in seen:
                    seen.add(col)
                    if match.get(col) is None or augment(match[col], seen):
                        match[col] = row
                        return True
            return False

        return all(augment(r, set()) for r in range(start, d))

    used: set[int] = set()
    tau: list[int] = []
    for row in range(d):
        for col in range(d):
            if feas[row, col] and col not in used:
                used.add(col)
                if can_complete(row + 1, used):
                    tau.append(col + 1)
                    break
                used.remove(col)
        else:
            return None
    return tuple(tau)


def _perm_sign(tau: tuple[int, ...]) -> int:
    seen = [False] * len(tau)
    sign = 1
    for start in range(len(tau)):
        if seen[start]:
            continue
        length = 0
        cur = start
        while not seen[cur]:
            seen[cur] = True
            cur = tau[cur] - 1
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# theorem checkers


@dataclass(frozen=True)
class EntryResult:
    """Outcome for one nonzero Kronecker entry."""

    source_index: tuple[int, ...]
    target_index: tuple[int, ...]
    tau: tuple[int, ...] | None
    certificate: CoveringCertificate | None
    verdict: str                      # pass | fail | inconclusive
    slack: float                      # worst row slack (best achievable on failure)
    failures: tuple[str, ...]


@dataclass(frozen=True)
class TheoremReport:
    """Aggregate verdict over all nonzero Kronecker entries."""

    theorem: int
    verdict: str
    entries: tuple[EntryResult, ...]
    global_eps: float
    entropy_bound: float | None = None
    period: int | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def binding_entry(self) -> EntryResult:
        """Entry with the smallest slack: the one that decides the verdict."""
        return min(self.entries, key=lambda e: e.slack)


class _FormTables:
    """Per-node stretch/degree tables shared across Kronecker entries."""

    def __init__(self, spec: NetworkSpec, forms: list[dict], resolution: int):
        self.spec = spec
        self.forms = forms
        self.resolution = resolution
        self.u = spec.nodes[0].dim_u
        self.s = spec.nodes[0].dim_s
        self._umax: dict = {}
        self._vmax0: dict = {}
        self._min: dict = {}
        self._vdiag: dict = {}
        self._deg: dict = {}
        self._rng1d: dict = {}

    def umax(self, node: int, key) -> float:
        k = (node, key)
        if k not in self._umax:
            self._umax[k] = max_stretch(self.forms[node][key].U,
                                        np.zeros(self.u)).max_abs
        return self._umax[k]

    def vmax0(self, node: int, key) -> float:
        k = (node, key)
        if k not in self._vmax0:
            V = self.forms[node][key].V
            self._vmax0[k] = 0.0 if V is None else max_stretch(V, np.zeros(self.s)).max_abs
        return self._vmax0[k]

    def min_bounds(self, node: int, key, a: float, ref: np.ndarray):
        k = (node, key, round(a, 15), tuple(np.round(ref, 15)))
        if k not in self._min:
            scaled = self.forms[node][key].U.scale(a)
            self._min[k] = min_stretch(scaled, ref, resolution=self.resolution)
        return self._min[k]

    def vdiag(self, node: int, key, a: float, ref: np.ndarray) -> float:
        k = (node, key, round(a, 15), tuple(np.round(ref, 15)))
        if k not in self._vdiag:
            V = self.forms[node][key].V
            self._vdiag[k] = 0.0 if V is None else max_stretch(V.scale(a), ref).max_abs
        return self._vdiag[k]

    def degree(self, node: int, key, a: float, ref: np.ndarray) -> DegreeValue | None:
        k = (node, key, round(a, 15), tuple(np.round(ref, 15)))
        if k not in self._deg:
            scaled = self.forms[node][key].U.scale(a)
            try:
                self._deg[k] = degree_for_map(scaled, ref)
            except (DegreeUndefinedError, GeometryError):
                self._deg[k] = None
        return self._deg[k]

    def image_1d(self, node: int, key, a: float) -> tuple[float, float]:
        k = (node, key, round(a, 15))
        if k not in self._rng1d:
            self._rng1d[k] = self.forms[node][key].U.scale(a).range_1d()
        return self._rng1d[k]

    def membership(self, node: int, key, a: float, ref: np.ndarray,
                   inflation: float) -> str:
        """Is ref inside the open image of the scaled unstable factor?

        Returns "in", "out", or "unknown"; exact for one unstable dimension
        and for affine factors, degree-based (sufficient only) otherwise.
        """
        U = self.forms[node][key].U
        if self.u == 1:
            lo, hi = self.image_1d(node, key, a)
            p = float(ref[0])
            if lo + inflation + STRICT_MARGIN < p < hi - inflation - STRICT_MARGIN:
                return "in"
            if p < lo - STRICT_MARGIN or p > hi + STRICT_MARGIN:
                return "out"
            return "unknown"
        if U.is_affine and inflation == 0.0:
            piece = U.pieces[0]
            lin = a * piece.matrix
            if abs(np.linalg.det(lin)) < 1e-12:
                return "unknown"
            pre = np.linalg.solve(lin, ref - a * piece.offset)
            extent = float(np.max(np.abs(pre)))
            if extent < 1.0 - STRICT_MARGIN:
                return "in"
            if extent > 1.0 + STRICT_MARGIN:
                return "out"
            return "unknown"
        mb = self.min_bounds(node, key, a, ref)
        if mb.min_rel > inflation:
            deg = self.degree(node, key, a, ref)
            if deg is not None and deg.value != 0:
                return "in"
        return "unknown"


def _entry_ids(spec: NetworkSpec, idx: tuple[int, ...]) -> str:
    return "x".join(spec.nodes[k].hsets[idx[k] - 1].id for k in range(spec.d))


def _check_entry(spec: NetworkSpec, tables: _FormTables, i_idx: tuple[int, ...],
                 j_idx: tuple[int, ...], form_key, refs_u, refs_s, radii,
                 chart_lip: float, inflation: float,
                 need_membership: bool) -> EntryResult:
    """Evaluate the coupled row inequalities for one Kronecker entry.

    ``form_key(l)`` picks the chart form of node ``l``; ``refs_u[k]`` /
    ``refs_s[k]`` / ``radii[k]`` give row k's target center and radius.
    """
    d = spec.d
    a = spec.coupling.matrix_for(i_idx, j_idx)

    s_u = [sum(abs(a[k, l]) * tables.umax(l, form_key(l)) for l in range(d))
           for k in range(d)]
    s_v = [sum(abs(a[k, l]) * tables.vmax0(l, form_key(l)) for l in range(d))
           for k in range(d)]

    feas_sure = np.zeros((d, d), dtype=bool)
    feas_maybe = np.zeros((d, d), dtype=bool)
    slack = np.full((d, d), -np.inf)
    notes: list[str] = []

    for k in range(d):
        for m in range(d):
            key = form_key(m)
            off_u = s_u[k] - abs(a[k, m]) * tables.umax(m, key)
            mb = tables.min_bounds(m, key, a[k, m], refs_u[k])
            margin_lo = mb.min_rel - off_u - 1.0
            margin_hi = mb.min_attained - off_u - 1.0
            if tables.s > 0:
                off_v = s_v[k] - abs(a[k, m]) * tables.vmax0(m, key)
                vterm = tables.vdiag(m, key, a[k, m], refs_s[k])
                margin_s = radii[k] - (vterm + off_v)
            else:
                margin_s = math.inf
            slack[k, m] = min(margin_lo, margin_s) - inflation

            ok_u_sure = margin_lo > STRICT_MARGIN + inflation
            ok_u_maybe = margin_hi > STRICT_MARGIN + inflation
            ok_s = margin_s > STRICT_MARGIN + inflation

            memb = "in"
            if need_membership and (ok_u_sure or ok_u_maybe) and ok_s:
                memb = tables.membership(m, key, a[k, m], refs_u[k], inflation)

            deg_ok_sure = deg_ok_maybe = True
            if (ok_u_sure or ok_u_maybe) and ok_s and memb != "out":
                deg = tables.degree(m, key, a[k, m], refs_u[k]) if mb.min_rel > 0 else None
                if deg is None:
                    deg_ok_sure = False
                elif deg.value == 0:
                    deg_ok_sure = deg_ok_maybe = False

            feas_sure[k, m] = ok_u_sure and ok_s and memb == "in" and deg_ok_sure
            feas_maybe[k, m] = ok_u_maybe and ok_s and memb != "out" and deg_ok_maybe

    tau = tau_search(feas_sure)
    if tau is not None:
        row_u = []
        row_s = []
        degs = []
        for k in range(d):
            m = tau[k] - 1
            key = form_key(m)
            mb = tables.min_bounds(m, key, a[k, m], refs_u[k])
            off_u = s_u[k] - abs(a[k, m]) * tables.umax(m, key)
            row_u.append(mb.min_rel - off_u - 1.0)
            if tables.s > 0:
                off_v = s_v[k] - abs(a[k, m]) * tables.vmax0(m, key)
                row_s.append(radii[k] - (tables.vdiag(m, key, a[k, m], refs_s[k]) + off_v))
            else:
                row_s.append(math.inf)
            degs.append(tables.degree(m, key, a[k, m], refs_u[k]))
        value = _perm_sign(tau) ** tables.u
        for dv in degs:
            value *= dv.value
        cert = CoveringCertificate(
            source_id=_entry_ids(spec, i_idx), target_id=_entry_ids(spec, j_idx),
            degree=DegreeValue(value, "composition"),
            unstable_margin=min(row_u), stable_margin=min(row_s),
            target_radius=min(radii) if tables.s > 0 else 1.0)
        eps = persistence_bound(cert, chart_lip, spec.coupling.lipschitz(),
                                spec.coupling.lipschitz())
        cert = CoveringCertificate(cert.source_id, cert.target_id, cert.degree,
                                   cert.unstable_margin, cert.stable_margin,
                                   cert.target_radius, admissible_eps=eps)
        entry_slack = min(min(row_u), min(row_s)) - inflation
        return EntryResult(i_idx, j_idx, tau, cert, "pass", entry_slack, ())

    best = float(np.min(np.max(slack, axis=1)))
    notes.append(f"no node assignment satisfies every coupled row "
                 f"(best achievable slack {best:.6g})")
    verdict = "inconclusive" if tau_search(feas_maybe) is not None else "fail"
    if verdict == "inconclusive":
        notes.append("grid bounds too coarse to decide; raise the resolution")
    return EntryResult(i_idx, j_idx, None, None, verdict, best, tuple(notes))


def _require_valid(spec: NetworkSpec, kind: str) -> None:
    if spec.coupling.kind != kind:
        raise SpecError(f"checker needs coupling kind '{kind}', "
                        f"spec declares '{spec.coupling.kind}'")
    report = validate_spec(spec)
    if not report.ok:
        raise SpecError("spec fails validation: " + "; ".join(report.errors))


def theorem1_check(spec: NetworkSpec, resolution: int = 64,
                   pert_amplitude: float = 0.0) -> TheoremReport:
    """Certify the permutation-structure hypotheses (periodic-point check).

    Every node transition matrix must be a permutation.  On a pass the
    report carries the orbit period lcm(dim W_1, ..., dim W_d) and the
    global admissible perturbation radius.  ``pert_amplitude`` re-runs the
    check with every row inequality tightened by the worst-case chart-level
    displacement of a perturbation of that sup-norm.
    """
    for k, node in enumerate(spec.nodes, start=1):
        if not node.transition.is_permutation():
            raise SpecError(f"node {k}: transition matrix is not a permutation")
    _require_valid(spec, TYPE_I)

    forms = [_resolve_forms(node, TYPE_I) for node in spec.nodes]
    tables = _FormTables(spec, forms, resolution)
    d = spec.d
    u = spec.nodes[0].dim_u

    # structural per-transition conditions, independent of the coupling
    structural: list[str] = []
    for k, node in enumerate(spec.nodes):
        for (i, j) in node.transitions():
            f = forms[k][(i, j)]
            mb = min_stretch(f.U, np.zeros(u), resolution=resolution)
            if not mb.min_rel > 1.0 + STRICT_MARGIN:
                structural.append(f"node {k + 1} transition {i}->{j}: "
                                  f"min stretch {mb.min_attained:.6g} <= 1")
                continue
            if degree_for_map(f.U, np.zeros(u)).value == 0:
                structural.append(f"node {k + 1} transition {i}->{j}: degree 0")
            if f.V is not None:
                sv = max_stretch(f.V, np.zeros(spec.nodes[0].dim_s))
                if not sv.max_abs < 1.0 - STRICT_MARGIN:
                    structural.append(f"node {k + 1} transition {i}->{j}: "
                                      f"stable stretch {sv.max_abs:.6g} >= 1")
    if structural:
        raise SpecError("local covering structure fails: " + "; ".join(structural))

    perms = [node.transition.permutation() for node in spec.nodes]
    chart_lip = max(node.hsets[j - 1].chart.lipschitz()
                    for node in spec.nodes for j in range(1, node.count + 1))
    inflation = pert_amplitude * chart_lip * (1.0 + spec.coupling.lipschitz())

    entries = []
    zero_u = np.zeros(u)
    zero_s = np.zeros(spec.nodes[0].dim_s)
    for i_idx in itertools.product(*[range(1, n.count + 1) for n in spec.nodes]):
        j_idx = tuple(perms[k][i_idx[k] - 1] for k in range(d))
        entries.append(_check_entry(
            spec, tables, i_idx, j_idx,
            form_key=lambda l, i_idx=i_idx, j_idx=j_idx: (i_idx[l], j_idx[l]),
            refs_u=[zero_u] * d, refs_s=[zero_s] * d, radii=[1.0] * d,
            chart_lip=chart_lip, inflation=inflation, need_membership=False))

    verdict = _aggregate(entries)
    eps = min((e.certificate.admissible_eps for e in entries if e.certificate),
              default=0.0)
    period = lcm_period([n.transition.n for n in spec.nodes]) if verdict == "pass" else None
    return TheoremReport(1, verdict, tuple(entries),
                         eps if verdict == "pass" else 0.0, period=period)


def theorem2_check(spec: NetworkSpec, resolution: int = 64,
                   pert_amplitude: float = 0.0) -> TheoremReport:
    """Certify the unified-family hypotheses (entropy lower-bound check).

    On a pass the report carries the entropy lower bound, the sum of the
    log Perron roots of the node transition matrices, and the global
    admissible perturbation radius.
    """
    _require_valid(spec, TYPE_II)
    forms = [_resolve_forms(node, TYPE_II) for node in spec.nodes]
    tables = _FormTables(spec, forms, resolution)
    d = spec.d
    s = spec.nodes[0].dim_s

    per_node = [node.transitions() for node in spec.nodes]
    chart_lip = max(node.member_chart(j).lipschitz()
                    for node in spec.nodes for j in range(1, node.count + 1))
    inflation = pert_amplitude * chart_lip * (1.0 + spec.coupling.lipschitz())

    entries = []
    for combo in itertools.product(*per_node):
        i_idx = tuple(i for i, _ in combo)
        j_idx = tuple(j for _, j in combo)
        refs_u = [spec.nodes[k].unified.members[j_idx[k] - 1][1].p_u for k in range(d)]
        refs_s = [spec.nodes[k].unified.members[j_idx[k] - 1][1].p_s for k in range(d)]
        radii = [spec.nodes[k].unified.members[j_idx[k] - 1][1].r if s > 0 else 1.0
                 for k in range(d)]
        entries.append(_check_entry(
            spec, tables, i_idx, j_idx,
            form_key=lambda l, i_idx=i_idx: i_idx[l],
            refs_u=refs_u, refs_s=refs_s, radii=radii,
            chart_lip=chart_lip, inflation=inflation, need_membership=True))

    verdict = _aggregate(entries)
    eps = min((e.certificate.admissible_eps for e in entries if e.certificate),
              default=0.0)
    bound = float(sum(math.log(spectral_radius(n.transition)) for n in spec.nodes))
    return TheoremReport(2, verdict, tuple(entries),
                         eps if verdict == "pass" else 0.0,
                         entropy_bound=bound if verdict == "pass" else None)


def _aggregate(entries: list[EntryResult]) -> str:
    if all(e.verdict == "pass" for e in entries):
        return "pass"
    if any(e.verdict == "fail" for e in entries):
        return "fail"
    return "inconclusive"


# ---------------------------------------------------------------------------
# conjugacy audit


@dataclass(frozen=True)
class ConjugacyReport:
    worst_residual: float
    samples: int
    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def conjugacy_audit(spec: NetworkSpec, samples: int = 200, tol: float = 1e-9,
                    seed: int = 0) -> ConjugacyReport:
    """Sampled audit that the interaction matches its Kronecker model.

    Points are drawn in the image of the h-set products under the local
    maps, pushed through the charts, and compared against the linear model.
    This audits input consistency; it is not a proof.
    """
    rng = np.random.default_rng(seed)
    d = spec.d
    block = spec.block_dim
    ambient = spec.coupling.ambient_map(block)
    worst = 0.0
    bad: list[str] = []
    n_done = 0

    if spec.coupling.kind == TYPE_II:
        combos = list(itertools.product(*[range(1, n.count + 1) for n in spec.nodes]))
    else:
        combos = []
        for combo in itertools.product(*[n.transitions() for n in spec.nodes]):
            combos.append(tuple(c for c in combo))

    per = max(1, samples // max(1, len(combos)))
    for combo in combos:
        if spec.coupling.kind == TYPE_II:
            i_idx = combo
            charts_in = [spec.nodes[k].member_chart(i_idx[k]) for k in range(d)]
            charts_out = [spec.nodes[k].unified.chart for k in range(d)]
            a = spec.coupling.matrix
            label = f"sources {i_idx}"
        else:
            i_idx = tuple(i for i, _ in combo)
            j_idx = tuple(j for _, j in combo)
            charts_in = [spec.nodes[k].hsets[i_idx[k] - 1].chart for k in range(d)]
            charts_out = [spec.nodes[k].hsets[j_idx[k] - 1].chart for k in range(d)]
            a = spec.coupling.matrix_for(i_idx, j_idx)
            label = f"entry {i_idx}->{j_idx}"
        model = np.kron(a, np.eye(block))
        xi = rng.uniform(-1.0, 1.0, size=(per, d * block))
        for row in xi:
            w = np.concatenate([charts_in[k].invert(row[k * block:(k + 1) * block])
                                for k in range(d)])
            tw = np.concatenate([spec.nodes[k].local_map.apply(w[k * block:(k + 1) * block])
                                 for k in range(d)])
            z = np.concatenate([charts_out[k].apply(tw[k * block:(k + 1) * block])
                                for k in range(d)])
            atw = ambient.apply(tw)
            lhs = np.concatenate([charts_out[k].apply(atw[k * block:(k + 1) * block])
                                  for k in range(d)])
            resid = float(np.max(np.abs(lhs - model @ z)))
            worst = max(worst, resid)
            n_done += 1
            if resid > tol and len(bad) < 16:
                bad.append(f"{label}: residual {resid:.3e}")
    return ConjugacyReport(worst, n_done, tuple(bad))

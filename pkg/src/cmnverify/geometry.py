"""h-sets, affine charts, unified families, and stretch bounds.

Everything here uses the max-norm: unit balls are boxes, the boundary of
the unstable ball is the union of the box faces.  That choice makes every
bound in this module either exact (interval endpoints, cell vertices,
per-face linear programs) or conservatively certified (face grids with an
explicit Lipschitz slack).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

DET_TOL = 1e-10          # charts with |det| below this are rejected
CONTINUITY_TOL = 1e-9    # adjacent pieces must agree on shared boundaries
EVAL_TIE_TOL = 1e-12     # membership / first-match tie tolerance


class GeometryError(ValueError):
    """Invalid chart, set, or map data."""


def _as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise GeometryError(f"expected a vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise GeometryError(f"dimension mismatch: expected {n}, got {v.shape[0]}")
    return v


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise GeometryError(f"expected a matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class AffineChart:
    """Invertible affine change of coordinates x -> linear @ x + offset.

    ``dim_u`` leading coordinates are unstable (expanding), the remaining
    ``dim_s`` are stable.  Rejected when |det(linear)| < 1e-10.
    """

    dim_u: int
    dim_s: int
    linear: np.ndarray
    offset: np.ndarray
    inverse_linear: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = self.dim_u + self.dim_s
        if self.dim_u < 0 or self.dim_s < 0 or m == 0:
            raise GeometryError("chart needs nonnegative dims with u + s >= 1")
        lin = _as_matrix(self.linear)
        if lin.shape != (m, m):
            raise GeometryError(f"chart linear part must be {m}x{m}, got {lin.shape}")
        off = _as_vector(self.offset, m)
        det = np.linalg.det(lin)
        if abs(det) < DET_TOL:
            raise GeometryError(f"chart is numerically singular: |det| = {abs(det):.3e}")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "inverse_linear", np.linalg.inv(lin))

    @property
    def dim(self) -> int:
        return self.dim_u + self.dim_s

    def apply(self, point) -> np.ndarray:
        p = _as_vector(point, self.dim)
        return self.linear @ p + self.offset

    def invert(self, point) -> np.ndarray:
        p = _as_vector(point, self.dim)
        return self.inverse_linear @ (p - self.offset)

    def apply_batch(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.linear.T + self.offset

    def invert_batch(self, pts: np.ndarray) -> np.ndarray:
        return (pts - self.offset) @ self.inverse_linear.T

    def lipschitz(self) -> float:
        """Operator max-norm of the linear part (max absolute row sum)."""
        return float(np.max(np.sum(np.abs(self.linear), axis=1)))

    @staticmethod
    def identity(dim_u: int, dim_s: int = 0) -> "AffineChart":
        m = dim_u + dim_s
        return AffineChart(dim_u, dim_s, np.eye(m), np.zeros(m))

    @staticmethod
    def shift_1d(b: float) -> "AffineChart":
        """One-dimensional chart x -> x + b with a full unstable direction."""
        return AffineChart(1, 0, np.array([[1.0]]), np.array([float(b)]))


def chart_apply(chart: AffineChart, point) -> np.ndarray:
    """Evaluate the chart at a point: linear @ point + offset."""
    return chart.apply(point)


def chart_invert(chart: AffineChart, point) -> np.ndarray:
    """Map a point back through the chart."""
    return chart.invert(point)


@dataclass(frozen=True)
class HSet:
    """Compact set carried by an affine chart onto the unit product box.

    The physical set is chart^-1([-1,1]^u x [-1,1]^s); it is nonempty and
    compact by construction.
    """

    id: str
    chart: AffineChart

    @property
    def dim_u(self) -> int:
        return self.chart.dim_u

    @property
    def dim_s(self) -> int:
        return self.chart.dim_s

    @property
    def dim(self) -> int:
        return self.chart.dim

    def contains(self, point, tol: float = EVAL_TIE_TOL) -> bool:
        return bool(np.max(np.abs(self.chart.apply(point))) <= 1.0 + tol)

    def vertices(self) -> np.ndarray:
        """Physical vertices: chart preimages of the unit-box corners."""
        corners = np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
        return self.chart.invert_batch(corners)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices()
        return v.min(axis=0), v.max(axis=0)


@dataclass(frozen=True)
class CenterScale:
    """Recentering map g(x, y) = (x - p_u, (y - p_s) / r) with 0 < r <= 1."""

    p_u: np.ndarray
    p_s: np.ndarray
    r: float

    def __post_init__(self):
        object.__setattr__(self, "p_u", np.atleast_1d(np.asarray(self.p_u, dtype=float)))
        object.__setattr__(self, "p_s", np.atleast_1d(np.asarray(self.p_s, dtype=float))
                           if np.size(self.p_s) else np.zeros(0))
        object.__setattr__(self, "r", float(self.r))
        if not 0.0 < self.r <= 1.0:
            raise GeometryError(f"stable radius must satisfy 0 < r <= 1, got {self.r}")

    @property
    def dim_u(self) -> int:
        return self.p_u.shape[0]

    @property
    def dim_s(self) -> int:
        return self.p_s.shape[0]

    def compose_chart(self, chart: AffineChart) -> AffineChart:
        """The chart g o c, mapping the member set onto the unit box."""
        if chart.dim_u != self.dim_u or chart.dim_s != self.dim_s:
            raise GeometryError("center/scale dims do not match the chart split")
        scale = np.concatenate([np.ones(self.dim_u), np.full(self.dim_s, 1.0 / self.r)])
        p = np.concatenate([self.p_u, self.p_s])
        lin = scale[:, None] * chart.linear
        off = scale * (chart.offset - p)
        return AffineChart(chart.dim_u, chart.dim_s, lin, off)


@dataclass(frozen=True)
class UnifiedSet:
    """Family of disjoint h-sets sharing one ambient chart.

    Under the shared chart the i-th member is the unit unstable ball at
    (3(i-1), 0, ..., 0) times a stable ball of radius r_i at its stable
    center.
    """

    chart: AffineChart
    members: tuple[tuple[str, CenterScale], ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple((str(i), cs) for i, cs in self.members))

    @property
    def count(self) -> int:
        return len(self.members)

    def member_ids(self) -> list[str]:
        return [mid for mid, _ in self.members]

    def member_chart(self, index: int) -> AffineChart:
        """Chart of member ``index`` (0-based): recentering after the shared chart."""
        _, cs = self.members[index]
        return cs.compose_chart(self.chart)

    def hull_center(self) -> np.ndarray:
        """Center of the enclosing unstable ball, ((3d-3)/2, 0, ..., 0)."""
        q = np.zeros(self.chart.dim_u)
        q[0] = 1.5 * (self.count - 1)
        return q

    def hull_radius(self) -> float:
        return (3.0 * self.count - 1.0) / 2.0


@dataclass(frozen=True)
class UnifiedValidation:
    violations: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> str | None:
        return self.violations[0] if self.violations else None


def unified_validate(n: UnifiedSet, tol: float = 1e-9) -> UnifiedValidation:
    """Check the unified-family invariants; report every violated clause."""
    bad: list[str] = []
    d = n.count
    if d < 1:
        return UnifiedValidation(("member count must be >= 1",))
    u = n.chart.dim_u
    s = n.chart.dim_s
    for i, (mid, cs) in enumerate(n.members):
        if cs.dim_u != u or cs.dim_s != s:
            bad.append(f"member {i + 1} ({mid}): split ({cs.dim_u},{cs.dim_s}) != ({u},{s})")
            continue
        want = np.zeros(u)
        want[0] = 3.0 * i
        if np.max(np.abs(cs.p_u - want)) > tol:
            bad.append(f"member {i + 1} ({mid}): unstable center {cs.p_u.tolist()} "
                       f"!= (3({i + 1}-1), 0, ...) = {want.tolist()}")
        if s > 0:
            if abs(cs.p_s[0]) >= 1.0:
                bad.append(f"member {i + 1} ({mid}): |stable center| = {abs(cs.p_s[0])} >= 1")
            if s > 1 and np.max(np.abs(cs.p_s[1:])) > tol:
                bad.append(f"member {i + 1} ({mid}): stable center has nonzero tail")
        if not 0.0 < cs.r <= 1.0:
            bad.append(f"member {i + 1} ({mid}): radius {cs.r} outside (0, 1]")
    for i, j in itertools.combinations(range(d), 2):
        sep = np.max(np.abs(n.members[i][1].p_u - n.members[j][1].p_u))
        if sep <= 2.0 + tol:
            bad.append(f"members {i + 1} and {j + 1}: unstable balls overlap (spacing {sep})")
    return UnifiedValidation(tuple(bad))


# ---------------------------------------------------------------------------
# piecewise-affine maps


@dataclass(frozen=True)
class AffinePiece:
    """One affine piece, active on the polytope normals @ x <= bounds."""

    matrix: np.ndarray
    offset: np.ndarray
    normals: np.ndarray
    bounds: np.ndarray

    def contains(self, x: np.ndarray, tol: float = EVAL_TIE_TOL) -> bool:
        if self.normals.shape[0] == 0:
            return True
        return bool(np.all(self.normals @ x <= self.bounds + tol))

    def contains_batch(self, pts: np.ndarray, tol: float = EVAL_TIE_TOL) -> np.ndarray:
        if self.normals.shape[0] == 0:
            return np.ones(pts.shape[0], dtype=bool)
        return np.all(pts @ self.normals.T <= self.bounds + tol, axis=1)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x + self.offset


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """Continuous map given by affine pieces on polytope cells.

    Cell interiors are pairwise disjoint and cover the (possibly unbounded)
    domain; evaluation on a shared boundary picks the first matching piece,
    which is harmless because adjacent pieces agree there to within 1e-9.
    """

    dim_in: int
    dim_out: int
    pieces: tuple[AffinePiece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise GeometryError("a piecewise-affine map needs at least one piece")
        for p in self.pieces:
            if p.matrix.shape != (self.dim_out, self.dim_in):
                raise GeometryError(f"piece matrix shape {p.matrix.shape} != "
                                    f"({self.dim_out},{self.dim_in})")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def affine(matrix, offset) -> "PiecewiseAffineMap":
        m = _as_matrix(matrix)
        o = _as_vector(offset, m.shape[0])
        piece = AffinePiece(m, o, np.zeros((0, m.shape[1])), np.zeros(0))
        return PiecewiseAffineMap(m.shape[1], m.shape[0], (piece,))

    @staticmethod
    def identity(dim: int) -> "PiecewiseAffineMap":
        return PiecewiseAffineMap.affine(np.eye(dim), np.zeros(dim))

    @staticmethod
    def from_breakpoints(breakpoints, pieces) -> "PiecewiseAffineMap":
        """1-d map from sorted breakpoints and per-interval (slope, intercept).

        len(pieces) == len(breakpoints) + 1; continuity at each breakpoint is
        required to within 1e-9.
        """
        bps = [float(b) for b in breakpoints]
        if sorted(bps) != bps:
            raise GeometryError("breakpoints must be sorted ascending")
        if len(pieces) != len(bps) + 1:
            raise GeometryError("need exactly one piece more than breakpoints")
        coeffs = [(float(a), float(c)) for a, c in pieces]
        for i, b in enumerate(bps):
            left = coeffs[i][0] * b + coeffs[i][1]
            right = coeffs[i + 1][0] * b + coeffs[i + 1][1]
            if abs(left - right) > CONTINUITY_TOL:
                raise GeometryError(f"discontinuity {abs(left - right):.3e} at "
                                    f"breakpoint {b} (pieces {i} and {i + 1})")
        out: list[AffinePiece] = []
        for i, (a, c) in enumerate(coeffs):
            normals, bounds = [], []
            if i > 0:
                normals.append([-1.0])
                bounds.append(-bps[i - 1])
            if i < len(bps):
                normals.append([1.0])
                bounds.append(bps[i])
            out.append(AffinePiece(np.array([[a]]), np.array([c]),
                                   np.array(normals).reshape(-1, 1), np.array(bounds)))
        return PiecewiseAffineMap(1, 1, tuple(out))

    # -- basic queries -------------------------------------------------------

    @property
    def is_affine(self) -> bool:
        return len(self.pieces) == 1 and self.pieces[0].normals.shape[0] == 0

    def piece_index_at(self, x) -> int:
        v = _as_vector(x, self.dim_in)
        for i, p in enumerate(self.pieces):
            if p.contains(v):
                return i
        raise GeometryError(f"map is undefined at {v.tolist()}")

    def apply(self, x) -> np.ndarray:
        v = _as_vector(x, self.dim_in)
        return self.pieces[self.piece_index_at(v)].evaluate(v)

    def apply_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = np.empty((pts.shape[0], self.dim_out))
        todo = np.ones(pts.shape[0], dtype=bool)
        for p in self.pieces:
            hit = todo & p.contains_batch(pts)
            if np.any(hit):
                out[hit] = pts[hit] @ p.matrix.T + p.offset
                todo &= ~hit
            if not np.any(todo):
                break
        if np.any(todo):
            raise GeometryError(f"map undefined at {int(np.sum(todo))} of "
                                f"{pts.shape[0]} points")
        return out

    def lipschitz(self) -> float:
        """Max over pieces of the operator max-norm of the linear part."""
        return max(float(np.max(np.sum(np.abs(p.matrix), axis=1))) for p in self.pieces)

    # -- algebra -------------------------------------------------------------

    def scale(self, c: float) -> "PiecewiseAffineMap":
        c = float(c)
        reps = tuple(AffinePiece(c * p.matrix, c * p.offset, p.normals, p.bounds)
                     for p in self.pieces)
        return PiecewiseAffineMap(self.dim_in, self.dim_out, reps)

    def compose_affine_inner(self, linear, offset) -> "PiecewiseAffineMap":
        """The map x -> F(linear @ x + offset); cells pull back exactly."""
        lin = _as_matrix(linear)
        off = _as_vector(offset, lin.shape[0])
        if lin.shape[0] != self.dim_in:
            raise GeometryError("inner map output dim does not match")
        reps = []
        for p in self.pieces:
            reps.append(AffinePiece(p.matrix @ lin, p.matrix @ off + p.offset,
                                    p.normals @ lin, p.bounds - p.normals @ off))
        return PiecewiseAffineMap(lin.shape[1], self.dim_out, tuple(reps))

    def compose_affine_outer(self, linear, offset) -> "PiecewiseAffineMap":
        """The map x -> linear @ F(x) + offset."""
        lin = _as_matrix(linear)
        off = _as_vector(offset, lin.shape[0])
        if lin.shape[1] != self.dim_out:
            raise GeometryError("outer map input dim does not match")
        reps = tuple(AffinePiece(lin @ p.matrix, lin @ p.offset + off, p.normals, p.bounds)
                     for p in self.pieces)
        return PiecewiseAffineMap(self.dim_in, lin.shape[0], reps)

    def single_piece_on_box(self, lo, hi) -> int:
        """Index of the unique piece whose cell contains the whole box [lo, hi].

        Raises if the box straddles a cell boundary (the map is not affine
        there), which callers treat as a subdivision error.
        """
        lo = _as_vector(lo, self.dim_in)
        hi = _as_vector(hi, self.dim_in)
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        for i, p in enumerate(self.pieces):
            if bool(np.all(p.contains_batch(corners, tol=1e-9))):
                return i
        raise GeometryError("box is not contained in a single affine piece")

    def range_1d(self, lo: float = -1.0, hi: float = 1.0) -> tuple[float, float]:
        """Exact (min, max) of a scalar 1-d map over [lo, hi]."""
        if self.dim_in != 1 or self.dim_out != 1:
            raise GeometryError("range_1d needs a scalar map on the line")
        xs = {lo, hi}
        for p in self.pieces:
            for n, b in zip(p.normals[:, 0], p.bounds):
                if abs(n) > 0:
                    t = b / n
                    if lo < t < hi:
                        xs.add(t)
        vals = [float(self.apply([t])[0]) for t in sorted(xs)]
        return min(vals), max(vals)


# ---------------------------------------------------------------------------
# stretch bounds


@dataclass(frozen=True)
class StretchBounds:
    """Bounds on |F - ref| over the unit box and its boundary.

    min_rel:      rigorous lower bound on min over the boundary
    max_abs:      exact max over the closed box
    certified:    True when min_rel is exact (1-d or affine map); False when
                  it carries grid-plus-Lipschitz slack
    min_attained: smallest boundary value actually evaluated; an upper bound
                  on the true minimum, used to separate failure from
                  inconclusiveness
    """

    min_rel: float
    max_abs: float
    certified: bool
    min_attained: float

    def __post_init__(self):
        if self.min_rel > self.max_abs + 1e-12:
            raise GeometryError("min stretch bound exceeds max stretch bound")


def _piece_box_vertices(piece: AffinePiece, dim: int) -> np.ndarray:
    """Vertices of (cell of ``piece``) intersected with the unit box."""
    normals = np.vstack([piece.normals, np.eye(dim), -np.eye(dim)])
    bounds = np.concatenate([piece.bounds, np.ones(2 * dim)])
    n = normals.shape[0]
    verts = []
    for combo in itertools.combinations(range(n), dim):
        a = normals[list(combo)]
        b = bounds[list(combo)]
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        x = np.linalg.solve(a, b)
        if np.all(normals @ x <= bounds + 1e-9):
            verts.append(x)
    if not verts:
        return np.zeros((0, dim))
    return np.unique(np.round(np.asarray(verts), 12), axis=0)


def _exact_max(F: PiecewiseAffineMap, ref: np.ndarray) -> float:
    """Exact max of |F - ref| over the unit box via cell-vertex enumeration."""
    best = None
    for p in F.pieces:
        verts = _piece_box_vertices(p, F.dim_in)
        if verts.shape[0] == 0:
            continue
        vals = verts @ p.matrix.T + p.offset - ref
        m = float(np.max(np.abs(vals)))
        best = m if best is None else max(best, m)
    if best is None:
        raise GeometryError("no cell of the map meets the unit box")
    return best


def _face_points(dim: int, resolution: int) -> np.ndarray:
    """Grid over the boundary of the unit box, resolution points per axis."""
    axis = np.linspace(-1.0, 1.0, resolution)
    grids = np.meshgrid(*([axis] * (dim - 1)), indexing="ij") if dim > 1 else []
    free = np.stack([g.ravel() for g in grids], axis=1) if dim > 1 else np.zeros((1, 0))
    pts = []
    for i in range(dim):
        for sign in (-1.0, 1.0):
            block = np.empty((free.shape[0], dim))
            block[:, i] = sign
            other = [j for j in range(dim) if j != i]
            block[:, other] = free
            pts.append(block)
    return np.vstack(pts)


def _affine_face_min(F: PiecewiseAffineMap, ref: np.ndarray) -> float:
    """Exact min of |F - ref| over the box boundary for an affine map.

    Per face this is a small linear program: minimize t subject to
    -t <= (F(x) - ref)_j <= t with the face coordinate pinned.
    """
    from scipy.optimize import linprog

    piece = F.pieces[0]
    dim = F.dim_in
    best = np.inf
    for i in range(dim):
        for sign in (-1.0, 1.0):
            other = [j for j in range(dim) if j != i]
            base = piece.matrix[:, i] * sign + piece.offset - ref
            if not other:
                best = min(best, float(np.max(np.abs(base))))
                continue
            a_free = piece.matrix[:, other]
            n_free = len(other)
            # variables: free coords then t
            cost = np.zeros(n_free + 1)
            cost[-1] = 1.0
            a_ub = np.block([[a_free, -np.ones((a_free.shape[0], 1))],
                             [-a_free, -np.ones((a_free.shape[0], 1))]])
            b_ub = np.concatenate([-base, base])
            res = linprog(cost, A_ub=a_ub, b_ub=b_ub,
                          bounds=[(-1.0, 1.0)] * n_free + [(0.0, None)],
                          method="highs")
            if not res.success:
                raise GeometryError(f"face minimization failed: {res.message}")
            best = min(best, float(res.fun))
    return best


def _stretch(F: PiecewiseAffineMap, ref, resolution: int, want_min: bool) -> StretchBounds:
    ref = _as_vector(ref, F.dim_out)
    if F.dim_in <= 4:
        # cheap totality probe; vertex enumeration alone would silently
        # ignore an uncovered patch of the ball
        axis = np.linspace(-1.0, 1.0, 5)
        probe = np.array(list(itertools.product(axis, repeat=F.dim_in)))
        F.apply_batch(probe)
    max_abs = _exact_max(F, ref)
    if not want_min:
        return StretchBounds(0.0, max_abs, True, 0.0)
    dim = F.dim_in
    if dim == 1:
        vals = [float(np.max(np.abs(F.apply([x]) - ref))) for x in (-1.0, 1.0)]
        m = min(vals)
        return StretchBounds(m, max_abs, True, m)
    if F.is_affine:
        m = _affine_face_min(F, ref)
        return StretchBounds(m, max_abs, True, m)
    if resolution < 2:
        raise GeometryError("grid resolution must be at least 2")
    pts = _face_points(dim, resolution)
    vals = np.max(np.abs(F.apply_batch(pts) - ref), axis=1)
    attained = float(np.min(vals))
    spacing = 2.0 / (resolution - 1)
    slack = F.lipschitz() * spacing / 2.0
    return StretchBounds(max(attained - slack, 0.0), max_abs, False, attained)


def min_stretch(F: PiecewiseAffineMap, ref, resolution: int = 64) -> StretchBounds:
    """Lower-bound min |F(x) - ref| over the boundary of the unit box.

    Exact for 1-d maps (endpoint evaluation) and for affine maps (per-face
    linear programs); otherwise a face grid with Lipschitz slack, flagged
    certified=False.
    """
    return _stretch(F, ref, resolution, want_min=True)


def max_stretch(F: PiecewiseAffineMap, ref) -> StretchBounds:
    """Exact max |F(x) - ref| over the closed unit box (cell-vertex maximum)."""
    return _stretch(F, ref, 0, want_min=False)


def split_product(F: PiecewiseAffineMap, u: int, samples: int = 5,
                  tol: float = CONTINUITY_TOL) -> tuple[PiecewiseAffineMap,
                                                        PiecewiseAffineMap | None]:
    """Split F(x, y) on the unit box into block components (U(x), V(y)).

    Requires every piece touching the box to be block diagonal with cell
    constraints separating the two blocks; the result is verified against F
    on a deterministic sample grid.  Raises GeometryError when F is not of
    product form.
    """
    s = F.dim_in - u
    if F.dim_out != F.dim_in:
        raise GeometryError("product split needs a square map")
    if s == 0:
        return F, None

    def block_pieces(rows, cols):
        out = {}
        for p in F.pieces:
            if np.max(np.abs(p.matrix[np.ix_(rows, [c for c in range(F.dim_in)
                                                    if c not in cols])])) > tol:
                raise GeometryError("map mixes unstable and stable blocks")
            keep = []
            for n, b in zip(p.normals, p.bounds):
                on_cols = np.max(np.abs(n[cols])) > tol if len(cols) else False
                on_other = np.max(np.abs(np.delete(n, cols))) > tol
                if on_cols and on_other:
                    raise GeometryError("cell constraint mixes the two blocks")
                if on_cols:
                    keep.append((n[cols], b))
            key_n = np.array([k[0] for k in keep]).reshape(-1, len(cols))
            key_b = np.array([k[1] for k in keep])
            key = (np.round(p.matrix[np.ix_(rows, cols)], 12).tobytes(),
                   np.round(p.offset[rows], 12).tobytes(),
                   np.round(key_n, 12).tobytes(), np.round(key_b, 12).tobytes())
            out.setdefault(key, AffinePiece(p.matrix[np.ix_(rows, cols)],
                                            p.offset[rows], key_n, key_b))
        return PiecewiseAffineMap(len(cols), len(rows), tuple(out.values()))

    U = block_pieces(list(range(u)), list(range(u)))
    V = block_pieces(list(range(u, F.dim_in)), list(range(u, F.dim_in)))
    axis = np.linspace(-1.0, 1.0, samples)
    grid = np.array(list(itertools.product(axis, repeat=F.dim_in)))
    full = F.apply_batch(grid)
    ux = U.apply_batch(grid[:, :u])
    vy = V.apply_batch(grid[:, u:])
    if np.max(np.abs(full - np.hstack([ux, vy]))) > 10 * tol:
        raise GeometryError("map is not of product form on the unit box")
    return U, V

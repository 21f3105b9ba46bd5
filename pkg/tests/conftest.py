"""Shared generators for randomized oracle tests."""

import numpy as np
import pytest

from cmnverify import PiecewiseAffineMap, TransitionMatrix


def random_interval_map(rng, n_pieces=None, slope_scale=3.0):
    """Continuous random piecewise-affine map on the line.

    Breakpoints fall inside (-1, 1) so the unit interval genuinely crosses
    cells; intercepts are chained so the map is continuous by construction.
    """
    if n_pieces is None:
        n_pieces = int(rng.integers(1, 5))
    bps = np.sort(rng.uniform(-0.9, 0.9, size=n_pieces - 1))
    slopes = rng.uniform(-slope_scale, slope_scale, size=n_pieces)
    start = rng.uniform(-2.0, 2.0)
    pieces = [(slopes[0], start)]
    for i, b in enumerate(bps):
        value = pieces[i][0] * b + pieces[i][1]
        pieces.append((slopes[i + 1], value - slopes[i + 1] * b))
    return PiecewiseAffineMap.from_breakpoints(bps.tolist(), pieces)


def planar_from_scalar(u_map, s_slope, s_offset=0.0):
    """Block-diagonal planar map (u(x), s_slope * y + s_offset) from a 1-d map."""
    pieces = []
    for p in u_map.pieces:
        matrix = np.array([[p.matrix[0, 0], 0.0], [0.0, s_slope]])
        offset = np.array([p.offset[0], s_offset])
        normals = np.hstack([p.normals, np.zeros_like(p.normals)])
        pieces.append(type(p)(matrix, offset, normals, p.bounds))
    return PiecewiseAffineMap(2, 2, tuple(pieces))


def random_transition_matrix(rng, n=None):
    """Random 0/1 matrix with all row and column sums at least one."""
    if n is None:
        n = int(rng.integers(1, 6))
    bits = (rng.random((n, n)) < 0.45).astype(int)
    for i in range(n):
        if bits[i].sum() == 0:
            bits[i, rng.integers(n)] = 1
    for j in range(n):
        if bits[:, j].sum() == 0:
            bits[rng.integers(n), j] = 1
    return TransitionMatrix(bits)


def enumerate_words(W: TransitionMatrix, n: int) -> list[tuple[int, ...]]:
    """Exhaustive admissible-word enumeration (depth-first, independent of
    matrix powers)."""
    words = []

    def grow(word):
        if len(word) == n:
            words.append(word)
            return
        for nxt in range(1, W.n + 1):
            if W.allows(word[-1], nxt):
                grow(word + (nxt,))

    for start in range(1, W.n + 1):
        grow((start,))
    return words


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

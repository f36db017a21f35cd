"""Grids and operators for the non-local boundary-value test problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matfunc import BandedOperator

def _uniform_spacing(nodes: np.ndarray) -> bool:
    """Spacing jitter is bounded by rounding on the node magnitudes."""
    d = np.diff(nodes)
    tol = 16.0 * np.finfo(float).eps * float(np.abs(nodes).max())
    return bool(np.all(np.abs(d - d[0]) <= tol))


@dataclass(frozen=True)
class Grid:
    """Interior nodes of (0, a) plus the endpoints 0 and a.

    nodes holds all s + 2 points in increasing order; the discretized
    operator acts on the s interior values only.
    """

    nodes: np.ndarray
    kind: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.shape[0] < 3:
            raise ValueError("grid needs at least one interior node")
        d = np.diff(nodes)
        if not np.all(d > 0):
            raise ValueError("grid nodes must be strictly increasing")
        if self.kind == "uniform":
            if not _uniform_spacing(nodes):
                raise ValueError("uniform grid has non-uniform spacing")
        elif self.kind != "geometric":
            raise ValueError(f"unknown grid kind {self.kind!r}")

    @property
    def interior_size(self) -> int:
        return self.nodes.shape[0] - 2

    @property
    def length(self) -> float:
        return float(self.nodes[-1])


def uniform_grid(a: float, s: int) -> Grid:
    """s interior nodes equally spaced in (0, a)."""
    if a <= 0:
        raise ValueError("interval length must be positive")
    if s < 1:
        raise ValueError("need at least one interior node")
    return Grid(nodes=np.linspace(0.0, a, s + 2), kind="uniform")


def geometric_grid(x1: float, sigma: float, s: int) -> Grid:
    """Geometrically stretched interior nodes x_{i+1} = x_i (1 + sigma h_i).

    Starts from x_1 = x1 with h_1 = x1; each spacing is the previous one
    scaled by sigma, so sigma > 1 concentrates nodes near the left
    endpoint relative to the right.
    """
    if x1 <= 0:
        raise ValueError("first node must be positive")
    if sigma <= 0:
        raise ValueError("stretch factor must be positive")
    if s < 1:
        raise ValueError("need at least one interior node")
    nodes = np.empty(s + 2)
    nodes[0] = 0.0
    nodes[1] = x1
    h = x1
    for i in range(2, s + 2):
        h *= sigma
        nodes[i] = nodes[i - 1] + h
    return Grid(nodes=nodes, kind="geometric")


def discretize_laplacian(grid: Grid) -> BandedOperator:
    """Second difference on the interior nodes with zero boundary values.

    On a non-uniform grid row i uses the three-point formula
    u''(x_i) ~ 2 [ u_{i-1}/(h_i (h_i + h_{i+1}))
                 - u_i/(h_i h_{i+1})
                 + u_{i+1}/(h_{i+1} (h_i + h_{i+1})) ]
    with h_i = x_i - x_{i-1}.
    """
    if grid.interior_size < 2:
        raise ValueError("discretization needs at least two interior nodes")
    x = grid.nodes
    hl = x[1:-1] - x[:-2]   # h_i, spacing to the left of node i
    hr = x[2:] - x[1:-1]    # h_{i+1}
    diag = -2.0 / (hr * hl)
    sub = 2.0 / (hl[1:] * (hl[1:] + hr[1:]))
    sup = 2.0 / (hr[:-1] * (hl[:-1] + hr[:-1]))
    return BandedOperator.tridiagonal(sub, diag, sup)


def circulant_shift(s: int, scale: float) -> BandedOperator:
    """scale times the cyclic down-shift permutation of size s.

    Column i maps to row (i + 1) mod s; all eigenvalues lie on the
    circle of radius |scale|, making it a stiff test away from symmetric
    spectra.
    """
    if s < 2:
        raise ValueError("shift needs dimension >= 2")
    C = np.zeros((s, s))
    C[np.arange(1, s), np.arange(s - 1)] = scale
    C[0, s - 1] = scale
    return BandedOperator.dense(C)


def save_grid(grid: Grid, path) -> None:
    """One node per line, full double precision."""
    np.savetxt(path, grid.nodes, fmt="%.17g")


def load_grid(path) -> Grid:
    """Read nodes written by save_grid; spacing decides the kind."""
    nodes = np.loadtxt(path, ndmin=1)
    kind = "uniform" if _uniform_spacing(nodes) else "geometric"
    return Grid(nodes=nodes, kind=kind)

"""Independent finite-difference verification of the strip eigenvalues.

The negative Laplacian on the truncated strip [-L, L] x [0, d] is
discretized on a vertex-centered grid by the quadratic form

    q(u) = sum_edges w_e (u_p - u_q)^2,      w_e = ell_perp / h_par,

which reproduces the classical 5-point stencil with mirror-ghost
Neumann rows after dividing by the lumped vertex masses
m_v = ell_x(i) * ell_y(j) (half cells on boundary lines).  Dirichlet
vertices are eliminated; the symmetrically scaled matrix

    A = M^(-1/2) K M^(-1/2)

is assembled entry-by-entry so that A == A^T holds exactly in floating
point.  Its eigenvalues equal those of the generalized problem
K u = E M u, i.e. of the ghost-point finite-difference operator.

Truncation uses artificial Dirichlet walls at x = +-L (monotone upward
bias).  Everything is in d = 1 units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from .geometry import Geometry, ModelKind

__all__ = [
    "FdmGrid",
    "FdmOperator",
    "dirichlet_mask",
    "build_operator",
    "build_from_mask",
    "lowest_eigenpairs",
    "extrapolate",
]

#: default half-length margin beyond the window, in units of d
L_MARGIN = 12.0

#: relative eigenpair residual contract
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class FdmGrid:
    """Vertex-centered grid on [-L, L] x [0, 1].

    The switch points x = +-delta must fall exactly on grid columns;
    ``from_spacing`` chooses hx accordingly (hx = delta / round(delta/hy),
    L snapped up to a multiple of hx).
    """

    L: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid must have at least 2 cells per direction")
        if self.L <= 0.0:
            raise ValueError("half-length L must be positive")

    @property
    def hx(self) -> float:
        return 2.0 * self.L / self.nx

    @property
    def hy(self) -> float:
        return 1.0 / self.ny

    def x(self) -> np.ndarray:
        return -self.L + self.hx * np.arange(self.nx + 1)

    def y(self) -> np.ndarray:
        return self.hy * np.arange(self.ny + 1)

    def column_of(self, x0: float) -> int:
        """Grid column index of x0; errors if x0 is off-grid."""
        t = (x0 + self.L) / self.hx
        i = int(round(t))
        if abs(t - i) > 1e-9 or not (0 <= i <= self.nx):
            raise ValueError(f"x = {x0} does not fall on a grid column")
        return i

    @classmethod
    def from_spacing(
        cls, geometry: Geometry, hy: float, L: float | None = None
    ) -> "FdmGrid":
        """Grid with transverse spacing hy and switch-aligned columns."""
        unit = geometry.unit()
        delta = unit.delta
        ny = int(round(1.0 / hy))
        if abs(ny * hy - 1.0) > 1e-9:
            raise ValueError(f"hy = {hy} must divide the strip width")
        n_delta = max(1, int(round(delta / hy)))
        hx = delta / n_delta
        target = delta + L_MARGIN if L is None else L
        n_half = int(math.ceil(target / hx - 1e-12))
        return cls(L=n_half * hx, nx=2 * n_half, ny=ny)


def dirichlet_mask(model: ModelKind, geometry: Geometry, grid: FdmGrid) -> np.ndarray:
    """Boolean (nx+1, ny+1) array marking Dirichlet vertices.

    The artificial ends x = +-L are Dirichlet.  The Dirichlet boundary
    sets are open in x, so the switch vertices at x = +-delta stay on
    the Neumann side (an O(h) local choice absorbed by extrapolation).
    """
    unit = geometry.unit()
    delta = unit.delta
    i_minus = grid.column_of(-delta)
    i_plus = grid.column_of(delta)
    mask = np.zeros((grid.nx + 1, grid.ny + 1), dtype=bool)
    mask[0, :] = True
    mask[grid.nx, :] = True
    if model is ModelKind.A:
        mask[:i_minus, 0] = True  # bottom Dirichlet for x < -delta
        mask[i_plus + 1 :, grid.ny] = True  # top Dirichlet for x > +delta
    else:
        mask[:i_minus, grid.ny] = True  # top Dirichlet for |x| > delta
        mask[i_plus + 1 :, grid.ny] = True
    return mask


@dataclass(frozen=True)
class FdmOperator:
    """Assembled symmetric operator with its grid bookkeeping.

    ``matrix`` acts on unknown-vertex vectors scaled by sqrt-masses;
    ``embed`` undoes the scaling and reinserts Dirichlet zeros, giving
    nodal field values on the full grid.
    """

    grid: FdmGrid
    mask: np.ndarray  # True at Dirichlet vertices
    matrix: sp.csr_matrix
    index: np.ndarray  # (nx+1, ny+1) unknown index, -1 at Dirichlet
    inv_sqrt_mass: np.ndarray  # per-unknown M^(-1/2)

    @property
    def n_unknowns(self) -> int:
        return self.matrix.shape[0]

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Nodal values on the (nx+1, ny+1) grid (zeros on Dirichlet)."""
        full = np.zeros(self.index.shape)
        full[self.index >= 0] = (vec * self.inv_sqrt_mass)[
            self.index[self.index >= 0]
        ]
        return full


def build_from_mask(grid: FdmGrid, mask: np.ndarray) -> FdmOperator:
    """Assemble the scaled operator for an arbitrary Dirichlet mask."""
    nx, ny = grid.nx, grid.ny
    if mask.shape != (nx + 1, ny + 1):
        raise ValueError("mask shape must be (nx+1, ny+1)")
    if not mask.any():
        raise ValueError("at least one Dirichlet vertex is required")
    hx, hy = grid.hx, grid.hy

    lx = np.full(nx + 1, hx)
    lx[0] = lx[nx] = hx / 2.0
    ly = np.full(ny + 1, hy)
    ly[0] = ly[ny] = hy / 2.0

    index = -np.ones((nx + 1, ny + 1), dtype=np.int64)
    free = ~mask
    n = int(free.sum())
    index[free] = np.arange(n)
    mass = np.outer(lx, ly)
    dscale = np.zeros_like(mass)
    dscale[free] = 1.0 / np.sqrt(mass[free])

    rows, cols, vals = [], [], []
    diag = np.zeros(n)

    def add_edges(p_idx, q_idx, p_scale, q_scale, w):
        both = (p_idx >= 0) & (q_idx >= 0)
        off = -w[both] * p_scale[both] * q_scale[both]
        rows.append(p_idx[both])
        cols.append(q_idx[both])
        vals.append(off)
        rows.append(q_idx[both])
        cols.append(p_idx[both])
        vals.append(off)
        p_only = p_idx >= 0
        np.add.at(diag, p_idx[p_only], w[p_only] * p_scale[p_only] ** 2)
        q_only = q_idx >= 0
        np.add.at(diag, q_idx[q_only], w[q_only] * q_scale[q_only] ** 2)

    # horizontal edges (i, j) -- (i+1, j)
    wgt = np.broadcast_to((ly / hx)[None, :], (nx, ny + 1)).ravel()
    add_edges(
        index[:-1, :].ravel(),
        index[1:, :].ravel(),
        dscale[:-1, :].ravel(),
        dscale[1:, :].ravel(),
        wgt,
    )
    # vertical edges (i, j) -- (i, j+1)
    wgt = np.broadcast_to((lx / hy)[:, None], (nx + 1, ny)).ravel()
    add_edges(
        index[:, :-1].ravel(),
        index[:, 1:].ravel(),
        dscale[:, :-1].ravel(),
        dscale[:, 1:].ravel(),
        wgt,
    )

    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    return FdmOperator(
        grid=grid,
        mask=mask.copy(),
        matrix=matrix,
        index=index,
        inv_sqrt_mass=dscale[free],
    )


def build_operator(model: ModelKind, geometry: Geometry, grid: FdmGrid) -> FdmOperator:
    """Assemble the operator for a model's boundary conditions."""
    return build_from_mask(grid, dirichlet_mask(model, geometry, grid))


def lowest_eigenpairs(operator: FdmOperator, k: int):
    """The k smallest eigenpairs by shift-invert at zero.

    Every returned pair satisfies ||A v - E v|| / ||v|| < RESIDUAL_TOL;
    pairs that miss the contract after inverse-iteration polish raise.
    Vectors are in the scaled unknown space (use ``operator.embed``).
    """
    if not 1 <= k <= 6:
        raise ValueError("k must lie in [1, 6]")
    A = operator.matrix
    n = A.shape[0]
    if k >= n:
        raise ValueError("grid too small for the requested eigenpair count")
    lu = splu(A.tocsc())
    opinv = LinearOperator((n, n), matvec=lu.solve, dtype=float)
    v0 = np.full(n, 1.0 / math.sqrt(n))
    vals, vecs = eigsh(A, k=k, sigma=0.0, which="LM", OPinv=opinv, v0=v0)
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]

    pairs = []
    accepted = []
    for j in range(k):
        lam = float(vals[j])
        v = vecs[:, j]
        v = v / np.linalg.norm(v)
        res = float(np.linalg.norm(A @ v - lam * v))
        if res >= RESIDUAL_TOL:
            # deflated inverse iteration, reusing the factorization
            for _ in range(8):
                w = lu.solve(v)
                for u in accepted:
                    w -= (u @ w) * u
                v = w / np.linalg.norm(w)
                lam = float(v @ (A @ v))
                res = float(np.linalg.norm(A @ v - lam * v))
                if res < RESIDUAL_TOL:
                    break
            else:
                raise RuntimeError(
                    f"eigenpair {j} residual {res:.3e} exceeds {RESIDUAL_TOL}"
                )
        accepted.append(v)
        pairs.append((lam, v))
    pairs.sort(key=lambda t: t[0])
    return pairs


def extrapolate(
    model: ModelKind,
    geometry: Geometry,
    h_list=(1.0 / 40, 1.0 / 80, 1.0 / 160),
    L: float | None = None,
    branch: int = 1,
) -> tuple[float, float]:
    """Richardson extrapolation of one eigenvalue branch over grids.

    Requires at least three spacings in a fixed ratio; fits the
    empirical order p from the last three (finest) grids and returns
    (extrapolated eigenvalue, p).  The corner singularity typically
    gives 1 < p < 2; smooth harnesses give p close to 2.
    """
    hs = sorted(h_list, reverse=True)
    if len(hs) < 3:
        raise ValueError("need at least three grid spacings")
    ratios = [hs[i] / hs[i + 1] for i in range(len(hs) - 1)]
    if any(abs(r - ratios[0]) > 1e-9 * ratios[0] for r in ratios):
        raise ValueError("grid spacings must be in a fixed ratio")
    r = ratios[0]
    if r <= 1.0:
        raise ValueError("grid spacings must decrease")

    energies = []
    for hy in hs:
        grid = FdmGrid.from_spacing(geometry, hy, L=L)
        op = build_operator(model, geometry, grid)
        pairs = lowest_eigenpairs(op, k=min(6, branch + 1))
        if branch > len(pairs):
            raise LookupError(f"branch {branch} not available")
        energies.append(pairs[branch - 1][0])

    e1, e2, e3 = energies[-3], energies[-2], energies[-1]
    d1, d2 = e1 - e2, e2 - e3
    if d1 * d2 <= 0.0 or abs(d1) <= abs(d2):
        raise RuntimeError(
            "non-monotone eigenvalue sequence; grid too coarse for extrapolation"
        )
    ratio = d1 / d2
    p = math.log(ratio) / math.log(r)
    estimate = e3 - d2 / (ratio - 1.0)
    return estimate, p

"""Finite-difference ground states of ``H = -Delta + V`` on truncated domains.

Full grids cover ``[-L, L]^d`` with ``n`` nodes per axis (boundary nodes
included, Dirichlet data there).  The radial path discretizes

    -(1/r^(d-1)) (r^(d-1) u')' + g(r) u = lam u,   u'(0) = 0,  u(L) = 0

by finite volumes on the cell-centred nodes ``r_j = (j - 1/2) h``,
``h = L / (n - 1/2)``, so the last node sits on ``r = L``.  In ``d = 1`` this
is exactly the even part of the full-grid operator with an even node count.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import InputError, SolverError
from .potentials import PotentialSpec, RadialProfile, as_profile

log = logging.getLogger(__name__)

MESH_WARN = 2.0  # V h^2 at the domain edge above this flags a coarse mesh
TAIL_FLOOR = 1e-12
TAIL_CAP = 1e-3


@dataclass(frozen=True)
class GridSpec:
    d: int
    L: float
    n: int
    radial: bool = False

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InputError("grid dimension must be a positive integer")
        if not self.L > 0:
            raise InputError("grid half-width L must be positive")
        if self.n < 16:
            raise InputError("grid needs at least 16 points per axis")
        if not self.radial and self.d > 3:
            raise InputError("full grids are limited to d <= 3; use the radial path")

    @property
    def h(self) -> float:
        if self.radial:
            return self.L / (self.n - 0.5)
        return 2 * self.L / (self.n - 1)

    def axis(self) -> np.ndarray:
        if self.radial:
            return (np.arange(1, self.n + 1) - 0.5) * self.h
        return np.linspace(-self.L, self.L, self.n)


def _unit_sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass
class Hamiltonian:
    """Assembled symmetric operator on the interior unknowns.

    For the radial path the matrix acts on ``sqrt(m) * u`` where ``m`` are the
    cell volumes; ``mass`` holds ``m`` (all ones on full grids).
    """

    grid: GridSpec
    matrix: sp.csr_matrix
    potential_values: np.ndarray
    mass: np.ndarray
    weight: float
    warnings: List[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _second_difference(m: int, h: float) -> sp.csr_matrix:
    main = np.full(m, 2.0 / h ** 2)
    off = np.full(m - 1, -1.0 / h ** 2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _potential_on(potential, pts_or_r, radial: bool):
    if radial:
        return np.asarray(potential(pts_or_r), dtype=float)
    return potential.evaluate(pts_or_r)


def assemble_hamiltonian(grid: GridSpec, potential: Union[PotentialSpec, RadialProfile]) -> Hamiltonian:
    """Second-order finite-difference ``-Delta + V`` with Dirichlet truncation."""
    warnings = []
    h = grid.h
    if grid.radial:
        prof = _radial_profile(potential)
        d = grid.d
        r = grid.axis()[:-1]
        faces = np.arange(1, grid.n) * h  # outer faces of the unknown cells
        inner = np.concatenate([[0.0], faces[:-1]])
        mass = (faces ** d - inner ** d) / (d * h)
        flux = faces ** (d - 1)
        flux_in = np.concatenate([[0.0], flux[:-1]])
        vals = np.asarray(prof(r), dtype=float)
        diag = (flux + flux_in) / (h * h * mass) + vals
        off = -flux[:-1] / (h * h * np.sqrt(mass[:-1] * mass[1:]))
        mat = sp.diags([off, diag, off], [-1, 0, 1], format="csr")
        edge = float(prof(np.array([grid.L]))[0])
        weight = _unit_sphere_area(d) * h
    else:
        if isinstance(potential, PotentialSpec) and potential.dimension != grid.d:
            raise InputError(f"potential dimension {potential.dimension} does not match grid dimension {grid.d}")
        if not isinstance(potential, PotentialSpec):
            raise InputError("full grids need a PotentialSpec")
        m = grid.n - 2
        ax = grid.axis()[1:-1]
        t1 = _second_difference(m, h)
        eye = sp.identity(m, format="csr")
        lap = sp.csr_matrix((m ** grid.d, m ** grid.d))
        for k in range(grid.d):
            term = None
            for j in range(grid.d):
                f = t1 if j == k else eye
                term = f if term is None else sp.kron(term, f, format="csr")
            lap = lap + term
        mesh = np.stack(np.meshgrid(*([ax] * grid.d), indexing="ij"), axis=-1).reshape(-1, grid.d)
        vals = potential.evaluate(mesh)
        mat = (lap + sp.diags(vals)).tocsr()
        mass = np.ones(m ** grid.d)
        corner = np.full(grid.d, grid.L)
        edge = float(np.max(potential.evaluate(np.stack([corner * s for s in _edge_signs(grid.d)]))))
        weight = h ** grid.d
    if edge * h * h > MESH_WARN:
        warnings.append(f"mesh too coarse at the domain edge: V*h^2 = {edge * h * h:.3g}")
    return Hamiltonian(grid, mat, vals, mass, weight, warnings)


def _edge_signs(d: int) -> np.ndarray:
    out = [np.eye(d)[k] for k in range(d)] + [-np.eye(d)[k] for k in range(d)]
    return np.array(out)


def _radial_profile(potential) -> RadialProfile:
    if isinstance(potential, PotentialSpec):
        if not potential.radial or potential.profile is None:
            raise InputError("radial path needs a radial potential")
        return potential.profile
    return as_profile(potential)


@dataclass
class GroundState:
    """Ground-state pair on a grid.

    ``phi0`` holds nodal values including the Dirichlet boundary (zeros):
    shape ``(n,) * d`` on full grids, ``(n,)`` radially.  It is normalized in
    ``L^2(R^d)`` with the mesh weights.
    """

    grid: GridSpec
    lambda0: float
    phi0: np.ndarray
    residual: float
    potential: Union[PotentialSpec, RadialProfile]
    lambda1: Optional[float] = None
    iterations: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def gap(self) -> Optional[float]:
        return None if self.lambda1 is None else self.lambda1 - self.lambda0

    def interior(self) -> np.ndarray:
        if self.grid.radial:
            return self.phi0[:-1]
        sl = tuple(slice(1, -1) for _ in range(self.grid.d))
        return self.phi0[sl].ravel()

    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``phi0.shape + (d,)``; radial nodes lie on the first axis."""
        ax = self.grid.axis()
        if self.grid.radial:
            pts = np.zeros((len(ax), self.grid.d))
            pts[:, 0] = ax
            return pts
        return np.stack(np.meshgrid(*([ax] * self.grid.d), indexing="ij"), axis=-1)

    def rays(self, max_rays: int = 8):
        """Samples of ``phi0`` along rays from the origin.

        Returns a list of ``(label, points, radii, values)``; radial states
        give one ray, full grids give the coordinate axes (along the node line
        closest to the axis) and the diagonals.
        """
        if self.grid.radial:
            r = self.grid.axis()
            return [("radial", self.nodes(), r, self.phi0)]
        n, d = self.grid.n, self.grid.d
        nodes = self.nodes()
        mid = n // 2
        half = np.arange(mid, n)
        out = []
        for k in range(d):
            for sign, idx in (("+", half), ("-", np.arange(n - 1 - mid, -1, -1))):
                sel = [np.full(len(idx), mid) for _ in range(d)]
                sel[k] = idx
                out.append((f"{sign}e{k + 1}", nodes[tuple(sel)], None, self.phi0[tuple(sel)]))
        if d >= 2:
            for signs in _diagonal_signs(d):
                sel = [half if s > 0 else np.arange(n - 1 - mid, -1, -1) for s in signs]
                out.append(("diag" + "".join("+" if s > 0 else "-" for s in signs), nodes[tuple(sel)], None,
                            self.phi0[tuple(sel)]))
        out = out[:max_rays]
        return [(lab, p, np.linalg.norm(p, axis=-1), v) for lab, p, _, v in out]

    def tail_window(self, floor: float = TAIL_FLOOR, cap: float = TAIL_CAP):
        """Per-ray tail samples with ``phi0`` in ``[floor, cap] * max phi0``.

        Returns a list of ``(label, points, radii, values)`` restricted to the
        window and to radii beyond the maximum of ``phi0`` along the ray.
        """
        top = float(np.max(self.phi0))
        out = []
        for lab, pts, r, v in self.rays():
            peak = int(np.argmax(v))
            keep = (v >= floor * top) & (v <= cap * top)
            keep[: peak + 1] = False
            if np.any(keep):
                out.append((lab, pts[keep], r[keep], v[keep]))
        return out


def _diagonal_signs(d: int):
    combos = []
    for mask in range(2 ** (d - 1)):
        combos.append([1] + [(-1 if (mask >> j) & 1 else 1) for j in range(d - 1)])
    return combos


def _normalize(ham: Hamiltonian, y: np.ndarray) -> np.ndarray:
    """Map a symmetric-form eigenvector to normalized positive nodal values."""
    u = y / np.sqrt(ham.mass)
    if u.sum() < 0:
        u = -u
    norm = math.sqrt(float(np.sum(u * u * ham.mass)) * ham.weight)
    return u / norm


def _embed(grid: GridSpec, interior: np.ndarray) -> np.ndarray:
    if grid.radial:
        return np.concatenate([interior, [0.0]])
    m = grid.n - 2
    full = np.zeros((grid.n,) * grid.d)
    full[tuple(slice(1, -1) for _ in range(grid.d))] = interior.reshape((m,) * grid.d)
    return full


def ground_state_from_vector(ham: Hamiltonian, potential, lam: float, vec: np.ndarray, **kw) -> GroundState:
    """Wrap an eigenvector of ``ham.matrix`` (symmetric form) as a :class:`GroundState`."""
    u = _normalize(ham, np.asarray(vec, dtype=float))
    gs = GroundState(ham.grid, float(lam), _embed(ham.grid, u), 0.0, potential, **kw)
    gs.residual = _residual(ham, gs)
    return gs


def _residual(ham: Hamiltonian, gs: GroundState) -> float:
    y = gs.interior() * np.sqrt(ham.mass)
    r = ham.matrix @ y - gs.lambda0 * y
    return float(np.linalg.norm(r) / np.linalg.norm(y))


def eigen_residual(gs: GroundState) -> float:
    """``||H phi - lam phi|| / ||phi||`` recomputed from a freshly assembled operator."""
    return _residual(assemble_hamiltonian(gs.grid, gs.potential), gs)


def _inverse_iteration(mat: sp.csr_matrix, tol: float, max_iter: int):
    n = mat.shape[0]
    eye = sp.identity(n, format="csc")
    sigma = 0.0
    lu0 = lu = splu(mat.tocsc())
    x = np.ones(n) / math.sqrt(n)
    shifts = 0
    lam, res = math.nan, math.inf
    history = []
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
        hx = mat @ x
        lam = float(x @ hx)
        res = float(np.linalg.norm(hx - lam * x))
        history.append(res)
        if res <= tol:
            return lam, x, res, it, lu0
        # Once the Rayleigh quotient is reliable, move the shift just below it.
        if shifts < 3 and res < 1e-2 * max(lam, 1.0) and (shifts == 0 or res < 1e-4 * history[-2]):
            sigma = lam - 2 * res
            lu = splu((mat - sigma * eye).tocsc())
            shifts += 1
    raise SolverError("inverse iteration did not converge",
                      {"iterations": max_iter, "residual": res, "lambda": lam, "shift": sigma,
                       "history_tail": history[-5:]})


def _second_eigenvalue(lu, mat, x0: np.ndarray, iters: int = 400, tol: float = 1e-10) -> float:
    rng = np.random.default_rng(0)
    x = rng.standard_normal(len(x0))
    x -= x0 * (x0 @ x)
    x /= np.linalg.norm(x)
    lam_old = math.inf
    lam = math.nan
    for _ in range(iters):
        y = lu.solve(x)
        y -= x0 * (x0 @ y)
        x = y / np.linalg.norm(y)
        lam = float(x @ (mat @ x))
        if abs(lam - lam_old) <= tol * abs(lam):
            break
        lam_old = lam
    return lam


def _solve(grid: GridSpec, potential, tol: float, max_iter: int, gap: bool) -> GroundState:
    ham = assemble_hamiltonian(grid, potential)
    for w in ham.warnings:
        log.warning(w)
    lam, vec, res, it, lu0 = _inverse_iteration(ham.matrix, tol, max_iter)
    lam1 = _second_eigenvalue(lu0, ham.matrix, vec) if gap else None
    gs = ground_state_from_vector(ham, potential, lam, vec, lambda1=lam1, iterations=it,
                                  warnings=list(ham.warnings))
    inner = gs.interior()
    if np.any(inner < 0):
        neg = int(np.sum(inner < 0))
        raise SolverError("ground state has negative interior entries (discretization failure)",
                          {"negative_nodes": neg, "min": float(inner.min())})
    if np.any(inner == 0):
        gs.warnings.append(f"{int(np.sum(inner == 0))} interior nodes underflow to zero")
    if not lam > 0:
        raise SolverError("non-positive ground-state eigenvalue", {"lambda": lam})
    return gs


def solve_ground_state(grid: GridSpec, potential, tol: float = 1e-8, max_iter: int = 500,
                       gap: bool = True) -> GroundState:
    """Smallest eigenpair of the discretized ``-Delta + V`` by shifted inverse iteration.

    The shift starts at 0 (the operator is positive definite for ``V >= 0``)
    and moves just below the Rayleigh quotient once the residual is small.
    ``lambda1`` (the next eigenvalue, by deflated inverse iteration) is only a
    diagnostic for the spectral gap.
    """
    return _solve(grid, potential, tol, max_iter, gap)


def solve_radial_ground_state(g, d: int, grid: GridSpec, tol: float = 1e-8, max_iter: int = 500,
                              gap: bool = True) -> GroundState:
    """Ground state of ``-Delta + g(|x|)`` in ``R^d`` through the radial reduction.

    ``grid`` must be radial (its dimension is overridden by ``d``); ``phi0``
    holds ``u(r)`` normalized in ``L^2(R^d)``.
    """
    if not grid.radial or grid.d != d:
        grid = GridSpec(d, grid.L, grid.n, radial=True)
    return _solve(grid, g, tol, max_iter, gap)


def check_consistency(radial: GroundState, full: GroundState, tol: float = 1e-3) -> float:
    """Relative eigenvalue difference between radial and full-grid solves.

    Raises :class:`SolverError` when it exceeds ``tol``.
    """
    diff = abs(radial.lambda0 - full.lambda0) / abs(full.lambda0)
    if diff > tol:
        raise SolverError("radial and full-grid ground states disagree",
                          {"radial": radial.lambda0, "full": full.lambda0, "relative": diff})
    return diff


def ground_state_csv(gs: GroundState, extra: Optional[dict] = None) -> str:
    """Serialize a ground state: ``# key: value`` header then ``coords, phi0, V`` rows."""
    buf = io.StringIO()
    head = {
        "lambda0": repr(gs.lambda0),
        "lambda1": repr(gs.lambda1) if gs.lambda1 is not None else "",
        "residual": f"{gs.residual:.3e}",
        "d": gs.grid.d,
        "L": repr(gs.grid.L),
        "n": gs.grid.n,
        "radial": str(gs.grid.radial).lower(),
        "h": repr(gs.grid.h),
    }
    head.update(extra or {})
    for k, v in head.items():
        buf.write(f"# {k}: {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if gs.grid.radial:
        cols = ["r"]
        pts = gs.grid.axis()[:, None]
        vals = np.asarray(_radial_profile(gs.potential)(pts[:, 0]), dtype=float)
    else:
        cols = [f"x{k + 1}" for k in range(gs.grid.d)]
        pts = gs.nodes().reshape(-1, gs.grid.d)
        vals = gs.potential.evaluate(pts)
    writer.writerow(cols + ["phi0", "V"])
    for p, f, v in zip(pts, gs.phi0.ravel(), vals):
        writer.writerow([f"{c:.17g}" for c in p] + [f"{f:.17g}", f"{v:.17g}"])
    return buf.getvalue()

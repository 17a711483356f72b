"""Admissible two-point flux meshes in 1D and 2D.

A mesh is admissible when, for every interior face, the segment joining
the two adjacent cell centers is orthogonal to the face.  This makes the
two-point transmissibility tau = m_sigma / d_sigma consistent.  Two
constructions are provided: uniform 1D intervals, and the Voronoi boxes
dual to a right-triangle split of a rectangle (cell centers at the grid
nodes).  Meshes are immutable after construction so they can be shared
freely across threads.

Boundary faces carry a free-form group name ("left", "source", ...);
the physical meaning of each group is supplied separately by the problem
description, which keeps meshes reusable across boundary data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

import numpy as np

__all__ = [
    "AdmissibleMesh",
    "build_uniform_1d",
    "build_triangulated_rect_2d",
    "validate",
    "dump_csv",
]

_GEOM_TOL = 1e-12


@dataclass(frozen=True)
class AdmissibleMesh:
    """Immutable cell/face description of an admissible TPFA mesh.

    Interior faces are stored edge-wise: face i sits between cells
    face_cells[i, 0] and face_cells[i, 1].  Boundary faces reference a
    single cell and carry a group name.  In 1D the boundary distance is
    half a cell width; in the 2D node-centered construction the centers
    of boundary cells lie on the boundary itself, so the boundary
    distance (and transmissibility) is zero and boundary values are
    imposed on the cell unknowns directly.
    """

    dim: int
    cell_centers: np.ndarray        # (n, dim)
    cell_measures: np.ndarray       # (n,)
    face_cells: np.ndarray          # (mi, 2) int
    face_measures: np.ndarray       # (mi,)
    face_distances: np.ndarray      # (mi,)
    face_tau: np.ndarray            # (mi,)
    face_normals: np.ndarray        # (mi, dim) unit vector from cell 0 to cell 1
    face_dist_sides: np.ndarray     # (mi, 2) center-to-face distances
    bface_cells: np.ndarray         # (mb,) int
    bface_measures: np.ndarray      # (mb,)
    bface_distances: np.ndarray     # (mb,)
    bface_tau: np.ndarray           # (mb,) zero where the distance is zero
    bface_points: np.ndarray        # (mb, dim)
    bface_groups: Tuple[str, ...]
    domain_measure: float
    domain_diameter: float

    def __post_init__(self):
        for name in ("cell_centers", "cell_measures", "face_cells",
                     "face_measures", "face_distances", "face_tau",
                     "face_normals", "face_dist_sides", "bface_cells",
                     "bface_measures", "bface_distances", "bface_tau",
                     "bface_points"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_cells(self) -> int:
        return self.cell_centers.shape[0]

    @property
    def n_faces(self) -> int:
        return self.face_cells.shape[0]

    @property
    def n_bfaces(self) -> int:
        return self.bface_cells.shape[0]

    @property
    def h_max(self) -> float:
        """Largest cell diameter (cell measure scale)."""
        if self.dim == 1:
            return float(np.max(self.cell_measures))
        return float(np.sqrt(2.0 * np.max(self.cell_measures)))

    @property
    def regularity(self) -> float:
        """Min over interior faces of center-to-face distance over d_sigma."""
        ratios = self.face_dist_sides / self.face_distances[:, None]
        vals = [float(np.min(ratios))]
        # 1D boundary faces have positive distances and count as well.
        positive = self.bface_distances > 0
        if np.any(positive):
            vals.append(1.0)  # boundary: d(x_K, sigma) equals d_sigma
        return min(vals)

    def boundary_group_indices(self, group: str) -> np.ndarray:
        idx = [i for i, g in enumerate(self.bface_groups) if g == group]
        return np.asarray(idx, dtype=int)


def build_uniform_1d(length: float, n_cells: int,
                     left_group: str = "left",
                     right_group: str = "right") -> AdmissibleMesh:
    """Uniform subdivision of (0, length) into n_cells control volumes."""
    if not length > 0:
        raise ValueError("length must be positive")
    if n_cells < 2:
        raise ValueError("n_cells must be at least 2")
    h = length / n_cells
    centers = (np.arange(n_cells) + 0.5) * h
    measures = np.full(n_cells, h)

    iK = np.arange(n_cells - 1)
    face_cells = np.column_stack([iK, iK + 1])
    face_measures = np.ones(n_cells - 1)
    face_distances = np.full(n_cells - 1, h)
    face_tau = face_measures / face_distances
    face_normals = np.ones((n_cells - 1, 1))
    face_dist_sides = np.full((n_cells - 1, 2), h / 2.0)

    bface_cells = np.array([0, n_cells - 1])
    bface_measures = np.ones(2)
    bface_distances = np.full(2, h / 2.0)
    bface_tau = bface_measures / bface_distances
    bface_points = np.array([[0.0], [length]])

    return AdmissibleMesh(
        dim=1,
        cell_centers=centers[:, None],
        cell_measures=measures,
        face_cells=face_cells,
        face_measures=face_measures,
        face_distances=face_distances,
        face_tau=face_tau,
        face_normals=face_normals,
        face_dist_sides=face_dist_sides,
        bface_cells=bface_cells,
        bface_measures=bface_measures,
        bface_distances=bface_distances,
        bface_tau=bface_tau,
        bface_points=bface_points,
        bface_groups=(left_group, right_group),
        domain_measure=float(length),
        domain_diameter=float(length),
    )


def _circumcenter(a, b, c):
    """Circumcenter of a 2D triangle with vertices a, b, c."""
    d = 2.0 * ((a[0] - c[0]) * (b[1] - c[1]) - (b[0] - c[0]) * (a[1] - c[1]))
    if abs(d) < 1e-300:
        raise ValueError("degenerate triangle")
    aa = a[0] ** 2 + a[1] ** 2 - c[0] ** 2 - c[1] ** 2
    bb = b[0] ** 2 + b[1] ** 2 - c[0] ** 2 - c[1] ** 2
    ux = (aa * (b[1] - c[1]) - bb * (a[1] - c[1])) / d
    uy = (bb * (a[0] - c[0]) - aa * (b[0] - c[0])) / d
    return np.array([ux, uy])


def build_triangulated_rect_2d(
        lx: float, ly: float, nx: int, ny: int,
        boundary_segments: Mapping[str, Sequence[Tuple[str, float, float]]] | None = None,
        default_group: str = "insulating") -> AdmissibleMesh:
    """Voronoi boxes dual to a right-triangle split of (0,lx) x (0,ly).

    nx and ny count grid intervals; the (nx+1)(ny+1) grid nodes become
    cell centers.  Each rectangle of the grid is split along a diagonal
    into two right triangles; transmissibilities are accumulated per
    Delaunay edge from signed circumcenter distances.  Right triangles
    put the circumcenter on the hypotenuse midpoint, so diagonal edges
    receive zero transmissibility and are dropped, while axis-parallel
    edges receive positive weights.  A negative accumulated contribution
    (obtuse triangle) raises an admissibility error.

    boundary_segments maps a group name to pieces (edge, lo, hi) with
    edge in {"left", "right", "bottom", "top"} and lo/hi the coordinate
    range along that edge.  Boundary face pieces are assigned by their
    midpoint; uncovered pieces get default_group.
    """
    if nx < 2 or ny < 2:
        raise ValueError("nx and ny must be at least 2")
    if not (lx > 0 and ly > 0):
        raise ValueError("domain edges must have positive length")

    mx, my = nx + 1, ny + 1
    xs = np.linspace(0.0, lx, mx)
    ys = np.linspace(0.0, ly, my)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    centers = np.column_stack([gx.ravel(), gy.ravel()])

    def node(i, j):
        return i * my + j

    triangles = []
    for i in range(nx):
        for j in range(ny):
            n00, n10 = node(i, j), node(i + 1, j)
            n01, n11 = node(i, j + 1), node(i + 1, j + 1)
            # split along the lower-left to upper-right diagonal
            triangles.append((n00, n10, n11))
            triangles.append((n00, n11, n01))

    n_cells = mx * my
    cell_measures = np.zeros(n_cells)
    edge_measure: dict[tuple[int, int], float] = {}

    for tri in triangles:
        pts = centers[list(tri)]
        cc = _circumcenter(pts[0], pts[1], pts[2])
        # per-edge signed distance from the circumcenter, positive toward
        # the opposite vertex
        for k in range(3):
            a, b = tri[k], tri[(k + 1) % 3]
            opp = tri[(k + 2) % 3]
            pa, pb, po = centers[a], centers[b], centers[opp]
            edge = pb - pa
            elen = float(np.hypot(*edge))
            normal = np.array([-edge[1], edge[0]]) / elen
            if np.dot(normal, po - pa) < 0:
                normal = -normal
            dist = float(np.dot(normal, cc - 0.5 * (pa + pb)))
            if dist < -1e-12 * elen:
                raise ValueError(
                    "admissibility violation: circumcenter leaves the "
                    "triangle pair (obtuse triangle)")
            dist = max(dist, 0.0)
            key = (a, b) if a < b else (b, a)
            edge_measure[key] = edge_measure.get(key, 0.0) + dist
            # each endpoint owns half of this Voronoi facet piece
            cell_measures[a] += 0.5 * (elen / 2.0) * dist
            cell_measures[b] += 0.5 * (elen / 2.0) * dist

    face_cells, face_measures, face_distances = [], [], []
    face_normals, face_dist_sides = [], []
    for (a, b), m in sorted(edge_measure.items()):
        if m <= 1e-14 * max(lx, ly):
            continue  # zero-measure Voronoi face (diagonal edge)
        d = float(np.linalg.norm(centers[b] - centers[a]))
        face_cells.append((a, b))
        face_measures.append(m)
        face_distances.append(d)
        face_normals.append((centers[b] - centers[a]) / d)
        face_dist_sides.append((d / 2.0, d / 2.0))

    # boundary Voronoi faces: each boundary grid edge contributes two
    # half-pieces, one per endpoint cell, centered at the quarter points
    bface_cells, bface_measures, bface_points = [], [], []
    bface_groups = []
    segments = dict(boundary_segments or {})

    def classify(point):
        x, y = point
        if abs(y - 0.0) < _GEOM_TOL * ly:
            edge, coord = "bottom", x
        elif abs(y - ly) < _GEOM_TOL * ly:
            edge, coord = "top", x
        elif abs(x - 0.0) < _GEOM_TOL * lx:
            edge, coord = "left", y
        elif abs(x - lx) < _GEOM_TOL * lx:
            edge, coord = "right", y
        else:  # pragma: no cover
            raise ValueError("boundary point off the boundary")
        for group, pieces in segments.items():
            for (e, lo, hi) in pieces:
                if e == edge and lo <= coord <= hi:
                    return group
        return default_group

    def add_boundary_edge(a, b):
        pa, pb = centers[a], centers[b]
        half = float(np.linalg.norm(pb - pa)) / 2.0
        for cell, point in ((a, 0.75 * pa + 0.25 * pb),
                            (b, 0.25 * pa + 0.75 * pb)):
            bface_cells.append(cell)
            bface_measures.append(half)
            bface_points.append(point)
            bface_groups.append(classify(point))

    for i in range(nx):
        add_boundary_edge(node(i, 0), node(i + 1, 0))
        add_boundary_edge(node(i, ny), node(i + 1, ny))
    for j in range(ny):
        add_boundary_edge(node(0, j), node(0, j + 1))
        add_boundary_edge(node(nx, j), node(nx, j + 1))

    nb = len(bface_cells)
    face_cells = np.asarray(face_cells, dtype=int)
    face_measures = np.asarray(face_measures)
    face_distances = np.asarray(face_distances)
    return AdmissibleMesh(
        dim=2,
        cell_centers=centers,
        cell_measures=cell_measures,
        face_cells=face_cells,
        face_measures=face_measures,
        face_distances=face_distances,
        face_tau=face_measures / face_distances,
        face_normals=np.asarray(face_normals),
        face_dist_sides=np.asarray(face_dist_sides),
        bface_cells=np.asarray(bface_cells, dtype=int),
        bface_measures=np.asarray(bface_measures),
        bface_distances=np.zeros(nb),
        bface_tau=np.zeros(nb),
        bface_points=np.asarray(bface_points),
        bface_groups=tuple(bface_groups),
        domain_measure=float(lx * ly),
        domain_diameter=float(np.hypot(lx, ly)),
    )


def validate(mesh: AdmissibleMesh) -> list[str]:
    """Report-only admissibility check; empty list means admissible."""
    violations: list[str] = []
    if np.any(mesh.cell_measures <= 0):
        violations.append("nonpositive cell measure")
    if np.any(mesh.face_tau <= 0):
        violations.append("nonpositive interior transmissibility")

    total = float(np.sum(mesh.cell_measures))
    if abs(total - mesh.domain_measure) > 1e-12 * mesh.domain_measure:
        violations.append(
            f"cell measures sum to {total!r}, expected {mesh.domain_measure!r}")

    # orthogonality: x_L - x_K must align with the stored face normal
    vec = (mesh.cell_centers[mesh.face_cells[:, 1]]
           - mesh.cell_centers[mesh.face_cells[:, 0]])
    dist = np.linalg.norm(vec, axis=1)
    residual = vec - dist[:, None] * mesh.face_normals
    bad = np.linalg.norm(residual, axis=1) > 1e-12 * dist
    for i in np.flatnonzero(bad):
        violations.append(
            f"face {i}: center segment not orthogonal to the face")

    if np.any(np.abs(dist - mesh.face_distances) > 1e-12 * dist):
        violations.append("stored face distance disagrees with centers")

    if mesh.dim == 1:
        counts = np.bincount(mesh.face_cells.ravel(), minlength=mesh.n_cells)
        counts += np.bincount(mesh.bface_cells, minlength=mesh.n_cells)
        if np.any(counts != 2):
            violations.append("1D cell without exactly two faces")

    if mesh.regularity <= 0:
        violations.append("nonpositive mesh regularity")
    return violations


def dump_csv(mesh: AdmissibleMesh, cells_path, faces_path) -> None:
    """Write the mesh as two CSV files (cells, faces)."""
    with open(cells_path, "w") as fh:
        fh.write("id,x,y,measure\n")
        for k in range(mesh.n_cells):
            x = mesh.cell_centers[k, 0]
            y = mesh.cell_centers[k, 1] if mesh.dim == 2 else 0.0
            fh.write(f"{k},{x:.17g},{y:.17g},{mesh.cell_measures[k]:.17g}\n")
    with open(faces_path, "w") as fh:
        fh.write("id,cell_k,cell_l_or_group,measure,distance,tau\n")
        for i in range(mesh.n_faces):
            a, b = mesh.face_cells[i]
            fh.write(f"{i},{a},{b},{mesh.face_measures[i]:.17g},"
                     f"{mesh.face_distances[i]:.17g},{mesh.face_tau[i]:.17g}\n")
        for i in range(mesh.n_bfaces):
            fh.write(f"{mesh.n_faces + i},{mesh.bface_cells[i]},"
                     f"{mesh.bface_groups[i]},{mesh.bface_measures[i]:.17g},"
                     f"{mesh.bface_distances[i]:.17g},{mesh.bface_tau[i]:.17g}\n")

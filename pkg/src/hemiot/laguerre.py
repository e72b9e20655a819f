# Laguerre (power) diagrams of the dual weights: the partition of the domain
# into convex cells on which each affine function <x, p_i> - psi_i attains the
# upper envelope. Cells are clipped exactly, including circular-arc boundaries
# on disk domains.
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import ConvexPolygonDomain, DiskDomain, initial_cell
from .geometry import (
    ARC,
    cell_area_centroid,
    clip_halfplane,
    clip_to_circle,
    integrate_cell,
    segment_line_integral,
)


@dataclass
class LaguerreCell:
    site_index: int
    verts: list
    labels: list
    neighbors: list
    area: float
    centroid: np.ndarray
    mass: float = None

    @property
    def is_empty(self):
        return len(self.verts) < 2


@dataclass
class LaguerreDiagram:
    domain: object
    sites: np.ndarray
    psi: np.ndarray
    cells: list

    def total_area(self):
        return sum(c.area for c in self.cells)

    def adjacency_edges(self):
        """Sorted (i, j) pairs of cells sharing a positive-length edge."""
        out = set()
        for c in self.cells:
            for lab in c.labels:
                if lab[0] == "nbr":
                    out.add((min(c.site_index, lab[1]), max(c.site_index, lab[1])))
        return sorted(out)

    def is_connected(self):
        n = len(self.cells)
        live = [i for i in range(n) if not self.cells[i].is_empty]
        if len(live) <= 1:
            return True
        adj = {i: set() for i in live}
        for i, j in self.adjacency_edges():
            adj[i].add(j)
            adj[j].add(i)
        seen = {live[0]}
        stack = [live[0]]
        while stack:
            for j in adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == len(live)


def _validate_sites(sites):
    sites = np.asarray(sites, dtype=float)
    if sites.ndim != 2 or sites.shape[1] != 2:
        raise ValueError("sites must be an (N, 2) array")
    if len(np.unique(sites.round(decimals=12), axis=0)) != len(sites):
        raise ValueError("duplicate sites")
    return sites


def _lower_hull_candidates(sites, psi):
    """Neighbor candidates from the regular triangulation: lift sites to
    (p, psi) and read the lower convex hull. Sites lifted strictly above the
    hull are dominated everywhere (empty cells). Raises on degenerate input
    (e.g. coplanar lifts); callers fall back to all-pairs clipping."""
    from scipy.spatial import ConvexHull

    pts = np.column_stack([sites, psi])
    hull = ConvexHull(pts, qhull_options="Qt")
    lower = hull.equations[:, 2] < -1e-12
    simplices = hull.simplices[lower]
    if len(simplices) == 0:
        raise RuntimeError("no lower facets")
    n = len(sites)
    cand = [set() for _ in range(n)]
    on_hull = np.zeros(n, dtype=bool)
    for tri in simplices:
        on_hull[tri] = True
        for a in range(3):
            i, j = tri[a], tri[(a + 1) % 3]
            cand[i].add(j)
            cand[j].add(i)
    return [sorted(c) for c in cand], on_hull


def laguerre_diagram(domain, sites, psi, method="auto"):
    """Partition of the domain into the cells of max_i(<x, p_i> - psi_i).

    method: "hull" uses regular-triangulation neighbors for the half-plane
    clips, "brute" clips every cell against all other sites, "auto" picks hull
    for N > 8 and falls back to brute on degenerate lifts. Both routes produce
    identical cells; brute is kept as an independent oracle."""
    sites = _validate_sites(sites)
    psi = np.asarray(psi, dtype=float)
    if len(psi) != len(sites):
        raise ValueError("psi length mismatch")
    n = len(sites)
    if n == 1:
        verts, labels, circle = initial_cell(domain)
        if circle is not None:
            verts, labels = clip_to_circle(verts, labels, circle[0], circle[1],
                                           _geom_eps(domain))
        area, cen = cell_area_centroid(verts, labels)
        cell = LaguerreCell(0, verts, labels, [], area, cen)
        return LaguerreDiagram(domain, sites, psi, [cell])

    use_hull = method == "hull" or (method == "auto" and n > 8)
    cand = on_hull = None
    if use_hull:
        try:
            cand, on_hull = _lower_hull_candidates(sites, psi)
        except Exception:
            if method == "hull":
                raise
            cand = None
    if cand is None:
        cand = [[j for j in range(n) if j != i] for i in range(n)]
        on_hull = np.ones(n, dtype=bool)

    eps = _geom_eps(domain)
    verts0, labels0, circle = initial_cell(domain)
    cells = []
    for i in range(n):
        if not on_hull[i]:
            cells.append(LaguerreCell(i, [], [], [], 0.0, sites[i].copy()))
            continue
        verts, labels = verts0, labels0
        pi = sites[i]
        for j in cand[i]:
            d = sites[j] - pi
            verts, labels = clip_halfplane(verts, labels, (d[0], d[1]),
                                           psi[j] - psi[i], ("nbr", int(j)), eps)
            if not verts:
                break
        if verts and circle is not None:
            verts, labels = clip_to_circle(verts, labels, circle[0], circle[1], eps)
        if not verts:
            cells.append(LaguerreCell(i, [], [], [], 0.0, sites[i].copy()))
            continue
        nbrs = sorted({lab[1] for lab in labels if lab[0] == "nbr"})
        area, cen = cell_area_centroid(verts, labels)
        cells.append(LaguerreCell(i, verts, labels, nbrs, area, cen))
    return LaguerreDiagram(domain, sites, psi, cells)


def _geom_eps(domain):
    lo, hi = domain.bounding_box()
    return 1e-12 * float(np.max(hi - lo))


def compute_measures(diagram, K, tol=1e-10):
    """Per-cell masses G_i = ∫_cell K dx and K-weighted first moments, exact
    for constant densities (areas and centroids are closed-form)."""
    n = len(diagram.cells)
    G = np.zeros(n)
    M = np.zeros((n, 2))
    if K.is_constant:
        k = K.constant
        for c in diagram.cells:
            if c.is_empty:
                continue
            G[c.site_index] = k * c.area
            M[c.site_index] = k * c.area * c.centroid
        return G, M
    total_area = max(diagram.total_area(), 1e-300)
    for c in diagram.cells:
        if c.is_empty:
            continue
        out = integrate_cell(c.verts, c.labels, K, tol * max(c.area / total_area, 1e-6))
        G[c.site_index] = out[0]
        M[c.site_index] = out[1:]
    return G, M


def cell_masses(diagram, K, tol=1e-10):
    """Masses only; also stores them on the cells."""
    G, _ = compute_measures(diagram, K, tol)
    for c in diagram.cells:
        c.mass = G[c.site_index]
    return G


def edge_weights(diagram, K, tol=1e-10):
    """Hessian edge weights w_ij = ∫_(shared edge) K dH¹ / |p_i - p_j| for all
    adjacent pairs; dict keyed by sorted index pairs."""
    sites = diagram.sites
    acc = {}
    for c in diagram.cells:
        if c.is_empty:
            continue
        i = c.site_index
        kverts = c.verts
        m = len(kverts)
        for e, lab in enumerate(c.labels):
            if lab[0] != "nbr":
                continue
            j = lab[1]
            a, b = kverts[e], kverts[(e + 1) % m]
            length = math.hypot(b[0] - a[0], b[1] - a[1])
            if length <= 0.0:
                continue
            dp = np.linalg.norm(sites[i] - sites[j])
            if K.is_constant:
                w = K.constant * length / dp
            else:
                w = segment_line_integral(a, b, K) / dp
            key = (min(i, j), max(i, j))
            acc.setdefault(key, []).append(w)
    return {k: sum(v) / len(v) for k, v in acc.items()}


def pairwise_overlap_area(diagram, i, j):
    """Area of the intersection of two cells (void for disjoint interiors);
    brute half-plane clipping, meant for invariant tests at small N."""
    a, b = diagram.cells[i], diagram.cells[j]
    if a.is_empty or b.is_empty:
        return 0.0
    eps = _geom_eps(diagram.domain)
    verts, labels = a.verts, a.labels
    m = len(b.verts)
    for e in range(m):
        p, q = b.verts[e], b.verts[(e + 1) % m]
        if b.labels[e][0] == ARC:
            continue
        nx, ny = q[1] - p[1], -(q[0] - p[0])  # inward normal of CCW edge flipped
        # keep the side of b: n·x <= n·p with n outward of b... b is CCW so
        # outward normal of edge p->q is (dy, -dx)
        off = nx * p[0] + ny * p[1]
        verts, labels = clip_halfplane(verts, labels, (nx, ny), off, ("clip", e), eps)
        if not verts:
            return 0.0
    for e, lab in enumerate(b.labels):
        if lab[0] == ARC:
            verts, labels = clip_to_circle(verts, labels, lab[1], lab[2], eps)
            break
    if not verts:
        return 0.0
    area, _ = cell_area_centroid(verts, labels)
    return area

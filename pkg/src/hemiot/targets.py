# Discretization of a geodesically convex target region on the lower
# hemisphere (described in the gradient-plane chart) into weighted sites whose
# masses integrate the chart density, rescaled to balance the source mass.
import math
from dataclasses import dataclass

import numpy as np

from .chart import is_geodesically_convex
from .geometry import (
    ARC,
    cell_area_centroid,
    chart_density_primitive,
    clip_halfplane,
    clip_to_circle,
    polygon_area,
    radial_mass,
)


@dataclass(frozen=True)
class TargetRegion:
    """kind in {"chart_disk", "chart_polygon", "full_hemisphere"}; disks carry
    (center, radius), polygons their chart vertices, the full hemisphere a
    finite truncation radius for its unbounded chart."""
    kind: str
    center: np.ndarray = None
    radius: float = None
    vertices: np.ndarray = None
    truncation_radius: float = None


def chart_disk(center, radius):
    if not radius > 0:
        raise ValueError("radius must be positive")
    return TargetRegion(kind="chart_disk", center=np.asarray(center, dtype=float),
                        radius=float(radius))


def chart_polygon(vertices):
    region = TargetRegion(kind="chart_polygon",
                          vertices=np.asarray(vertices, dtype=float))
    if not is_geodesically_convex(region):
        raise ValueError("chart polygon must be convex (counterclockwise)")
    return region


def full_hemisphere(truncation_radius):
    if not truncation_radius > 0:
        raise ValueError("truncation radius must be positive and finite")
    return TargetRegion(kind="full_hemisphere", truncation_radius=float(truncation_radius))


def truncation_radius_for(epsilon):
    """Smallest chart radius P whose tail mass pi/(1+P^2) is <= epsilon."""
    if not 0 < epsilon < math.pi:
        raise ValueError("epsilon must be in (0, pi)")
    return math.sqrt(math.pi / epsilon - 1.0)


def region_mass(region):
    """Chart-density mass of the region. Disks centered at the origin and the
    truncated hemisphere have the closed form pi s^2/(1+s^2); anything else is
    integrated with the exact radial primitive along the boundary."""
    if region.kind == "full_hemisphere":
        s = region.truncation_radius
        return math.pi * s * s / (1.0 + s * s)
    if region.kind == "chart_disk":
        if float(np.linalg.norm(region.center)) < 1e-15:
            s = region.radius
            return math.pi * s * s / (1.0 + s * s)
        verts, labels = _disk_cell(region.center, region.radius)
        return radial_mass(verts, labels, chart_density_primitive)
    verts = [tuple(v) for v in region.vertices]
    labels = [("edge", i) for i in range(len(verts))]
    return radial_mass(verts, labels, chart_density_primitive)


def _disk_cell(center, R):
    cx, cy = center
    return ([(cx + R, cy), (cx - R, cy)],
            [(ARC, (cx, cy), R), (ARC, (cx, cy), R)])


@dataclass(frozen=True)
class DiscreteTarget:
    """Finite weighted site cloud in the chart: masses are positive, sites
    distinct, and the masses sum to `total` exactly (one common rescale)."""
    sites: np.ndarray
    masses: np.ndarray
    total: float = None
    rescale_factor: float = 1.0
    pre_rescale_mismatch: float = 0.0

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if len(sites) != len(masses) or len(sites) == 0:
            raise ValueError("need matching, nonempty sites and masses")
        if self.total is None:
            object.__setattr__(self, "total", float(masses.sum()))
        if np.any(masses <= 0):
            raise ValueError("all masses must be positive")
        if len(np.unique(sites.round(decimals=12), axis=0)) != len(sites):
            raise ValueError("sites must be distinct")
        rel = abs(masses.sum() - self.total) / max(abs(self.total), 1e-300)
        if rel > 1e-13:
            raise ValueError(f"masses do not sum to total (rel err {rel:.2e})")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "masses", masses)

    def __len__(self):
        return len(self.sites)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("p1,p2,mass\n")
            for (p1, p2), m in zip(self.sites, self.masses):
                fh.write(f"{p1!r},{p2!r},{m!r}\n")


def discretize(region, N, source_mass, seed=0):
    """At most N sites covering the region, masses integrating the chart
    density per cell, one global rescale pinning the total to source_mass.

    chart_disk / chart_polygon: a regular grid over the chart bounding box,
    grid cells clipped to the region, site = clipped-cell centroid (kept inside
    by convexity), empty cells dropped. full_hemisphere: a deterministic polar
    grid uniform in (w, phi) with w = |p|^2/(1+|p|^2), whose cell masses are
    exact (the chart density in those variables is dw dphi / 2); a bounding-box
    grid cannot resolve the unbounded chart (its center cell alone would carry
    ~70% of the mass at practical N). The seed is reserved for a jitter option
    and unused by the default deterministic layouts."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not source_mass > 0:
        raise ValueError("source_mass must be positive")
    cap = region_mass(region)
    if cap <= 0:
        raise ValueError("region has no mass")
    if N == 1:
        site = _region_centroid(region)
        return DiscreteTarget(sites=site[None, :], masses=np.array([source_mass]),
                              total=source_mass, rescale_factor=source_mass / cap,
                              pre_rescale_mismatch=abs(cap - source_mass))
    if region.kind == "full_hemisphere":
        sites, masses = _polar_grid(region.truncation_radius, N)
    else:
        sites, masses = _bbox_grid(region, N)
    if len(sites) == 0:
        raise ValueError("N too small: no nonempty cells")
    pre = masses.sum()
    factor = source_mass / pre
    masses = masses * factor
    # pin the total exactly (one representative absorbs the last ulp)
    masses[-1] += source_mass - masses.sum()
    out = DiscreteTarget(sites=sites, masses=masses, total=source_mass,
                         rescale_factor=factor, pre_rescale_mismatch=abs(pre - source_mass))
    if not 0.5 <= factor <= 2.0:
        import warnings
        warnings.warn(f"discretization rescale factor {factor:.3g} is far from 1; "
                      "the grid is too coarse for the requested mass", RuntimeWarning)
    return out


def _region_centroid(region):
    if region.kind == "chart_disk":
        return region.center.copy()
    if region.kind == "full_hemisphere":
        return np.zeros(2)
    v = region.vertices
    x, y = v[:, 0], v[:, 1]
    xr, yr = np.roll(x, -1), np.roll(y, -1)
    cross = x * yr - xr * y
    a = 0.5 * cross.sum()
    return np.array([((x + xr) * cross).sum(), ((y + yr) * cross).sum()]) / (6.0 * a)


def _bbox_grid(region, N):
    if region.kind == "chart_disk":
        lo = region.center - region.radius
        hi = region.center + region.radius
    else:
        lo = region.vertices.min(axis=0)
        hi = region.vertices.max(axis=0)
    m = int(math.floor(math.sqrt(N)))
    hx, hy = (hi - lo) / m
    eps = 1e-12 * float(max(hi - lo))
    sites, masses = [], []
    for i in range(m):
        for j in range(m):
            x0, y0 = lo[0] + i * hx, lo[1] + j * hy
            verts = [(x0, y0), (x0 + hx, y0), (x0 + hx, y0 + hy), (x0, y0 + hy)]
            labels = [("cell", k) for k in range(4)]
            if region.kind == "chart_disk":
                verts, labels = clip_to_circle(verts, labels, tuple(region.center),
                                               region.radius, eps)
            else:
                nrm, off = _polygon_halfplanes(region.vertices)
                for a, b in zip(nrm, off):
                    verts, labels = clip_halfplane(verts, labels, a, b, ("edge", 0), eps)
                    if not verts:
                        break
            if not verts:
                continue
            area, cen = cell_area_centroid(verts, labels)
            if area <= (10 * eps) ** 2:
                continue
            nu = radial_mass(verts, labels, chart_density_primitive)
            if nu <= 0:
                continue
            sites.append(cen)
            masses.append(nu)
    return np.array(sites), np.array(masses)


def _polygon_halfplanes(verts):
    v = np.asarray(verts, dtype=float)
    e = np.roll(v, -1, axis=0) - v
    n = np.stack([e[:, 1], -e[:, 0]], axis=1)
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    return n, np.sum(n * v, axis=1)


def _polar_grid(P_max, N):
    w_max = P_max * P_max / (1.0 + P_max * P_max)
    m_r = max(1, int(round(math.sqrt(2.5 * N))))
    m_a = max(1, N // m_r)
    dw = w_max / m_r
    dphi = 2.0 * math.pi / m_a
    sites = np.empty((m_r * m_a, 2))
    idx = 0
    for i in range(m_r):
        w = (i + 0.5) * dw
        r = math.sqrt(w / (1.0 - w))
        off = 0.5 * dphi if i % 2 else 0.0
        for j in range(m_a):
            phi = off + (j + 0.5) * dphi
            sites[idx] = (r * math.cos(phi), r * math.sin(phi))
            idx += 1
    masses = np.full(m_r * m_a, 0.5 * dw * dphi)
    return sites, masses


def region_contains(region, p, tol=1e-9):
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = p[None, :] if single else p
    if region.kind == "chart_disk":
        out = np.linalg.norm(pts - region.center, axis=1) <= region.radius + tol
    elif region.kind == "full_hemisphere":
        out = np.linalg.norm(pts, axis=1) <= region.truncation_radius + tol
    else:
        n, b = _polygon_halfplanes(region.vertices)
        out = np.all(pts @ n.T <= b[None, :] + tol, axis=1)
    return bool(out[0]) if single else out

# Damped Newton solver for the dual weights of the semi-discrete problem:
# find psi so that each Laguerre cell of max_i(<x, p_i> - psi_i) carries
# exactly the prescribed target mass under the source density.
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .chart import c_exp
from .laguerre import compute_measures, edge_weights, laguerre_diagram


class MassBalanceError(ValueError):
    """Source and target total masses disagree beyond tolerance."""


class ConvergenceError(RuntimeError):
    pass


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    final_residual: float          # ||G - nu||_1 / total mass
    damping_events: int
    min_cell_mass_history: list
    connected: bool
    init_kind: str                 # "zero" or "affine"
    runtime: float


@dataclass
class Solution:
    domain: object
    density: object
    target: object
    psi: np.ndarray
    diagram: object
    masses: np.ndarray
    report: SolveReport

    @property
    def sites(self):
        return self.target.sites


def _affine_voronoi_psi(domain, sites):
    """Weights that make every cell nonempty: under these psi the diagram is
    the pullback of the Voronoi diagram of the sites through an affine map
    squeezing them into the inscribed ball, so cell i contains the preimage
    of site i."""
    from .domains import inradius_point
    xc, rin = inradius_point(domain)
    pc = sites.mean(axis=0)
    q = sites - pc
    span = np.linalg.norm(q, axis=1).max()
    alpha = max(span / rin, 1e-12) * 1.0000001
    return (q * q).sum(axis=1) / (2.0 * alpha) + q @ xc


def _phi_value(sites, psi, nu, G, M):
    # Phi(psi) = ∫ u_psi K dx + Σ psi_i nu_i, with ∫ u_psi K expanded over cells
    return float((sites * M).sum() + psi @ (nu - G))


def _newton_step(diagram, K, G, nu):
    """Solve (D - W) d = G - nu with the gauge d[0] = 0."""
    from scipy import sparse
    from scipy.sparse.linalg import cg, spsolve

    n = len(nu)
    W = edge_weights(diagram, K)
    rows, cols, vals = [], [], []
    deg = np.zeros(n)
    for (i, j), w in W.items():
        rows += [i, j]
        cols += [j, i]
        vals += [-w, -w]
        deg[i] += w
        deg[j] += w
    rows += list(range(n))
    cols += list(range(n))
    vals += list(deg)
    L = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    keep = np.arange(1, n)
    A = L[keep][:, keep].tocsr()
    b = (G - nu)[keep]
    d = np.zeros(n)
    if n <= 64:
        d[keep] = np.linalg.solve(A.toarray() + 1e-14 * np.eye(n - 1), b)
        return d
    diag = A.diagonal()
    Mpre = sparse.diags(1.0 / np.maximum(diag, 1e-300))
    x, info = cg(A, b, rtol=1e-10, atol=0.0, maxiter=4 * n, M=Mpre)
    if info != 0:
        x = spsolve(A.tocsc(), b)
    d[keep] = x
    return d


def solve(domain, K, target, tol=1e-6, max_iter=100):
    """Dual ascent with damped Newton steps.

    Returns a Solution whose report records convergence; the residual is the
    l1 mass mismatch relative to the total. Raises MassBalanceError when the
    target total does not match the source mass."""
    t_start = time.time()
    sites = np.asarray(target.sites, dtype=float)
    nu = np.asarray(target.masses, dtype=float)
    n = len(nu)
    total = float(nu.sum())
    if total <= 0:
        raise MassBalanceError("target carries no mass")

    from .domains import total_mass as _total_mass
    qtol = 0.0 if K.is_constant else min(1e-9, 1e-3 * tol * total)
    src, _ = _total_mass(domain, K, tol=max(qtol, 1e-12))
    if abs(src - total) > 1e-12 * total + 10.0 * qtol:
        raise MassBalanceError(
            f"source mass {src!r} != target mass {total!r}")

    mtol = min(1e-10, 1e-3 * tol * total)

    if n == 1:
        diagram = laguerre_diagram(domain, sites, np.zeros(1))
        G, _ = compute_measures(diagram, K, mtol)
        diagram.cells[0].mass = G[0]
        rep = SolveReport(True, 0, abs(G[0] - total) / total, 0, [float(G[0])],
                          True, "zero", time.time() - t_start)
        return Solution(domain, K, target, np.zeros(1), diagram, G, rep)

    psi = np.zeros(n)
    init_kind = "zero"
    diagram = laguerre_diagram(domain, sites, psi)
    G, M = compute_measures(diagram, K, mtol)
    if G.min() <= 0.0:
        psi = _affine_voronoi_psi(domain, sites)
        psi = psi - psi[0]
        init_kind = "affine"
        diagram = laguerre_diagram(domain, sites, psi)
        G, M = compute_measures(diagram, K, mtol)
        if G.min() <= 0.0:
            raise ConvergenceError("initialization left an empty cell")

    eps0 = 0.5 * min(nu.min(), G.min())
    resid = float(np.abs(G - nu).sum())
    phi = _phi_value(sites, psi, nu, G, M)
    history = [float(G.min())]
    damping_events = 0
    it = 0
    converged = resid <= tol * total

    while not converged and it < max_iter:
        it += 1
        d = _newton_step(diagram, K, G, nu)
        tau = 1.0
        accepted = False
        while tau >= 2.0 ** -11:
            psi_c = psi + tau * d
            psi_c = psi_c - psi_c[0]
            diagram_c = laguerre_diagram(domain, sites, psi_c)
            G_c, M_c = compute_measures(diagram_c, K, mtol)
            if G_c.min() >= eps0:
                resid_c = float(np.abs(G_c - nu).sum())
                phi_c = _phi_value(sites, psi_c, nu, G_c, M_c)
                if (resid_c <= (1.0 - 0.5 * tau) * resid
                        and phi_c <= phi + 1e-10 * max(1.0, abs(phi))):
                    psi, diagram, G, M = psi_c, diagram_c, G_c, M_c
                    resid, phi = resid_c, phi_c
                    accepted = True
                    break
            tau *= 0.5
            damping_events += 1
        if not accepted:
            break
        history.append(float(G.min()))
        converged = resid <= tol * total

    for c in diagram.cells:
        c.mass = G[c.site_index]
    rep = SolveReport(bool(converged), it, resid / total, damping_events,
                      history, diagram.is_connected(), init_kind,
                      time.time() - t_start)
    return Solution(domain, K, target, psi, diagram, G, rep)


def potential(solution, x):
    """u(x) = max_i <x, p_i> - psi_i, the restriction of the solution's
    support function; ties resolve to the lowest site index."""
    x = np.asarray(x, dtype=float)
    vals = np.atleast_2d(x) @ solution.sites.T - solution.psi
    out = vals.max(axis=1)
    return float(out[0]) if x.ndim == 1 else out


def active_site(solution, x):
    x = np.asarray(x, dtype=float)
    vals = np.atleast_2d(x) @ solution.sites.T - solution.psi
    idx = vals.argmax(axis=1)
    return int(idx[0]) if x.ndim == 1 else idx


def gauss_map(solution, x):
    """Image of x on the lower hemisphere: the contact direction of the
    supporting plane active at x."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return c_exp(solution.sites[active_site(solution, x)])
    idx = active_site(solution, x)
    return np.stack([c_exp(solution.sites[i]).as_array() for i in idx])


def _cell_polyline(cell, max_step=2.0 * math.pi / 256):
    """Cell boundary with arcs subdivided into chords."""
    pts = []
    m = len(cell.verts)
    for e in range(m):
        a = cell.verts[e]
        b = cell.verts[(e + 1) % m]
        lab = cell.labels[e]
        pts.append(a)
        if lab[0] == "arc":
            cx, cy = lab[1]
            r = lab[2]
            a0 = math.atan2(a[1] - cy, a[0] - cx)
            a1 = math.atan2(b[1] - cy, b[0] - cx)
            sweep = (a1 - a0) % (2.0 * math.pi)
            k = int(sweep / max_step) + 1
            for s in range(1, k):
                t = a0 + sweep * s / k
                pts.append((cx + r * math.cos(t), cy + r * math.sin(t)))
    return pts


def export_mesh(solution, path):
    """Write the graph of the potential as a watertight OBJ surface, one
    planar polygon per nonempty cell, with per-face normals set to the
    hemisphere image of the cell's site."""
    verts = {}
    order = []

    def vid(p3):
        key = (round(p3[0], 9), round(p3[1], 9), round(p3[2], 9))
        if key not in verts:
            verts[key] = len(verts) + 1
            order.append(key)
        return verts[key]

    faces = []
    normals = []
    for c in solution.diagram.cells:
        if c.is_empty:
            continue
        p = solution.sites[c.site_index]
        psi_i = solution.psi[c.site_index]
        ring = _cell_polyline(c)
        ids = [vid((x, y, p[0] * x + p[1] * y - psi_i)) for x, y in ring]
        ids = [i for k, i in enumerate(ids) if i != ids[k - 1]]
        if len(ids) >= 3:
            normals.append(c_exp(p).as_array())
            faces.append(ids)
    lines = ["# piecewise-planar graph of the dual potential"]
    for key in order:
        lines.append("v {:.12g} {:.12g} {:.12g}".format(*key))
    for nrm in normals:
        lines.append("vn {:.12g} {:.12g} {:.12g}".format(*nrm))
    for k, ids in enumerate(faces):
        lines.append("f " + " ".join(f"{i}//{k + 1}" for i in ids))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def solution_to_csv(solution, path):
    """Deterministic per-site table: weights, achieved and target masses,
    cell areas and centroids."""
    rows = ["site,p1,p2,psi,nu,mass,area,centroid1,centroid2"]
    for c in solution.diagram.cells:
        i = c.site_index
        p = solution.sites[i]
        rows.append(",".join([
            str(i), repr(float(p[0])), repr(float(p[1])),
            repr(float(solution.psi[i])), repr(float(solution.target.masses[i])),
            repr(float(solution.masses[i])), repr(float(c.area)),
            repr(float(c.centroid[0])), repr(float(c.centroid[1])),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    return path

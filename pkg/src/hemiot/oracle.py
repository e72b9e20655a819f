# Small-scale ground truth: exact discrete-discrete transport via the
# transportation simplex (with optional exact rational pivoting), plus
# monotonicity / normal-cone certificates used to cross-check the
# semi-discrete solver before trusting it at scale.
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chart import c_exp
from .domains import contains, initial_cell
from .geometry import (cell_area_centroid, clip_halfplane, clip_to_circle,
                       integrate_cell)
from .laguerre import _geom_eps
from .solver import active_site, solve


@dataclass
class DiscretePlan:
    """Support of a transport plan between weighted point clouds, with the
    recovered duals and optimality certificates."""
    entries: list                 # (source_index, target_index, mass)
    sources: np.ndarray           # (m, 2) positions
    source_masses: np.ndarray
    targets: np.ndarray           # (n, 2) positions
    target_masses: np.ndarray
    duals_source: np.ndarray
    duals_target: np.ndarray
    cost: float
    max_support_slack: float      # max |C - u - v| over support
    min_reduced_cost: float       # min (C - u - v) over all pairs

    def row_marginals(self):
        out = np.zeros(len(self.source_masses))
        for j, _, m in self.entries:
            out[j] += m
        return out

    def col_marginals(self):
        out = np.zeros(len(self.target_masses))
        for _, i, m in self.entries:
            out[i] += m
        return out

    def matrix(self):
        P = np.zeros((len(self.source_masses), len(self.target_masses)))
        for j, i, m in self.entries:
            P[j, i] += m
        return P

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("source,target,mass\n")
            for j, i, m in self.entries:
                fh.write(f"{j},{i},{m!r}\n")
        return path


def _simplex(C, mu, nu):
    """Transportation simplex on cost matrix C with Bland's rule; returns
    basis flows and duals. Works over floats or Fractions."""
    m, n = len(mu), len(nu)
    zero = mu[0] * 0
    # northwest-corner start
    flows = {}
    basis_rows = [[] for _ in range(m)]   # cols basic in row j
    basis_cols = [[] for _ in range(n)]
    j = i = 0
    a, b = mu[0], nu[0]
    while True:
        t = a if a <= b else b
        flows[(j, i)] = t
        basis_rows[j].append(i)
        basis_cols[i].append(j)
        a = a - t
        b = b - t
        if j == m - 1 and i == n - 1:
            break
        if a == zero and j < m - 1:
            j += 1
            a = mu[j]
        else:
            i += 1
            b = nu[i]

    tol = zero if isinstance(zero, Fraction) else 1e-12
    for _ in range(200000):
        # duals from the basis tree
        u = [None] * m
        v = [None] * n
        u[0] = zero
        stack = [(0, "row")]
        while stack:
            k, kind = stack.pop()
            if kind == "row":
                for i2 in basis_rows[k]:
                    if v[i2] is None:
                        v[i2] = C[k][i2] - u[k]
                        stack.append((i2, "col"))
            else:
                for j2 in basis_cols[k]:
                    if u[j2] is None:
                        u[j2] = C[j2][k] - v[k]
                        stack.append((j2, "row"))
        if any(x is None for x in u) or any(x is None for x in v):
            raise RuntimeError("disconnected basis tree")
        # entering variable: Bland (first negative reduced cost)
        enter = None
        for j2 in range(m):
            uj = u[j2]
            row = C[j2]
            for i2 in range(n):
                if (j2, i2) in flows:
                    continue
                if row[i2] - uj - v[i2] < -tol:
                    enter = (j2, i2)
                    break
            if enter:
                break
        if enter is None:
            return flows, u, v
        # cycle: unique path in the basis tree from enter's col back to its row
        je, ie = enter
        parent = {("r", je): None}
        stack = [("r", je)]
        found = None
        while stack and found is None:
            node = stack.pop()
            kind, k = node
            if kind == "r":
                for i2 in basis_rows[k]:
                    nxt = ("c", i2)
                    if nxt not in parent:
                        parent[nxt] = node
                        if i2 == ie:
                            found = nxt
                            break
                        stack.append(nxt)
            else:
                for j2 in basis_cols[k]:
                    nxt = ("r", j2)
                    if nxt not in parent:
                        parent[nxt] = node
                        stack.append(nxt)
        if found is None:
            raise RuntimeError("no cycle found")
        path = [found]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()              # r(je) ... c(ie)
        cyc = []
        for a_, b_ in zip(path, path[1:]):
            cell = (a_[1], b_[1]) if a_[0] == "r" else (b_[1], a_[1])
            cyc.append(cell)
        cyc = [enter] + cyc[::-1]   # alternate +,-,+,- starting at enter
        minus = cyc[1::2]
        theta = min(flows[c] for c in minus)
        leave = min(c for c in minus if flows[c] == theta)
        for k, cell in enumerate(cyc):
            if k % 2 == 0:
                flows[cell] = flows.get(cell, zero) + theta
            else:
                flows[cell] = flows[cell] - theta
        del flows[leave]
        basis_rows[leave[0]].remove(leave[1])
        basis_cols[leave[1]].remove(leave[0])
        basis_rows[je].append(ie)
        basis_cols[ie].append(je)
    raise RuntimeError("simplex did not terminate")


def lp_transport(sources, targets, exact=None):
    """Exact optimal plan between (x_j, mu_j) and (p_i, nu_i) for the linear
    surplus cost -<x, p>. `exact=True` forces rational pivoting (default for
    instances up to 50x50)."""
    xs = np.asarray([s[0] for s in sources], dtype=float)
    mu = np.asarray([s[1] for s in sources], dtype=float)
    ps = np.asarray([t[0] for t in targets], dtype=float)
    nu = np.asarray([t[1] for t in targets], dtype=float)
    m, n = len(mu), len(nu)
    if m > 1000 or n > 1000:
        raise ValueError("instance too large")
    if np.any(mu <= 0) or np.any(nu <= 0):
        raise ValueError("marginal masses must be positive")
    if abs(mu.sum() - nu.sum()) > 1e-12 * max(mu.sum(), nu.sum()):
        raise ValueError("marginals are infeasible (total masses differ)")
    Cf = -(xs @ ps.T)
    if exact is None:
        exact = m <= 50 and n <= 50
    if exact:
        C = [[Fraction(Cf[j, i]) for i in range(n)] for j in range(m)]
        mux = [Fraction(x) for x in mu]
        nux = [Fraction(x) for x in nu]
        # absorb the float roundoff of the totals into the largest source
        diff = sum(nux) - sum(mux)
        mux[int(np.argmax(mu))] += diff
        flows, u, v = _simplex(C, mux, nux)
        entries = sorted((j, i, float(f)) for (j, i), f in flows.items() if f > 0)
        u = np.array([float(x) for x in u])
        v = np.array([float(x) for x in v])
    else:
        muf = mu.copy()
        diff = nu.sum() - mu.sum()
        muf[int(np.argmax(mu))] += diff
        flows, u, v = _simplex(Cf, list(muf), list(nu))
        entries = sorted((j, i, float(f)) for (j, i), f in flows.items() if f > 1e-15)
        u = np.asarray(u)
        v = np.asarray(v)
    cost = sum(Cf[j, i] * f for j, i, f in entries)
    slack = max((abs(Cf[j, i] - u[j] - v[i]) for j, i, f in entries), default=0.0)
    rc = (Cf - u[:, None] - v[None, :]).min()
    return DiscretePlan(entries, xs, mu, ps, nu, u, v, float(cost),
                        float(slack), float(rc))


def brute_force_assignment(sources, targets):
    """Exhaustive minimum over one-to-one matchings; equal masses, n <= 7."""
    xs = np.asarray([s[0] for s in sources], dtype=float)
    ps = np.asarray([t[0] for t in targets], dtype=float)
    mu = np.asarray([s[1] for s in sources], dtype=float)
    n = len(xs)
    if n > 7 or len(ps) != n:
        raise ValueError("brute force needs a square instance, n <= 7")
    if np.ptp(mu) > 1e-12 * mu.max():
        raise ValueError("brute force needs equal masses")
    C = -(xs @ ps.T)
    best, best_perm = None, None
    for perm in itertools.permutations(range(n)):
        c = sum(C[j, perm[j]] for j in range(n))
        if best is None or c < best - 1e-15:
            best, best_perm = c, perm
    return float(best * mu[0]), list(best_perm)


def monotonicity_certificate(plan):
    """min <x - x', p - p'> over pairs of supported couplings; nonnegative
    (to roundoff) exactly when the support is monotone."""
    pairs = [(plan.sources[j], plan.targets[i]) for j, i, m in plan.entries
             if m > 1e-15 * max(plan.source_masses.sum(), 1e-300)]
    worst = np.inf
    for a in range(len(pairs)):
        xa, pa = pairs[a]
        for b in range(a + 1, len(pairs)):
            xb, pb = pairs[b]
            worst = min(worst, float((xa - xb) @ (pa - pb)))
    return 0.0 if worst is np.inf else worst


def normal_cone_check(domain, sites, psi, x, num_samples, seed=0):
    """Sample points z̄ = (z, u(z) + s) on or above the graph of
    u = max_i <·, p_i> - psi_i and verify they make a nonpositive inner
    product with the hemisphere direction active at x."""
    sites = np.asarray(sites, dtype=float)
    psi = np.asarray(psi, dtype=float)
    x = np.asarray(x, dtype=float)
    if not contains(domain, x):
        raise ValueError("x must lie in the domain")
    vals = sites @ x - psi
    k = int(np.argmax(vals))
    p = sites[k]
    ux = float(vals[k])
    nrm = c_exp(p).as_array()
    rng = np.random.default_rng(seed)
    lo, hi = domain.bounding_box()
    scale = max(1.0, float(np.abs(sites).max()) * float(np.abs(hi - lo).max()))
    done = 0
    while done < num_samples:
        z = rng.uniform(lo, hi, size=(4 * (num_samples - done), 2))
        z = z[contains(domain, z)]
        if len(z) == 0:
            continue
        z = z[: num_samples - done]
        s = rng.exponential(scale=scale, size=len(z))
        uz = (z @ sites.T - psi).max(axis=1)
        lhs = (z - x) @ nrm[:2] + (uz + s - ux) * nrm[2]
        if np.any(lhs > 1e-10):
            return False
        done += len(z)
    return True


def _grid_atoms(domain, K, grid_m, quad_tol=1e-10):
    """Cell-centered atomization of the source on an m×m grid over the
    domain's bounding box; boundary-cut cells put the atom at the centroid of
    the clipped piece."""
    lo, hi = domain.bounding_box()
    hx, hy = (hi - lo) / grid_m
    eps = _geom_eps(domain)
    verts0, labels0, circle = initial_cell(domain, pad=1.0)
    halfplanes = None
    if circle is None:
        nrm, off = domain.edge_normals()
        halfplanes = list(zip(nrm, off))
    atoms = []
    for i in range(grid_m):
        for j in range(grid_m):
            x0, y0 = lo[0] + i * hx, lo[1] + j * hy
            verts = [(x0, y0), (x0 + hx, y0), (x0 + hx, y0 + hy), (x0, y0 + hy)]
            labels = [("grid", t) for t in range(4)]
            if circle is not None:
                verts, labels = clip_to_circle(verts, labels, circle[0],
                                               circle[1], eps)
            else:
                for a, b in halfplanes:
                    if not verts:
                        break
                    verts, labels = clip_halfplane(verts, labels,
                                                   (a[0], a[1]), b,
                                                   ("wall", 0), eps)
            if not verts:
                continue
            area, cen = cell_area_centroid(verts, labels)
            if area <= (10 * eps) ** 2:
                continue
            if K.is_constant:
                mass = K.constant * area
            else:
                mass = float(integrate_cell(verts, labels, K, quad_tol)[0])
            if mass > 0:
                atoms.append((cen, mass))
    return atoms


def semidiscrete_agreement(domain, K, target, grid_m, tol=1e-7, seed=0):
    """Fraction of source mass whose exact-LP target assignment coincides
    with the Laguerre cell that the semi-discrete solution puts it in."""
    if grid_m ** 2 > 1000:
        raise ValueError("grid too fine for the exact oracle")
    sol = solve(domain, K, target, tol=tol)
    atoms = _grid_atoms(domain, K, grid_m)
    mu_tot = sum(m for _, m in atoms)
    # the atomization quadrature and the target share the same total up to
    # rounding; bridge the difference with one common rescale
    factor = target.total / mu_tot
    atoms = [(c, m * factor) for c, m in atoms]
    plan = lp_transport(atoms, list(zip(target.sites, target.masses)),
                        exact=len(atoms) <= 50)
    centers = np.asarray([c for c, _ in atoms])
    member = active_site(sol, centers)
    agree = sum(m for j, i, m in plan.entries if i == member[j])
    return float(agree / target.total), plan, sol


def agreement_ceiling(domain, K, target, grid_m, tol=1e-7):
    """Upper bound on semidiscrete_agreement over ALL feasible plans: the
    membership map quantizes the target marginal to nu_hat, and any plan's
    overlap with it is at most 1 - ||nu_hat - nu||_1 / (2 total). Useful to
    tell atomization error from solver error."""
    sol = solve(domain, K, target, tol=tol)
    atoms = _grid_atoms(domain, K, grid_m)
    mu = np.asarray([m for _, m in atoms])
    mu *= target.total / mu.sum()
    centers = np.asarray([c for c, _ in atoms])
    member = active_site(sol, centers)
    nu_hat = np.zeros(len(target.masses))
    for j, i in enumerate(member):
        nu_hat[i] += mu[j]
    return float(1.0 - np.abs(nu_hat - target.masses).sum() / (2.0 * target.total))

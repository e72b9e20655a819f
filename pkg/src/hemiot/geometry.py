# Planar computational geometry shared by the domain, diagram, and target layers:
# labeled convex clipping, exact circle/polygon cells, and quadrature rules.
import math
from functools import lru_cache

import numpy as np

# Edge labels on convex cells. A cell is (verts, labels) where verts is a list of
# (x, y) tuples in CCW order and labels[i] describes the edge verts[i] -> verts[i+1].
# Labels: ("nbr", j) bisector against site j, ("wall", k) domain polygon edge k,
# ("arc", center, radius) a CCW circular arc of the domain disk, ("box",) scratch.

ARC = "arc"


def polygon_area(verts):
    """Shoelace area of a polygon given as an (k,2) array-like (CCW positive)."""
    v = np.asarray(verts, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_centroid(verts):
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xr, yr = np.roll(x, -1), np.roll(y, -1)
    cross = x * yr - xr * y
    a = 0.5 * cross.sum()
    if abs(a) < 1e-300:
        return np.mean(v, axis=0)
    cx = float(((x + xr) * cross).sum() / (6.0 * a))
    cy = float(((y + yr) * cross).sum() / (6.0 * a))
    return np.array([cx, cy])


def _segment_area_moment(c, R, a, b):
    """Area and first moment (∫x dA, ∫y dA) of the circular segment between
    chord a->b (CCW) and the arc of circle (c, R) on its outside."""
    ta = math.atan2(a[1] - c[1], a[0] - c[0])
    tb = math.atan2(b[1] - c[1], b[0] - c[0])
    sweep = tb - ta
    while sweep <= 0.0:
        sweep += 2.0 * math.pi
    # cells are convex, so sweeps stay <= pi (+ rounding)
    area = 0.5 * R * R * (sweep - math.sin(sweep))
    if area <= 0.0:
        return 0.0, np.zeros(2)
    alpha = 0.5 * sweep
    # centroid distance of a circular segment from the center
    dist = (4.0 * R * math.sin(alpha) ** 3) / (3.0 * (sweep - math.sin(sweep)))
    mid = ta + alpha
    cen = np.array([c[0] + dist * math.cos(mid), c[1] + dist * math.sin(mid)])
    return area, area * cen


def cell_area_centroid(verts, labels):
    """Exact area and centroid of a convex cell whose edges are segments plus
    circular arcs (labels ("arc", center, radius))."""
    if len(verts) < 2:
        return 0.0, np.zeros(2)
    area = polygon_area(verts) if len(verts) >= 3 else 0.0
    v = np.asarray(verts, dtype=float)
    if len(v) >= 3:
        x, y = v[:, 0], v[:, 1]
        xr, yr = np.roll(x, -1), np.roll(y, -1)
        cross = x * yr - xr * y
        mom = np.array([((x + xr) * cross).sum() / 6.0, ((y + yr) * cross).sum() / 6.0])
    else:
        mom = np.zeros(2)
    k = len(verts)
    for i, lab in enumerate(labels):
        if lab[0] == ARC:
            a, b = verts[i], verts[(i + 1) % k]
            s_area, s_mom = _segment_area_moment(lab[1], lab[2], a, b)
            area += s_area
            mom = mom + s_mom
    cen = mom / area if area > 0 else (v.mean(axis=0) if len(v) else np.zeros(2))
    return area, cen


def clip_halfplane(verts, labels, normal, offset, new_label, eps):
    """Clip a labeled convex cell by {x : normal·x <= offset}.

    Returns (verts, labels) of the clipped cell; ([], []) when empty."""
    k = len(verts)
    if k == 0:
        return [], []
    nx, ny = normal
    d = [verts[i][0] * nx + verts[i][1] * ny - offset for i in range(k)]
    if all(di <= eps for di in d):
        return verts, labels
    if all(di > -eps for di in d):
        return [], []
    out_v, out_l = [], []
    for i in range(k):
        j = (i + 1) % k
        A, B = verts[i], verts[j]
        dA, dB = d[i], d[j]
        ain, bin_ = dA <= eps, dB <= eps
        if ain:
            out_v.append(A)
            if bin_:
                out_l.append(labels[i])
            else:
                out_l.append(labels[i])
                t = dA / (dA - dB)
                out_v.append((A[0] + t * (B[0] - A[0]), A[1] + t * (B[1] - A[1])))
                out_l.append(new_label)
        elif bin_:
            t = dA / (dA - dB)
            out_v.append((A[0] + t * (B[0] - A[0]), A[1] + t * (B[1] - A[1])))
            out_l.append(labels[i])
    return _dedupe(out_v, out_l, eps)


def _dedupe(verts, labels, eps):
    """Merge consecutive near-identical vertices, dropping zero-length edges."""
    k = len(verts)
    if k == 0:
        return [], []
    out_v, out_l = [], []
    for i in range(k):
        j = (i + 1) % k
        if abs(verts[i][0] - verts[j][0]) > eps or abs(verts[i][1] - verts[j][1]) > eps:
            out_v.append(verts[i])
            out_l.append(labels[i])
        # else: drop vertex i; its outgoing edge had zero length
    if len(out_v) < 2:
        return [], []
    return out_v, out_l


def clip_to_circle(verts, labels, center, R, eps):
    """Intersect a labeled convex polygon (straight edges only) with the disk
    (center, R). Crossing edges are split and circle pieces get arc labels."""
    cx, cy = center
    k = len(verts)
    if k == 0:
        return [], []
    r2 = [(verts[i][0] - cx) ** 2 + (verts[i][1] - cy) ** 2 for i in range(k)]
    R2 = R * R
    tol = max(eps, 1e-14 * R) * R
    inside = [r2[i] <= R2 + 2.0 * tol for i in range(k)]
    if all(inside):
        return verts, labels
    out_v, out_l = [], []
    any_cross = False
    for i in range(k):
        j = (i + 1) % k
        A, B = verts[i], verts[j]
        hits = _segment_circle_hits(A, B, center, R)
        if inside[i]:
            out_v.append(A)
            if inside[j]:
                out_l.append(labels[i])
            else:
                q = hits[0] if hits else B
                out_l.append(labels[i])
                out_v.append(q)
                out_l.append((ARC, (cx, cy), R))
                any_cross = True
        else:
            if inside[j]:
                q = hits[-1] if hits else A
                out_v.append(q)
                out_l.append(labels[i])
                any_cross = True
            elif len(hits) == 2:
                # edge dips through the disk
                out_v.append(hits[0])
                out_l.append(labels[i])
                out_v.append(hits[1])
                out_l.append((ARC, (cx, cy), R))
                any_cross = True
    if not any_cross:
        # either disjoint, or the disk sits inside the polygon
        if _point_in_polygon_convex((cx, cy), verts, eps):
            return (
                [(cx + R, cy), (cx - R, cy)],
                [(ARC, (cx, cy), R), (ARC, (cx, cy), R)],
            )
        return [], []
    return _dedupe(out_v, out_l, eps)


def _segment_circle_hits(A, B, center, R):
    """Intersection points of segment A->B with circle (center, R), ordered
    along the segment."""
    ax, ay = A[0] - center[0], A[1] - center[1]
    dx, dy = B[0] - A[0], B[1] - A[1]
    a = dx * dx + dy * dy
    if a == 0.0:
        return []
    b = 2.0 * (ax * dx + ay * dy)
    c = ax * ax + ay * ay - R * R
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return []
    s = math.sqrt(disc)
    hits = []
    for t in ((-b - s) / (2.0 * a), (-b + s) / (2.0 * a)):
        if -1e-12 <= t <= 1.0 + 1e-12:
            hits.append((A[0] + t * dx, A[1] + t * dy))
    return hits


def _point_in_polygon_convex(p, verts, eps):
    k = len(verts)
    for i in range(k):
        j = (i + 1) % k
        ex, ey = verts[j][0] - verts[i][0], verts[j][1] - verts[i][1]
        if ex * (p[1] - verts[i][1]) - ey * (p[0] - verts[i][0]) < -eps:
            return False
    return True


# ---------------------------------------------------------------------------
# quadrature

@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _triangle_rule():
    """Degree-5, 7-point rule in barycentric coordinates (weights sum to 1)."""
    s15 = math.sqrt(15.0)
    w1 = (155.0 + s15) / 1200.0
    w2 = (155.0 - s15) / 1200.0
    b1 = (6.0 + s15) / 21.0
    a1 = 1.0 - 2.0 * b1
    b2 = (6.0 - s15) / 21.0
    a2 = 1.0 - 2.0 * b2
    pts = [(1 / 3, 1 / 3, 1 / 3),
           (a1, b1, b1), (b1, a1, b1), (b1, b1, a1),
           (a2, b2, b2), (b2, a2, b2), (b2, b2, a2)]
    wts = [9.0 / 40.0, w1, w1, w1, w2, w2, w2]
    return np.array(pts), np.array(wts)


_TRI_PTS, _TRI_WTS = _triangle_rule()


def _tri_integrate(f, tri):
    """(∫f, ∫f·x, ∫f·y) over one triangle with the 7-point rule; f vectorized."""
    p = _TRI_PTS @ tri  # (7,2)
    area = 0.5 * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
                  - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]))
    vals = f(p) * _TRI_WTS
    s = vals.sum() * area
    mx = (vals * p[:, 0]).sum() * area
    my = (vals * p[:, 1]).sum() * area
    return np.array([s, mx, my])


def _tri_adaptive(f, tri, tol, depth=0):
    coarse = _tri_integrate(f, tri)
    a, b, c = tri
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    subs = [np.array([a, ab, ca]), np.array([ab, b, bc]),
            np.array([ca, bc, c]), np.array([ab, bc, ca])]
    fine = sum(_tri_integrate(f, t) for t in subs)
    if abs(fine[0] - coarse[0]) <= tol or depth >= 14:
        return fine
    return sum(_tri_adaptive(f, t, tol / 4.0, depth + 1) for t in subs)


def _polar_patch_integrate(f, center, t0, t1, rlo, rhi, n=8):
    """(∫f, ∫f·x, ∫f·y) over {θ∈[t0,t1], r∈[rlo(θ), rhi(θ)]} around center;
    rlo/rhi are vectorized functions of θ."""
    xs, ws = gauss_legendre(n)
    th = t0 + (t1 - t0) * xs
    lo = rlo(th)
    hi = rhi(th)
    out = np.zeros(3)
    for i in range(len(th)):
        rr = lo[i] + (hi[i] - lo[i]) * xs
        pts = np.stack([center[0] + rr * math.cos(th[i]),
                        center[1] + rr * math.sin(th[i])], axis=1)
        vals = f(pts) * rr * ws * (hi[i] - lo[i])
        w_i = ws[i] * (t1 - t0)
        out[0] += w_i * vals.sum()
        out[1] += w_i * (vals * pts[:, 0]).sum()
        out[2] += w_i * (vals * pts[:, 1]).sum()
    return out


def _polar_patch_adaptive(f, center, t0, t1, rlo, rhi, tol, depth=0):
    coarse = _polar_patch_integrate(f, center, t0, t1, rlo, rhi)
    tm = 0.5 * (t0 + t1)

    def rmid(th):
        return 0.5 * (rlo(th) + rhi(th))

    quads = [(t0, tm, rlo, rmid), (tm, t1, rlo, rmid),
             (t0, tm, rmid, rhi), (tm, t1, rmid, rhi)]
    fine = sum(_polar_patch_integrate(f, center, *q) for q in quads)
    if abs(fine[0] - coarse[0]) <= tol or depth >= 12:
        return fine
    return sum(_polar_patch_adaptive(f, center, *q, tol / 4.0, depth + 1)
               for q in quads)


def integrate_cell(verts, labels, f, tol=1e-10):
    """(mass, ∫f·x, ∫f·y) of a vectorized density f over a labeled convex cell.

    Straight part: fan triangulation + adaptive degree-5 rule. Arc edges: adaptive
    polar patches between the chord and the circle."""
    if len(verts) < 2:
        return np.zeros(3)
    out = np.zeros(3)
    v = np.asarray(verts, dtype=float)
    if len(verts) >= 3:
        cen = v.mean(axis=0)
        for i in range(len(verts)):
            tri = np.array([cen, v[i], v[(i + 1) % len(verts)]])
            if abs(polygon_area(tri)) > 1e-300:
                out += _tri_adaptive(f, tri, tol / max(len(verts), 1))
    for i, lab in enumerate(labels):
        if lab[0] != ARC:
            continue
        a = v[i]
        b = v[(i + 1) % len(verts)]
        c = np.asarray(lab[1], dtype=float)
        R = lab[2]
        ta = math.atan2(a[1] - c[1], a[0] - c[0])
        tb = math.atan2(b[1] - c[1], b[0] - c[0])
        while tb <= ta:
            tb += 2.0 * math.pi
        # chord in polar form around the center
        if tb - ta >= math.pi - 1e-9:
            # chord passes (numerically) through the center
            def rlo(th):
                return np.zeros_like(th)
        else:
            tm = 0.5 * (ta + tb)
            n_hat = np.array([math.cos(tm), math.sin(tm)])
            e = float((0.5 * (a + b) - c) @ n_hat)

            def rlo(th, e=e, tm=tm):
                return e / np.cos(th - tm)

        def rhi(th, R=R):
            return np.full_like(th, R)

        out += _polar_patch_adaptive(f, c, ta, tb, rlo, rhi, tol)
    return out


def segment_line_integral(a, b, g, n=16):
    """∫ g dH¹ along the segment a->b; g vectorized over (m,2) points."""
    xs, ws = gauss_legendre(n)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pts = a[None, :] + xs[:, None] * (b - a)[None, :]
    return float(np.dot(g(pts), ws) * np.linalg.norm(b - a))


def radial_mass(verts, labels, F, origin=(0.0, 0.0), n=24):
    """∬_cell f(|x−origin|) dx where F(r) = ∫₀^r f(ρ)ρ dρ is the exact radial
    primitive. Stokes in polar form: the 1-form F(r)dθ has dω = f dA, so the
    mass is the sum over boundary pieces of ∫ F(r) dθ (CCW)."""
    if len(verts) < 2:
        return 0.0
    ox, oy = origin
    xs, ws = gauss_legendre(n)
    total = 0.0
    k = len(verts)
    v = np.asarray(verts, dtype=float)
    for i in range(k):
        a = v[i]
        b = v[(i + 1) % k]
        lab = labels[i]
        if lab[0] == ARC:
            c = np.asarray(lab[1], dtype=float)
            R = lab[2]
            ta = math.atan2(a[1] - c[1], a[0] - c[0])
            tb = math.atan2(b[1] - c[1], b[0] - c[0])
            while tb <= ta:
                tb += 2.0 * math.pi
            th = ta + (tb - ta) * xs
            px = c[0] + R * np.cos(th) - ox
            py = c[1] + R * np.sin(th) - oy
            # dθ_origin = cross(p, dp)/|p|²; dp = R(-sin, cos)dθ_c
            dpx = -R * np.sin(th)
            dpy = R * np.cos(th)
            r2 = px * px + py * py
            integ = F(np.sqrt(r2)) * (px * dpy - py * dpx) / r2
            total += float(np.dot(integ, ws)) * (tb - ta)
        else:
            total += _radial_segment(a, b, F, ox, oy, xs, ws)
    return total


def _radial_segment(a, b, F, ox, oy, xs, ws, depth=0):
    def quad(n_xs, n_ws):
        d = (b[0] - a[0], b[1] - a[1])
        px = a[0] + n_xs * d[0] - ox
        py = a[1] + n_xs * d[1] - oy
        r2 = np.maximum(px * px + py * py, 1e-300)
        # dθ = cross(p, dp)/|p|²; bounded as r->0 since F(r) ~ f(0) r²/2
        return float(np.dot(F(np.sqrt(r2)) * (px * d[1] - py * d[0]) / r2, n_ws))

    coarse = quad(xs, ws)
    fine = quad(*gauss_legendre(2 * len(xs)))
    if abs(fine - coarse) <= 1e-13 * (1.0 + abs(fine)) or depth >= 8:
        return fine
    m = (0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]))
    return (_radial_segment(a, m, F, ox, oy, xs, ws, depth + 1)
            + _radial_segment(m, b, F, ox, oy, xs, ws, depth + 1))


def chart_density_primitive(r):
    """F(r) = ∫₀^r ρ(1+ρ²)^(−2) dρ = r²/(2(1+r²))."""
    r = np.asarray(r, dtype=float)
    return r * r / (2.0 * (1.0 + r * r))


def area_primitive(r):
    r = np.asarray(r, dtype=float)
    return 0.5 * r * r

"""Sobolev norms, the key equivalence sum and Whitney averaging.

keylemma_sum evaluates sum_Q ||grad^n T_Omega(P_{3Q} f)||_{L^p(Q)}^p by
expanding each cube's approximating polynomial in the monomial basis
z^j zbar^k (j + k <= n-1): the transform is linear in the data, so the
gradients of the basis transforms are evaluated once at every cube node
and the per-cube assembly is a small matrix product.
"""

from __future__ import annotations

import math

import numpy as np

from . import fields
from .czop import BoundaryEngine, CPoly, Kernel
from .geometry import Disk, Domain, GraphDomain, Polygon
from .poly import Poly, project_all
from .quadrature import QuadratureSpec, gauss_on_interval, tensor_rule, trapezoid_circle
from .whitney import OrientedCovering


# ---------------------------------------------------------------------------
# domain quadrature


def _triangulate(vertices):
    """Ear-clipping triangulation of a simple ccw polygon."""
    v = [tuple(p) for p in vertices]
    idx = list(range(len(v)))
    tris = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def inside(p, a, b, c):
        d1 = cross(a, b, p)
        d2 = cross(b, c, p)
        d3 = cross(c, a, p)
        return d1 >= -1e-14 and d2 >= -1e-14 and d3 >= -1e-14

    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10000:
            raise ValueError("triangulation failed; polygon may be degenerate")
        n = len(idx)
        clipped = False
        for t in range(n):
            i0, i1, i2 = idx[(t - 1) % n], idx[t], idx[(t + 1) % n]
            a, b, c = v[i0], v[i1], v[i2]
            if cross(a, b, c) <= 1e-14:
                continue  # reflex corner
            if any(inside(v[j], a, b, c) for j in idx if j not in (i0, i1, i2)):
                continue
            tris.append((a, b, c))
            idx.pop(t)
            clipped = True
            break
        if not clipped:
            raise ValueError("triangulation failed; polygon may be non-simple")
    tris.append((v[idx[0]], v[idx[1]], v[idx[2]]))
    return tris


def domain_quadrature(domain: Domain, order: int = 16):
    """(points, weights) integrating smooth functions over the domain
    (graph domains: over the covering box above the graph). Geometry is
    exact for disks, polygons and polyline graphs."""
    if isinstance(domain, Disk):
        rr, rw = gauss_on_interval(0.0, domain.radius, order)
        theta, tw = trapezoid_circle(4 * order)
        R, T = np.meshgrid(rr, theta, indexing="ij")
        pts = domain.center + np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=-1)
        w = (rw[:, None] * rr[:, None] * tw[None, :]).ravel()
        return pts, w
    if isinstance(domain, Polygon):
        uu, uw = gauss_on_interval(0.0, 1.0, order)
        pts_list, w_list = [], []
        for a, b, c in _triangulate(domain.vertices):
            a = np.asarray(a)
            b = np.asarray(b)
            c = np.asarray(c)
            area2 = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
            U, V = np.meshgrid(uu, uu, indexing="ij")
            P = (1 - U)[..., None] * a + (U * (1 - V))[..., None] * b + (U * V)[..., None] * c
            W = (uw[:, None] * uw[None, :]) * U * area2
            pts_list.append(P.reshape(-1, 2))
            w_list.append(W.ravel())
        return np.concatenate(pts_list), np.concatenate(w_list)
    if isinstance(domain, GraphDomain) and domain.dim == 2:
        lo, hi = domain.bounding_box()
        xs_break = [lo[0], hi[0]]
        if domain.polyline is not None:
            xs_break += [float(x) for x in domain.polyline[:, 0] if lo[0] < x < hi[0]]
        xs_break = sorted(set(xs_break))
        uu, uw = gauss_on_interval(0.0, 1.0, order)
        pts_list, w_list = [], []
        for x0, x1 in zip(xs_break, xs_break[1:]):
            xg, xw = gauss_on_interval(x0, x1, order)
            bottom = np.maximum(domain.height(xg[:, None]), lo[1])
            height = np.maximum(hi[1] - bottom, 0.0)
            Y = bottom[:, None] + uu[None, :] * height[:, None]
            X = np.broadcast_to(xg[:, None], Y.shape)
            W = xw[:, None] * uw[None, :] * height[:, None]
            pts_list.append(np.stack([X.ravel(), Y.ravel()], axis=-1))
            w_list.append(W.ravel())
        return np.concatenate(pts_list), np.concatenate(w_list)
    raise NotImplementedError(f"no quadrature rule for domain kind {domain.kind}")


# ---------------------------------------------------------------------------
# Sobolev norms


def sobolev_norm(domain: Domain, f, n: int, p: float, order: int = 16) -> dict:
    """Full norm sum_{|a|<=n} ||D^a f||_p, the reduced form
    ||f||_p + ||grad^n f||_p, and the individual terms."""
    pts, w = domain_quadrature(domain, order)
    d = domain.dim
    terms = {}
    for alpha in fields.multiindices(d, n):
        vals = np.abs(f.derivative(alpha)(pts))
        terms[alpha] = float(np.sum(w * vals**p)) ** (1.0 / p)
    full = sum(terms.values())
    grad_n = np.zeros(len(pts))
    for alpha in terms:
        if sum(alpha) == n:
            grad_n += np.abs(f.derivative(alpha)(pts))
    reduced = terms[(0,) * d] + float(np.sum(w * grad_n**p)) ** (1.0 / p)
    return {"full": full, "reduced": reduced, "terms": {str(k): v for k, v in terms.items()}}


# ---------------------------------------------------------------------------
# key equivalence sum


def _basis_partials(domain, basis, alphas, z, chunk: int = 40000):
    """partials[b][alpha] = D^alpha (T_Omega z^j zbar^k) at nodes z."""
    out = {}
    for b in basis:
        eng = BoundaryEngine(domain, CPoly({b: 1.0}))
        per_alpha = {}
        for alpha in alphas:
            vals = np.empty(z.shape, dtype=complex)
            for start in range(0, len(z), chunk):
                vals[start : start + chunk] = eng.partial(alpha, z[start : start + chunk])
            per_alpha[alpha] = vals
        out[b] = per_alpha
    return out


class TransformPartialTable:
    """Gradients of basis-monomial transforms at every cube node, shared
    across probe fields on one covering."""

    def __init__(self, oc: OrientedCovering, n: int, quad_order: int = 6):
        dom = oc.cov.domain
        if not isinstance(dom, (Disk, Polygon)):
            raise NotImplementedError("transform table needs a disk or polygon domain")
        self.oc = oc
        self.n = n
        self.basis = [(j, k) for j in range(n) for k in range(n - j)]
        self.alphas = [(a, n - a) for a in range(n + 1)]
        cov = oc.cov
        self.ref, self.refw = tensor_rule(np.zeros(2), np.ones(2), quad_order)
        nodes = cov.lo[:, None, :] + cov.sides[:, None, None] * self.ref[None, :, :]
        z = (nodes[..., 0] + 1j * nodes[..., 1]).ravel()
        self.partials = _basis_partials(dom, self.basis, self.alphas, z)
        self.nq = len(self.refw)


def keylemma_sum(oc: OrientedCovering, kernel: Kernel, f, n: int, p: float,
                 quad_order: int = 6, proj_quad: QuadratureSpec = None,
                 table: TransformPartialTable = None) -> dict:
    """sum over cubes of ||grad^n T_Omega(P^{n-1}_{3Q} f)||_{L^p(Q)}^p.

    Requires a disk or polygon domain (contour route); the kernel argument
    fixes the operator and must be the planar Beurling kernel or zero."""
    cov = oc.cov
    dom = cov.domain
    if kernel.name == "zero":
        return {"sum": 0.0, "n_cubes": len(cov), "per_cube_max": 0.0}
    if kernel.name != "beurling":
        raise NotImplementedError("keylemma_sum supports the Beurling kernel")
    if kernel.order < n:
        raise ValueError("kernel order too small")
    table = table or TransformPartialTable(oc, n, quad_order)
    polys = project_all(f, cov, n, proj_quad)
    nq = table.nq
    total = 0.0
    worst = 0.0
    per_cube = np.empty(len(cov))
    for i in range(len(cov)):
        cp = CPoly.from_real_poly(polys[i])
        coefs = {b: cp.coeffs.get(b, 0j) for b in table.basis}
        extra = set(cp.coeffs) - set(table.basis)
        if any(abs(cp.coeffs[e]) > 1e-9 for e in extra):
            raise ValueError("projection degree exceeds the basis")
        sl = slice(i * nq, (i + 1) * nq)
        grad_tot = np.zeros(nq)
        for alpha in table.alphas:
            acc = np.zeros(nq, dtype=complex)
            for b in table.basis:
                c = coefs[b]
                if c != 0:
                    acc += c * table.partials[b][alpha][sl]
            grad_tot += np.abs(acc)
        mass = float(np.sum(table.refw * cov.sides[i] ** 2 * grad_tot**p))
        per_cube[i] = mass
        total += mass
        worst = max(worst, mass)
    return {"sum": total, "n_cubes": len(cov), "per_cube_max": worst, "per_cube": per_cube}


# ---------------------------------------------------------------------------
# Whitney averaging operator


def averaging(oc: OrientedCovering, f, order: int = 6) -> dict:
    """A f per cube: the mean of f over the tripled cube."""
    cov = oc.cov
    out = {}
    for i in range(len(cov)):
        c = cov.centers[i]
        s = 3.0 * cov.sides[i]
        pts, w = tensor_rule(c - s / 2.0, c + s / 2.0, order)
        out[i] = float(np.sum(w * f.derivative((0,) * cov.dim)(pts))) / s**cov.dim
    return out


def averaging_lp_report(oc: OrientedCovering, f, p: float, order: int = 6) -> dict:
    """Measured constant in ||A f||_{L^p(union of cubes)} <= C ||f||_{L^p}."""
    cov = oc.cov
    av = averaging(oc, f, order)
    lhs = sum(abs(av[i]) ** p * cov.sides[i] ** cov.dim for i in range(len(cov))) ** (1.0 / p)
    pts, w = domain_quadrature(cov.domain, 16)
    rhs = float(np.sum(w * np.abs(f.derivative((0,) * cov.dim)(pts)) ** p)) ** (1.0 / p)
    return {"lhs": lhs, "rhs": rhs, "constant": lhs / rhs if rhs > 0 else 0.0}


# ---------------------------------------------------------------------------
# probe suites


def default_suite(d: int = 2):
    """Polynomial and transcendental probes with analytic derivatives."""
    return [
        fields.constant(1.0, d),
        fields.coordinate(0, d),
        fields.coordinate(1, d),
        fields.monomial((1, 1), d),
        fields.sin_product([math.pi, math.pi]),
        fields.exp_coordinate(0, d),
    ]


def boundedness_probe(oc: OrientedCovering, kernel: Kernel, n: int, p: float, suite=None,
                      quad_order: int = 6) -> dict:
    """Per probe field: keylemma_sum(f) / ||f||_{W^{n,p}}^p, and the sup."""
    suite = suite if suite is not None else default_suite(oc.cov.dim)
    table = None
    if kernel.name == "beurling":
        table = TransformPartialTable(oc, n, quad_order)
    out = {}
    sup = 0.0
    for f in suite:
        s = keylemma_sum(oc, kernel, f, n, p, quad_order, table=table)["sum"]
        norm = sobolev_norm(oc.cov.domain, f, n, p)["full"]
        ratio = s / norm**p if norm > 0 else 0.0
        out[f.name] = {"sum": s, "norm": norm, "ratio": ratio}
        sup = max(sup, ratio)
    return {"fields": out, "sup_ratio": sup, "n_cubes": len(oc.cov)}

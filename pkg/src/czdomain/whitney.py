"""Oriented Whitney coverings: construction, orientation, chains, shadows.

Construction selects maximal dyadic cubes Q with dist(Q, boundary) >= tau *
side(Q). With tau = sqrt(d) both the distance bracket
    C_W * l(Q) <= dist(Q, bd) <= 4 C_W * l(Q)
and the neighbor side-ratio bound l(Q) <= 2 l(R) are theorems of the
selection rule, not empirical observations; the builder picks the largest
tau compatible with the requested C_W and reports whether the ratio bound
is guaranteed or merely checked.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Domain, GraphDomain


@dataclass(frozen=True)
class Cube:
    """Semi-open dyadic cube [idx*s, (idx+1)*s) with s = base * 2^-level."""

    level: int
    index: tuple
    base: float

    @property
    def side(self) -> float:
        return self.base * 2.0 ** (-self.level)

    @property
    def lo(self):
        return np.asarray(self.index, dtype=float) * self.side

    @property
    def hi(self):
        return (np.asarray(self.index, dtype=float) + 1.0) * self.side

    @property
    def center(self):
        return (np.asarray(self.index, dtype=float) + 0.5) * self.side

    @property
    def dim(self) -> int:
        return len(self.index)

    def key(self):
        return (self.level, self.index)


class Covering:
    """Unoriented Whitney covering (axioms W1-W6, truncated at min_side)."""

    def __init__(self, domain, cubes, dists, C_W, tau, min_side, base,
                 dropped_count, dropped_volume, clip_box=None):
        self.domain = domain
        self.cubes = cubes
        self.C_W = C_W
        self.tau = tau
        self.min_side = min_side
        self.base = base
        self.dropped_count = dropped_count
        self.dropped_volume = dropped_volume
        self.clip_box = clip_box
        n = len(cubes)
        d = domain.dim
        self.levels = np.array([c.level for c in cubes], dtype=int)
        self.indices = np.array([c.index for c in cubes], dtype=np.int64).reshape(n, d)
        self.sides = np.array([c.side for c in cubes])
        self.lo = self.indices * self.sides[:, None]
        self.hi = (self.indices + 1) * self.sides[:, None]
        self.centers = (self.indices + 0.5) * self.sides[:, None]
        self.dists = np.asarray(dists)
        self.pos_of = {c.key(): i for i, c in enumerate(cubes)}
        self.max_level = int(self.levels.max()) if n else 0
        self._neighbors = None

    def __len__(self):
        return len(self.cubes)

    @property
    def dim(self):
        return self.domain.dim

    def volume(self) -> float:
        return float(np.sum(self.sides**self.dim))

    # -- neighbor structure ------------------------------------------------

    def _unit_coords(self):
        # integer corner coordinates in units of the finest side
        shift = (self.max_level - self.levels).astype(np.int64)
        scale = np.int64(1) << shift
        ulo = self.indices * scale[:, None]
        uhi = (self.indices + 1) * scale[:, None]
        return ulo, uhi, scale

    def neighbors(self):
        """Adjacency lists: cubes whose closures intersect (exact, integer).

        Each touching pair is discovered from its finer member, which only
        has O(3^d) coarse candidates per level; no ring scans needed."""
        if self._neighbors is not None:
            return self._neighbors
        n = len(self.cubes)
        d = self.dim
        ulo, uhi, _ = self._unit_coords()
        by_level = {}
        for i in range(n):
            by_level.setdefault(int(self.levels[i]), {})[tuple(self.indices[i])] = i
        adj = [set() for _ in range(n)]
        levels_present = sorted(by_level)
        for i in range(n):
            j = int(self.levels[i])
            for j2 in levels_present:
                if j2 > j:
                    break  # pairs found from the finer side
                shift2 = self.max_level - j2
                lo2 = tuple((int(ulo[i, a]) - 1) >> shift2 for a in range(d))
                hi2 = tuple(int(uhi[i, a]) >> shift2 for a in range(d))
                table = by_level[j2]
                for tup in itertools.product(*[range(lo2[a], hi2[a] + 1) for a in range(d)]):
                    k = table.get(tup)
                    if k is None or k == i:
                        continue
                    if j == j2 and k < i:
                        continue  # same level: record each pair once
                    if all(ulo[i, a] <= uhi[k, a] and ulo[k, a] <= uhi[i, a] for a in range(d)):
                        adj[i].add(k)
                        adj[k].add(i)
        self._neighbors = [sorted(s) for s in adj]
        return self._neighbors

    def touching(self, i: int, k: int) -> bool:
        ulo, uhi, _ = self._unit_coords()
        return bool(np.all(ulo[i] <= uhi[k]) and np.all(ulo[k] <= uhi[i]))

    # -- gap distances -----------------------------------------------------

    def box_gap(self, i: int, others=None):
        """Euclidean gap dist(Q_i, Q_k) for each k (0 when closures meet)."""
        others = slice(None) if others is None else others
        g1 = self.lo[others] - self.hi[i]
        g2 = self.lo[i] - self.hi[others]
        gap = np.maximum(np.maximum(g1, g2), 0.0)
        return np.sqrt(np.sum(gap * gap, axis=-1))

    def long_distance(self, i: int, k: int) -> float:
        """D(Q,S) = l(Q) + l(S) + dist(Q,S)."""
        return float(self.sides[i] + self.sides[k] + self.box_gap(i, [k])[0])

    def long_distance_row(self, i: int):
        return self.sides[i] + self.sides + self.box_gap(i)




def select_tau(C_W: float, d: int) -> float:
    """Largest selection threshold compatible with the W4 bracket.

    tau >= sqrt(d) additionally guarantees the W5 neighbor ratio <= 2.
    """
    if C_W < 1.0:
        raise ValueError(f"C_W must be >= 1, got {C_W}")
    sd = math.sqrt(d)
    cap = 0.5 * (4.0 * C_W - sd) * (1.0 - 1e-9)  # strictly inside the bracket
    return max(C_W, min(sd, cap))


def build_covering(domain: Domain, min_side: float, C_W: float = 1.125) -> Covering:
    """Whitney covering of the domain truncated at min_side (W1-W6).

    Cubes are maximal dyadic cubes with dist(Q, bd) >= tau * l(Q); cubes that
    would require side < min_side are dropped and reported as the truncation
    layer. The frontier advances one dyadic level at a time with all
    geometric predicates evaluated on whole index arrays.
    """
    if min_side <= 0:
        raise ValueError("min_side must be positive")
    d = domain.dim
    tau = select_tau(C_W, d)
    lo_bb, hi_bb = domain.bounding_box()
    extent = float(np.max(hi_bb - lo_bb))
    if not np.isfinite(extent) or extent <= 0:
        raise ValueError("domain has empty interior or unbounded box")
    base = 2.0 ** math.ceil(math.log2(extent))
    clip = isinstance(domain, GraphDomain)
    clip_lo, clip_hi = (lo_bb, hi_bb) if clip else (None, None)
    eps = 1e-12 * extent

    cubes = []
    dists = []
    dropped = 0
    dropped_vol = 0.0

    lo_idx = np.floor(lo_bb / base).astype(np.int64)
    hi_idx = np.floor((hi_bb - eps) / base).astype(np.int64)
    frontier = np.array(
        list(itertools.product(*[range(lo_idx[a], hi_idx[a] + 1) for a in range(d)])), dtype=np.int64
    ).reshape(-1, d)
    level = 0
    offsets = np.array(list(itertools.product((0, 1), repeat=d)), dtype=np.int64)

    while frontier.size:
        side = base * 2.0 ** (-level)
        lo = frontier * side
        hi = lo + side
        keep = np.ones(len(frontier), dtype=bool)
        if clip:
            keep &= ~(np.any(hi <= clip_lo + eps, axis=1) | np.any(lo >= clip_hi - eps, axis=1))
            inside_clip = np.all(lo >= clip_lo - eps, axis=1) & np.all(hi <= clip_hi + eps, axis=1)
        else:
            inside_clip = np.ones(len(frontier), dtype=bool)
        dist = np.where(keep, domain.dist_boxes_to_boundary(lo, hi), 0.0)
        center_in = np.zeros(len(frontier), dtype=bool)
        center_in[keep] = domain.contains(0.5 * (lo[keep] + hi[keep]))
        keep &= ~((dist > 0.0) & ~center_in)  # entirely outside the open set
        accept = keep & inside_clip & (dist >= tau * side) & center_in
        rest = keep & ~accept
        for m in np.where(accept)[0]:
            cubes.append(Cube(level, tuple(int(v) for v in frontier[m]), base))
            dists.append(float(dist[m]))
        if side / 2.0 >= min_side * (1.0 - 1e-12):
            parents = frontier[rest]
            frontier = (2 * parents[:, None, :] + offsets[None, :, :]).reshape(-1, d)
            level += 1
        else:
            dropped += int(np.sum(rest))
            dropped_vol += float(np.sum(rest)) * side**d
            frontier = np.empty((0, d), dtype=np.int64)
    if not cubes:
        raise ValueError("covering is empty; domain may have empty interior")
    order = sorted(range(len(cubes)), key=lambda m: (cubes[m].level,) + cubes[m].index)
    cubes = [cubes[i] for i in order]
    dists = [dists[i] for i in order]
    return Covering(domain, cubes, dists, C_W, tau, min_side, base, dropped, dropped_vol,
                    clip_box=(clip_lo, clip_hi) if clip else None)


# ---------------------------------------------------------------------------
# axiom checks


def check_w2(cov: Covering) -> bool:
    """Pairwise disjoint interiors: no dyadic ancestor/descendant pairs."""
    for c in cov.cubes:
        idx = c.index
        for up in range(1, c.level + 1):
            anc = (c.level - up, tuple(v >> up for v in idx))
            if anc in cov.pos_of:
                return False
    return True


def check_w4(cov: Covering):
    lo_ok = cov.dists >= cov.C_W * cov.sides
    hi_ok = cov.dists <= 4.0 * cov.C_W * cov.sides
    return bool(np.all(lo_ok & hi_ok)), int(np.sum(~(lo_ok & hi_ok)))


def check_w5(cov: Covering):
    """Neighbor side ratio <= 2, i.e. |level difference| <= 1."""
    adj = cov.neighbors()
    worst = 0
    for i, nbrs in enumerate(adj):
        for k in nbrs:
            worst = max(worst, abs(int(cov.levels[i]) - int(cov.levels[k])))
    return worst <= 1, worst


def check_w6(cov: Covering, dilation: float = 10.0):
    """Superposition of dilated cubes at all cube centers.

    Returns (per_scale_max, total_max): the per-scale count is the W6
    quantity with a depth-free bound; the total across scales necessarily
    grows with the number of levels and is reported, not asserted.
    """
    pts = cov.centers
    half = 0.5 * dilation
    per_scale = 0
    total = np.zeros(len(pts), dtype=int)
    for lev in np.unique(cov.levels):
        sel = cov.levels == lev
        c = cov.centers[sel]
        s = cov.sides[sel][0]
        cnt = np.zeros(len(pts), dtype=int)
        for start in range(0, len(c), 512):
            blk = c[start : start + 512]
            inside = np.all(np.abs(pts[:, None, :] - blk[None, :, :]) <= half * s, axis=2)
            cnt += inside.sum(axis=1)
        per_scale = max(per_scale, int(cnt.max()))
        total += cnt
    return per_scale, int(total.max())


def check_w7(oc: "OrientedCovering", n_lines: int = 64):
    """Max number of same-side cubes in one window meeting a vertical line."""
    worst = 0
    for k, win in enumerate(oc.windows):
        members = oc.window_members[k]
        if not members:
            continue
        t_int = oc._horizontal_intervals(members, k)
        lines = np.linspace(-oc.R / 2, oc.R / 2, n_lines)
        levels = oc.cov.levels[members]
        for lev in np.unique(levels):
            sel = levels == lev
            t0 = t_int[sel, 0][:, None]
            t1 = t_int[sel, 1][:, None]
            cnt = np.sum((t0 < lines[None, :]) & (lines[None, :] < t1), axis=0)
            worst = max(worst, int(cnt.max()))
    return worst


def coverage_audit(cov: Covering, margin: float = 8.0, n_samples: int = 4096, seed: int = 0):
    """W3 audit: cube volume vs domain volume, and point coverage of the
    region {dist > margin * min_side}."""
    vol = cov.volume()
    try:
        target = cov.domain.area()
    except NotImplementedError:
        target = float("nan")
    rng = np.random.default_rng(seed)
    if cov.clip_box is not None:
        lo, hi = cov.clip_box
    else:
        lo, hi = cov.domain.bounding_box()
    pts = rng.uniform(lo, hi, size=(n_samples, cov.dim))
    inside = cov.domain.contains(pts)
    deep = cov.domain.dist_to_boundary(pts) > margin * cov.min_side
    test = pts[inside & deep]
    covered = np.zeros(len(test), dtype=bool)
    # locate each point's dyadic cell per level
    for lev in np.unique(cov.levels):
        side = cov.base * 2.0 ** (-float(lev))
        idx = np.floor(test / side).astype(np.int64)
        table = {tuple(cov.indices[i]): True for i in np.where(cov.levels == lev)[0]}
        for m in range(len(test)):
            if not covered[m] and tuple(idx[m]) in table:
                covered[m] = True
    return {
        "cube_volume": vol,
        "domain_volume": target,
        "missing_volume": (target - vol) if np.isfinite(target) else float("nan"),
        "deep_points": int(len(test)),
        "uncovered_deep_points": int(np.sum(~covered)),
    }


# ---------------------------------------------------------------------------
# orientation


class OrientationError(ValueError):
    pass


class OrientedCovering:
    """Covering plus windows, central/peripheral split, fathers and chains."""

    def __init__(self, cov: Covering, windows, delta0, delta2):
        self.cov = cov
        self.windows = windows
        self.delta0 = delta0
        self.delta2 = delta2
        self.R = windows[0].side if windows else cov.domain.window_side
        self._local_cache = {}
        self._forest_cache = {}
        self._anchored_cache = {}
        self._orient()

    # geometry helpers ------------------------------------------------------

    def _corner_matrix(self):
        cov = self.cov
        d = cov.dim
        n = len(cov)
        corners = np.empty((n, 1 << d, d))
        for b, off in enumerate(itertools.product((0, 1), repeat=d)):
            off = np.asarray(off, dtype=float)
            corners[:, b, :] = cov.lo + off * cov.sides[:, None]
        return corners

    def _local_extents(self, k: int):
        """Per cube: horizontal interval(s) and vertical interval in window k."""
        if k in self._local_cache:
            return self._local_cache[k]
        win = self.windows[k]
        corners = self._corners
        n = corners.shape[0]
        flat = corners.reshape(-1, self.cov.dim)
        loc = (flat - win.center) @ win.rotation
        loc = loc.reshape(n, -1, self.cov.dim)
        t_lo = loc[:, :, :-1].min(axis=1)
        t_hi = loc[:, :, :-1].max(axis=1)
        y_lo = loc[:, :, -1].min(axis=1)
        y_hi = loc[:, :, -1].max(axis=1)
        out = (t_lo, t_hi, y_lo, y_hi)
        self._local_cache[k] = out
        return out

    def _horizontal_intervals(self, members, k):
        t_lo, t_hi, _, _ = self._local_extents(k)
        return np.stack([t_lo[members, 0], t_hi[members, 0]], axis=-1)

    def _above(self, s: int, q: int, k: int) -> bool:
        t_lo, t_hi, y_lo, y_hi = self._local_extents(k)
        tol = 1e-12 * self.R
        overlap = np.minimum(t_hi[s], t_hi[q]) - np.maximum(t_lo[s], t_lo[q])
        return bool(np.all(overlap > tol) and y_hi[s] > y_hi[q] + tol)

    def _overlap_measure(self, s: int, q: int, k: int) -> float:
        t_lo, t_hi, _, _ = self._local_extents(k)
        ov = np.minimum(t_hi[s], t_hi[q]) - np.maximum(t_lo[s], t_lo[q])
        return float(np.prod(np.maximum(ov, 0.0)))

    # orientation proper ----------------------------------------------------

    def _orient(self):
        cov = self.cov
        n = len(cov)
        self._corners = self._corner_matrix()
        dist_centers = cov.domain.dist_to_boundary(cov.centers)
        half_diam = 0.5 * math.sqrt(cov.dim) * cov.sides
        self.central = (dist_centers + half_diam) > self.delta2 * self.R
        peripheral = np.where(~self.central)[0]

        # canvas membership per window
        self.window_members = []
        self.memberships = [[] for _ in range(n)]
        assigned = np.full(n, -1, dtype=int)
        per_corners = self._corners[peripheral]
        for k, win in enumerate(self.windows):
            if len(peripheral):
                flat = per_corners.reshape(-1, cov.dim)
                loc = (flat - win.center) @ win.rotation
                loc = loc.reshape(len(peripheral), -1, cov.dim)
                ok = np.all(np.abs(loc).max(axis=1) <= self.delta0 * win.side / 2.0, axis=1)
                members = peripheral[ok]
            else:
                members = np.array([], dtype=int)
            self.window_members.append([int(m) for m in members])
            for m in members:
                self.memberships[int(m)].append(k)
                if assigned[m] < 0:
                    assigned[m] = k
        self.assigned_window = assigned
        bad = [int(i) for i in peripheral if assigned[i] < 0]
        if bad:
            raise OrientationError(
                f"{len(bad)} peripheral cube(s) fit no window canvas (first: {cov.cubes[bad[0]].key()})"
            )

        # root: largest central cube, lexicographic ties
        central_pos = np.where(self.central)[0]
        if len(central_pos) == 0:
            raise OrientationError("no central cubes; window side too large?")
        keys = sorted(central_pos, key=lambda i: (int(cov.levels[i]),) + tuple(cov.indices[i]))
        self.root = int(keys[0])

        # BFS tree over central cubes, deterministic neighbor order
        adj = cov.neighbors()
        parent = np.full(n, -1, dtype=int)
        seen = np.zeros(n, dtype=bool)
        order = [self.root]
        seen[self.root] = True
        qi = 0
        while qi < len(order):
            u = order[qi]
            qi += 1
            for v in adj[u]:
                if self.central[v] and not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    order.append(v)
        self.central_connected = bool(np.all(seen[central_pos]))
        if not self.central_connected:
            raise OrientationError("central cubes do not form a connected set")
        self.bfs_parent = parent
        self.bfs_depth = np.full(n, -1, dtype=int)
        self.bfs_depth[self.root] = 0
        for u in order[1:]:
            self.bfs_depth[u] = self.bfs_depth[parent[u]] + 1

        # successor pointers: father in the assigned window, else BFS parent
        succ = np.full(n, -1, dtype=int)
        succ[self.central] = parent[self.central]
        for k in sorted(set(int(a) for a in assigned if a >= 0)):
            group = [int(i) for i in peripheral if assigned[i] == k]
            fathers = self._batch_fathers(group, k)
            for i, f in zip(group, fathers):
                succ[i] = f
        self.succ = succ
        # guard against pointer cycles (mixed-frame pathologies)
        state = np.zeros(n, dtype=int)
        for i in range(n):
            u, trail = i, []
            while u != -1 and state[u] == 0:
                state[u] = 1
                trail.append(u)
                u = int(succ[u])
                if u != -1 and state[u] == 1:
                    raise OrientationError("father chain contains a cycle")
            for t in trail:
                state[t] = 2

        self.children = [[] for _ in range(n)]
        for i in range(n):
            if succ[i] >= 0:
                self.children[int(succ[i])].append(i)

    # fathers and forests ----------------------------------------------------

    def _batch_fathers(self, members, k: int):
        """Vertical father (position in the full covering) for each member
        cube with respect to window k: the neighbor above with maximal
        horizontal overlap, exact-float ties broken by (level, index)."""
        if not members:
            return []
        cov = self.cov
        adj = cov.neighbors()
        t_lo, t_hi, y_lo, y_hi = self._local_extents(k)
        tol = 1e-12 * self.R
        src, dst = [], []
        for m in members:
            for v in adj[m]:
                src.append(m)
                dst.append(v)
        src = np.asarray(src, dtype=int)
        dst = np.asarray(dst, dtype=int)
        ov = np.minimum(t_hi[dst], t_hi[src]) - np.maximum(t_lo[dst], t_lo[src])
        above = np.all(ov > tol, axis=1) & (y_hi[dst] > y_hi[src] + tol)
        measure = np.prod(np.maximum(ov, 0.0), axis=1)
        src_a = src[above]
        dst_a = dst[above]
        meas_a = measure[above]
        if len(src_a) == 0:
            raise OrientationError(f"no cube above any member of window {k}")
        lev = cov.levels[dst_a]
        idx = cov.indices[dst_a]
        keys = [idx[:, a] for a in range(idx.shape[1] - 1, -1, -1)] + [lev, -meas_a, src_a]
        order = np.lexsort(keys)
        src_sorted = src_a[order]
        first = np.unique(src_sorted, return_index=True)[1]
        winner = {int(src_sorted[t]): int(dst_a[order][t]) for t in first}
        out = []
        missing = [m for m in members if m not in winner]
        if missing:
            raise OrientationError(
                f"cube {cov.cubes[missing[0]].key()} has no cube above it in window {k}"
            )
        for m in members:
            out.append(winner[m])
        return out

    def father(self, i: int, k: int = None) -> int:
        """Vertical father of cube i with respect to window k."""
        if self.central[i]:
            raise ValueError("central cubes have no vertical father")
        if k is None:
            k = int(self.assigned_window[i])
        return int(self._batch_fathers([i], k)[0])

    def window_forest(self, k: int):
        """(members, father_map) of the canvas tree of window k; father_map
        maps a member to its member-father or -1 (root attached to the
        formal super-root, which carries zero mass and zero weight)."""
        if k in self._forest_cache:
            return self._forest_cache[k]
        members = self.window_members[k]
        member_set = set(members)
        fathers = self._batch_fathers(members, k)
        fmap = {m: (f if f in member_set else -1) for m, f in zip(members, fathers)}
        self._forest_cache[k] = (members, fmap)
        return members, fmap

    def shadow(self, i: int, k: int = None):
        """Positions of {P : P <= Q} in the window forest (includes Q)."""
        if k is None:
            k = int(self.assigned_window[i]) if not self.central[i] else -1
        if k < 0:
            raise ValueError("shadow requires a cube lying in a window canvas")
        members, fmap = self.window_forest(k)
        if i not in fmap:
            raise ValueError("cube is not a member of this window canvas")
        kids = {}
        for m, f in fmap.items():
            kids.setdefault(f, []).append(m)
        out = []
        stack = [i]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(kids.get(u, []))
        return sorted(out)

    # chains -----------------------------------------------------------------

    def anchored_path(self, i: int, k: int = None):
        """[Q, Q0]: ascend above-Q cubes in window k, then the BFS tree."""
        if self.central[i]:
            path = [i]
            while path[-1] != self.root:
                path.append(int(self.bfs_parent[path[-1]]))
            return path
        if k is None:
            k = int(self.assigned_window[i])
        ck = (i, k)
        if ck in self._anchored_cache:
            return self._anchored_cache[ck]
        t_lo, t_hi, y_lo, y_hi = self._local_extents(k)
        tol = 1e-12 * self.R
        path = [i]
        cur = i
        guard = 0
        while not self.central[cur]:
            guard += 1
            if guard > len(self.cov):
                raise OrientationError("anchored ascent failed to reach a central cube")
            best, best_ov, best_key = -1, -1.0, None
            for v in self.cov.neighbors()[cur]:
                if not self._above(v, cur, k):
                    continue
                # prefer overlap with the anchor cube Q, then with the current
                ov_anchor = np.minimum(t_hi[v], t_hi[i]) - np.maximum(t_lo[v], t_lo[i])
                ov = float(np.prod(np.maximum(ov_anchor, 0.0)))
                if ov <= tol:
                    ov = 1e-9 * self._overlap_measure(v, cur, k)
                key = (int(self.cov.levels[v]),) + tuple(self.cov.indices[v])
                if ov > best_ov or (ov == best_ov and (best_key is None or key < best_key)):
                    best, best_ov, best_key = v, ov, key
            if best < 0:
                raise OrientationError("no cube above during anchored ascent")
            path.append(best)
            cur = best
        while path[-1] != self.root:
            path.append(int(self.bfs_parent[path[-1]]))
        self._anchored_cache[ck] = path
        return path

    def common_canvas(self, i: int, j: int):
        both = sorted(set(self.memberships[i]) & set(self.memberships[j]))
        return both[0] if both else None

    def chain(self, i: int, j: int):
        """Chain [Q, S] following the three chain-function rules."""
        if i == j:
            return [i]
        k = None
        if not self.central[i] and not self.central[j]:
            k = self.common_canvas(i, j)
        pq = self.anchored_path(i, k)
        ps = self.anchored_path(j, k)
        if j in pq:
            return pq[: pq.index(j) + 1]
        if i in ps:
            return list(reversed(ps[: ps.index(i) + 1]))
        in_ps = {p: m for m, p in enumerate(ps)}
        adj = self.cov.neighbors()
        for a, p in enumerate(pq):
            if p in in_ps:
                # paths merge at p: descend [S .. p) reversed
                return pq[: a + 1] + list(reversed(ps[: in_ps[p]]))
            hits = [in_ps[v] for v in adj[p] if v in in_ps]
            if hits:
                m = min(hits)  # first neighbor of Q_S along [S, Q0]
                return pq[: a + 1] + list(reversed(ps[: m + 1]))
        raise OrientationError("chain construction failed (disconnected covering?)")

    def chain_is_valid(self, path) -> bool:
        adj = self.cov.neighbors()
        return all(path[m + 1] in adj[path[m]] for m in range(len(path) - 1))

    # order ------------------------------------------------------------------

    def tree_depths(self):
        """Depth of each cube in the global successor tree (root = 0)."""
        n = len(self.cov)
        depth = np.full(n, -1, dtype=int)
        for i in range(n):
            trail = []
            u = i
            while u != -1 and depth[u] < 0:
                trail.append(u)
                u = int(self.succ[u])
            base = depth[u] if u != -1 else -1
            for v in reversed(trail):
                base += 1
                depth[v] = base
        return depth

    def subtree_values(self, values):
        """For each cube, sum of `values` over its global-tree descendants
        (successor pointers), including itself."""
        n = len(self.cov)
        out = np.asarray(values, dtype=float).copy()
        depth = self.tree_depths()
        order = np.argsort(-depth, kind="stable")
        for u in order:
            s = int(self.succ[u])
            if s >= 0:
                out[s] += out[u]
        return out

    def descendants(self, i: int):
        out = []
        stack = [i]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return sorted(out)


def orient(cov: Covering, windows=None, delta0: float = None, delta2: float = None) -> OrientedCovering:
    windows = windows if windows is not None else cov.domain.windows()
    delta0 = delta0 if delta0 is not None else cov.domain.delta0
    delta2 = delta2 if delta2 is not None else cov.domain.delta2
    return OrientedCovering(cov, windows, delta0, delta2)


# ---------------------------------------------------------------------------
# discrete maximal function and the summation lemmas


def maximal(oc_or_cov, g, i: int) -> float:
    """Discrete surrogate for inf_{y in Q} Mg: max over dilates rQ,
    r in {1, 2, 4, ...}, of the cube-averaged mass of g inside rQ.

    g maps position -> mass of the cube (interpreted as integral of g over
    the cube, spread uniformly)."""
    cov = oc_or_cov.cov if isinstance(oc_or_cov, OrientedCovering) else oc_or_cov
    d = cov.dim
    masses = np.array([g.get(p, 0.0) if isinstance(g, dict) else g[p] for p in range(len(cov))])
    if np.any(masses < 0):
        raise ValueError("maximal() requires nonnegative masses")
    span = float(np.max(cov.hi) - np.min(cov.lo))
    c = cov.centers[i]
    s = cov.sides[i]
    best = 0.0
    r = 1.0
    while True:
        half = 0.5 * r * s
        lo = c - half
        hi = c + half
        ov = np.maximum(np.minimum(cov.hi, hi) - np.maximum(cov.lo, lo), 0.0)
        frac = np.prod(ov, axis=1) / cov.sides**d
        avg = float(np.sum(masses * frac)) / (r * s) ** d
        best = max(best, avg)
        if r * s > 2.0 * span:
            break
        r *= 2.0
    return best


def verify_sum_lemmas(oc: OrientedCovering, a: float, b: float, eta: float, r: float, g=None,
                      max_anchor_cubes: int = 400) -> dict:
    """Ratios for the three summation lemmas (maximal bound, shadow power
    sums, long-distance power sums). Reports max/min ratios over cubes."""
    cov = oc.cov
    d = cov.dim
    n = len(cov)
    if not (a > d - 1):
        raise ValueError(f"shadow power sums require a > d-1, got a={a}")
    if not (b > a):
        raise ValueError(f"long-distance sums require b > a, got a={a}, b={b}")
    if eta <= 0:
        raise ValueError("eta must be positive")

    report = {"a": a, "b": b, "eta": eta, "r": r, "n_cubes": n}

    # shadow power sums: sum_{S<=Q} l(S)^a vs l(Q)^a over the global tree
    pow_a = cov.sides**a
    sums = oc.subtree_values(pow_a)
    ratio33 = sums / pow_a
    report["shadow_power_sum"] = {
        "max_ratio": float(ratio33.max()),
        "min_ratio": float(ratio33.min()),
    }

    # long-distance sums: sum_S l(S)^a / D(Q,S)^b vs l(Q)^(a-b)
    anchors = range(n)
    if n > max_anchor_cubes:
        step = max(1, n // max_anchor_cubes)
        anchors = range(0, n, step)
    worst, least = 0.0, float("inf")
    pow_src = cov.sides**a
    for i in anchors:
        D = oc.cov.long_distance_row(i)
        val = float(np.sum(pow_src / D**b))
        ratio = val / cov.sides[i] ** (a - b)
        worst = max(worst, ratio)
        least = min(least, ratio)
    report["long_distance_sum"] = {"max_ratio": worst, "min_ratio": least}

    # maximal-function bounds with the supplied cube masses
    if g is not None:
        masses = np.array([g.get(p, 0.0) if isinstance(g, dict) else g[p] for p in range(n)])
        anchor_list = list(anchors)
        picks = anchor_list[:: max(1, len(anchor_list) // 50)] if n > 50 else list(range(n))
        worst1 = worst2 = worst3 = 0.0
        for i in picks:
            m_inf = maximal(oc, masses, i)
            if m_inf == 0:
                continue
            D = oc.cov.long_distance_row(i)
            far = D > r
            lhs1 = float(np.sum(masses[far] / D[far] ** (d + eta)))
            worst1 = max(worst1, lhs1 * r**eta / m_inf)
            near = D < r
            lhs2 = float(np.sum(masses[near] / D[near] ** (d - eta)))
            worst2 = max(worst2, lhs2 / (m_inf * r**eta))
            desc = oc.descendants(i)
            lhs3 = float(np.sum(masses[desc])) - float(masses[i])
            worst3 = max(worst3, lhs3 / (m_inf * cov.sides[i] ** d))
        report["maximal_bound"] = {"part1_max": worst1, "part2_max": worst2, "part3_max": worst3}
    return report


# ---------------------------------------------------------------------------
# text dump / load


def dump_covering(oc: OrientedCovering, path: str):
    """One cube per line: level, index, central flag, successor id, assigned
    window, canvas memberships."""
    cov = oc.cov
    inv_members = [[] for _ in range(len(cov))]
    for k, mem in enumerate(oc.window_members):
        for m in mem:
            inv_members[m].append(k)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# whitney-covering v1 dim={cov.dim} base={cov.base!r} "
                 f"C_W={cov.C_W!r} tau={cov.tau!r} min_side={cov.min_side!r}\n")
        for i, c in enumerate(cov.cubes):
            idx = ",".join(str(v) for v in c.index)
            wins = ",".join(str(k) for k in inv_members[i]) or "-"
            fh.write(f"{c.level} {idx} {int(oc.central[i])} {int(oc.succ[i])} "
                     f"{int(oc.assigned_window[i])} {wins}\n")


def load_covering(path: str) -> dict:
    """Parse a dumped covering back into plain arrays (no domain attached)."""
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                for tok in line.split():
                    if "=" not in tok:
                        continue
                    k, v = tok.split("=")
                    meta[k] = float(v) if k != "dim" else int(v)
                continue
            if not line:
                continue
            lev, idx, central, succ, assigned, wins = line.split()
            rows.append(
                {
                    "level": int(lev),
                    "index": tuple(int(v) for v in idx.split(",")),
                    "central": bool(int(central)),
                    "succ": int(succ),
                    "assigned_window": int(assigned),
                    "windows": [] if wins == "-" else [int(v) for v in wins.split(",")],
                }
            )
    return {"meta": meta, "cubes": rows}

"""Blum medial axis extraction from sampled boundaries.

The extractor is the Voronoi diagram of the boundary samples restricted to
the relevant domain (region interior, or the exterior for the linking axis),
pruned by an object-angle criterion.  Chains carry per-sample radial data:
radius, the two radial directions, one principal radial curvature per side
(sign convention: S_rad = -proj_U(du/dv), so convex contacts give negative
values), and the medial density rho = |u . n_M|.

Chains ending in an A3 point are extended to the focal point of their
contact (the center of curvature), sampled with quadratic clustering so the
integrable blow-up of det(I - r S_rad) near the tip is resolved.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.spatial import Voronoi
from shapely.geometry import LineString, Polygon

from .errors import ParameterError, ResolutionError
from .geometry import BoundaryCurve, cross2

NODE_A3 = "A3_edge"
NODE_JUNCTION = "A1k_junction"
NODE_WALL = "wall_clip"
NODE_OPEN = "window_end"
SIDE_PLUS, SIDE_MINUS = 1, -1


@dataclass
class MedialParams:
    """Extraction knobs; defaults are calibrated for n >= 256 per boundary."""

    theta_min: float = 0.35          # object-angle pruning threshold (rad)
    eps_geom: float | None = None    # contact tolerance; default 1e-3 * diameter
    window_factor: float = 0.1       # FD window floor, in units of sample spacing
    tip_extension: bool = True
    tip_samples: int = 48
    min_component_fraction: float = 0.01


@dataclass
class SampleSet:
    """Stacked boundary samples with region bookkeeping."""

    points: np.ndarray        # (N, 2)
    region: np.ndarray        # (N,) region_id per sample
    local_idx: np.ndarray     # (N,) index within its boundary ring
    curvature: np.ndarray     # (N,) region-signed curvature
    normals: np.ndarray       # (N, 2) outward normals
    ring_size: dict
    spacing: float

    @classmethod
    def from_curves(cls, curves):
        pts = np.vstack([c.positions for c in curves])
        rid = np.concatenate([np.full(c.n, c.region_id) for c in curves])
        idx = np.concatenate([np.arange(c.n) for c in curves])
        kap = np.concatenate([c.curvature for c in curves])
        nor = np.vstack([c.normals for c in curves])
        ring = {c.region_id: c.n for c in curves}
        spacing = float(np.mean([c.mean_spacing for c in curves]))
        return cls(pts, rid, idx, kap, nor, ring, spacing)

    def are_ring_adjacent(self, a: int, b: int, k: int = 2) -> bool:
        if self.region[a] != self.region[b]:
            return False
        n = self.ring_size[int(self.region[a])]
        d = abs(int(self.local_idx[a]) - int(self.local_idx[b]))
        return min(d, n - d) <= k


@dataclass
class Node:
    position: np.ndarray
    kind: str
    degree: int


@dataclass
class Chain:
    """A maximal medial chain: vertex polyline plus per-segment samples."""

    verts: np.ndarray          # (m+1, 2)
    x: np.ndarray              # (m, 2) segment midpoints
    weight: np.ndarray         # (m,) segment lengths
    r: np.ndarray              # (m,)
    tangent: np.ndarray        # (m, 2) unit, along the walk
    u_plus: np.ndarray         # (m, 2)
    u_minus: np.ndarray        # (m, 2)
    contact_plus: np.ndarray   # (m,) global sample indices
    contact_minus: np.ndarray  # (m,)
    rho: np.ndarray            # (m,)
    kappa_plus: np.ndarray = None
    kappa_minus: np.ndarray = None
    kappa_valid: np.ndarray = None
    eta_plus: np.ndarray = None
    eta_minus: np.ndarray = None
    node_start: int = -1
    node_end: int = -1
    is_loop: bool = False

    @property
    def m(self) -> int:
        return len(self.x)

    @property
    def length(self) -> float:
        return float(self.weight.sum())

    def arclengths(self) -> np.ndarray:
        s = np.concatenate([[0.0], np.cumsum(self.weight)])
        return s[1:] - 0.5 * self.weight

    def region_pair(self, samples: SampleSet):
        a = int(samples.region[self.contact_plus[0]])
        b = int(samples.region[self.contact_minus[0]])
        return (a, b)


@dataclass
class MedialGraph:
    """Stratified medial curve network of one region (or of the exterior)."""

    owner: int
    chains: list
    nodes: list
    samples: SampleSet
    params: MedialParams

    @property
    def total_length(self) -> float:
        return float(sum(c.length for c in self.chains))

    def node_kinds(self):
        return [n.kind for n in self.nodes]

    def junctions(self):
        return [n for n in self.nodes if n.kind.startswith(NODE_JUNCTION)]

    def a3_tips(self):
        return [n for n in self.nodes if n.kind == NODE_A3]

    def segment_soup(self):
        """All chain segments as ((S,2,2) array, chain index, segment index)."""
        segs, ci, si = [], [], []
        for k, c in enumerate(self.chains):
            a = c.verts[:-1]
            b = c.verts[1:]
            segs.append(np.stack([a, b], axis=1))
            ci.append(np.full(c.m, k))
            si.append(np.arange(c.m))
        if not segs:
            return np.zeros((0, 2, 2)), np.zeros(0, int), np.zeros(0, int)
        return np.concatenate(segs), np.concatenate(ci), np.concatenate(si)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _ridge_subtended_angle(V, vstar, p, q):
    d1, d2 = p - V[vstar], q - V[vstar]
    c = np.dot(d1, d2) / (np.linalg.norm(d1) * np.linalg.norm(d2) + 1e-300)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def _infinite_ridge_dir(points, center, pi, qi):
    """Outward direction of an unbounded Voronoi ridge (standard construction)."""
    t = points[qi] - points[pi]
    t = t / (np.linalg.norm(t) + 1e-300)
    nrm = np.array([-t[1], t[0]])
    mid = 0.5 * (points[pi] + points[qi])
    if np.dot(mid - center, nrm) < 0:
        nrm = -nrm
    return nrm


def _clip_segment_to_polygon(p1, p2, poly: Polygon):
    """Longest inside sub-segment of p1-p2; returns (a, b) or None."""
    inter = LineString([p1, p2]).intersection(poly)
    if inter.is_empty:
        return None
    best = None
    parts = getattr(inter, "geoms", [inter])
    for g in parts:
        if g.geom_type != "LineString" or g.length < 1e-12:
            continue
        if best is None or g.length > best.length:
            best = g
    if best is None:
        return None
    a, b = np.asarray(best.coords[0]), np.asarray(best.coords[-1])
    # keep original orientation
    if np.dot(b - a, np.asarray(p2) - np.asarray(p1)) < 0:
        a, b = b, a
    return a, b


def build_skeleton(samples: SampleSet, inside_fn, *, owner: int,
                   params: MedialParams, exterior: bool = False,
                   clip_polygon: Polygon | None = None,
                   window=None) -> MedialGraph:
    """Shared Voronoi-skeleton builder.

    inside_fn: vectorized predicate for "point is in the domain".
    exterior: keep different-region ridges unconditionally (conflict set),
    and flip the curvature sign used for tip extension.
    window: ((2,) lo, (2,) hi) box used to terminate unbounded ridges when
    there is no clip polygon.
    """
    pts = samples.points
    vor = Voronoi(pts)
    V = vor.vertices
    ok = inside_fn(V) if len(V) else np.zeros(0, bool)
    center = pts.mean(axis=0)

    if clip_polygon is None and window is not None:
        lo, hi = window
        clip_box = Polygon([(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])])
    else:
        clip_box = None
    domain_poly = clip_polygon if clip_polygon is not None else clip_box

    # synthetic vertices appended past the Voronoi ones for clip endpoints
    extra_verts = []
    ridges = []   # (a_idx, b_idx, pi, qi, a_is_wall, b_is_wall)

    def add_extra(pt):
        extra_verts.append(np.asarray(pt, float))
        return len(V) + len(extra_verts) - 1

    for (pi, qi), (v1, v2) in zip(vor.ridge_points, vor.ridge_vertices):
        same_region = samples.region[pi] == samples.region[qi]
        if v1 >= 0 and v2 >= 0:
            in1, in2 = bool(ok[v1]), bool(ok[v2])
            if in1 and in2:
                ridges.append((v1, v2, pi, qi, False, False))
            elif (in1 or in2) and domain_poly is not None and not same_region:
                # real conflict-set piece leaving the domain: clip at the wall
                a, b = (v1, v2) if in1 else (v2, v1)
                clipped = _clip_segment_to_polygon(V[a], V[b], domain_poly)
                if clipped is not None:
                    w = add_extra(clipped[1])
                    ridges.append((a, w, pi, qi, False, True))
        elif (v1 >= 0) != (v2 >= 0) and domain_poly is not None and not same_region:
            a = v1 if v1 >= 0 else v2
            if not ok[a]:
                continue
            d = _infinite_ridge_dir(pts, center, pi, qi)
            span = 4.0 * max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1])) + 1.0
            far = V[a] + span * d
            clipped = _clip_segment_to_polygon(V[a], far, domain_poly)
            if clipped is not None and np.linalg.norm(clipped[1] - V[a]) > 1e-12:
                w = add_extra(clipped[1])
                ridges.append((a, w, pi, qi, False, True))

    all_verts = np.vstack([V, np.array(extra_verts)]) if extra_verts else V

    # object-angle pruning (min over real Voronoi endpoints)
    kept = []
    for (a, b, pi, qi, aw, bw) in ridges:
        if np.linalg.norm(all_verts[a] - all_verts[b]) < 1e-12:
            continue
        if exterior and samples.region[pi] != samples.region[qi]:
            # different-region ridges are real conflict-set strata
            kept.append((a, b, pi, qi, aw, bw))
            continue
        angs = []
        for v, is_wall in ((a, aw), (b, bw)):
            if not is_wall:
                angs.append(_ridge_subtended_angle(all_verts, v, pts[pi], pts[qi]))
        if angs and min(angs) >= params.theta_min:
            kept.append((a, b, pi, qi, aw, bw))

    graph = _chains_from_ridges(all_verts, kept, samples, params,
                                owner=owner, exterior=exterior)
    if params.tip_extension:
        _extend_tips(graph, exterior=exterior)
    _finalize_fields(graph)
    return graph


def _chains_from_ridges(V, kept, samples, params, *, owner, exterior):
    adj = defaultdict(list)
    wall_vertex = set()
    for e, (a, b, pi, qi, aw, bw) in enumerate(kept):
        adj[a].append((b, e))
        adj[b].append((a, e))
        if aw:
            wall_vertex.add(a)
        if bw:
            wall_vertex.add(b)
    deg = {v: len(lst) for v, lst in adj.items()}

    # connected components by total length
    comp_of = {}
    comps = []
    for v0 in adj:
        if v0 in comp_of:
            continue
        stack, comp = [v0], set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            comp_of[v] = len(comps)
            stack.extend(w for w, _ in adj[v] if w not in comp)
        comps.append(comp)
    lengths = np.zeros(len(comps))
    for (a, b, *_rest) in kept:
        lengths[comp_of[a]] += np.linalg.norm(V[a] - V[b])
    total = lengths.sum()
    keep_comp = set(np.nonzero(lengths >= params.min_component_fraction * total)[0]) \
        if total > 0 else set()
    if not exterior and len(keep_comp) > 1:
        raise ResolutionError(
            f"medial axis of region {owner} split into {len(keep_comp)} components; "
            "increase the boundary sample count or lower theta_min")

    visited = set()
    chains_raw = []   # list of (vertex ids, edge ids)

    def walk(start, e0, nxt0):
        vs, es = [start], [e0]
        visited.add(e0)
        cur, nxt = start, nxt0
        while True:
            vs.append(nxt)
            if deg[nxt] != 2 or nxt == vs[0]:
                break
            (w1, e1), (w2, e2) = adj[nxt]
            nxt_e = e1 if e1 not in visited else e2
            if nxt_e in visited:
                break
            visited.add(nxt_e)
            es.append(nxt_e)
            nxt = w1 if e1 == nxt_e else w2
        return vs, es

    order = sorted(adj, key=lambda v: (deg[v] == 2, v))
    for v0 in order:
        if comp_of[v0] not in keep_comp:
            continue
        if deg[v0] == 2 and all(e in visited for _, e in adj[v0]):
            continue
        if deg[v0] != 2:
            for (w, e) in adj[v0]:
                if e not in visited:
                    chains_raw.append(walk(v0, e, w))
    # leftover pure loops
    for v0 in order:
        if comp_of[v0] in keep_comp:
            for (w, e) in adj[v0]:
                if e not in visited:
                    chains_raw.append(walk(v0, e, w))

    nodes = []
    node_id = {}

    def get_node(v, fallback_kind):
        if v in node_id:
            return node_id[v]
        kind = NODE_WALL if v in wall_vertex else fallback_kind
        if kind is None:
            d = deg[v]
            if d == 1:
                kind = NODE_A3
            elif d >= 3:
                kind = f"{NODE_JUNCTION}({d})"
            else:
                kind = "interior"
        nodes.append(Node(position=V[v].copy(), kind=kind, degree=deg[v]))
        node_id[v] = len(nodes) - 1
        return node_id[v]

    pts = samples.points
    chains = []
    for vs, es in chains_raw:
        verts = V[np.array(vs)]
        m = len(es)
        x = 0.5 * (verts[:-1] + verts[1:])
        seg = verts[1:] - verts[:-1]
        w = np.linalg.norm(seg, axis=1)
        t = seg / w[:, None]
        up, um = np.empty((m, 2)), np.empty((m, 2))
        cp, cm = np.empty(m, int), np.empty(m, int)
        r = np.empty(m)
        for k, e in enumerate(es):
            a, b, pi, qi, aw, bw = kept[e]
            d1, d2 = pts[pi] - x[k], pts[qi] - x[k]
            r1, r2 = np.linalg.norm(d1), np.linalg.norm(d2)
            u1, u2 = d1 / r1, d2 / r2
            c1, c2 = pi, qi
            s = cross2(t[k], u1)
            if abs(s) < 1e-12 and k > 0:
                if np.dot(u1, up[k - 1]) < np.dot(u2, up[k - 1]):
                    u1, u2, c1, c2 = u2, u1, c2, c1
            elif s < 0:
                u1, u2, c1, c2 = u2, u1, c2, c1
            up[k], um[k], cp[k], cm[k] = u1, u2, c1, c2
            r[k] = 0.5 * (r1 + r2)
        rho = np.abs(cross2(t, up))
        is_loop = vs[0] == vs[-1]
        c = Chain(verts=verts, x=x, weight=w, r=r, tangent=t,
                  u_plus=up, u_minus=um, contact_plus=cp, contact_minus=cm,
                  rho=rho, is_loop=is_loop)
        if not is_loop:
            c.node_start = get_node(vs[0], None)
            c.node_end = get_node(vs[-1], None)
        chains.append(c)

    return MedialGraph(owner=owner, chains=chains, nodes=nodes,
                       samples=samples, params=params)


# ---------------------------------------------------------------------------
# A3 tip extension
# ---------------------------------------------------------------------------

def _tip_by_curvature_max(E, t_out, samples: SampleSet, sign: float):
    """A3 point for the chain end at E: center of the osculating circle at the
    local curvature maximum among boundary samples near the end's contact.
    """
    pts = samples.points
    d_all = np.linalg.norm(pts - E, axis=1)
    j0 = int(np.argmin(d_all))
    r0 = float(d_all[j0])
    region = int(samples.region[j0])
    n_ring = samples.ring_size[region]
    base = j0 - int(samples.local_idx[j0])
    span = max(4, int(np.ceil(3.0 * r0 / samples.spacing)))
    cand = [base + (int(samples.local_idx[j0]) + o) % n_ring
            for o in range(-span, span + 1)]
    k_eff = sign * samples.curvature[cand]
    jbest = cand[int(np.argmax(k_eff))]
    k_star = sign * samples.curvature[jbest]
    if k_star <= 1e-9:
        return None
    T = pts[jbest] - samples.normals[jbest] / samples.curvature[jbest]
    d = T - E
    L = float(np.linalg.norm(d))
    if L < 1e-12 or L > 1.5 * r0 or np.dot(d / L, t_out) < 0.0:
        return None
    return T


def _extension_rows(E, T, samples: SampleSet, m_ext: int):
    """Sample the straight extension E -> T, clustered quadratically at T."""
    pts = samples.points
    L = np.linalg.norm(T - E)
    tl = (T - E) / L
    # steps shrink quadratically toward T, where the fields are singular
    k = np.arange(1, m_ext + 1)
    fr = 1.0 - ((m_ext - k) / m_ext) ** 2
    verts = np.vstack([E[None, :], E + np.outer(fr, T - E)])
    mids = 0.5 * (verts[:-1] + verts[1:])
    w = np.linalg.norm(verts[1:] - verts[:-1], axis=1)
    m = len(mids)
    up, um = np.empty((m, 2)), np.empty((m, 2))
    cp, cm = np.empty(m, int), np.empty(m, int)
    r = np.empty(m)
    for k, xk in enumerate(mids):
        dist = np.linalg.norm(pts - xk, axis=1)
        jstar = int(np.argmin(dist))
        n_ring = samples.ring_size[int(samples.region[jstar])]
        base = jstar - int(samples.local_idx[jstar])
        best = {}
        for sgn in (1, -1):
            cand = [(dist[base + (int(samples.local_idx[jstar]) + sgn * o) % n_ring],
                     base + (int(samples.local_idx[jstar]) + sgn * o) % n_ring)
                    for o in range(0, 9)]
            # offset 0 allowed on one side only; resolve below
            best[sgn] = min(cand[1:])
        jp, jm = best[1][1], best[-1][1]
        d1, d2 = pts[jp] - xk, pts[jm] - xk
        r1, r2 = np.linalg.norm(d1), np.linalg.norm(d2)
        u1, u2, c1, c2 = d1 / r1, d2 / r2, jp, jm
        if cross2(tl, u1) < 0:
            u1, u2, c1, c2 = u2, u1, c2, c1
        up[k], um[k], cp[k], cm[k] = u1, u2, c1, c2
        r[k] = dist[jstar]
    rho = np.abs(cross2(np.broadcast_to(tl, (m, 2)), up))
    return verts, mids, w, r, np.broadcast_to(tl, (m, 2)).copy(), up, um, cp, cm, rho


def _extend_tips(graph: MedialGraph, *, exterior: bool):
    sign = -1.0 if exterior else 1.0
    m_ext = graph.params.tip_samples
    for c in graph.chains:
        if c.is_loop or c.m == 0:
            continue
        for end in ("start", "end"):
            node_idx = c.node_start if end == "start" else c.node_end
            if node_idx < 0 or graph.nodes[node_idx].kind != NODE_A3:
                continue
            if end == "start":
                E = c.verts[0]
                t_out = E - c.x[0]
            else:
                E = c.verts[-1]
                t_out = E - c.x[-1]
            nrm = np.linalg.norm(t_out)
            if nrm < 1e-14:
                continue
            t_out = t_out / nrm
            T = _tip_by_curvature_max(E, t_out, graph.samples, sign)
            if T is None or np.linalg.norm(T - E) < 1e-10:
                continue
            verts, mids, w, r, tl, up, um, cp, cm, rho = _extension_rows(
                E, T, graph.samples, m_ext)
            if end == "start":
                # prepend reversed (tip -> E): flip tangents, swap sides
                c.verts = np.vstack([verts[::-1], c.verts[1:]])
                c.x = np.vstack([mids[::-1], c.x])
                c.weight = np.concatenate([w[::-1], c.weight])
                c.r = np.concatenate([r[::-1], c.r])
                c.tangent = np.vstack([-tl[::-1], c.tangent])
                c.u_plus = np.vstack([um[::-1], c.u_plus])
                c.u_minus = np.vstack([up[::-1], c.u_minus])
                c.contact_plus = np.concatenate([cm[::-1], c.contact_plus])
                c.contact_minus = np.concatenate([cp[::-1], c.contact_minus])
                c.rho = np.concatenate([rho[::-1], c.rho])
                graph.nodes[node_idx].position = T.copy()
            else:
                c.verts = np.vstack([c.verts[:-1], verts])
                c.x = np.vstack([c.x, mids])
                c.weight = np.concatenate([c.weight, w])
                c.r = np.concatenate([c.r, r])
                c.tangent = np.vstack([c.tangent, tl])
                c.u_plus = np.vstack([c.u_plus, up])
                c.u_minus = np.vstack([c.u_minus, um])
                c.contact_plus = np.concatenate([c.contact_plus, cp])
                c.contact_minus = np.concatenate([c.contact_minus, cm])
                c.rho = np.concatenate([c.rho, rho])
                graph.nodes[node_idx].position = T.copy()


# ---------------------------------------------------------------------------
# differential fields along chains
# ---------------------------------------------------------------------------

def _windowed_secant(vals, sm, weights, i, floor):
    m = len(sm)
    # shrink the window near chain ends so tip blow-ups stay resolved
    d_end = min(sm[i] - sm[0], sm[-1] - sm[i])
    delta = 2.0 * max(weights[i], min(floor, 0.5 * d_end))
    j0 = i
    while j0 > 0 and sm[i] - sm[j0] < delta:
        j0 -= 1
    j1 = i
    while j1 < m - 1 and sm[j1] - sm[i] < delta:
        j1 += 1
    ds = sm[j1] - sm[j0]
    if ds <= 0 or j0 == j1:
        return None
    return (vals[j1] - vals[j0]) / ds


def _finalize_fields(graph: MedialGraph):
    floor = graph.params.window_factor * graph.samples.spacing
    for c in graph.chains:
        m = c.m
        kp = np.full(m, 0.0)
        km = np.full(m, 0.0)
        ep = np.full(m, np.nan)
        em = np.full(m, np.nan)
        valid = np.zeros(m, bool)
        if m == 0:
            c.kappa_plus, c.kappa_minus, c.kappa_valid = kp, km, valid
            c.eta_plus, c.eta_minus = ep, em
            continue
        sm = c.arclengths()
        for i in range(m):
            dup = _windowed_secant(c.u_plus, sm, c.weight, i, floor)
            dum = _windowed_secant(c.u_minus, sm, c.weight, i, floor)
            drs = _windowed_secant(c.r, sm, c.weight, i, floor)
            if dup is None or dum is None:
                continue
            t, u1, u2 = c.tangent[i], c.u_plus[i], c.u_minus[i]
            d1, d2 = cross2(t, u1), cross2(t, u2)
            if abs(d1) < 1e-9 or abs(d2) < 1e-9:
                continue
            # du/ds = alpha * t + beta * u ; S_rad(t) = -alpha
            kp[i] = -cross2(dup, u1) / d1
            km[i] = -cross2(dum, u2) / d2
            valid[i] = True
            if drs is not None:
                ep[i] = drs + float(np.dot(u1, t))
                em[i] = drs + float(np.dot(u2, t))
        c.kappa_plus, c.kappa_minus, c.kappa_valid = kp, km, valid
        c.eta_plus, c.eta_minus = ep, em


# ---------------------------------------------------------------------------
# public per-region API
# ---------------------------------------------------------------------------

def compute_medial_axis(region: BoundaryCurve,
                        params: MedialParams | None = None) -> MedialGraph:
    """Blum medial axis of one region from its sampled boundary."""
    params = params or MedialParams()
    samples = SampleSet.from_curves([region])
    poly = region.polygon()
    if not poly.is_valid:
        raise ParameterError("region polygon is invalid")

    def inside(P):
        if len(P) == 0:
            return np.zeros(0, bool)
        return shapely.contains_xy(poly, P[:, 0], P[:, 1])

    graph = build_skeleton(samples, inside, owner=region.region_id,
                           params=params, exterior=False)
    if not graph.chains:
        raise ResolutionError(
            f"no medial chains survived pruning for region {region.region_id}")
    return graph


def classify_strata(graph: MedialGraph) -> MedialGraph:
    """Assign node labels from degree (A3 tips, A1^k junctions)."""
    for node in graph.nodes:
        if node.kind in (NODE_WALL, NODE_OPEN):
            continue
        if node.degree == 1:
            node.kind = NODE_A3
        elif node.degree >= 3:
            node.kind = f"{NODE_JUNCTION}({node.degree})"
    return graph


@dataclass
class DoubledMedial:
    """Flat per-sheet view of a MedialGraph (two sheets per interior sample)."""

    graph: MedialGraph
    region_id: np.ndarray
    chain: np.ndarray
    index: np.ndarray      # sample index within chain
    side: np.ndarray       # +1 / -1
    x: np.ndarray
    r: np.ndarray
    u: np.ndarray
    contact: np.ndarray    # global sample index into graph.samples
    kappa: np.ndarray
    kappa_valid: np.ndarray
    rho: np.ndarray
    weight: np.ndarray

    @property
    def n_sheets(self) -> int:
        return len(self.r)


def build_double(graph: MedialGraph) -> DoubledMedial:
    rows = {k: [] for k in ("chain", "index", "side", "x", "r", "u", "contact",
                            "kappa", "kappa_valid", "rho", "weight")}
    for k, c in enumerate(graph.chains):
        for side in (SIDE_PLUS, SIDE_MINUS):
            u = c.u_plus if side == SIDE_PLUS else c.u_minus
            kap = c.kappa_plus if side == SIDE_PLUS else c.kappa_minus
            con = c.contact_plus if side == SIDE_PLUS else c.contact_minus
            rows["chain"].append(np.full(c.m, k))
            rows["index"].append(np.arange(c.m))
            rows["side"].append(np.full(c.m, side))
            rows["x"].append(c.x)
            rows["r"].append(c.r)
            rows["u"].append(u)
            rows["contact"].append(con)
            rows["kappa"].append(kap)
            rows["kappa_valid"].append(c.kappa_valid)
            rows["rho"].append(c.rho)
            rows["weight"].append(c.weight)
    cat = {k: (np.concatenate(v) if v else np.zeros((0,))) for k, v in rows.items()}
    if len(graph.chains):
        cat["x"] = np.vstack(rows["x"])
        cat["u"] = np.vstack(rows["u"])
    else:
        cat["x"] = np.zeros((0, 2))
        cat["u"] = np.zeros((0, 2))
    rid = np.full(len(cat["r"]), graph.owner)
    return DoubledMedial(graph=graph, region_id=rid,
                         chain=cat["chain"].astype(int),
                         index=cat["index"].astype(int),
                         side=cat["side"].astype(int), x=cat["x"], r=cat["r"],
                         u=cat["u"], contact=cat["contact"].astype(int),
                         kappa=cat["kappa"],
                         kappa_valid=cat["kappa_valid"].astype(bool),
                         rho=cat["rho"], weight=cat["weight"])


def radial_curvature(graph: MedialGraph, chain: int, index: int, side: int) -> float:
    """Principal radial curvature of one sample side (NaN-free; see kappa_valid)."""
    c = graph.chains[chain]
    return float((c.kappa_plus if side == SIDE_PLUS else c.kappa_minus)[index])


def contact_curvature_estimate(graph: MedialGraph, chain: int, index: int,
                               side: int) -> float:
    """kappa_r predicted from the contact's boundary curvature.

    Uses kappa_r = kB / (1 + r kB) with kB the radial-convention boundary
    curvature at the contact (negative where the region is convex).
    """
    c = graph.chains[chain]
    con = (c.contact_plus if side == SIDE_PLUS else c.contact_minus)[index]
    k_geom = graph.samples.curvature[con]
    kB = -k_geom
    r = c.r[index]
    denom = 1.0 + r * kB
    if abs(denom) < 1e-12:
        return float("inf")
    return float(kB / denom)


@dataclass
class SkeletalReport:
    radial_violations: list
    max_eta: float
    n_samples: int
    n_kappa_invalid: int

    @property
    def ok(self) -> bool:
        return not self.radial_violations


def check_skeletal_conditions(graph: MedialGraph, *, eta_rho_floor: float = 0.05,
                              slack: float = 1e-9) -> SkeletalReport:
    """Radial curvature condition r < 1/kappa (positive kappa) and max |eta_U|.

    The compatibility residual is reported over samples with rho above a
    small floor; A3 limits have rho -> 0 and legitimately noisy eta.
    """
    violations = []
    max_eta = 0.0
    n_samples = 0
    n_invalid = 0
    for k, c in enumerate(graph.chains):
        n_samples += c.m
        n_invalid += int((~c.kappa_valid).sum())
        for side, kap, eta in ((SIDE_PLUS, c.kappa_plus, c.eta_plus),
                               (SIDE_MINUS, c.kappa_minus, c.eta_minus)):
            pos = c.kappa_valid & (kap > 0)
            bad = pos & (c.r * kap >= 1.0 + slack)
            for i in np.nonzero(bad)[0]:
                violations.append((k, int(i), side, float(c.r[i]), float(kap[i])))
            mask = c.kappa_valid & (c.rho > eta_rho_floor) & ~np.isnan(eta)
            if mask.any():
                max_eta = max(max_eta, float(np.abs(eta[mask]).max()))
    return SkeletalReport(radial_violations=violations, max_eta=max_eta,
                          n_samples=n_samples, n_kappa_invalid=n_invalid)

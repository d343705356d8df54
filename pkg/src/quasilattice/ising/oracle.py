"""Exact evaluators for finite Ising spin graphs.

Three independent routes: brute-force enumeration of all states, a
transfer-matrix sweep over layered graphs, and the Kac-Ward determinant for
planar graphs at zero field. Energies are -beta H = sum beta J s s' + B sum s.
Spins listed in a graph's ``boundary`` are held at +1 (for even observables
this equals the infinite-coupling boundary chain used by Kac-Ward).
"""

import collections
import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from ..errors import TooLarge

BRUTE_MAX_SPINS = 24
TRANSFER_MAX_STATE = 22


@dataclass(frozen=True)
class OracleResult:
    log_z: float
    free_energy: float        # -log Z per spin
    pair_correlation: float
    magnetization: float      # <s> at the first spin of the pair
    method: str


def _fields(graph, field):
    """Free-spin index map, local fields h and free-free edges after fixing the boundary at +1."""
    n = graph.n_spins
    fixed = np.zeros(n, dtype=bool)
    fixed[graph.boundary] = True
    free = np.flatnonzero(~fixed)
    local = -np.ones(n, dtype=int)
    local[free] = np.arange(len(free))
    h = np.full(len(free), float(field))
    const = 0.0
    keep = []
    for (a, b), j in zip(graph.edges, graph.couplings):
        if fixed[a] and fixed[b]:
            const += j
        elif fixed[a]:
            h[local[b]] += j
        elif fixed[b]:
            h[local[a]] += j
        else:
            keep.append((local[a], local[b], j))
    return free, local, h, keep, const


def _spin_value(local, site, configs):
    """Column of spin values for ``site`` (fixed spins are +1)."""
    if local[site] < 0:
        return np.ones(len(configs))
    return configs[:, local[site]]


def brute_force(graph, pair, field=0.0):
    """Enumerate all 2^N states of the free spins."""
    free, local, h, edges, const = _fields(graph, field)
    if len(free) > BRUTE_MAX_SPINS:
        raise TooLarge(f"{len(free)} free spins exceed the enumeration cap of {BRUTE_MAX_SPINS}")
    configs = np.array(list(itertools.product((1.0, -1.0), repeat=len(free)))).reshape(-1, len(free))
    energy = configs @ h + const
    for a, b, j in edges:
        energy += j * configs[:, a] * configs[:, b]
    shift = energy.max()
    w = np.exp(energy - shift)
    z = w.sum()
    sa = _spin_value(local, pair[0], configs)
    sb = _spin_value(local, pair[1], configs)
    log_z = math.log(z) + shift
    return OracleResult(log_z, -log_z / graph.n_spins, float((w * sa * sb).sum() / z),
                        float((w * sa).sum() / z), "brute-force")


def _sweep(n_free, layers, h, edges, insert, log_const):
    """log of the sum over states of exp(energy) * prod_{s in insert} s, by layer sweep.

    Returns (log|sum|, sign).
    """
    order = np.lexsort((np.arange(n_free), layers))
    rank = np.empty(n_free, dtype=int)
    rank[order] = np.arange(n_free)
    nbrs = collections.defaultdict(list)
    for a, b, j in edges:
        nbrs[a].append((b, j))
        nbrs[b].append((a, j))
    last_use = rank.copy()
    for a, b, _ in edges:
        last_use[a] = max(last_use[a], rank[b])
        last_use[b] = max(last_use[b], rank[a])
    insert = set(insert)
    psi = np.ones(())
    active = []
    log_scale = log_const
    pm = np.array([1.0, -1.0])
    for step, s in enumerate(order):
        local = np.exp(h[s] * pm)
        if s in insert:
            local = local * pm
        psi = psi[..., None] * local
        active.append(s)
        nd = len(active)
        if nd > TRANSFER_MAX_STATE:
            raise TooLarge(f"transfer state of {nd} spins exceeds the cap of {TRANSFER_MAX_STATE}")
        for t, j in nbrs[s]:
            if rank[t] < step or (rank[t] == step and t != s):
                ax = active.index(t)
                f = np.exp(j * np.outer(pm, pm))
                shape = [1] * nd
                shape[ax] = 2
                shape[-1] = 2
                psi = psi * f.reshape(shape)
        done = [ax for ax, t in enumerate(active) if last_use[t] <= step]
        if done:
            psi = psi.sum(axis=tuple(done))
            active = [t for ax, t in enumerate(active) if ax not in done]
        m = np.abs(psi).max()
        if m > 0:
            psi = psi / m
            log_scale += math.log(m)
    total = float(psi.sum())
    if total == 0.0:
        return -math.inf, 0.0
    return log_scale + math.log(abs(total)), math.copysign(1.0, total)


def transfer_matrix(graph, pair, field=0.0):
    """Exact sums by sweeping spins layer by layer (graph.layers must be set)."""
    if graph.layers is None:
        raise ValueError("transfer_matrix needs a layered graph")
    free, local, h, edges, const = _fields(graph, field)
    layers = np.asarray(graph.layers)[free]
    for a, b, _ in edges:
        if abs(layers[a] - layers[b]) > 1:
            raise ValueError("couplings must join equal or adjacent layers")
    ins = lambda sites: [local[s] for s in sites if local[s] >= 0]
    log_z, _ = _sweep(len(free), layers, h, edges, [], const)
    a, b = pair
    pair_sites = [a, b] if a != b else []
    log_ab, sign_ab = _sweep(len(free), layers, h, edges, ins(pair_sites), const)
    log_a, sign_a = _sweep(len(free), layers, h, edges, ins([a]), const)
    return OracleResult(log_z, -log_z / graph.n_spins, sign_ab * math.exp(log_ab - log_z),
                        sign_a * math.exp(log_a - log_z), "transfer-matrix")


def oracle_enumerate(graph, pair, field=0.0):
    """Exact partition function, free energy, pair correlation and magnetization.

    Brute force up to 24 free spins, the transfer-matrix sweep above that.
    """
    if graph.n_free <= BRUTE_MAX_SPINS:
        return brute_force(graph, pair, field)
    return transfer_matrix(graph, pair, field)


class KacWard:
    """Kac-Ward determinant of a planar spin graph at zero field.

    det(I - Lambda) equals the square of the even-subgraph generating function
    in t = tanh(beta J); boundary spins are joined by a rigid chain (t = 1).
    The factorization is reused for every pair correlation.
    """

    def __init__(self, graph):
        pos = np.asarray(graph.positions)
        edges = [tuple(e) for e in np.asarray(graph.edges)]
        t = list(np.tanh(graph.couplings))
        bnd = list(np.asarray(graph.boundary))
        if len(bnd) > 1:
            known = {frozenset(e): i for i, e in enumerate(edges)}
            for a, b in zip(bnd, bnd[1:] + bnd[:1]):
                # an existing edge becomes rigid; a parallel copy would break planarity
                if frozenset((a, b)) in known:
                    t[known[frozenset((a, b))]] = 1.0
                else:
                    edges.append((a, b))
                    t.append(1.0)
        self.edges = np.array(edges, dtype=int).reshape(-1, 2)
        self.t = np.array(t, dtype=float)
        n_e = len(self.edges)
        tail = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        head = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        self.edge_of = np.concatenate([np.arange(n_e), np.arange(n_e)])
        vec = pos[head] - pos[tail]
        out = collections.defaultdict(list)
        for d, a in enumerate(tail):
            out[a].append(d)
        rows, cols, phase = [], [], []
        for d in range(2 * n_e):
            rev = d + n_e if d < n_e else d - n_e
            for d2 in out[head[d]]:
                if d2 == rev:
                    continue
                rows.append(d)
                cols.append(d2)
                phase.append(np.exp(0.5j * np.angle(vec[d2] / vec[d])))
        n = 2 * n_e
        self.P = sp.csr_matrix((phase, (rows, cols)), shape=(n, n))
        weights = self.t[self.edge_of]
        M = sp.identity(n, dtype=complex, format="csc") - sp.diags(weights) @ self.P.tocsc()
        self.lu = spl.splu(M.tocsc())
        self.logdet = float(np.sum(np.log(np.abs(self.lu.U.diagonal()))))
        self.n_edges = n_e
        self._adj = collections.defaultdict(list)
        for e, (a, b) in enumerate(self.edges):
            if self.t[e] != 0.0:
                self._adj[a].append((b, e))
                self._adj[b].append((a, e))

    def path(self, a, b):
        """Edge ids of a shortest path from a to b (breadth first)."""
        prev = {a: None}
        queue = collections.deque([a])
        while queue:
            x = queue.popleft()
            if x == b:
                break
            for y, e in self._adj[x]:
                if y not in prev:
                    prev[y] = (x, e)
                    queue.append(y)
        if b not in prev:
            raise ValueError("spins are not connected")
        out, x = [], b
        while prev[x] is not None:
            x, e = prev[x]
            out.append(e)
        return out

    def pair_correlation(self, a, b, path=None):
        """<s_a s_b> = prod_path t * sqrt(det ratio with t -> 1/t on the path)."""
        if a == b:
            return 1.0
        p = self.path(a, b) if path is None else list(path)
        t = self.t[p]
        if np.any(t == 0):
            raise ValueError("path crosses a decoupled edge")
        n_e = self.n_edges
        drows = np.concatenate([np.asarray(p), np.asarray(p) + n_e])
        delta = np.concatenate([1.0 / t - t, 1.0 / t - t])
        # M' = M - E diag(delta) P[drows]; det(M')/det(M) = det(I - diag(delta) P[drows] M^-1 E)
        E = np.zeros((self.P.shape[0], len(drows)), dtype=complex)
        E[drows, np.arange(len(drows))] = 1.0
        X = self.lu.solve(E)
        S = np.eye(len(drows)) - delta[:, None] * (self.P[drows] @ X)
        ratio = abs(np.linalg.det(S))
        return float(np.prod(t) * math.sqrt(ratio))


def kac_ward_correlation(graph, a, b):
    return KacWard(graph).pair_correlation(a, b)

"""Toric-code decoders for point-like syndromes.

Every decoder works on the 1-skeleton of a cell complex: syndromes are
0-chains, corrections are 1-chains with ``d_1 rho = sigma``. Decoders are
bound to a lattice once (precomputing graph data) and then decode single
syndromes or batches given as 0/1 arrays.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import networkx as nx
import numba
import numpy as np
import pymatching

from .complexes import CellComplex, Chain

__all__ = [
    "DecoderError",
    "DecoderUnavailable",
    "TcDecoder",
    "MWPMDecoder",
    "UnionFindDecoder",
    "SweepDecoder",
    "Matching",
    "REGISTRY",
    "register",
    "make_decoder",
    "available_decoders",
    "mwpm_decode",
    "mwpm_matching",
    "uf_decode",
    "check_conformance",
    "component_parity_ok",
]


class DecoderError(ValueError):
    """Input rejected by a decoder (for instance an unmatched excitation)."""


class DecoderUnavailable(NotImplementedError):
    """No implementation exists for the requested decoder or excitation type."""


def _graph_arrays(cx: CellComplex) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edge endpoints plus CSR adjacency ``(ptr, (neighbor, edge))`` sorted by neighbor id."""
    E = cx.edges
    n = cx.n_cells(0)
    src = np.concatenate([E[:, 0], E[:, 1]])
    dst = np.concatenate([E[:, 1], E[:, 0]])
    eid = np.concatenate([np.arange(len(E)), np.arange(len(E))])
    order = np.lexsort((eid, dst, src))
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    ptr = np.cumsum(ptr)
    adj = np.stack([dst[order], eid[order]], axis=1).astype(np.int64)
    return E.astype(np.int64), ptr, adj


def _components(cx: CellComplex) -> np.ndarray:
    import scipy.sparse.csgraph as csg
    import scipy.sparse as sp

    E = cx.edges
    n = cx.n_cells(0)
    g = sp.coo_matrix((np.ones(len(E)), (E[:, 0], E[:, 1])), shape=(n, n))
    return csg.connected_components(g, directed=False)[1]


def component_parity_ok(labels: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Per-row flag: every connected component holds an even number of excitations."""
    S = np.atleast_2d(S)
    ncomp = labels.max() + 1
    if ncomp == 1:
        return S.sum(axis=1) % 2 == 0
    counts = np.zeros((S.shape[0], ncomp), dtype=np.int64)
    for c in range(ncomp):
        counts[:, c] = S[:, labels == c].sum(axis=1)
    return np.all(counts % 2 == 0, axis=1)


class TcDecoder:
    """Common interface: bind to a lattice, then ``decode`` or ``decode_batch``.

    Subclasses implement ``_decode_batch`` on validated ``uint8`` arrays.
    """

    name = "abstract"
    supported_k: tuple[int, ...] = (1,)

    def __init__(self, lattice: CellComplex, k: int = 1):
        if k not in self.supported_k:
            raise DecoderUnavailable(f"decoder {self.name!r} does not handle k={k} excitations")
        self.lattice = lattice
        self.k = k
        self._labels = _components(lattice)

    def decode(self, syndrome: Chain) -> Chain:
        s = syndrome.to_array(self.lattice.n_cells(0))
        return Chain.from_array(1, self.decode_batch(s[None, :])[0])

    def decode_batch(self, S: np.ndarray) -> np.ndarray:
        S = np.atleast_2d(np.asarray(S, dtype=np.uint8))
        if S.shape[1] != self.lattice.n_cells(0):
            raise ValueError(f"syndrome length {S.shape[1]} != {self.lattice.n_cells(0)} vertices")
        if not np.all(component_parity_ok(self._labels, S)):
            raise DecoderError("unmatched excitation: odd syndrome in a connected component")
        return self._decode_batch(S)

    def _decode_batch(self, S: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass
class Matching:
    """A perfect matching of excitations with one shortest path per pair."""

    pairs: list[tuple[int, int]]
    paths: list[Chain]
    weight: int

    @property
    def correction(self) -> Chain:
        out = Chain(1)
        for p in self.paths:
            out = out + p
        return out


def _bfs(cx_adj: tuple[np.ndarray, np.ndarray], source: int) -> tuple[np.ndarray, np.ndarray]:
    """Distances and parent edges from ``source``; neighbors visited in increasing id."""
    ptr, adj = cx_adj
    n = len(ptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    pedge = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for w, e in adj[ptr[u] : ptr[u + 1]]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                pedge[w] = e
                q.append(w)
    return dist, pedge


def _path(edges: np.ndarray, pedge: np.ndarray, source: int, target: int) -> Chain:
    out = []
    v = target
    while v != source:
        e = pedge[v]
        out.append(int(e))
        a, b = edges[e]
        v = a if b == v else b
    return Chain(1, out)


class MWPMDecoder(TcDecoder):
    """Exact minimum-weight perfect matching under graph distance.

    Batches go through PyMatching's sparse blossom. ``matching`` runs an
    independent blossom (networkx) on the complete graph of excitations
    with BFS distances, and reports the pairs and paths.
    """

    name = "mwpm"

    def __init__(self, lattice: CellComplex, k: int = 1):
        super().__init__(lattice, k)
        self._pm = pymatching.Matching.from_check_matrix(lattice.boundary_matrix(1))
        self._edges, ptr, adj = _graph_arrays(lattice)
        self._adj = (ptr, adj)

    def _decode_batch(self, S: np.ndarray) -> np.ndarray:
        if not S.any():
            return np.zeros((S.shape[0], self.lattice.n_cells(1)), dtype=np.uint8)
        return self._pm.decode_batch(S).astype(np.uint8)

    def matching(self, syndrome: Chain) -> Matching:
        verts = sorted(syndrome.cells)
        if len(verts) % 2:
            raise DecoderError("unmatched excitation: odd number of excitations")
        bfs = {v: _bfs(self._adj, v) for v in verts}
        G = nx.Graph()
        for a, b in itertools.combinations(verts, 2):
            w = bfs[a][0][b]
            if w < 0:
                raise DecoderError("unmatched excitation: vertices in different components")
            G.add_edge(a, b, weight=int(w))
        pairs = sorted(tuple(sorted(p)) for p in nx.min_weight_matching(G)) if verts else []
        paths = [_path(self._edges, bfs[a][1], a, b) for a, b in pairs]
        return Matching(pairs, paths, int(sum(len(p) for p in paths)))


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True)
def _uf_single(n, edges, ptr, adj, syn, out, weighted):
    m = edges.shape[0]
    parent = np.arange(n)
    size = np.ones(n, np.int64)
    parity = syn.astype(np.int64)
    nxt = np.full(n, -1, np.int64)
    tail = np.arange(n)
    support = np.zeros(m, np.int8)
    stamp = np.full(m, -1, np.int64)
    add = np.zeros(m, np.int8)
    touched = np.empty(m, np.int64)
    fusion = np.empty(m, np.int64)
    saturated = np.zeros(n, np.bool_)
    odd = np.flatnonzero(syn).astype(np.int64)
    n_odd = odd.shape[0]
    rounds = 0
    while n_odd > 0:
        rounds += 1
        if rounds > 2 * m + n + 8:
            return False
        nt = 0
        smallest = n + 1
        for i in range(n_odd):
            smallest = min(smallest, size[odd[i]])
        for i in range(n_odd):
            r = odd[i]
            # weighted growth: only the smallest odd clusters grow this round
            if weighted and size[r] > smallest:
                continue
            u = r
            while u != -1:
                if not saturated[u]:
                    open_edge = False
                    for j in range(ptr[u], ptr[u + 1]):
                        e = adj[j, 1]
                        if support[e] >= 2:
                            continue
                        open_edge = True
                        if stamp[e] == rounds * n + r:
                            continue
                        stamp[e] = rounds * n + r
                        if add[e] == 0:
                            touched[nt] = e
                            nt += 1
                        add[e] += 1
                    if not open_edge:
                        saturated[u] = True
                u = nxt[u]
        nf = 0
        for i in range(nt):
            e = touched[i]
            s = support[e] + add[e]
            add[e] = 0
            if s >= 2:
                s = 2
                fusion[nf] = e
                nf += 1
            support[e] = s
        for i in range(nf):
            e = fusion[i]
            a = _find(parent, edges[e, 0])
            b = _find(parent, edges[e, 1])
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
            parity[a] ^= parity[b]
            nxt[tail[a]] = b
            tail[a] = tail[b]
        k = 0
        for i in range(n_odd):
            r = _find(parent, odd[i])
            if parity[r] == 1:
                dup = False
                for j in range(k):
                    if odd[j] == r:
                        dup = True
                        break
                if not dup:
                    odd[k] = r
                    k += 1
        n_odd = k

    # peeling on a spanning forest of the grown edges
    flag = syn.astype(np.int8)
    seen = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    pedge = np.full(n, -1, np.int64)
    pvert = np.full(n, -1, np.int64)
    for s0 in range(n):
        if seen[s0] or flag[s0] == 0:
            continue
        seen[s0] = True
        head = 0
        cnt = 1
        order[0] = s0
        while head < cnt:
            u = order[head]
            head += 1
            for j in range(ptr[u], ptr[u + 1]):
                w = adj[j, 0]
                e = adj[j, 1]
                if support[e] == 2 and not seen[w]:
                    seen[w] = True
                    pedge[w] = e
                    pvert[w] = u
                    order[cnt] = w
                    cnt += 1
        for i in range(cnt - 1, 0, -1):
            u = order[i]
            if flag[u]:
                out[pedge[u]] ^= 1
                flag[u] = 0
                flag[pvert[u]] ^= 1
        if flag[s0]:
            return False
    return True


@numba.njit(cache=True)
def _uf_batch(n, edges, ptr, adj, S, out, weighted):
    ok = np.ones(S.shape[0], np.bool_)
    for b in range(S.shape[0]):
        if S[b].any():
            ok[b] = _uf_single(n, edges, ptr, adj, S[b], out[b], weighted)
    return ok


class UnionFindDecoder(TcDecoder):
    """Union-Find decoder: half-edge cluster growth, weighted union with
    path compression, then peeling of a spanning forest of grown edges.

    Parameters
    ----------
    lattice : CellComplex
    k : int
    growth : {"weighted", "uniform"}
        ``"weighted"`` grows only the smallest odd clusters in each round;
        ``"uniform"`` grows every odd cluster. Weighted growth has the
        higher threshold.
    """

    name = "uf"

    def __init__(self, lattice: CellComplex, k: int = 1, growth: str = "weighted"):
        super().__init__(lattice, k)
        if growth not in ("weighted", "uniform"):
            raise ValueError(f"growth must be 'weighted' or 'uniform', got {growth!r}")
        self.growth = growth
        self._edges, self._ptr, self._adj = _graph_arrays(lattice)

    def _decode_batch(self, S: np.ndarray) -> np.ndarray:
        out = np.zeros((S.shape[0], self.lattice.n_cells(1)), dtype=np.uint8)
        ok = _uf_batch(self.lattice.n_cells(0), self._edges, self._ptr, self._adj, S, out, self.growth == "weighted")
        if not ok.all():
            raise DecoderError("union-find left an odd cluster")
        return out


class SweepDecoder(TcDecoder):
    """Placeholder for loop-like (k >= 2) syndromes; no implementation."""

    name = "sweep"
    supported_k = (2,)

    def __init__(self, lattice: CellComplex, k: int = 2):
        raise DecoderUnavailable("decoder unavailable: no loop-syndrome (sweep) decoder is implemented")


REGISTRY: dict[str, type[TcDecoder]] = {}


def register(cls: type[TcDecoder]) -> type[TcDecoder]:
    REGISTRY[cls.name] = cls
    return cls


for _cls in (MWPMDecoder, UnionFindDecoder, SweepDecoder):
    register(_cls)


def available_decoders() -> list[str]:
    return sorted(REGISTRY)


def make_decoder(name: str, lattice: CellComplex, k: int = 1) -> TcDecoder:
    try:
        cls = REGISTRY[name]
    except KeyError:
        raise DecoderUnavailable(f"unknown decoder {name!r}; known: {available_decoders()}") from None
    return cls(lattice, k)


def mwpm_decode(lattice: CellComplex, syndrome: Chain, k: int = 1) -> Chain:
    return MWPMDecoder(lattice, k).decode(syndrome)


def mwpm_matching(lattice: CellComplex, syndrome: Chain) -> Matching:
    return MWPMDecoder(lattice).matching(syndrome)


def uf_decode(lattice: CellComplex, syndrome: Chain, k: int = 1) -> Chain:
    return UnionFindDecoder(lattice, k).decode(syndrome)


def check_conformance(decoder: TcDecoder, trials: int = 200, p: float = 0.1, seed: int = 0) -> list[str]:
    """Run random valid syndromes through ``decoder``; list every violation of ``d rho = sigma``."""
    lat = decoder.lattice
    rng = np.random.default_rng(seed)
    D1 = lat.boundary_matrix(1)
    E = (rng.random((trials, lat.n_cells(1))) < p).astype(np.uint8)
    S = ((E.astype(np.int64) @ D1.T.astype(np.int64)) & 1).astype(np.uint8)
    problems = []
    try:
        R = decoder.decode_batch(S)
    except Exception as exc:  # conformance reports, never raises
        return [f"{decoder.name}: raised {type(exc).__name__}: {exc}"]
    R = np.asarray(R)
    if R.shape != E.shape:
        return [f"{decoder.name}: output shape {R.shape} != {E.shape}"]
    bad = np.flatnonzero(np.any(((R.astype(np.int64) @ D1.T.astype(np.int64)) & 1) != S, axis=1))
    for t in bad[:10]:
        problems.append(f"{decoder.name}: trial {t} (seed {seed}) correction boundary != syndrome")
    if len(bad) > 10:
        problems.append(f"{decoder.name}: {len(bad) - 10} more failing trials")
    return problems

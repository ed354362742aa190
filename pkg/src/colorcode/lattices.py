"""Periodic lattices: the two colexes and the toric-code reference lattices.

Coordinate conventions (``L`` is the linear size, periodic in every direction):

* ``square_octagon`` -- octagons of the 4.8.8 tiling sit at integer points
  ``(i, j)``, squares at ``(i + 1/2, j + 1/2)``. The colex is the dual
  triangulation: one vertex per face, one triangle per 4.8.8 vertex. Squares
  are colored R, octagons G or B by checkerboard parity, so both R-containing
  restricted lattices are 2-square lattices. ``2 L^2`` vertices, ``4 L^2``
  triangles.
* ``bcc`` -- cubic sublattice A at integer points (R/G by parity) and
  sublattice B at half-integer points (B/Y by parity); tetrahedra join every
  A-edge with the four edges of its dual B-plaquette. ``2 L^3`` vertices,
  ``12 L^3`` tetrahedra.

Both colexes need even ``L`` for the periodic coloring and ``L >= 4`` so that
no two edges join the same pair of vertices.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .complexes import CellComplex, Colex

__all__ = [
    "Family",
    "LatticeSpec",
    "COLEX_FAMILIES",
    "TORIC_FAMILIES",
    "build",
    "build_colex",
    "build_toric_lattice",
    "square_octagon_colex",
    "bcc_colex",
    "square_toric",
    "two_square_toric",
    "cubic_toric",
    "diamond_toric",
    "three_quarter_bcc",
    "incidence_graph",
    "is_isomorphic",
]


class Family(str, enum.Enum):
    square_octagon_colex = "square_octagon_colex"
    bcc_colex = "bcc_colex"
    square_toric = "square_toric"
    two_square_toric = "two_square_toric"
    cubic_toric = "cubic_toric"
    diamond_toric = "diamond_toric"
    three_quarter_bcc = "three_quarter_bcc"

    @classmethod
    def parse(cls, name: "str | Family") -> "Family":
        """Accept a family value or one of its short aliases."""
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("-", "_")
        if key in _ALIASES:
            return _ALIASES[key]
        try:
            return cls(key)
        except ValueError:
            known = sorted({f.value for f in cls} | set(_ALIASES))
            raise ValueError(f"unknown lattice family {name!r}; known: {', '.join(known)}") from None


COLEX_FAMILIES = frozenset({Family.square_octagon_colex, Family.bcc_colex})
TORIC_FAMILIES = frozenset(Family) - COLEX_FAMILIES

_ALIASES = {
    "square_octagon": Family.square_octagon_colex,
    "sqoct": Family.square_octagon_colex,
    "bcc": Family.bcc_colex,
    "square": Family.square_toric,
    "two_square": Family.two_square_toric,
    "2square": Family.two_square_toric,
    "cubic": Family.cubic_toric,
    "diamond": Family.diamond_toric,
    "3/4bcc": Family.three_quarter_bcc,
    "three_quarter": Family.three_quarter_bcc,
    "2d_sqoct": Family.square_octagon_colex,
}


@dataclass(frozen=True)
class LatticeSpec:
    family: Family
    L: int

    def __post_init__(self):
        fam = self.family
        if isinstance(fam, str) and not isinstance(fam, Family):
            fam = Family.parse(fam)
            object.__setattr__(self, "family", fam)
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L}")
        need_even = fam in COLEX_FAMILIES | {
            Family.two_square_toric,
            Family.diamond_toric,
            Family.three_quarter_bcc,
        }
        if need_even and self.L % 2:
            raise ValueError(f"{fam.value} needs even L for a periodic coloring, got L={self.L}")
        if need_even and self.L < 4:
            raise ValueError(f"{fam.value} needs L >= 4 to be a simplicial torus, got L={self.L}")

    @property
    def is_colex(self) -> bool:
        return self.family in COLEX_FAMILIES


def square_octagon_colex(L: int) -> Colex:
    LatticeSpec(Family.square_octagon_colex, L)
    i, j = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    i, j = i.ravel(), j.ravel()

    def octagon(a, b):
        return (a % L) * L + (b % L)

    square = L * L + i * L + j
    o00, o10 = octagon(i, j), octagon(i + 1, j)
    o11, o01 = octagon(i + 1, j + 1), octagon(i, j + 1)
    top = np.concatenate(
        [
            np.stack([square, o00, o10], axis=1),
            np.stack([square, o10, o11], axis=1),
            np.stack([square, o11, o01], axis=1),
            np.stack([square, o01, o00], axis=1),
        ]
    )
    colors = np.empty(2 * L * L, dtype=np.int64)
    colors[: L * L] = 1 + (i + j) % 2  # octagons: G on even sites, B on odd
    colors[L * L :] = 0  # squares: R
    return Colex(top, colors, name=f"square_octagon_colex(L={L})")


def _bcc_sites(L: int):
    x, y, z = (a.ravel() for a in np.meshgrid(*(np.arange(L),) * 3, indexing="ij"))

    def a_id(x, y, z):
        return ((x % L) * L + (y % L)) * L + (z % L)

    def b_id(x, y, z):
        return L**3 + a_id(x, y, z)

    return x, y, z, a_id, b_id


def _bcc_tetrahedra(L: int) -> np.ndarray:
    x, y, z, a_id, b_id = _bcc_sites(L)
    pos = np.stack([x, y, z])
    tets = []
    for mu in range(3):
        nu, la = [a for a in range(3) if a != mu]
        step = np.zeros((3, 1), dtype=np.int64)
        step[mu] = 1
        a0 = a_id(*pos)
        a1 = a_id(*(pos + step))
        # B sites at the dual plaquette: offsets 0/-1 along nu and la
        corners = []
        for s_nu, s_la in [(0, 0), (-1, 0), (-1, -1), (0, -1)]:
            off = np.zeros((3, 1), dtype=np.int64)
            off[nu], off[la] = s_nu, s_la
            corners.append(b_id(*(pos + off)))
        for c in range(4):
            tets.append(np.stack([a0, a1, corners[c], corners[(c + 1) % 4]], axis=1))
    return np.concatenate(tets)


def bcc_colex(L: int) -> Colex:
    LatticeSpec(Family.bcc_colex, L)
    x, y, z, _, _ = _bcc_sites(L)
    parity = (x + y + z) % 2
    colors = np.concatenate([parity, 2 + parity])  # A: R/G, B: B/Y
    return Colex(_bcc_tetrahedra(L), colors, name=f"bcc_colex(L={L})")


def _from_cells(counts, boundary_lists, name) -> CellComplex:
    mats = {}
    for k, lists in boundary_lists.items():
        rows = np.concatenate([np.asarray(b, dtype=np.int64) for b in lists])
        cols = np.repeat(np.arange(len(lists)), [len(b) for b in lists])
        m = sp.coo_matrix((np.ones(len(rows), np.int64), (rows, cols)), shape=(counts[k - 1], counts[k]))
        mats[k] = m.tocsr()
    return CellComplex(counts, mats, name=name)


def square_toric(L: int) -> CellComplex:
    LatticeSpec(Family.square_toric, L)

    def v(i, j):
        return (i % L) * L + (j % L)

    def h(i, j):
        return 2 * v(i, j)

    def w(i, j):
        return 2 * v(i, j) + 1

    edges, faces = [None] * (2 * L * L), []
    for i in range(L):
        for j in range(L):
            edges[h(i, j)] = [v(i, j), v(i + 1, j)]
            edges[w(i, j)] = [v(i, j), v(i, j + 1)]
            faces.append([h(i, j), h(i, j + 1), w(i, j), w(i + 1, j)])
    return _from_cells([L * L, 2 * L * L, L * L], {1: edges, 2: faces}, f"square_toric(L={L})")


def two_square_toric(L: int) -> CellComplex:
    """Square lattice (on the even sublattice of a ``L x L`` grid) with every edge subdivided."""
    LatticeSpec(Family.two_square_toric, L)
    even = [(i, j) for i in range(L) for j in range(L) if (i + j) % 2 == 0]
    coarse = {p: n for n, p in enumerate(even)}
    nc = len(even)

    def mid(i, j):
        return nc + (i % L) * L + (j % L)

    def c(i, j):
        return coarse[(i % L, j % L)]

    edges: list[list[int]] = []
    cell_edges: dict[tuple[int, int], list[int]] = {}
    for i in range(L):
        for j in range(L):
            if (i + j) % 2 == 0:
                ends = [c(i, j), c(i + 1, j + 1)]
            else:
                ends = [c(i + 1, j), c(i, j + 1)]
            cell_edges[(i, j)] = []
            for e in ends:
                cell_edges[(i, j)].append(len(edges))
                edges.append([mid(i, j), e])
    faces = []
    for i in range(L):
        for j in range(L):
            if (i + j) % 2 == 1:
                ring = []
                for di, dj in [(-1, -1), (0, -1), (-1, 0), (0, 0)]:
                    ring += cell_edges[((i + di) % L, (j + dj) % L)]
                faces.append(ring)
    counts = [nc + L * L, len(edges), len(faces)]
    return _from_cells(counts, {1: edges, 2: faces}, f"two_square_toric(L={L})")


def cubic_toric(L: int) -> CellComplex:
    LatticeSpec(Family.cubic_toric, L)
    N = L**3

    def v(p):
        return ((p[0] % L) * L + (p[1] % L)) * L + (p[2] % L)

    def e(p, mu):
        return 3 * v(p) + mu

    unit = np.eye(3, dtype=np.int64)
    edges = [None] * (3 * N)
    faces = []
    for p in itertools.product(range(L), repeat=3):
        p = np.array(p)
        for mu in range(3):
            edges[e(p, mu)] = [v(p), v(p + unit[mu])]
        for mu, nu in [(0, 1), (0, 2), (1, 2)]:
            faces.append([e(p, mu), e(p + unit[nu], mu), e(p, nu), e(p + unit[mu], nu)])
    return _from_cells([N, 3 * N, 3 * N], {1: edges, 2: faces}, f"cubic_toric(L={L})")


def diamond_toric(L: int) -> CellComplex:
    """Diamond cubic lattice: 4-valent vertices, hexagonal rings as faces."""
    LatticeSpec(Family.diamond_toric, L)
    ids: dict[tuple, int] = {}
    for p in itertools.product(range(L), repeat=3):
        if sum(p) % 2 == 0:
            ids[("a",) + p] = len(ids)
    for p in itertools.product(range(L), repeat=3):
        if sum(p) % 2 == 0:
            ids[("b",) + p] = len(ids)
    edge_of: dict[frozenset, int] = {}
    edges = []
    adj: dict[int, list[int]] = {n: [] for n in ids.values()}
    for p in itertools.product(range(L), repeat=3):
        if sum(p) % 2:
            continue
        for delta in [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]:
            q = tuple((p[k] - delta[k]) % L for k in range(3))
            a, b = ids[("a",) + p], ids[("b",) + q]
            edge_of[frozenset((a, b))] = len(edges)
            edges.append([a, b])
            adj[a].append(b)
            adj[b].append(a)
    faces = sorted(_rings(adj, edge_of, 6))
    return _from_cells([len(ids), len(edges), len(faces)], {1: edges, 2: faces}, f"diamond_toric(L={L})")


def _rings(adj, edge_of, length) -> set[tuple[int, ...]]:
    """All simple cycles of the given length, as sorted edge tuples."""
    found = set()

    def walk(path):
        u = path[-1]
        for w in adj[u]:
            if len(path) == length and w == path[0]:
                cyc = path + [path[0]]
                found.add(tuple(sorted(edge_of[frozenset(cyc[t : t + 2])] for t in range(length))))
            elif w not in path and len(path) < length and w > path[0]:
                walk(path + [w])

    for s in adj:
        walk([s])
    return found


def three_quarter_bcc(L: int) -> CellComplex:
    """The bcc triangulation with one color class of B sites carved out.

    Each removed site leaves a polyhedral hole whose boundary (the 24 triangles
    opposite it) becomes a 3-cell.
    """
    LatticeSpec(Family.three_quarter_bcc, L)
    x, y, z, _, _ = _bcc_sites(L)
    removed = np.concatenate([np.zeros(L**3, bool), (x + y + z) % 2 == 1])
    tets = _bcc_tetrahedra(L)
    keep_ids = np.flatnonzero(~removed)
    relabel = -np.ones(len(removed), dtype=np.int64)
    relabel[keep_ids] = np.arange(len(keep_ids))

    tris_of_hole: dict[int, list[tuple[int, ...]]] = {}
    tri_set: set[tuple[int, ...]] = set()
    for t in tets:
        gone = [u for u in t if removed[u]]
        stay = tuple(sorted(int(relabel[u]) for u in t if not removed[u]))
        if len(gone) == 1:
            tris_of_hole.setdefault(int(gone[0]), []).append(stay)
            tri_set.add(stay)
    tris = sorted(tri_set)
    tri_id = {t: n for n, t in enumerate(tris)}
    edge_set = sorted({e for t in tris for e in itertools.combinations(t, 2)})
    edge_id = {e: n for n, e in enumerate(edge_set)}
    faces = [[edge_id[e] for e in itertools.combinations(t, 2)] for t in tris]
    volumes = [[tri_id[t] for t in tris_of_hole[h]] for h in sorted(tris_of_hole)]
    counts = [len(keep_ids), len(edge_set), len(tris), len(volumes)]
    return _from_cells(
        counts,
        {1: [list(e) for e in edge_set], 2: faces, 3: volumes},
        f"three_quarter_bcc(L={L})",
    )


_COLEX_BUILDERS = {
    Family.square_octagon_colex: square_octagon_colex,
    Family.bcc_colex: bcc_colex,
}
_TORIC_BUILDERS = {
    Family.square_toric: square_toric,
    Family.two_square_toric: two_square_toric,
    Family.cubic_toric: cubic_toric,
    Family.diamond_toric: diamond_toric,
    Family.three_quarter_bcc: three_quarter_bcc,
}


@functools.lru_cache(maxsize=32)
def _cached(spec: LatticeSpec):
    if spec.family in _COLEX_BUILDERS:
        return _COLEX_BUILDERS[spec.family](spec.L)
    return _TORIC_BUILDERS[spec.family](spec.L)


def build_colex(spec: LatticeSpec) -> Colex:
    if not spec.is_colex:
        raise ValueError(f"{spec.family.value} is not a colex family")
    return _cached(spec)


def build_toric_lattice(spec: LatticeSpec) -> CellComplex:
    if spec.is_colex:
        raise ValueError(f"{spec.family.value} is not a toric family")
    return _cached(spec)


def build(family: str | Family, L: int):
    """Build (and cache) any lattice by family name."""
    spec = LatticeSpec(family, L)
    return _cached(spec)


def incidence_graph(cx: CellComplex, top: int | None = None):
    """Hasse-style graph of a cell complex: one node per cell, edges for incidences."""
    import networkx as nx

    top = cx.dim if top is None else top
    g = nx.Graph()
    for k in range(top + 1):
        g.add_nodes_from(((k, i) for i in range(cx.n_cells(k))), dim=k)
    for k in range(1, top + 1):
        m = cx.boundary_matrix(k).tocoo()
        g.add_edges_from(((k - 1, int(r)), (k, int(c))) for r, c in zip(m.row, m.col))
    return g


def _vertex_sets(cx: CellComplex, top: int) -> list[list[frozenset]]:
    out = [[frozenset([i]) for i in range(cx.n_cells(0))]]
    for k in range(1, top + 1):
        m = cx.boundary_matrix(k).tocsc()
        prev = out[-1]
        out.append([
            frozenset().union(*(prev[r] for r in m.indices[m.indptr[j] : m.indptr[j + 1]]))
            for j in range(m.shape[1])
        ])
    return out


def isomorphic_under(a: CellComplex, b: CellComplex, vmap: np.ndarray | None = None, top: int | None = None) -> bool:
    """Whether the vertex bijection ``vmap`` (identity by default) extends to a cell isomorphism.

    Cells are matched through their vertex sets, which must be distinct
    within each dimension; the boundaries of matched cells must correspond.
    """
    top = min(a.dim, b.dim) if top is None else top
    if a.counts[: top + 1] != b.counts[: top + 1]:
        return False
    vmap = np.arange(a.n_cells(0)) if vmap is None else np.asarray(vmap)
    if sorted(vmap.tolist()) != list(range(b.n_cells(0))):
        return False
    va, vb = _vertex_sets(a, top), _vertex_sets(b, top)
    cell_map = [vmap]
    for k in range(1, top + 1):
        index_b = {s: j for j, s in enumerate(vb[k])}
        if len(index_b) != len(vb[k]) or len(set(va[k])) != len(va[k]):
            return False
        mk = np.empty(a.n_cells(k), dtype=np.int64)
        for i, s in enumerate(va[k]):
            j = index_b.get(frozenset(int(vmap[v]) for v in s))
            if j is None:
                return False
            mk[i] = j
        ma, mb = a.boundary_matrix(k).tocsc(), b.boundary_matrix(k).tocsc()
        prev = cell_map[-1]
        for i in range(a.n_cells(k)):
            fa = sorted(prev[ma.indices[ma.indptr[i] : ma.indptr[i + 1]]].tolist())
            fb = sorted(mb.indices[mb.indptr[mk[i]] : mb.indptr[mk[i] + 1]].tolist())
            if fa != fb:
                return False
        cell_map.append(mk)
    return True


def is_isomorphic(a: CellComplex, b: CellComplex, top: int | None = None) -> bool:
    """Whether two cell complexes have isomorphic incidence structure up to dimension ``top``.

    Tries the identity vertex correspondence first (exact and fast when both
    complexes come from the same coordinates), then VF2++ on the incidence
    graphs.
    """
    import networkx as nx

    top = min(a.dim, b.dim) if top is None else top
    if a.counts[: top + 1] != b.counts[: top + 1]:
        return False
    if isomorphic_under(a, b, None, top):
        return True
    ga, gb = incidence_graph(a, top), incidence_graph(b, top)
    ha = nx.weisfeiler_lehman_graph_hash(ga, node_attr="dim", iterations=4)
    hb = nx.weisfeiler_lehman_graph_hash(gb, node_attr="dim", iterations=4)
    if ha != hb:
        return False
    return nx.vf2pp_is_isomorphic(ga, gb, node_label="dim")

"""Restricted lattices and the restriction morphism onto toric-code complexes."""

from __future__ import annotations

import functools
from collections.abc import Iterable

import numpy as np
import scipy.sparse as sp

from . import gf2
from .complexes import CellComplex, Chain, Colex, color_label, colorset

__all__ = [
    "RestrictedLattice",
    "restrict",
    "pi0",
    "pi1",
    "pi2",
    "check_morphism",
    "betti_number",
    "check_homology_isomorphism",
    "check_boundary_inclusion",
]


def _selector(local_to_parent: np.ndarray, n_parent: int) -> sp.csr_matrix:
    n = len(local_to_parent)
    return sp.csr_matrix(
        (np.ones(n, dtype=np.uint8), (np.arange(n), local_to_parent)), shape=(n, n_parent)
    )


class RestrictedLattice(CellComplex):
    """The cell ``(k+1)``-complex obtained from a colex by keeping colors ``C``.

    Cells of dimension ``0..k`` are the parent simplices colored inside ``C``.
    Each ``(k+1)``-cell stands for a parent ``(d-k-1)``-simplex ``delta`` of
    the complementary color and is bounded by the ``k``-link of ``delta``.

    Attributes
    ----------
    parent_ids : list of ndarray
        ``parent_ids[i]`` maps local ``i``-cell indices to parent simplices.
    xi : ndarray
        Parent ``(d-k-1)``-simplex behind each top cell.
    pi1_table : ndarray
        For every parent ``d``-simplex, the local index of its ``C``-colored
        ``k``-face.
    """

    def __init__(self, parent: Colex, C: Iterable[int] | str, k: int):
        C = colorset(C)
        d = parent.dim
        if not 1 <= k < d:
            raise ValueError(f"need 1 <= k < d, got k={k}, d={d}")
        if len(C) != k + 1:
            raise ValueError(f"a restricted lattice of type k={k} needs |C|={k + 1}, got {sorted(C)}")
        if not C <= set(range(d + 1)):
            raise ValueError(f"colors {sorted(C)} outside 0..{d}")
        self.parent = parent
        self.C = C
        self.k = k
        self.complement = frozenset(range(d + 1)) - C

        self.parent_ids = [parent.cells_with_colors(i, C, exact=False) for i in range(k + 1)]
        self.to_local = []
        for i in range(k + 1):
            t = np.full(parent.n_cells(i), -1, dtype=np.int64)
            t[self.parent_ids[i]] = np.arange(len(self.parent_ids[i]))
            self.to_local.append(t)

        # C-colored k-face of every top simplex
        tops = parent.simplices[d]
        order = np.argsort(parent.colors[tops], axis=1, kind="stable")
        by_color = np.take_along_axis(tops, order, axis=1)
        face = parent.index_of(by_color[:, sorted(C)])
        self.pi1_table = self.to_local[k][face]

        self.xi = parent.cells_with_colors(d - k - 1, self.complement, exact=True)
        self.pi2_table = np.full(parent.n_cells(d - k - 1), -1, dtype=np.int64)
        self.pi2_table[self.xi] = np.arange(len(self.xi))

        star = parent.generalized_boundary_matrix(d - k - 1, d)[:, self.xi].tocsc()
        rows, cols = [], []
        for j in range(len(self.xi)):
            tops_j = star.indices[star.indptr[j] : star.indptr[j + 1]]
            rows.append(self.pi1_table[tops_j])
            cols.append(np.full(len(tops_j), j))
        top_bnd = sp.coo_matrix(
            (np.ones(sum(map(len, rows)), np.int64), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(self.parent_ids[k]), len(self.xi)),
        )

        counts = [len(p) for p in self.parent_ids] + [len(self.xi)]
        bnd = {}
        for i in range(1, k + 1):
            bnd[i] = parent.boundary_matrix(i)[self.parent_ids[i - 1]][:, self.parent_ids[i]]
        bnd[k + 1] = top_bnd.tocsr()
        super().__init__(counts, bnd, name=f"{parent.name}|{color_label(C)}")

        self.P0 = _selector(self.parent_ids[k - 1], parent.n_cells(k - 1))
        self.P1 = sp.csr_matrix(
            (np.ones(parent.n_cells(d), np.uint8), (self.pi1_table, np.arange(parent.n_cells(d)))),
            shape=(counts[k], parent.n_cells(d)),
        )
        self.P2 = _selector(self.xi, parent.n_cells(d - k - 1))

    @property
    def label(self) -> str:
        return color_label(self.C)

    def pi0(self, mu: Chain) -> Chain:
        """Keep the ``(k-1)``-simplices colored inside ``C``, in local indices."""
        if mu.cells and mu.dim != self.k - 1:
            raise ValueError(f"pi0 takes {self.k - 1}-chains")
        loc = self.to_local[self.k - 1][list(mu.cells)] if mu.cells else np.array([], int)
        return Chain(self.k - 1, loc[loc >= 0])

    def pi1(self, delta: Chain) -> Chain:
        """Send every top simplex to its ``C``-colored ``k``-face (summed mod 2)."""
        if delta.cells and delta.dim != self.parent.dim:
            raise ValueError(f"pi1 takes {self.parent.dim}-chains")
        faces = self.pi1_table[list(delta.cells)] if delta.cells else np.array([], int)
        vals, cnt = np.unique(faces, return_counts=True)
        return Chain(self.k, vals[cnt % 2 == 1])

    def pi2(self, nu: Chain) -> Chain:
        d, k = self.parent.dim, self.k
        if nu.cells and nu.dim != d - k - 1:
            raise ValueError(f"pi2 takes {d - k - 1}-chains")
        loc = self.pi2_table[list(nu.cells)] if nu.cells else np.array([], int)
        return Chain(k + 1, loc[loc >= 0])

    def to_parent(self, chain: Chain) -> Chain:
        """Inherited cells (dimension ``<= k``) back to parent simplex indices."""
        if chain.dim > self.k:
            raise ValueError("top cells have no parent simplex")
        return Chain(chain.dim, self.parent_ids[chain.dim][list(chain.cells)])

    def from_parent(self, chain: Chain) -> Chain:
        if chain.dim > self.k:
            raise ValueError("top cells have no parent simplex")
        loc = self.to_local[chain.dim][list(chain.cells)] if chain.cells else np.array([], int)
        if np.any(loc < 0):
            raise ValueError(f"chain leaves the restricted lattice {self.label}")
        return Chain(chain.dim, loc)

    def dump(self) -> dict:
        out = super().dump()
        out["kind"] = "restricted_lattice"
        out["colors"] = self.label
        out["parent_ids"] = {str(i): p.tolist() for i, p in enumerate(self.parent_ids)}
        out["xi"] = self.xi.tolist()
        return out


@functools.lru_cache(maxsize=64)
def _restrict_cached(parent: Colex, C: frozenset, k: int) -> RestrictedLattice:
    return RestrictedLattice(parent, C, k)


def restrict(parent: Colex, C: Iterable[int] | str, k: int = 1) -> RestrictedLattice:
    """Restricted lattice ``L_C`` (cached per parent and color set)."""
    C = colorset(C)
    if len(C) != k + 1:
        raise ValueError(f"a restricted lattice of type k={k} needs |C|={k + 1}, got {sorted(C)}")
    return _restrict_cached(parent, C, k)


def pi0(rl: RestrictedLattice, mu: Chain) -> Chain:
    return rl.pi0(mu)


def pi1(rl: RestrictedLattice, delta: Chain) -> Chain:
    return rl.pi1(delta)


def pi2(rl: RestrictedLattice, nu: Chain) -> Chain:
    return rl.pi2(nu)


def _mod2(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=np.int64)
    m.data %= 2
    m.eliminate_zeros()
    return m


def check_morphism(parent: Colex, rl: RestrictedLattice) -> list[tuple[str, int]]:
    """Basis elements on which the restriction fails to commute with the boundaries.

    Returns ``("right", delta)`` for top simplices violating
    ``pi0 . d_{d,k-1} = d^C_k . pi1`` and ``("left", nu)`` for
    ``(d-k-1)``-simplices violating ``pi1 . d_{d-k-1,d} = d^C_{k+1} . pi2``.
    """
    d, k = parent.dim, rl.k
    lhs = rl.P0.astype(np.int64) @ parent.generalized_boundary_matrix(d, k - 1).astype(np.int64)
    rhs = rl.boundary_matrix(k).astype(np.int64) @ rl.P1.astype(np.int64)
    bad_right = np.unique(_mod2(lhs - rhs).tocoo().col)
    lhs = rl.P1.astype(np.int64) @ parent.generalized_boundary_matrix(d - k - 1, d).astype(np.int64)
    rhs = rl.boundary_matrix(k + 1).astype(np.int64) @ rl.P2.astype(np.int64)
    bad_left = np.unique(_mod2(lhs - rhs).tocoo().col)
    return [("right", int(c)) for c in bad_right] + [("left", int(c)) for c in bad_left]


def betti_number(cx: CellComplex, k: int) -> int:
    """``dim ker d_k - rank d_{k+1}`` by GF(2) elimination."""
    n = cx.n_cells(k)
    r_out = gf2.rank(cx.boundary_matrix(k).toarray()) if k >= 1 else 0
    r_in = gf2.rank(cx.boundary_matrix(k + 1).toarray()) if k < cx.dim else 0
    return n - r_out - r_in


def check_homology_isomorphism(parent: Colex, rl: RestrictedLattice) -> tuple[int, int]:
    """Betti numbers ``(b_k(L_C), b_k(L))``; equal when the homology groups agree."""
    return betti_number(rl, rl.k), betti_number(parent, rl.k)


def check_boundary_inclusion(parent: Colex, rl: RestrictedLattice) -> bool:
    """Whether every ``d^C_{k+1}`` column (a parent link) is a parent ``k``-boundary."""
    k = rl.k
    links = np.zeros((parent.n_cells(k), rl.n_cells(k + 1)), dtype=np.uint8)
    b = rl.boundary_matrix(k + 1).tocoo()
    links[rl.parent_ids[k][b.row], b.col] = 1
    B = parent.boundary_matrix(k + 1).toarray()
    return gf2.rank(np.hstack([B, links])) == gf2.rank(B)

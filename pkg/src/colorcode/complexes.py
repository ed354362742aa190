"""Chains, cell complexes, simplicial complexes and colexes over GF(2).

Every cell is addressed by its dimension and a dense integer index. Simplices
are identified by their sorted vertex tuple and indexed in lexicographic order
of that tuple, so identical inputs always give identical indices.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Iterator, Mapping

import numpy as np
import scipy.sparse as sp

__all__ = [
    "COLOR_NAMES",
    "colorset",
    "color_label",
    "Chain",
    "CellComplex",
    "SimplicialComplex",
    "Colex",
]

COLOR_NAMES = "RGBY"


def colorset(colors: Iterable[int | str] | str | int) -> frozenset[int]:
    """Normalise ``"RG"``, ``[0, 1]`` or ``0`` to a frozenset of color indices."""
    if isinstance(colors, (int, np.integer)):
        return frozenset([int(colors)])
    out = set()
    for c in colors:
        if isinstance(c, str):
            if c.upper() not in COLOR_NAMES:
                raise ValueError(f"unknown color {c!r}")
            out.add(COLOR_NAMES.index(c.upper()))
        else:
            out.add(int(c))
    return frozenset(out)


def color_label(colors: Iterable[int]) -> str:
    return "".join(COLOR_NAMES[c] if c < len(COLOR_NAMES) else str(c) for c in sorted(colors))


def _mask(colors: Iterable[int]) -> int:
    m = 0
    for c in colors:
        m |= 1 << int(c)
    return m


class Chain:
    """A GF(2) chain: a set of cells of one dimension.

    Addition is symmetric difference, so ``a + a`` is the empty chain.
    """

    __slots__ = ("dim", "cells")

    def __init__(self, dim: int, cells: Iterable[int] = ()):
        self.dim = int(dim)
        self.cells = frozenset(int(c) for c in cells)

    @classmethod
    def from_array(cls, dim: int, arr: np.ndarray) -> "Chain":
        return cls(dim, np.flatnonzero(np.asarray(arr) & 1))

    def to_array(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=np.uint8)
        if self.cells:
            out[list(self.cells)] = 1
        return out

    def _check(self, other: "Chain") -> None:
        if not isinstance(other, Chain):
            raise TypeError(f"cannot combine Chain with {type(other).__name__}")
        if other.dim != self.dim and self.cells and other.cells:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "Chain") -> "Chain":
        self._check(other)
        return Chain(self.dim, self.cells ^ other.cells)

    __xor__ = __add__
    __sub__ = __add__

    def __and__(self, other: "Chain | Iterable[int]") -> "Chain":
        cells = other.cells if isinstance(other, Chain) else frozenset(other)
        return Chain(self.dim, self.cells & cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.cells))

    def __contains__(self, cell: int) -> bool:
        return cell in self.cells

    def __bool__(self) -> bool:
        return bool(self.cells)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        if not self.cells and not other.cells:
            return True
        return self.dim == other.dim and self.cells == other.cells

    def __hash__(self) -> int:
        return hash((self.dim, self.cells)) if self.cells else hash(())

    def __repr__(self) -> str:
        cells = sorted(self.cells)
        body = ", ".join(map(str, cells[:12])) + (", ..." if len(cells) > 12 else "")
        return f"Chain(dim={self.dim}, {{{body}}})"


def _csr(rows, cols, shape) -> sp.csr_matrix:
    data = np.ones(len(rows), dtype=np.uint8)
    return sp.csr_matrix((data, (rows, cols)), shape=shape, dtype=np.uint8)


def _apply(mat: sp.csr_matrix, chain: Chain, out_dim: int) -> Chain:
    if not chain.cells:
        return Chain(out_dim)
    cols = np.fromiter(chain.cells, dtype=np.int64)
    sub = mat[:, cols]
    odd = np.flatnonzero(np.asarray(sub.sum(axis=1)).ravel() % 2)
    return Chain(out_dim, odd)


class CellComplex:
    """A finite cell complex given by its GF(2) boundary matrices.

    ``boundaries[k]`` is the ``(n_{k-1}, n_k)`` incidence matrix of the
    boundary map on ``k``-cells.
    """

    def __init__(self, counts: list[int], boundaries: Mapping[int, sp.spmatrix], name: str = ""):
        self.counts = [int(c) for c in counts]
        self.dim = len(self.counts) - 1
        self.name = name
        self._bnd = {}
        for k in range(1, self.dim + 1):
            m = sp.csr_matrix(boundaries[k]).astype(np.int64)
            if m.shape != (self.counts[k - 1], self.counts[k]):
                raise ValueError(f"boundary {k} has shape {m.shape}")
            m.data %= 2
            m.eliminate_zeros()
            self._bnd[k] = m

    def n_cells(self, k: int) -> int:
        return self.counts[k]

    def boundary_matrix(self, k: int) -> sp.csr_matrix:
        if k < 1 or k > self.dim:
            raise ValueError("no boundary below dimension 0" if k < 1 else f"no {k}-cells")
        return self._bnd[k]

    def boundary(self, chain: Chain) -> Chain:
        if chain.dim < 1:
            raise ValueError("no boundary below dimension 0")
        return _apply(self.boundary_matrix(chain.dim), chain, chain.dim - 1)

    @property
    def edges(self) -> np.ndarray:
        """``(n_1, 2)`` endpoints of every edge (requires a graph-like 1-skeleton)."""
        if not hasattr(self, "_edges"):
            b = self.boundary_matrix(1).tocsc()
            ends = np.full((self.counts[1], 2), -1, dtype=np.int64)
            for e in range(self.counts[1]):
                idx = b.indices[b.indptr[e] : b.indptr[e + 1]]
                if len(idx) != 2:
                    raise ValueError(f"edge {e} does not have two endpoints")
                ends[e] = np.sort(idx)
            self._edges = ends
        return self._edges

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.counts))

    def dump(self) -> dict:
        out = {"kind": "cell_complex", "name": self.name, "counts": self.counts, "boundaries": {}}
        for k in range(1, self.dim + 1):
            m = self._bnd[k].tocsc()
            out["boundaries"][str(k)] = [
                m.indices[m.indptr[j] : m.indptr[j + 1]].tolist() for j in range(m.shape[1])
            ]
        return out

    def to_json(self) -> str:
        return json.dumps(self.dump(), sort_keys=True)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, counts={self.counts})"


class SimplicialComplex(CellComplex):
    """Homogeneous simplicial complex generated by its top simplices."""

    def __init__(self, top: np.ndarray, n_vertices: int | None = None, name: str = ""):
        top = np.sort(np.asarray(top, dtype=np.int64), axis=1)
        d = top.shape[1] - 1
        nv = int(top.max()) + 1 if n_vertices is None else int(n_vertices)
        self.n_vertices = nv
        self.dim = d
        simplices = []
        for k in range(d + 1):
            faces = np.concatenate(
                [top[:, list(c)] for c in itertools.combinations(range(d + 1), k + 1)]
            )
            simplices.append(np.unique(faces, axis=0))
        if len(simplices[0]) != nv:
            raise ValueError("some vertices belong to no top simplex")
        self.simplices = simplices
        self._keys = [self._encode(s) for s in simplices]
        for k in range(d + 1):
            if len(np.unique(self._keys[k])) != len(self._keys[k]):
                raise ValueError("duplicate simplices")
        # containment incidences between every pair of dimensions
        self._up: dict[tuple[int, int], sp.csr_matrix] = {}
        self._down: dict[tuple[int, int], sp.csr_matrix] = {}
        for b in range(1, d + 1):
            sb = simplices[b]
            for a in range(b):
                rows, cols = [], []
                for comb in itertools.combinations(range(b + 1), a + 1):
                    ids = self.index_of(sb[:, list(comb)])
                    rows.append(ids)
                    cols.append(np.arange(len(sb)))
                rows = np.concatenate(rows)
                cols = np.concatenate(cols)
                up = _csr(rows, cols, (len(simplices[a]), len(sb)))
                self._up[(a, b)] = up
                self._down[(a, b)] = up.T.tocsr()
        counts = [len(s) for s in simplices]
        super().__init__(counts, {k: self._up[(k - 1, k)] for k in range(1, d + 1)}, name)

    def _encode(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(rows)
        key = np.zeros(len(rows), dtype=np.int64)
        for j in range(rows.shape[1]):
            key = key * self.n_vertices + rows[:, j]
        return key

    def index_of(self, vertex_rows: np.ndarray) -> np.ndarray:
        """Indices of simplices given as (unsorted) vertex rows; ``-1`` if absent."""
        rows = np.sort(np.atleast_2d(np.asarray(vertex_rows, dtype=np.int64)), axis=1)
        k = rows.shape[1] - 1
        if k > self.dim:
            return np.full(len(rows), -1, dtype=np.int64)
        keys = self._encode(rows)
        table = self._keys[k]
        pos = np.searchsorted(table, keys)
        pos = np.minimum(pos, len(table) - 1)
        return np.where(table[pos] == keys, pos, -1)

    def simplex_index(self, vertices: Iterable[int]) -> int:
        vs = sorted(int(v) for v in vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("repeated vertex")
        idx = int(self.index_of(np.array([vs]))[0])
        if idx < 0:
            raise KeyError(f"{tuple(vs)} is not a simplex")
        return idx

    def vertices(self, dim: int, idx: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.simplices[dim][idx])

    def incidence(self, a: int, b: int) -> sp.csr_matrix:
        """``(n_a, n_b)`` matrix with a one where an ``a``-simplex lies in a ``b``-simplex."""
        return self._up[(a, b)]

    def generalized_boundary_matrix(self, k: int, n: int) -> sp.csr_matrix:
        if k == n:
            raise ValueError("generalized boundary needs distinct dimensions")
        return self._up[(n, k)] if k > n else self._down[(k, n)]

    def generalized_boundary(self, chain: Chain, n: int) -> Chain:
        """Faces (``n < dim``) or stars (``n > dim``) of every cell, summed mod 2."""
        if n == chain.dim:
            raise ValueError("generalized boundary needs distinct dimensions")
        return _apply(self.generalized_boundary_matrix(chain.dim, n), chain, n)

    def faces(self, dim: int, idx: int, n: int) -> np.ndarray:
        if n == dim:
            return np.array([idx])
        m = self._down[(n, dim)]
        return m.indices[m.indptr[idx] : m.indptr[idx + 1]]

    def star(self, dim: int, idx: int, n: int) -> np.ndarray:
        """Indices of the ``n``-simplices containing the given simplex."""
        if n < dim:
            raise ValueError("star needs n >= dim")
        if n == dim:
            return np.array([idx])
        m = self._up[(dim, n)]
        return np.sort(m.indices[m.indptr[idx] : m.indptr[idx + 1]])

    def link(self, dim: int, idx: int, n: int) -> np.ndarray:
        """``n``-simplices disjoint from the simplex that share a top simplex with it."""
        if n > self.dim - dim - 1:
            raise ValueError(f"link of a {dim}-simplex needs n <= {self.dim - dim - 1}")
        verts = set(self.vertices(dim, idx))
        out = set()
        for top in self.star(dim, idx, self.dim):
            rest = [v for v in self.simplices[self.dim][top] if v not in verts]
            for comb in itertools.combinations(rest, n + 1):
                out.add(int(self.index_of(np.array([comb]))[0]))
        return np.array(sorted(out), dtype=np.int64)

    def join(self, a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
        """Smallest simplex containing the disjoint simplices ``a`` and ``b`` (as ``(dim, idx)``)."""
        va, vb = set(self.vertices(*a)), set(self.vertices(*b))
        if va & vb:
            raise ValueError("join needs disjoint simplices")
        union = sorted(va | vb)
        dim = len(union) - 1
        if dim > self.dim:
            raise ValueError("simplices do not span a simplex of the lattice")
        idx = int(self.index_of(np.array([union]))[0])
        if idx < 0:
            raise ValueError("simplices do not span a simplex of the lattice")
        return dim, idx

    def local_restriction(self, chain: Chain, vertex: int) -> Chain:
        """The cells of ``chain`` that contain ``vertex``."""
        if chain.dim == 0:
            return chain & {vertex}
        return chain & self.star(0, vertex, chain.dim).tolist()

    def dump(self) -> dict:
        out = {"kind": "simplicial_complex", "name": self.name, "d": self.dim, "cells": {}, "faces": {}}
        for k in range(self.dim + 1):
            out["cells"][str(k)] = self.simplices[k].tolist()
            if k:
                m = self._down[(k - 1, k)]
                out["faces"][str(k)] = [
                    m.indices[m.indptr[j] : m.indptr[j + 1]].tolist() for j in range(self.counts[k])
                ]
        return out


class Colex(SimplicialComplex):
    """A ``(d+1)``-colored homogeneous simplicial ``d``-complex without boundary."""

    def __init__(self, top: np.ndarray, colors: np.ndarray, name: str = "", validate: bool = True):
        colors = np.asarray(colors, dtype=np.int64)
        super().__init__(top, n_vertices=len(colors), name=name)
        self.colors = colors
        self.n_colors = self.dim + 1
        bits = np.int64(1) << colors
        self.colormask = [np.bitwise_or.reduce(bits[s], axis=1) for s in self.simplices]
        if validate:
            problems = self.check()
            if problems:
                raise ValueError("not a colex: " + "; ".join(problems))

    def check(self) -> list[str]:
        problems = []
        d = self.dim
        if self.colors.min() < 0 or self.colors.max() > d:
            problems.append(f"colors must lie in 0..{d}")
        tops = self.simplices[d]
        if any(len(set(self.colors[t])) != d + 1 for t in tops):
            problems.append("a top simplex has repeated colors")
        per_facet = np.diff(self.incidence(d - 1, d).indptr)
        if np.any(per_facet != 2):
            problems.append("some (d-1)-simplex is not in exactly two d-simplices")
        return problems

    def color_of(self, dim: int, idx: int) -> frozenset[int]:
        return frozenset(int(c) for c in self.colors[self.simplices[dim][idx]])

    def chain_colors(self, chain: Chain) -> frozenset[int]:
        if not chain.cells:
            return frozenset()
        verts = self.simplices[chain.dim][list(chain.cells)]
        return frozenset(np.unique(self.colors[verts]).tolist())

    def cells_with_colors(self, dim: int, colors: Iterable[int] | str, exact: bool = True) -> np.ndarray:
        """Indices of ``dim``-simplices whose color set equals (or is inside) ``colors``."""
        m = _mask(colorset(colors))
        cm = self.colormask[dim]
        sel = cm == m if exact else (cm & ~m) == 0
        return np.flatnonzero(sel)

    def vertices_of_color(self, chain: Chain, color: int) -> list[int]:
        """Vertices of color ``color`` touched by ``chain``."""
        if not chain.cells:
            return []
        verts = np.unique(self.simplices[chain.dim][list(chain.cells)])
        return verts[self.colors[verts] == color].tolist()

    def dump(self) -> dict:
        out = super().dump()
        out["kind"] = "colex"
        out["colors"] = self.colors.tolist()
        return out

    @classmethod
    def from_dump(cls, data: Mapping | str) -> "Colex":
        if isinstance(data, str):
            data = json.loads(data)
        d = int(data["d"])
        top = np.array(data["cells"][str(d)], dtype=np.int64).reshape(-1, d + 1)
        return cls(top, np.array(data["colors"]), name=data.get("name", ""))

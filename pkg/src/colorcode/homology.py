"""Homology bases, class readout, and the colorable-chain constructions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import gf2
from .complexes import CellComplex, Chain, Colex, colorset

__all__ = [
    "HomologyBasis",
    "compute_homology",
    "homology_basis",
    "color_code_basis",
    "homology_class",
    "colorable_filling",
    "colorable_cycle",
    "colorable_link_chain",
    "Membrane",
    "membrane",
    "LemmaError",
]


class LemmaError(RuntimeError):
    """A local solve that the construction guarantees to succeed did not."""


@dataclass
class HomologyBasis:
    """Cycle representatives and dual cocycles for ``ker d_out / im d_in``.

    ``cocycles @ reps.T == I`` over GF(2), so the class of a cycle ``z`` is
    ``cocycles @ z mod 2``.
    """

    reps: np.ndarray
    cocycles: np.ndarray
    d_out: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return self.reps.shape[0]

    def classes(self, Z: np.ndarray) -> np.ndarray:
        """Classes of a batch of cycles, one per row."""
        Z = np.atleast_2d(Z).astype(np.uint8)
        return ((Z.astype(np.int64) @ self.cocycles.T.astype(np.int64)) & 1).astype(np.uint8)


def _quotient_reps(kernel_basis: np.ndarray, image_cols: np.ndarray) -> np.ndarray:
    """Rows of ``kernel_basis`` that extend ``image_cols`` to a basis of the kernel."""
    n_im = image_cols.shape[1]
    M = np.hstack([image_cols, kernel_basis.T]).astype(np.uint8)
    piv = gf2.independent_columns(M)
    return kernel_basis[[p - n_im for p in piv if p >= n_im]]


def compute_homology(d_out: sp.spmatrix | None, d_in: sp.spmatrix | None, n: int) -> HomologyBasis:
    """Homology of ``C_{in} -> C_n -> C_{out}`` given ``d_out`` (``out x n``) and ``d_in`` (``n x in``)."""
    Dout = np.zeros((0, n), np.uint8) if d_out is None else (sp.csr_matrix(d_out).toarray() & 1).astype(np.uint8)
    Din = np.zeros((n, 0), np.uint8) if d_in is None else (sp.csr_matrix(d_in).toarray() & 1).astype(np.uint8)
    Z = gf2.nullspace(Dout) if Dout.shape[0] else np.eye(n, dtype=np.uint8)
    reps = _quotient_reps(Z, Din)
    # cocycles: kernel of d_in^T modulo image of d_out^T
    Zc = gf2.nullspace(Din.T) if Din.shape[1] else np.eye(n, dtype=np.uint8)
    co = _quotient_reps(Zc, Dout.T)
    if co.shape[0] != reps.shape[0]:
        raise ArithmeticError("homology and cohomology ranks differ")
    pairing = (co.astype(np.int64) @ reps.T.astype(np.int64)) & 1
    co = ((gf2.inverse(pairing.astype(np.uint8)).astype(np.int64) @ co.astype(np.int64)) & 1).astype(np.uint8)
    return HomologyBasis(reps.astype(np.uint8), co, None if d_out is None else sp.csr_matrix(d_out))


def homology_basis(cx: CellComplex, k: int) -> HomologyBasis:
    """``H_k`` of a cell complex."""
    d_out = cx.boundary_matrix(k) if k >= 1 else None
    d_in = cx.boundary_matrix(k + 1) if k < cx.dim else None
    return compute_homology(d_out, d_in, cx.n_cells(k))


def color_code_basis(colex: Colex, k: int) -> HomologyBasis:
    """Logical classes of the color code whose X-checks are ``d_{d,k-1}``.

    Errors are ``d``-chains; their syndromes are ``d_{d,k-1}`` and the
    stabilizers are the stars ``d_{d-k-1,d}``.
    """
    d = colex.dim
    return compute_homology(
        colex.generalized_boundary_matrix(d, k - 1),
        colex.generalized_boundary_matrix(d - k - 1, d),
        colex.n_cells(d),
    )


def homology_class(basis: HomologyBasis, chain: Chain | np.ndarray, n: int | None = None) -> np.ndarray:
    """Class of a single cycle as a 0/1 vector of length ``basis.rank``."""
    if isinstance(chain, Chain):
        n = basis.reps.shape[1]
        z = chain.to_array(n)
    else:
        z = np.asarray(chain, dtype=np.uint8)
    if basis.d_out is not None and np.any((basis.d_out @ z.astype(np.int64)) & 1):
        raise ValueError("not a cycle")
    return basis.classes(z)[0]


def _local_solve(colex: Colex, cands: list[int], images: list[np.ndarray], target: Chain) -> Chain | None:
    """Subset of ``cands`` whose images sum to ``target``; ``None`` if there is none."""
    rows = sorted(set(target.cells).union(*[set(map(int, im)) for im in images]))
    pos = {r: i for i, r in enumerate(rows)}
    A = np.zeros((len(rows), len(cands)), np.uint8)
    for j, im in enumerate(images):
        for r in im:
            A[pos[int(r)], j] ^= 1
    b = np.zeros(len(rows), np.uint8)
    for r in target.cells:
        b[pos[r]] = 1
    if not cands:
        return None if b.any() else Chain(target.dim)
    x = gf2.solve(A, b)
    if x is None:
        return None
    return Chain(-1, [cands[j] for j in np.flatnonzero(x)])


def _allowed(colex: Colex, dim: int, idx: np.ndarray, colors: frozenset[int]) -> np.ndarray:
    mask = sum(1 << c for c in colors)
    return idx[(colex.colormask[dim][idx] & ~mask) == 0]


def _retag(chain: Chain, dim: int) -> Chain:
    return Chain(dim, chain.cells)


def colorable_filling(colex: Colex, alpha: Chain, C) -> Chain:
    """An ``(n+1)``-chain colored inside ``C`` whose boundary is ``alpha``.

    Parameters
    ----------
    alpha : Chain
        A boundary ``n``-chain colored inside ``C``.
    C : color set
        Must contain more than ``n + 1`` colors.

    Raises
    ------
    ValueError
        If ``alpha`` is not a boundary or the colors do not fit.
    """
    C = colorset(C)
    n = alpha.dim
    d = colex.dim
    if not colex.chain_colors(alpha) <= C:
        raise ValueError("alpha is not colored inside C")
    if len(C) <= n + 1:
        raise ValueError("need |C| > n + 1")
    if not alpha:
        return Chain(n + 1)
    x = gf2.solve(colex.boundary_matrix(n + 1).toarray(), alpha.to_array(colex.n_cells(n)))
    if x is None:
        raise ValueError("alpha is not a boundary")
    beta = Chain.from_array(n + 1, x)
    allowed = frozenset(range(d + 1))
    for c in sorted(frozenset(range(d + 1)) - C, reverse=True):
        allowed = allowed - {c}
        for v in colex.vertices_of_color(beta, c):
            bv = colex.local_restriction(beta, v)
            target = colex.boundary(bv)
            cands = _allowed(colex, n + 1, colex.link(0, v, n + 1), allowed)
            images = [colex.faces(n + 1, int(s), n) for s in cands]
            sol = _local_solve(colex, list(map(int, cands)), images, target)
            if sol is None:
                raise LemmaError(f"no local filling at vertex {v}")
            beta = beta + bv + _retag(sol, n + 1)
    return beta


def colorable_cycle(colex: Colex, alpha: Chain, C) -> Chain:
    """A homologous ``n``-cycle colored inside ``C`` (with ``|C| = n + 1``)."""
    C = colorset(C)
    n = alpha.dim
    d = colex.dim
    if len(C) != n + 1:
        raise ValueError("need |C| = n + 1")
    if n >= 1 and colex.boundary(alpha):
        raise ValueError("alpha is not a cycle")
    allowed = frozenset(range(d + 1))
    for c in sorted(frozenset(range(d + 1)) - C, reverse=True):
        allowed = allowed - {c}
        for v in colex.vertices_of_color(alpha, c):
            av = colex.local_restriction(alpha, v)
            cands = _allowed(colex, n, colex.link(0, v, n), allowed)
            if n == 0:
                # a single vertex moves to any neighbor of an allowed color
                sol = Chain(0, [int(cands[0])]) if len(av) % 2 else Chain(0)
            else:
                target = colex.boundary(av)
                images = [colex.faces(n, int(s), n - 1) for s in cands]
                sol = _local_solve(colex, list(map(int, cands)), images, target)
                if sol is None:
                    raise LemmaError(f"no local replacement at vertex {v}")
            alpha = alpha + av + _retag(sol, n)
    return alpha


def colorable_link_chain(colex: Colex, alpha: Chain, cstar: int | None = None) -> Chain:
    """A ``(d-n-1)``-chain ``omega`` colored by the complement of ``col(alpha)``
    whose ``n``-links sum to the boundary ``alpha``.

    ``alpha`` must be an ``n``-boundary colored by exactly ``n + 1`` colors.
    """
    d = colex.dim
    n = alpha.dim
    if not alpha:
        return Chain(d - n - 1)
    col = colex.chain_colors(alpha)
    if len(col) != n + 1:
        raise ValueError("alpha must use exactly n + 1 colors")
    rest = frozenset(range(d + 1)) - col
    if cstar is None:
        cstar = min(rest)
    if cstar not in rest:
        raise ValueError("cstar must lie outside col(alpha)")
    beta = colorable_filling(colex, alpha, col | {cstar})
    omega_colors = rest
    omega = Chain(d - n - 1)
    for v in colex.vertices_of_color(beta, cstar):
        target = colex.boundary(colex.local_restriction(beta, v))
        cands = colex.cells_with_colors(d - n - 1, omega_colors, exact=True)
        cands = np.intersect1d(cands, colex.star(0, v, d - n - 1))
        images = [colex.link(d - n - 1, int(s), n) for s in cands]
        sol = _local_solve(colex, list(map(int, cands)), images, target)
        if sol is None:
            raise LemmaError(f"no local link decomposition at vertex {v}")
        omega = omega + _retag(sol, d - n - 1)
    return omega


@dataclass
class Membrane:
    """A set of top simplices attached to a colorable ``k``-cycle.

    Attributes
    ----------
    gamma_tilde : Chain
        The cycle pushed to colors ``C | {cstar}``.
    support : Chain
        The ``d``-simplices forming the membrane.
    """

    gamma_tilde: Chain
    C: frozenset
    cstar: int
    support: Chain


def membrane(colex: Colex, gamma: Chain, C, cstar: int) -> Membrane:
    """Membrane of a ``k``-cycle ``gamma`` of the toric code on ``L_{C + cstar}``.

    ``C`` has ``k`` colors and excludes ``cstar``. The support has zero
    syndrome on every ``(k-1)``-simplex except along ``gamma_tilde``'s
    ``cstar``-free part, and its restriction onto ``C | {cstar}`` is
    ``gamma_tilde``.
    """
    C = colorset(C)
    k = gamma.dim
    d = colex.dim
    if len(C) != k or cstar in C:
        raise ValueError("need |C| = k and cstar outside C")
    gt = colorable_cycle(colex, gamma, C | {cstar})
    comp = frozenset(range(d + 1)) - C
    support = Chain(d)
    for v in colex.vertices_of_color(gt, cstar):
        target = colex.boundary(colex.local_restriction(gt, v)) if k >= 1 else Chain(-1)
        cands = np.intersect1d(
            colex.cells_with_colors(d - k, comp, exact=True), colex.star(0, v, d - k)
        )
        images = [colex.link(d - k, int(s), k - 1) for s in cands]
        sol = _local_solve(colex, list(map(int, cands)), images, target)
        if sol is None:
            raise LemmaError(f"no local membrane piece at vertex {v}")
        for mu in sol.cells:
            support = support + Chain(d, colex.star(d - k, mu, d))
    return Membrane(gt, C, cstar, support)

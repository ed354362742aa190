"""Dense linear algebra over GF(2).

Matrices are ``uint8`` arrays of 0/1 entries at the API boundary. Elimination
runs on rows bit-packed into ``uint64`` words so that a row operation is a
single vectorised XOR.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "pack_rows",
    "unpack_rows",
    "rref",
    "rank",
    "nullspace",
    "solve",
    "solve_affine",
    "independent_columns",
    "inverse",
]


def pack_rows(A: np.ndarray) -> np.ndarray:
    """Pack a 0/1 matrix into ``uint64`` words, column ``c`` -> word ``c // 64``."""
    A = np.atleast_2d(np.asarray(A, dtype=np.uint8) & 1)
    nrows, ncols = A.shape
    nbytes = -(-ncols // 64) * 8
    packed = np.zeros((nrows, max(nbytes, 8)), dtype=np.uint8)
    if ncols:
        b = np.packbits(A, axis=1, bitorder="little")
        packed[:, : b.shape[1]] = b
    return packed.view(np.uint64)


def unpack_rows(P: np.ndarray, ncols: int) -> np.ndarray:
    bits = np.unpackbits(P.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :ncols].copy()


def _rref_packed(P: np.ndarray, ncols: int) -> tuple[np.ndarray, list[int]]:
    P = P.copy()
    nrows = P.shape[0]
    pivots: list[int] = []
    r = 0
    one = np.uint64(1)
    for c in range(ncols):
        if r == nrows:
            break
        w, b = divmod(c, 64)
        colbits = (P[:, w] >> np.uint64(b)) & one
        cand = np.flatnonzero(colbits[r:])
        if cand.size == 0:
            continue
        p = r + cand[0]
        if p != r:
            P[[r, p]] = P[[p, r]]
            colbits[[r, p]] = colbits[[p, r]]
        hit = np.flatnonzero(colbits)
        hit = hit[hit != r]
        if hit.size:
            P[hit] ^= P[r]
        pivots.append(c)
        r += 1
    return P[:r], pivots


def rref(A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns the nonzero rows and pivot columns."""
    A = np.atleast_2d(np.asarray(A, dtype=np.uint8))
    ncols = A.shape[1]
    R, piv = _rref_packed(pack_rows(A), ncols)
    return unpack_rows(R, ncols), piv


def rank(A: np.ndarray) -> int:
    A = np.atleast_2d(np.asarray(A, dtype=np.uint8))
    if A.size == 0:
        return 0
    return len(_rref_packed(pack_rows(A), A.shape[1])[1])


def nullspace(A: np.ndarray) -> np.ndarray:
    """Basis of ``{x : A x = 0}`` as rows."""
    A = np.atleast_2d(np.asarray(A, dtype=np.uint8))
    n = A.shape[1]
    R, piv = rref(A) if A.shape[0] else (np.zeros((0, n), np.uint8), [])
    free = np.setdiff1d(np.arange(n), piv)
    N = np.zeros((free.size, n), dtype=np.uint8)
    N[np.arange(free.size), free] = 1
    if piv:
        N[:, piv] = R[:, free].T
    return N


def solve(A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution of ``A x = b`` (free variables zero), or ``None``."""
    A = np.atleast_2d(np.asarray(A, dtype=np.uint8))
    b = np.asarray(b, dtype=np.uint8).reshape(-1, 1)
    n = A.shape[1]
    R, piv = rref(np.hstack([A, b]))
    if piv and piv[-1] == n:
        return None
    x = np.zeros(n, dtype=np.uint8)
    x[piv] = R[: len(piv), n]
    return x


def solve_affine(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Particular solution and kernel basis of ``A x = b``."""
    x0 = solve(A, b)
    if x0 is None:
        return None
    return x0, nullspace(A)


def independent_columns(M: np.ndarray) -> list[int]:
    """Greedy left-to-right maximal set of linearly independent columns."""
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    if M.shape[0] == 0:
        return []
    return _rref_packed(pack_rows(M), M.shape[1])[1]


def inverse(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.uint8)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    R, piv = rref(np.hstack([A, np.eye(n, dtype=np.uint8)]))
    if piv[:n] != list(range(n)) or len(R) < n:
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    return R[:n, n:].copy()

"""The restriction decoder for color codes.

Syndromes are restricted onto the lattices ``L_{C + cstar}``, decoded there
by a toric-code decoder, and the toric corrections are lifted back to top
simplices one ``cstar``-colored vertex at a time.

Everything runs on batches: errors, syndromes and corrections are ``uint8``
arrays with one trial per row. The single-shot API wraps a batch of one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import gf2
from .complexes import Chain, Colex, color_label, colorset
from .homology import HomologyBasis, color_code_basis, homology_basis
from .restriction import RestrictedLattice, restrict
from .tc_decoders import DecoderUnavailable, TcDecoder, make_decoder

__all__ = [
    "LiftError",
    "Lifter",
    "RestrictionDecoder",
    "SimplifiedDecoder2D",
    "BatchOutcome",
    "DecodeOutcome",
    "restriction_decode",
    "simplified_decode_2d",
    "success_equivalence_check",
    "lift",
]

_TABLE_BITS = 22


class LiftError(RuntimeError):
    """The local lift has no solution; this means a bug upstream."""


def _matmul2(A, B) -> np.ndarray:
    """``A @ B mod 2`` for a dense 0/1 batch ``A`` and a sparse or dense ``B``."""
    if sp.issparse(B):
        out = (sp.csr_matrix(B).T.astype(np.int32) @ np.asarray(A, dtype=np.int32).T).T
    else:
        out = np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)
    return (np.asarray(out) & 1).astype(np.uint8)


class _LocalSystem:
    """The lift equations shared by every vertex with the same ball shape.

    Solutions are bitmasks over the columns (bit ``j`` is column ``j``).
    The chosen solution has minimum weight and, among those, the
    lexicographically smallest sorted column tuple.
    """

    def __init__(self, A: np.ndarray):
        self.A = A
        self.n_rows, self.n_cols = A.shape
        self.kernel = gf2.nullspace(A)
        # [A | I] -> [R | T] with T A = R; rows of T past the rank give the consistency checks
        R, piv = gf2.rref(np.hstack([A, np.eye(self.n_rows, dtype=np.uint8)]))
        self.pivots = np.array([p for p in piv if p < self.n_cols], dtype=np.int64)
        r = len(self.pivots)
        self.T_sol = R[:r, self.n_cols :].astype(np.int64)
        self.T_chk = R[r:, self.n_cols :].astype(np.int64)
        self.table = np.full(1 << self.n_rows, -2, dtype=np.int64) if self.n_rows <= _TABLE_BITS else None
        self.memo: dict[int, int] = {}
        self.span = None
        if self.n_cols <= 63 and self.kernel.shape[0] <= 16:
            # column j sits at bit n_cols-1-j, so among equal weights the largest
            # value is the lexicographically smallest index tuple
            self._rev = np.left_shift(np.uint64(1), np.arange(self.n_cols - 1, -1, -1, dtype=np.uint64))
            span = np.zeros(1, dtype=np.uint64)
            for kvec in self.kernel:
                km = np.bitwise_or.reduce(self._rev[kvec.astype(bool)])
                span = np.concatenate([span, span ^ km])
            self.span = span

    def solve_reference(self, pattern: int) -> int:
        """Scalar solver by explicit kernel enumeration; -1 if no solution."""
        b = np.array([(pattern >> i) & 1 for i in range(self.n_rows)], dtype=np.uint8)
        x0 = gf2.solve(self.A, b)
        if x0 is None:
            return -1
        K = self.kernel
        if K.shape[0] <= 16:
            combos = np.array(list(itertools.product((0, 1), repeat=K.shape[0])), dtype=np.uint8).reshape(-1, K.shape[0])
            X = x0[None, :] ^ ((combos.astype(np.int64) @ K.astype(np.int64)) & 1).astype(np.uint8)
            w = X.sum(axis=1)
            best = min(tuple(np.flatnonzero(x)) for x in X[w == w.min()])
        else:
            best = tuple(np.flatnonzero(x0))
        return int(sum(1 << int(j) for j in best))

    def solve(self, pattern: int) -> int:
        return int(self.solve_many(np.array([pattern], dtype=np.int64))[0])

    def solve_many(self, patterns: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`solve_reference` over an array of patterns."""
        patterns = np.asarray(patterns, dtype=np.int64)
        if self.span is None:
            return np.array([self.solve_reference(int(p)) for p in patterns], dtype=np.int64)
        B = (patterns[:, None] >> np.arange(self.n_rows, dtype=np.int64)) & 1
        bad = np.any((B @ self.T_chk.T) & 1, axis=1) if self.T_chk.size else np.zeros(len(B), bool)
        Y = ((B @ self.T_sol.T) & 1).astype(bool)
        x0 = np.zeros(len(B), dtype=np.uint64)
        for i, col in enumerate(self.pivots):
            x0[Y[:, i]] |= self._rev[col]
        best = np.empty(len(B), dtype=np.uint64)
        step = max(1, (1 << 20) // len(self.span))
        for s in range(0, len(B), step):
            cand = x0[s : s + step, None] ^ self.span[None, :]
            w = np.bitwise_count(cand)
            best[s : s + step] = np.where(w == w.min(axis=1, keepdims=True), cand, 0).max(axis=1)
        bits = (best[:, None] & self._rev[None, :]) != 0
        out = bits.astype(np.int64) @ (np.int64(1) << np.arange(self.n_cols, dtype=np.int64))
        out[bad] = -1
        return out

    def lookup(self, patterns: np.ndarray) -> np.ndarray:
        if self.table is not None:
            todo = np.unique(patterns[self.table[patterns] == -2])
            if todo.size:
                self.table[todo] = self.solve_many(todo)
            return self.table[patterns]
        flat = patterns.ravel()
        todo = np.array([p for p in np.unique(flat) if int(p) not in self.memo], dtype=np.int64)
        if todo.size:
            self.memo.update(zip(todo.tolist(), self.solve_many(todo).tolist()))
        return np.array([self.memo[int(p)] for p in flat], dtype=np.int64).reshape(patterns.shape)


class Lifter:
    """Local lift at every vertex of one color.

    At vertex ``v`` the unknowns are the top simplices of ``star_d(v)`` and
    the equations say that the ``k``-faces through ``v`` of the chosen
    simplices sum to ``rho|_v``. Each ``k``-simplex at ``v`` is colored
    ``{color} + C`` for one ``C``, so this is the lift condition for all
    ``C`` at once.
    """

    def __init__(self, colex: Colex, k: int, color: int):
        self.colex = colex
        self.k = k
        self.color = color
        d = colex.dim
        verts = np.flatnonzero(colex.colors == color)
        inc = colex.incidence(k, d).tocsr()
        groups: dict[bytes, list] = {}
        systems: dict[bytes, _LocalSystem] = {}
        for v in verts:
            rows = colex.star(0, int(v), k)
            cols = colex.star(0, int(v), d)
            A = (inc[rows][:, cols].toarray() & 1).astype(np.uint8)
            key = A.shape[0].to_bytes(4, "little") + np.packbits(A).tobytes()
            if key not in systems:
                systems[key] = _LocalSystem(A)
            groups.setdefault(key, []).append((int(v), rows, cols))
        self.groups = []
        self.vertex_index: dict[int, tuple[int, int]] = {}
        for gi, (key, members) in enumerate(groups.items()):
            V = np.array([m[0] for m in members])
            R = np.stack([m[1] for m in members])
            C = np.stack([m[2] for m in members])
            self.groups.append((systems[key], V, R, C))
            for j, v in enumerate(V):
                self.vertex_index[int(v)] = (gi, j)

    @property
    def n_shapes(self) -> int:
        return len(self.groups)

    def lift_batch(self, rho: np.ndarray) -> np.ndarray:
        """Sum of the lifts at all vertices of this color, per row of ``rho`` (``k``-chains)."""
        rho = np.atleast_2d(rho)
        B = rho.shape[0]
        tau = np.zeros((B, self.colex.n_cells(self.colex.dim)), dtype=np.uint8)
        for system, V, R, C in self.groups:
            w = np.left_shift(np.int64(1), np.arange(R.shape[1], dtype=np.int64))
            patterns = rho[:, R].astype(np.int64) @ w
            sol = system.lookup(patterns)
            if np.any(sol < 0):
                b, j = np.argwhere(sol < 0)[0]
                raise LiftError(f"no lift at vertex {V[j]} for pattern {patterns[b, j]:#x}")
            bits = ((sol[..., None] >> np.arange(C.shape[1], dtype=np.int64)) & 1).astype(np.uint8)
            tau[:, C] ^= bits
        return tau

    def lift(self, v: int, rho_v: Chain) -> Chain:
        """Lift of a local ``k``-chain at vertex ``v`` (simplices through ``v`` only)."""
        gi, j = self.vertex_index[v]
        system, _, R, C = self.groups[gi]
        rows = R[j]
        pos = {int(r): i for i, r in enumerate(rows)}
        if any(c not in pos for c in rho_v.cells):
            raise ValueError(f"rho_v has cells outside the star of vertex {v}")
        pattern = sum(1 << pos[c] for c in rho_v.cells)
        sol = int(system.lookup(np.array([pattern]))[0])
        if sol < 0:
            raise LiftError(f"no lift at vertex {v}")
        return Chain(self.colex.dim, [int(C[j][i]) for i in range(C.shape[1]) if (sol >> i) & 1])


def lift(colex: Colex, v: int, rho_v: Chain, sigma_v: Chain | None = None, k: int | None = None) -> Chain:
    """Lift ``rho|_v`` at vertex ``v`` to top simplices of its star.

    ``sigma_v`` is accepted for symmetry with the decoder; the solution only
    depends on ``rho_v``.
    """
    k = rho_v.dim if k is None else k
    return _lifter(colex, k, int(colex.colors[v])).lift(v, rho_v)


_LIFTERS: dict[tuple[int, int, int], Lifter] = {}


def _lifter(colex: Colex, k: int, color: int) -> Lifter:
    key = (id(colex), k, color)
    if key not in _LIFTERS:
        _LIFTERS[key] = Lifter(colex, k, color)
    return _LIFTERS[key]


@dataclass
class BatchOutcome:
    """Per-trial results of a batch.

    Attributes
    ----------
    valid : ndarray of bool
        The residual ``error + tau`` has zero syndrome.
    failure : ndarray of bool
        The residual is a nontrivial logical.
    toric_failure : dict
        Per color set ``C``, whether the toric decoder on ``L_{C + cstar}``
        left a nontrivial cycle.
    equivalent : ndarray of bool
        Color-code success coincides with success on every restricted lattice.
    projection_ok : ndarray of bool
        ``pi1(error + tau) == pi1(error) + rho_C`` for every ``C``.
    """

    valid: np.ndarray
    failure: np.ndarray
    toric_failure: dict = field(default_factory=dict)
    equivalent: np.ndarray | None = None
    projection_ok: np.ndarray | None = None

    @property
    def trials(self) -> int:
        return len(self.valid)

    @property
    def failures(self) -> int:
        return int(self.failure.sum())


@dataclass
class DecodeOutcome:
    """Result of decoding one syndrome."""

    error: Chain | None
    syndrome: Chain
    rho: dict
    rho_combined: Chain
    tau: Chain
    valid: bool | None
    logical_class: np.ndarray | None
    toric_classes: dict = field(default_factory=dict)

    @property
    def success(self) -> bool | None:
        return None if self.logical_class is None else not self.logical_class.any()

    def to_dict(self) -> dict:
        def cells(c):
            return None if c is None else sorted(c.cells)

        return {
            "error": cells(self.error),
            "syndrome": cells(self.syndrome),
            "rho": {lab: cells(c) for lab, c in self.rho.items()},
            "rho_combined": cells(self.rho_combined),
            "tau": cells(self.tau),
            "valid": self.valid,
            "logical_class": None if self.logical_class is None else self.logical_class.tolist(),
            "toric_classes": {lab: v.tolist() for lab, v in self.toric_classes.items()},
        }


class _Base:
    colex: Colex
    k: int

    def _setup_common(self):
        d = self.colex.dim
        self.n_qubits = self.colex.n_cells(d)
        self.H = self.colex.generalized_boundary_matrix(d, self.k - 1).tocsr()
        self._cc_basis: HomologyBasis | None = None

    @property
    def cc_basis(self) -> HomologyBasis:
        if self._cc_basis is None:
            self._cc_basis = color_code_basis(self.colex, self.k)
        return self._cc_basis

    def syndromes(self, E: np.ndarray) -> np.ndarray:
        return _matmul2(np.atleast_2d(E), self.H.T)

    def _finish(self, E, S, tau) -> tuple[np.ndarray, np.ndarray]:
        resid = E ^ tau
        valid = ~np.any(self.syndromes(resid) != 0, axis=1) if S is not None else None
        failure = np.any(self.cc_basis.classes(resid), axis=1)
        return valid, failure


class RestrictionDecoder(_Base):
    """Restriction decoder bound to a colex.

    Parameters
    ----------
    colex : Colex
    k : int
        Excitations are ``(k-1)``-simplices. Only ``k = 1`` has toric decoders.
    cstar : int
        The color shared by all restricted lattices.
    tc : str
        Toric decoder name from the registry.
    """

    def __init__(self, colex: Colex, k: int = 1, cstar: int = 0, tc: str = "mwpm"):
        d = colex.dim
        if not 1 <= k < d:
            raise ValueError(f"need 1 <= k < d, got k={k}")
        if cstar not in range(d + 1):
            raise ValueError(f"color {cstar} outside 0..{d}")
        self.colex, self.k, self.cstar, self.tc = colex, k, cstar, tc
        others = [c for c in range(d + 1) if c != cstar]
        self.family = [frozenset(c) for c in itertools.combinations(others, k)]
        self.lattices: dict[frozenset, RestrictedLattice] = {
            C: restrict(colex, C | {cstar}, k) for C in self.family
        }
        self.decoders: dict[frozenset, TcDecoder] = {
            C: make_decoder(tc, rl, k) for C, rl in self.lattices.items()
        }
        self.lifter = _lifter(colex, k, cstar)
        self._toric_bases: dict[frozenset, HomologyBasis] = {}
        self._setup_common()

    def label(self, C: frozenset) -> str:
        return color_label(C | {self.cstar})

    def toric_basis(self, C: frozenset) -> HomologyBasis:
        if C not in self._toric_bases:
            self._toric_bases[C] = homology_basis(self.lattices[C], self.k)
        return self._toric_bases[C]

    def toric_corrections(self, S: np.ndarray) -> dict[frozenset, np.ndarray]:
        """Toric decoding of each restricted syndrome (local cell indices)."""
        return {C: self.decoders[C].decode_batch(S[:, rl.parent_ids[self.k - 1]]) for C, rl in self.lattices.items()}

    def combine(self, rho: dict[frozenset, np.ndarray]) -> np.ndarray:
        """Sum of the toric corrections as parent ``k``-chains."""
        B = next(iter(rho.values())).shape[0]
        out = np.zeros((B, self.colex.n_cells(self.k)), dtype=np.uint8)
        for C, r in rho.items():
            out[:, self.lattices[C].parent_ids[self.k]] ^= r
        return out

    def decode_batch(self, S: np.ndarray) -> tuple[dict, np.ndarray, np.ndarray]:
        """Returns ``(rho per C, combined rho, tau)`` for a batch of syndromes."""
        S = np.atleast_2d(np.asarray(S, dtype=np.uint8))
        rho = self.toric_corrections(S)
        combined = self.combine(rho)
        tau = self.lifter.lift_batch(combined)
        return rho, combined, tau

    def evaluate(self, E: np.ndarray, rho: dict, tau: np.ndarray, check: bool = True) -> BatchOutcome:
        E = np.atleast_2d(E).astype(np.uint8)
        valid, failure = self._finish(E, True, tau)
        out = BatchOutcome(valid=valid, failure=failure)
        if check:
            resid = E ^ tau
            eq_ok = np.ones(len(E), dtype=bool)
            any_toric = np.zeros(len(E), dtype=bool)
            for C, rl in self.lattices.items():
                pe = _matmul2(E, rl.P1.T)
                t = pe ^ rho[C]
                eq_ok &= np.all(_matmul2(resid, rl.P1.T) == t, axis=1)
                fail_C = np.any(self.toric_basis(C).classes(t), axis=1)
                out.toric_failure[self.label(C)] = fail_C
                any_toric |= fail_C
            out.projection_ok = eq_ok
            out.equivalent = failure == any_toric
        return out

    def run_batch(self, E: np.ndarray, check: bool = True) -> BatchOutcome:
        E = np.atleast_2d(E).astype(np.uint8)
        rho, _, tau = self.decode_batch(self.syndromes(E))
        return self.evaluate(E, rho, tau, check)

    def decode(self, sigma: Chain, error: Chain | None = None) -> DecodeOutcome:
        """Decode one syndrome; with ``error`` given, also report validity and classes."""
        n_s = self.colex.n_cells(self.k - 1)
        if sigma.cells and sigma.dim != self.k - 1:
            raise ValueError(f"syndrome must be a {self.k - 1}-chain")
        S = sigma.to_array(n_s)[None, :]
        rho, combined, tau = self.decode_batch(S)
        out = DecodeOutcome(
            error=error,
            syndrome=sigma,
            rho={self.label(C): Chain.from_array(self.k, r[0]) for C, r in rho.items()},
            rho_combined=Chain.from_array(self.k, combined[0]),
            tau=Chain.from_array(self.colex.dim, tau[0]),
            valid=None,
            logical_class=None,
        )
        if error is not None:
            E = error.to_array(self.n_qubits)[None, :]
            if np.any(self.syndromes(E)[0] != S[0]):
                raise ValueError("error does not produce the given syndrome")
            resid = E ^ tau
            out.valid = not np.any(self.syndromes(resid))
            out.logical_class = self.cc_basis.classes(resid)[0]
            for C, rl in self.lattices.items():
                t = _matmul2(E, rl.P1.T) ^ rho[C]
                out.toric_classes[self.label(C)] = self.toric_basis(C).classes(t)[0]
        return out


class SimplifiedDecoder2D(_Base):
    """Two-dimensional decoder that matches on the full lattice graph.

    ``sigma`` restricted to colors ``{cstar, c1}`` and ``{cstar, c2}`` is
    decoded on the whole 1-skeleton, so paths may cross vertices of the
    third color. Lifts then run at ``cstar`` vertices of the sum and at
    ``c2`` (``c1``) vertices of the first (second) correction.
    """

    def __init__(self, colex: Colex, cstar: int = 0, tc: str = "mwpm"):
        if colex.dim != 2:
            raise ValueError("the simplified decoder is two-dimensional")
        self.colex, self.k, self.cstar, self.tc = colex, 1, cstar, tc
        self.c1, self.c2 = [c for c in range(3) if c != cstar]
        self.decoder = make_decoder(tc, colex, 1)
        self.lifters = {c: _lifter(colex, 1, c) for c in range(3)}
        self.family = [frozenset({self.c1}), frozenset({self.c2})]
        self._setup_common()

    def decode_batch(self, S: np.ndarray) -> tuple[dict, np.ndarray, np.ndarray]:
        S = np.atleast_2d(np.asarray(S, dtype=np.uint8))
        col = self.colex.colors
        s1 = S * np.isin(col, [self.cstar, self.c1]).astype(np.uint8)
        s2 = S * np.isin(col, [self.cstar, self.c2]).astype(np.uint8)
        r1 = self.decoder.decode_batch(s1)
        r2 = self.decoder.decode_batch(s2)
        tau = self.lifters[self.cstar].lift_batch(r1 ^ r2)
        tau ^= self.lifters[self.c2].lift_batch(r1)
        tau ^= self.lifters[self.c1].lift_batch(r2)
        rho = {color_label({self.cstar, self.c1}): r1, color_label({self.cstar, self.c2}): r2}
        return rho, r1 ^ r2, tau

    def run_batch(self, E: np.ndarray, check: bool = True) -> BatchOutcome:
        E = np.atleast_2d(E).astype(np.uint8)
        _, _, tau = self.decode_batch(self.syndromes(E))
        valid, failure = self._finish(E, True, tau)
        return BatchOutcome(valid=valid, failure=failure)

    def decode(self, sigma: Chain, error: Chain | None = None) -> DecodeOutcome:
        S = sigma.to_array(self.colex.n_cells(0))[None, :]
        rho, combined, tau = self.decode_batch(S)
        out = DecodeOutcome(
            error=error,
            syndrome=sigma,
            rho={lab: Chain.from_array(1, r[0]) for lab, r in rho.items()},
            rho_combined=Chain.from_array(1, combined[0]),
            tau=Chain.from_array(2, tau[0]),
            valid=None,
            logical_class=None,
        )
        if error is not None:
            resid = error.to_array(self.n_qubits)[None, :] ^ tau
            out.valid = not np.any(self.syndromes(resid))
            out.logical_class = self.cc_basis.classes(resid)[0]
        return out


_DECODERS: dict[tuple, RestrictionDecoder] = {}


def _decoder(colex: Colex, k: int, cstar: int, tc: str) -> RestrictionDecoder:
    key = (id(colex), k, cstar, tc)
    if key not in _DECODERS:
        _DECODERS[key] = RestrictionDecoder(colex, k, cstar, tc)
    return _DECODERS[key]


def restriction_decode(
    colex: Colex, k: int, cstar: int | str, tc: str, sigma: Chain, error: Chain | None = None
) -> DecodeOutcome:
    """Decode ``sigma`` with the restriction decoder (cached per lattice and settings)."""
    cstar = next(iter(colorset(cstar)))
    return _decoder(colex, k, cstar, tc).decode(sigma, error)


def simplified_decode_2d(colex: Colex, sigma: Chain, cstar: int = 0, tc: str = "mwpm", error: Chain | None = None) -> DecodeOutcome:
    return SimplifiedDecoder2D(colex, cstar, tc).decode(sigma, error)


def success_equivalence_check(outcome: DecodeOutcome) -> bool:
    """Color-code success holds exactly when every toric correction succeeded."""
    if outcome.logical_class is None:
        raise ValueError("outcome has no error attached")
    cc_ok = not outcome.logical_class.any()
    toric_ok = all(not v.any() for v in outcome.toric_classes.values())
    return cc_ok == toric_ok

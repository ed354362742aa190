"""Invariant suites run by ``colorcode verify``."""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .complexes import CellComplex, Colex
from .decoder import LiftError, RestrictionDecoder
from .lattices import TORIC_FAMILIES, Family, build
from .restriction import check_boundary_inclusion, check_homology_isomorphism, check_morphism, restrict
from .tc_decoders import REGISTRY, TcDecoder, check_conformance, make_decoder

__all__ = ["ZeroDecoder", "boundary_squared_violations", "run_verification"]


class ZeroDecoder(TcDecoder):
    """Deliberately broken decoder that never corrects anything."""

    name = "broken"

    def _decode_batch(self, S):
        return np.zeros((S.shape[0], self.lattice.n_cells(1)), dtype=np.uint8)


def _nonzero_mod2(m) -> int:
    m = sp.csr_matrix(m, dtype=np.int64)
    m.data %= 2
    m.eliminate_zeros()
    return m.nnz


def boundary_squared_violations(cx: CellComplex) -> list[str]:
    out = []
    for k in range(2, cx.dim + 1):
        prod = cx.boundary_matrix(k - 1).astype(np.int64) @ cx.boundary_matrix(k).astype(np.int64)
        if _nonzero_mod2(prod):
            out.append(f"{cx.name}: d_{k - 1} d_{k} != 0")
    if isinstance(cx, Colex):
        d = cx.dim
        for k in range(1, d):
            prod = cx.generalized_boundary_matrix(d, k - 1).astype(np.int64) @ cx.generalized_boundary_matrix(d - k - 1, d).astype(np.int64)
            if _nonzero_mod2(prod):
                out.append(f"{cx.name}: checks for k={k} do not commute")
    return out


def run_verification(
    families: list[str] | None = None,
    size: int | None = None,
    trials: int = 2000,
    seed: int = 0,
    inject: str | None = None,
    log: Callable[[str], None] = lambda s: None,
) -> dict:
    """Run every suite; returns ``{"checks": [...], "violations": [...]}``."""
    fams = [Family.parse(f) for f in families] if families else sorted(Family, key=lambda f: f.value)
    L = size or 4
    checks, violations = [], []

    def record(name: str, problems: list[str]):
        checks.append({"check": name, "violations": len(problems)})
        violations.extend(f"[{name}] {p}" for p in problems)
        log(f"{'ok  ' if not problems else 'FAIL'} {name}" + (f" ({len(problems)} violations)" if problems else ""))

    tcs = ["broken"] if inject == "decoder" else ["mwpm", "uf"]
    if inject == "decoder":
        REGISTRY["broken"] = ZeroDecoder
    try:
        for fam in fams:
            cx = build(fam, L)
            record(f"boundary^2 {cx.name}", boundary_squared_violations(cx))
            if fam in TORIC_FAMILIES:
                continue
            d = cx.dim
            for k in range(1, d):
                for C in itertools.combinations(range(d + 1), k + 1):
                    rl = restrict(cx, C, k)
                    record(f"morphism {rl.name} k={k}", [f"{side} basis element {i}" for side, i in check_morphism(cx, rl)])
                    b_r, b_p = check_homology_isomorphism(cx, rl)
                    record(f"homology {rl.name} k={k}", [] if b_r == b_p else [f"betti {b_r} vs {b_p}"])
                    record(f"boundary inclusion {rl.name}", [] if check_boundary_inclusion(cx, rl) else ["link not a boundary"])
                    if k == 1:
                        for tc in tcs:
                            record(f"conformance {tc} on {rl.name}", check_conformance(make_decoder(tc, rl), 100, 0.1, seed))
            ps = (0.05, 0.1) if d == 2 else (0.005, 0.01)
            rng_seed = seed
            for tc in tcs:
                dec = RestrictionDecoder(cx, 1, 0, tc)
                probs = {"validity": [], "equivalence": [], "projection": [], "lift": []}
                for p in ps:
                    rng = np.random.default_rng([rng_seed, int(p * 1e6)])
                    E = (rng.random((trials, dec.n_qubits)) < p).astype(np.uint8)
                    try:
                        o = dec.run_batch(E)
                    except LiftError as exc:
                        probs["lift"].append(f"seed={rng_seed} p={p}: {exc}")
                        continue
                    for key, arr in [("validity", o.valid), ("equivalence", o.equivalent), ("projection", o.projection_ok)]:
                        for t in np.flatnonzero(~arr)[:5]:
                            probs[key].append(f"seed={rng_seed} p={p} trial={t}")
                for key, pr in probs.items():
                    record(f"{key} {cx.name} {tc}", pr)
    finally:
        REGISTRY.pop("broken", None)
    return {"lattice_size": L, "trials": trials, "seed": seed, "checks": checks, "violations": violations}

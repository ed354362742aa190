import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorcode.complexes import Chain
from colorcode.lattices import build
from colorcode.tc_decoders import (
    DecoderError,
    DecoderUnavailable,
    MWPMDecoder,
    TcDecoder,
    UnionFindDecoder,
    available_decoders,
    check_conformance,
    make_decoder,
    mwpm_decode,
    mwpm_matching,
    uf_decode,
)


def bfs_all(cx):
    """All-pairs graph distances by plain BFS (independent of the decoders)."""
    n = cx.n_cells(0)
    nbr = [[] for _ in range(n)]
    for a, b in cx.edges:
        nbr[a].append(b)
        nbr[b].append(a)
    D = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        D[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for w in nbr[u]:
                    if D[s, w] < 0:
                        D[s, w] = D[s, u] + 1
                        nxt.append(w)
            frontier = nxt
    return D


def brute_force_min_pairing(verts, D):
    """Minimum over all (n-1)!! perfect pairings."""
    verts = list(verts)
    if not verts:
        return 0
    a = verts[0]
    best = None
    for i in range(1, len(verts)):
        rest = verts[1:i] + verts[i + 1 :]
        w = D[a, verts[i]] + brute_force_min_pairing(rest, D)
        best = w if best is None else min(best, w)
    return best


@pytest.fixture(scope="module")
def square8():
    return build("square", 8)


@pytest.fixture(scope="module")
def dist8(square8):
    return bfs_all(square8)


@pytest.mark.parametrize("name", ["mwpm", "uf"])
def test_empty_syndrome(square8, name):
    assert make_decoder(name, square8).decode(Chain(0)) == Chain(1)


@pytest.mark.parametrize("name", ["mwpm", "uf"])
def test_adjacent_pair_gives_joining_edge(square8, name):
    e = 5
    a, b = square8.edges[e]
    out = make_decoder(name, square8).decode(Chain(0, [a, b]))
    assert out == Chain(1, [e])


def test_distant_pair_weight(square8, dist8):
    out = mwpm_decode(square8, Chain(0, [0, 27]))
    assert len(out) == dist8[0, 27] == 6
    assert square8.boundary(out) == Chain(0, [0, 27])


def test_mwpm_matches_brute_force(square8, dist8):
    rng = np.random.default_rng(11)
    dec = MWPMDecoder(square8)
    for _ in range(200):
        n = 2 * int(rng.integers(1, 6))
        verts = rng.choice(square8.n_cells(0), n, replace=False)
        syn = Chain(0, verts)
        rho = dec.decode(syn)
        assert square8.boundary(rho) == syn
        best = brute_force_min_pairing(sorted(map(int, verts)), dist8)
        assert len(rho) == best
        m = dec.matching(syn)
        assert m.weight == best
        assert sorted(v for p in m.pairs for v in p) == sorted(map(int, verts))
        assert square8.boundary(m.correction) == syn


@pytest.mark.parametrize("name", ["mwpm", "uf"])
@pytest.mark.parametrize("fam,L", [("square", 8), ("two_square", 8), ("diamond", 4), ("cubic", 4)])
def test_conformance(name, fam, L):
    assert check_conformance(make_decoder(name, build(fam, L)), trials=200, p=0.12) == []


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.4))
@settings(max_examples=30, deadline=None)
def test_uf_validity_fuzzed(seed, p):
    cx = build("two_square", 8)
    rng = np.random.default_rng(seed)
    E = (rng.random((20, cx.n_cells(1))) < p).astype(np.uint8)
    D = cx.boundary_matrix(1)
    S = ((D @ E.T.astype(np.int64)).T % 2).astype(np.uint8)
    R = UnionFindDecoder(cx).decode_batch(S)
    assert np.array_equal((D @ R.T.astype(np.int64)).T % 2, S)


@pytest.mark.parametrize("name", ["mwpm", "uf"])
def test_odd_syndrome_rejected(square8, name):
    with pytest.raises(DecoderError, match="unmatched excitation"):
        make_decoder(name, square8).decode(Chain(0, [0, 1, 2]))


def test_mwpm_matching_rejects_odd(square8):
    with pytest.raises(DecoderError):
        mwpm_matching(square8, Chain(0, [3]))


@pytest.mark.parametrize("name", ["mwpm", "uf"])
def test_determinism(square8, name):
    rng = np.random.default_rng(1)
    syn = Chain(0, rng.choice(64, 10, replace=False))
    assert make_decoder(name, square8).decode(syn) == make_decoder(name, square8).decode(syn)


def test_broken_stub_fails_conformance(square8):
    class Lazy(TcDecoder):
        name = "lazy"

        def _decode_batch(self, S):
            return np.zeros((S.shape[0], self.lattice.n_cells(1)), dtype=np.uint8)

    problems = check_conformance(Lazy(square8), trials=50, p=0.1)
    assert problems and "correction boundary" in problems[0]


def test_sweep_slot_unavailable(square8):
    assert "sweep" in available_decoders()
    with pytest.raises(DecoderUnavailable, match="unavailable"):
        make_decoder("sweep", square8, 2)
    with pytest.raises(DecoderUnavailable):
        make_decoder("mwpm", square8, 2)
    with pytest.raises(DecoderUnavailable):
        make_decoder("nope", square8)


def test_uf_failure_rate_close_to_mwpm_on_two_square():
    """At 10% the two decoders sit well below threshold with similar failure rates."""
    cx = build("two_square", 16)
    rng = np.random.default_rng(7)
    n = 3000
    E = (rng.random((n, cx.n_cells(1))) < 0.10).astype(np.uint8)
    D = cx.boundary_matrix(1)
    S = ((D @ E.T.astype(np.int64)).T % 2).astype(np.uint8)
    from colorcode.homology import homology_basis

    hb = homology_basis(cx, 1)
    rates = {}
    for name in ("mwpm", "uf"):
        R = make_decoder(name, cx).decode_batch(S) ^ E
        assert not np.any((D @ R.T.astype(np.int64)).T % 2)
        rates[name] = np.any(hb.classes(R), axis=1).mean()
    assert rates["mwpm"] <= rates["uf"] + 0.02
    assert rates["uf"] < 0.1
    sigma = np.sqrt(sum(r * (1 - r) for r in rates.values()) / n)
    assert abs(rates["uf"] - rates["mwpm"]) < max(5 * sigma, 0.03)


def test_uf_runtime_scales_near_linearly():
    import time

    times = {}
    for L in (16, 48):
        cx = build("two_square", L)
        rng = np.random.default_rng(0)
        E = (rng.random((200, cx.n_cells(1))) < 0.1).astype(np.uint8)
        S = ((cx.boundary_matrix(1) @ E.T.astype(np.int64)).T % 2).astype(np.uint8)
        dec = UnionFindDecoder(cx)
        dec.decode_batch(S[:2])
        t = time.perf_counter()
        dec.decode_batch(S)
        times[L] = (time.perf_counter() - t) / cx.n_cells(1)
    # per-qubit cost grows far slower than the 9x size increase
    assert times[48] < 4 * times[16]


def test_functional_wrappers(square8):
    syn = Chain(0, square8.edges[3])
    assert uf_decode(square8, syn) == mwpm_decode(square8, syn) == Chain(1, [3])


def test_uf_growth_option(square8):
    with pytest.raises(ValueError):
        UnionFindDecoder(square8, growth="fast")
    assert check_conformance(UnionFindDecoder(square8, growth="uniform"), trials=100, p=0.1) == []


def test_weighted_growth_beats_uniform_growth():
    """Weighted growth fails less often than uniform growth near threshold (paired samples)."""
    from colorcode.homology import homology_basis

    cx = build("square", 24)
    hb = homology_basis(cx, 1)
    D = cx.boundary_matrix(1)
    rng = np.random.default_rng(21)
    E = (rng.random((3000, cx.n_cells(1))) < 0.095).astype(np.uint8)
    S = ((D @ E.T.astype(np.int64)).T % 2).astype(np.uint8)
    fails = {g: np.any(hb.classes(UnionFindDecoder(cx, growth=g).decode_batch(S) ^ E), axis=1) for g in ("uniform", "weighted")}
    # paired sign test on the trials where the two disagree
    only_u = int((fails["uniform"] & ~fails["weighted"]).sum())
    only_w = int((fails["weighted"] & ~fails["uniform"]).sum())
    from scipy.stats import binomtest

    assert only_u > only_w
    assert binomtest(only_u, only_u + only_w, 0.5, alternative="greater").pvalue < 1e-3

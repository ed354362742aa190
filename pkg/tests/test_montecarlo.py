import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorcode.homology import color_code_basis
from colorcode.lattices import Family, LatticeSpec, build
from colorcode.montecarlo import (
    CrossingError,
    DecoderSpec,
    NoiseModel,
    PfailRow,
    effective_noise,
    f_2sq,
    f_cub,
    f_dia,
    fit_crossing,
    inverse_effective_noise,
    parity_noise,
    plot_svg,
    read_csv,
    sample_errors,
    sample_grid,
    sample_pfail,
    threshold_transfer,
    verify_effective_noise,
    wilson_interval,
    write_csv,
)
from colorcode.restriction import restrict

SQ8 = LatticeSpec(Family.square_octagon_colex, 8)
MWPM = DecoderSpec("restriction", "mwpm")


def test_p_zero_never_fails():
    row = sample_pfail(SQ8, MWPM, NoiseModel(0.0, seed=1), 500)
    assert row.failures == 0 and row.trials == 500


def test_plateau_at_half(sqoct8):
    """At p = 1/2 the residual class is uniform over all logical classes."""
    n_classes = 2 ** color_code_basis(sqoct8, 1).rank
    plateau = 1 - 1 / n_classes
    assert plateau == 0.9375
    row = sample_pfail(SQ8, MWPM, NoiseModel(0.5, seed=3), 4000)
    assert row.ci_lo - 0.01 <= plateau <= row.ci_hi + 0.01
    assert abs(row.pfail - plateau) < 4 * math.sqrt(plateau * (1 - plateau) / 4000)


@pytest.mark.slow
def test_pfail_decreases_with_size_below_threshold():
    rows = [
        sample_pfail(LatticeSpec(Family.square_octagon_colex, L), MWPM, NoiseModel(0.08, seed=L), 3000, jobs=2)
        for L in (8, 12, 16)
    ]
    pf = [r.pfail for r in rows]
    assert pf[0] > pf[1] > pf[2]
    assert rows[0].ci_lo > rows[2].ci_hi


def test_reproducible_and_batch_invariant():
    noise = NoiseModel(0.09, seed=77)
    a = sample_pfail(SQ8, MWPM, noise, 600, batch=600)
    b = sample_pfail(SQ8, MWPM, noise, 600, batch=170)
    c = sample_pfail(SQ8, MWPM, noise, 600, batch=100, jobs=3)
    assert a.failures == b.failures == c.failures
    d = sample_pfail(SQ8, MWPM, NoiseModel(0.09, seed=78), 600)
    assert d.trials == 600


def test_sample_errors_is_counter_based():
    full = sample_errors(50, 0.3, 9, 0, 20)
    part = sample_errors(50, 0.3, 9, 7, 5)
    assert np.array_equal(full[7:12], part)
    assert not np.array_equal(full[0], full[1])


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        sample_pfail(SQ8, MWPM, NoiseModel(0.1), 0)


@pytest.mark.parametrize("bad", [dict(p=-0.1), dict(p=1.5), dict(p=0.1, kind="Y"), dict(p=0.1, seed=-1)])
def test_noise_model_validation(bad):
    with pytest.raises(ValueError):
        NoiseModel(**bad)


def test_toric_and_simplified_runners():
    row = sample_pfail(LatticeSpec(Family.two_square_toric, 8), DecoderSpec("toric", "uf"), NoiseModel(0.05, seed=1), 300)
    assert row.decoder == "toric-uf" and 0 <= row.failures <= row.trials
    row = sample_pfail(SQ8, DecoderSpec("simplified", "mwpm"), NoiseModel(0.02, seed=1), 300)
    assert row.failures < 30
    with pytest.raises(ValueError):
        sample_pfail(SQ8, DecoderSpec("toric", "uf"), NoiseModel(0.05), 10)
    with pytest.raises(ValueError):
        sample_pfail(LatticeSpec(Family.two_square_toric, 8), MWPM, NoiseModel(0.05), 10)


def _wilson_by_hand(f, n, z=1.959963984540054):
    ph = f / n
    den = 1 + z * z / n
    center = (ph + z * z / (2 * n)) / den
    half = z / den * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n))
    return center - half, center + half


@given(st.integers(1, 5000), st.data())
@settings(max_examples=50, deadline=None)
def test_wilson_matches_formula(n, data):
    f = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(f, n)
    elo, ehi = _wilson_by_hand(f, n)
    assert lo == pytest.approx(elo, abs=1e-9) and hi == pytest.approx(ehi, abs=1e-9)
    assert 0 <= lo <= f / n <= hi <= 1


def _synthetic(p_c=0.1, sizes=(8, 12, 16), ps=np.linspace(0.09, 0.11, 6), trials=10**9):
    rows = []
    for L in sizes:
        for p in ps:
            pf = 0.5 + 0.8 * L * (p - p_c)
            f = int(round(pf * trials))
            rows.append(PfailRow("x", L, 1, "R", "t", float(p), trials, f, 0, 1))
    return rows


def test_fit_crossing_exact():
    fit = fit_crossing(_synthetic(), n_boot=20)
    assert fit.p_th == pytest.approx(0.1, abs=1e-6)
    assert set(fit.pair_crossings) == {"8-12", "12-16"}
    assert fit.spread < 1e-6


def test_fit_crossing_bootstrap_sigma():
    """Bootstrap sigma agrees with the spread of fits to independently resampled curves."""
    rng = np.random.default_rng(0)
    base = _synthetic(trials=2000)
    fit = fit_crossing(base, n_boot=300, seed=1)
    refits = []
    for _ in range(300):
        rows = [PfailRow(r.family, r.L, 1, "R", "t", r.p, r.trials, int(rng.binomial(r.trials, r.pfail)), 0, 1) for r in base]
        try:
            refits.append(fit_crossing(rows, n_boot=0).p_th)
        except CrossingError:
            pass
    assert fit.sigma == pytest.approx(np.std(refits), rel=0.25)


def test_fit_crossing_errors():
    with pytest.raises(CrossingError):
        fit_crossing(_synthetic(sizes=(8,)))
    with pytest.raises(CrossingError, match="outside"):
        fit_crossing(_synthetic(p_c=0.2))
    with pytest.raises(CrossingError):
        fit_crossing(_synthetic(ps=[0.09, 0.1]))
    flipped = [PfailRow(r.family, 40 - r.L, r.k, r.cstar, r.decoder, r.p, r.trials, r.failures, 0, 1) for r in _synthetic()]
    with pytest.raises(CrossingError, match="does not increase"):
        fit_crossing(flipped)


@given(st.floats(0, 0.5))
def test_effective_noise_is_parity_of_preimage(p):
    assert f_2sq(p) == pytest.approx(float(parity_noise(2, p)), abs=1e-12)
    assert f_cub(p) == pytest.approx(float(parity_noise(4, p)), abs=1e-12)
    assert f_dia(p) == pytest.approx(float(parity_noise(6, p)), abs=1e-12)


@given(st.sampled_from(["two_square", "cubic", "diamond", "3/4bcc"]), st.floats(0, 0.5))
def test_inverse_roundtrip(fam, p):
    q = effective_noise(fam, p)
    p_inv = inverse_effective_noise(fam, q)
    assert effective_noise(fam, p_inv) == pytest.approx(q, abs=1e-11)
    # p itself is only determined where f is not flat (f' -> 0 at p = 1/2)
    if p < 0.45:
        assert p_inv == pytest.approx(p, abs=1e-9)


def test_transfer_values():
    assert round(inverse_effective_noise("two_square", 0.177), 3) == 0.098
    assert round(threshold_transfer({"cubic": 0.0295, "diamond": 0.058}), 4) == 0.0075
    assert round(inverse_effective_noise("3/4bcc", 0.2275), 3) == 0.131
    assert inverse_effective_noise("3/4bcc", 0.2275) == pytest.approx((1 - math.sqrt(1 - 2 * 0.2275)) / 2, abs=1e-12)


def test_effective_noise_errors():
    with pytest.raises(ValueError):
        inverse_effective_noise("cubic", 0.6)
    with pytest.raises(ValueError):
        effective_noise("cubic", 0.7)
    with pytest.raises(ValueError):
        effective_noise("square_octagon", 0.1)
    with pytest.raises(ValueError):
        threshold_transfer({})


def test_verify_effective_noise_2d(sqoct8):
    rep = verify_effective_noise(sqoct8, restrict(sqoct8, "RG", 1), 0.1, n_qubits=2 * 10**5, seed=4)
    assert rep["preimage_size"] == 2
    assert rep["expected"] == pytest.approx(0.18)
    assert rep["ok"], rep


def test_verify_effective_noise_p0(sqoct8):
    rep = verify_effective_noise(sqoct8, restrict(sqoct8, "RB", 1), 0.0, n_qubits=10**4)
    assert rep["measured"] == 0 and rep["ok"]


def test_verify_effective_noise_cubic(bcc4):
    rep = verify_effective_noise(bcc4, restrict(bcc4, "RG", 1), 0.05, n_qubits=2 * 10**5, seed=2)
    assert rep["expected"] == pytest.approx(0.1719, abs=1e-4)
    assert rep["ok"], rep


def test_csv_roundtrip_and_plot(tmp_path):
    rows = sample_grid("sqoct", [8], [0.05, 0.1], MWPM, trials=100, seed=5)
    path = tmp_path / "r.csv"
    write_csv(rows, path)
    assert read_csv(path) == rows
    for r in rows:
        assert r.failures <= r.trials and r.ci_lo <= r.pfail <= r.ci_hi
    plot_svg(rows, tmp_path / "r.svg")
    assert (tmp_path / "r.svg").read_text().lstrip().startswith("<?xml")


def test_grid_seeds_differ_per_point():
    rows = sample_grid("sqoct", [8], [0.3, 0.3], MWPM, trials=200, seed=5)
    again = sample_grid("sqoct", [8], [0.3, 0.3], MWPM, trials=200, seed=5)
    assert [r.failures for r in rows] == [r.failures for r in again]

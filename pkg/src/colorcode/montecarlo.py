"""Monte Carlo estimation of logical failure rates and thresholds.

Errors for trial ``t`` come from a Philox stream keyed by the seed with ``t``
in the top counter word, so a trial's error depends only on ``(seed, t)``:
results do not change with batch size or the number of worker processes.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize, stats

from .complexes import Colex
from .decoder import BatchOutcome, RestrictionDecoder, SimplifiedDecoder2D
from .homology import homology_basis
from .lattices import Family, LatticeSpec, build
from .restriction import RestrictedLattice
from .tc_decoders import make_decoder

__all__ = [
    "NoiseModel",
    "DecoderSpec",
    "PfailRow",
    "CrossingFit",
    "ThresholdEstimate",
    "InvariantViolation",
    "CrossingError",
    "sample_errors",
    "make_runner",
    "sample_pfail",
    "sample_grid",
    "wilson_interval",
    "fit_crossing",
    "EFFECTIVE_NOISE",
    "effective_noise",
    "parity_noise",
    "inverse_effective_noise",
    "threshold_transfer",
    "verify_effective_noise",
    "write_csv",
    "read_csv",
    "write_summary",
    "plot_svg",
]


class InvariantViolation(AssertionError):
    """A property that must hold on every trial failed."""


class CrossingError(ValueError):
    """The failure curves do not cross inside the scanned range."""


@dataclass(frozen=True)
class NoiseModel:
    """iid single-qubit Pauli noise; only one sector is decoded, so ``Z``
    and ``X`` behave identically on the error chain."""

    p: float
    kind: str = "Z"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.kind not in ("Z", "X"):
            raise ValueError(f"noise kind must be 'Z' or 'X', got {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class DecoderSpec:
    """Which decoder to run.

    ``kind`` is ``"restriction"``, ``"simplified"`` (2D, no restricted
    lattices) or ``"toric"`` (plain toric code on a toric lattice family).
    """

    kind: str = "restriction"
    tc: str = "mwpm"
    k: int = 1
    cstar: int = 0

    @property
    def label(self) -> str:
        return self.tc if self.kind == "restriction" else f"{self.kind}-{self.tc}"


def sample_errors(n: int, p: float, seed: int, start: int, count: int) -> np.ndarray:
    """Errors for trials ``start .. start+count-1`` as a ``count x n`` 0/1 array."""
    out = np.empty((count, n), dtype=np.uint8)
    for i in range(count):
        g = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, start + i]))
        out[i] = g.random(n) < p
    return out


class _ToricRunner:
    """Toric code on a cell complex: qubits on edges, checks on vertices."""

    def __init__(self, lattice, tc: str):
        self.lattice = lattice
        self.decoder = make_decoder(tc, lattice, 1)
        self.H = lattice.boundary_matrix(1)
        self.basis = homology_basis(lattice, 1)
        self.n_qubits = lattice.n_cells(1)

    def run_batch(self, E: np.ndarray, check: bool = True) -> BatchOutcome:
        S = ((self.H @ E.T.astype(np.int32)).T & 1).astype(np.uint8)
        R = self.decoder.decode_batch(S) ^ E
        valid = ~np.any(((self.H @ R.T.astype(np.int32)).T & 1) != 0, axis=1)
        return BatchOutcome(valid=valid, failure=np.any(self.basis.classes(R), axis=1))


@lru_cache(maxsize=16)
def make_runner(spec: LatticeSpec, dec: DecoderSpec):
    """Bound decoder for a lattice and decoder spec (cached per process)."""
    lat = build(spec.family, spec.L)
    if dec.kind == "toric":
        if isinstance(lat, Colex):
            raise ValueError(f"{spec.family.value} is a colex; the toric runner needs a toric lattice")
        return _ToricRunner(lat, dec.tc)
    if not isinstance(lat, Colex):
        raise ValueError(f"{spec.family.value} is not a colex")
    if dec.kind == "simplified":
        return SimplifiedDecoder2D(lat, dec.cstar, dec.tc)
    if dec.kind == "restriction":
        return RestrictionDecoder(lat, dec.k, dec.cstar, dec.tc)
    raise ValueError(f"unknown decoder kind {dec.kind!r}")


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = stats.binomtest(failures, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class PfailRow:
    family: str
    L: int
    k: int
    cstar: str
    decoder: str
    p: float
    trials: int
    failures: int
    ci_lo: float
    ci_hi: float

    @property
    def pfail(self) -> float:
        return self.failures / self.trials if self.trials else float("nan")


CSV_COLUMNS = ["family", "L", "k", "cstar", "decoder", "p", "trials", "failures", "ci_lo", "ci_hi"]


def _chunk(args) -> tuple[int, int]:
    spec, dec, noise, start, count, check = args
    runner = make_runner(spec, dec)
    E = sample_errors(runner.n_qubits, noise.p, noise.seed, start, count)
    out = runner.run_batch(E, check=check)
    if not out.valid.all():
        t = start + int(np.flatnonzero(~out.valid)[0])
        raise InvariantViolation(f"invalid correction: seed={noise.seed} trial={t} p={noise.p}")
    if check and out.equivalent is not None and not out.equivalent.all():
        t = start + int(np.flatnonzero(~out.equivalent)[0])
        raise InvariantViolation(f"success equivalence broken: seed={noise.seed} trial={t} p={noise.p}")
    if check and out.projection_ok is not None and not out.projection_ok.all():
        t = start + int(np.flatnonzero(~out.projection_ok)[0])
        raise InvariantViolation(f"projection identity broken: seed={noise.seed} trial={t} p={noise.p}")
    return out.failures, out.trials


def _run_chunks(jobs_list, jobs: int):
    if jobs <= 1 or len(jobs_list) == 1:
        return [_chunk(a) for a in jobs_list]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_chunk, jobs_list))


def sample_pfail(
    spec: LatticeSpec,
    dec: DecoderSpec,
    noise: NoiseModel,
    trials: int,
    batch: int = 2000,
    jobs: int = 1,
    check: bool = False,
) -> PfailRow:
    """Estimate the logical failure probability at one ``(L, p)`` point.

    Every trial's correction is checked for validity. With ``check`` the
    success equivalence and projection identity are checked too.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    chunks = [(spec, dec, noise, s, min(batch, trials - s), check) for s in range(0, trials, batch)]
    res = _run_chunks(chunks, jobs)
    failures = sum(f for f, _ in res)
    lo, hi = wilson_interval(failures, trials)
    return PfailRow(
        family=spec.family.value,
        L=spec.L,
        k=dec.k,
        cstar="RGBY"[dec.cstar],
        decoder=dec.label,
        p=float(noise.p),
        trials=trials,
        failures=failures,
        ci_lo=lo,
        ci_hi=hi,
    )


def sample_grid(
    family: Family | str,
    sizes: Sequence[int],
    ps: Sequence[float],
    dec: DecoderSpec,
    trials: int,
    seed: int = 0,
    batch: int = 2000,
    jobs: int = 1,
    progress: Callable[[PfailRow], None] | None = None,
) -> list[PfailRow]:
    """Failure rates over a grid; point ``(L, p)`` uses a seed derived from ``seed``, ``L`` and ``p``."""
    rows = []
    for L in sizes:
        spec = LatticeSpec(Family.parse(family), L)
        for i, p in enumerate(ps):
            sub = int(np.random.SeedSequence([seed, L, i]).generate_state(2, np.uint32).view(np.uint64)[0])
            row = sample_pfail(spec, dec, NoiseModel(float(p), seed=sub), trials, batch, jobs)
            rows.append(row)
            if progress:
                progress(row)
    return rows


@dataclass
class CrossingFit:
    p_th: float
    sigma: float
    spread: float
    pair_crossings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ThresholdEstimate:
    rows: list[PfailRow]
    fit: CrossingFit | None
    ci_method: str = "wilson-0.95"

    def to_dict(self) -> dict:
        return {
            "ci_method": self.ci_method,
            "rows": [asdict(r) for r in self.rows],
            "fit": None if self.fit is None else self.fit.to_dict(),
        }


def _curves(rows: Iterable[PfailRow]) -> dict[int, dict[float, tuple[int, int]]]:
    out: dict[int, dict[float, tuple[int, int]]] = {}
    for r in rows:
        f, t = out.setdefault(r.L, {}).get(r.p, (0, 0))
        out[r.L][r.p] = (f + r.failures, t + r.trials)
    return out


def _pair_crossing(c1: dict, c2: dict, lo_hi: tuple[float, float] | None = None) -> float:
    ps = np.array(sorted(set(c1) & set(c2)))
    if len(ps) < 3:
        raise CrossingError("need at least 3 shared p values per pair of sizes")
    f1 = np.array([c1[p][0] / c1[p][1] for p in ps])
    f2 = np.array([c2[p][0] / c2[p][1] for p in ps])
    var = np.array([f1[i] * (1 - f1[i]) / c1[p][1] + f2[i] * (1 - f2[i]) / c2[p][1] for i, p in enumerate(ps)])
    diff = f2 - f1
    w = 1.0 / np.maximum(var, 1e-12)
    slope, icpt = np.polyfit(ps, diff, 1, w=np.sqrt(w))
    lo, hi = (ps[0], ps[-1]) if lo_hi is None else lo_hi
    if slope <= 0:
        raise CrossingError(
            f"difference of failure curves does not increase with p (slope {slope:.3g}); no crossing"
        )
    root = -icpt / slope
    if not lo <= root <= hi:
        raise CrossingError(f"linear fit crosses at p={root:.4g}, outside the scanned range [{lo}, {hi}]")
    return float(root)


def fit_crossing(rows: Sequence[PfailRow], n_boot: int = 200, seed: int = 0) -> CrossingFit:
    """Threshold from crossings of adjacent-size failure curves.

    For each pair of consecutive sizes the difference of the curves is fitted
    by a weighted line in ``p``; its root is the pair crossing. The estimate
    is their mean. ``spread`` is their standard deviation and ``sigma`` a
    parametric bootstrap over resampled failure counts.
    """
    curves = _curves(rows)
    sizes = sorted(curves)
    if len(sizes) < 2:
        raise CrossingError("need at least two sizes")
    pairs = list(zip(sizes[:-1], sizes[1:]))
    cross = {f"{a}-{b}": _pair_crossing(curves[a], curves[b]) for a, b in pairs}
    vals = np.array(list(cross.values()))
    p_th = float(vals.mean())
    rng = np.random.default_rng(seed)
    boot = []
    for _ in range(n_boot):
        res = {}
        for L, c in curves.items():
            res[L] = {p: (int(rng.binomial(t, f / t)), t) for p, (f, t) in c.items()}
        try:
            boot.append(np.mean([_pair_crossing(res[a], res[b], (-np.inf, np.inf)) for a, b in pairs]))
        except CrossingError:
            continue
    sigma = float(np.std(boot)) if len(boot) > 1 else float("nan")
    return CrossingFit(p_th, sigma, float(vals.std()), cross)


def f_2sq(p):
    return 2 * p * (1 - p)


def f_cub(p):
    return 4 * p * (1 - p) ** 3 + 4 * p**3 * (1 - p)


def f_dia(p):
    return 6 * p * (1 - p) ** 5 + 20 * p**3 * (1 - p) ** 3 + 6 * p**5 * (1 - p)


def parity_noise(m: int, p):
    """Probability that an odd number of ``m`` iid flips occur."""
    return (1 - (1 - 2 * np.asarray(p, dtype=float)) ** m) / 2


EFFECTIVE_NOISE: dict[str, Callable] = {
    "two_square": f_2sq,
    "cubic": f_cub,
    "diamond": f_dia,
    "three_quarter_bcc": f_2sq,
}

_PREIMAGE_SIZE = {"two_square": 2, "cubic": 4, "diamond": 6, "three_quarter_bcc": 2}


def _family_key(family: str | Family) -> str:
    fam = Family.parse(family).value
    key = fam.replace("_toric", "")
    if key not in EFFECTIVE_NOISE:
        raise ValueError(f"no effective-noise formula for {fam}")
    return key


def effective_noise(family: str | Family, p: float) -> float:
    """Induced error rate on restricted-lattice qubits for color-code rate ``p``."""
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    return float(EFFECTIVE_NOISE[_family_key(family)](p))


def inverse_effective_noise(family: str | Family, q: float) -> float:
    """``p`` in ``[0, 1/2]`` with ``effective_noise(family, p) == q``, by bisection."""
    f = EFFECTIVE_NOISE[_family_key(family)]
    grid = np.linspace(0, 0.5, 201)
    if np.any(np.diff(f(grid)) <= 0):
        raise ArithmeticError("effective noise is not increasing on [0, 1/2]")
    if not f(0.0) <= q <= f(0.5):
        raise ValueError(f"q={q} outside the range [{f(0.0)}, {f(0.5)}] of the effective noise")
    if q == f(0.0):
        return 0.0
    if q == f(0.5):
        return 0.5
    return float(optimize.bisect(lambda p: f(p) - q, 0.0, 0.5, xtol=1e-12))


def threshold_transfer(thresholds: dict) -> float:
    """Lower bound on the color-code threshold from toric thresholds of its restricted lattices."""
    if not thresholds:
        raise ValueError("no restricted-lattice thresholds given")
    return min(inverse_effective_noise(fam, q) for fam, q in thresholds.items())


def verify_effective_noise(
    colex: Colex, rl: RestrictedLattice, p: float, n_qubits: int = 10**6, seed: int = 0, batch: int = 200
) -> dict:
    """Sample color-code errors, project them onto ``rl`` and compare with the predicted rate.

    The prediction uses the number ``m`` of top simplices projecting onto
    each restricted qubit: an odd number of them must fail. The
    independence check averages, per trial, the excess joint-failure rate of
    restricted qubits sharing a vertex; the mean over trials is compared
    with its standard error.
    """
    pre = np.bincount(rl.pi1_table, minlength=rl.n_cells(rl.k))
    sizes = np.unique(pre)
    if len(sizes) != 1:
        raise ValueError(f"restricted qubits have differing preimage sizes {sizes.tolist()}")
    m = int(sizes[0])
    expected = float(parity_noise(m, p))
    n_r = rl.n_cells(rl.k)
    trials = max(2, math.ceil(n_qubits / n_r))
    # pairs of restricted k-cells sharing a (k-1)-face
    D = rl.boundary_matrix(rl.k).tocsr()
    pa, pb = [], []
    for r in range(D.shape[0]):
        cells = D.indices[D.indptr[r] : D.indptr[r + 1]]
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                pa.append(cells[i])
                pb.append(cells[j])
    pa, pb = np.array(pa), np.array(pb)
    P1T = rl.P1.T.tocsr().astype(np.int32)
    ones = 0
    excess = []
    for s in range(0, trials, batch):
        c = min(batch, trials - s)
        E = sample_errors(colex.n_cells(colex.dim), p, seed, s, c)
        X = ((E.astype(np.int32) @ P1T) & 1).astype(np.uint8)
        ones += int(X.sum())
        excess.extend((X[:, pa] & X[:, pb]).mean(axis=1) - expected**2)
    N = trials * n_r
    rate = ones / N
    sd = math.sqrt(max(expected * (1 - expected), 1e-300) / N)
    z = (rate - expected) / sd if expected > 0 else (0.0 if rate == 0 else math.inf)
    excess = np.asarray(excess)
    se = excess.std(ddof=1) / math.sqrt(len(excess)) if excess.std() > 0 else 0.0
    z_corr = float(excess.mean() / se) if se > 0 else 0.0
    return {
        "lattice": rl.name,
        "p": p,
        "preimage_size": m,
        "expected": expected,
        "measured": rate,
        "samples": N,
        "sigma": sd,
        "z": z,
        "pair_excess": float(excess.mean()),
        "pair_z": z_corr,
        "n_pairs": int(len(pa)),
        "ok": bool(abs(z) <= 3 and abs(z_corr) <= 3),
    }


def write_csv(rows: Sequence[PfailRow], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(asdict(r))


def read_csv(path: str | os.PathLike) -> list[PfailRow]:
    with open(path, newline="") as fh:
        out = []
        for d in csv.DictReader(fh):
            out.append(
                PfailRow(
                    d["family"], int(d["L"]), int(d["k"]), d["cstar"], d["decoder"], float(d["p"]),
                    int(d["trials"]), int(d["failures"]), float(d["ci_lo"]), float(d["ci_hi"]),
                )
            )
        return out


def write_summary(est: ThresholdEstimate, path: str | os.PathLike, extra: dict | None = None) -> None:
    data = est.to_dict()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)


def plot_svg(rows: Sequence[PfailRow], path: str | os.PathLike, fit: CrossingFit | None = None) -> None:
    """Failure curves per size with Wilson error bars (needs matplotlib)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    for L in sorted({r.L for r in rows}):
        rs = sorted((r for r in rows if r.L == L), key=lambda r: r.p)
        ps = [r.p for r in rs]
        pf = [r.pfail for r in rs]
        err = [[r.pfail - r.ci_lo for r in rs], [r.ci_hi - r.pfail for r in rs]]
        ax.errorbar(ps, pf, yerr=err, marker="o", ms=3, capsize=2, label=f"L={L}")
    if fit is not None:
        ax.axvline(fit.p_th, color="gray", ls="--", lw=1)
    ax.set_xlabel("p")
    ax.set_ylabel("failure probability")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)

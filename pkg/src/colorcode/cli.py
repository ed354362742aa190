"""Command line entry point: ``colorcode {build,decode,sample,threshold,verify}``.

Exit codes: 0 success, 1 invariant violation, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .complexes import Chain, Colex, colorset
from .decoder import LiftError
from .lattices import Family, LatticeSpec, build
from .montecarlo import (
    DecoderSpec,
    InvariantViolation,
    NoiseModel,
    ThresholdEstimate,
    CrossingError,
    fit_crossing,
    plot_svg,
    sample_grid,
    sample_pfail,
    write_csv,
    write_summary,
)
from .tc_decoders import DecoderUnavailable, available_decoders

OUTPUT_ENV = "COLORCODE_OUTPUT_DIR"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce a sampling run."""

    family: str = "square_octagon_colex"
    sizes: list = field(default_factory=lambda: [8])
    ps: list = field(default_factory=lambda: [0.1])
    decoder: str = "restriction"
    tc_decoder: str = "mwpm"
    k: int = 1
    cstar: str = "R"
    trials: int = 10_000
    seed: int = 0
    batch: int = 2000
    jobs: int = 1
    output_dir: str = "."
    name: str = "run"

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        data = dict(data.get("config", data))
        grid = data.pop("p_grid", None)
        if grid is not None:
            lo, hi, step = grid["min"], grid["max"], grid["step"]
            data["ps"] = [round(x, 10) for x in np.arange(lo, hi + step / 2, step)]
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def decoder_spec(self) -> DecoderSpec:
        return DecoderSpec(self.decoder, self.tc_decoder, self.k, _color(self.cstar))


def _color(c) -> int:
    cs = colorset(c)
    if len(cs) != 1:
        raise UsageError(f"expected one color, got {c!r}")
    return next(iter(cs))


def build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    from . import __version__

    return f"v{__version__}"


def load_config(path: str) -> RunConfig:
    """TOML preset (file path or bundled preset name) or a JSON artifact with an embedded config."""
    p = Path(path)
    if not p.exists():
        name = path if path.endswith(".toml") else f"{path}.toml"
        res = resources.files("colorcode") / "presets" / Path(name).name
        if not res.is_file():
            raise UsageError(f"no config file or bundled preset named {path!r}")
        return RunConfig.from_mapping(tomllib.loads(res.read_text()))
    text = p.read_text()
    if p.suffix == ".json":
        return RunConfig.from_mapping(json.loads(text))
    return RunConfig.from_mapping(tomllib.loads(text))


def _out_dir(arg: str | None) -> Path:
    d = Path(arg or os.environ.get(OUTPUT_ENV, "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _provenance(cfg: RunConfig) -> dict:
    return {"config": asdict(cfg), "build": build_id(), "seed": cfg.seed, "created": time.strftime("%Y-%m-%dT%H:%M:%S")}


def cmd_build(args) -> int:
    lat = build(args.family, args.size)
    obj = lat
    if args.restrict:
        from .restriction import restrict

        if not isinstance(lat, Colex):
            raise UsageError("--restrict needs a colex family")
        obj = restrict(lat, args.restrict, args.k)
    print(f"{obj.name}: cells per dimension {obj.counts}, Euler characteristic {obj.euler_characteristic()}")
    if args.out:
        Path(args.out).write_text(json.dumps(obj.dump()))
        print(f"wrote {args.out}")
    return 0


def _read_error(path: str) -> tuple[list[int], list[int] | None]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, list):
        return data, None
    return data.get("error", []), data.get("syndrome")


def cmd_decode(args) -> int:
    from .decoder import RestrictionDecoder, SimplifiedDecoder2D

    lat = build(args.family, args.size)
    if not isinstance(lat, Colex):
        raise UsageError("decode needs a colex family")
    cstar = _color(args.cstar)
    if args.simplified:
        dec = SimplifiedDecoder2D(lat, cstar, args.tc_decoder)
    else:
        dec = RestrictionDecoder(lat, args.k, cstar, args.tc_decoder)
    err_cells, syn_cells = _read_error(args.error_file) if args.error_file else ([], None)
    error = Chain(lat.dim, err_cells)
    if syn_cells is not None and not err_cells:
        sigma = Chain(args.k - 1, syn_cells)
        out = dec.decode(sigma)
    else:
        sigma = Chain.from_array(args.k - 1, dec.syndromes(error.to_array(dec.n_qubits)[None, :])[0])
        out = dec.decode(sigma, error)
    payload = out.to_dict()
    if out.logical_class is not None and not args.simplified:
        from .decoder import success_equivalence_check

        payload["equivalence"] = success_equivalence_check(out)
    text = json.dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    if out.valid is False or payload.get("equivalence") is False:
        return 1
    return 0


def _config_from_args(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = RunConfig()
    over = {}
    for key, attr in [
        ("family", "family"), ("decoder", "decoder"), ("tc_decoder", "tc_decoder"), ("k", "k"),
        ("cstar", "cstar"), ("trials", "trials"), ("seed", "seed"), ("batch", "batch"), ("jobs", "jobs"),
    ]:
        v = getattr(args, attr, None)
        if v is not None:
            over[key] = v
    if getattr(args, "size", None):
        over["sizes"] = list(args.size)
    if getattr(args, "p", None):
        over["ps"] = list(args.p)
    if getattr(args, "p_range", None):
        lo, hi, step = args.p_range
        over["ps"] = [round(x, 10) for x in np.arange(lo, hi + step / 2, step)]
    cfg = RunConfig(**{**asdict(cfg), **over})
    Family.parse(cfg.family)
    if cfg.jobs <= 0:
        cfg.jobs = os.cpu_count() or 1
    return cfg


def cmd_sample(args) -> int:
    cfg = _config_from_args(args)
    rows = []
    for L in cfg.sizes:
        for p in cfg.ps:
            row = sample_pfail(
                LatticeSpec(cfg.family, L), cfg.decoder_spec(), NoiseModel(p, seed=cfg.seed),
                cfg.trials, cfg.batch, cfg.jobs,
            )
            rows.append(row)
            print(f"L={row.L} p={row.p:.4f} failures={row.failures}/{row.trials} "
                  f"pfail={row.pfail:.4f} [{row.ci_lo:.4f}, {row.ci_hi:.4f}]")
    if args.out:
        write_csv(rows, args.out)
    return 0


def cmd_threshold(args) -> int:
    cfg = _config_from_args(args)
    out = _out_dir(args.out_dir or (cfg.output_dir if cfg.output_dir != "." else None))

    def progress(r):
        print(f"L={r.L} p={r.p:.4f} pfail={r.pfail:.4f} [{r.ci_lo:.4f}, {r.ci_hi:.4f}]", flush=True)

    rows = sample_grid(cfg.family, cfg.sizes, cfg.ps, cfg.decoder_spec(), cfg.trials, cfg.seed, cfg.batch, cfg.jobs, progress)
    try:
        fit = fit_crossing(rows, seed=cfg.seed)
        print(f"crossing p_th = {fit.p_th:.5f} +- {fit.sigma:.5f} (pairs {fit.pair_crossings})")
    except CrossingError as exc:
        fit = None
        print(f"no crossing: {exc}", file=sys.stderr)
    est = ThresholdEstimate(rows, fit)
    write_csv(rows, out / f"{cfg.name}.csv")
    write_summary(est, out / f"{cfg.name}.json", _provenance(cfg))
    if not args.no_plot:
        try:
            plot_svg(rows, out / f"{cfg.name}.svg", fit)
        except ImportError:
            print("matplotlib not installed; skipping the plot", file=sys.stderr)
    print(f"wrote {out / cfg.name}.{{csv,json}}")
    return 0


def cmd_verify(args) -> int:
    from .verify import run_verification

    report = run_verification(
        families=args.family or None, size=args.size[0] if args.size else None, trials=args.trials,
        seed=args.seed or 0, inject=args.inject_fault, log=print,
    )
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2))
    if report["violations"]:
        for v in report["violations"]:
            print(f"VIOLATION {v}", file=sys.stderr)
        return 1
    print("all invariants hold")
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="colorcode", description="Restriction decoder for topological color codes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def lattice_args(p, multi=False):
        p.add_argument("--family", required=not multi, help="lattice family, e.g. sqoct, bcc, two_square")
        if multi:
            p.add_argument("--size", type=int, nargs="+", help="linear size(s) L")
        else:
            p.add_argument("--size", type=int, required=True, help="linear size L")

    def decoder_args(p):
        p.add_argument("--tc-decoder", choices=[d for d in available_decoders() if d != "sweep"] + ["sweep"])
        p.add_argument("--cstar", help="color shared by the restricted lattices (R, G, B, Y)")
        p.add_argument("--k", type=int, help="excitations live on (k-1)-simplices")

    p = sub.add_parser("build", help="build a lattice and report or dump it")
    lattice_args(p)
    p.add_argument("--restrict", help="color set of a restricted lattice, e.g. RG")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("decode", help="decode one error or syndrome given as JSON")
    lattice_args(p)
    decoder_args(p)
    p.add_argument("--error-file", help='JSON: list of qubit ids, or {"error": [...]} / {"syndrome": [...]}')
    p.add_argument("--simplified", action="store_true", help="2D decoder without restricted lattices")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode, k=1, cstar="R", tc_decoder="mwpm")

    for name, func, hlp in [("sample", cmd_sample, "failure rate at given (L, p) points"),
                            ("threshold", cmd_threshold, "sample a grid and fit the crossing")]:
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config", help="TOML preset (path or bundled name) or JSON artifact")
        lattice_args(p, multi=True)
        decoder_args(p)
        p.add_argument("--decoder", choices=["restriction", "simplified", "toric"])
        p.add_argument("--p", type=float, nargs="+")
        p.add_argument("--p-range", type=float, nargs=3, metavar=("MIN", "MAX", "STEP"))
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--batch", type=int)
        p.add_argument("--jobs", type=int, help="worker processes (0: all cores)")
        if name == "sample":
            p.add_argument("--out", help="CSV output path")
        else:
            p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_ENV} or .)")
            p.add_argument("--no-plot", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument("--family", nargs="+")
    p.add_argument("--size", type=int, nargs=1)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int)
    p.add_argument("--inject-fault", choices=["decoder"], help="swap in a broken toric decoder")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    if args.command in ("sample", "threshold") and args.jobs is None and not args.config:
        args.jobs = 0
    try:
        return args.func(args)
    except (UsageError, ValueError, DecoderUnavailable, FileNotFoundError, tomllib.TOMLDecodeError) as exc:
        print(f"colorcode {args.command}: {exc}", file=sys.stderr)
        return 2
    except (InvariantViolation, LiftError) as exc:
        print(f"colorcode {args.command}: invariant violated: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

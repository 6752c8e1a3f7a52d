"""Command-line front end.

    qps state synth SPEC.json      sample a joint state, write CSV + moments
    qps dist STATE.csv --kind K    phase-space distribution export
    qps verify SUITE               run a verification suite, JSON report
    qps evolve RHO.csv ...         unitary density-matrix evolution

Exit codes: 0 success, 2 invalid input, 3 grid coverage, 4 unsupported
combination.  QPS_THREADS caps the BLAS/OpenMP thread pools.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

_threads = os.environ.get("QPS_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import numpy as np

from .errors import CoverageError, InvalidInputError, QpsError, UnsupportedError
from .grids import CoordinateGrid, GridAxis, moments, read_wavefunction, write_wavefunction
from .metric import Signature, check_saturation
from .phasespace import (
    PhaseGrid,
    PhasePair,
    husimi_distribution,
    phase_wavefunction,
    wigner_distribution,
    write_distribution,
)
from .states import GaugeChoice, JointStateSpec, coordinate_wavefunction
from . import density as density_mod
from . import verify as verify_mod

_FMT = "{:.12g}"


@dataclass
class RunConfig:
    """Parsed global options shared by every subcommand."""

    hbar: float = 1.0
    gauge: GaugeChoice = field(default_factory=GaugeChoice.zero)
    grid: tuple = ((-12.0, 12.0, 1024),)
    pgrid: tuple = ((-8.0, 8.0, 128, -8.0, 8.0, 128),)
    out: Path = Path(".")
    tols: dict = field(default_factory=dict)
    family_x: float | None = None

    def __post_init__(self):
        if self.hbar <= 0.0:
            raise InvalidInputError("hbar must be positive")
        for name, val in self.tols.items():
            if val <= 0.0:
                raise InvalidInputError(f"tolerance {name} must be positive")

    def coordinate_grid(self, ndim: int) -> CoordinateGrid:
        axes = self.grid
        if len(axes) == 1 and ndim == 2:
            lo, hi, _ = axes[0]
            axes = ((lo, hi, 256), (lo, hi, 256))
        if len(axes) != ndim:
            raise InvalidInputError(f"--grid provides {len(axes)} axes, need {ndim}")
        return CoordinateGrid(axes=tuple(GridAxis(*a) for a in axes))

    def phase_grid(self, npairs: int) -> PhaseGrid:
        pairs = self.pgrid
        if len(pairs) == 1 and npairs == 2:
            # auto-duplicated two-pair grids use a coarser per-axis count to
            # keep the four-dimensional sample array desk-sized
            lo_p, hi_p, _, lo_x, hi_x, _ = pairs[0]
            pairs = ((lo_p, hi_p, 32, lo_x, hi_x, 32),) * 2
        if len(pairs) != npairs:
            raise InvalidInputError(f"--pgrid provides {len(pairs)} pairs, need {npairs}")
        return PhaseGrid(tuple(PhasePair(*p) for p in pairs))


def _parse_grid(text: str) -> tuple:
    axes = []
    for part in text.split(";"):
        bits = part.split(":")
        if len(bits) != 3:
            raise InvalidInputError(f"--grid axis {part!r} is not min:max:n")
        axes.append((float(bits[0]), float(bits[1]), int(bits[2])))
    return tuple(axes)


def _parse_pgrid(text: str) -> tuple:
    pairs = []
    for part in text.split(";"):
        blocks = part.split(",")
        if len(blocks) != 2:
            raise InvalidInputError(f"--pgrid pair {part!r} is not pspec,xspec")
        vals = []
        for block in blocks:
            bits = block.split(":")
            if len(bits) != 3:
                raise InvalidInputError(f"--pgrid block {block!r} is not min:max:n")
            vals += [float(bits[0]), float(bits[1]), int(bits[2])]
        pairs.append(tuple(vals))
    return tuple(pairs)


def _parse_tols(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InvalidInputError(f"--tol wants NAME=VALUE, got {item!r}")
        name, val = item.split("=", 1)
        out[name] = float(val)
    return out


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(
        hbar=args.hbar,
        gauge=GaugeChoice(args.gauge),
        out=Path(args.out),
        tols=_parse_tols(args.tol),
        family_x=args.family_x,
    )
    if args.grid:
        cfg.grid = _parse_grid(args.grid)
    if args.pgrid:
        cfg.pgrid = _parse_pgrid(args.pgrid)
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InvalidInputError(f"output directory is not writable: {exc}") from exc
    return cfg


def _atomic_json(path, payload):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _analyzing_family(cfg: RunConfig, psi) -> JointStateSpec:
    d = psi.grid.ndim
    d_plus = sum(1 for s in psi.signs if s > 0)
    sig = Signature(d_plus, d - d_plus)
    width = cfg.family_x if cfg.family_x else psi.hbar / 2.0
    return JointStateSpec.from_covariance(
        X=np.diag([width] * d), signature=sig, gauge=cfg.gauge, hbar=psi.hbar
    )


def cmd_state_synth(cfg: RunConfig, spec_file: str) -> int:
    try:
        with open(spec_file) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read spec file: {exc}") from exc
    spec = JointStateSpec.from_dict(payload)
    grid = cfg.coordinate_grid(spec.dim)
    psi = coordinate_wavefunction(spec, grid)
    measured = moments(psi)
    residual = check_saturation(measured, spec.signature, spec.hbar)

    wf_csv = cfg.out / "wavefunction.csv"
    write_wavefunction(psi, wf_csv)
    report = measured.to_dict()
    report.update(
        schema=1,
        hbar=spec.hbar,
        gauge=spec.gauge.label,
        saturation_residual=residual,
        norm=psi.norm(),
    )
    _atomic_json(cfg.out / "moments.json", report)
    print(f"wavefunction -> {wf_csv}")
    print(f"norm {_FMT.format(psi.norm())}")
    print(f"saturation_residual {_FMT.format(residual)}")
    return 0


def cmd_dist(cfg: RunConfig, state_file: str, kind: str) -> int:
    psi = read_wavefunction(state_file)
    if kind == "wigner" and psi.grid.ndim > 1:
        raise UnsupportedError("the Wigner fixture supports one pair only")
    family = _analyzing_family(cfg, psi)
    pgrid = cfg.phase_grid(psi.grid.ndim)
    if kind == "husimi":
        dist = husimi_distribution(psi, family, pgrid)
        out = cfg.out / "husimi.csv"
        write_distribution(dist, out, gauge_label=family.gauge.label)
        print(f"distribution -> {out}")
        print(f"normalization {_FMT.format(dist.integral())}")
        print(f"minimum {_FMT.format(dist.minimum())}")
    elif kind == "wigner":
        dist = wigner_distribution(psi, pgrid)
        out = cfg.out / "wigner.csv"
        write_distribution(dist, out)
        print(f"distribution -> {out}")
        print(f"normalization {_FMT.format(dist.integral())}")
        print(f"minimum {_FMT.format(dist.minimum())}")
    elif kind == "phasewave":
        pw = phase_wavefunction(psi, family, pgrid)
        out = cfg.out / "phasewave.csv"
        write_distribution(pw, out, gauge_label=family.gauge.label)
        print(f"distribution -> {out}")
        print(f"normalization {_FMT.format(pw.norm_squared())}")
    else:
        raise InvalidInputError(f"unknown distribution kind {kind!r}")
    return 0


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    report = verify_mod.run_suite(suite, hbar=cfg.hbar, tols=cfg.tols)
    path = cfg.out / f"report_{suite}.json"
    _atomic_json(path, report)
    if suite in ("fock", "all"):
        _export_fock_matrices(cfg)
    all_ok = True
    for row in report["checks"]:
        status = "pass" if row["pass"] else "FAIL"
        target = f" target {_FMT.format(row['target'])}" if "target" in row else ""
        print(
            f"[{status}] {row['name']}: value {_FMT.format(row['value'])} "
            f"bound {_FMT.format(row['bound'])}{target}"
        )
        all_ok = all_ok and row["pass"]
    print(f"report -> {path}")
    return 0 if all_ok else 1


def _export_fock_matrices(cfg: RunConfig):
    """Ladder matrices accompanying the fock report, as CSV."""
    from .fock import TruncatedBasis, build_ladder, write_matrix

    spec = JointStateSpec.from_covariance(X=[[cfg.hbar / 2.0]], hbar=cfg.hbar)
    basis = TruncatedBasis((4,), spec)
    lad = build_ladder(basis)
    meta = {"n_max": list(basis.n_max), "hbar": cfg.hbar}
    for name, matrix in (("lowering", lad.lowering[0]),
                         ("raising", lad.raising[0]),
                         ("number", lad.number)):
        write_matrix(matrix, cfg.out / f"fock_{name}.csv", meta=dict(meta, kind=name))


def _parse_hamiltonian(text: str):
    text = text.strip()
    for sep in (":", "("):
        if sep in text:
            name, _, rest = text.partition(sep)
            value = rest.rstrip(")")
            break
    else:
        raise InvalidInputError(f"hamiltonian {text!r} is not name:omega")
    if name != "number_omega":
        raise InvalidInputError(f"unknown hamiltonian {name!r}")
    return float(value)


def cmd_evolve(cfg: RunConfig, density_file: str, hamiltonian: str, t: float,
               snapshots: int, with_husimi: bool) -> int:
    if snapshots < 1:
        raise InvalidInputError("need at least one snapshot")
    rho = density_mod.read_density(density_file)
    omega = _parse_hamiltonian(hamiltonian)
    hbar = rho.basis.reference.hbar
    H = density_mod.number_hamiltonian(rho.basis, omega, hbar)
    times = [t * (i + 1) / snapshots for i in range(snapshots)]
    purity0 = density_mod.purity(rho)
    drift = 0.0
    family = rho.basis.reference
    grid = cfg.coordinate_grid(family.dim)
    for i, ti in enumerate(times):
        rho_t = density_mod.evolve_lvn(rho, H, ti, hbar)
        out = cfg.out / f"rho_{i:04d}.csv"
        density_mod.write_density(rho_t, out)
        drift = max(drift, abs(density_mod.purity(rho_t) - purity0))
        if with_husimi:
            pgrid = cfg.phase_grid(family.dim)
            hus = husimi_distribution(rho_t, family, pgrid, grid)
            write_distribution(hus, cfg.out / f"husimi_{i:04d}.csv",
                               gauge_label=family.gauge.label)
    print(f"snapshots {snapshots} -> {cfg.out}")
    print(f"purity_drift {_FMT.format(drift)}")
    return 0


def _add_common(parser, trailing=False):
    """Shared options, accepted before or after the subcommand."""
    suppress = {"default": argparse.SUPPRESS} if trailing else {}
    parser.add_argument("--hbar", type=float, **(suppress or {"default": 1.0}))
    parser.add_argument("--gauge", choices=("zero", "full", "half"),
                        **(suppress or {"default": "zero"}))
    parser.add_argument("--grid", help='coordinate grid "min:max:n[;min:max:n]"',
                        **(suppress or {"default": None}))
    parser.add_argument("--pgrid", help='phase grid "pmin:pmax:np,xmin:xmax:nx[;...]"',
                        **(suppress or {"default": None}))
    parser.add_argument("--out", help="output directory",
                        **(suppress or {"default": "."}))
    parser.add_argument("--tol", action="append", metavar="NAME=VAL",
                        help="tolerance override (repeatable)",
                        **(suppress or {"default": None}))
    parser.add_argument("--family-x", type=float,
                        help="coordinate variance of the analyzing family (default hbar/2)",
                        **(suppress or {"default": None}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qps", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p_state = sub.add_parser("state", help="state construction")
    state_sub = p_state.add_subparsers(dest="state_command", required=True)
    p_synth = state_sub.add_parser("synth", help="sample a joint state from a JSON spec")
    p_synth.add_argument("spec_file")
    _add_common(p_synth, trailing=True)

    p_dist = sub.add_parser("dist", help="phase-space distribution export")
    p_dist.add_argument("state_file")
    p_dist.add_argument("--kind", choices=("husimi", "wigner", "phasewave"), required=True)
    _add_common(p_dist, trailing=True)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=verify_mod.SUITES + ("all",))
    _add_common(p_verify, trailing=True)

    p_evolve = sub.add_parser("evolve", help="unitary density evolution")
    p_evolve.add_argument("density_file")
    p_evolve.add_argument("--hamiltonian", default="number_omega:1.0",
                          help="generator, e.g. number_omega:1.0")
    p_evolve.add_argument("--t", type=float, required=True)
    p_evolve.add_argument("--snapshots", type=int, default=1)
    p_evolve.add_argument("--husimi", action="store_true",
                          help="also export a Husimi snapshot per time")
    _add_common(p_evolve, trailing=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "state":
            return cmd_state_synth(cfg, args.spec_file)
        if args.command == "dist":
            return cmd_dist(cfg, args.state_file, args.kind)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        if args.command == "evolve":
            return cmd_evolve(cfg, args.density_file, args.hamiltonian, args.t,
                              args.snapshots, args.husimi)
        parser.error(f"unknown command {args.command!r}")
    except CoverageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except UnsupportedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (InvalidInputError, QpsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

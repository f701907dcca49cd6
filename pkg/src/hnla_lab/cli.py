"""Command-line front end: ``hnla-lab {fig1,transform,nosignal,epr}``.

Exit codes: 0 success, 1 invalid configuration, 2 physics or budget violation.
Every flag default can be overridden by an ``HNLA_<FLAG>`` environment
variable (e.g. ``HNLA_GAIN=1.2``, ``HNLA_GRID_POINTS=101``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import ensemble_lab as ens
from .errors import HnlaError
from .fock_core import (
    SqueezedCoherentParams,
    coherent_squeezed_coeffs,
    db_from_squeezing,
    fidelity,
    squeezing_from_db,
    thermal_probs,
)
from .hnla_transform import (
    apply_filtration_bruteforce,
    auto_cutoff,
    quadrature_gains,
    transform,
    truncated_squeezer,
)

ENV_PREFIX = "HNLA_"
EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2
FIG1_COLUMNS = ("squeezing_db", "N", "fidelity", "p_succ_operational", "p_succ_eq33", "status")


class ConfigError(Exception):
    pass


class PhysicsFailure(Exception):
    """Computation finished but a tolerance or budget was violated."""

    def __init__(self, message: str, payload: str | None = None):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _env_default(name: str, fallback, convert=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return fallback
    try:
        return convert(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for {ENV_PREFIX}{name.upper()}: {exc}") from exc


def _float_list(raw: str) -> list[float]:
    return [float(v) for v in raw.replace(",", " ").split()]


def _parse_range(raw: str) -> range:
    try:
        if ":" in raw:
            lo, hi = (int(v) for v in raw.split(":"))
            return range(lo, hi + 1)
        n = int(raw)
        return range(n, n + 1)
    except ValueError as exc:
        raise ConfigError(f"bad N range {raw!r}; use 'N' or 'LO:HI'") from exc


@dataclass
class RunConfig:
    command: str
    g: float = 1.1
    squeezing_r: list[float] = field(default_factory=list)
    squeezing_db: list[float] = field(default_factory=list)
    n_range: range = range(0, 21)
    alpha: complex = 0j
    phi: float = 0.0
    s: float = 0.5
    grid: ens.GridSpec = field(default_factory=ens.GridSpec)
    n_max: int | None = None
    tolerance: float = 1e-6
    fmt: str = "json"
    output: str | None = None
    emit_state: bool = False

    def validate(self):
        if not (math.isfinite(self.g) and self.g >= 1.0):
            raise ConfigError(f"--gain must be >= 1 (attenuation is not modelled), got {self.g}")
        if any(not (math.isfinite(r) and r >= 0) for r in self.squeezing_r):
            raise ConfigError("squeezing must be finite and >= 0")
        if len(self.n_range) == 0 or self.n_range.start < 0:
            raise ConfigError(f"invalid truncation range {self.n_range}")
        if not (math.isfinite(self.s) and self.s > 0):
            raise ConfigError(f"--s must be > 0, got {self.s}")
        if self.n_max is not None and not (0 <= self.n_max <= 10_000):
            raise ConfigError(f"--n-max must be in [0, 10000], got {self.n_max}")
        if not self.tolerance > 0:
            raise ConfigError("--tolerance must be positive")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"--format must be csv or json, got {self.fmt}")
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise ConfigError("--alpha must be finite")
        return self


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hnla-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt):
        p.add_argument("--gain", type=float, default=_env_default("gain", 1.1, float),
                       help="amplitude gain g >= 1 (default 1.1)")
        p.add_argument("--format", choices=("csv", "json"), default=_env_default("format", fmt))
        p.add_argument("--output", default=_env_default("output", None),
                       help="write here (atomically) instead of stdout")

    def squeezing(p, default_db):
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--squeezing-db", type=float, nargs="+",
                         default=_env_default("squeezing_db", None, _float_list),
                         help="input squeezing in dB")
        grp.add_argument("--squeezing-r", type=float, nargs="+",
                         default=_env_default("squeezing_r", None, _float_list),
                         help="input squeezing parameter r")
        p.set_defaults(default_db=default_db)

    def grid(p):
        p.add_argument("--s", type=float, default=_env_default("s", 0.5, float),
                       help="two-mode squeezing of the shared EPR state")
        p.add_argument("--grid-points", type=int, default=_env_default("grid_points", 201, int),
                       help="quadrature nodes per line (homodyne) or radius (heterodyne)")
        p.add_argument("--grid-sigmas", type=float, default=_env_default("grid_sigmas", 6.0, float),
                       help="half-width of uniform grids in standard deviations")
        p.add_argument("--grid-kind", choices=("gauss", "uniform"),
                       default=_env_default("grid_kind", "gauss"),
                       help="gauss: Gauss-Hermite/Laguerre rules; uniform: trapezoid diagnostic")
        p.add_argument("--grid-angles", type=int, default=_env_default("grid_angles", 64, int),
                       help="angular nodes of the heterodyne grid")
        p.add_argument("--n-max", type=int, default=_env_default("n_max", None, int),
                       help="Fock cutoff (default: thermal tail below 1e-10)")
        p.add_argument("--tolerance", type=float, default=_env_default("tolerance", 1e-6, float),
                       help="largest accepted trace distance")

    p = sub.add_parser("fig1", help="fidelity and success probability of the truncated squeezer")
    common(p, "csv")
    squeezing(p, [2.0, 4.0, 6.0, 8.0])
    p.add_argument("--n-trunc", default=_env_default("n_trunc", "0:20"), help="N or LO:HI")

    p = sub.add_parser("transform", help="closed-form action on one squeezed coherent state")
    common(p, "json")
    squeezing(p, None)
    p.add_argument("--alpha", type=complex, default=_env_default("alpha", 0j, complex),
                   help="input displacement, e.g. 0.5+0.2j")
    p.add_argument("--phi", type=float, default=_env_default("phi", 0.0, float),
                   help="squeezing angle in radians; 0 squeezes x")
    p.add_argument("--n-max", type=int, default=_env_default("n_max", None, int))
    p.add_argument("--emit-state", action="store_true", help="include the brute-force output state")

    p = sub.add_parser("nosignal", help="x- vs p-homodyne preparation followed by amplification")
    common(p, "json")
    grid(p)

    p = sub.add_parser("epr", help="photon-number and heterodyne preparation scenarios")
    common(p, "json")
    grid(p)
    return parser


def parse_config(argv: list[str] | None) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, g=args.gain, fmt=args.format, output=args.output)
    if args.command in ("fig1", "transform"):
        if args.squeezing_r is not None:
            cfg.squeezing_r = list(args.squeezing_r)
            cfg.squeezing_db = [db_from_squeezing(r) for r in cfg.squeezing_r]
        else:
            dbs = args.squeezing_db if args.squeezing_db is not None else (args.default_db or [0.0])
            cfg.squeezing_db = list(dbs)
            cfg.squeezing_r = [squeezing_from_db(d) for d in dbs]
    if args.command == "fig1":
        cfg.n_range = _parse_range(args.n_trunc)
    if args.command == "transform":
        if len(cfg.squeezing_r) != 1:
            raise ConfigError("transform takes exactly one squeezing value")
        cfg.alpha, cfg.phi, cfg.n_max, cfg.emit_state = args.alpha, args.phi, args.n_max, args.emit_state
    if args.command in ("nosignal", "epr"):
        cfg.s, cfg.n_max, cfg.tolerance = args.s, args.n_max, args.tolerance
        try:
            cfg.grid = ens.GridSpec(args.grid_points, args.grid_sigmas, args.grid_kind, args.grid_angles)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg.validate()


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def cmd_fig1(cfg: RunConfig) -> tuple[list[dict], bool]:
    rows, failed = [], False
    for db, r in zip(cfg.squeezing_db, cfg.squeezing_r):
        for n in cfg.n_range:
            try:
                res = truncated_squeezer(r, 0.0, cfg.g, n)
                rows.append({"squeezing_db": _fmt(db), "N": n, "fidelity": _fmt(res.fidelity),
                             "p_succ_operational": _fmt(res.p_succ),
                             "p_succ_eq33": _fmt(res.p_succ_eq33), "status": "ok"})
            except HnlaError as exc:
                failed = True
                rows.append({"squeezing_db": _fmt(db), "N": n, "fidelity": "", "p_succ_operational": "",
                             "p_succ_eq33": "", "status": f"error: {exc}"})
    return rows, failed


def cmd_transform(cfg: RunConfig) -> dict:
    params = SqueezedCoherentParams(cfg.alpha, cfg.squeezing_r[0], cfg.phi)
    res = transform(params, cfg.g)
    out = res.params_out
    n_max = cfg.n_max if cfg.n_max is not None else max(auto_cutoff(params), auto_cutoff(out))
    raw, weight_bf = apply_filtration_bruteforce(coherent_squeezed_coeffs(params, n_max), cfg.g)
    closed = coherent_squeezed_coeffs(out, n_max)
    gain_x, gain_p = quadrature_gains(params.r, cfg.g)
    payload = {
        "alpha": [params.alpha.real, params.alpha.imag],
        "r": params.r,
        "phi": params.phi,
        "g": cfg.g,
        "alpha_prime": [out.alpha.real, out.alpha.imag],
        "r_prime": out.r,
        "gain_x": gain_x,
        "gain_p": gain_p,
        "rel_success_weight": res.rel_success_weight,
        "n_max": n_max,
        "bruteforce_infidelity": 1.0 - fidelity(raw, closed),
        "bruteforce_weight_residual": abs(weight_bf - res.rel_success_weight) / res.rel_success_weight,
    }
    if cfg.emit_state:
        payload["state_out"] = raw.normalized().to_json()
    return payload


def cmd_nosignal(cfg: RunConfig) -> dict:
    rep = ens.no_signaling_check(cfg.s, cfg.g, cfg.grid, cfg.n_max)
    payload = rep.to_json_dict()
    problems = list(rep.diagnostics["budget_violations"])
    for name in ("d_xp", "d_x_thermal", "d_p_thermal"):
        if payload[name] >= cfg.tolerance:
            problems.append(f"{name} = {payload[name]:.3e} >= tolerance {cfg.tolerance:g}")
    if rep.identity_residual_max >= 1e-10:
        problems.append(f"identity_residual_max = {rep.identity_residual_max:.3e} >= 1e-10")
    if problems:
        raise PhysicsFailure("; ".join(problems), _dump(payload, cfg))
    return payload


def cmd_epr(cfg: RunConfig) -> dict:
    s_out = ens.amplify_epr(cfg.s, cfg.g)
    p_before, p_cond = ens.photon_number_scenario(cfg.s, cfg.g)
    target = thermal_probs(s_out, p_cond.size - 1)
    photon_dev = float(np.max(np.abs(p_cond - target / target.sum())))
    het = ens.heterodyne_scenario(cfg.s, cfg.g, cfg.grid, cfg.n_max)
    payload = {
        "s": cfg.s,
        "g": cfg.g,
        "s_prime": s_out,
        "photon_number_n_max": p_cond.size - 1,
        "photon_number_max_abs_dev": photon_dev,
        "photon_number_mean_before": float(np.arange(p_before.size) @ p_before),
        "photon_number_mean_conditioned": float(np.arange(p_cond.size) @ p_cond),
        "heterodyne_n_max": het.n_max,
        "heterodyne_distance": het.distance,
        "heterodyne_mean_photon_number": het.mean_photon_number,
        "mean_photon_target": het.mean_photon_target,
        "grid": {"kind": cfg.grid.kind, "points": cfg.grid.points, "angles": cfg.grid.angles,
                 "sigmas": cfg.grid.sigmas},
    }
    problems = []
    if photon_dev >= 1e-12:
        problems.append(f"photon_number_max_abs_dev = {photon_dev:.3e} >= 1e-12")
    if het.distance >= cfg.tolerance:
        problems.append(f"heterodyne_distance = {het.distance:.3e} >= tolerance {cfg.tolerance:g}")
    if problems:
        raise PhysicsFailure("; ".join(problems), _dump(payload, cfg))
    return payload


def _dump(payload, cfg: RunConfig) -> str:
    rows = payload if isinstance(payload, list) else [payload]
    if cfg.fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    columns = FIG1_COLUMNS if cfg.command == "fig1" else list(rows[0])
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()})
    return buf.getvalue()


def write_atomic(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hnla-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


COMMANDS = {"transform": cmd_transform, "nosignal": cmd_nosignal, "epr": cmd_epr}


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"hnla-lab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.command == "fig1":
            rows, failed = cmd_fig1(cfg)
            write_atomic(_dump(rows, cfg), cfg.output)
            if failed:
                print("hnla-lab: some rows hit an unphysical gain (see status column)", file=sys.stderr)
                return EXIT_PHYSICS
            return EXIT_OK
        payload = COMMANDS[cfg.command](cfg)
    except PhysicsFailure as exc:
        if exc.payload is not None:
            write_atomic(exc.payload, cfg.output)
        print(f"hnla-lab: violated bound: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except HnlaError as exc:
        print(f"hnla-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    write_atomic(_dump(payload, cfg), cfg.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

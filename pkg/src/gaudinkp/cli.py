"""Command-line harness: verify / spectrum / trajectory.

Batch verification with machine-readable JSON reports, aligned-column text
for humans, and CSV for trajectories.  A run is reproducible from its config
plus seed; report bytes are deterministic (the timestamp lives in its own
meta field).

Exit codes: 0 all checks pass, 1 suite failure or aborted trajectory,
2 invalid usage or configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import calogero as cm
from . import correspond as corr
from .hilbert import GaudinModel, joint_diagonalize, random_model, sectors
from .suites import SUITES, _random_phase_point
from .symfun import multinomial

PRESETS = {"tiny": (2, 2), "small": (2, 3), "medium": (3, 3)}
OUTDIR_ENV = "GAUDINKP_OUTDIR"
SUITE_ORDER = ["commutativity", "master", "bilinear", "ba", "cm", "correspondence"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Declarative run description; flags override file values."""

    N: int = 2
    n: int = 2
    hbar: str = "1.0"
    seed: int = 7
    preset: str | None = None
    marked_points: list | None = None
    twist: list | None = None
    suites: list = field(default_factory=lambda: list(SUITE_ORDER))
    K: int = 3
    window: int = 64
    schur_degree: int = 4
    tol: float | None = None
    out: str | None = None
    format: str = "json"
    sector: str | None = None
    t_final: float = 0.1
    dt: float = 1e-3

    def resolve(self) -> "RunConfig":
        if self.preset is not None:
            if self.preset not in PRESETS:
                raise ConfigError(
                    f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}"
                )
            self.N, self.n = PRESETS[self.preset]
        for s in self.suites:
            if s not in SUITES:
                raise ConfigError(f"unknown suite {s!r}; choose from {SUITE_ORDER}")
        if self.format not in ("json", "text", "csv"):
            raise ConfigError("format must be json, text, or csv")
        return self


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    return complex(str(v).replace(" ", ""))


def build_model(cfg: RunConfig) -> GaudinModel:
    hbar = _as_complex(cfg.hbar)
    if cfg.marked_points is not None or cfg.twist is not None:
        if cfg.marked_points is None or cfg.twist is None:
            raise ConfigError("give both marked_points and twist, or neither")
        x = [_as_complex(v) for v in cfg.marked_points]
        k = [_as_complex(v) for v in cfg.twist]
        try:
            return GaudinModel(N=len(k), n=len(x), hbar=hbar,
                               marked_points=x, twist=k)
        except ValueError as exc:
            raise ConfigError(f"invalid model parameters: {exc}") from exc
    return random_model(cfg.N, cfg.n, seed=cfg.seed, hbar=hbar)


def _serializable_config(cfg: RunConfig, model: GaudinModel) -> dict:
    d = asdict(cfg)
    d["resolved_model"] = {
        "N": model.N,
        "n": model.n,
        "hbar": [model.hbar.real, model.hbar.imag],
        "marked_points": [[v.real, v.imag] for v in model.marked_points],
        "twist": [[v.real, v.imag] for v in model.twist],
    }
    return d


def _outdir(cfg: RunConfig) -> str:
    out = cfg.out or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _dump_json(obj, path: str | None):
    text = json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# -- verify ----------------------------------------------------------------------


def cmd_verify(cfg: RunConfig) -> int:
    model = build_model(cfg)
    suites_out = []
    for name in SUITE_ORDER:
        if name not in cfg.suites:
            continue
        kwargs = {}
        if name == "bilinear":
            kwargs = {"K": cfg.K, "window": cfg.window}
        elif name == "master":
            kwargs = {"schur_degree": cfg.schur_degree}
        result = SUITES[name](model, cfg.seed, **kwargs)
        if cfg.tol is not None:
            for c in result["checks"]:
                c["tol"] = cfg.tol
                c["pass"] = bool(c["value"] <= cfg.tol)
            result["pass"] = bool(all(c["pass"] for c in result["checks"]))
        suites_out.append(result)

    report = {
        "meta": {
            "package": f"gaudinkp {__version__}",
            "timestamp": datetime.now(timezone.utc).isoformat(),
        },
        "config": _serializable_config(cfg, model),
        "suites": suites_out,
        "pass": bool(all(s["pass"] for s in suites_out)),
    }
    outdir = _outdir(cfg)
    path = os.path.join(outdir, "verify_report.json")
    text = _dump_json(report, path)
    if cfg.format == "json":
        sys.stdout.write(text)
    else:
        _print_verify_table(report)
    return 0 if report["pass"] else 1


def _print_verify_table(report):
    width = max(
        (len(c["name"]) for s in report["suites"] for c in s["checks"]), default=10
    )
    for s in report["suites"]:
        print(f"[{s['suite']}]  max_residual={s['max_residual']:.3e}  "
              f"{'PASS' if s['pass'] else 'FAIL'}")
        for c in s["checks"]:
            mark = "ok " if c["pass"] else "FAIL"
            print(f"  {mark} {c['name']:<{width}}  value={c['value']:.3e}  "
                  f"tol={c['tol']:.1e}")
    print(f"overall: {'PASS' if report['pass'] else 'FAIL'}")


# -- spectrum -------------------------------------------------------------------


def _fmt_c(z: complex) -> str:
    return f"{z.real:+.10f}{z.imag:+.10f}j"


def cmd_spectrum(cfg: RunConfig) -> int:
    model = build_model(cfg)
    spectrum = joint_diagonalize(model, seed=cfg.seed)
    want = None
    if cfg.sector is not None:
        try:
            want = tuple(int(v) for v in cfg.sector.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad sector spec {cfg.sector!r}") from exc

    rows = []
    for m in sectors(model):
        if want is not None and m != want:
            continue
        states = spectrum.in_sector(m)
        solved = None
        if model.N == 2 and model.n <= 4 and model.n >= 1:
            solved = corr.solve_sector_spectrum(model, m, seed=cfg.seed + 11)
        for j, state in enumerate(states):
            best = None
            if solved and solved["solutions"]:
                best = min(
                    float(np.max(np.abs(sol - state.H_values)))
                    for sol in solved["solutions"]
                )
            rows.append({
                "sector": ",".join(str(v) for v in m),
                "dim": multinomial(model.n, m),
                "state": j,
                "H": [_fmt_c(h) for h in state.H_values],
                "classical_match": best,
                "classical_count": solved["count"] if solved else None,
            })

    outdir = _outdir(cfg)
    if cfg.format == "json":
        payload = {
            "config": _serializable_config(cfg, model),
            "states": rows,
        }
        text = _dump_json(payload, os.path.join(outdir, "spectrum.json"))
        sys.stdout.write(text)
    elif cfg.format == "csv":
        path = os.path.join(outdir, "spectrum.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sector", "dim", "state", "H", "classical_match",
                        "classical_count"])
            for r in rows:
                w.writerow([r["sector"], r["dim"], r["state"],
                            ";".join(r["H"]), r["classical_match"],
                            r["classical_count"]])
        print(f"wrote {path}")
    else:
        for r in rows:
            match = ("-" if r["classical_match"] is None
                     else f"{r['classical_match']:.2e}")
            print(f"sector ({r['sector']}) dim {r['dim']} state {r['state']}: "
                  f"H = {' '.join(r['H'])}  classical_match={match}")
    return 0


# -- trajectory -----------------------------------------------------------------


def cmd_trajectory(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    hbar = _as_complex(cfg.hbar)
    s0 = _random_phase_point(rng, cfg.n, hbar)
    outdir = _outdir(cfg)
    tpath = os.path.join(outdir, "trajectory.csv")
    dpath = os.path.join(outdir, "drift.csv")
    try:
        traj = cm.integrate(s0, t_final=cfg.t_final, dt=cfg.dt)
    except cm.CollisionError as exc:
        print(f"aborted: {exc} (last good time {exc.last_good_time})",
              file=sys.stderr)
        return 1
    n = s0.n
    with open(tpath, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t"]
        for i in range(n):
            header += [f"re_x{i+1}", f"im_x{i+1}"]
        for i in range(n):
            header += [f"re_p{i+1}", f"im_p{i+1}"]
        w.writerow(header)
        for j, tval in enumerate(traj.times):
            row = [repr(float(tval))]
            for i in range(n):
                row += [repr(float(traj.xs[j, i].real)), repr(float(traj.xs[j, i].imag))]
            for i in range(n):
                row += [repr(float(traj.ps[j, i].real)), repr(float(traj.ps[j, i].imag))]
            w.writerow(row)
    with open(dpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"drift_trY{k+1}" for k in range(traj.drift.shape[1])])
        for j, tval in enumerate(traj.times):
            w.writerow([repr(float(tval))] + [repr(float(v)) for v in traj.drift[j]])
    print(f"wrote {tpath} and {dpath}")
    return 0


# -- entry point ------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--n", type=int, dest="n")
    p.add_argument("--hbar")
    p.add_argument("--K", type=int, dest="K")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "text", "csv"])


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        for key, val in data.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, val)
    for key in ("preset", "seed", "N", "n", "hbar", "K", "tol", "out", "format"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    for key in ("suite", "window", "schur_degree", "sector", "t_final", "dt"):
        val = getattr(args, key, None)
        if val is not None:
            if key == "suite":
                cfg.suites = val
            else:
                setattr(cfg, key, val)
    return cfg.resolve()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gaudinkp",
        description="Verification engine for the Gaudin / KP / Calogero-Moser "
                    "correspondence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run named verification suites")
    _add_common(pv)
    pv.add_argument("--suite", action="append", choices=SUITE_ORDER,
                    help="repeatable; default: all suites")
    pv.add_argument("--window", type=int)
    pv.add_argument("--schur-degree", type=int, dest="schur_degree")

    ps = sub.add_parser("spectrum", help="quantum spectra vs classical solve")
    _add_common(ps)
    ps.add_argument("--sector", help="comma-separated content filter, e.g. 1,1")

    pt = sub.add_parser("trajectory", help="integrate a Calogero-Moser flow")
    _add_common(pt)
    pt.add_argument("--t-final", type=float, dest="t_final")
    pt.add_argument("--dt", type=float, dest="dt")

    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        return cmd_trajectory(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

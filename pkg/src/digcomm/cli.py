"""Command-line entry point: ``digcomm {analyze,modify,brute,selfcheck}``.

Settings resolve as command-line flag, then ``--config`` file key, then the
built-in default. The config file holds flat ``key = value`` lines with the
same names as the long flags (dashes or underscores).
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import spectral
from .centrality import CentralityMethod
from .communicability import total_communicability
from .engine import OBJECTIVES, compare_methods, run_brute_force
from .errors import DigcommError, ParameterError
from .graph import KINDS, UPDATE, candidate_count, load_graph
from .selfcheck import format_report, run_selfcheck

log = logging.getLogger("digcomm")

LOG_ENV = "DIGCOMM_LOG_LEVEL"
DEFAULT_METHODS = "hits,gtc,tc,b:eig,b:tc,b:deg,random"


@dataclass
class RunConfig:
    command: str = "analyze"
    input: str | None = None
    format: str = "edgelist"
    index_base: int = 0
    header: bool = False
    methods: list[str] = field(default_factory=lambda: DEFAULT_METHODS.split(","))
    k: int = 25
    kind: str = UPDATE
    fraction: float | None = None
    rank2: bool = False
    seed: int = 0
    random_runs: int = 1
    objective: str = "both"
    tol: float | None = None
    backend: str = "auto"
    track_tc: bool = False
    out: str = "out"
    perturb: float = 0.0

    def validate(self) -> None:
        if self.command != "selfcheck":
            if not self.input:
                raise ParameterError("--input is required")
            if not Path(self.input).is_file():
                raise ParameterError(f"input file not found: {self.input}")
        if self.format not in ("edgelist", "mm"):
            raise ParameterError("--format must be edgelist or mm")
        if self.index_base not in (0, 1):
            raise ParameterError("--index-base must be 0 or 1")
        if self.k < 1:
            raise ParameterError("--k must be at least 1")
        if self.kind not in KINDS:
            raise ParameterError(f"--kind must be one of {KINDS}")
        if self.fraction is not None and not (0 < self.fraction <= 1):
            raise ParameterError("--fraction must lie in (0, 1]")
        if self.random_runs < 1:
            raise ParameterError("--random-runs must be at least 1")
        if self.objective not in OBJECTIVES + ("both",):
            raise ParameterError("--objective must be sum, prod or both")
        if self.tol is not None and not self.tol > 0:
            raise ParameterError("--tol must be positive")
        spectral.resolve_backend(1, self.backend)
        for m in self.methods:
            CentralityMethod.parse(m)


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, text: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise ParameterError(f"unknown config key {name!r}")
    t = str(kinds[name])
    text = text.strip()
    if name == "methods":
        return [m for m in text.split(",") if m.strip()]
    if t == "bool":
        if text.lower() not in _BOOL:
            raise ParameterError(f"config key {name!r}: expected a boolean, got {text!r}")
        return _BOOL[text.lower()]
    try:
        if t.startswith("int"):
            return int(text)
        if t.startswith("float"):
            return None if text.lower() in ("", "none") else float(text)
    except ValueError:
        raise ParameterError(f"config key {name!r}: cannot parse {text!r}") from None
    return text


def read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            out[key] = _coerce(key, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="flat key = value file")
    common.add_argument("--input", default=S)
    common.add_argument("--format", choices=["edgelist", "mm"], default=S)
    common.add_argument("--index-base", type=int, choices=[0, 1], default=S)
    common.add_argument("--header", action="store_true", default=S,
                        help="edge list starts with an 'n m' line")
    common.add_argument("--tol", type=float, default=S, help="Krylov relative tolerance")
    common.add_argument("--backend", choices=["auto", "dense", "krylov"], default=S)
    common.add_argument("--out", default=S, help="output directory")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--kind", choices=list(KINDS), default=S)
    run.add_argument("--k", type=int, default=S, help="number of modifications")
    run.add_argument("--track-tc", action="store_true", default=S)

    p = argparse.ArgumentParser(prog="digcomm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="graph statistics and global indices")
    m = sub.add_parser("modify", parents=[common, run], help="greedy update/downdate runs")
    m.add_argument("--methods", type=lambda s: [x for x in s.split(",") if x.strip()], default=S)
    m.add_argument("--fraction", type=float, default=S,
                   help="restrict candidates to the top fraction of nodes")
    m.add_argument("--rank2", action="store_true", default=S)
    m.add_argument("--seed", type=int, default=S)
    m.add_argument("--random-runs", type=int, default=S,
                   help="random baseline runs, seeds seed..seed+N-1")
    b = sub.add_parser("brute", parents=[common, run], help="exhaustive greedy baselines")
    b.add_argument("--objective", choices=["sum", "prod", "both"], default=S)
    s = sub.add_parser("selfcheck", parents=[common], help="run the identity suite")
    s.add_argument("--perturb", type=float, default=S, help=S)
    return p


def resolve_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    values = {}
    if "config" in ns:
        values.update(read_config_file(ns.pop("config")))
    values.update({k.replace("-", "_"): v for k, v in ns.items()})
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _load(cfg: RunConfig):
    return load_graph(cfg.input, cfg.format, cfg.index_base, has_header=cfg.header)


def _write_rows(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_analyze(cfg: RunConfig, out=sys.stdout) -> dict:
    g = _load(cfg)
    sig = spectral.top_singular_values(g, 2, cfg.backend) if g.m else [0.0, 0.0]
    s1 = float(sig[0]) if len(sig) > 0 else 0.0
    s2 = float(sig[1]) if len(sig) > 1 else 0.0
    thc, tac = spectral.hub_authority_totals(g, cfg.backend)
    stats = g.ingest
    report = {
        "n": g.n, "m": g.m, "tau": candidate_count(g, UPDATE),
        "sigma1": s1, "sigma2": s2, "gap": s1 - s2,
        "weakly_connected": g.is_weakly_connected(),
        "thc": thc, "tac": tac, "tc": total_communicability(g, cfg.backend),
        "thc_per_edge": thc / g.m if g.m else math.nan,
        "tac_per_edge": tac / g.m if g.m else math.nan,
        "lines_read": stats.lines if stats else "",
        "duplicates_dropped": stats.duplicates if stats else "",
        "self_loops_dropped": stats.self_loops if stats else "",
    }
    for k, v in report.items():
        print(f"{k:<20} {v:.6g}" if isinstance(v, float) else f"{k:<20} {v}", file=out)
    if cfg.out:
        _write_rows(Path(cfg.out) / "analyze.csv", list(report), [list(report.values())])
    return report


def cmd_modify(cfg: RunConfig, out=sys.stdout) -> int:
    g = _load(cfg)
    seeds = tuple(range(cfg.seed, cfg.seed + cfg.random_runs))
    table = compare_methods(g, cfg.kind, cfg.methods, cfg.k, seeds=seeds, fraction=cfg.fraction,
                            backend=cfg.backend, track_tc=cfg.track_tc, rank2=cfg.rank2,
                            out_dir=cfg.out)
    for r in table.results:
        if r.trajectory is not None:
            t = r.trajectory
            print(f"{r.label:<14} {r.status:<12} steps={len(t) - 1:<5} thc={t.steps[-1].thc:.6g} "
                  f"tac={t.steps[-1].tac:.6g} time={t.elapsed_s:.3f}s", file=out)
        else:
            print(f"{r.label:<14} {r.status:<12} {r.message}", file=out)
    return 1 if any(r.status == "error" for r in table.results) else 0


def cmd_brute(cfg: RunConfig, out=sys.stdout) -> int:
    g = _load(cfg)
    objectives = OBJECTIVES if cfg.objective == "both" else (cfg.objective,)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for obj in objectives:
        t = run_brute_force(g, cfg.kind, cfg.k, obj, track_tc=cfg.track_tc)
        with open(outdir / f"traj_opt_{obj}.csv", "w", newline="") as fh:
            t.to_csv(fh)
        print(f"opt {obj:<5} steps={len(t) - 1:<5} thc={t.steps[-1].thc:.6g} "
              f"tac={t.steps[-1].tac:.6g} time={t.elapsed_s:.3f}s", file=out)
    return 0


def cmd_selfcheck(cfg: RunConfig, out=sys.stdout) -> int:
    results = run_selfcheck(perturb=cfg.perturb)
    print(format_report(results), file=out)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"analyze": lambda c, o: (cmd_analyze(c, o), 0)[1], "modify": cmd_modify,
            "brute": cmd_brute, "selfcheck": cmd_selfcheck}


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(argv)
    except (DigcommError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    overrides = {"krylov": cfg.tol} if cfg.tol is not None else {}
    try:
        with spectral.tolerances(**overrides), warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _log_warning
            return COMMANDS[cfg.command](cfg, out)
    except DigcommError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _log_warning(message, category, filename, lineno, file=None, line=None):
    log.warning("%s", message)


if __name__ == "__main__":
    sys.exit(main())

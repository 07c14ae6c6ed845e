"""Greedy edge update/downdate runs and their recorded trajectories.

A run applies ``K`` modifications chosen by an edge centrality rule and
records ``T_hC``/``T_aC`` after every step. Recompute runs rescore the
current graph before each choice; ``.no`` runs score the initial graph once
and apply the top ``K`` edges in order. Brute-force runs evaluate the exact
objective for every candidate.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import spectral
from .centrality import CentralityMethod, node_scores
from .communicability import total_communicability
from .errors import CapacityError, MethodInapplicable, NumericalFailure, ParameterError
from .graph import (
    DOWNDATE,
    KINDS,
    UPDATE,
    Digraph,
    apply_modification,
    enumerate_candidates,
    iter_candidate_blocks,
    iter_candidate_masks,
    iter_rank2_candidate_blocks,
    top_nodes,
)

log = logging.getLogger(__name__)

BRUTE_FORCE_MAX_NODES = 100
# Scores closer than TIE_RTOL * (largest attainable score) count as equal.
TIE_RTOL = 1e-12
OBJECTIVES = ("sum", "prod")

CSV_COLUMNS = ["step", "edge_src", "edge_dst", "thc", "tac", "tc",
               "thc_per_edge", "tac_per_edge", "elapsed_s", "weakly_connected"]


@dataclass(frozen=True)
class ModificationPlan:
    kind: str
    k: int
    method: CentralityMethod
    fraction: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"kind must be one of {KINDS}")
        if self.k < 1:
            raise ParameterError("K must be at least 1")
        if self.fraction is not None and not (0 < self.fraction <= 1):
            raise ParameterError("fraction must lie in (0, 1]")
        if isinstance(self.method, str):
            object.__setattr__(self, "method", CentralityMethod.parse(self.method))


@dataclass(frozen=True)
class BruteForceObjective:
    objective: str = "sum"

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ParameterError(f"objective must be one of {OBJECTIVES}")

    def __call__(self, thc, tac):
        return thc + tac if self.objective == "sum" else thc * tac

    @property
    def label(self):
        return f"opt {self.objective}"


@dataclass(frozen=True)
class StepRecord:
    step: int
    edges: tuple
    thc: float
    tac: float
    tc: float = math.nan
    elapsed_s: float = 0.0
    connected: bool = True


@dataclass
class ModificationTrajectory:
    label: str
    kind: str
    n: int
    m0: int
    steps: list[StepRecord] = field(default_factory=list)
    scoring_passes: int = 0
    truncated: bool = False
    final_graph: Digraph | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.steps)

    @property
    def thc(self) -> np.ndarray:
        return np.array([s.thc for s in self.steps])

    @property
    def tac(self) -> np.ndarray:
        return np.array([s.tac for s in self.steps])

    @property
    def chosen(self) -> list[tuple]:
        return [s.edges for s in self.steps[1:]]

    @property
    def chosen_edges(self) -> list[tuple[int, int]]:
        return [e for s in self.steps[1:] for e in s.edges]

    @property
    def elapsed_s(self) -> float:
        return self.steps[-1].elapsed_s if self.steps else 0.0

    def final_objective(self, objective: str = "sum") -> float:
        return BruteForceObjective(objective)(self.steps[-1].thc, self.steps[-1].tac)

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        scale = self.m0 if self.m0 else math.nan
        for s in self.steps:
            w.writerow([s.step,
                        ";".join(str(e[0]) for e in s.edges),
                        ";".join(str(e[1]) for e in s.edges),
                        repr(s.thc), repr(s.tac), repr(s.tc),
                        repr(s.thc / scale), repr(s.tac / scale),
                        repr(s.elapsed_s), int(s.connected)])
        return out.getvalue() if fh is None else None


def read_trajectory_csv(fh, label: str = "", kind: str = UPDATE, n: int = 0) -> ModificationTrajectory:
    steps = []
    m0 = 0
    for row in csv.DictReader(fh):
        src = [int(x) for x in row["edge_src"].split(";") if x]
        dst = [int(x) for x in row["edge_dst"].split(";") if x]
        thc = float(row["thc"])
        if not m0 and row["thc_per_edge"] not in ("nan", ""):
            per = float(row["thc_per_edge"])
            m0 = round(thc / per) if per else 0
        steps.append(StepRecord(int(row["step"]), tuple(zip(src, dst)), thc, float(row["tac"]),
                                float(row["tc"]), float(row["elapsed_s"]),
                                bool(int(row["weakly_connected"]))))
    return ModificationTrajectory(label, kind, n, m0, steps)


# -- selection ---------------------------------------------------------------


def tie_quantum(ns) -> float:
    """Grid spacing for score comparison, relative to the largest attainable score."""
    hi_s = float(np.max(np.abs(ns.source), initial=0.0))
    hi_t = float(np.max(np.abs(ns.target), initial=0.0))
    scale = hi_s + hi_t if ns.combine == "sum" else hi_s * hi_t
    return TIE_RTOL * scale if scale > 0 else 0.0


def _quantize(v, quantum):
    return np.round(v / quantum) if quantum else v


def select_extreme(blocks, scorer, k: int, largest: bool,
                   quantum: float = 0.0) -> list[tuple[int, int]]:
    """The ``k`` best candidates over lexicographically ordered blocks.

    Scores are rounded to multiples of ``quantum`` first, so values that
    differ only by rounding noise tie. Ties go to the lexicographically
    smallest pair.
    """
    best_key = None
    pool = None  # (key, src, dst)
    for b in blocks:
        if len(b) == 0:
            continue
        v = _quantize(np.asarray(scorer(b.src, b.dst), dtype=float), quantum)
        key = -v if largest else v
        if k == 1:
            i = int(np.argmin(key))
            if best_key is None or key[i] < best_key:
                best_key, pool = key[i], (b.src[i], b.dst[i])
            continue
        if pool is not None:
            key = np.concatenate([pool[0], key])
            src = np.concatenate([pool[1], b.src])
            dst = np.concatenate([pool[2], b.dst])
        else:
            src, dst = b.src, b.dst
        if len(key) > k:
            thr = np.partition(key, k - 1)[k - 1]
            sel = key <= thr
            key, src, dst = key[sel], src[sel], dst[sel]
        order = np.lexsort((dst, src, key))[:k]
        pool = (key[order], src[order], dst[order])
    if pool is None:
        return []
    if k == 1:
        return [(int(pool[0]), int(pool[1]))]
    return [(int(i), int(j)) for i, j in zip(pool[1], pool[2])]


def _blocks(g, kind, nodes, rank2):
    return (iter_rank2_candidate_blocks if rank2 else iter_candidate_blocks)(g, kind, nodes)


def _pick(g: Digraph, kind: str, method: CentralityMethod, nodes, k: int, rng,
          backend: str) -> list[tuple[int, int]]:
    if method.name == "random":
        blocks = list(_blocks(g, kind, nodes, method.rank2))
        if not blocks:
            return []
        src = np.concatenate([b.src for b in blocks])
        dst = np.concatenate([b.dst for b in blocks])
        idx = rng.choice(len(src), size=min(k, len(src)), replace=False)
        return [(int(src[i]), int(dst[i])) for i in idx]
    ns = node_scores(g, method, backend)
    quantum = tie_quantum(ns) * (2 if method.rank2 else 1)
    if k == 1 and kind == UPDATE and not method.rank2:
        return _best_virtual_edge(g, ns, nodes, quantum)
    scorer = ns.score_rank2 if method.rank2 else ns.score
    return select_extreme(_blocks(g, kind, nodes, method.rank2), scorer, k, kind == UPDATE,
                          quantum)


def _best_virtual_edge(g: Digraph, ns, nodes, quantum: float = 0.0) -> list[tuple[int, int]]:
    """Top-scoring virtual edge via dense row blocks of the score matrix.

    Same result as :func:`select_extreme` with ``k=1``; ``argmax`` on the
    row-major block returns the lexicographically smallest maximizer.
    """
    best = None
    for rows, cols, mask in iter_candidate_masks(g, nodes):
        if ns.combine == "sum":
            block = ns.source[rows][:, None] + ns.target[cols][None, :]
        else:
            block = ns.source[rows][:, None] * ns.target[cols][None, :]
        block = _quantize(block, quantum)
        block[~mask] = -np.inf
        flat = int(np.argmax(block))
        a, b = divmod(flat, len(cols))
        if mask[a, b] and (best is None or block[a, b] > best[0]):
            best = (block[a, b], int(rows[a]), int(cols[b]))
    return [] if best is None else [(best[1], best[2])]


def _expand(e, rank2):
    return ((e[0], e[1]), (e[1], e[0])) if rank2 else ((e[0], e[1]),)


# -- runs ---------------------------------------------------------------------


class _Recorder:
    def __init__(self, traj: ModificationTrajectory, backend: str, track_tc: bool,
                 metrics: bool = True):
        self.traj, self.backend, self.track_tc, self.metrics = traj, backend, track_tc, metrics

    def record(self, g: Digraph, edges, elapsed):
        if self.metrics or not self.traj.steps:
            thc, tac = spectral.hub_authority_totals(g, self.backend)
        else:
            thc = tac = math.nan
        tc = total_communicability(g, self.backend) if self.track_tc else math.nan
        self.traj.steps.append(StepRecord(len(self.traj.steps), tuple(edges), thc, tac, tc,
                                          elapsed, g.is_weakly_connected()))
        self.traj.final_graph = g


def run_greedy(g: Digraph, plan: ModificationPlan, *, backend: str = "auto",
               track_tc: bool = False, metrics: bool = True) -> ModificationTrajectory:
    """Greedy K-step run, also used for rank-two methods.

    With ``metrics=False`` only the step-0 indices are evaluated and later
    steps record NaN; useful for timing studies.
    """
    method = plan.method
    traj = ModificationTrajectory(method.label, plan.kind, g.n, g.m)
    rec = _Recorder(traj, backend, track_tc, metrics)
    nodes = top_nodes(g, plan.fraction) if plan.fraction is not None else None
    rng = np.random.default_rng(plan.seed)
    rank2 = method.rank2
    elapsed = 0.0

    if not method.recompute:
        t0 = time.perf_counter()
        chosen = _pick(g, plan.kind, method, nodes, plan.k, rng, backend)
        traj.scoring_passes += 1
        elapsed = time.perf_counter() - t0
        rec.record(g, (), 0.0)
        cur = g
        for e in chosen:
            t0 = time.perf_counter()
            pair = _expand(e, rank2)
            for d in pair:
                cur = apply_modification(cur, d, plan.kind)
            elapsed += time.perf_counter() - t0
            rec.record(cur, pair, elapsed)
        if len(chosen) < plan.k:
            traj.truncated = True
            warnings.warn(f"{method.label}: only {len(chosen)} of {plan.k} candidates available",
                          RuntimeWarning, stacklevel=2)
        return traj

    rec.record(g, (), 0.0)
    cur = g
    for step in range(1, plan.k + 1):
        t0 = time.perf_counter()
        try:
            chosen = _pick(cur, plan.kind, method, nodes, 1, rng, backend)
        except (MethodInapplicable, NumericalFailure):
            if step == 1:
                raise
            traj.truncated = True
            warnings.warn(f"{method.label}: stopped at step {step}, method no longer applicable",
                          RuntimeWarning, stacklevel=2)
            break
        traj.scoring_passes += 1
        if not chosen:
            traj.truncated = True
            warnings.warn(f"{method.label}: candidates exhausted after {step - 1} steps",
                          RuntimeWarning, stacklevel=2)
            break
        pair = _expand(chosen[0], rank2)
        for d in pair:
            cur = apply_modification(cur, d, plan.kind)
        elapsed += time.perf_counter() - t0
        rec.record(cur, pair, elapsed)
    return traj


def run_rank2(g: Digraph, plan: ModificationPlan, **kwargs) -> ModificationTrajectory:
    """Symmetric rank-two run: each step adds or removes both ``(i, j)`` and ``(j, i)``."""
    if not plan.method.rank2:
        plan = ModificationPlan(plan.kind, plan.k,
                                CentralityMethod(plan.method.name, plan.method.recompute, True),
                                plan.fraction, plan.seed)
    return run_greedy(g, plan, **kwargs)


def _batched_totals(a: np.ndarray, src, dst, value: float, chunk: int = 256):
    """``T_hC`` and ``T_aC`` of ``a`` with entry (src[c], dst[c]) set to ``value``, per c."""
    n = a.shape[0]
    thc = np.empty(len(src))
    tac = np.empty(len(src))
    for start in range(0, len(src), chunk):
        s, d = src[start:start + chunk], dst[start:start + chunk]
        batch = np.repeat(a[None], len(s), axis=0)
        batch[np.arange(len(s)), s, d] = value
        U, sig, Vt = np.linalg.svd(batch)
        c = np.cosh(sig)
        thc[start:start + chunk] = np.sum(c * U.sum(axis=1) ** 2, axis=1)
        tac[start:start + chunk] = np.sum(c * Vt.sum(axis=2) ** 2, axis=1)
    del n
    return thc, tac


def run_brute_force(g: Digraph, kind: str, k: int, objective: str | BruteForceObjective = "sum",
                    *, max_nodes: int = BRUTE_FORCE_MAX_NODES,
                    track_tc: bool = False) -> ModificationTrajectory:
    """Exhaustive greedy: at every step apply the candidate with the best exact objective.

    For downdates the best candidate is the one whose removal leaves the
    largest objective.
    """
    obj = objective if isinstance(objective, BruteForceObjective) else BruteForceObjective(objective)
    if kind not in KINDS:
        raise ParameterError(f"kind must be one of {KINDS}")
    if g.n > max_nodes:
        raise CapacityError(f"brute force is limited to n <= {max_nodes} (got n={g.n})")
    if k < 1:
        raise ParameterError("K must be at least 1")
    traj = ModificationTrajectory(obj.label, kind, g.n, g.m)
    rec = _Recorder(traj, "dense", track_tc)
    rec.record(g, (), 0.0)
    cur = g
    elapsed = 0.0
    value = 1.0 if kind == UPDATE else 0.0
    for step in range(1, k + 1):
        t0 = time.perf_counter()
        cand = enumerate_candidates(cur, kind)
        if cand.tau == 0:
            traj.truncated = True
            warnings.warn(f"brute force: candidates exhausted after {step - 1} steps",
                          RuntimeWarning, stacklevel=2)
            break
        thc, tac = _batched_totals(cur.dense(), cand.src, cand.dst, value)
        traj.scoring_passes += 1
        best = int(np.argmax(obj(thc, tac)))
        e = (int(cand.src[best]), int(cand.dst[best]))
        cur = apply_modification(cur, e, kind)
        elapsed += time.perf_counter() - t0
        rec.record(cur, (e,), elapsed)
    return traj


# -- method comparison --------------------------------------------------------


@dataclass
class MethodResult:
    label: str
    status: str  # "ok", "inapplicable" or "error"
    trajectory: ModificationTrajectory | None = None
    message: str = ""
    seed: int | None = None


@dataclass
class ComparisonTable:
    kind: str
    k: int
    results: list[MethodResult] = field(default_factory=list)

    def ok(self) -> list[MethodResult]:
        return [r for r in self.results if r.status == "ok"]

    def get(self, label: str) -> MethodResult:
        for r in self.results:
            if r.label == label:
                return r
        raise KeyError(label)

    def random_mean_final(self, objective: str = "sum") -> float:
        vals = [r.trajectory.final_objective(objective) for r in self.ok()
                if r.label.startswith("random")]
        return float(np.mean(vals)) if vals else math.nan

    def comparison_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["method"] + CSV_COLUMNS)
        for r in self.ok():
            body = r.trajectory.to_csv().splitlines()[1:]
            for line in body:
                out.write(f"{r.label},{line}\n")
        return out.getvalue() if fh is None else None

    def timing_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["method", "status", "steps", "elapsed_s", "scoring_passes",
                    "final_thc", "final_tac", "message"])
        for r in self.results:
            t = r.trajectory
            if t is None:
                w.writerow([r.label, r.status, 0, "", "", "", "", r.message])
            else:
                w.writerow([r.label, r.status, len(t) - 1, repr(t.elapsed_s), t.scoring_passes,
                            repr(t.steps[-1].thc), repr(t.steps[-1].tac), r.message])
        return out.getvalue() if fh is None else None

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for r in self.ok():
            p = out_dir / f"traj_{safe_label(r.label)}.csv"
            with open(p, "w", newline="") as fh:
                r.trajectory.to_csv(fh)
            written.append(p)
        for name, fn in (("comparison.csv", self.comparison_csv), ("timing.csv", self.timing_csv)):
            p = out_dir / name
            with open(p, "w", newline="") as fh:
                fn(fh)
            written.append(p)
        return written


def safe_label(label: str) -> str:
    return label.replace(":", "_").replace("#", "_seed").replace(" ", "_")


def compare_methods(g: Digraph, kind: str, methods, k: int, *, seeds=(0,), fraction=None,
                    backend: str = "auto", track_tc: bool = False, rank2: bool = False,
                    out_dir=None) -> ComparisonTable:
    """Run every method from the same starting graph and collect the trajectories.

    Random methods are run once per seed. Per-method failures are recorded in
    the table instead of aborting the comparison.
    """
    table = ComparisonTable(kind, k)
    for m in methods:
        method = CentralityMethod.parse(m, rank2) if isinstance(m, str) else m
        if rank2 and not method.rank2:
            method = CentralityMethod(method.name, method.recompute, True)
        run_seeds = seeds if method.name == "random" else (0,)
        for seed in run_seeds:
            label = method.label + (f"#{seed}" if method.name == "random" else "")
            plan = ModificationPlan(kind, k, method, fraction, seed)
            try:
                traj = run_greedy(g, plan, backend=backend, track_tc=track_tc)
                traj.label = label
                table.results.append(MethodResult(label, "ok", traj, seed=seed))
            except MethodInapplicable as exc:
                table.results.append(MethodResult(label, "inapplicable", message=str(exc), seed=seed))
            except (NumericalFailure, ArithmeticError) as exc:
                log.warning("%s failed: %s", label, exc)
                table.results.append(MethodResult(label, "error", message=str(exc), seed=seed))
    if out_dir is not None:
        table.write(out_dir)
    return table

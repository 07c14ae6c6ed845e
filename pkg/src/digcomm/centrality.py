"""Edge centrality rules for existing and virtual edges.

Every rule is a product (or, for ``b_deg``, a sum) of a broadcaster score of
the source node and a receiver score of the target node. Node scores are
computed once per graph snapshot and candidates are scored in one vectorized
pass.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .communicability import node_communicabilities
from .errors import MethodInapplicable, ParameterError
from .graph import CandidateSet, Digraph, degrees

log = logging.getLogger(__name__)

METHOD_NAMES = ("hits", "gtc", "eig", "tc", "b_eig", "b_tc", "b_deg", "random")
_ALIASES = {"b_random": "random", "egtc": "gtc", "ehits": "hits"}


@dataclass(frozen=True)
class CentralityMethod:
    name: str
    recompute: bool = True
    rank2: bool = False

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise ParameterError(f"unknown method {self.name!r}; choose from {METHOD_NAMES}")

    @classmethod
    def parse(cls, label: str, rank2: bool = False) -> CentralityMethod:
        """Parse labels such as ``gtc``, ``HITS.no``, ``b:tc.no`` or ``b_deg``."""
        text = label.strip().lower()
        recompute = True
        if text.endswith(".no"):
            text, recompute = text[:-3], False
        text = text.replace(":", "_")
        text = _ALIASES.get(text, text)
        return cls(text, recompute, rank2)

    @property
    def label(self) -> str:
        base = self.name.replace("b_", "b:") if self.name.startswith("b_") else self.name
        return base + ("" if self.recompute else ".no") + (".r2" if self.rank2 else "")

    @property
    def deterministic(self) -> bool:
        return self.name != "random"

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class NodeScores:
    source: np.ndarray
    target: np.ndarray
    combine: str = "prod"

    def score(self, src, dst) -> np.ndarray:
        if self.combine == "sum":
            return self.source[src] + self.target[dst]
        return self.source[src] * self.target[dst]

    def score_rank2(self, i, j) -> np.ndarray:
        return self.score(i, j) + self.score(j, i)


def node_scores(g: Digraph, method: CentralityMethod | str, backend: str = "auto") -> NodeScores:
    """Broadcaster and receiver node scores underlying an edge centrality rule."""
    name = method.name if isinstance(method, CentralityMethod) else CentralityMethod.parse(method).name
    n = g.n
    if name == "hits":
        if g.m == 0:
            return NodeScores(np.zeros(n), np.zeros(n))
        t = spectral.dominant_triplet(g)
        return NodeScores(t.u1, t.v1)
    if name == "gtc":
        c = node_communicabilities(g, backend)
        return NodeScores(c.c_h, c.c_a)
    if name == "eig":
        pair = spectral.dominant_eigpair_lr(g)
        if not pair.simple_flag:
            raise MethodInapplicable("eig: dominant eigenvalue is not numerically simple")
        return NodeScores(pair.x1, pair.y1)
    if name == "tc":
        rows, cols = spectral.exp_row_col_sums(g, backend)
        return NodeScores(rows, cols)
    if name == "b_eig":
        q = spectral.lift_perron_vector(g)
        return NodeScores(q[:n], q[n:])
    if name == "b_tc":
        w = spectral.lift_exp_row_sums(g, backend)
        return NodeScores(w[:n], w[n:])
    if name == "b_deg":
        d = degrees(g)
        return NodeScores(d.d_out.astype(float), d.d_in.astype(float), "sum")
    raise ParameterError(f"method {name!r} has no node scores")


@dataclass(frozen=True, eq=False)
class EdgeScoreTable:
    method: str
    src: np.ndarray
    dst: np.ndarray
    score: np.ndarray
    provenance: str = ""
    filtered: int = 0

    def __len__(self):
        return len(self.src)

    @property
    def entries(self) -> list[tuple[tuple[int, int], float]]:
        return [((int(i), int(j)), float(s)) for i, j, s in zip(self.src, self.dst, self.score)]

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(self.entries)

    def to_csv(self, fh=None) -> str | None:
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["source", "target", "method", "score"])
        for (i, j), s in self.entries:
            w.writerow([i, j, self.method, repr(s)])
        return out.getvalue() if fh is None else None


def read_score_csv(fh) -> EdgeScoreTable:
    rows = list(csv.DictReader(fh))
    method = rows[0]["method"] if rows else ""
    return EdgeScoreTable(
        method,
        np.array([int(r["source"]) for r in rows], dtype=np.int64),
        np.array([int(r["target"]) for r in rows], dtype=np.int64),
        np.array([float(r["score"]) for r in rows]),
    )


def score_candidates(g: Digraph, candidates: CandidateSet, method: CentralityMethod | str,
                     backend: str = "auto", scores: NodeScores | None = None) -> EdgeScoreTable:
    if isinstance(method, str):
        method = CentralityMethod.parse(method)
    ns = scores if scores is not None else node_scores(g, method, backend)
    values = ns.score(candidates.src, candidates.dst).astype(float)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError(f"{method.label}: non-finite edge scores")
    return EdgeScoreTable(method.label, candidates.src, candidates.dst, values, g.fingerprint)


def score_hits(g, candidates, backend="auto"):
    """``u_1(i) v_1(j)``: hub score of the source times authority score of the target."""
    return score_candidates(g, candidates, "hits", backend)


def score_gtc(g, candidates, backend="auto"):
    """``C_h(i) C_a(j)`` from row/column sums of the generalized hyperbolic sine."""
    return score_candidates(g, candidates, "gtc", backend)


def score_eig(g, candidates, backend="auto"):
    """``x_1(i) y_1(j)`` from right/left Perron vectors of A."""
    return score_candidates(g, candidates, "eig", backend)


def score_tc(g, candidates, backend="auto"):
    """``(e^A 1)_i (1^T e^A)_j``."""
    return score_candidates(g, candidates, "tc", backend)


def score_bipartite_eig(g, candidates, backend="auto"):
    return score_candidates(g, candidates, "b_eig", backend)


def score_bipartite_tc(g, candidates, backend="auto"):
    return score_candidates(g, candidates, "b_tc", backend)


def score_bipartite_deg(g, candidates, backend="auto"):
    """``d_out(i) + d_in(j)``, the lift degrees of ``i`` and ``j + n``."""
    return score_candidates(g, candidates, "b_deg", backend)


def symmetrize_rank2(table_fwd: EdgeScoreTable, table_rev: EdgeScoreTable) -> EdgeScoreTable:
    """Unordered-pair scores ``C(i, j) + C(j, i)``.

    ``table_rev`` must contain the reversed pair of every admissible entry of
    ``table_fwd``; pairs whose reverse is missing are dropped and counted in
    ``filtered``. The result lists each pair once as ``(min, max)``.
    """
    rev = table_rev.as_dict()
    src, dst, val = [], [], []
    seen = set()
    dropped = 0
    for (i, j), s in table_fwd.entries:
        key = (min(i, j), max(i, j))
        if key in seen:
            continue
        if (j, i) not in rev:
            dropped += 1
            continue
        seen.add(key)
        src.append(key[0])
        dst.append(key[1])
        val.append(s + rev[(j, i)])
    if dropped:
        log.info("symmetrize_rank2: dropped %d pairs admissible in one direction only", dropped)
    order = np.lexsort((np.asarray(dst, dtype=np.int64), np.asarray(src, dtype=np.int64)))
    return EdgeScoreTable(
        table_fwd.method + ".r2",
        np.asarray(src, dtype=np.int64)[order],
        np.asarray(dst, dtype=np.int64)[order],
        np.asarray(val, dtype=float)[order],
        table_fwd.provenance,
        dropped,
    )


def bipartite_tc_divergence(g: Digraph, candidates: CandidateSet):
    """Difference between the lift edge score and gTC, and its closed form.

    Returns ``(difference, closed_form)`` per candidate, where ``difference``
    is ``b_tc(i, j) - gtc(i, j)`` and ``closed_form`` is
    ``phi(i, j) - (cosh(sqrt(A A^T)) 1)_i (cosh(sqrt(A^T A)) 1)_j``. Dense only.
    """
    from .communicability import bipartite_exp_blocks

    tl, tr, bl, br = bipartite_exp_blocks(g)
    ones = np.ones(g.n)
    hub_c, auth_c = tl @ ones, br @ ones
    c_h, c_a = tr @ ones, bl @ ones
    lift_rows = np.concatenate([hub_c + c_h, c_a + auth_c])
    i, j = candidates.src, candidates.dst
    difference = lift_rows[i] * lift_rows[j + g.n] - c_h[i] * c_a[j]
    phi = lift_rows[i] * auth_c[j] + lift_rows[j + g.n] * hub_c[i]
    return difference, phi - hub_c[i] * auth_c[j]

"""Simple digraphs: storage, file ingestion, bipartite lift, candidate sets.

Nodes are 0-based integers. A :class:`Digraph` is an immutable value; every
mutation primitive returns a new graph.
"""

from __future__ import annotations

import hashlib
import io
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, TextIO

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import (
    CapacityError,
    InvalidModificationError,
    ParameterError,
    ParseError,
    UnsupportedFormatError,
)

log = logging.getLogger(__name__)

UPDATE = "update"
DOWNDATE = "downdate"
KINDS = (UPDATE, DOWNDATE)

# Candidate sets above this size are only available block by block.
MATERIALIZE_CAP = 20_000_000
# Pairs per enumeration block.
BLOCK_PAIRS = 1 << 22


@dataclass(frozen=True)
class IngestStats:
    lines: int = 0
    duplicates: int = 0
    self_loops: int = 0


@dataclass(frozen=True, eq=False)
class Digraph:
    """Unweighted digraph without self-loops or multi-edges.

    ``edges`` is an (m, 2) integer array kept in lexicographic order, so two
    graphs with the same edge set compare equal regardless of how they were
    built.
    """

    n: int
    edges: np.ndarray
    ingest: IngestStats | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError("node count must be nonnegative")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise ParameterError(f"edge endpoint outside 0..{self.n - 1}")
            if np.any(e[:, 0] == e[:, 1]):
                raise ParameterError("self-loops are not allowed")
            codes = e[:, 0] * self.n + e[:, 1]
            order = np.argsort(codes, kind="stable")
            codes = codes[order]
            if np.any(codes[1:] == codes[:-1]):
                raise ParameterError("duplicate edges are not allowed")
            e = e[order]
        e = np.ascontiguousarray(e)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable, *, drop_invalid: bool = False) -> Digraph:
        """Build a graph from (i, j) pairs.

        With ``drop_invalid`` duplicates and self-loops are discarded and
        counted instead of raising.
        """
        e = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                       dtype=np.int64).reshape(-1, 2)
        if not drop_invalid:
            return cls(n, e)
        loops = e[:, 0] == e[:, 1]
        e = e[~loops]
        codes = np.unique(e[:, 0] * max(n, 1) + e[:, 1]) if e.size else np.empty(0, np.int64)
        dups = len(e) - len(codes)
        e = np.column_stack([codes // max(n, 1), codes % max(n, 1)]) if len(codes) else e[:0]
        stats = IngestStats(lines=len(loops), duplicates=int(dups), self_loops=int(loops.sum()))
        return cls(n, e, ingest=stats)

    @classmethod
    def from_dense(cls, a) -> Digraph:
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError("adjacency matrix must be square")
        i, j = np.nonzero(a)
        return cls(a.shape[0], np.column_stack([i, j]))

    # -- basic accessors ---------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def codes(self) -> np.ndarray:
        """Sorted flat indices ``i * n + j`` of the edges."""
        return self.edges[:, 0] * self.n + self.edges[:, 1]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(self.m)
        a = sp.csr_matrix((data, (self.edges[:, 0], self.edges[:, 1])), shape=(self.n, self.n))
        a.sort_indices()
        return a

    @cached_property
    def adjacency_t(self) -> sp.csr_matrix:
        return self.adjacency.T.tocsr()

    def dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[self.edges[:, 0], self.edges[:, 1]] = 1.0
        return a

    def has_edge(self, i: int, j: int) -> bool:
        if not (0 <= i < self.n and 0 <= j < self.n):
            return False
        c = i * self.n + j
        k = np.searchsorted(self.codes, c)
        return bool(k < self.m and self.codes[k] == c)

    def out_neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def in_neighbors(self, j: int) -> np.ndarray:
        a = self.adjacency_t
        return a.indices[a.indptr[j]:a.indptr[j + 1]]

    def transpose(self) -> Digraph:
        return Digraph(self.n, self.edges[:, ::-1])

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in self.edges]

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha1(np.int64(self.n).tobytes())
        h.update(self.edges.tobytes())
        return h.hexdigest()[:12]

    def is_weakly_connected(self) -> bool:
        if self.n <= 1:
            return True
        k, _ = csgraph.connected_components(self.adjacency, directed=True, connection="weak")
        return k == 1

    def is_acyclic(self) -> bool:
        k, _ = csgraph.connected_components(self.adjacency, directed=True, connection="strong")
        return k == self.n

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Digraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class DegreeVectors:
    d_out: np.ndarray
    d_in: np.ndarray


@dataclass(frozen=True)
class BipartiteLift:
    """The 2n-node undirected graph with node ``j + n`` the receiver copy of ``j``."""

    n: int
    adjacency: sp.csr_matrix

    def copy_of(self, j: int) -> int:
        return j + self.n

    def dense(self) -> np.ndarray:
        return self.adjacency.toarray()


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Directed pairs considered for one modification, in lexicographic order."""

    kind: str
    src: np.ndarray
    dst: np.ndarray

    @property
    def tau(self) -> int:
        return len(self.src)

    def __len__(self):
        return self.tau

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def __iter__(self):
        return iter(self.pairs)


# -- ingestion ---------------------------------------------------------------


def load_edge_list(source: TextIO | str, indexing: str = "zero", *, has_header: bool = False) -> Digraph:
    """Read whitespace-separated ``i j`` pairs, one edge per line.

    Lines starting with ``%`` or ``#`` are comments. With ``has_header`` the
    first data line is ``n m`` and fixes the node count; otherwise the node
    count is the largest index plus one. Duplicates and self-loops are dropped
    and counted in ``Digraph.ingest``.
    """
    if indexing not in ("zero", "one"):
        raise ParameterError("indexing must be 'zero' or 'one'")
    if isinstance(source, str):
        source = io.StringIO(source)
    base = 1 if indexing == "one" else 0
    n_header = None
    pairs = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line[0] in "%#":
            continue
        tokens = line.split()
        try:
            values = [int(t) for t in tokens[:2]]
        except ValueError:
            raise ParseError(f"expected two integers, got {line!r}", line=lineno) from None
        if len(values) < 2:
            raise ParseError(f"expected two integers, got {line!r}", line=lineno)
        if has_header and n_header is None:
            n_header = values[0]
            continue
        i, j = values[0] - base, values[1] - base
        if i < 0 or j < 0:
            raise ParseError(f"negative node index in {line!r}", line=lineno)
        pairs.append((i, j))
    if not pairs:
        raise ParseError("edge list contains no edges")
    e = np.asarray(pairs, dtype=np.int64)
    n = int(e.max()) + 1
    if n_header is not None:
        if n_header < n:
            raise ParseError(f"header declares {n_header} nodes but index {n - 1 + base} appears")
        n = n_header
    g = Digraph.from_edges(n, e, drop_invalid=True)
    _log_ingest(g)
    return g


def load_matrix_market(source: TextIO | str) -> Digraph:
    """Read a coordinate Matrix Market file as a binary adjacency pattern."""
    text = source if isinstance(source, str) else source.read()
    first = text.lstrip().split("\n", 1)[0].lower().split()
    if len(first) < 5 or first[0] != "%%matrixmarket" or first[1] != "matrix":
        raise ParseError("missing '%%MatrixMarket matrix' banner", line=1)
    fmt, fld, sym = first[2], first[3], first[4]
    if fmt != "coordinate":
        raise UnsupportedFormatError(f"only coordinate format is supported, got {fmt!r}")
    if fld not in ("pattern", "real", "integer"):
        raise UnsupportedFormatError(f"unsupported field {fld!r}")
    if sym not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"unsupported symmetry {sym!r}")
    try:
        a = sp.coo_matrix(scipy.io.mmread(io.StringIO(text)))
    except (ValueError, IndexError) as exc:
        raise ParseError(f"malformed Matrix Market body: {exc}") from None
    if a.shape[0] != a.shape[1]:
        raise ParseError(f"adjacency must be square, got {a.shape}")
    keep = a.data != 0
    rows, cols = a.row[keep], a.col[keep]
    if len(rows) == 0:
        raise ParseError("matrix has no nonzero entries")
    g = Digraph.from_edges(a.shape[0], np.column_stack([rows, cols]), drop_invalid=True)
    _log_ingest(g)
    return g


def load_graph(path, fmt: str = "edgelist", index_base: int = 0, *, has_header: bool = False) -> Digraph:
    with open(path) as fh:
        if fmt == "mm":
            return load_matrix_market(fh)
        if fmt == "edgelist":
            return load_edge_list(fh, "one" if index_base == 1 else "zero", has_header=has_header)
    raise ParameterError(f"unknown format {fmt!r}")


def _log_ingest(g: Digraph) -> None:
    s = g.ingest
    if s and (s.duplicates or s.self_loops):
        log.info("dropped %d duplicate edges and %d self-loops", s.duplicates, s.self_loops)
    if not g.is_weakly_connected():
        log.info("graph is not weakly connected")


# -- derived structures ------------------------------------------------------


def degrees(g: Digraph) -> DegreeVectors:
    d_out = np.bincount(g.edges[:, 0], minlength=g.n)
    d_in = np.bincount(g.edges[:, 1], minlength=g.n)
    return DegreeVectors(d_out, d_in)


def bipartite_lift(g: Digraph) -> BipartiteLift:
    a = g.adjacency
    lift = sp.bmat([[None, a], [a.T, None]], format="csr")
    if lift.shape != (2 * g.n, 2 * g.n):  # bmat drops shape for empty blocks
        lift = sp.csr_matrix(lift, shape=(2 * g.n, 2 * g.n))
    return BipartiteLift(g.n, lift)


def candidate_count(g: Digraph, kind: str, nodes=None) -> int:
    _check_kind(kind)
    if nodes is None:
        return g.n * (g.n - 1) - g.m if kind == UPDATE else g.m
    nodes = np.asarray(nodes)
    inside = np.zeros(g.n, bool)
    inside[nodes] = True
    m_in = int(np.sum(inside[g.edges[:, 0]] & inside[g.edges[:, 1]]))
    k = len(nodes)
    return k * (k - 1) - m_in if kind == UPDATE else m_in


def iter_candidate_blocks(g: Digraph, kind: str, nodes=None,
                          block_pairs: int = BLOCK_PAIRS) -> Iterator[CandidateSet]:
    """Yield the candidate set in lexicographic order, a block of rows at a time.

    ``nodes`` restricts candidates to the induced subgraph on those nodes.
    """
    _check_kind(kind)
    nodes = np.arange(g.n) if nodes is None else np.unique(np.asarray(nodes, dtype=np.int64))
    if kind == DOWNDATE:
        e = g.edges
        if len(nodes) < g.n:
            inside = np.zeros(g.n, bool)
            inside[nodes] = True
            e = e[inside[e[:, 0]] & inside[e[:, 1]]]
        for start in range(0, len(e), block_pairs):
            chunk = e[start:start + block_pairs]
            yield CandidateSet(kind, chunk[:, 0].copy(), chunk[:, 1].copy())
        return

    for rows, cols, mask in iter_candidate_masks(g, nodes, block_pairs):
        ri, ci = np.nonzero(mask)
        if len(ri):
            yield CandidateSet(kind, rows[ri], cols[ci])


def iter_candidate_masks(g: Digraph, nodes=None, block_pairs: int = BLOCK_PAIRS):
    """Row blocks of the virtual-edge indicator on the (induced) node set.

    Yields ``(rows, cols, mask)`` where ``mask[a, b]`` is true iff
    ``(rows[a], cols[b])`` is a virtual edge. Row-major order of the masks is
    lexicographic order of the pairs.
    """
    nodes = np.arange(g.n) if nodes is None else np.unique(np.asarray(nodes, dtype=np.int64))
    k = len(nodes)
    if k < 2:
        return
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[nodes] = np.arange(k)
    a = g.adjacency
    rows_per_block = max(1, block_pairs // k)
    for start in range(0, k, rows_per_block):
        rows = nodes[start:start + rows_per_block]
        mask = np.ones((len(rows), k), dtype=bool)
        mask[np.arange(len(rows)), pos[rows]] = False
        sub = a[rows]
        r_idx = np.repeat(np.arange(len(rows)), np.diff(sub.indptr))
        c_pos = pos[sub.indices]
        ok = c_pos >= 0
        mask[r_idx[ok], c_pos[ok]] = False
        yield rows, nodes, mask


def enumerate_candidates(g: Digraph, kind: str, nodes=None, *, cap: int = MATERIALIZE_CAP) -> CandidateSet:
    """All virtual edges (update) or all existing edges (downdate)."""
    tau = candidate_count(g, kind, nodes)
    if tau > cap:
        raise CapacityError(f"{tau} candidates exceed the materialization cap {cap}; "
                            "use iter_candidate_blocks")
    blocks = list(iter_candidate_blocks(g, kind, nodes))
    if not blocks:
        empty = np.empty(0, dtype=np.int64)
        return CandidateSet(kind, empty, empty.copy())
    return CandidateSet(kind, np.concatenate([b.src for b in blocks]),
                        np.concatenate([b.dst for b in blocks]))


def iter_rank2_candidate_blocks(g: Digraph, kind: str, nodes=None,
                                block_pairs: int = BLOCK_PAIRS) -> Iterator[CandidateSet]:
    """Unordered pairs ``(i, j)``, ``i < j``, with both directions virtual (update)
    or both directions present (downdate)."""
    for block in iter_candidate_blocks(g, kind, nodes, block_pairs):
        keep = block.src < block.dst
        s, d = block.src[keep], block.dst[keep]
        rev = d * g.n + s
        k = np.searchsorted(g.codes, rev)
        present = (k < g.m) & (g.codes[np.minimum(k, max(g.m - 1, 0))] == rev) if g.m else np.zeros(len(s), bool)
        keep = ~present if kind == UPDATE else present
        if np.any(keep):
            yield CandidateSet(kind, s[keep], d[keep])


def enumerate_rank2_candidates(g: Digraph, kind: str, nodes=None) -> CandidateSet:
    blocks = list(iter_rank2_candidate_blocks(g, kind, nodes))
    if not blocks:
        empty = np.empty(0, dtype=np.int64)
        return CandidateSet(kind, empty, empty.copy())
    return CandidateSet(kind, np.concatenate([b.src for b in blocks]),
                        np.concatenate([b.dst for b in blocks]))


def lift_node_ranking(g: Digraph) -> np.ndarray:
    """Original nodes ordered by the better of their hub and authority ranks.

    The 2n lift nodes are ranked by eigenvector centrality of the lift; each
    node keeps whichever of its two copies ranks higher. On equal scores the
    hub copy ranks first.
    """
    from .spectral import lift_perron_vector

    q = lift_perron_vector(g)
    order = np.lexsort((np.arange(2 * g.n), -q))  # descending score, then index
    rank = np.empty(2 * g.n, dtype=np.int64)
    rank[order] = np.arange(2 * g.n)
    best = np.minimum(rank[:g.n], rank[g.n:])
    return np.argsort(best, kind="stable")


def top_nodes(g: Digraph, fraction: float = 0.10) -> np.ndarray:
    if not (0 < fraction <= 1):
        raise ParameterError(f"fraction must lie in (0, 1], got {fraction}")
    if g.m == 0:
        return np.arange(math.ceil(fraction * g.n))
    count = math.ceil(fraction * g.n - 1e-12)
    return np.sort(lift_node_ranking(g)[:count])


def restrict_candidates(g: Digraph, fraction: float = 0.10, kind: str = UPDATE) -> CandidateSet:
    """Candidates inside the induced subgraph of the top-ranked nodes."""
    return enumerate_candidates(g, kind, top_nodes(g, fraction))


# -- mutation ----------------------------------------------------------------


def apply_modification(g: Digraph, e, kind: str) -> Digraph:
    _check_kind(kind)
    i, j = int(e[0]), int(e[1])
    if i == j:
        raise InvalidModificationError(f"self-loop ({i}, {i}) is not allowed")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise InvalidModificationError(f"({i}, {j}) is outside 0..{g.n - 1}")
    code = i * g.n + j
    k = int(np.searchsorted(g.codes, code))
    present = k < g.m and g.codes[k] == code
    if kind == UPDATE:
        if present:
            raise InvalidModificationError(f"({i}, {j}) is already an edge")
        edges = np.insert(g.edges, k, [i, j], axis=0)
    else:
        if not present:
            raise InvalidModificationError(f"({i}, {j}) is not an edge")
        edges = np.delete(g.edges, k, axis=0)
    return Digraph(g.n, edges)


def apply_modifications(g: Digraph, edges, kind: str) -> Digraph:
    for e in edges:
        g = apply_modification(g, e, kind)
    return g


def permute(g: Digraph, p) -> Digraph:
    """Relabel node ``i`` as ``p[i]``."""
    p = np.asarray(p, dtype=np.int64)
    if p.shape != (g.n,) or not np.array_equal(np.sort(p), np.arange(g.n)):
        raise ParameterError("p must be a permutation of 0..n-1")
    return Digraph(g.n, p[g.edges])


def random_digraph(n: int, p: float, seed=None) -> Digraph:
    """Erdos-Renyi digraph: each ordered non-loop pair is an edge with probability p."""
    rng = np.random.default_rng(seed)
    if n * n <= 4_000_000:
        mask = rng.random((n, n)) < p
        np.fill_diagonal(mask, False)
        i, j = np.nonzero(mask)
        return Digraph(n, np.column_stack([i, j]))
    m = rng.binomial(n * (n - 1), p)
    codes = np.unique(rng.integers(0, n * n, size=int(m * 1.1) + 16))
    codes = codes[codes // n != codes % n]
    codes = rng.permutation(codes)[:m]
    return Digraph(n, np.column_stack([codes // n, codes % n]))


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ParameterError(f"kind must be one of {KINDS}, got {kind!r}")

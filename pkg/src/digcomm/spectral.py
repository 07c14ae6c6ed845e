"""Numerical kernels: singular triplets, Perron vectors, matrix-function actions.

Two backends are available. ``dense`` works on the explicit adjacency matrix
(LAPACK SVD/eigh, scaling-and-squaring exponential). ``krylov`` only uses
sparse products: Lanczos for symmetric operators, Golub-Kahan
bidiagonalization for generalized matrix functions and Arnoldi for the
nonsymmetric exponential. ``auto`` picks ``dense`` up to ``DENSE_MAX_NODES``.
"""

from __future__ import annotations

import contextlib
import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import CapacityError, MethodInapplicable, NumericalFailure, ParameterError
from .graph import Digraph

log = logging.getLogger(__name__)

DENSE_MAX_NODES = 500
EXPM_MAX_DIM = 4000


@dataclass(frozen=True)
class Tolerances:
    power: float = 1e-12
    krylov: float = 1e-10
    rank: float = 1e-12
    power_max_iter: int = 50_000
    krylov_max_dim: int = 400


DEFAULTS = Tolerances()


@contextlib.contextmanager
def tolerances(**overrides):
    """Temporarily override the module defaults, e.g. ``tolerances(krylov=1e-8)``."""
    global DEFAULTS
    saved = DEFAULTS
    DEFAULTS = replace(DEFAULTS, **overrides)
    try:
        yield DEFAULTS
    finally:
        DEFAULTS = saved


def resolve_backend(n: int, backend: str = "auto") -> str:
    if backend == "auto":
        return "dense" if n <= DENSE_MAX_NODES else "krylov"
    if backend not in ("dense", "krylov"):
        raise ParameterError(f"unknown backend {backend!r}")
    return backend


# -- scalar functions --------------------------------------------------------


@dataclass(frozen=True)
class MatrixFunctionSpec:
    """A scalar function with a nonnegative-coefficient Maclaurin series.

    ``scalar`` is evaluated elementwise on eigenvalues; ``coefficient(k)``
    is the k-th series coefficient, used by the series oracles.
    """

    name: str
    scalar: Callable[[np.ndarray], np.ndarray]
    coefficient: Callable[[int], float]
    degree: int | None = None  # polynomial degree, None for entire functions

    def __call__(self, t):
        return self.scalar(np.asarray(t, dtype=float))

    def is_admissible(self, terms: int = 64) -> bool:
        k_max = terms if self.degree is None else self.degree + 1
        return all(self.coefficient(k) >= 0 for k in range(k_max))


def _sqrt_clamped(t):
    return np.sqrt(np.maximum(t, 0.0))


def _sinhc_sqrt(t):
    s = _sqrt_clamped(t)
    out = np.ones_like(s)
    big = s > 1e-4
    out[big] = np.sinh(s[big]) / s[big]
    small = s[~big] ** 2
    out[~big] = 1 + small / 6 + small**2 / 120
    return out


EXP = MatrixFunctionSpec("exp", np.exp, lambda k: 1 / math.factorial(k))
COSH_SQRT = MatrixFunctionSpec("cosh_sqrt", lambda t: np.cosh(_sqrt_clamped(t)),
                               lambda k: 1 / math.factorial(2 * k))
# sinh(sqrt t)/sqrt t: applied to A A^T and multiplied by A it gives sinh over singular values.
SINHC_SQRT = MatrixFunctionSpec("sinhc_sqrt", _sinhc_sqrt, lambda k: 1 / math.factorial(2 * k + 1))


def polynomial(*coeffs: float) -> MatrixFunctionSpec:
    """``f(t) = c0 + c1 t + c2 t^2 + ...``"""
    c = tuple(float(x) for x in coeffs)
    return MatrixFunctionSpec(
        "poly" + str(list(c)),
        lambda t: np.polynomial.polynomial.polyval(t, c) + 0 * t,
        lambda k: c[k] if k < len(c) else 0.0,
        degree=len(c) - 1,
    )


# -- dense decompositions ----------------------------------------------------


@dataclass(frozen=True)
class CompactSvd:
    sigma: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @property
    def r(self) -> int:
        return len(self.sigma)

    def gmf(self, f: Callable) -> np.ndarray:
        """Generalized matrix function ``U_r f(Sigma_r) V_r^T``."""
        return (self.U * f(self.sigma)) @ self.V.T


def _dense_svd(a: np.ndarray):
    try:
        return np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"dense SVD failed: {exc}") from None


def compact_svd(g: Digraph | np.ndarray, rank_tol: float | None = None) -> CompactSvd:
    """Singular triplets with sigma > rank_tol * sigma_1, in descending order."""
    rank_tol = DEFAULTS.rank if rank_tol is None else rank_tol
    a = g.dense() if isinstance(g, Digraph) else np.asarray(g, dtype=float)
    if a.size == 0 or not np.any(a):
        n = a.shape[0]
        return CompactSvd(np.empty(0), np.empty((n, 0)), np.empty((a.shape[1], 0)))
    U, s, Vt = _dense_svd(a)
    r = int(np.sum(s > rank_tol * s[0]))
    return CompactSvd(s[:r], U[:, :r], Vt[:r].T)


def generalized_matrix_function(a, f: Callable, *, full: bool = False) -> np.ndarray:
    """``sum_k f(sigma_k) u_k v_k^T``.

    With ``full`` the sum runs over the full SVD, so zero singular values
    contribute ``f(0) u_k v_k^T``. Those terms depend on the LAPACK choice of
    null-space bases and are only meaningful as a demonstration.
    """
    a = a.dense() if isinstance(a, Digraph) else np.asarray(a, dtype=float)
    if not full:
        return compact_svd(a).gmf(f)
    U, s, Vt = _dense_svd(a)
    return (U * f(s)) @ Vt


def top_singular_values(g: Digraph, k: int = 2, backend: str = "auto") -> np.ndarray:
    k = min(k, g.n)
    if g.m == 0:
        return np.zeros(k)
    if resolve_backend(g.n, backend) == "dense" or k >= g.n - 1:
        return np.linalg.svd(g.dense(), compute_uv=False)[:k]
    v0 = np.ones(g.n) / math.sqrt(g.n)
    s = spla.svds(g.adjacency, k=k, v0=v0, return_singular_vectors=False, tol=DEFAULTS.power)
    return np.sort(s)[::-1]


# -- power iterations --------------------------------------------------------


def _perron_normalize(x: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(x)) if x.size else 0.0
    if scale == 0:
        return x
    if np.min(x) < -1e-10 * scale:
        x = -x
    x = np.maximum(x, 0.0)
    return x / np.linalg.norm(x)


@dataclass(frozen=True)
class HubAuthorityPair:
    sigma1: float
    u1: np.ndarray
    v1: np.ndarray
    gap: float | None = None
    iterations: int = 0


def dominant_triplet(g: Digraph, tol: float | None = None, max_iter: int | None = None,
                     *, with_gap: bool = False) -> HubAuthorityPair:
    """HITS: alternate ``u = A v``, ``v = A^T u`` from the constant authority vector.

    Stops when ``||A^T u - sigma v|| <= tol * sigma`` with ``A v = sigma u``
    holding exactly, so (u, v, sigma) is a consistent singular triplet.
    """
    tol = DEFAULTS.power if tol is None else tol
    max_iter = DEFAULTS.power_max_iter if max_iter is None else max_iter
    if g.m == 0:
        raise ParameterError("dominant_triplet needs at least one edge")
    a, at = g.adjacency, g.adjacency_t
    v = np.full(g.n, 1 / math.sqrt(g.n))
    res = np.inf
    for it in range(1, max_iter + 1):
        u = a @ v
        sigma = np.linalg.norm(u)
        u /= sigma
        w = at @ u
        res = np.linalg.norm(w - sigma * v)
        if res <= tol * sigma:
            break
        v = w / np.linalg.norm(w)
    else:
        raise NumericalFailure("HITS power iteration did not converge",
                               iterations=max_iter, residual=float(res / sigma))
    gap = None
    if with_gap:
        s = top_singular_values(g, 2)
        gap = float(s[0] - s[1]) if len(s) > 1 else float(s[0])
    return HubAuthorityPair(float(sigma), _perron_normalize(u), _perron_normalize(v), gap, it)


@dataclass(frozen=True)
class EigenPairLR:
    lambda1: float
    x1: np.ndarray
    y1: np.ndarray
    simple_flag: bool
    iterations: int = 0


def _power(op, n, tol, max_iter):
    x = np.full(n, 1 / math.sqrt(n))
    lam, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        w = op @ x
        lam = np.linalg.norm(w)
        if lam == 0:
            return 0.0, x, True, it
        res = np.linalg.norm(w - lam * x)
        if res <= tol * lam:
            return lam, w / lam, True, it
        x = w / lam
    return lam, x, False, max_iter


def dominant_eigpair_lr(g: Digraph, tol: float | None = None,
                        max_iter: int = 10_000) -> EigenPairLR:
    """Right and left Perron vectors of A by power iteration from the constant vector.

    Raises :class:`MethodInapplicable` on acyclic graphs (nilpotent A). A run
    that stagnates, as happens for a periodic or repeated dominant eigenvalue,
    returns ``simple_flag=False``.
    """
    tol = DEFAULTS.power if tol is None else tol
    if g.m == 0 or g.is_acyclic():
        raise MethodInapplicable("eig: adjacency matrix is nilpotent (graph is acyclic)")
    lam_x, x, ok_x, it_x = _power(g.adjacency, g.n, tol, max_iter)
    lam_y, y, ok_y, it_y = _power(g.adjacency_t, g.n, tol, max_iter)
    simple = ok_x and ok_y and abs(lam_x - lam_y) <= 1e-8 * max(lam_x, 1.0)
    if not simple:
        warnings.warn("eig: power iteration stagnated; dominant eigenvalue may be "
                      "repeated, periodic or complex", RuntimeWarning, stacklevel=2)
    return EigenPairLR(float(lam_x), _perron_normalize(x), _perron_normalize(y), simple,
                       max(it_x, it_y))


def lift_matvec(g: Digraph):
    a, at, n = g.adjacency, g.adjacency_t, g.n

    def mv(x):
        return np.concatenate([a @ x[n:], at @ x[:n]])
    return mv


def lift_perron_vector(g: Digraph, tol: float | None = None,
                       max_iter: int | None = None) -> np.ndarray:
    """Perron vector of the bipartite lift, from the constant start.

    Iterates on ``lift + I``, whose spectrum has a unique dominant value
    ``1 + sigma_1``; the plain lift has ``+-sigma_1`` and would oscillate.
    """
    tol = DEFAULTS.power if tol is None else tol
    max_iter = DEFAULTS.power_max_iter if max_iter is None else max_iter
    n2 = 2 * g.n
    x = np.full(n2, 1 / math.sqrt(n2))
    if g.m == 0:
        return x
    mv = lift_matvec(g)
    diff = np.inf
    for _ in range(max_iter):
        w = mv(x) + x
        w /= np.linalg.norm(w)
        diff = np.linalg.norm(w - x)
        x = w
        if diff <= tol:
            return _perron_normalize(x)
    raise NumericalFailure("lift power iteration did not converge", iterations=max_iter,
                           step=float(diff))


# -- exponential -------------------------------------------------------------


def expm_dense(m, max_dim: int = EXPM_MAX_DIM) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError("expm_dense needs a square matrix")
    n = m.shape[0]
    if n > max_dim:
        raise CapacityError(f"dimension {n} exceeds the dense cap {max_dim}")
    norm = np.linalg.norm(m, 1)
    s = int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    x = m / 2.0**s
    result = np.eye(n) + x
    term = x
    for k in range(2, 40):
        term = term @ x / k
        result += term
        if np.linalg.norm(term, 1) <= 1e-18 * np.linalg.norm(result, 1):
            break
    for _ in range(s):
        result = result @ result
    return result


# -- Krylov kernels ----------------------------------------------------------


def _as_matvec(op):
    if callable(op) and not hasattr(op, "shape"):
        return op
    return lambda x: op @ x


def f_action_symmetric(op, b, f: MatrixFunctionSpec, krylov_dim: int | None = None,
                       tol: float | None = None) -> np.ndarray:
    """Lanczos approximation of ``f(S) b`` for symmetric ``S``.

    ``op`` is a matrix, sparse matrix or a callable computing ``S @ x``.
    Full reorthogonalization; stops when two successive approximations differ
    by at most ``tol * ||result||``, or on an invariant subspace.
    """
    tol = DEFAULTS.krylov if tol is None else tol
    b = np.asarray(b, dtype=float)
    n = len(b)
    kmax = min(n, DEFAULTS.krylov_max_dim if krylov_dim is None else krylov_dim)
    beta0 = np.linalg.norm(b)
    if beta0 == 0:
        return np.zeros(n)
    mv = _as_matvec(op)
    Q = np.zeros((n, kmax + 1))
    Q[:, 0] = b / beta0
    alpha, beta = [], []
    prev, gap = None, np.inf
    for k in range(kmax):
        w = mv(Q[:, k])
        a = Q[:, k] @ w
        w = w - a * Q[:, k]
        if k:
            w -= beta[-1] * Q[:, k - 1]
        for _ in range(2):
            w -= Q[:, :k + 1] @ (Q[:, :k + 1].T @ w)
        alpha.append(a)
        bnorm = np.linalg.norm(w)
        theta, S = _tridiag_eig(alpha, beta)
        y = beta0 * (Q[:, :k + 1] @ (S @ (f(theta) * S[0])))
        scale = max(np.max(np.abs(theta)), 1.0)
        if bnorm <= 1e-13 * scale or k + 1 == n:
            return y
        if prev is not None:
            gap = np.linalg.norm(y - prev)
            if gap <= tol * np.linalg.norm(y):
                return y
        beta.append(bnorm)
        Q[:, k + 1] = w / bnorm
        prev = y
    raise NumericalFailure("Lanczos did not converge", krylov_dim=kmax, gap=float(gap))


def _tridiag_eig(alpha, beta):
    if len(alpha) == 1:
        return np.array(alpha, dtype=float), np.ones((1, 1))
    return sla.eigh_tridiagonal(np.asarray(alpha), np.asarray(beta))


def gmf_action(matvec, rmatvec, b, f: Callable, n_rows: int, krylov_dim: int | None = None,
               tol: float | None = None) -> np.ndarray:
    """Golub-Kahan approximation of ``f^gen(A) b`` with ``f^gen(A) = sum f(s_k) u_k v_k^T``.

    Bidiagonalizes A from ``v_1 = b / ||b||`` (so the left Krylov space is
    spanned by powers of ``A A^T`` applied to ``A b``) and returns
    ``||b|| U_k f^gen(B_k) e_1``. Zero singular values of B_k are dropped.
    """
    tol = DEFAULTS.krylov if tol is None else tol
    b = np.asarray(b, dtype=float)
    n_cols = len(b)
    kmax = min(n_rows, n_cols, DEFAULTS.krylov_max_dim if krylov_dim is None else krylov_dim)
    beta0 = np.linalg.norm(b)
    if beta0 == 0:
        return np.zeros(n_rows)
    U = np.zeros((n_rows, kmax + 1))
    V = np.zeros((n_cols, kmax + 1))
    V[:, 0] = b / beta0
    alphas, betas = [], []  # B is upper bidiagonal: diag alphas, superdiag betas

    def approx(rows, cols):
        B = np.zeros((rows, cols))
        B[np.arange(rows), np.arange(rows)] = alphas[:rows]
        for i, bt in enumerate(betas[:cols - 1]):
            B[i, i + 1] = bt
        P, s, Qt = np.linalg.svd(B, full_matrices=False)
        keep = s > 1e-14 * max(s[0], 1e-300) if len(s) else s > 0
        coef = (P[:, keep] * f(s[keep])) @ Qt[keep, 0]
        return beta0 * (U[:, :rows] @ coef)

    p = matvec(V[:, 0])
    alpha = np.linalg.norm(p)
    if alpha == 0:
        return np.zeros(n_rows)
    U[:, 0] = p / alpha
    alphas.append(alpha)
    prev, gap = None, np.inf
    for k in range(1, kmax + 1):
        y = approx(k, k)
        if prev is not None:
            gap = np.linalg.norm(y - prev)
            if gap <= tol * np.linalg.norm(y):
                return y
        if k == kmax:
            break
        r = rmatvec(U[:, k - 1]) - alphas[-1] * V[:, k - 1]
        for _ in range(2):
            r -= V[:, :k] @ (V[:, :k].T @ r)
        beta = np.linalg.norm(r)
        scale = max(max(alphas), max(betas, default=0.0))
        if beta <= 1e-13 * scale:
            return y
        V[:, k] = r / beta
        betas.append(beta)
        p = matvec(V[:, k]) - beta * U[:, k - 1]
        for _ in range(2):
            p -= U[:, :k] @ (U[:, :k].T @ p)
        alpha = np.linalg.norm(p)
        if alpha <= 1e-13 * max(scale, beta):
            alphas.append(0.0)
            return approx(k, k + 1)
        U[:, k] = p / alpha
        alphas.append(alpha)
        prev = y
    if min(n_rows, n_cols) == kmax:
        return y
    raise NumericalFailure("Golub-Kahan did not converge", krylov_dim=kmax, gap=float(gap))


def expm_action_arnoldi(op, b, krylov_dim: int | None = None,
                        tol: float | None = None) -> np.ndarray:
    """Arnoldi approximation of ``exp(M) b`` for nonsymmetric ``M``."""
    tol = DEFAULTS.krylov if tol is None else tol
    b = np.asarray(b, dtype=float)
    n = len(b)
    kmax = min(n, DEFAULTS.krylov_max_dim if krylov_dim is None else krylov_dim)
    beta0 = np.linalg.norm(b)
    if beta0 == 0:
        return np.zeros(n)
    mv = _as_matvec(op)
    V = np.zeros((n, kmax + 1))
    H = np.zeros((kmax + 1, kmax))
    V[:, 0] = b / beta0
    prev, gap = None, np.inf
    for k in range(kmax):
        w = mv(V[:, k])
        for _ in range(2):
            h = V[:, :k + 1].T @ w
            w -= V[:, :k + 1] @ h
            H[:k + 1, k] += h
        hnext = np.linalg.norm(w)
        y = beta0 * (V[:, :k + 1] @ expm_dense(H[:k + 1, :k + 1])[:, 0])
        scale = max(np.linalg.norm(H[:k + 1, :k + 1], 1), 1.0)
        if hnext <= 1e-13 * scale or k + 1 == n:
            return y
        if prev is not None:
            gap = np.linalg.norm(y - prev)
            if gap <= tol * np.linalg.norm(y):
                return y
        H[k + 1, k] = hnext
        V[:, k + 1] = w / hnext
        prev = y
    raise NumericalFailure("Arnoldi did not converge", krylov_dim=kmax, gap=float(gap))


# -- graph-level wrappers ----------------------------------------------------


def gram_matvec(g: Digraph, which: str):
    a, at = g.adjacency, g.adjacency_t
    if which == "hub":
        return lambda x: a @ (at @ x)
    if which == "authority":
        return lambda x: at @ (a @ x)
    raise ParameterError(f"which must be 'hub' or 'authority', got {which!r}")


def gmf_sinh_action(g: Digraph, side: str = "row_sums", tol: float | None = None,
                    backend: str = "auto") -> np.ndarray:
    """Row sums (``sinh^gen(A) 1``) or column sums (``sinh^gen(A)^T 1``)."""
    if side not in ("row_sums", "col_sums"):
        raise ParameterError(f"side must be 'row_sums' or 'col_sums', got {side!r}")
    if g.m == 0:
        return np.zeros(g.n)
    ones = np.ones(g.n)
    if resolve_backend(g.n, backend) == "dense":
        svd = compact_svd(g)
        if side == "row_sums":
            return svd.U @ (np.sinh(svd.sigma) * (svd.V.T @ ones))
        return svd.V @ (np.sinh(svd.sigma) * (svd.U.T @ ones))
    a, at = g.adjacency, g.adjacency_t
    mv, rmv = (a.__matmul__, at.__matmul__) if side == "row_sums" else (at.__matmul__, a.__matmul__)
    return gmf_action(mv, rmv, ones, np.sinh, g.n, tol=tol)


def quad_form(g: Digraph, which: str, f: MatrixFunctionSpec, tol: float | None = None,
              backend: str = "auto") -> float:
    """``1^T f(A A^T) 1`` (hub) or ``1^T f(A^T A) 1`` (authority)."""
    mv = gram_matvec(g, which)
    ones = np.ones(g.n)
    if g.m == 0:
        return float(f(np.zeros(1))[0] * g.n)
    if resolve_backend(g.n, backend) == "dense":
        a = g.dense()
        gram = a @ a.T if which == "hub" else a.T @ a
        lam, W = np.linalg.eigh(gram)
        lam[(lam < 0) & (lam >= -1e-10 * max(lam[-1], 1.0))] = 0.0
        return float(np.sum(f(lam) * (W.T @ ones) ** 2))
    return float(ones @ f_action_symmetric(mv, ones, f, tol=tol))


def hub_authority_totals(g: Digraph, backend: str = "auto", tol: float | None = None):
    """``(T_hC, T_aC)`` with one dense SVD, or two Lanczos runs."""
    if g.m == 0:
        return float(g.n), float(g.n)
    if resolve_backend(g.n, backend) == "dense":
        U, s, Vt = _dense_svd(g.dense())
        ones = np.ones(g.n)
        c = np.cosh(s)
        return float(c @ (U.T @ ones) ** 2), float(c @ (Vt @ ones) ** 2)
    return (quad_form(g, "hub", COSH_SQRT, tol, "krylov"),
            quad_form(g, "authority", COSH_SQRT, tol, "krylov"))


def exp_row_col_sums(g: Digraph, backend: str = "auto", tol: float | None = None):
    """``(e^A 1, (1^T e^A)^T)``."""
    ones = np.ones(g.n)
    if g.m == 0:
        return ones.copy(), ones.copy()
    if resolve_backend(g.n, backend) == "dense":
        e = expm_dense(g.dense())
        return e.sum(axis=1), e.sum(axis=0)
    return (expm_action_arnoldi(g.adjacency, ones, tol=tol),
            expm_action_arnoldi(g.adjacency_t, ones, tol=tol))


def lift_exp_row_sums(g: Digraph, backend: str = "auto", tol: float | None = None) -> np.ndarray:
    """``e^L 1`` for the bipartite lift L (length 2n)."""
    ones = np.ones(2 * g.n)
    if g.m == 0:
        return ones
    if resolve_backend(g.n, backend) == "dense":
        svd = compact_svd(g)
        o = np.ones(g.n)
        ut1, vt1 = svd.U.T @ o, svd.V.T @ o
        ch, sh = np.cosh(svd.sigma), np.sinh(svd.sigma)
        top = o + svd.U @ ((ch - 1) * ut1) + svd.U @ (sh * vt1)
        bottom = o + svd.V @ ((ch - 1) * vt1) + svd.V @ (sh * ut1)
        return np.concatenate([top, bottom])
    return f_action_symmetric(lift_matvec(g), ones, EXP, tol=tol)

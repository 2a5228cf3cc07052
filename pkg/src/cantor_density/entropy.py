"""Topological entropy and Hausdorff dimension of sandwich subshifts.

A sandwich system is the set of binary sequences ``d`` with
``beta <= sigma^n(d) <= reflect(beta)`` for every ``n``. Two finite
presentations are built here:

* the tie-tracking automaton, an exact right-resolving presentation whose
  state remembers the tightest pending lower and upper constraint (each is
  a shift of ``beta`` or of ``reflect(beta)``);
* the window graph on ``n``-blocks, a finite-type relaxation whose entropy
  ``h_n`` is an upper bound that tightens as ``n`` grows.

The automaton gives the entropy itself. The window graph is kept as an
independent upper bracket.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .coding import DEFAULT, RhoParams, as_fraction, delta
from .errors import InvalidInput, ResourceLimit, SpectralNonConvergence
from .words import EpSeq, compare_lex, reflect

MAX_BRUTE_N = 24
DEFAULT_TOL = 1e-9
DEFAULT_N_MAX = 40
DEFAULT_VERTEX_CAP = 200_000
MAX_STAIRCASE_LEN = 16


@dataclass(frozen=True)
class SandwichSystem:
    lower: EpSeq
    upper: Optional[EpSeq] = None

    def __post_init__(self):
        if self.upper is None:
            object.__setattr__(self, "upper", reflect(self.lower))
        elif self.upper != reflect(self.lower):
            raise InvalidInput("upper bound must be the reflection of the lower bound")

    @classmethod
    def from_t(cls, t, p: RhoParams = DEFAULT) -> "SandwichSystem":
        return cls(delta(t, p))

    @classmethod
    def from_prefix(cls, prefix: str) -> "SandwichSystem":
        """Periodize a finite prefix of a bound that is not eventually periodic."""
        return cls(EpSeq.make("", prefix))

    @property
    def period(self) -> int:
        return len(self.lower.per)

    def contains(self, d: EpSeq) -> bool:
        return all(
            compare_lex(self.lower, y) <= 0 and compare_lex(y, self.upper) <= 0
            for y in d.distinct_shifts()
        )


@dataclass(frozen=True)
class DimensionResult:
    value: float
    upper_bound: float
    lower_witness: float
    block_len_used: int
    converged: bool

    def __post_init__(self):
        slack = 1e-12 * max(1.0, abs(self.upper_bound))
        if not (self.lower_witness - slack <= self.value <= self.upper_bound + slack):
            raise InvalidInput(
                f"inconsistent bracket {self.lower_witness} <= {self.value} <= {self.upper_bound}"
            )

    def scaled(self, factor: float) -> "DimensionResult":
        return DimensionResult(
            self.value * factor,
            self.upper_bound * factor,
            self.lower_witness * factor,
            self.block_len_used,
            self.converged,
        )


# -- window checks and brute force ------------------------------------------------


def locally_admissible(w: str, sys: SandwichSystem) -> bool:
    """No suffix of ``w`` is decided below ``beta`` or above ``reflect(beta)`` inside ``w``."""
    n = len(w)
    lo = sys.lower.prefix(n)
    hi = sys.upper.prefix(n)
    for j in range(n):
        u = w[j:]
        k = n - j
        if u < lo[:k] or u > hi[:k]:
            return False
    return True


def _extend_ok(w: str, lo: str, hi: str) -> bool:
    # only suffixes ending at the last digit can newly fail
    n = len(w)
    for j in range(n):
        k = n - j
        u = w[j:]
        if u < lo[:k] or u > hi[:k]:
            return False
    return True


def enumerate_blocks(sys: SandwichSystem, n: int) -> list[str]:
    """All locally admissible words of length ``n`` in lexicographic order."""
    if n < 0:
        raise InvalidInput("n must be >= 0")
    lo = sys.lower.prefix(n)
    hi = sys.upper.prefix(n)
    level = [""]
    for _ in range(n):
        nxt = []
        for w in level:
            for c in "01":
                v = w + c
                if _extend_ok(v, lo, hi):
                    nxt.append(v)
        level = nxt
        if not level:
            break
    return level


def count_blocks(sys: SandwichSystem, n: int) -> int:
    """Brute-force count of locally admissible ``n``-blocks (prefix-pruned DFS)."""
    if n > MAX_BRUTE_N:
        raise ResourceLimit(f"count_blocks is guarded at n <= {MAX_BRUTE_N}")
    if n < 0:
        raise InvalidInput("n must be >= 0")
    lo = sys.lower.prefix(n)
    hi = sys.upper.prefix(n)
    total = 0
    stack = [""]
    while stack:
        w = stack.pop()
        if len(w) == n:
            total += 1
            continue
        for c in "01":
            v = w + c
            if _extend_ok(v, lo, hi):
                stack.append(v)
    return total


# -- graphs --------------------------------------------------------------------------


@dataclass
class TransferGraph:
    """Directed multigraph-free graph on labelled vertices.

    ``block_len`` is the block length for window graphs and 0 for
    automata. ``start`` is set for automata, whose labelled paths from the
    start vertex are exactly the locally admissible words.
    """

    block_len: int
    vertices: list
    edges: list[tuple[int, int]]
    start: Optional[int] = None
    labels: Optional[list[str]] = None

    def adjacency(self):
        n = len(self.vertices)
        if not self.edges:
            return csr_matrix((n, n), dtype=np.float64)
        rows, cols = zip(*self.edges)
        data = np.ones(len(self.edges), dtype=np.float64)
        return csr_matrix((data, (rows, cols)), shape=(n, n))

    def path_counts(self, k: int, from_start: bool = False) -> int:
        """Number of length-``k`` paths, all starts or only from ``start``. Exact integers."""
        n = len(self.vertices)
        if from_start:
            if self.start is None:
                raise InvalidInput("graph has no start vertex")
            vec = [0] * n
            vec[self.start] = 1
        else:
            vec = [1] * n
        for _ in range(k):
            nxt = [0] * n
            for i, j in self.edges:
                if vec[i]:
                    nxt[j] += vec[i]
            vec = nxt
        return sum(vec)


def _prune(vertices: list, edges: list[tuple[int, int]]):
    """Iteratively drop vertices of in- or out-degree zero."""
    alive = set(range(len(vertices)))
    changed = True
    while changed:
        changed = False
        outd = {v: 0 for v in alive}
        ind = {v: 0 for v in alive}
        for i, j in edges:
            if i in alive and j in alive:
                outd[i] += 1
                ind[j] += 1
        dead = [v for v in alive if outd[v] == 0 or ind[v] == 0]
        if dead:
            alive.difference_update(dead)
            changed = True
    order = sorted(alive)
    index = {v: k for k, v in enumerate(order)}
    new_edges = sorted((index[i], index[j]) for i, j in edges if i in alive and j in alive)
    return [vertices[v] for v in order], new_edges


def transfer_graph(sys: SandwichSystem, n: int, vertex_cap: int = DEFAULT_VERTEX_CAP,
                   prune: bool = True) -> TransferGraph:
    """Window graph: vertices are locally admissible ``n``-blocks."""
    if n < 1:
        raise InvalidInput("block length must be >= 1")
    blocks = enumerate_blocks(sys, n)
    if len(blocks) > vertex_cap:
        raise ResourceLimit(f"{len(blocks)} blocks of length {n} exceed cap {vertex_cap}")
    index = {w: k for k, w in enumerate(blocks)}
    lo = sys.lower.prefix(n + 1)
    hi = sys.upper.prefix(n + 1)
    edges = []
    for k, w in enumerate(blocks):
        for c in "01":
            v = w + c
            j = index.get(v[1:])
            if j is not None and _extend_ok(v, lo, hi):
                edges.append((k, j))
    if prune:
        blocks, edges = _prune(blocks, edges)
    return TransferGraph(n, blocks, edges)


class _ShiftTable:
    """Shifts of an eventually periodic sequence, indexed and ranked."""

    def __init__(self, x: EpSeq):
        self.r = len(x.pre)
        self.size = len(x.pre) + len(x.per)
        self.seqs = x.distinct_shifts()
        self.first = [x.digit(i) for i in range(self.size)]
        order = sorted(range(self.size), key=_cmp_key(self.seqs))
        self.rank = [0] * self.size
        for k, i in enumerate(order):
            self.rank[i] = k

    def succ(self, i: int) -> int:
        return i + 1 if i + 1 < self.size else self.r

    def larger(self, i: int, j: int) -> int:
        return i if self.rank[i] >= self.rank[j] else j


def _cmp_key(seqs):
    import functools

    return functools.cmp_to_key(lambda i, j: compare_lex(seqs[i], seqs[j]))


def sandwich_automaton(sys: SandwichSystem) -> TransferGraph:
    """Exact right-resolving presentation of the locally admissible language.

    State ``(i, j)`` means the pending lower constraint is ``sigma^i(beta)``
    and the pending upper constraint is ``sigma^j(reflect(beta))``. Since
    reflection reverses order, the tightest upper constraint among tied
    shifts is the one whose ``beta``-shift ranks highest, so both sides use
    the same ranking.
    """
    tab = _ShiftTable(sys.lower)

    def step(state, c):
        i, j = state
        d = tab.first[i]
        if c < d:
            return None
        i2 = 0 if c > d else tab.larger(tab.succ(i), 0)
        e = 1 - tab.first[j]
        if c > e:
            return None
        j2 = 0 if c < e else tab.larger(tab.succ(j), 0)
        return (i2, j2)

    start = (0, 0)
    index = {start: 0}
    states = [start]
    edges = []
    labels = []
    k = 0
    while k < len(states):
        st = states[k]
        for c in (0, 1):
            nxt = step(st, c)
            if nxt is None:
                continue
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            edges.append((k, index[nxt]))
            labels.append(str(c))
        k += 1
    return TransferGraph(0, states, edges, start=0, labels=labels)


# -- spectral radius -----------------------------------------------------------------


@dataclass(frozen=True)
class SpectralResult:
    value: float
    lower: float
    upper: float
    iterations: int


POWER_STEPS = 2000


def _cw(B, x):
    y = B @ x
    ratios = y / x
    return y, float(ratios.min()), float(ratios.max())


def _iterate(A, B, x, tol: float, max_iter: int) -> SpectralResult:
    """Power iteration on ``B = A + I``; shifted inverse iteration if it stalls."""
    x = np.maximum(x, 1e-300)
    x /= x.sum()
    lo, hi = 0.0, math.inf
    for it in range(1, min(max_iter, POWER_STEPS) + 1):
        y, lo, hi = _cw(B, x)
        if hi - lo <= tol * max(1.0, lo):
            lam = 0.5 * (lo + hi) - 1.0
            return SpectralResult(max(lam, 0.0), max(lo - 1.0, 0.0), hi - 1.0, it)
        x = np.maximum(y / y.sum(), 1e-300)
    return _inverse_iterate(A, x, tol, max_iter, it)


def _inverse_iterate(A, x, tol: float, max_iter: int, done: int) -> SpectralResult:
    # for mu above the Perron root, (mu I - A)^-1 is nonnegative with a
    # well separated top eigenvalue; the Collatz-Wielandt upper bound is such a mu
    from scipy.sparse import csc_matrix, identity
    from scipy.sparse.linalg import splu

    n = A.shape[0]
    As = csc_matrix(A)
    _, lo, hi = _cw(As, x)
    it = done
    while it < max_iter:
        mu = hi + max(1e-10, 1e-9 * hi, 1e-3 * (hi - lo))
        lu = splu((mu * identity(n, format="csc") - As).tocsc())
        for _ in range(8):
            it += 1
            x = np.abs(lu.solve(x))
            x = np.maximum(x / x.sum(), 1e-300)
        _, lo2, hi2 = _cw(As, x)
        lo, hi = max(lo, lo2), min(hi, hi2)
        if hi - lo <= tol * max(1.0, lo):
            lam = 0.5 * (lo + hi)
            return SpectralResult(max(lam, 0.0), max(lo, 0.0), hi, it)
    raise SpectralNonConvergence(lo, hi, max_iter)


def _perron_block(A: np.ndarray, tol: float, max_iter: int) -> SpectralResult:
    n = A.shape[0]
    B = A + np.eye(n)
    # warm start from a dense eigenvector when affordable
    if n <= 1500:
        w, V = np.linalg.eig(B)
        k = int(np.argmax(w.real))
        x = np.abs(V[:, k].real)
    else:
        x = np.ones(n)
    return _iterate(A, B, x, tol, max_iter)


def _perron_block_sparse(A, tol: float, max_iter: int) -> SpectralResult:
    from scipy.sparse import identity

    n = A.shape[0]
    B = (A + identity(n, format="csr")).tocsr()
    return _iterate(A, B, np.ones(n), tol, max_iter)


def spectral_radius_bounds(g: TransferGraph, tol: float = 1e-12,
                           max_iter: int = 100_000) -> SpectralResult:
    """Perron root with Collatz-Wielandt bounds, maximized over strong components.

    Each component is iterated with ``A + I``, which is primitive whenever
    ``A`` is irreducible, so periodic components converge too.
    """
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    n = len(g.vertices)
    if n == 0 or not g.edges:
        return SpectralResult(0.0, 0.0, 0.0, 0)
    A = g.adjacency()
    ncomp, comp = connected_components(A, directed=True, connection="strong")
    best = SpectralResult(0.0, 0.0, 0.0, 0)
    members: dict[int, list[int]] = {}
    for v, c in enumerate(comp):
        members.setdefault(int(c), []).append(v)
    for c, idx in sorted(members.items()):
        sub = A[idx][:, idx]
        if sub.nnz == 0:
            continue
        if sub.sum() == len(idx):
            # strongly connected with one edge per vertex: a simple cycle
            res = SpectralResult(1.0, 1.0, 1.0, 0)
        elif len(idx) <= 3000:
            res = _perron_block(sub.toarray(), tol, max_iter)
        else:
            res = _perron_block_sparse(sub, tol, max_iter)
        if res.value > best.value:
            best = res
    return best


def spectral_radius(g: TransferGraph, tol: float = 1e-12) -> float:
    return spectral_radius_bounds(g, tol).value


def graph_entropy(g: TransferGraph, tol: float = 1e-12) -> float:
    """``log max(lambda, 1)``: zero for empty or cycle-poor graphs."""
    lam = spectral_radius(g, tol)
    return math.log(max(lam, 1.0))


def exact_entropy(sys: SandwichSystem, tol: float = 1e-12) -> float:
    return graph_entropy(sandwich_automaton(sys), tol)


def entropy(sys: SandwichSystem, n_start: Optional[int] = None, n_max: int = DEFAULT_N_MAX,
            tol: float = DEFAULT_TOL, vertex_cap: int = DEFAULT_VERTEX_CAP) -> DimensionResult:
    """Entropy of the sandwich system, bracketed.

    ``value`` and ``lower_witness`` come from the exact automaton (every
    cycle in it is realized by an eventually periodic member of the
    system). ``upper_bound`` is the smallest window-graph entropy ``h_n``
    reached for ``n = n_start, n_start + p, ...`` before the bracket closes
    within ``tol``, ``n`` passes ``n_max`` or the vertex cap is hit.
    """
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    step = sys.period
    if n_start is None:
        n_start = step
    n_start = max(1, n_start)
    exact = exact_entropy(sys, tol=min(tol, 1e-12))
    upper = math.inf
    used = 0
    n = n_start
    prev = None
    while n <= n_max:
        try:
            g = transfer_graph(sys, n, vertex_cap=vertex_cap)
        except ResourceLimit:
            break
        h = graph_entropy(g, tol=min(tol, 1e-12))
        if h < upper:
            upper = h
        used = n
        if upper - exact < tol:
            break
        if prev is not None and abs(h - prev) < tol:
            break
        prev = h
        n += step
    if upper is math.inf:
        upper = math.log(2)
    upper = max(upper, exact)
    return DimensionResult(exact, upper, exact, used, upper - exact < tol)


def window_upper_bound(sys: SandwichSystem, n: int, tol: float = 1e-12) -> float:
    """``h_n`` for a single window length."""
    return graph_entropy(transfer_graph(sys, n), tol)


def dim_survivor(t, p: RhoParams = DEFAULT, n_start: Optional[int] = None,
                 n_max: int = DEFAULT_N_MAX, tol: float = DEFAULT_TOL,
                 vertex_cap: int = DEFAULT_VERTEX_CAP) -> DimensionResult:
    """Hausdorff dimension of ``{x in C : tau(x) >= t}``."""
    t = as_fraction(t)
    if not 0 <= t <= 1:
        raise InvalidInput(f"t must lie in [0, 1], got {t}")
    sys = SandwichSystem.from_t(t, p)
    res = entropy(sys, n_start, n_max, tol, vertex_cap)
    return res.scaled(1.0 / float(p.neg_log_rho))


def dim_survivor_exact(t, p: RhoParams = DEFAULT) -> float:
    """Automaton-only dimension, no window bracket. Used for bulk work."""
    sys = SandwichSystem.from_t(t, p)
    return exact_entropy(sys) / float(p.neg_log_rho)


def dim_survivor_upper(t_below, p: RhoParams = DEFAULT) -> float:
    """Upper bound for ``dim S(t)`` at every ``t >= t_below``.

    The survivor sets shrink as ``t`` grows, so the exact dimension at a
    rational point below an irrational ``t`` bounds it from above.
    """
    return dim_survivor_exact(t_below, p)


def dim_from_coding(beta: EpSeq, p: RhoParams = DEFAULT) -> float:
    return exact_entropy(SandwichSystem(beta)) / float(p.neg_log_rho)


# -- Lambda_N ------------------------------------------------------------------------


def lambda_N_graph(N: int) -> TransferGraph:
    """N-periodic position automaton rejecting aligned blocks ``0^N`` and ``1^N``.

    State ``(phase, status)`` where status records whether the current
    aligned block is so far all zeros, all ones or mixed.
    """
    if N < 2:
        raise InvalidInput("N must be >= 2")
    states = [(0, "start")]
    index = {(0, "start"): 0}
    edges = []
    labels = []
    k = 0
    while k < len(states):
        phase, status = states[k]
        for c in "01":
            if status == "start":
                new = "all0" if c == "0" else "all1"
            elif status == "all0":
                new = "all0" if c == "0" else "mixed"
            elif status == "all1":
                new = "all1" if c == "1" else "mixed"
            else:
                new = "mixed"
            if phase == N - 1:
                if new != "mixed":
                    continue
                nxt = (0, "start")
            else:
                nxt = (phase + 1, new)
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            edges.append((k, index[nxt]))
            labels.append(c)
        k += 1
    return TransferGraph(0, states, edges, start=0, labels=labels)


def lambda_N_closed_form(N: int, p: RhoParams = DEFAULT) -> float:
    if N < 2:
        raise InvalidInput("N must be >= 2")
    with mpmath.workdps(p.precision + 10):
        return float(mpmath.log(2 ** N - 2) / (N * p.neg_log_rho))


@dataclass(frozen=True)
class LambdaNCheck:
    N: int
    closed_form: float
    engine: float
    entropy_closed_form: float
    entropy_engine: float

    @property
    def agrees(self) -> bool:
        return abs(self.entropy_closed_form - self.entropy_engine) < 1e-9


def lambda_N_dimension(N: int, p: RhoParams = DEFAULT) -> LambdaNCheck:
    """Closed-form dimension of ``Lambda_N`` with an entropy-engine cross-check."""
    cf = lambda_N_closed_form(N, p)
    h = graph_entropy(lambda_N_graph(N), tol=1e-14)
    h_cf = math.log(2 ** N - 2) / N
    scale = float(p.neg_log_rho)
    return LambdaNCheck(N, cf, h / scale, h_cf, h)


def thread_cap() -> int:
    """Worker cap from ``CANTOR_DENSITY_THREADS`` (default: CPU count)."""
    raw = os.environ.get("CANTOR_DENSITY_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise InvalidInput(f"CANTOR_DENSITY_THREADS must be an integer, got {raw!r}") from exc
    return os.cpu_count() or 1

"""Constraint FSMs: spectral capacity, sequence counting, and rate tables.

A DC-free constraint bounds the running digital sum (RDS) of the encoded
sequence to a window of N values.  Walking the constraint graph one edge per
emitted bit, the number of admissible sequences grows like the spectral
radius of the adjacency matrix, and the base-2 log of that radius is the
capacity in bits per symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConstraintFsm",
    "CapacityResult",
    "RateEntry",
    "build_dcfree_fsm",
    "capacity",
    "count_sequences",
    "rate_table",
    "format_rate_table",
]


@dataclass(frozen=True)
class ConstraintFsm:
    """A finite-state machine with binary edge labels.

    ``transitions`` is a tuple of ``(from_state, to_state, emitted_bit)``
    triples; states are integers in ``range(num_states)``.
    """

    num_states: int
    transitions: tuple
    start_state: int = 0

    def __post_init__(self):
        if self.num_states < 1:
            raise ValueError("num_states must be >= 1")
        object.__setattr__(self, "transitions", tuple(tuple(t) for t in self.transitions))
        for frm, to, bit in self.transitions:
            if not (0 <= frm < self.num_states and 0 <= to < self.num_states):
                raise ValueError(f"transition ({frm}, {to}, {bit}) leaves the state range")
            if bit not in (0, 1):
                raise ValueError(f"emitted bit must be 0 or 1, got {bit}")
        if not (0 <= self.start_state < self.num_states):
            raise ValueError(f"start_state {self.start_state} out of range")

    def adjacency(self) -> np.ndarray:
        """Adjacency matrix D with D[i, j] = number of edges i -> j."""
        d = np.zeros((self.num_states, self.num_states), dtype=np.int64)
        for frm, to, _bit in self.transitions:
            d[frm, to] += 1
        return d

    def relabeled(self, permutation) -> "ConstraintFsm":
        """Return the same machine with states renamed by ``permutation``."""
        perm = list(permutation)
        if sorted(perm) != list(range(self.num_states)):
            raise ValueError("permutation must be a bijection on the state set")
        trans = tuple((perm[f], perm[t], b) for f, t, b in self.transitions)
        return ConstraintFsm(self.num_states, trans, perm[self.start_state])


@dataclass(frozen=True)
class CapacityResult:
    lambda_max: float
    capacity: float


@dataclass(frozen=True)
class RateEntry:
    k: int
    n: int
    rate: float
    efficiency: float


def build_dcfree_fsm(num_rds_values: int) -> ConstraintFsm:
    """DC-free constraint whose RDS walks a path graph on ``num_rds_values`` states.

    Emitting a 1 moves the RDS up one state, emitting a 0 moves it down one;
    no edge leaves the window.  The start state defaults to the middle of the
    window.
    """
    if num_rds_values < 2:
        raise ValueError("a DC-free constraint needs at least 2 RDS values")
    n = num_rds_values
    transitions = []
    for i in range(n - 1):
        transitions.append((i, i + 1, 1))
        transitions.append((i + 1, i, 0))
    return ConstraintFsm(n, tuple(transitions), start_state=(n - 1) // 2)


def _is_strongly_connected(d: np.ndarray) -> bool:
    n = d.shape[0]
    for mat in (d, d.T):
        seen = {0}
        frontier = [0]
        while frontier:
            state = frontier.pop()
            for nxt in np.nonzero(mat[state])[0]:
                if int(nxt) not in seen:
                    seen.add(int(nxt))
                    frontier.append(int(nxt))
        if len(seen) != n:
            return False
    return True


def capacity(fsm: ConstraintFsm, tol: float = 1e-10, max_iter: int = 100_000) -> CapacityResult:
    """Capacity of the constraint: log2 of the spectral radius of the adjacency matrix.

    Power iteration runs on D + I so that bipartite graphs (such as the
    DC-free path) have a unique dominant eigenvalue; the Collatz-Wielandt
    ratios min_i (Ax)_i / x_i and max_i (Ax)_i / x_i enclose the spectral
    radius, so the iteration stops with a certified absolute error <= tol/2.
    """
    d = fsm.adjacency().astype(np.float64)
    if fsm.num_states > 1 and not _is_strongly_connected(d):
        raise ValueError("adjacency matrix is not irreducible (FSM not strongly connected)")
    a = d + np.eye(fsm.num_states)
    x = np.full(fsm.num_states, 1.0 / fsm.num_states)
    for _ in range(max_iter):
        ax = a @ x
        ratios = ax / x
        lo, hi = float(ratios.min()), float(ratios.max())
        if hi - lo <= tol:
            lam = (lo + hi) / 2.0 - 1.0
            if lam <= 0.0:
                raise ValueError("constraint admits no sequences (spectral radius is 0)")
            return CapacityResult(lambda_max=lam, capacity=math.log2(lam))
        x = ax / ax.max()
    raise RuntimeError(
        f"spectral radius did not converge within {max_iter} iterations; ill-formed FSM?"
    )


def count_sequences(fsm: ConstraintFsm, length: int, start_state: int | None = None) -> int:
    """Exact number of constraint-satisfying sequences of ``length`` bits.

    Counts walks of the given length starting from ``start_state`` (the FSM
    default when omitted), summed over all end states.  Uses Python integers,
    so the count never overflows.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    start = fsm.start_state if start_state is None else start_state
    if not (0 <= start < fsm.num_states):
        raise ValueError(f"start_state {start} out of range")
    counts = [0] * fsm.num_states
    counts[start] = 1
    for _ in range(length):
        nxt = [0] * fsm.num_states
        for frm, to, _bit in fsm.transitions:
            nxt[to] += counts[frm]
        counts = nxt
    return sum(counts)


# Fixed-length codes have rational rates; capacities are typically irrational,
# so rate comparisons get a tiny tolerance to absorb the iteration error.
_RATE_TOL = 1e-9


def rate_table(fsm: ConstraintFsm, max_k: int) -> list[RateEntry]:
    """Best fixed-length code rate for each source-word length k = 1..max_k.

    For each k the entry holds the smallest codeword length n with
    k/n <= capacity.  Efficiency is quoted against the capacity rounded to
    four decimals, the precision at which these capacities are tabulated.
    """
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    cap = capacity(fsm).capacity
    if cap <= 0.0:
        raise ValueError("constraint has zero capacity; no fixed-length code exists")
    cap4 = round(cap, 4)
    entries = []
    for k in range(1, max_k + 1):
        n = max(k, math.ceil(k / cap))
        while k / n > cap + _RATE_TOL:
            n += 1
        while n > 1 and k / (n - 1) <= cap + _RATE_TOL:
            n -= 1
        rate = k / n
        entries.append(RateEntry(k=k, n=n, rate=rate, efficiency=rate / cap4))
    return entries


def format_rate_table(entries) -> str:
    """Aligned text table with columns k, n, R (4 decimals), efficiency (percent)."""
    lines = [f"{'k':>4} {'n':>5} {'R':>8} {'eff':>8}"]
    for e in entries:
        lines.append(f"{e.k:>4} {e.n:>5} {e.rate:>8.4f} {e.efficiency * 100:>7.2f}%")
    return "\n".join(lines)

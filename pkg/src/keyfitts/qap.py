"""Quadratic assignment: exact brute force, linear assignment, Frank-Wolfe.

The quadratic objective is sum_{i,j} flow[i][j] * cost[p(i)][p(j)] over an
injective placement p, diagonal terms included.  The approximate solver
relaxes permutations to doubly stochastic matrices and runs Frank-Wolfe:
each step solves a linear assignment on the gradient, takes the exact
closed-form step along the segment, and the final iterate is projected back
to a permutation by maximal alignment.

All tie-breaks are lexicographic so outputs are stable across runs.  The
linear assignment solver therefore returns the lexicographically smallest
optimal permutation: it keeps dual potentials, restricts to reduced-cost-zero
cells (every optimal assignment lives there), and greedily picks the smallest
usable column per row.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment as _linear_sum_assignment

BRUTE_FORCE_MAX_POSITIONS = 9
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITERS = 30
DEFAULT_TOL = 1e-6
SINKHORN_SWEEPS = 20


@dataclass(frozen=True)
class QapInstance:
    """flow is n x n, cost is m x m, n <= m; all entries finite and >= 0."""

    flow: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        flow = np.asarray(self.flow, dtype=np.float64)
        cost = np.asarray(self.cost, dtype=np.float64)
        object.__setattr__(self, "flow", flow)
        object.__setattr__(self, "cost", cost)
        if flow.ndim != 2 or flow.shape[0] != flow.shape[1]:
            raise ValueError("flow must be square")
        if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
            raise ValueError("cost must be square")
        if flow.shape[0] > cost.shape[0]:
            raise ValueError("more items than positions")
        for name, mat in (("flow", flow), ("cost", cost)):
            if not np.isfinite(mat).all():
                raise ValueError(f"{name} must be finite")
            if (mat < 0).any():
                raise ValueError(f"{name} must be nonnegative")

    @property
    def n(self) -> int:
        return self.flow.shape[0]

    @property
    def m(self) -> int:
        return self.cost.shape[0]


@dataclass(frozen=True)
class Assignment:
    mapping: tuple[int, ...]
    objective: float


def objective(instance: QapInstance, mapping) -> float:
    """Expected cost of a placement, diagonal flow terms included."""
    mapping = np.asarray(mapping, dtype=np.intp)
    if mapping.shape != (instance.n,):
        raise ValueError("mapping must place every item")
    if len(set(mapping.tolist())) != instance.n:
        raise ValueError("mapping must be injective")
    if (mapping < 0).any() or (mapping >= instance.m).any():
        raise ValueError("mapping targets outside position range")
    sub = instance.cost[np.ix_(mapping, mapping)]
    return float(np.sum(instance.flow * sub))


def _recover_duals(cost: np.ndarray, col_of: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dual potentials certifying an optimal assignment.

    Feasibility requires v[j] - v[col_of[i]] <= cost[i, j] - cost[i, col_of[i]]
    for every row i.  Treating those as edges between columns, any shortest
    path distances from a virtual zero source satisfy them (an optimal
    assignment admits no negative cycle), computed here by vectorized
    Bellman-Ford.
    """
    k = cost.shape[0]
    rows = np.empty(k, dtype=np.intp)
    rows[col_of] = np.arange(k, dtype=np.intp)  # row matched to each column
    W = cost[rows] - cost[rows, col_of[rows]][:, None]  # W[jp, j], jp indexed by column
    v = np.zeros(k)
    for _ in range(k):
        relaxed = np.min(v[:, None] + W, axis=0)
        new_v = np.minimum(v, relaxed)
        if np.array_equal(new_v, v):
            break
        v = new_v
    u = cost[np.arange(k), col_of] - v[col_of]
    return u, v


def _kuhn_augment(row: int, tight: np.ndarray, avail: np.ndarray, row_of: np.ndarray, col_of: np.ndarray, min_row: int, visited: np.ndarray) -> bool:
    """Kuhn-style augmenting search for `row` over available tight columns.

    Only rows >= min_row may be displaced.  Mutates row_of/col_of on success
    and leaves them untouched on failure.
    """
    for j in np.flatnonzero(tight[row] & avail & ~visited):
        visited[j] = True
        occupant = row_of[j]
        if occupant == -1 or (
            occupant >= min_row
            and _kuhn_augment(occupant, tight, avail, row_of, col_of, min_row, visited)
        ):
            row_of[j] = row
            col_of[row] = j
            return True
    return False


def _lex_min_on_tight(tight: np.ndarray, col_of_init: np.ndarray) -> np.ndarray:
    """Lexicographically smallest perfect matching inside the tight graph."""
    k = tight.shape[0]
    col_of = col_of_init.copy()
    row_of = np.full(k, -1, dtype=np.intp)
    row_of[col_of] = np.arange(k, dtype=np.intp)
    avail = np.ones(k, dtype=bool)
    for i in range(k):
        current = col_of[i]
        for j in np.flatnonzero(tight[i] & avail):
            if j >= current:
                break
            # tentatively move row i to column j; reroute the displaced row
            displaced = row_of[j]
            row_of[current] = -1
            row_of[j] = i
            col_of[i] = j
            col_of[displaced] = -1
            visited = np.zeros(k, dtype=bool)
            visited[j] = True
            if _kuhn_augment(displaced, tight, avail, row_of, col_of, i + 1, visited):
                current = j
                break
            row_of[j] = displaced
            col_of[displaced] = j
            row_of[current] = i
            col_of[i] = current
        avail[current] = False
    return col_of


def solve_lap(cost) -> np.ndarray:
    """Exact minimum-cost assignment; lexicographically smallest on ties.

    Every optimal assignment uses only cells whose reduced cost under the
    dual potentials is zero, so restricting to those cells and taking the
    lexicographically smallest perfect matching yields the lexicographically
    smallest optimal permutation.
    """
    C = np.asarray(cost, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("cost matrix must be square")
    k = C.shape[0]
    if k == 0:
        return np.empty(0, dtype=np.intp)
    if not np.isfinite(C).all():
        raise ValueError("cost matrix must be finite")
    _, col_of = _linear_sum_assignment(C)
    col_of = np.asarray(col_of, dtype=np.intp)
    u, v = _recover_duals(C, col_of)
    reduced = C - u[:, None] - v[None, :]
    eps = 1e-9 * (1.0 + float(np.abs(C).max()))
    tight = reduced <= eps
    tight[np.arange(k), col_of] = True  # assigned cells are tight by construction
    # Fast path: if each row has a single usable column the matching is unique.
    if int(tight.sum()) == k:
        return col_of
    return _lex_min_on_tight(tight, col_of)


def brute_force(instance: QapInstance) -> Assignment:
    """Globally optimal assignment by enumerating injections (m <= 9)."""
    n, m = instance.n, instance.m
    if m > BRUTE_FORCE_MAX_POSITIONS:
        raise ValueError(f"brute force limited to m <= {BRUTE_FORCE_MAX_POSITIONS}, got {m}")
    flow, cost = instance.flow, instance.cost
    best_obj = math.inf
    best_map: tuple[int, ...] | None = None
    perms = itertools.permutations(range(m), n)
    while True:
        batch = list(itertools.islice(perms, 20000))
        if not batch:
            break
        P = np.array(batch, dtype=np.intp)
        sub = cost[P[:, :, None], P[:, None, :]]
        objs = np.einsum("bij,ij->b", sub, flow)
        idx = int(np.argmin(objs))
        if objs[idx] < best_obj:
            best_obj = float(objs[idx])
            best_map = batch[idx]
    assert best_map is not None
    return Assignment(tuple(int(x) for x in best_map), best_obj)


def sinkhorn(
    matrix: np.ndarray,
    min_sweeps: int = SINKHORN_SWEEPS,
    tol: float = 1e-10,
    max_sweeps: int = 5000,
) -> np.ndarray:
    """Alternating row/column normalization toward a doubly stochastic matrix.

    Runs at least min_sweeps, then keeps sweeping until row and column sums
    are within tol of one; small near-decomposable matrices need far more
    than the nominal sweep count to reach that.
    """
    P = np.asarray(matrix, dtype=np.float64).copy()
    if (P <= 0).any():
        raise ValueError("sinkhorn requires a strictly positive matrix")
    for sweep in range(max_sweeps):
        P /= P.sum(axis=1, keepdims=True)
        P /= P.sum(axis=0, keepdims=True)
        if sweep + 1 >= min_sweeps:
            err = max(
                float(np.abs(P.sum(axis=0) - 1.0).max()),
                float(np.abs(P.sum(axis=1) - 1.0).max()),
            )
            if err <= tol:
                break
    return P


def _quad_objective(F: np.ndarray, C: np.ndarray, P: np.ndarray) -> float:
    return float(np.sum(F * (P @ C @ P.T)))


def _swap_deltas(F: np.ndarray, M: np.ndarray, r: int) -> np.ndarray:
    """Objective change from swapping item r's position with each other item.

    M is the position-cost matrix already permuted by the current mapping,
    M[i, j] = cost[perm[i], perm[j]], so deltas need no further indexing.
    """
    A = F[r][None, :] - F
    B = M - M[r][None, :]
    row = (A * B).sum(axis=1)
    row -= (F[r, r] - F[:, r]) * (M[:, r] - M[r, r])
    s = np.arange(F.shape[0])
    row -= (F[r, s] - F[s, s]) * (M[s, s] - M[r, s])
    A2 = F[:, r][:, None] - F
    B2 = M - M[:, r][:, None]
    col = (A2 * B2).sum(axis=0)
    col -= (F[r, r] - F[r, :]) * (M[r, :] - M[r, r])
    col -= (F[s, r] - F[s, s]) * (M[s, s] - M[s, r])
    diag = (F[r, r] - F[s, s]) * (M[s, s] - M[r, r])
    cross = (F[r, s] - F[s, r]) * (M[s, r] - M[r, s])
    deltas = row + col + diag + cross
    deltas[r] = 0.0
    return deltas


def _swap_polish(F: np.ndarray, C: np.ndarray, perm: np.ndarray, max_passes: int = 100) -> np.ndarray:
    """Deterministic pairwise-swap descent to a local optimum."""
    perm = perm.copy()
    M = C[np.ix_(perm, perm)]
    for _ in range(max_passes):
        improved = False
        for r in range(len(perm)):
            deltas = _swap_deltas(F, M, r)
            s = int(np.argmin(deltas))
            if deltas[s] < -1e-12:
                perm[[r, s]] = perm[[s, r]]
                M = C[np.ix_(perm, perm)]
                improved = True
        if not improved:
            break
    return perm


def solve_faq(
    instance: QapInstance,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    polish: bool = True,
) -> Assignment:
    """Frank-Wolfe approximation of the quadratic assignment minimum.

    Restart 0 starts at the flat barycenter; later restarts start from a
    Sinkhorn-normalized seeded random positive matrix (drawn spiky, as the
    fourth power of uniforms, so restarts explore distinct basins).  Each
    projected permutation is then polished by deterministic pairwise-swap
    descent, which plain Frank-Wolfe needs to reach oracle-level optima on
    small dense instances.  Deterministic for a given (seed, restarts).
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    n, m = instance.n, instance.m
    F = np.zeros((m, m))
    F[:n, :n] = instance.flow
    C = instance.cost
    rng = np.random.default_rng(seed)
    best: Assignment | None = None
    for restart in range(restarts):
        if restart == 0:
            P = np.full((m, m), 1.0 / m)
        else:
            P = sinkhorn(rng.uniform(size=(m, m)) ** 4 + 1e-3)
        prev = _quad_objective(F, C, P)
        for _ in range(max_iters):
            grad = F @ P @ C.T + F.T @ P @ C
            direction = solve_lap(grad)
            Q = np.zeros((m, m))
            Q[np.arange(m), direction] = 1.0
            D = Q - P
            DC = D @ C
            a = float(np.sum(F * (DC @ D.T)))
            b = float(np.sum(F * (DC @ P.T))) + float(np.sum(F * (P @ C @ D.T)))
            if a > 0 and 0.0 < -b / (2.0 * a) < 1.0:
                alpha = -b / (2.0 * a)
            else:
                alpha = 1.0 if a + b < 0 else 0.0
            if alpha == 0.0:
                break
            P = P + alpha * D
            current = prev + a * alpha * alpha + b * alpha
            assert current <= prev + 1e-9, "line search must not increase the objective"
            if abs(prev - current) < tol * max(abs(prev), 1e-12):
                prev = current
                break
            prev = current
        perm = solve_lap(-P)  # maximal alignment projection
        if polish:
            perm = _swap_polish(F, C, perm)
        mapping = tuple(int(x) for x in perm[:n])
        obj = objective(instance, mapping)
        if best is None or obj < best.objective:
            best = Assignment(mapping, obj)
    assert best is not None
    return best


def instance_to_dict(instance: QapInstance) -> dict:
    return {
        "n": instance.n,
        "m": instance.m,
        "flow": instance.flow.tolist(),
        "cost": instance.cost.tolist(),
    }


def instance_from_dict(doc: dict) -> QapInstance:
    inst = QapInstance(np.array(doc["flow"]), np.array(doc["cost"]))
    if inst.n != doc["n"] or inst.m != doc["m"]:
        raise ValueError("declared sizes do not match matrices")
    return inst


def instance_to_json(instance: QapInstance) -> str:
    return json.dumps(instance_to_dict(instance), sort_keys=True)


def instance_from_json(text: str) -> QapInstance:
    return instance_from_dict(json.loads(text))

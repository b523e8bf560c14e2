"""Candidate scoring: feature similarity, optimal assignment, goal selection.

Matching runs over movable objects only; stationary objects are pinned by the
inpainting mask and correspond to themselves. Greedy matching is not optimal
in general, so the assignment uses the Hungarian algorithm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NoCandidates
from .scene import CandidateScene, ObjectInstance, SceneDescription


@dataclass(frozen=True)
class Assignment:
    """Bijection from initial movable objects to candidate movable objects."""

    pairs: tuple[tuple[int, int], ...]
    total_score: float

    def to_json(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "total_score": self.total_score}


@dataclass(frozen=True)
class GoalSelection:
    """The winning candidate plus its object correspondence."""

    candidate: CandidateScene
    candidate_index: int
    assignment: Assignment
    pair_scores: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "source_tag": self.candidate.source_tag,
            "candidate_index": self.candidate_index,
            "pairs": [
                {"initial": i, "candidate": j, "similarity": s}
                for (i, j), s in zip(self.assignment.pairs, self.pair_scores)
            ],
            "total_score": self.assignment.total_score,
        }


def similarity_matrix(initial: Sequence[ObjectInstance],
                      candidate: Sequence[ObjectInstance]) -> np.ndarray:
    """Pairwise cosine similarity of unit feature vectors, entry (i, j)."""
    if len(initial) != len(candidate):
        raise DimensionMismatch(
            f"object counts differ: {len(initial)} vs {len(candidate)}")
    if not initial:
        return np.zeros((0, 0))
    dims = {len(o.feature) for o in initial} | {len(o.feature) for o in candidate}
    if len(dims) != 1:
        raise DimensionMismatch(f"feature dimensions differ: {sorted(dims)}")
    a = np.stack([o.feature_array for o in initial])
    b = np.stack([o.feature_array for o in candidate])
    return a @ b.T


def _hungarian_min_cost(cost: np.ndarray) -> np.ndarray:
    """Column assignment minimizing total cost; O(n^3) potentials method.

    Returns argmin permutation as an array: result[row] = column.
    """
    n = cost.shape[0]
    INF = np.inf
    # 1-based potentials over rows (u) and columns (v); p[j] = row matched to j
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    padded = np.zeros((n + 1, n + 1))
    padded[1:, 1:] = cost
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, INF)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = padded[i0, :] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, INF)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    result = np.zeros(n, dtype=np.int64)
    for j in range(1, n + 1):
        result[p[j] - 1] = j - 1
    return result


def _best_total(sim: np.ndarray) -> float:
    if sim.size == 0:
        return 0.0
    cols = _hungarian_min_cost(sim.max() - sim)
    return float(sim[np.arange(sim.shape[0]), cols].sum())


def optimal_assignment(sim: np.ndarray) -> Assignment:
    """Maximum-total-similarity bijection.

    Among equally scoring optima the lexicographically smallest pair list
    wins, found by fixing columns row by row and re-solving the remainder.
    """
    sim = np.asarray(sim, dtype=float)
    if sim.ndim != 2 or sim.shape[0] != sim.shape[1]:
        raise DimensionMismatch(f"similarity matrix must be square, got {sim.shape}")
    if not np.all(np.isfinite(sim)):
        raise ValueError("similarity matrix must be finite")
    n = sim.shape[0]
    if n == 0:
        return Assignment(pairs=(), total_score=0.0)
    best = _best_total(sim)
    scale = max(1.0, float(np.abs(sim).max()))
    tol = 1e-9 * scale * n
    cols_left = list(range(n))
    pairs: list[tuple[int, int]] = []
    fixed = 0.0
    for i in range(n):
        for k, j in enumerate(cols_left):
            rest = sim[np.ix_(range(i + 1, n), cols_left[:k] + cols_left[k + 1:])]
            if fixed + sim[i, j] + _best_total(rest) >= best - tol:
                pairs.append((i, j))
                fixed += sim[i, j]
                cols_left.pop(k)
                break
    total = float(sum(sim[i, j] for i, j in pairs))
    return Assignment(pairs=tuple(pairs), total_score=total)


def select_goal(scene: SceneDescription,
                candidates: Sequence[CandidateScene]) -> GoalSelection:
    """Pick the candidate whose optimal assignment scores highest.

    Ties break toward the lowest candidate index. Pair indices refer to
    positions in each side's full object list.
    """
    if not candidates:
        raise NoCandidates("goal selection needs at least one candidate")
    movable_idx = [i for i, o in enumerate(scene.objects) if o.movable]
    initial = [scene.objects[i] for i in movable_idx]
    best: tuple[float, int] | None = None
    best_assignment: Assignment | None = None
    best_cand_idx: list[int] = []
    for index, candidate in enumerate(candidates):
        cand_idx = [j for j, o in enumerate(candidate.objects) if o.movable]
        cand_objs = [candidate.objects[j] for j in cand_idx]
        assignment = optimal_assignment(similarity_matrix(initial, cand_objs))
        key = (assignment.total_score, -index)
        if best is None or key > best:
            best = key
            best_assignment = assignment
            best_cand_idx = cand_idx
    assert best is not None and best_assignment is not None
    index = -int(best[1])
    mapped = tuple(
        (movable_idx[i], best_cand_idx[j]) for i, j in best_assignment.pairs)
    sims = []
    candidate = candidates[index]
    for i, j in mapped:
        sims.append(float(np.dot(scene.objects[i].feature_array,
                                 candidate.objects[j].feature_array)))
    assignment = Assignment(pairs=mapped, total_score=best_assignment.total_score)
    return GoalSelection(candidate=candidate, candidate_index=index,
                         assignment=assignment, pair_scores=tuple(sims))

"""IRS unit assignment: Hungarian matching, iterative KM, baselines and oracle."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from irsvlc.approx import ApproxState, build_approx, linearized_rate
from irsvlc.channel import GainSet
from irsvlc.rate import (E_OVER_2PI, RateReport, check_assignment, empty_assignment,
                         interference_matrix, secrecy_rate)
from irsvlc.scene import Scene, ServiceModel

log = logging.getLogger(__name__)

ORACLE_LIMIT = 10 ** 7


@dataclass(frozen=True)
class Matching:
    pairs: list[tuple[int, int]]
    value: float


def _min_cost_rows(cost: list[list[float]]) -> list[int]:
    """Shortest-augmenting-path Hungarian method for an n x m cost, n <= m.

    Returns the column matched to each row.  O(n^2 m).
    """
    n, m = len(cost), len(cost[0])
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)       # p[j]: row (1-based) holding column j
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    rows = [0] * n
    for j in range(1, m + 1):
        if p[j]:
            rows[p[j] - 1] = j - 1
    return rows


def hungarian_max(weight) -> Matching:
    """Maximum-weight matching of size min(R, C) on a dense R x C matrix.

    The smaller side drives the augmentations, so a tall R x C problem
    costs O(C^2 R) rather than the O(R^3) of a padded square matrix.  Ties
    go to the lowest index in scan order.
    """
    w = np.asarray(weight, dtype=float)
    if w.ndim != 2:
        raise ValueError("weight must be a 2-D matrix")
    if w.size == 0:
        return Matching(pairs=[], value=0.0)
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    R, C = w.shape
    if R <= C:
        cols = _min_cost_rows((-w).tolist())
        pairs = list(enumerate(cols))
    else:
        rows = _min_cost_rows((-w.T).tolist())
        pairs = sorted((r, c) for c, r in enumerate(rows))
    value = float(sum(w[r, c] for r, c in pairs))
    return Matching(pairs=pairs, value=value)


def assign_rounds(w: np.ndarray) -> tuple[np.ndarray, int]:
    """Fair assignment by repeated matching with frozen weights.

    Each round matches the remaining units to the L + 1 targets and removes
    the matched units; returns the assignment and the number of rounds.
    """
    w = np.asarray(w, dtype=float)
    n_units, n_cols = w.shape
    g = np.zeros((n_units, n_cols), dtype=int)
    remaining = np.arange(n_units)
    rounds = 0
    while remaining.size:
        match = hungarian_max(w[remaining])
        taken = np.zeros(remaining.size, dtype=bool)
        for r, c in match.pairs:
            g[remaining[r], c] = 1
            taken[r] = True
        remaining = remaining[~taken]
        rounds += 1
    return g, rounds


@dataclass
class KmOptions:
    max_outer: int = 50
    strict_weights: bool = False
    # Multiplies Eve's true tangent points; None uses them as is.
    eve_tangent_factor: Optional[float] = None
    tangent: str = "link"


@dataclass
class KmResult:
    assignment: np.ndarray
    report: RateReport
    approx: ApproxState
    linearized: float
    outer_iters: int
    rounds: int
    converged: bool
    cycled: bool = False
    history: list[float] = field(default_factory=list)


def iterative_km(gains: GainSet, scene: Scene, svc: ServiceModel,
                 options: KmOptions | None = None) -> KmResult:
    """Alternate surrogate refits and fair matchings until the assignment is stable.

    Tangent points start from the IRS-free SINRs and are refreshed from the
    exact rates of each new assignment.  If an assignment repeats without
    settling, or ``max_outer`` is hit, the visited iterate with the best
    exact secrecy rate is returned with ``converged=False``.
    """
    opts = options or KmOptions()
    N, L = scene.n_units, scene.n_leds
    g = empty_assignment(N, L)
    report = secrecy_rate(gains, scene, svc, g)
    seen: dict[bytes, int] = {}
    visited: list[tuple[np.ndarray, RateReport, ApproxState, int]] = []
    for it in range(1, opts.max_outer + 1):
        state = build_approx(gains, scene, svc, report, eve_factor=opts.eve_tangent_factor,
                             strict_weights=opts.strict_weights, tangent=opts.tangent)
        g_new, rounds = assign_rounds(state.weights)
        check_assignment(g_new, N, L)
        report_new = secrecy_rate(gains, scene, svc, g_new)
        visited.append((g_new, report_new, state, rounds))
        if np.array_equal(g_new, g):
            return _result(visited, len(visited) - 1, it, converged=True)
        key = g_new.tobytes()
        if key in seen:
            log.warning("iterative KM revisited an earlier assignment at iteration %d", it)
            best = max(range(len(visited)), key=lambda i: (visited[i][1].secrecy, -i))
            return _result(visited, best, it, converged=False, cycled=True)
        seen[key] = it
        g, report = g_new, report_new
    log.warning("iterative KM did not converge in %d outer iterations", opts.max_outer)
    best = max(range(len(visited)), key=lambda i: (visited[i][1].secrecy, -i))
    return _result(visited, best, opts.max_outer, converged=False)


def _result(visited, idx, iters, converged, cycled=False) -> KmResult:
    g, report, state, rounds = visited[idx]
    return KmResult(assignment=g, report=report, approx=state,
                    linearized=linearized_rate(state.weights, state.bias, g),
                    outer_iters=iters, rounds=rounds, converged=converged, cycled=cycled,
                    history=[v[1].secrecy for v in visited])


def random_assignment(scene_or_units, seed=None, n_leds: int | None = None) -> np.ndarray:
    """Balanced random assignment: column sizes differ by at most one.

    Accepts a Scene, or a unit count together with ``n_leds``.  ``seed``
    may be an int or a numpy Generator.
    """
    if isinstance(scene_or_units, Scene):
        n_units, n_leds = scene_or_units.n_units, scene_or_units.n_leds
    else:
        n_units = int(scene_or_units)
        if n_leds is None:
            raise TypeError("n_leds is required with a bare unit count")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cols = np.arange(n_units) % (n_leds + 1)
    cols = rng.permutation(cols)
    g = np.zeros((n_units, n_leds + 1), dtype=int)
    g[np.arange(n_units), cols] = 1
    return g


class OracleTooLarge(ValueError):
    pass


def _feasible_labels(n_units: int, n_cols: int, chunk: int):
    """Yield blocks of column labels (B, N) meeting the fairness quota."""
    total = n_cols ** n_units
    if total > ORACLE_LIMIT:
        raise OracleTooLarge(f"{n_cols}^{n_units} candidates exceed the oracle limit")
    quota = n_units // n_cols
    powers = n_cols ** np.arange(n_units)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        labels = (idx[:, None] // powers) % n_cols
        counts = np.stack([(labels == c).sum(axis=1) for c in range(n_cols)], axis=1)
        keep = (counts >= quota).all(axis=1)
        if keep.any():
            yield labels[keep]


def _search(n_units: int, n_cols: int, score, chunk: int) -> tuple[np.ndarray, float]:
    best_val, best_lab = -math.inf, np.zeros(n_units, dtype=int)
    for labels in _feasible_labels(n_units, n_cols, chunk):
        vals = score(labels)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_lab = float(vals[j]), labels[j]
    g = np.zeros((n_units, n_cols), dtype=int)
    g[np.arange(n_units), best_lab] = 1
    return g, best_val


def exhaustive_linear(w, bias: float = 0.0, chunk: int = 50_000) -> tuple[np.ndarray, float]:
    """Best feasible assignment for the linear objective ``sum(w * G) + bias``."""
    w = np.asarray(w, dtype=float)
    n_units, n_cols = w.shape
    rows = np.arange(n_units)
    return _search(n_units, n_cols, lambda lab: bias + w[rows, lab].sum(axis=1), chunk)


def exhaustive_oracle(gains: GainSet, scene: Scene, svc: ServiceModel, objective: str = "exact",
                      approx: ApproxState | None = None, chunk: int = 50_000) -> tuple[np.ndarray, float]:
    """Brute-force maximizer over every feasible assignment.

    ``objective`` is ``"exact"`` (secrecy rate) or ``"linearized"``, the
    latter using ``approx`` or, if omitted, the IRS-free tangent points.
    Ties resolve to the first candidate in enumeration order.
    """
    N, L = scene.n_units, scene.n_leds
    if objective == "linearized":
        if approx is None:
            base = secrecy_rate(gains, scene, svc, empty_assignment(N, L))
            approx = build_approx(gains, scene, svc, base)
        return exhaustive_linear(approx.weights, approx.bias, chunk)
    if objective != "exact":
        raise ValueError(f"unknown objective {objective!r}")
    return _search(N, L + 1, lambda lab: _batched_secrecy(gains, scene, svc, lab), chunk)


def _batched_secrecy(gains: GainSet, scene: Scene, svc: ServiceModel, labels: np.ndarray) -> np.ndarray:
    K, L, N = scene.n_users, scene.n_leds, scene.n_units
    W = scene.consts.bandwidth
    onehot = (labels[:, :, None] == np.arange(L + 1)).astype(float)   # (B, N, L+1)
    interference = interference_matrix(gains, scene)
    rho2 = scene.responsivity ** 2
    P = scene.led_power
    amp = gains.h1[None, :K] + np.einsum("knl,bnl->bkl", gains.h2[:K], onehot[:, :, 1:])
    sinr = rho2[None, :K, None] * amp ** 2 * P ** 2 / interference[None, :K]
    legit = (svc.f.T[None] * 0.5 * W * np.log2(1 + E_OVER_2PI * sinr)).sum(axis=(1, 2))
    E = gains.eve
    jam = np.zeros((labels.shape[0], L))
    for l, lc in enumerate(svc.l_c):
        if lc >= 0:
            jam[:, l] = onehot[:, :, 0] @ gains.h2[E, :, lc]
    P_c = np.where(svc.l_c >= 0, P[np.maximum(svc.l_c, 0)], 0.0)
    se = rho2[E] * gains.h1[E] ** 2 * P ** 2 / (interference[E] + rho2[E] * P_c ** 2 * jam ** 2)
    ce = (0.5 * W * np.log2(1 + E_OVER_2PI * se)) @ svc.f[:, scene.target]
    return legit - ce

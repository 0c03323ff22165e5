"""Quantum bias of XOR games via the Gram-vector (Tsirelson) form.

For XOR games the entangled bias equals

    max sum_{x,y} cost[x, y] <u_x, v_y>

over real unit vectors, a small semidefinite program. The lower bound comes
from block-coordinate ascent on the vectors; the upper bound from a diagonal
dual built at the ascent's fixed point, made sound by an eigenvalue shift.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._workers import resolve_workers
from .eigen import min_eigenvalue
from .errors import DomainError
from .game import XorGame

DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-12
MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class VectorStrategy:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("u", "v"):
            vecs = np.array(getattr(self, name), dtype=float)
            if vecs.ndim != 2:
                raise DomainError(f"{name} must be a matrix of row vectors")
            if np.max(np.abs(np.linalg.norm(vecs, axis=1) - 1.0), initial=0.0) > 1e-10:
                raise DomainError(f"{name} rows must be unit vectors")
            vecs.flags.writeable = False
            object.__setattr__(self, name, vecs)
        if self.u.shape[1] != self.v.shape[1]:
            raise DomainError("u and v must live in the same space")

    @property
    def rank(self) -> int:
        return self.u.shape[1]

    def bias(self, g: XorGame) -> float:
        return gram_objective(g.cost, self.u, self.v)


@dataclass(frozen=True, eq=False)
class BiasCertificate:
    lower: float
    upper: float
    min_eig: float
    strategy: VectorStrategy
    restarts: int
    seed: int
    iterations: int = 0

    @property
    def slack(self) -> float:
        return self.upper - self.lower

    @property
    def rank(self) -> int:
        return self.strategy.rank

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "slack": self.slack,
            "min_eig": self.min_eig,
            "rank": self.rank,
            "restarts": self.restarts,
            "seed": self.seed,
        }


def gram_objective(cost, u, v) -> float:
    return float(np.sum(cost * (u @ v.T)))


def _normalize_rows(vecs):
    norms = np.linalg.norm(vecs, axis=1)
    zero = norms == 0.0
    out = vecs / np.where(zero, 1.0, norms)[:, None]
    if np.any(zero):
        out[zero] = 0.0
        out[zero, 0] = 1.0
    return out


def random_unit_rows(rng, count, rank):
    return _normalize_rows(rng.standard_normal((count, rank)))


def alternating_ascent(cost, u0, tol=DEFAULT_TOL, max_iter=MAX_ITER, history=None):
    """Alternately replace Bob's, then Alice's vectors by best responses.

    Each half-step maximizes the objective over one side exactly, so the
    objective never decreases. Stops once a full iteration gains less than
    ``tol``. When ``history`` is a list, the objective after every half-step
    is appended to it.

    Returns ``(u, v, objective, iterations)``.
    """
    cost = np.asarray(cost, dtype=float)
    u = _normalize_rows(np.asarray(u0, dtype=float))
    obj = -math.inf
    it = 0
    v = None
    for it in range(1, max_iter + 1):
        v = _normalize_rows(cost.T @ u)
        if history is not None:
            history.append(gram_objective(cost, u, v))
        u = _normalize_rows(cost @ v)
        new = gram_objective(cost, u, v)
        if history is not None:
            history.append(new)
        if abs(new - obj) < tol:
            obj = new
            break
        obj = new
    return u, v, obj, it


def dual_matrix(cost, u, v):
    """Symmetric ``diag(lam, mu)/2 - W`` with W holding cost/2 off the diagonal.

    ``lam[x] = |sum_y cost[x,y] v_y|`` and ``mu[y] = |sum_x cost[x,y] u_x|``.
    If it is PSD then every Gram matrix X with unit diagonal obeys
    ``<W, X> <= (sum lam + sum mu)/2``, which bounds the bias.
    """
    m, n = cost.shape
    lam = np.linalg.norm(cost @ v, axis=1)
    mu = np.linalg.norm(cost.T @ u, axis=1)
    mat = np.zeros((m + n, m + n))
    mat[:m, m:] = -cost / 2
    mat[m:, :m] = -cost.T / 2
    mat[np.diag_indices(m + n)] = np.concatenate([lam, mu]) / 2
    return mat, lam, mu


def certify(cost, u, v):
    """Sound upper bound from the dual at ``(u, v)``; returns ``(upper, min_eig)``.

    A negative smallest eigenvalue ``e`` is absorbed by shifting the diagonal
    by ``-e``, which costs ``-e * (m + n)`` in the bound.
    """
    mat, lam, mu = dual_matrix(cost, u, v)
    e_min = min_eigenvalue(mat)
    upper = (lam.sum() + mu.sum()) / 2 + max(0.0, -e_min) * mat.shape[0]
    return float(upper), e_min


def _one_restart(cost, rank, seed, tol, max_iter):
    rng = np.random.default_rng(seed)
    u0 = random_unit_rows(rng, cost.shape[0], rank)
    return alternating_ascent(cost, u0, tol=tol, max_iter=max_iter)


def quantum_bias(
    g: XorGame,
    rank: int | None = None,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
    workers=None,
) -> BiasCertificate:
    """Certified quantum bias: lower bound from the best of ``restarts``
    ascents (restart ``i`` seeded with ``seed + i``), upper bound from the
    dual at that best fixed point.
    """
    if not np.all(np.isfinite(g.cost)):
        raise DomainError("game cost matrix has non-finite entries")
    if restarts < 1:
        raise DomainError("restarts must be at least 1")
    rank = g.m + g.n if rank is None else int(rank)
    if rank < 1:
        raise DomainError("rank must be positive")

    cost = g.cost
    seeds = [seed + i for i in range(restarts)]
    n_workers = min(resolve_workers(workers), restarts)
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            runs = list(pool.map(lambda s: _one_restart(cost, rank, s, tol, max_iter), seeds))
    else:
        runs = [_one_restart(cost, rank, s, tol, max_iter) for s in seeds]

    # first index wins ties
    best = max(range(restarts), key=lambda i: (runs[i][2], -i))
    u, v, lower, iters = runs[best]
    upper, e_min = certify(cost, u, v)
    return BiasCertificate(
        lower=lower,
        upper=upper,
        min_eig=e_min,
        strategy=VectorStrategy(u, v),
        restarts=restarts,
        seed=seed,
        iterations=iters,
    )


def in_region1(p, q) -> bool:
    return 1 >= 1 / (2 * q) > p >= 0.5


def in_region2(p, q) -> bool:
    return 1 >= p >= 1 / (2 * q) >= 0.5


def closed_form_region1(p: float, q: float) -> float:
    """Quantum bias of the (p, q)-perturbed AND game when 1 >= 1/(2q) > p >= 1/2."""
    if not q > 0:
        raise DomainError(f"q={q!r} must be positive")
    t = 1 / (2 * q)
    for ok, text in ((1 >= t, "1 >= 1/(2q)"), (t > p, "1/(2q) > p"), (p >= 0.5, "p >= 1/2")):
        if not ok:
            raise DomainError(f"(p={p!r}, q={q!r}) is outside region 1: {text} fails")
    return math.sqrt(q * q + (1 - q) ** 2) * math.sqrt(p * p + (1 - p) ** 2)


def closed_form_region2(p: float, q: float) -> float:
    """Quantum bias of the (p, q)-perturbed AND game when 1 >= p >= 1/(2q) >= 1/2."""
    if not q > 0:
        raise DomainError(f"q={q!r} must be positive")
    t = 1 / (2 * q)
    for ok, text in (
        (1 >= p, "1 >= p"),
        (p >= t, "p >= 1/(2q)"),
        (t >= 0.5, "1/(2q) >= 1/2"),
    ):
        if not ok:
            raise DomainError(f"(p={p!r}, q={q!r}) is outside region 2: {text} fails")
    return (1 - 2 * (1 - p) * (1 - q)) / math.sqrt(2)


def quantum_bias_of_sum(biases) -> float:
    out = 1.0
    for b in biases:
        if not 0.0 <= b <= 1.0:
            raise DomainError(f"bias {b!r} outside [0, 1]")
        out *= b
    return out

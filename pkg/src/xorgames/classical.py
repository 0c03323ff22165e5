"""Exact classical bias of XOR games by exhaustive search over Alice's signs.

For fixed Alice signs ``A`` the best Bob answer to question ``y`` is the sign
of the column sum ``sum_x cost[x, y] * A[x]``, so

    bias = max_A sum_y |sum_x cost[x, y] * A[x]|

and only ``2 ** (m - 1)`` vectors need checking once ``A[0] = +1`` is fixed
(negating both players leaves every product unchanged).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._workers import resolve_workers
from .errors import DomainError, SizeError
from .game import XorGame, build_perturbed_and_game

MAX_QUESTIONS = 24
CHUNK_BITS = 14
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ClassicalStrategy:
    a_signs: tuple[int, ...]
    b_signs: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(v) for v in self.a_signs)
        b = tuple(int(v) for v in self.b_signs)
        if any(v not in (-1, 1) for v in a + b):
            raise DomainError("strategy signs must be exactly +1 or -1")
        object.__setattr__(self, "a_signs", a)
        object.__setattr__(self, "b_signs", b)

    def flipped(self) -> ClassicalStrategy:
        return ClassicalStrategy(tuple(-v for v in self.a_signs), tuple(-v for v in self.b_signs))

    @property
    def answers(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Answer bits, with sign +1 meaning bit 0."""
        return (
            tuple((1 - v) // 2 for v in self.a_signs),
            tuple((1 - v) // 2 for v in self.b_signs),
        )


@dataclass(frozen=True)
class ClassicalResult:
    bias: float
    strategy: ClassicalStrategy

    @property
    def value(self) -> float:
        return (1.0 + self.bias) / 2.0

    def to_dict(self) -> dict:
        return {
            "bias": self.bias,
            "value": self.value,
            "a_signs": list(self.strategy.a_signs),
            "b_signs": list(self.strategy.b_signs),
        }


def strategy_bias(g: XorGame, s: ClassicalStrategy) -> float:
    a = np.asarray(s.a_signs, dtype=float)
    b = np.asarray(s.b_signs, dtype=float)
    if a.shape != (g.m,) or b.shape != (g.n,):
        raise DomainError(
            f"strategy has {a.size}x{b.size} answers, game has {g.m}x{g.n} questions"
        )
    return float(a @ g.cost @ b)


def best_response_signs(column_sums) -> np.ndarray:
    """Bob's optimal signs for given column sums; exact ties go to +1."""
    return np.where(np.asarray(column_sums) < 0, -1, 1)


def _alice_signs(masks, m):
    # Bit m-2 of the mask drives A[1], bit 0 drives A[m-1]; a set bit is +1.
    # Increasing mask order is then lexicographic order with -1 < +1.
    shifts = np.arange(m - 2, -1, -1)
    bits = (masks[:, None] >> shifts[None, :]) & 1
    signs = np.empty((masks.size, m))
    signs[:, 0] = 1.0
    signs[:, 1:] = 2.0 * bits - 1.0
    return signs


def _scan_chunk(cost, start, stop):
    masks = np.arange(start, stop, dtype=np.int64)
    vals = np.abs(_alice_signs(masks, cost.shape[0]) @ cost).sum(axis=1)
    return vals


def classical_bias_exact(g: XorGame, max_questions: int = MAX_QUESTIONS, workers=None) -> ClassicalResult:
    """Exact classical bias; reports the lexicographically smallest optimal A.

    Work is split into fixed-size chunks so the arithmetic, and hence the
    reported strategy, does not depend on the number of workers.
    """
    m = g.m
    if m > max_questions:
        raise SizeError(f"{m} Alice questions exceeds the enumeration guard of {max_questions}")
    total = 1 << (m - 1)
    chunk = 1 << CHUNK_BITS
    bounds = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]

    n_workers = min(resolve_workers(workers), len(bounds))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(lambda b: _scan_chunk(g.cost, *b), bounds))
    else:
        parts = [_scan_chunk(g.cost, *b) for b in bounds]
    vals = np.concatenate(parts)

    best = vals.max()
    mask = int(np.flatnonzero(vals >= best - TIE_TOL)[0])
    a = _alice_signs(np.array([mask], dtype=np.int64), m)[0]
    b = best_response_signs(a @ g.cost)
    strategy = ClassicalStrategy(tuple(a.astype(int)), tuple(b.astype(int)))
    return ClassicalResult(strategy_bias(g, strategy), strategy)


def reduce_to_full_knowledge(s: ClassicalStrategy, p: float, q: float) -> float:
    """Expected bias on CHSH (the p = q = 1 AND game) of the randomized
    strategy that masks every input bit ``i`` with a shared coin ``r_i``
    (``Pr[r1 = 0] = p``, ``Pr[r2 = 0] = q``) and then plays ``s``.

    Masking reproduces the question distribution of the (p, q) game exactly,
    so the result equals ``strategy_bias(build_perturbed_and_game(p, q), s)``.
    """
    if not (0.5 <= p <= 1 and 0.5 <= q <= 1):
        raise DomainError(f"p={p!r}, q={q!r} must lie in [1/2, 1]")
    if len(s.a_signs) != 4 or len(s.b_signs) != 4:
        raise DomainError("reduction needs a strategy for a 4x4 AND game")
    chsh = build_perturbed_and_game(1.0, 1.0)
    a = np.asarray(s.a_signs)
    b = np.asarray(s.b_signs)
    idx = np.arange(4)
    total = 0.0
    for r1, w1 in ((0, p), (1, 1 - p)):
        for r2, w2 in ((0, q), (1, 1 - q)):
            if w1 * w2 == 0:
                continue
            r = 2 * r1 + r2
            masked = ClassicalStrategy(tuple(a[idx ^ r]), tuple(b[idx ^ r]))
            total += w1 * w2 * strategy_bias(chsh, masked)
    return total

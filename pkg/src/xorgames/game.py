"""Two-prover XOR games stored as signed cost matrices.

A game hands Alice question ``x`` and Bob question ``y`` with probability
``pi[x, y]`` and is won when the XOR of their answer bits equals ``f[x, y]``.
Everything downstream works with the cost matrix

    cost[x, y] = pi[x, y] * (-1) ** f[x, y]

which turns the bias of a strategy into a bilinear form.

Question strings are indexed big-endian: the bit string ``x1 x2 ... xn``
maps to ``sum(x_i * 2 ** (n - i))`` so that bit 1 is the most significant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError

ATOL = 1e-12

MAGIC_SQUARE = np.array(
    [
        [4, 14, 15, 1],
        [9, 7, 6, 12],
        [5, 11, 10, 8],
        [16, 2, 3, 13],
    ]
)


@dataclass(frozen=True)
class BitString:
    value: int
    width: int

    def __post_init__(self):
        if self.width < 0 or not 0 <= self.value < 2**self.width:
            raise DomainError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_bits(cls, bits) -> BitString:
        value = 0
        for b in bits:
            value = (value << 1) | (int(b) & 1)
        return cls(value, len(bits))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.width - 1 - i)) & 1 for i in range(self.width))

    def bit(self, i: int) -> int:
        """Bit ``i`` counted from 1 at the most significant end."""
        if not 1 <= i <= self.width:
            raise IndexError(i)
        return (self.value >> (self.width - i)) & 1

    def __xor__(self, other: BitString) -> BitString:
        if self.width != other.width:
            raise DomainError("XOR of bit strings of different widths")
        return BitString(self.value ^ other.value, self.width)

    def __int__(self):
        return self.value

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True, eq=False)
class XorGame:
    """An XOR game given by its question distribution and target bits.

    The cost matrix is derived from ``pi`` and ``f`` on construction and is
    never set independently.
    """

    pi: np.ndarray
    f: np.ndarray
    label: str = ""
    cost: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        f = np.array(self.f, dtype=np.int8)
        if pi.ndim != 2 or pi.shape != f.shape:
            raise DomainError(f"pi {pi.shape} and f {f.shape} must be equal-shape matrices")
        if pi.size == 0 or not np.all(np.isfinite(pi)):
            raise DomainError("pi must be a non-empty finite matrix")
        if np.any(pi < 0):
            raise DomainError("pi has negative entries")
        if abs(pi.sum() - 1.0) > ATOL:
            raise DomainError(f"pi sums to {pi.sum()!r}, not 1")
        if np.any((f != 0) & (f != 1)):
            raise DomainError("f must be a 0/1 matrix")
        cost = np.where(f == 1, -pi, pi)
        for name, arr in (("pi", pi), ("f", f), ("cost", cost)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.pi.shape[0]

    @property
    def n(self) -> int:
        return self.pi.shape[1]

    def __repr__(self):
        return f"XorGame(label={self.label!r}, m={self.m}, n={self.n})"

    def permuted(self, alice_perm=None, bob_perm=None) -> XorGame:
        """Relabel questions: new row ``i`` is old row ``alice_perm[i]``."""
        rows = np.arange(self.m) if alice_perm is None else np.asarray(alice_perm)
        cols = np.arange(self.n) if bob_perm is None else np.asarray(bob_perm)
        return XorGame(self.pi[np.ix_(rows, cols)], self.f[np.ix_(rows, cols)], self.label)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "m": self.m,
            "n": self.n,
            "pi": self.pi.ravel().tolist(),
            "f": self.f.ravel().astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> XorGame:
        try:
            m, n = int(data["m"]), int(data["n"])
            pi = np.asarray(data["pi"], dtype=float).reshape(m, n)
            f = np.asarray(data["f"], dtype=int).reshape(m, n)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed game document: {exc}") from exc
        return cls(pi, f, str(data.get("label", "")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> XorGame:
        return cls.from_dict(json.loads(text))


def _check_prob(name, value):
    if not (0.5 <= value <= 1.0):
        raise DomainError(f"{name}={value!r} must lie in [1/2, 1]")


def _xor_function_matrix(g_table, n_bits) -> np.ndarray:
    size = 2**n_bits
    idx = np.arange(size)
    return np.asarray(g_table, dtype=np.int8)[idx[:, None] ^ idx[None, :]]


def _and_truth_table() -> list[int]:
    # z = (z1, z2) big-endian: index 3 is z1 = z2 = 1
    return [0, 0, 0, 1]


def build_perturbed_and_game(p: float, q: float) -> XorGame:
    """The nonlocal AND game in which Alice's first bit equals z1 with
    probability ``p`` and Bob's second bit equals z2 with probability ``q``.

    ``p = q = 1/2`` is the unperturbed nonlocal AND game; ``p = q = 1`` is CHSH.
    """
    _check_prob("p", p)
    _check_prob("q", q)
    pi = np.zeros((4, 4))
    for z1 in (0, 1):
        for z2 in (0, 1):
            for flip1, w1 in ((0, p), (1, 1 - p)):
                for flip2, w2 in ((0, q), (1, 1 - q)):
                    x = 2 * (z1 ^ flip1) + flip2
                    y = 2 * flip1 + (z2 ^ flip2)
                    pi[x, y] += 0.25 * w1 * w2
    f = _xor_function_matrix(_and_truth_table(), 2)
    return XorGame(pi, f, f"and(p={p:g},q={q:g})")


@dataclass(frozen=True)
class KnowledgeSpec:
    """Partial local knowledge of the inputs of a Boolean function ``g``.

    Bit ``i`` on side ``"A"`` reaches Alice unmasked with probability
    ``probs[i]`` (Bob then gets 0); on side ``"B"`` the roles swap.
    ``input_dist`` and ``g`` are indexed by the big-endian value of z.
    """

    n_bits: int
    partition: tuple[str, ...]
    probs: tuple[float, ...]
    g: tuple[int, ...]
    input_dist: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "partition", tuple(str(s).upper() for s in self.partition))
        object.__setattr__(self, "probs", tuple(float(v) for v in self.probs))
        object.__setattr__(self, "g", tuple(int(v) for v in self.g))
        size = 2**self.n_bits
        if self.input_dist is None:
            object.__setattr__(self, "input_dist", (1.0 / size,) * size)
        else:
            object.__setattr__(self, "input_dist", tuple(float(v) for v in self.input_dist))

        if self.n_bits < 1:
            raise DomainError("n_bits must be positive")
        if len(self.partition) != self.n_bits or len(self.probs) != self.n_bits:
            raise DomainError("partition and probs need one entry per bit")
        if any(s not in ("A", "B") for s in self.partition):
            raise DomainError("partition entries must be 'A' or 'B'")
        for i, p in enumerate(self.probs):
            _check_prob(f"probs[{i}]", p)
        if len(self.g) != size:
            raise DomainError(f"truth table has {len(self.g)} entries, expected {size}")
        if any(v not in (0, 1) for v in self.g):
            raise DomainError("truth table entries must be 0 or 1")
        if len(self.input_dist) != size:
            raise DomainError(f"input_dist has {len(self.input_dist)} entries, expected {size}")
        if min(self.input_dist) < 0 or abs(sum(self.input_dist) - 1.0) > ATOL:
            raise DomainError("input_dist must be a probability vector")

    @property
    def no_knowledge(self) -> bool:
        return all(abs(p - 0.5) <= ATOL for p in self.probs)

    @classmethod
    def from_dict(cls, data: dict) -> KnowledgeSpec:
        try:
            return cls(
                n_bits=int(data["n_bits"]),
                partition=tuple(data["partition"]),
                probs=tuple(data["probs"]),
                g=tuple(data["g"]),
                input_dist=None if data.get("input_dist") is None else tuple(data["input_dist"]),
            )
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed knowledge spec: {exc}") from exc

    @classmethod
    def load(cls, path) -> KnowledgeSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_distributed_game(spec: KnowledgeSpec) -> XorGame:
    n = spec.n_bits
    size = 2**n
    mask_a = sum(1 << (n - 1 - i) for i, side in enumerate(spec.partition) if side == "A")
    mask_b = (size - 1) ^ mask_a

    # branch bit set = that bit was masked (probability 1 - p_i)
    branch_w = np.ones(size)
    for i, p in enumerate(spec.probs):
        bit = (np.arange(size) >> (n - 1 - i)) & 1
        branch_w *= np.where(bit == 1, 1 - p, p)

    pi = np.zeros((size, size))
    branches = np.arange(size)
    for z, pz in enumerate(spec.input_dist):
        if pz == 0:
            continue
        x = (z & mask_a) ^ branches
        y = (z & mask_b) ^ branches
        np.add.at(pi, (x, y), pz * branch_w)
    f = _xor_function_matrix(spec.g, n)
    return XorGame(pi, f, f"distributed(n={n})")


def sum_games(g1: XorGame, g2: XorGame) -> XorGame:
    """Play both games at once; answers are judged on f1 XOR f2.

    Combined question ``(i1, i2)`` has index ``i1 * size2 + i2``, matching
    ``np.kron`` so that the cost matrix is the Kronecker product.
    """
    pi = np.kron(g1.pi, g2.pi)
    f = (g1.f.reshape(g1.m, 1, g1.n, 1) ^ g2.f.reshape(1, g2.m, 1, g2.n)).reshape(
        g1.m * g2.m, g1.n * g2.n
    )
    return XorGame(pi, f, f"({g1.label})+({g2.label})")


def sum_many(games) -> XorGame:
    games = list(games)
    if not games:
        raise DomainError("need at least one game to sum")
    out = games[0]
    for g in games[1:]:
        out = sum_games(out, g)
    return out


def trivial_game() -> XorGame:
    """One question each, always won by agreeing: the identity for sums."""
    return XorGame(np.ones((1, 1)), np.zeros((1, 1), dtype=int), "trivial")


def and_sum_game(k: int, p: float = 0.5, q: float = 0.5) -> XorGame:
    """k-1 copies of the unperturbed AND game plus one copy perturbed by (p, q)."""
    if k < 1:
        raise DomainError("k must be at least 1")
    copies = [build_perturbed_and_game(0.5, 0.5)] * (k - 1)
    return sum_many(copies + [build_perturbed_and_game(p, q)])


def build_magic_square_game() -> XorGame:
    pi = MAGIC_SQUARE / MAGIC_SQUARE.sum()
    f = _xor_function_matrix(_and_truth_table(), 2)
    return XorGame(pi, f, "magic-square")


def marginals(g: XorGame) -> tuple[np.ndarray, np.ndarray]:
    return g.pi.sum(axis=1), g.pi.sum(axis=0)

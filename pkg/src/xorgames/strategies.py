"""Explicit entangled strategies for the perturbed AND game, as matrices.

Both players hold half of a maximally entangled state of local dimension d,
for which

    <psi| A (x) B |psi> = Tr(A B^T) / d.

Alice's observable for a question is (up to a positive factor) a signed
combination of the complex conjugates of Bob's observables; where such a
combination fails to square to the identity it is replaced by its spectral
sign, which is the best response to Bob's observables and hence optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConstructionError,
    DegeneracyError,
    DegenerateNormalizationError,
    DomainError,
)
from .game import XorGame, build_perturbed_and_game
from .quantum import closed_form_region1, closed_form_region2, in_region1, in_region2

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

OBSERVABLE_TOL = 1e-8
HERMITIAN_TOL = 1e-10
BETA_TOL = 1e-10
BETA_MATCH_TOL = 1e-8


@dataclass(frozen=True)
class ObservableReport:
    hermitian_defect: float
    involution_defect: float
    passed: bool


def validate_observable(o, tol=OBSERVABLE_TOL) -> ObservableReport:
    o = np.asarray(o, dtype=complex)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise DomainError(f"observable must be square, got shape {o.shape}")
    herm = float(np.max(np.abs(o - o.conj().T)))
    inv = float(np.max(np.abs(o @ o - np.eye(o.shape[0]))))
    return ObservableReport(herm, inv, herm <= tol and inv <= tol)


def spectral_sign(o) -> np.ndarray:
    """Keep the eigenvectors of a Hermitian matrix, replace eigenvalues by signs."""
    o = np.asarray(o, dtype=complex)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise DomainError(f"matrix must be square, got shape {o.shape}")
    if np.max(np.abs(o - o.conj().T)) > HERMITIAN_TOL:
        raise DomainError("matrix is not Hermitian")
    w, vecs = np.linalg.eigh((o + o.conj().T) / 2)
    if np.min(np.abs(w)) < 1e-10:
        raise DegeneracyError("matrix has an eigenvalue within 1e-10 of zero; its sign is undefined")
    return (vecs * np.sign(w)) @ vecs.conj().T


def maximally_entangled_state(d: int) -> np.ndarray:
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = 1 / math.sqrt(d)
    return psi


def expectation_trace(a, b) -> complex:
    """<psi|A (x) B|psi> on the maximally entangled state, via Tr(A B^T)/d."""
    a = np.asarray(a)
    return complex(np.sum(a * np.asarray(b)) / a.shape[0])


def expectation_direct(a, b, psi=None) -> complex:
    """The same expectation by contracting psi with the d^2 x d^2 operator."""
    a = np.asarray(a)
    if psi is None:
        psi = maximally_entangled_state(a.shape[0])
    return complex(psi.conj() @ np.kron(a, b) @ psi)


@dataclass(frozen=True)
class ConstructionReport:
    region: int
    p: float
    q: float
    beta: float | None = None
    printed_cos_beta: float | None = None
    repaired: tuple[bool, ...] = ()
    printed_defects: tuple[float, ...] = ()
    alternative_defects: tuple[float, ...] = ()
    normalization_reading: str = ""
    target: float | None = None

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "p": self.p,
            "q": self.q,
            "beta": self.beta,
            "printed_cos_beta": self.printed_cos_beta,
            "printed_cos_beta_valid": (
                None if self.printed_cos_beta is None else abs(self.printed_cos_beta) <= 1
            ),
            "repaired": list(self.repaired),
            "printed_defects": list(self.printed_defects),
            "alternative_defects": list(self.alternative_defects),
            "normalization_reading": self.normalization_reading,
            "target": self.target,
        }


@dataclass(frozen=True, eq=False)
class OperatorStrategy:
    alice_ops: tuple
    bob_ops: tuple
    report: ConstructionReport | None = field(default=None, compare=False)

    def __post_init__(self):
        alice = tuple(np.array(o, dtype=complex) for o in self.alice_ops)
        bob = tuple(np.array(o, dtype=complex) for o in self.bob_ops)
        if not alice or not bob:
            raise DomainError("strategy needs at least one observable per player")
        d = alice[0].shape[0]
        for o in alice + bob:
            if o.shape != (d, d):
                raise DomainError(f"all observables must be {d}x{d}")
            if not np.all(np.isfinite(o)):
                raise DomainError("observable has non-finite entries")
            rep = validate_observable(o)
            if rep.hermitian_defect > HERMITIAN_TOL or rep.involution_defect > OBSERVABLE_TOL:
                raise DomainError(
                    f"not a +/-1 observable (hermitian defect {rep.hermitian_defect:.3g}, "
                    f"involution defect {rep.involution_defect:.3g})"
                )
            o.flags.writeable = False
        object.__setattr__(self, "alice_ops", alice)
        object.__setattr__(self, "bob_ops", bob)

    @property
    def local_dim(self) -> int:
        return self.alice_ops[0].shape[0]

    @property
    def state(self) -> np.ndarray:
        return maximally_entangled_state(self.local_dim)

    def correlations(self) -> np.ndarray:
        """Matrix of <A_x (x) B_y> over all question pairs (real part)."""
        a = np.stack(self.alice_ops)
        b = np.stack(self.bob_ops)
        corr = np.einsum("xij,yij->xy", a, b) / self.local_dim
        if np.max(np.abs(corr.imag), initial=0.0) > 1e-10:
            raise DomainError("correlations are not real; observables are inconsistent")
        return corr.real

    def to_dict(self) -> dict:
        def enc(o):
            return np.stack([o.real, o.imag], axis=-1).ravel().tolist()

        return {
            "local_dim": self.local_dim,
            "alice_ops": [enc(o) for o in self.alice_ops],
            "bob_ops": [enc(o) for o in self.bob_ops],
            "report": None if self.report is None else self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> OperatorStrategy:
        d = int(data["local_dim"])

        def dec(flat):
            arr = np.asarray(flat, dtype=float).reshape(d, d, 2)
            return arr[..., 0] + 1j * arr[..., 1]

        return cls(tuple(dec(o) for o in data["alice_ops"]), tuple(dec(o) for o in data["bob_ops"]))


def from_classical(a_signs, b_signs, local_dim: int = 1) -> OperatorStrategy:
    """Embed deterministic answers as diagonal (scalar) observables."""
    eye = np.eye(local_dim)
    return OperatorStrategy(
        tuple(int(s) * eye for s in a_signs), tuple(int(s) * eye for s in b_signs)
    )


def operator_bias(g: XorGame, s: OperatorStrategy) -> float:
    if len(s.alice_ops) != g.m or len(s.bob_ops) != g.n:
        raise DomainError(
            f"strategy has {len(s.alice_ops)}x{len(s.bob_ops)} observables, "
            f"game has {g.m}x{g.n} questions"
        )
    return float(np.sum(g.cost * s.correlations()))


# --- perturbed AND strategies -------------------------------------------------

def _and_combinations(p, bob_conj):
    """Unnormalized Alice combinations, in question order 00, 01, 10, 11."""
    b00, b01, b10, b11 = bob_conj
    return [
        p * (b00 + b01) + (1 - p) * (b10 - b11),
        p * (b00 + b01) + (1 - p) * (-b10 + b11),
        p * (b00 - b01) + (1 - p) * (b10 + b11),
        p * (-b00 + b01) + (1 - p) * (b10 + b11),
    ]


def _finish_alice(combos, printed_norms, alternative_norms):
    printed = [c / n for c, n in zip(combos, printed_norms)]
    alternative = [c / n for c, n in zip(combos, alternative_norms)]
    printed_rep = [validate_observable(o) for o in printed]
    alt_rep = [validate_observable(o) for o in alternative]

    ops, repaired = [], []
    for o, rep in zip(printed, printed_rep):
        if rep.passed:
            ops.append(o)
            repaired.append(False)
        else:
            try:
                ops.append(spectral_sign((o + o.conj().T) / 2))
            except DegeneracyError as exc:
                raise ConstructionError(f"cannot repair Alice observable: {exc}") from exc
            repaired.append(True)

    if all(r.passed for r in printed_rep):
        reading = "printed"
    elif all(r.passed for r in alt_rep):
        reading = "alternative"
    else:
        reading = "spectral-sign"
    return (
        ops,
        tuple(repaired),
        tuple(r.involution_defect for r in printed_rep),
        tuple(r.involution_defect for r in alt_rep),
        reading,
    )


def _region1_bob(beta):
    rot = math.cos(beta) * X + math.sin(beta) * Z
    return [np.kron(X, I2), np.kron(Y, X), np.kron(rot, I2), -np.kron(Y, rot)]


def _best_response_bias(cost, bob):
    """Bias when Alice answers Bob optimally: sum_x ||sum_y cost[x,y] conj(B_y)||_1 / d."""
    d = bob[0].shape[0]
    bob_conj = np.stack([b.conj() for b in bob])
    total = 0.0
    for row in cost:
        c = np.tensordot(row, bob_conj, axes=1)
        total += np.sum(np.abs(np.linalg.eigvalsh((c + c.conj().T) / 2)))
    return total / d


def _golden_max(fn, lo, hi, tol):
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    x = (a + b) / 2
    return x, fn(x)


def printed_cos_beta(p, q):
    pp = p * p + (1 - p) ** 2
    qq = q * q + (1 - q) ** 2
    return 0.5 * pp * qq / (p * (1 - p) * qq) if 0 < p < 1 else math.inf


def solve_region1_beta(p, q, grid=721):
    """Angle in [0, pi] maximizing the best-response bias of the region-1 Bob."""
    cost = build_perturbed_and_game(p, q).cost

    def fn(beta):
        return _best_response_bias(cost, _region1_bob(beta))

    betas = np.linspace(0.0, math.pi, grid)
    vals = [fn(b) for b in betas]
    i = int(np.argmax(vals))
    step = betas[1] - betas[0]
    lo, hi = max(0.0, betas[i] - step), min(math.pi, betas[i] + step)
    beta, val = _golden_max(fn, lo, hi, BETA_TOL)
    if vals[i] > val:
        beta, val = float(betas[i]), vals[i]
    # the peak is quadratic, so golden section only pins beta to ~sqrt(eps);
    # bisect the central-difference slope to sharpen it
    beta = _polish_peak(fn, beta)
    return beta, fn(beta)


def _polish_peak(fn, beta, width=1e-6, h=1e-5, iters=60):
    def slope(b):
        return fn(b + h) - fn(b - h)

    lo, hi = beta - width, beta + width
    if lo - h < 0 or hi + h > math.pi:
        return beta
    s_lo, s_hi = slope(lo), slope(hi)
    if not (s_lo > 0 > s_hi):
        return beta
    for _ in range(iters):
        mid = (lo + hi) / 2
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    mid = (lo + hi) / 2
    return mid if fn(mid) >= fn(beta) - 1e-15 else beta


def region1_normalizations(p, q) -> dict:
    """Printed divisors of the region-1 Alice combinations, keyed by question.

    As printed, A01 is divided by the "10" constant and "01" goes unused;
    the builder tries both readings and reports which one is exact.
    """
    n00 = 2 * q * math.sqrt((p * p + (1 - p) ** 2) / (q * q + (1 - q) ** 2))
    n01 = (1 - q) / q * n00
    return {"00": n00, "10": n00, "01": n01, "11": n01}


def region2_normalizations(p) -> dict:
    m00 = math.sqrt(2)
    m01 = math.sqrt(2) * (2 * p - 1)
    return {"00": m00, "10": m00, "01": m01, "11": m01}


def build_region1_strategy(p: float, q: float) -> OperatorStrategy:
    """Four-qubit strategy attaining the region-1 bound (local dimension 4)."""
    if not in_region1(p, q):
        closed_form_region1(p, q)  # raises with the violated inequality
    target = closed_form_region1(p, q)
    beta, best = solve_region1_beta(p, q)
    if abs(best - target) > BETA_MATCH_TOL:
        raise ConstructionError(
            f"no beta attains the region-1 value {target:.12g} (best {best:.12g})", best_bias=best
        )

    bob = _region1_bob(beta)
    combos = _and_combinations(p, [b.conj() for b in bob])
    n = region1_normalizations(p, q)
    ops, repaired, printed_def, alt_def, reading = _finish_alice(
        combos,
        (n["00"], n["10"], n["10"], n["11"]),
        (n["00"], n["01"], n["10"], n["11"]),
    )
    report = ConstructionReport(
        region=1,
        p=p,
        q=q,
        beta=beta,
        printed_cos_beta=printed_cos_beta(p, q),
        repaired=repaired,
        printed_defects=printed_def,
        alternative_defects=alt_def,
        normalization_reading=reading,
        target=target,
    )
    return OperatorStrategy(tuple(ops), tuple(bob), report)


def build_region2_strategy(p: float, q: float) -> OperatorStrategy:
    """Two-qubit strategy attaining the region-2 bound (local dimension 2)."""
    if abs(2 * p - 1) < 1e-12:
        raise DegenerateNormalizationError(
            f"normalization sqrt(2)(2p - 1) vanishes at p={p!r}"
        )
    if not in_region2(p, q):
        closed_form_region2(p, q)
    target = closed_form_region2(p, q)
    bob = [X, Z, X, -Z]
    combos = _and_combinations(p, [b.conj() for b in bob])
    n = region2_normalizations(p)
    ops, repaired, printed_def, alt_def, reading = _finish_alice(
        combos,
        (n["00"], n["10"], n["10"], n["11"]),
        (n["00"], n["01"], n["10"], n["11"]),
    )
    report = ConstructionReport(
        region=2,
        p=p,
        q=q,
        repaired=repaired,
        printed_defects=printed_def,
        alternative_defects=alt_def,
        normalization_reading=reading,
        target=target,
    )
    return OperatorStrategy(tuple(ops), tuple(bob), report)


def chsh_strategy() -> OperatorStrategy:
    return build_region2_strategy(1.0, 1.0)


# --- Monte Carlo --------------------------------------------------------------

@dataclass(frozen=True)
class RoundSample:
    x: int
    y: int
    a: int
    b: int
    win: bool


@dataclass(frozen=True)
class SimulationResult:
    win_rate: float
    wins: int
    rounds: int
    seed: int
    shards: int
    preview: tuple[RoundSample, ...] = ()

    def to_dict(self) -> dict:
        return {
            "win_rate": self.win_rate,
            "wins": self.wins,
            "rounds": self.rounds,
            "seed": self.seed,
            "shards": self.shards,
        }


def joint_outcome_distribution(s: OperatorStrategy) -> np.ndarray:
    """``P[x, y, a, b]`` for outcome bits a, b (bit 0 is the +1 eigenvalue)."""
    d = s.local_dim
    eye = np.eye(d)
    a_proj = np.stack([np.stack([(eye + o) / 2, (eye - o) / 2]) for o in s.alice_ops])
    b_proj = np.stack([np.stack([(eye + o) / 2, (eye - o) / 2]) for o in s.bob_ops])
    joint = np.einsum("xaij,ybij->xyab", a_proj, b_proj) / d
    if np.max(np.abs(joint.imag), initial=0.0) > 1e-10:
        raise DomainError("outcome probabilities are not real")
    return joint.real


def _simulate_shard(pi_flat, f_flat, joint_flat, rounds, seed_seq, block=1 << 18):
    rng = np.random.default_rng(seed_seq)
    wins = 0
    preview = []
    cdf = np.cumsum(joint_flat, axis=1)[:, :3]
    done = 0
    while done < rounds:
        size = min(block, rounds - done)
        xy = rng.choice(pi_flat.size, size=size, p=pi_flat)
        u = rng.random(size)
        outcome = np.sum(u[:, None] >= cdf[xy], axis=1)
        a, b = outcome >> 1, outcome & 1
        won = (a ^ b) == f_flat[xy]
        wins += int(np.count_nonzero(won))
        if not preview:
            preview = [(int(xy[i]), int(a[i]), int(b[i]), bool(won[i])) for i in range(min(8, size))]
        done += size
    return wins, preview


def simulate_rounds(g: XorGame, s: OperatorStrategy, rounds: int, seed: int = 0, shards: int = 1) -> SimulationResult:
    """Play ``rounds`` rounds: draw questions from pi, sample both outcomes
    from the joint Born distribution, score a XOR b against f.

    Shard ``k`` uses the ``k``-th child of ``SeedSequence(seed)``, so results
    depend on the declared shard count but not on scheduling.
    """
    if rounds < 1:
        raise DomainError("rounds must be at least 1")
    if shards < 1:
        raise DomainError("shards must be at least 1")
    if len(s.alice_ops) != g.m or len(s.bob_ops) != g.n:
        raise DomainError("strategy and game sizes differ")
    joint = joint_outcome_distribution(s)
    pi_flat = g.pi.ravel() / g.pi.sum()
    f_flat = g.f.ravel()
    joint_flat = joint.reshape(g.m * g.n, 4)

    seqs = [np.random.SeedSequence(seed)] if shards == 1 else np.random.SeedSequence(seed).spawn(shards)
    counts = [rounds // shards + (1 if k < rounds % shards else 0) for k in range(shards)]
    wins = 0
    preview = ()
    for k, (seq, cnt) in enumerate(zip(seqs, counts)):
        if cnt == 0:
            continue
        w, prev = _simulate_shard(pi_flat, f_flat, joint_flat, cnt, seq)
        wins += w
        if k == 0:
            preview = tuple(RoundSample(xy // g.n, xy % g.n, a, b, won) for xy, a, b, won in prev)
    return SimulationResult(wins / rounds, wins, rounds, seed, shards, preview)

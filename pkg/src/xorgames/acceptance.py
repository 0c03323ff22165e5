"""End-to-end reproduction checks, shared by ``xorgame reproduce`` and the tests.

Each check returns a :class:`CheckResult` with the measured numbers, so a
failing run says exactly which value missed which tolerance.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classical import ClassicalStrategy, classical_bias_exact, strategy_bias
from .game import (
    XorGame,
    and_sum_game,
    build_magic_square_game,
    build_perturbed_and_game,
    marginals,
    sum_games,
)
from .quantum import (
    alternating_ascent,
    closed_form_region1,
    closed_form_region2,
    in_region1,
    in_region2,
    quantum_bias,
    random_unit_rows,
)
from .strategies import (
    build_region1_strategy,
    build_region2_strategy,
    chsh_strategy,
    expectation_direct,
    expectation_trace,
    operator_bias,
    simulate_rounds,
    validate_observable,
)

CHSH_WIN = math.cos(math.pi / 8) ** 2


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.id}. {self.name} ({self.seconds:.2f}s) {self.detail}".rstrip()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "measured": _plain(self.measured),
            "detail": self.detail,
            "seconds": self.seconds,
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def grid(start, stop, step):
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def interior_points(region: int, count: int = 20, margin: float = 0.02):
    """Deterministic, evenly spread points strictly inside a region."""
    axis = np.round(np.linspace(0.51, 0.99, 25), 12)
    pts = []
    for p in axis:
        for q in axis:
            prod = 2 * p * q
            if region == 1 and prod < 1 - margin and in_region1(p, q):
                pts.append((float(p), float(q)))
            elif region == 2 and prod > 1 + margin and in_region2(p, q):
                pts.append((float(p), float(q)))
    idx = np.round(np.linspace(0, len(pts) - 1, count)).astype(int)
    return [pts[i] for i in idx]


def random_game(rng, m=None, n=None) -> XorGame:
    m = m or int(rng.integers(2, 7))
    n = n or int(rng.integers(2, 7))
    pi = rng.dirichlet(np.ones(m * n)).reshape(m, n)
    f = rng.integers(0, 2, size=(m, n))
    return XorGame(pi, f, f"random({m}x{n})")


def _timed(fn):
    def wrapper(seed=0):
        t0 = time.perf_counter()
        res = fn(seed)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_classical_flatness(seed=0):
    ps = grid(0.5, 1.0, 0.05)
    worst = 0.0
    for p in ps:
        for q in ps:
            worst = max(worst, abs(classical_bias_exact(build_perturbed_and_game(p, q)).bias - 0.5))
    ok = worst <= 1e-9
    return CheckResult(
        1,
        "perturbed classical flatness",
        ok,
        {"points": len(ps) ** 2, "max_abs_dev_from_half": worst},
        f"max |eps_C - 1/2| = {worst:.3g} over {len(ps) ** 2} points (tol 1e-9)",
    )


@_timed
def check_chsh_endpoints(seed=0):
    g = build_perturbed_and_game(1.0, 1.0)
    ec = classical_bias_exact(g).bias
    cert = quantum_bias(g, seed=seed)
    rounds = 10**6
    sim = simulate_rounds(g, chsh_strategy(), rounds, seed=seed)
    sigma = math.sqrt(CHSH_WIN * (1 - CHSH_WIN) / rounds)
    target = 1 / math.sqrt(2)
    ok_c = ec == 0.5
    ok_q = abs(cert.lower - target) <= 1e-6 and abs(cert.upper - target) <= 1e-6
    ok_mc = abs(sim.win_rate - CHSH_WIN) <= 3 * sigma
    return CheckResult(
        2,
        "CHSH endpoints",
        ok_c and ok_q and ok_mc,
        {
            "classical_bias": ec,
            "quantum_lower": cert.lower,
            "quantum_upper": cert.upper,
            "win_rate": sim.win_rate,
            "win_rate_target": CHSH_WIN,
            "sigma": sigma,
            "rounds": rounds,
        },
        f"eps_C={ec!r}, eps_Q in [{cert.lower:.9f}, {cert.upper:.9f}], "
        f"win rate {sim.win_rate:.5f} vs {CHSH_WIN:.5f} (3 sigma = {3 * sigma:.2g})",
    )


@_timed
def check_region_closed_forms(seed=0):
    rows = []
    worst_dev = worst_slack = 0.0
    for region, cf in ((1, closed_form_region1), (2, closed_form_region2)):
        for p, q in interior_points(region):
            cert = quantum_bias(build_perturbed_and_game(p, q), seed=seed)
            target = cf(p, q)
            dev = abs(cert.lower - target)
            worst_dev = max(worst_dev, dev)
            worst_slack = max(worst_slack, cert.slack)
            rows.append({"region": region, "p": p, "q": q, "lower": cert.lower, "closed_form": target, "slack": cert.slack})
    ok = worst_dev <= 1e-6 and worst_slack <= 1e-6
    return CheckResult(
        3,
        "region closed forms",
        ok,
        {"points": rows, "max_abs_dev": worst_dev, "max_slack": worst_slack},
        f"{len(rows)} points, max |lower - closed form| = {worst_dev:.3g}, max slack = {worst_slack:.3g} (tol 1e-6)",
    )


@_timed
def check_strict_advantage(seed=0):
    p = q = 0.5001
    g = build_perturbed_and_game(p, q)
    ec = classical_bias_exact(g).bias
    cert = quantum_bias(g, seed=seed)
    cf = closed_form_region1(p, q)
    advantage = cert.lower - ec
    predicted = cf - 0.5
    ok = in_region1(p, q) and advantage >= predicted - 1e-7 and advantage > 0 and predicted > 0
    return CheckResult(
        4,
        "strict advantage off the center",
        ok,
        {"classical_bias": ec, "quantum_lower": cert.lower, "advantage": advantage, "predicted_advantage": predicted},
        f"eps_Q - eps_C = {advantage:.4g} (closed form {predicted:.4g}, must be > 0)",
    )


@_timed
def check_sums(seed=0):
    measured = {}
    ok = True
    for k in (1, 2):
        g = and_sum_game(k)
        ec = classical_bias_exact(g).bias
        cert = quantum_bias(g, seed=seed)
        target = 0.5**k
        good = all(abs(v - target) <= 1e-6 for v in (ec, cert.lower, cert.upper))
        ok &= good
        measured[f"k={k}"] = {
            "questions": g.m,
            "classical_bias": ec,
            "quantum_lower": cert.lower,
            "quantum_upper": cert.upper,
            "target": target,
        }

    base = {
        "and(1/2,1/2)": build_perturbed_and_game(0.5, 0.5),
        "and(1,1)": build_perturbed_and_game(1.0, 1.0),
        "and(0.8,0.6)": build_perturbed_and_game(0.8, 0.6),
    }
    lowers = {name: quantum_bias(g, seed=seed).lower for name, g in base.items()}
    worst = 0.0
    pairs = []
    for a, b in itertools.combinations_with_replacement(base, 2):
        joint = quantum_bias(sum_games(base[a], base[b]), seed=seed).lower
        dev = abs(joint - lowers[a] * lowers[b])
        worst = max(worst, dev)
        pairs.append({"pair": f"{a}+{b}", "joint": joint, "product": lowers[a] * lowers[b]})
    ok &= worst <= 1e-5
    measured["multiplicativity"] = {"pairs": pairs, "max_abs_dev": worst}
    return CheckResult(
        5,
        "sums and multiplicativity",
        ok,
        measured,
        f"k=1: {measured['k=1']['quantum_lower']:.9f}, k=2: {measured['k=2']['quantum_lower']:.9f}, "
        f"multiplicativity max dev {worst:.3g} (tol 1e-5)",
    )


@_timed
def check_perturbed_family(seed=0):
    rows = []
    worst = 0.0
    for p in (0.6, 0.75, 0.9):
        cert = quantum_bias(and_sum_game(2, p, 0.5), seed=seed)
        target = 0.5 * math.sqrt(0.5) * math.sqrt(p * p + (1 - p) ** 2)
        worst = max(worst, abs(cert.lower - target))
        rows.append({"p": p, "lower": cert.lower, "target": target})
    return CheckResult(
        6,
        "perturbed sum family (k=2, q=1/2)",
        worst <= 1e-5,
        {"rows": rows, "max_abs_dev": worst},
        f"max |lower - target| = {worst:.3g} (tol 1e-5)",
    )


@_timed
def check_flat_start(seed=0):
    h = 1e-4

    def qv(p):
        return quantum_bias(build_perturbed_and_game(p, 0.5), seed=seed).lower

    fd = (qv(0.5 + h) - qv(0.5)) / h
    ps = grid(0.5, 0.95, 0.05)
    vals = [qv(p) for p in ps]
    steps = np.diff(vals)
    monotone = bool(np.all(steps >= 0))
    ok = abs(fd) <= 1e-3 and monotone
    return CheckResult(
        7,
        "flat start and monotonicity in p",
        ok,
        {"forward_difference": fd, "h": h, "p": ps, "values": vals, "min_step": float(steps.min())},
        f"|forward difference| = {abs(fd):.3g} (tol 1e-3), non-decreasing: {monotone}",
    )


@_timed
def check_magic_square(seed=0):
    g = build_magic_square_game()
    res = classical_bias_exact(g)
    cert = quantum_bias(g, seed=seed)
    alice, bob = marginals(g)
    marg_dev = float(max(np.max(np.abs(alice - 0.25)), np.max(np.abs(bob - 0.25))))
    ok = abs(res.bias - 0.5) <= 1e-9 and cert.lower >= 0.5910 and marg_dev <= 1e-12
    return CheckResult(
        8,
        "magic square",
        ok,
        {
            "classical_bias": res.bias,
            "gauge_fixed_vectors": 2 ** (g.m - 1),
            "quantum_lower": cert.lower,
            "quantum_upper": cert.upper,
            "marginal_max_dev": marg_dev,
        },
        f"eps_C={res.bias:.12g}, eps_Q >= {cert.lower:.6f}, marginal dev {marg_dev:.2g}",
    )


def built_strategies():
    """Every explicit strategy the checks exercise, with its game."""
    out = []
    for p, q in interior_points(1, count=10):
        out.append((build_perturbed_and_game(p, q), build_region1_strategy(p, q)))
    for p, q in interior_points(2, count=10):
        out.append((build_perturbed_and_game(p, q), build_region2_strategy(p, q)))
    out.append((build_perturbed_and_game(1.0, 1.0), chsh_strategy()))
    return out


@_timed
def check_properties(seed=0):
    rng = np.random.default_rng(seed)
    games = [random_game(rng) for _ in range(100)]
    named_games = [
        build_perturbed_and_game(0.5, 0.5),
        build_perturbed_and_game(1.0, 1.0),
        build_perturbed_and_game(0.8, 0.6),
        build_magic_square_game(),
    ]

    worst_drop = 0.0
    for g in games:
        hist = []
        alternating_ascent(g.cost, random_unit_rows(rng, g.m, g.m + g.n), history=hist)
        if len(hist) > 1:
            worst_drop = max(worst_drop, float(-np.min(np.diff(hist))))
    mono_ok = worst_drop <= 1e-12

    worst_gap = -math.inf
    for g in games + named_games:
        ec = classical_bias_exact(g).bias
        eq = quantum_bias(g, restarts=4, seed=seed).upper
        worst_gap = max(worst_gap, ec - eq)
    order_ok = worst_gap <= 1e-9

    worst_gauge = 0.0
    for g in games + named_games:
        for _ in range(5):
            s = ClassicalStrategy(
                tuple(rng.choice([-1, 1], g.m)), tuple(rng.choice([-1, 1], g.n))
            )
            worst_gauge = max(worst_gauge, abs(strategy_bias(g, s) - strategy_bias(g, s.flipped())))
    gauge_ok = worst_gauge <= 1e-15

    worst_contract = 0.0
    worst_defect = 0.0
    for _, s in built_strategies():
        for o in s.alice_ops + s.bob_ops:
            rep = validate_observable(o)
            worst_defect = max(worst_defect, rep.hermitian_defect, rep.involution_defect)
        for a in s.alice_ops:
            for b in s.bob_ops:
                worst_contract = max(worst_contract, abs(expectation_trace(a, b) - expectation_direct(a, b)))
    contract_ok = worst_contract <= 1e-12
    defect_ok = worst_defect <= 1e-8

    ok = mono_ok and order_ok and gauge_ok and contract_ok and defect_ok
    return CheckResult(
        9,
        "property suites",
        ok,
        {
            "ascent_max_drop": worst_drop,
            "classical_minus_quantum_upper_max": worst_gap,
            "gauge_max_dev": worst_gauge,
            "trace_vs_contraction_max_dev": worst_contract,
            "observable_max_defect": worst_defect,
            "random_games": len(games),
        },
        f"ascent drop {worst_drop:.2g}, eps_C - eps_Q_up {worst_gap:.2g}, gauge {worst_gauge:.2g}, "
        f"trace/contract {worst_contract:.2g}, defects {worst_defect:.2g}",
    )


CHECKS = [
    check_classical_flatness,
    check_chsh_endpoints,
    check_region_closed_forms,
    check_strict_advantage,
    check_sums,
    check_perturbed_family,
    check_flat_start,
    check_magic_square,
    check_properties,
]


def run_all(seed=0, log=None):
    results = []
    for check in CHECKS:
        res = check(seed)
        if log is not None:
            log(res.line())
        results.append(res)
    return results

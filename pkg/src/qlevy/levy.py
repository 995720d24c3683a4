"""Limit-theorem estimates, invariance checks and moment-sequence comparison.

The central construction: subdivide unit increments based at the integer
positions of an order-class representative into N pieces of width t/N,
evaluate the word moment through an oracle, and rescale by N^k.  For an
order invariant flow the rescaled values converge; their limits c(sigma)
assemble the moment polynomial ``sum_sigma c(sigma) t^k / k!``.

Oracles are thin wrappers around the wick engines or a Fock process
spec, so every estimator here works identically against either engine.
Verdicts always carry magnitudes: convergence noise and genuine
non-invariance must stay distinguishable downstream.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .fock import ProcessSpec, mixed_vacuum_moment
from .grids import Interval
from .kernels import ConstantKernel, GaussQuad, GridQuad, QKernel, describe
from .partitions import OrderClass, enumerate_order_classes
from .wick import (
    MomentPolynomial,
    mixed_moment_constant,
    mixed_moment_kernel,
)

__all__ = [
    "MomentOracle",
    "CCoefficient",
    "ScalingReport",
    "LowMomentFit",
    "OrderInvarianceReport",
    "StationarityReport",
    "ComparisonReport",
    "constant_oracle",
    "kernel_oracle",
    "fock_oracle",
    "sigma_increment_moment",
    "estimate_c",
    "c_scaling_check",
    "assemble_polynomial",
    "low_moment_coefficients",
    "order_invariance_check",
    "stationarity_check",
    "compare_processes",
    "random_order_cases",
    "builtin_invariance_cases",
    "builtin_stationarity_words",
]

Case = tuple[Sequence[Interval], Sequence[float]]


@dataclass(frozen=True)
class MomentOracle:
    """Deterministic evaluator of word moments plus engine metadata."""

    evaluator: Callable[[Sequence[Interval]], float]
    engine: str
    kernel_desc: str

    def evaluate(self, intervals: Sequence[Interval]) -> float:
        return self.evaluator(intervals)

    def power_moment(self, t: float, n: int) -> float:
        """Moment of the [0, t) field to the n-th power."""
        return self.evaluate([Interval(0.0, t)] * n)


def constant_oracle(q0: float) -> MomentOracle:
    """Exact constant-q Wick engine as an oracle."""
    return MomentOracle(
        lambda intervals: mixed_moment_constant(q0, intervals),
        engine="wick",
        kernel_desc=describe(ConstantKernel(q0)),
    )


def kernel_oracle(kernel: QKernel, quad: GridQuad | GaussQuad) -> MomentOracle:
    """Quadrature Wick engine as an oracle."""
    mode = "grid" if isinstance(quad, GridQuad) else "gauss"
    return MomentOracle(
        lambda intervals: mixed_moment_kernel(kernel, intervals, quad),
        engine=f"wick-{mode}",
        kernel_desc=describe(kernel),
    )


def fock_oracle(spec: ProcessSpec) -> MomentOracle:
    """Discretized Fock computation as an oracle."""
    return MomentOracle(
        lambda intervals: mixed_vacuum_moment(spec, intervals),
        engine="fock",
        kernel_desc=describe(spec.kernel),
    )


@dataclass(frozen=True)
class CCoefficient:
    """Extrapolated limit coefficient of one order class."""

    sigma: OrderClass
    value: float
    stderr: float
    t_ref: float

    def __post_init__(self) -> None:
        if self.stderr < 0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")


def sigma_increment_moment(
    oracle: MomentOracle,
    s: OrderClass,
    t: float,
    n_sub: int,
    spacing: float = 1.0,
) -> float:
    """Moment of the word of width-t/N increments based at the integer
    positions of the class representative (scaled by ``spacing``)."""
    if n_sub < 1:
        raise ValueError(f"subdivision count must be >= 1, got {n_sub}")
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    width = t / n_sub
    word = [Interval(i * spacing, i * spacing + width) for i in s.rep]
    return oracle.evaluate(word)


def estimate_c(
    oracle: MomentOracle,
    s: OrderClass,
    t: float,
    subdivisions: Sequence[int],
    spacing: float = 1.0,
) -> CCoefficient:
    """Estimate the limit of ``N^k * sigma_increment_moment`` by Richardson
    extrapolation of the two finest subdivisions, assuming first-order
    error in 1/N.  ``stderr`` is the distance between the extrapolant and
    the finest raw value; for exact engines it is zero."""
    ns = list(subdivisions)
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError(f"need >= 2 strictly increasing subdivisions, got {ns}")
    values = [
        n**s.k * sigma_increment_moment(oracle, s, t, n, spacing) for n in ns
    ]
    n1, n2 = ns[-2], ns[-1]
    v1, v2 = values[-2], values[-1]
    extrapolant = (n2 * v2 - n1 * v1) / (n2 - n1)
    return CCoefficient(s, extrapolant, abs(extrapolant - v2), t)


@dataclass(frozen=True)
class ScalingReport:
    """Observed scaling of the limit coefficient under time dilation."""

    sigma: OrderClass
    factor: int
    c_base: CCoefficient
    c_scaled: CCoefficient
    expected_ratio: float
    ratio: float
    deviation: float


def c_scaling_check(
    oracle: MomentOracle,
    s: OrderClass,
    t: float,
    factor: int,
    subdivisions: Sequence[int] = (4, 8),
) -> ScalingReport:
    """Check ``c_{kt} = k^{|sigma|} c_t``; ratio is NaN when both limits
    vanish (deviation 0 then: 0 scales to 0)."""
    if factor < 1:
        raise ValueError(f"scaling factor must be >= 1, got {factor}")
    c_base = estimate_c(oracle, s, t, subdivisions)
    c_scaled = estimate_c(oracle, s, factor * t, subdivisions)
    expected = float(factor**s.k)
    if abs(c_base.value) > 1e-300:
        ratio = c_scaled.value / c_base.value
        deviation = abs(ratio - expected)
    else:
        ratio = float("nan")
        deviation = 0.0 if abs(c_scaled.value) <= 1e-12 else float("inf")
    return ScalingReport(s, factor, c_base, c_scaled, expected, ratio, deviation)


def assemble_polynomial(coefficients: Sequence[CCoefficient]) -> MomentPolynomial:
    """Moment polynomial ``sum_d (sum_{|sigma|=d} c(sigma)) t^d / d!`` from
    one coefficient per order class (estimated at t_ref = 1)."""
    if not coefficients:
        raise ValueError("no coefficients given")
    n = coefficients[0].sigma.n
    for c in coefficients:
        if c.sigma.n != n:
            raise ValueError(
                f"mixed word lengths: {c.sigma.n} vs {n} in one assembly"
            )
        if c.t_ref != 1.0:
            raise ValueError(
                f"assembly requires coefficients at t_ref=1, got {c.t_ref}"
            )
    given = {c.sigma for c in coefficients}
    expected = set(enumerate_order_classes(n))
    if given != expected:
        missing = sorted(s.rep for s in expected - given)
        extra = sorted(s.rep for s in given - expected)
        raise ValueError(
            f"class set mismatch for n={n}: missing {missing}, unexpected {extra}"
        )
    coeffs = [0.0] * (n + 1)
    for d in range(1, n + 1):
        block = [c.value for c in coefficients if c.sigma.k == d]
        coeffs[d] = math.fsum(block) / math.factorial(d)
    return MomentPolynomial(tuple(coeffs))


@dataclass(frozen=True)
class LowMomentFit:
    """Drift/variance/third-cumulant data of the first three moments."""

    alpha: float
    beta: float
    gamma: float
    residual: float


def low_moment_coefficients(
    oracle: MomentOracle, t_fit: Sequence[float]
) -> LowMomentFit:
    """Fit ``m1 = a t``, ``m2 = a^2 t^2 + b t``,
    ``m3 = a^3 t^3 + 3 a b t^2 + g t`` and report the worst deviation of
    the oracle's moments from the fitted forms over ``t_fit``."""
    ts = sorted(set(t_fit))
    if len(ts) < 3 or any(t <= 0 for t in ts):
        raise ValueError(f"need >= 3 distinct positive times, got {t_fit}")
    alpha = oracle.power_moment(1.0, 1)
    beta = oracle.power_moment(1.0, 2) - alpha**2
    gamma = oracle.power_moment(1.0, 3) - alpha**3 - 3 * alpha * beta
    residual = 0.0
    for t in ts:
        predicted = (
            alpha * t,
            alpha**2 * t**2 + beta * t,
            alpha**3 * t**3 + 3 * alpha * beta * t**2 + gamma * t,
        )
        for n, p in enumerate(predicted, start=1):
            residual = max(residual, abs(oracle.power_moment(t, n) - p))
    return LowMomentFit(alpha, beta, gamma, residual)


# ---------------------------------------------------------------------------
# invariance checks


def _validate_case(word: Sequence[Interval], shifts: Sequence[float]) -> None:
    if not word:
        raise ValueError("empty word in invariance case")
    if len(word) != len(shifts):
        raise ValueError(
            f"word length {len(word)} != shift count {len(shifts)}"
        )
    by_interval: dict[Interval, float] = {}
    for interval, shift in zip(word, shifts):
        if interval in by_interval:
            if by_interval[interval] != shift:
                raise ValueError(
                    f"interval {interval} repeats with different shifts; "
                    f"a common increment must move as one"
                )
        else:
            by_interval[interval] = shift
    distinct = list(by_interval)
    for i in range(len(distinct)):
        for j in range(i + 1, len(distinct)):
            a, b = distinct[i], distinct[j]
            if not a.disjoint(b):
                raise ValueError(
                    f"distinct intervals {a} and {b} overlap; the order "
                    f"invariance condition only covers disjoint increments"
                )
            if b.strictly_before(a):
                a, b = b, a
            sa, sb = by_interval[a], by_interval[b]
            if not a.shift(sa).strictly_before(b.shift(sb)):
                raise ValueError(
                    f"shifts break the order {a} < {b}; such a case does "
                    f"not test order invariance"
                )


@dataclass(frozen=True)
class OrderInvarianceReport:
    deviations: tuple[float, ...]
    max_deviation: float
    tol: float
    verdict: str
    violations: tuple[int, ...]


def order_invariance_check(
    oracle: MomentOracle,
    n: int,
    cases: Sequence[Case],
    tol: float,
) -> OrderInvarianceReport:
    """Per-case |moment(word) - moment(order-preserving shifted word)|."""
    if not cases:
        return OrderInvarianceReport((), 0.0, tol, "vacuous", ())
    deviations = []
    for word, shifts in cases:
        if len(word) > n:
            raise ValueError(
                f"case word length {len(word)} exceeds declared order {n}"
            )
        _validate_case(word, shifts)
        base = oracle.evaluate(list(word))
        shifted = oracle.evaluate(
            [interval.shift(s) for interval, s in zip(word, shifts)]
        )
        deviations.append(abs(base - shifted))
    max_dev = max(deviations)
    violations = tuple(i for i, d in enumerate(deviations) if d > tol)
    verdict = "order-invariant" if not violations else "not-order-invariant"
    return OrderInvarianceReport(tuple(deviations), max_dev, tol, verdict, violations)


@dataclass(frozen=True)
class StationarityReport:
    deviations: tuple[float, ...]
    max_deviation: float
    tol: float
    verdict: str
    violations: tuple[int, ...]


def stationarity_check(
    oracle: MomentOracle,
    words: Sequence[Sequence[Interval]],
    shifts: Sequence[float],
    tol: float,
) -> StationarityReport:
    """Per-word worst deviation of the moment under common time shifts."""
    if not words or not shifts:
        return StationarityReport((), 0.0, tol, "vacuous", ())
    deviations = []
    for word in words:
        if not word:
            raise ValueError("empty word in stationarity check")
        base = oracle.evaluate(list(word))
        worst = 0.0
        for t in shifts:
            shifted = oracle.evaluate([interval.shift(t) for interval in word])
            worst = max(worst, abs(shifted - base))
        deviations.append(worst)
    max_dev = max(deviations)
    violations = tuple(i for i, d in enumerate(deviations) if d > tol)
    verdict = "stationary" if not violations else "not-stationary"
    return StationarityReport(tuple(deviations), max_dev, tol, verdict, violations)


@dataclass(frozen=True)
class ComparisonReport:
    """Moment sequences of the unit-interval field under two oracles."""

    moments_a: tuple[float, ...]
    moments_b: tuple[float, ...]
    n_max: int
    tol: float
    first_difference: int | None
    gap: float | None
    verdict: str


def compare_processes(
    a: MomentOracle, b: MomentOracle, n_max: int, tol: float
) -> ComparisonReport:
    """Compare the distributions of the [0, 1) increment through their
    moment sequences up to ``n_max``."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    moments_a = tuple(a.power_moment(1.0, n) for n in range(1, n_max + 1))
    moments_b = tuple(b.power_moment(1.0, n) for n in range(1, n_max + 1))
    first = None
    gap = None
    for n, (ma, mb) in enumerate(zip(moments_a, moments_b), start=1):
        if abs(ma - mb) > tol:
            first = n
            gap = ma - mb
            break
    verdict = "DISTINCT" if first is not None else "INDISTINGUISHABLE"
    return ComparisonReport(moments_a, moments_b, n_max, tol, first, gap, verdict)


# ---------------------------------------------------------------------------
# case construction


def random_order_cases(
    n: int, count: int, seed: int = 0
) -> list[tuple[list[Interval], list[float]]]:
    """Valid randomized order-invariance cases: words of unit increments
    at integer positions with random order-preserving re-gappings."""
    rng = random.Random(seed)
    cases = []
    for _ in range(count):
        length = rng.randint(2, max(2, n))
        k = rng.randint(1, min(length, 4))
        labels = list(range(k)) + [rng.randrange(k) for _ in range(length - k)]
        rng.shuffle(labels)

        def positions() -> list[int]:
            gaps = [rng.randint(1, 3) for _ in range(k)]
            out = []
            pos = 0
            for g in gaps:
                pos += g
                out.append(pos)
            return out

        base = positions()
        moved = positions()
        intervals = [Interval(float(p), float(p + 1)) for p in base]
        shift_of = [float(q - p) for p, q in zip(base, moved)]
        word = [intervals[lab] for lab in labels]
        shifts = [shift_of[lab] for lab in labels]
        cases.append((word, shifts))
    return cases


def builtin_invariance_cases(n: int) -> list[tuple[list[Interval], list[float]]]:
    """Deterministic case battery for the CLI, word lengths <= n."""
    i = Interval(0.0, 1.0)
    j = Interval(2.0, 3.0)
    k = Interval(4.0, 5.0)
    battery: list[tuple[list[Interval], list[float]]] = []
    if n >= 2:
        battery.append(([i, j], [0.0, 1.0]))
    if n >= 4:
        battery.append(([i, j, i, j], [0.0, 1.0, 0.0, 1.0]))
        battery.append(([i, i, j, j], [0.0, 0.0, 2.0, 2.0]))
        battery.append(([i, j, j, i], [0.0, 0.5, 0.5, 0.0]))
    if n >= 6:
        battery.append(([i, j, k, k, j, i], [0.0, 1.0, 3.0, 3.0, 1.0, 0.0]))
        battery.append(([i, j, i, k, j, k], [0.5, 1.5, 0.5, 2.0, 1.5, 2.0]))
    return battery


def builtin_stationarity_words(n: int) -> list[list[Interval]]:
    """Deterministic stationarity words for the CLI, lengths <= n."""
    i = Interval(0.0, 1.0)
    j = Interval(2.0, 3.0)
    words: list[list[Interval]] = [[i]]
    if n >= 2:
        words.append([i, i])
        words.append([i, j])
    if n >= 4:
        words.append([i, j, i, j])
        words.append([i, i, j, j])
    if n >= 6:
        words.append([i, j, i, j, i, j])
    return words

import math

import pytest

from qlevy.fock import ProcessSpec
from qlevy.grids import Grid, Interval
from qlevy.kernels import ConstantKernel, ExponentialKernel, GaussQuad
from qlevy.levy import (
    CCoefficient,
    assemble_polynomial,
    builtin_invariance_cases,
    builtin_stationarity_words,
    c_scaling_check,
    compare_processes,
    constant_oracle,
    estimate_c,
    fock_oracle,
    kernel_oracle,
    low_moment_coefficients,
    order_invariance_check,
    random_order_cases,
    sigma_increment_moment,
    stationarity_check,
)
from qlevy.partitions import (
    class_of,
    crossings,
    enumerate_order_classes,
    pairing_of,
)
from qlevy.wick import moment_polynomial_constant


# ---------------------------------------------------------------------------
# increment moments and c estimation


def test_sigma_increment_examples():
    oracle = constant_oracle(0.5)
    for n_sub in (1, 2, 8):
        assert sigma_increment_moment(
            oracle, class_of((1, 1)), 1.0, n_sub
        ) == pytest.approx(1.0 / n_sub, rel=1e-14)
    assert sigma_increment_moment(oracle, class_of((1, 2)), 1.0, 4) == 0.0
    assert sigma_increment_moment(
        oracle, class_of((1, 2, 1, 2)), 1.0, 4
    ) == pytest.approx(0.5 / 16, rel=1e-14)


def test_estimate_c_constant_examples():
    oracle = constant_oracle(0.5)
    est = estimate_c(oracle, class_of((1, 2, 1, 2)), 1.0, [4, 8])
    assert est.value == pytest.approx(0.5, abs=1e-12)
    assert est.stderr < 1e-10

    est2 = estimate_c(oracle, class_of((1, 1)), 1.0, [4, 8])
    assert est2.value == pytest.approx(1.0, abs=1e-12)

    singleton = estimate_c(oracle, class_of((1, 1, 2)), 1.0, [4, 8])
    assert abs(singleton.value) <= singleton.stderr + 1e-12


def test_estimate_c_matches_crossing_pattern_order_four():
    q0 = 0.5
    oracle = constant_oracle(q0)
    for sigma in enumerate_order_classes(4):
        est = estimate_c(oracle, sigma, 1.0, [4, 8])
        pairing = pairing_of(sigma)
        expected = q0 ** crossings(pairing) if pairing is not None else 0.0
        assert abs(est.value - expected) <= est.stderr + 1e-8, sigma


def test_estimate_c_with_fock_oracle():
    # grid aligned with both subdivisions: delta = 1/4 divides 1/2 and 1/4
    spec = ProcessSpec(ConstantKernel(0.5), Grid(12, 3.0))
    oracle = fock_oracle(spec)
    est = estimate_c(oracle, class_of((1, 1)), 1.0, [2, 4])
    assert est.value == pytest.approx(1.0, abs=1e-12)
    est2 = estimate_c(oracle, class_of((1, 2, 1, 2)), 1.0, [2, 4])
    assert est2.value == pytest.approx(0.5, abs=1e-12)


def test_estimate_c_input_validation():
    oracle = constant_oracle(0.5)
    with pytest.raises(ValueError):
        estimate_c(oracle, class_of((1, 1)), 1.0, [4])
    with pytest.raises(ValueError):
        estimate_c(oracle, class_of((1, 1)), 1.0, [8, 4])
    with pytest.raises(ValueError):
        sigma_increment_moment(oracle, class_of((1, 1)), -1.0, 4)
    with pytest.raises(ValueError):
        CCoefficient(class_of((1, 1)), 1.0, -0.1, 1.0)


# ---------------------------------------------------------------------------
# scaling


def test_scaling_examples():
    oracle = constant_oracle(0.5)
    rep = c_scaling_check(oracle, class_of((1, 2, 1, 2)), 1.0, 2)
    assert rep.ratio == pytest.approx(4.0, abs=1e-10)
    assert rep.deviation < 1e-8

    rep3 = c_scaling_check(oracle, class_of((1, 1)), 1.0, 3)
    assert rep3.ratio == pytest.approx(3.0, abs=1e-10)
    assert rep3.deviation < 1e-8


def test_scaling_all_classes_order_four():
    oracle = constant_oracle(0.3)
    for sigma in enumerate_order_classes(4):
        rep = c_scaling_check(oracle, sigma, 1.0, 2)
        assert rep.deviation < 1e-6, (sigma, rep)


# ---------------------------------------------------------------------------
# polynomial assembly


def test_assemble_order_two():
    oracle = constant_oracle(0.5)
    cs = [estimate_c(oracle, s, 1.0, [4, 8]) for s in enumerate_order_classes(2)]
    poly = assemble_polynomial(cs)
    assert poly.coeffs == pytest.approx((0.0, 1.0))


def test_assemble_order_four_matches_direct():
    q0 = 0.5
    oracle = constant_oracle(q0)
    cs = [estimate_c(oracle, s, 1.0, [4, 8]) for s in enumerate_order_classes(4)]
    poly = assemble_polynomial(cs)
    direct = moment_polynomial_constant(q0, 4)
    for d in range(5):
        assert poly.coefficient(d) == pytest.approx(
            direct.coefficient(d), abs=1e-6
        )


def test_assemble_all_zero_gives_zero_polynomial():
    cs = [
        CCoefficient(s, 0.0, 0.0, 1.0) for s in enumerate_order_classes(3)
    ]
    assert assemble_polynomial(cs).coeffs == ()


def test_assemble_validates_class_set():
    classes = enumerate_order_classes(2)
    cs = [CCoefficient(s, 1.0, 0.0, 1.0) for s in classes[:-1]]
    with pytest.raises(ValueError):
        assemble_polynomial(cs)
    bad_t = [CCoefficient(s, 1.0, 0.0, 2.0) for s in classes]
    with pytest.raises(ValueError):
        assemble_polynomial(bad_t)
    with pytest.raises(ValueError):
        assemble_polynomial([])


# ---------------------------------------------------------------------------
# low moments


def test_low_moments_centered():
    for q0 in (-0.5, 0.0, 0.9):
        fit = low_moment_coefficients(constant_oracle(q0), [0.5, 1.0, 2.0])
        assert fit.alpha == pytest.approx(0.0, abs=1e-12)
        assert fit.beta == pytest.approx(1.0, abs=1e-12)
        assert fit.gamma == pytest.approx(0.0, abs=1e-12)
        assert fit.residual < 1e-9


def test_low_moments_drifted():
    spec = ProcessSpec(ConstantKernel(0.3), Grid(8, 2.0), drift=0.7)
    fit = low_moment_coefficients(fock_oracle(spec), [0.25, 0.5, 1.0, 2.0])
    assert fit.alpha == pytest.approx(0.7, rel=1e-12)
    assert fit.beta == pytest.approx(1.0, rel=1e-12)
    assert fit.gamma == pytest.approx(0.0, abs=1e-12)
    assert fit.residual < 1e-8


def test_low_moments_requires_three_times():
    with pytest.raises(ValueError):
        low_moment_coefficients(constant_oracle(0.5), [1.0, 2.0])
    with pytest.raises(ValueError):
        low_moment_coefficients(constant_oracle(0.5), [0.0, 1.0, 2.0])


# ---------------------------------------------------------------------------
# invariance checks


def test_order_invariance_constant_randomized():
    oracle = constant_oracle(0.7)
    cases = random_order_cases(6, 100, seed=42)
    report = order_invariance_check(oracle, 6, cases, 1e-10)
    assert report.verdict == "order-invariant"
    assert report.max_deviation <= 1e-10
    assert report.violations == ()


def test_order_invariance_exponential_witness():
    kernel = ExponentialKernel(0.5, 1.0)
    oracle = kernel_oracle(kernel, GaussQuad(24))
    i, j = Interval(0, 1), Interval(2, 3)
    report = order_invariance_check(
        oracle, 4, [([i, j, i, j], [0.0, 1.0, 0.0, 1.0])], 1e-8
    )
    assert report.verdict == "not-order-invariant"
    closed = 0.5 * (math.e - 1) * math.exp(-2) * (1 - math.exp(-1)) ** 2
    assert report.deviations[0] == pytest.approx(closed, abs=1e-8)
    assert report.deviations[0] > 1e-3


def test_order_invariance_empty_is_vacuous():
    report = order_invariance_check(constant_oracle(0.5), 4, [], 1e-10)
    assert report.verdict == "vacuous"
    assert report.deviations == ()


def test_order_invariance_rejects_bad_cases():
    oracle = constant_oracle(0.5)
    i, j = Interval(0, 1), Interval(2, 3)
    # shift reverses the order
    with pytest.raises(ValueError):
        order_invariance_check(oracle, 4, [([i, j], [5.0, 0.0])], 1e-10)
    # same interval, inconsistent shifts
    with pytest.raises(ValueError):
        order_invariance_check(oracle, 4, [([i, i], [0.0, 1.0])], 1e-10)
    # overlapping distinct intervals
    with pytest.raises(ValueError):
        order_invariance_check(
            oracle, 4, [([i, Interval(0.5, 1.5)], [0.0, 0.0])], 1e-10
        )
    # word longer than the declared order
    with pytest.raises(ValueError):
        order_invariance_check(oracle, 2, [([i, j, i, j], [0.0] * 4)], 1e-10)


def test_stationarity_constant_and_exponential():
    words = builtin_stationarity_words(4)
    const_report = stationarity_check(
        constant_oracle(0.8), words, [0.5, 1.0, 2.0], 1e-10
    )
    assert const_report.verdict == "stationary"
    assert const_report.max_deviation <= 1e-10

    exp_report = stationarity_check(
        kernel_oracle(ExponentialKernel(0.5, 1.0), GaussQuad(24)),
        words,
        [0.5, 1.0, 2.0],
        1e-8,
    )
    assert exp_report.verdict == "stationary"
    assert exp_report.max_deviation <= 1e-8


def test_stationarity_vacuous():
    report = stationarity_check(constant_oracle(0.5), [], [1.0], 1e-10)
    assert report.verdict == "vacuous"


def test_builtin_cases_are_valid():
    oracle = constant_oracle(0.5)
    for n in (2, 4, 6):
        cases = builtin_invariance_cases(n)
        assert cases
        report = order_invariance_check(oracle, n, cases, 1e-10)
        assert report.verdict == "order-invariant"


# ---------------------------------------------------------------------------
# process comparison


def test_compare_distinct_constant_kernels():
    report = compare_processes(constant_oracle(0.2), constant_oracle(0.3), 6, 1e-9)
    assert report.verdict == "DISTINCT"
    assert report.first_difference == 4
    assert report.gap == pytest.approx(-0.1, abs=1e-9)


def test_compare_identical_and_soundness():
    for q0 in (0.0, 0.5, -1.0):
        oracle = constant_oracle(q0)
        report = compare_processes(oracle, oracle, 8, 1e-12)
        assert report.verdict == "INDISTINGUISHABLE"
        assert report.first_difference is None
        assert report.gap is None


def test_compare_free_vs_classical():
    report = compare_processes(constant_oracle(0.0), constant_oracle(1.0), 4, 1e-9)
    assert report.first_difference == 4
    assert report.moments_a[3] == pytest.approx(2.0)  # Catalan C_2
    assert report.moments_b[3] == pytest.approx(3.0)  # 3!!


def test_compare_gap_antisymmetry():
    a, b = constant_oracle(0.2), constant_oracle(0.9)
    fwd = compare_processes(a, b, 6, 1e-9)
    rev = compare_processes(b, a, 6, 1e-9)
    assert fwd.first_difference == rev.first_difference
    assert fwd.gap == pytest.approx(-rev.gap, rel=1e-12)


def test_compare_fock_vs_wick_engines_agree():
    spec = ProcessSpec(ConstantKernel(0.5), Grid(8, 1.0))
    report = compare_processes(
        fock_oracle(spec), constant_oracle(0.5), 6, 1e-9
    )
    assert report.verdict == "INDISTINGUISHABLE"

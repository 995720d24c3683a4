import random

import pytest

from qlevy.errors import AlignmentError, DepthCapError
from qlevy.fock import (
    FockVector,
    ProcessSpec,
    apply_annihilation,
    apply_creation,
    apply_field,
    mixed_vacuum_moment,
    vacuum_moment,
)
from qlevy.grids import Grid, Interval
from qlevy.kernels import (
    ConstantKernel,
    ExponentialKernel,
    GaussQuad,
    GridQuad,
    double_integral,
    sample_grid,
)
from qlevy.wick import constant_q_moment, mixed_moment_kernel


def make_spec(q0=0.5, n=4, horizon=1.0, drift=0.0, kernel=None):
    return ProcessSpec(kernel or ConstantKernel(q0), Grid(n, horizon), drift)


def assert_vectors_close(u, v, tol=1e-12):
    keys = set(u.amplitudes) | set(v.amplitudes)
    for key in keys:
        assert u.amplitude(key) == pytest.approx(v.amplitude(key), abs=tol), key


# ---------------------------------------------------------------------------
# single operators


def test_creation_on_vacuum():
    spec = make_spec()
    v = apply_creation(spec, 2, FockVector.vacuum(2))
    assert dict(v.amplitudes) == {(2,): 1.0}
    w = apply_creation(spec, 3, v)
    assert dict(w.amplitudes) == {(3, 2): 1.0}


def test_creation_is_linear():
    spec = make_spec()
    u = FockVector({(1,): 2.0, (2,): -1.0}, 2)
    v = FockVector({(2,): 0.5, (3, 1): 4.0}, 2)
    left = apply_creation(spec, 4, u + v)
    right = apply_creation(spec, 4, u) + apply_creation(spec, 4, v)
    assert_vectors_close(left, right)


def test_creation_truncates_at_depth():
    spec = make_spec()
    top = FockVector({(1, 2): 1.0}, 2)
    assert dict(apply_creation(spec, 1, top).amplitudes) == {}


def test_annihilation_base_cases():
    spec = make_spec(q0=0.5, n=4, horizon=1.0)
    delta = spec.grid.delta
    assert dict(apply_annihilation(spec, 1, FockVector.vacuum(2)).amplitudes) == {}
    single = FockVector({(3,): 1.0}, 2)
    out = apply_annihilation(spec, 3, single)
    assert dict(out.amplitudes) == {(): pytest.approx(delta)}
    assert dict(apply_annihilation(spec, 2, single).amplitudes) == {}


def test_annihilation_deformed_weight():
    kernel = ExponentialKernel(0.5, 1.0)
    spec = make_spec(kernel=kernel, n=4, horizon=1.0)
    qmat = sample_grid(kernel, 4, 1.0)
    delta = spec.grid.delta
    v = FockVector({(2, 3): 1.0}, 2)  # annihilate cell 3 at position 2
    out = apply_annihilation(spec, 3, v)
    assert out.amplitude((2,)) == pytest.approx(qmat[2, 1] * delta, rel=1e-15)


def test_operator_cell_range_checks():
    spec = make_spec()
    with pytest.raises(ValueError):
        apply_creation(spec, 0, FockVector.vacuum(1))
    with pytest.raises(ValueError):
        apply_annihilation(spec, 5, FockVector.vacuum(1))


# ---------------------------------------------------------------------------
# field operator


def test_field_on_vacuum_spreads_over_cells():
    spec = make_spec(n=4, horizon=1.0)
    v = apply_field(spec, Interval(0.25, 0.75), FockVector.vacuum(2))
    assert dict(v.amplitudes) == {(2,): 1.0, (3,): 1.0}


def test_field_on_vacuum_with_drift():
    spec = make_spec(n=4, horizon=1.0, drift=0.8)
    v = apply_field(spec, Interval(0.0, 0.5), FockVector.vacuum(2))
    assert v.amplitude(()) == pytest.approx(0.8 * 0.5)
    assert v.amplitude((1,)) == 1.0
    assert v.amplitude((2,)) == 1.0


def test_field_on_zero_vector():
    spec = make_spec()
    zero = FockVector({}, 2)
    assert dict(apply_field(spec, Interval(0, 1), zero).amplitudes) == {}


def test_field_additive_over_interval_split():
    spec = make_spec(n=8, horizon=2.0)
    state = apply_field(spec, Interval(0.0, 2.0), FockVector.vacuum(3))
    state = apply_field(spec, Interval(0.25, 1.5), state)
    whole = apply_field(spec, Interval(0.0, 1.0), state)
    left = apply_field(spec, Interval(0.0, 0.5), state)
    right = apply_field(spec, Interval(0.5, 1.0), state)
    assert_vectors_close(whole, left + right)


def test_field_matches_dictionary_reference():
    # the array hot path must agree with the single-cell dictionary ops
    kernel = ExponentialKernel(0.7, 1.3)
    spec = ProcessSpec(kernel, Grid(6, 3.0), drift=0.4)
    rng = random.Random(6)
    state = FockVector.vacuum(3)
    interval = Interval(0.5, 2.5)
    for _ in range(3):
        state = apply_field(spec, interval, state)
    cells = spec.grid.cells(interval)
    reference = len(cells) * spec.grid.delta * spec.drift * state
    for c in cells:
        reference = reference + apply_creation(spec, c, state)
        reference = reference + apply_annihilation(spec, c, state)
    assert_vectors_close(apply_field(spec, interval, state), reference, tol=1e-13)


def test_field_requires_alignment():
    spec = make_spec(n=4, horizon=1.0)
    with pytest.raises(AlignmentError):
        apply_field(spec, Interval(0.0, 0.3), FockVector.vacuum(2))
    with pytest.raises(AlignmentError):
        apply_field(spec, Interval(0.5, 1.5), FockVector.vacuum(2))


# ---------------------------------------------------------------------------
# vacuum moments


def test_second_moment_is_unit_time():
    for kernel in (ConstantKernel(-0.7), ExponentialKernel(0.9, 2.0)):
        for n in (1, 2, 5, 8):
            spec = ProcessSpec(kernel, Grid(n, 1.0))
            assert vacuum_moment(spec, Interval(0, 1), 2) == pytest.approx(
                1.0, rel=1e-14
            )


def test_fourth_moment_constant_kernel():
    spec = make_spec(q0=0.5, n=8, horizon=1.0)
    assert vacuum_moment(spec, Interval(0, 1), 4) == pytest.approx(2.5, rel=1e-13)


def test_first_moment_with_drift():
    spec = make_spec(q0=0.3, n=8, horizon=2.0, drift=0.7)
    for t in (0.25, 1.0, 2.0):
        assert vacuum_moment(spec, Interval(0, t), 1) == pytest.approx(
            0.7 * t, rel=1e-14
        )


def test_odd_moments_vanish_when_centered():
    spec = make_spec(q0=0.5, n=4, horizon=1.0)
    for n in (1, 3, 5):
        assert vacuum_moment(spec, Interval(0, 1), n) == 0.0


def test_depth_cap_errors_and_sufficiency():
    spec = make_spec(q0=0.4, n=4, horizon=1.0)
    with pytest.raises(DepthCapError):
        vacuum_moment(spec, Interval(0, 1), 4, depth=1)
    minimal = vacuum_moment(spec, Interval(0, 1), 6, depth=3)
    padded = vacuum_moment(spec, Interval(0, 1), 6, depth=6)
    assert minimal == pytest.approx(padded, abs=1e-14)


def test_oracle_equivalence_constant_q():
    for q0 in (-1.0, -0.5, 0.0, 0.5, 1.0):
        spec = make_spec(q0=q0, n=8, horizon=1.0)
        for n in range(1, 9):
            fock = vacuum_moment(spec, Interval(0, 1), n)
            wick = constant_q_moment(q0, n, 1.0)
            assert abs(fock - wick) <= 1e-10 * max(1.0, abs(wick)), (q0, n)


def test_oracle_equivalence_kernel_grid_mode():
    kernel = ExponentialKernel(0.5, 1.0)
    interval = Interval(0, 1)
    for n_cells in (4, 8, 16):
        grid = Grid(n_cells, 1.0)
        spec = ProcessSpec(kernel, grid)
        for n in (2, 4, 6):
            fock = vacuum_moment(spec, interval, n)
            wick = mixed_moment_kernel(kernel, [interval] * n, GridQuad(grid))
            assert abs(fock - wick) <= 1e-10 * max(1.0, abs(wick)), (n_cells, n)


def test_convergence_to_continuum_second_order():
    # Quartering per doubling: the offset sampling is midpoint-symmetric
    # around the kernel kink, one order better than the O(1/N) guarantee.
    kernel = ExponentialKernel(0.5, 1.0)
    interval = Interval(0, 1)
    exact = mixed_moment_kernel(kernel, [interval] * 4, GaussQuad(24))
    errors = []
    for n_cells in (4, 8, 16, 32):
        spec = ProcessSpec(kernel, Grid(n_cells, 1.0))
        errors.append(abs(vacuum_moment(spec, interval, 4) - exact))
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.3 <= coarse / fine <= 4.7


def test_mixed_moment_crossing_word_equals_double_integral():
    kernel = ExponentialKernel(0.5, 1.0)
    grid = Grid(16, 4.0)
    spec = ProcessSpec(kernel, grid)
    i, j = Interval(0, 1), Interval(2, 3)
    fock = mixed_vacuum_moment(spec, [i, j, i, j])
    integral = double_integral(kernel, i, j, GridQuad(grid))
    assert fock == pytest.approx(integral, abs=1e-12)


def test_mixed_moment_disjoint_pair_vanishes():
    spec = make_spec(q0=0.5, n=8, horizon=4.0)
    assert mixed_vacuum_moment(spec, [Interval(0, 1), Interval(2, 3)]) == 0.0


def test_cyclic_invariance_on_grid():
    kernel = ExponentialKernel(0.8, 0.9)
    spec = ProcessSpec(kernel, Grid(12, 6.0))
    rng = random.Random(13)
    for _ in range(10):
        word = []
        for _ in range(4):
            a = rng.randint(0, 4)
            word.append(Interval(float(a), float(a + rng.randint(1, 2))))
        base = mixed_vacuum_moment(spec, word)
        rotated = word[1:] + word[:1]
        assert mixed_vacuum_moment(spec, rotated) == pytest.approx(base, abs=1e-12)


def test_stationarity_on_grid():
    kernel = ExponentialKernel(0.5, 1.0)
    spec = ProcessSpec(kernel, Grid(16, 4.0))
    base = vacuum_moment(spec, Interval(0.0, 1.0), 4)
    for s in (0.25, 1.0, 2.75):
        shifted = vacuum_moment(spec, Interval(s, s + 1.0), 4)
        assert shifted == pytest.approx(base, abs=1e-12)


def test_pyramidal_independence_on_grid():
    i, j = Interval(0.0, 1.0), Interval(2.0, 3.0)
    for kernel in (ConstantKernel(0.6), ExponentialKernel(0.8, 1.2)):
        spec = ProcessSpec(kernel, Grid(8, 4.0))
        lhs = mixed_vacuum_moment(spec, [i, j, j, i])
        rhs = mixed_vacuum_moment(spec, [i, i]) * mixed_vacuum_moment(spec, [j, j])
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_eight_point_mixed_word_matches_wick_grid():
    # length-8 word over disjoint intervals: the fully crossing pairing
    # couples four pair variables, the deepest cluster the engines allow
    kernel = ExponentialKernel(0.7, 0.3)
    grid = Grid(16, 8.0)
    spec = ProcessSpec(kernel, grid)
    word = [
        Interval(0.0, 1.0), Interval(2.0, 3.0), Interval(4.0, 5.0),
        Interval(6.0, 7.0),
    ] * 2
    fock = mixed_vacuum_moment(spec, word)
    wick = mixed_moment_kernel(kernel, word, GridQuad(grid))
    assert fock == pytest.approx(wick, rel=1e-10)
    assert abs(fock) > 1e-6  # the crossing cluster actually contributes


def test_vector_validation():
    with pytest.raises(ValueError):
        FockVector({(1, 2): 1.0}, 1)
    with pytest.raises(ValueError):
        FockVector({(0,): 1.0}, 1)
    v = FockVector({(1,): 0.0, (2,): 3.0}, 1)
    assert dict(v.amplitudes) == {(2,): 3.0}  # exact zeros are dropped
    with pytest.raises(ValueError):
        mixed_vacuum_moment(make_spec(), [])

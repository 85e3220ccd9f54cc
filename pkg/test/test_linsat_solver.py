import numpy as np
import pytest

from unittest.mock import patch

from assemblyline_setcover.exceptions import GuardExceeded, HypothesisViolation, SoundnessError
from assemblyline_setcover.instances import LinSatInstance, RandomSeed, brute_force_linsat, verify_linsat
from assemblyline_setcover.linsat_solver import (Gf2Matrix, algorithm_a4, default_trials, isd_fallback, linsat_exponent,
                                                 list1, list2)


def identity(n):
    return Gf2Matrix(np.eye(n, dtype=np.uint8))


def identity_instance(b, t, n=4):
    return LinSatInstance(n, n, tuple(1 << r for r in range(n)), b, (1,) * n, t)


def full_rank_instance(seed, rows=5, extra=2):
    rng = RandomSeed(seed).rng()
    columns = [1 << r for r in range(rows)] + [int(x) for x in rng.integers(0, 1 << rows, size=extra)]
    columns = [columns[i] for i in rng.permutation(len(columns))]
    weights = [int(w) for w in rng.integers(1, 6, size=len(columns))]
    b = int(rng.integers(1, 1 << rows))
    t = int(rng.integers(0, 16))
    return LinSatInstance(rows, len(columns), tuple(columns), b, tuple(weights), t)


def random_instance(seed):
    rng = RandomSeed(seed).rng()
    rows = int(rng.integers(3, 7))
    m = int(rng.integers(3, 9))
    columns = tuple(int(x) for x in rng.integers(0, 1 << rows, size=m))
    weights = tuple(int(w) for w in rng.integers(1, 6, size=m))
    return LinSatInstance(rows, m, columns, int(rng.integers(1, 1 << rows)), weights, int(rng.integers(0, 15)))


def test_matrix_basics():
    a = Gf2Matrix.from_columns([0b01, 0b10, 0b11], 2)
    assert a.rows == 2 and a.cols == 3
    assert a.columns() == [0b01, 0b10, 0b11]
    assert a.apply(0b011) == 0b11
    assert a.apply(0b111) == 0
    assert np.array_equal((identity(2) @ a).data, a.data)


def test_matrix_rank_and_solve():
    assert Gf2Matrix([[1, 1], [1, 1]]).rank() == 1
    assert identity(3).rank() == 3
    assert Gf2Matrix(np.zeros((3, 3))).rank() == 0

    a = Gf2Matrix([[1, 1, 0], [0, 1, 1]])
    for b in range(4):
        x = a.solve(b)
        assert x is not None
        assert a.apply(x) == b
    assert Gf2Matrix([[1], [1]]).solve(0b01) is None
    assert Gf2Matrix([[1], [1]]).solve(0b11) == 1


@pytest.mark.parametrize("seed", range(10))
def test_column_basis_spans(seed):
    rng = RandomSeed(seed).rng()
    a = Gf2Matrix.random(5, 7, rng)
    basis = a.column_basis()
    assert len(basis) == a.rank()
    sub = Gf2Matrix(a.data[:, basis])
    assert sub.rank() == len(basis)
    for column in a.columns():
        assert a.solve(column) is not None


def test_list2():
    assert list2(Gf2Matrix([[1, 0]]), 1, 1) == [0b01]
    assert list2(Gf2Matrix([[1, 1]]), 0, 2) == [0b11]
    assert list2(Gf2Matrix([[1, 1]]), 1, 2) == []
    assert list2(identity(3), 0b101, 2) == [0b101]
    assert list2(identity(3), 0, 0) == [0]
    assert list2(identity(3), 0, 4) == []


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(300))
def test_list2_matches_enumeration(seed):
    rng = RandomSeed(seed).rng()
    a = Gf2Matrix.random(3, 8, rng)
    b = int(rng.integers(0, 8))
    solutions = [x for x in range(1 << 8) if a.apply(x) == b]
    for s2 in range(5):
        assert list2(a, b, s2) == [x for x in solutions if bin(x).count('1') == s2]


def test_list2_guard():
    with patch('assemblyline_setcover.config.LIST2_MAX_STATES', 10):
        with pytest.raises(GuardExceeded):
            list2(identity(4), 0b11, 2)


def test_list1_rejects_odd_weight():
    with pytest.raises(HypothesisViolation):
        list1(identity(4), 0b11, 3, 0)
    assert list1(identity(4), 0, 0, 0) == [0]
    assert list1(identity(4), 0b1, 0, 0) == []


def test_list1_finds_solution_often():
    a = identity(4)
    found = 0
    for seed in range(100):
        listed = list1(a, 0b0011, 2, seed)
        assert all(a.apply(x) == 0b0011 and bin(x).count('1') == 2 for x in listed)
        found += 0b0011 in listed
    assert found >= 25


def test_default_trials():
    assert default_trials(4) == 8
    assert default_trials(0) == 1


def test_algorithm_a4():
    verdict = algorithm_a4(identity_instance(0b0110, 2), seed=1)
    assert verdict.answer == 'YES'
    assert verdict.certificate == [0, 1, 1, 0]

    assert algorithm_a4(identity_instance(0b0110, 1), seed=1).answer == 'NO'

    zero = algorithm_a4(identity_instance(0, 0), seed=1)
    assert zero.answer == 'YES'
    assert zero.branch == 'trivial'
    assert zero.certificate == [0, 0, 0, 0]

    with patch('assemblyline_setcover.linsat_solver.verify_linsat', return_value=False):
        with pytest.raises(SoundnessError):
            algorithm_a4(identity_instance(0, 0), seed=1)


def test_algorithm_a4_unreachable_target():
    inst = LinSatInstance(3, 2, (0b001, 0b010), 0b100, (1, 1), 10)
    assert algorithm_a4(inst, seed=0, trials=2).answer == 'NO'


@pytest.mark.slow
def test_algorithm_a4_has_no_false_positives():
    no_instances = 0
    for seed in range(6000):
        inst = random_instance(seed)
        if brute_force_linsat(inst).answer == 'YES':
            verdict = algorithm_a4(inst, seed=seed, trials=2)
            if verdict.answer == 'YES':
                assert verify_linsat(inst, verdict.certificate)
            continue
        assert algorithm_a4(inst, seed=seed, trials=2).answer == 'NO'
        no_instances += 1
        if no_instances == 1000:
            break
    assert no_instances == 1000


def planted_instance(seed):
    """Square system with a planted solution of weight at most 2m/3 and a budget equal to its cost"""
    rng = RandomSeed(seed).rng()
    m = int(rng.integers(4, 9))
    weights = tuple(int(w) for w in rng.integers(1, 6, size=m))
    while True:
        columns = tuple(int(c) for c in rng.integers(0, 1 << m, size=m))
        support = rng.choice(m, size=int(rng.integers(1, 2 * m // 3 + 1)), replace=False)
        b = 0
        for j in support:
            b ^= columns[j]
        if b:
            return LinSatInstance(m, m, columns, b, weights, sum(weights[j] for j in support))


@pytest.mark.slow
def test_algorithm_a4_finds_planted_solutions():
    misses = 0
    for seed in range(100):
        inst = planted_instance(seed)
        verdict = algorithm_a4(inst, seed=seed)
        if verdict.answer == 'YES':
            assert verify_linsat(inst, verdict.certificate)
        else:
            misses += 1
    assert misses <= 25


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(300))
def test_isd_matches_brute_force(seed):
    inst = full_rank_instance(seed)
    verdict = isd_fallback(inst)
    truth = brute_force_linsat(inst)
    assert verdict.answer == truth.answer
    if verdict.answer == 'YES':
        assert verify_linsat(inst, verdict.certificate)
        assert inst.cost(verdict.certificate) == inst.cost(truth.certificate)


def test_isd_needs_rank():
    inst = LinSatInstance(2, 4, (0b01, 0b01, 0b01, 0b01), 0b01, (1, 1, 1, 1), 4)
    with pytest.raises(HypothesisViolation):
        isd_fallback(inst)


def test_linsat_exponent():
    sigma, value = linsat_exponent()
    assert sigma == pytest.approx(4 / 9, abs=1e-3)
    assert value == pytest.approx(0.3399, abs=5e-4)

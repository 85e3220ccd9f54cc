import math

import pytest

from assemblyline_setcover.exceptions import GuardExceeded, HypothesisViolation
from assemblyline_setcover.few_sets import algorithm_a3, lambda_r
from assemblyline_setcover.instances import (RandomSeed, SetSystemInstance, brute_force_set_cover,
                                             brute_force_set_partition, mask_of, verify_cover, verify_partition)
from assemblyline_setcover.reductions import COVER, PARTITION


def sets_of(*blocks):
    return tuple(mask_of(block) for block in blocks)


def random_instance(seed):
    rng = RandomSeed(seed).rng()
    n = int(rng.integers(1, 9))
    m = int(rng.integers(1, 9))
    sets = []
    for _ in range(m):
        size = int(rng.integers(1, n + 1))
        sets.append(mask_of(rng.choice(n, size=size, replace=False)))
    return SetSystemInstance(n, tuple(sets), int(rng.integers(0, n + 1)))


@pytest.fixture(scope='function')
def triangle():
    return SetSystemInstance(3, sets_of({0, 1, 2}, {0}, {1}, {2}), 3)


def test_partition_example(triangle):
    verdict = algorithm_a3(triangle, 2, PARTITION)
    assert verdict.answer == 'YES'
    assert verdict.certificate == [1, 2, 3]
    assert verdict.branch == 'branching'

    assert algorithm_a3(triangle.with_target(1), 2, PARTITION).certificate == [0]
    assert algorithm_a3(triangle.with_target(2), 2, PARTITION).answer == 'NO'


def test_cover_example(triangle):
    verdict = algorithm_a3(triangle.with_target(2), 2, COVER)
    assert verdict.answer == 'YES'
    assert verify_cover(triangle.with_target(2), verdict.certificate)

    pairs = SetSystemInstance(4, sets_of({0, 1}, {1, 2}, {2, 3}), 1)
    assert algorithm_a3(pairs, 2, COVER).answer == 'NO'


def test_threshold_above_universe_is_a_single_leaf(triangle):
    assert algorithm_a3(triangle, triangle.n + 1, PARTITION).answer == 'YES'
    assert algorithm_a3(triangle.with_target(2), triangle.n + 1, COVER).answer == 'YES'


def test_zero_target():
    inst = SetSystemInstance(2, sets_of({0}, {1}), 0)
    assert algorithm_a3(inst, 1, COVER).answer == 'NO'
    assert algorithm_a3(inst, 1, PARTITION).answer == 'NO'
    assert algorithm_a3(SetSystemInstance(0, (), 0), 1, PARTITION).answer == 'YES'


def test_empty_sets_fill_partitions():
    inst = SetSystemInstance(2, (0b11, 0, 0), 2, allows_empty=True)
    verdict = algorithm_a3(inst, 1, PARTITION)
    assert verdict.answer == 'YES'
    assert verify_partition(inst, verdict.certificate)
    assert algorithm_a3(inst.with_target(2), 1, COVER).answer == 'YES'


def test_bad_arguments(triangle):
    with pytest.raises(ValueError):
        algorithm_a3(triangle, 2, 'packing')
    with pytest.raises(HypothesisViolation):
        algorithm_a3(triangle, 0, COVER)


def test_partition_size_beyond_profile_word():
    inst = SetSystemInstance(2, (0b11,) + (0,) * 70, 70, allows_empty=True)
    with pytest.raises(GuardExceeded):
        algorithm_a3(inst, 2, PARTITION)
    assert algorithm_a3(inst.with_target(75), 2, PARTITION).answer == 'NO'
    assert algorithm_a3(inst.with_target(63), 2, PARTITION).answer == 'YES'


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(300))
def test_matches_brute_force(seed):
    inst = random_instance(seed)
    r = 2 + seed % 2
    cover = algorithm_a3(inst, r, COVER)
    assert cover.answer == brute_force_set_cover(inst).answer
    if cover.answer == 'YES':
        assert verify_cover(inst, cover.certificate)
    partition = algorithm_a3(inst, r, PARTITION)
    assert partition.answer == brute_force_set_partition(inst).answer
    if partition.answer == 'YES':
        assert verify_partition(inst, partition.certificate)


def test_lambda_r_values():
    assert lambda_r(3) == pytest.approx(0.8231, abs=1e-3)
    assert lambda_r(2) == pytest.approx(2 / math.sqrt(9 - 2 * math.log(2)))
    with pytest.raises(HypothesisViolation):
        lambda_r(1)


def test_lambda_r_sandwich():
    previous = lambda_r(2)
    for r in range(3, 65):
        value = lambda_r(r)
        assert 0.5 <= value <= (2 * r - 2) / (2 * r - 1.5)
        assert value > previous
        previous = value
    assert lambda_r(1000) == pytest.approx(1.0, abs=1e-3)

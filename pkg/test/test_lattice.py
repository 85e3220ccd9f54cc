import itertools
import math
from collections import Counter

import numpy as np
import pytest

from unittest.mock import patch

from assemblyline_setcover.exceptions import ClosureMismatch, GuardExceeded, HypothesisViolation
from assemblyline_setcover.instances import RandomSeed, mask_of
from assemblyline_setcover.lattice import (FamilyOracle, FunctionOracle, LayeredTable, SingletonOracle,
                                           closure_size_bound, closure_size_bound_check, compose_weight_profiles,
                                           down_closure, full_lattice, moebius_on_closure, tuple_cover_counts,
                                           zeta_on_closure)
from assemblyline_setcover.sampled_solver import unrank_subset


def singleton_layer(dc):
    f = LayeredTable.zeros(dc, 'f')
    for pos, mask in enumerate(dc):
        if bin(mask).count('1') == 1:
            f.values[1, pos] = 1
    return f


def test_down_closure():
    assert sorted(full_lattice(3)) == list(range(8))
    dc = down_closure([0b011, 0b110], 3)
    assert sorted(dc) == [0b000, 0b001, 0b010, 0b011, 0b100, 0b110]
    assert len(down_closure([], 3)) == 0


@pytest.mark.parametrize("seed", range(10))
def test_down_closure_is_down_closed(seed):
    rng = RandomSeed(seed).rng()
    n = 10
    family = [int(x) for x in rng.integers(0, 1 << n, size=6)]
    dc = down_closure(family, n)
    members = set(dc)
    expected = set()
    for f in family:
        sub = f
        while True:
            expected.add(sub)
            if sub == 0:
                break
            sub = (sub - 1) & f
    assert members == expected
    # Members come after all of their subsets
    sizes = [bin(x).count('1') for x in dc]
    assert sizes == sorted(sizes)


def test_down_closure_guard():
    with patch('assemblyline_setcover.config.MAX_UNIVERSE', 4):
        with pytest.raises(GuardExceeded):
            full_lattice(5)


def test_lattice_member_guard():
    with patch('assemblyline_setcover.config.LATTICE_MAX_MEMBERS', 64):
        assert len(full_lattice(6)) == 64
        with pytest.raises(GuardExceeded):
            full_lattice(7)
        # Eight disjoint pairs close to 1 + 8 * 3 members
        pairs = [0b11 << (2 * i) for i in range(8)]
        assert len(down_closure(pairs, 16)) == 25
        with pytest.raises(GuardExceeded):
            down_closure([(1 << 7) - 1], 7)


def test_position_lookup():
    dc = down_closure([0b0110, 0b1001], 4)
    assert not hasattr(dc, 'index')
    for pos, mask in enumerate(dc):
        assert dc.position(mask) == pos
        assert mask in dc
    for outside in (0b0111, 0b1111, 1 << 4, -1):
        assert outside not in dc
    with pytest.raises(KeyError):
        dc.position(0b0011)


def test_table_shape_mismatch():
    dc = full_lattice(2)
    with pytest.raises(ClosureMismatch):
        LayeredTable(dc, np.zeros((2, 4), dtype=np.int64), 'f')
    with pytest.raises(ClosureMismatch):
        zeta_on_closure(full_lattice(3), LayeredTable.zeros(dc, 'f'))


def test_zeta():
    dc = full_lattice(2)
    f = LayeredTable.zeros(dc, 'f')
    f.values[1, dc.position(0b01)] = 1
    g = zeta_on_closure(dc, f)
    assert g.at(1, 0b01) == 1
    assert g.at(1, 0b11) == 1
    assert g.at(1, 0b10) == 0
    assert g.at(1, 0b00) == 0

    dc3 = full_lattice(3)
    g3 = zeta_on_closure(dc3, singleton_layer(dc3))
    for mask in dc3:
        assert g3.at(1, mask) == bin(mask).count('1')

    assert not zeta_on_closure(dc3, LayeredTable.zeros(dc3, 'f')).values.any()


def test_compose():
    dc = full_lattice(3)
    g = zeta_on_closure(dc, singleton_layer(dc))
    assert np.array_equal(compose_weight_profiles(g, 1).values, g.values)
    assert compose_weight_profiles(g, 2).at(2, 0b111) == 9

    flat = LayeredTable.zeros(dc, 'g')
    flat.values[1, :] = 2
    h = compose_weight_profiles(flat, 2)
    assert (h.values[2] == 4).all()
    assert not np.delete(h.values, 2, axis=0).any()

    identity = compose_weight_profiles(g, 0)
    assert (identity.values[0] == 1).all()


def test_moebius():
    dc = full_lattice(2)
    ones = LayeredTable(dc, np.ones((3, 4), dtype=np.int64), 'h')
    c = moebius_on_closure(dc, ones)
    assert c.at(0, 0) == 1
    assert all(c.at(0, mask) == 0 for mask in (0b01, 0b10, 0b11))
    assert not moebius_on_closure(dc, LayeredTable.zeros(dc, 'h')).values.any()


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100))
def test_moebius_inverts_zeta(seed):
    rng = RandomSeed(seed).rng()
    n = int(rng.integers(1, 13))
    dc = full_lattice(n)
    f = LayeredTable(dc, rng.integers(-50, 50, size=(n + 1, len(dc))).astype(np.int64), 'f')
    back = moebius_on_closure(dc, zeta_on_closure(dc, f))
    assert np.array_equal(back.values, f.values)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100))
def test_restricted_zeta_matches_full_lattice(seed):
    rng = RandomSeed(seed).rng()
    n = int(rng.integers(1, 13))
    family = [int(x) for x in rng.integers(0, 1 << n, size=4)]
    dc = down_closure(family, n)
    full = full_lattice(n)
    values = rng.integers(0, 5, size=(n + 1, 1 << n)).astype(np.int64)

    f_full = LayeredTable(full, values[:, full.members], 'f')
    f_dc = LayeredTable(dc, values[:, dc.members], 'f')
    g_full = zeta_on_closure(full, f_full)
    g_dc = zeta_on_closure(dc, f_dc)
    for mask in dc:
        for x in range(n + 1):
            assert g_dc.at(x, mask) == g_full.at(x, mask)


def brute_tuple_counts(family, i):
    """Counter of (union, total weight) over all i-tuples of the family"""
    counts = Counter()
    for combo in itertools.product(family, repeat=i):
        union = 0
        for f in combo:
            union |= f
        counts[union, sum(bin(f).count('1') for f in combo)] += 1
    return counts


def test_tuple_cover_counts():
    family = [0b01, 0b10, 0b11]
    dc = full_lattice(2)
    counts = tuple_cover_counts(dc, FamilyOracle(family), i_max=2)
    assert counts[2].at(2, 0b11) == 2
    assert counts[1].at(2, 0b11) == 1

    nothing = tuple_cover_counts(dc, FunctionOracle(lambda mask: False), i_max=3)
    assert all(not table.values.any() for table in nothing.values())


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(300))
def test_tuple_cover_counts_match_brute_force(seed):
    rng = RandomSeed(seed).rng()
    n = 5
    family = [int(x) for x in rng.integers(1, 1 << n, size=4)]
    dc = down_closure([int(x) for x in rng.integers(0, 1 << n, size=3)], n)
    counts = tuple_cover_counts(dc, FamilyOracle(family), i_max=3)
    for i in range(1, 4):
        expected = brute_tuple_counts(family, i)
        for mask in dc:
            for x in range(n + 1):
                assert counts[i].at(x, mask) == expected[mask, x]


def test_oracles():
    assert SingletonOracle()(0b100)
    assert not SingletonOracle()(0b110)
    assert not SingletonOracle()(0)
    family = FamilyOracle([0b11, 0b11, 0b01])
    assert family.multiplicity(0b11) == 2
    assert family(0b01) and not family(0b10)


def test_closure_size_bound():
    rng = RandomSeed(3).rng()
    n = 16
    family = [unrank_subset(int(rank), n, 8) for rank in rng.choice(math.comb(n, 8), size=2 ** 12, replace=False)]
    assert closure_size_bound_check(n, 0.25, 0, family)
    assert closure_size_bound_check(8, 0.25, 0, [])

    with pytest.raises(HypothesisViolation):
        closure_size_bound_check(16, 0.25, 0.1, [])
    with pytest.raises(HypothesisViolation):
        closure_size_bound_check(8, 0.25, 0, [mask_of(range(6))])


@pytest.mark.slow
@pytest.mark.parametrize("n", [12, 16, 20])
def test_closure_size_bound_holds_on_random_families(n):
    zeta, beta = 0.24, 0.0
    rng = RandomSeed(n).rng()
    budget = int(2 ** ((1 - zeta) * n))
    for trial in range(100):
        size = int(rng.integers(1, min(budget, 128) + 1))
        ranks = rng.choice(math.comb(n, n // 2), size=min(size, math.comb(n, n // 2)), replace=False)
        family = [unrank_subset(int(rank), n, n // 2) for rank in ranks]
        assert len(down_closure(family, n)) <= closure_size_bound(n, zeta)
        assert closure_size_bound_check(n, zeta, beta, family)

"""
Subset-lattice machinery restricted to down-closed families.

Every table here is indexed by the members of a DownClosure rather than by
all 2^n subsets. The transforms only ever look from X to X minus one
element, which stays inside a down-closed family.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from assemblyline_setcover import config as cfg
from assemblyline_setcover.exceptions import ClosureMismatch, CountOverflowError, HypothesisViolation, check_guard

log = logging.getLogger('assemblyline.setcover.lattice')

INT64_LIMIT = 2 ** 63
KINDS = {'f', 'g', 'h', 'c'}


def popcounts(masks: np.ndarray, n: int) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    for j in range(n):
        counts += (masks >> j) & 1
    return counts


class DownClosure:
    """A down-closed family of subsets of {0..n-1}.

    Members are sorted by (size, value), so every subset comes after all of its proper subsets. Lookups
    binary-search a value-sorted copy of the members.
    """

    def __init__(self, n: int, members: np.ndarray):
        self.n = n
        self.members = members
        self.sizes = popcounts(members, n)
        self._by_value = np.argsort(members, kind='stable')
        self._sorted = members[self._by_value]
        self._sweeps = {}

    def __len__(self):
        return len(self.members)

    def __contains__(self, mask):
        return self._find(int(mask)) is not None

    def __iter__(self):
        return (int(x) for x in self.members)

    def _find(self, mask: int) -> Optional[int]:
        if mask < 0 or mask >> self.n:
            return None
        where = int(np.searchsorted(self._sorted, mask))
        if where == len(self._sorted) or int(self._sorted[where]) != mask:
            return None
        return int(self._by_value[where])

    def position(self, mask: int) -> int:
        pos = self._find(int(mask))
        if pos is None:
            raise KeyError(mask)
        return pos

    def positions(self, masks: np.ndarray) -> np.ndarray:
        """Vectorised position lookup; every mask must be a member"""
        where = np.searchsorted(self._sorted, masks)
        return self._by_value[where]

    def sweep(self, j: int):
        """(positions of members containing element j, positions of those members without j)"""
        if j not in self._sweeps:
            bit = np.int64(1) << np.int64(j)
            pos = np.flatnonzero(self.members & bit)
            self._sweeps[j] = (pos, self.positions(self.members[pos] ^ bit))
        return self._sweeps[j]


def down_closure(family: Iterable[int], n: Optional[int] = None) -> DownClosure:
    family = [int(f) for f in family]
    if n is None:
        n = max((f.bit_length() for f in family), default=0)
    check_guard(n, cfg.MAX_UNIVERSE, 'universe size')

    buckets: Dict[int, list] = {}
    for f in family:
        if f >> n:
            raise ValueError(f"subset {f:b} does not fit in a universe of {n} elements")
        buckets.setdefault(bin(f).count('1'), []).append(f)

    levels, total = [], 0
    for size in range(n, -1, -1):
        chunks = buckets.get(size)
        if not chunks:
            continue
        level = np.unique(np.concatenate([np.atleast_1d(np.asarray(c, dtype=np.int64)) for c in chunks]))
        total += level.size
        check_guard(total, cfg.LATTICE_MAX_MEMBERS, 'closure members')
        levels.append(level)
        if size == 0:
            continue
        children = []
        for j in range(n):
            bit = np.int64(1) << np.int64(j)
            with_bit = level[(level & bit) != 0]
            if with_bit.size:
                children.append(with_bit ^ bit)
        buckets.setdefault(size - 1, []).extend(children)

    if not levels:
        return DownClosure(n, np.zeros(0, dtype=np.int64))
    members = np.concatenate(levels[::-1])
    order = np.lexsort((members, popcounts(members, n)))
    return DownClosure(n, members[order])


def full_lattice(n: int) -> DownClosure:
    check_guard(n, cfg.MAX_UNIVERSE, 'universe size')
    check_guard(1 << n, cfg.LATTICE_MAX_MEMBERS, 'lattice members')
    masks = np.arange(1 << n, dtype=np.int64)
    return DownClosure(n, masks[np.lexsort((masks, popcounts(masks, n)))])


@dataclass
class LayeredTable:
    """Integer values per (cardinality index x, closure member)"""
    closure: DownClosure
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown table kind {self.kind}")
        if self.values.shape != (self.closure.n + 1, len(self.closure)):
            raise ClosureMismatch(f"table of shape {self.values.shape} does not match a closure of "
                                  f"{len(self.closure)} members over {self.closure.n} elements")

    def at(self, x: int, mask: int) -> int:
        return int(self.values[x, self.closure.position(mask)])

    @classmethod
    def zeros(cls, dc: DownClosure, kind: str) -> 'LayeredTable':
        return cls(dc, np.zeros((dc.n + 1, len(dc)), dtype=np.int64), kind)


def _attached(dc: DownClosure, table: LayeredTable):
    if table.closure is not dc and not (table.closure.n == dc.n and
                                        np.array_equal(table.closure.members, dc.members)):
        raise ClosureMismatch("table is indexed by a different down-closure")


def _check_sum_bound(table: LayeredTable, terms: int, what: str):
    peak = int(np.abs(table.values).max(initial=0))
    if peak * terms >= INT64_LIMIT:
        raise CountOverflowError(f"{what} may exceed 64-bit counts (max |value| {peak}, {terms} terms)")


def zeta_on_closure(dc: DownClosure, f_layer: LayeredTable) -> LayeredTable:
    """g_x(Y) = sum of f_x(X) over X subset of Y, one element sweep at a time"""
    _attached(dc, f_layer)
    _check_sum_bound(f_layer, max(len(dc), 1), 'zeta transform')
    g = f_layer.values.copy()
    for j in range(dc.n):
        pos, src = dc.sweep(j)
        g[:, pos] += g[:, src]
    return LayeredTable(dc, g, 'g')


def moebius_on_closure(dc: DownClosure, h_layer: LayeredTable) -> LayeredTable:
    """c(X) = sum over Z subset of X of (-1)^|Z| h(X minus Z)"""
    _attached(dc, h_layer)
    _check_sum_bound(h_layer, max(len(dc), 1), 'Moebius inversion')
    h = h_layer.values.copy()
    for j in range(dc.n):
        pos, src = dc.sweep(j)
        h[:, pos] -= h[:, src]
    return LayeredTable(dc, h, 'c')


def _truncated_product(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    degree = left.shape[0]
    out = np.zeros_like(left)
    for a in range(degree):
        out[a:] += left[a] * right[:degree - a]
    return out


def _check_product_bound(left: np.ndarray, right: np.ndarray):
    # Each output entry is at most the product of the column sums
    lsum = np.abs(left).sum(axis=0, dtype=np.float64)
    rsum = np.abs(right).sum(axis=0, dtype=np.float64)
    if lsum.size and float((lsum * rsum).max()) >= INT64_LIMIT / 2:
        raise CountOverflowError("weight composition may exceed 64-bit counts")


def compose_weight_profiles(g: LayeredTable, i: int) -> LayeredTable:
    """h_{x,i}(X): coefficient of z^x in (sum_x g_x(X) z^x)^i, truncated at degree n"""
    if i < 0:
        raise ValueError("composition power must be nonnegative")
    dc = g.closure
    if i == 0:
        h = np.zeros_like(g.values)
        h[0, :] = 1
        return LayeredTable(dc, h, 'h')
    h = g.values.copy()
    for _ in range(i - 1):
        _check_product_bound(h, g.values)
        h = _truncated_product(h, g.values)
    return LayeredTable(dc, h, 'h')


#################################################################
# Oracles

class SetOracle:
    """Answers whether some family set has exactly the neighbourhood X.

    Implementations must be deterministic and safe to call from several threads.
    """
    cost_bound = 1  # Declared cost of one query, reported per layer by the oracle halve search

    def __call__(self, mask: int) -> bool:
        raise NotImplementedError()

    def multiplicity(self, mask: int) -> int:
        return 1 if self(mask) else 0


class FamilyOracle(SetOracle):
    """Oracle over an explicit family; multiplicities count duplicate sets"""

    def __init__(self, sets: Iterable[int]):
        self.counts = Counter(int(f) for f in sets)

    def __call__(self, mask):
        return self.counts.get(int(mask), 0) > 0

    def multiplicity(self, mask):
        return self.counts.get(int(mask), 0)


class SingletonOracle(SetOracle):
    def __call__(self, mask):
        mask = int(mask)
        return mask != 0 and mask & (mask - 1) == 0


class FunctionOracle(SetOracle):
    def __init__(self, fn: Callable[[int], bool], cost_bound: int = 1):
        self.fn = fn
        self.cost_bound = cost_bound

    def __call__(self, mask):
        return bool(self.fn(int(mask)))


def oracle_f_layer(dc: DownClosure, oracle: SetOracle, skip_empty: bool = False) -> LayeredTable:
    f = LayeredTable.zeros(dc, 'f')
    for pos, (mask, size) in enumerate(zip(dc.members, dc.sizes)):
        if skip_empty and mask == 0:
            continue
        f.values[size, pos] = oracle.multiplicity(int(mask))
    return f


def tuple_cover_counts(dc: DownClosure, oracle: SetOracle, i_max: int, skip_empty: bool = False,
                       max_weight: Optional[int] = None) -> Dict[int, LayeredTable]:
    """Exact counts c'_{x,i}(X) of ordered i-tuples with union X and total size x, for 1 <= i <= i_max.

    With max_weight set, only the rows x <= max_weight are computed; the rest stay zero.
    """
    top = dc.n if max_weight is None else min(dc.n, max_weight)
    f = oracle_f_layer(dc, oracle, skip_empty=skip_empty)
    g = zeta_on_closure(dc, f).values[:top + 1]
    counts = {}
    h = None
    for i in range(1, i_max + 1):
        if h is None:
            h = g.copy()
        else:
            _check_product_bound(h, g)
            h = _truncated_product(h, g)
        full = np.zeros((dc.n + 1, len(dc)), dtype=np.int64)
        full[:top + 1] = h
        counts[i] = moebius_on_closure(dc, LayeredTable(dc, full, 'h'))
    return counts


#################################################################
# Closure size accounting

def closure_size_bound(n: int, zeta: float) -> float:
    return n * 2.0 ** ((1 - (zeta / 2) ** 4) * n)


def closure_size_bound_check(n: int, zeta: float, beta: float, family: Iterable[int]) -> bool:
    """Whether the down-closure of a sparse family of near-half subsets stays below n*2^((1-(zeta/2)^4)n).

    The guarantee only holds for 2*sqrt(|beta|) <= zeta <= 1/4, families of subsets of size at most
    (1/2+beta)n and at most 2^((1-zeta)n) members; anything else is refused.
    """
    family = [int(f) for f in family]
    if n < 1:
        raise HypothesisViolation("closure size bound needs a nonempty universe")
    if not 2 * math.sqrt(abs(beta)) <= zeta + 1e-12 or zeta > 0.25:
        raise HypothesisViolation(f"need 2*sqrt(|beta|) <= zeta <= 1/4, got zeta={zeta} beta={beta}")
    if len(family) > 2 ** ((1 - zeta) * n) * (1 + 1e-9):
        raise HypothesisViolation(f"family of {len(family)} subsets exceeds 2^((1-zeta)n)")
    largest = math.floor((0.5 + beta) * n + 1e-9)
    if any(bin(f).count('1') > largest for f in family):
        raise HypothesisViolation(f"family holds subsets larger than (1/2+beta)n={largest}")

    size = len(down_closure(family, n))
    exponent = (1 - (zeta / 2) ** 4) * n
    whole = math.floor(exponent)
    # Integer comparisons settle everything except the last fractional power of two
    if size <= n << whole:
        return True
    if size > n << (whole + 1):
        return False
    return size <= closure_size_bound(n, zeta)

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Tuple, Union

from assemblyline_setcover import config as cfg
from assemblyline_setcover.dp_core import cover_table
from assemblyline_setcover.exceptions import ReductionError, check_guard
from assemblyline_setcover.instances import LinSatInstance, SetSystemInstance, popcount
from assemblyline_setcover.models import Verdict, make_verdict

log = logging.getLogger('assemblyline.setcover.reductions')

COVER = 'cover'
PARTITION = 'partition'
MODES = (COVER, PARTITION)


@dataclass(frozen=True)
class ResolvedYes:
    """A reduction settled the instance; certificate is a cover of the original instance"""
    certificate: Tuple[int, ...]


def size_limit(eps: float, n: int) -> int:
    """Largest set size kept at threshold eps: floor(eps*n), but never below one element"""
    return max(1, math.floor(eps * n + 1e-9))


#################################################################
# Solution size and large sets

def _admissible_tuples(inst: SetSystemInstance, c: int, mode: str):
    if mode == COVER:
        yield from itertools.product(range(inst.m), repeat=c)
        return
    for combo in itertools.permutations(range(inst.m), c):
        union = 0
        for i in combo:
            if union & inst.sets[i]:
                break
            union |= inst.sets[i]
        else:
            yield combo


def reduce_solution_size_with_origins(inst: SetSystemInstance, c: int,
                                      mode: str) -> Tuple[SetSystemInstance, List[Tuple[int, ...]]]:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode}")
    if c < 1 or inst.s % c:
        raise ReductionError(f"tuple size c={c} must divide the target s={inst.s}")
    if mode == PARTITION and inst.has_empty:
        raise ReductionError("partition tuples need a family without empty sets")
    check_guard(inst.m ** c, cfg.REDUCTION_MAX_SETS, 'tuple family size')

    origins = list(_admissible_tuples(inst, c, mode))
    sets = []
    for combo in origins:
        union = 0
        for i in combo:
            union |= inst.sets[i]
        sets.append(union)
    reduced = SetSystemInstance(inst.n, tuple(sets), inst.s // c, allows_empty=any(f == 0 for f in sets))
    return reduced, origins


def reduce_solution_size(inst: SetSystemInstance, c: int, mode: str) -> SetSystemInstance:
    """One set per admissible ordered c-tuple, target s/c"""
    return reduce_solution_size_with_origins(inst, c, mode)[0]


def remove_large_sets_with_origins(inst: SetSystemInstance, eps: float):
    if not 0 < eps < 1:
        raise ReductionError(f"large-set threshold eps={eps} must lie in (0, 1)")
    limit = size_limit(eps, inst.n)
    kept = []
    for index, f in enumerate(inst.sets):
        if popcount(f) <= limit:
            kept.append(index)
            continue
        # Is there a cover through f? The rest of U must be coverable with s-1 sets
        rest = inst.universe & ~f
        if inst.s >= 1 and cover_table(inst).min_cover(rest) <= inst.s - 1:
            certificate = (index,) + tuple(cover_table(inst).certificate(rest))
            log.debug(f"Large set {index} completes a cover of size {len(certificate)}")
            return ResolvedYes(certificate), None
    reduced = SetSystemInstance(inst.n, tuple(inst.sets[i] for i in kept), inst.s, allows_empty=inst.allows_empty)
    return reduced, kept


def remove_large_sets(inst: SetSystemInstance, eps: float) -> Union[ResolvedYes, SetSystemInstance]:
    """Settle every set larger than max(1, floor(eps*n)) with the cover DP, then drop them all"""
    return remove_large_sets_with_origins(inst, eps)[0]


#################################################################
# Set Cover -> Set Partition

def expand_subsets(inst: SetSystemInstance, eps: float) -> Tuple[SetSystemInstance, List[Optional[int]]]:
    """The family of all subsets of small sets plus min(s, m) empty sets.

    origins[k] is an original set containing expanded set k (None for the empty sets).
    """
    limit = size_limit(eps, inst.n)
    for index, f in enumerate(inst.sets):
        if popcount(f) > limit:
            raise ReductionError(f"set {index} has {popcount(f)} > {limit} elements, remove large sets first")
    target = min(inst.s, inst.m)
    check_guard(sum((1 << popcount(f)) - 1 for f in inst.sets) + target, cfg.REDUCTION_MAX_SETS,
                'expanded family size')

    seen = set()
    sets, origins = [], []
    for index, f in enumerate(inst.sets):
        # Submasks in increasing order
        sub = 0
        while True:
            sub = (sub - f) & f
            if sub == 0:
                break
            if sub not in seen:
                seen.add(sub)
                sets.append(sub)
                origins.append(index)
    sets.extend([0] * target)
    origins.extend([None] * target)
    return SetSystemInstance(inst.n, tuple(sets), target, allows_empty=True), origins


def cover_to_partition(inst: SetSystemInstance, eps: float) -> SetSystemInstance:
    return expand_subsets(inst, eps)[0]


def partition_certificate_to_cover(certificate, origins) -> List[int]:
    cover = []
    for k in certificate:
        origin = origins[k]
        if origin is not None and origin not in cover:
            cover.append(origin)
    return sorted(cover)


def cover_via_partition(inst: SetSystemInstance, eps: float,
                        partition_solver: Callable[[SetSystemInstance], Verdict]) -> Verdict:
    """Decide Set Cover at size <= s with any Set Partition procedure"""
    reduced, kept = remove_large_sets_with_origins(inst, eps)
    if isinstance(reduced, ResolvedYes):
        return make_verdict(True, certificate=reduced.certificate, branch='large-set')
    expanded, origins = expand_subsets(reduced, eps)
    verdict = partition_solver(expanded)
    if verdict.answer != 'YES':
        return make_verdict(False, branch=verdict.branch)
    local = partition_certificate_to_cover(verdict.certificate, origins)
    return make_verdict(True, certificate=sorted(kept[i] for i in local), branch=verdict.branch)


#################################################################
# Set Partition -> Set Cover

@lru_cache(maxsize=None)
def count_integer_partitions(n: int, k: int) -> int:
    """Number of ways to write n as a sum of exactly k positive parts"""
    if n == 0 and k == 0:
        return 1
    if n <= 0 or k <= 0 or k > n:
        return 0
    return count_integer_partitions(n - 1, k - 1) + count_integer_partitions(n - k, k)


def integer_partitions(n: int, k: int) -> List[Tuple[int, ...]]:
    """All non-increasing k-tuples of positive integers summing to n"""
    check_guard(count_integer_partitions(n, k), cfg.MAX_INTEGER_PARTITIONS, 'integer partitions')
    out = []

    def extend(prefix, remaining, parts, largest):
        if parts == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        # The remaining parts-1 parts need at least one each
        for part in range(min(largest, remaining - parts + 1), 0, -1):
            if part * parts < remaining:
                break
            prefix.append(part)
            extend(prefix, remaining - part, parts - 1, part)
            prefix.pop()

    extend([], n, k, n)
    return out


def tag_by_integer_partition(inst: SetSystemInstance, parts: Tuple[int, ...]) -> SetSystemInstance:
    """Universe gains one tag per part; tag i is glued onto every set of size parts[i]"""
    n = inst.n
    sets = []
    for i, part in enumerate(parts):
        for f in inst.sets:
            if popcount(f) == part:
                sets.append(f | (1 << (n + i)))
    return SetSystemInstance(n + len(parts), tuple(sets), len(parts))


def partition_to_cover(inst: SetSystemInstance, eps: float) -> List[SetSystemInstance]:
    """Set Cover instances, one per integer partition; the input is a YES partition instance iff one of them is
    a YES cover instance at its target"""
    if eps <= 0:
        raise ReductionError("eps must be positive")
    if inst.has_empty:
        raise ReductionError("partition to cover needs a family without empty sets")
    c = max(1, math.ceil(2 / eps - 1e-12))

    # Forced dummy element/singleton pairs round s up to a multiple of c
    dummies = (-inst.s) % c
    padded = SetSystemInstance(inst.n + dummies,
                               inst.sets + tuple(1 << (inst.n + d) for d in range(dummies)),
                               inst.s + dummies)
    reduced = reduce_solution_size(padded, c, PARTITION)
    log.debug(f"Partition to cover: c={c}, {dummies} dummies, {reduced.m} tuple sets, target {reduced.s}")
    return [tag_by_integer_partition(reduced, parts) for parts in integer_partitions(reduced.n, reduced.s)]


def pad_partition_solution_size(inst: SetSystemInstance, eps1: float) -> SetSystemInstance:
    """Tag every set so that all partitions have size s, then pad with empty sets up to eps1*(n+s)"""
    if inst.has_empty:
        raise ReductionError("solution size padding needs a family without empty sets")
    s = inst.s
    total = inst.n + s
    if s > min(eps1, 0.5) * total + 1e-9:
        raise ReductionError(f"target s={s} exceeds min(eps1, 1/2)*(n+s)={min(eps1, 0.5) * total:g}")
    sets = [f | (1 << (inst.n + i)) for f in inst.sets for i in range(s)]
    target = max(s, math.floor(eps1 * total + 1e-9))
    sets.extend([0] * (target - s))
    return SetSystemInstance(total, tuple(sets), target, allows_empty=target > s)


#################################################################
# Set Partition -> Linear Sat

@dataclass(frozen=True)
class LinSatInterpretation:
    """Reads a minimum Linear Sat cost back as a partition size"""
    n: int

    def partition_size(self, min_cost: Optional[int]) -> Optional[int]:
        if min_cost is None:
            return None
        size = min_cost - self.n * self.n
        if 0 <= size <= self.n:
            return size
        return None


def partition_to_linsat(inst: SetSystemInstance) -> Tuple[LinSatInstance, LinSatInterpretation]:
    """Columns are incidence vectors, b is all ones and a set costs n*|N(f)|+1.

    Any odd cover that is not a partition costs at least n(n+2)+1, so a minimum cost of n^2+k means the
    smallest partition has k sets.
    """
    if inst.has_empty:
        raise ReductionError("Linear Sat encoding needs a family without empty sets")
    n = inst.n
    weights = tuple(n * popcount(f) + 1 for f in inst.sets)
    encoded = LinSatInstance(n, inst.m, inst.sets, inst.universe, weights, n * n + inst.s)
    return encoded, LinSatInterpretation(n)


def min_partition_size_from_linsat(inst: SetSystemInstance, min_cost: Optional[int]) -> Optional[int]:
    return LinSatInterpretation(inst.n).partition_size(min_cost)

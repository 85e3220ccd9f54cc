"""
Randomised halve search for large set partitions and covers.

Every YES carries a certificate that has been re-checked against the input, so a
wrong YES surfaces as a SoundnessError instead of an answer.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from assemblyline_setcover import config as cfg
from assemblyline_setcover.dp_core import (PartitionProfile, cover_table, extract_partition, extract_partition_oracle,
                                           partition_profile_on_closure, partition_profile_oracle)
from assemblyline_setcover.exceptions import HypothesisViolation, SoundnessError, check_guard
from assemblyline_setcover.instances import (RandomSeed, SetSystemInstance, SimpleGraph, as_seed, bits_of,
                                             find_coloring, popcount, verify_coloring, verify_cover,
                                             verify_partition)
from assemblyline_setcover.lattice import DownClosure, SetOracle, down_closure
from assemblyline_setcover.models import LayerStats, ParamSchedule, Verdict, make_verdict
from assemblyline_setcover.reductions import (ResolvedYes, expand_subsets, partition_certificate_to_cover,
                                              remove_large_sets_with_origins)
from assemblyline_setcover.witness import schedule_for_sigma

log = logging.getLogger('assemblyline.setcover.sampled_solver')


#################################################################
# Layer sampling

def unrank_subset(rank: int, n: int, k: int) -> int:
    """The k-subset of {0..n-1} with the given colex rank, as a bitmask"""
    mask = 0
    while k > 0:
        n -= 1
        offset = math.comb(n, k)
        if rank >= offset:
            rank -= offset
            k -= 1
            mask |= 1 << n
    return mask


@dataclass
class SampledFamily:
    l: int
    members: List[int]
    complements: List[int]


def sample_layer(n: int, l: int, rate: float, rng: np.random.Generator) -> SampledFamily:
    """Keep each l-subset of the universe independently with probability rate"""
    total = math.comb(n, l)
    count = int(rng.binomial(total, min(rate, 1.0))) if total else 0
    ranks = rng.choice(total, size=count, replace=False) if count else []
    members = [unrank_subset(int(rank), n, l) for rank in ranks]
    universe = (1 << n) - 1
    return SampledFamily(l, members, [universe ^ w for w in members])


#################################################################
# Halve search

@dataclass
class HalveHit:
    w: int
    left: PartitionProfile
    right: PartitionProfile
    i: int
    j: int
    empties: int


def _halve_pass(n: int, s: int, sched: ParamSchedule, seed: RandomSeed, empties: int,
                profile_fn: Callable[[DownClosure], PartitionProfile],
                stats: List[LayerStats], query_cost: int = 0) -> Optional[HalveHit]:
    universe = (1 << n) - 1
    for l in sched.layers:
        family = sample_layer(n, l, sched.sample_rate, seed.derive(l).rng())
        if not family.members:
            stats.append(LayerStats({'layer': l, 'sampled': 0, 'closure_size': 0, 'complement_closure_size': 0}))
            continue
        dc = down_closure(family.members, n)
        dcc = down_closure(family.complements, n)
        stats.append(LayerStats({'layer': l, 'sampled': len(family.members), 'closure_size': len(dc),
                                 'complement_closure_size': len(dcc),
                                 'oracle_cost': (len(dc) + len(dcc)) * query_cost}))
        log.debug(f"Layer {l}: {len(family.members)} sampled, closures {len(dc)} / {len(dcc)}")

        left = profile_fn(dc)
        right = profile_fn(dcc)
        for w in family.members:
            right_sizes = set(right.sizes(universe ^ w))
            if not right_sizes:
                continue
            for i in left.sizes(w):
                for k in range(empties + 1):
                    if s - k - i in right_sizes:
                        return HalveHit(w, left, right, i, s - k - i, k)
    return None


def _search(n: int, s: int, sched: ParamSchedule, seed: RandomSeed, empties: int,
            profile_fn: Callable[[DownClosure], PartitionProfile],
            query_cost: int = 0) -> Tuple[Optional[HalveHit], List[LayerStats]]:
    stats = []
    for trial in range(sched.repeats):
        hit = _halve_pass(n, s, sched, seed.derive(trial), empties, profile_fn, stats, query_cost)
        if hit is not None:
            return hit, stats
    return None, stats


def algorithm_a1(inst: SetSystemInstance, sched: ParamSchedule, seed) -> Verdict:
    """Sampled witness-halve search for a set partition of size exactly s.

    Empty sets are kept out of the closure DP and added back when matching the two halves, so no empty set
    is ever counted on both sides.
    """
    seed = as_seed(seed)
    empty_indices = [index for index, f in enumerate(inst.sets) if f == 0]

    def profile(dc):
        return partition_profile_on_closure(inst, dc, with_empty=False)

    hit, stats = _search(inst.n, inst.s, sched, seed, len(empty_indices), profile)
    if hit is None:
        return make_verdict(False, branch='sampled-halves', layers=stats)

    certificate = (extract_partition(inst, hit.left, hit.w, hit.i) +
                   extract_partition(inst, hit.right, inst.universe ^ hit.w, hit.j) +
                   empty_indices[:hit.empties])
    if not verify_partition(inst, certificate):
        raise SoundnessError(f"halve search produced an invalid partition {certificate}")
    return make_verdict(True, certificate=sorted(certificate), branch='sampled-halves', layers=stats)


def algorithm_a1_oracle(oracle: SetOracle, n: int, s: int, sched: ParamSchedule, seed) -> Verdict:
    """The halve search with the family only reachable through an oracle"""
    seed = as_seed(seed)
    empties = min(oracle.multiplicity(0), s)

    def profile(dc):
        return partition_profile_oracle(oracle, dc, with_empty=False)

    hit, stats = _search(n, s, sched, seed, empties, profile, oracle.cost_bound)
    if hit is None:
        log.debug(f"Oracle halve search: cost bound {sum(layer.oracle_cost for layer in stats)}")
        return make_verdict(False, branch='oracle', layers=stats)

    universe = (1 << n) - 1
    blocks = (extract_partition_oracle(oracle, hit.left, hit.w, hit.i) +
              extract_partition_oracle(oracle, hit.right, universe ^ hit.w, hit.j))
    union = 0
    for block in blocks:
        if union & block or not oracle(block):
            raise SoundnessError("oracle halve search produced overlapping or unknown blocks")
        union |= block
    if union != universe or len(blocks) + hit.empties != s:
        raise SoundnessError("oracle halve search produced an incomplete partition")
    return make_verdict(True, blocks=[bits_of(block) for block in blocks], branch='oracle', layers=stats)


#################################################################
# Large covers

def amplification_rounds(delta: float) -> int:
    if not 0 < delta < 1:
        raise HypothesisViolation(f"failure probability delta={delta} must lie in (0, 1)")
    return max(1, math.ceil(math.log(1 / delta) / math.log(4 / 3) - 1e-9))


def _greedy_cover(inst: SetSystemInstance) -> Optional[List[int]]:
    chosen, covered = [], 0
    for e in range(inst.n):
        if covered >> e & 1:
            continue
        for index, f in enumerate(inst.sets):
            if f >> e & 1:
                chosen.append(index)
                covered |= f
                break
        else:
            return None
    return chosen


def solve_large_cover(inst: SetSystemInstance, sigma: float = None, seed=None, delta: float = 0.25) -> Verdict:
    """Monte Carlo Set Cover at size <= s for large s: never a false YES"""
    seed = as_seed(seed)
    n, s = inst.n, inst.s
    if n == 0:
        return make_verdict(True, certificate=[], branch='trivial')
    if s >= n:
        # One set per element is enough
        cover = _greedy_cover(inst)
        if cover is None:
            return make_verdict(False, branch='trivial')
        return make_verdict(True, certificate=cover, branch='trivial')
    if s == 0:
        return make_verdict(False, branch='trivial')
    sigma = s / n if sigma is None else sigma

    # Sets above sigma^4 n/1000 elements are settled by the cover DP
    eps = sigma ** 4 / 1000
    reduced, kept = remove_large_sets_with_origins(inst, eps)
    if isinstance(reduced, ResolvedYes):
        return _checked_cover(inst, reduced.certificate, 'large-set')

    stats = []
    rounds = amplification_rounds(delta)
    for round_no in range(rounds):
        for target in range(max(1, math.floor(sigma * n / 2)), s + 1):
            expanded, origins = expand_subsets(reduced.with_target(target), eps)
            if expanded.s == 0:
                continue
            sched = schedule_for_sigma(expanded.s / n, n, sigma=sigma, shrink_beta=True)
            verdict = algorithm_a1(expanded, sched, seed.derive(round_no, target))
            stats.extend(verdict.layers)
            if verdict.answer == 'YES':
                local = partition_certificate_to_cover(verdict.certificate, origins)
                return _checked_cover(inst, [kept[i] for i in local], 'sampled-halves', stats)

    # Small solutions: cover two fixed halves of the universe separately
    half = (1 << (n // 2)) - 1
    table = cover_table(inst)
    left, right = table.min_cover(half), table.min_cover(inst.universe & ~half)
    if left + right <= s:
        certificate = sorted(set(table.certificate(half)) | set(table.certificate(inst.universe & ~half)))
        return _checked_cover(inst, certificate, 'small-solution', stats)
    return make_verdict(False, branch='small-solution', layers=stats)


def _checked_cover(inst, certificate, branch, stats=None) -> Verdict:
    certificate = sorted(certificate)
    if not verify_cover(inst, certificate):
        raise SoundnessError(f"{branch} branch produced an invalid cover {certificate}")
    return make_verdict(True, certificate=certificate, branch=branch, layers=stats)


def solve_partition_explicit(inst: SetSystemInstance, seed=None) -> Verdict:
    """Set Partition of size exactly s on an explicit family, through the sampled halve search"""
    empties = [index for index, f in enumerate(inst.sets) if f == 0]
    if inst.n == 0:
        if len(empties) < inst.s:
            return make_verdict(False, branch='trivial')
        return make_verdict(True, certificate=empties[:inst.s], branch='trivial')
    if inst.s == 0:
        return make_verdict(False, branch='trivial')

    # One nonempty block: the universe itself, the rest from empty sets
    if inst.universe in inst.sets and len(empties) >= inst.s - 1:
        certificate = [inst.sets.index(inst.universe)] + empties[:inst.s - 1]
        if not verify_partition(inst, certificate):
            raise SoundnessError(f"single block partition {certificate} failed verification")
        return make_verdict(True, certificate=sorted(certificate), branch='trivial')

    sched = schedule_for_sigma(min(1.0, inst.s / inst.n), inst.n, shrink_beta=True)
    largest = max(popcount(f) for f in inst.sets) if inst.sets else 0
    if largest > small_set_limit(inst.s, inst.n):
        sched = widen_layers(sched, largest)
    return algorithm_a1(inst, sched, seed)


def widen_layers(sched: ParamSchedule, largest: int) -> ParamSchedule:
    """Add every layer l with |2l - n| <= largest.

    Blocks of at most `largest` elements always have a union of some of them in that window, as long as the
    partition has two nonempty blocks.
    """
    n = sched.n
    layers = sorted(set(sched.layers) | {l for l in range(1, n) if abs(2 * l - n) <= largest})
    log.debug(f"Sets of up to {largest} elements: layers widened to {layers}")
    data = sched.as_primitives()
    data['layers'] = layers
    return ParamSchedule(data)


#################################################################
# Oracle Set Partition and colouring

def small_set_limit(s: int, n: int) -> int:
    """max(1, floor(sigma^4 n/8)) with sigma = s/n"""
    if n == 0:
        return 1
    return max(1, math.floor((s / n) ** 4 * n / 8 + 1e-9))


class IndependentSetOracle(SetOracle):
    """Nonempty independent sets of a graph, optionally capped in size"""

    def __init__(self, graph: SimpleGraph, max_size: Optional[int] = None):
        self.graph = graph
        self.max_size = max_size
        self.cost_bound = graph.n * graph.n

    def __call__(self, mask):
        mask = int(mask)
        if mask == 0 or (self.max_size is not None and popcount(mask) > self.max_size):
            return False
        return self.graph.is_independent(mask)


SPOT_CHECKS = 32


def _spot_check(oracle: SetOracle, n: int, limit: int, seed: RandomSeed):
    universe = (1 << n) - 1
    if oracle(0):
        raise HypothesisViolation("oracle reports an empty set")
    if n > limit and oracle(universe):
        raise HypothesisViolation(f"oracle reports a set of size {n} > {limit}")
    if n <= limit:
        return
    rng = seed.derive(2 ** 31).rng()
    for _ in range(SPOT_CHECKS):
        size = int(rng.integers(limit + 1, n + 1))
        mask = 0
        for e in rng.choice(n, size=size, replace=False):
            mask |= 1 << int(e)
        if oracle(mask):
            raise HypothesisViolation(f"oracle reports a set of size {size} > {limit}")


def solve_partition_oracle(oracle: SetOracle, n: int, s: int, seed=None) -> Verdict:
    """Set Partition through an oracle whose sets are nonempty and have at most max(1, floor(sigma^4 n/8))
    elements"""
    seed = as_seed(seed)
    if s > n:
        return make_verdict(False, branch='trivial')
    if s == 0:
        return make_verdict(n == 0, blocks=[] if n == 0 else None, branch='trivial')
    _spot_check(oracle, n, small_set_limit(s, n), seed)
    sched = schedule_for_sigma(s / n, n, shrink_beta=True)
    return algorithm_a1_oracle(oracle, n, s, sched, seed)


def _independent_counts(g: SimpleGraph) -> np.ndarray:
    """i(X): number of independent sets (the empty one included) inside every X"""
    independent = np.ones(1, dtype=bool)
    for v in range(g.n):
        lower = np.arange(1 << v, dtype=np.int64)
        independent = np.concatenate([independent, independent & ((lower & g.adjacency[v]) == 0)])
    counts = independent.astype(np.int64)
    for j in range(g.n):
        view = counts.reshape(-1, 2, 1 << j)
        view[:, 1, :] += view[:, 0, :]
    return counts


def is_k_colorable(g: SimpleGraph, k: int) -> bool:
    """Exact test: the number of k-tuples of independent sets covering V is the alternating sum of i(X)^k"""
    check_guard(g.n, cfg.CHROMATIC_FALLBACK_MAX_N, 'vertices')
    if g.n == 0:
        return True
    if k <= 0:
        return False
    counts = _independent_counts(g)
    masks = np.arange(1 << g.n, dtype=np.int64)
    odd = np.zeros(masks.shape, dtype=np.int64)
    for j in range(g.n):
        odd ^= (masks >> j) & 1
    signs = np.where(odd == (g.n & 1), 1, -1).astype(object)
    total = int(np.sum(signs * np.power(counts.astype(object), k)))
    return total > 0


def _subgraph(g: SimpleGraph, keep: List[int]) -> SimpleGraph:
    position = {v: index for index, v in enumerate(keep)}
    return SimpleGraph.from_edges(len(keep), [(position[u], position[v]) for u, v in g.edges()
                                              if u in position and v in position])


def chromatic_decision(g: SimpleGraph, s: int, seed=None) -> Verdict:
    """YES (with a colouring) with constant probability when chi(G) < s, always NO when chi(G) > s"""
    seed = as_seed(seed)
    n = g.n
    if n == 0:
        return make_verdict(True, certificate=[], branch='trivial')
    if s <= 0:
        return make_verdict(False, branch='trivial')
    if s >= n:
        return make_verdict(True, certificate=list(range(n)), branch='trivial')

    size = small_set_limit(s, n)
    independent = next((combo for combo in itertools.combinations(range(n), size)
                        if g.is_independent(sum(1 << v for v in combo))), None)
    if independent is not None:
        rest = [v for v in range(n) if v not in independent]
        remainder = _subgraph(g, rest)
        if not is_k_colorable(remainder, s - 1):
            return make_verdict(False, branch='independent-set')
        coloring = [s - 1] * n
        for v, c in zip(rest, find_coloring(remainder, s - 1)):
            coloring[v] = c
        if not verify_coloring(g, coloring, s):
            raise SoundnessError("independent-set branch produced an invalid colouring")
        return make_verdict(True, certificate=coloring, branch='independent-set')

    # No independent set of that size: every colour class is small, so partition into independent sets
    verdict = solve_partition_oracle(IndependentSetOracle(g), n, s, seed)
    if verdict.answer != 'YES':
        return verdict
    coloring = [0] * n
    for color, block in enumerate(verdict.blocks):
        for v in block.split():
            coloring[int(v)] = color
    if not verify_coloring(g, coloring, s):
        raise SoundnessError("oracle branch produced an invalid colouring")
    return make_verdict(True, certificate=coloring, branch='oracle', layers=verdict.layers)

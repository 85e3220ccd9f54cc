import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from assemblyline_setcover import config as cfg
from assemblyline_setcover.dp_core import (PROFILE_MAX_SIZE, extract_partition, folklore_cover_dp,
                                           partition_profile_on_closure)
from assemblyline_setcover.exceptions import HypothesisViolation, SoundnessError, check_guard
from assemblyline_setcover.instances import SetSystemInstance, bits_of, popcount, verify_cover, verify_partition
from assemblyline_setcover.lattice import full_lattice
from assemblyline_setcover.models import Verdict, make_verdict
from assemblyline_setcover.reductions import COVER, MODES

log = logging.getLogger('assemblyline.setcover.few_sets')


@dataclass
class BranchStats:
    leaves: int = 0
    max_commits: int = 0
    commit_limit: int = 0


def _compact(universe: int, sets: List[Tuple[int, int]], s: int) -> Tuple[SetSystemInstance, List[int]]:
    """Renumber the elements of the universe to 0..k-1; returns the instance and the original set indices"""
    elements = bits_of(universe)
    local = {e: k for k, e in enumerate(elements)}
    masks, origins = [], []
    for index, f in sets:
        masks.append(sum(1 << local[e] for e in bits_of(f)))
        origins.append(index)
    return SetSystemInstance(len(elements), tuple(masks), s, allows_empty=True), origins


def _leaf(universe: int, sets: List[Tuple[int, int]], s: int, mode: str) -> Optional[List[int]]:
    """Solve a leaf where every set is smaller than r, on the compacted universe"""
    inst, origins = _compact(universe, sets, s)
    check_guard(inst.n, cfg.FOLKLORE_MAX_N, 'leaf universe')
    if mode == COVER:
        verdict = folklore_cover_dp(inst)
        if verdict.answer != 'YES':
            return None
        return [origins[k] for k in verdict.certificate]

    if s > inst.m:
        return None
    check_guard(s, PROFILE_MAX_SIZE, 'partition size')
    profile = partition_profile_on_closure(inst, full_lattice(inst.n))
    if not profile.c(s, inst.universe):
        return None
    return [origins[k] for k in extract_partition(inst, profile, inst.universe, s)]


def _branch(universe: int, sets: List[Tuple[int, int]], s: int, r: int, mode: str, commits: int,
            stats: BranchStats) -> Optional[List[int]]:
    if s < 0:
        return None
    if s == 0 and universe:
        return None
    if commits > stats.commit_limit:
        raise SoundnessError(f"{commits} commit branches on one path, more than ceil(n/r)={stats.commit_limit}")

    pick = next((k for k, (_, f) in enumerate(sets) if popcount(f) >= r), None)
    if pick is None:
        stats.leaves += 1
        stats.max_commits = max(stats.max_commits, commits)
        return _leaf(universe, sets, s, mode)

    index, f = sets[pick]
    rest = sets[:pick] + sets[pick + 1:]

    # Drop f
    found = _branch(universe, rest, s, r, mode, commits, stats)
    if found is not None:
        return found

    # Commit f
    remaining = universe & ~f
    if mode == COVER:
        committed = [(i, g & remaining) for i, g in rest if g & remaining]
    else:
        committed = [(i, g) for i, g in rest if not g & f]
    found = _branch(remaining, committed, s - 1, r, mode, commits + 1, stats)
    if found is not None:
        return [index] + found
    return None


def algorithm_a3(inst: SetSystemInstance, r: int, mode: str) -> Verdict:
    """Branch on sets with at least r elements (drop it, or take it), then solve the small-set leaves exactly"""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode}")
    if r < 1:
        raise HypothesisViolation(f"branching threshold r={r} must be at least 1")

    stats = BranchStats(commit_limit=math.ceil(inst.n / r))
    if mode == COVER:
        sets = [(index, f) for index, f in enumerate(inst.sets) if f]
    else:
        sets = list(enumerate(inst.sets))
    found = _branch(inst.universe, sets, inst.s, r, mode, 0, stats)
    log.debug(f"Few sets branching: {stats.leaves} leaves, at most {stats.max_commits} commits on a path")

    if found is None:
        return make_verdict(False, branch='branching')
    certificate = sorted(found)
    check = verify_cover if mode == COVER else verify_partition
    if not check(inst, certificate):
        raise SoundnessError(f"branching produced an invalid {mode} certificate")
    return make_verdict(True, certificate=certificate, branch='branching')


def lambda_r(r: int) -> float:
    """(2r-2)/sqrt((2r-1)^2 - 2 ln 2), checked against 1/2 <= lambda_r and, for r >= 3, lambda_r <= (2r-2)/(2r-1.5)"""
    if r < 2:
        raise HypothesisViolation(f"lambda_r needs r >= 2, got {r}")
    value = (2 * r - 2) / math.sqrt((2 * r - 1) ** 2 - 2 * math.log(2))
    if value < 0.5 or (r >= 3 and value > (2 * r - 2) / (2 * r - 1.5)):
        raise SoundnessError(f"lambda_{r}={value} is outside its sandwich")
    return value

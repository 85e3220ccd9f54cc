import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np

from assemblyline_setcover import config as cfg
from assemblyline_setcover.exceptions import ClosureMismatch, GuardExceeded, SoundnessError, check_guard
from assemblyline_setcover.instances import SetSystemInstance, bits_of
from assemblyline_setcover.lattice import DownClosure, SetOracle, tuple_cover_counts
from assemblyline_setcover.models import Verdict, make_verdict

log = logging.getLogger('assemblyline.setcover.dp_core')

UNREACHABLE = 255
ONE = np.uint64(1)
# Partition sizes a profile word can hold
PROFILE_MAX_SIZE = 63


#################################################################
# Folklore cover DP over the whole lattice

class CoverTable:
    """T[X] = fewest sets whose restrictions to X cover X, for every X of the universe"""

    def __init__(self, n: int, sets: Tuple[int, ...]):
        check_guard(n, cfg.FOLKLORE_MAX_N, 'n')
        self.n = n
        self.sets = sets
        size = 1 << n

        # Fewest sets with union exactly Y, breadth first over unions
        exact = np.full(size, UNREACHABLE, dtype=np.uint8)
        exact[0] = 0
        frontier = np.zeros(1, dtype=np.int64)
        step = 0
        nonempty = sorted({f for f in sets if f})
        while frontier.size and step < UNREACHABLE - 1:
            step += 1
            reached = []
            for f in nonempty:
                candidates = frontier | f
                fresh = candidates[exact[candidates] == UNREACHABLE]
                if fresh.size:
                    fresh = np.unique(fresh)
                    exact[fresh] = step
                    reached.append(fresh)
            frontier = np.concatenate(reached) if reached else np.zeros(0, dtype=np.int64)

        # Covering X only needs a union that contains X
        table = exact.copy()
        for j in range(n):
            view = table.reshape(-1, 2, 1 << j)
            np.minimum(view[:, 0, :], view[:, 1, :], out=view[:, 0, :])
        self.table = table

    def min_cover(self, mask: int) -> Union[int, float]:
        value = int(self.table[mask])
        return math.inf if value == UNREACHABLE else value

    def certificate(self, mask: int) -> List[int]:
        """Indices of a minimum cover of X, by walking the table backwards"""
        remaining = self.min_cover(mask)
        if remaining == math.inf:
            raise ValueError(f"{mask:b} cannot be covered")
        chosen = []
        while mask:
            for index, f in enumerate(self.sets):
                if f & mask and index not in chosen and self.min_cover(mask & ~f) == remaining - 1:
                    chosen.append(index)
                    mask &= ~f
                    remaining -= 1
                    break
            else:
                raise SoundnessError("cover table is inconsistent with its family")
        return chosen


@lru_cache(maxsize=2)
def _cover_table(n: int, sets: Tuple[int, ...]) -> CoverTable:
    return CoverTable(n, sets)


def cover_table(inst: SetSystemInstance) -> CoverTable:
    return _cover_table(inst.n, inst.sets)


def folklore_cover_dp(inst: SetSystemInstance) -> Verdict:
    table = cover_table(inst)
    if table.min_cover(inst.universe) > inst.s:
        return make_verdict(False, branch='folklore-dp')
    return make_verdict(True, certificate=table.certificate(inst.universe), branch='folklore-dp')


def min_cover_on_sub_universe(inst: SetSystemInstance, mask: int) -> Union[int, float]:
    """Fewest sets covering X in the instance induced by the elements of X (math.inf when impossible)"""
    return cover_table(inst).min_cover(mask)


#################################################################
# Partition profiles c_i(W)

@dataclass
class PartitionProfile:
    """Bit i of bits[pos] is c_i of the closure member at pos"""
    closure: DownClosure
    bits: np.ndarray
    with_empty: bool = True

    def c(self, i: int, mask: int) -> bool:
        if i > PROFILE_MAX_SIZE:
            raise GuardExceeded(f"partition size {i} exceeds the configured limit of {PROFILE_MAX_SIZE}")
        if i < 0 or int(mask) not in self.closure:
            return False
        return bool(int(self.bits[self.closure.position(mask)]) >> i & 1)

    def sizes(self, mask: int) -> List[int]:
        """All i with c_i(mask)"""
        if int(mask) not in self.closure:
            return []
        return bits_of(int(self.bits[self.closure.position(mask)]))


def _empty_bits(dc: DownClosure) -> np.ndarray:
    bits = np.zeros(len(dc), dtype=np.uint64)
    if len(dc):
        bits[dc.position(0)] = ONE
    return bits


def partition_profile_on_closure(inst: SetSystemInstance, dc: DownClosure, with_empty: bool = True) -> PartitionProfile:
    """c_i(W) for every W in the closure, one family set at a time (only the previous slice is kept)"""
    if dc.n != inst.n:
        raise ClosureMismatch(f"closure over {dc.n} elements used with an instance over {inst.n}")
    bits = _empty_bits(dc)
    for f in inst.sets:
        if f == 0:
            if with_empty:
                bits = bits | (bits << ONE)
            continue
        sel = np.flatnonzero((dc.members & f) == f)
        if not sel.size:
            continue
        src = dc.positions(dc.members[sel] ^ f)
        updated = bits.copy()
        updated[sel] |= bits[src] << ONE
        bits = updated
    return PartitionProfile(dc, bits, with_empty=with_empty)


def partition_profile_oracle(oracle: SetOracle, dc: DownClosure, with_empty: bool = True) -> PartitionProfile:
    """c_i(W) = [c'_{|W|,i}(W) > 0], through the restricted zeta / compose / Moebius pipeline"""
    bits = _empty_bits(dc)
    top = int(dc.sizes.max(initial=0))
    if top:
        counts = tuple_cover_counts(dc, oracle, i_max=top, skip_empty=True, max_weight=top)
        columns = np.arange(len(dc))
        for i, table in counts.items():
            hit = table.values[dc.sizes, columns] > 0
            bits[hit] |= ONE << np.uint64(i)
    if with_empty:
        for _ in range(min(oracle.multiplicity(0), 64)):
            bits = bits | (bits << ONE)
    return PartitionProfile(dc, bits, with_empty=with_empty)


def extract_partition(inst: SetSystemInstance, profile: PartitionProfile, mask: int, i: int) -> List[int]:
    """Set indices of an i-set partition of W, backtracking through the profile"""
    if not profile.c(i, mask):
        raise ValueError(f"no {i}-set partition of {mask:b} recorded in the profile")
    chosen = []
    while mask:
        low = mask & -mask
        for index, f in enumerate(inst.sets):
            if f & low and not f & ~mask and profile.c(i - 1, mask ^ f):
                chosen.append(index)
                mask ^= f
                i -= 1
                break
        else:
            raise SoundnessError("partition profile is inconsistent with its family")
    if i:
        empties = [index for index, f in enumerate(inst.sets) if f == 0]
        if not profile.with_empty or len(empties) < i:
            raise SoundnessError("partition profile counts more empty sets than the family holds")
        chosen.extend(empties[:i])
    return chosen


def extract_partition_oracle(oracle: SetOracle, profile: PartitionProfile, mask: int, i: int) -> List[int]:
    """Blocks (as masks) of an i-block partition of W, found with oracle queries only"""
    if not profile.c(i, mask):
        raise ValueError(f"no {i}-block partition of {mask:b} recorded in the profile")
    blocks = []
    while mask:
        low = mask & -mask
        rest = mask ^ low
        sub = rest
        while True:
            block = sub | low
            if oracle(block) and profile.c(i - 1, mask ^ block):
                break
            if sub == 0:
                raise SoundnessError("oracle profile is inconsistent with its oracle")
            sub = (sub - 1) & rest
        blocks.append(block)
        mask ^= block
        i -= 1
    blocks.extend([0] * i)
    return blocks

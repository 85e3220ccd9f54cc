import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np
from scipy.special import entr

from assemblyline_setcover import config as cfg
from assemblyline_setcover.exceptions import HypothesisViolation, check_guard
from assemblyline_setcover.instances import SetSystemInstance, brute_force_set_partition, popcount
from assemblyline_setcover.lattice import popcounts
from assemblyline_setcover.models import ParamSchedule

log = logging.getLogger('assemblyline.setcover.witness')

EPSILON = 1e-12


#################################################################
# Entropy arithmetic

def entropy(x):
    """Binary entropy in bits, with 0 lg 0 = 0. Accepts scalars or arrays"""
    values = np.asarray(x, dtype=np.float64)
    if np.any((values < 0) | (values > 1)) or np.any(np.isnan(values)):
        raise ValueError(f"entropy is only defined on [0, 1], got {x}")
    result = (entr(values) + entr(1 - values)) / np.log(2)
    return float(result) if result.ndim == 0 else result


def check_entropy_bounds(grid: Iterable[float]) -> List[str]:
    """Violations of the three standard entropy bounds on the grid; expected empty"""
    violations = []
    for x in grid:
        if 0 < x < 0.5:
            low, high = entropy(0.5 - x), entropy(0.5 + x)
            if abs(low - high) > EPSILON:
                violations.append(f"h(1/2-{x}) = {low} differs from h(1/2+{x}) = {high}")
            if low > 1 - x * x + EPSILON:
                violations.append(f"h(1/2-{x}) = {low} > 1 - x^2 = {1 - x * x}")
        if 0 < x < 1 and entropy(x) > x * math.log2(4 / x) + EPSILON:
            violations.append(f"h({x}) = {entropy(x)} > x lg(4/x) = {x * math.log2(4 / x)}")
        if float(x).is_integer() and x >= 1:
            n = int(x)
            if (1 - 1 / n) ** n > 1 / math.e + EPSILON:
                violations.append(f"(1-1/{n})^{n} > 1/e")
    return violations


#################################################################
# Parameter schedule

def layer_range(n: int, beta: float) -> List[int]:
    """Layer sizes l with floor((1/2-beta)n) < l < ceil((1/2+beta)n)"""
    low = math.floor((0.5 - beta) * n + 1e-9)
    high = math.ceil((0.5 + beta) * n - 1e-9)
    return list(range(low + 1, high))


def schedule_for_sigma(sigma0: float, n: int, sigma: float = None, shrink_beta: bool = False) -> ParamSchedule:
    """zeta = min(sigma0, 0.2499), beta = sigma0^2/4, checked against 2*sqrt(beta) <= zeta < 1/4.

    With shrink_beta the balance slack is lowered to (zeta/2)^2 instead of refusing the schedule.
    """
    if not 0 < sigma0 <= 1:
        raise HypothesisViolation(f"sigma0={sigma0} must lie in (0, 1]")
    zeta = min(sigma0, cfg.ZETA_CAP)
    beta = sigma0 * sigma0 / 4
    if 2 * math.sqrt(beta) > zeta + EPSILON:
        if not shrink_beta:
            raise HypothesisViolation(f"2*sqrt(beta)={2 * math.sqrt(beta):.4f} exceeds zeta={zeta:.4f}, "
                                      f"shrink beta to at most {(zeta / 2) ** 2:.6f}")
        beta = (zeta / 2) ** 2
        log.debug(f"Balance slack shrunk to {beta:.6f} for zeta={zeta}")

    layers = layer_range(n, beta)
    if not layers:
        log.warning(f"No layer lies strictly between (1/2-beta)n and (1/2+beta)n for n={n}, beta={beta:.6f}; "
                    f"the halve search will answer NO")
    return ParamSchedule({
        'sigma': sigma0 if sigma is None else sigma,
        'sigma0': sigma0,
        'zeta': zeta,
        'beta': beta,
        'sample_rate': 2.0 ** (-zeta * n),
        'repeats': max(1, n),
        'n': n,
        'layers': layers,
    })


#################################################################
# Witness halves

@dataclass(frozen=True)
class WitnessHalve:
    w: int
    s1: Tuple[int, ...]
    s2: Tuple[int, ...]

    @property
    def i(self) -> int:
        return len(self.s1)

    def verify(self, inst: SetSystemInstance, beta: float) -> bool:
        n = inst.n
        if not (0.5 - beta) * n - 1e-9 <= popcount(self.w) <= (0.5 + beta) * n + 1e-9:
            return False
        if set(self.s1) & set(self.s2) or len(self.s1) + len(self.s2) != inst.s:
            return False
        left = right = total = 0
        for index in self.s1:
            left |= inst.sets[index]
            total += popcount(inst.sets[index])
        for index in self.s2:
            right |= inst.sets[index]
            total += popcount(inst.sets[index])
        return left == self.w and right == inst.universe & ~self.w and total == n


def _exact_partitions(inst: SetSystemInstance) -> List[List[int]]:
    """Every set partition of size exactly s, as index lists (empty sets taken in index order)"""
    empties = [index for index, f in enumerate(inst.sets) if f == 0]
    by_element = {}
    for index, f in enumerate(inst.sets):
        for e in range(inst.n):
            if f >> e & 1:
                by_element.setdefault(e, []).append(index)

    found = []

    def extend(remaining, chosen):
        if len(chosen) > inst.s:
            return
        if not remaining:
            missing = inst.s - len(chosen)
            if missing <= len(empties):
                found.append(chosen + empties[:missing])
            return
        low = (remaining & -remaining).bit_length() - 1
        for index in by_element.get(low, ()):
            f = inst.sets[index]
            if not f & ~remaining:
                extend(remaining & ~f, chosen + [index])

    extend(inst.universe, [])
    return found


def enumerate_witness_halves(inst: SetSystemInstance, beta: float) -> List[WitnessHalve]:
    """All distinct witness beta-halves W with one realising split each (brute force)"""
    check_guard(inst.n, cfg.WITNESS_MAX_N, 'n')
    check_guard(inst.m, cfg.WITNESS_MAX_M, 'm')
    low = (0.5 - beta) * inst.n - 1e-9
    high = (0.5 + beta) * inst.n + 1e-9

    halves = {}
    for partition in _exact_partitions(inst):
        # Union of every sub-selection of the partition, selection bit k picks partition[k]
        unions = np.zeros(1, dtype=np.int64)
        for index in partition:
            unions = np.concatenate([unions, unions | inst.sets[index]])
        sizes = popcounts(unions, inst.n)
        for pick in np.flatnonzero((sizes >= low) & (sizes <= high)):
            w = int(unions[pick])
            if w in halves:
                continue
            s1 = tuple(index for k, index in enumerate(partition) if int(pick) >> k & 1)
            s2 = tuple(index for k, index in enumerate(partition) if not int(pick) >> k & 1)
            halves[w] = WitnessHalve(w, s1, s2)
    return sorted(halves.values(), key=lambda halve: halve.w)


def abundance_threshold(inst: SetSystemInstance) -> float:
    """2^(sigma0 n)/4 with sigma0 = s/n"""
    return 2.0 ** inst.s / 4


def check_abundance(inst: SetSystemInstance) -> bool:
    """Whether (YES instance) <=> (at least 2^(sigma0 n)/4 witness (sigma0^2/4)-halves), with sigma0 = s/n.

    Only instances without empty sets whose sets have at most max(1, floor(sigma0^4 n/8)) elements qualify.
    """
    if inst.n == 0 or inst.s == 0:
        raise HypothesisViolation("abundance needs a nonempty universe and a positive target")
    if inst.has_empty:
        raise HypothesisViolation("abundance needs a family without empty sets")
    sigma0 = inst.s / inst.n
    limit = max(1, math.floor(sigma0 ** 4 * inst.n / 8 + 1e-9))
    for index, f in enumerate(inst.sets):
        if popcount(f) > limit:
            raise HypothesisViolation(f"set {index} has {popcount(f)} > {limit} elements")

    is_yes = brute_force_set_partition(inst).answer == 'YES'
    count = len(enumerate_witness_halves(inst, sigma0 * sigma0 / 4))
    log.debug(f"Abundance: yes={is_yes}, {count} halves, threshold {abundance_threshold(inst)}")
    return is_yes == (count >= abundance_threshold(inst))

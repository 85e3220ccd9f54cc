import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from assemblyline_setcover import config as cfg
from assemblyline_setcover.exceptions import HypothesisViolation, SoundnessError, check_guard
from assemblyline_setcover.instances import LinSatInstance, RandomSeed, as_seed, bits_of, verify_linsat
from assemblyline_setcover.models import Verdict, make_verdict
from assemblyline_setcover.witness import entropy

log = logging.getLogger('assemblyline.setcover.linsat_solver')

PADDING_COLUMNS = 3


#################################################################
# GF(2) linear algebra

class Gf2Matrix:
    """Dense 0/1 matrix over GF(2)"""

    def __init__(self, data):
        self.data = (np.asarray(data, dtype=np.int64) & 1).astype(np.uint8)
        if self.data.ndim != 2:
            self.data = self.data.reshape(0, 0)
        self._reduced = None

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_columns(cls, columns: List[int], n_rows: int) -> 'Gf2Matrix':
        data = np.zeros((n_rows, len(columns)), dtype=np.uint8)
        for j, column in enumerate(columns):
            for r in range(n_rows):
                data[r, j] = column >> r & 1
        return cls(data)

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> 'Gf2Matrix':
        return cls(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))

    def columns(self) -> List[int]:
        weights = (np.int64(1) << np.arange(self.rows, dtype=np.int64))
        return [int(x) for x in (self.data.astype(np.int64) * weights[:, None]).sum(axis=0)]

    def __matmul__(self, other: 'Gf2Matrix') -> 'Gf2Matrix':
        return Gf2Matrix((self.data.astype(np.int64) @ other.data.astype(np.int64)) & 1)

    def apply(self, vector: int) -> int:
        """A.v for v given as a column bitmask, result as a row bitmask"""
        acc = 0
        for j, column in enumerate(self.columns()):
            if vector >> j & 1:
                acc ^= column
        return acc

    def _eliminate(self):
        """(pivot columns, transform T) with T.A in reduced row echelon form"""
        if self._reduced is None:
            rows, cols = self.data.shape
            work = np.concatenate([self.data.copy(), np.eye(rows, dtype=np.uint8)], axis=1)
            pivots = []
            r = 0
            for c in range(cols):
                if r >= rows:
                    break
                candidates = np.flatnonzero(work[r:, c])
                if candidates.size == 0:
                    continue
                p = r + int(candidates[0])
                if p != r:
                    work[[r, p], :] = work[[p, r], :]
                ones = np.flatnonzero(work[:, c])
                ones = ones[ones != r]
                if ones.size:
                    work[ones, :] ^= work[r, :]
                pivots.append(c)
                r += 1
            self._reduced = (pivots, Gf2Matrix(work[:, cols:]))
        return self._reduced

    def rank(self) -> int:
        return len(self._eliminate()[0])

    def column_basis(self) -> List[int]:
        return list(self._eliminate()[0])

    def transform(self) -> 'Gf2Matrix':
        return self._eliminate()[1]

    def solve(self, b: int) -> Optional[int]:
        """Some x (column bitmask) with A.x = b, free variables zero; None when b is outside the column space"""
        pivots, transform = self._eliminate()
        reduced_b = transform.apply(b)
        if reduced_b >> len(pivots):
            return None
        return sum(1 << pivots[i] for i in range(len(pivots)) if reduced_b >> i & 1)


#################################################################
# Representation-method lists

def list2(a: Gf2Matrix, b: int, s2: int) -> List[int]:
    """Every x of Hamming weight s2 with A.x = b, by walking a layered reachability table"""
    m = a.cols
    if s2 < 0 or s2 > m:
        return []
    states = 1 << a.rows
    check_guard((m + 1) * (s2 + 1) * states, cfg.LIST2_MAX_STATES, 'list2 states')
    columns = a.columns()
    ys = np.arange(states, dtype=np.int64)

    # reach[i][w][y]: some w of the columns i..m-1 sum to y
    reach = np.zeros((m + 1, s2 + 1, states), dtype=bool)
    reach[m, 0, 0] = True
    for i in range(m - 1, -1, -1):
        reach[i] = reach[i + 1]
        reach[i, 1:] |= reach[i + 1, :-1][:, ys ^ columns[i]]

    out = []
    if not reach[0, s2, b]:
        return out

    # Depth first over skip / take arcs; every arc followed can still reach the target
    stack = [(0, s2, b, 0)]
    while stack:
        i, w, y, x = stack.pop()
        if i == m:
            out.append(x)
            continue
        if w and reach[i + 1, w - 1, y ^ columns[i]]:
            stack.append((i + 1, w - 1, y ^ columns[i], x | (1 << i)))
        if reach[i + 1, w, y]:
            stack.append((i + 1, w, y, x))
    return sorted(out)


def _join(left: Dict[int, Tuple[int, int]], right: Dict[int, Tuple[int, int]], b: int):
    """Pairs with A.x + A.y = b, probing the larger index with the smaller list"""
    flipped = len(left) > len(right)
    small, large = (right, left) if flipped else (left, right)
    for image, entry in small.items():
        other = large.get(image ^ b)
        if other is not None:
            yield (other, entry) if flipped else (entry, other)


def list1(a: Gf2Matrix, b: int, s1: int, seed) -> List[int]:
    """Weight-s1 solutions of A.x = b; each one is listed with constant probability over the inner hash"""
    if s1 % 2:
        raise HypothesisViolation(f"list1 weight s1={s1} must be even")
    if s1 == 0:
        return [0] if b == 0 else []
    rng = as_seed(seed).rng()
    inner = Gf2Matrix.random(s1, a.rows, rng)
    target_left = int(rng.integers(0, 1 << s1))
    hashed = inner @ a
    left = list2(hashed, target_left, s1 // 2)
    right = list2(hashed, inner.apply(b) ^ target_left, s1 // 2)

    index = {}
    for y in right:
        index.setdefault(a.apply(y), []).append(y)
    out = set()
    for x in left:
        for y in index.get(a.apply(x) ^ b, ()):
            if not x & y:
                out.add(x | y)
    return sorted(out)


def _cheapest_by_image(a: Gf2Matrix, vectors: List[int], weights: List[int]) -> Dict[int, Tuple[int, int]]:
    """image -> (x, cost) keeping the cheapest x per image (ties: smallest x)"""
    best = {}
    for x in vectors:
        cost = sum(weights[j] for j in bits_of(x))
        image = a.apply(x)
        current = best.get(image)
        if current is None or (cost, x) < (current[1], current[0]):
            best[image] = (x, cost)
    return best


def default_trials(m: int) -> int:
    return max(1, math.ceil(cfg.LINSAT_TRIAL_FACTOR * m ** 1.5))


def _weight_targets(m: int, padded: int) -> List[int]:
    """Multiples of 4 up to the first multiple of 4 covering weight 2m/3"""
    top = 4 * math.ceil(math.floor(2 * m / 3) / 4)
    return list(range(4, min(top, padded) + 1, 4))


def _as_vector(x: int, m: int) -> List[int]:
    return [x >> j & 1 for j in range(m)]


def algorithm_a4(inst: LinSatInstance, seed=None, trials: Optional[int] = None) -> Verdict:
    """Monte Carlo Linear Sat: hashed half-weight lists joined on the full image, ISD for heavy optima"""
    seed = as_seed(seed)
    m = inst.m_cols
    if inst.b == 0:
        if not verify_linsat(inst, [0] * m):
            raise SoundnessError("the zero vector failed verification")
        return make_verdict(True, certificate=[0] * m, branch='trivial')

    # Zero columns of cost zero pad any solution weight up to a multiple of 4
    padded = m + PADDING_COLUMNS
    a = Gf2Matrix.from_columns(list(inst.columns) + [0] * PADDING_COLUMNS, inst.n_rows)
    weights = list(inst.weights) + [0] * PADDING_COLUMNS
    trials = default_trials(m) if trials is None else trials

    for trial in range(trials):
        trial_seed = seed.derive(trial)
        for s in _weight_targets(m, padded):
            rng = trial_seed.derive(s).rng()
            outer = Gf2Matrix.random(s, inst.n_rows, rng)
            target_left = int(rng.integers(0, 1 << s))
            hashed = outer @ a
            left = list1(hashed, target_left, s // 2, trial_seed.derive(s, 0))
            right = list1(hashed, outer.apply(inst.b) ^ target_left, s // 2, trial_seed.derive(s, 1))

            left_best = _cheapest_by_image(a, left, weights)
            right_best = _cheapest_by_image(a, right, weights)
            for (x, x_cost), (y, y_cost) in _join(left_best, right_best, inst.b):
                if x_cost + y_cost <= inst.t:
                    certificate = _as_vector(x ^ y, m)
                    if not verify_linsat(inst, certificate):
                        raise SoundnessError("representation join produced an invalid solution")
                    log.debug(f"Accepted at trial {trial}, weight target {s}")
                    return make_verdict(True, certificate=certificate, branch='representation')

    if m and Gf2Matrix.from_columns(list(inst.columns), inst.n_rows).rank() * 3 >= 2 * m:
        return isd_fallback(inst)
    return make_verdict(False, branch='representation')


def isd_fallback(inst: LinSatInstance) -> Verdict:
    """Exact: every choice of non-basis columns extends in at most one way through the column basis"""
    m = inst.m_cols
    a = Gf2Matrix.from_columns(list(inst.columns), inst.n_rows)
    basis = a.column_basis()
    rank = len(basis)
    if rank * 3 < 2 * m:
        raise HypothesisViolation(f"rank {rank} is below 2m/3 for m={m}")
    check_guard(1 << (m - rank), cfg.ISD_MAX_ENUM, 'non-basis subsets')
    check_guard(inst.n_rows, cfg.MAX_UNIVERSE, 'rows')

    transform = a.transform()
    others = [j for j in range(m) if j not in basis]

    # Reduced coordinates of b plus the chosen non-basis columns; bits >= rank must vanish
    coords = np.array([transform.apply(inst.b)], dtype=np.int64)
    costs = np.zeros(1, dtype=np.int64)
    for j in others:
        coords = np.concatenate([coords, coords ^ np.int64(transform.apply(inst.columns[j]))])
        costs = np.concatenate([costs, costs + inst.weights[j]])
    feasible = (coords >> rank) == 0
    for i, column in enumerate(basis):
        costs = costs + ((coords >> i) & 1) * inst.weights[column]

    candidates = np.flatnonzero(feasible)
    if candidates.size == 0:
        return make_verdict(False, branch='isd')
    best = int(candidates[np.argmin(costs[candidates])])
    if costs[best] > inst.t:
        return make_verdict(False, branch='isd')

    x = 0
    for k, j in enumerate(others):
        if best >> k & 1:
            x |= 1 << j
    for i, column in enumerate(basis):
        if int(coords[best]) >> i & 1:
            x |= 1 << column
    certificate = _as_vector(x, m)
    if not verify_linsat(inst, certificate):
        raise SoundnessError("information set decoding produced an invalid solution")
    return make_verdict(True, certificate=certificate, branch='isd')


#################################################################
# Running time exponent

def _exponent_terms(sigma: float) -> float:
    quarter = entropy(sigma / 4)
    return max(sigma / 4, quarter - sigma / 2, 2 * quarter - 1.5 * sigma)


def linsat_exponent(grid_points: int = 2001) -> Tuple[float, float]:
    """(sigma*, value) maximising max{sigma/4, h(sigma/4)-sigma/2, 2h(sigma/4)-3sigma/2} over [0, 2/3]"""
    grid = np.linspace(0, 2 / 3, grid_points)
    values = np.array([_exponent_terms(float(sigma)) for sigma in grid])
    best = int(np.argmax(values))
    step = grid[1] - grid[0]
    low, high = max(0.0, grid[best] - step), min(2 / 3, grid[best] + step)
    refined = minimize_scalar(lambda sigma: -_exponent_terms(sigma), bounds=(low, high), method='bounded',
                              options={'xatol': 1e-9})
    if refined.success and -refined.fun >= values[best]:
        return float(refined.x), float(-refined.fun)
    return float(grid[best]), float(values[best])

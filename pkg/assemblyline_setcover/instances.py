import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from assemblyline_setcover import config as cfg
from assemblyline_setcover.exceptions import HypothesisViolation, ParseError, check_guard
from assemblyline_setcover.models import GeneratorSpec, Verdict, make_verdict

log = logging.getLogger('assemblyline.setcover.instances')


def popcount(mask: int) -> int:
    return bin(mask).count('1')


def bits_of(mask: int) -> List[int]:
    out = []
    index = 0
    while mask:
        if mask & 1:
            out.append(index)
        mask >>= 1
        index += 1
    return out


def mask_of(elements: Iterable[int]) -> int:
    mask = 0
    for e in elements:
        mask |= 1 << int(e)
    return mask


#################################################################
# Instance types

@dataclass(frozen=True)
class SetSystemInstance:
    """A family of subsets of the universe {0..n-1} with a target size s.

    Sets are element bitmasks. Duplicates are kept; reductions rely on copies.
    """
    n: int
    sets: Tuple[int, ...]
    s: int
    allows_empty: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'sets', tuple(int(f) for f in self.sets))
        if self.n < 0 or self.s < 0:
            raise ValueError(f"n and s must be nonnegative (n={self.n}, s={self.s})")
        for index, f in enumerate(self.sets):
            if f < 0 or f >> self.n:
                raise ValueError(f"set {index} uses elements outside 0..{self.n - 1}")
            if f == 0 and not self.allows_empty:
                raise ValueError(f"set {index} is empty but the instance does not allow empty sets")

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def universe(self) -> int:
        return (1 << self.n) - 1

    @property
    def has_empty(self) -> bool:
        return any(f == 0 for f in self.sets)

    def with_target(self, s: int) -> 'SetSystemInstance':
        return replace(self, s=s)


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph on vertices 0..n-1, adjacency given as neighbour bitmasks"""
    n: int
    adjacency: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'adjacency', tuple(int(a) for a in self.adjacency))
        if len(self.adjacency) != self.n:
            raise ValueError(f"adjacency has {len(self.adjacency)} rows for {self.n} vertices")
        for v, neighbours in enumerate(self.adjacency):
            if neighbours >> v & 1:
                raise ValueError(f"vertex {v} is adjacent to itself")
            if neighbours >> self.n:
                raise ValueError(f"vertex {v} has neighbours outside 0..{self.n - 1}")
            for u in bits_of(neighbours):
                if not self.adjacency[u] >> v & 1:
                    raise ValueError(f"edge ({v}, {u}) is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> 'SimpleGraph':
        adjacency = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"self loop on vertex {u}")
            adjacency[u] |= 1 << v
            adjacency[v] |= 1 << u
        return cls(n, tuple(adjacency))

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> 'SimpleGraph':
        order = {node: index for index, node in enumerate(sorted(graph.nodes))}
        return cls.from_edges(len(order), ((order[u], order[v]) for u, v in graph.edges if u != v))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges())
        return graph

    def edges(self) -> List[Tuple[int, int]]:
        return [(v, u) for v in range(self.n) for u in bits_of(self.adjacency[v]) if v < u]

    def is_independent(self, mask: int) -> bool:
        return all(not self.adjacency[v] & mask for v in bits_of(mask))


@dataclass(frozen=True)
class LinSatInstance:
    """Ax = b over GF(2) with cost budget.

    Column j is a row bitmask (bit r set when A[r][j] = 1).
    """
    n_rows: int
    m_cols: int
    columns: Tuple[int, ...]
    b: int
    weights: Tuple[int, ...]
    t: int

    def __post_init__(self):
        object.__setattr__(self, 'columns', tuple(int(c) for c in self.columns))
        object.__setattr__(self, 'weights', tuple(int(w) for w in self.weights))
        if len(self.columns) != self.m_cols or len(self.weights) != self.m_cols:
            raise ValueError(f"expected {self.m_cols} columns and weights, "
                             f"got {len(self.columns)} and {len(self.weights)}")
        for vector in self.columns + (self.b,):
            if vector < 0 or vector >> self.n_rows:
                raise ValueError(f"vector {vector:b} does not fit in {self.n_rows} rows")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if self.t < 0:
            raise ValueError(f"cost budget t={self.t} must be nonnegative")

    def image(self, x: Sequence[int]) -> int:
        acc = 0
        for column, bit in zip(self.columns, x):
            if bit:
                acc ^= column
        return acc

    def cost(self, x: Sequence[int]) -> int:
        return sum(w for w, bit in zip(self.weights, x) if bit)


@dataclass(frozen=True)
class RandomSeed:
    """Root seed plus a derivation path; each path names an independent stream"""
    seed: int
    path: Tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed {self.seed} is not a 64-bit unsigned integer")
        object.__setattr__(self, 'path', tuple(int(k) for k in self.path))

    def derive(self, *keys: int) -> 'RandomSeed':
        return RandomSeed(self.seed, self.path + tuple(keys))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.path))


def as_seed(seed: Union[int, RandomSeed, None]) -> RandomSeed:
    if isinstance(seed, RandomSeed):
        return seed
    return RandomSeed(cfg.DEFAULT_SEED if seed is None else int(seed))


#################################################################
# File formats

def _read_text(text) -> List[str]:
    if not isinstance(text, str):
        text = text.read()
    return text.replace('\r', '').split('\n')


def _parse_header(line: str, kind: str, count: int) -> List[int]:
    tokens = line.split()
    if len(tokens) != count + 2 or tokens[0] != 'p' or tokens[1] != kind:
        raise ParseError(f"malformed header, expected 'p {kind}' followed by {count} integers", 1)
    try:
        values = [int(tok) for tok in tokens[2:]]
    except ValueError:
        raise ParseError(f"malformed header, non-integer field in '{line.strip()}'", 1)
    if any(v < 0 for v in values):
        raise ParseError("malformed header, negative field", 1)
    return values


def _check_trailing(lines: List[str], start: int, what: str):
    for offset, line in enumerate(lines[start:]):
        if line.strip():
            raise ParseError(f"{what} count mismatch: unexpected extra line", start + offset + 1)


def parse_set_system(text) -> SetSystemInstance:
    lines = _read_text(text)
    n, m, s = _parse_header(lines[0], 'setsystem', 3)
    if len(lines) - 1 < m:
        raise ParseError(f"set count mismatch: header declares {m} sets, found {len(lines) - 1}", len(lines))
    sets = []
    for line_no in range(2, m + 2):
        mask = 0
        for tok in lines[line_no - 1].split():
            try:
                e = int(tok)
            except ValueError:
                raise ParseError(f"invalid element '{tok}'", line_no)
            if e < 0 or e >= n:
                raise ParseError(f"element index {e} ≥ n={n}" if e >= 0 else f"negative element index {e}", line_no)
            mask |= 1 << e
        sets.append(mask)
    _check_trailing(lines, m + 1, 'set')
    return SetSystemInstance(n, tuple(sets), s, allows_empty=any(f == 0 for f in sets))


def serialize_set_system(inst: SetSystemInstance) -> str:
    out = [f"p setsystem {inst.n} {inst.m} {inst.s}"]
    out.extend(' '.join(str(e) for e in bits_of(f)) for f in inst.sets)
    return '\n'.join(out) + '\n'


def parse_graph(text) -> SimpleGraph:
    n = m = None
    edges = []
    for line_no, line in enumerate(_read_text(text), start=1):
        tokens = line.split()
        if not tokens or tokens[0] == 'c':
            continue
        if tokens[0] == 'p':
            if n is not None or len(tokens) != 4 or tokens[1] not in ('edge', 'col'):
                raise ParseError("malformed header, expected 'p edge <n> <m>'", line_no)
            try:
                n, m = int(tokens[2]), int(tokens[3])
            except ValueError:
                raise ParseError("malformed header, non-integer field", line_no)
        elif tokens[0] == 'e':
            if n is None:
                raise ParseError("edge line before header", line_no)
            try:
                u, v = int(tokens[1]), int(tokens[2])
            except (ValueError, IndexError):
                raise ParseError(f"malformed edge line '{line.strip()}'", line_no)
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f"vertex index out of range 1..{n}", line_no)
            if u == v:
                raise ParseError(f"self loop on vertex {u}", line_no)
            edges.append((u - 1, v - 1))
        else:
            raise ParseError(f"unknown line type '{tokens[0]}'", line_no)
    if n is None:
        raise ParseError("missing header", 1)
    if len(edges) != m:
        raise ParseError(f"edge count mismatch: header declares {m} edges, found {len(edges)}", 1)
    return SimpleGraph.from_edges(n, edges)


def serialize_graph(g: SimpleGraph) -> str:
    edges = g.edges()
    out = [f"p edge {g.n} {len(edges)}"]
    out.extend(f"e {u + 1} {v + 1}" for u, v in edges)
    return '\n'.join(out) + '\n'


def _parse_bits(line: str, width: int, line_no: int) -> int:
    line = line.strip()
    if len(line) != width or any(ch not in '01' for ch in line):
        raise ParseError(f"expected a bitstring of length {width}", line_no)
    return sum(1 << row for row, ch in enumerate(line) if ch == '1')


def _format_bits(vector: int, width: int) -> str:
    return ''.join('1' if vector >> row & 1 else '0' for row in range(width))


def parse_linsat(text) -> LinSatInstance:
    lines = _read_text(text)
    n_rows, m_cols, t = _parse_header(lines[0], 'linsat', 3)
    # columns, then b, then the weights line (absent when there are no columns)
    needed = m_cols + 1 + (1 if m_cols else 0)
    if len(lines) - 1 < needed:
        raise ParseError(f"column count mismatch: expected {needed} lines after the header", len(lines))
    columns = [_parse_bits(lines[j + 1], n_rows, j + 2) for j in range(m_cols)]
    b = _parse_bits(lines[m_cols + 1], n_rows, m_cols + 2)
    weights = []
    if m_cols:
        try:
            weights = [int(tok) for tok in lines[m_cols + 2].split()]
        except ValueError:
            raise ParseError("invalid weight", m_cols + 3)
        if len(weights) != m_cols or any(w < 0 for w in weights):
            raise ParseError(f"expected {m_cols} nonnegative weights", m_cols + 3)
    _check_trailing(lines, needed + 1, 'column')
    return LinSatInstance(n_rows, m_cols, tuple(columns), b, tuple(weights), t)


def serialize_linsat(inst: LinSatInstance) -> str:
    out = [f"p linsat {inst.n_rows} {inst.m_cols} {inst.t}"]
    out.extend(_format_bits(c, inst.n_rows) for c in inst.columns)
    out.append(_format_bits(inst.b, inst.n_rows))
    if inst.m_cols:
        out.append(' '.join(str(w) for w in inst.weights))
    return '\n'.join(out) + '\n'


#################################################################
# Certificate checks

def _distinct_indices(indices, m) -> bool:
    indices = list(indices)
    return len(set(indices)) == len(indices) and all(0 <= i < m for i in indices)


def verify_cover(inst: SetSystemInstance, certificate: Sequence[int]) -> bool:
    if certificate is None or not _distinct_indices(certificate, inst.m) or len(certificate) > inst.s:
        return False
    union = 0
    for i in certificate:
        union |= inst.sets[i]
    return union == inst.universe


def verify_partition(inst: SetSystemInstance, certificate: Sequence[int]) -> bool:
    if certificate is None or not _distinct_indices(certificate, inst.m) or len(certificate) != inst.s:
        return False
    union = 0
    for i in certificate:
        if union & inst.sets[i]:
            return False
        union |= inst.sets[i]
    return union == inst.universe


def verify_linsat(inst: LinSatInstance, x: Sequence[int]) -> bool:
    if x is None or len(x) != inst.m_cols or any(bit not in (0, 1) for bit in x):
        return False
    return inst.image(x) == inst.b and inst.cost(x) <= inst.t


def verify_coloring(g: SimpleGraph, colors: Sequence[int], k: int) -> bool:
    if colors is None or len(colors) != g.n or any(not 0 <= c < k for c in colors):
        return False
    return all(colors[u] != colors[v] for u, v in g.edges())


#################################################################
# Brute-force oracles

def _guard_set_system(inst: SetSystemInstance):
    check_guard(inst.n, cfg.BRUTE_FORCE_MAX_N, 'n')
    check_guard(inst.m, cfg.BRUTE_FORCE_MAX_M, 'm')


def brute_force_set_cover(inst: SetSystemInstance) -> Verdict:
    _guard_set_system(inst)
    everything = 0
    for f in inst.sets:
        everything |= f
    if everything != inst.universe:
        return make_verdict(False, branch='brute-force')

    # Increasing size, so the first hit is a minimum cover
    for size in range(min(inst.s, inst.m) + 1):
        for combo in itertools.combinations(range(inst.m), size):
            union = 0
            for i in combo:
                union |= inst.sets[i]
            if union == inst.universe:
                return make_verdict(True, certificate=combo, branch='brute-force')
    return make_verdict(False, branch='brute-force')


def brute_force_set_partition(inst: SetSystemInstance) -> Verdict:
    _guard_set_system(inst)
    if inst.s > inst.m:
        return make_verdict(False, branch='brute-force')
    for combo in itertools.combinations(range(inst.m), inst.s):
        union = 0
        for i in combo:
            if union & inst.sets[i]:
                break
            union |= inst.sets[i]
        else:
            if union == inst.universe:
                return make_verdict(True, certificate=combo, branch='brute-force')
    return make_verdict(False, branch='brute-force')


def find_coloring(g: SimpleGraph, k: int) -> Optional[List[int]]:
    """Backtracking k-colouring, most constrained vertex first. None when impossible"""
    if g.n == 0:
        return []
    if k <= 0:
        return None
    colors = [-1] * g.n

    def pick_vertex():
        best, best_key = None, None
        for v in range(g.n):
            if colors[v] >= 0:
                continue
            used = {colors[u] for u in bits_of(g.adjacency[v]) if colors[u] >= 0}
            key = (len(used), popcount(g.adjacency[v]))
            if best_key is None or key > best_key:
                best, best_key = v, key
        return best

    def assign(done):
        if done == g.n:
            return True
        v = pick_vertex()
        used = {colors[u] for u in bits_of(g.adjacency[v]) if colors[u] >= 0}
        # A fresh colour beyond the highest used one is symmetric to any other fresh colour
        highest = max(colors)
        for c in range(min(k, highest + 2)):
            if c in used:
                continue
            colors[v] = c
            if assign(done + 1):
                return True
            colors[v] = -1
        return False

    return list(colors) if assign(0) else None


def brute_force_chromatic(g: SimpleGraph) -> int:
    check_guard(g.n, cfg.CHROMATIC_MAX_N, 'vertices')
    if g.n == 0:
        return 0
    greedy = nx.greedy_color(g.to_networkx(), strategy='largest_first')
    upper = max(greedy.values()) + 1
    for k in range(1, upper):
        if find_coloring(g, k) is not None:
            return k
    return upper


def brute_force_linsat(inst: LinSatInstance) -> Verdict:
    check_guard(inst.m_cols, cfg.LINSAT_BRUTE_MAX_M, 'columns')
    check_guard(inst.n_rows, cfg.MAX_UNIVERSE, 'rows')

    # Index bit j of a candidate selects column j
    images = np.zeros(1, dtype=np.int64)
    costs = np.zeros(1, dtype=np.int64)
    weights = np.zeros(1, dtype=np.int64)
    for column, w in zip(inst.columns, inst.weights):
        images = np.concatenate([images, images ^ np.int64(column)])
        costs = np.concatenate([costs, costs + w])
        weights = np.concatenate([weights, weights + 1])

    feasible = np.flatnonzero(images == inst.b)
    if feasible.size == 0:
        return make_verdict(False, branch='brute-force')
    order = np.lexsort((feasible, weights[feasible], costs[feasible]))
    best = int(feasible[order[0]])
    if costs[best] > inst.t:
        return make_verdict(False, branch='brute-force')
    return make_verdict(True, certificate=[best >> j & 1 for j in range(inst.m_cols)], branch='brute-force')


#################################################################
# Generators

def generate_random_instance(params: GeneratorSpec, seed: RandomSeed) -> SetSystemInstance:
    n, m, r, s = params.n, params.m, params.r, params.s
    if params.planted and (s * r < n or s > n or m < s or (n > 0 and s == 0)):
        raise HypothesisViolation(f"cannot plant a partition of n={n} into s={s} blocks of size ≤ r={r} "
                                  f"within m={m} sets")
    if n > 0 and r < 1 and m > 0:
        raise HypothesisViolation("set size cap r must be at least 1")
    rng = as_seed(seed).rng()

    sets = []
    if params.planted and n > 0:
        # Every block gets one element, the rest go to blocks with spare capacity
        sizes = [1] * s
        for _ in range(n - s):
            open_blocks = [i for i in range(s) if sizes[i] < r]
            sizes[open_blocks[int(rng.integers(len(open_blocks)))]] += 1
        order = rng.permutation(n)
        start = 0
        for size in sizes:
            sets.append(mask_of(order[start:start + size]))
            start += size

    while len(sets) < m:
        if n == 0:
            sets.append(0)
            continue
        size = int(rng.integers(1, min(r, n) + 1))
        sets.append(mask_of(rng.choice(n, size=size, replace=False)))

    sets = [sets[i] for i in rng.permutation(len(sets))]
    log.debug(f"Generated instance n={n} m={m} r={r} s={s} planted={params.planted} seed={seed}")
    return SetSystemInstance(n, tuple(sets), s, allows_empty=any(f == 0 for f in sets))


def generate_random_graph(n: int, p: float, seed: RandomSeed) -> SimpleGraph:
    rng = as_seed(seed).rng()
    graph = nx.gnp_random_graph(n, p, seed=int(rng.integers(2 ** 32)))
    return SimpleGraph.from_networkx(graph)

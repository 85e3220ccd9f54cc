import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

from scipy.stats import norm

from assemblyline_setcover import config as cfg
from assemblyline_setcover.cli.base import CommandResult, positive_int, subcommand
from assemblyline_setcover.cli.files import read_graph, read_linsat, read_report_file, read_set_system
from assemblyline_setcover.config import LOGGER
from assemblyline_setcover.exceptions import SoundnessError, UsageError
from assemblyline_setcover.few_sets import algorithm_a3
from assemblyline_setcover.instances import (LinSatInstance, RandomSeed, brute_force_chromatic, brute_force_linsat,
                                             brute_force_set_cover, brute_force_set_partition,
                                             generate_random_graph, generate_random_instance, verify_coloring,
                                             verify_cover, verify_linsat, verify_partition)
from assemblyline_setcover.lattice import SetOracle, SingletonOracle
from assemblyline_setcover.linsat_solver import algorithm_a4
from assemblyline_setcover.models import GeneratorSpec, Verdict
from assemblyline_setcover.reductions import COVER, PARTITION
from assemblyline_setcover.sampled_solver import (IndependentSetOracle, chromatic_decision, small_set_limit,
                                                  solve_large_cover, solve_partition_explicit)

# Runs per sweep
SWEEPS = {'small': 20, 'medium': 100}


#################################################################
# Seeded instance sweeps: each case returns (solver verdict, ground truth answer)

def _set_system(seed: RandomSeed, planted: bool):
    rng = seed.derive(0).rng()
    n = int(rng.integers(4, 10))
    r = int(rng.integers(2, 4))
    s = int(rng.integers(math.ceil(n / r), n + 1))
    m = int(rng.integers(s, 2 * n + 1))
    return generate_random_instance(GeneratorSpec({'n': n, 'm': m, 'r': r, 's': s, 'planted': planted}),
                                    seed.derive(1))


def _cover_case(seed: RandomSeed) -> Tuple[Verdict, str]:
    inst = _set_system(seed, planted=bool(seed.path[-1] % 2))
    return solve_large_cover(inst, seed=seed.derive(2)), brute_force_set_cover(inst).answer


def _partition_case(seed: RandomSeed) -> Tuple[Verdict, str]:
    inst = _set_system(seed, planted=bool(seed.path[-1] % 2))
    return solve_partition_explicit(inst, seed=seed.derive(2)), brute_force_set_partition(inst).answer


def _few_sets_case(seed: RandomSeed) -> Tuple[Verdict, str]:
    inst = _set_system(seed, planted=bool(seed.path[-1] % 2))
    rng = seed.derive(3).rng()
    mode = (COVER, PARTITION)[int(rng.integers(2))]
    r = int(rng.integers(2, 5))
    truth = brute_force_set_cover(inst) if mode == COVER else brute_force_set_partition(inst)
    return algorithm_a3(inst, r, mode), truth.answer


def random_linsat(seed: RandomSeed) -> LinSatInstance:
    rng = seed.rng()
    rows = int(rng.integers(3, 7))
    m = int(rng.integers(3, 9))
    columns = tuple(int(c) for c in rng.integers(0, 1 << rows, size=m))
    b = int(rng.integers(1, 1 << rows))
    weights = tuple(int(w) for w in rng.integers(1, 6, size=m))
    t = int(rng.integers(1, sum(weights) + 1))
    return LinSatInstance(rows, m, columns, b, weights, t)


def _linsat_case(seed: RandomSeed) -> Tuple[Verdict, str]:
    inst = random_linsat(seed.derive(0))
    return algorithm_a4(inst, seed=seed.derive(1)), brute_force_linsat(inst).answer


def _chromatic_case(seed: RandomSeed) -> Tuple[Verdict, str]:
    rng = seed.derive(0).rng()
    n = int(rng.integers(4, 9))
    graph = generate_random_graph(n, 0.5, seed.derive(1))
    colors = int(rng.integers(2, 5))
    truth = 'YES' if brute_force_chromatic(graph) <= colors else 'NO'
    return chromatic_decision(graph, colors, seed=seed.derive(2)), truth


SOLVERS: Dict[str, Callable[[RandomSeed], Tuple[Verdict, str]]] = {
    'cover': _cover_case,
    'partition': _partition_case,
    'few-sets': _few_sets_case,
    'linsat': _linsat_case,
    'chromatic': _chromatic_case,
}


@subcommand('oracle-check', help="Cross-check a solver against brute force on a seeded sweep", arguments=[
    (('--solver',), dict(choices=sorted(SOLVERS), required=True)),
    (('--sweep',), dict(choices=sorted(SWEEPS), default='small')),
    (('--runs',), dict(type=positive_int, help="Override the sweep size")),
])
def oracle_check(args):
    """
    Run the solver against the matching brute-force oracle; exit 5 on any false positive.

    Result example:
    0 false positives / 20 runs
    """
    runs = args.runs or SWEEPS[args.sweep]
    case = SOLVERS[args.solver]
    false_positives = false_negatives = yes = 0
    for run in range(runs):
        verdict, truth = case(args.seed.derive(run))
        if verdict.answer == 'YES':
            yes += 1
            if truth == 'NO':
                false_positives += 1
                LOGGER.error(f"oracle-check {args.solver}: false positive at run {run}")
        elif truth == 'YES':
            false_negatives += 1
            LOGGER.debug(f"oracle-check {args.solver}: false negative at run {run}")

    data = {
        "command": "oracle-check",
        "solver": args.solver,
        "seed": args.seed.seed,
        "runs": runs,
        "yes": yes,
        "false_positives": false_positives,
        "false_negatives": false_negatives,
    }
    summary = f"{false_positives} false positives / {runs} runs"
    return CommandResult(data, summary=summary, status_code=SoundnessError.exit_code if false_positives else 0)


#################################################################
# Acceptance rate

def wilson_interval(accepted: int, runs: int, confidence: float = 0.95) -> Tuple[float, float]:
    if runs < 1:
        raise ValueError("the Wilson interval needs at least one run")
    z = norm.ppf(1 - (1 - confidence) / 2)
    p = accepted / runs
    denom = 1 + z * z / runs
    centre = (p + z * z / (2 * runs)) / denom
    half = z * math.sqrt(p * (1 - p) / runs + z * z / (4 * runs * runs)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _rate_solver(args) -> Callable[[RandomSeed], Verdict]:
    if args.solver == 'cover':
        inst = read_set_system(args.instance)
        inst = inst if args.size is None else inst.with_target(args.size)
        return lambda seed: solve_large_cover(inst, seed=seed)
    if args.solver == 'partition':
        inst = read_set_system(args.instance)
        inst = inst if args.size is None else inst.with_target(args.size)
        return lambda seed: solve_partition_explicit(inst, seed=seed)
    if args.solver == 'linsat':
        inst = read_linsat(args.instance)
        return lambda seed: algorithm_a4(inst, seed=seed, trials=args.trials)
    if args.size is None:
        raise UsageError("the chromatic solver needs --size (number of colours)")
    graph = read_graph(args.instance)
    return lambda seed: chromatic_decision(graph, args.size, seed=seed)


@subcommand('rate-estimate', help="Empirical acceptance frequency of a Monte Carlo solver", arguments=[
    (('--instance',), dict(required=True, help="Instance file")),
    (('--runs',), dict(type=positive_int, required=True)),
    (('--solver',), dict(choices=['cover', 'partition', 'linsat', 'chromatic'], default='cover')),
    (('--size',), dict(type=int, help="Target size (colours for the chromatic solver)")),
    (('--trials',), dict(type=positive_int, help="Linear Sat repetitions per run")),
])
def rate_estimate(args):
    """
    Run the solver with independent seeds and report how often it answers YES.

    Result example:
    accepted 37 / 40 runs, 95% interval [0.7993, 0.9741]
    """
    solve = _rate_solver(args)
    seeds = [args.seed.derive(run) for run in range(args.runs)]
    with ThreadPoolExecutor(max_workers=max(1, cfg.WORKERS)) as executor:
        # map keeps the run order whatever the completion order
        answers: List[str] = [verdict.answer for verdict in executor.map(solve, seeds)]
    accepted = answers.count('YES')
    low, high = wilson_interval(accepted, args.runs)
    data = {
        "command": "rate-estimate",
        "solver": args.solver,
        "seed": args.seed.seed,
        "runs": args.runs,
        "accepted": accepted,
        "frequency": accepted / args.runs,
        "wilson_95": [low, high],
        "answers": answers,
    }
    summary = f"accepted {accepted} / {args.runs} runs, 95% interval [{low:.4f}, {high:.4f}]"
    return CommandResult(data, summary=summary)


#################################################################
# Certificate re-check

def _report_oracle(report: dict, graph_path: Optional[str]) -> SetOracle:
    """Rebuild the membership oracle an oracle-mode partition report was solved against"""
    kind = report.get('oracle')
    if kind == 'singleton':
        return SingletonOracle()
    if kind == 'independent-set':
        path = graph_path or report.get('graph')
        if not path:
            raise UsageError("verify needs --input GRAPH for an independent-set report")
        graph = read_graph(path)
        if graph.n != report['n']:
            raise UsageError(f"graph has {graph.n} vertices, report has n={report['n']}")
        return IndependentSetOracle(graph, max_size=small_set_limit(report['target'], graph.n))
    raise UsageError(f"cannot rebuild the oracle of a '{kind}' report")


def _check_blocks(verdict: dict, n: int, target: int, oracle: SetOracle) -> bool:
    blocks = verdict.get('blocks') or []
    if len(blocks) != target:
        return False
    union = 0
    for block in blocks:
        mask = sum(1 << int(e) for e in block.split())
        if union & mask or mask >> n or not oracle(mask):
            return False
        union |= mask
    return union == (1 << n) - 1


@subcommand('verify', help="Re-check the certificate of a saved report", seeded=False, arguments=[
    (('--input',), dict(help="Instance file the report was produced from (the graph for an independent-set oracle)")),
    (('--from-report',), dict(dest='source', required=True, help="JSON report to check")),
])
def verify(args):
    """
    Re-verify a YES certificate directly against the instance; exit 5 when it does not check out.

    Result example:
    certificate verified
    """
    report = read_report_file(args.source)
    if not isinstance(report, dict) or 'verdict' not in report:
        raise UsageError(f"{args.source} does not hold a solver report")
    verdict = report['verdict']
    problem = report.get('problem')
    data = {"command": "verify", "problem": problem, "answer": verdict['answer']}
    if verdict['answer'] != 'YES':
        data['verified'] = None
        return CommandResult(data, summary="nothing to verify for a NO answer")

    certificate = verdict.get('certificate')
    if problem == 'partition' and certificate is None:
        ok = _check_blocks(verdict, report['n'], report['target'], _report_oracle(report, args.input))
    else:
        if args.input is None:
            raise UsageError("verify needs --input for this report")
        if problem == 'cover':
            ok = verify_cover(read_set_system(args.input).with_target(report['target']), certificate)
        elif problem == 'partition':
            ok = verify_partition(read_set_system(args.input).with_target(report['target']), certificate)
        elif problem == 'linsat':
            ok = verify_linsat(read_linsat(args.input), certificate)
        elif problem == 'coloring':
            ok = verify_coloring(read_graph(args.input), certificate, report['target'])
        else:
            raise UsageError(f"unknown problem {problem} in report")

    if not ok:
        raise SoundnessError(f"certificate in {args.source} does not verify")
    data['verified'] = True
    return CommandResult(data, summary="certificate verified")

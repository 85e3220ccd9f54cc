from assemblyline_setcover.cli.base import CommandResult, positive_int, subcommand
from assemblyline_setcover.cli.files import read_graph, read_linsat, read_set_system
from assemblyline_setcover.config import LOGGER
from assemblyline_setcover.exceptions import HypothesisViolation, SoundnessError, UsageError
from assemblyline_setcover.few_sets import algorithm_a3
from assemblyline_setcover.instances import popcount, verify_partition
from assemblyline_setcover.lattice import FamilyOracle, SingletonOracle
from assemblyline_setcover.linsat_solver import algorithm_a4
from assemblyline_setcover.models import Verdict, make_verdict, verdict_blocks
from assemblyline_setcover.reductions import MODES
from assemblyline_setcover.sampled_solver import (IndependentSetOracle, chromatic_decision, small_set_limit,
                                                  solve_large_cover, solve_partition_explicit,
                                                  solve_partition_oracle)


def verdict_result(command: str, problem: str, verdict: Verdict, seed, **fields) -> CommandResult:
    """Report block shared by every solving command"""
    LOGGER.info(f"{command}: {verdict.answer} ({verdict.branch})")
    data = {
        "command": command,
        "problem": problem,
        "seed": seed.seed if seed is not None else None,
        "verdict": verdict.as_primitives(),
        "layer_count": len(verdict.layers),
    }
    data.update(fields)

    summary = [f"verdict: {verdict.answer}"]
    if verdict.certificate is not None:
        summary.append(f"certificate: {' '.join(str(x) for x in verdict.certificate)}")
    if verdict.blocks is not None:
        summary.append(f"blocks: {' | '.join(verdict.blocks)}")
    return CommandResult(data, summary='\n'.join(summary))


def _target(inst, size):
    return inst if size is None else inst.with_target(size)


@subcommand('solve-cover', help="Monte Carlo Set Cover at size <= s", arguments=[
    (('--input',), dict(required=True, help="Set system file")),
    (('--size',), dict(type=int, help="Target size, overrides the file header")),
    (('--sigma',), dict(type=float, help="Override sigma = s/n")),
    (('--delta',), dict(type=float, default=0.25, help="Failure probability of the amplified search")),
])
def solve_cover(args):
    """
    Decide whether the universe can be covered with at most s sets.

    Result example:
    verdict: YES
    certificate: 0 3 5
    {"report": {"command": "solve-cover", "verdict": {"answer": "YES", ...}, ...}, ...}
    """
    inst = _target(read_set_system(args.input), args.size)
    verdict = solve_large_cover(inst, sigma=args.sigma, seed=args.seed, delta=args.delta)
    return verdict_result('solve-cover', 'cover', verdict, args.seed, n=inst.n, m=inst.m, target=inst.s)


def _blocks_to_indices(inst, verdict: Verdict) -> Verdict:
    """Blocks of an oracle answer mapped back to set indices of the explicit family"""
    if verdict.answer != 'YES':
        return verdict
    used = set()
    certificate = []
    for block in verdict_blocks(verdict):
        mask = sum(1 << e for e in block)
        index = next(i for i, f in enumerate(inst.sets) if f == mask and i not in used)
        used.add(index)
        certificate.append(index)
    empties = [i for i, f in enumerate(inst.sets) if f == 0]
    certificate.extend(empties[:inst.s - len(certificate)])
    certificate.sort()
    if not verify_partition(inst, certificate):
        raise SoundnessError(f"oracle answer does not map back to a partition: {certificate}")
    return make_verdict(True, certificate=certificate, blocks=verdict_blocks(verdict), branch=verdict.branch,
                        layers=verdict.layers)


@subcommand('solve-partition', help="Monte Carlo Set Partition, explicit or through an oracle", arguments=[
    (('--input',), dict(help="Set system file (explicit family)")),
    (('--oracle',), dict(help="singleton | independent-set:GRAPH | family (oracle over --input)")),
    (('--n',), dict(type=int, help="Universe size for the singleton oracle")),
    (('--size',), dict(type=int, help="Exact partition size")),
])
def solve_partition(args):
    """
    Decide whether the universe splits into exactly s sets.

    Arguments:
    --input     => explicit family, searched with the sampled halve search
    --oracle    => family only reachable through membership queries

    Result example:
    verdict: YES
    blocks: 0 3 | 1 2 | 4
    """
    if args.oracle is None:
        if args.input is None:
            raise UsageError("solve-partition needs --input or --oracle")
        inst = _target(read_set_system(args.input), args.size)
        verdict = solve_partition_explicit(inst, seed=args.seed)
        return verdict_result('solve-partition', 'partition', verdict, args.seed, n=inst.n, m=inst.m,
                              target=inst.s)

    if args.size is None:
        raise UsageError("oracle mode needs --size")
    kind, _, path = args.oracle.partition(':')
    if kind == 'singleton':
        if args.n is None:
            raise UsageError("the singleton oracle needs --n")
        n, oracle = args.n, SingletonOracle()
        verdict = solve_partition_oracle(oracle, n, args.size, seed=args.seed)
    elif kind == 'independent-set':
        if not path:
            raise UsageError("use --oracle independent-set:GRAPH")
        graph = read_graph(path)
        n = graph.n
        oracle = IndependentSetOracle(graph, max_size=small_set_limit(args.size, n))
        verdict = solve_partition_oracle(oracle, n, args.size, seed=args.seed)
    elif kind == 'family':
        if args.input is None:
            raise UsageError("the family oracle needs --input")
        inst = read_set_system(args.input).with_target(args.size)
        n = inst.n
        limit = small_set_limit(inst.s, n)
        for index, f in enumerate(inst.sets):
            if popcount(f) > limit:
                raise HypothesisViolation(f"set {index} has {popcount(f)} > {limit} elements")
        nonempty = FamilyOracle(f for f in inst.sets if f)
        verdict = _blocks_to_indices(inst, solve_partition_oracle(nonempty, n, inst.s, seed=args.seed))
    else:
        raise UsageError(f"unknown oracle {args.oracle}")
    return verdict_result('solve-partition', 'partition', verdict, args.seed, n=n, target=args.size,
                          oracle=kind, graph=path or None)


@subcommand('chromatic', help="Decide chi(G) <= s", arguments=[
    (('--graph',), dict(required=True, help="DIMACS graph file")),
    (('--colors',), dict(type=int, required=True, help="Number of colours s")),
])
def chromatic(args):
    """
    Colour the graph with s colours, or answer NO.

    Result example:
    verdict: YES
    certificate: 0 1 0 2 1
    """
    graph = read_graph(args.graph)
    verdict = chromatic_decision(graph, args.colors, seed=args.seed)
    return verdict_result('chromatic', 'coloring', verdict, args.seed, n=graph.n, target=args.colors)


@subcommand('linsat', help="Monte Carlo Linear Sat", arguments=[
    (('--input',), dict(required=True, help="Linear Sat file")),
    (('--trials',), dict(type=positive_int, help="Repetitions of the representation search")),
])
def linsat(args):
    """
    Find x with Ax = b over GF(2) and weight at most t.

    Result example:
    verdict: YES
    certificate: 1 0 0 1 1
    """
    inst = read_linsat(args.input)
    verdict = algorithm_a4(inst, seed=args.seed, trials=args.trials)
    return verdict_result('linsat', 'linsat', verdict, args.seed, n=inst.n_rows, m=inst.m_cols, target=inst.t)


@subcommand('few-sets', help="Exact branching on large sets", seeded=False, arguments=[
    (('--input',), dict(required=True, help="Set system file")),
    (('--r',), dict(type=positive_int, required=True, help="Branch on sets with at least r elements")),
    (('--mode',), dict(choices=MODES, required=True)),
    (('--size',), dict(type=int, help="Target size, overrides the file header")),
])
def few_sets(args):
    inst = _target(read_set_system(args.input), args.size)
    verdict = algorithm_a3(inst, args.r, args.mode)
    return verdict_result('few-sets', args.mode, verdict, None, n=inst.n, m=inst.m, target=inst.s, r=args.r)

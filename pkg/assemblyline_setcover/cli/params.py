from assemblyline_setcover.cli.base import CommandResult, positive_int, subcommand
from assemblyline_setcover.few_sets import lambda_r
from assemblyline_setcover.instances import generate_random_instance, serialize_set_system
from assemblyline_setcover.linsat_solver import linsat_exponent
from assemblyline_setcover.models import GeneratorSpec
from assemblyline_setcover.witness import schedule_for_sigma


@subcommand('params', help="Parameter schedule and running time exponents", seeded=False, arguments=[
    (('--sigma',), dict(type=float, required=True, help="s/n")),
    (('--n',), dict(type=positive_int, required=True, help="Universe size")),
    (('--r-max',), dict(type=int, default=10, help="Largest r of the lambda_r table")),
])
def params(args):
    """
    Print the sampling schedule for sigma and n, the Linear Sat exponent and lambda_r for r = 2..r-max.

    Result example:
    zeta=0.2 beta=0.01 rate=2^-4 layers=10..10
    """
    sched = schedule_for_sigma(args.sigma, args.n)
    sigma_star, exponent = linsat_exponent()
    lambdas = {str(r): lambda_r(r) for r in range(2, args.r_max + 1)}
    data = {
        "command": "params",
        "schedule": sched.as_primitives(),
        "linsat_exponent": {"sigma": sigma_star, "value": exponent},
        "lambda_r": lambdas,
    }
    layers = f"{sched.layers[0]}..{sched.layers[-1]}" if sched.layers else "none"
    summary = [f"zeta={sched.zeta:g} beta={sched.beta:g} rate=2^-{sched.zeta * sched.n:g} layers={layers}",
               f"linsat exponent {exponent:.4f} at sigma={sigma_star:.4f}"]
    summary.extend(f"lambda_{r}={value:.4f}" for r, value in lambdas.items())
    return CommandResult(data, summary='\n'.join(summary))


@subcommand('generate', help="Write a seeded random set system", arguments=[
    (('--n',), dict(type=int, required=True)),
    (('--m',), dict(type=int, required=True)),
    (('--r',), dict(type=int, required=True, help="Largest set size")),
    (('--size',), dict(type=int, default=0, help="Target size s")),
    (('--planted',), dict(action='store_true', help="Plant a partition of the universe into s blocks")),
    (('--output',), dict(help="Instance file to write")),
])
def generate(args):
    spec = GeneratorSpec({'n': args.n, 'm': args.m, 'r': args.r, 's': args.size, 'planted': args.planted})
    text = serialize_set_system(generate_random_instance(spec, args.seed))
    if args.output:
        with open(args.output, 'w') as fh:
            fh.write(text)
    data = {"command": "generate", "seed": args.seed.seed, "spec": spec.as_primitives(), "instance": text}
    return CommandResult(data, summary=None if args.output else text.rstrip('\n'))

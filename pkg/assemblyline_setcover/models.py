from typing import List, Optional as Opt

from assemblyline import odm

ANSWERS = {'YES', 'NO'}
BRANCHES = {'brute-force', 'folklore-dp', 'large-set', 'sampled-halves', 'small-solution',
            'branching', 'representation', 'isd', 'trivial', 'independent-set', 'oracle'}


@odm.model()
class LayerStats(odm.Model):
    """Size accounting for one sampled layer of the halve search"""
    layer: int = odm.Integer()                     # Size l of the sampled subsets
    sampled: int = odm.Integer()                   # Number of subsets kept by the sampler
    closure_size: int = odm.Integer()              # Size of the down-closure of the sample
    complement_closure_size: int = odm.Integer()   # Size of the down-closure of the complements
    oracle_cost: int = odm.Integer(default=0)      # Closure members queried times the oracle's per-query cost bound


@odm.model()
class Verdict(odm.Model):
    """Answer of a decision procedure.

    A YES answer always carries something that can be checked directly against the instance.
    """
    answer: str = odm.Enum(values=ANSWERS)                          # YES or NO
    certificate: Opt[List[int]] = odm.Optional(odm.List(odm.Integer()))  # Set indices, column indices or colours
    blocks: Opt[List[str]] = odm.Optional(odm.List(odm.Keyword()))  # Space separated elements of each block
    branch: Opt[str] = odm.Optional(odm.Enum(values=BRANCHES))      # Which part of the algorithm decided
    layers: List[LayerStats] = odm.List(odm.Compound(LayerStats), default=[])  # Per layer closure sizes


@odm.model()
class ParamSchedule(odm.Model):
    """Sampling parameters handed to the halve search"""
    sigma: float = odm.Float()        # s/n of the whole instance
    sigma0: float = odm.Float()       # s'/n of the current iteration
    zeta: float = odm.Float()         # Sampling exponent
    beta: float = odm.Float()         # Balance slack of the halves
    sample_rate: float = odm.Float()  # 2^-(zeta*n)
    repeats: int = odm.Integer()      # Independent passes
    n: int = odm.Integer()            # Universe size the schedule was made for
    layers: List[int] = odm.List(odm.Integer(), default=[])  # Layer sizes l visited by one pass


@odm.model()
class GeneratorSpec(odm.Model):
    """Parameters of the random instance generator"""
    n: int = odm.Integer()                        # Universe size
    m: int = odm.Integer()                        # Number of sets
    r: int = odm.Integer()                        # Largest set size
    planted: bool = odm.Boolean(default=False)    # Inject a partition of U into s blocks
    s: int = odm.Integer(default=0)               # Target solution size


def make_verdict(answer, certificate=None, blocks=None, branch=None, layers=None) -> Verdict:
    data = {'answer': 'YES' if answer is True else 'NO' if answer is False else answer}
    if certificate is not None:
        data['certificate'] = [int(x) for x in certificate]
    if blocks is not None:
        # Keywords cannot be empty; empty blocks add no elements and are left out
        data['blocks'] = [' '.join(str(e) for e in block) for block in blocks if block]
    if branch is not None:
        data['branch'] = branch
    if layers:
        data['layers'] = layers
    return Verdict(data)


def verdict_blocks(verdict: Verdict) -> List[List[int]]:
    if not verdict.blocks:
        return []
    return [[int(e) for e in block.split()] for block in verdict.blocks]

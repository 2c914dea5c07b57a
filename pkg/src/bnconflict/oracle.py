"""Brute-force reference computations over the full joint distribution.

Nothing here goes through the junction tree or the :mod:`potential` algebra:
the joint is built by broadcasting raw CPT arrays, so agreement with the
propagation engine is an independent check.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .model import build_network

MAX_LOG2_STATES = 22
MAX_SURPRISE_CELLS = 2 ** 16


@dataclass
class JointTable:
    """Full joint over all network variables, axes in declaration order."""

    names: tuple
    values: np.ndarray

    def axis(self, name):
        return self.names.index(name)


def enumerate_joint(network):
    cards = [v.card for v in network.variables]
    if sum(math.log2(c) for c in cards) > MAX_LOG2_STATES:
        raise TooLarge(f"joint over {len(cards)} variables exceeds 2**{MAX_LOG2_STATES} cells")
    names = network.names
    joint = np.ones(cards)
    for name in names:
        fam = network.family(name)
        table = np.asarray(network.cpts[name].values, dtype=float).reshape(
            [network[n].card for n in fam]
        )
        axes = sorted(range(len(fam)), key=lambda k: names.index(fam[k]))
        table = np.transpose(table, axes)
        shape = [network[n].card if n in fam else 1 for n in names]
        joint = joint * table.reshape(shape)
    return JointTable(names, joint)


def _mask_array(joint, findings):
    """Product of finding masks broadcast to the joint's shape.

    ``findings`` holds ``(name, mask)`` pairs or objects with ``variable`` and
    ``mask`` attributes.
    """
    out = np.ones(joint.values.shape)
    for f in findings:
        if hasattr(f, "variable"):
            name, mask = f.variable.name, f.mask
        else:
            name, mask = f
        shape = [1] * len(joint.names)
        shape[joint.axis(name)] = -1
        out = out * np.asarray(mask, dtype=float).reshape(shape)
    return out


def oracle_query(joint, findings, targets):
    """Posterior over ``targets`` (axes in declaration order) and ``P(findings)``.

    A zero-probability finding set gives a zero table and probability 0.
    """
    masked = joint.values * _mask_array(joint, findings)
    mass = float(masked.sum())
    keep = sorted({joint.axis(t) for t in targets})
    drop = tuple(i for i in range(len(joint.names)) if i not in keep)
    table = masked.sum(axis=drop) if drop else masked
    if mass > 0:
        table = table / mass
    else:
        table = np.zeros(table.shape)
    return table, mass


def oracle_conf(joint, findings):
    """conf computed directly from enumerated probabilities."""
    priors = [oracle_query(joint, [f], [])[1] for f in findings]
    _, mass = oracle_query(joint, findings, [])
    if mass <= 0:
        return math.inf
    return sum(math.log2(p) for p in priors) - math.log2(mass)


def surprise_index(joint, configuration, variables=None):
    """Sum of ``P(c)`` over configurations ``c`` of ``variables`` with ``P(c) <= P(f)``.

    Parameters
    ----------
    joint : JointTable
    configuration : mapping name -> state index
        The observed configuration ``f``; must fix every variable in ``variables``.
    variables : sequence of names, optional
        Defaults to the keys of ``configuration``.
    """
    if variables is None:
        variables = list(configuration)
    axes = sorted(joint.axis(v) for v in variables)
    cells = int(np.prod([joint.values.shape[a] for a in axes]))
    if cells > MAX_SURPRISE_CELLS:
        raise TooLarge(f"surprise index over {cells} configurations")
    drop = tuple(i for i in range(len(joint.names)) if i not in axes)
    table = joint.values.sum(axis=drop) if drop else joint.values
    index = tuple(configuration[joint.names[a]] for a in axes)
    p = table[index]
    return float(table[table <= p].sum())


def forward_sample(network, seed, count):
    """Ancestral samples as tuples of state indices in declaration order."""
    rng = np.random.default_rng(seed)
    order = network.topological_order()
    pos = {n: i for i, n in enumerate(network.names)}
    samples = []
    for _ in range(count):
        config = [0] * len(network)
        for name in order:
            rows = network.cpt_rows(name)
            row_index = 0
            for p in network.parents[name]:
                row_index = row_index * network[p].card + config[pos[p]]
            cdf = np.cumsum(rows[row_index])
            k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            config[pos[name]] = min(k, len(cdf) - 1)
        samples.append(tuple(config))
    return samples


def random_network(rng, max_vars=8, max_states=3, max_parents=3, zero_prob=0.1):
    """A random network for property tests.

    Variables are generated in a random topological order and then declared
    in shuffled order. Each CPT entry is zeroed with probability
    ``zero_prob`` (keeping one positive entry per row).
    """
    n = int(rng.integers(1, max_vars + 1))
    names = [f"V{i}" for i in range(n)]
    cards = {name: int(rng.integers(2, max_states + 1)) for name in names}
    parents = {}
    for i, name in enumerate(names):
        k = int(rng.integers(0, min(i, max_parents) + 1))
        parents[name] = [names[j] for j in sorted(rng.choice(i, size=k, replace=False))] if k else []
    tables = {}
    for name in names:
        rows = int(np.prod([cards[p] for p in parents[name]])) if parents[name] else 1
        t = rng.dirichlet(np.ones(cards[name]), size=rows)
        zeros = rng.random(t.shape) < zero_prob
        for r in range(rows):
            keep = int(rng.integers(cards[name]))
            zeros[r, keep] = False
        t[zeros] = 0.0
        t = t / t.sum(axis=1, keepdims=True)
        tables[name] = t.reshape(-1)
    declared = [names[i] for i in rng.permutation(n)]
    variables = [(name, [f"s{k}" for k in range(cards[name])]) for name in declared]
    return build_network(variables, parents, tables)


def random_findings(rng, network, max_findings=4):
    """Random ``(name, mask)`` pairs; masks always keep at least one state."""
    k = int(rng.integers(0, min(max_findings, len(network)) + 1))
    chosen = rng.choice(len(network), size=k, replace=False)
    out = []
    for idx in chosen:
        var = network.variables[int(idx)]
        if rng.random() < 0.7:
            mask = [0] * var.card
            mask[int(rng.integers(var.card))] = 1
        else:
            mask = list(rng.integers(0, 2, size=var.card))
            mask[int(rng.integers(var.card))] = 1
        out.append((var.name, tuple(int(m) for m in mask)))
    return out

"""Discrete Bayesian networks: variables, parent sets and conditional tables."""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadCptShape,
    CycleDetected,
    DuplicateName,
    InvalidVariable,
    RowNotNormalized,
    UnknownVariable,
)
from .potential import Potential, Variable

ROW_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    """One entry of a validation report."""

    kind: str
    variable: str
    detail: str
    row: int = None

    @property
    def error(self):
        return _ERRORS[self.kind]


_ERRORS = {
    "DuplicateName": DuplicateName,
    "UnknownVariable": UnknownVariable,
    "CycleDetected": CycleDetected,
    "BadCptShape": BadCptShape,
    "RowNotNormalized": RowNotNormalized,
    "MissingCpt": BadCptShape,
}


@dataclass(frozen=True, eq=False)
class Network:
    """A DAG of discrete variables with a CPT ``P(A | pa(A))`` per variable.

    ``cpts[name]`` is a :class:`Potential` over ``parents[name] + (name,)``,
    so with row-major layout each consecutive block of ``card`` cells is one
    distribution of the child given a parent configuration.

    Instances made directly are not checked; use :func:`build_network` for a
    validated one, or :func:`validate` to get a report.
    """

    variables: tuple
    parents: dict
    cpts: dict
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "_index", {v.name: i for i, v in enumerate(self.variables)})

    @property
    def names(self):
        return tuple(v.name for v in self.variables)

    def __getitem__(self, name):
        try:
            return self.variables[self._index[name]]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def __contains__(self, name):
        return name in self._index

    def __len__(self):
        return len(self.variables)

    def position(self, name):
        return self._index[name]

    def family(self, name):
        return tuple(self.parents[name]) + (name,)

    def children(self, name):
        return tuple(c for c in self.names if name in self.parents[c])

    def topological_order(self):
        """Kahn's algorithm, always releasing the earliest-declared ready variable."""
        order = _toposort(self.names, self.parents)
        if order is None:
            raise CycleDetected("parent relation contains a directed cycle")
        return order

    def cpt_rows(self, name):
        cpt = self.cpts[name]
        return cpt.values.reshape(-1, self[name].card)

    def sort_key(self, names):
        """Names sorted by declaration order."""
        return sorted(names, key=self._index.__getitem__)


def _toposort(names, parents):
    index = {n: i for i, n in enumerate(names)}
    pending = {n: len(set(parents.get(n, ()))) for n in names}
    children = {n: [] for n in names}
    for n in names:
        for p in set(parents.get(n, ())):
            if p in children:
                children[p].append(n)
    ready = sorted((n for n in names if pending[n] == 0), key=index.__getitem__)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for c in children[n]:
            pending[c] -= 1
            if pending[c] == 0:
                ready.append(c)
        ready.sort(key=index.__getitem__)
    return tuple(order) if len(order) == len(names) else None


def validate(network):
    """List every violated invariant of ``network``; an empty list means valid."""
    report = []
    names = [v.name for v in network.variables]
    seen = set()
    for n in names:
        if n in seen:
            report.append(Violation("DuplicateName", n, "variable declared twice"))
        seen.add(n)

    for n in names:
        for p in network.parents.get(n, ()):
            if p not in seen:
                report.append(Violation("UnknownVariable", n, f"parent {p!r} is not declared"))
        if len(set(network.parents.get(n, ()))) != len(network.parents.get(n, ())):
            report.append(Violation("DuplicateName", n, "parent listed twice"))
    known = {n: [p for p in network.parents.get(n, ()) if p in seen] for n in names}
    if _toposort(list(dict.fromkeys(names)), known) is None:
        report.append(Violation("CycleDetected", "", "parent relation contains a directed cycle"))

    for var in network.variables:
        n = var.name
        cpt = network.cpts.get(n)
        if cpt is None:
            report.append(Violation("MissingCpt", n, "no conditional table"))
            continue
        family = tuple(network.parents.get(n, ())) + (n,)
        if cpt.names != family:
            report.append(
                Violation("BadCptShape", n, f"table domain {cpt.names} != family {family}")
            )
            continue
        rows = cpt.values.reshape(-1, var.card)
        for i, s in enumerate(rows.sum(axis=1)):
            if abs(s - 1.0) > ROW_TOL:
                report.append(
                    Violation("RowNotNormalized", n, f"row {i} sums to {s!r}", row=i)
                )
    return report


def build_network(variables, parent_map, cpt_tables):
    """Build and validate a network.

    Parameters
    ----------
    variables : sequence of Variable or (name, states) pairs
        Declaration order is kept.
    parent_map : mapping name -> sequence of parent names
        Missing entries mean no parents.
    cpt_tables : mapping name -> array_like
        Row-major table over ``parents + (child,)``: the parents vary slower
        than the child, in the order given in ``parent_map``.

    Raises the error class of the first violation found.
    """
    vars_ = []
    for v in variables:
        if not isinstance(v, Variable):
            name, states = v
            v = Variable(name, tuple(states))
        vars_.append(v)
    by_name = {}
    for v in vars_:
        if v.name in by_name:
            raise DuplicateName(f"variable {v.name!r} declared twice")
        by_name[v.name] = v
    for child in list(parent_map) + list(cpt_tables):
        if child not in by_name:
            raise UnknownVariable(f"unknown variable {child!r}")

    parents = {}
    for v in vars_:
        ps = tuple(parent_map.get(v.name, ()))
        for p in ps:
            if p not in by_name:
                raise UnknownVariable(f"parent {p!r} of {v.name!r} is not declared")
        parents[v.name] = ps
    if _toposort([v.name for v in vars_], parents) is None:
        raise CycleDetected("parent relation contains a directed cycle")

    cpts = {}
    for v in vars_:
        if v.name not in cpt_tables:
            raise BadCptShape(f"no conditional table for {v.name!r}")
        domain = [by_name[p] for p in parents[v.name]] + [v]
        size = int(np.prod([d.card for d in domain]))
        table = np.asarray(cpt_tables[v.name], dtype=float)
        if table.size != size:
            raise BadCptShape(
                f"table for {v.name!r} has {table.size} entries, expected {size}"
            )
        if np.any(table < 0):
            raise BadCptShape(f"table for {v.name!r} has negative entries")
        cpts[v.name] = Potential(domain, table)

    net = Network(vars_, parents, cpts)
    report = validate(net)
    if report:
        first = report[0]
        raise first.error(f"{first.variable}: {first.detail}")
    return net


__all__ = [
    "Network",
    "Variable",
    "Violation",
    "InvalidVariable",
    "build_network",
    "validate",
]

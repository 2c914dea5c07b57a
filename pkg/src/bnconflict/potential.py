"""Non-negative tables over the configuration space of a set of variables.

A :class:`Potential` is a dense numpy array with one axis per variable in its
domain, stored C-contiguous, so the flat row-major layout has the first domain
variable varying slowest. Operations never mutate their operands.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DivisionByZero,
    InvalidVariable,
    KeepNotSubset,
    PotentialError,
    StateSetMismatch,
    VariableNotInDomain,
)


@dataclass(frozen=True)
class Variable:
    """A discrete variable with an ordered tuple of named states."""

    name: str
    states: tuple

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.name:
            raise InvalidVariable("variable name must be non-empty")
        if len(self.states) < 2:
            raise InvalidVariable(
                f"variable {self.name!r} needs at least 2 states, got {len(self.states)}"
            )
        if len(set(self.states)) != len(self.states):
            raise InvalidVariable(f"variable {self.name!r} has duplicate state names")

    @property
    def card(self):
        return len(self.states)

    def index(self, state):
        try:
            return self.states.index(state)
        except ValueError:
            raise KeyError(f"{self.name!r} has no state {state!r}") from None

    def __repr__(self):
        return f"Variable({self.name!r}, {self.states!r})"


class Potential:
    """A table ``phi : Sp(domain) -> [0, inf)``.

    Parameters
    ----------
    domain : sequence of Variable
        Distinct variables; axis ``i`` of ``values`` indexes ``domain[i]``.
    values : array_like, optional
        Either already shaped ``(card_0, ..., card_k)`` or flat row-major.
        Defaults to all ones.
    """

    __slots__ = ("domain", "values")

    def __init__(self, domain, values=None):
        domain = tuple(domain)
        names = [v.name for v in domain]
        if len(set(names)) != len(names):
            raise PotentialError(f"domain variables must be distinct: {names}")
        shape = tuple(v.card for v in domain)
        if values is None:
            arr = np.ones(shape)
        else:
            arr = np.array(values, dtype=float)
            if arr.size != int(np.prod(shape, dtype=np.int64)):
                raise PotentialError(
                    f"table of size {arr.size} does not match domain {names} (size {int(np.prod(shape))})"
                )
            arr = arr.reshape(shape)
        if np.any(arr < 0) or np.any(np.isnan(arr)):
            raise PotentialError("potential values must be non-negative")
        arr.setflags(write=False)
        self.domain = domain
        self.values = arr

    # -- introspection ---------------------------------------------------

    @property
    def names(self):
        return tuple(v.name for v in self.domain)

    @property
    def flat(self):
        return self.values.reshape(-1)

    def total(self):
        return float(self.values.sum())

    def variable(self, name):
        for v in self.domain:
            if v.name == name:
                return v
        raise VariableNotInDomain(f"{name!r} not in domain {self.names}")

    def transpose(self, order):
        """Reorder axes to follow ``order`` (names or variables)."""
        order = [_name(v) for v in order]
        if sorted(order) != sorted(self.names):
            raise PotentialError(f"{order} is not a permutation of {self.names}")
        axes = [self.names.index(n) for n in order]
        return Potential([self.domain[a] for a in axes], np.transpose(self.values, axes))

    def allclose(self, other, atol=1e-12):
        if set(self.names) != set(other.names):
            return False
        return bool(np.allclose(self.values, other.transpose(self.names).values, rtol=0, atol=atol))

    def __repr__(self):
        return f"Potential({list(self.names)}, {self.flat.tolist()})"


def _name(v):
    return v if isinstance(v, str) else v.name


def _aligned(phi, union):
    """View of ``phi.values`` broadcastable against the space of ``union``."""
    axes = [phi.names.index(v.name) for v in union if v.name in phi.names]
    arr = np.transpose(phi.values, axes)
    shape = [v.card if v.name in phi.names else 1 for v in union]
    return arr.reshape(shape)


def _union(phi, psi):
    union = list(phi.domain)
    seen = {v.name: v for v in phi.domain}
    for v in psi.domain:
        if v.name in seen:
            if seen[v.name].states != v.states:
                raise StateSetMismatch(
                    f"variable {v.name!r} has states {seen[v.name].states} vs {v.states}"
                )
        else:
            union.append(v)
    return union


def multiply(phi, psi):
    """Pointwise product over the union of the two domains.

    The result's domain is ``phi``'s variables followed by the variables of
    ``psi`` not already present.
    """
    union = _union(phi, psi)
    return Potential(union, _aligned(phi, union) * _aligned(psi, union))


def marginalize(phi, keep):
    """Sum out every variable not in ``keep``; surviving axes keep ``phi``'s order."""
    keep = {_name(v) for v in keep}
    missing = keep - set(phi.names)
    if missing:
        raise KeepNotSubset(f"{sorted(missing)} not in domain {phi.names}")
    drop = tuple(i for i, n in enumerate(phi.names) if n not in keep)
    kept = [v for v in phi.domain if v.name in keep]
    return Potential(kept, phi.values.sum(axis=drop) if drop else phi.values)


def divide(phi, psi):
    """Cellwise ``phi / psi`` over ``phi``'s domain with ``0/0 = 0``.

    Raises
    ------
    DivisionByZero
        If some cell has a positive numerator over a zero denominator.
    """
    if not set(psi.names) <= set(phi.names):
        raise KeepNotSubset(f"divisor domain {psi.names} not within {phi.names}")
    _union(phi, psi)
    num = phi.values
    den = np.broadcast_to(_aligned(psi, phi.domain), num.shape)
    bad = (den == 0) & (num > 0)
    if np.any(bad):
        index = int(np.flatnonzero(bad)[0])
        raise DivisionByZero(f"positive value over zero at flat index {index}", index=index)
    out = np.zeros(num.shape)
    np.divide(num, den, out=out, where=den > 0)
    return Potential(phi.domain, out)


def finding_potential(variable, mask):
    return Potential([variable], np.asarray(mask, dtype=float))


def apply_finding(phi, finding):
    """Zero every cell whose state of ``finding.variable`` is masked out."""
    var = finding.variable
    if var.name not in phi.names:
        raise VariableNotInDomain(f"{var.name!r} not in domain {phi.names}")
    mask = finding_potential(var, finding.mask)
    return Potential(phi.domain, phi.values * _aligned(mask, phi.domain))


def normalize(phi):
    """Return ``(phi / sum(phi), sum(phi))``; a zero table comes back unchanged with constant 0."""
    z = phi.total()
    if z <= 0:
        return Potential(phi.domain, np.zeros(phi.values.shape)), 0.0
    return Potential(phi.domain, phi.values / z), z


def ones(domain):
    return Potential(domain)

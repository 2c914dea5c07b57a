"""Evidence entry and message passing on a compiled junction tree.

A :class:`Session` owns a working copy of the clique beliefs. Opening one runs
an evidence-free calibration, after which every clique holds its normalized
prior marginal; single-finding priors are read from that state. Collecting
evidence always starts again from that baseline with all entered findings
applied, so the normalization record of every clique is the probability of the
findings entered in its subtree.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroMask,
    InconsistentEvidence,
    NotCalibrated,
    NotCoveredByAnyClique,
    UnknownVariable,
    ZeroPriorFinding,
)
from .potential import (
    Potential,
    apply_finding,
    divide,
    marginalize,
    multiply,
    normalize,
)


@dataclass(frozen=True)
class Finding:
    """Hard evidence on one variable: ``mask[i] == 0`` rules out state ``i``."""

    variable: object
    mask: tuple
    label: str = ""

    def __post_init__(self):
        mask = tuple(int(m) for m in self.mask)
        if len(mask) != self.variable.card:
            raise AllZeroMask(
                f"mask for {self.variable.name!r} has length {len(mask)}, expected {self.variable.card}"
            )
        if any(m not in (0, 1) for m in mask):
            raise AllZeroMask(f"mask for {self.variable.name!r} must be 0/1, got {mask}")
        if not any(mask):
            raise AllZeroMask(f"finding on {self.variable.name!r} rules out every state")
        object.__setattr__(self, "mask", mask)
        if not self.label:
            object.__setattr__(self, "label", _default_label(self.variable, mask))

    @classmethod
    def state(cls, variable, state, label=""):
        mask = [0] * variable.card
        mask[variable.index(state)] = 1
        return cls(variable, tuple(mask), label)

    @property
    def states(self):
        return tuple(s for s, m in zip(self.variable.states, self.mask) if m)


def _default_label(variable, mask):
    allowed = [s for s, m in zip(variable.states, mask) if m]
    if len(allowed) == 1:
        return f"{variable.name}={allowed[0]}"
    return f"{variable.name} in {{{', '.join(allowed)}}}"


@dataclass(frozen=True)
class EnteredFinding:
    finding: Finding
    clique: int
    prior: float

    @property
    def label(self):
        return self.finding.label


class Session:
    """Propagation state over one compiled tree. Not safe for concurrent mutation."""

    def __init__(self, tree):
        self.tree = tree
        self.network = tree.network
        self.findings = []
        self.node_records = {}
        self.subtree_findings = {}
        self.children = {}
        self.root = None
        self.calibrated = False
        self._collected = False
        self._evidence_probability = None

        self.beliefs = {c.id: normalize(c.belief)[0] for c in tree.cliques}
        self.sepsets = {(a, b): Potential([self.network[v] for v in s]) for a, b, s in tree.edges}
        root = tree.auto_root()
        self._collect(root, [])
        self._distribute(root)
        self._base_beliefs = dict(self.beliefs)
        self._base_sepsets = dict(self.sepsets)
        self._priors = {
            name: self._clique_marginal(tree.entry_home[name], name) for name in self.network.names
        }
        self.findings = []
        self.node_records = {}
        self.calibrated = True
        self._collected = False

    # -- evidence ----------------------------------------------------------

    def prior_marginal(self, name):
        """Marginal of ``name`` with no evidence, as read at session open."""
        if name not in self.network:
            raise UnknownVariable(f"unknown variable {name!r}")
        return self._priors[name].copy()

    def prior(self, finding):
        return float(np.dot(self._priors[finding.variable.name], finding.mask))

    def enter_finding(self, finding):
        """Record ``P(finding)`` and apply its mask at the variable's entry clique.

        Raises
        ------
        ZeroPriorFinding
            If the finding is impossible under the model.
        """
        if finding.variable.name not in self.network:
            raise UnknownVariable(f"unknown variable {finding.variable.name!r}")
        p = self.prior(finding)
        if p <= 0:
            raise ZeroPriorFinding(f"finding {finding.label!r} has prior probability 0")
        home = self.tree.entry_home[finding.variable.name]
        self.findings.append(EnteredFinding(finding, home, p))
        self.beliefs[home] = apply_finding(self.beliefs[home], finding)
        self.calibrated = False
        self._collected = False
        return self

    def enter(self, name, state, label=""):
        return self.enter_finding(Finding.state(self.network[name], state, label))

    @property
    def priors(self):
        return [f.prior for f in self.findings]

    # -- message passing ----------------------------------------------------

    def _key(self, i, j):
        return (i, j) if i < j else (j, i)

    def absorb(self, receiver, senders):
        """Multiply ``receiver`` by each sender's sepset marginal over the stored sepset table.

        The stored table is then replaced by the sender marginal. Raises
        :class:`~bnconflict.errors.DivisionByZero` on an inconsistent message.
        """
        neighbors = self.tree.neighbors(receiver)
        belief = self.beliefs[receiver]
        for s in senders:
            if s not in neighbors:
                raise ValueError(f"clique {s} is not adjacent to {receiver}")
            key = self._key(receiver, s)
            message = marginalize(self.beliefs[s], self.tree.sepset(receiver, s))
            belief = multiply(belief, divide(message, self.sepsets[key]))
            self.sepsets[key] = message
        self.beliefs[receiver] = belief.transpose(self.tree.cliques[receiver].variables)
        return self.beliefs[receiver]

    def _collect(self, root, findings):
        self.beliefs = dict(getattr(self, "_base_beliefs", self.beliefs))
        self.sepsets = dict(getattr(self, "_base_sepsets", self.sepsets))
        for f in findings:
            self.beliefs[f.clique] = apply_finding(self.beliefs[f.clique], f.finding)
        own = {c.id: [] for c in self.tree.cliques}
        for k, f in enumerate(findings):
            own[f.clique].append(k)

        self.root = root
        self.children = {}
        self.node_records = {}
        self.subtree_findings = {}
        # iterative post-order: (node, parent)
        order, stack = [], [(root, None)]
        while stack:
            node, parent = stack.pop()
            order.append((node, parent))
            kids = [w for w in self.tree.neighbors(node) if w != parent]
            self.children[node] = kids
            stack.extend((w, node) for w in reversed(kids))
        for node, _ in reversed(order):
            kids = self.children[node]
            if kids:
                self.absorb(node, kids)
            self.beliefs[node], z = normalize(self.beliefs[node])
            record = z
            for w in kids:
                record *= self.node_records[w]
            self.node_records[node] = record
            self.subtree_findings[node] = sorted(
                own[node] + [k for w in kids for k in self.subtree_findings[w]]
            )
        self._evidence_probability = self.node_records[root]

    def collect_evidence(self, root=None):
        """Inward pass towards ``root``; fills ``node_records`` per clique."""
        if root is None:
            root = self.tree.auto_root()
        self._collect(root, self.findings)
        self._collected = True
        self.calibrated = False
        return self

    def _distribute(self, root):
        stack = [root]
        while stack:
            node = stack.pop()
            for w in self.children[node]:
                self.absorb(w, [node])
                self.beliefs[w], _ = normalize(self.beliefs[w])
                stack.append(w)
        self.calibrated = True

    def distribute_evidence(self, root=None):
        """Outward pass from the root used in the preceding collect."""
        if not self._collected:
            raise NotCalibrated("distribute_evidence requires a preceding collect_evidence")
        if root is not None and root != self.root:
            raise NotCalibrated(f"collect ran from clique {self.root}, not {root}")
        if self._evidence_probability > 0:
            self._distribute(self.root)
        else:
            self.calibrated = True
        return self

    def propagate(self, root=None):
        return self.collect_evidence(root).distribute_evidence()

    # -- queries ---------------------------------------------------------

    def evidence_probability(self):
        """``P`` of the conjunction of all entered findings (1.0 when none)."""
        if not self._collected:
            if not self.findings:
                return 1.0
            self.collect_evidence()
        return float(self._evidence_probability)

    @property
    def consistent(self):
        return self.evidence_probability() > 0

    def _require_posteriors(self):
        if not self.calibrated:
            self.propagate()
        if self.findings and self._evidence_probability <= 0:
            raise InconsistentEvidence("entered findings have probability 0")

    def _clique_marginal(self, clique, name):
        m = marginalize(self.beliefs[clique], [name]).values
        return m / m.sum()

    def marginal(self, name, clique=None):
        """Posterior distribution of ``name`` as a numpy vector."""
        if name not in self.network:
            raise UnknownVariable(f"unknown variable {name!r}")
        self._require_posteriors()
        if clique is None:
            clique = self.tree.entry_home[name]
        return self._clique_marginal(clique, name)

    def joint_marginal(self, names):
        """Normalized posterior over ``names``, axes in declaration order."""
        names = list(dict.fromkeys(names))
        for n in names:
            if n not in self.network:
                raise UnknownVariable(f"unknown variable {n!r}")
        hosts = [c for c in self.tree.cliques if set(names) <= set(c.variables)]
        if not hosts:
            raise NotCoveredByAnyClique(f"no clique contains all of {names}")
        self._require_posteriors()
        host = min(hosts, key=lambda c: (len(c.variables), c.id))
        table, _ = normalize(marginalize(self.beliefs[host.id], names))
        return table.transpose(self.network.sort_key(names))

    def clique_marginal_agreement(self):
        """Largest sepset disagreement between adjacent cliques."""
        worst = 0.0
        for a, b, s in self.tree.edges:
            ma = marginalize(self.beliefs[a], s).transpose(s).values
            mb = marginalize(self.beliefs[b], s).transpose(s).values
            worst = max(worst, float(np.max(np.abs(ma - mb))) if ma.size else 0.0)
        return worst


def open_session(tree):
    return Session(tree)
